//! Library surface of the match runner: transcript IO, strategy parsing,
//! lemma checkers, fuzzing and experiment sweeps. The binary in `main.rs`
//! is a thin command-line wrapper over these.

pub mod experiment;
pub mod fuzz;
pub mod jsonl;
pub mod lemmas;
pub mod oracle_file;
pub mod strategies;
