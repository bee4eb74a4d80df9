//! AES-128 built from its field arithmetic up, with three interchangeable
//! MixColumns strategies, multiple-encryption variants (double, two-key
//! triple, AESX, AES-EXE), a known-answer-test runner and a benchmark
//! harness that counts field operations per block.

pub mod aes;
pub mod bench;
pub mod cli;
pub mod count;
pub mod gf256;
pub mod variants;
pub mod vectors;

use thiserror::Error;

/// A variant or strategy name that is not recognized.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} `{name}`")]
pub struct UnknownName {
    pub kind: &'static str,
    pub name: String,
}

impl UnknownName {
    pub(crate) fn new(kind: &'static str, name: &str) -> Self {
        UnknownName {
            kind,
            name: name.to_string(),
        }
    }
}
