// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Command failures, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input or configuration. Exit code 2.
    #[error("usage error: {0}")]
    Usage(String),
    /// A numerical routine failed. Exit code 1.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }

    pub fn usage(what: impl std::fmt::Display) -> Self {
        CliError::Usage(what.to_string())
    }

    pub fn numeric(what: impl std::fmt::Display) -> Self {
        CliError::Numeric(what.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
