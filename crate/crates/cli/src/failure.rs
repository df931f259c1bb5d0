use std::process::ExitCode;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_ABSTAIN: u8 = 3;

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CliResult<T> = Result<T, Failure>;

impl Failure {
    pub fn usage(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            error,
        }
    }

    pub fn data(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_DATA,
            error,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl From<ssrcps_core::Error> for Failure {
    fn from(e: ssrcps_core::Error) -> Self {
        if e.is_data_error() {
            Self::data(e.into())
        } else {
            Self::usage(e.into())
        }
    }
}

/// Attaches a context line and keeps the exit-code classification.
pub trait Context<T> {
    fn context_with(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for Result<T, ssrcps_core::Error> {
    fn context_with(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| {
            let mut f = Failure::from(e);
            f.error = f.error.context(what());
            f
        })
    }
}
