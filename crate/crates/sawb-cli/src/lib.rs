//! Stage orchestration for the sea state estimation workbench.
//!
//! Subcommands map onto pipeline stages: `generate` writes a dataset and its
//! manifest, `train` fits estimator cells with cross-validation and saves
//! the canonical models, `evaluate` scores saved models on the held-out test
//! split, `analyze` emits residual and power-error tables plus SVG scatter
//! plots, and `reproduce` chains all stages into one deterministic run.

pub mod config;
pub mod stages;
pub mod svg;

use sawb_core::Error;

/// Exit codes: 0 success, 1 usage, 2 I/O, 3 numeric failure.
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Maps a pipeline error onto the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => EXIT_USAGE,
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        Error::Diverged { .. } => EXIT_NUMERIC,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::Domain("x".into())), 1);
        assert_eq!(
            exit_code(&Error::Format {
                path: "f".into(),
                reason: "r".into()
            }),
            2
        );
        assert_eq!(
            exit_code(&Error::Io {
                path: "f".into(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "missing")
            }),
            2
        );
        assert_eq!(exit_code(&Error::Diverged { epoch: 1, batch: 2 }), 3);
    }
}
