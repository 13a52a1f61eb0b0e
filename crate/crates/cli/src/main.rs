//! `hbb`: kernels, lattices, Carleson statistics and Toeplitz truncations
//! from the command line.

mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Exit status for invalid parameters and malformed input documents.
const EXIT_INVALID: u8 = 2;
/// Exit status for failed audits, failed checks and numerical failures.
const EXIT_FAILED: u8 = 1;

pub(crate) struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<harmonic_besov::Error> for Failure {
    fn from(e: harmonic_besov::Error) -> Self {
        use harmonic_besov::Error::*;
        let code = match e {
            Truncation { .. } | PositivityViolation { .. } => EXIT_FAILED,
            Domain(_) | Parameter { .. } | UnsupportedDimension(_) | Precondition(_) | Schema { .. } | Io(_) => {
                EXIT_INVALID
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

/// What a command produced: the document for the output sink, an optional
/// summary for stderr, and whether the run counts as failed.
pub(crate) struct Output {
    pub body: String,
    pub summary: Option<String>,
    pub failed: bool,
}

impl Output {
    pub fn doc(body: String) -> Self {
        Output {
            body,
            summary: None,
            failed: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("hbb: cannot size the thread pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match run::dispatch(&cli) {
        Ok(out) => {
            if let Some(s) = &out.summary {
                eprintln!("{s}");
            }
            if let Err(e) = emit(&cli.global.output, &out.body) {
                eprintln!("hbb: {e}");
                return ExitCode::from(EXIT_FAILED);
            }
            if out.failed {
                ExitCode::from(EXIT_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("hbb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(path: &Option<std::path::PathBuf>, body: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}
