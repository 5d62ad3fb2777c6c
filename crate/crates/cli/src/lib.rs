//! The `intentseq` command-line tool.
//!
//! [`run`] parses arguments, dispatches one subcommand and maps the outcome
//! to an exit code: 0 on success, 1 on a usage error, 2 on a runtime error.

mod args;
mod commands;
mod manifest;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::Parser;

pub use args::Cli;
pub use manifest::{manifest_path, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const THREADS_ENV: &str = "INTENTSEQ_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UsageError {
    UnknownFlag(String),
    MissingRequired(String),
    ConflictingFlags(String, String),
    InvalidValue {
        flag: String,
        value: String,
        reason: String,
    },
    Other(String),
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageError::UnknownFlag(flag) => write!(f, "unknown flag `{flag}`"),
            UsageError::MissingRequired(flag) => write!(f, "missing required flag `{flag}`"),
            UsageError::ConflictingFlags(a, b) => {
                write!(f, "flag `{a}` cannot be combined with `{b}`")
            }
            UsageError::InvalidValue {
                flag,
                value,
                reason,
            } => {
                write!(f, "invalid value `{value}` for `{flag}`")?;
                if !reason.is_empty() {
                    write!(f, ": {reason}")?;
                }
                Ok(())
            }
            UsageError::Other(msg) => f.write_str(msg),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Runtime(intentseq_core::Error),
    /// A runtime error tied to a file or directory.
    RuntimeAt(PathBuf, intentseq_core::Error),
}

pub(crate) trait PathContext<T> {
    fn at(self, path: &Path) -> Result<T, CliError>;
}

impl<T, E: Into<intentseq_core::Error>> PathContext<T> for Result<T, E> {
    fn at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|e| CliError::RuntimeAt(path.to_path_buf(), e.into()))
    }
}

impl From<intentseq_core::Error> for CliError {
    fn from(e: intentseq_core::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

fn context_string(err: &clap::Error, kind: ContextKind) -> Option<String> {
    match err.get(kind)? {
        ContextValue::String(s) => Some(s.clone()),
        ContextValue::Strings(v) => Some(v.join(", ")),
        other => Some(other.to_string()),
    }
}

/// `--model <MODEL>` becomes `--model`.
fn flag_name(arg: &str) -> String {
    arg.split_whitespace().next().unwrap_or(arg).to_string()
}

fn usage_from_clap(err: &clap::Error) -> UsageError {
    let arg = context_string(err, ContextKind::InvalidArg).unwrap_or_default();
    match err.kind() {
        ErrorKind::UnknownArgument => UsageError::UnknownFlag(arg),
        ErrorKind::MissingRequiredArgument => {
            // groups render as `<--a <A>|--b <B>>`
            let flags: Vec<String> = arg
                .split(", ")
                .map(|a| {
                    let inner = a
                        .strip_prefix('<')
                        .and_then(|a| a.strip_suffix('>'))
                        .unwrap_or(a);
                    inner
                        .split('|')
                        .map(flag_name)
                        .collect::<Vec<_>>()
                        .join(" or ")
                })
                .collect();
            UsageError::MissingRequired(flags.join(", "))
        }
        ErrorKind::ArgumentConflict => UsageError::ConflictingFlags(
            flag_name(&arg),
            flag_name(&context_string(err, ContextKind::PriorArg).unwrap_or_default()),
        ),
        ErrorKind::InvalidValue | ErrorKind::ValueValidation => UsageError::InvalidValue {
            flag: flag_name(&arg),
            value: context_string(err, ContextKind::InvalidValue).unwrap_or_default(),
            reason: context_string(err, ContextKind::ValidValue)
                .map(|v| format!("expected one of {v}"))
                .unwrap_or_default(),
        },
        _ => UsageError::Other(err.to_string().trim_end().to_string()),
    }
}

fn thread_cap() -> Result<Option<usize>, UsageError> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(None);
    };
    let text = raw.to_string_lossy().into_owned();
    match text.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(Some(n)),
        _ => Err(UsageError::InvalidValue {
            flag: THREADS_ENV.to_string(),
            value: text,
            reason: "expected a positive integer".into(),
        }),
    }
}

fn report_usage(e: &UsageError) -> i32 {
    eprintln!("error: {e}\n\nFor more information, try '--help'.");
    EXIT_USAGE
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .try_init();

    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    EXIT_OK
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprint!("{err}");
                    EXIT_USAGE
                }
                _ => report_usage(&usage_from_clap(&err)),
            };
        }
    };
    match thread_cap() {
        Ok(Some(n)) => {
            // a pool may already exist when run() is called repeatedly in one process
            if rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .is_err()
            {
                log::debug!("global thread pool already initialized");
            }
        }
        Ok(None) => {}
        Err(e) => return report_usage(&e),
    }

    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(e)) => report_usage(&e),
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
        Err(CliError::RuntimeAt(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn usage(args: &[&str]) -> UsageError {
        usage_from_clap(&Cli::try_parse_from(args).unwrap_err())
    }

    #[test]
    fn clap_errors_map_to_named_flags() {
        assert_eq!(
            usage(&["intentseq", "synth", "--out", "d", "--zap"]),
            UsageError::UnknownFlag("--zap".into())
        );
        assert_eq!(
            usage(&["intentseq", "infer", "--model", "m", "--input", "i"]),
            UsageError::MissingRequired("--out".into())
        );
        assert_eq!(
            usage(&["intentseq", "bench", "--kind", "gru", "--model", "m"]),
            UsageError::ConflictingFlags("--kind".into(), "--model".into())
        );
        match usage(&["intentseq", "synth", "--out", "d", "--difficulty", "medium"]) {
            UsageError::InvalidValue { flag, value, .. } => {
                assert_eq!(flag, "--difficulty");
                assert_eq!(value, "medium");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_sits_next_to_artifact() {
        assert_eq!(
            manifest_path(Path::new("/tmp/none/model.ckpt")),
            Path::new("/tmp/none/model.ckpt.manifest.json")
        );
        let dir = std::env::temp_dir();
        assert_eq!(manifest_path(&dir), dir.join("run.manifest.json"));
    }
}
