use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chainforge::ErrorKind;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{EXIT_NUMERICAL, EXIT_VALIDATION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] chainforge::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("{path} is not a valid {what}: {source}")]
    Parse {
        path: String,
        what: &'static str,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("server failed: {0}")]
    Serve(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Numerical | ErrorKind::Cancelled => EXIT_NUMERICAL,
                ErrorKind::Validation | ErrorKind::Io => EXIT_VALIDATION,
            },
            _ => EXIT_VALIDATION,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn display(path: Option<&Path>) -> String {
    match path {
        Some(p) if p != Path::new("-") => p.display().to_string(),
        _ => "<stdin>".into(),
    }
}

/// Reads a JSON document from a file, or stdin for `None`/`-`.
pub fn read_json<T: DeserializeOwned>(path: Option<&Path>, what: &'static str) -> CliResult<T> {
    let name = display(path);
    let mut text = String::new();
    let res = match path {
        Some(p) if p != Path::new("-") => {
            File::open(p).and_then(|mut f| f.read_to_string(&mut text))
        }
        _ => io::stdin().read_to_string(&mut text),
    };
    res.map_err(|source| CliError::Read {
        path: name.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| match source.classify() {
        // a failed invariant check inside the type surfaces as a data error
        serde_json::error::Category::Data => CliError::Invalid(format!("{name}: {source}")),
        _ => CliError::Parse {
            path: name,
            what,
            source,
        },
    })
}

pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Output { path }
    }

    pub fn is_stdout(&self) -> bool {
        self.path.is_none()
    }

    /// Runs `f` on a buffered writer for the target and flushes it.
    pub fn write_with<F>(&self, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut dyn Write) -> CliResult<()>,
    {
        let name = self
            .path
            .as_ref()
            .map_or("<stdout>".into(), |p| p.display().to_string());
        let wrap = |source| CliError::Write {
            path: name.clone(),
            source,
        };
        match &self.path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p).map_err(wrap)?);
                f(&mut w)?;
                w.flush().map_err(wrap)
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                f(&mut w)?;
                w.flush().map_err(wrap)
            }
        }
    }

    pub fn write_json<T: Serialize>(&self, value: &T, meta: bool) -> CliResult<()> {
        let mut doc = serde_json::to_value(value).expect("serialisable output");
        if meta {
            if let Value::Object(map) = &mut doc {
                map.insert("meta".into(), meta_block());
            }
        }
        let name = self
            .path
            .as_ref()
            .map_or("<stdout>".into(), |p| p.display().to_string());
        self.write_with(|w| {
            serde_json::to_writer_pretty(&mut *w, &doc)
                .map_err(io::Error::from)
                .and_then(|_| writeln!(w))
                .map_err(|source| CliError::Write { path: name, source })
        })
    }
}

fn meta_block() -> Value {
    json!({
        "tool": concat!("chainforge ", env!("CARGO_PKG_VERSION")),
        "created": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}
