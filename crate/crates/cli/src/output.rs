use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Failure to create or write an output file.
#[derive(Debug)]
pub struct OutputError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

impl fmt::Display for OutputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot write output path {}: {}", self.path.display(), self.source)
    }
}

impl std::error::Error for OutputError {}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError { path: path.to_path_buf(), source }
}

#[derive(Debug, Serialize)]
pub struct Envelope<P: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    /// `required` checks decide the exit status; `conjecture` ones never do.
    pub tier: &'static str,
    pub parameters: P,
    pub passed: bool,
    pub result: R,
}

/// Where results go: files in a directory, or the main JSON on stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, OutputError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(io_err(d))?;
            if !d.is_dir() {
                return Err(OutputError {
                    path: d.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
                });
            }
        }
        Ok(Sink { dir })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` into the output directory; a no-op without one.
    pub fn file(&self, name: &str, contents: &[u8]) -> Result<(), OutputError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))
    }

    /// The command's main JSON document: `<command>.json` or stdout.
    pub fn main_json<T: Serialize>(&self, command: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        if self.dir.is_some() {
            self.file(&format!("{command}.json"), text.as_bytes())?;
        } else {
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

/// Writes a file given by an explicit path (not relative to the sink).
pub fn write_path(path: &Path, write: impl FnOnce(fs::File) -> hubbard_lax::Result<()>) -> anyhow::Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write(file).map_err(|e| match e {
        hubbard_lax::Error::Io(source) => anyhow::Error::new(OutputError { path: path.to_path_buf(), source }),
        other => other.into(),
    })
}
