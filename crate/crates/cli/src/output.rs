use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Why a run did not exit 0.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or inadmissible input; exit 2.
    Input(String),
    /// An asserted property failed; exit 1. The counterexample has been written.
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Violation(m) => write!(f, "violation: {m}"),
        }
    }
}

impl From<needlekit_core::Error> for Failure {
    fn from(e: needlekit_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub type Run<T = ()> = Result<T, Failure>;

pub struct Out {
    dir: PathBuf,
}

impl Out {
    pub fn new(dir: &Path) -> Run<Out> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        Ok(Out { dir: dir.to_path_buf() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Run<PathBuf> {
        let path = self.path(name);
        let io = |e: csv::Error| Failure::Input(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Run<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
        self.text(name, &(text + "\n"))
    }

    pub fn text(&self, name: &str, text: &str) -> Run<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
