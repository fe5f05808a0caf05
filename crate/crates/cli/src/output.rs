//! Output files: CSV or JSON tables, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pdamp_core::io::{write_rows, write_rows_json};
use pdamp_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// Output directory plus table format.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: PathBuf,
    format: Format,
}

impl Sink {
    pub fn new(dir: PathBuf, format: Format) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir, format })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Writes a numeric table to `<stem>.csv` or `<stem>.json`.
    pub fn table<I>(&self, stem: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator,
        I::Item: AsRef<[f64]>,
    {
        let name = format!("{stem}.{}", self.format.extension());
        let format = self.format;
        self.file(&name, |w| match format {
            Format::Csv => write_rows(w, header, rows),
            Format::Json => write_rows_json(w, header, rows),
        })
    }

    /// Writes `name` through a temporary sibling and renames it into place.
    pub fn file(&self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.dir.join(name);
        write_atomic(&path, &buf)?;
        Ok(path)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}
