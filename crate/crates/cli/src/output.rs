//! Run outputs: atomic writes, full-precision floats, a tiny CSV builder.
//!
//! Every file is written to a temp name and renamed into place, so a run
//! directory only ever holds complete files. Numeric output carries 17
//! significant digits; summaries round to 6 for humans.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn human(x: f64) -> String {
    format!("{x:.6}")
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(path)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self {
            root: path.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let tmp = self.root.join(format!("{name}.tmp"));
        std::fs::write(&tmp, contents)?;
        std::fs::rename(&tmp, self.root.join(name))?;
        Ok(())
    }

    pub fn write_vector(&self, name: &str, values: &[f64]) -> Result<(), CliError> {
        let mut s = String::with_capacity(values.len() * 24);
        for &v in values {
            let _ = writeln!(s, "{}", full(v));
        }
        self.write(name, &s)
    }
}

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "csv row arity");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
