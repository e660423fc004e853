use crate::config::RunConfig;
use crate::error::{io_error, CliResult};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

/// 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `step,observable_name,value` rows.
#[derive(Default)]
pub struct Series {
    text: String,
}

impl Series {
    pub fn new() -> Self {
        Self { text: String::from("step,observable_name,value\n") }
    }

    pub fn push(&mut self, step: u64, name: &str, value: f64) {
        writeln!(self.text, "{step},{name},{}", float(value)).expect("writing to a String");
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(config: &RunConfig) -> CliResult<Self> {
        std::fs::create_dir_all(&config.out).map_err(io_error(&config.out))?;
        let dir = Self { root: config.out.clone() };
        dir.json("manifest.json", &config.manifest())?;
        Ok(dir)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn text(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(io_error(path))
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }
}
