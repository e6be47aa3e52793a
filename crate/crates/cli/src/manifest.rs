use crate::exit::Failure;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Plain-text record of one command run, written on success and failure.
pub struct RunManifest {
    pub command: String,
    /// Fully resolved configuration, one `key = value` per line.
    pub config: String,
    pub version: String,
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<PathBuf>,
    pub summary: Vec<(String, String)>,
    pub error: Option<String>,
    pub exit_code: u8,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.into(),
            config: String::new(),
            version: env!("CARGO_PKG_VERSION").into(),
            started: now(),
            finished: 0.0,
            outputs: Vec::new(),
            summary: Vec::new(),
            error: None,
            exit_code: 0,
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "command = {}", self.command).unwrap();
        writeln!(s, "version = {}", self.version).unwrap();
        writeln!(s, "started_unix = {:.3}", self.started).unwrap();
        writeln!(s, "finished_unix = {:.3}", self.finished).unwrap();
        writeln!(s, "exit_code = {}", self.exit_code).unwrap();
        if let Some(e) = &self.error {
            writeln!(s, "error = {}", e.replace('\n', " ")).unwrap();
        }
        writeln!(s, "\n[summary]").unwrap();
        for (k, v) in &self.summary {
            writeln!(s, "{k} = {v}").unwrap();
        }
        writeln!(s, "\n[outputs]").unwrap();
        for p in &self.outputs {
            writeln!(s, "{}", p.display()).unwrap();
        }
        writeln!(s, "\n[config]").unwrap();
        s.push_str(&self.config);
        s
    }

    /// Close the record with `outcome`, write it into `dir` and return the
    /// exit code. Failures are also reported on stderr.
    pub fn finish(mut self, dir: &Path, outcome: Result<u8, Failure>) -> u8 {
        self.finished = now();
        match outcome {
            Ok(code) => self.exit_code = code,
            Err(f) => {
                eprintln!("error: {}", f.message);
                self.exit_code = f.code;
                self.error = Some(f.message);
            }
        }
        let path = dir.join(MANIFEST_NAME);
        let written = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, self.render()));
        if let Err(e) = written {
            eprintln!("error: cannot write {}: {e}", path.display());
        }
        self.exit_code
    }
}
