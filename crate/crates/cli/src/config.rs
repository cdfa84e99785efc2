//! Config loading, run headers and output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Prefix of the header line that carries the resolved config in outputs.
pub const CONFIG_LINE: &str = "# config: ";

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid config; exit code 2.
    Config(String),
    /// A verification step failed; exit code 3.
    Verification(String),
    /// Anything else; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<qlt_core::Error> for CliError {
    fn from(e: qlt_core::Error) -> Self {
        use qlt_core::Error as E;
        match e {
            E::Verification(_) | E::IncompleteCover { .. } => CliError::Verification(e.to_string()),
            E::InvalidArgument(_) | E::Unsupported(_) | E::QubitOutOfRange { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Configs carry their own seed so the embedded copy is self-contained.
pub trait Seeded {
    fn seed_mut(&mut self) -> &mut u64;
}

/// Reads a config from a TOML or JSON file, or from the `# config:` header
/// line of a previous output. No path means all defaults.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = if let Some(line) = text.lines().find_map(|l| l.strip_prefix(CONFIG_LINE)) {
        serde_json::from_str(line).map_err(|e| CliError::Config(format!("{}: embedded config: {e}", path.display())))?
    } else if path.extension().is_some_and(|e| e == "toml") {
        let v: toml::Value =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(v).map_err(|e| CliError::Config(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let at = e.path().to_string();
        CliError::Config(format!("{}: at `{at}`: {}", path.display(), e.into_inner()))
    })
}

/// Identity of one run, written at the top of every output.
#[derive(Clone, Debug)]
pub struct RunHeader {
    pub command: &'static str,
    pub seed: u64,
    pub config_json: String,
    pub config_hash: String,
}

impl RunHeader {
    pub fn new<T: Serialize>(command: &'static str, seed: u64, config: &T) -> CliResult<Self> {
        let config_json = serde_json::to_string(config).map_err(|e| CliError::Runtime(e.to_string()))?;
        let config_hash = hex::encode(Sha256::digest(config_json.as_bytes()));
        Ok(Self { command, seed, config_json, config_hash })
    }

    fn comment_lines(&self) -> String {
        format!(
            "# qlt {} {}\n# seed: {}\n# config_sha256: {}\n{CONFIG_LINE}{}\n",
            qlt_core::VERSION,
            self.command,
            self.seed,
            self.config_hash,
            self.config_json
        )
    }

    /// JSON object with the same fields, for JSON outputs.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::json!({
            "version": qlt_core::VERSION,
            "command": self.command,
            "seed": self.seed,
            "config_sha256": self.config_hash,
            "config": serde_json::from_str::<serde_json::Value>(&self.config_json).unwrap_or_default(),
        })
    }
}

/// Output directory plus the header stamped on each file.
pub struct Output {
    dir: PathBuf,
    header: RunHeader,
}

impl Output {
    pub fn create(dir: &Path, header: RunHeader) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn header(&self) -> &RunHeader {
        &self.header
    }

    fn open(&self, name: &str) -> CliResult<(PathBuf, fs::File)> {
        let path = self.dir.join(name);
        let f = fs::File::create(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        Ok((path, f))
    }

    /// CSV file: header comment lines, then one serialized record per row.
    pub fn csv<S: Serialize>(&self, name: &str, rows: &[S]) -> CliResult<PathBuf> {
        let (path, mut f) = self.open(name)?;
        f.write_all(self.header.comment_lines().as_bytes())?;
        let mut w = csv::Writer::from_writer(f);
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Trace CSV in the core schema, with the header comment lines.
    pub fn trace(&self, name: &str, trace: &qlt_core::optimizer::Trace) -> CliResult<PathBuf> {
        let (path, mut f) = self.open(name)?;
        f.write_all(self.header.comment_lines().as_bytes())?;
        trace.write_csv(&mut f)?;
        Ok(path)
    }

    /// Pretty JSON file `{"header": …, "data": …}`.
    pub fn json<S: Serialize>(&self, name: &str, data: &S) -> CliResult<PathBuf> {
        let (path, mut f) = self.open(name)?;
        let doc = serde_json::json!({ "header": self.header.to_value(), "data": data });
        serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| CliError::Runtime(e.to_string()))?;
        f.write_all(b"\n")?;
        Ok(path)
    }

    /// Raw text file, for formats that carry their own schema.
    pub fn text(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let (path, mut f) = self.open(name)?;
        f.write_all(body.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Deserialize, Serialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct Demo {
        n: usize,
        inner: Inner,
    }

    #[derive(Debug, Default, Deserialize, Serialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct Inner {
        shots: u64,
    }

    #[test]
    fn error_reports_field_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        fs::write(&p, "n = 3\n[inner]\nshots = \"many\"\n").unwrap();
        let err = load::<Demo>(Some(&p)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("inner.shots"), "{err}");
    }

    #[test]
    fn toml_json_and_embedded_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        fs::write(&t, "n = 3\n[inner]\nshots = 7\n").unwrap();
        let j = dir.path().join("c.json");
        fs::write(&j, r#"{"n": 3, "inner": {"shots": 7}}"#).unwrap();
        let a: Demo = load(Some(&t)).unwrap();
        let b: Demo = load(Some(&j)).unwrap();
        assert_eq!(a, b);
        let h = RunHeader::new("demo", 1, &a).unwrap();
        let out = Output::create(dir.path(), h).unwrap();
        let p = out.csv("x.csv", &[(1, 2.5)]).unwrap();
        let c: Demo = load(Some(&p)).unwrap();
        assert_eq!(a, c);
    }
}
