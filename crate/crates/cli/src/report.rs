//! JSON-lines run reports and certificate files, written atomically.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use keller_algebra::Certificate;
use keller_core::{Evidence, Verdict};
use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "keller";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub outcome: String,
    pub exit_code: i32,
    pub results: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(command: &str, arguments: &[String]) -> Self {
        RunReport {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            arguments: arguments.to_vec(),
            input_hash: None,
            config: None,
            outcome: String::new(),
            exit_code: 0,
            results: Value::Null,
            certificates: Vec::new(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Replaces `path` with `contents` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Appends one line to a JSON-lines file, or prints it for `-`.
pub fn append_line(path: &Path, line: &str) -> io::Result<()> {
    if path.as_os_str() == "-" {
        println!("{line}");
        return Ok(());
    }
    let mut contents = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e),
    };
    if !contents.is_empty() && !contents.ends_with(b"\n") {
        contents.push(b'\n');
    }
    contents.extend_from_slice(line.as_bytes());
    contents.push(b'\n');
    write_atomic(path, &contents)
}

/// Every certificate in a verdict tree, labelled by its path in the tree.
pub fn certificates<'a>(label: &str, verdict: &'a Verdict, out: &mut Vec<(String, &'a Certificate)>) {
    match &verdict.certificate {
        Some(Evidence::Basis {
            certificate: Some(cert), ..
        }) => out.push((label.to_string(), cert)),
        Some(Evidence::Parts { parts }) => {
            for (name, part) in parts {
                certificates(&format!("{label}-{name}"), part, out);
            }
        }
        _ => {}
    }
}

/// Writes certificates as `<hash prefix>-<label>.cert.json` under `dir`.
pub fn write_certificates(dir: &Path, hash: &str, certs: &[(String, &Certificate)]) -> io::Result<Vec<PathBuf>> {
    let prefix = &hash[..hash.len().min(12)];
    certs
        .iter()
        .map(|(label, cert)| {
            let path = dir.join(format!("{prefix}-{label}.cert.json"));
            let text = serde_json::to_string_pretty(cert).expect("certificate serializes");
            write_atomic(&path, text.as_bytes())?;
            Ok(path)
        })
        .collect()
}
