//! Atomic artifact writes and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir.display(), e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path.display(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path.display(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path.display(), e.error))?;
    Ok(())
}

pub fn json_bytes<V: Serialize>(value: &V) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::io("json", e))?;
    v.push(b'\n');
    Ok(v)
}

/// Output directory that remembers the checksum of everything written.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    config_sha256: &'a str,
    versions: BTreeMap<&'static str, &'static str>,
    outputs: &'a BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn outputs(&self) -> &BTreeMap<String, String> {
        &self.checksums
    }

    /// Writes `manifest.json`; contents depend only on the inputs.
    pub fn finish(self, experiment: &str, config_sha256: &str) -> CliResult<PathBuf> {
        let versions = BTreeMap::from([
            ("kerrgate", kerrgate::VERSION),
            ("kerrgate-cli", env!("CARGO_PKG_VERSION")),
        ]);
        let manifest = Manifest {
            experiment,
            config_sha256,
            versions,
            outputs: &self.checksums,
        };
        let path = self.dir.join(MANIFEST);
        write_atomic(&path, &json_bytes(&manifest)?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn manifest_lists_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("run")).unwrap();
        out.write("x.csv", b"a,b\n").unwrap();
        let m = out.finish("gate", "abc").unwrap();
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(m).unwrap()).unwrap();
        assert_eq!(v["outputs"]["x.csv"], sha256_hex(b"a,b\n"));
        assert_eq!(v["config_sha256"], "abc");
    }
}
