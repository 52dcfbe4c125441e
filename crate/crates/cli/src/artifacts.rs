use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST: &str = "manifest.csv";

/// Writes files into one directory via temp file + rename and remembers
/// their checksums for the manifest.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    written: BTreeMap<String, (String, usize)>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(&target))?;
    tmp.as_file().sync_all().map_err(io_err(&target))?;
    tmp.persist(&target).map_err(|e| CliError::Io {
        path: target.clone(),
        source: e.error,
    })?;
    Ok(())
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self {
            dir,
            written: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        if name == MANIFEST || name.contains(['/', '\\']) {
            return Err(CliError::Parse(format!("invalid artifact name `{name}`")));
        }
        write_atomic(&self.dir, name, contents.as_bytes())?;
        self.written
            .insert(name.to_string(), (sha256_hex(contents.as_bytes()), contents.len()));
        Ok(())
    }

    /// Names written so far, sorted.
    pub fn files(&self) -> Vec<&str> {
        self.written.keys().map(String::as_str).collect()
    }

    /// `file,sha256,bytes`, sorted by file name.
    pub fn manifest(&self) -> String {
        let mut s = String::from("file,sha256,bytes\n");
        for (name, (hash, len)) in &self.written {
            writeln!(s, "{name},{hash},{len}").unwrap();
        }
        s
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        write_atomic(&self.dir, MANIFEST, self.manifest().as_bytes())?;
        Ok(self.dir.join(MANIFEST))
    }
}
