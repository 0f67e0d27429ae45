use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use coincount::Error;
use tempfile::NamedTempFile;

/// Files staged next to their destinations and moved into place together by
/// [`Staged::commit`]. Dropping without committing leaves nothing behind.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn add(&mut self, path: &Path, content: &[u8]) -> Result<(), Error> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(content)?;
        tmp.flush()?;
        self.files.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<(), Error> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (tmp, dest) in self.files {
            if let Err(e) = tmp.persist(&dest) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::Io(e.error));
            }
            done.push(dest);
        }
        Ok(())
    }
}
