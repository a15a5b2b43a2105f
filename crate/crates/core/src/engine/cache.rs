use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use sha2::{Digest, Sha256};

use crate::weights::Store;

/// One file per key under a directory. The filename is the SHA-256 of the
/// key; the file holds the key, the payload checksum, then the payload.
/// Writes go through a temporary file and a rename, so a killed process
/// leaves either the old entry or the new one.
pub struct DiskCache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupt: AtomicUsize,
    writes: AtomicUsize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiskStats {
    pub hits: usize,
    pub misses: usize,
    /// Entries discarded because the key or checksum did not match.
    pub corrupt: usize,
    pub writes: usize,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl DiskCache {
    pub fn open(dir: impl AsRef<Path>) -> std::io::Result<DiskCache> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(DiskCache {
            dir: dir.as_ref().to_path_buf(),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            corrupt: AtomicUsize::new(0),
            writes: AtomicUsize::new(0),
        })
    }

    /// The directory named by `WSS_CACHE_DIR`, if set.
    pub fn from_env() -> Option<std::io::Result<DiskCache>> {
        std::env::var_os("WSS_CACHE_DIR").map(DiskCache::open)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, key: &str) -> PathBuf {
        self.dir.join(digest(key.as_bytes()))
    }

    pub fn stats(&self) -> DiskStats {
        DiskStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            corrupt: self.corrupt.load(Ordering::Relaxed),
            writes: self.writes.load(Ordering::Relaxed),
        }
    }

    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        let path = self.path_of(key);
        let Ok(bytes) = fs::read(&path) else {
            self.misses.fetch_add(1, Ordering::Relaxed);
            return None;
        };
        match parse_entry(&bytes, key) {
            Some(payload) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Some(payload.to_vec())
            }
            None => {
                self.corrupt.fetch_add(1, Ordering::Relaxed);
                self.misses.fetch_add(1, Ordering::Relaxed);
                let _ = fs::remove_file(&path);
                None
            }
        }
    }

    /// Idempotent: an existing valid entry for `key` is left alone.
    pub fn put(&self, key: &str, payload: &[u8]) -> std::io::Result<()> {
        assert!(!key.contains('\n'), "cache keys are single lines");
        let path = self.path_of(key);
        if fs::read(&path).ok().is_some_and(|b| parse_entry(&b, key).is_some()) {
            return Ok(());
        }
        static SEQ: AtomicUsize = AtomicUsize::new(0);
        let tmp = self.dir.join(format!(".tmp.{}.{}", std::process::id(), SEQ.fetch_add(1, Ordering::Relaxed)));
        {
            let mut f = fs::File::create(&tmp)?;
            writeln!(f, "{key}")?;
            writeln!(f, "{}", digest(payload))?;
            f.write_all(payload)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        self.writes.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }
}

fn parse_entry<'a>(bytes: &'a [u8], key: &str) -> Option<&'a [u8]> {
    let nl = bytes.iter().position(|&b| b == b'\n')?;
    if &bytes[..nl] != key.as_bytes() {
        return None;
    }
    let rest = &bytes[nl + 1..];
    let nl2 = rest.iter().position(|&b| b == b'\n')?;
    let payload = &rest[nl2 + 1..];
    (rest[..nl2] == *digest(payload).as_bytes()).then_some(payload)
}

impl Store for DiskCache {
    fn load(&self, key: &str) -> Option<String> {
        self.get(key).and_then(|b| String::from_utf8(b).ok())
    }

    fn save(&self, key: &str, value: &str) {
        // a failed write only costs a recomputation later
        if let Err(e) = self.put(key, value.as_bytes()) {
            log::warn!("cache write for {key} failed: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let c = DiskCache::open(dir.path()).unwrap();
        c.put("k|1", b"payload\nwith lines").unwrap();
        assert_eq!(c.get("k|1").unwrap(), b"payload\nwith lines");
        assert_eq!(c.get("k|2"), None);
        let text = fs::read_to_string(c.path_of("k|1")).unwrap();
        assert!(text.starts_with("k|1\n"));
        assert_eq!(c.path_of("k|1").file_name().unwrap().len(), 64);
    }

    #[test]
    fn corruption_is_discarded() {
        let dir = tempfile::tempdir().unwrap();
        let c = DiskCache::open(dir.path()).unwrap();
        c.put("key", b"12345").unwrap();
        let path = c.path_of("key");
        let mut bytes = fs::read(&path).unwrap();
        *bytes.last_mut().unwrap() = b'9';
        fs::write(&path, bytes).unwrap();
        assert_eq!(c.get("key"), None);
        assert_eq!(c.stats().corrupt, 1);
        assert!(!path.exists());
        c.put("key", b"12345").unwrap();
        assert_eq!(c.get("key").unwrap(), b"12345");
    }

    #[test]
    fn put_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let c = DiskCache::open(dir.path()).unwrap();
        c.put("a", b"x").unwrap();
        c.put("a", b"x").unwrap();
        assert_eq!(c.stats().writes, 1);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
