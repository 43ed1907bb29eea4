use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use crate::cpg::{build_cpg, CacheHeader, Cpg};
use crate::frontend::SourceFile;

/// Where a graph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Memory,
    Disk,
    Built,
}

impl CacheOutcome {
    pub fn is_hit(self) -> bool {
        self != CacheOutcome::Built
    }
}

/// Graph cache keyed by source hash and language: an in-memory LRU in front
/// of a directory of `<hash>-<language>.cpg` files. Disk entries are evicted
/// least-recently-used first (by modification time, refreshed on every hit)
/// once more than `max_entries` exist. Builds for the same key are
/// serialized, so racing requests build at most once.
pub struct CpgCache {
    root: PathBuf,
    max_entries: usize,
    memory: Mutex<Vec<(String, Arc<Cpg>)>>,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    builds: AtomicUsize,
}

impl CpgCache {
    pub fn new(root: impl Into<PathBuf>, max_entries: usize) -> Self {
        CpgCache {
            root: root.into(),
            max_entries: max_entries.max(1),
            memory: Mutex::new(Vec::new()),
            key_locks: Mutex::new(HashMap::new()),
            builds: AtomicUsize::new(0),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Number of graph builds performed by this cache.
    pub fn builds(&self) -> usize {
        self.builds.load(Ordering::SeqCst)
    }

    pub fn entry_path(&self, hash: &str, language: &str) -> PathBuf {
        self.root.join(format!("{hash}-{language}.cpg"))
    }

    /// Returns the graph for `files`, loading it from memory or disk when
    /// present and building (then storing) it otherwise. A failure to write
    /// the cache file does not fail the call.
    pub fn get_or_build(&self, files: Vec<SourceFile>, hash: &str, language: &str) -> (Arc<Cpg>, CacheOutcome) {
        let key = format!("{hash}-{language}");
        let lock = {
            let mut locks = self.key_locks.lock().unwrap();
            locks.entry(key.clone()).or_default().clone()
        };
        let _guard = lock.lock().unwrap();

        if let Some(cpg) = self.memory_hit(&key) {
            touch(&self.entry_path(hash, language));
            return (cpg, CacheOutcome::Memory);
        }
        let path = self.entry_path(hash, language);
        if let Some(cpg) = load(&path, hash, language) {
            touch(&path);
            let cpg = Arc::new(cpg);
            self.remember(key, cpg.clone());
            return (cpg, CacheOutcome::Disk);
        }
        self.builds.fetch_add(1, Ordering::SeqCst);
        let cpg = Arc::new(build_cpg(files));
        let _ = self.store(&path, &cpg.to_cache_bytes(&CacheHeader::new(hash, language)));
        self.remember(key, cpg.clone());
        (cpg, CacheOutcome::Built)
    }

    fn memory_hit(&self, key: &str) -> Option<Arc<Cpg>> {
        let mut mem = self.memory.lock().unwrap();
        let pos = mem.iter().position(|(k, _)| k == key)?;
        let entry = mem.remove(pos);
        let cpg = entry.1.clone();
        mem.push(entry);
        Some(cpg)
    }

    fn remember(&self, key: String, cpg: Arc<Cpg>) {
        let mut mem = self.memory.lock().unwrap();
        mem.retain(|(k, _)| *k != key);
        mem.push((key, cpg));
        while mem.len() > self.max_entries {
            mem.remove(0);
        }
    }

    fn store(&self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        fs::create_dir_all(&self.root)?;
        let tmp = self
            .root
            .join(format!(".{}.{}.tmp", uuid::Uuid::new_v4(), std::process::id()));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)?;
        self.evict()
    }

    fn evict(&self) -> std::io::Result<()> {
        let mut entries: Vec<(SystemTime, PathBuf)> = fs::read_dir(&self.root)?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "cpg"))
            .map(|p| {
                let mtime = fs::metadata(&p)
                    .and_then(|m| m.modified())
                    .unwrap_or(SystemTime::UNIX_EPOCH);
                (mtime, p)
            })
            .collect();
        entries.sort();
        let excess = entries.len().saturating_sub(self.max_entries);
        for (_, p) in entries.into_iter().take(excess) {
            let _ = fs::remove_file(p);
        }
        Ok(())
    }
}

fn load(path: &Path, hash: &str, language: &str) -> Option<Cpg> {
    let bytes = fs::read(path).ok()?;
    let (header, cpg) = Cpg::from_cache_bytes(&bytes).ok()?;
    (header.source_hash == hash && header.language == language).then_some(cpg)
}

fn touch(path: &Path) {
    if let Ok(f) = fs::File::options().append(true).open(path) {
        let _ = f.set_modified(SystemTime::now());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files() -> Vec<SourceFile> {
        vec![SourceFile::new("a.c", "int f(int x) { return x + 1; }")]
    }

    #[test]
    fn builds_once_then_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CpgCache::new(dir.path(), 4);
        let (a, o1) = cache.get_or_build(files(), "h1", "c");
        let (b, o2) = cache.get_or_build(files(), "h1", "c");
        assert_eq!((o1, o2), (CacheOutcome::Built, CacheOutcome::Memory));
        assert_eq!(cache.builds(), 1);
        assert!(Arc::ptr_eq(&a, &b));
        assert!(cache.entry_path("h1", "c").exists());

        // A fresh cache over the same directory loads from disk.
        let cold = CpgCache::new(dir.path(), 4);
        let (c, o3) = cold.get_or_build(files(), "h1", "c");
        assert_eq!(o3, CacheOutcome::Disk);
        assert_eq!(cold.builds(), 0);
        assert_eq!(*c, *a);
    }

    #[test]
    fn corrupt_entry_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CpgCache::new(dir.path(), 4);
        fs::write(cache.entry_path("h2", "c"), b"garbage").unwrap();
        let (_, outcome) = cache.get_or_build(files(), "h2", "c");
        assert_eq!(outcome, CacheOutcome::Built);
        assert!(load(&cache.entry_path("h2", "c"), "h2", "c").is_some());
    }

    #[test]
    fn evicts_beyond_limit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CpgCache::new(dir.path(), 2);
        for h in ["k1", "k2", "k3"] {
            cache.get_or_build(files(), h, "c");
            std::thread::sleep(std::time::Duration::from_millis(20));
        }
        let count = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(count, 2);
        assert!(!cache.entry_path("k1", "c").exists());
    }

    #[test]
    fn racing_requests_build_once() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Arc::new(CpgCache::new(dir.path(), 4));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let cache = cache.clone();
                std::thread::spawn(move || cache.get_or_build(files(), "race", "c").1)
            })
            .collect();
        let outcomes: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(cache.builds(), 1);
        assert_eq!(outcomes.iter().filter(|o| **o == CacheOutcome::Built).count(), 1);
    }
}
