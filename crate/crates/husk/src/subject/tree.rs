//! Copying and hashing of subject source trees.
//!
//! Campaigns never build inside the user's tree: they work on copies with
//! isolated target directories. The tree hash is the identity of a source
//! tree; it drives stale-cache detection and the post-campaign pristineness
//! check.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use walkdir::WalkDir;

/// Directory names never copied or hashed (build output, VCS, tool output).
const SKIP_DIRS: &[&str] = &["target", ".git", "husk-out", "node_modules"];

/// Files excluded from the tree hash (regenerated by builds).
const SKIP_HASH_FILES: &[&str] = &["Cargo.lock"];

fn is_skipped_dir(entry: &walkdir::DirEntry) -> bool {
    entry.file_type().is_dir()
        && entry
            .file_name()
            .to_str()
            .is_some_and(|name| SKIP_DIRS.contains(&name))
}

/// Relative paths (unix separators) of all source files under `root`,
/// sorted.
pub fn source_files(root: &Path) -> io::Result<Vec<String>> {
    let mut files = Vec::new();
    let walker = WalkDir::new(root).into_iter().filter_entry(|e| !is_skipped_dir(e));
    for entry in walker {
        let entry = entry.map_err(io::Error::other)?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .map_err(io::Error::other)?
            .to_string_lossy()
            .replace('\\', "/");
        files.push(rel);
    }
    files.sort();
    Ok(files)
}

/// Copy the tree at `src` into `dst` (created if needed), skipping build
/// output and VCS directories.
pub fn copy_tree(src: &Path, dst: &Path) -> io::Result<()> {
    fs::create_dir_all(dst)?;
    for rel in source_files(src)? {
        let from = src.join(&rel);
        let to = dst.join(&rel);
        if let Some(parent) = to.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::copy(&from, &to)?;
    }
    Ok(())
}

/// Content hash of the tree: sha256 over sorted (path, bytes) pairs,
/// excluding build artifacts and lockfiles.
pub fn tree_hash(root: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    for rel in source_files(root)? {
        if SKIP_HASH_FILES
            .iter()
            .any(|f| rel == *f || rel.ends_with(&format!("/{f}")))
        {
            continue;
        }
        let bytes = fs::read(root.join(&rel))?;
        hasher.update(rel.as_bytes());
        hasher.update([0u8]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex(&hasher.finalize()))
}

/// sha256 of one file's content, hex encoded.
pub fn file_hash(path: &Path) -> io::Result<String> {
    Ok(content_hash(&fs::read(path)?))
}

/// sha256 of a byte slice, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Scratch home for one campaign: tree copies plus their target dirs, all
/// removed on drop.
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn create() -> io::Result<Workspace> {
        let root = std::env::temp_dir().join(format!(
            "husk-work-{}-{}",
            std::process::id(),
            unique_suffix()
        ));
        fs::create_dir_all(&root)?;
        Ok(Workspace { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

impl Drop for Workspace {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.root);
    }
}

fn unique_suffix() -> String {
    use std::sync::atomic::{AtomicU64, Ordering};
    use std::time::{SystemTime, UNIX_EPOCH};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let t = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    format!("{}-{n}", t.as_nanos())
}
