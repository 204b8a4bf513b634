//! Body replacement with guaranteed byte-identical revert.
//!
//! At most one patch is applied to a tree at a time (single-writer). The
//! handle restores the original bytes on revert or on drop, so an error path
//! that unwinds mid-mutant still leaves the tree pristine.

use std::fs;
use std::path::{Path, PathBuf};

use husk_core::Span;

use crate::error::PatchError;
use crate::subject::tree::content_hash;

/// A live patch; reverting restores the file byte for byte.
#[derive(Debug)]
pub struct AppliedPatch {
    path: PathBuf,
    original: Vec<u8>,
    reverted: bool,
}

/// Replace `span` of `file_rel` (relative to `root`) with `replacement`.
///
/// Refuses with [`PatchError::StaleSpan`] when the file content hash no
/// longer equals `expected_hash` captured at discovery; the file is left
/// untouched in every error case.
pub fn apply_mutation(
    root: &Path,
    file_rel: &str,
    span: Span,
    replacement: &str,
    expected_hash: &str,
) -> Result<AppliedPatch, PatchError> {
    let path = root.join(file_rel);
    let original = fs::read(&path).map_err(|source| PatchError::Io { path: path.clone(), source })?;
    if content_hash(&original) != expected_hash {
        return Err(PatchError::StaleSpan { file: file_rel.to_string() });
    }
    if span.end > original.len() || span.start > span.end {
        return Err(PatchError::SpanOutOfBounds {
            file: file_rel.to_string(),
            start: span.start,
            end: span.end,
            len: original.len(),
        });
    }
    let mut mutated = Vec::with_capacity(original.len());
    mutated.extend_from_slice(&original[..span.start]);
    mutated.extend_from_slice(replacement.as_bytes());
    mutated.extend_from_slice(&original[span.end..]);
    fs::write(&path, &mutated).map_err(|source| PatchError::Io { path: path.clone(), source })?;
    Ok(AppliedPatch { path, original, reverted: false })
}

impl AppliedPatch {
    /// Restore the original bytes. Idempotent.
    pub fn revert(&mut self) -> Result<(), PatchError> {
        if self.reverted {
            return Ok(());
        }
        fs::write(&self.path, &self.original)
            .map_err(|source| PatchError::Io { path: self.path.clone(), source })?;
        self.reverted = true;
        Ok(())
    }
}

impl Drop for AppliedPatch {
    fn drop(&mut self) {
        let _ = self.revert();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subject::tree::file_hash;

    fn setup(content: &str) -> (tempfile::TempDir, String) {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("src")).unwrap();
        fs::write(tmp.path().join("src/lib.rs"), content).unwrap();
        let hash = file_hash(&tmp.path().join("src/lib.rs")).unwrap();
        (tmp, hash)
    }

    #[test]
    fn apply_then_revert_is_byte_identical() {
        let original = "fn f() -> i64 {\n    40 + 2\n}\n";
        let (tmp, hash) = setup(original);
        let span = Span::new(14, original.len() - 1, 1, 3);
        let mut patch =
            apply_mutation(tmp.path(), "src/lib.rs", span, "{ return 0; }", &hash).unwrap();
        let mutated = fs::read_to_string(tmp.path().join("src/lib.rs")).unwrap();
        assert_eq!(mutated, "fn f() -> i64 { return 0; }\n");
        patch.revert().unwrap();
        let restored = fs::read_to_string(tmp.path().join("src/lib.rs")).unwrap();
        assert_eq!(restored, original);
    }

    #[test]
    fn stale_hash_refuses_and_leaves_file_untouched() {
        let (tmp, _) = setup("fn f() {}\n");
        let err = apply_mutation(
            tmp.path(),
            "src/lib.rs",
            Span::new(8, 10, 1, 1),
            "{}",
            "deadbeef",
        )
        .unwrap_err();
        assert!(matches!(err, PatchError::StaleSpan { .. }));
        assert_eq!(fs::read_to_string(tmp.path().join("src/lib.rs")).unwrap(), "fn f() {}\n");
    }

    #[test]
    fn drop_reverts_automatically() {
        let original = "fn f() {}\n";
        let (tmp, hash) = setup(original);
        {
            let _patch =
                apply_mutation(tmp.path(), "src/lib.rs", Span::new(8, 10, 1, 1), "{ }", &hash)
                    .unwrap();
            // goes out of scope without an explicit revert
        }
        assert_eq!(fs::read_to_string(tmp.path().join("src/lib.rs")).unwrap(), original);
    }

    #[test]
    fn out_of_bounds_span_is_rejected() {
        let (tmp, hash) = setup("fn f() {}\n");
        let err = apply_mutation(
            tmp.path(),
            "src/lib.rs",
            Span::new(8, 4000, 1, 1),
            "{}",
            &hash,
        )
        .unwrap_err();
        assert!(matches!(err, PatchError::SpanOutOfBounds { .. }));
    }

    #[test]
    fn sequences_of_patches_round_trip() {
        let original = "fn a() { x(); }\nfn b() { y(); }\n";
        let (tmp, hash) = setup(original);
        for _ in 0..3 {
            let mut p =
                apply_mutation(tmp.path(), "src/lib.rs", Span::new(7, 15, 1, 1), "{}", &hash)
                    .unwrap();
            p.revert().unwrap();
        }
        assert_eq!(fs::read_to_string(tmp.path().join("src/lib.rs")).unwrap(), original);
        assert_eq!(file_hash(&tmp.path().join("src/lib.rs")).unwrap(), hash);
    }
}
