use sha2::{Digest, Sha256};

use crate::frontend::SourceFile;

/// SHA-256 over the (path, content) pairs in path order, followed by the
/// language tag. Every field is length-prefixed so distinct inputs cannot
/// collide by concatenation.
pub fn source_hash(files: &[SourceFile], language: &str) -> String {
    let mut sorted: Vec<&SourceFile> = files.iter().collect();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    let mut h = Sha256::new();
    let mut field = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    field(&(sorted.len() as u64).to_le_bytes());
    for f in sorted {
        field(f.path.as_bytes());
        field(f.content.as_bytes());
    }
    field(language.as_bytes());
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn files(pairs: &[(&str, &str)]) -> Vec<SourceFile> {
        pairs.iter().map(|(p, c)| SourceFile::new(*p, *c)).collect()
    }

    #[test]
    fn sensitive_to_content_path_and_language() {
        let base = source_hash(&files(&[("a.c", "int x;")]), "c");
        assert_eq!(base.len(), 64);
        assert_ne!(base, source_hash(&files(&[("a.c", "int y;")]), "c"));
        assert_ne!(base, source_hash(&files(&[("b.c", "int x;")]), "c"));
        assert_ne!(base, source_hash(&files(&[("a.c", "int x;")]), "cpp"));
        assert_ne!(
            source_hash(&files(&[("a", "bc")]), "c"),
            source_hash(&files(&[("ab", "c")]), "c")
        );
    }

    proptest! {
        #[test]
        fn independent_of_enumeration_order(
            mut pairs in proptest::collection::btree_map("[a-z]{1,4}\\.c", "[ -~]{0,12}", 0..6)
                .prop_map(|m| m.into_iter().collect::<Vec<_>>()),
            seed in any::<u64>(),
        ) {
            let a = pairs.iter().map(|(p, c)| SourceFile::new(p.clone(), c.clone())).collect::<Vec<_>>();
            let n = pairs.len().max(1);
            pairs.rotate_left((seed as usize) % n);
            pairs.reverse();
            let b = pairs.iter().map(|(p, c)| SourceFile::new(p.clone(), c.clone())).collect::<Vec<_>>();
            prop_assert_eq!(source_hash(&a, "c"), source_hash(&b, "c"));
        }
    }
}
