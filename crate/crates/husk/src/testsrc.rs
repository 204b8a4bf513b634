//! Locating the source text of subject tests, for the assertion heuristic.
//!
//! Test ids look like `<target>::<module::path::fn_name>`. The fn body is
//! found by parsing the subject's test files (integration targets under
//! `tests/`, `#[test]` functions anywhere in `src/`) and indexing by function
//! name. The extracted text includes the attributes, so `#[should_panic]`
//! counts as assertion vocabulary.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use syn::spanned::Spanned;

use crate::subject::tree;

/// Map each test id to its source text, `None` when it cannot be located.
pub fn collect_test_sources(
    project_root: &Path,
    test_ids: &[String],
) -> BTreeMap<String, Option<String>> {
    let index = index_test_fns(project_root);
    let mut out = BTreeMap::new();
    for id in test_ids {
        out.insert(id.clone(), lookup(&index, id));
    }
    out
}

struct IndexedFn {
    file: String,
    source: String,
}

/// fn name -> all test-looking fns with that name.
fn index_test_fns(project_root: &Path) -> BTreeMap<String, Vec<IndexedFn>> {
    let mut index: BTreeMap<String, Vec<IndexedFn>> = BTreeMap::new();
    let Ok(files) = tree::source_files(project_root) else {
        return index;
    };
    for rel in files.into_iter().filter(|f| f.ends_with(".rs")) {
        let path = project_root.join(&rel);
        let Ok(content) = fs::read_to_string(&path) else {
            continue;
        };
        let Ok(parsed) = syn::parse_file(&content) else {
            continue;
        };
        let in_tests_dir = rel.starts_with("tests/");
        index_items(&parsed.items, &content, &rel, in_tests_dir, &mut index);
    }
    index
}

fn index_items(
    items: &[syn::Item],
    content: &str,
    rel: &str,
    in_tests_dir: bool,
    index: &mut BTreeMap<String, Vec<IndexedFn>>,
) {
    for item in items {
        match item {
            syn::Item::Fn(f) => {
                let is_test = f.attrs.iter().any(|a| {
                    a.path()
                        .segments
                        .last()
                        .map(|s| s.ident == "test")
                        .unwrap_or(false)
                });
                if !is_test && !in_tests_dir {
                    continue;
                }
                let start = f
                    .attrs
                    .first()
                    .map(|a| a.span().byte_range().start)
                    .unwrap_or_else(|| f.span().byte_range().start)
                    .min(f.span().byte_range().start);
                let end = f.span().byte_range().end;
                if end <= content.len() {
                    index.entry(f.sig.ident.to_string()).or_default().push(IndexedFn {
                        file: rel.to_string(),
                        source: content[start..end].to_string(),
                    });
                }
            }
            syn::Item::Mod(m) => {
                if let Some((_, inner)) = &m.content {
                    index_items(inner, content, rel, in_tests_dir, index);
                }
            }
            _ => {}
        }
    }
}

fn lookup(index: &BTreeMap<String, Vec<IndexedFn>>, test_id: &str) -> Option<String> {
    let (target, path) = test_id.split_once("::")?;
    let fn_name = path.rsplit("::").next()?;
    let candidates = index.get(fn_name)?;
    if candidates.len() == 1 {
        return Some(candidates[0].source.clone());
    }
    // Prefer the file that matches the integration-test target name.
    let preferred: Vec<&IndexedFn> = candidates
        .iter()
        .filter(|c| {
            c.file == format!("tests/{target}.rs")
                || c.file.starts_with(&format!("tests/{target}/"))
        })
        .collect();
    if preferred.len() == 1 {
        return Some(preferred[0].source.clone());
    }
    // Unit-test target: the fn lives somewhere under src/.
    let in_src: Vec<&IndexedFn> = candidates.iter().filter(|c| c.file.starts_with("src/")).collect();
    if in_src.len() == 1 {
        return Some(in_src[0].source.clone());
    }
    None
}
