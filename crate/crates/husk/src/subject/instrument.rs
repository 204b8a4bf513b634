//! Source-level line-coverage instrumentation.
//!
//! Every discovered method body gets a probe call inserted before each
//! statement (and wrapped around expression-bodied match arms and closures).
//! Probes are inserted inline, without newlines, so every line number in the
//! instrumented copy equals the original's; the coverage data therefore maps
//! directly onto the pristine tree. A self-contained probe module is appended
//! to each crate root; it counts hits per (file, line) and dumps them at
//! process exit to the path named by `HUSK_COV_OUT`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use syn::spanned::Spanned;
use syn::visit::Visit;

use crate::error::CampaignError;
use crate::subject::discover::{parse_file_methods, rust_files, DiscoveryConfig};

/// Environment variable the probe runtime reads the dump path from.
pub const COV_OUT_ENV: &str = "HUSK_COV_OUT";

const PROBE_MODULE: &str = r#"
#[doc(hidden)]
pub mod __husk_cov {
    use std::collections::BTreeMap;
    use std::sync::{Mutex, OnceLock};

    static HITS: OnceLock<Mutex<BTreeMap<(u32, u32), u64>>> = OnceLock::new();

    EXTERN_BLOCK {
        fn atexit(cb: extern "C" fn()) -> i32;
    }

    extern "C" fn flush() {
        let Some(m) = HITS.get() else { return };
        let map = match m.lock() {
            Ok(g) => g,
            Err(p) => p.into_inner(),
        };
        let Ok(path) = std::env::var("HUSK_COV_OUT") else { return };
        let mut out = String::new();
        for ((f, l), n) in map.iter() {
            out.push_str(&format!("{f} {l} {n}\n"));
        }
        let _ = std::fs::write(path, out);
    }

    pub fn hit(file: u32, line: u32) {
        let m = HITS.get_or_init(|| {
            unsafe {
                atexit(flush);
            }
            Mutex::new(BTreeMap::new())
        });
        let mut g = match m.lock() {
            Ok(g) => g,
            Err(p) => p.into_inner(),
        };
        *g.entry((file, line)).or_insert(0) += 1;
    }
}
"#;

/// Which lines carry probes, per relative file path, plus the numeric file
/// ids used in dump records.
#[derive(Debug, Clone, Default)]
pub struct ProbeMap {
    pub file_ids: BTreeMap<String, u32>,
    pub lines: BTreeMap<String, BTreeSet<u32>>,
}

impl ProbeMap {
    pub fn file_for_id(&self, id: u32) -> Option<&str> {
        self.file_ids
            .iter()
            .find(|(_, fid)| **fid == id)
            .map(|(path, _)| path.as_str())
    }
}

/// Instrument the tree at `root` in place. `root` must be a disposable copy.
pub fn instrument_tree(
    root: &Path,
    config: &DiscoveryConfig,
) -> Result<ProbeMap, CampaignError> {
    let files = rust_files(root, config)?;
    let mut map = ProbeMap::default();
    let mut next_id = 0u32;

    for rel in &files {
        let path = root.join(rel);
        let content = fs::read_to_string(&path)?;
        let Ok(methods) = parse_file_methods(rel, &content) else {
            continue; // unparseable files were already diagnosed by discovery
        };
        if methods.is_empty() {
            continue;
        }
        let file_id = next_id;
        next_id += 1;
        map.file_ids.insert(rel.clone(), file_id);

        let mut inserts: Vec<Insert> = Vec::new();
        let mut lines = BTreeSet::new();
        for method in &methods {
            let mut collector = ProbeCollector { file_id, inserts: Vec::new(), lines: BTreeSet::new() };
            collector.visit_block(&method.block);
            inserts.extend(collector.inserts);
            lines.extend(collector.lines);
        }
        map.lines.insert(rel.clone(), lines);

        let patched = apply_inserts(&content, inserts);
        fs::write(&path, patched)?;
    }

    append_probe_module(root)?;
    Ok(map)
}

/// A pending text insertion. `rank` orders insertions at an equal offset:
/// closers (0) land before openers/probes (1).
struct Insert {
    offset: usize,
    rank: u8,
    text: String,
}

fn apply_inserts(content: &str, mut inserts: Vec<Insert>) -> String {
    inserts.sort_by_key(|i| (i.offset, i.rank));
    let mut out = content.to_string();
    for insert in inserts.iter().rev() {
        out.insert_str(insert.offset, &insert.text);
    }
    out
}

struct ProbeCollector {
    file_id: u32,
    inserts: Vec<Insert>,
    lines: BTreeSet<u32>,
}

impl ProbeCollector {
    fn probe_text(&mut self, line: u32) -> String {
        self.lines.insert(line);
        format!("crate::__husk_cov::hit({}u32,{}u32);", self.file_id, line)
    }

    fn probe_before(&mut self, offset: usize, line: u32) {
        let text = self.probe_text(line);
        self.inserts.push(Insert { offset, rank: 1, text });
    }

    /// Wrap a bare expression (match arm body, closure body) in a probed
    /// block: `expr` becomes `{probe; expr}`.
    fn wrap_expr(&mut self, expr: &syn::Expr) {
        let range = expr.span().byte_range();
        let line = expr.span().start().line as u32;
        let probe = self.probe_text(line);
        self.inserts.push(Insert { offset: range.start, rank: 1, text: format!("{{{probe}") });
        self.inserts.push(Insert { offset: range.end, rank: 0, text: "}".to_string() });
    }
}

fn stmt_attrs(stmt: &syn::Stmt) -> &[syn::Attribute] {
    match stmt {
        syn::Stmt::Local(l) => &l.attrs,
        syn::Stmt::Macro(m) => &m.attrs,
        syn::Stmt::Expr(e, _) => expr_attrs(e),
        syn::Stmt::Item(_) => &[],
    }
}

fn expr_attrs(expr: &syn::Expr) -> &[syn::Attribute] {
    // Only the variants that commonly carry attributes in statement position.
    match expr {
        syn::Expr::Block(e) => &e.attrs,
        syn::Expr::If(e) => &e.attrs,
        syn::Expr::Match(e) => &e.attrs,
        syn::Expr::Call(e) => &e.attrs,
        syn::Expr::MethodCall(e) => &e.attrs,
        syn::Expr::Macro(e) => &e.attrs,
        syn::Expr::Return(e) => &e.attrs,
        syn::Expr::ForLoop(e) => &e.attrs,
        syn::Expr::While(e) => &e.attrs,
        syn::Expr::Loop(e) => &e.attrs,
        _ => &[],
    }
}

fn has_cfg_attr(attrs: &[syn::Attribute]) -> bool {
    attrs.iter().any(|a| a.path().is_ident("cfg"))
}

impl<'ast> Visit<'ast> for ProbeCollector {
    fn visit_block(&mut self, block: &'ast syn::Block) {
        for stmt in &block.stmts {
            let probe = match stmt {
                syn::Stmt::Item(_) => false,
                _ => !has_cfg_attr(stmt_attrs(stmt)),
            };
            if probe {
                let span = stmt.span();
                self.probe_before(span.byte_range().start, span.start().line as u32);
            }
        }
        syn::visit::visit_block(self, block);
    }

    fn visit_item(&mut self, _item: &'ast syn::Item) {
        // Items nested in a body are instrumented by their own pass, if at all.
    }

    fn visit_arm(&mut self, arm: &'ast syn::Arm) {
        if let Some((_, guard)) = &arm.guard {
            self.visit_expr(guard);
        }
        if !matches!(*arm.body, syn::Expr::Block(_)) {
            self.wrap_expr(&arm.body);
        }
        self.visit_expr(&arm.body);
    }

    fn visit_expr_closure(&mut self, closure: &'ast syn::ExprClosure) {
        if !matches!(*closure.body, syn::Expr::Block(_)) {
            self.wrap_expr(&closure.body);
        }
        self.visit_expr(&closure.body);
    }

    fn visit_expr_repeat(&mut self, repeat: &'ast syn::ExprRepeat) {
        // The element expression runs; the length is a const context.
        self.visit_expr(&repeat.expr);
    }

    fn visit_expr_const(&mut self, _block: &'ast syn::ExprConst) {
        // Const blocks must stay probe-free.
    }

    fn visit_generic_argument(&mut self, arg: &'ast syn::GenericArgument) {
        if !matches!(arg, syn::GenericArgument::Const(_)) {
            syn::visit::visit_generic_argument(self, arg);
        }
    }

    fn visit_type(&mut self, _ty: &'ast syn::Type) {
        // Types can embed const expressions (array lengths); never probe them.
    }
}

/// Append the probe runtime to each crate root so `crate::__husk_cov::hit`
/// resolves in every target that compiles instrumented code.
fn append_probe_module(root: &Path) -> Result<(), CampaignError> {
    let mut roots = Vec::new();
    for candidate in ["src/lib.rs", "src/main.rs"] {
        if root.join(candidate).is_file() {
            roots.push(candidate.to_string());
        }
    }
    // Honor explicit lib/bin path overrides in the manifest.
    if let Ok(manifest) = fs::read_to_string(root.join("Cargo.toml")) {
        if let Ok(value) = manifest.parse::<toml::Value>() {
            let mut push = |p: Option<&str>| {
                if let Some(p) = p {
                    if root.join(p).is_file() && !roots.iter().any(|r| r == p) {
                        roots.push(p.to_string());
                    }
                }
            };
            push(value.get("lib").and_then(|l| l.get("path")).and_then(|p| p.as_str()));
            if let Some(bins) = value.get("bin").and_then(|b| b.as_array()) {
                for bin in bins {
                    push(bin.get("path").and_then(|p| p.as_str()));
                }
            }
        }
    }
    if roots.is_empty() {
        return Err(CampaignError::InstrumentationFailure {
            diagnostics: "no crate root (src/lib.rs or src/main.rs) to host the probe module"
                .to_string(),
        });
    }
    for rel in roots {
        let path = root.join(&rel);
        let mut content = fs::read_to_string(&path)?;
        if content.contains("mod __husk_cov") {
            continue;
        }
        content.push_str(PROBE_MODULE);
        fs::write(&path, content)?;
    }
    Ok(())
}

/// Parse one probe dump produced by the injected runtime.
pub fn parse_probe_dump(text: &str, map: &ProbeMap) -> BTreeMap<(String, u32), u64> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let mut fields = line.split_whitespace();
        let (Some(fid), Some(line_no), Some(count)) =
            (fields.next(), fields.next(), fields.next())
        else {
            continue;
        };
        let (Ok(fid), Ok(line_no), Ok(count)) =
            (fid.parse::<u32>(), line_no.parse::<u32>(), count.parse::<u64>())
        else {
            continue;
        };
        if let Some(file) = map.file_for_id(fid) {
            *out.entry((file.to_string(), line_no)).or_insert(0) += count;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instrument_src(src: &str) -> (String, ProbeMap) {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("src")).unwrap();
        fs::write(
            tmp.path().join("Cargo.toml"),
            "[package]\nname = \"s\"\nversion = \"0.1.0\"\nedition = \"2021\"\n[workspace]\n",
        )
        .unwrap();
        fs::write(tmp.path().join("src/lib.rs"), src).unwrap();
        let map = instrument_tree(tmp.path(), &DiscoveryConfig::default()).unwrap();
        let out = fs::read_to_string(tmp.path().join("src/lib.rs")).unwrap();
        (out, map)
    }

    #[test]
    fn probes_preserve_line_numbers() {
        let src = "pub fn f(a: i64) -> i64 {\n    let b = a + 1;\n    b * 2\n}\n";
        let (out, map) = instrument_src(src);
        assert_eq!(src.lines().count() + PROBE_MODULE.lines().count(), out.lines().count());
        assert!(out.contains("crate::__husk_cov::hit(0u32,2u32);"));
        assert!(out.contains("crate::__husk_cov::hit(0u32,3u32);"));
        assert_eq!(map.lines["src/lib.rs"], [2u32, 3].into_iter().collect());
    }

    #[test]
    fn instrumented_source_still_parses() {
        let src = r#"
pub fn grade(score: u32) -> char {
    if score >= 90 {
        'A'
    } else {
        'B'
    }
}

pub fn describe(n: i32) -> &'static str {
    match n {
        0 => "zero",
        x if x < 0 => "negative",
        _ => {
            "positive"
        }
    }
}

pub fn sum(items: &[i32]) -> i32 {
    items.iter().map(|x| x + 1).sum()
}

pub fn arr() -> [u8; 3] {
    [0u8; 3]
}
"#;
        let (out, map) = instrument_src(src);
        syn::parse_file(&out).expect("instrumented source must parse");
        // match arms with expression bodies got wrapped
        assert!(out.contains("0 => {crate::__husk_cov::hit"));
        // closure body got wrapped
        assert!(out.contains("|x| {crate::__husk_cov::hit"));
        // const array length stays untouched
        assert!(out.contains("[0u8; 3]"));
        assert!(!map.lines["src/lib.rs"].is_empty());
    }

    #[test]
    fn cfg_gated_statements_are_not_probed() {
        let src = "pub fn f() {\n    #[cfg(feature = \"x\")]\n    let a = 1;\n    let b = 2;\n    let _ = b;\n}\n";
        let (out, _) = instrument_src(src);
        syn::parse_file(&out).unwrap();
        assert!(!out.contains("hit(0u32,2u32)"));
        assert!(out.contains("hit(0u32,4u32)"));
    }

    #[test]
    fn probe_module_appended_once() {
        let src = "pub fn f() {\n    g();\n}\nfn g() {}\n";
        let (out, _) = instrument_src(src);
        assert_eq!(out.matches("mod __husk_cov").count(), 1);
    }

    #[test]
    fn dump_parsing_maps_file_ids() {
        let mut map = ProbeMap::default();
        map.file_ids.insert("src/lib.rs".to_string(), 0);
        map.lines.insert("src/lib.rs".to_string(), [2u32].into_iter().collect());
        let parsed = parse_probe_dump("0 2 7\n0 2 1\n1 9 9\nnoise\n", &map);
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[&("src/lib.rs".to_string(), 2)], 8);
    }
}
