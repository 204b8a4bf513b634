//! Method metadata produced by discovery and joined with baseline coverage.

use alloc::collections::BTreeSet;
use alloc::string::String;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Byte and line extent of a method body (the `{ ... }` block, braces
/// included, signature excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Span {
    /// Byte offset of the opening brace.
    pub start: usize,
    /// Byte offset one past the closing brace.
    pub end: usize,
    /// 1-based line of the opening brace.
    pub start_line: u32,
    /// 1-based line of the closing brace.
    pub end_line: u32,
}

impl Span {
    pub fn new(start: usize, end: usize, start_line: u32, end_line: u32) -> Self {
        debug_assert!(start <= end);
        debug_assert!(start_line >= 1 && start_line <= end_line);
        Span { start, end, start_line, end_line }
    }

    /// Iterator over the 1-based line numbers the span touches.
    pub fn lines(&self) -> impl Iterator<Item = u32> {
        self.start_line..=self.end_line
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }

    pub fn contains_line(&self, line: u32) -> bool {
        line >= self.start_line && line <= self.end_line
    }
}

/// Access level of a method, in the subject language's terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Access {
    Public,
    /// Visible within the package/crate (`pub(crate)`, `pub(super)`, ...).
    Package,
    /// No Rust equivalent; kept so reports from other frontends stay readable.
    Protected,
    Private,
    /// Visibility not syntactically determinable (e.g. trait impl methods).
    Other,
}

impl Access {
    pub fn as_str(&self) -> &'static str {
        match self {
            Access::Public => "public",
            Access::Package => "package",
            Access::Protected => "protected",
            Access::Private => "private",
            Access::Other => "other",
        }
    }
}

/// Classification of a method's return type, which decides the variant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ReturnKind {
    Void,
    Boolean,
    IntegerLike,
    FloatLike,
    StringLike,
    CharLike,
    /// Everything else, including generics and type parameters; replaced by
    /// the language's default/neutral constructor.
    Reference,
}

impl ReturnKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReturnKind::Void => "void",
            ReturnKind::Boolean => "boolean",
            ReturnKind::IntegerLike => "integer_like",
            ReturnKind::FloatLike => "float_like",
            ReturnKind::StringLike => "string_like",
            ReturnKind::CharLike => "char_like",
            ReturnKind::Reference => "reference",
        }
    }
}

/// A discovered method/function definition, joined with baseline coverage.
///
/// `id` is stable for an unchanged tree: relative file path plus the
/// qualified name (module path, self type, trait) of the definition.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MethodSite {
    pub id: String,
    /// Path relative to the subject project root.
    pub file: String,
    pub body_span: Span,
    pub name: String,
    pub access: Access,
    pub return_kind: ReturnKind,
    /// Lines spanned by the body block, braces included.
    pub body_line_count: u32,
    /// Line numbers within `body_span` hit by the baseline suite.
    pub covered_lines: BTreeSet<u32>,
}

impl MethodSite {
    pub fn is_covered(&self) -> bool {
        !self.covered_lines.is_empty()
    }
}
