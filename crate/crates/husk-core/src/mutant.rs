//! Extreme-mutant generation: the replacement-variant catalog and rendering.
//!
//! Each covered method gets the variant set for its return kind. The mapping
//! is normative for this tool and is printed in the report header:
//!
//! | return kind  | variants                                   |
//! |--------------|--------------------------------------------|
//! | void         | empty_body                                 |
//! | boolean      | return_true, return_false                  |
//! | integer_like | return_zero, return_one                    |
//! | float_like   | return_zero, return_one (float literals)   |
//! | string_like  | return_empty_string, return_constant_string_A |
//! | char_like    | return_char_space, return_char_A           |
//! | reference    | return_null_equivalent                     |
//!
//! Rust has no `null`; the null-equivalent renders the type's neutral
//! constructor (`Default::default()`). Types without a `Default` impl make
//! the mutant fail to build, which flows into the `unmutatable` verdict.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::method::{MethodSite, ReturnKind};

/// The kinds of whole-body replacement this tool performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VariantKind {
    EmptyBody,
    ReturnTrue,
    ReturnFalse,
    ReturnZero,
    ReturnOne,
    ReturnEmptyString,
    ReturnConstantStringA,
    ReturnCharSpace,
    ReturnCharA,
    ReturnNullEquivalent,
}

impl VariantKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariantKind::EmptyBody => "empty_body",
            VariantKind::ReturnTrue => "return_true",
            VariantKind::ReturnFalse => "return_false",
            VariantKind::ReturnZero => "return_zero",
            VariantKind::ReturnOne => "return_one",
            VariantKind::ReturnEmptyString => "return_empty_string",
            VariantKind::ReturnConstantStringA => "return_constant_string_A",
            VariantKind::ReturnCharSpace => "return_char_space",
            VariantKind::ReturnCharA => "return_char_A",
            VariantKind::ReturnNullEquivalent => "return_null_equivalent",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A replacement body: the variant kind plus its rendered source text.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ReplacementVariant {
    pub kind: VariantKind,
    pub rendered_body: String,
}

/// One (method, variant) pair awaiting a verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExtremeMutant {
    /// `<method id>#<variant kind>`, unique across a campaign.
    pub mutant_id: String,
    pub method_id: String,
    pub variant: ReplacementVariant,
}

/// The variant set generated for a given return kind. Total over the enum.
pub fn variants_for(kind: ReturnKind) -> &'static [VariantKind] {
    match kind {
        ReturnKind::Void => &[VariantKind::EmptyBody],
        ReturnKind::Boolean => &[VariantKind::ReturnTrue, VariantKind::ReturnFalse],
        ReturnKind::IntegerLike | ReturnKind::FloatLike => {
            &[VariantKind::ReturnZero, VariantKind::ReturnOne]
        }
        ReturnKind::StringLike => {
            &[VariantKind::ReturnEmptyString, VariantKind::ReturnConstantStringA]
        }
        ReturnKind::CharLike => &[VariantKind::ReturnCharSpace, VariantKind::ReturnCharA],
        ReturnKind::Reference => &[VariantKind::ReturnNullEquivalent],
    }
}

/// Signalled when a variant is requested for an incompatible return kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncompatibleVariant {
    pub kind: VariantKind,
    pub return_kind: ReturnKind,
}

impl fmt::Display for IncompatibleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "variant {} is not applicable to return kind {}",
            self.kind.as_str(),
            self.return_kind.as_str()
        )
    }
}

/// Render the replacement body for `method` under `kind`.
///
/// The result is a full block, braces included, that substitutes for the
/// original body span: `{}` for `empty_body`, otherwise a single return
/// statement of the variant's literal. String literals go through `.into()`
/// so `String`, `&str`, `Box<str>` and `Cow<str>` returns all type-check;
/// floats render as floating literals.
pub fn render_replacement(
    method: &MethodSite,
    kind: VariantKind,
) -> Result<String, IncompatibleVariant> {
    if !variants_for(method.return_kind).contains(&kind) {
        return Err(IncompatibleVariant { kind, return_kind: method.return_kind });
    }
    let body = match kind {
        VariantKind::EmptyBody => "{}",
        VariantKind::ReturnTrue => "{ return true; }",
        VariantKind::ReturnFalse => "{ return false; }",
        VariantKind::ReturnZero => {
            if method.return_kind == ReturnKind::FloatLike {
                "{ return 0.0; }"
            } else {
                "{ return 0; }"
            }
        }
        VariantKind::ReturnOne => {
            if method.return_kind == ReturnKind::FloatLike {
                "{ return 1.0; }"
            } else {
                "{ return 1; }"
            }
        }
        VariantKind::ReturnEmptyString => "{ return \"\".into(); }",
        VariantKind::ReturnConstantStringA => "{ return \"A\".into(); }",
        VariantKind::ReturnCharSpace => "{ return ' '; }",
        VariantKind::ReturnCharA => "{ return 'A'; }",
        VariantKind::ReturnNullEquivalent => "{ return Default::default(); }",
    };
    Ok(String::from(body))
}

/// Generate the extreme-mutant set for the given methods.
///
/// Only methods with baseline coverage produce mutants; uncovered methods
/// contribute nothing here and are classified `uncovered` later. Order is
/// deterministic: input method order, then catalog variant order.
pub fn generate_mutants(methods: &[MethodSite]) -> Vec<ExtremeMutant> {
    let mut out = Vec::new();
    for method in methods {
        if !method.is_covered() {
            continue;
        }
        for &kind in variants_for(method.return_kind) {
            let rendered = render_replacement(method, kind)
                .expect("catalog variants are compatible by construction");
            out.push(ExtremeMutant {
                mutant_id: format!("{}#{}", method.id, kind.as_str()),
                method_id: method.id.clone(),
                variant: ReplacementVariant { kind, rendered_body: rendered },
            });
        }
    }
    out
}
