//! The builtin model documents.

use crate::document::{BuiltModel, ModelDocument};
use crate::error::{Error, Result};
use crate::model::EmpiricalModel;

const ENTRIES: [(&str, &str); 9] = [
    ("bell", include_str!("../corpus/bell.json")),
    ("hardy", include_str!("../corpus/hardy.json")),
    ("pr-box", include_str!("../corpus/pr-box.json")),
    ("ghz-mermin", include_str!("../corpus/ghz-mermin.json")),
    ("specker-triangle", include_str!("../corpus/specker-triangle.json")),
    ("liar-4", include_str!("../corpus/liar-4.json")),
    ("box-25", include_str!("../corpus/box-25.json")),
    ("peres-mermin-square", include_str!("../corpus/peres-mermin-square.json")),
    ("ks-18", include_str!("../corpus/ks-18.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|(n, _)| *n)
}

/// Canonical text of an entry.
pub fn text(name: &str) -> Result<&'static str> {
    ENTRIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownCorpus(name.to_string()))
}

pub fn document(name: &str) -> Result<ModelDocument> {
    ModelDocument::parse(text(name)?)
}

pub fn build(name: &str) -> Result<BuiltModel> {
    document(name)?.build()
}

pub fn model(name: &str) -> Result<EmpiricalModel> {
    Ok(build(name)?.model)
}
