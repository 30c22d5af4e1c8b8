//! The JSON model document: schema, validation, canonical printing and
//! hashing.
//!
//! A document carries a scenario block and exactly one payload. Canonical
//! text is `serde_json`'s pretty printer over the declared field order plus a
//! trailing newline; parsing and reprinting a canonical document reproduces
//! it byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{support_of_probability_table, EmpiricalModel, ProbabilityTable};
use crate::paradox::liar_cycle_model;
use crate::ring::RingSpec;
use crate::scenario::{Outcomes, Scenario, Section};
use crate::stabiliser::{model_of_generators, PauliOperator};
use crate::theory::{model_of_theory, LinearEquation, Theory};

pub const FORMAT: &str = "contextuality-model/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Where the table comes from, e.g. `external provenance: ...` for transcribed tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    /// Required for support, probability and theory payloads; derived (and
    /// forbidden here) for liar-cycle and pauli-triple payloads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioBlock>,
    pub payload: Payload,
    /// Equations the model is expected to satisfy; checked on build.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_theory: Option<TheoryBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub measurements: Vec<String>,
    pub contexts: Vec<Vec<String>>,
    pub outcomes: OutcomesBlock,
}

/// Exactly one of the two fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomesBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Payload {
    Support { rows: Vec<SupportRow> },
    Probability { rows: Vec<ProbabilityRow> },
    Theory(TheoryBlock),
    LiarCycle { length: usize },
    PauliTriple { operators: Vec<String> },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Support { .. } => "support",
            Payload::Probability { .. } => "probability",
            Payload::Theory(_) => "theory",
            Payload::LiarCycle { .. } => "liar-cycle",
            Payload::PauliTriple { .. } => "pauli-triple",
        }
    }
}

/// Possible joint outcomes of one context, listed in the context's order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportRow {
    pub context: Vec<String>,
    pub sections: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityRow {
    pub context: Vec<String>,
    pub entries: Vec<ProbabilityEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityEntry {
    pub outcomes: Vec<String>,
    /// Exact rational, `p/q` or an integer.
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryBlock {
    /// `Z`, `Z2`, `Z3`, ...
    pub ring: String,
    pub equations: Vec<EquationBlock>,
}

/// `Σ terms[m]·m = constant` on `context`; absent measurements have
/// coefficient zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationBlock {
    pub context: Vec<String>,
    pub terms: BTreeMap<String, i64>,
    pub constant: i64,
}

/// What a document builds to.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: EmpiricalModel,
    pub table: Option<ProbabilityTable>,
    /// The payload theory, or the reference theory when present.
    pub theory: Option<Theory>,
}

impl ModelDocument {
    /// Parses and schema-checks JSON text. Errors carry the JSON path and
    /// the line/column of the first problem.
    pub fn parse(text: &str) -> Result<ModelDocument> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: ModelDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Document {
                path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        de.end().map_err(|e| Error::Document {
            path: ".".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.format != FORMAT {
            return Err(schema("format", format!("unsupported format {:?}, expected {FORMAT:?}", doc.format)));
        }
        Ok(doc)
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialise");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_string().as_bytes()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        match (&self.payload, &self.scenario) {
            (Payload::LiarCycle { .. } | Payload::PauliTriple { .. }, Some(_)) => Err(schema(
                "scenario",
                format!("a {} payload derives its own scenario", self.payload.kind()),
            )),
            (Payload::LiarCycle { .. } | Payload::PauliTriple { .. }, None) => {
                Ok(self.build()?.model.scenario().clone())
            }
            (_, None) => Err(schema("scenario", "missing scenario block".into())),
            (_, Some(block)) => block.build(),
        }
    }

    /// Constructs and validates the model. Support and probability payloads
    /// must be no-signalling.
    pub fn build(&self) -> Result<BuiltModel> {
        let mut table = None;
        let mut theory = None;
        let model = match &self.payload {
            Payload::LiarCycle { length } => {
                self.forbid_scenario()?;
                liar_cycle_model(*length)?
            }
            Payload::PauliTriple { operators } => {
                self.forbid_scenario()?;
                let ops = operators
                    .iter()
                    .map(|s| s.parse::<PauliOperator>())
                    .collect::<Result<Vec<_>>>()?;
                model_of_generators(&ops)?
            }
            Payload::Support { rows } => {
                let scn = self.scenario()?;
                let m = build_support(&scn, rows)?;
                m.require_no_signalling()?;
                m
            }
            Payload::Probability { rows } => {
                let scn = self.scenario()?;
                let t = build_table(&scn, rows)?;
                let m = support_of_probability_table(&t)?;
                table = Some(t);
                m
            }
            Payload::Theory(block) => {
                let scn = self.scenario()?;
                let t = block.build(&scn)?;
                let m = model_of_theory(&t)?;
                theory = Some(t);
                m
            }
        };
        if let Some(block) = &self.reference_theory {
            let t = block.build(model.scenario())?;
            if !t.holds_on(&model)? {
                return Err(schema(
                    "reference_theory",
                    "the model violates its reference theory".into(),
                ));
            }
            theory = Some(t);
        }
        Ok(BuiltModel { model, table, theory })
    }

    fn forbid_scenario(&self) -> Result<()> {
        if self.scenario.is_some() {
            return Err(schema(
                "scenario",
                format!("a {} payload derives its own scenario", self.payload.kind()),
            ));
        }
        Ok(())
    }

    /// A support document for `model`, sections listed in lexicographic order.
    pub fn from_model(model: &EmpiricalModel) -> ModelDocument {
        let scn = model.scenario();
        let rows = scn
            .cover()
            .iter()
            .enumerate()
            .map(|(ci, ctx)| SupportRow {
                context: labels(scn, ctx),
                sections: model.support(ci).iter().map(|s| scn.section_outcomes(s)).collect(),
            })
            .collect();
        ModelDocument {
            format: FORMAT.into(),
            name: None,
            description: None,
            provenance: None,
            scenario: Some(ScenarioBlock::from_scenario(scn)),
            payload: Payload::Support { rows },
            reference_theory: None,
        }
    }
}

fn schema(path: &str, message: String) -> Error {
    Error::Document {
        path: path.into(),
        line: 0,
        column: 0,
        message,
    }
}

fn labels(scn: &Scenario, members: &[usize]) -> Vec<String> {
    members.iter().map(|&m| scn.measurement(m).to_string()).collect()
}

impl ScenarioBlock {
    pub fn from_scenario(scn: &Scenario) -> ScenarioBlock {
        let outcomes = match scn.outcomes() {
            Outcomes::Ring(n) => OutcomesBlock {
                ring: Some(*n),
                labels: None,
            },
            Outcomes::Labels(l) => OutcomesBlock {
                ring: None,
                labels: Some(l.clone()),
            },
        };
        ScenarioBlock {
            measurements: scn.measurements().to_vec(),
            contexts: scn.cover().iter().map(|c| labels(scn, c)).collect(),
            outcomes,
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        let outcomes = match (&self.outcomes.ring, &self.outcomes.labels) {
            (Some(n), None) => Outcomes::Ring(*n),
            (None, Some(l)) => Outcomes::Labels(l.clone()),
            _ => {
                return Err(schema(
                    "scenario.outcomes",
                    "give exactly one of `ring` and `labels`".into(),
                ))
            }
        };
        Scenario::new(self.measurements.clone(), self.contexts.clone(), outcomes)
    }
}

/// Index of a listed context and the permutation from the listed order to
/// the scenario's sorted order.
fn resolve_context(scn: &Scenario, listed: &[String], path: &str) -> Result<(usize, Vec<usize>)> {
    let members = scn.subset(listed).map_err(|e| schema(path, e.to_string()))?;
    if members.len() != listed.len() {
        return Err(schema(path, "context lists a measurement twice".into()));
    }
    let ci = scn
        .context_index(&members)
        .ok_or_else(|| schema(path, format!("{} is not a context of the cover", scn.format_context(&members))))?;
    let order = listed
        .iter()
        .map(|l| scn.measurement_index(l).expect("resolved above"))
        .collect();
    Ok((ci, order))
}

fn resolve_section(scn: &Scenario, order: &[usize], outcomes: &[String], path: &str) -> Result<Section> {
    if outcomes.len() != order.len() {
        return Err(schema(
            path,
            format!("{} outcomes for a context of size {}", outcomes.len(), order.len()),
        ));
    }
    let pairs = order
        .iter()
        .zip(outcomes)
        .map(|(&m, o)| {
            scn.outcomes()
                .index_of(o)
                .map(|v| (m, v))
                .ok_or_else(|| schema(path, format!("unknown outcome {o:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Section::from_pairs(pairs)
}

fn build_support(scn: &Scenario, rows: &[SupportRow]) -> Result<EmpiricalModel> {
    let mut supports: Vec<Option<Vec<Section>>> = vec![None; scn.cover().len()];
    for (r, row) in rows.iter().enumerate() {
        let path = format!("payload.rows[{r}]");
        let (ci, order) = resolve_context(scn, &row.context, &format!("{path}.context"))?;
        if supports[ci].is_some() {
            return Err(schema(&path, "context listed twice".into()));
        }
        let sections = row
            .sections
            .iter()
            .enumerate()
            .map(|(k, o)| resolve_section(scn, &order, o, &format!("{path}.sections[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        supports[ci] = Some(sections);
    }
    let supports = supports
        .into_iter()
        .enumerate()
        .map(|(ci, s)| {
            s.ok_or_else(|| {
                schema(
                    "payload.rows",
                    format!("no row for context {}", scn.format_context(scn.context(ci))),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalModel::new(scn.clone(), supports)
}

fn build_table(scn: &Scenario, rows: &[ProbabilityRow]) -> Result<ProbabilityTable> {
    let mut table: Vec<Option<BTreeMap<Section, BigRational>>> = vec![None; scn.cover().len()];
    for (r, row) in rows.iter().enumerate() {
        let path = format!("payload.rows[{r}]");
        let (ci, order) = resolve_context(scn, &row.context, &format!("{path}.context"))?;
        if table[ci].is_some() {
            return Err(schema(&path, "context listed twice".into()));
        }
        let mut entries = BTreeMap::new();
        for (k, e) in row.entries.iter().enumerate() {
            let epath = format!("{path}.entries[{k}]");
            let s = resolve_section(scn, &order, &e.outcomes, &epath)?;
            let p: BigRational = e
                .p
                .trim()
                .parse()
                .map_err(|_| schema(&format!("{epath}.p"), format!("{:?} is not an exact rational", e.p)))?;
            if entries.insert(s, p).is_some() {
                return Err(schema(&epath, "joint outcome listed twice".into()));
            }
        }
        table[ci] = Some(entries);
    }
    let table = table
        .into_iter()
        .enumerate()
        .map(|(ci, t)| {
            t.ok_or_else(|| {
                schema(
                    "payload.rows",
                    format!("no row for context {}", scn.format_context(scn.context(ci))),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ProbabilityTable::new(scn.clone(), table)
}

impl TheoryBlock {
    pub fn build(&self, scn: &Scenario) -> Result<Theory> {
        let ring: RingSpec = self
            .ring
            .parse()
            .map_err(|_| schema("ring", format!("unknown ring {:?}", self.ring)))?;
        let mut equations = Vec::with_capacity(self.equations.len());
        for (k, eq) in self.equations.iter().enumerate() {
            let path = format!("equations[{k}]");
            let (ci, _) = resolve_context(scn, &eq.context, &format!("{path}.context"))?;
            let ctx = scn.context(ci);
            let named: BTreeSet<&String> = eq.terms.keys().collect();
            for m in &named {
                let inside = scn.measurement_index(m).is_some_and(|i| ctx.contains(&i));
                if !inside {
                    return Err(schema(&format!("{path}.terms"), format!("{m} is not in the context")));
                }
            }
            let coefficients = ctx
                .iter()
                .map(|&m| BigInt::from(eq.terms.get(scn.measurement(m)).copied().unwrap_or(0)))
                .collect();
            equations.push(LinearEquation::new(scn, ci, coefficients, BigInt::from(eq.constant))?);
        }
        Theory::new(ring, scn.clone(), equations)
    }
}
