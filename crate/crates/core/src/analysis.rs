//! The full classification pipeline and its report.
//!
//! Every report is checked against the implication chain
//! `AvN_R ⇒ SC(Aff S) ⇒ CSC_R ⇒ CSC_ℤ ⇒ SC` and its per-section analogue
//! before it is returned; a violation is a [`Error::SelfCheck`].

use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cohomology::{classify_cohomological, ObstructionReport};
use crate::document::ModelDocument;
use crate::error::{Error, Result};
use crate::model::{
    check_no_signalling, classify_with_budget, Classification, EmpiricalModel, Extension, NoSignalling,
    Verdict,
};
use crate::ring::RingSpec;
use crate::scenario::Section;
use crate::search::DEFAULT_BUDGET;
use crate::theory::{affine_closure_model, is_avn, is_avn_at, AvnCertificate, AvnReport};

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Rings to report on; ℤ is always added.
    pub rings: Vec<RingSpec>,
    pub budget: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            rings: Vec::new(),
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Per-section verdicts over one ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionChain {
    pub context: usize,
    pub section: Section,
    /// `AvN_R(e, s0)`; `None` where AvN is not defined for the ring.
    pub avn: Option<bool>,
    /// `s0` extends to no global section of `Aff S`.
    pub isolated_in_affine: Option<Verdict>,
    /// `γ_R(s0) ≠ 0`.
    pub clc: bool,
}

#[derive(Debug, Clone)]
pub struct RingAnalysis {
    pub ring: RingSpec,
    pub avn: Option<AvnReport>,
    pub strong_affine: Option<Verdict>,
    /// Why AvN and the affine closure were skipped, when they were.
    pub skipped: Option<String>,
    pub obstruction: ObstructionReport,
    pub sections: Vec<SectionChain>,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub name: Option<String>,
    pub hash: Option<String>,
    pub model: EmpiricalModel,
    pub no_signalling: NoSignalling,
    pub classification: Classification,
    pub rings: Vec<RingAnalysis>,
    pub elapsed_ms: u128,
}

fn default_rings(model: &EmpiricalModel) -> Vec<RingSpec> {
    let k = model.scenario().outcome_count() as u64;
    if k >= 2 {
        vec![RingSpec::Mod(k)]
    } else {
        Vec::new()
    }
}

fn isolated(ext: Option<&Extension>) -> Verdict {
    match ext {
        Some(Extension::Isolated) => Verdict::True,
        Some(Extension::Extends(_)) => Verdict::False,
        _ => Verdict::Undecided,
    }
}

fn analyze_ring(
    model: &EmpiricalModel,
    ring: RingSpec,
    budget: u64,
) -> Result<RingAnalysis> {
    let obstruction = classify_cohomological(model, ring)?;
    let (avn, aff, skipped) = match ring {
        RingSpec::Integers => (None, None, Some("AvN and affine closures need a finite ring".to_string())),
        RingSpec::Mod(_) => match is_avn(model, ring) {
            Ok(report) => {
                let aff = affine_closure_model(model, ring)?;
                (Some(report), Some(classify_with_budget(&aff, budget)), None)
            }
            Err(e @ Error::Coercion { .. }) => (None, None, Some(e.to_string())),
            Err(e) => return Err(e),
        },
    };
    let sections = model
        .supported_sections()
        .map(|(ci, s)| {
            let avn_at = match &avn {
                Some(_) => Some(is_avn_at(model, s, ring)?.avn),
                None => None,
            };
            Ok(SectionChain {
                context: ci,
                section: s.clone(),
                avn: avn_at,
                isolated_in_affine: aff.as_ref().map(|c| isolated(c.verdict_at(ci, s))),
                clc: !obstruction.vanishes_at(ci, s).expect("every supported section is classified"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RingAnalysis {
        ring,
        strong_affine: aff.map(|c| c.strong),
        avn,
        skipped,
        obstruction,
        sections,
    })
}

/// Runs every classifier over the requested rings (plus ℤ) and checks the
/// implication chain.
pub fn analyze(model: &EmpiricalModel, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let start = Instant::now();
    let mut rings = if options.rings.is_empty() {
        default_rings(model)
    } else {
        options.rings.clone()
    };
    if !rings.contains(&RingSpec::Integers) {
        rings.push(RingSpec::Integers);
    }
    let mut seen = Vec::new();
    rings.retain(|r| {
        let fresh = !seen.contains(r);
        seen.push(*r);
        fresh
    });
    let no_signalling = check_no_signalling(model);
    model.require_no_signalling()?;
    let classification = classify_with_budget(model, options.budget);
    let rings = rings
        .par_iter()
        .map(|&r| analyze_ring(model, r, options.budget))
        .collect::<Result<Vec<_>>>()?;
    let report = AnalysisReport {
        name: None,
        hash: None,
        model: model.clone(),
        no_signalling,
        classification,
        rings,
        elapsed_ms: start.elapsed().as_millis(),
    };
    check_hierarchy(&report)?;
    Ok(report)
}

pub fn analyze_document(doc: &ModelDocument, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let built = doc.build()?;
    let mut report = analyze(&built.model, options)?;
    report.name = doc.name.clone();
    report.hash = Some(doc.hash());
    Ok(report)
}

fn implies(a: Verdict, b: Verdict) -> bool {
    !(a.is_true() && b.is_false())
}

/// Checks every implication the report can witness. Undecided verdicts
/// never count as violations.
pub fn check_hierarchy(report: &AnalysisReport) -> Result<()> {
    let mut violations = Vec::new();
    let scn = report.model.scenario();
    let sc = report.classification.strong;
    let lc = report.classification.logical;
    let integers = report
        .rings
        .iter()
        .find(|r| r.ring == RingSpec::Integers)
        .ok_or_else(|| Error::SelfCheck("no integer obstruction computed".into()))?;
    for r in &report.rings {
        let name = r.ring.to_string();
        let csc = Verdict::from_bool(r.obstruction.csc);
        let clc = Verdict::from_bool(r.obstruction.clc);
        if !implies(csc, sc) {
            violations.push(format!("CSC_{name} holds but SC fails"));
        }
        if !implies(clc, lc) {
            violations.push(format!("CLC_{name} holds but LC fails"));
        }
        if !implies(csc, Verdict::from_bool(integers.obstruction.csc)) {
            violations.push(format!("CSC_{name} holds but CSC_Z fails"));
        }
        if let (Some(avn), Some(aff)) = (&r.avn, r.strong_affine) {
            let avn = Verdict::from_bool(avn.avn);
            if !implies(avn, aff) {
                violations.push(format!("AvN_{name} holds but SC(Aff S) fails"));
            }
            if !implies(aff, csc) {
                violations.push(format!("SC(Aff S) over {name} holds but CSC_{name} fails"));
            }
            if r.ring.is_field() && aff.is_true() && avn.is_false() {
                violations.push(format!("SC(Aff S) over the field {name} holds but AvN_{name} fails"));
            }
        }
        for (k, s) in r.sections.iter().enumerate() {
            let at = || format!("{} in {}", scn.format_section(&s.section), scn.format_context(scn.context(s.context)));
            let lc_at = isolated(report.classification.verdict_at(s.context, &s.section));
            let clc_z = Verdict::from_bool(integers.sections[k].clc);
            debug_assert_eq!(integers.sections[k].section, s.section);
            let clc_r = Verdict::from_bool(s.clc);
            if let (Some(avn), Some(aff)) = (s.avn, s.isolated_in_affine) {
                if !implies(Verdict::from_bool(avn), aff) {
                    violations.push(format!("AvN_{name} at {} does not isolate it in Aff S", at()));
                }
                if !implies(aff, clc_r) {
                    violations.push(format!("isolated in Aff S but CLC_{name} fails at {}", at()));
                }
            }
            if !implies(clc_r, clc_z) {
                violations.push(format!("CLC_{name} holds but CLC_Z fails at {}", at()));
            }
            if !implies(clc_z, lc_at) {
                violations.push(format!("CLC_Z holds but the section extends globally at {}", at()));
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::SelfCheck(violations.join("; ")))
    }
}

impl AnalysisReport {
    pub fn ring(&self, ring: RingSpec) -> Option<&RingAnalysis> {
        self.rings.iter().find(|r| r.ring == ring)
    }

    fn isolated_sections(&self) -> Vec<String> {
        let scn = self.model.scenario();
        self.classification
            .isolated()
            .map(|v| format!("{} in {}", scn.format_section(&v.section), scn.format_context(scn.context(v.context))))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let scn = self.model.scenario();
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        if let Some(n) = &self.name {
            line(format!("model: {n}"));
        }
        if let Some(h) = &self.hash {
            line(format!("sha256: {h}"));
        }
        line(format!(
            "measurements: {}  contexts: {}  outcomes: {}",
            scn.measurement_count(),
            scn.cover().len(),
            scn.outcome_count()
        ));
        line(format!("no-signalling: {}", self.no_signalling.holds()));
        let isolated = self.isolated_sections();
        line(format!("logical contextuality: {}", self.classification.logical));
        if !isolated.is_empty() {
            line(format!("  isolated sections: {}", isolated.join("; ")));
        }
        line(format!("strong contextuality: {}", self.classification.strong));
        match &self.classification.global_witness {
            Some(g) => line(format!("  global section: {}", scn.format_section(g))),
            None => line("  global section: none found".into()),
        }
        for r in &self.rings {
            line(format!("ring {}:", r.ring));
            match (&r.avn, &r.skipped) {
                (Some(a), _) => {
                    let cert = match &a.certificate {
                        AvnCertificate::Consistent(g) => format!("theory consistent, solution {}", scn.format_section(g)),
                        AvnCertificate::Inconsistent(_) => "theory inconsistent".to_string(),
                    };
                    line(format!("  AvN: {} ({} equations; {cert})", a.avn, a.theory.len()));
                }
                (None, Some(why)) => line(format!("  AvN: n/a ({why})")),
                (None, None) => line("  AvN: n/a".into()),
            }
            if let Some(v) = r.strong_affine {
                line(format!("  SC(Aff S): {v}"));
            }
            let vanishing = r.obstruction.sections.iter().filter(|s| s.vanishes).count();
            line(format!(
                "  CLC: {}  CSC: {}  (obstruction vanishes at {vanishing} of {} sections; system {}x{})",
                r.obstruction.clc,
                r.obstruction.csc,
                r.obstruction.sections.len(),
                r.obstruction.system_rows,
                r.obstruction.system_cols
            ));
        }
        line("hierarchy: consistent".into());
        out
    }

    pub fn to_json(&self) -> Value {
        let scn = self.model.scenario();
        let rings: Vec<Value> = self
            .rings
            .iter()
            .map(|r| {
                let avn = r.avn.as_ref().map(|a| {
                    json!({
                        "holds": a.avn,
                        "theory": a.theory.display_lines(),
                        "certificate": match &a.certificate {
                            AvnCertificate::Consistent(g) => json!({"consistent": scn.format_section(g)}),
                            AvnCertificate::Inconsistent(h) => json!({"inconsistent": {"howell_rows": h.form.rows()}}),
                        },
                    })
                });
                let sections: Vec<Value> = r
                    .sections
                    .iter()
                    .map(|s| {
                        json!({
                            "context": scn.format_context(scn.context(s.context)),
                            "section": scn.format_section(&s.section),
                            "avn": s.avn,
                            "isolated_in_affine": s.isolated_in_affine.map(|v| v.as_str()),
                            "clc": s.clc,
                        })
                    })
                    .collect();
                json!({
                    "ring": r.ring.to_string(),
                    "avn": avn,
                    "skipped": r.skipped,
                    "sc_affine": r.strong_affine.map(|v| v.as_str()),
                    "clc": r.obstruction.clc,
                    "csc": r.obstruction.csc,
                    "obstruction_system": [r.obstruction.system_rows, r.obstruction.system_cols],
                    "sections": sections,
                })
            })
            .collect();
        json!({
            "name": self.name,
            "sha256": self.hash,
            "measurements": scn.measurements(),
            "contexts": scn.cover().iter().map(|c| scn.format_context(c)).collect::<Vec<_>>(),
            "no_signalling": self.no_signalling.holds(),
            "lc": self.classification.logical.as_str(),
            "isolated_sections": self.isolated_sections(),
            "sc": self.classification.strong.as_str(),
            "global_section": self.classification.global_witness.as_ref().map(|g| scn.format_section(g)),
            "rings": rings,
            "hierarchy": "consistent",
            "elapsed_ms": self.elapsed_ms as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn run(name: &str, rings: &[RingSpec]) -> AnalysisReport {
        let doc = corpus::document(name).unwrap();
        analyze_document(
            &doc,
            &AnalysisOptions {
                rings: rings.to_vec(),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn ghz() {
        let r = run("ghz-mermin", &[RingSpec::Mod(2), RingSpec::Integers]);
        assert!(r.classification.strong.is_true());
        let z2 = r.ring(RingSpec::Mod(2)).unwrap();
        assert!(z2.avn.as_ref().unwrap().avn);
        assert!(z2.obstruction.csc);
        assert!(r.ring(RingSpec::Integers).unwrap().obstruction.csc);
    }

    #[test]
    fn hardy_false_positive() {
        let r = run("hardy", &[RingSpec::Integers]);
        assert!(r.classification.logical.is_true());
        assert!(r.classification.strong.is_false());
        assert!(!r.ring(RingSpec::Integers).unwrap().obstruction.clc);
        assert!(r.to_text().contains("hierarchy: consistent"));
    }

    #[test]
    fn box_25() {
        let r = run("box-25", &[RingSpec::Mod(2), RingSpec::Mod(3)]);
        assert!(!r.ring(RingSpec::Mod(2)).unwrap().avn.as_ref().unwrap().avn);
        assert!(r.ring(RingSpec::Mod(3)).unwrap().avn.as_ref().unwrap().avn);
    }

    #[test]
    fn whole_corpus_is_consistent() {
        for name in corpus::names() {
            let r = run(name, &[RingSpec::Mod(2), RingSpec::Mod(3)]);
            let j = r.to_json();
            assert_eq!(j["rings"].as_array().unwrap().len(), 3, "{name}");
        }
    }
}
