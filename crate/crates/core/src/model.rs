//! Possibilistic empirical models, probability tables and the logical /
//! strong contextuality classification.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scenario::{
    enumerate_assignments, intersect, is_subset, Outcomes, Scenario, Section,
};
use crate::search::{GlobalSearch, SearchStatus, Strategy, DEFAULT_BUDGET};

/// A support presheaf: for every context of the cover, the nonempty set of
/// possible joint outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalModel {
    scenario: Scenario,
    supports: Vec<Vec<Section>>,
}

impl EmpiricalModel {
    /// Builds a model; supports are sorted and deduplicated.
    ///
    /// Checks that every section lives on its context and that no support is
    /// empty. No-signalling is *not* enforced here, see
    /// [`check_no_signalling`] and [`EmpiricalModel::require_no_signalling`].
    pub fn new(scenario: Scenario, supports: Vec<Vec<Section>>) -> Result<EmpiricalModel> {
        if supports.len() != scenario.cover().len() {
            return Err(Error::Shape(format!(
                "{} support rows for {} contexts",
                supports.len(),
                scenario.cover().len()
            )));
        }
        let mut rows = Vec::with_capacity(supports.len());
        for (ci, mut row) in supports.into_iter().enumerate() {
            let ctx = scenario.context(ci);
            for s in &row {
                if s.domain() != ctx {
                    return Err(Error::Domain(format!(
                        "support section over #{:?} listed under context {}",
                        s.domain(),
                        scenario.format_context(ctx)
                    )));
                }
                if s.values().iter().any(|&v| v >= scenario.outcome_count()) {
                    return Err(Error::Domain(format!(
                        "support section {s} uses an outcome outside the alphabet"
                    )));
                }
            }
            row.sort();
            row.dedup();
            if row.is_empty() {
                return Err(Error::DegenerateModel {
                    context: scenario.format_context(ctx),
                    reason: "empty support".into(),
                });
            }
            rows.push(row);
        }
        Ok(EmpiricalModel {
            scenario,
            supports: rows,
        })
    }

    /// Builds a model from a per-context predicate on sections.
    pub fn from_predicate<F>(scenario: Scenario, mut keep: F) -> Result<EmpiricalModel>
    where
        F: FnMut(usize, &Section) -> bool,
    {
        let k = scenario.outcome_count();
        let supports = scenario
            .cover()
            .iter()
            .enumerate()
            .map(|(ci, ctx)| {
                enumerate_assignments(ctx, k)
                    .into_iter()
                    .filter(|s| keep(ci, s))
                    .collect()
            })
            .collect();
        EmpiricalModel::new(scenario, supports)
    }

    /// The model in which every section of every context is possible.
    pub fn full(scenario: Scenario) -> EmpiricalModel {
        EmpiricalModel::from_predicate(scenario, |_, _| true).expect("full supports are nonempty")
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn support(&self, context: usize) -> &[Section] {
        &self.supports[context]
    }

    pub fn supports(&self) -> &[Vec<Section>] {
        &self.supports
    }

    pub fn contains(&self, context: usize, s: &Section) -> bool {
        self.supports[context].binary_search(s).is_ok()
    }

    /// Every supported `(context, section)` pair in canonical order.
    pub fn supported_sections(&self) -> impl Iterator<Item = (usize, &Section)> + '_ {
        self.supports
            .iter()
            .enumerate()
            .flat_map(|(ci, row)| row.iter().map(move |s| (ci, s)))
    }

    /// Index of the first context whose support contains `s`.
    pub fn locate(&self, s: &Section) -> Option<usize> {
        (0..self.supports.len()).find(|&ci| self.contains(ci, s))
    }

    /// Restriction image of `S(C)` on a subset of `C`.
    pub fn image(&self, context: usize, subset: &[usize]) -> BTreeSet<Section> {
        self.supports[context]
            .iter()
            .map(|s| s.project(subset))
            .collect()
    }

    pub fn require_no_signalling(&self) -> Result<()> {
        match check_no_signalling(self) {
            NoSignalling::Holds => Ok(()),
            NoSignalling::Violated {
                first,
                second,
                section,
            } => Err(Error::Signalling {
                first: self.scenario.format_context(self.scenario.context(first)),
                second: self.scenario.format_context(self.scenario.context(second)),
                overlap: self.scenario.format_context(section.domain()),
                outcome: self.scenario.format_section(&section),
            }),
        }
    }

    /// The same supports read as elements of the ring of integers modulo `m`.
    ///
    /// Every outcome must carry an integer value below `m`; plain labels count
    /// when they parse as integers.
    pub fn in_ring(&self, m: u64) -> Result<EmpiricalModel> {
        if m < 2 {
            return Err(Error::UnsupportedRing(format!("Z/{m}")));
        }
        let outcomes = self.scenario.outcomes();
        if outcomes.modulus() == Some(m) {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(outcomes.len());
        let mut seen = BTreeSet::new();
        for i in 0..outcomes.len() {
            let coerced = outcomes.numeric(i).filter(|&v| v < m);
            match coerced {
                Some(v) if seen.insert(v) => map.push(v as usize),
                _ => {
                    return Err(Error::Coercion {
                        outcome: outcomes.label(i),
                        ring: format!("Z{m}"),
                    })
                }
            }
        }
        let scenario = self.scenario.with_outcomes(Outcomes::Ring(m));
        let supports = self
            .supports
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| {
                        let values = s.values().iter().map(|&v| map[v]).collect();
                        Section::new(s.domain().to_vec(), values).expect("same domain")
                    })
                    .collect()
            })
            .collect();
        EmpiricalModel::new(scenario, supports)
    }

    /// The model on a subfamily of contexts, keeping only the measurements
    /// they cover. Measurement and context order are preserved.
    pub fn sub_model(&self, contexts: &[usize]) -> Result<EmpiricalModel> {
        let mut chosen: Vec<usize> = contexts.to_vec();
        chosen.sort_unstable();
        chosen.dedup();
        if chosen.is_empty() || chosen.iter().any(|&c| c >= self.supports.len()) {
            return Err(Error::Domain("invalid context selection".into()));
        }
        let kept: BTreeSet<usize> = chosen
            .iter()
            .flat_map(|&c| self.scenario.context(c).iter().copied())
            .collect();
        let kept: Vec<usize> = kept.into_iter().collect();
        let renumber = |m: usize| kept.binary_search(&m).expect("kept measurement");
        let labels: Vec<String> = kept.iter().map(|&m| self.scenario.measurement(m).to_owned()).collect();
        let cover: Vec<Vec<String>> = chosen
            .iter()
            .map(|&c| {
                self.scenario
                    .context(c)
                    .iter()
                    .map(|&m| self.scenario.measurement(m).to_owned())
                    .collect()
            })
            .collect();
        let scenario = Scenario::new(labels, cover, self.scenario.outcomes().clone())?;
        let supports = chosen
            .iter()
            .map(|&c| {
                self.supports[c]
                    .iter()
                    .map(|s| {
                        let domain = s.domain().iter().map(|&m| renumber(m)).collect();
                        Section::new(domain, s.values().to_vec()).expect("order preserved")
                    })
                    .collect()
            })
            .collect();
        EmpiricalModel::new(scenario, supports)
    }

    pub fn without_context(&self, context: usize) -> Result<EmpiricalModel> {
        let rest: Vec<usize> = (0..self.supports.len()).filter(|&c| c != context).collect();
        self.sub_model(&rest)
    }
}

/// Result of the no-signalling check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoSignalling {
    Holds,
    /// `section` (over the overlap of the two contexts) is the restriction of
    /// a supported section in exactly one of them.
    Violated {
        first: usize,
        second: usize,
        section: Section,
    },
}

impl NoSignalling {
    pub fn holds(&self) -> bool {
        matches!(self, NoSignalling::Holds)
    }
}

/// Compares restriction images on every pairwise overlap, pairs and overlap
/// sections in canonical order.
pub fn check_no_signalling(model: &EmpiricalModel) -> NoSignalling {
    let scn = model.scenario();
    let n = scn.cover().len();
    for i in 0..n {
        for j in i + 1..n {
            let overlap = intersect(scn.context(i), scn.context(j));
            let left = model.image(i, &overlap);
            let right = model.image(j, &overlap);
            if let Some(t) = left.symmetric_difference(&right).min() {
                return NoSignalling::Violated {
                    first: i,
                    second: j,
                    section: t.clone(),
                };
            }
        }
    }
    NoSignalling::Holds
}

/// One supported section per context, pairwise agreeing on overlaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibleFamily {
    choice: Vec<Section>,
}

impl CompatibleFamily {
    pub fn new(model: &EmpiricalModel, choice: Vec<Section>) -> Result<CompatibleFamily> {
        if choice.len() != model.supports().len() {
            return Err(Error::Shape("one section per context required".into()));
        }
        for (ci, s) in choice.iter().enumerate() {
            if !model.contains(ci, s) {
                return Err(Error::Precondition(format!(
                    "{} is not supported at {}",
                    model.scenario().format_section(s),
                    model.scenario().format_context(model.scenario().context(ci))
                )));
            }
        }
        for (i, a) in choice.iter().enumerate() {
            for b in &choice[i + 1..] {
                if !a.agrees_with(b) {
                    return Err(Error::Precondition(format!(
                        "{} and {} disagree on their overlap",
                        model.scenario().format_section(a),
                        model.scenario().format_section(b)
                    )));
                }
            }
        }
        Ok(CompatibleFamily { choice })
    }

    /// The family induced by a global section, if all its restrictions are
    /// supported.
    pub fn from_global(model: &EmpiricalModel, global: &Section) -> Result<CompatibleFamily> {
        let choice = model
            .scenario()
            .cover()
            .iter()
            .map(|c| global.restrict(c))
            .collect::<Result<Vec<_>>>()?;
        CompatibleFamily::new(model, choice)
    }

    pub fn choice(&self) -> &[Section] {
        &self.choice
    }

    /// The unique global section restricting to the family.
    pub fn glue(&self) -> Section {
        let mut pairs = BTreeMap::new();
        for s in &self.choice {
            for (&m, &v) in s.domain().iter().zip(s.values()) {
                pairs.insert(m, v);
            }
        }
        Section::from_pairs(pairs.into_iter().collect()).expect("keys are unique")
    }
}

/// `S(U)`: sections over `U` whose restrictions land in every context's
/// support. For `U = X` these are the global sections.
pub fn model_restriction(model: &EmpiricalModel, subset: &[usize]) -> Result<Vec<Section>> {
    model_restriction_with_budget(model, subset, DEFAULT_BUDGET)
}

pub fn model_restriction_with_budget(
    model: &EmpiricalModel,
    subset: &[usize],
    budget: u64,
) -> Result<Vec<Section>> {
    let mut vars = subset.to_vec();
    vars.sort_unstable();
    vars.dedup();
    if vars.iter().any(|&m| m >= model.scenario().measurement_count()) {
        return Err(Error::Domain("subset is not contained in the scenario".into()));
    }
    let search = GlobalSearch::new(model, &vars);
    let mut out = Vec::new();
    match search.for_each_solution(&Section::empty(), budget, |s| {
        out.push(s.clone());
        true
    }) {
        SearchStatus::BudgetExhausted(n) => Err(Error::Budget(n)),
        _ => Ok(out),
    }
}

/// Three-valued verdict used wherever a budget can cut a search short.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Undecided,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }

    pub fn is_false(self) -> bool {
        self == Verdict::False
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Undecided => "undecided at budget",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a supported section extends to a compatible family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extension {
    /// Extends; carries a global section restricting to it.
    Extends(Section),
    /// No compatible family contains it.
    Isolated,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionVerdict {
    pub context: usize,
    pub section: Section,
    pub extension: Extension,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub strategy: Strategy,
    pub sections: Vec<SectionVerdict>,
    /// Some global section, when one was found.
    pub global_witness: Option<Section>,
    pub logical: Verdict,
    pub strong: Verdict,
}

impl Classification {
    /// Sections that extend to no global section.
    pub fn isolated(&self) -> impl Iterator<Item = &SectionVerdict> {
        self.sections
            .iter()
            .filter(|v| v.extension == Extension::Isolated)
    }

    pub fn verdict_at(&self, context: usize, section: &Section) -> Option<&Extension> {
        self.sections
            .iter()
            .find(|v| v.context == context && &v.section == section)
            .map(|v| &v.extension)
    }
}

pub fn classify_contextuality(model: &EmpiricalModel) -> Classification {
    classify_with_budget(model, DEFAULT_BUDGET)
}

pub fn classify_with_budget(model: &EmpiricalModel, budget: u64) -> Classification {
    let scn = model.scenario();
    let all: Vec<usize> = (0..scn.measurement_count()).collect();
    let search = GlobalSearch::new(model, &all);
    let strategy = search.strategy();

    let mut found: Vec<Vec<Option<Extension>>> = model
        .supports()
        .iter()
        .map(|row| vec![None; row.len()])
        .collect();
    let mut pending: usize = found.iter().map(Vec::len).sum();

    let mark = |g: &Section, found: &mut Vec<Vec<Option<Extension>>>, pending: &mut usize| {
        for (ci, ctx) in scn.cover().iter().enumerate() {
            let r = g.project(ctx);
            if let Ok(k) = model.support(ci).binary_search(&r) {
                if found[ci][k].is_none() {
                    found[ci][k] = Some(Extension::Extends(g.clone()));
                    *pending -= 1;
                }
            }
        }
    };

    match strategy {
        Strategy::Exhaustive => {
            let status = search.for_each_solution(&Section::empty(), budget, |g| {
                mark(g, &mut found, &mut pending);
                pending > 0
            });
            let fallback = match status {
                SearchStatus::BudgetExhausted(_) => Extension::Undecided,
                _ => Extension::Isolated,
            };
            for row in &mut found {
                for slot in row.iter_mut().filter(|s| s.is_none()) {
                    *slot = Some(fallback.clone());
                }
            }
        }
        Strategy::Backtracking => {
            // One unpinned search first: when it finds nothing, every section
            // is isolated at once.
            let mut first = None;
            let status = search.for_each_solution(&Section::empty(), budget, |g| {
                first = Some(g.clone());
                false
            });
            match first {
                Some(g) => mark(&g, &mut found, &mut pending),
                None if status == SearchStatus::Complete => {
                    for row in &mut found {
                        for slot in row.iter_mut() {
                            *slot = Some(Extension::Isolated);
                        }
                    }
                }
                None => {}
            }
            for ci in 0..found.len() {
                for k in 0..found[ci].len() {
                    if found[ci][k].is_some() {
                        continue;
                    }
                    let s0 = &model.support(ci)[k];
                    let mut hit = None;
                    let status = search.for_each_solution(s0, budget, |g| {
                        hit = Some(g.clone());
                        false
                    });
                    match hit {
                        Some(g) => mark(&g, &mut found, &mut pending),
                        None => {
                            found[ci][k] = Some(match status {
                                SearchStatus::BudgetExhausted(_) => Extension::Undecided,
                                _ => Extension::Isolated,
                            });
                        }
                    }
                }
            }
        }
    }

    let mut sections = Vec::new();
    for (ci, row) in found.into_iter().enumerate() {
        for (k, ext) in row.into_iter().enumerate() {
            sections.push(SectionVerdict {
                context: ci,
                section: model.support(ci)[k].clone(),
                extension: ext.expect("every section decided"),
            });
        }
    }
    let any_isolated = sections.iter().any(|v| v.extension == Extension::Isolated);
    let any_undecided = sections.iter().any(|v| v.extension == Extension::Undecided);
    let global_witness = sections.iter().find_map(|v| match &v.extension {
        Extension::Extends(g) => Some(g.clone()),
        _ => None,
    });
    let logical = if any_isolated {
        Verdict::True
    } else if any_undecided {
        Verdict::Undecided
    } else {
        Verdict::False
    };
    let strong = if global_witness.is_some() {
        Verdict::False
    } else if any_undecided {
        Verdict::Undecided
    } else {
        Verdict::True
    };
    Classification {
        strategy,
        sections,
        global_witness,
        logical,
        strong,
    }
}

/// Exact probability rows, one distribution per context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityTable {
    scenario: Scenario,
    rows: Vec<BTreeMap<Section, BigRational>>,
}

impl ProbabilityTable {
    /// Validates nonnegativity, normalisation and no-signalling.
    ///
    /// Missing sections have probability zero.
    pub fn new(
        scenario: Scenario,
        rows: Vec<BTreeMap<Section, BigRational>>,
    ) -> Result<ProbabilityTable> {
        if rows.len() != scenario.cover().len() {
            return Err(Error::Shape(format!(
                "{} probability rows for {} contexts",
                rows.len(),
                scenario.cover().len()
            )));
        }
        for (ci, row) in rows.iter().enumerate() {
            let ctx = scenario.context(ci);
            let mut total = BigRational::zero();
            for (s, p) in row {
                if s.domain() != ctx || s.values().iter().any(|&v| v >= scenario.outcome_count()) {
                    return Err(Error::Domain(format!(
                        "probability entry {s} does not belong to context {}",
                        scenario.format_context(ctx)
                    )));
                }
                if p.is_negative() {
                    return Err(Error::Probability(format!(
                        "negative probability {p} at {}",
                        scenario.format_section(s)
                    )));
                }
                total += p;
            }
            if !total.is_one() {
                return Err(Error::Normalisation {
                    context: scenario.format_context(ctx),
                    sum: total.to_string(),
                });
            }
        }
        let table = ProbabilityTable { scenario, rows };
        table.check_marginals()?;
        Ok(table)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn rows(&self) -> &[BTreeMap<Section, BigRational>] {
        &self.rows
    }

    pub fn probability(&self, context: usize, s: &Section) -> BigRational {
        self.rows[context].get(s).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Marginal of a context's distribution on a subset of it.
    pub fn marginal(&self, context: usize, subset: &[usize]) -> BTreeMap<Section, BigRational> {
        let mut out: BTreeMap<Section, BigRational> =
            enumerate_assignments(subset, self.scenario.outcome_count())
                .into_iter()
                .map(|t| (t, BigRational::zero()))
                .collect();
        for (s, p) in &self.rows[context] {
            *out.get_mut(&s.project(subset)).expect("all assignments listed") += p;
        }
        out
    }

    fn check_marginals(&self) -> Result<()> {
        let scn = &self.scenario;
        let n = scn.cover().len();
        for i in 0..n {
            for j in i + 1..n {
                let overlap = intersect(scn.context(i), scn.context(j));
                if overlap.is_empty() {
                    continue;
                }
                let a = self.marginal(i, &overlap);
                let b = self.marginal(j, &overlap);
                if let Some((t, _)) = a.iter().find(|(t, p)| b.get(*t) != Some(*p)) {
                    return Err(Error::Signalling {
                        first: scn.format_context(scn.context(i)),
                        second: scn.format_context(scn.context(j)),
                        overlap: scn.format_context(&overlap),
                        outcome: scn.format_section(t),
                    });
                }
            }
        }
        Ok(())
    }

    /// The table with the uniform distribution on each support.
    pub fn uniform_on(model: &EmpiricalModel) -> Result<ProbabilityTable> {
        let rows = model
            .supports()
            .iter()
            .map(|row| {
                let p = BigRational::new(1.into(), row.len().into());
                row.iter().map(|s| (s.clone(), p.clone())).collect()
            })
            .collect();
        ProbabilityTable::new(model.scenario().clone(), rows)
    }
}

/// `S(C) = { s : p_C(s) > 0 }`.
pub fn support_of_probability_table(pt: &ProbabilityTable) -> Result<EmpiricalModel> {
    let supports = pt
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .filter(|(_, p)| p.is_positive())
                .map(|(s, _)| s.clone())
                .collect()
        })
        .collect();
    EmpiricalModel::new(pt.scenario.clone(), supports)
}

/// True when `subset` lies inside some context of the cover.
pub fn beneath_cover(scn: &Scenario, subset: &[usize]) -> bool {
    scn.cover().iter().any(|c| is_subset(subset, c))
}
