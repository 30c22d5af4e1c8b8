//! Measurement scenarios, sections and the nerve of a measurement cover.
//!
//! Measurements and outcomes are stored by index. Indices follow declaration
//! order, and every enumeration in the crate is lexicographic in those
//! indices, so reports are reproducible byte for byte.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// The outcome alphabet shared by every measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcomes {
    /// A plain finite set of labels.
    Labels(Vec<String>),
    /// The elements `0..n` of the ring of integers modulo `n`.
    Ring(u64),
}

impl Outcomes {
    pub fn len(&self) -> usize {
        match self {
            Outcomes::Labels(labels) => labels.len(),
            Outcomes::Ring(n) => *n as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, index: usize) -> String {
        match self {
            Outcomes::Labels(labels) => labels[index].clone(),
            Outcomes::Ring(_) => index.to_string(),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        match self {
            Outcomes::Labels(labels) => labels.iter().position(|l| l == label),
            Outcomes::Ring(n) => label.parse::<u64>().ok().filter(|v| v < n).map(|v| v as usize),
        }
    }

    /// Integer value carried by an outcome, if it has one.
    ///
    /// Ring outcomes are their own residues; labels count when they parse as
    /// non-negative integers.
    pub fn numeric(&self, index: usize) -> Option<u64> {
        match self {
            Outcomes::Labels(labels) => labels.get(index).and_then(|l| l.parse::<u64>().ok()),
            Outcomes::Ring(n) => Some(index as u64).filter(|v| v < n),
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            Outcomes::Ring(n) => Some(*n),
            Outcomes::Labels(_) => None,
        }
    }
}

/// A measurement scenario: measurements, a cover of maximal contexts and an
/// outcome alphabet.
#[derive(Debug, Clone)]
pub struct Scenario {
    measurements: Vec<String>,
    cover: Vec<Vec<usize>>,
    outcomes: Outcomes,
    index: HashMap<String, usize>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.measurements == other.measurements
            && self.cover == other.cover
            && self.outcomes == other.outcomes
    }
}

impl Eq for Scenario {}

fn check_label(kind: &str, label: &str) -> Result<()> {
    if label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '=' | ',' | '{' | '}' | ':' | '"'))
    {
        return Err(Error::InvalidScenario(format!(
            "{kind} label {label:?} must be non-empty and free of whitespace and any of = , {{ }} : \""
        )));
    }
    Ok(())
}

impl Scenario {
    pub fn new<M, C, S>(measurements: M, cover: C, outcomes: Outcomes) -> Result<Scenario>
    where
        M: IntoIterator<Item = S>,
        C: IntoIterator,
        C::Item: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let measurements: Vec<String> = measurements.into_iter().map(Into::into).collect();
        if measurements.is_empty() {
            return Err(Error::InvalidScenario("no measurements declared".into()));
        }
        let mut index = HashMap::new();
        for (i, m) in measurements.iter().enumerate() {
            check_label("measurement", m)?;
            if index.insert(m.clone(), i).is_some() {
                return Err(Error::InvalidScenario(format!("measurement {m} declared twice")));
            }
        }

        match &outcomes {
            Outcomes::Labels(labels) => {
                if labels.is_empty() {
                    return Err(Error::InvalidScenario("empty outcome alphabet".into()));
                }
                let mut seen = BTreeSet::new();
                for l in labels {
                    check_label("outcome", l)?;
                    if !seen.insert(l) {
                        return Err(Error::InvalidScenario(format!("outcome {l} declared twice")));
                    }
                }
            }
            Outcomes::Ring(n) => {
                if *n < 2 {
                    return Err(Error::InvalidScenario(format!(
                        "outcome ring modulus must be at least 2, got {n}"
                    )));
                }
            }
        }

        let mut contexts = Vec::new();
        for (ci, ctx) in cover.into_iter().enumerate() {
            let mut members = Vec::new();
            for label in ctx {
                let label: String = label.into();
                let &i = index.get(&label).ok_or_else(|| {
                    Error::InvalidScenario(format!("context #{ci} names unknown measurement {label}"))
                })?;
                if members.contains(&i) {
                    return Err(Error::InvalidScenario(format!(
                        "context #{ci} lists measurement {label} twice"
                    )));
                }
                members.push(i);
            }
            if members.is_empty() {
                return Err(Error::InvalidScenario(format!("context #{ci} is empty")));
            }
            members.sort_unstable();
            contexts.push(members);
        }
        if contexts.is_empty() {
            return Err(Error::InvalidScenario("cover has no contexts".into()));
        }

        let scn = Scenario {
            measurements,
            cover: contexts,
            outcomes,
            index,
        };

        let covered: BTreeSet<usize> = scn.cover.iter().flatten().copied().collect();
        if let Some(m) = (0..scn.measurements.len()).find(|m| !covered.contains(m)) {
            return Err(Error::InvalidScenario(format!(
                "cover does not contain measurement {}",
                scn.measurements[m]
            )));
        }
        for (i, a) in scn.cover.iter().enumerate() {
            for (j, b) in scn.cover.iter().enumerate() {
                if i != j && is_subset(a, b) && (a.len() < b.len() || i < j) {
                    return Err(Error::InvalidScenario(format!(
                        "cover is not an antichain: context {} is contained in context {}",
                        scn.format_context(a),
                        scn.format_context(b)
                    )));
                }
            }
        }
        Ok(scn)
    }

    pub fn measurements(&self) -> &[String] {
        &self.measurements
    }

    pub fn measurement_count(&self) -> usize {
        self.measurements.len()
    }

    pub fn measurement(&self, index: usize) -> &str {
        &self.measurements[index]
    }

    pub fn measurement_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// The cover, each context as a sorted list of measurement indices.
    pub fn cover(&self) -> &[Vec<usize>] {
        &self.cover
    }

    pub fn context(&self, index: usize) -> &[usize] {
        &self.cover[index]
    }

    pub fn context_index(&self, members: &[usize]) -> Option<usize> {
        self.cover.iter().position(|c| c.as_slice() == members)
    }

    pub fn outcomes(&self) -> &Outcomes {
        &self.outcomes
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    /// Same measurements and cover over a different outcome alphabet.
    pub fn with_outcomes(&self, outcomes: Outcomes) -> Scenario {
        Scenario {
            outcomes,
            ..self.clone()
        }
    }

    /// Parses a set of measurement labels into a sorted index list.
    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let i = self
                .measurement_index(l)
                .ok_or_else(|| Error::Domain(format!("unknown measurement {l}")))?;
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Parses `"a1,b1"` (or `"{a1,b1}"`) into a cover index.
    pub fn parse_context(&self, text: &str) -> Result<usize> {
        let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
        let labels: Vec<&str> = trimmed
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let members = self.subset(&labels)?;
        self.context_index(&members)
            .ok_or_else(|| Error::Domain(format!("{text} is not a context of the cover")))
    }

    pub fn format_context(&self, members: &[usize]) -> String {
        let labels: Vec<&str> = members.iter().map(|&m| self.measurements[m].as_str()).collect();
        format!("{{{}}}", labels.join(","))
    }

    /// Builds a section from `(measurement, outcome)` label pairs.
    pub fn section<S: AsRef<str>>(&self, pairs: &[(S, S)]) -> Result<Section> {
        let mut entries = Vec::with_capacity(pairs.len());
        for (m, o) in pairs {
            let (m, o) = (m.as_ref(), o.as_ref());
            let mi = self
                .measurement_index(m)
                .ok_or_else(|| Error::Domain(format!("unknown measurement {m}")))?;
            let oi = self
                .outcomes
                .index_of(o)
                .ok_or_else(|| Error::Domain(format!("unknown outcome {o} for {m}")))?;
            entries.push((mi, oi));
        }
        Section::from_pairs(entries)
    }

    /// Parses the command-line form `a1=0,b1=0`.
    pub fn parse_section(&self, text: &str) -> Result<Section> {
        let mut pairs = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (m, o) = part
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("expected measurement=outcome, got {part:?}")))?;
            pairs.push((m.trim(), o.trim()));
        }
        self.section(&pairs)
    }

    pub fn format_section(&self, s: &Section) -> String {
        s.domain
            .iter()
            .zip(&s.values)
            .map(|(&m, &v)| format!("{}={}", self.measurements[m], self.outcomes.label(v)))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Outcome labels of a section, in domain order.
    pub fn section_outcomes(&self, s: &Section) -> Vec<String> {
        s.values.iter().map(|&v| self.outcomes.label(v)).collect()
    }
}

pub(crate) fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

pub(crate) fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

/// An assignment of outcomes to a set of measurements.
///
/// The domain is kept sorted, so the derived ordering is lexicographic in
/// the declared measurement and outcome orders for sections sharing a domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Section {
    domain: Vec<usize>,
    values: Vec<usize>,
}

impl Section {
    pub fn new(domain: Vec<usize>, values: Vec<usize>) -> Result<Section> {
        if domain.len() != values.len() {
            return Err(Error::Shape(format!(
                "section domain has {} measurements but {} values",
                domain.len(),
                values.len()
            )));
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("section domain must be strictly increasing".into()));
        }
        Ok(Section { domain, values })
    }

    pub fn from_pairs(mut entries: Vec<(usize, usize)>) -> Result<Section> {
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("measurement assigned twice in section".into()));
        }
        let (domain, values) = entries.into_iter().unzip();
        Ok(Section { domain, values })
    }

    /// The unique section over the empty set.
    pub fn empty() -> Section {
        Section {
            domain: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn value_of(&self, measurement: usize) -> Option<usize> {
        self.domain
            .binary_search(&measurement)
            .ok()
            .map(|i| self.values[i])
    }

    /// `s|_V`. Fails unless `V` is contained in the domain.
    pub fn restrict(&self, subset: &[usize]) -> Result<Section> {
        let mut values = Vec::with_capacity(subset.len());
        let mut domain = subset.to_vec();
        domain.sort_unstable();
        domain.dedup();
        for &m in &domain {
            match self.value_of(m) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::Domain(format!(
                        "measurement #{m} is outside the section's domain"
                    )))
                }
            }
        }
        Ok(Section { domain, values })
    }

    /// Restriction to the part of `subset` that lies in the domain.
    pub(crate) fn project(&self, subset: &[usize]) -> Section {
        let mut domain = Vec::new();
        let mut values = Vec::new();
        for (&m, &v) in self.domain.iter().zip(&self.values) {
            if subset.binary_search(&m).is_ok() {
                domain.push(m);
                values.push(v);
            }
        }
        Section { domain, values }
    }

    /// True when both sections agree wherever both are defined.
    pub fn agrees_with(&self, other: &Section) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.domain.len() && j < other.domain.len() {
            match self.domain[i].cmp(&other.domain[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if self.values[i] != other.values[j] {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .domain
            .iter()
            .zip(&self.values)
            .map(|(m, v)| format!("#{m}={v}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `s|_V`, the restriction map of the sheaf of events.
pub fn restrict_section(s: &Section, subset: &[usize]) -> Result<Section> {
    s.restrict(subset)
}

/// Every section over `subset`, lexicographically ordered.
pub fn sections_of(scn: &Scenario, subset: &[usize]) -> Result<Vec<Section>> {
    let mut domain = subset.to_vec();
    domain.sort_unstable();
    domain.dedup();
    if let Some(&bad) = domain.iter().find(|&&m| m >= scn.measurement_count()) {
        return Err(Error::Domain(format!("measurement #{bad} is not in the scenario")));
    }
    Ok(enumerate_assignments(&domain, scn.outcome_count()))
}

pub(crate) fn enumerate_assignments(domain: &[usize], outcomes: usize) -> Vec<Section> {
    let total = outcomes.checked_pow(domain.len() as u32).unwrap_or(usize::MAX);
    let mut out = Vec::with_capacity(total.min(1 << 20));
    let mut values = vec![0usize; domain.len()];
    loop {
        out.push(Section {
            domain: domain.to_vec(),
            values: values.clone(),
        });
        if !odometer_step(&mut values, outcomes) {
            return out;
        }
    }
}

/// Advances `values` to the next assignment, last position fastest.
pub(crate) fn odometer_step(values: &mut [usize], radix: usize) -> bool {
    for slot in values.iter_mut().rev() {
        *slot += 1;
        if *slot < radix {
            return true;
        }
        *slot = 0;
    }
    false
}

/// A simplex of the nerve: strictly increasing cover indices with a
/// nonempty common intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    contexts: Vec<usize>,
    intersection: Vec<usize>,
}

impl Simplex {
    pub fn contexts(&self) -> &[usize] {
        &self.contexts
    }

    pub fn intersection(&self) -> &[usize] {
        &self.intersection
    }

    pub fn dimension(&self) -> usize {
        self.contexts.len() - 1
    }

    /// `∂_j`: the index tuple with position `j` removed.
    pub fn face(&self, j: usize) -> Vec<usize> {
        let mut f = self.contexts.clone();
        f.remove(j);
        f
    }
}

#[derive(Debug, Clone)]
pub struct Nerve {
    levels: Vec<Vec<Simplex>>,
}

impl Nerve {
    /// The q-simplices, in lexicographic order of their index tuples.
    pub fn simplices(&self, q: usize) -> &[Simplex] {
        self.levels.get(q).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Highest q with at least one simplex.
    pub fn dimension(&self) -> usize {
        self.levels
            .iter()
            .rposition(|l| !l.is_empty())
            .unwrap_or(0)
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn position(&self, q: usize, contexts: &[usize]) -> Option<usize> {
        self.simplices(q)
            .binary_search_by(|s| s.contexts.as_slice().cmp(contexts))
            .ok()
    }
}

/// Nerve of the cover up to dimension `max_q` (pass `usize::MAX` for all of it).
pub fn build_nerve(scn: &Scenario, max_q: usize) -> Nerve {
    let max_q = max_q.min(scn.cover().len().saturating_sub(1));
    let mut levels: Vec<Vec<Simplex>> = vec![Vec::new(); max_q + 1];
    let cover = scn.cover();

    fn extend(
        cover: &[Vec<usize>],
        tuple: &mut Vec<usize>,
        inter: Vec<usize>,
        max_q: usize,
        levels: &mut Vec<Vec<Simplex>>,
    ) {
        levels[tuple.len() - 1].push(Simplex {
            contexts: tuple.clone(),
            intersection: inter.clone(),
        });
        if tuple.len() > max_q {
            return;
        }
        let last = *tuple.last().expect("tuple is nonempty");
        for next in last + 1..cover.len() {
            let narrowed = intersect(&inter, &cover[next]);
            if !narrowed.is_empty() {
                tuple.push(next);
                extend(cover, tuple, narrowed, max_q, levels);
                tuple.pop();
            }
        }
    }

    for (i, ctx) in cover.iter().enumerate() {
        extend(cover, &mut vec![i], ctx.clone(), max_q, &mut levels);
    }
    for level in &mut levels {
        level.sort_by(|a, b| a.contexts.cmp(&b.contexts));
    }
    Nerve { levels }
}

/// Partition of the cover into classes linked by nonempty intersections.
pub fn connected_components(scn: &Scenario) -> Vec<Vec<usize>> {
    let n = scn.cover().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..n {
        for j in i + 1..n {
            if !intersect(scn.context(i), scn.context(j)).is_empty() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let slot = *root_slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(i);
    }
    groups
}

/// Errors with a per-component instruction when the cover is disconnected.
pub fn require_connected(scn: &Scenario) -> Result<()> {
    let comps = connected_components(scn);
    if comps.len() > 1 {
        let described: Vec<String> = comps
            .iter()
            .map(|c| {
                let ctxs: Vec<String> = c.iter().map(|&i| scn.format_context(scn.context(i))).collect();
                format!("[{}]", ctxs.join(" "))
            })
            .collect();
        return Err(Error::Disconnected {
            count: comps.len(),
            components: described.join(", "),
        });
    }
    Ok(())
}
