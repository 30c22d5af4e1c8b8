//! Propositional formulas over measurements, logical Bell inequalities,
//! liar cycles and model isomorphism.
//!
//! Outcome index 0 reads as *true* and index 1 as *false*; formulas are only
//! evaluated on binary scenarios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{EmpiricalModel, ProbabilityTable};
use crate::scenario::{Outcomes, Scenario, Section};

/// Largest number of variables the satisfiability check enumerates.
pub const MAX_FORMULA_VARIABLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Parses infix syntax: `¬ ! ~` for negation, `∧ &`, `∨ |`, `↔ <->`,
    /// parentheses, and measurement labels of `scn` as atoms. Binding is
    /// tightest for negation, then ∧, ∨, ↔ (all left-associative).
    pub fn parse(scn: &Scenario, text: &str) -> Result<Formula> {
        let tokens = tokenize(text)?;
        let mut p = Parser {
            scn,
            tokens,
            pos: 0,
        };
        let f = p.iff()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Formula(format!(
                "unexpected {} in {text:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(f)
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Formula::Var(m) => {
                out.insert(*m);
            }
            Formula::Not(a) => a.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates under `value(m)`, the outcome index of measurement `m`.
    pub fn eval(&self, value: &dyn Fn(usize) -> usize) -> bool {
        match self {
            Formula::Var(m) => value(*m) == 0,
            Formula::Not(a) => !a.eval(value),
            Formula::And(a, b) => a.eval(value) && b.eval(value),
            Formula::Or(a, b) => a.eval(value) || b.eval(value),
            Formula::Iff(a, b) => a.eval(value) == b.eval(value),
        }
    }

    /// Truth value on a section whose domain contains the formula's variables.
    pub fn holds_on(&self, s: &Section) -> Result<bool> {
        for m in self.variables() {
            if s.value_of(m).is_none() {
                return Err(Error::Domain(format!("measurement #{m} is not in the section's domain")));
            }
        }
        Ok(self.eval(&|m| s.value_of(m).expect("checked above")))
    }

    pub fn display(&self, scn: &Scenario) -> String {
        match self {
            Formula::Var(m) => scn.measurement(*m).to_string(),
            Formula::Not(a) => match **a {
                Formula::Var(_) | Formula::Not(_) => format!("¬{}", a.display(scn)),
                _ => format!("¬({})", a.display(scn)),
            },
            Formula::And(a, b) => format!("({} ∧ {})", a.display(scn), b.display(scn)),
            Formula::Or(a, b) => format!("({} ∨ {})", a.display(scn), b.display(scn)),
            Formula::Iff(a, b) => format!("({} ↔ {})", a.display(scn), b.display(scn)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Iff,
    Open,
    Close,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier {s:?}"),
            Token::Not => write!(f, "'¬'"),
            Token::And => write!(f, "'∧'"),
            Token::Or => write!(f, "'∨'"),
            Token::Iff => write!(f, "'↔'"),
            Token::Open => write!(f, "'('"),
            Token::Close => write!(f, "')'"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-' | '+' | '#')
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '¬' | '!' | '~' => {
                chars.next();
                out.push(Token::Not);
            }
            '∧' | '&' => {
                chars.next();
                out.push(Token::And);
            }
            '∨' | '|' => {
                chars.next();
                out.push(Token::Or);
            }
            '↔' => {
                chars.next();
                out.push(Token::Iff);
            }
            '<' => {
                if text[i..].starts_with("<->") {
                    for _ in 0..3 {
                        chars.next();
                    }
                    out.push(Token::Iff);
                } else {
                    return Err(Error::Formula(format!("stray '<' at byte {i} in {text:?}")));
                }
            }
            '(' => {
                chars.next();
                out.push(Token::Open);
            }
            ')' => {
                chars.next();
                out.push(Token::Close);
            }
            c if is_ident_char(c) => {
                let mut ident = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    ident.push(c);
                    chars.next();
                }
                out.push(Token::Ident(ident));
            }
            c => return Err(Error::Formula(format!("unexpected character {c:?} in {text:?}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Formula("empty formula".into()));
    }
    Ok(out)
}

struct Parser<'a> {
    scn: &'a Scenario,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn eat(&mut self, t: &Token) -> bool {
        if self.tokens.get(self.pos) == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.or()?;
        while self.eat(&Token::Iff) {
            lhs = Formula::Iff(Box::new(lhs), Box::new(self.or()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            lhs = Formula::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            lhs = Formula::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Token::Not) {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Open) => {
                self.pos += 1;
                let f = self.iff()?;
                if !self.eat(&Token::Close) {
                    return Err(Error::Formula("missing ')'".into()));
                }
                Ok(f)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                self.scn
                    .measurement_index(&name)
                    .map(Formula::Var)
                    .ok_or_else(|| Error::Formula(format!("unknown measurement {name:?}")))
            }
            Some(t) => Err(Error::Formula(format!("unexpected {t}"))),
            None => Err(Error::Formula("formula ends early".into())),
        }
    }
}

fn require_boolean(scn: &Scenario) -> Result<()> {
    if scn.outcome_count() != 2 {
        return Err(Error::Formula(format!(
            "formulas need two outcomes per measurement, the scenario has {}",
            scn.outcome_count()
        )));
    }
    Ok(())
}

/// A formula attached to a context, optionally with a probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposition {
    pub context: usize,
    pub formula: Formula,
    pub probability: Option<BigRational>,
}

impl Proposition {
    pub fn new(scn: &Scenario, context: usize, formula: Formula, probability: Option<BigRational>) -> Result<Proposition> {
        require_boolean(scn)?;
        if context >= scn.cover().len() {
            return Err(Error::Formula(format!("no context #{context}")));
        }
        let ctx = scn.context(context);
        if let Some(m) = formula.variables().into_iter().find(|m| ctx.binary_search(m).is_err()) {
            return Err(Error::Formula(format!(
                "variable {} is outside context {}",
                scn.measurement(m),
                scn.format_context(ctx)
            )));
        }
        if let Some(p) = &probability {
            if p < &BigRational::zero() || p > &BigRational::one() {
                return Err(Error::Probability(format!("probability {p} is outside [0, 1]")));
            }
        }
        Ok(Proposition {
            context,
            formula,
            probability,
        })
    }

    pub fn parse(scn: &Scenario, context: &str, formula: &str, probability: Option<BigRational>) -> Result<Proposition> {
        let ci = scn.parse_context(context)?;
        Proposition::new(scn, ci, Formula::parse(scn, formula)?, probability)
    }

    /// The same formula with the probability it has under `table`.
    pub fn with_probability_from(&self, table: &ProbabilityTable) -> Result<Proposition> {
        let mut total = BigRational::zero();
        for (s, p) in &table.rows()[self.context] {
            if self.formula.holds_on(s)? {
                total += p;
            }
        }
        Ok(Proposition {
            probability: Some(total),
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellBound {
    pub jointly_satisfiable: bool,
    /// A global assignment (over the formulas' variables) satisfying all of
    /// them, when one exists.
    pub witness: Option<Section>,
    pub sum_p: Option<BigRational>,
    /// `N − 1`.
    pub bound: BigRational,
    /// `max(0, Σp − (N − 1))`; only reported when jointly unsatisfiable.
    pub violation: Option<BigRational>,
}

/// Decides joint satisfiability by enumerating global assignments and, when
/// unsatisfiable, evaluates the bound `Σ p_i ≤ N − 1`.
pub fn logical_bell_bound(scn: &Scenario, props: &[Proposition]) -> Result<BellBound> {
    require_boolean(scn)?;
    let vars: Vec<usize> = props
        .iter()
        .flat_map(|p| p.formula.variables())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vars.len() > MAX_FORMULA_VARIABLES {
        return Err(Error::Budget(1 << MAX_FORMULA_VARIABLES));
    }
    let mut witness = None;
    for bits in 0u64..(1u64 << vars.len()) {
        let value = |m: usize| {
            let k = vars.binary_search(&m).expect("variable collected above");
            ((bits >> (vars.len() - 1 - k)) & 1) as usize
        };
        if props.iter().all(|p| p.formula.eval(&value)) {
            let values = vars.iter().map(|&m| value(m)).collect();
            witness = Some(Section::new(vars.clone(), values)?);
            break;
        }
    }
    let n = props.len() as i64;
    let bound = BigRational::from_integer((n - 1).max(0).into());
    let sum_p = props
        .iter()
        .map(|p| p.probability.clone())
        .collect::<Option<Vec<_>>>()
        .map(|ps| ps.into_iter().fold(BigRational::zero(), |a, b| a + b));
    let violation = if witness.is_some() {
        None
    } else {
        let sum = sum_p.as_ref().ok_or_else(|| {
            Error::Precondition("every proposition needs a probability to evaluate the bound".into())
        })?;
        let excess = sum - &bound;
        Some(if excess > BigRational::zero() { excess } else { BigRational::zero() })
    };
    Ok(BellBound {
        jointly_satisfiable: witness.is_some(),
        witness,
        sum_p,
        bound,
        violation,
    })
}

/// The four correlation propositions `a1↔b1, a1↔b2, a2↔b1, a2↔¬b2` on the
/// two-party scenario, without probabilities.
pub fn bell_propositions(scn: &Scenario) -> Result<Vec<Proposition>> {
    [
        ("a1,b1", "a1 ↔ b1"),
        ("a1,b2", "a1 ↔ b2"),
        ("a2,b1", "a2 ↔ b1"),
        ("a2,b2", "a2 ↔ ¬b2"),
    ]
    .iter()
    .map(|(c, f)| Proposition::parse(scn, c, f, None))
    .collect()
}

fn cycle_scenario(labels: &[String]) -> Result<Scenario> {
    let n = labels.len();
    let cover: Vec<Vec<String>> = (0..n)
        .map(|i| vec![labels[i].clone(), labels[(i + 1) % n].clone()])
        .collect();
    Scenario::new(labels.to_vec(), cover, Outcomes::Ring(2))
}

/// The liar cycle of length `n` on `x1 … xn`: contexts are consecutive
/// pairs, supports solve `x_i = x_{i+1}` except the closing `x_n = ¬x_1`.
pub fn liar_cycle_model(n: usize) -> Result<EmpiricalModel> {
    match n {
        0 => return Err(Error::InvalidScenario("a liar cycle needs at least one variable".into())),
        1 => {
            return Err(Error::DegenerateModel {
                context: "{x1}".into(),
                reason: "x1 = ¬x1 has no solution".into(),
            })
        }
        2 => {
            return Err(Error::InvalidScenario(
                "a liar cycle of length 2 places x1 = x2 and x2 = ¬x1 on the same context {x1,x2}".into(),
            ))
        }
        _ => {}
    }
    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let scn = cycle_scenario(&labels)?;
    EmpiricalModel::from_predicate(scn, |ci, s| {
        let v = s.values();
        if ci == n - 1 {
            v[0] != v[1]
        } else {
            v[0] == v[1]
        }
    })
}

/// Three pairwise contexts on `x1, x2, x3`, each supporting exactly the
/// anticorrelated outcomes.
pub fn specker_triangle() -> EmpiricalModel {
    let labels: Vec<String> = (1..=3).map(|i| format!("x{i}")).collect();
    let scn = cycle_scenario(&labels).expect("static scenario");
    EmpiricalModel::from_predicate(scn, |_, s| s.values()[0] != s.values()[1]).expect("nonempty supports")
}

/// A relabelling of measurements and, per measurement, of outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Isomorphism {
    /// `measurements[m]` is the image of measurement `m`.
    pub measurements: Vec<usize>,
    /// `outcomes[m][o]` is the image of outcome `o` at measurement `m`.
    pub outcomes: Vec<Vec<usize>>,
}

impl Isomorphism {
    pub fn is_identity(&self) -> bool {
        self.measurements.iter().enumerate().all(|(i, &j)| i == j)
            && self
                .outcomes
                .iter()
                .all(|p| p.iter().enumerate().all(|(i, &j)| i == j))
    }

    /// Pairs `x∼y` of measurement labels, in source order.
    pub fn correspondence(&self, from: &Scenario, to: &Scenario) -> Vec<(String, String)> {
        self.measurements
            .iter()
            .enumerate()
            .map(|(i, &j)| (from.measurement(i).to_string(), to.measurement(j).to_string()))
            .collect()
    }

    fn map_section(&self, s: &Section) -> Section {
        let pairs = s
            .domain()
            .iter()
            .zip(s.values())
            .map(|(&m, &v)| (self.measurements[m], self.outcomes[m][v]))
            .collect();
        Section::from_pairs(pairs).expect("bijection keeps measurements distinct")
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![(0..k).collect::<Vec<_>>()];
    let mut current: Vec<usize> = (0..k).collect();
    // Heap's algorithm would scramble the order; walk lexicographic successors
    // so the identity comes first.
    loop {
        let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| current[j] > current[i - 1]).expect("exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

struct IsoSearch<'a> {
    m1: &'a EmpiricalModel,
    perms: Vec<Vec<usize>>,
    degree1: Vec<usize>,
    degree2: Vec<usize>,
    /// Contexts of `m1` completed once measurement `k` is assigned.
    completes: Vec<Vec<usize>>,
    targets: BTreeMap<Vec<usize>, usize>,
    supports2: Vec<BTreeSet<Section>>,
    limit: usize,
    found: Vec<Isomorphism>,
}

impl IsoSearch<'_> {
    fn run(&mut self, m: usize, current: &mut Isomorphism, used: &mut Vec<bool>) {
        if self.found.len() >= self.limit {
            return;
        }
        let n = self.degree1.len();
        if m == n {
            self.found.push(current.clone());
            return;
        }
        for t in 0..n {
            if used[t] || self.degree1[m] != self.degree2[t] {
                continue;
            }
            used[t] = true;
            current.measurements[m] = t;
            for p in 0..self.perms.len() {
                current.outcomes[m] = self.perms[p].clone();
                if self.consistent(m, current) {
                    self.run(m + 1, current, used);
                    if self.found.len() >= self.limit {
                        used[t] = false;
                        return;
                    }
                }
            }
            used[t] = false;
        }
    }

    fn consistent(&self, m: usize, iso: &Isomorphism) -> bool {
        self.completes[m].iter().all(|&ci| {
            let mut image: Vec<usize> = self.m1.scenario().context(ci).iter().map(|&x| iso.measurements[x]).collect();
            image.sort_unstable();
            let Some(&cj) = self.targets.get(&image) else {
                return false;
            };
            let src = self.m1.support(ci);
            src.len() == self.supports2[cj].len()
                && src.iter().all(|s| self.supports2[cj].contains(&iso.map_section(s)))
        })
    }
}

/// Up to `limit` isomorphisms from `m1` onto `m2`, in the order measurement
/// images then outcome permutations are tried lexicographically, so the
/// identity (when it is one) comes first.
pub fn find_isomorphisms(m1: &EmpiricalModel, m2: &EmpiricalModel, limit: usize) -> Vec<Isomorphism> {
    let (s1, s2) = (m1.scenario(), m2.scenario());
    let n = s1.measurement_count();
    if n != s2.measurement_count()
        || s1.outcome_count() != s2.outcome_count()
        || s1.cover().len() != s2.cover().len()
        || limit == 0
    {
        return Vec::new();
    }
    let degree = |scn: &Scenario| {
        let mut d = vec![0; scn.measurement_count()];
        for c in scn.cover() {
            for &m in c {
                d[m] += 1;
            }
        }
        d
    };
    let signature = |m: &EmpiricalModel| {
        let mut sig: Vec<(usize, usize)> = m
            .scenario()
            .cover()
            .iter()
            .enumerate()
            .map(|(ci, c)| (c.len(), m.support(ci).len()))
            .collect();
        sig.sort_unstable();
        sig
    };
    let (degree1, degree2) = (degree(s1), degree(s2));
    let mut sorted1 = degree1.clone();
    let mut sorted2 = degree2.clone();
    sorted1.sort_unstable();
    sorted2.sort_unstable();
    if sorted1 != sorted2 || signature(m1) != signature(m2) {
        return Vec::new();
    }
    let mut completes = vec![Vec::new(); n];
    for (ci, c) in s1.cover().iter().enumerate() {
        completes[*c.last().expect("contexts are nonempty")].push(ci);
    }
    let mut search = IsoSearch {
        m1,
        perms: permutations(s1.outcome_count()),
        degree1,
        degree2,
        completes,
        targets: s2.cover().iter().enumerate().map(|(i, c)| (c.clone(), i)).collect(),
        supports2: (0..s2.cover().len())
            .map(|ci| m2.support(ci).iter().cloned().collect())
            .collect(),
        limit,
        found: Vec::new(),
    };
    let mut current = Isomorphism {
        measurements: vec![0; n],
        outcomes: vec![Vec::new(); n],
    };
    let mut used = vec![false; n];
    search.run(0, &mut current, &mut used);
    search.found
}

/// The first isomorphism found, if the models are isomorphic.
pub fn model_isomorphic(m1: &EmpiricalModel, m2: &EmpiricalModel) -> Option<Isomorphism> {
    find_isomorphisms(m1, m2, 1).into_iter().next()
}
