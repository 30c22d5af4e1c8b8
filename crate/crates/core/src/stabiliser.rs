//! Pauli n-group arithmetic, AvN triples and the parity theories of
//! stabiliser subgroups.
//!
//! Eigenvalues are relabelled +1 ↦ 0 and −1 ↦ 1, so an element `±h` of a
//! stabiliser subgroup becomes the equation `Σ x_i = 0` (for `+h`) or `1`
//! (for `−h`) over ℤ₂, summed over the non-identity positions of `h`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::model::EmpiricalModel;
use crate::ring::RingSpec;
use crate::scenario::{Outcomes, Scenario};
use crate::theory::{model_of_theory, LinearEquation, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    /// `a·b = i^k · c`, returned as `(k, c)`.
    pub fn product(a: Letter, b: Letter) -> (u8, Letter) {
        use Letter::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (p, q) if p == q => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!("all pairs covered"),
        }
    }
}

/// `i^phase · P_1 ⊗ … ⊗ P_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    letters: Vec<Letter>,
    phase: u8,
}

impl PauliOperator {
    pub fn new(phase: u8, letters: Vec<Letter>) -> PauliOperator {
        PauliOperator {
            letters,
            phase: phase % 4,
        }
    }

    pub fn identity(n: usize) -> PauliOperator {
        PauliOperator::new(0, vec![Letter::I; n])
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn arity(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity_letters(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn letter_string(&self) -> String {
        self.letters.iter().map(|l| l.as_char()).collect()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Letter::I && b != Letter::I && a != b)
            .count();
        clashes % 2 == 0
    }

    /// Symplectic check vector `(x | z)`.
    pub fn check_vector(&self) -> Vec<u8> {
        let n = self.arity();
        let mut v = vec![0u8; 2 * n];
        for (i, l) in self.letters.iter().enumerate() {
            let (x, z) = match l {
                Letter::I => (0, 0),
                Letter::X => (1, 0),
                Letter::Y => (1, 1),
                Letter::Z => (0, 1),
            };
            v[i] = x;
            v[n + i] = z;
        }
        v
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letter_string())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// `XYY`, `-XYY`, `+iZI`, `-iX`.
    fn from_str(s: &str) -> Result<PauliOperator> {
        let t = s.trim();
        let (negative, rest) = match t.chars().next() {
            Some('-') => (true, &t[1..]),
            Some('+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (imaginary, rest) = match rest.strip_prefix('i') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        if rest.is_empty() {
            return Err(Error::Pauli(format!("{s:?} has no letters")));
        }
        let letters = rest
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::Pauli(format!("bad letter {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let phase = u8::from(imaginary) + if negative { 2 } else { 0 };
        Ok(PauliOperator::new(phase, letters))
    }
}

pub fn pauli_multiply(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    if p.arity() != q.arity() {
        return Err(Error::Pauli(format!(
            "arity mismatch: {} has {} sites, {} has {}",
            p,
            p.arity(),
            q,
            q.arity()
        )));
    }
    let mut phase = p.phase + q.phase;
    let letters = p
        .letters
        .iter()
        .zip(&q.letters)
        .map(|(&a, &b)| {
            let (k, c) = Letter::product(a, b);
            phase += k;
            c
        })
        .collect();
    Ok(PauliOperator::new(phase, letters))
}

/// Outcome of checking the AvN-triple conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleCheck {
    pub commuting: bool,
    /// Positions (0-based) where all three letters differ.
    pub a1_failures: Vec<usize>,
    /// Number of positions with `e_i = g_i ≠ f_i`, all non-identity.
    pub a2_count: usize,
    pub diagnostics: Vec<String>,
}

impl TripleCheck {
    pub fn holds(&self) -> bool {
        self.commuting && self.a1_failures.is_empty() && self.a2_count % 2 == 1
    }
}

pub fn is_avn_triple(e: &PauliOperator, f: &PauliOperator, g: &PauliOperator) -> Result<TripleCheck> {
    let n = e.arity();
    if f.arity() != n || g.arity() != n {
        return Err(Error::Pauli("triple members have different arities".into()));
    }
    if [e, f, g].iter().any(|p| p.phase() != 0) {
        return Err(Error::Pauli("triple members must have phase +1".into()));
    }
    let mut diagnostics = Vec::new();
    let pairs = [(e, f, "e,f"), (e, g, "e,g"), (f, g, "f,g")];
    let mut commuting = true;
    for (a, b, name) in pairs {
        if !a.commutes_with(b) {
            commuting = false;
            diagnostics.push(format!("commutation fails for {name} ({a} and {b} anticommute)"));
        }
    }
    let mut a1_failures = Vec::new();
    let mut a2_count = 0;
    for i in 0..n {
        let (x, y, z) = (e.letters[i], f.letters[i], g.letters[i]);
        if x != y && y != z && x != z {
            a1_failures.push(i);
            diagnostics.push(format!("A1 fails at position {}: letters {}{}{}", i + 1, x.as_char(), y.as_char(), z.as_char()));
        }
        if x == z && x != y && x != Letter::I && y != Letter::I {
            a2_count += 1;
        }
    }
    if a2_count % 2 == 0 {
        diagnostics.push(format!("A2 fails: {a2_count} positions with e_i = g_i != f_i (needs an odd count)"));
    }
    Ok(TripleCheck {
        commuting,
        a1_failures,
        a2_count,
        diagnostics,
    })
}

/// Closure of the generators under multiplication, sorted by letters then
/// phase.
pub fn generate_subgroup(gens: &[PauliOperator]) -> Result<Vec<PauliOperator>> {
    let n = gens
        .first()
        .map(PauliOperator::arity)
        .ok_or_else(|| Error::Pauli("no generators".into()))?;
    for (i, a) in gens.iter().enumerate() {
        if a.arity() != n {
            return Err(Error::Pauli("generators have different arities".into()));
        }
        for b in &gens[i + 1..] {
            if !a.commutes_with(b) {
                return Err(Error::Pauli(format!("generators {a} and {b} anticommute")));
            }
        }
    }
    let id = PauliOperator::identity(n);
    let mut seen = BTreeSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = pauli_multiply(&p, g)?;
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Measurement label for letter `l` at 0-based site `i`, e.g. `X1`.
pub fn site_label(l: Letter, i: usize) -> String {
    format!("{}{}", l.as_char(), i + 1)
}

/// The ℤ₂ parity theory induced by a stabiliser subgroup on `scn`.
///
/// Elements whose measurements are not all in the scenario, or not jointly
/// contained in some context, are skipped. An equation is emitted on every
/// cover context containing its variables.
pub fn theory_of_subgroup(group: &[PauliOperator], scn: &Scenario) -> Result<Theory> {
    let mut equations = Vec::new();
    for h in group {
        if h.phase % 2 == 1 {
            return Err(Error::Pauli(format!("{h} has an imaginary phase and stabilises no state")));
        }
        if h.is_identity_letters() {
            if h.phase == 2 {
                return Err(Error::Pauli("the subgroup contains -I".into()));
            }
            continue;
        }
        let labels: Vec<String> = h
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != Letter::I)
            .map(|(i, &l)| site_label(l, i))
            .collect();
        let Ok(vars) = scn.subset(&labels) else {
            continue;
        };
        let constant = BigInt::from(if h.phase == 2 { 1 } else { 0 });
        for (ci, ctx) in scn.cover().iter().enumerate() {
            if vars.iter().all(|v| ctx.binary_search(v).is_ok()) {
                let coefficients = ctx
                    .iter()
                    .map(|m| BigInt::from(u8::from(vars.binary_search(m).is_ok())))
                    .collect();
                equations.push(LinearEquation::new(scn, ci, coefficients, constant.clone())?);
            }
        }
    }
    Theory::new(RingSpec::Mod(2), scn.clone(), equations)
}

/// Scenario measuring, at each site, the letters used there by the
/// operators; contexts pick one letter per site.
pub fn scenario_for_operators(ops: &[PauliOperator]) -> Result<Scenario> {
    let n = ops
        .first()
        .map(PauliOperator::arity)
        .ok_or_else(|| Error::Pauli("no operators".into()))?;
    let mut per_site: Vec<Vec<Letter>> = Vec::with_capacity(n);
    for i in 0..n {
        let letters: BTreeSet<Letter> = ops
            .iter()
            .map(|p| p.letters.get(i).copied().unwrap_or(Letter::I))
            .filter(|&l| l != Letter::I)
            .collect();
        if !letters.is_empty() {
            per_site.push(letters.into_iter().collect());
        }
    }
    if per_site.is_empty() {
        return Err(Error::Pauli("operators act trivially on every site".into()));
    }
    let sites: Vec<usize> = (0..n)
        .filter(|&i| ops.iter().any(|p| p.letters[i] != Letter::I))
        .collect();
    let mut measurements = Vec::new();
    for (&site, letters) in sites.iter().zip(&per_site) {
        for &l in letters {
            measurements.push(site_label(l, site));
        }
    }
    let mut cover: Vec<Vec<String>> = vec![Vec::new()];
    for (&site, letters) in sites.iter().zip(&per_site) {
        cover = cover
            .into_iter()
            .flat_map(|prefix| {
                letters.iter().map(move |&l| {
                    let mut c = prefix.clone();
                    c.push(site_label(l, site));
                    c
                })
            })
            .collect();
    }
    Scenario::new(measurements, cover, Outcomes::Ring(2))
}

/// The model `𝕄(𝕋(⟨e, f, g⟩))` on the triple's scenario.
pub fn model_of_generators(gens: &[PauliOperator]) -> Result<EmpiricalModel> {
    let group = generate_subgroup(gens)?;
    let scn = scenario_for_operators(gens)?;
    let theory = theory_of_subgroup(&group, &scn)?;
    model_of_theory(&theory)
}

pub fn ghz_triple() -> [PauliOperator; 3] {
    ["XYY", "YXY", "YYX"].map(|s| s.parse().expect("static operator"))
}

/// The three-party GHZ model on X/Y measurements.
pub fn ghz_model(n: usize) -> Result<EmpiricalModel> {
    if n != 3 {
        return Err(Error::Pauli(format!(
            "only the three-party instance is built in; got {n} parties"
        )));
    }
    model_of_generators(&ghz_triple())
}

/// Rank over GF(2) of the generators' check vectors.
pub fn check_rank(gens: &[PauliOperator]) -> usize {
    let mut rows: Vec<Vec<u8>> = gens.iter().map(PauliOperator::check_vector).collect();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] == 1 {
                let pivot = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}
