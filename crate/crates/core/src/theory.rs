//! Linear equations fibred over contexts, the theory of a model, the models
//! of a theory, All-vs-Nothing decisions and affine closures.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::EmpiricalModel;
use crate::ring::{howell, Howell, Matrix, Prepared, RingSpec};
use crate::scenario::{enumerate_assignments, is_subset, Outcomes, Scenario, Section};

/// `Σ_{m ∈ C} a(m)·x_m = b` over the theory's ring, attached to a context
/// of the cover. Coefficients follow the context's measurement order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearEquation {
    pub context: usize,
    pub coefficients: Vec<BigInt>,
    pub constant: BigInt,
}

impl LinearEquation {
    pub fn new(
        scn: &Scenario,
        context: usize,
        coefficients: Vec<BigInt>,
        constant: BigInt,
    ) -> Result<LinearEquation> {
        let ctx = scn
            .cover()
            .get(context)
            .ok_or_else(|| Error::Domain(format!("no context #{context}")))?;
        if ctx.len() != coefficients.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for context {}",
                coefficients.len(),
                scn.format_context(ctx)
            )));
        }
        Ok(LinearEquation {
            context,
            coefficients,
            constant,
        })
    }

    fn reduced(&self, ring: RingSpec) -> LinearEquation {
        LinearEquation {
            context: self.context,
            coefficients: self.coefficients.iter().map(|x| ring.reduce(x)).collect(),
            constant: ring.reduce(&self.constant),
        }
    }

    /// `0 = 0`.
    pub fn is_trivial(&self) -> bool {
        self.constant.is_zero() && self.coefficients.iter().all(Zero::is_zero)
    }

    /// Measurements with a nonzero coefficient.
    pub fn variables(&self, scn: &Scenario) -> Vec<usize> {
        scn.context(self.context)
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, a)| !a.is_zero())
            .map(|(&m, _)| m)
            .collect()
    }

    pub fn display(&self, scn: &Scenario, ring: RingSpec) -> String {
        let terms: Vec<String> = scn
            .context(self.context)
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, a)| !a.is_zero())
            .map(|(&m, a)| {
                if a == &BigInt::from(1) {
                    scn.measurement(m).to_owned()
                } else {
                    format!("{a}{}", scn.measurement(m))
                }
            })
            .collect();
        let lhs = if terms.is_empty() {
            "0".to_owned()
        } else {
            terms.join(" + ")
        };
        format!("{lhs} = {} in {ring}", self.constant)
    }
}

/// Value of an outcome as an element of `ring`.
pub fn outcome_value(scn: &Scenario, outcome: usize, ring: RingSpec) -> Result<BigInt> {
    let outcomes = scn.outcomes();
    let v = outcomes.numeric(outcome).ok_or_else(|| Error::Coercion {
        outcome: outcomes.label(outcome),
        ring: ring.to_string(),
    })?;
    match ring {
        RingSpec::Mod(n) if v >= n => Err(Error::Coercion {
            outcome: outcomes.label(outcome),
            ring: ring.to_string(),
        }),
        _ => Ok(BigInt::from(v)),
    }
}

/// `s ⊨ φ`: evaluates `Σ a(m)·s(m)` on `s` restricted to the equation's
/// context.
pub fn satisfies(scn: &Scenario, ring: RingSpec, s: &Section, phi: &LinearEquation) -> Result<bool> {
    let mut total = BigInt::zero();
    for (&m, a) in scn.context(phi.context).iter().zip(&phi.coefficients) {
        if a.is_zero() {
            continue;
        }
        let v = s.value_of(m).ok_or_else(|| {
            Error::Domain(format!(
                "section does not assign {} required by the equation",
                scn.measurement(m)
            ))
        })?;
        total += a * outcome_value(scn, v, ring)?;
    }
    Ok(ring.reduce(&total) == ring.reduce(&phi.constant))
}

/// A finite set of equations over one ring, in canonical form: entries
/// reduced, trivial equations dropped, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    ring: RingSpec,
    scenario: Scenario,
    equations: Vec<LinearEquation>,
}

impl Theory {
    pub fn new(ring: RingSpec, scenario: Scenario, equations: Vec<LinearEquation>) -> Result<Theory> {
        for e in &equations {
            LinearEquation::new(&scenario, e.context, e.coefficients.clone(), e.constant.clone())?;
        }
        let mut equations: Vec<LinearEquation> = equations
            .iter()
            .map(|e| e.reduced(ring))
            .filter(|e| !e.is_trivial())
            .collect();
        equations.sort();
        equations.dedup();
        Ok(Theory {
            ring,
            scenario,
            equations,
        })
    }

    pub fn empty(ring: RingSpec, scenario: Scenario) -> Theory {
        Theory {
            ring,
            scenario,
            equations: Vec::new(),
        }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn equations(&self) -> &[LinearEquation] {
        &self.equations
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    /// Every equation holds on every supported section of `model`.
    pub fn holds_on(&self, model: &EmpiricalModel) -> Result<bool> {
        for e in &self.equations {
            for s in model.support(e.context) {
                if !satisfies(model.scenario(), self.ring, s, e)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The global system `A·x = b`, one column per measurement.
    pub fn global_system(&self) -> (Matrix, Vec<BigInt>) {
        let n = self.scenario.measurement_count();
        let mut rows = Vec::with_capacity(self.equations.len());
        let mut rhs = Vec::with_capacity(self.equations.len());
        for e in &self.equations {
            let mut row = vec![BigInt::zero(); n];
            for (&m, a) in self.scenario.context(e.context).iter().zip(&e.coefficients) {
                row[m] += a;
            }
            rows.push(row);
            rhs.push(e.constant.clone());
        }
        (Matrix::from_rows_with_width(&rows, n), rhs)
    }

    pub fn display_lines(&self) -> Vec<String> {
        self.equations
            .iter()
            .map(|e| e.display(&self.scenario, self.ring))
            .collect()
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.display_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn finite_modulus(ring: RingSpec, what: &str) -> Result<u64> {
    ring.modulus().ok_or_else(|| {
        Error::UnsupportedRing(format!("{what} needs a finite ring, got {ring}"))
    })
}

/// The model with its outcomes read in `ring`.
pub fn model_in_ring(model: &EmpiricalModel, ring: RingSpec) -> Result<EmpiricalModel> {
    model.in_ring(finite_modulus(ring, "reading outcomes as ring elements")?)
}

fn values_as_bigint(s: &Section) -> Vec<BigInt> {
    s.values().iter().map(|&v| BigInt::from(v)).collect()
}

/// Generators of the equations satisfied by every section of `S(C)`.
///
/// Unknowns are `(a, b)`; each supported section `s` contributes the row
/// `[s, -1]`, and the generators span the solution module.
pub fn theory_of_model(model: &EmpiricalModel, ring: RingSpec) -> Result<Theory> {
    let model = model_in_ring(model, ring)?;
    let scn = model.scenario();
    let mut equations = Vec::new();
    for (ci, ctx) in scn.cover().iter().enumerate() {
        let rows: Vec<Vec<BigInt>> = model
            .support(ci)
            .iter()
            .map(|s| {
                let mut row = values_as_bigint(s);
                row.push(BigInt::from(-1));
                row
            })
            .collect();
        let a = Matrix::from_rows_with_width(&rows, ctx.len() + 1);
        for g in Prepared::new(ring, &a).kernel() {
            let (coefficients, constant) = g.split_at(ctx.len());
            equations.push(LinearEquation {
                context: ci,
                coefficients: coefficients.to_vec(),
                constant: constant[0].clone(),
            });
        }
    }
    Theory::new(ring, scn.clone(), equations)
}

/// Sections over `subset` satisfying every equation whose variables lie in
/// `subset`.
pub fn solutions(theory: &Theory, subset: &[usize]) -> Result<Vec<Section>> {
    let n = finite_modulus(theory.ring, "enumerating solutions")?;
    let scn = &theory.scenario;
    let mut domain = subset.to_vec();
    domain.sort_unstable();
    domain.dedup();
    let relevant: Vec<&LinearEquation> = theory
        .equations
        .iter()
        .filter(|e| is_subset(&e.variables(scn), &domain))
        .collect();
    let mut out = Vec::new();
    for s in enumerate_assignments(&domain, n as usize) {
        let mut ok = true;
        for e in &relevant {
            if !satisfies(scn, theory.ring, &s, e)? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(s);
        }
    }
    Ok(out)
}

/// `𝕄(Γ)`: each context's support is the set of its solutions.
pub fn model_of_theory(theory: &Theory) -> Result<EmpiricalModel> {
    let scn = &theory.scenario;
    let mut supports = Vec::with_capacity(scn.cover().len());
    for ctx in scn.cover() {
        let sols = solutions(theory, ctx)?;
        if sols.is_empty() {
            return Err(Error::DegenerateModel {
                context: scn.format_context(ctx),
                reason: "the theory has no solution on this context".into(),
            });
        }
        supports.push(sols);
    }
    EmpiricalModel::new(scn.clone(), supports)
}

/// Evidence for an All-vs-Nothing verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AvnCertificate {
    /// A global assignment satisfying the theory (values are residues).
    Consistent(Section),
    /// Howell-style form of the augmented matrix `[A | b]`.
    Inconsistent(Howell),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvnReport {
    pub ring: RingSpec,
    pub avn: bool,
    pub theory: Theory,
    pub certificate: AvnCertificate,
}

fn decide(theory: Theory, extra_rows: Vec<(Vec<BigInt>, BigInt)>) -> AvnReport {
    let ring = theory.ring;
    let n = theory.scenario.measurement_count();
    let (a, b) = theory.global_system();
    let mut rows = a.to_rows();
    let mut rhs = b;
    for (row, v) in extra_rows {
        rows.push(row);
        rhs.push(v);
    }
    let a = Matrix::from_rows_with_width(&rows, n);
    let prepared = Prepared::new(ring, &a);
    match prepared.solve(&rhs) {
        Some(x) => {
            let values = x
                .iter()
                .map(|v| ring.reduce(v).to_usize().expect("residue fits"))
                .collect();
            let g = Section::new((0..n).collect(), values).expect("sorted domain");
            AvnReport {
                ring,
                avn: false,
                theory,
                certificate: AvnCertificate::Consistent(g),
            }
        }
        None => {
            let augmented = a.hcat(&Matrix::from_rows_with_width(
                &rhs.iter().map(|v| vec![v.clone()]).collect::<Vec<_>>(),
                1,
            ));
            let modulus = ring.modulus().expect("theories are over finite rings");
            AvnReport {
                ring,
                avn: true,
                theory,
                certificate: AvnCertificate::Inconsistent(howell(&augmented, modulus)),
            }
        }
    }
}

/// Decides a given theory: `avn` holds when it has no global solution.
pub fn decide_theory(theory: &Theory) -> Result<AvnReport> {
    finite_modulus(theory.ring, "deciding a theory")?;
    Ok(decide(theory.clone(), Vec::new()))
}

/// `AvN_R`: the theory of the model has no global solution.
pub fn is_avn(model: &EmpiricalModel, ring: RingSpec) -> Result<AvnReport> {
    let theory = theory_of_model(model, ring)?;
    Ok(decide(theory, Vec::new()))
}

/// `AvN_R(e, s0)`: no global solution of the theory extends `s0`.
pub fn is_avn_at(model: &EmpiricalModel, s0: &Section, ring: RingSpec) -> Result<AvnReport> {
    if model.locate(s0).is_none() {
        return Err(Error::Precondition(format!(
            "{} is not a supported section of any context",
            model.scenario().format_section(s0)
        )));
    }
    let theory = theory_of_model(model, ring)?;
    let n = model.scenario().measurement_count();
    let mut extra = Vec::new();
    for (&m, &v) in s0.domain().iter().zip(s0.values()) {
        let mut row = vec![BigInt::zero(); n];
        row[m] = BigInt::from(1);
        extra.push((row, outcome_value(model.scenario(), v, ring)?));
    }
    Ok(decide(theory, extra))
}

/// `s0 + span{s - s0}` over `ℤ_n`, by breadth-first additive closure.
pub fn affine_closure(points: &[Vec<usize>], modulus: u64) -> BTreeSet<Vec<usize>> {
    let Some(base) = points.first() else {
        return BTreeSet::new();
    };
    let n = modulus as usize;
    let gens: Vec<Vec<usize>> = points
        .iter()
        .map(|p| p.iter().zip(base).map(|(&x, &y)| (x + n - y) % n).collect())
        .filter(|d: &Vec<usize>| d.iter().any(|&x| x != 0))
        .collect();
    let zero = vec![0usize; base.len()];
    let mut span = BTreeSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(v) = queue.pop_front() {
        for g in &gens {
            let w: Vec<usize> = v.iter().zip(g).map(|(&x, &y)| (x + y) % n).collect();
            if span.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    span.into_iter()
        .map(|v| v.iter().zip(base).map(|(&x, &y)| (x + y) % n).collect())
        .collect()
}

/// `Aff S`: every context's support replaced by its affine closure.
pub fn affine_closure_model(model: &EmpiricalModel, ring: RingSpec) -> Result<EmpiricalModel> {
    let n = finite_modulus(ring, "affine closure")?;
    let model = model.in_ring(n)?;
    let scn = model.scenario();
    let supports = scn
        .cover()
        .iter()
        .enumerate()
        .map(|(ci, ctx)| {
            let points: Vec<Vec<usize>> = model.support(ci).iter().map(|s| s.values().to_vec()).collect();
            affine_closure(&points, n)
                .into_iter()
                .map(|v| Section::new(ctx.clone(), v).expect("context domain"))
                .collect()
        })
        .collect();
    EmpiricalModel::new(scn.clone(), supports)
}

/// Scenario over `ℤ_n` with the same measurements and cover.
pub fn ring_scenario(scn: &Scenario, n: u64) -> Scenario {
    scn.with_outcomes(Outcomes::Ring(n))
}
