//! Čech cochains of the presheaf of formal linear combinations of supported
//! sections, coboundary matrices and the cohomological obstruction.
//!
//! Component bases: a q-simplex σ carries the supported sections over |σ|,
//! i.e. the restriction image of its first context's support, in
//! lexicographic order. Restriction pushes weights forward.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::EmpiricalModel;
use crate::ring::{Matrix, Prepared, RingHom, RingMatrix, RingSpec};
use crate::scenario::{build_nerve, intersect, require_connected, Nerve, Section};

/// Ordered basis of `C^q`: one block per q-simplex.
#[derive(Debug, Clone)]
pub struct CochainBasis {
    /// Context tuples of the simplices, in nerve order.
    pub simplices: Vec<Vec<usize>>,
    pub blocks: Vec<Vec<Section>>,
    pub offsets: Vec<usize>,
    pub dimension: usize,
}

impl CochainBasis {
    fn new(model: &EmpiricalModel, nerve: &Nerve, q: usize) -> CochainBasis {
        let mut simplices = Vec::new();
        let mut blocks = Vec::new();
        let mut offsets = Vec::new();
        let mut dimension = 0;
        for s in nerve.simplices(q) {
            let block: Vec<Section> = model
                .image(s.contexts()[0], s.intersection())
                .into_iter()
                .collect();
            offsets.push(dimension);
            dimension += block.len();
            simplices.push(s.contexts().to_vec());
            blocks.push(block);
        }
        CochainBasis {
            simplices,
            blocks,
            offsets,
            dimension,
        }
    }

    /// Column/row index of `section` inside the block of simplex `k`.
    pub fn index(&self, k: usize, section: &Section) -> Option<usize> {
        self.blocks[k]
            .binary_search(section)
            .ok()
            .map(|i| self.offsets[k] + i)
    }
}

fn require_flasque(model: &EmpiricalModel) -> Result<()> {
    model.require_no_signalling()
}

/// The coboundary `δ^q : C^q → C^{q+1}` as an integer matrix, together with
/// the bases of its domain and codomain.
pub fn coboundary(model: &EmpiricalModel, q: usize) -> Result<(Matrix, CochainBasis, CochainBasis)> {
    require_flasque(model)?;
    let nerve = build_nerve(model.scenario(), q + 1);
    let domain = CochainBasis::new(model, &nerve, q);
    let codomain = CochainBasis::new(model, &nerve, q + 1);
    let mut m = Matrix::zeros(codomain.dimension, domain.dimension);
    for (k, tau) in nerve.simplices(q + 1).iter().enumerate() {
        for j in 0..tau.contexts().len() {
            let face = tau.face(j);
            let fk = nerve.position(q, &face).expect("faces of nerve simplices are simplices");
            let sign = if j % 2 == 0 { 1 } else { -1 };
            for s in &domain.blocks[fk] {
                let t = s.project(tau.intersection());
                let row = codomain.index(k, &t).expect("restriction of a supported section");
                let col = domain.index(fk, s).expect("basis element");
                let cur = m.get(row, col) + BigInt::from(sign);
                m.set(row, col, cur);
            }
        }
    }
    Ok((m, domain, codomain))
}

/// Matrix of `δ^q` with entries in `ring`.
pub fn coboundary_matrix(model: &EmpiricalModel, q: usize, ring: RingSpec) -> Result<RingMatrix> {
    let (m, _, _) = coboundary(model, q)?;
    Ok(RingMatrix::new(ring, m))
}

/// Linear data for the compatible-family problem with one context pinned.
struct PinnedSystem {
    prepared: Prepared,
    /// Column of δ⁰ for each section of the pinned context.
    pinned_columns: Vec<Vec<BigInt>>,
}

fn pinned_system(delta: &Matrix, basis: &CochainBasis, context: usize, ring: RingSpec) -> PinnedSystem {
    let block = basis.offsets[context]..basis.offsets[context] + basis.blocks[context].len();
    let kept: Vec<usize> = (0..basis.dimension).filter(|c| !block.contains(c)).collect();
    let delta_t = delta.transpose();
    let reduced = Matrix::from_rows_with_width(
        &kept.iter().map(|&c| delta_t.row_vec(c)).collect::<Vec<_>>(),
        delta.rows(),
    )
    .transpose();
    PinnedSystem {
        prepared: Prepared::new(ring, &reduced),
        pinned_columns: block.map(|c| delta_t.row_vec(c)).collect(),
    }
}

impl PinnedSystem {
    fn vanishes(&self, k: usize) -> bool {
        let rhs: Vec<BigInt> = self.pinned_columns[k].iter().map(|x| -x).collect();
        self.prepared.solve(&rhs).is_some()
    }
}

fn locate_in(model: &EmpiricalModel, context: usize, s0: &Section) -> Result<usize> {
    model.support(context).binary_search(s0).map_err(|_| {
        Error::Precondition(format!(
            "{} is not in the support of {}",
            model.scenario().format_section(s0),
            model.scenario().format_context(model.scenario().context(context))
        ))
    })
}

/// Whether `γ(s0)` vanishes over `ring`: some family `r_C ∈ F_R S(C)` with
/// `r_{C0} = 1·s0` agrees on every overlap.
pub fn obstruction_vanishes(
    model: &EmpiricalModel,
    context: usize,
    s0: &Section,
    ring: RingSpec,
) -> Result<bool> {
    require_connected(model.scenario())?;
    let k = locate_in(model, context, s0)?;
    let (delta, basis, _) = coboundary(model, 0)?;
    Ok(pinned_system(&delta, &basis, context, ring).vanishes(k))
}

/// Computes `γ(s0)` through the connecting homomorphism and decides whether
/// it is a coboundary of the relative complex. Independent of
/// [`obstruction_vanishes`] apart from the coboundary matrix.
pub fn connecting_hom_check(
    model: &EmpiricalModel,
    context: usize,
    s0: &Section,
    ring: RingSpec,
) -> Result<bool> {
    require_connected(model.scenario())?;
    locate_in(model, context, s0)?;
    let scn = model.scenario();
    let (delta, basis, codomain) = coboundary(model, 0)?;
    let c0 = scn.context(context);

    // Lift: each context takes its first section agreeing with s0 on the
    // overlap with C0.
    let mut lift = vec![BigInt::zero(); basis.dimension];
    for (ci, ctx) in scn.cover().iter().enumerate() {
        let overlap = intersect(ctx, c0);
        let target = s0.project(&overlap);
        let t = model
            .support(ci)
            .iter()
            .find(|t| t.project(&overlap) == target)
            .ok_or_else(|| Error::Precondition("model is not flasque beneath the cover".into()))?;
        lift[basis.index(ci, t).expect("supported")] = BigInt::from(1);
    }
    let v: Vec<BigInt> = delta.mul_vec(&lift).iter().map(|x| ring.reduce(x)).collect();

    // Relative presheaf: kernel of the pushforward to U ∩ C0.
    let pushforward_rows = |blocks: &CochainBasis, simplex_inter: &dyn Fn(usize) -> Vec<usize>| {
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for k in 0..blocks.simplices.len() {
            let into = intersect(&simplex_inter(k), c0);
            let mut targets: Vec<Section> = blocks.blocks[k].iter().map(|s| s.project(&into)).collect();
            targets.sort();
            targets.dedup();
            for t in &targets {
                let mut row = vec![BigInt::zero(); blocks.dimension];
                for (i, s) in blocks.blocks[k].iter().enumerate() {
                    if &s.project(&into) == t {
                        row[blocks.offsets[k] + i] = BigInt::from(1);
                    }
                }
                rows.push(row);
            }
        }
        rows
    };

    let nerve = build_nerve(scn, 1);
    let inter1 = |k: usize| nerve.simplices(1)[k].intersection().to_vec();
    let p1 = pushforward_rows(&codomain, &inter1);
    for row in &p1 {
        let image: BigInt = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        if !ring.reduce(&image).is_zero() {
            return Err(Error::SelfCheck(
                "lifted obstruction is not a relative cocycle".into(),
            ));
        }
    }

    let inter0 = |k: usize| scn.context(k).to_vec();
    let p0 = pushforward_rows(&basis, &inter0);
    let mut rows = delta.to_rows();
    let mut rhs = v;
    for row in p0 {
        rows.push(row);
        rhs.push(BigInt::zero());
    }
    let a = Matrix::from_rows_with_width(&rows, basis.dimension);
    Ok(Prepared::new(ring, &a).solve(&rhs).is_some())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionObstruction {
    pub context: usize,
    pub section: Section,
    pub vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionReport {
    pub ring: RingSpec,
    pub sections: Vec<SectionObstruction>,
    /// Some obstruction is nonzero.
    pub clc: bool,
    /// Every obstruction is nonzero.
    pub csc: bool,
    /// Shape of δ⁰ (equations × unknowns) before pinning.
    pub system_rows: usize,
    pub system_cols: usize,
}

impl ObstructionReport {
    pub fn vanishes_at(&self, context: usize, section: &Section) -> Option<bool> {
        self.sections
            .iter()
            .find(|v| v.context == context && &v.section == section)
            .map(|v| v.vanishes)
    }
}

/// Decides the obstruction for every supported section, one factorisation
/// per context, contexts in parallel.
pub fn classify_cohomological(model: &EmpiricalModel, ring: RingSpec) -> Result<ObstructionReport> {
    require_connected(model.scenario())?;
    let (delta, basis, _) = coboundary(model, 0)?;
    let per_context: Vec<Vec<SectionObstruction>> = (0..basis.simplices.len())
        .into_par_iter()
        .map(|ci| {
            let system = pinned_system(&delta, &basis, ci, ring);
            model
                .support(ci)
                .iter()
                .enumerate()
                .map(|(k, s)| SectionObstruction {
                    context: ci,
                    section: s.clone(),
                    vanishes: system.vanishes(k),
                })
                .collect()
        })
        .collect();
    let sections: Vec<SectionObstruction> = per_context.into_iter().flatten().collect();
    let clc = sections.iter().any(|v| !v.vanishes);
    let csc = sections.iter().all(|v| !v.vanishes);
    Ok(ObstructionReport {
        ring,
        sections,
        clc,
        csc,
        system_rows: delta.rows(),
        system_cols: delta.cols(),
    })
}

/// A section whose obstruction vanishes over the source ring of `h` but
/// not over its target; `None` when the monotonicity holds everywhere.
pub fn monotone_under_hom(model: &EmpiricalModel, h: RingHom) -> Result<Option<(usize, Section)>> {
    if let RingHom::Identity(_) = h {
        return Ok(None);
    }
    let src = classify_cohomological(model, h.source())?;
    let dst = classify_cohomological(model, h.target())?;
    Ok(src
        .sections
        .iter()
        .zip(&dst.sections)
        .find(|(a, b)| a.vanishes && !b.vanishes)
        .map(|(a, _)| (a.context, a.section.clone())))
}
