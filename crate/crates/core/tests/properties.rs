mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use contextuality::cohomology::{
    classify_cohomological, coboundary, connecting_hom_check, monotone_under_hom, obstruction_vanishes,
};
use contextuality::document::ModelDocument;
use contextuality::paradox::{find_isomorphisms, liar_cycle_model, logical_bell_bound, Proposition};
use contextuality::ring::{hermite, smith, Matrix};
use contextuality::search::{GlobalSearch, SearchStatus, Strategy as Engine};
use contextuality::stabiliser::{is_avn_triple, model_of_generators, pauli_multiply, Letter, PauliOperator};
use contextuality::theory::{affine_closure_model, is_avn, model_of_theory, theory_of_model};
use contextuality::{
    build_nerve, classify_contextuality, corpus, solve_linear_system, EmpiricalModel, LinearSystem, Outcomes,
    RingHom, RingMatrix, RingSpec, Scenario, Section, Solution,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn small_matrix(max_rows: usize, max_cols: usize, bound: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(-bound..=bound, c), r)
    })
}

fn modular_system() -> impl Strategy<Value = (u64, Vec<Vec<u64>>, Vec<u64>)> {
    prop::sample::select(vec![2u64, 3, 4, 5, 6, 8, 9, 10, 12]).prop_flat_map(|n| {
        let max_cols = ((14.0 / (n as f64).log2()).floor() as usize).clamp(1, 6);
        (1..=4usize, 1..=max_cols).prop_flat_map(move |(r, c)| {
            (
                Just(n),
                prop::collection::vec(prop::collection::vec(0..n, c), r),
                prop::collection::vec(0..n, r),
            )
        })
    })
}

fn to_big(v: &[u64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn residues(ring: RingSpec, v: &[BigInt]) -> Vec<u64> {
    v.iter().map(|x| u64::try_from(ring.reduce(x)).unwrap()).collect()
}

fn apply_mod(a: &[Vec<u64>], x: &[u64], n: u64) -> Vec<u64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum::<u64>() % n)
        .collect()
}

fn all_vectors(cols: usize, n: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..cols {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..n).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn span_mod(gens: &[Vec<u64>], cols: usize, n: u64) -> BTreeSet<Vec<u64>> {
    let mut seen = BTreeSet::from([vec![0u64; cols]]);
    let mut frontier = vec![vec![0u64; cols]];
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % n).collect();
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn modular_solver_matches_enumeration((n, a, b) in modular_system()) {
        let ring = RingSpec::Mod(n);
        let cols = a[0].len();
        let sys = LinearSystem::new(RingMatrix::from_rows(ring, &a), to_big(&b)).unwrap();
        let candidates = all_vectors(cols, n);
        let solvable = candidates.iter().any(|x| apply_mod(&a, x, n) == b);
        let homogeneous: BTreeSet<Vec<u64>> =
            candidates.into_iter().filter(|x| apply_mod(&a, x, n).iter().all(|&v| v == 0)).collect();
        match solve_linear_system(&sys) {
            Solution::Unsolvable => prop_assert!(!solvable),
            Solution::Solvable { particular, kernel } => {
                prop_assert!(solvable);
                prop_assert_eq!(apply_mod(&a, &residues(ring, &particular), n), b);
                let gens: Vec<Vec<u64>> = kernel.iter().map(|k| residues(ring, k)).collect();
                prop_assert_eq!(span_mod(&gens, cols, n), homogeneous);
            }
        }
    }

    #[test]
    fn integer_solutions_are_solutions(a in small_matrix(4, 5, 6), seed in prop::collection::vec(-3i64..=3, 5)) {
        // Right-hand sides in the image are always solvable.
        let cols = a[0].len();
        let x: Vec<i64> = seed[..cols].to_vec();
        let b: Vec<BigInt> = a.iter().map(|row| BigInt::from(row.iter().zip(&x).map(|(p, q)| p * q).sum::<i64>())).collect();
        let m = Matrix::from_rows(&a);
        let sys = LinearSystem::new(RingMatrix::new(RingSpec::Integers, m.clone()), b.clone()).unwrap();
        match solve_linear_system(&sys) {
            Solution::Unsolvable => prop_assert!(false, "image vector reported unsolvable"),
            Solution::Solvable { particular, kernel } => {
                prop_assert_eq!(m.mul_vec(&particular), b);
                for k in &kernel {
                    prop_assert!(m.mul_vec(k).iter().all(Zero::is_zero));
                }
            }
        }
    }

    #[test]
    fn doubled_rhs_parity(a in small_matrix(3, 3, 4)) {
        // An all-even matrix never reaches e_1 over the integers, but does mod 3
        // whenever the odd matrix does.
        let even: Vec<Vec<i64>> = a.iter().map(|r| r.iter().map(|v| 2 * v).collect()).collect();
        let mut b = vec![BigInt::zero(); even.len()];
        b[0] = BigInt::one();
        let sys = LinearSystem::new(RingMatrix::from_rows(RingSpec::Integers, &even), b.clone()).unwrap();
        prop_assert!(!solve_linear_system(&sys).is_solvable());
        let z3 = |m: &Vec<Vec<i64>>| {
            let sys = LinearSystem::new(RingMatrix::from_rows(RingSpec::Mod(3), m), b.clone()).unwrap();
            solve_linear_system(&sys).is_solvable()
        };
        prop_assert_eq!(z3(&even), z3(&a));
    }

    #[test]
    fn hermite_form(a in small_matrix(4, 5, 9)) {
        let m = Matrix::from_rows(&a);
        let h = hermite(&m);
        prop_assert_eq!(h.u.mul(&m), h.h.clone());
        if let Some(inv) = &h.u_inv {
            prop_assert_eq!(h.u.mul(inv), Matrix::identity(m.rows()));
        }
        let mut last = None;
        for (r, &p) in h.pivots.iter().enumerate() {
            prop_assert!(last.is_none_or(|l| p > l));
            last = Some(p);
            let pivot = h.h.get(r, p).clone();
            prop_assert!(pivot.is_positive());
            for c in 0..p {
                prop_assert!(h.h.get(r, c).is_zero());
            }
            for above in 0..r {
                let e = h.h.get(above, p);
                prop_assert!(!e.is_negative() && e < &pivot);
            }
        }
        for r in h.rank()..m.rows() {
            prop_assert!(h.h.row(r).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn smith_form(a in small_matrix(4, 4, 9)) {
        let m = Matrix::from_rows(&a);
        let s = smith(&m);
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        prop_assert_eq!(s.u.mul(&s.u_inv), Matrix::identity(m.rows()));
        prop_assert_eq!(s.v.mul(&s.v_inv), Matrix::identity(m.cols()));
        for r in 0..s.d.rows() {
            for c in 0..s.d.cols() {
                if r != c {
                    prop_assert!(s.d.get(r, c).is_zero());
                }
            }
        }
        let f = s.invariant_factors();
        for w in f.windows(2) {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
        prop_assert!(f.iter().all(Signed::is_positive));
    }

    #[test]
    fn coboundaries_compose_to_zero(seed in any::<u64>()) {
        let m = common::model_from_seed(seed);
        let top = build_nerve(m.scenario(), usize::MAX).dimension();
        for q in 0..top.max(1) {
            let (d0, _, mid) = coboundary(&m, q).unwrap();
            let (d1, dom, _) = coboundary(&m, q + 1).unwrap();
            prop_assert_eq!(mid.dimension, dom.dimension);
            prop_assert!(d1.mul(&d0).is_zero());
        }
    }
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn obstruction_computations_agree(seed in any::<u64>()) {
        let m = common::model_from_seed(seed);
        let mut rings = vec![RingSpec::Integers];
        rings.extend(common::finite_rings_for(&m));
        for ring in rings {
            for (ci, s) in m.supported_sections() {
                prop_assert_eq!(
                    obstruction_vanishes(&m, ci, s, ring).unwrap(),
                    connecting_hom_check(&m, ci, s, ring).unwrap()
                );
            }
        }
    }

    #[test]
    fn obstruction_monotone_from_integers(seed in any::<u64>()) {
        let m = common::model_from_seed(seed);
        for ring in common::finite_rings_for(&m) {
            let h = RingHom::new(RingSpec::Integers, ring).unwrap();
            prop_assert_eq!(monotone_under_hom(&m, h).unwrap(), None);
        }
    }

    #[test]
    fn affine_closure_is_a_closure(seed in any::<u64>()) {
        let m = common::model_from_seed(seed);
        for ring in common::finite_rings_for(&m) {
            let base = m.in_ring(ring.modulus().unwrap()).unwrap();
            let aff = affine_closure_model(&m, ring).unwrap();
            for (ci, s) in base.supported_sections() {
                prop_assert!(aff.contains(ci, s));
            }
            prop_assert_eq!(&affine_closure_model(&aff, ring).unwrap(), &aff);
            // Theories cannot tell a model from its closure, and the closure is
            // exactly what the theory carves out.
            let t = theory_of_model(&m, ring).unwrap();
            prop_assert!(t.holds_on(&aff).unwrap());
            prop_assert!(theory_of_model(&aff, ring).unwrap().holds_on(&base).unwrap());
            prop_assert_eq!(&model_of_theory(&t).unwrap(), &aff);
        }
    }

    #[test]
    fn restriction_is_functorial(seed in any::<u64>(), picks in prop::collection::vec(any::<bool>(), 8)) {
        let m = common::model_from_seed(seed);
        for (_, s) in m.supported_sections() {
            let v: Vec<usize> = s.domain().iter().zip(&picks).filter(|(_, &p)| p).map(|(&d, _)| d).collect();
            let u: Vec<usize> = v.iter().zip(picks.iter().skip(3)).filter(|(_, &p)| p).map(|(&d, _)| d).collect();
            prop_assert_eq!(s.restrict(&v).unwrap().restrict(&u).unwrap(), s.restrict(&u).unwrap());
            prop_assert_eq!(s.restrict(s.domain()).unwrap(), s.clone());
        }
    }

    #[test]
    fn search_engines_agree(seed in any::<u64>()) {
        let m = common::model_from_seed(seed);
        let all: Vec<usize> = (0..m.scenario().measurement_count()).collect();
        let search = GlobalSearch::new(&m, &all);
        let collect = |strategy| {
            let mut out = Vec::new();
            let status = search.for_each_solution_with(strategy, &Section::empty(), u64::MAX, |s| {
                out.push(s.clone());
                true
            });
            assert_eq!(status, SearchStatus::Complete);
            out.sort();
            out
        };
        prop_assert_eq!(collect(Engine::Exhaustive), collect(Engine::Backtracking));
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let m = common::model_from_seed(seed);
        let doc = ModelDocument::from_model(&m);
        let text = doc.to_canonical_string();
        let parsed = ModelDocument::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_canonical_string(), text);
        prop_assert_eq!(parsed.hash(), doc.hash());
        prop_assert_eq!(parsed.build().unwrap().model, m);
    }
}

/// The same model under fresh measurement names, a permuted measurement
/// order and per-measurement outcome permutations.
fn relabel(m: &EmpiricalModel, perm: &[usize], flips: &[Vec<usize>]) -> EmpiricalModel {
    let scn = m.scenario();
    let n = scn.measurement_count();
    let labels: Vec<String> = (0..n).map(|j| format!("r{j}")).collect();
    let cover: Vec<Vec<String>> = scn
        .cover()
        .iter()
        .map(|c| c.iter().map(|&i| labels[perm[i]].clone()).collect())
        .collect();
    let fresh = Scenario::new(labels, cover, Outcomes::Ring(scn.outcome_count() as u64)).unwrap();
    let mut inverse = vec![0; n];
    for (i, &j) in perm.iter().enumerate() {
        inverse[j] = i;
    }
    EmpiricalModel::from_predicate(fresh, |_, s| {
        let back: Vec<(usize, usize)> = s
            .domain()
            .iter()
            .zip(s.values())
            .map(|(&j, &v)| {
                let i = inverse[j];
                (i, flips[i].iter().position(|&w| w == v).unwrap())
            })
            .collect();
        let back = Section::from_pairs(back).unwrap();
        m.locate(&back).is_some()
    })
    .unwrap()
}

fn permutation(len: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..len).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn relabelling_preserves_everything(
        seed in any::<u64>(),
        perm in permutation(4),
        flips in prop::collection::vec(permutation(3), 4),
    ) {
        let m = common::model_from_seed(seed);
        let n = m.scenario().measurement_count();
        let k = m.scenario().outcome_count();
        // Restrict the sampled permutations to the model's size.
        let perm: Vec<usize> = perm.into_iter().filter(|&j| j < n).collect();
        let flips: Vec<Vec<usize>> = flips
            .into_iter()
            .take(n)
            .map(|f| f.into_iter().filter(|&o| o < k).collect())
            .collect();
        let r = relabel(&m, &perm, &flips);
        let witnesses = find_isomorphisms(&m, &r, 1);
        prop_assert_eq!(witnesses.len(), 1);
        let (a, b) = (classify_contextuality(&m), classify_contextuality(&r));
        prop_assert_eq!(a.logical, b.logical);
        prop_assert_eq!(a.strong, b.strong);
        let (ca, cb) = (
            classify_cohomological(&m, RingSpec::Integers).unwrap(),
            classify_cohomological(&r, RingSpec::Integers).unwrap(),
        );
        prop_assert_eq!((ca.clc, ca.csc), (cb.clc, cb.csc));
        // AvN reads outcomes as ring elements, so it is only compared when the
        // outcomes are left alone.
        if flips.iter().all(|f| f.iter().enumerate().all(|(i, &o)| i == o)) {
            for ring in common::finite_rings_for(&m) {
                prop_assert_eq!(is_avn(&m, ring).unwrap().avn, is_avn(&r, ring).unwrap().avn);
            }
        }
    }
}

#[test]
fn isomorphism_is_an_equivalence_on_the_corpus() {
    let models = common::corpus_models();
    let small: Vec<&(&str, EmpiricalModel)> = models
        .iter()
        .filter(|(_, m)| m.scenario().measurement_count() <= 9)
        .collect();
    for (name, m) in &small {
        let id = find_isomorphisms(m, m, 1);
        assert!(id[0].is_identity(), "{name}: the identity is not found first");
    }
    for (n1, m1) in &small {
        for (n2, m2) in &small {
            let forward = !find_isomorphisms(m1, m2, 1).is_empty();
            let back = !find_isomorphisms(m2, m1, 1).is_empty();
            assert_eq!(forward, back, "{n1} and {n2}");
            assert_eq!(forward, n1 == n2 || [*n1, *n2].iter().all(|n| ["pr-box", "liar-4"].contains(n)), "{n1} and {n2}");
        }
    }
}

/// Dense 2^n × 2^n matrices over the Gaussian integers.
type Complex = (i64, i64);

fn cmul(a: Complex, b: Complex) -> Complex {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn letter_matrix(l: Letter) -> [[Complex; 2]; 2] {
    match l {
        Letter::I => [[(1, 0), (0, 0)], [(0, 0), (1, 0)]],
        Letter::X => [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],
        Letter::Y => [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],
        Letter::Z => [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],
    }
}

fn dense(p: &PauliOperator) -> Vec<Vec<Complex>> {
    let mut m = vec![vec![(1i64, 0i64)]];
    for &l in p.letters() {
        let f = letter_matrix(l);
        let size = m.len();
        let mut next = vec![vec![(0, 0); 2 * size]; 2 * size];
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * i + a][2 * j + b] = cmul(v, f[a][b]);
                    }
                }
            }
        }
        m = next;
    }
    let phase = [(1, 0), (0, 1), (-1, 0), (0, -1)][p.phase() as usize];
    m.into_iter().map(|r| r.into_iter().map(|v| cmul(phase, v)).collect()).collect()
}

fn dense_mul(a: &[Vec<Complex>], b: &[Vec<Complex>]) -> Vec<Vec<Complex>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold((0, 0), |acc, k| {
                        let t = cmul(a[i][k], b[k][j]);
                        (acc.0 + t.0, acc.1 + t.1)
                    })
                })
                .collect()
        })
        .collect()
}

fn pauli(arity: usize) -> impl Strategy<Value = PauliOperator> {
    (
        0u8..4,
        prop::collection::vec(prop::sample::select(vec![Letter::I, Letter::X, Letter::Y, Letter::Z]), arity),
    )
        .prop_map(|(phase, letters)| PauliOperator::new(phase, letters))
}

fn positive_pauli(arity: usize) -> impl Strategy<Value = PauliOperator> {
    prop::collection::vec(prop::sample::select(vec![Letter::I, Letter::X, Letter::Y, Letter::Z]), arity)
        .prop_map(|letters| PauliOperator::new(0, letters))
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn pauli_products_match_matrices(
        (p, q, r) in (1usize..=3).prop_flat_map(|n| (pauli(n), pauli(n), pauli(n)))
    ) {
        let pq = pauli_multiply(&p, &q).unwrap();
        prop_assert_eq!(dense(&pq), dense_mul(&dense(&p), &dense(&q)));
        prop_assert_eq!(
            pauli_multiply(&pq, &r).unwrap(),
            pauli_multiply(&p, &pauli_multiply(&q, &r).unwrap()).unwrap()
        );
        let commute = dense_mul(&dense(&p), &dense(&q)) == dense_mul(&dense(&q), &dense(&p));
        prop_assert_eq!(p.commutes_with(&q), commute);
        let roundtrip: PauliOperator = p.to_string().parse().unwrap();
        prop_assert_eq!(roundtrip, p);
    }

    #[test]
    fn avn_triples_give_avn_models(
        (e, f, g) in (3usize..=4).prop_flat_map(|n| (positive_pauli(n), positive_pauli(n), positive_pauli(n)))
    ) {
        let check = is_avn_triple(&e, &f, &g).unwrap();
        if check.holds() {
            let m = model_of_generators(&[e, f, g]).unwrap();
            prop_assert!(is_avn(&m, RingSpec::Mod(2)).unwrap().avn);
        } else {
            prop_assert!(!check.diagnostics.is_empty());
        }
    }
}

const TEMPLATES: [&str; 8] = ["x", "!x", "x & y", "x | y", "x <-> y", "!(x <-> y)", "x & !y", "!x | y"];

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn bell_bound_against_enumeration(
        props in prop::collection::vec((0usize..4, 0usize..TEMPLATES.len(), 0i64..=8), 1..=5)
    ) {
        let scn = corpus::model("bell").unwrap().scenario().clone();
        let built: Vec<Proposition> = props
            .iter()
            .map(|&(ci, t, p)| {
                let ctx = scn.context(ci);
                let text = TEMPLATES[t]
                    .replace('x', scn.measurement(ctx[0]))
                    .replace('y', scn.measurement(ctx[1]));
                Proposition::new(
                    &scn,
                    ci,
                    contextuality::paradox::Formula::parse(&scn, &text).unwrap(),
                    Some(BigRational::new(p.into(), 8.into())),
                )
                .unwrap()
            })
            .collect();
        let satisfiable = (0..16usize).any(|bits| {
            built.iter().all(|p| p.formula.eval(&|m| (bits >> m) & 1))
        });
        let r = logical_bell_bound(&scn, &built).unwrap();
        let n = built.len() as i64;
        prop_assert_eq!(r.jointly_satisfiable, satisfiable);
        prop_assert_eq!(&r.bound, &BigRational::from_integer((n - 1).into()));
        if satisfiable {
            let w = r.witness.unwrap();
            prop_assert!(built.iter().all(|p| p.formula.holds_on(&w).unwrap()));
        } else {
            let sum: BigRational = props.iter().map(|&(_, _, p)| BigRational::new(p.into(), 8.into())).sum();
            prop_assert_eq!(r.sum_p, Some(sum.clone()));
            let excess = sum - r.bound;
            let expected = if excess.is_positive() { excess } else { BigRational::zero() };
            prop_assert_eq!(r.violation, Some(expected));
        }
    }
}

#[test]
fn liar_cycles_are_strongly_contextual() {
    for n in 3..=8 {
        let m = liar_cycle_model(n).unwrap();
        assert!(m.supports().iter().all(|s| s.len() == 2), "length {n}");
        let c = classify_contextuality(&m);
        assert!(c.strong.is_true(), "length {n}");
        assert!(is_avn(&m, RingSpec::Mod(2)).unwrap().avn, "length {n}");
        assert!(classify_cohomological(&m, RingSpec::Mod(2)).unwrap().csc, "length {n}");
        for ci in 0..n {
            let open = m.without_context(ci).unwrap();
            assert!(classify_contextuality(&open).global_witness.is_some(), "length {n} without #{ci}");
        }
    }
}

#[test]
fn corpus_coboundaries_compose_to_zero() {
    for (name, m) in common::corpus_models() {
        let top = build_nerve(m.scenario(), usize::MAX).dimension();
        for q in 0..top.max(1) {
            let (d0, _, _) = coboundary(&m, q).unwrap();
            let (d1, _, _) = coboundary(&m, q + 1).unwrap();
            assert!(d1.mul(&d0).is_zero(), "{name} at {q}");
        }
    }
}
