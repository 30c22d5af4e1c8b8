//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contextuality::analysis::{analyze, AnalysisOptions, AnalysisReport};
use contextuality::cohomology::{classify_cohomological, coboundary, connecting_hom_check, obstruction_vanishes};
use contextuality::model::Extension;
use contextuality::paradox::{bell_propositions, find_isomorphisms, liar_cycle_model, logical_bell_bound};
use contextuality::ring::Matrix;

use contextuality::stabiliser::{generate_subgroup, ghz_triple, scenario_for_operators, theory_of_subgroup};
use contextuality::theory::{decide_theory, is_avn};
use contextuality::{
    build_nerve, check_no_signalling, classify_contextuality, corpus, solve_linear_system, EmpiricalModel, LinearSystem, RingMatrix, Solution,
    RingSpec,
};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, what: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn model(name: &str) -> Result<EmpiricalModel, String> {
    corpus::model(name).map_err(|e| format!("{name}: {e}"))
}

fn csc(m: &EmpiricalModel, ring: RingSpec) -> Result<bool, String> {
    classify_cohomological(m, ring).map(|r| r.csc).map_err(|e| e.to_string())
}

fn avn(m: &EmpiricalModel, ring: RingSpec) -> Result<bool, String> {
    is_avn(m, ring).map(|r| r.avn).map_err(|e| e.to_string())
}

fn bell_table() -> Check {
    let built = corpus::build("bell").map_err(|e| e.to_string())?;
    let table = built.table.ok_or("bell entry carries no probability table")?;
    let props = bell_propositions(table.scenario())
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| p.with_probability_from(&table))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let ps: Vec<BigRational> = props.iter().map(|p| p.probability.clone().unwrap()).collect();
    ensure(ps == [q(1, 1), q(3, 4), q(3, 4), q(3, 4)], format!("probabilities {ps:?}"))?;
    let r = logical_bell_bound(table.scenario(), &props).map_err(|e| e.to_string())?;
    ensure(!r.jointly_satisfiable, "propositions jointly satisfiable")?;
    ensure(r.sum_p == Some(q(13, 4)), format!("sum {:?}", r.sum_p))?;
    ensure(r.bound == q(3, 1), format!("bound {}", r.bound))?;
    ensure(r.violation == Some(q(1, 4)), format!("violation {:?}", r.violation))
}

fn hardy() -> Check {
    let m = model("hardy")?;
    let scn = m.scenario();
    let c = classify_contextuality(&m);
    ensure(c.logical.is_true(), "LC does not hold")?;
    ensure(c.strong.is_false(), "SC holds")?;
    let ctx = scn.parse_context("a1,b1").map_err(|e| e.to_string())?;
    let s0 = scn.parse_section("a1=0,b1=0").map_err(|e| e.to_string())?;
    ensure(c.verdict_at(ctx, &s0) == Some(&Extension::Isolated), "a1=0,b1=0 is not isolated")?;
    let z = classify_cohomological(&m, RingSpec::Integers).map_err(|e| e.to_string())?;
    ensure(z.sections.len() == 13, format!("{} supported sections", z.sections.len()))?;
    ensure(z.sections.iter().all(|s| s.vanishes), "some integer obstruction is nonzero")?;
    ensure(!z.clc, "CLC_Z holds")
}

fn pr_box() -> Check {
    let m = model("pr-box")?;
    ensure(check_no_signalling(&m).holds(), "signalling")?;
    ensure(classify_contextuality(&m).strong.is_true(), "SC fails")?;
    ensure(avn(&m, RingSpec::Mod(2))?, "AvN_Z2 fails")?;
    ensure(csc(&m, RingSpec::Mod(2))?, "CSC_Z2 fails")?;
    let liar = liar_cycle_model(4).map_err(|e| e.to_string())?;
    let witnesses = find_isomorphisms(&liar, &m, usize::MAX);
    ensure(!witnesses.is_empty(), "liar cycle of length 4 is not isomorphic to the PR box")?;
    let wanted: Vec<(String, String)> = [("x1", "a2"), ("x2", "b1"), ("x3", "a1"), ("x4", "b2")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    ensure(
        witnesses
            .iter()
            .any(|w| w.correspondence(liar.scenario(), m.scenario()) == wanted
                && w.outcomes.iter().all(|p| p == &[0, 1])),
        "x1~a2, x2~b1, x3~a1, x4~b2 with identity outcome maps is not among the witnesses",
    )
}

fn ghz() -> Check {
    let gens = ghz_triple();
    let group = generate_subgroup(&gens).map_err(|e| e.to_string())?;
    let scn = scenario_for_operators(&gens).map_err(|e| e.to_string())?;
    let theory = theory_of_subgroup(&group, &scn).map_err(|e| e.to_string())?;
    let lines: BTreeSet<String> = theory.display_lines().into_iter().collect();
    let expected: BTreeSet<String> = [
        "X1 + Y2 + Y3 = 0 in Z2",
        "Y1 + X2 + Y3 = 0 in Z2",
        "Y1 + Y2 + X3 = 0 in Z2",
        "X1 + X2 + X3 = 1 in Z2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    ensure(lines == expected, format!("theory {lines:?}"))?;
    let m = model("ghz-mermin")?;
    ensure(avn(&m, RingSpec::Mod(2))?, "AvN_Z2 fails")?;
    ensure(classify_contextuality(&m).strong.is_true(), "SC fails")?;
    for ring in [RingSpec::Mod(2), RingSpec::Integers] {
        let r = classify_cohomological(&m, ring).map_err(|e| e.to_string())?;
        ensure(
            r.csc && r.sections.iter().all(|s| !s.vanishes),
            format!("some obstruction over {ring} vanishes"),
        )?;
    }
    Ok(())
}

fn box_25() -> Check {
    let built = corpus::build("box-25").map_err(|e| e.to_string())?;
    let reference = built.theory.ok_or("box-25 carries no reference theory")?;
    ensure(reference.ring() == RingSpec::Mod(3), "reference theory is not over Z3")?;
    ensure(reference.len() == 6, format!("{} reference equations", reference.len()))?;
    ensure(
        reference.holds_on(&built.model).map_err(|e| e.to_string())?,
        "the supports violate the six equations",
    )?;
    ensure(
        decide_theory(&reference).map_err(|e| e.to_string())?.avn,
        "the six equations have a joint solution mod 3",
    )?;
    ensure(avn(&built.model, RingSpec::Mod(3))?, "AvN_Z3 fails")?;
    ensure(!avn(&built.model, RingSpec::Mod(2))?, "AvN_Z2 holds")
}

fn isolated(ext: Option<&Extension>) -> Option<bool> {
    match ext {
        Some(Extension::Isolated) => Some(true),
        Some(Extension::Extends(_)) => Some(false),
        _ => None,
    }
}

/// Recomputes every implication from the report's raw verdicts.
fn chain_violations(label: &str, report: &AnalysisReport) -> Vec<String> {
    let mut out = Vec::new();
    let fail = |out: &mut Vec<String>, what: String| out.push(format!("{label}: {what}"));
    let sc = report.classification.strong;
    let z = report.ring(RingSpec::Integers).expect("Z is always analysed");
    for r in &report.rings {
        let csc_r = r.obstruction.csc;
        if csc_r && !z.obstruction.csc {
            fail(&mut out, format!("CSC_{} without CSC_Z", r.ring));
        }
        if z.obstruction.csc && sc.is_false() {
            fail(&mut out, "CSC_Z without SC".into());
        }
        if let (Some(a), Some(aff)) = (&r.avn, r.strong_affine) {
            if a.avn && aff.is_false() {
                fail(&mut out, format!("AvN_{} without SC(Aff S)", r.ring));
            }
            if aff.is_true() && !csc_r {
                fail(&mut out, format!("SC(Aff S) over {} without CSC", r.ring));
            }
            if r.ring.is_field() && aff.is_true() && !a.avn {
                fail(&mut out, format!("SC(Aff S) without AvN over the field {}", r.ring));
            }
        }
        for (k, s) in r.sections.iter().enumerate() {
            let lc_s = isolated(report.classification.verdict_at(s.context, &s.section));
            let clc_z = z.sections[k].clc;
            if let (Some(avn_s), Some(aff_s)) = (s.avn, s.isolated_in_affine) {
                if avn_s && aff_s.is_false() {
                    fail(&mut out, format!("section {k}: AvN_{} without LC(Aff S)", r.ring));
                }
                if aff_s.is_true() && !s.clc {
                    fail(&mut out, format!("section {k}: LC(Aff S) over {} without CLC", r.ring));
                }
            }
            if s.clc && !clc_z {
                fail(&mut out, format!("section {k}: CLC_{} without CLC_Z", r.ring));
            }
            if clc_z && lc_s == Some(false) {
                fail(&mut out, format!("section {k}: CLC_Z without LC"));
            }
        }
    }
    out
}

fn hierarchy() -> Check {
    let mut cases: Vec<(String, EmpiricalModel, Vec<RingSpec>)> = common::corpus_models()
        .into_iter()
        .map(|(n, m)| (n.to_string(), m, vec![RingSpec::Mod(2), RingSpec::Mod(3)]))
        .collect();
    for (i, m) in common::random_models(0x5eed_0006, 500).into_iter().enumerate() {
        let rings = common::finite_rings_for(&m);
        cases.push((format!("random #{i}"), m, rings));
    }
    let mut violations = Vec::new();
    let mut contextual = 0;
    for (label, m, rings) in &cases {
        let options = AnalysisOptions {
            rings: rings.clone(),
            ..Default::default()
        };
        match analyze(m, &options) {
            Ok(report) => {
                contextual += usize::from(report.classification.logical.is_true());
                violations.extend(chain_violations(label, &report));
            }
            Err(e) => violations.push(format!("{label}: {e}")),
        }
    }
    ensure(contextual > 50, format!("only {contextual} contextual models exercised"))?;
    ensure(violations.is_empty(), violations.into_iter().take(5).collect::<Vec<_>>().join("; "))
}

fn brute_force_solvable(a: &[Vec<u64>], b: &[u64], n: u64) -> (bool, BTreeSet<Vec<u64>>) {
    let cols = a.first().map_or(0, Vec::len);
    let mut homogeneous = BTreeSet::new();
    let mut solvable = false;
    let mut x = vec![0u64; cols];
    loop {
        let mut hom = true;
        let mut sol = true;
        for (row, &rhs) in a.iter().zip(b) {
            let v = row.iter().zip(&x).map(|(p, q)| p * q).sum::<u64>() % n;
            hom &= v == 0;
            sol &= v == rhs;
        }
        solvable |= sol;
        if hom {
            homogeneous.insert(x.clone());
        }
        let mut i = cols;
        loop {
            if i == 0 {
                return (solvable, homogeneous);
            }
            i -= 1;
            x[i] += 1;
            if x[i] < n {
                break;
            }
            x[i] = 0;
        }
    }
}

fn span(gens: &[Vec<u64>], cols: usize, n: u64) -> BTreeSet<Vec<u64>> {
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

fn oracles() -> Check {
    // The obstruction decided two independent ways.
    let mut models: Vec<(String, EmpiricalModel)> = common::corpus_models()
        .into_iter()
        .map(|(n, m)| (n.to_string(), m))
        .collect();
    models.extend(
        common::random_models(0x5eed_0007, 200)
            .into_iter()
            .enumerate()
            .map(|(i, m)| (format!("random #{i}"), m)),
    );
    for (label, m) in &models {
        let mut rings = vec![RingSpec::Integers];
        rings.extend(common::finite_rings_for(m));
        for ring in rings {
            for (ci, s) in m.supported_sections() {
                let a = obstruction_vanishes(m, ci, s, ring).map_err(|e| format!("{label}: {e}"))?;
                let b = connecting_hom_check(m, ci, s, ring).map_err(|e| format!("{label}: {e}"))?;
                ensure(a == b, format!("{label}: the two obstruction computations disagree over {ring}"))?;
            }
        }
    }

    // Linear systems against enumeration.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0077);
    let moduli = [2u64, 3, 4, 5, 6, 8, 9, 12];
    for trial in 0..400 {
        let n = moduli[trial % moduli.len()];
        let big = trial % 100 == 0;
        let max_cols = if big { (20.0 / (n as f64).log2()).floor() as usize } else { (12.0 / (n as f64).log2()).floor().max(1.0) as usize };
        let cols = if big { max_cols } else { rng.gen_range(1..=max_cols) };
        let rows = rng.gen_range(1..=5);
        let a: Vec<Vec<u64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..n)).collect()).collect();
        let b: Vec<u64> = (0..rows).map(|_| rng.gen_range(0..n)).collect();
        let ring = RingSpec::Mod(n);
        let sys = LinearSystem::new(
            RingMatrix::from_rows(ring, &a),
            b.iter().map(|&v| BigInt::from(v)).collect(),
        )
        .map_err(|e| e.to_string())?;
        let solution = solve_linear_system(&sys);
        let (solvable, homogeneous) = brute_force_solvable(&a, &b, n);
        ensure(solution.is_solvable() == solvable, format!("Z{n} {a:?} x = {b:?}: solvability differs"))?;
        if let Solution::Solvable { particular, kernel } = solution {
            let x: Vec<u64> = particular.iter().map(|v| u64::try_from(ring.reduce(v)).unwrap()).collect();
            for (row, &rhs) in a.iter().zip(&b) {
                let v = row.iter().zip(&x).map(|(p, q)| p * q).sum::<u64>() % n;
                ensure(v == rhs, format!("Z{n}: particular solution is wrong"))?;
            }
            if !big {
                let gens: Vec<Vec<u64>> = kernel
                    .iter()
                    .map(|k| k.iter().map(|v| u64::try_from(ring.reduce(v)).unwrap()).collect())
                    .collect();
                ensure(span(&gens, cols, n) == homogeneous, format!("Z{n} {a:?}: kernel does not span"))?;
            }
        }
    }

    // Coboundaries compose to zero.
    for (name, m) in common::corpus_models() {
        let top = build_nerve(m.scenario(), usize::MAX).dimension();
        for q in 0..top.max(1) {
            let (d0, _, _) = coboundary(&m, q).map_err(|e| e.to_string())?;
            let (d1, _, _) = coboundary(&m, q + 1).map_err(|e| e.to_string())?;
            let product: Matrix = d1.mul(&d0);
            ensure(product.is_zero(), format!("{name}: coboundaries at {q} do not compose to zero"))?;
        }
    }
    Ok(())
}

fn specker() -> Check {
    let m = model("specker-triangle")?;
    ensure(classify_contextuality(&m).strong.is_true(), "SC fails")?;
    ensure(csc(&m, RingSpec::Mod(2))?, "CSC_Z2 fails")?;
    for ci in 0..m.scenario().cover().len() {
        let sub = m.without_context(ci).map_err(|e| e.to_string())?;
        ensure(
            classify_contextuality(&sub).global_witness.is_some(),
            format!("no global section without context #{ci}"),
        )?;
    }
    Ok(())
}

fn kochen_specker() -> Check {
    for name in ["peres-mermin-square", "ks-18"] {
        let m = model(name)?;
        ensure(classify_contextuality(&m).strong.is_true(), format!("{name}: SC fails"))?;
        ensure(csc(&m, RingSpec::Mod(2))?, format!("{name}: CSC_Z2 fails"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Bell table: logical Bell bound 13/4 against 3, violation 1/4", bell_table),
        ("Hardy: LC at a1=0,b1=0, not SC, every integer obstruction vanishes", hardy),
        ("PR box: no-signalling, SC, AvN_Z2, CSC_Z2, isomorphic to the liar cycle of length 4", pr_box),
        ("GHZ: four parity equations, AvN_Z2, SC, CSC_Z2 and CSC_Z at every section", ghz),
        ("Box 25: AvN_Z3 through six equations mod 3, not AvN_Z2", box_25),
        ("Hierarchy on the corpus and 500 random no-signalling models", hierarchy),
        ("Oracles: obstruction twice, solver against enumeration, coboundaries compose to zero", oracles),
        ("Specker triangle: SC, CSC_Z2, each proper subfamily has a global section", specker),
        ("Peres-Mermin square and KS-18: SC and CSC_Z2", kochen_specker),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS  {}  {title}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}  {title}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
