//! Programmatic constructions of the standard two-party models.
//!
//! The JSON corpus is checked against these in the test suite, so the two
//! transcriptions guard each other.

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::model::{support_of_probability_table, EmpiricalModel, ProbabilityTable};
use crate::scenario::{Outcomes, Scenario, Section};

/// Two parties, two binary measurements each, contexts `a_i b_j`.
pub fn bell_scenario() -> Scenario {
    Scenario::new(
        ["a1", "a2", "b1", "b2"],
        [["a1", "b1"], ["a1", "b2"], ["a2", "b1"], ["a2", "b2"]],
        Outcomes::Ring(2),
    )
    .expect("static scenario")
}

/// The Bell table, rows in context order, columns `(a, b)` in the order
/// `(0,0) (1,0) (0,1) (1,1)`.
pub fn bell_table() -> ProbabilityTable {
    let scn = bell_scenario();
    let rows: [[(i64, i64); 4]; 4] = [
        [(1, 2), (0, 1), (0, 1), (1, 2)],
        [(3, 8), (1, 8), (1, 8), (3, 8)],
        [(3, 8), (1, 8), (1, 8), (3, 8)],
        [(1, 8), (3, 8), (3, 8), (1, 8)],
    ];
    let columns = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let table = rows
        .iter()
        .enumerate()
        .map(|(ci, row)| {
            let ctx = scn.context(ci).to_vec();
            row.iter()
                .zip(columns)
                .map(|(&(p, q), (a, b))| {
                    let s = Section::new(ctx.clone(), vec![a, b]).expect("two measurements");
                    (s, BigRational::new(p.into(), q.into()))
                })
                .collect::<BTreeMap<_, _>>()
        })
        .collect();
    ProbabilityTable::new(scn, table).expect("the Bell table is a valid table")
}

pub fn bell() -> EmpiricalModel {
    support_of_probability_table(&bell_table()).expect("valid table")
}

/// Hardy: everything possible except `(0,0)` at `a1 b1`... read the other way:
/// `(0,0)` is possible at `a1 b1`, impossible at `a1 b2` and `a2 b1`, and
/// `(1,1)` is impossible at `a2 b2`.
pub fn hardy() -> EmpiricalModel {
    EmpiricalModel::from_predicate(bell_scenario(), |ci, s| {
        let v = s.values();
        match ci {
            0 => true,
            1 | 2 => v != [0, 0],
            _ => v != [1, 1],
        }
    })
    .expect("nonempty supports")
}

/// PR box: perfect correlation on three contexts, anticorrelation at `a2 b2`.
pub fn pr_box() -> EmpiricalModel {
    EmpiricalModel::from_predicate(bell_scenario(), |ci, s| {
        let v = s.values();
        if ci == 3 {
            v[0] != v[1]
        } else {
            v[0] == v[1]
        }
    })
    .expect("nonempty supports")
}
