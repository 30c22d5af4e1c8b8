//! Possibilistic empirical models over measurement scenarios and their
//! contextuality: logical and strong contextuality by global-section search,
//! All-vs-Nothing arguments over ℤ_n, and Čech-cohomological obstructions
//! over ℤ and ℤ_n, computed with exact integer linear algebra.

pub mod analysis;
pub mod cohomology;
pub mod corpus;
pub mod corpus_models;
pub mod document;
pub mod dot;
pub mod error;
pub mod model;
pub mod paradox;
pub mod ring;
pub mod scenario;
pub mod search;
pub mod stabiliser;
pub mod theory;

pub use error::{Error, Result};
pub use model::{
    check_no_signalling, classify_contextuality, model_restriction, support_of_probability_table,
    Classification, CompatibleFamily, EmpiricalModel, Extension, NoSignalling, ProbabilityTable,
    Verdict,
};
pub use ring::{ring_hom_apply, solve_linear_system, LinearSystem, RingHom, RingMatrix, RingSpec, Solution};
pub use scenario::{
    build_nerve, connected_components, restrict_section, sections_of, Nerve, Outcomes, Scenario,
    Section, Simplex,
};
