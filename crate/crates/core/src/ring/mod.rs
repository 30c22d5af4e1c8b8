//! Coefficient rings (the integers and the integers modulo n), exact
//! matrices over them, normal forms and linear solvability.

pub mod hermite;
pub mod matrix;
pub mod solve;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
pub use hermite::{hermite, howell, smith, Hermite, Howell, Smith};
pub use matrix::{extended_gcd, Matrix};
pub use solve::Prepared;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingSpec {
    Integers,
    Mod(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl RingSpec {
    pub fn modulo(n: u64) -> Result<RingSpec> {
        if n < 2 {
            return Err(Error::UnsupportedRing(format!("modulus must be at least 2, got {n}")));
        }
        Ok(RingSpec::Mod(n))
    }

    pub fn modulus(self) -> Option<u64> {
        match self {
            RingSpec::Integers => None,
            RingSpec::Mod(n) => Some(n),
        }
    }

    pub fn is_field(self) -> bool {
        matches!(self, RingSpec::Mod(n) if is_prime(n))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RingSpec::Mod(_))
    }

    /// Canonical representative: `0 ≤ x < n` modulo n, unchanged over ℤ.
    pub fn reduce(self, x: &BigInt) -> BigInt {
        match self {
            RingSpec::Integers => x.clone(),
            RingSpec::Mod(n) => x.mod_floor(&BigInt::from(n)),
        }
    }

    pub fn add(self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(&(a + b))
    }

    pub fn mul(self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(&(a * b))
    }

    pub fn neg(self, a: &BigInt) -> BigInt {
        self.reduce(&-a)
    }

    /// Elements in canonical order, for finite rings.
    pub fn elements(self) -> Option<impl Iterator<Item = BigInt>> {
        self.modulus().map(|n| (0..n).map(BigInt::from))
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => write!(f, "Z"),
            RingSpec::Mod(n) => write!(f, "Z{n}"),
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// Accepts `z` / `Z` for the integers and `zN` / `ZN` / `Z/N` for the
    /// integers modulo N.
    fn from_str(s: &str) -> Result<RingSpec> {
        let t = s.trim();
        let rest = t
            .strip_prefix('z')
            .or_else(|| t.strip_prefix('Z'))
            .ok_or_else(|| Error::UnsupportedRing(format!("{s:?} (expected z or zN)")))?;
        let rest = rest.strip_prefix('/').unwrap_or(rest);
        if rest.is_empty() {
            return Ok(RingSpec::Integers);
        }
        let n: u64 = rest
            .parse()
            .map_err(|_| Error::UnsupportedRing(format!("{s:?} (expected z or zN)")))?;
        RingSpec::modulo(n)
    }
}

/// A matrix whose entries are canonical elements of `ring`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    ring: RingSpec,
    inner: Matrix,
}

impl RingMatrix {
    pub fn new(ring: RingSpec, m: Matrix) -> RingMatrix {
        RingMatrix {
            ring,
            inner: m.map(|x| ring.reduce(x)),
        }
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(ring: RingSpec, rows: &[Vec<T>]) -> RingMatrix {
        RingMatrix::new(ring, Matrix::from_rows(rows))
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.rows()
    }

    pub fn cols(&self) -> usize {
        self.inner.cols()
    }

    pub fn mul(&self, other: &RingMatrix) -> RingMatrix {
        RingMatrix::new(self.ring, self.inner.mul(&other.inner))
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.inner
            .mul_vec(v)
            .iter()
            .map(|x| self.ring.reduce(x))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: RingMatrix,
    pub rhs: Vec<BigInt>,
}

impl LinearSystem {
    pub fn new(matrix: RingMatrix, rhs: Vec<BigInt>) -> Result<LinearSystem> {
        if rhs.len() != matrix.rows() {
            return Err(Error::Shape(format!(
                "right-hand side has {} entries for {} equations",
                rhs.len(),
                matrix.rows()
            )));
        }
        let ring = matrix.ring();
        let rhs = rhs.iter().map(|x| ring.reduce(x)).collect();
        Ok(LinearSystem { matrix, rhs })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unsolvable,
    Solvable {
        particular: Vec<BigInt>,
        /// Generators of the homogeneous solutions; a basis over fields and
        /// over the integers.
        kernel: Vec<Vec<BigInt>>,
    },
}

impl Solution {
    pub fn is_solvable(&self) -> bool {
        matches!(self, Solution::Solvable { .. })
    }

    pub fn particular(&self) -> Option<&[BigInt]> {
        match self {
            Solution::Solvable { particular, .. } => Some(particular),
            Solution::Unsolvable => None,
        }
    }
}

pub fn solve_linear_system(sys: &LinearSystem) -> Solution {
    let prepared = Prepared::new(sys.matrix.ring(), sys.matrix.matrix());
    match prepared.solve(&sys.rhs) {
        None => Solution::Unsolvable,
        Some(particular) => Solution::Solvable {
            particular,
            kernel: prepared.kernel(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalForm {
    Integer { hermite: Hermite, smith: Smith },
    Modular(Howell),
}

pub fn normal_form(m: &RingMatrix) -> NormalForm {
    match m.ring() {
        RingSpec::Integers => NormalForm::Integer {
            hermite: hermite(m.matrix()),
            smith: smith(m.matrix()),
        },
        RingSpec::Mod(n) => NormalForm::Modular(howell(m.matrix(), n)),
    }
}

/// One of the canonical ring homomorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingHom {
    Identity(RingSpec),
    /// ℤ → ℤ_n, or ℤ_n → ℤ_m with m | n.
    Reduction { source: RingSpec, target: u64 },
}

impl RingHom {
    pub fn new(source: RingSpec, target: RingSpec) -> Result<RingHom> {
        match (source, target) {
            _ if source == target => Ok(RingHom::Identity(source)),
            (RingSpec::Integers, RingSpec::Mod(m)) => Ok(RingHom::Reduction { source, target: m }),
            (RingSpec::Mod(n), RingSpec::Mod(m)) if n % m == 0 => {
                Ok(RingHom::Reduction { source, target: m })
            }
            _ => Err(Error::UnsupportedHomomorphism {
                source_ring: source.to_string(),
                target: target.to_string(),
            }),
        }
    }

    pub fn source(self) -> RingSpec {
        match self {
            RingHom::Identity(r) => r,
            RingHom::Reduction { source, .. } => source,
        }
    }

    pub fn target(self) -> RingSpec {
        match self {
            RingHom::Identity(r) => r,
            RingHom::Reduction { target, .. } => RingSpec::Mod(target),
        }
    }

    pub fn apply_one(self, x: &BigInt) -> BigInt {
        self.target().reduce(&self.source().reduce(x))
    }
}

impl fmt::Display for RingHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.source(), self.target())
    }
}

pub fn ring_hom_apply(h: RingHom, v: &[BigInt]) -> Vec<BigInt> {
    v.iter().map(|x| h.apply_one(x)).collect()
}
