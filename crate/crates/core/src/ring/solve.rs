//! Exact linear solvability over the integers and the integers modulo n.
//!
//! A [`Prepared`] system factors the coefficient matrix once; each call to
//! [`Prepared::solve`] then costs a triangular substitution.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::hermite::hermite_impl;
use super::matrix::Matrix;
use super::RingSpec;

/// `A·Uᵀ = Hᵀ` where `U·Aᵀ = H` is the row Hermite form of the transpose.
#[derive(Debug, Clone)]
struct IntegerFactor {
    u: Matrix,
    h: Matrix,
    pivots: Vec<usize>,
    cols: usize,
}

impl IntegerFactor {
    fn new(a: &Matrix) -> IntegerFactor {
        let herm = hermite_impl(&a.transpose(), false);
        IntegerFactor {
            u: herm.u,
            h: herm.h,
            pivots: herm.pivots,
            cols: a.cols(),
        }
    }

    fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let rank = self.pivots.len();
        // Unknowns y with Hᵀ·y = b; row p_k of Hᵀ only involves y_0..=y_k.
        let mut y: Vec<BigInt> = vec![BigInt::zero(); self.cols];
        for (k, &p) in self.pivots.iter().enumerate() {
            let mut rest = b[p].clone();
            for (j, yj) in y.iter().enumerate().take(k) {
                rest -= self.h.get(j, p) * yj;
            }
            let (q, r) = rest.div_rem(self.h.get(k, p));
            if !r.is_zero() {
                return None;
            }
            y[k] = q;
        }
        for (i, bi) in b.iter().enumerate() {
            let lhs: BigInt = (0..rank).map(|k| self.h.get(k, i) * &y[k]).sum();
            if &lhs != bi {
                return None;
            }
        }
        // x = Uᵀ·y
        let mut x = vec![BigInt::zero(); self.cols];
        for (k, yk) in y.iter().enumerate().take(rank) {
            if yk.is_zero() {
                continue;
            }
            for (c, xc) in x.iter_mut().enumerate() {
                *xc += self.u.get(k, c) * yk;
            }
        }
        Some(x)
    }

    fn kernel(&self) -> Vec<Vec<BigInt>> {
        (self.pivots.len()..self.u.rows())
            .map(|k| self.u.row_vec(k))
            .collect()
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p is prime and a is nonzero mod p.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = ((result as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        e >>= 1;
    }
    result
}

/// Reduced row echelon form over a prime field with the row transform.
#[derive(Debug, Clone)]
struct FieldFactor {
    p: u64,
    /// `E·A = R`.
    e: Vec<Vec<u64>>,
    r: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    cols: usize,
}

impl FieldFactor {
    fn new(a: &Matrix, p: u64) -> FieldFactor {
        let pb = BigInt::from(p);
        let rows = a.rows();
        let cols = a.cols();
        let mut r: Vec<Vec<u64>> = (0..rows)
            .map(|i| {
                a.row(i)
                    .iter()
                    .map(|x| x.mod_floor(&pb).to_u64().expect("reduced entry fits"))
                    .collect()
            })
            .collect();
        let mut e: Vec<Vec<u64>> = (0..rows)
            .map(|i| (0..rows).map(|j| u64::from(i == j)).collect())
            .collect();
        let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            if row == rows {
                break;
            }
            let Some(piv) = (row..rows).find(|&i| r[i][col] != 0) else {
                continue;
            };
            r.swap(row, piv);
            e.swap(row, piv);
            let inv = inv_mod(r[row][col], p);
            for x in r[row].iter_mut() {
                *x = mulmod(*x, inv);
            }
            for x in e[row].iter_mut() {
                *x = mulmod(*x, inv);
            }
            for i in 0..rows {
                if i == row || r[i][col] == 0 {
                    continue;
                }
                let f = r[i][col];
                for c in 0..cols {
                    let sub = mulmod(f, r[row][c]);
                    r[i][c] = (r[i][c] + p - sub) % p;
                }
                for c in 0..rows {
                    let sub = mulmod(f, e[row][c]);
                    e[i][c] = (e[i][c] + p - sub) % p;
                }
            }
            pivots.push(col);
            row += 1;
        }
        FieldFactor {
            p,
            e,
            r,
            pivots,
            cols,
        }
    }

    fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let pb = BigInt::from(self.p);
        let b: Vec<u64> = b
            .iter()
            .map(|x| x.mod_floor(&pb).to_u64().expect("reduced"))
            .collect();
        let c: Vec<u64> = self
            .e
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&b)
                    .fold(0u128, |acc, (&x, &y)| (acc + x as u128 * y as u128) % self.p as u128)
                    as u64
            })
            .collect();
        if c[self.pivots.len()..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut x = vec![BigInt::zero(); self.cols];
        for (k, &p) in self.pivots.iter().enumerate() {
            x[p] = BigInt::from(c[k]);
        }
        Some(x)
    }

    fn kernel(&self) -> Vec<Vec<BigInt>> {
        let free: Vec<usize> = (0..self.cols).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![BigInt::zero(); self.cols];
                v[f] = BigInt::from(1);
                for (k, &p) in self.pivots.iter().enumerate() {
                    let entry = self.r[k][f];
                    if entry != 0 {
                        v[p] = BigInt::from(self.p - entry);
                    }
                }
                v
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Integers(IntegerFactor),
    Field(FieldFactor),
    /// `A·x ≡ b (mod n)` lifted to `[A | n·I]·(x; y) = b` over the integers.
    Lifted(IntegerFactor, u64),
}

/// A coefficient matrix factored for repeated solving.
#[derive(Debug, Clone)]
pub struct Prepared {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    factor: Factor,
}

impl Prepared {
    pub fn new(ring: RingSpec, a: &Matrix) -> Prepared {
        let factor = match ring {
            RingSpec::Integers => Factor::Integers(IntegerFactor::new(a)),
            RingSpec::Mod(n) if super::is_prime(n) => Factor::Field(FieldFactor::new(a, n)),
            RingSpec::Mod(n) => {
                let nb = BigInt::from(n);
                let reduced = a.map(|x| x.mod_floor(&nb));
                let lifted = reduced.hcat(&Matrix::identity(a.rows()).map(|x| x * &nb));
                Factor::Lifted(IntegerFactor::new(&lifted), n)
            }
        };
        Prepared {
            ring,
            rows: a.rows(),
            cols: a.cols(),
            factor,
        }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// One solution of `A·x = b`, entries canonical for the ring.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        match &self.factor {
            Factor::Integers(f) => f.solve(b),
            Factor::Field(f) => f.solve(b),
            Factor::Lifted(f, n) => {
                let nb = BigInt::from(*n);
                let b: Vec<BigInt> = b.iter().map(|x| x.mod_floor(&nb)).collect();
                f.solve(&b).map(|x| x[..self.cols].iter().map(|v| v.mod_floor(&nb)).collect())
            }
        }
    }

    /// Generators of the solution module of `A·x = 0`: a basis over the
    /// integers and over prime fields, a generating set otherwise.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        match &self.factor {
            Factor::Integers(f) => f.kernel(),
            Factor::Field(f) => f.kernel(),
            Factor::Lifted(f, n) => {
                let nb = BigInt::from(*n);
                let mut gens: Vec<Vec<BigInt>> = f
                    .kernel()
                    .into_iter()
                    .map(|v| v[..self.cols].iter().map(|x| x.mod_floor(&nb)).collect::<Vec<_>>())
                    .filter(|v| v.iter().any(|x| !x.is_zero()))
                    .collect();
                gens.sort();
                gens.dedup();
                gens
            }
        }
    }
}
