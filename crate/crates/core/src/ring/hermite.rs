//! Hermite and Smith normal forms over the integers, and the Howell-style
//! form over the integers modulo n obtained from them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::Matrix;

/// Matrix under elimination, with the accumulated left and right
/// transforms and (optionally) their inverses.
struct Tracked {
    m: Matrix,
    u: Matrix,
    u_inv: Option<Matrix>,
    v: Option<Matrix>,
    v_inv: Option<Matrix>,
}

impl Tracked {
    fn new(m: &Matrix, inverses: bool, columns: bool) -> Tracked {
        Tracked {
            u: Matrix::identity(m.rows()),
            u_inv: inverses.then(|| Matrix::identity(m.rows())),
            v: columns.then(|| Matrix::identity(m.cols())),
            v_inv: (columns && inverses).then(|| Matrix::identity(m.cols())),
            m: m.clone(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
        self.u.swap_rows(a, b);
        if let Some(ui) = &mut self.u_inv {
            ui.swap_cols(a, b);
        }
    }

    fn negate_row(&mut self, r: usize) {
        self.m.negate_row(r);
        self.u.negate_row(r);
        if let Some(ui) = &mut self.u_inv {
            ui.negate_col(r);
        }
    }

    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.m.add_row_multiple(dst, src, k);
        self.u.add_row_multiple(dst, src, k);
        if let Some(ui) = &mut self.u_inv {
            ui.add_col_multiple(src, dst, &-k);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.swap_cols(a, b);
        if let Some(v) = &mut self.v {
            v.swap_cols(a, b);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.swap_rows(a, b);
        }
    }

    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.m.add_col_multiple(dst, src, k);
        if let Some(v) = &mut self.v {
            v.add_col_multiple(dst, src, k);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.add_row_multiple(src, dst, &-k);
        }
    }

    /// Row with the smallest nonzero |entry| in column `col`, rows `from..`.
    fn min_in_col(&self, col: usize, from: usize) -> Option<usize> {
        (from..self.m.rows())
            .filter(|&r| !self.m.get(r, col).is_zero())
            .min_by(|&a, &b| self.m.get(a, col).abs().cmp(&self.m.get(b, col).abs()))
    }

    /// Euclidean reduction of column `col` below row `row`; leaves the gcd
    /// at `(row, col)` and zeros beneath. Returns false if the column is zero.
    fn clear_below(&mut self, row: usize, col: usize) -> bool {
        loop {
            let Some(p) = self.min_in_col(col, row) else {
                return false;
            };
            self.swap_rows(row, p);
            let mut done = true;
            for i in row + 1..self.m.rows() {
                if self.m.get(i, col).is_zero() {
                    continue;
                }
                let q = self.m.get(i, col).div_floor(self.m.get(row, col));
                self.add_row_multiple(i, row, &-q);
                if !self.m.get(i, col).is_zero() {
                    done = false;
                }
            }
            if done {
                return true;
            }
        }
    }
}

/// `U·A = H` with `H` in row Hermite normal form and `U` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hermite {
    pub h: Matrix,
    pub u: Matrix,
    /// `U⁻¹`, present when requested.
    pub u_inv: Option<Matrix>,
    /// Pivot column of each nonzero row of `H`, in order.
    pub pivots: Vec<usize>,
}

impl Hermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Row Hermite normal form: pivots positive, entries above a pivot reduced
/// into `[0, pivot)`, zero rows last.
pub fn hermite(a: &Matrix) -> Hermite {
    hermite_impl(a, true)
}

pub(crate) fn hermite_impl(a: &Matrix, inverse: bool) -> Hermite {
    let mut t = Tracked::new(a, inverse, false);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols() {
        if row == a.rows() {
            break;
        }
        if !t.clear_below(row, col) {
            continue;
        }
        if t.m.get(row, col).is_negative() {
            t.negate_row(row);
        }
        for i in 0..row {
            let q = t.m.get(i, col).div_floor(t.m.get(row, col));
            t.add_row_multiple(i, row, &-q);
        }
        pivots.push(col);
        row += 1;
    }
    Hermite {
        h: t.m,
        u: t.u,
        u_inv: t.u_inv,
        pivots,
    }
}

/// `U·A·V = D` with `D` diagonal, `d_1 | d_2 | …`, all nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smith {
    pub d: Matrix,
    pub u: Matrix,
    pub u_inv: Matrix,
    pub v: Matrix,
    pub v_inv: Matrix,
}

impl Smith {
    /// Nonzero invariant factors.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

pub fn smith(a: &Matrix) -> Smith {
    let mut t = Tracked::new(a, true, true);
    let (rows, cols) = (a.rows(), a.cols());
    let mut k = 0;
    while k < rows.min(cols) {
        // Smallest nonzero entry of the trailing block goes to (k, k).
        let mut best: Option<(usize, usize)> = None;
        for r in k..rows {
            for c in k..cols {
                let x = t.m.get(r, c);
                if !x.is_zero()
                    && best.is_none_or(|(br, bc)| x.abs() < t.m.get(br, bc).abs())
                {
                    best = Some((r, c));
                }
            }
        }
        let Some((br, bc)) = best else { break };
        t.swap_rows(k, br);
        t.swap_cols(k, bc);

        loop {
            t.clear_below(k, k);
            // Same reduction along the row, by column operations.
            loop {
                let p = (k..cols)
                    .filter(|&c| !t.m.get(k, c).is_zero())
                    .min_by(|&a, &b| t.m.get(k, a).abs().cmp(&t.m.get(k, b).abs()))
                    .expect("pivot is nonzero");
                t.swap_cols(k, p);
                let mut done = true;
                for c in k + 1..cols {
                    if t.m.get(k, c).is_zero() {
                        continue;
                    }
                    let q = t.m.get(k, c).div_floor(t.m.get(k, k));
                    t.add_col_multiple(c, k, &-q);
                    if !t.m.get(k, c).is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if (k + 1..rows).any(|r| !t.m.get(r, k).is_zero()) {
                continue;
            }
            // Divisibility: fold an offending row into row k and repeat.
            let pivot = t.m.get(k, k).clone();
            let offending = (k + 1..rows).find(|&r| {
                (k + 1..cols).any(|c| !t.m.get(r, c).is_multiple_of(&pivot))
            });
            match offending {
                Some(r) => t.add_row_multiple(k, r, &BigInt::from(1)),
                None => break,
            }
        }
        if t.m.get(k, k).is_negative() {
            t.negate_row(k);
        }
        k += 1;
    }
    Smith {
        d: t.m,
        u: t.u,
        u_inv: t.u_inv.expect("tracked"),
        v: t.v.expect("tracked"),
        v_inv: t.v_inv.expect("tracked"),
    }
}

/// Howell-style form of `A` over the integers modulo `n`.
///
/// `form = transform·A` and `A = reconstruction·form`, all mod `n`. The rows
/// of `form` are the nonzero rows of the Hermite form of `[A; n·I]` reduced
/// modulo `n`; they span the same submodule as the rows of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Howell {
    pub modulus: u64,
    pub form: Matrix,
    pub transform: Matrix,
    pub reconstruction: Matrix,
}

pub fn howell(a: &Matrix, modulus: u64) -> Howell {
    let n = BigInt::from(modulus);
    let reduce = |x: &BigInt| x.mod_floor(&n);
    let a = a.map(reduce);
    let scaled = Matrix::identity(a.cols()).map(|x| x * &n);
    let stacked = a.vcat(&scaled);
    let herm = hermite_impl(&stacked, true);
    let kept: Vec<usize> = (0..herm.rank())
        .filter(|&r| herm.h.row(r).iter().any(|x| !reduce(x).is_zero()))
        .collect();
    let form = herm.h.select(&kept, 0..a.cols()).map(reduce);
    let transform = herm.u.select(&kept, 0..a.rows()).map(reduce);
    let u_inv = herm.u_inv.expect("tracked");
    let top: Vec<usize> = (0..a.rows()).collect();
    let reconstruction = u_inv
        .transpose()
        .select(&kept, 0..u_inv.rows())
        .transpose()
        .select(&top, 0..kept.len())
        .map(reduce);
    Howell {
        modulus,
        form,
        transform,
        reconstruction,
    }
}
