//! Cartan matrices of the simple Lie algebras and their closed-form inverses.
//!
//! Conventions follow the Toda-system literature: `a[i][j]` multiplies the
//! density of component `j` in equation `i`. For `B_n` the `-2` sits above the
//! diagonal in the last column, for `C_n` below the diagonal in the last row,
//! so `C_n` is the transpose of `B_n`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::algebra::{Family, LieAlgebraType};
use crate::error::{Result, TodaError};
use crate::rational::{format_pq, int, is_identity, matmul, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanMatrix {
    algebra: LieAlgebraType,
    entries: Vec<Vec<i64>>,
}

impl CartanMatrix {
    pub fn algebra(&self) -> LieAlgebraType {
        self.algebra
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn to_rational(&self) -> Vec<Vec<Rational>> {
        self.entries.iter().map(|row| row.iter().map(|&a| int(a)).collect()).collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|row| row.iter().map(|&a| a as f64).collect()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseCartanMatrix {
    algebra: LieAlgebraType,
    entries: Vec<Vec<Rational>>,
}

impl InverseCartanMatrix {
    /// Wraps an arbitrary candidate table, e.g. a transcription to be checked
    /// with [`verify_inverse`].
    pub fn from_entries(algebra: LieAlgebraType, entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = algebra.rank();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(TodaError::DimensionMismatch(format!(
                "inverse table for {algebra} must be {n}x{n}"
            )));
        }
        Ok(Self { algebra, entries })
    }

    pub fn algebra(&self) -> LieAlgebraType {
        self.algebra
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (c, x)| acc + c * x))
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.entries[i].iter().fold(Rational::zero(), |acc, c| acc + c)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|row| row.iter().map(crate::rational::to_f64).collect()).collect()
    }

    pub fn to_pq_strings(&self) -> Vec<Vec<String>> {
        self.entries.iter().map(|row| row.iter().map(format_pq).collect()).collect()
    }
}

pub fn build_cartan(algebra: LieAlgebraType) -> CartanMatrix {
    let n = algebra.rank();
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize, aij: i64, aji: i64| {
        a[i][j] = aij;
        a[j][i] = aji;
    };
    match algebra.family() {
        Family::A => (0..n.saturating_sub(1)).for_each(|i| link(i, i + 1, -1, -1)),
        Family::B => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 2, n - 1, -2, -1);
        }
        Family::C => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 2, n - 1, -1, -2);
        }
        Family::D => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 3, n - 1, -1, -1);
        }
        Family::E => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 4, n - 1, -1, -1);
        }
        Family::F => {
            link(0, 1, -1, -1);
            link(1, 2, -2, -1);
            link(2, 3, -1, -1);
        }
        Family::G => link(0, 1, -1, -3),
    }
    CartanMatrix { algebra, entries: a }
}

const E6_INVERSE: [[(i64, i64); 6]; 6] = [
    [(4, 3), (5, 3), (2, 1), (4, 3), (2, 3), (1, 1)],
    [(5, 3), (10, 3), (4, 1), (8, 3), (4, 3), (2, 1)],
    [(2, 1), (4, 1), (6, 1), (4, 1), (2, 1), (3, 1)],
    [(4, 3), (8, 3), (4, 1), (10, 3), (5, 3), (2, 1)],
    [(2, 3), (4, 3), (2, 1), (5, 3), (4, 3), (1, 1)],
    [(1, 1), (2, 1), (3, 1), (2, 1), (1, 1), (2, 1)],
];

const E7_INVERSE: [[(i64, i64); 7]; 7] = [
    [(3, 2), (2, 1), (5, 2), (3, 1), (2, 1), (1, 1), (3, 2)],
    [(2, 1), (4, 1), (5, 1), (6, 1), (4, 1), (2, 1), (3, 1)],
    [(5, 2), (5, 1), (15, 2), (9, 1), (6, 1), (3, 1), (9, 2)],
    [(3, 1), (6, 1), (9, 1), (12, 1), (8, 1), (4, 1), (6, 1)],
    [(2, 1), (4, 1), (6, 1), (8, 1), (6, 1), (3, 1), (4, 1)],
    [(1, 1), (2, 1), (3, 1), (4, 1), (3, 1), (2, 1), (2, 1)],
    [(3, 2), (3, 1), (9, 2), (6, 1), (4, 1), (2, 1), (7, 2)],
];

/// Integer inverse of `E_8`.
///
/// Entry (5,3) is 18. The commonly reproduced table prints 8 there, which
/// breaks both symmetry with (3,5) and the product with the Cartan matrix.
pub const E8_INVERSE: [[i64; 8]; 8] = [
    [2, 3, 4, 5, 6, 4, 2, 3],
    [3, 6, 8, 10, 12, 8, 4, 6],
    [4, 8, 12, 15, 18, 12, 6, 9],
    [5, 10, 15, 20, 24, 16, 8, 12],
    [6, 12, 18, 24, 30, 20, 10, 15],
    [4, 8, 12, 16, 20, 14, 7, 10],
    [2, 4, 6, 8, 10, 7, 4, 5],
    [3, 6, 9, 12, 15, 10, 5, 8],
];

const F4_INVERSE: [[i64; 4]; 4] = [[2, 3, 4, 2], [3, 6, 8, 4], [2, 4, 6, 3], [1, 2, 3, 2]];

const G2_INVERSE: [[i64; 2]; 2] = [[2, 1], [3, 2]];

/// Inverse Cartan matrix from closed-form entry formulas (parametric
/// families) or fixed tables (exceptional types). No elimination is done.
pub fn inverse_closed_form(algebra: LieAlgebraType) -> InverseCartanMatrix {
    let n = algebra.rank();
    let entry = |i: usize, j: usize| -> Rational {
        // 1-based indices inside the formulas
        let (i1, j1) = (i as i64 + 1, j as i64 + 1);
        let (lo, hi) = (i1.min(j1), i1.max(j1));
        let n = n as i64;
        match algebra.family() {
            Family::A => ratio(lo * (n + 1 - hi), n + 1),
            Family::B => {
                if i1 < n {
                    int(lo)
                } else {
                    ratio(j1, 2)
                }
            }
            Family::C => {
                if j1 < n {
                    int(lo)
                } else {
                    ratio(i1, 2)
                }
            }
            Family::D => {
                if hi <= n - 2 {
                    int(lo)
                } else if lo <= n - 2 {
                    ratio(lo, 2)
                } else if i1 != j1 {
                    ratio(n - 2, 4)
                } else {
                    ratio(n, 4)
                }
            }
            Family::E => match n {
                6 => ratio(E6_INVERSE[i][j].0, E6_INVERSE[i][j].1),
                7 => ratio(E7_INVERSE[i][j].0, E7_INVERSE[i][j].1),
                _ => int(E8_INVERSE[i][j]),
            },
            Family::F => int(F4_INVERSE[i][j]),
            Family::G => int(G2_INVERSE[i][j]),
        }
    };
    let entries = (0..n).map(|i| (0..n).map(|j| entry(i, j)).collect()).collect();
    InverseCartanMatrix { algebra, entries }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseReport {
    /// `cartan * inverse == I` exactly.
    pub identity_holds: bool,
    /// Every entry satisfies `0 < c[i][j] < 4n`.
    pub bound_holds: bool,
    /// Largest `|(cartan * inverse - I)[i][j]|`, 0-based `(i, j, value)`.
    pub max_deviation: (usize, usize, String),
    pub bound_violations: Vec<(usize, usize)>,
}

pub fn verify_inverse(cartan: &CartanMatrix, inv: &InverseCartanMatrix) -> Result<InverseReport> {
    let n = cartan.rank();
    if inv.rank() != n {
        return Err(TodaError::DimensionMismatch(format!(
            "Cartan matrix is {n}x{n}, inverse is {m}x{m}",
            m = inv.rank()
        )));
    }
    let product = matmul(&cartan.to_rational(), inv.entries());
    let mut worst = (0, 0, Rational::zero());
    for (i, row) in product.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let target = if i == j { int(1) } else { Rational::zero() };
            let dev = (x - target).abs();
            if dev > worst.2 {
                worst = (i, j, dev);
            }
        }
    }
    let upper = int(4 * n as i64);
    let bound_violations: Vec<_> = inv
        .entries()
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, c)| (i, j, c)))
        .filter(|(_, _, c)| !(c.is_positive() && **c < upper))
        .map(|(i, j, _)| (i, j))
        .collect();
    Ok(InverseReport {
        identity_holds: is_identity(&product),
        bound_holds: bound_violations.is_empty(),
        max_deviation: (worst.0, worst.1, format_pq(&worst.2)),
        bound_violations,
    })
}
