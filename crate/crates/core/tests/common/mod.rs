#![allow(dead_code)]

use num_traits::{One, Zero};
use toda_forge_core::rational::{int, Rational};
use toda_forge_core::{Family, LieAlgebraType};

/// Gauss-Jordan inverse over the rationals, `None` when singular.
pub fn gauss_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    m.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

/// Families A-D at ranks up to `max_rank` plus the five exceptional algebras.
pub fn all_algebras(max_rank: usize) -> Vec<LieAlgebraType> {
    let mut out = Vec::new();
    for (family, min) in [(Family::A, 1), (Family::B, 2), (Family::C, 2), (Family::D, 3)] {
        for r in min..=max_rank {
            out.push(LieAlgebraType::new(family, r).unwrap());
        }
    }
    for (family, r) in [(Family::E, 6), (Family::E, 7), (Family::E, 8), (Family::F, 4), (Family::G, 2)] {
        out.push(LieAlgebraType::new(family, r).unwrap());
    }
    out
}
