//! Local-mass (Pohozaev) identities at a blow-up point.
//!
//! For a Cartan matrix `A` with positive symmetrizer `d` (so `diag(d) A` is
//! symmetric) the identity reads
//!
//! ```text
//! sigma^T Q sigma = sum_i d_i mu_i sigma_i,    Q = diag(d) A / 2
//! ```
//!
//! which reproduces the per-type displays, e.g. `3 s1^2 - 3 s1 s2 + s2^2 =
//! 3 mu1 s1 + mu2 s2` for `G_2`. Because `Q_ii = d_i` and `Q_ij <= 0` off the
//! diagonal, every nonzero nonnegative root has some `sigma_i >= mu_i`.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Family, LieAlgebraType};
use crate::cartan::build_cartan;
use crate::conditions::SingularityData;
use crate::error::{Result, TodaError};
use crate::rational::{int, to_f64, Rational};

/// Residual tolerance a polished root must meet.
pub const ROOT_TOLERANCE: f64 = 1e-9;
/// Default subdivision step along the solved coordinate.
pub const DEFAULT_STEP: f64 = 1e-2;
/// Slack when comparing a polished root coordinate with its weight.
pub const WITNESS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PohozaevForm {
    algebra: LieAlgebraType,
    quadratic: Vec<Vec<Rational>>,
    linear: Vec<Rational>,
    min_eigenvalue: f64,
    quadratic_f64: Vec<Vec<f64>>,
    linear_f64: Vec<f64>,
}

impl PohozaevForm {
    fn from_parts(algebra: LieAlgebraType, quadratic: Vec<Vec<Rational>>, linear: Vec<Rational>) -> Self {
        let quadratic_f64: Vec<Vec<f64>> = quadratic.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let n = quadratic.len();
        let m = DMatrix::from_fn(n, n, |i, j| quadratic_f64[i][j]);
        let min_eigenvalue = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            algebra,
            linear_f64: linear.iter().map(to_f64).collect(),
            quadratic,
            linear,
            min_eigenvalue,
            quadratic_f64,
        }
    }

    pub fn algebra(&self) -> LieAlgebraType {
        self.algebra
    }

    pub fn rank(&self) -> usize {
        self.linear.len()
    }

    /// Symmetric `Q`.
    pub fn quadratic(&self) -> &[Vec<Rational>] {
        &self.quadratic
    }

    /// Positive weights `d`.
    pub fn linear(&self) -> &[Rational] {
        &self.linear
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue >= -1e-12
    }

    /// `sigma^T Q sigma - sum_i d_i mu_i sigma_i`
    pub fn evaluate(&self, sigma: &[f64], mu: &[f64]) -> f64 {
        let n = self.rank();
        let mut quad = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.quadratic_f64[i][j] * sigma[j]).sum();
            quad += sigma[i] * row;
        }
        let lin: f64 = (0..n).map(|i| self.linear_f64[i] * mu[i] * sigma[i]).sum();
        quad - lin
    }

    /// Partial derivative of [`Self::evaluate`] in coordinate `k`.
    fn derivative(&self, sigma: &[f64], mu: &[f64], k: usize) -> f64 {
        let row: f64 = (0..self.rank()).map(|j| self.quadratic_f64[k][j] * sigma[j]).sum();
        2.0 * row - self.linear_f64[k] * mu[k]
    }

    /// Human-readable identity, e.g. `3 s1^2 - 3 s1 s2 + s2^2 = 3 m1 s1 + m2 s2`.
    pub fn describe(&self) -> String {
        let n = self.rank();
        let mut lhs = Vec::new();
        let term = |coef: &Rational, body: String| -> (bool, String) {
            let neg = coef < &Rational::zero();
            let mag = if neg { -coef.clone() } else { coef.clone() };
            let c = if mag.is_one() { String::new() } else { format!("{mag} ") };
            (neg, format!("{c}{body}"))
        };
        for i in 0..n {
            if !self.quadratic[i][i].is_zero() {
                lhs.push(term(&self.quadratic[i][i], format!("s{}^2", i + 1)));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let c = &self.quadratic[i][j] * int(2);
                if !c.is_zero() {
                    lhs.push(term(&c, format!("s{} s{}", i + 1, j + 1)));
                }
            }
        }
        let rhs: Vec<_> = (0..n).map(|i| term(&self.linear[i], format!("m{} s{}", i + 1, i + 1))).collect();
        let join = |terms: Vec<(bool, String)>| {
            let mut out = String::new();
            for (k, (neg, body)) in terms.into_iter().enumerate() {
                match (k, neg) {
                    (0, false) => out.push_str(&body),
                    (0, true) => out.push_str(&format!("-{body}")),
                    (_, false) => out.push_str(&format!(" + {body}")),
                    (_, true) => out.push_str(&format!(" - {body}")),
                }
            }
            out
        };
        format!("{}: {} = {}", self.algebra, join(lhs), join(rhs))
    }
}

/// Smallest positive integer vector `d` with `diag(d) A` symmetric.
pub fn symmetrizer(algebra: LieAlgebraType) -> Vec<Rational> {
    let a = build_cartan(algebra);
    let n = a.rank();
    let mut d: Vec<Option<Rational>> = vec![None; n];
    d[0] = Some(int(1));
    // Dynkin diagrams are trees; propagate along edges
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if i != j && a.get(i, j) != 0 && d[j].is_none() {
                let di = d[i].clone().expect("visited");
                d[j] = Some(di * int(a.get(i, j)) / int(a.get(j, i)));
                stack.push(j);
            }
        }
    }
    let d: Vec<Rational> = d.into_iter().map(|x| x.expect("connected diagram")).collect();
    let lcm = d.iter().fold(num_bigint::BigInt::one(), |acc, x| {
        num_integer::Integer::lcm(&acc, x.denom())
    });
    d.into_iter().map(|x| x * Rational::from_integer(lcm.clone())).collect()
}

pub fn build_pohozaev_form(algebra: LieAlgebraType) -> PohozaevForm {
    let a = build_cartan(algebra);
    let d = symmetrizer(algebra);
    let n = a.rank();
    let half = Rational::new(1.into(), 2.into());
    let quadratic = (0..n)
        .map(|i| (0..n).map(|j| &d[i] * int(a.get(i, j)) * &half).collect())
        .collect();
    PohozaevForm::from_parts(algebra, quadratic, d)
}

/// Candidate local masses `sigma` with weights `mu_i = 1 - alpha_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMassVector {
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
}

impl LocalMassVector {
    pub fn new(sigma: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if sigma.len() != mu.len() {
            return Err(TodaError::DimensionMismatch(format!(
                "{} masses for {} weights",
                sigma.len(),
                mu.len()
            )));
        }
        if let Some(s) = sigma.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(TodaError::InvalidInput(format!("local mass {s} is negative or not finite")));
        }
        check_weights(&mu)?;
        Ok(Self { sigma, mu })
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().all(|s| *s == 0.0)
    }
}

fn check_weights(mu: &[f64]) -> Result<()> {
    match mu.iter().find(|m| !(**m > 0.0 && **m <= 1.0)) {
        Some(m) => Err(TodaError::InvalidInput(format!("weight mu = {m} is outside (0, 1]"))),
        None => Ok(()),
    }
}

/// Weights at a blow-up point: `1 - beta[i][l]` at the singular point `l`,
/// `1` at a regular point (`at = None`).
pub fn weights_at(data: &SingularityData, at: Option<usize>) -> Vec<f64> {
    (0..data.num_components())
        .map(|i| match at {
            Some(l) => to_f64(&(int(1) - &data.beta()[i][l])),
            None => 1.0,
        })
        .collect()
}

pub fn residual(form: &PohozaevForm, masses: &LocalMassVector) -> Result<f64> {
    if masses.sigma.len() != form.rank() {
        return Err(TodaError::DimensionMismatch(format!(
            "{} has rank {}, got {} masses",
            form.algebra(),
            form.rank(),
            masses.sigma.len()
        )));
    }
    Ok(form.evaluate(&masses.sigma, &masses.mu))
}

/// Search region for [`solve_masses`]. The box is `[0, upper_k]` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MassConstraints {
    pub upper: Vec<f64>,
    /// Coordinates held fixed at the given value.
    pub pinned: Vec<Option<f64>>,
    /// Subdivision step along the solved coordinate.
    pub step: f64,
    /// Grid points per sampled axis when more than one coordinate is free.
    pub samples_per_axis: usize,
    /// Hard cap on the number of sampled base points.
    pub max_samples: usize,
}

impl MassConstraints {
    pub fn cube(n: usize, upper: f64) -> Self {
        Self {
            upper: vec![upper; n],
            pinned: vec![None; n],
            step: DEFAULT_STEP,
            samples_per_axis: (upper / DEFAULT_STEP).round() as usize + 1,
            max_samples: 200_000,
        }
    }

    pub fn pin(mut self, k: usize, value: f64) -> Self {
        self.pinned[k] = Some(value);
        self
    }

    pub fn with_samples_per_axis(mut self, k: usize) -> Self {
        self.samples_per_axis = k;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassRoot {
    pub sigma: Vec<f64>,
    pub residual: f64,
    /// 0-based index with `sigma_i >= mu_i`; `None` only for the zero root.
    pub witness: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnresolvedCell {
    /// Base point with the solved coordinate set to the cell's left end.
    pub base: Vec<f64>,
    pub solved_coordinate: usize,
    pub interval: (f64, f64),
    pub best_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootSetKind {
    /// At most one free coordinate: the roots are isolated points.
    Isolated,
    /// The root set is a curve or surface; these are its intersections with
    /// lines through a grid of `samples_per_axis` points per sampled axis.
    SampledCurve { samples_per_axis: usize, base_points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassRoots {
    pub kind: RootSetKind,
    /// Lexicographically sorted, duplicates merged.
    pub roots: Vec<MassRoot>,
    pub unresolved: Vec<UnresolvedCell>,
}

impl MassRoots {
    pub fn contains(&self, sigma: &[f64], tol: f64) -> bool {
        self.roots
            .iter()
            .any(|r| r.sigma.iter().zip(sigma).all(|(a, b)| (a - b).abs() <= tol))
    }
}

enum CellOutcome {
    Root(f64),
    Unresolved(f64),
}

/// Roots of `r(t) = 0` on `[lo, hi]` by fixed-step subdivision with Newton
/// polishing. Sign changes are bracketed; cells where the derivative changes
/// sign are polished toward the critical point to catch tangential roots.
fn scan_line<R, D>(r: R, dr: D, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64, CellOutcome)>
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let cells = (((hi - lo) / step).ceil() as usize).max(1);
    let at = |k: usize| lo + (hi - lo) * (k as f64) / (cells as f64);
    let mut out = Vec::new();
    let mut prev_t = at(0);
    let mut prev_r = r(prev_t);
    let mut prev_d = dr(prev_t);
    if prev_r == 0.0 {
        out.push((prev_t, prev_t, CellOutcome::Root(prev_t)));
    }
    for k in 1..=cells {
        let t = at(k);
        let rt = r(t);
        let dt = dr(t);
        if rt == 0.0 {
            out.push((t, t, CellOutcome::Root(t)));
        } else if prev_r != 0.0 && prev_r.signum() != rt.signum() {
            out.push((prev_t, t, polish_bracketed(&r, &dr, prev_t, t, prev_r)));
        } else if prev_d.signum() != dt.signum() && prev_r != 0.0 {
            if let Some(outcome) = polish_tangent(&r, &dr, prev_t, t) {
                out.push((prev_t, t, outcome));
            }
        }
        prev_t = t;
        prev_r = rt;
        prev_d = dt;
    }
    out
}

fn polish_bracketed<R: Fn(f64) -> f64, D: Fn(f64) -> f64>(r: &R, dr: &D, mut a: f64, mut b: f64, ra: f64) -> CellOutcome {
    let mut t = 0.5 * (a + b);
    for _ in 0..200 {
        let rt = r(t);
        if rt == 0.0 {
            break;
        }
        if rt.signum() == ra.signum() {
            a = t;
        } else {
            b = t;
        }
        let d = dr(t);
        let newton = if d != 0.0 { t - rt / d } else { f64::NAN };
        let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - t).abs() <= 1e-15 * t.abs().max(1.0) {
            t = next;
            break;
        }
        t = next;
    }
    let res = r(t).abs();
    if res < ROOT_TOLERANCE {
        CellOutcome::Root(t)
    } else {
        CellOutcome::Unresolved(res)
    }
}

/// Newton on `r'` (the gradient of `r^2 / 2` vanishes where `r' = 0` or `r = 0`).
/// A settled critical point with `|r|` above the root tolerance means the
/// cell has no root; only a critical point that never settles is unresolved.
fn polish_tangent<R: Fn(f64) -> f64, D: Fn(f64) -> f64>(r: &R, dr: &D, a: f64, b: f64) -> Option<CellOutcome> {
    let h = 1e-6 * (b - a).max(1e-12);
    let mut t = 0.5 * (a + b);
    let mut settled = false;
    for _ in 0..100 {
        let d = dr(t);
        let dd = (dr(t + h) - dr(t - h)) / (2.0 * h);
        if d == 0.0 {
            settled = true;
            break;
        }
        if dd == 0.0 {
            break;
        }
        let next = (t - d / dd).clamp(a, b);
        if (next - t).abs() <= 1e-15 * t.abs().max(1.0) {
            t = next;
            settled = true;
            break;
        }
        t = next;
    }
    let res = r(t).abs();
    if res < ROOT_TOLERANCE {
        Some(CellOutcome::Root(t))
    } else if !settled && res < 1e3 * ROOT_TOLERANCE {
        Some(CellOutcome::Unresolved(res))
    } else {
        None
    }
}

/// Nonnegative roots of the local-mass identity inside the constraint box.
///
/// With at most one free coordinate the roots are isolated and all are
/// returned. Otherwise the last free coordinate is solved for along lines
/// through a regular grid over the remaining free coordinates.
pub fn solve_masses(form: &PohozaevForm, mu: &[f64], constraints: &MassConstraints) -> Result<MassRoots> {
    let n = form.rank();
    if mu.len() != n || constraints.upper.len() != n || constraints.pinned.len() != n {
        return Err(TodaError::DimensionMismatch(format!(
            "{} needs {n} weights, bounds and pins",
            form.algebra()
        )));
    }
    check_weights(mu)?;
    if !(constraints.step > 0.0) {
        return Err(TodaError::InvalidInput("subdivision step must be positive".into()));
    }
    if let Some(u) = constraints.upper.iter().find(|u| !(**u >= 0.0 && u.is_finite())) {
        return Err(TodaError::InvalidInput(format!("box bound {u} must be nonnegative")));
    }
    let free: Vec<usize> = (0..n).filter(|&k| constraints.pinned[k].is_none()).collect();
    let mut base = vec![0.0; n];
    for (k, p) in constraints.pinned.iter().enumerate() {
        if let Some(v) = p {
            if *v < 0.0 {
                return Err(TodaError::InvalidInput(format!("pinned mass {v} is negative")));
            }
            base[k] = *v;
        }
    }

    let Some((&solved, sampled)) = free.split_last() else {
        let res = form.evaluate(&base, mu);
        let roots = if res.abs() < ROOT_TOLERANCE {
            vec![make_root(form, mu, base)]
        } else {
            Vec::new()
        };
        return Ok(MassRoots {
            kind: RootSetKind::Isolated,
            roots,
            unresolved: Vec::new(),
        });
    };

    let mut per_axis = constraints.samples_per_axis.max(2);
    let dims = sampled.len() as u32;
    while dims > 0 && per_axis > 2 && (per_axis as f64).powi(dims as i32) > constraints.max_samples as f64 {
        per_axis -= 1;
    }
    let base_points = if dims == 0 { 1 } else { per_axis.pow(dims) };
    let kind = if dims == 0 {
        RootSetKind::Isolated
    } else {
        RootSetKind::SampledCurve {
            samples_per_axis: per_axis,
            base_points,
        }
    };

    let results: Vec<(Vec<MassRoot>, Vec<UnresolvedCell>)> = (0..base_points)
        .into_par_iter()
        .map(|index| {
            let mut point = base.clone();
            let mut rem = index;
            for &k in sampled {
                let step = rem % per_axis;
                rem /= per_axis;
                point[k] = constraints.upper[k] * (step as f64) / ((per_axis - 1) as f64);
            }
            let eval = |t: f64| {
                let mut p = point.clone();
                p[solved] = t;
                form.evaluate(&p, mu)
            };
            let deriv = |t: f64| {
                let mut p = point.clone();
                p[solved] = t;
                form.derivative(&p, mu, solved)
            };
            let mut roots = Vec::new();
            let mut unresolved = Vec::new();
            for (a, b, outcome) in scan_line(eval, deriv, 0.0, constraints.upper[solved], constraints.step) {
                match outcome {
                    CellOutcome::Root(t) => {
                        let mut p = point.clone();
                        p[solved] = t.max(0.0);
                        roots.push(make_root(form, mu, p));
                    }
                    CellOutcome::Unresolved(best) => {
                        let mut p = point.clone();
                        p[solved] = a;
                        unresolved.push(UnresolvedCell {
                            base: p,
                            solved_coordinate: solved,
                            interval: (a, b),
                            best_residual: best,
                        });
                    }
                }
            }
            (roots, unresolved)
        })
        .collect();

    let mut roots = Vec::new();
    let mut unresolved = Vec::new();
    for (r, u) in results {
        roots.extend(r);
        unresolved.extend(u);
    }
    roots.sort_by(|a, b| lex_cmp(&a.sigma, &b.sigma));
    roots.dedup_by(|a, b| a.sigma.iter().zip(&b.sigma).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0)));
    Ok(MassRoots {
        kind,
        roots,
        unresolved,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn make_root(form: &PohozaevForm, mu: &[f64], sigma: Vec<f64>) -> MassRoot {
    let residual = form.evaluate(&sigma, mu);
    let witness = find_witness(&sigma, mu);
    MassRoot {
        sigma,
        residual,
        witness,
    }
}

fn find_witness(sigma: &[f64], mu: &[f64]) -> Option<usize> {
    if sigma.iter().all(|s| *s == 0.0) {
        return None;
    }
    sigma.iter().zip(mu).position(|(s, m)| *s >= m - WITNESS_SLACK * m.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dichotomy {
    pub holds: bool,
    /// 0-based index with `sigma_i >= mu_i`.
    pub witness: Option<usize>,
}

/// Looks for an index with `sigma_i >= mu_i` at a nonzero root.
pub fn dichotomy_check(form: &PohozaevForm, masses: &LocalMassVector) -> Result<Dichotomy> {
    let res = residual(form, masses)?;
    if masses.is_zero() {
        return Err(TodaError::InvalidInput(
            "the dichotomy is only claimed for nonzero local masses".into(),
        ));
    }
    let scale = masses.sigma.iter().fold(1.0f64, |a, s| a.max(s * s));
    if res.abs() > 1e-6 * scale {
        return Err(TodaError::InvalidInput(format!(
            "masses are not a root of the identity (residual {res:e})"
        )));
    }
    let witness = find_witness(&masses.sigma, &masses.mu);
    Ok(Dichotomy {
        holds: witness.is_some(),
        witness,
    })
}

/// Rescaled `F_4` system with a symmetric coefficient matrix.
///
/// Shifting `u_3, u_4` by `log(2) / 2` doubles their densities, so the masses
/// become `(s1, s2, 2 s3, 2 s4)` and the coefficient matrix `a_ij / s_j`
/// is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedF4 {
    /// Coefficient matrix of the shifted system.
    pub coefficients: Vec<Vec<Rational>>,
    /// Per-component mass scale `s_i` (densities `e^{2 u_i}` become `s_i e^{2 u_i}`).
    pub scale: Vec<Rational>,
}

impl SymmetrizedF4 {
    /// Additive shift applied to each component, `log(s_i) / 2`.
    pub fn field_offsets(&self) -> Vec<f64> {
        self.scale.iter().map(|s| 0.5 * to_f64(s).ln()).collect()
    }

    pub fn shift_fields(&self, fields: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if fields.len() != 4 {
            return Err(TodaError::DimensionMismatch("F4 fields have four components".into()));
        }
        Ok(fields
            .iter()
            .zip(self.field_offsets())
            .map(|(u, off)| u.iter().map(|x| x + off).collect())
            .collect())
    }

    pub fn shift_masses(&self, masses: &LocalMassVector) -> Result<LocalMassVector> {
        if masses.sigma.len() != 4 {
            return Err(TodaError::DimensionMismatch("F4 masses have four components".into()));
        }
        let sigma = masses.sigma.iter().zip(&self.scale).map(|(s, k)| s * to_f64(k)).collect();
        Ok(LocalMassVector {
            sigma,
            mu: masses.mu.clone(),
        })
    }

    /// Identity of the symmetric system in shifted masses:
    /// `sigma_hat^T (S / 2) sigma_hat = sum_i mu_i sigma_hat_i`.
    pub fn shifted_form(&self) -> PohozaevForm {
        let half = Rational::new(1.into(), 2.into());
        let quadratic = self
            .coefficients
            .iter()
            .map(|row| row.iter().map(|s| s * &half).collect())
            .collect();
        PohozaevForm::from_parts(
            LieAlgebraType::new(Family::F, 4).expect("F4"),
            quadratic,
            vec![int(1); 4],
        )
    }

    /// The shifted identity rewritten in the original masses.
    pub fn pulled_back_form(&self) -> PohozaevForm {
        let shifted = self.shifted_form();
        let quadratic = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| &self.scale[i] * &shifted.quadratic()[i][j] * &self.scale[j])
                    .collect()
            })
            .collect();
        let linear = (0..4).map(|i| &self.scale[i] * &shifted.linear()[i]).collect();
        PohozaevForm::from_parts(shifted.algebra(), quadratic, linear)
    }
}

pub fn symmetrize_f4(algebra: LieAlgebraType) -> Result<SymmetrizedF4> {
    if algebra.family() != Family::F {
        return Err(TodaError::WrongAlgebra(format!("symmetrization is defined for F4, not {algebra}")));
    }
    let a = build_cartan(algebra);
    let scale = symmetrizer(algebra);
    let coefficients = (0..4)
        .map(|i| (0..4).map(|j| int(a.get(i, j)) / &scale[j]).collect())
        .collect();
    Ok(SymmetrizedF4 { coefficients, scale })
}
