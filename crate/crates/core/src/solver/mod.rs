//! Numerical construction of solutions through the Green-kernel fixed-point
//! map.
//!
//! Solutions are written `u_i = v_i + c_i + beta_i u_0` where `u_0` is a
//! smooth profile equal to `-log|x|` outside the unit disk, `v` is a fixed
//! point of the map and `c_i` normalizes `int K_bar_i e^{2(v_i + c_i)}` to
//! `2 pi beta_bar_i`. The plane is truncated at radius `R`; beyond it each
//! density is modelled as `tau |x|^{-4}`.

mod map;
mod mesh;
mod verify;

use serde::Serialize;

pub use map::{normalization_constant, Density, FixedPointMap, MapOutput, WeightField, MAX_NODES, TAIL_ANNULUS};
pub use mesh::{build_mesh, Mesh, MeshConfig, Patch};
pub use verify::{
    fit_radial_benchmark, kelvin_check, radial_profile, verify_fields, verify_solution, ContractReport, ContractTolerances, DecayCheck,
    KelvinCheck, MassCheck, RadialFit, ResidualCheck,
};

use crate::algebra::LieAlgebraType;
use crate::cartan::build_cartan;
use crate::conditions::{check_existence_condition, summarize, SingularityData};
use crate::error::{Result, TodaError};

/// The data the solver needs, in floating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverProblem {
    pub algebra: LieAlgebraType,
    pub cartan: Vec<Vec<f64>>,
    pub points: Vec<[f64; 2]>,
    pub beta: Vec<Vec<f64>>,
    pub beta_total: Vec<f64>,
    pub beta_bar: Vec<f64>,
    /// Whether the exponents satisfy the existence condition. The solver
    /// still runs when they do not.
    pub existence: bool,
}

impl SolverProblem {
    pub fn new(data: &SingularityData, algebra: LieAlgebraType) -> Result<Self> {
        let points = data
            .points()
            .ok_or_else(|| TodaError::InvalidInput("the solver needs the singular points".into()))?
            .to_vec();
        let summary = summarize(data, algebra)?;
        let existence = check_existence_condition(data, algebra)?.verdict;
        if !existence {
            log::warn!("exponents violate the existence condition; running in exploration mode");
        }
        let cartan = build_cartan(algebra).to_f64();
        Ok(Self {
            algebra,
            cartan,
            points,
            beta: data.beta_f64(),
            beta_total: summary.beta_total_f64(),
            beta_bar: summary.beta_bar_f64(),
            existence,
        })
    }

    pub fn rank(&self) -> usize {
        self.beta_total.len()
    }

    /// Replaces the coupling matrix (e.g. by zero to test the plumbing).
    pub fn with_coupling(mut self, cartan: Vec<Vec<f64>>) -> Self {
        self.cartan = cartan;
        self
    }

    /// Largest exponent at each singular point.
    pub fn point_exponents(&self) -> Vec<f64> {
        (0..self.points.len())
            .map(|l| self.beta.iter().map(|row| row[l]).fold(0.0, f64::max))
            .collect()
    }

    pub fn translated(&self, t: [f64; 2]) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p[0] += t[0];
            p[1] += t[1];
        }
        out
    }
}

fn smoothstep(s: f64) -> f64 {
    // C-infinity transition from 0 (s <= 0) to 1 (s >= 1)
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = f(s);
    let b = f(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Smooth reference profile, `-log|x|` for `|x| >= 1`.
pub fn reference_profile(x: [f64; 2]) -> f64 {
    let t = x[0] * x[0] + x[1] * x[1];
    if t >= 1.0 {
        return -0.5 * t.ln();
    }
    let s = smoothstep((t - 0.25) / 0.75);
    -0.5 * (s * t + (1.0 - s) * 0.5).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub mesh: MeshConfig,
    /// Damping: `v <- (1 - theta) v + theta T(v)`.
    pub theta: f64,
    /// Stop when the sup-norm step falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Pin the dilation gauge when the problem is dilation invariant
    /// (at most one singular point).
    pub gauge: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig::default(),
            theta: 0.5,
            tol: 1e-6,
            max_iters: 500,
            gauge: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The step grew tenfold over 20 iterations.
    Diverged,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub step: f64,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub iterations: usize,
    /// `u_i` at the mesh nodes.
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub history: Vec<IterationRecord>,
    /// Sup norm of the last gauge correction divided by the damping, i.e.
    /// the remaining residual `T(v) - v`, when the dilation gauge was pinned.
    pub gauge_force: Option<f64>,
    /// Set when the iteration stopped on an error.
    pub diagnostic: Option<String>,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

const DIVERGENCE_WINDOW: usize = 20;
const DIVERGENCE_FACTOR: f64 = 10.0;

/// Damped Picard iteration from `v = 0`.
pub fn iterate(map: &FixedPointMap, config: &SolverConfig) -> Result<Solution> {
    let v0 = vec![vec![0.0; map.mesh.len()]; map.problem.rank()];
    iterate_from(map, config, v0)
}

pub fn iterate_from(map: &FixedPointMap, config: &SolverConfig, v0: Vec<Vec<f64>>) -> Result<Solution> {
    if !(config.theta > 0.0 && config.theta <= 1.0) {
        return Err(TodaError::InvalidInput(format!("damping {} is outside (0, 1]", config.theta)));
    }
    if !(config.tol > 0.0) {
        return Err(TodaError::InvalidInput("tolerance must be positive".into()));
    }
    let n = map.problem.rank();
    let len = map.mesh.len();
    if v0.len() != n || v0.iter().any(|c| c.len() != len) {
        return Err(TodaError::DimensionMismatch("initial iterate does not match the mesh".into()));
    }
    let mut x: Vec<f64> = v0.concat();
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut diagnostic = None;
    let mut gauge = if config.gauge && map.problem.points.len() <= 1 {
        Some(Gauge::new(map.mesh))
    } else {
        None
    };
    let mut gauge_force = None;
    let split = |x: &[f64]| -> Vec<Vec<f64>> { x.chunks(len).map(<[f64]>::to_vec).collect() };
    for it in 1..=config.max_iters {
        let out = match map.apply(&split(&x)) {
            Ok(out) => out,
            Err(e @ TodaError::Numerical(_)) => {
                status = SolveStatus::NonFinite;
                diagnostic = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let mut next: Vec<f64> = out
            .v_bar
            .concat()
            .iter()
            .zip(&x)
            .map(|(t, v)| (1.0 - config.theta) * v + config.theta * t)
            .collect();
        if let Some(g) = gauge.as_mut() {
            let force = g.correct(map, &out, &mut next);
            gauge_force = Some(force / config.theta);
        }
        let step = next.iter().zip(&x).fold(0.0f64, |a, (n, v)| a.max((n - v).abs()));
        history.push(IterationRecord {
            iteration: it,
            step,
            c: out.c.clone(),
        });
        log::debug!("iteration {it}: step {step:.3e}");
        if !step.is_finite() {
            status = SolveStatus::NonFinite;
            diagnostic = Some(format!("non-finite step at iteration {it}"));
            break;
        }
        if step < config.tol {
            status = SolveStatus::Converged;
            break;
        }
        if it > DIVERGENCE_WINDOW && step > DIVERGENCE_FACTOR * history[it - 1 - DIVERGENCE_WINDOW].step {
            status = SolveStatus::Diverged;
            diagnostic = Some(format!(
                "step grew from {:.3e} to {step:.3e} over {DIVERGENCE_WINDOW} iterations",
                history[it - 1 - DIVERGENCE_WINDOW].step
            ));
            break;
        }
        x = next;
    }
    let v = split(&x);
    let mut c = vec![0.0; n];
    for (j, vj) in v.iter().enumerate() {
        match map.normalize(j, vj) {
            Ok((cj, _)) => c[j] = cj,
            Err(e) => {
                status = SolveStatus::NonFinite;
                diagnostic.get_or_insert(e.to_string());
            }
        }
    }
    let u = assemble(map, &v, &c);
    Ok(Solution {
        status,
        iterations: history.len(),
        u,
        v,
        c,
        history,
        gauge_force,
        diagnostic,
    })
}

/// Phase condition fixing the dilation gauge about the mesh center.
///
/// With at most one singular point the continuous problem is invariant under
/// `u(x) -> u(p + s (x - p)) + const`, so fixed points come in a family and
/// the discretized map drifts along it. Each damped step is corrected along
/// the dilation generator `(x - p) . grad u` so that the difference of the
/// mean of `v` over `|x - p| <= 1/2` and over `1 <= |x - p| <= 2` keeps the
/// value set by the first step.
struct Gauge {
    inner: Vec<usize>,
    outer: Vec<usize>,
    target: Option<f64>,
}

impl Gauge {
    fn new(mesh: &Mesh) -> Self {
        let near = |lo: f64, hi: f64| -> Vec<usize> {
            (0..mesh.len())
                .filter(|&k| {
                    let r = mesh.radial(k);
                    r >= lo && r <= hi
                })
                .collect()
        };
        Self {
            inner: near(0.0, 0.5),
            outer: near(1.0, 2.0),
            target: None,
        }
    }

    fn functional(&self, mesh: &Mesh, x: &[f64]) -> f64 {
        let len = mesh.len();
        let mean = |set: &[usize], comp: &[f64]| -> f64 {
            let w: f64 = set.iter().map(|&k| mesh.weights[k]).sum();
            set.iter().map(|&k| mesh.weights[k] * comp[k]).sum::<f64>() / w
        };
        x.chunks(len).map(|c| mean(&self.inner, c) - mean(&self.outer, c)).sum()
    }

    /// Applies the correction in place and returns its sup norm.
    fn correct(&mut self, map: &FixedPointMap, out: &MapOutput, next: &mut [f64]) -> f64 {
        let mesh = map.mesh;
        let g = self.functional(mesh, next);
        let Some(target) = self.target else {
            self.target = Some(g);
            return 0.0;
        };
        let d = dilation_generator(map, out);
        let gd = self.functional(mesh, &d);
        if gd.abs() < 1e-300 {
            return 0.0;
        }
        let t = (target - g) / gd;
        let mut sup = 0.0f64;
        for (n, dk) in next.iter_mut().zip(&d) {
            *n += t * dk;
            sup = sup.max((t * dk).abs());
        }
        sup
    }
}

/// `(x - c) . grad u_i` at every node, from the kernel representation of `u`.
fn dilation_generator(map: &FixedPointMap, out: &MapOutput) -> Vec<f64> {
    use rayon::prelude::*;
    let mesh = map.mesh;
    let n = map.problem.rank();
    let c = mesh.center;
    let radial: Vec<Vec<f64>> = out
        .densities
        .iter()
        .map(|d| {
            let q: Vec<f64> = d.values.iter().zip(&mesh.weights).map(|(r, w)| r * w).collect();
            (0..mesh.len())
                .into_par_iter()
                .map(|k| {
                    let x = mesh.nodes[k];
                    let (px, py) = (x[0] - c[0], x[1] - c[1]);
                    let mut s = 0.0;
                    for (m, y) in mesh.nodes.iter().enumerate() {
                        if m == k {
                            continue;
                        }
                        let (dx, dy) = (x[0] - y[0], x[1] - y[1]);
                        s -= (px * dx + py * dy) / (dx * dx + dy * dy) * q[m];
                    }
                    s
                })
                .collect()
        })
        .collect();
    (0..n)
        .flat_map(|i| {
            let radial = &radial;
            (0..mesh.len()).map(move |k| {
                (0..n).map(|j| map.problem.cartan[i][j] * radial[j][k]).sum::<f64>() / (2.0 * std::f64::consts::PI)
            })
        })
        .collect()
}

/// `u_i = v_i + c_i + beta_i u_0`.
pub fn assemble(map: &FixedPointMap, v: &[Vec<f64>], c: &[f64]) -> Vec<Vec<f64>> {
    v.iter()
        .enumerate()
        .map(|(i, vi)| {
            vi.iter()
                .zip(map.reference())
                .map(|(v, u0)| v + c[i] + map.problem.beta_total[i] * u0)
                .collect()
        })
        .collect()
}

/// Builds the mesh for a problem.
pub fn mesh_for(problem: &SolverProblem, config: &MeshConfig) -> Result<Mesh> {
    build_mesh(&problem.points, &problem.point_exponents(), config)
}
