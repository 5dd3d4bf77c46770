//! Contract checks on a computed solution.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::map::{Density, FixedPointMap, TAIL_ANNULUS};
use super::mesh::{dist, Mesh};
use super::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractTolerances {
    /// Relative mass error.
    pub mass: f64,
    /// Oscillation of `u_i + beta_i log|x|` on the outer annulus.
    pub decay: f64,
    /// Bound on the relative L1 norm of the PDE residual, per `h^2`.
    pub residual_per_h2: f64,
    /// Oscillation of the Kelvin transform near the origin.
    pub kelvin: f64,
}

impl Default for ContractTolerances {
    fn default() -> Self {
        Self {
            mass: 1e-2,
            decay: 5e-2,
            residual_per_h2: 5.0,
            kelvin: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCheck {
    pub component: usize,
    pub computed: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub component: usize,
    pub min: f64,
    pub max: f64,
    pub oscillation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualCheck {
    pub component: usize,
    pub relative_l1: f64,
    pub bound: f64,
    pub nodes: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KelvinCheck {
    pub component: usize,
    /// `|x|` range of the sampled points near the origin.
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub sup: f64,
    pub oscillation: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractReport {
    pub mass: Vec<MassCheck>,
    pub decay: Vec<DecayCheck>,
    pub residual: Vec<ResidualCheck>,
    pub kelvin: Vec<KelvinCheck>,
    pub all_pass: bool,
}

pub fn verify_solution(map: &FixedPointMap, solution: &Solution, tol: &ContractTolerances) -> ContractReport {
    verify_fields(map, &solution.u, tol)
}

/// Checks on arbitrary fields `u`, e.g. a perturbed solution.
pub fn verify_fields(map: &FixedPointMap, u: &[Vec<f64>], tol: &ContractTolerances) -> ContractReport {
    let mesh = map.mesh;
    let problem = map.problem;
    let n = problem.rank();
    let annulus = mesh.annulus(TAIL_ANNULUS * mesh.radius, mesh.radius);
    let densities: Vec<Density> = (0..n)
        .map(|i| {
            let values = map.weights.k[i].iter().zip(&u[i]).map(|(k, u)| k * (2.0 * u).exp()).collect();
            Density::fit(mesh, values, &annulus)
        })
        .collect();

    let mass = (0..n)
        .map(|i| {
            let computed = densities[i].total_mass(mesh);
            let expected = 2.0 * PI * problem.beta_bar[i];
            let relative_error = ((computed - expected) / expected).abs();
            MassCheck {
                component: i + 1,
                computed,
                expected,
                relative_error,
                pass: relative_error < tol.mass,
            }
        })
        .collect::<Vec<_>>();

    let decay = (0..n)
        .map(|i| {
            let (min, max) = annulus
                .iter()
                .map(|&k| {
                    let x = mesh.nodes[k];
                    u[i][k] + problem.beta_total[i] * x[0].hypot(x[1]).ln()
                })
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let oscillation = max - min;
            DecayCheck {
                component: i + 1,
                min,
                max,
                oscillation,
                pass: oscillation.is_finite() && oscillation < tol.decay,
            }
        })
        .collect::<Vec<_>>();

    let bound = tol.residual_per_h2 * mesh.resolution * mesh.resolution;
    let residual = pde_residual(map, u, &densities, bound);
    let kelvin = kelvin_check(mesh, u, &problem.beta_total, tol.kelvin);
    let all_pass = mass.iter().all(|m| m.pass)
        && decay.iter().all(|d| d.pass)
        && residual.iter().all(|r| r.pass)
        && kelvin.iter().all(|k| k.bounded);
    ContractReport {
        mass,
        decay,
        residual,
        kelvin,
        all_pass,
    }
}

const NEIGHBORS: usize = 20;

/// Background nodes whose neighborhood is regular enough for a local fit.
fn residual_nodes(mesh: &Mesh) -> Vec<usize> {
    let h = mesh.resolution;
    (0..mesh.background_count)
        .filter(|&k| {
            let x = mesh.nodes[k];
            !mesh.clipped[k]
                && mesh.radial(k) <= mesh.uniform_radius - 2.0 * h
                && mesh.patches.iter().all(|p| dist(x, p.center) >= p.radius + 2.0 * h)
        })
        .collect()
}

/// Laplacian at a node from a least-squares cubic fit over its nearest
/// background neighbors.
fn laplacians(mesh: &Mesh, nodes: &[usize], fields: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let candidates: Vec<usize> = (0..mesh.background_count).filter(|k| !mesh.clipped[*k]).collect();
    let per_node: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&k| {
            let x = mesh.nodes[k];
            let mut near: Vec<(f64, usize)> = candidates
                .iter()
                .filter(|&&j| j != k)
                .map(|&j| (dist(x, mesh.nodes[j]), j))
                .collect();
            near.select_nth_unstable_by(NEIGHBORS, |a, b| a.0.total_cmp(&b.0));
            near.truncate(NEIGHBORS);
            let h = mesh.resolution;
            let design = DMatrix::from_fn(NEIGHBORS, 9, |row, col| {
                let y = mesh.nodes[near[row].1];
                let (dx, dy) = ((y[0] - x[0]) / h, (y[1] - x[1]) / h);
                [dx, dy, dx * dx, dx * dy, dy * dy, dx * dx * dx, dx * dx * dy, dx * dy * dy, dy * dy * dy][col]
            });
            let svd = design.svd(true, true);
            fields
                .iter()
                .map(|f| {
                    let rhs = DVector::from_fn(NEIGHBORS, |row, _| f[near[row].1] - f[k]);
                    match svd.solve(&rhs, 1e-12) {
                        Ok(c) => 2.0 * (c[2] + c[4]) / (h * h),
                        Err(_) => f64::NAN,
                    }
                })
                .collect()
        })
        .collect();
    (0..fields.len())
        .map(|i| per_node.iter().map(|v| v[i]).collect())
        .collect()
}

fn pde_residual(map: &FixedPointMap, u: &[Vec<f64>], densities: &[Density], tol: f64) -> Vec<ResidualCheck> {
    let mesh = map.mesh;
    let n = u.len();
    let nodes = residual_nodes(mesh);
    let lap = laplacians(mesh, &nodes, u);
    (0..n)
        .map(|i| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (idx, &k) in nodes.iter().enumerate() {
                let source: f64 = (0..n).map(|j| map.problem.cartan[i][j] * densities[j].values[k]).sum();
                num += mesh.weights[k] * (-lap[i][idx] - source).abs();
                den += mesh.weights[k] * source.abs();
            }
            let relative_l1 = if den > 0.0 { num / den } else { num };
            ResidualCheck {
                component: i + 1,
                relative_l1,
                bound: tol,
                nodes: nodes.len(),
                pass: relative_l1.is_finite() && relative_l1 < tol,
            }
        })
        .collect()
}

/// Kelvin transform `u_i(x / |x|^2) - beta_i log|x|` sampled at the images
/// of nodes outside the uniform region, i.e. on `|x| <= 1 / r_c`.
pub fn kelvin_check(mesh: &Mesh, u: &[Vec<f64>], beta_total: &[f64], tol: f64) -> Vec<KelvinCheck> {
    let far: Vec<usize> = (0..mesh.len())
        .filter(|&k| {
            let x = mesh.nodes[k];
            x[0].hypot(x[1]) >= mesh.uniform_radius
        })
        .collect();
    let r_max = far
        .iter()
        .map(|&k| mesh.nodes[k][0].hypot(mesh.nodes[k][1]))
        .fold(mesh.uniform_radius, f64::max);
    (0..u.len())
        .map(|i| {
            let values: Vec<f64> = far
                .iter()
                .map(|&k| {
                    let y = mesh.nodes[k];
                    u[i][k] + beta_total[i] * y[0].hypot(y[1]).ln()
                })
                .collect();
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
            let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let oscillation = hi - lo;
            KelvinCheck {
                component: i + 1,
                inner_radius: 1.0 / r_max,
                outer_radius: 1.0 / mesh.uniform_radius,
                sup,
                oscillation,
                bounded: !values.is_empty() && sup.is_finite() && oscillation <= tol,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialFit {
    pub lambda: f64,
    /// Sup error against the fitted closed form on `|x| <= r_max`.
    pub sup_error: f64,
}

/// `log 2 / 2 + log(lambda / (1 + lambda^2 |x|^2))`
pub fn radial_profile(lambda: f64, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    0.5 * 2f64.ln() + (lambda / (1.0 + lambda * lambda * r2)).ln()
}

/// Least-squares fit of the dilation parameter of the entire radial solution
/// of `-Delta u = 2 e^{2u}` on `|x| <= r_max`.
pub fn fit_radial_benchmark(mesh: &Mesh, u: &[f64], r_max: f64) -> RadialFit {
    let nodes: Vec<usize> = (0..mesh.len())
        .filter(|&k| {
            let x = mesh.nodes[k];
            x[0].hypot(x[1]) <= r_max
        })
        .collect();
    let cost = |s: f64| -> f64 {
        let lambda = s.exp();
        nodes
            .iter()
            .map(|&k| mesh.weights[k] * (u[k] - radial_profile(lambda, mesh.nodes[k])).powi(2))
            .sum()
    };
    // golden-section search on log(lambda)
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-4.0f64, 4.0f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    let lambda = (0.5 * (a + b)).exp();
    let sup_error = nodes
        .iter()
        .map(|&k| (u[k] - radial_profile(lambda, mesh.nodes[k])).abs())
        .fold(0.0, f64::max);
    RadialFit { lambda, sup_error }
}
