//! Discretized fixed-point map.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::mesh::{dist, Mesh};
use super::{reference_profile, SolverProblem};
use crate::error::{Result, TodaError};

/// Inner edge of the annulus used to fit the far-field density, as a fraction of R.
pub const TAIL_ANNULUS: f64 = 0.75;

/// `K_i` and `K_bar_i = K_i exp(2 beta_i u_0)` at the mesh nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightField {
    pub k: Vec<Vec<f64>>,
    pub k_bar: Vec<Vec<f64>>,
}

impl WeightField {
    pub fn new(mesh: &Mesh, problem: &SolverProblem) -> Result<Self> {
        let n = problem.rank();
        let mut k = vec![vec![0.0; mesh.len()]; n];
        let mut k_bar = vec![vec![0.0; mesh.len()]; n];
        for (node, x) in mesh.nodes.iter().enumerate() {
            let u0 = reference_profile(*x);
            for i in 0..n {
                let mut log_k = 0.0;
                for (l, p) in problem.points.iter().enumerate() {
                    let b = problem.beta[i][l];
                    if b != 0.0 {
                        log_k -= 2.0 * b * dist(*x, *p).ln();
                    }
                }
                k[i][node] = log_k.exp();
                k_bar[i][node] = (log_k + 2.0 * problem.beta_total[i] * u0).exp();
                if !(k[i][node] > 0.0 && k[i][node].is_finite() && k_bar[i][node].is_finite()) {
                    return Err(TodaError::Numerical(format!(
                        "weight K_{} is not positive and finite at node {node} ({:.3e}, {:.3e})",
                        i + 1,
                        x[0],
                        x[1]
                    )));
                }
            }
        }
        Ok(Self { k, k_bar })
    }

    /// Range of `|x|^4 K_bar_i` over the outer annulus; a bounded, nearly
    /// constant range reflects `K_bar_i = O(|x|^{-4})`.
    pub fn far_decay(&self, mesh: &Mesh, i: usize) -> (f64, f64) {
        mesh.annulus(TAIL_ANNULUS * mesh.radius, mesh.radius)
            .into_iter()
            .map(|k| self.k_bar[i][k] * mesh.radial(k).powi(4))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// `c = log(2 pi beta_bar / integral) / 2`, the constant with
/// `integral * exp(2c) = 2 pi beta_bar`.
pub fn normalization_constant(integral: f64, beta_bar: f64) -> Result<f64> {
    if !(beta_bar > 0.0) {
        return Err(TodaError::AssumptionViolated(format!(
            "normalization needs beta_bar > 0, got {beta_bar}"
        )));
    }
    if !(integral > 0.0 && integral.is_finite()) {
        return Err(TodaError::Numerical(format!("density integral {integral} is not positive and finite")));
    }
    Ok(0.5 * (2.0 * PI * beta_bar / integral).ln())
}

/// Density of one component with its far-field model `rho ~ tau |x|^{-4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub values: Vec<f64>,
    pub tau: f64,
    pub radius: f64,
}

impl Density {
    /// Integral beyond the truncation radius.
    pub fn tail_mass(&self) -> f64 {
        PI * self.tau / (self.radius * self.radius)
    }

    /// `int_{|y| > R} log(1/|y|) rho dy`, which is also the tail's log
    /// potential at any point inside the disk.
    pub fn tail_log_moment(&self) -> f64 {
        -PI * self.tau * (2.0 * self.radius.ln() + 1.0) / (2.0 * self.radius * self.radius)
    }

    pub fn total_mass(&self, mesh: &Mesh) -> f64 {
        mesh.integrate(&self.values) + self.tail_mass()
    }

    pub fn fit(mesh: &Mesh, values: Vec<f64>, annulus: &[usize]) -> Self {
        let mut num = 0.0;
        let mut den = 0.0;
        for &k in annulus {
            num += mesh.weights[k] * values[k] * mesh.radial(k).powi(4);
            den += mesh.weights[k];
        }
        let tau = if den > 0.0 { num / den } else { 0.0 };
        Self {
            values,
            tau,
            radius: mesh.radius,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            tau: self.tau * factor,
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapOutput {
    pub v_bar: Vec<Vec<f64>>,
    /// `c_{j, v_j}` for the input.
    pub c: Vec<f64>,
    /// Normalized densities `K_bar_j exp(2 (v_j + c_j))`.
    pub densities: Vec<Density>,
}

impl MapOutput {
    pub fn masses(&self, mesh: &Mesh) -> Vec<f64> {
        self.densities.iter().map(|d| d.total_mass(mesh)).collect()
    }
}

/// Log kernel on the mesh with the diagonal replaced by the cell integral.
pub struct FixedPointMap<'a> {
    pub mesh: &'a Mesh,
    pub problem: &'a SolverProblem,
    pub weights: WeightField,
    kernel: Vec<f32>,
    u0: Vec<f64>,
    annulus: Vec<usize>,
}

/// Nodes beyond this count would need more than ~6 GB of kernel storage.
pub const MAX_NODES: usize = 40_000;

/// `int_{disk of area w} log(1/|y|) dy / w` for a disk centered at the node.
fn self_cell(w: f64) -> f64 {
    let a = (w / PI).sqrt();
    0.5 - a.ln()
}

impl<'a> FixedPointMap<'a> {
    pub fn new(mesh: &'a Mesh, problem: &'a SolverProblem) -> Result<Self> {
        let n = mesh.len();
        if n > MAX_NODES {
            return Err(TodaError::Grid(format!("{n} nodes exceed the limit of {MAX_NODES}")));
        }
        let weights = WeightField::new(mesh, problem)?;
        let mut kernel = vec![0f32; n * n];
        kernel.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let x = mesh.nodes[i];
            for (k, out) in row.iter_mut().enumerate() {
                *out = if k == i {
                    self_cell(mesh.weights[i]) as f32
                } else {
                    (-dist(x, mesh.nodes[k]).ln()) as f32
                };
            }
        });
        let u0 = mesh.nodes.iter().map(|x| reference_profile(*x)).collect();
        let annulus = mesh.annulus(TAIL_ANNULUS * mesh.radius, mesh.radius);
        Ok(Self {
            mesh,
            problem,
            weights,
            kernel,
            u0,
            annulus,
        })
    }

    pub fn reference(&self) -> &[f64] {
        &self.u0
    }

    /// Normalized density of component `j` for the iterate `v`.
    pub fn normalize(&self, j: usize, v: &[f64]) -> Result<(f64, Density)> {
        let raw: Vec<f64> = self.weights.k_bar[j].iter().zip(v).map(|(kb, v)| kb * (2.0 * v).exp()).collect();
        if let Some(node) = raw.iter().position(|x| !x.is_finite()) {
            return Err(TodaError::Numerical(format!(
                "exp(2 v_{}) overflowed at node {node}",
                j + 1
            )));
        }
        let raw = Density::fit(self.mesh, raw, &self.annulus);
        let c = normalization_constant(raw.total_mass(self.mesh), self.problem.beta_bar[j])?;
        Ok((c, raw.scaled((2.0 * c).exp())))
    }

    /// `int log(1/|x - y|) rho(y) dy` at every node, tail included.
    pub fn log_potential(&self, density: &Density) -> Vec<f64> {
        let n = self.mesh.len();
        let q: Vec<f64> = density.values.iter().zip(&self.mesh.weights).map(|(r, w)| r * w).collect();
        let tail = density.tail_log_moment();
        self.kernel
            .par_chunks(n)
            .map(|row| row.iter().zip(&q).map(|(k, q)| f64::from(*k) * q).sum::<f64>() + tail)
            .collect()
    }

    pub fn apply(&self, v: &[Vec<f64>]) -> Result<MapOutput> {
        let n = self.problem.rank();
        if v.len() != n || v.iter().any(|c| c.len() != self.mesh.len()) {
            return Err(TodaError::DimensionMismatch("iterate does not match the mesh".into()));
        }
        let mut c = Vec::with_capacity(n);
        let mut densities = Vec::with_capacity(n);
        for (j, vj) in v.iter().enumerate() {
            let (cj, d) = self.normalize(j, vj)?;
            c.push(cj);
            densities.push(d);
        }
        let potentials: Vec<Vec<f64>> = densities
            .iter()
            .enumerate()
            .map(|(j, d)| {
                if (0..n).all(|i| self.problem.cartan[i][j] == 0.0) {
                    vec![0.0; self.mesh.len()]
                } else {
                    self.log_potential(d)
                }
            })
            .collect();
        let v_bar = (0..n)
            .map(|i| {
                (0..self.mesh.len())
                    .map(|k| {
                        let s: f64 = (0..n).map(|j| self.problem.cartan[i][j] * potentials[j][k]).sum();
                        s / (2.0 * PI) - self.problem.beta_total[i] * self.u0[k]
                    })
                    .collect()
            })
            .collect();
        Ok(MapOutput { v_bar, c, densities })
    }

    /// The map evaluated with kernel `log(|x| / |x - y|)` at nodes with
    /// `|x| >= 1`, in double precision. Returns `(node, values per component)`.
    pub fn apply_far_form(&self, densities: &[Density]) -> Vec<(usize, Vec<f64>)> {
        let n = self.problem.rank();
        let outer: Vec<usize> = (0..self.mesh.len())
            .filter(|&k| {
                let x = self.mesh.nodes[k];
                x[0].hypot(x[1]) >= 1.0
            })
            .collect();
        outer
            .par_iter()
            .map(|&i| {
                let x = self.mesh.nodes[i];
                let log_x = x[0].hypot(x[1]).ln();
                let values = (0..n)
                    .map(|row| {
                        let mut s = 0.0;
                        for (j, d) in densities.iter().enumerate() {
                            let a = self.problem.cartan[row][j];
                            if a == 0.0 {
                                continue;
                            }
                            let mut integral = d.tail_mass() * log_x + d.tail_log_moment();
                            for (k, y) in self.mesh.nodes.iter().enumerate() {
                                let kern = if k == i {
                                    log_x + self_cell(self.mesh.weights[k])
                                } else {
                                    log_x - dist(x, *y).ln()
                                };
                                integral += kern * d.values[k] * self.mesh.weights[k];
                            }
                            s += a * integral;
                        }
                        s / (2.0 * PI)
                    })
                    .collect();
                (i, values)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        let bb = 0.7;
        assert!(normalization_constant(2.0 * PI * bb, bb).unwrap().abs() < 1e-15);
        let c = normalization_constant(2.0, bb).unwrap();
        assert!((c - 0.5 * (PI * bb).ln()).abs() < 1e-15);
        assert!(normalization_constant(1.0, 0.0).is_err());
        assert!(normalization_constant(0.0, 1.0).is_err());
    }

    #[test]
    fn self_cell_matches_disk_integral() {
        // int_{B_a} log(1/|y|) dy = pi a^2 (1/2 - log a)
        let a: f64 = 0.3;
        let w = PI * a * a;
        assert!((self_cell(w) * w - PI * a * a * (0.5 - a.ln())).abs() < 1e-15);
    }
}
