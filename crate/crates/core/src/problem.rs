//! JSON problem files.
//!
//! ```json
//! {
//!   "algebra": "A1",
//!   "points": [[0, 0.577], [-0.5, -0.289], [0.5, -0.289]],
//!   "beta": [["1/2", 0.5, "1/2"]],
//!   "solver": { "R": 16, "resolution": 0.1, "theta": 0.5, "tol": 1e-6, "max_iters": 500 }
//! }
//! ```
//!
//! Instead of `beta` a file may carry `"generator": {"n": 2, "epsilon": "1/2000"}`,
//! which lays out the assumption-D exponents.

use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebraType;
use crate::conditions::{generate_assumption_d, layout_beta_from_d, AssumptionDParams, SingularityData};
use crate::error::{Result, TodaError};
use crate::rational::RationalValue;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub algebra: LieAlgebraType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Vec<RationalValue>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorBlock {
    pub n: usize,
    pub epsilon: RationalValue,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(rename = "R", alias = "radius", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

impl SolverBlock {
    /// Overrides the fields of `base` that this block sets.
    pub fn apply(&self, mut base: SolverConfig) -> SolverConfig {
        if let Some(r) = self.radius {
            base.mesh.radius = r;
        }
        if let Some(h) = self.resolution {
            base.mesh.resolution = h;
        }
        if let Some(t) = self.theta {
            base.theta = t;
        }
        if let Some(t) = self.tol {
            base.tol = t;
        }
        if let Some(m) = self.max_iters {
            base.max_iters = m;
        }
        base
    }
}

/// A validated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub algebra: LieAlgebraType,
    pub data: SingularityData,
    /// Present when the exponents came from the generator block.
    pub assumption_d: Option<AssumptionDParams>,
    pub solver: Option<SolverBlock>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| TodaError::InvalidInput(format!("problem file: {e}")))
    }

    pub fn validate(&self) -> Result<Problem> {
        let (beta, assumption_d) = match (&self.beta, &self.generator) {
            (Some(_), Some(_)) => {
                return Err(TodaError::InvalidInput(
                    "problem file: `beta` and `generator` are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(TodaError::InvalidInput(
                    "problem file: one of `beta` or `generator` is required".into(),
                ))
            }
            (Some(beta), None) => (beta.iter().map(|r| r.iter().map(|q| q.0.clone()).collect()).collect(), None),
            (None, Some(g)) => {
                if g.n != self.algebra.rank() {
                    return Err(TodaError::DimensionMismatch(format!(
                        "generator n = {} but {} has rank {}",
                        g.n,
                        self.algebra,
                        self.algebra.rank()
                    )));
                }
                let params = generate_assumption_d(g.n, &g.epsilon.0)?;
                let beta = layout_beta_from_d(&params).beta().to_vec();
                (beta, Some(params))
            }
        };
        let beta: Vec<Vec<_>> = beta;
        if beta.len() != self.algebra.rank() {
            return Err(TodaError::DimensionMismatch(format!(
                "{} has rank {} but `beta` has {} rows",
                self.algebra,
                self.algebra.rank(),
                beta.len()
            )));
        }
        let m = beta.first().map_or(0, Vec::len);
        let data = match &self.points {
            Some(points) => SingularityData::new(points.clone(), beta)?,
            None if m == 0 && beta.iter().all(Vec::is_empty) => SingularityData::regular(beta.len()),
            None => SingularityData::from_beta(beta)?,
        };
        Ok(Problem {
            algebra: self.algebra,
            data,
            assumption_d,
            solver: self.solver.clone(),
        })
    }
}
