//! Conditions on the singularity exponents.
//!
//! Everything here is exact: exponents are rationals (JSON floats are read
//! through their exact binary value), and strict inequalities that hold with
//! equality evaluate to `false`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::algebra::LieAlgebraType;
use crate::cartan::{inverse_closed_form, InverseCartanMatrix};
use crate::error::{Result, TodaError};
use crate::rational::{format_pq, int, ratio, Rational};

/// Singular points and exponent matrix `beta[i][l]` (component `i`, point `l`).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityData {
    points: Option<Vec<[f64; 2]>>,
    beta: Vec<Vec<Rational>>,
}

impl SingularityData {
    /// Exponents only; points can be attached later with [`Self::with_points`].
    pub fn from_beta(beta: Vec<Vec<Rational>>) -> Result<Self> {
        let m = beta.first().map_or(0, Vec::len);
        if beta.is_empty() {
            return Err(TodaError::DimensionMismatch("exponent matrix has no rows".into()));
        }
        if let Some(i) = beta.iter().position(|row| row.len() != m) {
            return Err(TodaError::DimensionMismatch(format!(
                "exponent row {} has {} entries, row 1 has {m}",
                i + 1,
                beta[i].len()
            )));
        }
        for (i, row) in beta.iter().enumerate() {
            for (l, b) in row.iter().enumerate() {
                if b.is_negative() || *b >= int(1) {
                    return Err(TodaError::ExponentOutOfRange(format!(
                        "beta[{}][{}] = {} is outside [0, 1)",
                        i + 1,
                        l + 1,
                        format_pq(b)
                    )));
                }
            }
        }
        Ok(Self { points: None, beta })
    }

    /// `n` components and no singular points.
    pub fn regular(n: usize) -> Self {
        Self {
            points: Some(Vec::new()),
            beta: vec![Vec::new(); n],
        }
    }

    pub fn new(points: Vec<[f64; 2]>, beta: Vec<Vec<Rational>>) -> Result<Self> {
        if beta.iter().all(Vec::is_empty) && points.is_empty() && !beta.is_empty() {
            return Ok(Self::regular(beta.len()));
        }
        Self::from_beta(beta)?.with_points(points)
    }

    pub fn with_points(mut self, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() != self.num_points() {
            return Err(TodaError::DimensionMismatch(format!(
                "{} points supplied for {} exponent columns",
                points.len(),
                self.num_points()
            )));
        }
        if let Some(p) = points.iter().find(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(TodaError::InvalidInput(format!("non-finite point {p:?}")));
        }
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                if points[a] == points[b] {
                    return Err(TodaError::InvalidInput(format!(
                        "points {} and {} coincide at {:?}",
                        a + 1,
                        b + 1,
                        points[a]
                    )));
                }
            }
        }
        self.points = Some(points);
        Ok(self)
    }

    pub fn points(&self) -> Option<&[[f64; 2]]> {
        self.points.as_deref()
    }

    pub fn beta(&self) -> &[Vec<Rational>] {
        &self.beta
    }

    pub fn num_components(&self) -> usize {
        self.beta.len()
    }

    pub fn num_points(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.beta[i].iter().fold(Rational::zero(), |acc, b| acc + b)
    }

    pub fn beta_f64(&self) -> Vec<Vec<f64>> {
        self.beta.iter().map(|r| r.iter().map(crate::rational::to_f64).collect()).collect()
    }
}

/// `beta_total[i] = 2 - sum_l beta[i][l]` and `beta_bar = A^{-1} beta_total`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSummary {
    pub algebra: LieAlgebraType,
    pub beta_total: Vec<Rational>,
    pub beta_bar: Vec<Rational>,
}

impl ExponentSummary {
    pub fn beta_total_f64(&self) -> Vec<f64> {
        self.beta_total.iter().map(crate::rational::to_f64).collect()
    }

    pub fn beta_bar_f64(&self) -> Vec<f64> {
        self.beta_bar.iter().map(crate::rational::to_f64).collect()
    }
}

fn check_rank(data: &SingularityData, algebra: LieAlgebraType) -> Result<()> {
    if data.num_components() != algebra.rank() {
        return Err(TodaError::DimensionMismatch(format!(
            "{algebra} has rank {} but the exponent matrix has {} rows",
            algebra.rank(),
            data.num_components()
        )));
    }
    Ok(())
}

pub fn summarize(data: &SingularityData, algebra: LieAlgebraType) -> Result<ExponentSummary> {
    check_rank(data, algebra)?;
    let inv = inverse_closed_form(algebra);
    Ok(summarize_with(data, algebra, &inv))
}

fn summarize_with(data: &SingularityData, algebra: LieAlgebraType, inv: &InverseCartanMatrix) -> ExponentSummary {
    let beta_total: Vec<Rational> = (0..data.num_components()).map(|i| int(2) - data.row_sum(i)).collect();
    let beta_bar = inv.mul_vec(&beta_total);
    ExponentSummary {
        algebra,
        beta_total,
        beta_bar,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCell {
    pub i: usize,
    pub l: usize,
    /// `2 sum_j a^{ij} - 1 + beta[i][l]`
    pub lhs: String,
    /// `sum_j sum_s a^{ij} beta[j][s]`
    pub rhs: String,
    pub holds: bool,
    /// `beta_bar[i] < 1 - beta[i][l]`, the same inequality after rearranging.
    pub upper_bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub algebra: LieAlgebraType,
    /// Row-major `n x m` table of cells, 1-based `i`, `l`.
    pub cells: Vec<ConditionCell>,
    /// All cells of the strict inverse-matrix inequality hold.
    pub inequality_holds: bool,
    /// `beta_bar[i] > 0` for each component.
    pub beta_bar_positive: Vec<bool>,
    /// Cell-by-cell agreement of the inequality with its `beta_bar` rearrangement.
    pub forms_agree: bool,
    /// Inequality holds and every `beta_bar` is positive.
    pub verdict: bool,
    pub beta_total: Vec<String>,
    pub beta_bar: Vec<String>,
}

/// Evaluates the existence condition cell by cell.
///
/// The inequality table alone does not force `beta_bar > 0`, which the mass
/// identities need (`2 pi beta_bar[i]` is a total mass), so the verdict
/// requires both. For `A_1` this is exactly the classical cone-angle condition.
pub fn check_existence_condition(data: &SingularityData, algebra: LieAlgebraType) -> Result<ExistenceReport> {
    check_rank(data, algebra)?;
    let inv = inverse_closed_form(algebra);
    let summary = summarize_with(data, algebra, &inv);
    let n = algebra.rank();
    let row_sums: Vec<Rational> = (0..n).map(|j| data.row_sum(j)).collect();
    let mut cells = Vec::with_capacity(n * data.num_points());
    for i in 0..n {
        let lhs_base = int(2) * inv.row_sum(i) - int(1);
        let rhs = (0..n).fold(Rational::zero(), |acc, j| acc + inv.get(i, j) * &row_sums[j]);
        for (l, b) in data.beta()[i].iter().enumerate() {
            let lhs = &lhs_base + b;
            cells.push(ConditionCell {
                i: i + 1,
                l: l + 1,
                holds: lhs < rhs,
                upper_bound_holds: summary.beta_bar[i] < int(1) - b,
                lhs: format_pq(&lhs),
                rhs: format_pq(&rhs),
            });
        }
    }
    let inequality_holds = cells.iter().all(|c| c.holds);
    let forms_agree = cells.iter().all(|c| c.holds == c.upper_bound_holds);
    let beta_bar_positive: Vec<bool> = summary.beta_bar.iter().map(Signed::is_positive).collect();
    Ok(ExistenceReport {
        algebra,
        verdict: inequality_holds && beta_bar_positive.iter().all(|&p| p),
        cells,
        inequality_holds,
        beta_bar_positive,
        forms_agree,
        beta_total: summary.beta_total.iter().map(format_pq).collect(),
        beta_bar: summary.beta_bar.iter().map(format_pq).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TroyanovReport {
    /// `0 < 2 - sum < 2 min{1, min_l (1 - gamma_l)}`
    pub two_sided_form: bool,
    /// `sum < 2` and `sum_{l != j} gamma_l > gamma_j` for every `j`
    pub pairwise_form: bool,
    pub forms_agree: bool,
    pub verdict: bool,
}

/// Cone-angle condition for the scalar Liouville equation.
pub fn check_troyanov(gamma: &[Rational]) -> Result<TroyanovReport> {
    if gamma.is_empty() {
        return Err(TodaError::ExponentOutOfRange("at least one exponent is required".into()));
    }
    if let Some((l, g)) = gamma.iter().enumerate().find(|(_, g)| !(g.is_positive() && **g < int(1))) {
        return Err(TodaError::ExponentOutOfRange(format!(
            "gamma[{}] = {} is outside (0, 1)",
            l + 1,
            format_pq(g)
        )));
    }
    let total = gamma.iter().fold(Rational::zero(), |acc, g| acc + g);
    let slack = int(2) - &total;
    let min_gap = gamma.iter().map(|g| int(1) - g).min().expect("non-empty");
    let cap = int(2) * std::cmp::min(int(1), min_gap);
    let two_sided_form = slack.is_positive() && slack < cap;
    let pairwise_form = total < int(2) && gamma.iter().all(|g| &total - g > *g);
    Ok(TroyanovReport {
        two_sided_form,
        pairwise_form,
        forms_agree: two_sided_form == pairwise_form,
        verdict: two_sided_form && pairwise_form,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LtReport {
    pub verdict: bool,
    /// 1-based `(i, l)` cells where `sum_{s != l} beta[i][s] > max_k beta[k][l]` fails.
    pub failures: Vec<(usize, usize)>,
}

/// Componentwise generalization of the pairwise cone-angle condition.
pub fn check_lt_condition(data: &SingularityData) -> LtReport {
    let m = data.num_points();
    let column_max: Vec<Rational> = (0..m)
        .map(|l| data.beta().iter().map(|row| row[l].clone()).max().unwrap_or_else(Rational::zero))
        .collect();
    let mut failures = Vec::new();
    for (i, row) in data.beta().iter().enumerate() {
        let total = data.row_sum(i);
        for l in 0..m {
            if &total - &row[l] <= column_max[l] {
                failures.push((i + 1, l + 1));
            }
        }
    }
    LtReport {
        verdict: failures.is_empty() && m > 0,
        failures,
    }
}

/// The classical sufficient condition for `A_2`:
/// `3 (1 + beta[i][j]) < 2 S_i + S_{3-i}` and `S_i < 2`, with `S_i` the row sums.
pub fn check_a2_classical_condition(data: &SingularityData) -> Result<bool> {
    if data.num_components() != 2 {
        return Err(TodaError::DimensionMismatch("the A2 condition needs exactly two rows".into()));
    }
    let s = [data.row_sum(0), data.row_sum(1)];
    let ok = (0..2).all(|i| {
        let rhs = int(2) * &s[i] + &s[1 - i];
        s[i] < int(2) && data.beta()[i].iter().all(|b| int(3) * (int(1) + b) < rhs)
    });
    Ok(ok)
}

/// Exponent tuple `b_1..b_{4n+1}` for the non-existence construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionDParams {
    n: usize,
    epsilon: Option<Rational>,
    b: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssumptionDReport {
    pub in_unit_interval: bool,
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
    pub d4: bool,
    pub d5: bool,
}

impl AssumptionDReport {
    pub fn all(&self) -> bool {
        self.in_unit_interval && self.d1 && self.d2 && self.d3 && self.d4 && self.d5
    }

    fn first_failure(&self) -> Option<&'static str> {
        [
            (self.in_unit_interval, "b_k in (0, 1)"),
            (self.d1, "(d1)"),
            (self.d2, "(d2)"),
            (self.d3, "(d3)"),
            (self.d4, "(d4)"),
            (self.d5, "(d5)"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssumptionDConsequences {
    /// `b_4 + b_1 > 1`
    pub b4_plus_b1_above_one: bool,
    /// `b_4 + b_2 = b_4 + b_3 < 1`
    pub b4_plus_b2_below_one: bool,
    /// `b_{4i+1} < 1/50` for `i = 1..n`
    pub small_tail_exponents: bool,
}

impl AssumptionDConsequences {
    pub fn all(&self) -> bool {
        self.b4_plus_b1_above_one && self.b4_plus_b2_below_one && self.small_tail_exponents
    }
}

/// Evaluates each clause on a raw tuple; `b` is 1-based in the clause text,
/// `b[0]` here is `b_1`.
pub fn check_assumption_d(n: usize, b: &[Rational]) -> Result<AssumptionDReport> {
    if n < 2 {
        return Err(TodaError::InvalidInput(format!("assumption D needs n >= 2, got {n}")));
    }
    if b.len() != 4 * n + 1 {
        return Err(TodaError::DimensionMismatch(format!(
            "assumption D with n = {n} needs {} values, got {}",
            4 * n + 1,
            b.len()
        )));
    }
    let bk = |k: usize| &b[k - 1];
    let one = int(1);
    let sum = |ks: std::ops::RangeInclusive<usize>| ks.fold(Rational::zero(), |acc, k| acc + bk(k));
    let in_unit_interval = b.iter().all(|x| x.is_positive() && *x < one);
    let d1 = sum(1..=5) == int(2)
        && bk(2) == bk(3)
        && *bk(2) < bk(1) / int(2)
        && bk(4) == bk(5)
        && int(2) * bk(1) + bk(4) < int(2);
    let d2 = (2..=n).all(|l| sum(4 * l - 2..=4 * l + 1) == int(2));
    let d3 = (2..=n).all(|l| bk(4 * l - 2) == bk(4 * l - 1) && bk(4 * l - 1) == bk(4 * l));
    let nn = int((n * n) as i64);
    let d4 = (1..=n).all(|i| &nn * bk(4 * i + 1) < ratio(1, 400));
    let d5 = bk(4) == bk(9);
    Ok(AssumptionDReport {
        in_unit_interval,
        d1,
        d2,
        d3,
        d4,
        d5,
    })
}

impl AssumptionDParams {
    pub fn new(n: usize, b: Vec<Rational>) -> Result<Self> {
        let report = check_assumption_d(n, &b)?;
        if let Some(name) = report.first_failure() {
            return Err(TodaError::AssumptionViolated(format!("{name} fails for the supplied tuple")));
        }
        Ok(Self { n, epsilon: None, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> Option<&Rational> {
        self.epsilon.as_ref()
    }

    /// `b_1..b_{4n+1}`, stored 0-based.
    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn consequences(&self) -> AssumptionDConsequences {
        let bk = |k: usize| &self.b[k - 1];
        AssumptionDConsequences {
            b4_plus_b1_above_one: bk(4) + bk(1) > int(1),
            b4_plus_b2_below_one: bk(4) + bk(2) < int(1) && bk(4) + bk(3) < int(1),
            small_tail_exponents: (1..=self.n).all(|i| *bk(4 * i + 1) < ratio(1, 50)),
        }
    }
}

/// The explicit one-parameter family satisfying assumption D.
pub fn generate_assumption_d(n: usize, epsilon: &Rational) -> Result<AssumptionDParams> {
    if n < 2 {
        return Err(TodaError::InvalidInput(format!("assumption D needs n >= 2, got {n}")));
    }
    if !epsilon.is_positive() {
        return Err(TodaError::InvalidInput("epsilon must be positive".into()));
    }
    let bound = ratio(1, 400 * (n * n) as i64);
    if *epsilon >= bound {
        return Err(TodaError::AssumptionViolated(format!(
            "(d4): n^2 * epsilon = {} must stay below 1/400",
            format_pq(&(int((n * n) as i64) * epsilon))
        )));
    }
    let e = epsilon;
    let mut b = vec![Rational::zero(); 4 * n + 1];
    b[0] = int(1) - ratio(2, 3) * e;
    b[1] = ratio(1, 2) - ratio(2, 3) * e;
    b[2] = b[1].clone();
    b[3] = e.clone();
    b[4] = e.clone();
    for l in 2..=n {
        let mid = ratio(2, 3) - ratio(1, 3) * e;
        for k in 4 * l - 2..=4 * l {
            b[k - 1] = mid.clone();
        }
        b[4 * l] = e.clone();
    }
    let mut params = AssumptionDParams::new(n, b)?;
    params.epsilon = Some(epsilon.clone());
    let consequences = params.consequences();
    if !consequences.all() {
        return Err(TodaError::AssumptionViolated(format!(
            "generated tuple misses a derived consequence: {consequences:?}"
        )));
    }
    Ok(params)
}

/// Exponent matrix `n x (3n + 1)`: row 1 carries `b_1..b_4` on points 1..4,
/// row `i >= 2` carries `b_{4i-2}, b_{4i-1}, b_{4i}` on points `3i-1..3i+1`.
pub fn layout_beta_from_d(params: &AssumptionDParams) -> SingularityData {
    let n = params.n;
    let m = 3 * n + 1;
    let bk = |k: usize| params.b[k - 1].clone();
    let mut beta = vec![vec![Rational::zero(); m]; n];
    for l in 1..=4 {
        beta[0][l - 1] = bk(l);
    }
    for i in 2..=n {
        for l in 1..=3 {
            beta[i - 1][3 * i - 2 + l - 1] = bk(4 * i - 3 + l);
        }
    }
    SingularityData::from_beta(beta).expect("assumption D entries lie in (0, 1)")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssumptionD1Report {
    pub in_unit_interval: bool,
    pub d6: bool,
    pub d7: bool,
    pub d8: bool,
    pub verdict: bool,
}

/// Rank-two variant of assumption D used for `C_2` and `G_2`.
pub fn check_assumption_d1(b: &[Rational]) -> Result<AssumptionD1Report> {
    if b.len() != 7 {
        return Err(TodaError::DimensionMismatch(format!(
            "assumption D1 needs 7 values, got {}",
            b.len()
        )));
    }
    let bk = |k: usize| &b[k - 1];
    let in_unit_interval = b.iter().all(|x| x.is_positive() && *x < int(1));
    let d6 = bk(1) + bk(2) + bk(3) + bk(4) + bk(4) == int(2) && int(2) * bk(1) + bk(4) < int(2);
    let d7 = bk(5) + bk(6) + bk(7) + bk(4) == int(2) && bk(5) == bk(6) && bk(6) == bk(7);
    let d8 = bk(2) == bk(3) && *bk(2) < bk(1) / int(2) && *bk(4) < ratio(1, 1000);
    Ok(AssumptionD1Report {
        in_unit_interval,
        d6,
        d7,
        d8,
        verdict: in_unit_interval && d6 && d7 && d8,
    })
}

/// The explicit example tuple for assumption D1. Not validated: large
/// `epsilon` deliberately produces tuples that fail (d8).
pub fn assumption_d1_example(epsilon: &Rational) -> Vec<Rational> {
    let e = epsilon;
    let b1 = int(1) - ratio(2, 3) * e;
    let b2 = ratio(1, 2) - ratio(2, 3) * e;
    let b5 = ratio(2, 3) - ratio(1, 3) * e;
    vec![b1, b2.clone(), b2, e.clone(), b5.clone(), b5.clone(), b5]
}

/// Two-row layout for assumption D1: row 1 on points 1..4, row 2 on 5..7.
pub fn layout_beta_from_d1(b: &[Rational]) -> Result<SingularityData> {
    if b.len() != 7 {
        return Err(TodaError::DimensionMismatch("assumption D1 layout needs 7 values".into()));
    }
    let mut beta = vec![vec![Rational::zero(); 7]; 2];
    for l in 0..7 {
        beta[usize::from(l >= 4)][l] = b[l].clone();
    }
    SingularityData::from_beta(beta)
}
