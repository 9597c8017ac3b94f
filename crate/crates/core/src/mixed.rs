//! Random-intercept linear mixed model for a two-period crossover
//! experiment, `y ~ Treatment + Task + Group + (1 | Subject)`, fitted by
//! restricted maximum likelihood.
//!
//! With a single grouping factor the marginal covariance is
//! `sigma^2 (I + lambda Z Z')`, block diagonal by subject, so every
//! quantity the REML criterion needs is accumulated subject by subject in
//! closed form. The variance ratio `lambda` is the only parameter left to
//! optimize; it is searched on `log(lambda)` in `[-12, 12]` by golden
//! section after a coarse scan, and the `lambda = 0` boundary is checked
//! explicitly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{non_empty, parse_value, read_rows};
use crate::stats::normal_two_sided_p;
use crate::warning::Warning;

pub const EXPERIMENT_HEADER: [&str; 6] = ["subject_id", "group", "treatment", "task", "variable", "value"];

/// Fixed-effect terms, in coefficient order. Reference levels are ITLD,
/// BSK and group BSK→MR.
pub const TERMS: [&str; 4] = ["Intercept", "TreatmentTDD", "TaskMR", "GroupMR→BSK"];

const N_FIXED: usize = 4;
const LOG_LAMBDA_MIN: f64 = -12.0;
const LOG_LAMBDA_MAX: f64 = 12.0;
const SCAN_STEP: f64 = 0.5;
const MAX_ITER: usize = 200;
const CRITERION_TOL: f64 = 1e-10;
const WIDTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "MR→BSK")]
    MrToBsk,
    #[serde(rename = "BSK→MR")]
    BskToMr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Treatment {
    #[serde(rename = "ITLD")]
    Itld,
    #[serde(rename = "TDD")]
    Tdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "MR")]
    Mr,
    #[serde(rename = "BSK")]
    Bsk,
}

impl Group {
    /// The task a subject of this group performs under `treatment`.
    pub fn task_for(self, treatment: Treatment) -> Task {
        match (self, treatment) {
            (Group::MrToBsk, Treatment::Itld) | (Group::BskToMr, Treatment::Tdd) => Task::Mr,
            (Group::MrToBsk, Treatment::Tdd) | (Group::BskToMr, Treatment::Itld) => Task::Bsk,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::MrToBsk => "MR->BSK",
            Group::BskToMr => "BSK->MR",
        })
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Treatment::Itld => "ITLD",
            Treatment::Tdd => "TDD",
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Mr => "MR",
            Task::Bsk => "BSK",
        })
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MR->BSK" | "MR→BSK" => Ok(Group::MrToBsk),
            "BSK->MR" | "BSK→MR" => Ok(Group::BskToMr),
            other => Err(Error::InvalidArgument(format!("unknown group `{other}`"))),
        }
    }
}

impl FromStr for Treatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ITLD" => Ok(Treatment::Itld),
            "TDD" => Ok(Treatment::Tdd),
            other => Err(Error::InvalidArgument(format!("unknown treatment `{other}`"))),
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MR" => Ok(Task::Mr),
            "BSK" => Ok(Task::Bsk),
            other => Err(Error::InvalidArgument(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub subject_id: String,
    pub group: Group,
    pub treatment: Treatment,
    pub task: Task,
    pub y: f64,
}

impl ExperimentRow {
    fn design(&self) -> Vector4<f64> {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        Vector4::new(
            1.0,
            ind(self.treatment == Treatment::Tdd),
            ind(self.task == Task::Mr),
            ind(self.group == Group::MrToBsk),
        )
    }
}

/// Reads `subject_id,group,treatment,task,variable,value` rows, keeping
/// those of `variable`.
pub fn parse_experiment_csv(text: &[u8], variable: &str) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    read_rows(text, &EXPERIMENT_HEADER, |line, rec| {
        let bad = |e: Error| Error::BadRow {
            line,
            reason: e.to_string(),
        };
        let subject_id = non_empty(line, &rec[0], "subject_id")?;
        let group = rec[1].parse().map_err(bad)?;
        let treatment = rec[2].parse().map_err(bad)?;
        let task = rec[3].parse().map_err(bad)?;
        let y = parse_value(line, &rec[5])?;
        if &rec[4] == variable {
            rows.push(ExperimentRow {
                subject_id,
                group,
                treatment,
                task,
                y,
            });
        }
        Ok(())
    })?;
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}

/// Checks the crossover layout: at most one row per subject and treatment,
/// one group per subject, and tasks assigned as the group prescribes.
pub fn validate_design(rows: &[ExperimentRow]) -> Result<()> {
    let mut seen: HashMap<&str, (Group, Vec<Treatment>)> = HashMap::new();
    for r in rows {
        if !r.y.is_finite() {
            return Err(Error::NonFiniteValue {
                location: format!("subject {}", r.subject_id),
            });
        }
        if r.group.task_for(r.treatment) != r.task {
            return Err(Error::InvalidDesign(format!(
                "subject {} in group {} did task {} under {}",
                r.subject_id, r.group, r.task, r.treatment
            )));
        }
        let entry = seen
            .entry(r.subject_id.as_str())
            .or_insert_with(|| (r.group, Vec::new()));
        if entry.0 != r.group {
            return Err(Error::InvalidDesign(format!(
                "subject {} appears in both groups",
                r.subject_id
            )));
        }
        if entry.1.contains(&r.treatment) {
            return Err(Error::InvalidDesign(format!(
                "subject {} has two {} observations",
                r.subject_id, r.treatment
            )));
        }
        entry.1.push(r.treatment);
    }
    if seen.len() < 2 {
        return Err(Error::TooFewLevels {
            factor: "Subject".into(),
            got: seen.len(),
        });
    }
    Ok(())
}

/// Per-subject sufficient statistics: `X'X`, `X'1`, `X'y`, `1'y`, `y'y`.
struct SubjectBlock {
    n: f64,
    xtx: Matrix4<f64>,
    xt1: Vector4<f64>,
    xty: Vector4<f64>,
    sum_y: f64,
    rows: Vec<(Vector4<f64>, f64)>,
}

struct Design {
    blocks: Vec<SubjectBlock>,
    n_obs: usize,
}

impl Design {
    fn new(rows: &[ExperimentRow]) -> Result<Self> {
        validate_design(rows)?;
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut blocks: Vec<SubjectBlock> = Vec::new();
        for r in rows {
            let i = *index.entry(r.subject_id.as_str()).or_insert_with(|| {
                blocks.push(SubjectBlock {
                    n: 0.0,
                    xtx: Matrix4::zeros(),
                    xt1: Vector4::zeros(),
                    xty: Vector4::zeros(),
                    sum_y: 0.0,
                    rows: Vec::new(),
                });
                blocks.len() - 1
            });
            let x = r.design();
            let b = &mut blocks[i];
            b.n += 1.0;
            b.xtx += x * x.transpose();
            b.xt1 += x;
            b.xty += x * r.y;
            b.sum_y += r.y;
            b.rows.push((x, r.y));
        }
        let design = Design {
            blocks,
            n_obs: rows.len(),
        };
        if design.n_obs <= N_FIXED {
            return Err(Error::RankDeficientDesign);
        }
        let xtx: Matrix4<f64> = design.blocks.iter().map(|b| b.xtx).sum();
        let sv = xtx.singular_values();
        if sv.min() <= 1e-10 * sv.max() {
            return Err(Error::RankDeficientDesign);
        }
        Ok(design)
    }

    fn profile(&self, lambda: f64) -> Result<Profile> {
        let mut a = Matrix4::zeros();
        let mut rhs = Vector4::zeros();
        let mut log_det_v = 0.0;
        for b in &self.blocks {
            let w = lambda / (1.0 + lambda * b.n);
            a += b.xtx - b.xt1 * b.xt1.transpose() * w;
            rhs += b.xty - b.xt1 * (w * b.sum_y);
            log_det_v += (lambda * b.n).ln_1p();
        }
        let chol = a.cholesky().ok_or(Error::RankDeficientDesign)?;
        let beta = chol.solve(&rhs);
        let mut rss = 0.0;
        // pieces of the derivative with respect to lambda
        let (mut d_log_v, mut d_rss) = (0.0, 0.0);
        let mut d_a = Matrix4::zeros();
        for b in &self.blocks {
            let w = lambda / (1.0 + lambda * b.n);
            let (mut ee, mut se) = (0.0, 0.0);
            for (x, y) in &b.rows {
                let e = y - x.dot(&beta);
                ee += e * e;
                se += e;
            }
            rss += ee - w * se * se;
            let shrink = 1.0 / (1.0 + lambda * b.n);
            d_log_v += b.n * shrink;
            d_rss += (se * shrink).powi(2);
            d_a += b.xt1 * b.xt1.transpose() * (shrink * shrink);
        }
        let dof = (self.n_obs - N_FIXED) as f64;
        if !(rss > 0.0) {
            return Err(Error::DegenerateVariance {
                what: "residuals".into(),
            });
        }
        let log_det_a = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let criterion = log_det_v + log_det_a + dof * (1.0 + (2.0 * PI * rss / dof).ln());
        let a_inv = chol.inverse();
        let slope = lambda * (d_log_v - (a_inv * d_a).trace() - dof * d_rss / rss);
        Ok(Profile {
            lambda,
            beta,
            a_inv,
            sigma2: rss / dof,
            criterion,
            slope,
        })
    }
}

struct Profile {
    lambda: f64,
    beta: Vector4<f64>,
    a_inv: Matrix4<f64>,
    sigma2: f64,
    criterion: f64,
    /// Derivative of the criterion with respect to `log(lambda)`.
    slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedModelFit {
    /// In [`TERMS`] order.
    pub coefficients: Vec<Coefficient>,
    pub var_subject: f64,
    pub var_residual: f64,
    /// `var_subject / var_residual`.
    pub lambda: f64,
    /// `-2` times the restricted log-likelihood.
    pub reml_criterion: f64,
    /// `reml_criterion + 2 * (fixed effects + 2)`.
    pub aic: f64,
    pub n_obs: usize,
    pub n_subjects: usize,
    pub iterations: usize,
    pub warnings: Vec<Warning>,
}

impl MixedModelFit {
    pub fn coefficient(&self, term: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == term)
    }

    fn from_profile(p: Profile, design: &Design, iterations: usize) -> Self {
        let coefficients = TERMS
            .iter()
            .enumerate()
            .map(|(i, term)| Coefficient {
                term: (*term).to_owned(),
                estimate: p.beta[i],
                std_error: (p.sigma2 * p.a_inv[(i, i)]).sqrt(),
            })
            .collect();
        let mut warnings = Vec::new();
        if p.lambda == 0.0 {
            warnings.push(Warning::BoundaryFit);
        }
        MixedModelFit {
            coefficients,
            var_subject: p.lambda * p.sigma2,
            var_residual: p.sigma2,
            lambda: p.lambda,
            reml_criterion: p.criterion,
            aic: p.criterion + 2.0 * (N_FIXED as f64 + 2.0),
            n_obs: design.n_obs,
            n_subjects: design.blocks.len(),
            iterations,
            warnings,
        }
    }
}

/// REML criterion (`-2` log restricted likelihood, variance profiled out)
/// at a fixed variance ratio `lambda >= 0`.
pub fn reml_criterion(rows: &[ExperimentRow], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(Design::new(rows)?.profile(lambda)?.criterion)
}

/// Generalized least squares fit with the variance ratio held at `lambda`.
/// `lambda = 0` is ordinary least squares.
pub fn fit_at_lambda(rows: &[ExperimentRow], lambda: f64) -> Result<MixedModelFit> {
    check_lambda(lambda)?;
    let design = Design::new(rows)?;
    let p = design.profile(lambda)?;
    Ok(MixedModelFit::from_profile(p, &design, 0))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "variance ratio must be finite and non-negative, got {lambda}"
        )));
    }
    Ok(())
}

/// Fits the random-intercept model by REML.
pub fn reml_fit(rows: &[ExperimentRow]) -> Result<MixedModelFit> {
    let design = Design::new(rows)?;
    let eval = |t: f64| design.profile(t.exp()).map(|p| p.criterion);

    // coarse scan to pick the basin, then golden section inside it
    let n_scan = ((LOG_LAMBDA_MAX - LOG_LAMBDA_MIN) / SCAN_STEP).round() as usize;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=n_scan {
        let f = eval(LOG_LAMBDA_MIN + i as f64 * SCAN_STEP)?;
        if f < best.1 {
            best = (i, f);
        }
    }
    let mut lo = LOG_LAMBDA_MIN + best.0.saturating_sub(1) as f64 * SCAN_STEP;
    let mut hi = (LOG_LAMBDA_MIN + (best.0 + 1) as f64 * SCAN_STEP).min(LOG_LAMBDA_MAX);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let mut last = f1.min(f2);
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < MAX_ITER {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        }
        let current = f1.min(f2);
        change = (last - current).abs();
        last = current;
        if hi - lo < WIDTH_TOL {
            break;
        }
    }
    if iterations == MAX_ITER && change > CRITERION_TOL {
        return Err(Error::NonConvergence {
            iterations,
            last_change: change,
        });
    }
    let t_best = if f1 <= f2 { x1 } else { x2 };
    let scan_lo = LOG_LAMBDA_MIN + best.0.saturating_sub(1) as f64 * SCAN_STEP;
    let scan_hi = (LOG_LAMBDA_MIN + (best.0 + 1) as f64 * SCAN_STEP).min(LOG_LAMBDA_MAX);
    let t_best = polish(&design, t_best, scan_lo, scan_hi)?;
    let interior = design.profile(t_best.exp())?;
    let boundary = design.profile(0.0)?;
    let chosen = if boundary.criterion <= interior.criterion {
        boundary
    } else {
        interior
    };
    Ok(MixedModelFit::from_profile(chosen, &design, iterations))
}

/// Comparing criterion values cannot place a flat minimum much closer than
/// the square root of round-off, so the golden-section result is refined by
/// bisection on the sign of the analytic slope when it brackets a root.
fn polish(design: &Design, t: f64, scan_lo: f64, scan_hi: f64) -> Result<f64> {
    let slope = |t: f64| design.profile(t.exp()).map(|p| p.slope);
    let mut bracket = None;
    for half_width in [1e-3, f64::INFINITY] {
        let (lo, hi) = ((t - half_width).max(scan_lo), (t + half_width).min(scan_hi));
        if slope(lo)? < 0.0 && slope(hi)? > 0.0 {
            bracket = Some((lo, hi));
            break;
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(t);
    };
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceRow {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    /// `***` p < 0.001, `**` p < 0.01, `*` p < 0.05.
    pub stars: String,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceTable {
    pub alpha: f64,
    /// How p-values were obtained.
    pub convention: String,
    pub rows: Vec<SignificanceRow>,
}

pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Wald tests of every coefficient: `z = estimate / se`, two-sided normal
/// p-values, no degrees-of-freedom adjustment.
pub fn summarize_fit(fit: &MixedModelFit, alpha: f64) -> SignificanceTable {
    let rows = fit
        .coefficients
        .iter()
        .map(|c| {
            let z = if c.estimate == 0.0 {
                0.0
            } else {
                c.estimate / c.std_error
            };
            let p = normal_two_sided_p(z);
            SignificanceRow {
                term: c.term.clone(),
                estimate: c.estimate,
                std_error: c.std_error,
                z,
                p,
                stars: stars(p).to_owned(),
                significant: p < alpha,
            }
        })
        .collect();
    SignificanceTable {
        alpha,
        convention: "Wald z = estimate / se with two-sided normal p-values (no df adjustment)".into(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(s: &str, g: Group, t: Treatment, y: f64) -> ExperimentRow {
        ExperimentRow {
            subject_id: s.into(),
            group: g,
            treatment: t,
            task: g.task_for(t),
            y,
        }
    }

    fn small_design() -> Vec<ExperimentRow> {
        use Group::*;
        use Treatment::*;
        let ys = [
            (MrToBsk, 60.0, 40.0),
            (MrToBsk, 72.0, 51.0),
            (MrToBsk, 55.0, 49.0),
            (BskToMr, 80.0, 41.0),
            (BskToMr, 66.0, 30.0),
            (BskToMr, 91.0, 58.0),
        ];
        ys.iter()
            .enumerate()
            .flat_map(|(i, (g, a, b))| {
                let s = format!("S{i}");
                [row(&s, *g, Itld, *a), row(&s, *g, Tdd, *b)]
            })
            .collect()
    }

    #[test]
    fn crossover_task_assignment() {
        assert_eq!(Group::MrToBsk.task_for(Treatment::Itld), Task::Mr);
        assert_eq!(Group::MrToBsk.task_for(Treatment::Tdd), Task::Bsk);
        assert_eq!(Group::BskToMr.task_for(Treatment::Itld), Task::Bsk);
        assert_eq!(Group::BskToMr.task_for(Treatment::Tdd), Task::Mr);
    }

    #[test]
    fn design_validation() {
        let mut rows = small_design();
        rows[0].task = Task::Bsk;
        assert!(matches!(validate_design(&rows), Err(Error::InvalidDesign(_))));
        let mut rows = small_design();
        rows[1].treatment = Treatment::Itld;
        rows[1].task = rows[1].group.task_for(Treatment::Itld);
        assert!(matches!(validate_design(&rows), Err(Error::InvalidDesign(_))));
        let rows = vec![row("S1", Group::MrToBsk, Treatment::Itld, 1.0)];
        assert!(matches!(validate_design(&rows), Err(Error::TooFewLevels { .. })));
    }

    #[test]
    fn rank_deficient_design() {
        // no subject in group MR->BSK: the group column is all zeros
        let rows: Vec<_> = (0..4)
            .flat_map(|i| {
                let s = format!("S{i}");
                [
                    row(&s, Group::BskToMr, Treatment::Itld, 10.0 + i as f64),
                    row(&s, Group::BskToMr, Treatment::Tdd, 20.0 - i as f64),
                ]
            })
            .collect();
        assert!(matches!(reml_fit(&rows), Err(Error::RankDeficientDesign)));
    }

    #[test]
    fn fit_has_expected_terms_and_local_optimum() {
        let rows = small_design();
        let fit = reml_fit(&rows).unwrap();
        let terms: Vec<&str> = fit.coefficients.iter().map(|c| c.term.as_str()).collect();
        assert_eq!(terms, TERMS);
        assert!(fit.var_subject >= 0.0 && fit.var_residual > 0.0);
        assert_relative_eq!(fit.aic, fit.reml_criterion + 12.0, max_relative = 1e-15);
        for factor in [0.99, 1.01] {
            let nearby = reml_criterion(&rows, fit.lambda * factor).unwrap();
            assert!(fit.reml_criterion <= nearby + 1e-12);
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let mut rows = small_design();
        rows.pop();
        let design = Design::new(&rows).unwrap();
        for t in [-3.0f64, -0.4, 0.7, 2.5] {
            let h = 1e-5;
            let f = |t: f64| design.profile(t.exp()).unwrap().criterion;
            let numeric = (f(t + h) - f(t - h)) / (2.0 * h);
            let analytic = design.profile(t.exp()).unwrap().slope;
            assert_relative_eq!(analytic, numeric, max_relative = 1e-6, epsilon = 1e-8);
        }
    }

    #[test]
    fn single_observation_subjects_are_kept() {
        let mut rows = small_design();
        rows.push(row("S9", Group::BskToMr, Treatment::Itld, 70.0));
        let fit = reml_fit(&rows).unwrap();
        assert_eq!((fit.n_obs, fit.n_subjects), (13, 7));
    }

    #[test]
    fn parse_experiment_rows() {
        let text = "subject_id,group,treatment,task,variable,value\n\
                    S1,MR->BSK,ITLD,MR,QLTY,50\n\
                    S1,MR->BSK,TDD,BSK,QLTY,40\n\
                    S1,MR->BSK,TDD,BSK,PROD,10\n\
                    S2,BSK→MR,ITLD,BSK,QLTY,30\n";
        let rows = parse_experiment_csv(text.as_bytes(), "QLTY").unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].group, Group::BskToMr);
        let bad = "subject_id,group,treatment,task,variable,value\nS1,X,ITLD,MR,QLTY,50\n";
        assert!(matches!(
            parse_experiment_csv(bad.as_bytes(), "QLTY"),
            Err(Error::BadRow { line: 2, .. })
        ));
    }

    #[test]
    fn star_bands() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.005), "**");
        assert_eq!(stars(0.03), "*");
        assert_eq!(stars(0.2), "");
    }

    #[test]
    fn summary_zero_estimate_and_boundary() {
        let mut fit = fit_at_lambda(&small_design(), 0.0).unwrap();
        fit.coefficients[1].estimate = 0.0;
        fit.coefficients[2].estimate = 1.959_963_984_540_054 * fit.coefficients[2].std_error;
        let s = summarize_fit(&fit, 0.05);
        assert_eq!(s.rows[1].p, 1.0);
        assert_eq!(s.rows[1].stars, "");
        assert_relative_eq!(s.rows[2].p, 0.05, max_relative = 1e-12);
    }
}
