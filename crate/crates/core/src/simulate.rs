//! Synthetic measurement processes with known components, and a Monte
//! Carlo driver that runs any estimator over independently seeded copies.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded per dataset with
//! `seed_from_u64`. Replicate `i` of a Monte Carlo run uses seed
//! `master.wrapping_add(i)`, so results do not depend on thread count.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accuracy::{nested_anova, trueness};
use crate::agreement::{assess_icc, bland_altman, DEFAULT_LIMIT_K};
use crate::data::{build_dataset, pair_by_object, MeasurementDataset, MeasurementRecord, TERM_PROGRAM_INSTRUMENT};
use crate::error::{Error, Result};
use crate::mixed::{ExperimentRow, Group, Treatment};
use crate::stats::{mean, pearson, sample_sd};

/// Grand mean of every generated process.
pub const PROCESS_MEAN: f64 = 50.0;
pub const SIM_VARIABLE: &str = "QLTY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentSpec {
    pub id: String,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub n_objects: usize,
    pub instruments: Vec<InstrumentSpec>,
    pub sigma_object: f64,
    /// Object x instrument interaction.
    pub sigma_interaction: f64,
    /// Replicate noise.
    pub sigma_noise: f64,
    pub replicates: u32,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProcessSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_objects < 2 {
            return bad(format!("n_objects must be at least 2, got {}", self.n_objects));
        }
        if self.instruments.is_empty() {
            return bad("no instruments".into());
        }
        let mut ids = HashSet::new();
        for ins in &self.instruments {
            if ins.id.is_empty() {
                return bad("empty instrument id".into());
            }
            if !ids.insert(ins.id.as_str()) {
                return bad(format!("duplicate instrument id `{}`", ins.id));
            }
            if !ins.bias.is_finite() {
                return bad(format!("bias of `{}` is not finite", ins.id));
            }
        }
        for (name, s) in [
            ("sigma_object", self.sigma_object),
            ("sigma_interaction", self.sigma_interaction),
            ("sigma_noise", self.sigma_noise),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {s}"));
            }
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ProcessSpec {
            seed,
            ..self.clone()
        }
    }
}

fn object_id(i: usize, n: usize) -> String {
    let width = n.to_string().len().max(3);
    format!("O{:0width$}", i + 1)
}

/// Draws one dataset of variable [`SIM_VARIABLE`]. Per object the draw
/// order is: object effect, then for each instrument its interaction
/// effect followed by the replicate errors. Normals are drawn even when a
/// sigma is 0, so changing one sigma never shifts the other streams.
pub fn gen_dataset(spec: &ProcessSpec) -> Result<MeasurementDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut records =
        Vec::with_capacity(spec.n_objects * spec.instruments.len() * spec.replicates as usize);
    for i in 0..spec.n_objects {
        let obj = object_id(i, spec.n_objects);
        let o = spec.sigma_object * z();
        for ins in &spec.instruments {
            let g = spec.sigma_interaction * z();
            for r in 1..=spec.replicates {
                let e = spec.sigma_noise * z();
                records.push(MeasurementRecord::new(
                    &obj,
                    &ins.id,
                    r,
                    SIM_VARIABLE,
                    PROCESS_MEAN + o + ins.bias + g + e,
                ));
            }
        }
    }
    build_dataset(records)
}

/// Scalar estimators available to [`monte_carlo`]. Pairwise ones use the
/// first two instruments of the spec, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Mean of the first instrument minus [`PROCESS_MEAN`].
    Trueness,
    /// Mean over object x instrument cells of the replicate sd.
    Repeatability,
    /// `MS(Program:Instrument)` of the nested ANOVA.
    SM2,
    /// Its square root.
    SM,
    DBar,
    SD,
    Rho,
    S2M,
    PearsonR,
}

impl Estimator {
    pub const ALL: [Estimator; 9] = [
        Estimator::Trueness,
        Estimator::Repeatability,
        Estimator::SM2,
        Estimator::SM,
        Estimator::DBar,
        Estimator::SD,
        Estimator::Rho,
        Estimator::S2M,
        Estimator::PearsonR,
    ];

    fn name(self) -> &'static str {
        match self {
            Estimator::Trueness => "trueness",
            Estimator::Repeatability => "repeatability",
            Estimator::SM2 => "s_m2",
            Estimator::SM => "s_m",
            Estimator::DBar => "d_bar",
            Estimator::SD => "s_d",
            Estimator::Rho => "rho",
            Estimator::S2M => "s2_m",
            Estimator::PearsonR => "pearson_r",
        }
    }

    /// Applies the estimator to one dataset drawn from `spec`.
    pub fn estimate(self, spec: &ProcessSpec, ds: &MeasurementDataset) -> Result<f64> {
        let first_two = || -> Result<(&str, &str)> {
            match spec.instruments.as_slice() {
                [a, b, ..] => Ok((a.id.as_str(), b.id.as_str())),
                _ => Err(Error::TooFewLevels {
                    factor: "Instrument".into(),
                    got: spec.instruments.len(),
                }),
            }
        };
        match self {
            Estimator::Trueness => {
                let first = &spec.instruments[0].id;
                let values: Vec<f64> = ds
                    .records()
                    .iter()
                    .filter(|r| &r.instrument_id == first)
                    .map(|r| r.value)
                    .collect();
                trueness(&values, PROCESS_MEAN)
            }
            Estimator::Repeatability => {
                let layout = ds.cells(SIM_VARIABLE)?;
                let sds = layout
                    .values
                    .iter()
                    .flatten()
                    .map(|cell| sample_sd(cell))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(mean(&sds))
            }
            Estimator::SM2 | Estimator::SM => {
                let ms = nested_anova(ds, SIM_VARIABLE)?.mean_square(TERM_PROGRAM_INSTRUMENT)?;
                Ok(if self == Estimator::SM { ms.sqrt() } else { ms })
            }
            Estimator::DBar | Estimator::SD | Estimator::PearsonR => {
                let (a, b) = first_two()?;
                let pairs = pair_by_object(ds, a, b, SIM_VARIABLE)?;
                if self == Estimator::PearsonR {
                    return Ok(pearson(&pairs)?.r);
                }
                let ba = bland_altman(&pairs, DEFAULT_LIMIT_K)?;
                Ok(if self == Estimator::DBar { ba.d_bar } else { ba.s_d })
            }
            Estimator::Rho | Estimator::S2M => {
                let icc = assess_icc(ds, SIM_VARIABLE)?;
                Ok(if self == Estimator::Rho { icc.rho } else { icc.s2_m })
            }
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub estimator: Estimator,
    pub n_reps: usize,
    pub master_seed: u64,
    pub mean: f64,
    pub sd: f64,
    /// `sd / sqrt(n_reps)`.
    pub std_error: f64,
    pub min: f64,
    pub q025: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q975: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data (the usual "type 7").
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Runs `estimator` on `n_reps` datasets in parallel and returns the
/// estimates in replicate order.
pub fn monte_carlo_estimates(spec: &ProcessSpec, estimator: Estimator, n_reps: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let results: Vec<Result<f64>> = (0..n_reps)
        .into_par_iter()
        .map(|i| {
            let rep = spec.with_seed(spec.seed.wrapping_add(i as u64));
            gen_dataset(&rep)
                .and_then(|ds| estimator.estimate(&rep, &ds))
                .map_err(|e| Error::EstimatorFailure {
                    replicate: i,
                    source: Box::new(e),
                })
        })
        .collect();
    results.into_iter().collect()
}

pub fn monte_carlo(spec: &ProcessSpec, estimator: Estimator, n_reps: usize) -> Result<MonteCarloSummary> {
    if n_reps < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: n_reps,
        });
    }
    let estimates = monte_carlo_estimates(spec, estimator, n_reps)?;
    let m = mean(&estimates);
    let sd = sample_sd(&estimates)?;
    let mut sorted = estimates;
    sorted.sort_by(f64::total_cmp);
    Ok(MonteCarloSummary {
        estimator,
        n_reps,
        master_seed: spec.seed,
        mean: m,
        sd,
        std_error: sd / (n_reps as f64).sqrt(),
        min: sorted[0],
        q025: quantile_sorted(&sorted, 0.025),
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        q975: quantile_sorted(&sorted, 0.975),
        max: sorted[sorted.len() - 1],
    })
}

/// Crossover experiment with a random subject intercept. Subjects alternate
/// between the two groups; each contributes one ITLD and one TDD row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n_subjects: usize,
    pub intercept: f64,
    pub treatment_tdd: f64,
    pub task_mr: f64,
    pub group_mr_bsk: f64,
    pub sigma_subject: f64,
    pub sigma_residual: f64,
    pub seed: u64,
}

pub fn gen_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    if spec.n_subjects < 2 {
        return Err(Error::InvalidSpec("n_subjects must be at least 2".into()));
    }
    if !(spec.sigma_subject >= 0.0 && spec.sigma_residual >= 0.0)
        || ![spec.sigma_subject, spec.sigma_residual].iter().all(|s| s.is_finite())
    {
        return Err(Error::InvalidSpec("sigmas must be finite and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut rows = Vec::with_capacity(2 * spec.n_subjects);
    for s in 0..spec.n_subjects {
        let group = if s % 2 == 0 { Group::MrToBsk } else { Group::BskToMr };
        let u = spec.sigma_subject * z();
        for treatment in [Treatment::Itld, Treatment::Tdd] {
            let task = group.task_for(treatment);
            let mut y = spec.intercept + u + spec.sigma_residual * z();
            if treatment == Treatment::Tdd {
                y += spec.treatment_tdd;
            }
            if task == crate::mixed::Task::Mr {
                y += spec.task_mr;
            }
            if group == Group::MrToBsk {
                y += spec.group_mr_bsk;
            }
            rows.push(ExperimentRow {
                subject_id: format!("S{:03}", s + 1),
                group,
                treatment,
                task,
                y,
            });
        }
    }
    Ok(rows)
}
