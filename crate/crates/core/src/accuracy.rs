//! Accuracy of a measuring process: repeatability, trueness, intermediate
//! precision from a nested ANOVA, expanded uncertainty and deviations from
//! known reference values.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{
    corrected_ss, AnovaRow, AnovaTable, MeasurementDataset, TERM_PROGRAM,
    TERM_PROGRAM_INSTRUMENT, TERM_RESIDUAL,
};
use crate::error::{Error, Result};
use crate::stats::{self, f_pvalue, normal_quantile, sample_sd, t_quantile};
use crate::warning::Warning;

/// Default half-width of the "on the diagonal" band, in measurement units.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Repeatability {
    pub s_r: f64,
    pub n: usize,
    /// Set when only one value was available and `s_r` defaulted to 0.
    pub single_measurement: bool,
}

/// Repeatability uncertainty `s_r`: the sample standard deviation of
/// repeated measurements of one object with one instrument.
pub fn repeatability(values: &[f64]) -> Result<Repeatability> {
    match values.len() {
        0 => Err(Error::EmptyInput),
        1 => {
            if !values[0].is_finite() {
                return Err(Error::NonFiniteValue {
                    location: "value 0".into(),
                });
            }
            Ok(Repeatability {
                s_r: 0.0,
                n: 1,
                single_measurement: true,
            })
        }
        n => Ok(Repeatability {
            s_r: sample_sd(values)?,
            n,
            single_measurement: false,
        }),
    }
}

/// Mean of `values` minus `reference`.
pub fn trueness(values: &[f64], reference: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !reference.is_finite() {
        return Err(Error::NonFiniteValue {
            location: "reference".into(),
        });
    }
    Ok(stats::mean(values) - reference)
}

/// Hierarchical decomposition `y ~ Program / Instrument`: instruments
/// nested within programs, replicates (if any) within cells.
///
/// Every program must be measured by every instrument. Replicate counts may
/// differ between cells; sums of squares are weighted by cell sizes.
pub fn nested_anova(ds: &MeasurementDataset, variable: &str) -> Result<AnovaTable> {
    let layout = ds.cells(variable)?;
    layout.require_levels()?;
    layout.require_complete()?;

    let all = || layout.values.iter().flatten().flatten().copied();
    let n_total: usize = all().count();
    let grand = all().sum::<f64>() / n_total as f64;

    let (mut ss_program, mut ss_nested, mut ss_resid) = (0.0, 0.0, 0.0);
    let mut df_nested = 0u64;
    let mut cells = 0u64;
    for row in &layout.values {
        let n_i: usize = row.iter().map(Vec::len).sum();
        let mean_i = row.iter().flatten().sum::<f64>() / n_i as f64;
        ss_program += n_i as f64 * (mean_i - grand).powi(2);
        df_nested += row.len() as u64 - 1;
        for cell in row {
            let mean_ij = stats::mean(cell);
            ss_nested += cell.len() as f64 * (mean_ij - mean_i).powi(2);
            ss_resid += cell.iter().map(|v| (v - mean_ij).powi(2)).sum::<f64>();
            cells += 1;
        }
    }
    let df_program = layout.objects.len() as u64 - 1;
    let df_resid = n_total as u64 - cells;

    let ms_resid = (df_resid > 0).then(|| ss_resid / df_resid as f64);
    let effect = |term: &str, df: u64, ss: f64| -> Result<AnovaRow> {
        let ms = ss / df as f64;
        let (f, p) = match ms_resid {
            Some(mse) if mse > 0.0 => {
                let f = ms / mse;
                (Some(f), Some(f_pvalue(f, df, df_resid)?))
            }
            _ => (None, None),
        };
        Ok(AnovaRow {
            term: term.into(),
            df,
            ss,
            ms: Some(ms),
            f,
            p,
        })
    };
    let rows = vec![
        effect(TERM_PROGRAM, df_program, ss_program)?,
        effect(TERM_PROGRAM_INSTRUMENT, df_nested, ss_nested)?,
        AnovaRow {
            term: TERM_RESIDUAL.into(),
            df: df_resid,
            ss: ss_resid,
            ms: ms_resid,
            f: None,
            p: None,
        },
    ];
    debug_assert!({
        let total = corrected_ss(all());
        let sum: f64 = rows.iter().map(|r| r.ss).sum();
        (sum - total).abs() <= 1e-9 * total.max(1.0)
    });
    Ok(AnovaTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntermediatePrecision {
    /// Instrument component on the standard-deviation scale.
    pub s_m: f64,
    /// `sqrt(s_m^2 + s_r^2)`.
    pub s_rw: f64,
}

/// Intermediate precision from a nested table: `s_M^2` is taken to be
/// `MS(Program:Instrument)` and combined with `s_r` in quadrature.
pub fn intermediate_precision(anova: &AnovaTable, s_r: f64) -> Result<IntermediatePrecision> {
    if !(s_r >= 0.0 && s_r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "s_r must be finite and non-negative, got {s_r}"
        )));
    }
    let ms = anova.mean_square(TERM_PROGRAM_INSTRUMENT)?;
    let s_m = ms.sqrt();
    Ok(IntermediatePrecision {
        s_m,
        s_rw: s_m.hypot(s_r),
    })
}

/// How the coverage factor `k` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoverageMode {
    /// `k = t(1 - alpha/2, n - 2)`.
    T,
    /// `k = z(1 - alpha/2)`.
    Normal,
    /// `k = 2` exactly.
    #[default]
    Fixed2,
}

impl fmt::Display for CoverageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverageMode::T => "t",
            CoverageMode::Normal => "normal",
            CoverageMode::Fixed2 => "fixed2",
        })
    }
}

impl FromStr for CoverageMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(CoverageMode::T),
            "normal" => Ok(CoverageMode::Normal),
            "fixed2" => Ok(CoverageMode::Fixed2),
            other => Err(Error::InvalidArgument(format!(
                "unknown coverage mode `{other}` (expected t, normal or fixed2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandedUncertainty {
    pub k: f64,
    pub u: f64,
}

/// Expanded uncertainty `U = k * s`.
pub fn expanded_uncertainty(
    s: f64,
    n: usize,
    alpha: f64,
    mode: CoverageMode,
) -> Result<ExpandedUncertainty> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "standard uncertainty must be finite and non-negative, got {s}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadProbability(alpha));
    }
    let k = match mode {
        CoverageMode::T => {
            if n < 3 {
                return Err(Error::TooFewSamples { needed: 3, got: n });
            }
            t_quantile(1.0 - alpha / 2.0, (n - 2) as f64)?
        }
        CoverageMode::Normal => normal_quantile(1.0 - alpha / 2.0)?,
        CoverageMode::Fixed2 => 2.0,
    };
    Ok(ExpandedUncertainty { k, u: k * s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyOptions {
    pub alpha: f64,
    pub coverage: CoverageMode,
    /// Externally supplied repeatability; estimated from replicates otherwise.
    pub s_r: Option<f64>,
    /// Reference value for trueness.
    pub reference: Option<f64>,
}

impl Default for AccuracyOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            coverage: CoverageMode::Fixed2,
            s_r: None,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub variable: String,
    pub n_objects: usize,
    pub n_instruments: usize,
    pub s_r: f64,
    /// Mean of all values minus the reference; absent without a reference.
    pub trueness: Option<f64>,
    pub s_m: f64,
    pub s_rw: f64,
    pub expanded: f64,
    pub coverage_k: f64,
    pub coverage: CoverageMode,
    pub alpha: f64,
    pub anova: AnovaTable,
    pub warnings: Vec<Warning>,
}

/// Full accuracy decomposition of one variable.
///
/// `s_r` is taken from `opts` when given, otherwise it is the pooled
/// within-cell standard deviation, which is 0 when there are no replicates.
pub fn assess_accuracy(
    ds: &MeasurementDataset,
    variable: &str,
    opts: &AccuracyOptions,
) -> Result<AccuracyReport> {
    let anova = nested_anova(ds, variable)?;
    let resid = anova
        .row(TERM_RESIDUAL)
        .ok_or_else(|| Error::MissingTerm(TERM_RESIDUAL.into()))?;
    let mut warnings = Vec::new();
    if resid.df > 0 {
        warnings.push(Warning::ReplicatesPresent { residual_df: resid.df });
    }
    let s_r = match opts.s_r {
        Some(s) => s,
        None => resid.ms.map_or(0.0, f64::sqrt),
    };
    let ip = intermediate_precision(&anova, s_r)?;
    let layout = ds.cells(variable)?;
    let n_objects = layout.objects.len();
    let ex = expanded_uncertainty(ip.s_rw, n_objects, opts.alpha, opts.coverage)?;
    let trueness = match opts.reference {
        Some(reference) => {
            let values: Vec<f64> = ds.of_variable(variable).map(|r| r.value).collect();
            Some(trueness(&values, reference)?)
        }
        None => None,
    };
    Ok(AccuracyReport {
        variable: variable.to_owned(),
        n_objects,
        n_instruments: layout.instruments.len(),
        s_r,
        trueness,
        s_m: ip.s_m,
        s_rw: ip.s_rw,
        expanded: ex.u,
        coverage_k: ex.k,
        coverage: opts.coverage,
        alpha: opts.alpha,
        anova,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalSide {
    Above,
    On,
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub object_id: String,
    pub true_value: f64,
    pub measured_value: f64,
    pub side: DiagonalSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub epsilon: f64,
    pub points: Vec<DeviationPoint>,
    /// Mean of `measured - true`.
    pub mean_deviation: f64,
    pub above: usize,
    pub on: usize,
    pub below: usize,
}

/// Compares measured values against reference ("true") values object by
/// object. Points within `epsilon` of the diagonal count as on it.
pub fn deviations_from_reference<'a>(
    measured: impl IntoIterator<Item = (&'a str, f64)>,
    truth: &HashMap<String, f64>,
    epsilon: f64,
) -> Result<DeviationReport> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    let mut points = Vec::new();
    for (object, value) in measured {
        let true_value = *truth
            .get(object)
            .ok_or_else(|| Error::MissingTruth(object.to_owned()))?;
        if !value.is_finite() || !true_value.is_finite() {
            return Err(Error::NonFiniteValue {
                location: format!("object {object}"),
            });
        }
        let diff = value - true_value;
        let side = if diff.abs() <= epsilon {
            DiagonalSide::On
        } else if diff > 0.0 {
            DiagonalSide::Above
        } else {
            DiagonalSide::Below
        };
        points.push(DeviationPoint {
            object_id: object.to_owned(),
            true_value,
            measured_value: value,
            side,
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let count = |s| points.iter().filter(|p| p.side == s).count();
    let mean_deviation = points
        .iter()
        .map(|p| p.measured_value - p.true_value)
        .sum::<f64>()
        / points.len() as f64;
    Ok(DeviationReport {
        epsilon,
        mean_deviation,
        above: count(DiagonalSide::Above),
        on: count(DiagonalSide::On),
        below: count(DiagonalSide::Below),
        points,
    })
}
