//! Method-comparison statistics: Bland-Altman limits of agreement and the
//! intraclass correlation ICC(3,1) from an additive two-way ANOVA.

use serde::Serialize;

use crate::data::{
    corrected_ss, AnovaRow, AnovaTable, MeasurementDataset, PairedMeasurements, TERM_INSTRUMENT,
    TERM_PROGRAM, TERM_RESIDUAL,
};
use crate::error::{Error, Result};
use crate::stats::{f_pvalue, mean, sample_sd};
use crate::warning::Warning;

/// Limit multiplier used unless the caller asks otherwise.
pub const DEFAULT_LIMIT_K: f64 = 2.0;
/// Agreement is considered good at or above this ICC.
pub const GOOD_AGREEMENT_RHO: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlandAltmanPoint {
    pub object_id: String,
    /// `(a + b) / 2`, the best available estimate of the true value.
    pub pair_mean: f64,
    /// `a - b`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlandAltmanReport {
    /// Differences are `instrument_a - instrument_b`.
    pub instrument_a: String,
    pub instrument_b: String,
    pub n: usize,
    pub d_bar: f64,
    pub s_d: f64,
    pub k: f64,
    pub lower: f64,
    pub upper: f64,
    pub points: Vec<BlandAltmanPoint>,
    pub outside_count: usize,
}

/// Bland-Altman statistics for paired measurements: mean difference,
/// standard deviation of the differences and limits `d_bar -/+ k * s_d`.
pub fn bland_altman(pairs: &PairedMeasurements, k: f64) -> Result<BlandAltmanReport> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPairs {
            needed: 3,
            got: pairs.len(),
        });
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "limit multiplier must be finite and non-negative, got {k}"
        )));
    }
    let points: Vec<BlandAltmanPoint> = pairs
        .pairs()
        .iter()
        .map(|p| BlandAltmanPoint {
            object_id: p.object_id.clone(),
            pair_mean: 0.5 * (p.value_a + p.value_b),
            difference: p.value_a - p.value_b,
        })
        .collect();
    let diffs: Vec<f64> = points.iter().map(|p| p.difference).collect();
    let d_bar = mean(&diffs);
    let s_d = sample_sd(&diffs)?;
    let lower = d_bar - k * s_d;
    let upper = d_bar + k * s_d;
    let outside_count = diffs.iter().filter(|&&d| d < lower || d > upper).count();
    Ok(BlandAltmanReport {
        instrument_a: pairs.instrument_a.clone(),
        instrument_b: pairs.instrument_b.clone(),
        n: pairs.len(),
        d_bar,
        s_d,
        k,
        lower,
        upper,
        points,
        outside_count,
    })
}

/// Additive two-way ANOVA `y ~ Instrument + Program` without replication.
///
/// Needs a complete object x instrument grid with exactly one value per
/// cell. Rows come out as Instrument, Program, Residual.
pub fn twoway_anova(ds: &MeasurementDataset, variable: &str) -> Result<AnovaTable> {
    let layout = ds.cells(variable)?;
    layout.require_levels()?;
    for (i, row) in layout.values.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if cell.len() != 1 {
                return Err(Error::IncompleteGrid {
                    reason: format!(
                        "object {} has {} values for instrument {} (need exactly 1)",
                        layout.objects[i],
                        cell.len(),
                        layout.instruments[j]
                    ),
                });
            }
        }
    }
    let grid: Vec<Vec<f64>> = layout
        .values
        .iter()
        .map(|row| row.iter().map(|c| c[0]).collect())
        .collect();
    let (n_obj, n_inst) = (grid.len(), grid[0].len());
    let grand = grid.iter().flatten().sum::<f64>() / (n_obj * n_inst) as f64;
    let row_means: Vec<f64> = grid.iter().map(|r| mean(r)).collect();
    let col_means: Vec<f64> = (0..n_inst)
        .map(|j| grid.iter().map(|r| r[j]).sum::<f64>() / n_obj as f64)
        .collect();

    let ss_inst = n_obj as f64 * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_prog = n_inst as f64 * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_resid = 0.0;
    for (i, row) in grid.iter().enumerate() {
        for (j, y) in row.iter().enumerate() {
            ss_resid += (y - row_means[i] - col_means[j] + grand).powi(2);
        }
    }
    debug_assert!({
        let total = corrected_ss(grid.iter().flatten().copied());
        (ss_inst + ss_prog + ss_resid - total).abs() <= 1e-9 * total.max(1.0)
    });

    let df_inst = n_inst as u64 - 1;
    let df_prog = n_obj as u64 - 1;
    let df_resid = df_inst * df_prog;
    let ms_resid = ss_resid / df_resid as f64;
    let effect = |term: &str, df: u64, ss: f64| -> Result<AnovaRow> {
        let ms = ss / df as f64;
        let (f, p) = if ms_resid > 0.0 {
            let f = ms / ms_resid;
            (Some(f), Some(f_pvalue(f, df, df_resid)?))
        } else {
            (None, None)
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
    Ok(AnovaTable {
        rows: vec![
            effect(TERM_INSTRUMENT, df_inst, ss_inst)?,
            effect(TERM_PROGRAM, df_prog, ss_prog)?,
            AnovaRow {
                term: TERM_RESIDUAL.into(),
                df: df_resid,
                ss: ss_resid,
                ms: Some(ms_resid),
                f: None,
                p: None,
            },
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IccReport {
    pub anova: AnovaTable,
    pub n_objects: usize,
    pub ms_instrument: f64,
    pub ms_program: f64,
    pub ms_residual: f64,
    /// Between-method variance, `(MS(Instrument) - MS(Residual)) / n_objects`,
    /// clamped at 0.
    pub s2_m: f64,
    /// Error variance, `MS(Residual)`.
    pub s2_e: f64,
    pub rho: f64,
    pub clamped: bool,
    /// `rho >= 0.75`.
    pub good_agreement: bool,
    pub warnings: Vec<Warning>,
}

/// ICC(3,1) as the between-method share of variance,
/// `rho = s2_M / (s2_M + s2_e)`, from a two-way table over `n_obj` objects.
pub fn icc3_1(anova: &AnovaTable, n_obj: usize) -> Result<IccReport> {
    if n_obj == 0 {
        return Err(Error::InvalidArgument("n_obj must be positive".into()));
    }
    let ms_instrument = anova.mean_square(TERM_INSTRUMENT)?;
    let ms_program = anova.mean_square(TERM_PROGRAM)?;
    let ms_residual = anova.mean_square(TERM_RESIDUAL)?;
    let raw = (ms_instrument - ms_residual) / n_obj as f64;
    let clamped = raw < 0.0;
    let s2_m = raw.max(0.0);
    let s2_e = ms_residual;
    if s2_m + s2_e == 0.0 {
        return Err(Error::DegenerateVariance {
            what: "between-method and error variance".into(),
        });
    }
    let rho = s2_m / (s2_m + s2_e);
    let warnings = if clamped {
        vec![Warning::ClampedVariance {
            component: "s2_M".into(),
            raw,
        }]
    } else {
        Vec::new()
    };
    Ok(IccReport {
        anova: anova.clone(),
        n_objects: n_obj,
        ms_instrument,
        ms_program,
        ms_residual,
        s2_m,
        s2_e,
        rho,
        clamped,
        good_agreement: rho >= GOOD_AGREEMENT_RHO,
        warnings,
    })
}

/// Two-way ANOVA followed by ICC(3,1).
pub fn assess_icc(ds: &MeasurementDataset, variable: &str) -> Result<IccReport> {
    let anova = twoway_anova(ds, variable)?;
    let n_obj = anova
        .row(TERM_PROGRAM)
        .map(|r| r.df as usize + 1)
        .ok_or_else(|| Error::MissingTerm(TERM_PROGRAM.into()))?;
    icc3_1(&anova, n_obj)
}
