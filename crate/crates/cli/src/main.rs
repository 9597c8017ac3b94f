//! `gauge`: command-line front end for the measurement-agreement analyses.
//!
//! Every subcommand writes `report.json` into `--out`. Exit status is 0 on
//! success, 2 for input and usage errors and 3 for numerical failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gauge_core::accuracy::{assess_accuracy, deviations_from_reference, AccuracyOptions, CoverageMode, DEFAULT_EPSILON};
use gauge_core::agreement::{assess_icc, bland_altman};
use gauge_core::data::{pair_by_object, AnovaTable, MeasurementDataset};
use gauge_core::error::{Error, Result};
use gauge_core::ingest::{
    parse_measurements_csv, parse_reference_csv, parse_test_outcomes_csv, score_outcomes, ErrorPolicy, Granularity,
};
use gauge_core::mixed::{parse_experiment_csv, reml_fit, summarize_fit};
use gauge_core::report::{AnalysisReport, CorrelationSection, MixedModelSection, SimulationSection};
use gauge_core::simulate::{monte_carlo, Estimator, ProcessSpec};
use gauge_core::stats::pearson;
use gauge_core::svg::{bland_altman_plot_csv, bland_altman_svg, deviation_svg};

#[derive(Parser)]
#[command(name = "gauge", version, about = "Accuracy and agreement of measuring instruments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Input CSV file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Variable to analyse; may be omitted when the input has only one.
    #[arg(long, global = true)]
    variable: Option<String>,
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,
    /// Coverage factor for expanded uncertainty: t, normal or fixed2.
    #[arg(long, global = true, default_value = "fixed2")]
    coverage: CoverageMode,
    /// Bland-Altman limit multiplier.
    #[arg(long, global = true, default_value_t = 2.0)]
    k: f64,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// `csv` also writes the main table of the analysis as CSV.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the analysis plot as SVG.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Turn test outcomes into percentage scores.
    Score {
        #[arg(long, default_value = "method")]
        granularity: Granularity,
    },
    /// Nested ANOVA, intermediate precision and expanded uncertainty.
    Accuracy {
        /// Known repeatability standard deviation.
        #[arg(long)]
        s_r: Option<f64>,
        /// Reference value for trueness.
        #[arg(long)]
        reference: Option<f64>,
        /// `object_id,value` file of true values; enables the deviation analysis.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Instrument compared against `--truth` (default: the first one).
        #[arg(long)]
        instrument: Option<String>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Bland-Altman mean difference and limits of agreement.
    BlandAltman {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Two-way ANOVA and ICC(3,1).
    Icc,
    /// Pearson correlation between two instruments.
    Correlate {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// REML fit of the crossover random-intercept model.
    Mixed,
    /// Monte Carlo summary of estimators on a synthetic process.
    Simulate {
        /// ProcessSpec JSON file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Repeatable; defaults to every estimator the spec supports.
        #[arg(long)]
        estimator: Vec<Estimator>,
    },
}

#[derive(Args)]
struct PairArgs {
    /// Defaults to the first instrument in the file.
    #[arg(long)]
    instrument_a: Option<String>,
    /// Defaults to the second instrument in the file.
    #[arg(long)]
    instrument_b: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn input(common: &Common) -> Result<Vec<u8>> {
    let path = common
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?;
    read(path)
}

fn variable(common: &Common, ds: &MeasurementDataset) -> Result<String> {
    if let Some(v) = &common.variable {
        return Ok(v.clone());
    }
    match ds.variables().as_slice() {
        [only] => Ok((*only).to_owned()),
        vars => Err(Error::InvalidArgument(format!(
            "input has variables {}; choose one with --variable",
            vars.join(", ")
        ))),
    }
}

fn instruments(ds: &MeasurementDataset, variable: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in ds.of_variable(variable) {
        if !out.contains(&r.instrument_id) {
            out.push(r.instrument_id.clone());
        }
    }
    out
}

fn choose_pair(pair: &PairArgs, ds: &MeasurementDataset, variable: &str) -> Result<(String, String)> {
    let all = instruments(ds, variable);
    let pick = |given: &Option<String>, idx: usize| -> Result<String> {
        match given {
            Some(id) => Ok(id.clone()),
            None => all.get(idx).cloned().ok_or(Error::TooFewLevels {
                factor: "Instrument".into(),
                got: all.len(),
            }),
        }
    };
    Ok((pick(&pair.instrument_a, 0)?, pick(&pair.instrument_b, 1)?))
}

struct Output<'a> {
    dir: &'a Path,
}

impl Output<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        fs::create_dir_all(self.dir)?;
        fs::write(self.dir.join(name), contents)?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_csv<R: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: R) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

fn anova_csv(t: &AnovaTable) -> Result<String> {
    to_csv(
        &["term", "df", "ss", "ms", "f", "p"],
        t.rows.iter().map(|r| {
            vec![r.term.clone(), r.df.to_string(), num(r.ss), opt(r.ms), opt(r.f), opt(r.p)]
        }),
    )
}

fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let out = Output { dir: &c.out };
    let report = match &cli.command {
        Command::Score { granularity } => {
            let bytes = input(c)?;
            let matrix = parse_test_outcomes_csv(&bytes)?;
            let scores = score_outcomes(&matrix, *granularity, ErrorPolicy::AsFail)?;
            if c.format == Format::Csv {
                out.write(
                    "scores.csv",
                    &to_csv(
                        &["object_id", "suite_id", "passed", "failed", "errored", "total", "percent"],
                        scores.scores.iter().map(|s| {
                            vec![
                                s.object_id.clone(),
                                s.suite_id.clone(),
                                s.passed.to_string(),
                                s.failed.to_string(),
                                s.errored.to_string(),
                                s.total.to_string(),
                                num(s.percent),
                            ]
                        }),
                    )?,
                )?;
            }
            let mut r = AnalysisReport::new("score", &bytes);
            r.scores = Some(scores);
            r
        }
        Command::Accuracy {
            s_r,
            reference,
            truth,
            instrument,
            epsilon,
        } => {
            let bytes = input(c)?;
            let ds = parse_measurements_csv(&bytes)?;
            let var = variable(c, &ds)?;
            let opts = AccuracyOptions {
                alpha: c.alpha,
                coverage: c.coverage,
                s_r: *s_r,
                reference: *reference,
            };
            let acc = assess_accuracy(&ds, &var, &opts)?;
            let mut r = AnalysisReport::new("accuracy", &bytes);
            r.add_warnings(&acc.warnings);
            if c.format == Format::Csv {
                out.write("anova.csv", &anova_csv(&acc.anova)?)?;
            }
            if let Some(path) = truth {
                let truth = parse_reference_csv(&read(path)?)?;
                let id = match instrument {
                    Some(id) => id.clone(),
                    None => instruments(&ds, &var).remove(0),
                };
                let measured = ds
                    .of_variable(&var)
                    .filter(|m| m.instrument_id == id)
                    .map(|m| (m.object_id.as_str(), m.value));
                let dev = deviations_from_reference(measured, &truth, *epsilon)?;
                if c.svg {
                    out.write("deviations.svg", &deviation_svg(&dev)?)?;
                }
                if c.format == Format::Csv {
                    out.write(
                        "deviations.csv",
                        &to_csv(
                            &["object_id", "true_value", "measured_value", "side"],
                            dev.points.iter().map(|p| {
                                vec![
                                    p.object_id.clone(),
                                    num(p.true_value),
                                    num(p.measured_value),
                                    format!("{:?}", p.side).to_lowercase(),
                                ]
                            }),
                        )?,
                    )?;
                }
                r.deviations = Some(dev);
            }
            r.accuracy = Some(acc);
            r
        }
        Command::BlandAltman { pair } => {
            let bytes = input(c)?;
            let ds = parse_measurements_csv(&bytes)?;
            let var = variable(c, &ds)?;
            let (a, b) = choose_pair(pair, &ds, &var)?;
            let pairs = pair_by_object(&ds, &a, &b, &var)?;
            let ba = bland_altman(&pairs, c.k)?;
            if c.svg {
                out.write("bland_altman.svg", &bland_altman_svg(&ba)?)?;
            }
            if c.format == Format::Csv {
                out.write("bland_altman.csv", &bland_altman_plot_csv(&ba)?)?;
            }
            let mut r = AnalysisReport::new("bland-altman", &bytes);
            r.bland_altman = Some(ba);
            r
        }
        Command::Icc => {
            let bytes = input(c)?;
            let ds = parse_measurements_csv(&bytes)?;
            let var = variable(c, &ds)?;
            let icc = assess_icc(&ds, &var)?;
            if c.format == Format::Csv {
                out.write("anova.csv", &anova_csv(&icc.anova)?)?;
            }
            let mut r = AnalysisReport::new("icc", &bytes);
            r.add_warnings(&icc.warnings);
            r.icc = Some(icc);
            r
        }
        Command::Correlate { pair } => {
            let bytes = input(c)?;
            let ds = parse_measurements_csv(&bytes)?;
            let var = variable(c, &ds)?;
            let (a, b) = choose_pair(pair, &ds, &var)?;
            let result = pearson(&pair_by_object(&ds, &a, &b, &var)?)?;
            if c.format == Format::Csv {
                out.write(
                    "correlation.csv",
                    &to_csv(
                        &["instrument_a", "instrument_b", "n", "r", "t_stat", "p_two_sided"],
                        [vec![
                            a.clone(),
                            b.clone(),
                            result.n.to_string(),
                            num(result.r),
                            num(result.t_stat),
                            num(result.p_two_sided),
                        ]],
                    )?,
                )?;
            }
            let mut r = AnalysisReport::new("correlate", &bytes);
            r.correlation = Some(CorrelationSection {
                variable: var,
                instrument_a: a,
                instrument_b: b,
                result,
            });
            r
        }
        Command::Mixed => {
            let bytes = input(c)?;
            let var = c
                .variable
                .clone()
                .ok_or_else(|| Error::InvalidArgument("mixed needs --variable".into()))?;
            let rows = parse_experiment_csv(&bytes, &var)?;
            let fit = reml_fit(&rows)?;
            let significance = summarize_fit(&fit, c.alpha);
            if c.format == Format::Csv {
                out.write(
                    "coefficients.csv",
                    &to_csv(
                        &["term", "estimate", "std_error", "z", "p", "stars"],
                        significance.rows.iter().map(|s| {
                            vec![s.term.clone(), num(s.estimate), num(s.std_error), num(s.z), num(s.p), s.stars.clone()]
                        }),
                    )?,
                )?;
            }
            let mut r = AnalysisReport::new("mixed", &bytes);
            r.add_warnings(&fit.warnings);
            r.mixed_model = Some(MixedModelSection {
                variable: var,
                fit,
                significance,
            });
            r
        }
        Command::Simulate {
            spec,
            reps,
            estimator,
        } => {
            let bytes = read(spec)?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::InvalidSpec("spec file is not UTF-8".into()))?;
            let spec = ProcessSpec::from_json(&text)?;
            let estimators = if estimator.is_empty() {
                default_estimators(&spec)
            } else {
                estimator.clone()
            };
            let summaries = estimators
                .iter()
                .map(|e| monte_carlo(&spec, *e, *reps))
                .collect::<Result<Vec<_>>>()?;
            if c.format == Format::Csv {
                out.write(
                    "monte_carlo.csv",
                    &to_csv(
                        &[
                            "estimator", "n_reps", "mean", "sd", "std_error", "min", "q025", "q25", "median", "q75",
                            "q975", "max",
                        ],
                        summaries.iter().map(|s| {
                            vec![
                                s.estimator.to_string(),
                                s.n_reps.to_string(),
                                num(s.mean),
                                num(s.sd),
                                num(s.std_error),
                                num(s.min),
                                num(s.q025),
                                num(s.q25),
                                num(s.median),
                                num(s.q75),
                                num(s.q975),
                                num(s.max),
                            ]
                        }),
                    )?,
                )?;
            }
            let mut r = AnalysisReport::new("simulate", &bytes);
            r.simulation = Some(SimulationSection { spec, summaries });
            r
        }
    };
    out.write("report.json", &report.to_json()?)
}

/// Estimators that can run on every dataset the spec produces.
fn default_estimators(spec: &ProcessSpec) -> Vec<Estimator> {
    let mut e = vec![Estimator::Trueness];
    if spec.replicates > 1 {
        e.push(Estimator::Repeatability);
    }
    if spec.instruments.len() >= 2 {
        e.extend([Estimator::SM2, Estimator::SM]);
        if spec.replicates == 1 {
            e.extend([
                Estimator::DBar,
                Estimator::SD,
                Estimator::PearsonR,
                Estimator::Rho,
                Estimator::S2M,
            ]);
        }
    }
    e
}
