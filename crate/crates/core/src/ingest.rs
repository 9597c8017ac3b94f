//! CSV ingestion of measurements and test outcomes, and conversion of test
//! outcomes into percentage scores.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{build_dataset, MeasurementDataset, MeasurementRecord};
use crate::error::{Error, Result};

pub const MEASUREMENT_HEADER: [&str; 5] = ["object_id", "instrument_id", "replicate", "variable", "value"];
pub const OUTCOME_HEADER: [&str; 5] = ["object_id", "suite_id", "case_id", "granularity", "outcome"];
pub const REFERENCE_HEADER: [&str; 2] = ["object_id", "value"];

/// Reads a headed CSV, handing each data row and its 1-based line number
/// to `row`.
pub(crate) fn read_rows(
    text: &[u8],
    header: &[&str],
    mut row: impl FnMut(u64, &csv::StringRecord) -> Result<()>,
) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text);
    let mut records = reader.records();
    let expected = header.join(",");
    let first = match records.next() {
        Some(r) => r.map_err(|e| csv_error(1, e))?,
        None => {
            return Err(Error::BadHeader {
                expected,
                found: String::new(),
            })
        }
    };
    if first.iter().ne(header.iter().copied()) {
        return Err(Error::BadHeader {
            expected,
            found: first.iter().collect::<Vec<_>>().join(","),
        });
    }
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::BadRow {
                line,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        row(line, &rec)?;
    }
    Ok(())
}

fn csv_error(line: u64, e: csv::Error) -> Error {
    Error::BadRow {
        line,
        reason: e.to_string(),
    }
}

pub(crate) fn non_empty(line: u64, field: &str, name: &str) -> Result<String> {
    if field.is_empty() {
        return Err(Error::BadRow {
            line,
            reason: format!("empty {name}"),
        });
    }
    Ok(field.to_owned())
}

pub(crate) fn parse_value(line: u64, field: &str) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::BadRow {
        line,
        reason: format!("value `{field}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::NonFiniteValue {
            location: format!("line {line}"),
        });
    }
    Ok(value)
}

/// Parses `object_id,instrument_id,replicate,variable,value` rows. An empty
/// replicate field means replicate 0.
pub fn parse_measurements_csv(text: &[u8]) -> Result<MeasurementDataset> {
    let mut records = Vec::new();
    let mut seen: HashSet<(String, String, u32, String)> = HashSet::new();
    read_rows(text, &MEASUREMENT_HEADER, |line, rec| {
        let replicate = match rec[2].trim() {
            "" => 0,
            s => s.parse().map_err(|_| Error::BadRow {
                line,
                reason: format!("replicate `{s}` is not a non-negative integer"),
            })?,
        };
        let record = MeasurementRecord {
            object_id: non_empty(line, &rec[0], "object_id")?,
            instrument_id: non_empty(line, &rec[1], "instrument_id")?,
            replicate,
            variable: non_empty(line, &rec[3], "variable")?,
            value: parse_value(line, &rec[4])?,
        };
        let key = (
            record.object_id.clone(),
            record.instrument_id.clone(),
            replicate,
            record.variable.clone(),
        );
        if !seen.insert(key) {
            return Err(Error::BadRow {
                line,
                reason: format!(
                    "duplicate key (object={}, instrument={}, replicate={}, variable={})",
                    record.object_id, record.instrument_id, replicate, record.variable
                ),
            });
        }
        records.push(record);
        Ok(())
    })?;
    build_dataset(records)
}

/// Parses `object_id,value` reference ("true") values.
pub fn parse_reference_csv(text: &[u8]) -> Result<HashMap<String, f64>> {
    let mut truth = HashMap::new();
    read_rows(text, &REFERENCE_HEADER, |line, rec| {
        let object_id = non_empty(line, &rec[0], "object_id")?;
        let value = parse_value(line, &rec[1])?;
        if truth.insert(object_id.clone(), value).is_some() {
            return Err(Error::BadRow {
                line,
                reason: format!("object {object_id} has two reference values"),
            });
        }
        Ok(())
    })?;
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(truth)
}

/// Writes a dataset in the format read by [`parse_measurements_csv`].
/// Values use the shortest representation that parses back to the same
/// `f64`.
pub fn write_measurements_csv(ds: &MeasurementDataset) -> String {
    let mut out = MEASUREMENT_HEADER.join(",");
    out.push('\n');
    for r in ds.records() {
        let _ = writeln!(
            out,
            "{},{},{},{},{:?}",
            r.object_id, r.instrument_id, r.replicate, r.variable, r.value
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Class,
    #[default]
    Method,
    Assertion,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Class => "class",
            Granularity::Method => "method",
            Granularity::Assertion => "assertion",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "class" => Ok(Granularity::Class),
            "method" => Ok(Granularity::Method),
            "assertion" => Ok(Granularity::Assertion),
            other => Err(Error::InvalidArgument(format!(
                "unknown granularity `{other}` (expected class, method or assertion)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

impl Outcome {
    fn parse(token: &str) -> Option<Self> {
        match token {
            "pass" => Some(Outcome::Pass),
            "fail" => Some(Outcome::Fail),
            "error" => Some(Outcome::Error),
            _ => None,
        }
    }

    /// pass <-> fail; `error` becomes `pass` since it scores as a failure.
    pub fn flipped(self) -> Self {
        match self {
            Outcome::Pass => Outcome::Fail,
            Outcome::Fail | Outcome::Error => Outcome::Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub object_id: String,
    pub suite_id: String,
    pub case_id: String,
    pub granularity: Granularity,
    pub outcome: Outcome,
}

/// Outcomes of test cases run against objects, unique per
/// `(object, suite, case)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestOutcomeMatrix {
    entries: Vec<TestOutcome>,
}

impl TestOutcomeMatrix {
    pub fn new(entries: Vec<TestOutcome>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if !seen.insert((&e.object_id, &e.suite_id, &e.case_id)) {
                return Err(Error::DuplicateCase {
                    line: i as u64 + 1,
                    object: e.object_id.clone(),
                    suite: e.suite_id.clone(),
                    case: e.case_id.clone(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TestOutcome] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parses `object_id,suite_id,case_id,granularity,outcome` rows.
pub fn parse_test_outcomes_csv(text: &[u8]) -> Result<TestOutcomeMatrix> {
    let mut entries = Vec::new();
    let mut seen: HashSet<(String, String, String)> = HashSet::new();
    read_rows(text, &OUTCOME_HEADER, |line, rec| {
        let object_id = non_empty(line, &rec[0], "object_id")?;
        let suite_id = non_empty(line, &rec[1], "suite_id")?;
        let case_id = non_empty(line, &rec[2], "case_id")?;
        let granularity = rec[3].parse().map_err(|_| Error::BadRow {
            line,
            reason: format!("unknown granularity `{}`", &rec[3]),
        })?;
        let outcome = Outcome::parse(&rec[4]).ok_or_else(|| Error::UnknownOutcomeToken {
            line,
            token: rec[4].to_owned(),
        })?;
        if !seen.insert((object_id.clone(), suite_id.clone(), case_id.clone())) {
            return Err(Error::DuplicateCase {
                line,
                object: object_id,
                suite: suite_id,
                case: case_id,
            });
        }
        entries.push(TestOutcome {
            object_id,
            suite_id,
            case_id,
            granularity,
            outcome,
        });
        Ok(())
    })?;
    Ok(TestOutcomeMatrix { entries })
}

/// How `error` outcomes are scored. Only one policy exists: an erroring
/// test counts as failed, but is still tallied separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ErrorPolicy {
    #[default]
    AsFail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub object_id: String,
    pub suite_id: String,
    pub passed: u32,
    pub failed: u32,
    pub errored: u32,
    pub total: u32,
    /// `100 * passed / total`.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub granularity: Granularity,
    pub error_policy: ErrorPolicy,
    /// One score per `(object, suite)`, in order of first appearance.
    pub scores: Vec<Score>,
}

impl ScoreSet {
    pub fn get(&self, object_id: &str, suite_id: &str) -> Option<&Score> {
        self.scores
            .iter()
            .find(|s| s.object_id == object_id && s.suite_id == suite_id)
    }

    /// `(object, percent)` for every object scored by `suite_id`.
    pub fn for_suite<'a>(&'a self, suite_id: &'a str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.scores
            .iter()
            .filter(move |s| s.suite_id == suite_id)
            .map(|s| (s.object_id.as_str(), s.percent))
    }

    /// Scores as measurement records, one per `(object, suite)`, with the
    /// suite acting as the instrument.
    pub fn to_dataset(&self, variable: &str) -> Result<MeasurementDataset> {
        build_dataset(
            self.scores
                .iter()
                .map(|s| MeasurementRecord::new(&s.object_id, &s.suite_id, 0, variable, s.percent))
                .collect(),
        )
    }
}

/// Percentage of test cases passed per `(object, suite)` at one granularity.
///
/// Every `(object, suite)` present in the matrix is scored; one without any
/// entry at `granularity` is an error.
pub fn score_outcomes(
    m: &TestOutcomeMatrix,
    granularity: Granularity,
    policy: ErrorPolicy,
) -> Result<ScoreSet> {
    if m.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut order: Vec<(&str, &str)> = Vec::new();
    let mut tallies: HashMap<(&str, &str), [u32; 3]> = HashMap::new();
    for e in m.entries() {
        let key = (e.object_id.as_str(), e.suite_id.as_str());
        let tally = tallies.entry(key).or_insert_with(|| {
            order.push(key);
            [0; 3]
        });
        if e.granularity != granularity {
            continue;
        }
        match e.outcome {
            Outcome::Pass => tally[0] += 1,
            Outcome::Fail => tally[1] += 1,
            Outcome::Error => tally[2] += 1,
        }
    }
    let mut scores = Vec::with_capacity(order.len());
    for key in order {
        let [passed, failed, errored] = tallies[&key];
        let total = passed + failed + errored;
        if total == 0 {
            return Err(Error::NoEntriesAtGranularity {
                object: key.0.to_owned(),
                suite: key.1.to_owned(),
                granularity: granularity.to_string(),
            });
        }
        let percent = match policy {
            ErrorPolicy::AsFail => 100.0 * f64::from(passed) / f64::from(total),
        };
        scores.push(Score {
            object_id: key.0.to_owned(),
            suite_id: key.1.to_owned(),
            passed,
            failed,
            errored,
            total,
            percent,
        });
    }
    Ok(ScoreSet {
        granularity,
        error_policy: policy,
        scores,
    })
}
