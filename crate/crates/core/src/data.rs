//! Domain types shared by every analysis: long-format measurement records,
//! paired measurements and ANOVA tables.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TERM_PROGRAM: &str = "Program";
pub const TERM_INSTRUMENT: &str = "Instrument";
pub const TERM_PROGRAM_INSTRUMENT: &str = "Program:Instrument";
pub const TERM_RESIDUAL: &str = "Residual";

/// One observation: `value` of `variable` measured on `object_id` by
/// `instrument_id`, replicate number `replicate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub object_id: String,
    pub instrument_id: String,
    pub replicate: u32,
    pub variable: String,
    pub value: f64,
}

impl MeasurementRecord {
    pub fn new(
        object_id: impl Into<String>,
        instrument_id: impl Into<String>,
        replicate: u32,
        variable: impl Into<String>,
        value: f64,
    ) -> Self {
        Self {
            object_id: object_id.into(),
            instrument_id: instrument_id.into(),
            replicate,
            variable: variable.into(),
            value,
        }
    }
}

/// A validated, immutable collection of [`MeasurementRecord`]s.
///
/// Iteration order is insertion order. No two records share the key
/// `(object_id, instrument_id, replicate, variable)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDataset {
    records: Vec<MeasurementRecord>,
}

/// Validates `records` and wraps them in a dataset.
pub fn build_dataset(records: Vec<MeasurementRecord>) -> Result<MeasurementDataset> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = HashSet::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if r.object_id.is_empty() || r.instrument_id.is_empty() || r.variable.is_empty() {
            return Err(Error::EmptyId {
                location: format!("record {i}"),
            });
        }
        if !r.value.is_finite() {
            return Err(Error::NonFiniteValue {
                location: format!("record {i}"),
            });
        }
        let key = (
            r.object_id.as_str(),
            r.instrument_id.as_str(),
            r.replicate,
            r.variable.as_str(),
        );
        if !seen.insert(key) {
            return Err(Error::DuplicateKey {
                object: r.object_id.clone(),
                instrument: r.instrument_id.clone(),
                replicate: r.replicate,
                variable: r.variable.clone(),
            });
        }
    }
    Ok(MeasurementDataset { records })
}

impl MeasurementDataset {
    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<MeasurementRecord> {
        self.records
    }

    /// Records of one variable, in insertion order.
    pub fn of_variable<'a>(
        &'a self,
        variable: &'a str,
    ) -> impl Iterator<Item = &'a MeasurementRecord> + 'a {
        self.records.iter().filter(move |r| r.variable == variable)
    }

    /// Distinct object ids in order of first appearance.
    pub fn objects(&self) -> Vec<&str> {
        first_appearance(self.records.iter().map(|r| r.object_id.as_str()))
    }

    /// Distinct instrument ids in order of first appearance.
    pub fn instruments(&self) -> Vec<&str> {
        first_appearance(self.records.iter().map(|r| r.instrument_id.as_str()))
    }

    /// Distinct variables in order of first appearance.
    pub fn variables(&self) -> Vec<&str> {
        first_appearance(self.records.iter().map(|r| r.variable.as_str()))
    }

    /// Groups the values of `variable` into cells, objects and instruments
    /// both in first-appearance order.
    pub(crate) fn cells(&self, variable: &str) -> Result<CellLayout> {
        let records: Vec<&MeasurementRecord> = self.of_variable(variable).collect();
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let objects = first_appearance(records.iter().map(|r| r.object_id.as_str()));
        let instruments = first_appearance(records.iter().map(|r| r.instrument_id.as_str()));
        let obj_index: HashMap<&str, usize> =
            objects.iter().enumerate().map(|(i, o)| (*o, i)).collect();
        let inst_index: HashMap<&str, usize> =
            instruments.iter().enumerate().map(|(j, s)| (*s, j)).collect();
        let mut values = vec![vec![Vec::new(); instruments.len()]; objects.len()];
        for r in &records {
            values[obj_index[r.object_id.as_str()]][inst_index[r.instrument_id.as_str()]]
                .push(r.value);
        }
        Ok(CellLayout {
            objects: objects.into_iter().map(str::to_owned).collect(),
            instruments: instruments.into_iter().map(str::to_owned).collect(),
            values,
        })
    }
}

/// Values of one variable arranged as `values[object][instrument]`.
#[derive(Debug, Clone)]
pub(crate) struct CellLayout {
    pub objects: Vec<String>,
    pub instruments: Vec<String>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl CellLayout {
    /// Fails with `UnbalancedDesign` on the first empty cell.
    pub fn require_complete(&self) -> Result<()> {
        for (i, row) in self.values.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::UnbalancedDesign {
                        object: self.objects[i].clone(),
                        instrument: self.instruments[j].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn require_levels(&self) -> Result<()> {
        if self.objects.len() < 2 {
            return Err(Error::TooFewLevels {
                factor: TERM_PROGRAM.into(),
                got: self.objects.len(),
            });
        }
        if self.instruments.len() < 2 {
            return Err(Error::TooFewLevels {
                factor: TERM_INSTRUMENT.into(),
                got: self.instruments.len(),
            });
        }
        Ok(())
    }
}

fn first_appearance<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = HashSet::new();
    ids.filter(|id| seen.insert(*id)).collect()
}

/// One object measured once by each of two instruments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub object_id: String,
    pub value_a: f64,
    pub value_b: f64,
}

/// Objects measured by instrument `a` and instrument `b`, one pair per object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedMeasurements {
    pub instrument_a: String,
    pub instrument_b: String,
    pairs: Vec<Pair>,
}

impl PairedMeasurements {
    pub fn new(
        instrument_a: impl Into<String>,
        instrument_b: impl Into<String>,
        pairs: Vec<Pair>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !p.value_a.is_finite() || !p.value_b.is_finite() {
                return Err(Error::NonFiniteValue {
                    location: format!("pair {}", p.object_id),
                });
            }
            if !seen.insert(p.object_id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "object {} appears in more than one pair",
                    p.object_id
                )));
            }
        }
        Ok(Self {
            instrument_a: instrument_a.into(),
            instrument_b: instrument_b.into(),
            pairs,
        })
    }

    /// Builds pairs from bare value slices, naming objects `1..=n`.
    pub fn from_values(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "value lists differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        let pairs = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(i, (&value_a, &value_b))| Pair {
                object_id: (i + 1).to_string(),
                value_a,
                value_b,
            })
            .collect();
        Self::new("a", "b", pairs)
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn values_a(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value_a).collect()
    }

    pub fn values_b(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value_b).collect()
    }

    /// The same pairs with the instrument roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            instrument_a: self.instrument_b.clone(),
            instrument_b: self.instrument_a.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| Pair {
                    object_id: p.object_id.clone(),
                    value_a: p.value_b,
                    value_b: p.value_a,
                })
                .collect(),
        }
    }
}

/// Pairs the single `variable` value of each object under instruments `a`
/// and `b`. Pairs follow the first appearance of each object.
pub fn pair_by_object(
    ds: &MeasurementDataset,
    instrument_a: &str,
    instrument_b: &str,
    variable: &str,
) -> Result<PairedMeasurements> {
    let mut order: Vec<&str> = Vec::new();
    let mut cells: HashMap<&str, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for r in ds.of_variable(variable) {
        let slot = if r.instrument_id == instrument_a {
            0
        } else if r.instrument_id == instrument_b {
            1
        } else {
            continue;
        };
        let entry = cells.entry(r.object_id.as_str()).or_insert_with(|| {
            order.push(r.object_id.as_str());
            (Vec::new(), Vec::new())
        });
        if slot == 0 {
            entry.0.push(r.value);
        } else {
            entry.1.push(r.value);
        }
    }
    if order.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pairs = Vec::with_capacity(order.len());
    for object in order {
        let (a, b) = &cells[object];
        let value_a = single(a, object, instrument_a, variable)?;
        let value_b = single(b, object, instrument_b, variable)?;
        pairs.push(Pair {
            object_id: object.to_owned(),
            value_a,
            value_b,
        });
    }
    PairedMeasurements::new(instrument_a, instrument_b, pairs)
}

fn single(values: &[f64], object: &str, instrument: &str, variable: &str) -> Result<f64> {
    match values {
        [] => Err(Error::MissingPairMember {
            object: object.to_owned(),
            instrument: instrument.to_owned(),
            variable: variable.to_owned(),
        }),
        [v] => Ok(*v),
        _ => Err(Error::AmbiguousReplicates {
            object: object.to_owned(),
            instrument: instrument.to_owned(),
            count: values.len(),
        }),
    }
}

/// One line of an ANOVA table. `ms`, `f` and `p` are absent where they are
/// undefined (zero degrees of freedom, no error term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub term: String,
    pub df: u64,
    pub ss: f64,
    pub ms: Option<f64>,
    pub f: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
}

impl AnovaTable {
    pub fn row(&self, term: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.term == term)
    }

    /// Mean square of `term`, failing when the row is absent or has df = 0.
    pub fn mean_square(&self, term: &str) -> Result<f64> {
        let row = self
            .row(term)
            .ok_or_else(|| Error::MissingTerm(term.to_owned()))?;
        if row.df == 0 {
            return Err(Error::ZeroDf(term.to_owned()));
        }
        Ok(row.ms.unwrap_or(row.ss / row.df as f64))
    }

    pub fn total_df(&self) -> u64 {
        self.rows.iter().map(|r| r.df).sum()
    }

    pub fn total_ss(&self) -> f64 {
        self.rows.iter().map(|r| r.ss).sum()
    }
}

/// Total corrected sum of squares of `values`.
pub(crate) fn corrected_ss(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    values.map(|v| (v - mean) * (v - mean)).sum()
}
