use std::fmt;

use serde::{Serialize, Serializer};

/// Non-fatal conditions noticed by an analysis. Serialized as the
/// human-readable message so reports carry them verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A negative variance-component estimate was replaced by 0.
    ClampedVariance { component: String, raw: f64 },
    /// Replicates exist, so `MS(Program:Instrument)` also carries
    /// repeatability variance; `s_M^2` is reported uncorrected.
    ReplicatesPresent { residual_df: u64 },
    /// The REML optimum sits on the `lambda = 0` boundary.
    BoundaryFit,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ClampedVariance { component, raw } => write!(
                f,
                "negative variance component {component} = {raw} clamped to 0"
            ),
            Warning::ReplicatesPresent { residual_df } => write!(
                f,
                "replicates present (residual df = {residual_df}): s_M^2 is MS(Program:Instrument) without a components-of-variance correction"
            ),
            Warning::BoundaryFit => {
                f.write_str("subject variance estimate is on the boundary (0); fit equals ordinary least squares")
            }
        }
    }
}

impl Serialize for Warning {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
