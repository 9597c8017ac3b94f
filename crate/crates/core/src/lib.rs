pub mod accuracy;
pub mod agreement;
pub mod data;
pub mod error;
pub mod ingest;
pub mod mixed;
pub mod report;
pub mod simulate;
pub mod svg;
pub mod stats;
pub mod warning;
