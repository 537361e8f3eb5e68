//! Run reports.
//!
//! JSON reports are canonical: keys sorted, floats in shortest round-trip
//! form, two-space indentation, trailing newline. Parsing and re-writing a
//! report reproduces it byte for byte. CSV reports hold one row per record.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::accuracy::{AccuracyRecord, AccuracySummary};
use crate::error::{Error, Result};
use crate::io::NegativePolicy;
use crate::stability::{StabilityRecord, StabilitySummary};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidParameter(format!("unknown report format {other:?}"))),
        }
    }
}

/// Everything needed to re-run the command that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub negative_policy: NegativePolicy,
    /// Numeric and switch settings (kernel size, thresholds, seed, ...).
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Input paths as given on the command line.
    pub inputs: BTreeMap<String, String>,
    /// Inputs that were expected but missing or unreadable.
    pub skipped: Vec<String>,
}

impl RunMetadata {
    pub fn new(command: &str, negative_policy: NegativePolicy) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            negative_policy,
            parameters: BTreeMap::new(),
            inputs: BTreeMap::new(),
            skipped: Vec::new(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter is serializable"),
        );
        self
    }

    pub fn with_input(mut self, key: &str, path: &Path) -> Self {
        self.inputs.insert(key.to_string(), path.display().to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Accuracy {
        records: Vec<AccuracyRecord>,
        summary: AccuracySummary,
    },
    Stability {
        records: Vec<StabilityRecord>,
        summary: StabilitySummary,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub metadata: RunMetadata,
    pub body: ReportBody,
}

impl ReportDocument {
    pub fn accuracy(metadata: RunMetadata, records: Vec<AccuracyRecord>, small_threshold: f64) -> Self {
        let summary = AccuracySummary::from_records(&records, small_threshold);
        Self {
            format_version: REPORT_FORMAT_VERSION,
            metadata,
            body: ReportBody::Accuracy { records, summary },
        }
    }

    pub fn stability(metadata: RunMetadata, records: Vec<StabilityRecord>) -> Self {
        let summary = StabilitySummary::from_records(&records);
        Self {
            format_version: REPORT_FORMAT_VERSION,
            metadata,
            body: ReportBody::Stability { records, summary },
        }
    }

    pub fn record_count(&self) -> usize {
        match &self.body {
            ReportBody::Accuracy { records, .. } => records.len(),
            ReportBody::Stability { records, .. } => records.len(),
        }
    }

    /// Whether the stored summary equals one recomputed from the records.
    pub fn summary_is_consistent(&self) -> bool {
        match &self.body {
            ReportBody::Accuracy { records, summary } => {
                &AccuracySummary::from_records(records, summary.small_threshold) == summary
            }
            ReportBody::Stability { records, summary } => {
                &StabilitySummary::from_records(records) == summary
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        // Value maps are BTreeMaps, so keys come out sorted
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if !doc.summary_is_consistent() {
            return Err(Error::SummaryMismatch);
        }
        Ok(doc)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.body {
            ReportBody::Accuracy { records, .. } => {
                w.write_record([
                    "image_id",
                    "class_id",
                    "weighting_accuracy",
                    "pointing_hit",
                    "mask_area_fraction",
                    "dilated_mask_area_fraction",
                    "uniform_baseline",
                    "degenerate",
                    "resized_from_h",
                    "resized_from_w",
                ])?;
                for r in records {
                    w.write_record([
                        r.image_id.to_string(),
                        r.class_id.to_string(),
                        opt(r.weighting_accuracy),
                        r.pointing_hit.to_string(),
                        r.mask_area_fraction.to_string(),
                        r.dilated_mask_area_fraction.to_string(),
                        r.uniform_baseline.to_string(),
                        r.degenerate.to_string(),
                        opt(r.resized_from.map(|d| d[0])),
                        opt(r.resized_from.map(|d| d[1])),
                    ])?;
                }
            }
            ReportBody::Stability { records, .. } => {
                w.write_record([
                    "subject_id",
                    "class_id",
                    "protocol",
                    "pair_index",
                    "frame_a",
                    "frame_b",
                    "crop_top",
                    "crop_left",
                    "crop_side",
                    "crop_out_h",
                    "crop_out_w",
                    "correlation",
                    "degenerate",
                ])?;
                for r in records {
                    w.write_record([
                        r.subject_id.clone(),
                        opt(r.class_id),
                        r.protocol.as_str().to_string(),
                        r.pair_index.to_string(),
                        opt(r.frames.map(|f| f[0])),
                        opt(r.frames.map(|f| f[1])),
                        opt(r.crop.map(|c| c.top)),
                        opt(r.crop.map(|c| c.left)),
                        opt(r.crop.map(|c| c.side)),
                        opt(r.crop.map(|c| c.out_h)),
                        opt(r.crop.map(|c| c.out_w)),
                        opt(r.correlation),
                        r.degenerate.to_string(),
                    ])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_report(doc: &ReportDocument, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Json => doc.to_json()?,
        ReportFormat::Csv => doc.to_csv()?,
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a JSON report and checks its summary against its records.
pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReportDocument::from_json(&text)
}
