//! Stability of saliency maps under small image transformations.
//!
//! Two protocols share one statistic, Spearman's rank correlation over all
//! pixels:
//!
//! * **frames**: correlate maps of consecutive frames of a zoom/pan video,
//!   explained for the same class;
//! * **crop**: crop-and-resize the original map with the same transform that
//!   produced the transformed input, then correlate it with the map
//!   computed on the transformed input.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accuracy::mean;
use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, SaliencyMap};
use crate::resample::{apply_crop, sample_crop, CropSpec};
use crate::rng::RngStream;

pub const DEFAULT_PAIR_COUNT: usize = 5;

/// Fractional ranks (1-based) with ties sharing their average rank.
///
/// Values are ordered with a stable sort; only exactly equal values tie.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Spearman correlation of two equally long value slices.
pub fn spearman_values(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left_height: 1,
            left_width: a.len(),
            right_height: 1,
            right_width: b.len(),
        });
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    // ranks always average to (n + 1) / 2
    let centre = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let dx = x - centre;
        let dy = y - centre;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateRanks);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation of two maps flattened row-major.
pub fn spearman(a: &SaliencyMap, b: &SaliencyMap) -> Result<f64> {
    ensure_same_dims(a.dims(), b.dims())?;
    spearman_values(a.values(), b.values())
}

/// Correlation between the cropped original map and the map explained on
/// the cropped input.
pub fn crop_stability(
    original_saliency: &SaliencyMap,
    transformed_saliency: &SaliencyMap,
    crop: &CropSpec,
) -> Result<f64> {
    ensure_same_dims((crop.out_h, crop.out_w), transformed_saliency.dims())?;
    let aligned = apply_crop(original_saliency, crop)?;
    spearman(&aligned, transformed_saliency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Frames,
    Crop,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Frames => "frames",
            Protocol::Crop => "crop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub subject_id: String,
    pub class_id: Option<u64>,
    pub protocol: Protocol,
    pub pair_index: usize,
    /// Frame indices correlated (frames protocol).
    pub frames: Option<[usize; 2]>,
    /// Transform applied to the original map (crop protocol).
    pub crop: Option<CropSpec>,
    /// `None` when either map has constant ranks.
    pub correlation: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub record_count: usize,
    pub degenerate_count: usize,
    /// Mean over every non-degenerate record.
    pub pooled_mean: Option<f64>,
    /// Mean per subject over its non-degenerate records.
    pub subject_means: BTreeMap<String, Option<f64>>,
}

impl StabilitySummary {
    pub fn from_records(records: &[StabilityRecord]) -> Self {
        let pooled: Vec<f64> = records.iter().filter_map(|r| r.correlation).collect();
        let mut per_subject: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in records {
            let entry = per_subject.entry(r.subject_id.clone()).or_default();
            if let Some(c) = r.correlation {
                entry.push(c);
            }
        }
        Self {
            record_count: records.len(),
            degenerate_count: records.iter().filter(|r| r.degenerate).count(),
            pooled_mean: mean(&pooled),
            subject_means: per_subject
                .into_iter()
                .map(|(k, v)| (k, mean(&v)))
                .collect(),
        }
    }
}

/// An explained frame sequence: one saliency map per frame, all for the
/// same class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSequenceManifest {
    pub subject_id: String,
    pub class_id: Option<u64>,
    /// Saliency map files, relative to the manifest's directory.
    pub frames: Vec<PathBuf>,
    /// First frame of each correlated pair `(i, i + 1)`; evenly spaced
    /// defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<usize>>,
}

/// `count` pairs `(k·stride, k·stride + 1)` with `stride = ⌊frames / count⌋`,
/// reduced to `frames − 1` pairs for very short sequences.
pub fn default_pair_starts(frames: usize, count: usize) -> Vec<usize> {
    if frames < 2 || count == 0 {
        return Vec::new();
    }
    let count = count.min(frames - 1);
    let stride = (frames / count).max(1);
    (0..count)
        .map(|k| k * stride)
        .filter(|&i| i + 1 < frames)
        .collect()
}

impl FrameSequenceManifest {
    pub fn pair_starts(&self, default_count: usize) -> Result<Vec<usize>> {
        let n = self.frames.len();
        if n < 2 {
            return Err(Error::Manifest(format!(
                "sequence {} has {} frame(s); need at least 2",
                self.subject_id, n
            )));
        }
        let starts = match &self.pairs {
            Some(p) => p.clone(),
            None => default_pair_starts(n, default_count),
        };
        if let Some(bad) = starts.iter().find(|&&i| i + 1 >= n) {
            return Err(Error::Manifest(format!(
                "sequence {}: pair start {bad} has no successor among {n} frames",
                self.subject_id
            )));
        }
        Ok(starts)
    }
}

/// Records from one batch run, plus inputs that were missing on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityBatch {
    pub records: Vec<StabilityRecord>,
    pub skipped: Vec<PathBuf>,
}

/// Correlates the selected consecutive-frame pairs of one sequence.
///
/// `pairs` overrides the manifest's own selection. Paths are resolved
/// against `base_dir` and read through `load`; pairs with a missing frame
/// file are skipped.
pub fn frame_stability<F>(
    manifest: &FrameSequenceManifest,
    pairs: Option<&[usize]>,
    base_dir: &Path,
    load: F,
) -> Result<StabilityBatch>
where
    F: Fn(&Path) -> Result<SaliencyMap> + Sync,
{
    let starts = match pairs {
        Some(p) => {
            let m = FrameSequenceManifest {
                pairs: Some(p.to_vec()),
                ..manifest.clone()
            };
            m.pair_starts(DEFAULT_PAIR_COUNT)?
        }
        None => manifest.pair_starts(DEFAULT_PAIR_COUNT)?,
    };
    let results: Vec<Outcome> = starts
        .par_iter()
        .enumerate()
        .map(|(pair_index, &i)| {
            let a = match load_or_skip(&load, &base_dir.join(&manifest.frames[i]))? {
                Loaded::Map(m) => m,
                Loaded::Missing(p) => return Ok(Outcome::Skipped(p)),
            };
            let b = match load_or_skip(&load, &base_dir.join(&manifest.frames[i + 1]))? {
                Loaded::Map(m) => m,
                Loaded::Missing(p) => return Ok(Outcome::Skipped(p)),
            };
            ensure_same_dims(a.dims(), b.dims())?;
            let correlation = degenerate_to_none(spearman(&a, &b))?;
            Ok(Outcome::Record(StabilityRecord {
                subject_id: manifest.subject_id.clone(),
                class_id: manifest.class_id,
                protocol: Protocol::Frames,
                pair_index,
                frames: Some([i, i + 1]),
                crop: None,
                correlation,
                degenerate: correlation.is_none(),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(split_outcomes(results))
}

enum Outcome {
    Record(StabilityRecord),
    Skipped(PathBuf),
}

enum Loaded {
    Map(SaliencyMap),
    Missing(PathBuf),
}

fn load_or_skip<F>(load: &F, path: &Path) -> Result<Loaded>
where
    F: Fn(&Path) -> Result<SaliencyMap>,
{
    match load(path) {
        Ok(m) => Ok(Loaded::Map(m)),
        Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => {
            log::warn!("skipping missing saliency map {}", path.display());
            Ok(Loaded::Missing(path.to_path_buf()))
        }
        Err(e) => Err(e),
    }
}

fn split_outcomes(results: Vec<Outcome>) -> StabilityBatch {
    let mut batch = StabilityBatch {
        records: Vec::new(),
        skipped: Vec::new(),
    };
    for r in results {
        match r {
            Outcome::Record(rec) => batch.records.push(rec),
            Outcome::Skipped(p) => batch.skipped.push(p),
        }
    }
    batch
}

/// One original/transformed pair for the crop protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropBatchEntry {
    pub subject_id: String,
    #[serde(default)]
    pub class_id: Option<u64>,
    pub original: PathBuf,
    pub transformed: PathBuf,
    /// Transform used to produce the transformed input; drawn from the
    /// master seed and the entry's ordinal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<CropSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropBatchManifest {
    pub entries: Vec<CropBatchEntry>,
}

/// Crop-scale bounds for crops drawn in-tool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropScale {
    pub min: f64,
    pub max: f64,
}

impl Default for CropScale {
    fn default() -> Self {
        Self {
            min: 0.75,
            max: 0.9,
        }
    }
}

/// The crop used for entry `ordinal` of a batch.
pub fn entry_crop(
    entry: &CropBatchEntry,
    ordinal: usize,
    master_seed: u64,
    scale: CropScale,
    source_dims: (usize, usize),
) -> Result<CropSpec> {
    match entry.crop {
        Some(c) => Ok(c),
        None => sample_crop(
            &mut RngStream::new(master_seed, ordinal as u64),
            source_dims.0,
            source_dims.1,
            scale.min,
            scale.max,
        ),
    }
}

/// Per-entry crop correlations in manifest order. Entries with a missing
/// file are skipped; the crop of entry `k` still derives from ordinal `k`.
pub fn crop_stability_batch<F>(
    entries: &[CropBatchEntry],
    master_seed: u64,
    scale: CropScale,
    base_dir: &Path,
    load: F,
) -> Result<StabilityBatch>
where
    F: Fn(&Path) -> Result<SaliencyMap> + Sync,
{
    if entries.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let results: Vec<Outcome> = entries
        .par_iter()
        .enumerate()
        .map(|(ordinal, entry)| {
            let original = match load_or_skip(&load, &base_dir.join(&entry.original))? {
                Loaded::Map(m) => m,
                Loaded::Missing(p) => return Ok(Outcome::Skipped(p)),
            };
            let transformed = match load_or_skip(&load, &base_dir.join(&entry.transformed))? {
                Loaded::Map(m) => m,
                Loaded::Missing(p) => return Ok(Outcome::Skipped(p)),
            };
            let crop = entry_crop(entry, ordinal, master_seed, scale, original.dims())?;
            let correlation = degenerate_to_none(crop_stability(&original, &transformed, &crop))?;
            Ok(Outcome::Record(StabilityRecord {
                subject_id: entry.subject_id.clone(),
                class_id: entry.class_id,
                protocol: Protocol::Crop,
                pair_index: ordinal,
                frames: None,
                crop: Some(crop),
                correlation,
                degenerate: correlation.is_none(),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(split_outcomes(results))
}

fn degenerate_to_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateRanks) => Ok(None),
        Err(e) => Err(e),
    }
}
