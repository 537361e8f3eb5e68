//! Batch drivers behind the command-line subcommands.
//!
//! Every driver validates its inputs up front ([`RunError::Config`]), works
//! data-parallel over records on a dedicated thread pool, and gathers
//! results in a canonical order so the report bytes do not depend on the
//! worker count.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accuracy::{evaluate_mask, AccuracyConfig, AccuracyRecord};
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, SaliencyMap};
use crate::io::{
    read_mask_png, read_saliency, write_mask_png, write_saliency, NegativePolicy, ReportDocument,
    RunMetadata,
};
use crate::mask::{
    class_union_mask, compress_counts, encode_rle, parse_annotations, AnnotationFilter,
};
use crate::resample::{apply_crop, sample_crop, synthesize_zoom_sequence, CropSpec};
use crate::rng::RngStream;
use crate::stability::{
    crop_stability_batch, frame_stability, CropBatchEntry, CropBatchManifest, CropScale,
    FrameSequenceManifest, StabilityRecord,
};
use crate::synth::{equivariant_class_saliency, equivariant_saliency, random_scene, ShapeKind, SyntheticScene};

/// Why a run did not produce a usable report.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad arguments or unreadable inputs, detected before any work.
    #[error("configuration error: {0}")]
    Config(Error),
    /// The run finished but produced no usable record.
    #[error("no usable records")]
    Empty(Option<Box<ReportDocument>>),
    #[error(transparent)]
    Failed(#[from] Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Empty(_) => 3,
            RunError::Failed(_) => 1,
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn require_dir(path: &Path, what: &str) -> RunResult<()> {
    if !path.is_dir() {
        return Err(RunError::Config(Error::InvalidParameter(format!(
            "{what} {} is not a directory",
            path.display()
        ))));
    }
    Ok(())
}

fn require_file(path: &Path, what: &str) -> RunResult<()> {
    if !path.is_file() {
        return Err(RunError::Config(Error::InvalidParameter(format!(
            "{what} {} does not exist",
            path.display()
        ))));
    }
    Ok(())
}

/// Where class masks come from.
#[derive(Debug, Clone)]
pub enum MaskSource {
    Annotations {
        path: PathBuf,
        filter: AnnotationFilter,
    },
    /// `{image_id}_{class_id}.png` files.
    PngDir(PathBuf),
}

#[derive(Debug, Clone)]
pub struct AccuracyRun {
    pub masks: MaskSource,
    pub saliency_dir: PathBuf,
    pub config: AccuracyConfig,
    pub small_threshold: f64,
    pub negatives: NegativePolicy,
}

enum PairMask {
    Annotated(crate::mask::ClassAnnotationSet),
    File(PathBuf),
}

struct Pair {
    image_id: u64,
    class_id: u64,
    mask: PairMask,
}

/// Finds `{stem}.smap`, falling back to `{stem}.png`.
pub fn find_saliency_file(dir: &Path, stem: &str) -> Option<PathBuf> {
    ["smap", "png"]
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

fn parse_pair_stem(stem: &str) -> Option<(u64, u64)> {
    let (a, b) = stem.split_once('_')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

fn list_mask_pngs(dir: &Path) -> Result<Vec<Pair>> {
    let mut pairs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        let Some((image_id, class_id)) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(parse_pair_stem)
        else {
            log::warn!("ignoring mask file with unexpected name {}", path.display());
            continue;
        };
        pairs.push(Pair {
            image_id,
            class_id,
            mask: PairMask::File(path),
        });
    }
    pairs.sort_by_key(|p| (p.image_id, p.class_id));
    Ok(pairs)
}

/// Weighting and Pointing Game over every (image, class) pair.
pub fn run_accuracy(run: &AccuracyRun, command: &str) -> RunResult<ReportDocument> {
    require_dir(&run.saliency_dir, "saliency directory")?;
    if !(run.small_threshold > 0.0 && run.small_threshold <= 1.0) {
        return Err(RunError::Config(Error::InvalidParameter(format!(
            "small-object threshold must lie in (0, 1], got {}",
            run.small_threshold
        ))));
    }
    let (pairs, mut metadata) = match &run.masks {
        MaskSource::Annotations { path, filter } => {
            require_file(path, "annotation file")?;
            let sets = parse_annotations(path, filter).map_err(|e| match e {
                Error::EmptyDataset => RunError::Empty(None),
                other => RunError::Config(other),
            })?;
            let pairs: Vec<Pair> = sets
                .into_iter()
                .map(|s| Pair {
                    image_id: s.image_id,
                    class_id: s.class_id,
                    mask: PairMask::Annotated(s),
                })
                .collect();
            let meta = RunMetadata::new(command, run.negatives)
                .with_input("annotations", path)
                .with_parameter("include_crowd", filter.include_crowd)
                .with_parameter("categories", &filter.categories);
            (pairs, meta)
        }
        MaskSource::PngDir(dir) => {
            require_dir(dir, "mask directory")?;
            let pairs = list_mask_pngs(dir).map_err(RunError::Config)?;
            (pairs, RunMetadata::new(command, run.negatives).with_input("masks_dir", dir))
        }
    };
    metadata = metadata
        .with_input("saliency_dir", &run.saliency_dir)
        .with_parameter("kernel_size", run.config.kernel.size())
        .with_parameter("pointing_tolerance", run.config.pointing_tolerance)
        .with_parameter("small_threshold", run.small_threshold);

    let outcomes: Vec<std::result::Result<AccuracyRecord, String>> = pairs
        .par_iter()
        .map(|pair| -> Result<_> {
            let stem = format!("{}_{}", pair.image_id, pair.class_id);
            let Some(path) = find_saliency_file(&run.saliency_dir, &stem) else {
                log::warn!("no saliency map for {stem}; skipping");
                return Ok(Err(stem));
            };
            let saliency = read_saliency(&path, run.negatives)?;
            let mask: BinaryMask = match &pair.mask {
                PairMask::Annotated(set) => class_union_mask(set)?,
                PairMask::File(p) => read_mask_png(p)?,
            };
            Ok(Ok(evaluate_mask(&saliency, &mask, pair.image_id, pair.class_id, &run.config)?))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(stem) => metadata.skipped.push(stem),
        }
    }
    let doc = ReportDocument::accuracy(metadata, records, run.small_threshold);
    finish(doc, |d| match &d.body {
        crate::io::ReportBody::Accuracy { summary, .. } => summary.record_count > summary.degenerate_count,
        _ => unreachable!(),
    })
}

fn finish(doc: ReportDocument, usable: impl Fn(&ReportDocument) -> bool) -> RunResult<ReportDocument> {
    if usable(&doc) {
        Ok(doc)
    } else {
        Err(RunError::Empty(Some(Box::new(doc))))
    }
}

fn stability_usable(doc: &ReportDocument) -> bool {
    match &doc.body {
        crate::io::ReportBody::Stability { summary, .. } => summary.pooled_mean.is_some(),
        _ => unreachable!(),
    }
}

#[derive(Debug, Clone)]
pub struct CropRun {
    pub manifest: PathBuf,
    pub seed: u64,
    pub scale: CropScale,
    pub negatives: NegativePolicy,
}

pub fn read_crop_manifest(path: &Path) -> Result<CropBatchManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
}

/// Crop protocol over a manifest of original/transformed pairs.
pub fn run_stability_crop(run: &CropRun) -> RunResult<ReportDocument> {
    require_file(&run.manifest, "crop manifest")?;
    validate_scale(run.scale)?;
    let manifest = read_crop_manifest(&run.manifest).map_err(RunError::Config)?;
    let base = run.manifest.parent().unwrap_or(Path::new(""));
    let batch = crop_stability_batch(&manifest.entries, run.seed, run.scale, base, |p| {
        read_saliency(p, run.negatives)
    })
    .map_err(|e| match e {
        Error::EmptyAggregate => RunError::Empty(None),
        other => RunError::Failed(other),
    })?;
    let mut metadata = RunMetadata::new("stability-crop", run.negatives)
        .with_input("manifest", &run.manifest)
        .with_parameter("seed", run.seed)
        .with_parameter("scale_min", run.scale.min)
        .with_parameter("scale_max", run.scale.max);
    metadata.skipped = relative_names(&batch.skipped, base);
    finish(ReportDocument::stability(metadata, batch.records), stability_usable)
}

fn validate_scale(scale: CropScale) -> RunResult<()> {
    if !(scale.min > 0.0 && scale.min <= scale.max && scale.max <= 1.0) {
        return Err(RunError::Config(Error::InvalidParameter(format!(
            "crop scale bounds must satisfy 0 < min <= max <= 1, got [{}, {}]",
            scale.min, scale.max
        ))));
    }
    Ok(())
}

fn relative_names(paths: &[PathBuf], base: &Path) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.strip_prefix(base).unwrap_or(p).display().to_string())
        .collect()
}

/// Frame-sequence manifest file: one sequence or a list of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameManifestFile {
    Many { sequences: Vec<FrameSequenceManifest> },
    One(FrameSequenceManifest),
}

impl FrameManifestFile {
    pub fn into_sequences(self) -> Vec<FrameSequenceManifest> {
        match self {
            FrameManifestFile::Many { sequences } => sequences,
            FrameManifestFile::One(s) => vec![s],
        }
    }
}

pub fn read_frame_manifest(path: &Path) -> Result<Vec<FrameSequenceManifest>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: FrameManifestFile =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    Ok(file.into_sequences())
}

#[derive(Debug, Clone)]
pub struct FramesRun {
    pub manifests: Vec<PathBuf>,
    /// Pair starts overriding every manifest's selection.
    pub pairs: Option<Vec<usize>>,
    pub negatives: NegativePolicy,
}

/// Consecutive-frame protocol over one or more manifests.
pub fn run_stability_frames(run: &FramesRun) -> RunResult<ReportDocument> {
    if run.manifests.is_empty() {
        return Err(RunError::Config(Error::InvalidParameter(
            "at least one frame manifest is required".into(),
        )));
    }
    let mut jobs = Vec::new();
    for path in &run.manifests {
        require_file(path, "frame manifest")?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        for seq in read_frame_manifest(path).map_err(RunError::Config)? {
            let starts = match &run.pairs {
                Some(p) => FrameSequenceManifest {
                    pairs: Some(p.clone()),
                    ..seq.clone()
                }
                .pair_starts(crate::stability::DEFAULT_PAIR_COUNT),
                None => seq.pair_starts(crate::stability::DEFAULT_PAIR_COUNT),
            };
            starts.map_err(RunError::Config)?;
            jobs.push((base.clone(), seq));
        }
    }
    let batches = jobs
        .par_iter()
        .map(|(base, seq)| {
            frame_stability(seq, run.pairs.as_deref(), base, |p| read_saliency(p, run.negatives))
                .map(|b| (base, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut metadata = RunMetadata::new("stability-frames", run.negatives)
        .with_parameter("pairs", &run.pairs);
    for (i, m) in run.manifests.iter().enumerate() {
        metadata = metadata.with_input(&format!("manifest_{i}"), m);
    }
    let mut records: Vec<StabilityRecord> = Vec::new();
    for (base, b) in batches {
        metadata.skipped.extend(relative_names(&b.skipped, base));
        records.extend(b.records);
    }
    finish(ReportDocument::stability(metadata, records), stability_usable)
}

#[derive(Debug, Clone)]
pub struct MakeCropsRun {
    pub images_dir: PathBuf,
    pub saliency_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub scale: CropScale,
    pub negatives: NegativePolicy,
}

/// Summary of a `make-crops` run.
#[derive(Debug, Clone, PartialEq)]
pub struct MakeCropsOutput {
    pub manifest_path: PathBuf,
    pub entries: usize,
    pub aligned_maps: usize,
}

/// Samples one crop per input PNG and writes the cropped images plus a
/// crop-batch manifest.
///
/// Output layout under `out_dir`:
/// * `crops/{stem}.png`: cropped and resized input image;
/// * `aligned/{stem}.smap`: the cropped original map, when `saliency_dir`
///   holds `{stem}.smap` or `{stem}.png`;
/// * `crop_manifest.json`: entries pointing at `original/{stem}.smap` and
///   `transformed/{stem}.smap`, for an external explainer to fill in.
pub fn run_make_crops(run: &MakeCropsRun) -> RunResult<MakeCropsOutput> {
    require_dir(&run.images_dir, "image directory")?;
    if let Some(d) = &run.saliency_dir {
        require_dir(d, "saliency directory")?;
    }
    validate_scale(run.scale)?;
    let mut images: Vec<PathBuf> = fs::read_dir(&run.images_dir)
        .map_err(|e| RunError::Config(Error::io(&run.images_dir, e)))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("png"))
        .collect();
    images.sort();
    if images.is_empty() {
        return Err(RunError::Empty(None));
    }
    for sub in ["crops", "aligned", "original", "transformed"] {
        let d = run.out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let results: Vec<(CropBatchEntry, bool)> = images
        .par_iter()
        .enumerate()
        .map(|(ordinal, path)| -> Result<_> {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
            let img = image::open(path).map_err(|e| Error::Format {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            let (w, h) = (img.width() as usize, img.height() as usize);
            let crop = sample_crop(
                &mut RngStream::new(run.seed, ordinal as u64),
                h,
                w,
                run.scale.min,
                run.scale.max,
            )?;
            crop_image(&img, &crop)?.save(run.out_dir.join("crops").join(format!("{stem}.png")))?;
            let mut aligned = false;
            if let Some(dir) = &run.saliency_dir {
                if let Some(src) = find_saliency_file(dir, &stem) {
                    let map = read_saliency(&src, run.negatives)?;
                    let map_crop = if map.dims() == (h, w) {
                        crop
                    } else {
                        return Err(Error::DimensionMismatch {
                            left_height: map.height(),
                            left_width: map.width(),
                            right_height: h,
                            right_width: w,
                        });
                    };
                    write_saliency(
                        &apply_crop(&map, &map_crop)?,
                        run.out_dir.join("aligned").join(format!("{stem}.smap")),
                    )?;
                    aligned = true;
                }
            }
            Ok((
                CropBatchEntry {
                    subject_id: stem.clone(),
                    class_id: None,
                    original: PathBuf::from("original").join(format!("{stem}.smap")),
                    transformed: PathBuf::from("transformed").join(format!("{stem}.smap")),
                    crop: Some(crop),
                },
                aligned,
            ))
        })
        .collect::<Result<_>>()?;

    let aligned_maps = results.iter().filter(|(_, a)| *a).count();
    let manifest = CropBatchManifest {
        entries: results.into_iter().map(|(e, _)| e).collect(),
    };
    let manifest_path = run.out_dir.join("crop_manifest.json");
    write_json(&manifest_path, &manifest)?;
    Ok(MakeCropsOutput {
        manifest_path,
        entries: manifest.entries.len(),
        aligned_maps,
    })
}

/// Crops and bilinearly resizes each channel of an 8-bit image.
fn crop_image(img: &DynamicImage, crop: &CropSpec) -> Result<DynamicImage> {
    let channels: Vec<Vec<u8>> = match img {
        DynamicImage::ImageLuma8(g) => vec![g.as_raw().clone()],
        other => {
            let rgb = other.to_rgb8();
            (0..3)
                .map(|k| rgb.as_raw().iter().skip(k).step_by(3).copied().collect())
                .collect()
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let cropped: Vec<Vec<u8>> = channels
        .into_iter()
        .map(|plane| {
            let map = SaliencyMap::new(h, w, plane.into_iter().map(f64::from).collect())?;
            Ok(apply_crop(&map, crop)?
                .values()
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect())
        })
        .collect::<Result<_>>()?;
    let (ow, oh) = (crop.out_w as u32, crop.out_h as u32);
    Ok(if cropped.len() == 1 {
        DynamicImage::ImageLuma8(GrayImage::from_raw(ow, oh, cropped[0].clone()).expect("buffer size"))
    } else {
        let n = crop.out_h * crop.out_w;
        let interleaved: Vec<u8> = (0..n).flat_map(|i| cropped.iter().map(move |c| c[i])).collect();
        DynamicImage::ImageRgb8(RgbImage::from_raw(ow, oh, interleaved).expect("buffer size"))
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct SynthRun {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub images: usize,
    pub size: usize,
    pub shapes: usize,
    /// Gaussian spread of the ideal explainer, in image pixels.
    pub sigma: f64,
    pub scale: CropScale,
    pub sequences: usize,
    pub frames: usize,
    pub max_zoom: f64,
}

impl Default for SynthRun {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("synth"),
            seed: 0,
            images: 20,
            size: 96,
            shapes: 3,
            sigma: 6.0,
            scale: CropScale::default(),
            sequences: 2,
            frames: 150,
            max_zoom: 1.5,
        }
    }
}

/// Paths written by [`run_synth`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub annotations: PathBuf,
    pub saliency_dir: PathBuf,
    pub masks_dir: PathBuf,
    pub images_dir: PathBuf,
    pub crop_manifest: PathBuf,
    pub frame_manifest: PathBuf,
}

#[derive(Serialize)]
struct CocoDoc {
    images: Vec<CocoImage>,
    annotations: Vec<CocoAnnotation>,
    categories: Vec<CocoCategory>,
}

#[derive(Serialize)]
struct CocoImage {
    id: u64,
    height: usize,
    width: usize,
    file_name: String,
}

#[derive(Serialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    segmentation: serde_json::Value,
    iscrowd: u8,
}

#[derive(Serialize)]
struct CocoCategory {
    id: u64,
    name: String,
}

/// Writes a synthetic dataset for end-to-end runs.
///
/// Layout under `out_dir`:
/// * `annotations.json`: COCO document; rectangles as polygons, ellipses as
///   compressed RLE;
/// * `images/{image_id}.png`: grayscale rendering of each scene;
/// * `masks/{image_id}_{class_id}.png` and `saliency/{image_id}_{class_id}.smap`;
/// * `crops/` with `crop_manifest.json`: one original/transformed pair per
///   scene from the ideal explainer, crop drawn from `(seed, image ordinal)`;
/// * `frames/` with `frame_manifest.json`: planar zoom sequences.
pub fn run_synth(run: &SynthRun) -> RunResult<SynthOutput> {
    if run.images == 0 || run.size < 12 || run.shapes == 0 || run.sigma.is_nan() || run.sigma <= 0.0 {
        return Err(RunError::Config(Error::InvalidParameter(
            "synth needs images ≥ 1, size ≥ 12, shapes ≥ 1 and sigma > 0".into(),
        )));
    }
    validate_scale(run.scale)?;
    let out = &run.out_dir;
    let dirs = ["images", "masks", "saliency", "crops", "frames"];
    for d in dirs {
        fs::create_dir_all(out.join(d)).map_err(|e| Error::io(out.join(d), e))?;
    }
    let dims = (run.size, run.size);
    let scenes: Vec<SyntheticScene> = (0..run.images)
        .map(|i| random_scene(&mut RngStream::new(run.seed, i as u64), dims, run.shapes))
        .collect::<Result<_>>()?;

    let mut coco = CocoDoc {
        images: Vec::new(),
        annotations: Vec::new(),
        categories: (1..=3)
            .map(|id| CocoCategory {
                id,
                name: format!("class{id}"),
            })
            .collect(),
    };
    let mut crop_entries = Vec::new();
    for (i, scene) in scenes.iter().enumerate() {
        let image_id = i as u64 + 1;
        coco.images.push(CocoImage {
            id: image_id,
            height: scene.height,
            width: scene.width,
            file_name: format!("{image_id}.png"),
        });
        for (k, shape) in scene.shapes.iter().enumerate() {
            let segmentation = match shape.kind {
                ShapeKind::Rectangle => serde_json::json!([shape.polygon().expect("rectangle")]),
                ShapeKind::Ellipse => serde_json::json!({
                    "size": [scene.height, scene.width],
                    "counts": compress_counts(&encode_rle(&scene.shape_mask(k))),
                }),
            };
            coco.annotations.push(CocoAnnotation {
                id: coco.annotations.len() as u64 + 1,
                image_id,
                category_id: shape.class_id,
                segmentation,
                iscrowd: 0,
            });
        }
        render_scene_png(scene).save(out.join("images").join(format!("{image_id}.png"))).map_err(Error::from)?;
        for class_id in scene.class_ids() {
            let stem = format!("{image_id}_{class_id}");
            write_mask_png(&scene.class_mask(class_id), out.join("masks").join(format!("{stem}.png")))?;
            let saliency = equivariant_class_saliency(scene, class_id, None, run.sigma);
            write_saliency(&saliency, out.join("saliency").join(format!("{stem}.smap")))?;
        }

        let crop = sample_crop(
            &mut RngStream::new(run.seed, i as u64),
            scene.height,
            scene.width,
            run.scale.min,
            run.scale.max,
        )?;
        let orig = PathBuf::from(format!("{image_id}_original.smap"));
        let trans = PathBuf::from(format!("{image_id}_transformed.smap"));
        write_saliency(&equivariant_saliency(scene, None, run.sigma), out.join("crops").join(&orig))?;
        write_saliency(
            &equivariant_saliency(scene, Some(&crop), run.sigma),
            out.join("crops").join(&trans),
        )?;
        crop_entries.push(CropBatchEntry {
            subject_id: image_id.to_string(),
            class_id: None,
            original: orig,
            transformed: trans,
            crop: Some(crop),
        });
    }
    let annotations = out.join("annotations.json");
    write_json(&annotations, &coco)?;
    let crop_manifest = out.join("crops").join("crop_manifest.json");
    write_json(&crop_manifest, &CropBatchManifest { entries: crop_entries })?;

    let mut sequences = Vec::new();
    if run.sequences > 0 {
        let zoom = synthesize_zoom_sequence(dims.0, dims.1, run.frames, run.max_zoom)?;
        for (s, scene) in scenes.iter().cycle().take(run.sequences).enumerate() {
            let seq_dir = PathBuf::from(format!("seq{s:03}"));
            fs::create_dir_all(out.join("frames").join(&seq_dir))
                .map_err(|e| Error::io(out.join("frames").join(&seq_dir), e))?;
            let frames: Vec<PathBuf> = zoom
                .par_iter()
                .enumerate()
                .map(|(f, crop)| -> Result<PathBuf> {
                    let rel = seq_dir.join(format!("{f:03}.smap"));
                    write_saliency(
                        &equivariant_saliency(scene, Some(crop), run.sigma),
                        out.join("frames").join(&rel),
                    )?;
                    Ok(rel)
                })
                .collect::<Result<_>>()?;
            sequences.push(FrameSequenceManifest {
                subject_id: format!("seq{s:03}"),
                class_id: None,
                frames,
                pairs: None,
            });
        }
    }
    let frame_manifest = out.join("frames").join("frame_manifest.json");
    write_json(&frame_manifest, &FrameManifestFile::Many { sequences })?;

    Ok(SynthOutput {
        annotations,
        saliency_dir: out.join("saliency"),
        masks_dir: out.join("masks"),
        images_dir: out.join("images"),
        crop_manifest,
        frame_manifest,
    })
}

fn render_scene_png(scene: &SyntheticScene) -> GrayImage {
    GrayImage::from_fn(scene.width as u32, scene.height as u32, |x, y| {
        let level = scene
            .shapes
            .iter()
            .rev()
            .find(|s| s.contains_pixel(y as usize, x as usize))
            .map(|s| 60 + 60 * s.class_id as u8)
            .unwrap_or(20);
        image::Luma([level])
    })
}

/// Parses `--categories 1,3,5`.
pub fn parse_id_list(s: &str) -> Result<BTreeSet<u64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad id {t:?}")))
        })
        .collect()
}

/// Parses `--pairs 0,30,60` into pair start frames.
pub fn parse_pair_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad frame index {t:?}")))
        })
        .collect()
}
