// End to end on disk: write a synthetic dataset, then run the accuracy and
// crop-stability drivers over it, as the command-line tool does.
//
// ```bash
// cargo run --example synth_dataset [OUT_DIR]
// ```

use std::path::PathBuf;

use saliency_eval::io::{NegativePolicy, ReportDocument};
use saliency_eval::mask::AnnotationFilter;
use saliency_eval::pipeline::{run_accuracy, run_stability_crop, run_synth, AccuracyRun, CropRun, MaskSource, SynthRun};
use saliency_eval::stability::CropScale;
use saliency_eval::AccuracyConfig;

pub fn run_example_in(out_dir: PathBuf) -> Result<(ReportDocument, ReportDocument), Box<dyn std::error::Error>> {
    let written = run_synth(&SynthRun { out_dir, images: 8, sequences: 0, ..SynthRun::default() })?;
    let accuracy = run_accuracy(
        &AccuracyRun {
            masks: MaskSource::Annotations { path: written.annotations.clone(), filter: AnnotationFilter::default() },
            saliency_dir: written.saliency_dir.clone(),
            config: AccuracyConfig::default(),
            small_threshold: 0.10,
            negatives: NegativePolicy::Error,
        },
        "weighting-game",
    )?;
    let stability = run_stability_crop(&CropRun {
        manifest: written.crop_manifest.clone(),
        seed: 0,
        scale: CropScale::default(),
        negatives: NegativePolicy::Error,
    })?;
    print!("{}", accuracy.to_csv()?);
    print!("{}", stability.to_csv()?);
    Ok((accuracy, stability))
}

pub fn run_example() -> Result<(ReportDocument, ReportDocument), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("saliency-eval-synth-{}", std::process::id()));
    let out = run_example_in(dir.clone());
    let _ = std::fs::remove_dir_all(&dir);
    out
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    match std::env::args_os().nth(1) {
        Some(dir) => run_example_in(dir.into()).map(drop),
        None => run_example().map(drop),
    }
}
