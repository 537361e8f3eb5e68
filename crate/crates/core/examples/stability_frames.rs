// Consecutive-frame stability on a planar 150-frame zoom sequence, with
// frames held in memory instead of on disk.
//
// ```bash
// cargo run --example stability_frames
// ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use saliency_eval::stability::{frame_stability, FrameSequenceManifest, StabilitySummary};
use saliency_eval::synth::{equivariant_saliency, random_scene};
use saliency_eval::{synthesize_zoom_sequence, Error, RngStream, SaliencyMap};

pub fn run_example() -> saliency_eval::Result<StabilitySummary> {
    let scene = random_scene(&mut RngStream::new(11, 0), (96, 96), 2)?;
    let zoom = synthesize_zoom_sequence(96, 96, 150, 1.5)?;
    let frames: HashMap<PathBuf, SaliencyMap> = zoom
        .iter()
        .enumerate()
        .map(|(i, crop)| (PathBuf::from(format!("{i:03}.smap")), equivariant_saliency(&scene, Some(crop), 6.0)))
        .collect();

    let manifest = FrameSequenceManifest {
        subject_id: "zoom".into(),
        class_id: None,
        frames: (0..150).map(|i| PathBuf::from(format!("{i:03}.smap"))).collect(),
        pairs: None,
    };
    let batch = frame_stability(&manifest, None, Path::new(""), |p| {
        frames.get(p).cloned().ok_or_else(|| Error::Manifest(format!("no frame {}", p.display())))
    })?;
    for r in &batch.records {
        println!("frames {:?}: rho = {:.5}", r.frames.unwrap(), r.correlation.unwrap_or(f64::NAN));
    }
    let summary = StabilitySummary::from_records(&batch.records);
    println!("pooled mean: {:.5}", summary.pooled_mean.unwrap_or(f64::NAN));
    Ok(summary)
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
