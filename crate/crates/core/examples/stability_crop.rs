// Crop-protocol stability: an explainer that tracks the object through a
// crop against one that ignores the crop.
//
// ```bash
// cargo run --example stability_crop
// ```

use saliency_eval::synth::{equivariant_saliency, random_scene};
use saliency_eval::{crop_stability, sample_crop, RngStream};

pub fn run_example() -> saliency_eval::Result<(f64, f64)> {
    let scene = random_scene(&mut RngStream::new(3, 0), (96, 96), 3)?;
    let crop = sample_crop(&mut RngStream::new(3, 1), 96, 96, 0.75, 0.9)?;
    let original = equivariant_saliency(&scene, None, 6.0);

    let tracking = equivariant_saliency(&scene, Some(&crop), 6.0);
    let frozen = original.clone();
    let good = crop_stability(&original, &tracking, &crop)?;
    let bad = crop_stability(&original, &frozen, &crop)?;
    println!("crop {crop:?}");
    println!("tracking explainer: rho = {good:.4}");
    println!("  frozen explainer: rho = {bad:.4}");
    Ok((good, bad))
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
