// Weighting Game on a hand-built scene: a focused map, a diffuse one, and
// the uniform baseline they should beat.
//
// ```bash
// cargo run --example weighting_game
// ```

use saliency_eval::synth::{gaussian_saliency, SceneShape, ShapeKind, SyntheticScene};
use saliency_eval::{dilate, uniform_baseline, weighting_game, KernelSpec, PixelLocation, SaliencyMap};

pub fn run_example() -> saliency_eval::Result<Vec<(String, f64)>> {
    let scene = SyntheticScene {
        height: 64,
        width: 64,
        shapes: vec![SceneShape {
            kind: ShapeKind::Rectangle,
            class_id: 1,
            top: 20,
            left: 24,
            height: 16,
            width: 16,
        }],
    };
    let dilated = dilate(&scene.class_mask(1), KernelSpec::default());

    let focused = gaussian_saliency((64, 64), PixelLocation::new(28, 32), 3.0, 1.0);
    let diffuse = gaussian_saliency((64, 64), PixelLocation::new(28, 32), 20.0, 1.0);
    let flat = SaliencyMap::constant(64, 64, 1.0);

    let rows = vec![
        ("focused".to_string(), weighting_game(&focused, &dilated)?),
        ("diffuse".to_string(), weighting_game(&diffuse, &dilated)?),
        ("constant".to_string(), weighting_game(&flat, &dilated)?),
        ("uniform baseline".to_string(), uniform_baseline(&dilated)),
    ];
    for (name, value) in &rows {
        println!("{name:>17}: {value:.4}");
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
