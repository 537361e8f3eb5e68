// Bilinear resizing and seeded crop sampling.
//
// ```bash
// cargo run --example resample
// ```

use saliency_eval::{apply_crop, bilinear_resize, sample_crop, RngStream, SaliencyMap};

pub fn run_example() -> saliency_eval::Result<SaliencyMap> {
    let small = SaliencyMap::new(2, 2, vec![0.0, 1.0, 2.0, 3.0])?;
    let big = bilinear_resize(&small, 4, 4);
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format!("{:.3}", big.get(r, c))).collect();
        println!("{}", row.join(" "));
    }

    let map = SaliencyMap::from_fn(224, 224, |r, c| (r * 224 + c) as f64);
    for stream in 0..3 {
        let crop = sample_crop(&mut RngStream::new(42, stream), 224, 224, 0.75, 0.9)?;
        let out = apply_crop(&map, &crop)?;
        println!("stream {stream}: {crop:?} -> {:?}", out.dims());
    }
    Ok(big)
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
