// Two maps that both score a Pointing Game hit, yet put very different
// shares of their mass on the object.
//
// ```bash
// cargo run --example pointing_game
// ```

use saliency_eval::synth::{render_blobs, Blob};
use saliency_eval::{dilate, pointing_game, weighting_game, BinaryMask, KernelSpec};

pub struct Comparison {
    pub hits: [bool; 2],
    pub weighting: [f64; 2],
}

pub fn run_example() -> saliency_eval::Result<Comparison> {
    let (h, w) = (80, 80);
    let mask = BinaryMask::from_fn(h, w, |r, c| (30..50).contains(&r) && (30..50).contains(&c));
    let dilated = dilate(&mask, KernelSpec::default());

    let object = Blob { y: 40.0, x: 40.0, sigma_y: 4.0, sigma_x: 4.0, amplitude: 1.0 };
    let tight = render_blobs(h, w, &[object]);
    // same peak, plus broad mass spread over the background
    let spread = render_blobs(
        h,
        w,
        &[
            object,
            Blob { y: 10.0, x: 10.0, sigma_y: 8.0, sigma_x: 8.0, amplitude: 0.9 },
            Blob { y: 70.0, x: 12.0, sigma_y: 8.0, sigma_x: 8.0, amplitude: 0.9 },
            Blob { y: 12.0, x: 68.0, sigma_y: 8.0, sigma_x: 8.0, amplitude: 0.9 },
        ],
    );

    let mut out = Comparison { hits: [false; 2], weighting: [0.0; 2] };
    for (k, (name, map)) in [("tight", &tight), ("spread", &spread)].into_iter().enumerate() {
        let pg = pointing_game(map, &mask)?;
        let wg = weighting_game(map, &dilated)?;
        println!("{name:>6}: pointing hit = {}, weighting = {wg:.3}", pg.hit);
        out.hits[k] = pg.hit;
        out.weighting[k] = wg;
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
