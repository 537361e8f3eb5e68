// Square-kernel dilation and what it does to the uniform baseline.
//
// ```bash
// cargo run --example dilation
// ```

use saliency_eval::{area_fraction, dilate, BinaryMask, KernelSpec};

pub fn run_example() -> saliency_eval::Result<Vec<(usize, usize)>> {
    let mask = BinaryMask::from_fn(32, 32, |r, c| (r == 16 && c == 16) || (r < 3 && c < 3));
    let mut out = Vec::new();
    for size in [1, 3, 9, 15] {
        let d = dilate(&mask, KernelSpec::new(size)?);
        println!("kernel {size:>2}x{size:<2}: {:>4} pixels, area fraction {:.4}", d.count(), area_fraction(&d));
        out.push((size, d.count()));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
