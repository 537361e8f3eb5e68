//! Polygon rasterization by pixel-center sampling.
//!
//! Pixel (row, col) is set when its center (col + 0.5, row + 0.5) lies inside
//! a ring under the even-odd rule. Each ring is filled independently and the
//! results are OR-ed together.

use crate::error::{Error, Result};
use crate::grid::BinaryMask;

/// Rasterizes COCO-style rings (flat `[x0, y0, x1, y1, ...]` lists).
///
/// Vertices are clamped to `[0, width] × [0, height]` before filling. Rings
/// with fewer than three vertices or with collinear vertices are skipped;
/// if every ring is skipped the result is [`Error::DegeneratePolygon`].
pub fn rasterize_polygon(rings: &[Vec<f64>], height: usize, width: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::empty(height, width);
    let mut filled_any = false;
    for ring in rings {
        if ring.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "polygon ring has an odd number of coordinates ({})",
                ring.len()
            )));
        }
        let points: Vec<(f64, f64)> = ring.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        if points.len() < 3 || twice_signed_area(&points) == 0.0 {
            continue;
        }
        filled_any = true;
        let clamped: Vec<(f64, f64)> = points
            .iter()
            .map(|&(x, y)| (x.clamp(0.0, width as f64), y.clamp(0.0, height as f64)))
            .collect();
        fill_ring(&mut mask, &clamped);
    }
    if !filled_any {
        return Err(Error::DegeneratePolygon);
    }
    Ok(mask)
}

fn twice_signed_area(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum()
}

fn fill_ring(mask: &mut BinaryMask, points: &[(f64, f64)]) {
    let (height, width) = mask.dims();
    let n = points.len();
    let y_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let row_start = ((y_min - 0.5).ceil().max(0.0)) as usize;
    let row_end = ((y_max - 0.5).ceil().max(0.0) as usize).min(height);
    let mut crossings = Vec::with_capacity(n);
    for row in row_start..row_end {
        let y = row as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            // half-open in y so shared vertices are counted once
            if (y0 > y) != (y1 > y) {
                crossings.push(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            // columns whose center x satisfies span[0] <= x < span[1]
            let c0 = ((span[0] - 0.5).ceil().max(0.0)) as usize;
            let c1 = ((span[1] - 0.5).ceil().max(0.0) as usize).min(width);
            for col in c0..c1 {
                mask.set(row, col, true);
            }
        }
    }
}
