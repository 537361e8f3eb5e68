//! Bilinear resizing, crops, and the zoom/pan transforms built from them.
//!
//! Resizing samples at half-pixel centers: output pixel `(r, c)` of an
//! `H' × W'` grid reads the source at
//! `((r + 0.5)·H/H' − 0.5, (c + 0.5)·W/W' − 0.5)`, clamped to the source
//! border. No corner alignment and no anti-alias prefilter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SaliencyMap;
use crate::rng::RngStream;

/// A square crop window resized to `out_h × out_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropSpec {
    pub top: usize,
    pub left: usize,
    pub side: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl CropSpec {
    /// The crop that leaves an `h × w` square grid untouched.
    pub fn identity(height: usize, width: usize) -> Self {
        Self {
            top: 0,
            left: 0,
            side: height.min(width),
            out_h: height,
            out_w: width,
        }
    }

    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        if self.side == 0
            || self.top + self.side > height
            || self.left + self.side > width
            || self.out_h == 0
            || self.out_w == 0
        {
            return Err(Error::CropOutOfBounds {
                top: self.top,
                left: self.left,
                side: self.side,
                height,
                width,
            });
        }
        Ok(())
    }
}

pub fn bilinear_resize(map: &SaliencyMap, out_height: usize, out_width: usize) -> SaliencyMap {
    assert!(out_height > 0 && out_width > 0, "output dimensions must be positive");
    let (h, w) = map.dims();
    if (h, w) == (out_height, out_width) {
        return map.clone();
    }
    let rows: Vec<(usize, usize, f64)> = (0..out_height).map(|r| taps(r, h, out_height)).collect();
    let cols: Vec<(usize, usize, f64)> = (0..out_width).map(|c| taps(c, w, out_width)).collect();
    let mut values = Vec::with_capacity(out_height * out_width);
    for &(r0, r1, fr) in &rows {
        for &(c0, c1, fc) in &cols {
            let top = lerp(map.get(r0, c0), map.get(r0, c1), fc);
            let bottom = lerp(map.get(r1, c0), map.get(r1, c1), fc);
            values.push(lerp(top, bottom, fr));
        }
    }
    SaliencyMap::from_raw(out_height, out_width, values)
}

/// Neighbouring source indices and the fractional weight of the second.
fn taps(out_index: usize, src_len: usize, out_len: usize) -> (usize, usize, f64) {
    let pos = (out_index as f64 + 0.5) * src_len as f64 / out_len as f64 - 0.5;
    let pos = pos.clamp(0.0, (src_len - 1) as f64);
    let i0 = pos.floor() as usize;
    let i1 = (i0 + 1).min(src_len - 1);
    (i0, i1, pos - i0 as f64)
}

/// Interpolates and clamps to the endpoint range, so outputs never leave
/// `[min(a, b), max(a, b)]` through rounding.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = a + (b - a) * t;
    v.clamp(a.min(b), a.max(b))
}

/// Cuts the crop window out of `map` and resizes it to the crop's output
/// dimensions.
pub fn apply_crop(map: &SaliencyMap, crop: &CropSpec) -> Result<SaliencyMap> {
    let (h, w) = map.dims();
    crop.validate(h, w)?;
    let window = map.window(crop.top, crop.left, crop.side, crop.side);
    Ok(bilinear_resize(&window, crop.out_h, crop.out_w))
}

/// Random resized square crop.
///
/// Draws, in order: an area fraction `s ~ U[scale_min, scale_max]`, then
/// `top` and `left` uniformly over all legal offsets. The side is
/// `round(sqrt(s·h·w))` clamped to `[1, min(h, w)]`; the output size is the
/// source size.
pub fn sample_crop(
    rng: &mut RngStream,
    height: usize,
    width: usize,
    scale_min: f64,
    scale_max: f64,
) -> Result<CropSpec> {
    if !(scale_min > 0.0 && scale_min <= scale_max && scale_max <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "crop scale bounds must satisfy 0 < min <= max <= 1, got [{scale_min}, {scale_max}]"
        )));
    }
    let s = rng.uniform(scale_min, scale_max);
    let side = ((s * (height * width) as f64).sqrt().round() as usize).clamp(1, height.min(width));
    let top = rng.below((height - side + 1) as u64) as usize;
    let left = rng.below((width - side + 1) as u64) as usize;
    Ok(CropSpec {
        top,
        left,
        side,
        out_h: height,
        out_w: width,
    })
}

/// Centered zoom-in/zoom-out sequence on an `h × w` image.
///
/// Frame `i` zooms by `1 + (max_zoom − 1)·(1 − |i − a|/a)` with apex
/// `a = ⌈frames/2⌉`, i.e. linearly up to `max_zoom` at frame `a` and back
/// down. The crop side is `round(min(h, w) / zoom)`. Frames beyond the apex
/// mirror the ones before it, so the sequence loops back to frame 0.
pub fn synthesize_zoom_sequence(
    image_height: usize,
    image_width: usize,
    frames: usize,
    max_zoom: f64,
) -> Result<Vec<CropSpec>> {
    if frames < 2 {
        return Err(Error::InvalidParameter(format!(
            "a zoom sequence needs at least 2 frames, got {frames}"
        )));
    }
    if !(max_zoom > 1.0 && max_zoom.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "max zoom must exceed 1, got {max_zoom}"
        )));
    }
    let base = image_height.min(image_width);
    let apex = frames.div_ceil(2);
    Ok((0..frames)
        .map(|i| {
            let t = 1.0 - (i.abs_diff(apex) as f64 / apex as f64);
            let zoom = 1.0 + (max_zoom - 1.0) * t.max(0.0);
            let side = ((base as f64 / zoom).round() as usize).clamp(1, base);
            CropSpec {
                top: (image_height - side) / 2,
                left: (image_width - side) / 2,
                side,
                out_h: image_height,
                out_w: image_width,
            }
        })
        .collect())
}
