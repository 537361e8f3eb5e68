//! Synthetic scenes and saliency maps with known ground truth.
//!
//! Scenes hold axis-aligned rectangles and inscribed ellipses. The "ideal
//! explainer" places a Gaussian at every shape centroid; rendering it in
//! the coordinate frame of a crop gives a map that follows the crop exactly,
//! so any instability measured on it is resampling error alone.

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, PixelLocation, SaliencyMap};
use crate::resample::CropSpec;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
}

/// A shape occupying the pixel box `[top, top + height) × [left, left + width)`.
/// Ellipses are inscribed in their box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SceneShape {
    pub kind: ShapeKind,
    pub class_id: u64,
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl SceneShape {
    /// Centroid in continuous image coordinates (pixel edges at integers).
    pub fn centroid(&self) -> (f64, f64) {
        (
            self.top as f64 + self.height as f64 / 2.0,
            self.left as f64 + self.width as f64 / 2.0,
        )
    }

    pub fn contains_pixel(&self, row: usize, col: usize) -> bool {
        let inside_box = row >= self.top
            && row < self.top + self.height
            && col >= self.left
            && col < self.left + self.width;
        match self.kind {
            ShapeKind::Rectangle => inside_box,
            ShapeKind::Ellipse => {
                let (cy, cx) = self.centroid();
                let dy = (row as f64 + 0.5 - cy) / (self.height as f64 / 2.0);
                let dx = (col as f64 + 0.5 - cx) / (self.width as f64 / 2.0);
                inside_box && dy * dy + dx * dx <= 1.0
            }
        }
    }

    /// COCO polygon ring for a rectangle; `None` for ellipses.
    pub fn polygon(&self) -> Option<Vec<f64>> {
        match self.kind {
            ShapeKind::Rectangle => {
                let (x0, y0) = (self.left as f64, self.top as f64);
                let (x1, y1) = (x0 + self.width as f64, y0 + self.height as f64);
                Some(vec![x0, y0, x1, y0, x1, y1, x0, y1])
            }
            ShapeKind::Ellipse => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub height: usize,
    pub width: usize,
    pub shapes: Vec<SceneShape>,
}

impl SyntheticScene {
    pub fn shape_mask(&self, index: usize) -> BinaryMask {
        let shape = &self.shapes[index];
        BinaryMask::from_fn(self.height, self.width, |r, c| shape.contains_pixel(r, c))
    }

    /// Union of all shapes of `class_id`.
    pub fn class_mask(&self, class_id: u64) -> BinaryMask {
        let shapes: Vec<&SceneShape> = self.shapes.iter().filter(|s| s.class_id == class_id).collect();
        BinaryMask::from_fn(self.height, self.width, |r, c| {
            shapes.iter().any(|s| s.contains_pixel(r, c))
        })
    }

    /// Distinct class ids, ascending.
    pub fn class_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.shapes.iter().map(|s| s.class_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Isotropic Gaussian bump on an `(height, width)` grid, in pixel-index
/// coordinates.
pub fn gaussian_saliency(
    dims: (usize, usize),
    center: PixelLocation,
    sigma: f64,
    amplitude: f64,
) -> SaliencyMap {
    assert!(sigma > 0.0 && amplitude > 0.0, "sigma and amplitude must be positive");
    let (cr, cc) = (center.row as f64, center.col as f64);
    SaliencyMap::from_fn(dims.0, dims.1, |r, c| {
        let d2 = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
        // floored so far tails stay strictly positive instead of underflowing
        (amplitude * (-d2 / (2.0 * sigma * sigma)).exp()).max(f64::MIN_POSITIVE)
    })
}

/// A Gaussian blob in continuous coordinates with per-axis spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    /// Center in continuous coordinates (pixel edges at integers).
    pub y: f64,
    pub x: f64,
    pub sigma_y: f64,
    pub sigma_x: f64,
    pub amplitude: f64,
}

/// Sum of blobs sampled at pixel centers.
pub fn render_blobs(height: usize, width: usize, blobs: &[Blob]) -> SaliencyMap {
    SaliencyMap::from_fn(height, width, |r, c| {
        let (py, px) = (r as f64 + 0.5, c as f64 + 0.5);
        blobs
            .iter()
            .map(|b| {
                let dy = (py - b.y) / b.sigma_y;
                let dx = (px - b.x) / b.sigma_x;
                b.amplitude * (-0.5 * (dy * dy + dx * dx)).exp()
            })
            .sum()
    })
}

/// Ideal explainer: a Gaussian of spread `sigma` (image pixels) at every
/// shape centroid, rendered at the crop's output resolution in the crop's
/// frame when `crop` is given.
pub fn equivariant_saliency(scene: &SyntheticScene, crop: Option<&CropSpec>, sigma: f64) -> SaliencyMap {
    render_scene(scene, scene.shapes.iter(), crop, sigma)
}

/// [`equivariant_saliency`] restricted to shapes of one class.
pub fn equivariant_class_saliency(
    scene: &SyntheticScene,
    class_id: u64,
    crop: Option<&CropSpec>,
    sigma: f64,
) -> SaliencyMap {
    render_scene(
        scene,
        scene.shapes.iter().filter(|s| s.class_id == class_id),
        crop,
        sigma,
    )
}

fn render_scene<'a>(
    scene: &SyntheticScene,
    shapes: impl Iterator<Item = &'a SceneShape>,
    crop: Option<&CropSpec>,
    sigma: f64,
) -> SaliencyMap {
    assert!(sigma > 0.0, "sigma must be positive");
    let identity = CropSpec {
        top: 0,
        left: 0,
        side: 0,
        out_h: scene.height,
        out_w: scene.width,
    };
    let (crop, sy, sx) = match crop {
        Some(c) => (
            c,
            c.out_h as f64 / c.side as f64,
            c.out_w as f64 / c.side as f64,
        ),
        None => (&identity, 1.0, 1.0),
    };
    let blobs: Vec<Blob> = shapes
        .map(|s| {
            let (y, x) = s.centroid();
            Blob {
                y: (y - crop.top as f64) * sy,
                x: (x - crop.left as f64) * sx,
                sigma_y: sigma * sy,
                sigma_x: sigma * sx,
                amplitude: 1.0,
            }
        })
        .collect();
    render_blobs(crop.out_h, crop.out_w, &blobs)
}

pub const MIN_SHAPE_AREA: usize = 16;

/// Random scene of `n_shapes` shapes with class ids in `1..=3`.
///
/// Each shape's box spans between `max(6, dim/8)` and `dim/2` pixels per
/// axis; draws are retried until the rasterized shape covers at least
/// [`MIN_SHAPE_AREA`] pixels.
pub fn random_scene(rng: &mut RngStream, dims: (usize, usize), n_shapes: usize) -> Result<SyntheticScene> {
    let (height, width) = dims;
    if n_shapes == 0 {
        return Err(Error::InvalidParameter("a scene needs at least one shape".into()));
    }
    if height < 12 || width < 12 {
        return Err(Error::InvalidParameter(format!(
            "scene dimensions must be at least 12x12, got {height}x{width}"
        )));
    }
    let extent = |rng: &mut RngStream, dim: usize| {
        let lo = (dim / 8).max(6);
        let hi = (dim / 2).max(lo);
        lo + rng.below((hi - lo + 1) as u64) as usize
    };
    let mut shapes = Vec::with_capacity(n_shapes);
    while shapes.len() < n_shapes {
        let kind = if rng.below(2) == 0 {
            ShapeKind::Rectangle
        } else {
            ShapeKind::Ellipse
        };
        let class_id = 1 + rng.below(3);
        let h = extent(rng, height);
        let w = extent(rng, width);
        let top = rng.below((height - h + 1) as u64) as usize;
        let left = rng.below((width - w + 1) as u64) as usize;
        let shape = SceneShape {
            kind,
            class_id,
            top,
            left,
            height: h,
            width: w,
        };
        let area = (top..top + h)
            .flat_map(|r| (left..left + w).map(move |c| (r, c)))
            .filter(|&(r, c)| shape.contains_pixel(r, c))
            .count();
        if area >= MIN_SHAPE_AREA {
            shapes.push(shape);
        }
    }
    Ok(SyntheticScene {
        height,
        width,
        shapes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accuracy::weighting_game;
    use crate::grid::{argmax_location, total_mass};
    use crate::resample::apply_crop;
    use crate::stability::crop_stability;

    #[test]
    fn gaussian_peak_and_mass() {
        let g = gaussian_saliency((21, 17), PixelLocation::new(9, 4), 2.5, 1.0);
        let a = argmax_location(&g);
        assert_eq!(a.location, PixelLocation::new(9, 4));
        assert!(!a.degenerate);
        assert!(g.values().iter().all(|&v| v > 0.0));
        let g3 = gaussian_saliency((21, 17), PixelLocation::new(9, 4), 2.5, 3.0);
        assert!((total_mass(&g3) - 3.0 * total_mass(&g)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass_inside_three_sigma_square() {
        // a square of half-width 3σ holds ≥ (erf(3/√2))² ≈ 0.9946 of the mass
        let sigma = 4.0;
        let g = gaussian_saliency((101, 101), PixelLocation::new(50, 50), sigma, 1.0);
        let half = (3.0 * sigma) as usize;
        let mask = BinaryMask::from_fn(101, 101, |r, c| r.abs_diff(50) <= half && c.abs_diff(50) <= half);
        assert!(weighting_game(&g, &mask).unwrap() >= 0.98);
    }

    fn one_scene() -> SyntheticScene {
        SyntheticScene {
            height: 64,
            width: 64,
            shapes: vec![
                SceneShape {
                    kind: ShapeKind::Rectangle,
                    class_id: 1,
                    top: 10,
                    left: 8,
                    height: 20,
                    width: 14,
                },
                SceneShape {
                    kind: ShapeKind::Ellipse,
                    class_id: 2,
                    top: 30,
                    left: 30,
                    height: 24,
                    width: 30,
                },
            ],
        }
    }

    #[test]
    fn identity_crop_matches_uncropped() {
        let s = one_scene();
        let plain = equivariant_saliency(&s, None, 6.0);
        let ident = equivariant_saliency(&s, Some(&CropSpec::identity(64, 64)), 6.0);
        assert_eq!(plain, ident);
    }

    #[test]
    fn cropped_render_tracks_crop() {
        let s = one_scene();
        let plain = equivariant_saliency(&s, None, 6.0);
        let crop = CropSpec {
            top: 4,
            left: 7,
            side: 52,
            out_h: 64,
            out_w: 64,
        };
        let cropped = equivariant_saliency(&s, Some(&crop), 6.0);
        assert!(crop_stability(&plain, &cropped, &crop).unwrap() >= 0.99);
        let max_diff = apply_crop(&plain, &crop)
            .unwrap()
            .values()
            .iter()
            .zip(cropped.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 0.02, "{max_diff}");
    }

    #[test]
    fn class_masks_and_polygons() {
        let s = one_scene();
        assert_eq!(s.class_ids(), vec![1, 2]);
        let rect = crate::mask::rasterize_polygon(&[s.shapes[0].polygon().unwrap()], 64, 64).unwrap();
        assert_eq!(rect, s.shape_mask(0));
        assert_eq!(s.class_mask(1), s.shape_mask(0));
        assert!(s.shapes[1].polygon().is_none());
        assert!(s.shape_mask(1).count() < 24 * 30);
    }

    #[test]
    fn random_scenes_are_reproducible_and_in_bounds() {
        let a = random_scene(&mut RngStream::new(8, 1), (96, 80), 4).unwrap();
        let b = random_scene(&mut RngStream::new(8, 1), (96, 80), 4).unwrap();
        assert_eq!(a, b);
        for i in 0..100u64 {
            let s = random_scene(&mut RngStream::new(3, i), (48, 64), 3).unwrap();
            for (k, shape) in s.shapes.iter().enumerate() {
                assert!(shape.top + shape.height <= 48 && shape.left + shape.width <= 64);
                assert!(s.shape_mask(k).count() >= MIN_SHAPE_AREA);
            }
        }
        let single = random_scene(&mut RngStream::new(1, 1), (32, 32), 1).unwrap();
        assert_eq!(single.class_mask(single.shapes[0].class_id), single.shape_mask(0));
        assert!(random_scene(&mut RngStream::new(1, 1), (32, 32), 0).is_err());
        assert!(random_scene(&mut RngStream::new(1, 1), (8, 32), 1).is_err());
    }

    #[test]
    fn huge_sigma_degenerates_cleanly() {
        let s = one_scene();
        let flat = equivariant_saliency(&s, None, 1e12);
        assert!(flat.values().iter().all(|&v| v == flat.values()[0]));
        let crop = CropSpec {
            top: 2,
            left: 2,
            side: 60,
            out_h: 64,
            out_w: 64,
        };
        let cropped = equivariant_saliency(&s, Some(&crop), 1e12);
        assert!(matches!(
            crop_stability(&flat, &cropped, &crop),
            Err(Error::DegenerateRanks)
        ));
    }
}
