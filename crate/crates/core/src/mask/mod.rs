//! Class segmentation masks from COCO-style annotations.

mod coco;
mod polygon;
mod rle;

pub use coco::{parse_annotations, parse_annotations_str, AnnotationFilter};
pub use polygon::rasterize_polygon;
pub use rle::{compress_counts, decode_rle, decompress_counts, encode_rle, RleCounts};

use crate::error::{Error, Result};
use crate::grid::BinaryMask;

/// Every instance of one class in one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAnnotationSet {
    pub image_id: u64,
    pub image_height: usize,
    pub image_width: usize,
    pub class_id: u64,
    pub instances: Vec<InstanceShape>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceShape {
    pub geometry: Geometry,
    pub crowd: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Flat `[x0, y0, x1, y1, ...]` rings in pixel coordinates.
    Polygons(Vec<Vec<f64>>),
    Rle(RleCounts),
}

impl InstanceShape {
    pub fn rasterize(&self, height: usize, width: usize) -> Result<BinaryMask> {
        match &self.geometry {
            Geometry::Polygons(rings) => rasterize_polygon(rings, height, width),
            Geometry::Rle(counts) => decode_rle(counts, height, width),
        }
    }
}

/// Pixel-wise OR of every instance mask in `set`.
///
/// Instances whose polygons are entirely degenerate contribute nothing and
/// are logged.
pub fn class_union_mask(set: &ClassAnnotationSet) -> Result<BinaryMask> {
    let mut union = BinaryMask::empty(set.image_height, set.image_width);
    for instance in &set.instances {
        match instance.rasterize(set.image_height, set.image_width) {
            Ok(mask) => union.union_with(&mask)?,
            Err(Error::DegeneratePolygon) => log::warn!(
                "image {} class {}: skipping degenerate polygon",
                set.image_id,
                set.class_id
            ),
            Err(e) => return Err(e),
        }
    }
    Ok(union)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::area_fraction;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> InstanceShape {
        InstanceShape {
            geometry: Geometry::Polygons(vec![vec![x0, y0, x1, y0, x1, y1, x0, y1]]),
            crowd: false,
        }
    }

    fn set_of(instances: Vec<InstanceShape>) -> ClassAnnotationSet {
        ClassAnnotationSet {
            image_id: 1,
            image_height: 12,
            image_width: 10,
            class_id: 5,
            instances,
        }
    }

    #[test]
    fn singleton_and_idempotent_union() {
        let a = square(1.0, 1.0, 5.0, 6.0);
        let single = class_union_mask(&set_of(vec![a.clone()])).unwrap();
        assert_eq!(single, a.rasterize(12, 10).unwrap());
        let twice = class_union_mask(&set_of(vec![a.clone(), a])).unwrap();
        assert_eq!(twice, single);
    }

    #[test]
    fn mixed_polygon_and_rle() {
        let poly = square(0.0, 0.0, 4.0, 4.0);
        let rle_mask = BinaryMask::from_fn(12, 10, |r, c| r >= 6 && (3..9).contains(&c));
        let rle = InstanceShape {
            geometry: Geometry::Rle(RleCounts::Compressed(compress_counts(&encode_rle(&rle_mask)))),
            crowd: true,
        };
        let union = class_union_mask(&set_of(vec![poly.clone(), rle.clone()])).unwrap();
        let mut expected = poly.rasterize(12, 10).unwrap();
        expected.union_with(&rle_mask).unwrap();
        assert_eq!(union, expected);

        let reversed = class_union_mask(&set_of(vec![rle, poly])).unwrap();
        assert_eq!(reversed, union);

        let fa = area_fraction(&union);
        let parts: [f64; 2] = [16.0 / 120.0, 36.0 / 120.0];
        assert!(fa >= parts[0].max(parts[1]) && fa <= (parts[0] + parts[1]).min(1.0));
    }

    #[test]
    fn degenerate_instance_is_skipped() {
        let line = InstanceShape {
            geometry: Geometry::Polygons(vec![vec![0.0, 0.0, 3.0, 3.0, 6.0, 6.0]]),
            crowd: false,
        };
        let a = square(2.0, 2.0, 4.0, 4.0);
        let m = class_union_mask(&set_of(vec![line, a.clone()])).unwrap();
        assert_eq!(m, a.rasterize(12, 10).unwrap());
    }

    #[test]
    fn bad_rle_propagates() {
        let bad = InstanceShape {
            geometry: Geometry::Rle(RleCounts::Uncompressed(vec![3])),
            crowd: false,
        };
        assert!(matches!(
            class_union_mask(&set_of(vec![bad])),
            Err(Error::RleLengthMismatch { .. })
        ));
    }
}
