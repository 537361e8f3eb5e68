//! Grid types shared by every metric, plus the primitive reductions over them.
//!
//! Both grids are row-major. Saliency values are stored as `f64` and are
//! guaranteed finite and non-negative once a [`SaliencyMap`] exists; signed
//! inputs have to go through an ingestion policy first (see
//! [`crate::io::NegativePolicy`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// H×W grid of non-negative saliency magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(height, width, values.len())?;
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidGrid(format!(
                "saliency values must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Builds a map by evaluating `f(row, col)`. Panics if `f` yields a
    /// negative or non-finite value, or if a dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self::new(height, width, values).expect("from_fn produced an invalid saliency map")
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Self {
        Self::from_fn(height, width, |_, _| value)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Multiplies every value by `factor`, which must be finite and ≥ 0.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Applies `f` to every value; the result is re-validated.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Copies the `rows × cols` window starting at (`top`, `left`).
    pub(crate) fn window(&self, top: usize, left: usize, rows: usize, cols: usize) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in top..top + rows {
            let start = r * self.width + left;
            values.extend_from_slice(&self.values[start..start + cols]);
        }
        Self {
            height: rows,
            width: cols,
            values,
        }
    }

    pub(crate) fn from_raw(height: usize, width: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), height * width);
        debug_assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self {
            height,
            width,
            values,
        }
    }
}

/// H×W boolean grid: a class segmentation mask or its dilation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(height, width, bits.len())?;
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn empty(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "mask dimensions must be positive");
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn full(height: usize, width: usize) -> Self {
        let mut m = Self::empty(height, width);
        m.bits.fill(true);
        m
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::empty(height, width);
        for r in 0..height {
            for c in 0..width {
                m.bits[r * width + c] = f(r, c);
            }
        }
        m
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Pixel-wise OR, in place.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        ensure_same_dims(self.dims(), other.dims())?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

/// Row/column coordinate of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelLocation {
    pub row: usize,
    pub col: usize,
}

impl PixelLocation {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Result of [`argmax_location`]. `degenerate` is set when every value in
/// the map is equal, in which case `location` is (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArgMax {
    pub location: PixelLocation,
    pub degenerate: bool,
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn total_mass(map: &SaliencyMap) -> f64 {
    compensated_sum(map.values.iter().copied())
}

pub fn masked_mass(map: &SaliencyMap, mask: &BinaryMask) -> Result<f64> {
    ensure_same_dims(map.dims(), mask.dims())?;
    Ok(compensated_sum(
        map.values
            .iter()
            .zip(&mask.bits)
            .filter(|(_, m)| **m)
            .map(|(v, _)| *v),
    ))
}

/// Location of the largest value. Ties go to the smallest row-major index.
pub fn argmax_location(map: &SaliencyMap) -> ArgMax {
    let mut best = 0usize;
    let mut best_value = map.values[0];
    let mut all_equal = true;
    for (i, &v) in map.values.iter().enumerate().skip(1) {
        if v != best_value {
            all_equal = false;
        }
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    ArgMax {
        location: PixelLocation::new(best / map.width, best % map.width),
        degenerate: all_equal,
    }
}

pub fn area_fraction(mask: &BinaryMask) -> f64 {
    mask.count() as f64 / (mask.height * mask.width) as f64
}

pub(crate) fn ensure_same_dims(left: (usize, usize), right: (usize, usize)) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch {
            left_height: left.0,
            left_width: left.1,
            right_height: right.0,
            right_width: right.1,
        });
    }
    Ok(())
}

fn check_dims(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidGrid(format!(
            "dimensions must be positive, got {height}x{width}"
        )));
    }
    if height.checked_mul(width) != Some(len) {
        return Err(Error::InvalidGrid(format!(
            "{height}x{width} grid needs {} values, got {len}",
            height * width
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map2x2() -> SaliencyMap {
        SaliencyMap::new(2, 2, vec![1.0, 3.0, 0.0, 4.0]).unwrap()
    }

    #[test]
    fn total_mass_small() {
        assert_eq!(total_mass(&map2x2()), 8.0);
        assert_eq!(total_mass(&SaliencyMap::constant(5, 5, 0.0)), 0.0);
    }

    #[test]
    fn total_mass_matches_naive_sum() {
        // xorshift keeps this free of any crate RNG
        let mut s = 0x2545F4914F6CDD1Du64;
        let map = SaliencyMap::from_fn(100, 100, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        });
        let mut naive = 0.0;
        for r in 0..100 {
            for c in 0..100 {
                naive += map.get(r, c);
            }
        }
        let got = total_mass(&map);
        assert!(((got - naive) / naive).abs() < 1e-9);
    }

    #[test]
    fn masked_mass_examples() {
        let mask = BinaryMask::new(2, 2, vec![true, false, false, true]).unwrap();
        assert_eq!(masked_mass(&map2x2(), &mask).unwrap(), 5.0);
        assert_eq!(masked_mass(&map2x2(), &BinaryMask::empty(2, 2)).unwrap(), 0.0);
        assert_eq!(masked_mass(&map2x2(), &BinaryMask::full(2, 2)).unwrap(), 8.0);
    }

    #[test]
    fn masked_mass_rejects_mismatch() {
        let err = masked_mass(&map2x2(), &BinaryMask::full(3, 2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn argmax_examples() {
        let m = SaliencyMap::new(2, 2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(
            argmax_location(&m),
            ArgMax {
                location: PixelLocation::new(1, 0),
                degenerate: false
            }
        );
        let flat = SaliencyMap::constant(2, 2, 5.0);
        assert_eq!(
            argmax_location(&flat),
            ArgMax {
                location: PixelLocation::new(0, 0),
                degenerate: true
            }
        );
        // earliest of two maxima wins
        let tie = SaliencyMap::new(1, 3, vec![1.0, 7.0, 7.0]).unwrap();
        assert_eq!(argmax_location(&tie).location, PixelLocation::new(0, 1));
        assert!(!argmax_location(&tie).degenerate);
    }

    #[test]
    fn area_fraction_examples() {
        let m = BinaryMask::from_fn(10, 10, |r, c| r < 5 && c < 5);
        assert_eq!(area_fraction(&m), 0.25);
        assert_eq!(area_fraction(&BinaryMask::empty(4, 4)), 0.0);
        assert_eq!(area_fraction(&BinaryMask::full(4, 4)), 1.0);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(SaliencyMap::new(0, 3, vec![]).is_err());
        assert!(SaliencyMap::new(2, 2, vec![1.0; 3]).is_err());
        assert!(SaliencyMap::new(1, 2, vec![1.0, -0.5]).is_err());
        assert!(SaliencyMap::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(BinaryMask::new(2, 2, vec![true; 5]).is_err());
    }

    fn map_and_mask() -> impl Strategy<Value = (SaliencyMap, BinaryMask)> {
        (1usize..24, 1usize..24).prop_flat_map(|(h, w)| {
            (
                prop::collection::vec(0.0f64..1e3, h * w),
                prop::collection::vec(any::<bool>(), h * w),
            )
                .prop_map(move |(v, b)| {
                    (
                        SaliencyMap::new(h, w, v).unwrap(),
                        BinaryMask::new(h, w, b).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn mask_and_complement_partition_mass((map, mask) in map_and_mask()) {
            let total = total_mass(&map);
            let inside = masked_mass(&map, &mask).unwrap();
            let outside = masked_mass(&map, &mask.complement()).unwrap();
            prop_assert!((inside + outside - total).abs() <= 1e-9 * total.max(1e-300));
        }

        #[test]
        fn masked_mass_is_monotone((map, mask) in map_and_mask(), extra in any::<u64>()) {
            let mut bigger = mask.clone();
            let (h, w) = mask.dims();
            bigger.set((extra as usize / w) % h, extra as usize % w, true);
            prop_assert!(mask.is_subset_of(&bigger));
            prop_assert!(masked_mass(&map, &mask).unwrap() <= masked_mass(&map, &bigger).unwrap());
        }

        #[test]
        fn argmax_ignores_positive_scaling((map, _) in map_and_mask(), alpha in 1e-3f64..1e3) {
            let scaled = map.scaled(alpha).unwrap();
            prop_assert_eq!(argmax_location(&map).location, argmax_location(&scaled).location);
        }

        #[test]
        fn complement_fraction_is_exact((_, mask) in map_and_mask()) {
            let n = (mask.height() * mask.width()) as f64;
            let inside = mask.count();
            let outside = mask.complement().count();
            prop_assert_eq!(inside + outside, mask.height() * mask.width());
            prop_assert_eq!(area_fraction(&mask.complement()), outside as f64 / n);
        }
    }
}
