//! Binary dilation of class masks.
//!
//! A binarized convolution of a mask with an all-ones `k × k` kernel is the
//! same as morphological dilation by a square structuring element, so that is
//! what [`dilate`] computes, exactly and without floating point. Pixels outside
//! the image count as background; the result never grows past the border.

use crate::error::{Error, Result};
use crate::grid::BinaryMask;

/// Side length of the square structuring element. Always odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    size: usize,
}

impl KernelSpec {
    pub const DEFAULT_SIZE: usize = 9;

    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be a positive odd integer, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            size: Self::DEFAULT_SIZE,
        }
    }
}

/// Sets every pixel within Chebyshev distance `radius` of a set pixel.
///
/// Separable: a horizontal max-filter followed by a vertical one.
pub fn dilate(mask: &BinaryMask, kernel: KernelSpec) -> BinaryMask {
    let r = kernel.radius();
    if r == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let mut horizontal = BinaryMask::empty(h, w);
    let mut line = vec![false; w];
    for row in 0..h {
        line.iter_mut()
            .enumerate()
            .for_each(|(c, v)| *v = mask.get(row, c));
        for (c, v) in spread(&line, r).into_iter().enumerate() {
            horizontal.set(row, c, v);
        }
    }
    let mut out = BinaryMask::empty(h, w);
    let mut column = vec![false; h];
    for col in 0..w {
        column
            .iter_mut()
            .enumerate()
            .for_each(|(r_, v)| *v = horizontal.get(r_, col));
        for (row, v) in spread(&column, r).into_iter().enumerate() {
            out.set(row, col, v);
        }
    }
    out
}

/// Dilation by a disc: sets every pixel within Euclidean distance `radius`
/// of a set pixel. Used for the tolerant pointing variant.
pub fn dilate_disc(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let mut out = BinaryMask::empty(h, w);
    let mut line = vec![false; w];
    let r2 = radius * radius;
    for row in 0..h {
        line.iter_mut()
            .enumerate()
            .for_each(|(c, v)| *v = mask.get(row, c));
        if !line.iter().any(|v| *v) {
            continue;
        }
        for dy in 0..=radius {
            // widest integer dx with dx² + dy² ≤ r²
            let mut half = ((r2 - dy * dy) as f64).sqrt() as usize;
            while (half + 1) * (half + 1) + dy * dy <= r2 {
                half += 1;
            }
            while half * half + dy * dy > r2 {
                half -= 1;
            }
            let spread_line = spread(&line, half);
            for target in [row.checked_sub(dy), Some(row + dy)].into_iter().flatten() {
                if target >= h {
                    continue;
                }
                for (c, v) in spread_line.iter().enumerate() {
                    if *v {
                        out.set(target, c, true);
                    }
                }
            }
        }
    }
    out
}

/// 1-D dilation: `out[i]` is set if any `line[j]` with `|i - j| ≤ r` is set.
fn spread(line: &[bool], r: usize) -> Vec<bool> {
    let n = line.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &v in line {
        prefix.push(prefix.last().unwrap() + v as usize);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + r + 1).min(n);
            prefix[hi] > prefix[lo]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(mask: &BinaryMask, r: usize) -> BinaryMask {
        let (h, w) = mask.dims();
        BinaryMask::from_fn(h, w, |row, col| {
            (0..h).any(|qr| {
                (0..w).any(|qc| mask.get(qr, qc) && row.abs_diff(qr) <= r && col.abs_diff(qc) <= r)
            })
        })
    }

    #[test]
    fn kernel_validation() {
        assert!(KernelSpec::new(0).is_err());
        assert!(KernelSpec::new(8).is_err());
        assert_eq!(KernelSpec::new(9).unwrap(), KernelSpec::default());
    }

    #[test]
    fn interior_footprint() {
        let mut m = BinaryMask::empty(16, 16);
        m.set(8, 8, true);
        let d = dilate(&m, KernelSpec::default());
        let expected = BinaryMask::from_fn(16, 16, |r, c| (4..=12).contains(&r) && (4..=12).contains(&c));
        assert_eq!(d, expected);
    }

    #[test]
    fn corner_footprint_is_clipped() {
        let mut m = BinaryMask::empty(16, 16);
        m.set(0, 0, true);
        let d = dilate(&m, KernelSpec::default());
        assert_eq!(d, BinaryMask::from_fn(16, 16, |r, c| r <= 4 && c <= 4));
    }

    #[test]
    fn disc_footprint() {
        let mut m = BinaryMask::empty(11, 11);
        m.set(5, 5, true);
        let d = dilate_disc(&m, 3);
        let expected = BinaryMask::from_fn(11, 11, |r, c| {
            let dr = r as i64 - 5;
            let dc = c as i64 - 5;
            dr * dr + dc * dc <= 9
        });
        assert_eq!(d, expected);
        assert_eq!(dilate_disc(&m, 0), m);
    }

    fn random_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..=32, 1usize..=32).prop_flat_map(|(h, w)| {
            prop::collection::vec(prop::bool::weighted(0.05), h * w)
                .prop_map(move |b| BinaryMask::new(h, w, b).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(mask in random_mask(), k in prop::sample::select(vec![1usize, 3, 5, 9])) {
            let kernel = KernelSpec::new(k).unwrap();
            prop_assert_eq!(dilate(&mask, kernel), brute_force(&mask, kernel.radius()));
        }

        #[test]
        fn extensive_and_union_commuting(a in random_mask(), seed in any::<u64>()) {
            let (h, w) = a.dims();
            let b = BinaryMask::from_fn(h, w, |r, c| (seed >> ((r * w + c) % 64)) & 1 == 1);
            let k = KernelSpec::default();
            let da = dilate(&a, k);
            prop_assert!(a.is_subset_of(&da));
            let mut ab = a.clone();
            ab.union_with(&b).unwrap();
            let mut expected = da.clone();
            expected.union_with(&dilate(&b, k)).unwrap();
            prop_assert_eq!(dilate(&ab, k), expected.clone());
            // monotone: a ⊆ a ∪ b
            prop_assert!(da.is_subset_of(&expected));
        }

        #[test]
        fn kernel_one_is_identity(mask in random_mask()) {
            prop_assert_eq!(dilate(&mask, KernelSpec::new(1).unwrap()), mask);
        }

        #[test]
        fn translation_equivariant_in_interior(r in 10usize..20, c in 10usize..20, dr in 0usize..5, dc in 0usize..5) {
            let k = KernelSpec::default();
            let mut a = BinaryMask::empty(40, 40);
            a.set(r, c, true);
            let mut b = BinaryMask::empty(40, 40);
            b.set(r + dr, c + dc, true);
            let da = dilate(&a, k);
            let db = dilate(&b, k);
            for row in 0..40 - dr {
                for col in 0..40 - dc {
                    prop_assert_eq!(da.get(row, col), db.get(row + dr, col + dc));
                }
            }
        }
    }
}
