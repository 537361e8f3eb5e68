//! Localization accuracy of class-guided saliency maps.
//!
//! The Weighting Game scores a map by the fraction of its total mass that
//! falls inside the dilated class mask. The Pointing Game only checks
//! whether the single strongest pixel lands on the (undilated) class mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    area_fraction, argmax_location, ensure_same_dims, masked_mass, total_mass, BinaryMask,
    SaliencyMap,
};
use crate::mask::{class_union_mask, ClassAnnotationSet};
use crate::morphology::{dilate, dilate_disc, KernelSpec};
use crate::resample::bilinear_resize;

pub const DEFAULT_SMALL_THRESHOLD: f64 = 0.10;

/// Fraction of saliency mass inside `dilated_mask`.
pub fn weighting_game(saliency: &SaliencyMap, dilated_mask: &BinaryMask) -> Result<f64> {
    ensure_same_dims(saliency.dims(), dilated_mask.dims())?;
    let total = total_mass(saliency);
    if total <= 0.0 {
        return Err(Error::ZeroMassSaliency);
    }
    let inside = masked_mass(saliency, dilated_mask)?;
    Ok((inside / total).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointingOutcome {
    pub hit: bool,
    /// Every saliency value was equal; the argmax fell back to (0, 0).
    pub degenerate: bool,
}

/// Whether the saliency argmax lies on a set pixel of `mask`.
pub fn pointing_game(saliency: &SaliencyMap, mask: &BinaryMask) -> Result<PointingOutcome> {
    ensure_same_dims(saliency.dims(), mask.dims())?;
    let arg = argmax_location(saliency);
    Ok(PointingOutcome {
        hit: mask.get(arg.location.row, arg.location.col),
        degenerate: arg.degenerate,
    })
}

/// Weighting Game score of perfectly uniform saliency: the mask's area fraction.
pub fn uniform_baseline(dilated_mask: &BinaryMask) -> f64 {
    area_fraction(dilated_mask)
}

/// Settings shared by every pair in an accuracy run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct AccuracyConfig {
    pub kernel: KernelSpec,
    /// Disc radius, in pixels, added around the mask for the Pointing Game only.
    pub pointing_tolerance: usize,
}


/// One (image, class) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub image_id: u64,
    pub class_id: u64,
    /// `None` when the map has zero mass.
    pub weighting_accuracy: Option<f64>,
    pub pointing_hit: bool,
    pub mask_area_fraction: f64,
    pub dilated_mask_area_fraction: f64,
    pub uniform_baseline: f64,
    /// Zero-mass or constant saliency; excluded from every mean.
    pub degenerate: bool,
    /// Original saliency dimensions when the map was resized to the image.
    pub resized_from: Option<[usize; 2]>,
}

/// Scores one saliency map against the class union mask.
///
/// Maps whose size differs from the image are bilinearly resized first.
pub fn evaluate_pair(
    saliency: &SaliencyMap,
    annotations: &ClassAnnotationSet,
    config: &AccuracyConfig,
) -> Result<AccuracyRecord> {
    let mask = class_union_mask(annotations)?;
    evaluate_mask(saliency, &mask, annotations.image_id, annotations.class_id, config)
}

/// [`evaluate_pair`] for a mask that is already materialized.
pub fn evaluate_mask(
    saliency: &SaliencyMap,
    mask: &BinaryMask,
    image_id: u64,
    class_id: u64,
    config: &AccuracyConfig,
) -> Result<AccuracyRecord> {
    let (h, w) = mask.dims();
    let resized;
    let (saliency, resized_from) = if saliency.dims() != (h, w) {
        resized = bilinear_resize(saliency, h, w);
        (&resized, Some([saliency.height(), saliency.width()]))
    } else {
        (saliency, None)
    };

    let dilated = dilate(mask, config.kernel);
    let weighting = match weighting_game(saliency, &dilated) {
        Ok(v) => Some(v),
        Err(Error::ZeroMassSaliency) => None,
        Err(e) => return Err(e),
    };
    let pointing_mask;
    let pointing_mask = if config.pointing_tolerance > 0 {
        pointing_mask = dilate_disc(mask, config.pointing_tolerance);
        &pointing_mask
    } else {
        mask
    };
    let pointing = pointing_game(saliency, pointing_mask)?;
    let dilated_fraction = area_fraction(&dilated);
    Ok(AccuracyRecord {
        image_id,
        class_id,
        weighting_accuracy: weighting,
        pointing_hit: pointing.hit,
        mask_area_fraction: area_fraction(mask),
        dilated_mask_area_fraction: dilated_fraction,
        uniform_baseline: dilated_fraction,
        degenerate: weighting.is_none() || pointing.degenerate,
        resized_from,
    })
}

/// Means over the non-degenerate records of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub record_count: usize,
    pub degenerate_count: usize,
    pub mean_weighting_accuracy: Option<f64>,
    pub mean_pointing_hit_rate: Option<f64>,
    pub mean_uniform_baseline: Option<f64>,
    pub small_threshold: f64,
    pub small_count: usize,
    pub mean_weighting_accuracy_small: Option<f64>,
}

impl AccuracySummary {
    /// Folds records in the order given. Never fails; means are `None` for
    /// empty buckets.
    pub fn from_records(records: &[AccuracyRecord], small_threshold: f64) -> Self {
        let usable: Vec<&AccuracyRecord> = records.iter().filter(|r| !r.degenerate).collect();
        let weighting: Vec<f64> = usable.iter().filter_map(|r| r.weighting_accuracy).collect();
        let hits: Vec<f64> = usable
            .iter()
            .map(|r| if r.pointing_hit { 1.0 } else { 0.0 })
            .collect();
        let baselines: Vec<f64> = usable.iter().map(|r| r.uniform_baseline).collect();
        let small: Vec<f64> = usable
            .iter()
            .filter(|r| r.mask_area_fraction < small_threshold)
            .filter_map(|r| r.weighting_accuracy)
            .collect();
        Self {
            record_count: records.len(),
            degenerate_count: records.len() - usable.len(),
            mean_weighting_accuracy: mean(&weighting),
            mean_pointing_hit_rate: mean(&hits),
            mean_uniform_baseline: mean(&baselines),
            small_threshold,
            small_count: small.len(),
            mean_weighting_accuracy_small: mean(&small),
        }
    }
}

/// Summary over `records`; fails when no record is usable.
pub fn aggregate(records: &[AccuracyRecord], small_threshold: f64) -> Result<AccuracySummary> {
    let summary = AccuracySummary::from_records(records, small_threshold);
    if summary.record_count == summary.degenerate_count {
        return Err(Error::EmptyAggregate);
    }
    Ok(summary)
}

pub(crate) fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(crate::grid::compensated_sum(values.iter().copied()) / values.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PixelLocation;
    use crate::mask::{Geometry, InstanceShape};
    use crate::synth::gaussian_saliency;
    use proptest::prelude::*;

    fn square_set(h: usize, w: usize, x0: f64, y0: f64, x1: f64, y1: f64) -> ClassAnnotationSet {
        ClassAnnotationSet {
            image_id: 1,
            image_height: h,
            image_width: w,
            class_id: 2,
            instances: vec![InstanceShape {
                geometry: Geometry::Polygons(vec![vec![x0, y0, x1, y0, x1, y1, x0, y1]]),
                crowd: false,
            }],
        }
    }

    #[test]
    fn weighting_examples() {
        let s = SaliencyMap::new(2, 2, vec![1.0, 3.0, 0.0, 4.0]).unwrap();
        let d = BinaryMask::new(2, 2, vec![true, false, false, true]).unwrap();
        assert_eq!(weighting_game(&s, &d).unwrap(), 0.625);

        let inside = SaliencyMap::from_fn(6, 6, |r, c| if r < 3 && c < 3 { 1.0 } else { 0.0 });
        let mask = BinaryMask::from_fn(6, 6, |r, c| r < 4 && c < 4);
        assert_eq!(weighting_game(&inside, &mask).unwrap(), 1.0);

        let uniform = SaliencyMap::constant(6, 6, 0.2);
        assert!((weighting_game(&uniform, &mask).unwrap() - uniform_baseline(&mask)).abs() < 1e-15);
    }

    #[test]
    fn weighting_errors() {
        let zero = SaliencyMap::constant(3, 3, 0.0);
        assert!(matches!(
            weighting_game(&zero, &BinaryMask::full(3, 3)),
            Err(Error::ZeroMassSaliency)
        ));
        assert!(matches!(
            weighting_game(&SaliencyMap::constant(3, 3, 1.0), &BinaryMask::full(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pointing_barely_missing() {
        let mask = BinaryMask::from_fn(10, 10, |r, c| (2..6).contains(&r) && (2..6).contains(&c));
        let inside = gaussian_saliency((10, 10), PixelLocation::new(5, 5), 2.0, 1.0);
        assert!(pointing_game(&inside, &mask).unwrap().hit);
        let just_out = gaussian_saliency((10, 10), PixelLocation::new(6, 5), 2.0, 1.0);
        let o = pointing_game(&just_out, &mask).unwrap();
        assert!(!o.hit && !o.degenerate);
        // most of the mass is still inside the dilated mask
        let dilated = dilate(&mask, KernelSpec::default());
        assert!(weighting_game(&just_out, &dilated).unwrap() > 0.9);
    }

    #[test]
    fn pointing_constant_map() {
        let mut mask = BinaryMask::empty(4, 4);
        let flat = SaliencyMap::constant(4, 4, 2.0);
        let o = pointing_game(&flat, &mask).unwrap();
        assert!(!o.hit && o.degenerate);
        mask.set(0, 0, true);
        let o = pointing_game(&flat, &mask).unwrap();
        assert!(o.hit && o.degenerate);
    }

    #[test]
    fn pointing_tolerance_widens_target() {
        let set = square_set(20, 20, 5.0, 5.0, 10.0, 10.0);
        let s = gaussian_saliency((20, 20), PixelLocation::new(12, 7), 1.5, 1.0);
        let strict = evaluate_pair(&s, &set, &AccuracyConfig::default()).unwrap();
        assert!(!strict.pointing_hit);
        let loose = AccuracyConfig {
            pointing_tolerance: 3,
            ..Default::default()
        };
        assert!(evaluate_pair(&s, &set, &loose).unwrap().pointing_hit);
    }

    #[test]
    fn gaussian_inside_square_beats_baseline() {
        let set = square_set(64, 64, 20.0, 20.0, 44.0, 44.0);
        let s = gaussian_saliency((64, 64), PixelLocation::new(32, 32), 4.0, 1.0);
        let rec = evaluate_pair(&s, &set, &AccuracyConfig::default()).unwrap();
        assert!(rec.weighting_accuracy.unwrap() > rec.dilated_mask_area_fraction);
        assert!(rec.pointing_hit);
        assert!(!rec.degenerate);
        assert!(rec.mask_area_fraction <= rec.dilated_mask_area_fraction);
        assert_eq!(rec.resized_from, None);
    }

    #[test]
    fn saliency_outside_everything() {
        let set = square_set(40, 40, 2.0, 2.0, 6.0, 6.0);
        let s = SaliencyMap::from_fn(40, 40, |r, c| if r > 30 && c > 30 { 1.0 } else { 0.0 });
        let rec = evaluate_pair(&s, &set, &AccuracyConfig::default()).unwrap();
        assert_eq!(rec.weighting_accuracy, Some(0.0));
        assert!(!rec.pointing_hit);
    }

    #[test]
    fn mismatched_saliency_is_resized() {
        let set = square_set(32, 32, 8.0, 8.0, 24.0, 24.0);
        let s = gaussian_saliency((8, 8), PixelLocation::new(4, 4), 1.0, 1.0);
        let rec = evaluate_pair(&s, &set, &AccuracyConfig::default()).unwrap();
        assert_eq!(rec.resized_from, Some([8, 8]));
        assert!(rec.pointing_hit);
    }

    #[test]
    fn zero_mass_is_degenerate() {
        let set = square_set(8, 8, 1.0, 1.0, 4.0, 4.0);
        let rec = evaluate_pair(&SaliencyMap::constant(8, 8, 0.0), &set, &AccuracyConfig::default())
            .unwrap();
        assert!(rec.degenerate);
        assert_eq!(rec.weighting_accuracy, None);
    }

    fn record(acc: f64, hit: bool, frac: f64) -> AccuracyRecord {
        AccuracyRecord {
            image_id: 0,
            class_id: 0,
            weighting_accuracy: Some(acc),
            pointing_hit: hit,
            mask_area_fraction: frac,
            dilated_mask_area_fraction: frac,
            uniform_baseline: frac,
            degenerate: false,
            resized_from: None,
        }
    }

    #[test]
    fn aggregate_examples() {
        let recs = vec![record(0.2, true, 0.5), record(0.4, false, 0.3), record(0.6, true, 0.2)];
        let s = aggregate(&recs, DEFAULT_SMALL_THRESHOLD).unwrap();
        assert!((s.mean_weighting_accuracy.unwrap() - 0.4).abs() < 1e-15);
        assert!((s.mean_pointing_hit_rate.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.small_count, 0);
        assert_eq!(s.mean_weighting_accuracy_small, None);

        let mut with_small = recs.clone();
        with_small.push(record(0.9, true, 0.05));
        // threshold is strict
        with_small.push(record(0.1, true, 0.10));
        let s = aggregate(&with_small, 0.10).unwrap();
        assert_eq!(s.small_count, 1);
        assert_eq!(s.mean_weighting_accuracy_small, Some(0.9));
    }

    #[test]
    fn aggregate_skips_degenerate() {
        let mut bad = record(0.0, false, 0.1);
        bad.degenerate = true;
        bad.weighting_accuracy = None;
        assert!(matches!(aggregate(&[bad.clone()], 0.1), Err(Error::EmptyAggregate)));
        assert!(matches!(aggregate(&[], 0.1), Err(Error::EmptyAggregate)));
        let s = aggregate(&[bad, record(0.5, true, 0.5)], 0.1).unwrap();
        assert_eq!(s.degenerate_count, 1);
        assert_eq!(s.mean_weighting_accuracy, Some(0.5));
    }

    #[test]
    fn aggregate_matches_recomputation() {
        let mut rng = crate::rng::RngStream::new(5, 5);
        let recs: Vec<AccuracyRecord> = (0..1000)
            .map(|_| record(rng.next_f64(), rng.next_f64() < 0.5, rng.next_f64() * 0.3))
            .collect();
        let s = aggregate(&recs, 0.1).unwrap();
        let mut sum = 0.0;
        let mut small_sum = 0.0;
        let mut small_n = 0;
        for r in &recs {
            sum += r.weighting_accuracy.unwrap();
            if r.mask_area_fraction < 0.1 {
                small_sum += r.weighting_accuracy.unwrap();
                small_n += 1;
            }
        }
        assert!((s.mean_weighting_accuracy.unwrap() - sum / 1000.0).abs() < 1e-12);
        assert!((s.mean_weighting_accuracy_small.unwrap() - small_sum / small_n as f64).abs() < 1e-12);
        assert_eq!(s.small_count, small_n);
    }

    fn map_and_mask() -> impl Strategy<Value = (SaliencyMap, BinaryMask)> {
        (2usize..20, 2usize..20).prop_flat_map(|(h, w)| {
            (
                prop::collection::vec(0.001f64..1.0, h * w),
                prop::collection::vec(prop::bool::weighted(0.2), h * w),
            )
                .prop_map(move |(v, b)| {
                    (SaliencyMap::new(h, w, v).unwrap(), BinaryMask::new(h, w, b).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn weighting_is_scale_invariant((s, m) in map_and_mask(), alpha in prop::sample::select(vec![1e-6, 0.3, 1.0, 7.5, 1e6])) {
            let a = weighting_game(&s, &m).unwrap();
            let b = weighting_game(&s.scaled(alpha).unwrap(), &m).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn dilation_never_lowers_weighting((s, m) in map_and_mask()) {
            let d = dilate(&m, KernelSpec::default());
            prop_assert!(weighting_game(&s, &d).unwrap() >= weighting_game(&s, &m).unwrap());
        }

        #[test]
        fn pointing_ignores_monotone_transforms((s, m) in map_and_mask()) {
            let t = s.map_values(|v| (3.0 * v).exp() + 0.5).unwrap();
            prop_assert_eq!(pointing_game(&s, &m).unwrap(), pointing_game(&t, &m).unwrap());
        }

        #[test]
        fn delta_maps_agree((_, m) in map_and_mask(), pick in any::<usize>()) {
            let (h, w) = m.dims();
            let p = pick % (h * w);
            let delta = SaliencyMap::from_fn(h, w, |r, c| if r * w + c == p { 1.0 } else { 0.0 });
            let inside = m.bits()[p];
            prop_assert_eq!(weighting_game(&delta, &m).unwrap() == 1.0, inside);
            prop_assert_eq!(pointing_game(&delta, &m).unwrap().hit, inside);
        }
    }
}
