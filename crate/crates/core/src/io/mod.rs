//! Exchange formats: saliency maps (SMAP, grayscale PNG), mask PNGs, and
//! run reports.

mod report;
mod smap;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

pub use report::{
    read_report, write_report, ReportBody, ReportDocument, ReportFormat, RunMetadata,
    REPORT_FORMAT_VERSION,
};
pub use smap::encode_smap;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, SaliencyMap};

/// What to do with negative saliency values on ingestion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativePolicy {
    /// Reject the file.
    #[default]
    Error,
    ClampToZero,
    /// Recommended for signed gradient attributions.
    AbsoluteValue,
}

impl FromStr for NegativePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(Self::Error),
            "clamp" | "clamp_to_zero" => Ok(Self::ClampToZero),
            "abs" | "absolute_value" => Ok(Self::AbsoluteValue),
            other => Err(Error::InvalidParameter(format!(
                "unknown negative policy {other:?} (expected error, clamp or abs)"
            ))),
        }
    }
}

/// Reads an SMAP file or an 8/16-bit grayscale PNG (levels mapped linearly
/// onto `[0, 1]`). The format is detected from the file contents.
pub fn read_saliency(path: impl AsRef<Path>, policy: NegativePolicy) -> Result<SaliencyMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(smap::MAGIC) {
        let (h, w, raw) = smap::decode_smap(&bytes, path)?;
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValues(path.to_path_buf()));
        }
        let mut values: Vec<f64> = raw.into_iter().map(f64::from).collect();
        apply_policy(&mut values, policy, path)?;
        return SaliencyMap::new(h, w, values);
    }
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).map_err(|e| {
        Error::Format {
            path: path.to_path_buf(),
            reason: format!("neither SMAP nor PNG: {e}"),
        }
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(g) => g
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 65535.0)
            .collect(),
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("saliency PNG must be grayscale, got {:?}", other.color()),
            })
        }
    };
    SaliencyMap::new(h, w, values)
}

fn apply_policy(values: &mut [f64], policy: NegativePolicy, path: &Path) -> Result<()> {
    match policy {
        NegativePolicy::Error => {
            if values.iter().any(|v| *v < 0.0) {
                return Err(Error::NegativeValues(path.to_path_buf()));
            }
        }
        NegativePolicy::ClampToZero => values.iter_mut().for_each(|v| *v = v.max(0.0)),
        NegativePolicy::AbsoluteValue => values.iter_mut().for_each(|v| *v = v.abs()),
    }
    // -0.0 compares equal to 0.0 but would round-trip with its sign bit
    values.iter_mut().filter(|v| **v == 0.0).for_each(|v| *v = 0.0);
    Ok(())
}

pub fn write_saliency(map: &SaliencyMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_smap(map)).map_err(|e| Error::io(path, e))
}

/// Reads a mask PNG; any non-zero gray level is foreground.
pub fn read_mask_png(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let bits: Vec<bool> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| v != 0).collect(),
        DynamicImage::ImageLuma16(g) => g.into_raw().into_iter().map(|v| v != 0).collect(),
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("mask PNG must be grayscale, got {:?}", other.color()),
            })
        }
    };
    BinaryMask::new(h, w, bits)
}

/// Writes a mask as 8-bit grayscale: 0 background, 255 foreground.
pub fn write_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let (h, w) = mask.dims();
    let img: GrayImage = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        Luma([if mask.get(y as usize, x as usize) { 255 } else { 0 }])
    });
    img.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
    Ok(())
}

/// Writes a saliency map as 16-bit grayscale PNG after scaling by its
/// maximum. Lossy; meant for viewing and for feeding PNG-only tools.
pub fn write_saliency_png(map: &SaliencyMap, path: impl AsRef<Path>) -> Result<()> {
    let (h, w) = map.dims();
    let max = map.values().iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let img: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        Luma([(map.get(y as usize, x as usize) * scale).round() as u16])
    });
    img.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
    Ok(())
}
