//! COCO run-length mask encoding.
//!
//! Runs are column-major and alternate background/foreground starting with
//! background. The compressed string form packs each count into 6-bit
//! characters offset by 48: the low 5 bits carry data, bit 5 means "more
//! chunks follow", and bit 4 of the final chunk is the sign. From the fourth
//! count on, the stored value is the difference to the count two positions
//! earlier.

use crate::error::{Error, Result};
use crate::grid::BinaryMask;

/// Run-length data as it appears in an annotation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RleCounts {
    Uncompressed(Vec<u32>),
    Compressed(String),
}

pub fn decode_rle(counts: &RleCounts, height: usize, width: usize) -> Result<BinaryMask> {
    match counts {
        RleCounts::Uncompressed(c) => decode_counts(c, height, width),
        RleCounts::Compressed(s) => decode_counts(&decompress_counts(s)?, height, width),
    }
}

fn decode_counts(counts: &[u32], height: usize, width: usize) -> Result<BinaryMask> {
    let expected = height * width;
    let actual: usize = counts.iter().map(|&c| c as usize).sum();
    if actual != expected {
        return Err(Error::RleLengthMismatch { expected, actual });
    }
    let mut mask = BinaryMask::empty(height, width);
    let mut pos = 0usize;
    let mut value = false;
    for &run in counts {
        if value {
            for i in pos..pos + run as usize {
                // column-major index -> (row, col)
                mask.set(i % height, i / height, true);
            }
        }
        pos += run as usize;
        value = !value;
    }
    Ok(mask)
}

/// Column-major run lengths of `mask`, first run background.
pub fn encode_rle(mask: &BinaryMask) -> Vec<u32> {
    let (h, w) = mask.dims();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for c in 0..w {
        for r in 0..h {
            let v = mask.get(r, c);
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    counts
}

pub fn decompress_counts(s: &str) -> Result<Vec<u32>> {
    let bytes = s.as_bytes();
    let mut counts: Vec<u32> = Vec::new();
    let mut p = 0usize;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0u32;
        loop {
            let raw = bytes[p];
            if !(48..48 + 64).contains(&raw) {
                return Err(Error::RleCorrupt(format!(
                    "byte 0x{raw:02x} at offset {p} outside the 6-bit alphabet"
                )));
            }
            if k >= 12 {
                return Err(Error::RleCorrupt(format!("count at offset {p} is too long")));
            }
            let c = (raw - 48) as i64;
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
            if p >= bytes.len() {
                return Err(Error::RleCorrupt("truncated count".into()));
            }
        }
        let m = counts.len();
        if m > 2 {
            x += counts[m - 2] as i64;
        }
        let value = u32::try_from(x)
            .map_err(|_| Error::RleCorrupt(format!("count {} decodes to {x}", m)))?;
        counts.push(value);
    }
    Ok(counts)
}

pub fn compress_counts(counts: &[u32]) -> String {
    let mut out = String::new();
    for (i, &c) in counts.iter().enumerate() {
        let mut x = c as i64;
        if i > 2 {
            x -= counts[i - 2] as i64;
        }
        loop {
            let mut chunk = (x & 0x1f) as u8;
            x >>= 5;
            let more = if chunk & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                chunk |= 0x20;
            }
            out.push((chunk + 48) as char);
            if !more {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_background_run_is_empty() {
        let m = decode_rle(&RleCounts::Uncompressed(vec![12]), 3, 4).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn leading_zero_run_is_full() {
        let m = decode_rle(&RleCounts::Uncompressed(vec![0, 12]), 3, 4).unwrap();
        assert_eq!(m.count(), 12);
    }

    #[test]
    fn runs_are_column_major() {
        // 2x3 mask, true at (1,0) and (0,1)
        let m = decode_rle(&RleCounts::Uncompressed(vec![1, 2, 3]), 2, 3).unwrap();
        assert!(m.get(1, 0) && m.get(0, 1));
        assert_eq!(m.count(), 2);
    }

    #[test]
    fn length_mismatch() {
        let err = decode_rle(&RleCounts::Uncompressed(vec![3, 4]), 3, 3).unwrap_err();
        assert!(matches!(
            err,
            Error::RleLengthMismatch {
                expected: 9,
                actual: 7
            }
        ));
    }

    #[test]
    fn corrupt_strings() {
        assert!(matches!(
            decompress_counts("6 2"),
            Err(Error::RleCorrupt(_))
        ));
        // continuation bit on the last chunk
        assert!(matches!(decompress_counts("P"), Err(Error::RleCorrupt(_))));
        // difference that drives a count negative
        assert!(matches!(decompress_counts("626I"), Err(Error::RleCorrupt(_))));
    }

    // Value produced by the reference COCO tooling for a 5x4 mask with
    // counts [6, 2, 6, 5, 1].
    #[test]
    fn known_compressed_string() {
        assert_eq!(decompress_counts("6263K").unwrap(), vec![6, 2, 6, 5, 1]);
        assert_eq!(compress_counts(&[6, 2, 6, 5, 1]), "6263K");
    }

    fn random_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..=64, 1usize..=64).prop_flat_map(|(h, w)| {
            prop::collection::vec(any::<bool>(), h * w)
                .prop_map(move |b| BinaryMask::new(h, w, b).unwrap())
        })
    }

    proptest! {
        #[test]
        fn uncompressed_round_trip(mask in random_mask()) {
            let (h, w) = mask.dims();
            let counts = encode_rle(&mask);
            prop_assert_eq!(decode_rle(&RleCounts::Uncompressed(counts), h, w).unwrap(), mask);
        }

        #[test]
        fn compressed_round_trip(mask in random_mask()) {
            let (h, w) = mask.dims();
            let s = compress_counts(&encode_rle(&mask));
            prop_assert_eq!(decode_rle(&RleCounts::Compressed(s), h, w).unwrap(), mask);
        }
    }
}
