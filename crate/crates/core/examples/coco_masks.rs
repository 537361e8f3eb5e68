// Parses a small COCO document with polygon and compressed-RLE instances
// and builds one class-union mask per (image, class).
//
// ```bash
// cargo run --example coco_masks
// ```

use saliency_eval::mask::{class_union_mask, compress_counts, encode_rle, parse_annotations_str, AnnotationFilter};
use saliency_eval::BinaryMask;

pub fn run_example() -> saliency_eval::Result<Vec<(u64, u64, usize)>> {
    let blob = BinaryMask::from_fn(8, 10, |r, c| r >= 5 && c >= 6);
    let counts = compress_counts(&encode_rle(&blob));
    let doc = format!(
        r#"{{
  "images": [{{"id": 7, "height": 8, "width": 10}}],
  "categories": [{{"id": 1, "name": "square"}}, {{"id": 2, "name": "corner"}}],
  "annotations": [
    {{"id": 1, "image_id": 7, "category_id": 1, "iscrowd": 0,
      "segmentation": [[1, 1, 4, 1, 4, 4, 1, 4]]}},
    {{"id": 2, "image_id": 7, "category_id": 2, "iscrowd": 1,
      "segmentation": {{"size": [8, 10], "counts": "{counts}"}}}},
    {{"id": 3, "image_id": 7, "category_id": 1, "iscrowd": 0,
      "segmentation": [[6, 0, 9, 0, 9, 2]]}}
  ]
}}"#
    );
    println!("RLE counts for the corner instance: {counts}");

    let mut out = Vec::new();
    for set in parse_annotations_str(&doc, &AnnotationFilter::default())? {
        let mask = class_union_mask(&set)?;
        println!("image {} class {}: {} instance(s), {} pixels", set.image_id, set.class_id, set.instances.len(), mask.count());
        for r in 0..mask.height() {
            let row: String = (0..mask.width()).map(|c| if mask.get(r, c) { '#' } else { '.' }).collect();
            println!("    {row}");
        }
        out.push((set.image_id, set.class_id, mask.count()));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> saliency_eval::Result<()> {
    run_example().map(drop)
}
