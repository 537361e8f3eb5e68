//! COCO-schema annotation documents.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use super::rle::RleCounts;
use super::{ClassAnnotationSet, Geometry, InstanceShape};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct Document {
    images: Vec<ImageEntry>,
    annotations: Vec<AnnotationEntry>,
    categories: Vec<CategoryEntry>,
}

#[derive(Debug, Deserialize)]
struct ImageEntry {
    id: u64,
    height: usize,
    width: usize,
}

#[derive(Debug, Deserialize)]
struct AnnotationEntry {
    image_id: u64,
    category_id: u64,
    segmentation: Segmentation,
    #[serde(default)]
    iscrowd: u8,
}

#[derive(Debug, Deserialize)]
#[allow(dead_code)]
struct CategoryEntry {
    id: u64,
    #[serde(default)]
    name: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Segmentation {
    Polygons(Vec<Vec<f64>>),
    Rle { size: [usize; 2], counts: Counts },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Counts {
    Uncompressed(Vec<u32>),
    Compressed(String),
}

/// Which annotations to keep while parsing.
#[derive(Debug, Clone)]
pub struct AnnotationFilter {
    /// Keep only these category ids; `None` keeps all.
    pub categories: Option<BTreeSet<u64>>,
    pub include_crowd: bool,
}

impl Default for AnnotationFilter {
    fn default() -> Self {
        Self {
            categories: None,
            include_crowd: true,
        }
    }
}

pub fn parse_annotations(
    path: impl AsRef<Path>,
    filter: &AnnotationFilter,
) -> Result<Vec<ClassAnnotationSet>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations_str(&text, filter)
}

/// Groups annotations into one set per (image, class), ordered by
/// `(image_id, class_id)`.
pub fn parse_annotations_str(
    text: &str,
    filter: &AnnotationFilter,
) -> Result<Vec<ClassAnnotationSet>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let doc: Document = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;

    let images: BTreeMap<u64, &ImageEntry> = doc.images.iter().map(|i| (i.id, i)).collect();
    let known_categories: BTreeSet<u64> = doc.categories.iter().map(|c| c.id).collect();

    let mut grouped: BTreeMap<(u64, u64), Vec<InstanceShape>> = BTreeMap::new();
    for ann in doc.annotations {
        if let Some(keep) = &filter.categories {
            if !keep.contains(&ann.category_id) {
                continue;
            }
        }
        let crowd = ann.iscrowd != 0;
        if crowd && !filter.include_crowd {
            continue;
        }
        let image = images.get(&ann.image_id).ok_or_else(|| {
            Error::Schema(format!("annotation references unknown image {}", ann.image_id))
        })?;
        if !known_categories.contains(&ann.category_id) {
            return Err(Error::Schema(format!(
                "annotation references unknown category {}",
                ann.category_id
            )));
        }
        let geometry = match ann.segmentation {
            Segmentation::Polygons(rings) => Geometry::Polygons(rings),
            Segmentation::Rle { size, counts } => {
                if size != [image.height, image.width] {
                    return Err(Error::Schema(format!(
                        "RLE size {:?} differs from image {} size {}x{}",
                        size, image.id, image.height, image.width
                    )));
                }
                Geometry::Rle(match counts {
                    Counts::Uncompressed(c) => RleCounts::Uncompressed(c),
                    Counts::Compressed(s) => RleCounts::Compressed(s),
                })
            }
        };
        grouped
            .entry((ann.image_id, ann.category_id))
            .or_default()
            .push(InstanceShape { geometry, crowd });
    }

    if grouped.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(grouped
        .into_iter()
        .map(|((image_id, class_id), instances)| {
            let image = images[&image_id];
            ClassAnnotationSet {
                image_id,
                image_height: image.height,
                image_width: image.width,
                class_id,
                instances,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "images": [{"id": 7, "height": 6, "width": 6}, {"id": 2, "height": 4, "width": 5}],
        "categories": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}, {"id": 3, "name": "c"}],
        "annotations": [
            {"image_id": 7, "category_id": 3, "segmentation": [[1,1,4,1,4,4,1,4]], "iscrowd": 0},
            {"image_id": 7, "category_id": 3, "segmentation": {"size": [6,6], "counts": [30, 6]}, "iscrowd": 1},
            {"image_id": 2, "category_id": 2, "segmentation": {"size": [4,5], "counts": "0d0"}, "iscrowd": 0},
            {"image_id": 2, "category_id": 1, "segmentation": [[0,0,2,0,2,2]], "iscrowd": 0}
        ]
    }"#;

    #[test]
    fn groups_and_orders_pairs() {
        let sets = parse_annotations_str(DOC, &AnnotationFilter::default()).unwrap();
        let keys: Vec<(u64, u64)> = sets.iter().map(|s| (s.image_id, s.class_id)).collect();
        assert_eq!(keys, vec![(2, 1), (2, 2), (7, 3)]);
        assert_eq!(sets[2].instances.len(), 2);
        assert_eq!((sets[0].image_height, sets[0].image_width), (4, 5));
        assert!(matches!(sets[1].instances[0].geometry, Geometry::Rle(RleCounts::Compressed(_))));
    }

    #[test]
    fn filters_categories_and_crowd() {
        let only3 = AnnotationFilter {
            categories: Some([3].into_iter().collect()),
            include_crowd: false,
        };
        let sets = parse_annotations_str(DOC, &only3).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].instances.len(), 1);
        assert!(!sets[0].instances[0].crowd);
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            parse_annotations_str("{not json", &AnnotationFilter::default()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse_annotations_str(r#"{"images": []}"#, &AnnotationFilter::default()),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            parse_annotations_str(
                r#"{"images": [], "annotations": [], "categories": []}"#,
                &AnnotationFilter::default()
            ),
            Err(Error::EmptyDataset)
        ));
        let none = AnnotationFilter {
            categories: Some([99].into_iter().collect()),
            include_crowd: true,
        };
        assert!(matches!(parse_annotations_str(DOC, &none), Err(Error::EmptyDataset)));
    }

    #[test]
    fn unknown_image_is_schema_error() {
        let doc = r#"{"images": [], "categories": [{"id": 1}],
            "annotations": [{"image_id": 4, "category_id": 1, "segmentation": [[0,0,1,0,1,1]]}]}"#;
        assert!(matches!(
            parse_annotations_str(doc, &AnnotationFilter::default()),
            Err(Error::Schema(_))
        ));
    }
}
