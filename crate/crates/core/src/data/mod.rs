//! Samples, datasets, manifest ingestion, preprocessing and the synthetic
//! hand-image generator.

mod manifest;
mod preprocess;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub use manifest::{load_manifest, write_dataset, ManifestRow, MANIFEST_FILE};
pub use preprocess::{preprocess, preprocess_image, resize_bilinear};
pub use synth::{generate_synthetic_dataset, generate_with_truth, iou, GroundTruth, SyntheticParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "TH")]
    Th,
}

impl Modality {
    pub const ALL: [Modality; 2] = [Modality::Rgb, Modality::Th];

    pub fn channels(self) -> usize {
        match self {
            Modality::Rgb => 3,
            Modality::Th => 1,
        }
    }

    /// Full-scale value of the stored integer levels (8-bit RGB, 16-bit TH).
    pub fn max_level(self) -> f64 {
        match self {
            Modality::Rgb => 255.0,
            Modality::Th => 65535.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Rgb => "RGB",
            Modality::Th => "TH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Authenticity {
    Real,
    Fake,
}

macro_rules! text_enum {
    ($ty:ty, $($variant:path => $text:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($variant),)+
                    other => Err(format!("unrecognized value `{other}`")),
                }
            }
        }
    };
}

text_enum!(HandSide, HandSide::Left => "left", HandSide::Right => "right");
text_enum!(Modality, Modality::Rgb => "RGB", Modality::Th => "TH");
text_enum!(Authenticity, Authenticity::Real => "real", Authenticity::Fake => "fake");

/// One hand image. Pixel values are stored as integer levels of the
/// modality's bit depth, shape `[height, width, channels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub sample_id: String,
    pub subject_id: u32,
    pub hand_side: HandSide,
    pub modality: Modality,
    pub authenticity: Authenticity,
    pub session: u32,
    /// Identity class; `None` for fakes, which share the reserved fake label.
    pub class_id: Option<usize>,
    pub pair_id: String,
    pub image: Tensor,
}

impl Sample {
    pub fn is_fake(&self) -> bool {
        self.authenticity == Authenticity::Fake
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    num_classes: usize,
    class_index: BTreeMap<(u32, HandSide), usize>,
}

impl Dataset {
    /// Validates sample-level invariants and builds the class mapping.
    pub fn new(samples: Vec<Sample>) -> Result<Dataset> {
        let mut ids = HashSet::with_capacity(samples.len());
        for s in &samples {
            if !ids.insert(s.sample_id.as_str()) {
                return Err(Error::DuplicateSample(s.sample_id.clone()));
            }
        }

        let mut pairs: HashMap<&str, &Sample> = HashMap::new();
        let mut pair_modalities: HashSet<(&str, Modality)> = HashSet::new();
        for s in &samples {
            if !pair_modalities.insert((s.pair_id.as_str(), s.modality)) {
                return Err(Error::PairConflict {
                    pair_id: s.pair_id.clone(),
                    field: "modality",
                });
            }
            let Some(other) = pairs.insert(s.pair_id.as_str(), s) else {
                continue;
            };
            let conflict = if other.subject_id != s.subject_id {
                Some("subject_id")
            } else if other.hand_side != s.hand_side {
                Some("hand_side")
            } else if other.authenticity != s.authenticity {
                Some("authenticity")
            } else if other.session != s.session {
                Some("session")
            } else if other.class_id != s.class_id {
                Some("class_id")
            } else {
                None
            };
            if let Some(field) = conflict {
                return Err(Error::PairConflict {
                    pair_id: s.pair_id.clone(),
                    field,
                });
            }
        }

        let mut class_index = BTreeMap::new();
        for s in &samples {
            let want = s.modality.channels();
            let shape = s.image.shape();
            if shape.len() != 3 || shape[2] != want {
                return Err(Error::Parameter(format!(
                    "sample `{}`: {} image must be [h, w, {want}], got {shape:?}",
                    s.sample_id, s.modality
                )));
            }
            match (s.authenticity, s.class_id) {
                (Authenticity::Fake, Some(_)) => {
                    return Err(Error::Parameter(format!(
                        "fake sample `{}` must not carry a class_id",
                        s.sample_id
                    )))
                }
                (Authenticity::Real, None) => {
                    return Err(Error::Parameter(format!(
                        "real sample `{}` is missing its class_id",
                        s.sample_id
                    )))
                }
                (Authenticity::Real, Some(c)) => {
                    let key = (s.subject_id, s.hand_side);
                    if *class_index.entry(key).or_insert(c) != c {
                        return Err(Error::Parameter(format!(
                            "subject {} {} hand maps to more than one class",
                            s.subject_id, s.hand_side
                        )));
                    }
                }
                (Authenticity::Fake, None) => {}
            }
        }
        let distinct: BTreeSet<usize> = class_index.values().copied().collect();
        if distinct.len() != class_index.len() {
            return Err(Error::Parameter("two (subject, hand) classes share a class_id".into()));
        }
        let num_classes = class_index.len();
        if let Some(&c) = distinct.iter().find(|&&c| c >= num_classes) {
            return Err(Error::Parameter(format!(
                "class ids must be contiguous in [0, {num_classes}), found {c}"
            )));
        }
        Ok(Dataset {
            samples,
            num_classes,
            class_index,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of real identity classes `N`. The fake class is label `N`.
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn fake_class(&self) -> usize {
        self.num_classes
    }

    pub fn class_index(&self) -> &BTreeMap<(u32, HandSide), usize> {
        &self.class_index
    }

    pub fn subjects(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.samples.iter().map(|s| s.subject_id).collect();
        set.into_iter().collect()
    }

    pub fn get(&self, sample_id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.sample_id == sample_id)
    }

    pub fn has_fakes(&self) -> bool {
        self.samples.iter().any(Sample::is_fake)
    }

    pub fn has_modality(&self, m: Modality) -> bool {
        self.samples.iter().any(|s| s.modality == m)
    }

    pub fn count(&self, modality: Modality, authenticity: Authenticity) -> usize {
        self.samples
            .iter()
            .filter(|s| s.modality == modality && s.authenticity == authenticity)
            .count()
    }
}
