//! CSV manifest plus PNG images (8-bit RGB, 16-bit grayscale thermal).

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};

use super::{Authenticity, Dataset, HandSide, Modality, Sample};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub sample_id: String,
    pub subject_id: u32,
    pub hand_side: HandSide,
    pub modality: Modality,
    pub authenticity: Authenticity,
    pub session: u32,
    pub class_id: Option<usize>,
    pub pair_id: String,
    pub path: String,
}

fn ingest(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn read_image(path: &Path, modality: Modality) -> Result<Tensor> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let channels = img.color().channel_count() as usize;
    if channels != modality.channels() {
        return Err(ingest(
            path,
            format!(
                "{modality} image must have {} channel(s), found {channels}",
                modality.channels()
            ),
        ));
    }
    let data: Vec<f64> = match (modality, img) {
        (Modality::Rgb, DynamicImage::ImageRgb8(buf)) => buf.into_raw().into_iter().map(f64::from).collect(),
        (Modality::Th, DynamicImage::ImageLuma16(buf)) => buf.into_raw().into_iter().map(f64::from).collect(),
        // 8-bit thermal exports are widened to the 16-bit scale
        (Modality::Th, DynamicImage::ImageLuma8(buf)) => {
            buf.into_raw().into_iter().map(|v| f64::from(v) * 257.0).collect()
        }
        (m, other) => {
            return Err(ingest(
                path,
                format!("unsupported pixel format {:?} for {m}", other.color()),
            ))
        }
    };
    Tensor::new(vec![h, w, modality.channels()], data)
}

fn write_image(path: &Path, s: &Sample) -> Result<()> {
    let shape = s.image.shape();
    let (h, w) = (shape[0] as u32, shape[1] as u32);
    let result = match s.modality {
        Modality::Rgb => {
            let raw = s
                .image
                .data()
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect();
            ImageBuffer::<Rgb<u8>, Vec<u8>>::from_raw(w, h, raw)
                .expect("image dimensions")
                .save(path)
        }
        Modality::Th => {
            let raw = s
                .image
                .data()
                .iter()
                .map(|v| v.round().clamp(0.0, 65535.0) as u16)
                .collect();
            ImageBuffer::<Luma<u16>, Vec<u16>>::from_raw(w, h, raw)
                .expect("image dimensions")
                .save(path)
        }
    };
    result.map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes `images/<sample_id>.png` and `manifest.csv` under `dir`.
pub fn write_dataset(d: &Dataset, dir: &Path) -> Result<PathBuf> {
    let images = dir.join("images");
    fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let manifest = dir.join(MANIFEST_FILE);
    let mut wtr = csv::Writer::from_path(&manifest)?;
    for s in d.samples() {
        let rel = format!("images/{}.png", s.sample_id);
        write_image(&dir.join(&rel), s)?;
        wtr.serialize(ManifestRow {
            sample_id: s.sample_id.clone(),
            subject_id: s.subject_id,
            hand_side: s.hand_side,
            modality: s.modality,
            authenticity: s.authenticity,
            session: s.session,
            class_id: s.class_id,
            pair_id: s.pair_id.clone(),
            path: rel,
        })?;
    }
    wtr.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(manifest)
}

/// Reads a manifest and its images. Relative image paths resolve against the
/// manifest's directory. `path` may also name the directory itself.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let path = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    if !path.exists() {
        return Err(ingest(&path, "manifest file not found"));
    }
    let root = path.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::Reader::from_path(&path)?;
    let mut rows = Vec::new();
    for (line, row) in rdr.deserialize::<ManifestRow>().enumerate() {
        rows.push(row.map_err(|e| ingest(&path, format!("row {}: {e}", line + 1)))?);
    }
    let mut seen = HashSet::new();
    for r in &rows {
        if !seen.insert(r.sample_id.as_str()) {
            return Err(Error::DuplicateSample(r.sample_id.clone()));
        }
    }
    let mut samples = Vec::with_capacity(rows.len());
    for r in rows {
        let img_path = root.join(&r.path);
        if !img_path.exists() {
            return Err(ingest(
                &path,
                format!("image `{}` for sample `{}` is missing", r.path, r.sample_id),
            ));
        }
        let image = read_image(&img_path, r.modality)?;
        samples.push(Sample {
            sample_id: r.sample_id,
            subject_id: r.subject_id,
            hand_side: r.hand_side,
            modality: r.modality,
            authenticity: r.authenticity,
            session: r.session,
            class_id: r.class_id,
            pair_id: r.pair_id,
            image,
        });
    }
    Dataset::new(samples)
}
