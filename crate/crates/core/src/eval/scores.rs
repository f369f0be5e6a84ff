use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Modality;
use crate::error::{Error, Result};
use crate::models::argmax;
use crate::nn::Network;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScoreModality {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "TH")]
    Th,
    #[serde(rename = "FUSED")]
    Fused,
}

impl ScoreModality {
    pub const ALL: [ScoreModality; 3] = [ScoreModality::Rgb, ScoreModality::Th, ScoreModality::Fused];

    pub fn name(self) -> &'static str {
        match self {
            ScoreModality::Rgb => "RGB",
            ScoreModality::Th => "TH",
            ScoreModality::Fused => "FUSED",
        }
    }
}

impl fmt::Display for ScoreModality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Modality> for ScoreModality {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Rgb => ScoreModality::Rgb,
            Modality::Th => ScoreModality::Th,
        }
    }
}

impl std::str::FromStr for ScoreModality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RGB" => Ok(ScoreModality::Rgb),
            "TH" => Ok(ScoreModality::Th),
            "FUSED" => Ok(ScoreModality::Fused),
            other => Err(Error::Parameter(format!("unknown score modality `{other}`"))),
        }
    }
}

/// One preprocessed test image with its expected label.
#[derive(Debug, Clone)]
pub struct Probe {
    pub sample_id: String,
    pub pair_id: String,
    pub modality: Modality,
    pub true_label: usize,
    pub image: Tensor,
}

/// Softmax scores of one sample. The fake class is always the last index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub pair_id: String,
    pub modality: ScoreModality,
    pub true_label: usize,
    pub predicted_label: usize,
    pub scores: Vec<f64>,
}

impl ScoreRecord {
    pub fn new(
        sample_id: impl Into<String>,
        pair_id: impl Into<String>,
        modality: ScoreModality,
        true_label: usize,
        scores: Vec<f64>,
    ) -> Self {
        ScoreRecord {
            sample_id: sample_id.into(),
            pair_id: pair_id.into(),
            modality,
            true_label,
            predicted_label: argmax(&scores),
            scores,
        }
    }

    pub fn fake_index(&self) -> usize {
        self.scores.len() - 1
    }

    pub fn is_attack(&self) -> bool {
        self.true_label == self.fake_index()
    }

    pub fn predicted_attack(&self) -> bool {
        self.predicted_label == self.fake_index()
    }
}

const SCORE_BATCH: usize = 64;

/// Scores every probe with `net`. Probe labels must lie in
/// `[0, fake_class_index]` and the network must have `fake_class_index + 1`
/// outputs.
pub fn score_dataset(net: &Network, probes: &[Probe], fake_class_index: usize) -> Result<Vec<ScoreRecord>> {
    let k = net.num_outputs();
    if k != fake_class_index + 1 {
        return Err(Error::Parameter(format!(
            "network has {k} outputs but the fake class index is {fake_class_index}"
        )));
    }
    if let Some(p) = probes.iter().find(|p| p.true_label > fake_class_index) {
        return Err(Error::Label {
            label: p.true_label,
            num_outputs: k,
        });
    }
    let mut out = Vec::with_capacity(probes.len());
    for chunk in probes.chunks(SCORE_BATCH) {
        let images: Vec<&Tensor> = chunk.iter().map(|p| &p.image).collect();
        let probs = net.forward(&Tensor::stack(&images)?)?;
        for (i, p) in chunk.iter().enumerate() {
            out.push(ScoreRecord::new(
                p.sample_id.clone(),
                p.pair_id.clone(),
                p.modality.into(),
                p.true_label,
                probs.row(i).to_vec(),
            ));
        }
    }
    Ok(out)
}

/// Elementwise mean of paired RGB and TH score vectors, matched by
/// `pair_id`. Output is ordered by `pair_id`.
pub fn fuse_scores(rgb: &[ScoreRecord], th: &[ScoreRecord]) -> Result<Vec<ScoreRecord>> {
    let index = |records: &[ScoreRecord], want: ScoreModality| -> Result<BTreeMap<String, usize>> {
        let mut map = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.modality != want {
                return Err(Error::Fusion(format!(
                    "record `{}` is {} but was passed as {want}",
                    r.sample_id, r.modality
                )));
            }
            if map.insert(r.pair_id.clone(), i).is_some() {
                return Err(Error::Fusion(format!("pair `{}` appears twice in {want}", r.pair_id)));
            }
        }
        Ok(map)
    };
    let rgb_by_pair = index(rgb, ScoreModality::Rgb)?;
    let th_by_pair: HashMap<String, usize> = index(th, ScoreModality::Th)?.into_iter().collect();
    if let Some(extra) = th_by_pair.keys().find(|p| !rgb_by_pair.contains_key(*p)) {
        return Err(Error::Fusion(format!("TH pair `{extra}` has no RGB record")));
    }
    rgb_by_pair
        .iter()
        .map(|(pair, &i)| {
            let a = &rgb[i];
            let b = th_by_pair
                .get(pair)
                .map(|&j| &th[j])
                .ok_or_else(|| Error::Fusion(format!("RGB pair `{pair}` has no TH record")))?;
            if a.true_label != b.true_label {
                return Err(Error::Fusion(format!(
                    "pair `{pair}` labels disagree: RGB {} vs TH {}",
                    a.true_label, b.true_label
                )));
            }
            if a.scores.len() != b.scores.len() {
                return Err(Error::Fusion(format!(
                    "pair `{pair}` score lengths differ: {} vs {}",
                    a.scores.len(),
                    b.scores.len()
                )));
            }
            let scores = a.scores.iter().zip(&b.scores).map(|(x, y)| (x + y) / 2.0).collect();
            Ok(ScoreRecord::new(
                pair.clone(),
                pair.clone(),
                ScoreModality::Fused,
                a.true_label,
                scores,
            ))
        })
        .collect()
}

pub fn write_scores_csv(records: &[ScoreRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let k = records.first().map_or(0, |r| r.scores.len());
    let mut header: Vec<String> = ["sample_id", "pair_id", "modality", "true_label", "predicted_label"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..k).map(|i| format!("score_{i}")));
    w.write_record(&header)?;
    for r in records {
        if r.scores.len() != k {
            return Err(Error::Parameter("score vectors of differing length".into()));
        }
        let mut row = vec![
            r.sample_id.clone(),
            r.pair_id.clone(),
            r.modality.to_string(),
            r.true_label.to_string(),
            r.predicted_label.to_string(),
        ];
        row.extend(r.scores.iter().map(|s| s.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores_csv(path: &Path) -> Result<Vec<ScoreRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let bad = |line: usize, what: &str| Error::Parameter(format!("{}: row {line}: bad {what}", path.display()));
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        if row.len() < 7 {
            return Err(bad(line + 1, "column count"));
        }
        let scores = row
            .iter()
            .skip(5)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(line + 1, "score"))?;
        out.push(ScoreRecord {
            sample_id: row[0].to_string(),
            pair_id: row[1].to_string(),
            modality: row[2].parse()?,
            true_label: row[3].parse().map_err(|_| bad(line + 1, "true_label"))?,
            predicted_label: row[4].parse().map_err(|_| bad(line + 1, "predicted_label"))?,
            scores,
        });
    }
    Ok(out)
}
