use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::splits::{balance_real_pairs, closed_set_plans, make_open_set_splits, Ratios, SplitMode, SplitPlan};
use super::train::{train_prepared, LabelMap, Prepared, TrainingHistory};
use crate::data::{Dataset, Modality};
use crate::error::{Error, Result};
use crate::eval::{fuse_scores, score_dataset, ScoreRecord};
use crate::models::{build_model, Family, ModelConfig};
use crate::nn::{weights, Hyperparams, InputShape, Network};
use crate::seeding;

/// Operational mode of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Binary real/fake decisions on subject-disjoint splits.
    Authenticity,
    /// N identities plus a fake class on closed-set splits.
    Identity,
}

impl Mode {
    pub fn split_mode(self) -> SplitMode {
        match self {
            Mode::Authenticity => SplitMode::OpenSet,
            Mode::Identity => SplitMode::ClosedSet,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Authenticity => "authenticity",
            Mode::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSettings {
    pub mode: Mode,
    pub family: Family,
    pub channel_scale: f64,
    /// Network input `(height, width)`; channels follow the modality.
    pub input_size: (usize, usize),
    pub n_splits: usize,
    pub ratios: Ratios,
    pub seed: u64,
    /// Authenticity mode only: keep as many real pairs per hand as there
    /// are fake pairs.
    pub balance: bool,
    pub hp: Hyperparams,
    /// Optional pretrained weights per modality; the classifier head is
    /// always freshly initialized.
    pub pretrained: BTreeMap<Modality, Vec<weights::WeightRecord>>,
}

impl ExperimentSettings {
    pub fn new(mode: Mode, family: Family) -> Self {
        ExperimentSettings {
            mode,
            family,
            channel_scale: ModelConfig::DEFAULT_CHANNEL_SCALE,
            input_size: (64, 64),
            n_splits: 10,
            ratios: Ratios::default(),
            seed: 0,
            balance: false,
            hp: Hyperparams::default(),
            pretrained: BTreeMap::new(),
        }
    }

    pub fn model_config(&self, modality: Modality, num_outputs: usize) -> ModelConfig {
        ModelConfig::new(
            self.family,
            InputShape::new(self.input_size.0, self.input_size.1, modality.channels()),
            num_outputs,
        )
        .with_channel_scale(self.channel_scale)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub net: Network,
    pub history: TrainingHistory,
}

#[derive(Debug, Clone)]
pub struct SplitRun {
    pub plan: SplitPlan,
    pub rgb: TrainedModel,
    pub th: TrainedModel,
}

impl SplitRun {
    pub fn model(&self, modality: Modality) -> &TrainedModel {
        match modality {
            Modality::Rgb => &self.rgb,
            Modality::Th => &self.th,
        }
    }
}

/// Test-set score records of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScores {
    pub rgb: Vec<ScoreRecord>,
    pub th: Vec<ScoreRecord>,
    pub fused: Vec<ScoreRecord>,
}

/// Both modalities' preprocessed data for one experiment.
pub struct ExperimentData<'a> {
    pub labels: LabelMap,
    pub rgb: Prepared<'a>,
    pub th: Prepared<'a>,
}

impl<'a> ExperimentData<'a> {
    pub fn new(d: &'a Dataset, settings: &ExperimentSettings) -> Self {
        let labels = LabelMap::new(settings.mode.split_mode(), d);
        ExperimentData {
            labels,
            rgb: Prepared::new(d, Modality::Rgb, labels, settings.input_size),
            th: Prepared::new(d, Modality::Th, labels, settings.input_size),
        }
    }

    pub fn modality(&self, m: Modality) -> &Prepared<'a> {
        match m {
            Modality::Rgb => &self.rgb,
            Modality::Th => &self.th,
        }
    }
}

pub fn make_plans(d: &Dataset, settings: &ExperimentSettings) -> Result<Vec<SplitPlan>> {
    match settings.mode {
        Mode::Authenticity => {
            let plans = make_open_set_splits(d, settings.n_splits, settings.ratios, settings.seed)?;
            if !settings.balance {
                return Ok(plans);
            }
            Ok(plans.iter().map(|p| balance_real_pairs(p, d)).collect())
        }
        Mode::Identity => closed_set_plans(d, settings.n_splits, settings.ratios, settings.seed),
    }
}

/// Both modes need both modalities and at least one fake.
pub fn check_dataset(d: &Dataset) -> Result<()> {
    for m in Modality::ALL {
        if !d.has_modality(m) {
            return Err(Error::Protocol(format!("dataset has no {m} samples")));
        }
    }
    if !d.has_fakes() {
        return Err(Error::Protocol(
            "dataset has no fake samples; both modes need attack presentations".into(),
        ));
    }
    Ok(())
}

pub fn train_modality(
    plan: &SplitPlan,
    data: &ExperimentData,
    modality: Modality,
    settings: &ExperimentSettings,
) -> Result<TrainedModel> {
    let split = plan.split_id as u64;
    let tag = modality as u64;
    let cfg = settings.model_config(modality, data.labels.num_outputs());
    let mut net = build_model(&cfg, seeding::derive(settings.seed, &[40, split, tag]))?;
    if let Some(records) = settings.pretrained.get(&modality) {
        let head = net.head_index().expect("built models end in a head");
        weights::apply(&mut net, records, &[head])?;
    }
    let hp = Hyperparams {
        rng_seed: seeding::derive(settings.seed, &[41, split, tag]),
        ..settings.hp.clone()
    };
    let (net, history) = train_prepared(net, plan, data.modality(modality), &hp)?;
    Ok(TrainedModel { net, history })
}

/// Trains one RGB and one TH model per split. Splits run in parallel; each
/// owns its networks and random streams, so results do not depend on
/// scheduling.
pub fn run_experiment(d: &Dataset, settings: &ExperimentSettings) -> Result<Vec<SplitRun>> {
    check_dataset(d)?;
    let plans = make_plans(d, settings)?;
    let data = ExperimentData::new(d, settings);
    run_plans(plans, &data, settings)
}

pub fn run_plans(plans: Vec<SplitPlan>, data: &ExperimentData, settings: &ExperimentSettings) -> Result<Vec<SplitRun>> {
    plans
        .into_par_iter()
        .map(|plan| {
            let rgb = train_modality(&plan, data, Modality::Rgb, settings)?;
            let th = train_modality(&plan, data, Modality::Th, settings)?;
            Ok(SplitRun { plan, rgb, th })
        })
        .collect()
}

/// Scores the test subset with both models and fuses the pairs.
pub fn score_split(run: &SplitRun, data: &ExperimentData) -> Result<SplitScores> {
    let fake = data.labels.fake_index();
    let rgb = score_dataset(&run.rgb.net, &data.rgb.probes(&run.plan.test), fake)?;
    let th = score_dataset(&run.th.net, &data.th.probes(&run.plan.test), fake)?;
    let fused = fuse_scores(&rgb, &th)?;
    Ok(SplitScores { rgb, th, fused })
}
