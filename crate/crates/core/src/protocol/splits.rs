use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{Authenticity, Dataset, HandSide, Modality, Sample};
use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Subject-disjoint subsets, binary real/fake labels.
    OpenSet,
    /// Every class in every subset, labels are identities plus one fake class.
    ClosedSet,
}

impl SplitMode {
    pub fn name(self) -> &'static str {
        match self {
            SplitMode::OpenSet => "open_set",
            SplitMode::ClosedSet => "closed_set",
        }
    }
}

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ratios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl Ratios {
    fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Protocol(format!(
                "split ratios must be positive and sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }

    /// `(train, val, test)` counts for `n` items: validation and test get
    /// the floor of their share, the remainder goes to training.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        let val = (self.val * n as f64 + 1e-9).floor() as usize;
        let test = (self.test * n as f64 + 1e-9).floor() as usize;
        (n - val - test, val, test)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub split_id: usize,
    pub mode: SplitMode,
    pub seed: u64,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SplitPlan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SplitPlan> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn subsets(&self) -> [(&'static str, &[String]); 3] {
        [("train", &self.train), ("val", &self.val), ("test", &self.test)]
    }
}

/// Subject-disjoint plans. Each plan reshuffles all subjects independently,
/// so a subject may land in the test set of several plans but never in two
/// subsets of one plan. All of a subject's samples, real and fake, follow
/// the subject.
pub fn make_open_set_splits(d: &Dataset, n_splits: usize, ratios: Ratios, seed: u64) -> Result<Vec<SplitPlan>> {
    ratios.validate()?;
    let subjects = d.subjects();
    if subjects.len() < 5 {
        return Err(Error::Protocol(format!(
            "open-set splits need at least 5 subjects, dataset has {}",
            subjects.len()
        )));
    }
    let (n_train, n_val, n_test) = ratios.counts(subjects.len());
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Protocol(format!(
            "{} subjects give an empty subset under {ratios:?}",
            subjects.len()
        )));
    }
    (0..n_splits)
        .map(|split_id| {
            let mut order = subjects.clone();
            order.shuffle(&mut seeding::rng(seed, &[10, split_id as u64]));
            let mut subset_of = HashMap::new();
            for (i, s) in order.iter().enumerate() {
                let subset = if i < n_train {
                    0
                } else if i < n_train + n_val {
                    1
                } else {
                    2
                };
                subset_of.insert(*s, subset);
            }
            let mut buckets: [Vec<String>; 3] = Default::default();
            for s in d.samples() {
                buckets[subset_of[&s.subject_id]].push(s.sample_id.clone());
            }
            let [train, val, test] = buckets;
            Ok(SplitPlan {
                split_id,
                mode: SplitMode::OpenSet,
                seed,
                train,
                val,
                test,
            })
        })
        .collect()
}

/// Drops real pairs so every subject hand keeps as many real pairs as it has
/// fake pairs, giving equal real and fake counts. Which real pairs survive
/// is drawn per split. Hands without fakes keep no real pairs.
pub fn balance_real_pairs(plan: &SplitPlan, d: &Dataset) -> SplitPlan {
    let mut fakes: HashMap<(u32, HandSide), usize> = HashMap::new();
    let mut reals: BTreeMap<(u32, HandSide), Vec<&str>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for s in d.samples() {
        let key = (s.subject_id, s.hand_side);
        if !seen.insert(s.pair_id.as_str()) {
            continue;
        }
        match s.authenticity {
            Authenticity::Fake => *fakes.entry(key).or_default() += 1,
            Authenticity::Real => reals.entry(key).or_default().push(&s.pair_id),
        }
    }
    let mut rng = seeding::rng(plan.seed, &[12, plan.split_id as u64]);
    let mut keep: HashMap<&str, bool> = HashMap::new();
    for (key, pairs) in &mut reals {
        pairs.shuffle(&mut rng);
        let k = fakes.get(key).copied().unwrap_or(0);
        for (i, p) in pairs.iter().enumerate() {
            keep.insert(p, i < k);
        }
    }
    let filter = |ids: &[String]| -> Vec<String> {
        ids.iter()
            .filter(|id| {
                let s = d.get(id).expect("plan ids come from the dataset");
                s.authenticity == Authenticity::Fake || keep[s.pair_id.as_str()]
            })
            .cloned()
            .collect()
    };
    SplitPlan {
        train: filter(&plan.train),
        val: filter(&plan.val),
        test: filter(&plan.test),
        ..plan.clone()
    }
}

fn class_name(d: &Dataset, class: usize) -> String {
    if class == d.fake_class() {
        return "fake class".to_string();
    }
    d.class_index()
        .iter()
        .find(|(_, &c)| c == class)
        .map(|((subject, side), _)| format!("class {class} (subject {subject}, {side} hand)"))
        .unwrap_or_else(|| format!("class {class}"))
}

/// One closed-set plan: the RGB+TH pairs of every class (the fakes forming
/// one extra class) are shuffled and split by count.
pub fn make_closed_set_splits(d: &Dataset, ratios: Ratios, seed: u64) -> Result<SplitPlan> {
    closed_set_plan(d, ratios, seed, 0)
}

/// `n_splits` closed-set plans with independent per-split shuffles.
pub fn closed_set_plans(d: &Dataset, n_splits: usize, ratios: Ratios, seed: u64) -> Result<Vec<SplitPlan>> {
    (0..n_splits)
        .map(|i| closed_set_plan(d, ratios, seeding::derive(seed, &[20, i as u64]), i))
        .collect()
}

fn closed_set_plan(d: &Dataset, ratios: Ratios, seed: u64, split_id: usize) -> Result<SplitPlan> {
    ratios.validate()?;
    let class_of = |s: &Sample| s.class_id.unwrap_or(d.fake_class());

    let mut per_class: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    let mut counts: BTreeMap<(usize, Modality), usize> = BTreeMap::new();
    for s in d.samples() {
        let c = class_of(s);
        *counts.entry((c, s.modality)).or_default() += 1;
        let pairs = per_class.entry(c).or_default();
        if !pairs.contains(&s.pair_id.as_str()) {
            pairs.push(&s.pair_id);
        }
    }
    for (&(class, modality), &n) in &counts {
        if n < 3 {
            return Err(Error::Protocol(format!(
                "{} has only {n} {modality} sample(s); closed-set splits need at least 3",
                class_name(d, class)
            )));
        }
    }
    for class in 0..=d.fake_class() {
        if class < d.fake_class() || d.has_fakes() {
            if !per_class.contains_key(&class) {
                return Err(Error::Protocol(format!("{} has no samples", class_name(d, class))));
            }
        }
    }

    let mut rng = seeding::rng(seed, &[21]);
    let mut subset_of: HashMap<&str, usize> = HashMap::new();
    for pairs in per_class.values_mut() {
        pairs.shuffle(&mut rng);
        let (n_train, n_val, _) = ratios.counts(pairs.len());
        for (i, p) in pairs.iter().enumerate() {
            let subset = if i < n_train {
                0
            } else if i < n_train + n_val {
                1
            } else {
                2
            };
            subset_of.insert(p, subset);
        }
    }
    let mut buckets: [Vec<String>; 3] = Default::default();
    for s in d.samples() {
        buckets[subset_of[s.pair_id.as_str()]].push(s.sample_id.clone());
    }
    let [train, val, test] = buckets;
    Ok(SplitPlan {
        split_id,
        mode: SplitMode::ClosedSet,
        seed,
        train,
        val,
        test,
    })
}
