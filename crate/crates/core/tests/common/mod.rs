//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls the library's metric code.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use thermopad::eval::{ScoreModality, ScoreRecord};

/// Random probability vector; a quarter of the vectors carry an exact tie
/// for the top score.
pub fn random_scores<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    if k > 1 && rng.gen_bool(0.25) {
        let top = raw.iter().copied().fold(0.0, f64::max);
        let j = rng.gen_range(0..k);
        raw[j] = top;
    }
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| v / sum).collect()
}

pub fn random_records<R: Rng>(rng: &mut R, n: usize, k: usize, m: ScoreModality) -> Vec<ScoreRecord> {
    (0..n)
        .map(|i| {
            let pair = format!("p{i:04}");
            ScoreRecord::new(
                format!("{pair}_{m}"),
                pair,
                m,
                rng.gen_range(0..k),
                random_scores(rng, k),
            )
        })
        .collect()
}

/// Paired RGB/TH record sets sharing pair ids and labels, each shuffled.
pub fn random_pairs<R: Rng>(rng: &mut R, n: usize, k: usize) -> (Vec<ScoreRecord>, Vec<ScoreRecord>) {
    let mut rgb = random_records(rng, n, k, ScoreModality::Rgb);
    let mut th: Vec<ScoreRecord> = rgb
        .iter()
        .map(|r| {
            ScoreRecord::new(
                format!("{}_TH", r.pair_id),
                r.pair_id.clone(),
                ScoreModality::Th,
                r.true_label,
                random_scores(rng, k),
            )
        })
        .collect();
    rgb.shuffle(rng);
    th.shuffle(rng);
    (rgb, th)
}

/// First index holding the maximum, by a plain scan.
pub fn oracle_argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, PartialEq)]
pub struct Tally {
    pub n_attack: usize,
    pub n_bonafide: usize,
    pub accepted_attacks: usize,
    pub rejected_bonafide: usize,
    pub hits: usize,
}

/// Per-record tally from the raw score vectors.
pub fn tally(records: &[ScoreRecord]) -> Tally {
    let mut t = Tally {
        n_attack: 0,
        n_bonafide: 0,
        accepted_attacks: 0,
        rejected_bonafide: 0,
        hits: 0,
    };
    for r in records {
        let fake = r.scores.len() - 1;
        let pred = oracle_argmax(&r.scores);
        if pred == r.true_label {
            t.hits += 1;
        }
        match (r.true_label == fake, pred == fake) {
            (true, true) => t.n_attack += 1,
            (true, false) => {
                t.n_attack += 1;
                t.accepted_attacks += 1;
            }
            (false, true) => {
                t.n_bonafide += 1;
                t.rejected_bonafide += 1;
            }
            (false, false) => t.n_bonafide += 1,
        }
    }
    t
}

/// Quartile at the 1-based position `p (n - 1) + 1`, found by selecting
/// the two neighbouring order statistics without sorting the whole list.
pub fn oracle_quantile(values: &[f64], p: f64) -> f64 {
    let n = values.len();
    let pos = p * (n - 1) as f64 + 1.0;
    let lo_rank = pos.floor() as usize;
    let hi_rank = pos.ceil() as usize;
    let kth = |rank: usize| -> f64 {
        // the value with exactly rank-1 values strictly below it, counting ties
        *values
            .iter()
            .find(|&&v| {
                let below = values.iter().filter(|&&w| w < v).count();
                let equal = values.iter().filter(|&&w| w == v).count();
                below < rank && rank <= below + equal
            })
            .unwrap()
    };
    let (a, b) = (kth(lo_rank), kth(hi_rank));
    a + (pos - lo_rank as f64) * (b - a)
}

pub struct OracleBox {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

pub fn oracle_boxplot(values: &[f64]) -> OracleBox {
    let q1 = oracle_quantile(values, 0.25);
    let q3 = oracle_quantile(values, 0.75);
    let iqr = q3 - q1;
    let inside: Vec<f64> = values
        .iter()
        .copied()
        .filter(|&v| v >= q1 - 1.5 * iqr && v <= q3 + 1.5 * iqr)
        .collect();
    OracleBox {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        median: oracle_quantile(values, 0.5),
        q1,
        q3,
        whisker_low: inside.iter().copied().fold(f64::INFINITY, f64::min),
        whisker_high: inside.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Fused scores by linear search for each RGB record's partner.
pub fn oracle_fuse(rgb: &[ScoreRecord], th: &[ScoreRecord]) -> Vec<(String, usize, Vec<f64>)> {
    let mut out: Vec<(String, usize, Vec<f64>)> = rgb
        .iter()
        .map(|a| {
            let b = th.iter().find(|b| b.pair_id == a.pair_id).expect("partner");
            let mean = a.scores.iter().zip(&b.scores).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
            (a.pair_id.clone(), a.true_label, mean)
        })
        .collect();
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}
