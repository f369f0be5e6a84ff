use serde::{Deserialize, Serialize};

use super::scores::ScoreRecord;

/// Argmax-decision PAD metrics. A rate is `None` when its denominator is
/// zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: Option<f64>,
    /// Attacks accepted as bona fide over all attacks.
    pub apcer: Option<f64>,
    /// Bona fide presentations rejected as attacks over all bona fide.
    pub bpcer: Option<f64>,
    /// Closed-set identification rate; filled for identity-mode runs.
    pub rank1: Option<f64>,
    pub n_attack: usize,
    pub n_bonafide: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// APCER/BPCER from the binary collapse of each record: the last class is
/// the attack class, every other label is bona fide.
pub fn pad_metrics(records: &[ScoreRecord]) -> MetricsReport {
    let mut n_attack = 0;
    let mut n_bonafide = 0;
    let mut accepted_attacks = 0;
    let mut rejected_bonafide = 0;
    for r in records {
        if r.is_attack() {
            n_attack += 1;
            if !r.predicted_attack() {
                accepted_attacks += 1;
            }
        } else {
            n_bonafide += 1;
            if r.predicted_attack() {
                rejected_bonafide += 1;
            }
        }
    }
    let errors = accepted_attacks + rejected_bonafide;
    MetricsReport {
        accuracy: ratio(records.len() - errors, records.len()),
        apcer: ratio(accepted_attacks, n_attack),
        bpcer: ratio(rejected_bonafide, n_bonafide),
        rank1: None,
        n_attack,
        n_bonafide,
    }
}

/// Fraction of records whose predicted label equals the true label, the
/// fake class counting as a class of its own.
pub fn rank1(records: &[ScoreRecord]) -> Option<f64> {
    let hits = records.iter().filter(|r| r.predicted_label == r.true_label).count();
    ratio(hits, records.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ScoreModality;

    fn rec(label: usize, scores: &[f64]) -> ScoreRecord {
        ScoreRecord::new("s", "p", ScoreModality::Rgb, label, scores.to_vec())
    }

    #[test]
    fn perfect_decisions() {
        let m = pad_metrics(&[rec(0, &[0.9, 0.1]), rec(1, &[0.2, 0.8])]);
        assert_eq!(m.apcer, Some(0.0));
        assert_eq!(m.bpcer, Some(0.0));
        assert_eq!(m.accuracy, Some(1.0));
    }

    #[test]
    fn one_of_four_attacks_accepted() {
        let mut r = vec![rec(1, &[0.3, 0.7]); 3];
        r.push(rec(1, &[0.6, 0.4]));
        let m = pad_metrics(&r);
        assert_eq!(m.apcer, Some(0.25));
        assert_eq!(m.bpcer, None);
        assert_eq!(m.n_attack, 4);
    }

    #[test]
    fn empty_input_is_undefined() {
        let m = pad_metrics(&[]);
        assert_eq!((m.accuracy, m.apcer, m.bpcer), (None, None, None));
        assert_eq!(rank1(&[]), None);
    }

    #[test]
    fn identity_records_collapse_to_binary() {
        // 3 identities + fake: a wrong identity is still a correct PAD decision
        let r = [rec(0, &[0.1, 0.6, 0.2, 0.1]), rec(3, &[0.1, 0.1, 0.1, 0.7])];
        let m = pad_metrics(&r);
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(rank1(&r), Some(0.5));
    }

    #[test]
    fn rank1_counts_hits() {
        let r = [
            rec(0, &[0.9, 0.05, 0.05]),
            rec(1, &[0.1, 0.8, 0.1]),
            rec(2, &[0.1, 0.1, 0.8]),
            rec(2, &[0.8, 0.1, 0.1]),
        ];
        assert_eq!(rank1(&r), Some(0.75));
    }
}
