use serde::{Deserialize, Serialize};

use super::scores::ScoreRecord;
use crate::error::{Error, Result};
use crate::protocol::SplitMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

/// Quantile `p` by linear interpolation between order statistics at the
/// 1-based position `p * (n - 1) + 1`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Boxplot statistics. Whiskers are the most extreme observations that lie
/// within `[q1 - 1.5 iqr, q3 + 1.5 iqr]`.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::Stats("boxplot needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Stats("boxplot values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let whisker_low = *sorted.iter().find(|&&v| v >= lo_fence).expect("q1 lies inside");
    let whisker_high = *sorted.iter().rev().find(|&&v| v <= hi_fence).expect("q3 lies inside");
    Ok(BoxplotStats {
        n: sorted.len(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        median: quantile(&sorted, 0.5),
        q1,
        q3,
        iqr,
        whisker_low,
        whisker_high,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub genuine_count: usize,
    pub fake_count: usize,
}

/// The score each record contributes to a histogram: the real-class score
/// in open-set mode, the top score in closed-set mode.
pub fn histogram_value(r: &ScoreRecord, mode: SplitMode) -> f64 {
    match mode {
        SplitMode::OpenSet => r.scores[0],
        SplitMode::ClosedSet => r.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Uniform bins over [0, 1]; every bin is half-open except the last, which
/// also holds 1.0. Counts are split by the records' true authenticity.
pub fn score_histogram(records: &[ScoreRecord], bins: usize, mode: SplitMode) -> Result<Vec<HistogramBin>> {
    if bins < 2 {
        return Err(Error::Stats(format!("histogram needs at least 2 bins, got {bins}")));
    }
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            bin_low: i as f64 / bins as f64,
            bin_high: (i + 1) as f64 / bins as f64,
            genuine_count: 0,
            fake_count: 0,
        })
        .collect();
    for r in records {
        let v = histogram_value(r, mode).clamp(0.0, 1.0);
        let i = ((v * bins as f64).floor() as usize).min(bins - 1);
        if r.is_attack() {
            out[i].fake_count += 1;
        } else {
            out[i].genuine_count += 1;
        }
    }
    Ok(out)
}

pub fn histogram_csv(bins: &[HistogramBin]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for b in bins {
        w.serialize(b)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Stats(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
