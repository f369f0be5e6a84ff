//! The three commands behind the `thermopad` binary. Every artifact lands in
//! a seed-named directory and contains no timestamps, so rerunning a command
//! with the same config reproduces its files byte for byte.
//!
//! Experiment directory layout:
//!
//! ```text
//! config.toml            resolved config (after the seed override)
//! experiment.json        mode, family, seed, split count, label space
//! splits/split_XX.json   one SplitPlan per split
//! models/split_XX_M.thw  trained weights per modality
//! histories/split_XX_M.csv
//! training.json          best and stopped epoch per model
//! scores/split_XX_M.csv  test-set ScoreRecords, M in RGB, TH, FUSED
//! metrics.json           MetricsReport per split and modality
//! boxplots.json          BoxplotStats per (metric, modality, model)
//! histograms/M.csv       score histogram pooled over splits
//! report.txt             the aligned plain-text tables
//! ```

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::data::{generate_synthetic_dataset, load_manifest, write_dataset, Authenticity, Dataset, Modality};
use crate::error::{Error, Result};
use crate::eval::{
    boxplot_stats, histogram_csv, pad_metrics, rank1, read_scores_csv, score_histogram, write_scores_csv, BoxplotStats,
    HistogramBin, MetricsReport, ScoreModality, ScoreRecord,
};
use crate::models::Family;
use crate::nn::weights;
use crate::protocol::{check_dataset, make_plans, run_plans, score_split, ExperimentData, LabelMap, Mode, SplitPlan};

pub const HISTOGRAM_BINS: usize = 20;

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(parent) => fs::create_dir_all(parent).map_err(|e| Error::io(parent, e)),
        None => Ok(()),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenDataSummary {
    pub dir: PathBuf,
    pub subjects: usize,
    pub classes: usize,
    /// `(modality, real, fake)` sample counts.
    pub counts: Vec<(Modality, usize, usize)>,
}

impl fmt::Display for GenDataSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset written to {}", self.dir.display())?;
        writeln!(f, "subjects: {}  classes: {}", self.subjects, self.classes)?;
        for (m, real, fake) in &self.counts {
            writeln!(f, "{m:>3}: {real} real, {fake} fake")?;
        }
        Ok(())
    }
}

fn summarize(d: &Dataset, dir: PathBuf) -> GenDataSummary {
    GenDataSummary {
        dir,
        subjects: d.subjects().len(),
        classes: d.num_classes(),
        counts: Modality::ALL
            .iter()
            .map(|&m| (m, d.count(m, Authenticity::Real), d.count(m, Authenticity::Fake)))
            .collect(),
    }
}

/// Generates the synthetic dataset described by `cfg` and writes the
/// manifest and PNG images under `out`.
pub fn cmd_gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<GenDataSummary> {
    let d = generate_synthetic_dataset(&cfg.synthetic_params())?;
    write_dataset(&d, out)?;
    Ok(summarize(&d, out.to_path_buf()))
}

/// Contents of `experiment.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentInfo {
    pub mode: Mode,
    pub family: Family,
    pub seed: u64,
    pub n_splits: usize,
    pub num_classes: usize,
    pub num_outputs: usize,
    pub fake_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub split_id: usize,
    pub modality: Modality,
    pub best_epoch: usize,
    pub stopped_epoch: usize,
    pub best_val_acc: f64,
}

fn split_file(split: usize) -> String {
    format!("splits/split_{split:02}.json")
}

fn scores_file(split: usize, m: ScoreModality) -> String {
    format!("scores/split_{split:02}_{m}.csv")
}

/// Runs the full protocol on the dataset in `data_dir` and writes the
/// experiment directory `out/<mode>_<family>_seed<seed>`. Relative
/// pretrained-weight paths in `cfg` resolve against `config_dir`.
pub fn cmd_run(cfg: &ExperimentConfig, config_dir: &Path, data_dir: &Path, out: &Path) -> Result<Report> {
    let d = load_manifest(data_dir).map_err(Error::stage("load"))?;
    let settings = cfg.settings(config_dir).map_err(Error::stage("config"))?;
    check_dataset(&d).map_err(Error::stage("splits"))?;
    let plans = make_plans(&d, &settings).map_err(Error::stage("splits"))?;
    let dir = out.join(cfg.experiment_name());
    let labels = LabelMap::new(settings.mode.split_mode(), &d);
    let info = ExperimentInfo {
        mode: cfg.mode,
        family: cfg.model.family,
        seed: cfg.seed,
        n_splits: plans.len(),
        num_classes: d.num_classes(),
        num_outputs: labels.num_outputs(),
        fake_index: labels.fake_index(),
    };
    write(&dir.join("config.toml"), cfg.to_toml())?;
    write(&dir.join("experiment.json"), to_json(&info)?)?;
    for p in &plans {
        write(&dir.join(split_file(p.split_id)), p.to_json()? + "\n")?;
    }

    let data = ExperimentData::new(&d, &settings);
    let runs = run_plans(plans, &data, &settings).map_err(Error::stage("train"))?;
    let mut training = Vec::new();
    for run in &runs {
        let id = run.plan.split_id;
        for m in Modality::ALL {
            let model = run.model(m);
            let path = dir.join(format!("models/split_{id:02}_{m}.thw"));
            ensure_parent(&path)?;
            weights::save(&model.net, &path)?;
            write(
                &dir.join(format!("histories/split_{id:02}_{m}.csv")),
                model.history.to_csv()?,
            )?;
            training.push(TrainingSummary {
                split_id: id,
                modality: m,
                best_epoch: model.history.best_epoch,
                stopped_epoch: model.history.stopped_epoch,
                best_val_acc: model.history.best_val_acc(),
            });
        }
        let scores = score_split(run, &data).map_err(Error::stage("score"))?;
        for (m, records) in [
            (ScoreModality::Rgb, &scores.rgb),
            (ScoreModality::Th, &scores.th),
            (ScoreModality::Fused, &scores.fused),
        ] {
            let path = dir.join(scores_file(id, m));
            ensure_parent(&path)?;
            write_scores_csv(records, &path)?;
        }
    }
    write(&dir.join("training.json"), to_json(&training)?)?;
    cmd_report(&dir, false).map_err(Error::stage("report"))
}

/// One row of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub split_id: usize,
    pub modality: ScoreModality,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// One row of `boxplots.json`: the spread of `metric` over all splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotRow {
    pub metric: String,
    pub modality: ScoreModality,
    pub model: Family,
    #[serde(flatten)]
    pub stats: BoxplotStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub dir: PathBuf,
    pub info: ExperimentInfo,
    pub splits: Vec<SplitMetrics>,
    pub boxplots: Vec<BoxplotRow>,
    pub histograms: Vec<(ScoreModality, Vec<HistogramBin>)>,
}

impl Report {
    pub fn split(&self, split_id: usize, m: ScoreModality) -> Option<&MetricsReport> {
        self.splits
            .iter()
            .find(|s| s.split_id == split_id && s.modality == m)
            .map(|s| &s.metrics)
    }

    pub fn boxplot(&self, metric: &str, m: ScoreModality) -> Option<&BoxplotStats> {
        self.boxplots
            .iter()
            .find(|b| b.metric == metric && b.modality == m)
            .map(|b| &b.stats)
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let mut s = String::new();
        let i = &self.info;
        let _ = writeln!(
            s,
            "mode: {}  model: {}  seed: {}  splits: {}  outputs: {}\n",
            i.mode.name(),
            i.family,
            i.seed,
            i.n_splits,
            i.num_outputs
        );
        let _ = writeln!(
            s,
            "{:>5}  {:<5}  {:>8}  {:>8}  {:>8}  {:>8}  {:>7}  {:>9}",
            "split", "input", "accuracy", "apcer", "bpcer", "rank1", "attacks", "bona_fide"
        );
        for r in &self.splits {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{:>5}  {:<5}  {:>8}  {:>8}  {:>8}  {:>8}  {:>7}  {:>9}",
                r.split_id,
                r.modality.name(),
                opt(m.accuracy),
                opt(m.apcer),
                opt(m.bpcer),
                opt(m.rank1),
                m.n_attack,
                m.n_bonafide
            );
        }
        let _ = writeln!(
            s,
            "\n{:<8}  {:<5}  {:<10}  {:>3}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}",
            "metric", "input", "model", "n", "mean", "median", "q1", "q3", "iqr", "w_low", "w_high"
        );
        for b in &self.boxplots {
            let t = &b.stats;
            let _ = writeln!(
                s,
                "{:<8}  {:<5}  {:<10}  {:>3}  {:.4}  {:.4}  {:.4}  {:.4}  {:.4}  {:.4}  {:.4}",
                b.metric,
                b.modality.name(),
                b.model.name(),
                t.n,
                t.mean,
                t.median,
                t.q1,
                t.q3,
                t.iqr,
                t.whisker_low,
                t.whisker_high
            );
        }
        s
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Files `cmd_report` needs, relative to the experiment directory.
pub fn required_artifacts(n_splits: usize) -> Vec<String> {
    let mut files = vec!["experiment.json".to_string()];
    for i in 0..n_splits {
        files.push(split_file(i));
        files.extend(ScoreModality::ALL.iter().map(|&m| scores_file(i, m)));
    }
    files
}

/// Recomputes metrics, boxplot statistics and histograms from the score
/// files of a finished experiment and writes them next to the scores.
pub fn cmd_report(exp: &Path, svg: bool) -> Result<Report> {
    let info_path = exp.join("experiment.json");
    if !info_path.is_file() {
        return Err(Error::MissingArtifacts(vec!["experiment.json".into()]));
    }
    let info: ExperimentInfo = serde_json::from_str(&read(&info_path)?)?;
    let missing: Vec<String> = required_artifacts(info.n_splits)
        .into_iter()
        .filter(|f| !exp.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingArtifacts(missing));
    }

    let mut splits = Vec::new();
    let mut pooled: Vec<Vec<ScoreRecord>> = vec![Vec::new(); ScoreModality::ALL.len()];
    for i in 0..info.n_splits {
        let plan = SplitPlan::from_json(&read(&exp.join(split_file(i)))?)?;
        if plan.split_id != i {
            return Err(Error::Protocol(format!(
                "{} holds split {}",
                split_file(i),
                plan.split_id
            )));
        }
        for (k, &m) in ScoreModality::ALL.iter().enumerate() {
            let records = read_scores_csv(&exp.join(scores_file(i, m)))?;
            if let Some(r) = records.iter().find(|r| r.scores.len() != info.num_outputs) {
                return Err(Error::Protocol(format!(
                    "{}: record `{}` has {} scores, expected {}",
                    scores_file(i, m),
                    r.sample_id,
                    r.scores.len(),
                    info.num_outputs
                )));
            }
            let mut metrics = pad_metrics(&records);
            if info.mode == Mode::Identity {
                metrics.rank1 = rank1(&records);
            }
            splits.push(SplitMetrics {
                split_id: i,
                modality: m,
                metrics,
            });
            pooled[k].extend(records);
        }
    }

    let mut metric_names = vec!["accuracy"];
    if info.mode == Mode::Identity {
        metric_names.push("rank1");
    }
    let mut boxplots = Vec::new();
    for metric in metric_names {
        for m in ScoreModality::ALL {
            let values: Vec<f64> = splits
                .iter()
                .filter(|s| s.modality == m)
                .filter_map(|s| {
                    if metric == "rank1" {
                        s.metrics.rank1
                    } else {
                        s.metrics.accuracy
                    }
                })
                .collect();
            if values.is_empty() {
                continue;
            }
            boxplots.push(BoxplotRow {
                metric: metric.to_string(),
                modality: m,
                model: info.family,
                stats: boxplot_stats(&values)?,
            });
        }
    }

    let split_mode = info.mode.split_mode();
    let mut histograms = Vec::new();
    for (k, &m) in ScoreModality::ALL.iter().enumerate() {
        histograms.push((m, score_histogram(&pooled[k], HISTOGRAM_BINS, split_mode)?));
    }

    let report = Report {
        dir: exp.to_path_buf(),
        info,
        splits,
        boxplots,
        histograms,
    };
    write(&exp.join("metrics.json"), to_json(&report.splits)?)?;
    write(&exp.join("boxplots.json"), to_json(&report.boxplots)?)?;
    for (m, bins) in &report.histograms {
        write(&exp.join(format!("histograms/{m}.csv")), histogram_csv(bins)?)?;
    }
    write(&exp.join("report.txt"), report.to_text())?;
    if svg {
        write(&exp.join("boxplots.svg"), boxplot_svg(&report.boxplots))?;
        for (m, bins) in &report.histograms {
            write(
                &exp.join(format!("histograms/{m}.svg")),
                histogram_svg(&format!("{m} scores"), bins),
            )?;
        }
    }
    Ok(report)
}

fn boxplot_svg(rows: &[BoxplotRow]) -> String {
    let (w, row_h, left, right) = (640.0, 40.0, 170.0, 20.0);
    let h = row_h * rows.len() as f64 + 40.0;
    let lo = rows.iter().map(|r| r.stats.whisker_low).fold(1.0, f64::min).min(0.9);
    let span = (1.0 - lo).max(1e-9);
    let x = |v: f64| left + (v - lo) / span * (w - left - right);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    for (i, r) in rows.iter().enumerate() {
        let y = 20.0 + i as f64 * row_h;
        let mid = y + row_h / 2.0;
        let t = &r.stats;
        let _ = writeln!(
            s,
            "<text x=\"5\" y=\"{:.1}\">{} {} {}</text>",
            mid + 4.0,
            r.metric,
            r.modality,
            r.model
        );
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{mid:.1}\" x2=\"{:.1}\" y2=\"{mid:.1}\" stroke=\"black\"/>",
            x(t.whisker_low),
            x(t.whisker_high)
        );
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#9ecae1\" stroke=\"black\"/>",
            x(t.q1),
            y + 8.0,
            (x(t.q3) - x(t.q1)).max(1.0),
            row_h - 16.0
        );
        let _ = writeln!(
            s,
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"black\" stroke-width=\"2\"/>",
            x(t.median),
            y + 8.0,
            y + row_h - 8.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{left}\" y=\"{:.1}\">{lo:.2}</text><text x=\"{:.1}\" y=\"{:.1}\">1.00</text>",
        h - 5.0,
        w - right - 24.0,
        h - 5.0
    );
    s.push_str("</svg>\n");
    s
}

fn histogram_svg(title: &str, bins: &[HistogramBin]) -> String {
    let (w, h, pad) = (640.0, 320.0, 30.0);
    let max = bins
        .iter()
        .map(|b| b.genuine_count.max(b.fake_count))
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let bw = (w - 2.0 * pad) / bins.len() as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n<text x=\"{pad}\" y=\"18\">{title}: genuine (green), fake (red)</text>\n"
    );
    for (i, b) in bins.iter().enumerate() {
        for (count, colour, offset) in [(b.genuine_count, "#31a354", 0.0), (b.fake_count, "#de2d26", bw / 2.0)] {
            let bh = count as f64 / max * (h - 2.0 * pad);
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{bh:.1}\" fill=\"{colour}\"/>",
                pad + i as f64 * bw + offset,
                h - pad - bh,
                bw / 2.0
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{pad}\" y=\"{:.1}\">0</text><text x=\"{:.1}\" y=\"{:.1}\">1</text>",
        h - 10.0,
        w - pad,
        h - 10.0
    );
    s.push_str("</svg>\n");
    s
}
