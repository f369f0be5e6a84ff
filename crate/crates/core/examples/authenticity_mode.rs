//! Binary real/fake detection on subject-disjoint splits, with APCER and
//! BPCER per modality.
//!
//! ```bash
//! cargo run --example authenticity_mode -- 3
//! ```
//!
//! The argument is the number of splits (default 3).

use thermopad::data::{generate_synthetic_dataset, SyntheticParams};
use thermopad::eval::{pad_metrics, MetricsReport};
use thermopad::models::Family;
use thermopad::protocol::{make_plans, run_plans, score_split, ExperimentData, ExperimentSettings, Mode};

fn show(name: &str, m: &MetricsReport) {
    let pct = |v: Option<f64>| v.map_or("-".into(), |v| format!("{:.2}%", 100.0 * v));
    println!(
        "  {name:<5} accuracy {:>8}  APCER {:>7}  BPCER {:>7}",
        pct(m.accuracy),
        pct(m.apcer),
        pct(m.bpcer)
    );
}

fn main() -> thermopad::Result<()> {
    let n_splits = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let d = generate_synthetic_dataset(&SyntheticParams::default())?;
    let mut settings = ExperimentSettings::new(Mode::Authenticity, Family::AlexMicro);
    settings.n_splits = n_splits;

    let data = ExperimentData::new(&d, &settings);
    let runs = run_plans(make_plans(&d, &settings)?, &data, &settings)?;
    for run in &runs {
        let s = score_split(run, &data)?;
        println!(
            "split {} (RGB stopped at epoch {}, TH at {})",
            run.plan.split_id, run.rgb.history.stopped_epoch, run.th.history.stopped_epoch
        );
        show("RGB", &pad_metrics(&s.rgb));
        show("TH", &pad_metrics(&s.th));
    }
    Ok(())
}
