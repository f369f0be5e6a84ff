//! Identity mode: N hand classes plus one fake class on closed-set splits,
//! with RGB and TH softmax scores averaged per capture pair.
//!
//! ```bash
//! cargo run --example identity_fusion -- 2
//! ```

use thermopad::data::{generate_synthetic_dataset, SyntheticParams};
use thermopad::eval::{pad_metrics, rank1};
use thermopad::models::Family;
use thermopad::protocol::{make_plans, run_plans, score_split, ExperimentData, ExperimentSettings, Mode};

fn main() -> thermopad::Result<()> {
    let n_splits = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let d = generate_synthetic_dataset(&SyntheticParams::default())?;
    let mut settings = ExperimentSettings::new(Mode::Identity, Family::AlexMicro);
    settings.n_splits = n_splits;

    let data = ExperimentData::new(&d, &settings);
    println!("{} identity classes + 1 fake class", d.num_classes());
    let runs = run_plans(make_plans(&d, &settings)?, &data, &settings)?;
    for run in &runs {
        let s = score_split(run, &data)?;
        let r = |records| rank1(records).unwrap_or(f64::NAN);
        println!(
            "split {}: rank-1 RGB {:.4}  TH {:.4}  RGB+TH {:.4}  (fused APCER {:?})",
            run.plan.split_id,
            r(&s.rgb),
            r(&s.th),
            r(&s.fused),
            pad_metrics(&s.fused).apcer
        );
    }
    Ok(())
}
