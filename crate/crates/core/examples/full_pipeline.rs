//! The command pipeline from library code: generate data, run the protocol
//! and rebuild the report with SVG plots. Uses a deliberately small config
//! so it finishes in seconds.
//!
//! ```bash
//! cargo run --example full_pipeline -- /tmp/thermopad-demo
//! ```

use std::path::PathBuf;

use thermopad::config::ExperimentConfig;
use thermopad::pipeline::{cmd_gen_data, cmd_report, cmd_run};

const CONFIG: &str = r#"
mode = "identity"
n_splits = 3

[data]
num_subjects = 6
images_per_class_per_modality = 5
image_size = [32, 32]

[model]
family = "vgg_micro"
channel_scale = 0.05
input_size = [32, 32]

[training]
learning_rate = 0.001
max_epochs = 15
"#;

fn main() -> thermopad::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("thermopad-demo"));
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    print!("{}", cmd_gen_data(&cfg, &root.join("data"))?);
    let report = cmd_run(&cfg, &root, &root.join("data"), &root.join("runs"))?;
    let report = cmd_report(&report.dir, true)?;
    print!("{report}");
    println!("artifacts in {}", report.dir.display());
    Ok(())
}
