//! Save a trained feature extractor to a weight file and reuse it under a
//! different classifier head, the way externally pretrained weights are
//! imported.
//!
//! ```bash
//! cargo run --example weights_roundtrip
//! ```

use thermopad::models::{build_model, Family, ModelConfig};
use thermopad::nn::{weights, InputShape};

fn main() -> thermopad::Result<()> {
    let dir = std::env::temp_dir().join("thermopad-weights");
    std::fs::create_dir_all(&dir).map_err(|e| thermopad::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let path = dir.join("binary_th.thw");

    let input = InputShape::new(64, 64, 1);
    let binary = build_model(&ModelConfig::new(Family::AlexMicro, input, 2), 7)?;
    weights::save(&binary, &path)?;
    let records = weights::read(&path)?;
    println!("{}: {} tensors", path.display(), records.len());

    // an identity model with 41 outputs takes every layer except the head
    let mut identity = build_model(&ModelConfig::new(Family::AlexMicro, input, 41), 8)?;
    let head = identity.head_index().expect("classifier head");
    let loaded = weights::apply(&mut identity, &records, &[head])?;
    println!(
        "loaded {loaded} layers, kept a fresh {}-way head at layer {head}",
        identity.num_outputs()
    );
    Ok(())
}
