//! Build both architecture families for each operational mode and print
//! their layer stacks.
//!
//! ```bash
//! cargo run --example build_models
//! ```

use thermopad::models::{build_model, replace_bottleneck, Family, ModelConfig};
use thermopad::nn::InputShape;

fn main() -> thermopad::Result<()> {
    for family in [Family::AlexMicro, Family::VggMicro] {
        // binary real/fake head on thermal input
        let cfg = ModelConfig::new(family, InputShape::new(64, 64, 1), 2);
        let net = build_model(&cfg, 0)?;
        println!(
            "{family}: {} conv layers, {} parameters",
            net.conv_layer_count(),
            net.num_parameters()
        );
        for (spec, shape) in net.layers().iter().zip(net.activation_shapes()) {
            println!("  {spec:<40} -> {shape:?}");
        }
        // 40 identities plus the fake class
        let identity = replace_bottleneck(&net, 41, 1)?;
        println!("  identity head: {} outputs\n", identity.num_outputs());
    }
    Ok(())
}
