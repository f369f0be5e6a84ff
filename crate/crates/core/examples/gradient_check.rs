//! Verify backpropagation against central finite differences on both model
//! families, shrunk to a few thousand parameters.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermopad::models::{build_model, Family, ModelConfig};
use thermopad::nn::{gradient_check, InputShape};
use thermopad::Tensor;

fn main() -> thermopad::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (family, side) in [(Family::AlexMicro, 64), (Family::VggMicro, 32)] {
        let cfg = ModelConfig::new(family, InputShape::new(side, side, 1), 2).with_channel_scale(0.01);
        let mut net = build_model(&cfg, 1)?;
        // move biases off zero so no unit sits exactly on a ReLU kink
        for p in net.params_mut().iter_mut().flatten() {
            p.bias.data_mut().iter_mut().for_each(|b| *b = rng.gen_range(-0.1..0.1));
        }
        let n = 2 * side * side;
        let batch = Tensor::new(
            vec![2, side, side, 1],
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )?;
        let err = gradient_check(&net, &batch, &[0, 1], 1e-5)?;
        println!(
            "{family:<10} {:>5} parameters  max relative error {err:.2e}",
            net.num_parameters()
        );
    }
    Ok(())
}
