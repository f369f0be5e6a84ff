//! Central finite-difference verification of analytic gradients.

use super::network::{Gradients, Network};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Largest relative error between analytic and central-difference gradients
/// over every parameter of `net`. Zero for a network without parameters.
pub fn gradient_check(net: &Network, batch: &Tensor, labels: &[usize], epsilon: f64) -> Result<f64> {
    if net.num_parameters() == 0 {
        return Ok(0.0);
    }
    let (_, grads) = net.loss_and_gradients(batch, labels)?;
    compare_gradients(net, batch, labels, epsilon, &grads)
}

/// Same as [`gradient_check`] but against caller-supplied gradients.
pub fn compare_gradients(
    net: &Network,
    batch: &Tensor,
    labels: &[usize],
    epsilon: f64,
    grads: &Gradients,
) -> Result<f64> {
    if grads.layers.len() != net.params().len() {
        return Err(Error::GradientShape("gradient slot count".into()));
    }
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for layer in 0..net.params().len() {
        let Some(analytic) = grads.layers[layer].as_ref() else {
            if net.params()[layer].is_some() {
                return Err(Error::GradientShape(format!("no gradient for layer {layer}")));
            }
            continue;
        };
        for which in 0..2 {
            let expected = if which == 0 { &analytic.weight } else { &analytic.bias };
            for idx in 0..expected.len() {
                let original = value(&probe, layer, which, idx);
                set(&mut probe, layer, which, idx, original + epsilon);
                let plus = probe.loss(batch, labels)?;
                set(&mut probe, layer, which, idx, original - epsilon);
                let minus = probe.loss(batch, labels)?;
                set(&mut probe, layer, which, idx, original);
                let numeric = (plus - minus) / (2.0 * epsilon);
                let a = expected.data()[idx];
                let denom = a.abs().max(numeric.abs()).max(1e-12);
                worst = worst.max((a - numeric).abs() / denom);
            }
        }
    }
    Ok(worst)
}

fn value(net: &Network, layer: usize, which: usize, idx: usize) -> f64 {
    let p = net.params()[layer].as_ref().expect("trainable layer");
    if which == 0 {
        p.weight.data()[idx]
    } else {
        p.bias.data()[idx]
    }
}

fn set(net: &mut Network, layer: usize, which: usize, idx: usize, v: f64) {
    let p = net.params_mut()[layer].as_mut().expect("trainable layer");
    if which == 0 {
        p.weight.data_mut()[idx] = v;
    } else {
        p.bias.data_mut()[idx] = v;
    }
}
