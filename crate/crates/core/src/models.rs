//! Desk-scale versions of the two reference architectures.
//!
//! `alex_micro` keeps AlexNet's five convolutions and `vgg_micro` keeps
//! VGG-19's sixteen; both end in a three-layer fully-connected classifier.
//! `channel_scale` shrinks every channel count and hidden width but never the
//! depth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{init_params, InputShape, LayerSpec, Network};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    AlexMicro,
    VggMicro,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::AlexMicro => "alex_micro",
            Family::VggMicro => "vgg_micro",
        }
    }

    pub fn conv_layers(self) -> usize {
        match self {
            Family::AlexMicro => 5,
            Family::VggMicro => 16,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alex_micro" => Ok(Family::AlexMicro),
            "vgg_micro" => Ok(Family::VggMicro),
            other => Err(Error::ConfigFile(format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: Family,
    pub input_size: InputShape,
    pub num_outputs: usize,
    pub channel_scale: f64,
}

impl ModelConfig {
    pub const DEFAULT_CHANNEL_SCALE: f64 = 0.125;

    pub fn new(family: Family, input_size: InputShape, num_outputs: usize) -> Self {
        ModelConfig {
            family,
            input_size,
            num_outputs,
            channel_scale: Self::DEFAULT_CHANNEL_SCALE,
        }
    }

    pub fn with_channel_scale(mut self, scale: f64) -> Self {
        self.channel_scale = scale;
        self
    }

    fn width(&self, reference: usize) -> usize {
        ((reference as f64 * self.channel_scale).round() as usize).max(1)
    }

    /// The layer stack for this configuration.
    pub fn layers(&self) -> Vec<LayerSpec> {
        let conv = |cin, cout, kernel, stride, padding| LayerSpec::Conv2d {
            in_channels: cin,
            out_channels: cout,
            kernel,
            stride,
            padding,
        };
        let mut layers = Vec::new();
        let mut c = self.input_size.channels;
        match self.family {
            Family::AlexMicro => {
                let plan = [
                    (96, 11, 4, 2, true),
                    (256, 5, 1, 2, true),
                    (384, 3, 1, 1, false),
                    (384, 3, 1, 1, false),
                    (256, 3, 1, 1, true),
                ];
                for (reference, k, s, p, pool) in plan {
                    let out = self.width(reference);
                    layers.push(conv(c, out, k, s, p));
                    layers.push(LayerSpec::Relu);
                    if pool {
                        layers.push(LayerSpec::MaxPool2d { size: 3, stride: 2 });
                    }
                    c = out;
                }
            }
            Family::VggMicro => {
                let blocks: [(usize, usize); 5] = [(64, 2), (128, 2), (256, 4), (512, 4), (512, 4)];
                for (reference, repeats) in blocks {
                    let out = self.width(reference);
                    for _ in 0..repeats {
                        layers.push(conv(c, out, 3, 1, 1));
                        layers.push(LayerSpec::Relu);
                        c = out;
                    }
                    layers.push(LayerSpec::MaxPool2d { size: 2, stride: 2 });
                }
            }
        }
        layers.push(LayerSpec::Flatten);
        // the flatten width depends on the input size; filled in by build_model
        layers
    }
}

/// Builds the network for `cfg` with seeded fan-in uniform initialization.
pub fn build_model(cfg: &ModelConfig, seed: u64) -> Result<Network> {
    if cfg.num_outputs < 2 {
        return Err(Error::Parameter("a classifier needs at least 2 outputs".into()));
    }
    if !(cfg.channel_scale > 0.0 && cfg.channel_scale.is_finite()) {
        return Err(Error::Parameter("channel_scale must be positive".into()));
    }
    let mut layers = cfg.layers();
    // Infer the flattened width by building the feature extractor first.
    let features = Network::new(cfg.input_size, layers.clone(), seed)?;
    let flat: usize = features
        .activation_shapes()
        .last()
        .map(|s| s.iter().product())
        .unwrap_or(0);
    let hidden = cfg.width(4096);
    layers.extend([
        LayerSpec::FullyConnected {
            inputs: flat,
            outputs: hidden,
        },
        LayerSpec::Relu,
        LayerSpec::FullyConnected {
            inputs: hidden,
            outputs: hidden,
        },
        LayerSpec::Relu,
        LayerSpec::FullyConnected {
            inputs: hidden,
            outputs: cfg.num_outputs,
        },
        LayerSpec::Softmax,
    ]);
    Network::new(cfg.input_size, layers, seed)
}

/// Swaps the final fully-connected layer for a freshly initialized one with
/// `new_num_outputs` units. Every other parameter is kept bit-for-bit.
pub fn replace_bottleneck(net: &Network, new_num_outputs: usize, seed: u64) -> Result<Network> {
    let head = net
        .head_index()
        .ok_or_else(|| Error::Structure("bottleneck replacement needs a fully_connected + softmax tail".into()))?;
    if new_num_outputs < 2 {
        return Err(Error::Parameter("a classifier needs at least 2 outputs".into()));
    }
    let LayerSpec::FullyConnected { inputs, .. } = net.layers()[head] else {
        unreachable!("head_index points at a fully-connected layer");
    };
    let spec = LayerSpec::FullyConnected {
        inputs,
        outputs: new_num_outputs,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = net.clone();
    out.set_layer(head, spec, init_params(&spec, &mut rng))?;
    Ok(out)
}

/// Softmax scores for a single `[h, w, c]` image.
pub fn predict(net: &Network, image: &Tensor) -> Result<Vec<f64>> {
    let mut shape = vec![1];
    shape.extend_from_slice(image.shape());
    let batch = image.clone().reshape(shape)?;
    Ok(net.forward(&batch)?.into_data())
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
