use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layer::{self, ActShape, Cache, LayerSpec};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Per-sample input shape `(height, width, channels)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl InputShape {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        InputShape {
            height,
            width,
            channels,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.height, self.width, self.channels]
    }

    fn act(&self) -> ActShape {
        ActShape::Spatial {
            h: self.height,
            w: self.width,
            c: self.channels,
        }
    }
}

/// Weight and bias of one trainable layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Params {
    fn zeros_like(&self) -> Params {
        Params {
            weight: Tensor::zeros(self.weight.shape()),
            bias: Tensor::zeros(self.bias.shape()),
        }
    }
}

/// Parameter gradients, indexed like [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Option<Params>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input: InputShape,
    layers: Vec<LayerSpec>,
    shapes: Vec<ActShape>,
    params: Vec<Option<Params>>,
    velocity: Vec<Option<Params>>,
}

pub(crate) fn init_params(spec: &LayerSpec, rng: &mut ChaCha8Rng) -> Option<Params> {
    let (wshape, bshape) = spec.param_shapes()?;
    let bound = (6.0 / spec.fan_in() as f64).sqrt();
    let len: usize = wshape.iter().product();
    let data = (0..len).map(|_| -bound + 2.0 * bound * rng.gen::<f64>()).collect();
    Some(Params {
        weight: Tensor::new(wshape, data).expect("weight shape"),
        bias: Tensor::zeros(&bshape),
    })
}

impl Network {
    /// Builds a network with fan-in scaled uniform weights and zero biases.
    pub fn new(input: InputShape, layers: Vec<LayerSpec>, seed: u64) -> Result<Network> {
        let shapes = infer_shapes(input, &layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params: Vec<Option<Params>> = layers.iter().map(|l| init_params(l, &mut rng)).collect();
        let velocity = params.iter().map(|p| p.as_ref().map(Params::zeros_like)).collect();
        Ok(Network {
            input,
            layers,
            shapes,
            params,
            velocity,
        })
    }

    pub fn input_shape(&self) -> InputShape {
        self.input
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn params(&self) -> &[Option<Params>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Option<Params>] {
        &mut self.params
    }

    pub fn velocity(&self) -> &[Option<Params>] {
        &self.velocity
    }

    pub(crate) fn parts_mut(&mut self) -> (&[LayerSpec], &mut [Option<Params>], &mut [Option<Params>]) {
        (&self.layers, &mut self.params, &mut self.velocity)
    }

    /// Output shape of each layer.
    pub fn activation_shapes(&self) -> Vec<Vec<usize>> {
        self.shapes.iter().map(|s| s.dims()).collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.params
            .iter()
            .flatten()
            .map(|p| p.weight.len() + p.bias.len())
            .sum()
    }

    pub fn conv_layer_count(&self) -> usize {
        self.layers.iter().filter(|l| l.is_conv()).count()
    }

    /// Index of the final fully-connected layer when the network ends with
    /// `fully_connected` + `softmax`.
    pub fn head_index(&self) -> Option<usize> {
        let n = self.layers.len();
        (n >= 2 && self.layers[n - 1] == LayerSpec::Softmax && self.layers[n - 2].is_fully_connected()).then(|| n - 2)
    }

    pub fn num_outputs(&self) -> usize {
        self.shapes.last().map_or(0, |s| s.len())
    }

    pub fn zero_velocity(&mut self) {
        for v in self.velocity.iter_mut().flatten() {
            v.weight.data_mut().fill(0.0);
            v.bias.data_mut().fill(0.0);
        }
    }

    /// Replaces layer `index`'s parameters and clears their momentum.
    pub(crate) fn set_layer(&mut self, index: usize, spec: LayerSpec, params: Option<Params>) -> Result<()> {
        let mut layers = self.layers.clone();
        layers[index] = spec;
        self.shapes = infer_shapes(self.input, &layers)?;
        self.layers = layers;
        self.velocity[index] = params.as_ref().map(Params::zeros_like);
        self.params[index] = params;
        Ok(())
    }

    fn check_batch(&self, batch: &Tensor) -> Result<usize> {
        let dims = self.input.dims();
        let shape = batch.shape();
        if shape.len() != 4 || shape[1..] != dims {
            let mut expected = vec![shape.first().copied().unwrap_or(1)];
            expected.extend_from_slice(&dims);
            return Err(Error::InputShape {
                expected,
                actual: shape.to_vec(),
            });
        }
        Ok(shape[0])
    }

    fn check_classifier(&self) -> Result<usize> {
        self.head_index()
            .ok_or_else(|| Error::Structure("network must end with fully_connected followed by softmax".into()))
    }

    fn run(
        &self,
        batch: &Tensor,
        upto: usize,
        keep_cache: bool,
        mut trace: Option<&mut Vec<Tensor>>,
    ) -> Result<(Vec<f64>, Vec<Cache>)> {
        let n = self.check_batch(batch)?;
        let mut act = batch.data().to_vec();
        let mut caches = Vec::with_capacity(upto);
        let mut in_shape = self.input.act();
        for i in 0..upto {
            let spec = &self.layers[i];
            let p = self.params[i].as_ref();
            let (out, cache) = layer::forward(
                spec,
                p.map(|p| p.weight.data()),
                p.map(|p| p.bias.data()),
                act,
                n,
                in_shape,
                self.shapes[i],
                keep_cache,
            );
            if let Some(t) = trace.as_deref_mut() {
                let mut shape = vec![n];
                shape.extend(self.shapes[i].dims());
                t.push(Tensor::new(shape, out.clone())?);
            }
            act = out;
            caches.push(cache);
            in_shape = self.shapes[i];
        }
        Ok((act, caches))
    }

    /// Softmax probabilities, shape `[n, num_outputs]`.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        self.check_classifier()?;
        let n = self.check_batch(batch)?;
        let (probs, _) = self.run(batch, self.layers.len(), false, None)?;
        Tensor::new(vec![n, self.num_outputs()], probs)
    }

    /// Every layer's output for `batch`. Works on any layer stack.
    pub fn forward_trace(&self, batch: &Tensor) -> Result<Vec<Tensor>> {
        let mut trace = Vec::with_capacity(self.layers.len());
        self.run(batch, self.layers.len(), false, Some(&mut trace))?;
        Ok(trace)
    }

    /// Mean cross-entropy of `batch` against `labels`.
    pub fn loss(&self, batch: &Tensor, labels: &[usize]) -> Result<f64> {
        let head = self.check_classifier()?;
        let k = self.num_outputs();
        self.check_labels(batch, labels)?;
        let (logits, _) = self.run(batch, head + 1, false, None)?;
        Ok(cross_entropy(&logits, labels, k).0)
    }

    fn check_labels(&self, batch: &Tensor, labels: &[usize]) -> Result<()> {
        let n = self.check_batch(batch)?;
        let k = self.num_outputs();
        if labels.len() != n {
            return Err(Error::Parameter(format!("{} labels for a batch of {n}", labels.len())));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Label { label, num_outputs: k });
        }
        Ok(())
    }

    /// Mean cross-entropy loss, its parameter gradients, and the softmax
    /// probabilities of the batch (flat, row-major).
    pub fn loss_gradients_probs(&self, batch: &Tensor, labels: &[usize]) -> Result<(f64, Gradients, Vec<f64>)> {
        let head = self.check_classifier()?;
        self.check_labels(batch, labels)?;
        let n = labels.len();
        let k = self.num_outputs();
        let (logits, mut caches) = self.run(batch, head + 1, true, None)?;
        let (loss, probs) = cross_entropy(&logits, labels, k);

        let mut grad = probs.clone();
        for (row, &label) in grad.chunks_mut(k).zip(labels) {
            row[label] -= 1.0;
            for g in row.iter_mut() {
                *g /= n as f64;
            }
        }

        let mut layers: Vec<Option<Params>> = vec![None; self.layers.len()];
        let first_trainable = self.params.iter().position(Option::is_some).unwrap_or(0);
        let mut d = grad;
        for i in (0..=head).rev() {
            let cache = caches.pop().expect("cache per layer");
            let in_shape = if i == 0 { self.input.act() } else { self.shapes[i - 1] };
            let (pg, d_in) = layer::backward(
                &self.layers[i],
                self.params[i].as_ref().map(|p| p.weight.data()),
                cache,
                d,
                n,
                in_shape,
                self.shapes[i],
                i > first_trainable,
            );
            if let (Some((dw, db)), Some(p)) = (pg, self.params[i].as_ref()) {
                layers[i] = Some(Params {
                    weight: Tensor::new(p.weight.shape().to_vec(), dw)?,
                    bias: Tensor::new(p.bias.shape().to_vec(), db)?,
                });
            }
            match d_in {
                Some(next) => d = next,
                None => break,
            }
        }
        Ok((loss, Gradients { layers }, probs))
    }

    pub fn loss_and_gradients(&self, batch: &Tensor, labels: &[usize]) -> Result<(f64, Gradients)> {
        let (loss, grads, _) = self.loss_gradients_probs(batch, labels)?;
        Ok((loss, grads))
    }
}

/// Returns the mean `-ln p(label)` and the softmax rows, using a
/// log-sum-exp so the loss stays finite for confident logits.
fn cross_entropy(logits: &[f64], labels: &[usize], k: usize) -> (f64, Vec<f64>) {
    let mut probs = logits.to_vec();
    let mut total = 0.0;
    for (row, &label) in probs.chunks_mut(k).zip(labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        total += -(row[label] - max - lse);
        layer::softmax_in_place(row);
    }
    (total / labels.len() as f64, probs)
}

fn infer_shapes(input: InputShape, layers: &[LayerSpec]) -> Result<Vec<ActShape>> {
    let mut shape = input.act();
    if input.height == 0 || input.width == 0 || input.channels == 0 {
        return Err(Error::Parameter(format!(
            "input shape {:?} has a zero dimension",
            input.dims()
        )));
    }
    let mut out = Vec::with_capacity(layers.len());
    for (i, spec) in layers.iter().enumerate() {
        if *spec == LayerSpec::Softmax && i + 1 != layers.len() {
            return Err(Error::Layer {
                index: i,
                layer: spec.to_string(),
                reason: "softmax is only supported as the final layer".into(),
            });
        }
        shape = spec.output_shape(i, shape)?;
        out.push(shape);
    }
    Ok(out)
}
