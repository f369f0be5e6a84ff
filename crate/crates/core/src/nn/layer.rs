//! Layer specifications, shape inference and the forward/backward kernels.
//!
//! Spatial activations are stored per sample as `[height, width, channels]`
//! (HWC), so a batch is `[n, h, w, c]`. Convolutions are lowered to a single
//! matrix product over the whole batch (im2col), which keeps the summation
//! order fixed and the results bit-reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LayerSpec {
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Relu,
    MaxPool2d {
        size: usize,
        stride: usize,
    },
    Flatten,
    FullyConnected {
        inputs: usize,
        outputs: usize,
    },
    Softmax,
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => write!(f, "conv2d {in_channels}->{out_channels} k{kernel} s{stride} p{padding}"),
            LayerSpec::Relu => f.write_str("relu"),
            LayerSpec::MaxPool2d { size, stride } => write!(f, "maxpool2d {size}/{stride}"),
            LayerSpec::Flatten => f.write_str("flatten"),
            LayerSpec::FullyConnected { inputs, outputs } => {
                write!(f, "fully_connected {inputs}->{outputs}")
            }
            LayerSpec::Softmax => f.write_str("softmax"),
        }
    }
}

/// Per-sample activation shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActShape {
    Spatial { h: usize, w: usize, c: usize },
    Flat(usize),
}

impl ActShape {
    pub fn len(self) -> usize {
        match self {
            ActShape::Spatial { h, w, c } => h * w * c,
            ActShape::Flat(n) => n,
        }
    }

    pub fn dims(self) -> Vec<usize> {
        match self {
            ActShape::Spatial { h, w, c } => vec![h, w, c],
            ActShape::Flat(n) => vec![n],
        }
    }
}

impl LayerSpec {
    pub fn is_conv(&self) -> bool {
        matches!(self, LayerSpec::Conv2d { .. })
    }

    pub fn is_fully_connected(&self) -> bool {
        matches!(self, LayerSpec::FullyConnected { .. })
    }

    /// Weight and bias shapes, or `None` for parameter-free layers.
    pub fn param_shapes(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => Some((vec![kernel, kernel, in_channels, out_channels], vec![out_channels])),
            LayerSpec::FullyConnected { inputs, outputs } => Some((vec![inputs, outputs], vec![outputs])),
            _ => None,
        }
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Conv2d {
                in_channels, kernel, ..
            } => kernel * kernel * in_channels,
            LayerSpec::FullyConnected { inputs, .. } => inputs,
            _ => 0,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::Layer {
                index,
                layer: self.to_string(),
                reason: reason.to_string(),
            })
        };
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                ..
            } => {
                if kernel < 1 {
                    return bad("kernel size must be at least 1");
                }
                if stride < 1 {
                    return bad("stride must be at least 1");
                }
                if out_channels < 1 || in_channels < 1 {
                    return bad("channel counts must be at least 1");
                }
            }
            LayerSpec::MaxPool2d { size, stride } => {
                if size < 1 || stride < 1 {
                    return bad("pool size and stride must be at least 1");
                }
            }
            LayerSpec::FullyConnected { inputs, outputs } => {
                if inputs < 1 || outputs < 1 {
                    return bad("unit counts must be at least 1");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Output shape for a given input shape.
    pub fn output_shape(&self, index: usize, input: ActShape) -> Result<ActShape> {
        self.validate(index)?;
        let config = |reason: String| Error::Config {
            index,
            layer: self.to_string(),
            reason,
        };
        match (*self, input) {
            (
                LayerSpec::Conv2d {
                    in_channels,
                    out_channels,
                    kernel,
                    stride,
                    padding,
                },
                ActShape::Spatial { h, w, c },
            ) => {
                if c != in_channels {
                    return Err(config(format!("expects {in_channels} input channels, got {c}")));
                }
                if h + 2 * padding < kernel || w + 2 * padding < kernel {
                    return Err(config(format!(
                        "input {h}x{w} is smaller than the {kernel}x{kernel} kernel"
                    )));
                }
                Ok(ActShape::Spatial {
                    h: (h + 2 * padding - kernel) / stride + 1,
                    w: (w + 2 * padding - kernel) / stride + 1,
                    c: out_channels,
                })
            }
            (LayerSpec::MaxPool2d { size, stride }, ActShape::Spatial { h, w, c }) => {
                if h < size || w < size {
                    return Err(config(format!(
                        "input {h}x{w} is smaller than the {size}x{size} pool window"
                    )));
                }
                Ok(ActShape::Spatial {
                    h: (h - size) / stride + 1,
                    w: (w - size) / stride + 1,
                    c,
                })
            }
            (LayerSpec::Conv2d { .. } | LayerSpec::MaxPool2d { .. }, ActShape::Flat(_)) => {
                Err(config("needs a spatial input".into()))
            }
            (LayerSpec::Relu, s) => Ok(s),
            (LayerSpec::Flatten, s) => Ok(ActShape::Flat(s.len())),
            (LayerSpec::FullyConnected { inputs, outputs }, ActShape::Flat(n)) => {
                if n != inputs {
                    return Err(config(format!("expects {inputs} inputs, got {n}")));
                }
                Ok(ActShape::Flat(outputs))
            }
            (LayerSpec::FullyConnected { .. }, ActShape::Spatial { .. }) => {
                Err(config("needs a flat input (insert flatten)".into()))
            }
            (LayerSpec::Softmax, ActShape::Flat(n)) => Ok(ActShape::Flat(n)),
            (LayerSpec::Softmax, ActShape::Spatial { .. }) => Err(config("needs a flat input".into())),
        }
    }
}

/// State saved by a forward pass for the matching backward pass.
pub(crate) enum Cache {
    None,
    Conv { cols: Vec<f64> },
    Relu { output: Vec<f64> },
    Pool { argmax: Vec<usize> },
    Fc { input: Vec<f64> },
}

#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    // SAFETY: the strides describe matrices fully contained in the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

struct ConvGeom {
    n: usize,
    h: usize,
    w: usize,
    cin: usize,
    oh: usize,
    ow: usize,
    k: usize,
    stride: usize,
    pad: usize,
}

impl ConvGeom {
    fn patch(&self) -> usize {
        self.k * self.k * self.cin
    }

    fn positions(&self) -> usize {
        self.n * self.oh * self.ow
    }
}

fn im2col(input: &[f64], g: &ConvGeom) -> Vec<f64> {
    let patch = g.patch();
    let mut cols = vec![0.0; g.positions() * patch];
    let row_len = g.k * g.cin;
    for b in 0..g.n {
        let img = &input[b * g.h * g.w * g.cin..(b + 1) * g.h * g.w * g.cin];
        for oy in 0..g.oh {
            for ox in 0..g.ow {
                let row = ((b * g.oh + oy) * g.ow + ox) * patch;
                let dst = &mut cols[row..row + patch];
                for ky in 0..g.k {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    let iy = iy as usize;
                    let x0 = (ox * g.stride) as isize - g.pad as isize;
                    if x0 >= 0 && x0 as usize + g.k <= g.w {
                        let src = (iy * g.w + x0 as usize) * g.cin;
                        dst[ky * row_len..(ky + 1) * row_len].copy_from_slice(&img[src..src + row_len]);
                    } else {
                        for kx in 0..g.k {
                            let ix = x0 + kx as isize;
                            if ix < 0 || ix >= g.w as isize {
                                continue;
                            }
                            let src = (iy * g.w + ix as usize) * g.cin;
                            let d = (ky * g.k + kx) * g.cin;
                            dst[d..d + g.cin].copy_from_slice(&img[src..src + g.cin]);
                        }
                    }
                }
            }
        }
    }
    cols
}

fn col2im(dcols: &[f64], g: &ConvGeom) -> Vec<f64> {
    let patch = g.patch();
    let mut out = vec![0.0; g.n * g.h * g.w * g.cin];
    for b in 0..g.n {
        let img = &mut out[b * g.h * g.w * g.cin..(b + 1) * g.h * g.w * g.cin];
        for oy in 0..g.oh {
            for ox in 0..g.ow {
                let row = ((b * g.oh + oy) * g.ow + ox) * patch;
                let src = &dcols[row..row + patch];
                for ky in 0..g.k {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    for kx in 0..g.k {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        if ix < 0 || ix >= g.w as isize {
                            continue;
                        }
                        let d = (iy as usize * g.w + ix as usize) * g.cin;
                        let s = (ky * g.k + kx) * g.cin;
                        for (o, v) in img[d..d + g.cin].iter_mut().zip(&src[s..s + g.cin]) {
                            *o += v;
                        }
                    }
                }
            }
        }
    }
    out
}

fn conv_geom(spec: &LayerSpec, n: usize, input: ActShape, output: ActShape) -> ConvGeom {
    match (*spec, input, output) {
        (
            LayerSpec::Conv2d {
                kernel,
                stride,
                padding,
                ..
            },
            ActShape::Spatial { h, w, c },
            ActShape::Spatial { h: oh, w: ow, .. },
        ) => ConvGeom {
            n,
            h,
            w,
            cin: c,
            oh,
            ow,
            k: kernel,
            stride,
            pad: padding,
        },
        _ => unreachable!("conv geometry on non-spatial shapes"),
    }
}

/// Forward pass of one layer over a batch of `n` samples.
///
/// Softmax is applied row-wise with max-subtraction.
#[allow(clippy::too_many_arguments)]
pub(crate) fn forward(
    spec: &LayerSpec,
    weight: Option<&[f64]>,
    bias: Option<&[f64]>,
    input: Vec<f64>,
    n: usize,
    in_shape: ActShape,
    out_shape: ActShape,
    keep_cache: bool,
) -> (Vec<f64>, Cache) {
    match *spec {
        LayerSpec::Conv2d { out_channels, .. } => {
            let g = conv_geom(spec, n, in_shape, out_shape);
            let cols = im2col(&input, &g);
            drop(input);
            let bias = bias.expect("conv bias");
            let mut out = Vec::with_capacity(g.positions() * out_channels);
            for _ in 0..g.positions() {
                out.extend_from_slice(bias);
            }
            gemm(
                g.positions(),
                g.patch(),
                out_channels,
                &cols,
                (g.patch() as isize, 1),
                weight.expect("conv weight"),
                (out_channels as isize, 1),
                1.0,
                &mut out,
            );
            let cache = if keep_cache { Cache::Conv { cols } } else { Cache::None };
            (out, cache)
        }
        LayerSpec::Relu => {
            let mut out = input;
            for v in out.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let cache = if keep_cache {
                Cache::Relu { output: out.clone() }
            } else {
                Cache::None
            };
            (out, cache)
        }
        LayerSpec::MaxPool2d { size, stride } => {
            let (ActShape::Spatial { h, w, c }, ActShape::Spatial { h: oh, w: ow, .. }) = (in_shape, out_shape) else {
                unreachable!("maxpool on flat shape");
            };
            let mut out = vec![f64::NEG_INFINITY; n * oh * ow * c];
            let mut argmax = vec![0usize; out.len()];
            for b in 0..n {
                let base = b * h * w * c;
                for oy in 0..oh {
                    for ox in 0..ow {
                        let o = ((b * oh + oy) * ow + ox) * c;
                        for ky in 0..size {
                            for kx in 0..size {
                                let i = base + ((oy * stride + ky) * w + ox * stride + kx) * c;
                                for ch in 0..c {
                                    // strict comparison keeps the first maximum
                                    if input[i + ch] > out[o + ch] {
                                        out[o + ch] = input[i + ch];
                                        argmax[o + ch] = i + ch;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let cache = if keep_cache {
                Cache::Pool { argmax }
            } else {
                Cache::None
            };
            (out, cache)
        }
        LayerSpec::Flatten => (input, Cache::None),
        LayerSpec::FullyConnected { inputs, outputs } => {
            let bias = bias.expect("fc bias");
            let mut out = Vec::with_capacity(n * outputs);
            for _ in 0..n {
                out.extend_from_slice(bias);
            }
            gemm(
                n,
                inputs,
                outputs,
                &input,
                (inputs as isize, 1),
                weight.expect("fc weight"),
                (outputs as isize, 1),
                1.0,
                &mut out,
            );
            let cache = if keep_cache { Cache::Fc { input } } else { Cache::None };
            (out, cache)
        }
        LayerSpec::Softmax => {
            let width = out_shape.len();
            let mut out = input;
            for row in out.chunks_mut(width) {
                softmax_in_place(row);
            }
            (out, Cache::None)
        }
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Gradients of one layer: `(d_weight, d_bias, d_input)`.
///
/// `d_input` is skipped when `need_input_grad` is false (first layer).
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward(
    spec: &LayerSpec,
    weight: Option<&[f64]>,
    cache: Cache,
    d_out: Vec<f64>,
    n: usize,
    in_shape: ActShape,
    out_shape: ActShape,
    need_input_grad: bool,
) -> (Option<(Vec<f64>, Vec<f64>)>, Option<Vec<f64>>) {
    match (*spec, cache) {
        (LayerSpec::Conv2d { out_channels, .. }, Cache::Conv { cols }) => {
            let g = conv_geom(spec, n, in_shape, out_shape);
            let patch = g.patch();
            let positions = g.positions();
            let mut dw = vec![0.0; patch * out_channels];
            gemm(
                patch,
                positions,
                out_channels,
                &cols,
                (1, patch as isize),
                &d_out,
                (out_channels as isize, 1),
                0.0,
                &mut dw,
            );
            let mut db = vec![0.0; out_channels];
            for row in d_out.chunks(out_channels) {
                for (acc, v) in db.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            let d_in = need_input_grad.then(|| {
                let mut dcols = vec![0.0; positions * patch];
                gemm(
                    positions,
                    out_channels,
                    patch,
                    &d_out,
                    (out_channels as isize, 1),
                    weight.expect("conv weight"),
                    (1, out_channels as isize),
                    0.0,
                    &mut dcols,
                );
                col2im(&dcols, &g)
            });
            (Some((dw, db)), d_in)
        }
        (LayerSpec::Relu, Cache::Relu { output }) => {
            let mut d = d_out;
            for (g, o) in d.iter_mut().zip(&output) {
                if *o <= 0.0 {
                    *g = 0.0;
                }
            }
            (None, Some(d))
        }
        (LayerSpec::MaxPool2d { .. }, Cache::Pool { argmax }) => {
            let mut d = vec![0.0; n * in_shape.len()];
            for (g, &i) in d_out.iter().zip(&argmax) {
                d[i] += g;
            }
            (None, Some(d))
        }
        (LayerSpec::Flatten, _) => (None, Some(d_out)),
        (LayerSpec::FullyConnected { inputs, outputs }, Cache::Fc { input }) => {
            let mut dw = vec![0.0; inputs * outputs];
            gemm(
                inputs,
                n,
                outputs,
                &input,
                (1, inputs as isize),
                &d_out,
                (outputs as isize, 1),
                0.0,
                &mut dw,
            );
            let mut db = vec![0.0; outputs];
            for row in d_out.chunks(outputs) {
                for (acc, v) in db.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            let d_in = need_input_grad.then(|| {
                let mut d = vec![0.0; n * inputs];
                gemm(
                    n,
                    outputs,
                    inputs,
                    &d_out,
                    (outputs as isize, 1),
                    weight.expect("fc weight"),
                    (1, outputs as isize),
                    0.0,
                    &mut d,
                );
                d
            });
            (Some((dw, db)), d_in)
        }
        (spec, _) => unreachable!("backward through {spec} without a matching cache"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_output_shape_arithmetic() {
        let conv = LayerSpec::Conv2d {
            in_channels: 3,
            out_channels: 12,
            kernel: 11,
            stride: 4,
            padding: 2,
        };
        let out = conv.output_shape(0, ActShape::Spatial { h: 64, w: 64, c: 3 }).unwrap();
        assert_eq!(out, ActShape::Spatial { h: 15, w: 15, c: 12 });
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let zero_kernel = LayerSpec::Conv2d {
            in_channels: 1,
            out_channels: 1,
            kernel: 0,
            stride: 1,
            padding: 0,
        };
        let s = ActShape::Spatial { h: 4, w: 4, c: 1 };
        assert!(matches!(zero_kernel.output_shape(0, s), Err(Error::Layer { .. })));
        let zero_stride = LayerSpec::Conv2d {
            in_channels: 1,
            out_channels: 1,
            kernel: 1,
            stride: 0,
            padding: 0,
        };
        assert!(zero_stride.output_shape(0, s).is_err());
        let fc = LayerSpec::FullyConnected { inputs: 16, outputs: 2 };
        assert!(fc.output_shape(0, s).is_err());
        assert_eq!(fc.output_shape(0, ActShape::Flat(16)).unwrap(), ActShape::Flat(2));
    }

    #[test]
    fn im2col_col2im_are_adjoint() {
        // <im2col(x), y> == <x, col2im(y)>
        let g = ConvGeom {
            n: 2,
            h: 5,
            w: 4,
            cin: 2,
            oh: 3,
            ow: 2,
            k: 3,
            stride: 2,
            pad: 1,
        };
        let x: Vec<f64> = (0..g.n * g.h * g.w * g.cin).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..g.positions() * g.patch())
            .map(|i| (i as f64 * 0.11).cos())
            .collect();
        let lhs: f64 = im2col(&x, &g).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&col2im(&y, &g)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn softmax_handles_large_logits() {
        let mut row = [1000.0, 1000.0, -1000.0];
        softmax_in_place(&mut row);
        assert!((row[0] - 0.5).abs() < 1e-12);
        assert!(row.iter().all(|v| v.is_finite()));
    }
}
