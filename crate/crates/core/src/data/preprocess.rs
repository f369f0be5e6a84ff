use super::{Modality, Sample};
use crate::tensor::Tensor;

const STD_FLOOR: f64 = 1e-6;

/// Bilinear resize of an `[h, w, c]` tensor with half-pixel centres.
pub fn resize_bilinear(image: &Tensor, target: (usize, usize)) -> Tensor {
    let shape = image.shape();
    let (h, w, c) = (shape[0], shape[1], shape[2]);
    let (th, tw) = target;
    if (h, w) == (th, tw) {
        return image.clone();
    }
    let src = image.data();
    let sy = h as f64 / th as f64;
    let sx = w as f64 / tw as f64;
    let mut out = Vec::with_capacity(th * tw * c);
    for y in 0..th {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for x in 0..tw {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let tx = fx - x0 as f64;
            for ch in 0..c {
                let at = |yy: usize, xx: usize| src[(yy * w + xx) * c + ch];
                let top = at(y0, x0) * (1.0 - tx) + at(y0, x1) * tx;
                let bottom = at(y1, x0) * (1.0 - tx) + at(y1, x1) * tx;
                out.push(top * (1.0 - ty) + bottom * ty);
            }
        }
    }
    Tensor::new(vec![th, tw, c], out).expect("resized shape")
}

/// Resize, scale to [0, 1] by the modality's bit depth, then standardize the
/// image to zero mean and unit variance.
pub fn preprocess_image(image: &Tensor, modality: Modality, target: (usize, usize)) -> Tensor {
    let mut t = resize_bilinear(image, target);
    let scale = modality.max_level();
    let data = t.data_mut();
    for v in data.iter_mut() {
        *v /= scale;
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt().max(STD_FLOOR);
    for v in data.iter_mut() {
        *v = (*v - mean) / std;
    }
    t
}

pub fn preprocess(s: &Sample, target: (usize, usize)) -> Tensor {
    preprocess_image(&s.image, s.modality, target)
}
