//! Seeded generator of paired visible-light and thermal hand images.
//!
//! Each (subject, hand) gets a fixed parametric silhouette: a palm ellipse, a
//! wrist, and five finger capsules. Real captures jitter the pose and
//! background. Real thermal images carry a warm hand on an ambient
//! background with a subject-specific heat pattern and cooler fingertips.
//! Fakes model a photographed printout: the visible image shows the printed
//! hand on paper with reduced dynamic range and halftone dots, and the
//! thermal image shows only the diffuse, displaced warmth of a living hand
//! held behind the paper.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Authenticity, Dataset, HandSide, Modality, Sample};
use crate::error::{Error, Result};
use crate::seeding;
use crate::tensor::Tensor;

/// Thermal images map this temperature range (deg C) onto the 16-bit scale.
const TH_RANGE: (f64, f64) = (20.0, 40.0);
const AMBIENT: f64 = 24.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub num_subjects: usize,
    pub sessions: usize,
    pub images_per_class_per_modality: usize,
    pub fake_images_per_class: usize,
    /// `(height, width)` of every generated image.
    pub image_size: (usize, usize),
    pub both_hands: bool,
    pub rng_seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            num_subjects: 20,
            sessions: 3,
            images_per_class_per_modality: 20,
            fake_images_per_class: 2,
            image_size: (64, 64),
            both_hands: true,
            rng_seed: 0,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_subjects < 2 {
            return Err(Error::Parameter("num_subjects must be at least 2".into()));
        }
        if self.image_size.0 < 32 || self.image_size.1 < 32 {
            return Err(Error::Parameter(format!(
                "image_size must be at least 32x32, got {}x{}",
                self.image_size.0, self.image_size.1
            )));
        }
        if self.sessions == 0 || self.images_per_class_per_modality == 0 {
            return Err(Error::Parameter(
                "sessions and images_per_class_per_modality must be positive".into(),
            ));
        }
        Ok(())
    }

    fn hands(&self) -> &'static [HandSide] {
        if self.both_hands {
            &[HandSide::Left, HandSide::Right]
        } else {
            &[HandSide::Right]
        }
    }
}

/// Per-pair generator ground truth: the visible silhouette and the region
/// the thermal camera sees as warm, both as row-major masks.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub pair_id: String,
    pub authenticity: Authenticity,
    /// For fakes, the real capture that was printed.
    pub source_pair_id: Option<String>,
    pub silhouette: Vec<bool>,
    pub heat: Vec<bool>,
}

impl GroundTruth {
    pub fn silhouette_heat_iou(&self) -> f64 {
        iou(&self.silhouette, &self.heat)
    }
}

pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn generate_synthetic_dataset(p: &SyntheticParams) -> Result<Dataset> {
    generate_with_truth(p).map(|(d, _)| d)
}

type Vec2 = (f64, f64);

#[derive(Debug, Clone)]
struct Capsule {
    a: Vec2,
    b: Vec2,
    radius: f64,
}

impl Capsule {
    /// Distance beyond the surface (negative inside) and the position along
    /// the axis in [0, 1].
    fn sdf(&self, p: Vec2) -> (f64, f64) {
        let (ax, ay) = self.a;
        let (dx, dy) = (self.b.0 - ax, self.b.1 - ay);
        let len2 = dx * dx + dy * dy;
        let t = (((p.0 - ax) * dx + (p.1 - ay) * dy) / len2).clamp(0.0, 1.0);
        let (cx, cy) = (ax + t * dx, ay + t * dy);
        (((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt() - self.radius, t)
    }
}

/// Hand silhouette in hand-local coordinates (palm centre at the origin,
/// fingers towards negative y, unit = image size).
#[derive(Debug, Clone)]
struct HandShape {
    palm: Vec2,
    fingers: [Capsule; 5],
    wrist: Capsule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Region {
    Palm,
    Finger(usize, f64),
    Wrist,
}

impl HandShape {
    fn sample(rng: &mut ChaCha8Rng, side: HandSide) -> HandShape {
        let rx = rng.gen_range(0.14..0.18);
        let ry = rng.gen_range(0.16..0.21);
        let spread = rng.gen_range(0.8..1.3);
        let mirror = if side == HandSide::Left { -1.0 } else { 1.0 };
        let base_angles = [-0.55, -0.18, 0.18, 0.55];
        let tilt = [-0.2, -0.06, 0.06, 0.2];
        let lengths = [0.2, 0.23, 0.21, 0.16];
        let mut fingers = Vec::with_capacity(5);
        for i in 0..4 {
            let theta: f64 = base_angles[i] + rng.gen_range(-0.05..0.05);
            let base = (rx * theta.sin() * 0.85, -ry * theta.cos() * 0.85);
            let phi: f64 = tilt[i] * spread + rng.gen_range(-0.05..0.05);
            let len = lengths[i] * rng.gen_range(0.85..1.15);
            let tip = (base.0 + len * phi.sin(), base.1 - len * phi.cos());
            fingers.push(Capsule {
                a: (mirror * base.0, base.1),
                b: (mirror * tip.0, tip.1),
                radius: rng.gen_range(0.026..0.036),
            });
        }
        // thumb
        let base = (rx * 0.8, ry * 0.05);
        let phi: f64 = rng.gen_range(0.85..1.15);
        let len = 0.17 * rng.gen_range(0.85..1.15);
        let tip = (base.0 + len * phi.sin(), base.1 - len * phi.cos());
        fingers.insert(
            0,
            Capsule {
                a: (mirror * base.0, base.1),
                b: (mirror * tip.0, tip.1),
                radius: rng.gen_range(0.034..0.042),
            },
        );
        HandShape {
            palm: (rx, ry),
            fingers: fingers.try_into().expect("five fingers"),
            wrist: Capsule {
                a: (0.0, ry * 0.6),
                b: (0.0, ry + 0.6),
                radius: rx * 0.72,
            },
        }
    }

    fn region(&self, p: Vec2) -> Option<Region> {
        let (rx, ry) = self.palm;
        if (p.0 / rx).powi(2) + (p.1 / ry).powi(2) <= 1.0 {
            return Some(Region::Palm);
        }
        for (i, f) in self.fingers.iter().enumerate() {
            let (d, t) = f.sdf(p);
            if d <= 0.0 {
                return Some(Region::Finger(i, t));
            }
        }
        (self.wrist.sdf(p).0 <= 0.0).then_some(Region::Wrist)
    }
}

/// Placement of the hand in the image: scale, rotation, then translation.
#[derive(Debug, Clone, Copy)]
struct Pose {
    center: Vec2,
    angle: f64,
    scale: f64,
}

impl Pose {
    fn sample(rng: &mut ChaCha8Rng) -> Pose {
        Pose {
            center: (0.5 + rng.gen_range(-0.04..0.04), 0.6 + rng.gen_range(-0.04..0.04)),
            angle: rng.gen_range(-0.12..0.12),
            scale: rng.gen_range(0.94..1.06),
        }
    }

    fn to_local(&self, p: Vec2) -> Vec2 {
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        let (s, c) = (-self.angle).sin_cos();
        ((c * dx - s * dy) / self.scale, (s * dx + c * dy) / self.scale)
    }
}

/// Subject-specific appearance in both spectra.
#[derive(Debug, Clone)]
struct Identity {
    shape: HandShape,
    skin: [f64; 3],
    texture: [(f64, f64, f64, f64); 2],
    lines: [(f64, f64, f64); 3],
    palm_temp: f64,
    fingertip_drop: f64,
    finger_offsets: [f64; 5],
    gradient: (f64, f64),
    heat_wave: (f64, f64, f64, f64),
}

impl Identity {
    fn sample(rng: &mut ChaCha8Rng, side: HandSide) -> Identity {
        let shape = HandShape::sample(rng, side);
        let r = rng.gen_range(0.55..0.92);
        let g = r * rng.gen_range(0.68..0.85);
        let b = g * rng.gen_range(0.7..0.9);
        let mut wave = || {
            (
                rng.gen_range(10.0..25.0),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.03..0.07),
            )
        };
        let texture = [wave(), wave()];
        let mut line = || {
            (
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.12..0.12),
                rng.gen_range(-3.0..3.0),
            )
        };
        let lines = [line(), line(), line()];
        let mut finger_offsets = [0.0; 5];
        for o in &mut finger_offsets {
            *o = rng.gen_range(-1.2..1.2);
        }
        let g_angle: f64 = rng.gen_range(0.0..2.0 * PI);
        let g_mag = rng.gen_range(4.0..12.0);
        Identity {
            shape,
            skin: [r, g, b],
            texture,
            lines,
            palm_temp: rng.gen_range(32.5..35.0),
            fingertip_drop: rng.gen_range(1.5..4.5),
            finger_offsets,
            gradient: (g_mag * g_angle.cos(), g_mag * g_angle.sin()),
            heat_wave: (
                rng.gen_range(8.0..16.0),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.3..0.9),
            ),
        }
    }

    /// Skin colour at hand-local point `p`, before illumination.
    fn skin_at(&self, p: Vec2) -> [f64; 3] {
        let mut m = 1.0;
        for &(freq, dir, phase, amp) in &self.texture {
            let (s, c) = dir.sin_cos();
            m += amp * (2.0 * PI * freq * (c * p.0 + s * p.1) + phase).sin();
        }
        let (rx, ry) = self.shape.palm;
        if (p.0 / rx).powi(2) + (p.1 / ry).powi(2) <= 1.0 {
            for &(slope, offset, bend) in &self.lines {
                let curve = offset + slope * p.0 + bend * p.0 * p.0;
                if (p.1 - curve).abs() < 0.012 {
                    m -= 0.18;
                }
            }
        }
        self.skin.map(|c| c * m)
    }

    fn temp_at(&self, p: Vec2, region: Region) -> f64 {
        let (freq, dir, phase, amp) = self.heat_wave;
        let (s, c) = dir.sin_cos();
        let wave = amp * (2.0 * PI * freq * (c * p.0 + s * p.1) + phase).sin();
        let base = self.palm_temp + self.gradient.0 * p.0 + self.gradient.1 * p.1 + wave;
        match region {
            Region::Palm => base,
            Region::Finger(i, t) => base - self.fingertip_drop * t + self.finger_offsets[i],
            Region::Wrist => base - 1.0,
        }
    }
}

/// Deterministic pixel grid helpers.
struct Canvas {
    h: usize,
    w: usize,
}

impl Canvas {
    fn coords(&self) -> impl Iterator<Item = (usize, Vec2)> + '_ {
        (0..self.h * self.w).map(move |i| {
            let (y, x) = (i / self.w, i % self.w);
            (i, ((x as f64 + 0.5) / self.w as f64, (y as f64 + 0.5) / self.h as f64))
        })
    }

    fn blur(&self, field: &[f64], sigma: f64) -> Vec<f64> {
        let radius = (3.0 * sigma).ceil() as isize;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let norm: f64 = kernel.iter().sum();
        let pass = |src: &[f64], horizontal: bool| {
            let mut out = vec![0.0; src.len()];
            for y in 0..self.h {
                for x in 0..self.w {
                    let mut acc = 0.0;
                    for (k, wgt) in kernel.iter().enumerate() {
                        let d = k as isize - radius;
                        let (sx, sy) = if horizontal {
                            ((x as isize + d).clamp(0, self.w as isize - 1) as usize, y)
                        } else {
                            (x, (y as isize + d).clamp(0, self.h as isize - 1) as usize)
                        };
                        acc += wgt * src[sy * self.w + sx];
                    }
                    out[y * self.w + x] = acc / norm;
                }
            }
            out
        };
        pass(&pass(field, true), false)
    }
}

fn random_background(rng: &mut ChaCha8Rng) -> ([f64; 3], [f64; 3]) {
    let base = [
        rng.gen_range(0.05..0.9),
        rng.gen_range(0.05..0.9),
        rng.gen_range(0.05..0.9),
    ];
    let tilt = [
        rng.gen_range(-0.15..0.15),
        rng.gen_range(-0.15..0.15),
        rng.gen_range(-0.15..0.15),
    ];
    (base, tilt)
}

fn quantize_rgb(rgb: &[f64]) -> Vec<f64> {
    rgb.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round()).collect()
}

fn quantize_th(temps: &[f64]) -> Vec<f64> {
    temps
        .iter()
        .map(|t| (((t - TH_RANGE.0) / (TH_RANGE.1 - TH_RANGE.0)).clamp(0.0, 1.0) * 65535.0).round())
        .collect()
}

/// Warm region: more than halfway from ambient to the image's peak.
fn heat_mask(temps: &[f64], ambient: f64) -> Vec<bool> {
    let peak = temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = ambient + 0.5 * (peak - ambient);
    temps.iter().map(|&t| t > cut).collect()
}

/// Hot pillow / cold compress sessions rescale the hand's excess warmth.
fn session_factor(session: usize) -> f64 {
    match session % 3 {
        0 => 1.0,
        1 => 1.1,
        _ => 0.9,
    }
}

struct Rendered {
    rgb: Vec<f64>,
    temps: Vec<f64>,
    silhouette: Vec<bool>,
    ambient: f64,
}

fn render_real(id: &Identity, canvas: &Canvas, session: usize, rng: &mut ChaCha8Rng) -> Rendered {
    let pose = Pose::sample(rng);
    let (bg, tilt) = random_background(rng);
    let gain = rng.gen_range(0.85..1.1);
    let ambient = AMBIENT + rng.gen_range(-0.4..0.4);
    let factor = session_factor(session);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");

    let n = canvas.h * canvas.w;
    let mut rgb = vec![0.0; n * 3];
    let mut temps = vec![0.0; n];
    let mut silhouette = vec![false; n];
    for (i, (u, v)) in canvas.coords() {
        let local = pose.to_local((u, v));
        match id.shape.region(local) {
            Some(region) => {
                silhouette[i] = true;
                let skin = id.skin_at(local);
                for c in 0..3 {
                    rgb[i * 3 + c] = skin[c] * gain;
                }
                temps[i] = ambient + factor * (id.temp_at(local, region) - ambient);
            }
            None => {
                for c in 0..3 {
                    rgb[i * 3 + c] = bg[c] + tilt[c] * (v - 0.5);
                }
                temps[i] = ambient + 0.6 * (v - 0.5);
            }
        }
    }
    let mut temps = canvas.blur(&temps, 0.8);
    for t in &mut temps {
        *t += 0.08 * noise.sample(rng);
    }
    for c in &mut rgb {
        *c += 0.02 * noise.sample(rng);
    }
    Rendered {
        rgb,
        temps,
        silhouette,
        ambient,
    }
}

fn render_fake(id: &Identity, canvas: &Canvas, rng: &mut ChaCha8Rng) -> Rendered {
    let pose = Pose::sample(rng);
    let (bg, tilt) = random_background(rng);
    let gain = rng.gen_range(0.85..1.1);
    let ambient = AMBIENT + rng.gen_range(-0.4..0.4);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");

    // the paper sheet, possibly larger than the frame
    let paper_center = (
        pose.center.0 + rng.gen_range(-0.05..0.05),
        pose.center.1 - 0.1 + rng.gen_range(-0.05..0.05),
    );
    let paper_half = (rng.gen_range(0.3..0.6), rng.gen_range(0.38..0.7));
    let paper_white = rng.gen_range(0.85..0.97);
    let flatten = rng.gen_range(0.5..0.7);
    let dot_period = rng.gen_range(2.2..3.2);
    let dot_amp = rng.gen_range(0.04..0.08);
    let paper_warm = rng.gen_range(0.0..0.1);

    // the attacker's hand behind the sheet
    let offset_dir: f64 = rng.gen_range(0.0..2.0 * PI);
    let offset_len = rng.gen_range(0.08..0.14);
    let blob_center = (
        pose.center.0 + offset_len * offset_dir.cos(),
        pose.center.1 - 0.05 + offset_len * offset_dir.sin(),
    );
    let blob_radii = (rng.gen_range(0.072..0.12), rng.gen_range(0.096..0.156));
    let blob_angle: f64 = rng.gen_range(-0.6..0.6);
    let blob_excess = rng.gen_range(0.3..0.5) * (id.palm_temp - ambient);

    let n = canvas.h * canvas.w;
    let mut rgb = vec![0.0; n * 3];
    let mut temps = vec![0.0; n];
    let mut silhouette = vec![false; n];
    let edge_u = 1.0 / canvas.w as f64;
    let edge_v = 1.0 / canvas.h as f64;
    for (i, (u, v)) in canvas.coords() {
        let du = (u - paper_center.0).abs();
        let dv = (v - paper_center.1).abs();
        let on_paper = du <= paper_half.0 && dv <= paper_half.1;
        let local = pose.to_local((u, v));
        let (x, y) = (i % canvas.w, i / canvas.w);
        if on_paper {
            let ink = match id.shape.region(local) {
                Some(_) => {
                    silhouette[i] = true;
                    id.skin_at(local)
                }
                None => [1.0; 3],
            };
            let dots =
                1.0 + dot_amp * (2.0 * PI * x as f64 / dot_period).cos() * (2.0 * PI * y as f64 / dot_period).cos();
            let border = paper_half.0 - du < edge_u || paper_half.1 - dv < edge_v;
            let gray = (ink[0] + ink[1] + ink[2]) / 3.0;
            for c in 0..3 {
                let printed = 0.8 * ink[c] + 0.2 * gray;
                let mut val = paper_white * (1.0 - flatten + flatten * printed) * dots * gain;
                if border {
                    val *= 0.8;
                }
                rgb[i * 3 + c] = val;
            }
            temps[i] = ambient + paper_warm;
        } else {
            for c in 0..3 {
                rgb[i * 3 + c] = bg[c] + tilt[c] * (v - 0.5);
            }
            temps[i] = ambient + 0.6 * (v - 0.5);
        }
        let (bx, by) = (u - blob_center.0, v - blob_center.1);
        let (s, c) = blob_angle.sin_cos();
        let (lx, ly) = (c * bx + s * by, -s * bx + c * by);
        if (lx / blob_radii.0).powi(2) + (ly / blob_radii.1).powi(2) <= 1.0 {
            temps[i] += blob_excess;
        }
    }
    let mut temps = canvas.blur(&temps, 3.0);
    for t in &mut temps {
        *t += 0.08 * noise.sample(rng);
    }
    for c in &mut rgb {
        *c += 0.02 * noise.sample(rng);
    }
    Rendered {
        rgb,
        temps,
        silhouette,
        ambient,
    }
}

fn hand_code(side: HandSide) -> &'static str {
    match side {
        HandSide::Left => "L",
        HandSide::Right => "R",
    }
}

/// Generates the dataset along with per-pair ground-truth masks.
pub fn generate_with_truth(p: &SyntheticParams) -> Result<(Dataset, Vec<GroundTruth>)> {
    p.validate()?;
    let (h, w) = p.image_size;
    let canvas = Canvas { h, w };
    let mut samples = Vec::new();
    let mut truth = Vec::new();
    let mut class_id = 0usize;

    for subject in 0..p.num_subjects as u32 {
        for &side in p.hands() {
            let side_tag = side as u64;
            let mut id_rng = seeding::rng(p.rng_seed, &[1, subject as u64, side_tag]);
            let identity = Identity::sample(&mut id_rng, side);
            let hand = hand_code(side);

            let mut push_pair = |pair_id: String,
                                 authenticity: Authenticity,
                                 session: usize,
                                 r: Rendered,
                                 class: Option<usize>,
                                 source: Option<String>,
                                 samples: &mut Vec<Sample>|
             -> Result<()> {
                for (modality, data) in [
                    (Modality::Rgb, quantize_rgb(&r.rgb)),
                    (Modality::Th, quantize_th(&r.temps)),
                ] {
                    samples.push(Sample {
                        sample_id: format!("{pair_id}_{}", modality.name().to_lowercase()),
                        subject_id: subject,
                        hand_side: side,
                        modality,
                        authenticity,
                        session: session as u32,
                        class_id: class,
                        pair_id: pair_id.clone(),
                        image: Tensor::new(vec![h, w, modality.channels()], data)?,
                    });
                }
                truth.push(GroundTruth {
                    pair_id,
                    authenticity,
                    source_pair_id: source,
                    heat: heat_mask(&r.temps, r.ambient),
                    silhouette: r.silhouette,
                });
                Ok(())
            };

            for k in 0..p.images_per_class_per_modality {
                let mut rng = seeding::rng(p.rng_seed, &[2, subject as u64, side_tag, k as u64]);
                let session = k % p.sessions;
                let r = render_real(&identity, &canvas, session, &mut rng);
                let pair_id = format!("s{subject:03}{hand}_real_{k:03}");
                push_pair(
                    pair_id,
                    Authenticity::Real,
                    session,
                    r,
                    Some(class_id),
                    None,
                    &mut samples,
                )?;
            }
            for k in 0..p.fake_images_per_class {
                let mut rng = seeding::rng(p.rng_seed, &[3, subject as u64, side_tag, k as u64]);
                let r = render_fake(&identity, &canvas, &mut rng);
                let source = k % p.images_per_class_per_modality;
                let pair_id = format!("s{subject:03}{hand}_fake_{k:03}");
                push_pair(
                    pair_id,
                    Authenticity::Fake,
                    k % p.sessions,
                    r,
                    None,
                    Some(format!("s{subject:03}{hand}_real_{source:03}")),
                    &mut samples,
                )?;
            }
            class_id += 1;
        }
    }
    Ok((Dataset::new(samples)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticParams {
        SyntheticParams {
            num_subjects: 3,
            images_per_class_per_modality: 3,
            rng_seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn class_and_sample_counts() {
        let d = generate_synthetic_dataset(&small()).unwrap();
        assert_eq!(d.num_classes(), 6);
        assert_eq!(d.count(Modality::Rgb, Authenticity::Real), 18);
        assert_eq!(d.count(Modality::Th, Authenticity::Fake), 12);
    }

    #[test]
    fn single_hand_halves_the_classes() {
        let p = SyntheticParams {
            both_hands: false,
            ..small()
        };
        assert_eq!(generate_synthetic_dataset(&p).unwrap().num_classes(), 3);
    }

    #[test]
    fn rejects_bad_params() {
        let tiny = SyntheticParams {
            image_size: (16, 64),
            ..small()
        };
        assert!(matches!(generate_synthetic_dataset(&tiny), Err(Error::Parameter(_))));
        let lonely = SyntheticParams {
            num_subjects: 1,
            ..small()
        };
        assert!(generate_synthetic_dataset(&lonely).is_err());
    }

    #[test]
    fn blur_preserves_constants() {
        let canvas = Canvas { h: 8, w: 9 };
        let out = canvas.blur(&[3.5; 72], 1.5);
        assert!(out.iter().all(|v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn iou_of_identical_and_disjoint_masks() {
        assert_eq!(iou(&[true, false, true], &[true, false, true]), 1.0);
        assert_eq!(iou(&[true, false], &[false, true]), 0.0);
        assert_eq!(iou(&[false], &[false]), 0.0);
    }
}
