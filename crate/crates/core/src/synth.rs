//! Seeded synthetic ground truth and corrupted probability maps.
//!
//! Curves are quantized circular arcs. Corruption reproduces the defects
//! seen in real network output: gaps along the curve, small spurious
//! clusters away from it, blur and background noise.
//!
//! Streams: [`gen_curve`] draws from `SplitMix64::new(seed)`; [`corrupt`]
//! draws from `SplitMix64::new(seed ^ CORRUPT_STREAM)`, gaps first, then
//! spurs, then noise in row-major pixel order.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use crate::rasterize::bresenham;
use crate::rng::SplitMix64;
use crate::types::{BinaryMask, Contour, Grid, PixelPoint, ProbMap};

/// XOR-ed into the seed for the corruption stream.
pub const CORRUPT_STREAM: u64 = 0xA076_1D64_78BD_642F;

/// Free border (pixels) kept around generated curves.
const MARGIN: f64 = 4.0;
const MAX_SPUR_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynthParams {
    pub seed: u64,
    pub image_size: usize,
    pub blur_sigma: f64,
    pub gap_count: usize,
    pub gap_length_px: usize,
    pub spur_count: usize,
    pub spur_size_px: usize,
    pub spur_min_dist_px: f64,
    pub noise_amplitude: f64,
}

impl Default for SynthParams {
    /// 128x128, no corruption.
    fn default() -> Self {
        Self {
            seed: 0,
            image_size: 128,
            blur_sigma: 0.0,
            gap_count: 0,
            gap_length_px: 1,
            spur_count: 0,
            spur_size_px: 1,
            spur_min_dist_px: 15.0,
            noise_amplitude: 0.0,
        }
    }
}

impl SynthParams {
    /// Blur sigma 1, two 3-pixel gaps, one 5-pixel spur at least 15 pixels
    /// away, noise up to 0.2.
    pub fn corrupted(seed: u64) -> Self {
        Self {
            seed,
            blur_sigma: 1.0,
            gap_count: 2,
            gap_length_px: 3,
            spur_count: 1,
            spur_size_px: 5,
            spur_min_dist_px: 15.0,
            noise_amplitude: 0.2,
            ..Self::default()
        }
    }

    pub fn clean(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.image_size < 32 {
            return Err(SynthError::ImageTooSmall(self.image_size));
        }
        let bad = |name| Err(SynthError::InvalidParam(name));
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return bad("blur_sigma");
        }
        if self.gap_length_px < 1 {
            return bad("gap_length_px");
        }
        if self.spur_size_px < 1 {
            return bad("spur_size_px");
        }
        if !(self.spur_min_dist_px.is_finite() && self.spur_min_dist_px >= 0.0) {
            return bad("spur_min_dist_px");
        }
        if !(0.0..1.0).contains(&self.noise_amplitude) {
            return bad("noise_amplitude");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    ImageTooSmall(usize),
    InvalidParam(&'static str),
    /// The requested gaps do not fit on a curve of `curve_len` pixels.
    GapsTooLong { curve_len: usize },
    SpurPlacement,
    ShapeMismatch,
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::ImageTooSmall(s) => write!(f, "image_size must be >= 32, got {s}"),
            SynthError::InvalidParam(name) => write!(f, "invalid synth parameter `{name}`"),
            SynthError::GapsTooLong { curve_len } => {
                write!(f, "gaps do not fit on a {curve_len}-pixel curve")
            }
            SynthError::SpurPlacement => f.write_str("could not place spurious cluster"),
            SynthError::ShapeMismatch => f.write_str("mask does not match image_size or curve"),
        }
    }
}

impl core::error::Error for SynthError {}

/// Random open arc: radius in `[0.25, 0.45) * size`, angular span in
/// `[120, 300)` degrees, sampled at arc steps of at most one pixel and
/// placed uniformly among positions that keep a 4-pixel border. Draws are
/// repeated until the quantized curve spans at least half the image width.
pub fn gen_curve(params: &SynthParams) -> Result<Contour, SynthError> {
    params.validate()?;
    let size = params.image_size as f64;
    let mut rng = SplitMix64::new(params.seed);
    loop {
        let radius = rng.uniform(0.25 * size, 0.45 * size);
        let span = rng.uniform(120.0, 300.0) * PI / 180.0;
        let start = rng.uniform(0.0, TAU);
        let steps = libm::ceil(span * radius) as usize;
        let offsets: Vec<(f64, f64)> = (0..=steps)
            .map(|k| {
                let a = start + span * k as f64 / steps as f64;
                (radius * libm::cos(a), radius * libm::sin(a))
            })
            .collect();
        let (min_x, max_x) = bounds(offsets.iter().map(|o| o.0));
        let (min_y, max_y) = bounds(offsets.iter().map(|o| o.1));
        let cx_range = (MARGIN - min_x, size - 1.0 - MARGIN - max_x);
        let cy_range = (MARGIN - min_y, size - 1.0 - MARGIN - max_y);
        if cx_range.0 > cx_range.1 || cy_range.0 > cy_range.1 {
            continue;
        }
        let cx = rng.uniform(cx_range.0, cx_range.1);
        let cy = rng.uniform(cy_range.0, cy_range.1);

        let mut points: Vec<PixelPoint> = offsets
            .iter()
            .map(|&(dx, dy)| PixelPoint::new(libm::round(cx + dx) as u32, libm::round(cy + dy) as u32))
            .collect();
        points.dedup();
        let (qx0, qx1) = bounds(points.iter().map(|p| f64::from(p.x)));
        if qx1 - qx0 < size / 2.0 {
            continue;
        }
        if let Ok(contour) = Contour::new(points) {
            return Ok(contour);
        }
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Ordered pixel chain along a contour (segments rasterized, shared
/// endpoints once).
pub fn curve_pixels(curve: &Contour) -> Vec<PixelPoint> {
    let mut out: Vec<PixelPoint> = Vec::with_capacity(curve.len());
    for seg in curve.points().windows(2) {
        for p in bresenham(seg[0], seg[1]) {
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Discrete Gaussian on `[-ceil(3 sigma), ceil(3 sigma)]`, normalized to
/// sum 1.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma) as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| libm::exp(-((k * k) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable blur with zero padding, scaled by `1 / sum(k^2)` so that a
/// one-pixel diagonal line keeps its ridge at ~1 (axis-aligned lines come
/// out brighter and are clamped later).
fn blur(values: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let gain = 1.0 / kernel.iter().map(|k| k * k).sum::<f64>();

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sx = x as i64 + i as i64 - r;
                if sx >= 0 && (sx as usize) < w {
                    acc += k * values[y * w + sx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sy = y as i64 + i as i64 - r;
                if sy >= 0 && (sy as usize) < h {
                    acc += k * tmp[sy as usize * w + x];
                }
            }
            out[y * w + x] = acc * gain;
        }
    }
    out
}

/// A corrupted map together with the pixels each corruption touched.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptedMap {
    pub map: ProbMap,
    /// Curve pixels zeroed by the gaps, in curve order.
    pub gap_pixels: Vec<PixelPoint>,
    /// Pixels of the spurious clusters, set to 1 before blurring.
    pub spur_pixels: Vec<PixelPoint>,
}

/// Corrupts the ground-truth `mask` of `curve`: (1) cut gaps of
/// consecutive curve pixels, (2) add spurious clusters far from the curve,
/// (3) blur, (4) add uniform noise in `[0, noise_amplitude]`, (5) clamp to
/// `[0, 1]`.
///
/// Gaps never touch the first or last curve pixel and are separated by at
/// least one intact pixel.
pub fn corrupt(mask: &BinaryMask, curve: &Contour, params: &SynthParams) -> Result<CorruptedMap, SynthError> {
    params.validate()?;
    let (w, h) = mask.dims();
    if !curve.fits(w, h) {
        return Err(SynthError::ShapeMismatch);
    }
    let mut rng = SplitMix64::new(params.seed ^ CORRUPT_STREAM);
    let mut values: Vec<f64> = mask.data().iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
    let chain = curve_pixels(curve);

    let mut gap_pixels = Vec::new();
    if params.gap_count > 0 {
        let (gc, gl) = (params.gap_count, params.gap_length_px);
        let needed = 2 + gc * gl + (gc - 1);
        if chain.len() < needed {
            return Err(SynthError::GapsTooLong {
                curve_len: chain.len(),
            });
        }
        let free = (chain.len() - needed) as u64;
        let mut slack: Vec<usize> = (0..gc).map(|_| rng.below(free + 1) as usize).collect();
        slack.sort_unstable();
        for (k, s) in slack.into_iter().enumerate() {
            let start = 1 + s + k * (gl + 1);
            for &p in &chain[start..start + gl] {
                values[p.y as usize * w + p.x as usize] = 0.0;
                gap_pixels.push(p);
            }
        }
    }

    let mut spur_pixels = Vec::new();
    let min_d2 = params.spur_min_dist_px * params.spur_min_dist_px;
    let far_enough = |p: PixelPoint| chain.iter().all(|&c| p.dist_sq(c) as f64 >= min_d2);
    for _ in 0..params.spur_count {
        let mut placed = false;
        for _ in 0..MAX_SPUR_ATTEMPTS {
            let seed_px = PixelPoint::new(rng.below(w as u64) as u32, rng.below(h as u64) as u32);
            let cluster = grow_cluster(&mut rng, seed_px, params.spur_size_px, w, h);
            if cluster.iter().all(|&p| far_enough(p)) {
                for &p in &cluster {
                    values[p.y as usize * w + p.x as usize] = 1.0;
                }
                spur_pixels.extend(cluster);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SynthError::SpurPlacement);
        }
    }

    if params.blur_sigma > 0.0 {
        values = blur(&values, w, h, params.blur_sigma);
    }
    if params.noise_amplitude > 0.0 {
        for v in values.iter_mut() {
            *v += rng.uniform(0.0, params.noise_amplitude);
        }
    }
    for v in values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let map = ProbMap::from_grid(Grid::new(w, h, values).expect("dims unchanged"))
        .expect("values clamped to [0, 1]");
    Ok(CorruptedMap {
        map,
        gap_pixels,
        spur_pixels,
    })
}

/// Random 8-connected cluster grown from `seed` one pixel at a time.
fn grow_cluster(rng: &mut SplitMix64, seed: PixelPoint, size: usize, w: usize, h: usize) -> Vec<PixelPoint> {
    const STEPS: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];
    let mut cluster = vec![seed];
    // bounded: a cluster that cannot grow (tiny image corner) is returned short
    let mut budget = 64 * size;
    while cluster.len() < size && budget > 0 {
        budget -= 1;
        let from = cluster[rng.below(cluster.len() as u64) as usize];
        let (dx, dy) = STEPS[rng.below(8) as usize];
        let (nx, ny) = (i64::from(from.x) + dx, i64::from(from.y) + dy);
        if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
            continue;
        }
        let cand = PixelPoint::new(nx as u32, ny as u32);
        if !cluster.contains(&cand) {
            cluster.push(cand);
        }
    }
    cluster
}

/// Ground truth, its mask and the corrupted map for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub truth: Contour,
    pub mask: BinaryMask,
    pub corrupted: CorruptedMap,
}

pub fn generate(params: &SynthParams) -> Result<SynthSample, SynthError> {
    let truth = gen_curve(params)?;
    let mask = crate::rasterize::rasterize_contour(&truth, params.image_size, params.image_size)
        .map_err(|_| SynthError::ShapeMismatch)?;
    let corrupted = corrupt(&mask, &truth, params)?;
    Ok(SynthSample {
        truth,
        mask,
        corrupted,
    })
}
