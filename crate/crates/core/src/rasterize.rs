//! Ground-truth masks, per-pixel class weights and the weighted binary
//! cross-entropy score.

use alloc::vec::Vec;

use crate::types::{BinaryMask, Contour, GridError, PixelPoint, ProbMap, WeightMap};

/// Probability clamp applied before taking logarithms.
pub const BCE_EPSILON: f64 = 1e-7;

/// Loss weights of the two pixel classes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossWeights {
    pub w_contour: f64,
    pub w_background: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            w_contour: 0.8,
            w_background: 0.2,
        }
    }
}

impl LossWeights {
    pub fn new(w_contour: f64, w_background: f64) -> Option<Self> {
        let ok = w_contour >= 0.0 && w_background >= 0.0 && (w_contour > 0.0 || w_background > 0.0);
        ok.then_some(Self {
            w_contour,
            w_background,
        })
    }

    pub fn for_label(&self, contour: bool) -> f64 {
        if contour {
            self.w_contour
        } else {
            self.w_background
        }
    }
}

/// Integer line from `a` to `b`, both endpoints included.
///
/// Steps one pixel along the major axis; the minor coordinate is the exact
/// line value rounded to nearest, with exact halves resolved toward `a`.
pub fn bresenham(a: PixelPoint, b: PixelPoint) -> Vec<PixelPoint> {
    let (x0, y0) = (i64::from(a.x), i64::from(a.y));
    let (x1, y1) = (i64::from(b.x), i64::from(b.y));
    let dx = (x1 - x0).abs();
    let dy = (y1 - y0).abs();
    let sx = if x1 >= x0 { 1 } else { -1 };
    let sy = if y1 >= y0 { 1 } else { -1 };

    let (major, minor) = if dx >= dy { (dx, dy) } else { (dy, dx) };
    let mut out = Vec::with_capacity(major as usize + 1);
    let (mut x, mut y) = (x0, y0);
    let mut err = 2 * minor - major;
    for _ in 0..=major {
        out.push(PixelPoint::new(x as u32, y as u32));
        if err > 0 {
            if dx >= dy {
                y += sy;
            } else {
                x += sx;
            }
            err -= 2 * major;
        }
        err += 2 * minor;
        if dx >= dy {
            x += sx;
        } else {
            y += sy;
        }
    }
    out
}

/// Draws every segment of the polyline into a `width` x `height` mask.
pub fn rasterize_contour(contour: &Contour, width: usize, height: usize) -> Result<BinaryMask, GridError> {
    let mut mask = BinaryMask::filled(width, height, false)?;
    if let Some(&bad) = contour.points().iter().find(|p| !mask.contains(**p)) {
        return Err(GridError::OutOfBounds {
            point: bad,
            width,
            height,
        });
    }
    for seg in contour.points().windows(2) {
        for p in bresenham(seg[0], seg[1]) {
            mask.set(p, true)?;
        }
    }
    Ok(mask)
}

pub fn weight_map(mask: &BinaryMask, weights: &LossWeights) -> WeightMap {
    mask.map(|label| weights.for_label(label))
}

/// Mean over all pixels of `w(y) * [-y ln p - (1 - y) ln(1 - p)]` with `p`
/// clamped to `[eps, 1 - eps]`.
pub fn weighted_bce(prob: &ProbMap, mask: &BinaryMask, weights: &LossWeights) -> Result<f64, GridError> {
    mask.ensure_same_shape(prob.grid())?;
    let n = mask.data().len() as f64;
    let total: f64 = prob
        .values()
        .iter()
        .zip(mask.data())
        .map(|(&p, &label)| {
            let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            let term = if label { -libm::log(p) } else { -libm::log(1.0 - p) };
            weights.for_label(label) * term
        })
        .sum();
    Ok(total / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn p(x: u32, y: u32) -> PixelPoint {
        PixelPoint::new(x, y)
    }

    /// Closed-form rasterization: for each step `t` along the major axis the
    /// minor offset is `t * d_minor / n` rounded half toward the start,
    /// i.e. `floor((2 t d_minor + n - 1) / (2n))`.
    fn oracle_line(a: PixelPoint, b: PixelPoint) -> Vec<PixelPoint> {
        let (x0, y0, x1, y1) = (a.x as i64, a.y as i64, b.x as i64, b.y as i64);
        let (dx, dy) = ((x1 - x0).abs(), (y1 - y0).abs());
        let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
        let n = dx.max(dy);
        if n == 0 {
            return vec![a];
        }
        let minor = dx.min(dy);
        (0..=n)
            .map(|t| {
                let off = (2 * t * minor + n - 1).div_euclid(2 * n);
                if dx >= dy {
                    p((x0 + sx * t) as u32, (y0 + sy * off) as u32)
                } else {
                    p((x0 + sx * off) as u32, (y0 + sy * t) as u32)
                }
            })
            .collect()
    }

    fn eight_connected_components(pts: &[PixelPoint]) -> usize {
        let set: BTreeSet<PixelPoint> = pts.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for &start in &set {
            if !seen.insert(start) {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (c.x as i64 + dx, c.y as i64 + dy);
                        if nx < 0 || ny < 0 {
                            continue;
                        }
                        let q = p(nx as u32, ny as u32);
                        if set.contains(&q) && seen.insert(q) {
                            stack.push(q);
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn horizontal_and_diagonal() {
        let c = Contour::new(vec![p(0, 0), p(3, 0)]).unwrap();
        let m = rasterize_contour(&c, 4, 1).unwrap();
        assert_eq!(m.count_ones(), 4);

        let c = Contour::new(vec![p(0, 0), p(2, 2)]).unwrap();
        let m = rasterize_contour(&c, 3, 3).unwrap();
        assert_eq!(m.ones(), vec![p(0, 0), p(1, 1), p(2, 2)]);
    }

    #[test]
    fn shallow_slope_matches_oracle() {
        let line = bresenham(p(0, 0), p(3, 1));
        assert_eq!(line, oracle_line(p(0, 0), p(3, 1)));
        assert_eq!(line, vec![p(0, 0), p(1, 0), p(2, 1), p(3, 1)]);
        let c = Contour::new(vec![p(0, 0), p(3, 1)]).unwrap();
        let m = rasterize_contour(&c, 4, 2).unwrap();
        assert_eq!(m.count_ones(), 4);
    }

    #[test]
    fn out_of_bounds_point() {
        let c = Contour::new(vec![p(0, 0), p(4, 0)]).unwrap();
        assert!(matches!(
            rasterize_contour(&c, 4, 1),
            Err(GridError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn weights_follow_labels() {
        let mask = BinaryMask::new(2, 1, vec![true, false]).unwrap();
        let w = weight_map(&mask, &LossWeights::default());
        assert_eq!(w.data(), &[0.8, 0.2]);
        let zeros = BinaryMask::filled(3, 2, false).unwrap();
        assert!(weight_map(&zeros, &LossWeights::default()).data().iter().all(|&v| v == 0.2));
        let ones = BinaryMask::filled(3, 2, true).unwrap();
        assert!(weight_map(&ones, &LossWeights::default()).data().iter().all(|&v| v == 0.8));
        assert!(LossWeights::new(0.0, 0.0).is_none());
        assert!(LossWeights::new(-1.0, 1.0).is_none());
    }

    #[test]
    fn bce_hand_values() {
        let mask = BinaryMask::new(2, 1, vec![true, false]).unwrap();
        let prob = ProbMap::new(2, 1, vec![0.5, 0.5]).unwrap();
        let loss = weighted_bce(&prob, &mask, &LossWeights::default()).unwrap();
        assert!((loss - 0.5 * core::f64::consts::LN_2).abs() < 1e-12);

        let perfect = ProbMap::from_mask(&mask);
        assert!(weighted_bce(&perfect, &mask, &LossWeights::default()).unwrap() <= 1e-6);

        let one = BinaryMask::new(1, 1, vec![true]).unwrap();
        let zero = ProbMap::new(1, 1, vec![0.0]).unwrap();
        let loss = weighted_bce(&zero, &one, &LossWeights::default()).unwrap();
        assert!((loss - 0.8 * -libm::log(1e-7)).abs() < 1e-9);
        assert!(loss.is_finite());

        let wrong = ProbMap::new(1, 2, vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            weighted_bce(&wrong, &mask, &LossWeights::default()),
            Err(GridError::ShapeMismatch { .. })
        ));
    }

    fn arb_polyline() -> impl Strategy<Value = Vec<PixelPoint>> {
        proptest::collection::vec((0u32..24, 0u32..24), 2..8).prop_map(|v| {
            let mut pts: Vec<PixelPoint> = v.into_iter().map(|(x, y)| p(x, y)).collect();
            pts.dedup();
            pts
        })
    }

    proptest! {
        #[test]
        fn line_matches_oracle(ax in 0u32..40, ay in 0u32..40, bx in 0u32..40, by in 0u32..40) {
            prop_assert_eq!(bresenham(p(ax, ay), p(bx, by)), oracle_line(p(ax, ay), p(bx, by)));
        }

        #[test]
        fn mask_is_one_component(pts in arb_polyline()) {
            let Ok(c) = Contour::new(pts.clone()) else { return Ok(()) };
            let m = rasterize_contour(&c, 24, 24).unwrap();
            let ones = m.ones();
            prop_assert_eq!(eight_connected_components(&ones), 1);
            for q in c.points() {
                prop_assert!(m.get(*q).unwrap());
            }
        }

        #[test]
        fn bce_properties(vals in proptest::collection::vec(0.0f64..=1.0, 6),
                          labels in proptest::collection::vec(any::<bool>(), 6),
                          idx in 0usize..6, step in 0.0f64..1.0) {
            let mask = BinaryMask::new(3, 2, labels.clone()).unwrap();
            let prob = ProbMap::new(3, 2, vals.clone()).unwrap();
            let loss = weighted_bce(&prob, &mask, &LossWeights::default()).unwrap();
            prop_assert!(loss >= 0.0);

            let unit = LossWeights::new(1.0, 1.0).unwrap();
            let unweighted = weighted_bce(&prob, &mask, &unit).unwrap();
            let direct: f64 = vals.iter().zip(&labels).map(|(&v, &y)| {
                let v = v.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
                if y { -v.ln() } else { -(1.0 - v).ln() }
            }).sum::<f64>() / 6.0;
            prop_assert!((unweighted - direct).abs() <= 1e-12 * direct.max(1.0));

            // move one prediction away from its label
            let mut worse = vals.clone();
            worse[idx] = if labels[idx] { vals[idx] * step } else { vals[idx] + (1.0 - vals[idx]) * (1.0 - step) };
            let worse_map = ProbMap::new(3, 2, worse).unwrap();
            let worse_loss = weighted_bce(&worse_map, &mask, &LossWeights::default()).unwrap();
            prop_assert!(worse_loss >= loss);
        }
    }
}
