use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::ExtractError;
use crate::types::PixelPoint;

/// Arithmetic mean of the point coordinates.
pub fn gravity_center(points: &[PixelPoint]) -> Option<(f64, f64)> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + f64::from(p.x), sy + f64::from(p.y)));
    Some((sx / n, sy / n))
}

struct Polar {
    theta: f64,
    r2: f64,
    point: PixelPoint,
}

/// The two open-curve endpoints: the pair of angularly adjacent points
/// (around the gravity centre) enclosing the widest empty sector.
///
/// Returns `(lower, upper)` where `lower` bounds the gap on its smaller-angle
/// side. Points sharing an angle are swept as one direction, represented by
/// the one farthest from the centre (then the smallest point). Points lying
/// exactly on the centre do not take part.
pub fn find_extremities(points: &[PixelPoint]) -> Result<(PixelPoint, PixelPoint), ExtractError> {
    let (gx, gy) = gravity_center(points).ok_or(ExtractError::EmptyInput)?;
    let mut polar: Vec<Polar> = points
        .iter()
        .filter_map(|&point| {
            let dx = f64::from(point.x) - gx;
            let dy = f64::from(point.y) - gy;
            (dx != 0.0 || dy != 0.0).then(|| Polar {
                theta: libm::atan2(dy, dx),
                r2: dx * dx + dy * dy,
                point,
            })
        })
        .collect();
    polar.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.point.cmp(&b.point)));

    // one representative per distinct angle
    let mut dirs: Vec<&Polar> = Vec::with_capacity(polar.len());
    for cur in &polar {
        match dirs.last_mut() {
            Some(rep) if rep.theta == cur.theta => {
                if cur.r2 > rep.r2 {
                    *rep = cur;
                }
            }
            _ => dirs.push(cur),
        }
    }
    if dirs.len() < 2 {
        return Err(ExtractError::DegenerateGeometry);
    }

    let n = dirs.len();
    let mut best = (n - 1, dirs[0].theta + TAU - dirs[n - 1].theta);
    for i in 0..n - 1 {
        let gap = dirs[i + 1].theta - dirs[i].theta;
        if gap > best.1 {
            best = (i, gap);
        }
    }
    let lo = best.0;
    Ok((dirs[lo].point, dirs[(lo + 1) % n].point))
}
