//! 8-connected component labelling over sparse point sets and the
//! component-size outlier filter.

use alloc::vec;
use alloc::vec::Vec;

use super::{ExtractConfig, ExtractError};
use crate::types::PixelPoint;

const UNLABELED: u32 = u32::MAX;
const NO_POINT: u32 = u32::MAX;

/// Component index for every input point (same order as `points`), plus the
/// size of each component. Components are numbered in order of their first
/// point. Duplicate points share a label.
pub fn label_components(points: &[PixelPoint]) -> (Vec<u32>, Vec<usize>) {
    if points.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let min_x = points.iter().map(|p| p.x).min().unwrap_or(0);
    let min_y = points.iter().map(|p| p.y).min().unwrap_or(0);
    let max_x = points.iter().map(|p| p.x).max().unwrap_or(0);
    let max_y = points.iter().map(|p| p.y).max().unwrap_or(0);
    let w = (max_x - min_x + 1) as usize;
    let h = (max_y - min_y + 1) as usize;

    // bounding-box lookup from pixel to point index
    let mut lookup = vec![NO_POINT; w * h];
    let cell = |p: &PixelPoint| (p.y - min_y) as usize * w + (p.x - min_x) as usize;
    for (i, p) in points.iter().enumerate() {
        let c = cell(p);
        if lookup[c] == NO_POINT {
            lookup[c] = i as u32;
        }
    }

    let mut labels = vec![UNLABELED; points.len()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..points.len() {
        let canonical = lookup[cell(&points[start])] as usize;
        if canonical != start {
            continue;
        }
        if labels[start] != UNLABELED {
            continue;
        }
        let label = sizes.len() as u32;
        let mut size = 0;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (cx, cy) = ((points[i].x - min_x) as i64, (points[i].y - min_y) as i64);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = lookup[ny as usize * w + nx as usize];
                    if j != NO_POINT && labels[j as usize] == UNLABELED {
                        labels[j as usize] = label;
                        stack.push(j as usize);
                    }
                }
            }
        }
        sizes.push(size);
    }
    for i in 0..points.len() {
        if labels[i] == UNLABELED {
            labels[i] = labels[lookup[cell(&points[i])] as usize];
        }
    }
    (labels, sizes)
}

/// Drops every 8-connected component smaller than
/// `max(min_component_size, rel_component_size * largest)`. Components of
/// the largest size always survive. Input order is preserved.
pub fn filter_outliers(points: &[PixelPoint], config: &ExtractConfig) -> Result<Vec<PixelPoint>, ExtractError> {
    if points.is_empty() {
        return Err(ExtractError::EmptyInput);
    }
    let (labels, sizes) = label_components(points);
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let floor = (config.min_component_size as f64).max(config.rel_component_size * largest as f64);
    let keep: Vec<bool> = sizes
        .iter()
        .map(|&s| s == largest || s as f64 >= floor)
        .collect();
    Ok(points
        .iter()
        .zip(&labels)
        .filter(|(_, &l)| keep[l as usize])
        .map(|(p, _)| *p)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u32, y: u32) -> PixelPoint {
        PixelPoint::new(x, y)
    }

    #[test]
    fn isolated_speckle_removed() {
        let mut pts: Vec<PixelPoint> = (0..50).map(|x| p(x, 10)).collect();
        pts.push(p(25, 30));
        let out = filter_outliers(&pts, &ExtractConfig::default()).unwrap();
        assert_eq!(out.len(), 50);
        assert!(!out.contains(&p(25, 30)));
    }

    #[test]
    fn single_component_unchanged() {
        let pts: Vec<PixelPoint> = (0..10).map(|i| p(i, i)).collect();
        assert_eq!(filter_outliers(&pts, &ExtractConfig::default()).unwrap(), pts);
    }

    #[test]
    fn relative_floor() {
        // 100-pixel line and a 2x2 cluster: 4 < max(3, 0.05 * 100)
        let mut pts: Vec<PixelPoint> = (0..100).map(|x| p(x, 0)).collect();
        pts.extend([p(10, 20), p(11, 20), p(10, 21), p(11, 21)]);
        let out = filter_outliers(&pts, &ExtractConfig::default()).unwrap();
        assert_eq!(out.len(), 100);
    }

    #[test]
    fn largest_survives_high_floor() {
        let pts = vec![p(0, 0), p(1, 1), p(9, 9)];
        let cfg = ExtractConfig {
            min_component_size: 50,
            ..Default::default()
        };
        assert_eq!(filter_outliers(&pts, &cfg).unwrap(), vec![p(0, 0), p(1, 1)]);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(
            filter_outliers(&[], &ExtractConfig::default()),
            Err(ExtractError::EmptyInput)
        );
    }

    #[test]
    fn diagonal_touch_is_connected() {
        let (labels, sizes) = label_components(&[p(0, 0), p(1, 1), p(3, 3), p(3, 3)]);
        assert_eq!(labels, vec![0, 0, 1, 1]);
        assert_eq!(sizes, vec![2, 1]);
    }
}
