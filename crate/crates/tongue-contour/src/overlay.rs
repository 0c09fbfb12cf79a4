//! Colour overlays of contours on a grayscale frame for visual QC.

use thiserror::Error;
use tongue_contour_core::{Contour, GrayImage, PixelPoint};

use crate::netpbm::RgbImage;

pub const PREDICTED: [u8; 3] = [255, 0, 0];
pub const TRUTH: [u8; 3] = [0, 0, 255];
pub const BOTH: [u8; 3] = [255, 0, 255];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{layer} contour point {point} lies outside the {width}x{height} image")]
pub struct OverlayError {
    pub layer: &'static str,
    pub point: PixelPoint,
    pub width: usize,
    pub height: usize,
}

/// Paints contour points over the image: predicted red, truth blue, both purple.
pub fn overlay(image: &GrayImage, truth: Option<&Contour>, predicted: Option<&Contour>) -> Result<RgbImage, OverlayError> {
    let (w, h) = image.dims();
    let mut layer = vec![0u8; w * h];
    for (bit, name, contour) in [(1u8, "predicted", predicted), (2, "truth", truth)] {
        for &p in contour.map(Contour::points).unwrap_or_default() {
            if !image.contains(p) {
                return Err(OverlayError {
                    layer: name,
                    point: p,
                    width: w,
                    height: h,
                });
            }
            layer[p.y as usize * w + p.x as usize] |= bit;
        }
    }
    let mut out = RgbImage::from_gray(image);
    for (i, &bits) in layer.iter().enumerate() {
        let colour = match bits {
            1 => PREDICTED,
            2 => TRUTH,
            3 => BOTH,
            _ => continue,
        };
        out.set(i % w, i / w, colour);
    }
    Ok(out)
}
