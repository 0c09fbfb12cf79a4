//! Frame preparation: cropping and histogram equalization.

use alloc::vec::Vec;
use core::fmt;

use crate::types::GrayImage;

/// Axis-aligned crop window in source pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CropRect {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CropError {
    pub rect: CropRect,
    pub image: (usize, usize),
}

impl fmt::Display for CropError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.rect;
        write!(
            f,
            "crop rect (x0={}, y0={}, {}x{}) does not fit in {}x{} image",
            r.x0, r.y0, r.width, r.height, self.image.0, self.image.1
        )
    }
}

impl core::error::Error for CropError {}

impl CropRect {
    pub const fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self {
            x0,
            y0,
            width,
            height,
        }
    }

    /// Window of the given size centred in a `src_w` x `src_h` image
    /// (136 -> 128 gives an offset of 4). Odd slack rounds toward the origin.
    pub fn centered(src_w: usize, src_h: usize, width: usize, height: usize) -> Result<Self, CropError> {
        let rect = Self::new(
            src_w.saturating_sub(width) / 2,
            src_h.saturating_sub(height) / 2,
            width,
            height,
        );
        rect.check(src_w, src_h)?;
        Ok(rect)
    }

    /// A window taken from inside this one, expressed in source coordinates.
    pub fn compose(&self, inner: &CropRect) -> CropRect {
        CropRect::new(self.x0 + inner.x0, self.y0 + inner.y0, inner.width, inner.height)
    }

    fn check(&self, src_w: usize, src_h: usize) -> Result<(), CropError> {
        let fits_x = self.x0.checked_add(self.width).is_some_and(|e| e <= src_w);
        let fits_y = self.y0.checked_add(self.height).is_some_and(|e| e <= src_h);
        if self.width == 0 || self.height == 0 || !fits_x || !fits_y {
            return Err(CropError {
                rect: *self,
                image: (src_w, src_h),
            });
        }
        Ok(())
    }
}

pub fn crop(image: &GrayImage, rect: &CropRect) -> Result<GrayImage, CropError> {
    rect.check(image.width(), image.height())?;
    let src = image.data();
    let mut out = Vec::with_capacity(rect.width * rect.height);
    for row in rect.y0..rect.y0 + rect.height {
        let start = row * image.width() + rect.x0;
        out.extend_from_slice(&src[start..start + rect.width]);
    }
    Ok(GrayImage::new(rect.width, rect.height, out).expect("crop extent validated"))
}

/// 256-entry level mapping used by [`equalize`].
///
/// `cdf_min` is the smallest non-zero cumulative count. A constant image
/// (`N == cdf_min`) maps every level to itself.
pub fn equalization_lut(image: &GrayImage) -> [u8; 256] {
    let mut hist = [0u64; 256];
    for &v in image.data() {
        hist[v as usize] += 1;
    }
    let n = image.data().len() as u64;
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (level, count) in hist.iter().enumerate() {
        acc += count;
        cdf[level] = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);

    let mut lut = [0u8; 256];
    if n == cdf_min {
        for (level, slot) in lut.iter_mut().enumerate() {
            *slot = level as u8;
        }
        return lut;
    }
    let denom = (n - cdf_min) as f64;
    for (level, slot) in lut.iter_mut().enumerate() {
        let c = cdf[level].saturating_sub(cdf_min) as f64;
        *slot = libm::round(c / denom * 255.0) as u8;
    }
    lut
}

pub fn equalize(image: &GrayImage) -> GrayImage {
    let lut = equalization_lut(image);
    image.map(|v| lut[v as usize])
}
