//! Raster and geometry types shared by every stage.
//!
//! Coordinates are `(x = column, y = row)` with the origin at the top-left
//! pixel. All grids are stored row-major.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Pixel position on a grid. Ordering is lexicographic on `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PixelPoint {
    pub x: u32,
    pub y: u32,
}

impl PixelPoint {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn dist_sq(self, other: PixelPoint) -> u64 {
        let dx = i64::from(self.x) - i64::from(other.x);
        let dy = i64::from(self.y) - i64::from(other.y);
        (dx * dx + dy * dy) as u64
    }

    pub fn dist(self, other: PixelPoint) -> f64 {
        libm::sqrt(self.dist_sq(other) as f64)
    }
}

impl fmt::Display for PixelPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    ZeroDimension { width: usize, height: usize },
    BufferLength { expected: usize, actual: usize },
    OutOfBounds { point: PixelPoint, width: usize, height: usize },
    /// A probability outside `[0, 1]` (or NaN) at the given row-major index.
    ValueOutOfRange { index: usize },
    ShapeMismatch { expected: (usize, usize), actual: (usize, usize) },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::ZeroDimension { width, height } => {
                write!(f, "grid dimensions must be non-zero, got {width}x{height}")
            }
            GridError::BufferLength { expected, actual } => {
                write!(f, "buffer holds {actual} values, expected {expected}")
            }
            GridError::OutOfBounds { point, width, height } => {
                write!(f, "point {point} outside {width}x{height} grid")
            }
            GridError::ValueOutOfRange { index } => {
                write!(f, "probability at index {index} is outside [0, 1]")
            }
            GridError::ShapeMismatch { expected, actual } => write!(
                f,
                "shape mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
        }
    }
}

impl core::error::Error for GridError {}

/// Row-major 2-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit grayscale frame.
pub type GrayImage = Grid<u8>;
/// Per-pixel class labels; `true` marks contour pixels.
pub type BinaryMask = Grid<bool>;
/// Per-pixel loss weights.
pub type WeightMap = Grid<f64>;

impl<T: Copy> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::ZeroDimension { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(GridError::ZeroDimension { width, height })?;
        if data.len() != expected {
            return Err(GridError::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self, GridError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    pub fn index_of(&self, p: PixelPoint) -> Result<usize, GridError> {
        if self.contains(p) {
            Ok(p.y as usize * self.width + p.x as usize)
        } else {
            Err(GridError::OutOfBounds {
                point: p,
                width: self.width,
                height: self.height,
            })
        }
    }

    pub fn get(&self, p: PixelPoint) -> Result<T, GridError> {
        self.index_of(p).map(|i| self.data[i])
    }

    pub fn set(&mut self, p: PixelPoint, value: T) -> Result<(), GridError> {
        let i = self.index_of(p)?;
        self.data[i] = value;
        Ok(())
    }

    /// Point at a row-major index. The index must be in range.
    pub fn point_at(&self, index: usize) -> PixelPoint {
        PixelPoint::new((index % self.width) as u32, (index / self.width) as u32)
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn ensure_same_shape<U>(&self, other: &Grid<U>) -> Result<(), GridError> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(GridError::ShapeMismatch {
                expected: (self.width, self.height),
                actual: (other.width, other.height),
            })
        }
    }
}

impl Grid<bool> {
    /// Contour pixels in row-major order.
    pub fn ones(&self) -> Vec<PixelPoint> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| self.point_at(i))
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }
}

/// Per-pixel contour probabilities, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    grid: Grid<f64>,
}

impl ProbMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, GridError> {
        Self::from_grid(Grid::new(width, height, values)?)
    }

    pub fn from_grid(grid: Grid<f64>) -> Result<Self, GridError> {
        if let Some(index) = grid
            .data()
            .iter()
            .position(|v| !(0.0..=1.0).contains(v))
        {
            return Err(GridError::ValueOutOfRange { index });
        }
        Ok(Self { grid })
    }

    /// Embeds a mask as a map with values exactly 0.0 and 1.0.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            grid: mask.map(|v| if v { 1.0 } else { 0.0 }),
        }
    }

    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn values(&self) -> &[f64] {
        self.grid.data()
    }

    pub fn get(&self, p: PixelPoint) -> Result<f64, GridError> {
        self.grid.get(p)
    }

    pub fn set(&mut self, p: PixelPoint, value: f64) -> Result<(), GridError> {
        let i = self.grid.index_of(p)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(GridError::ValueOutOfRange { index: i });
        }
        self.grid.data[i] = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContourError {
    TooFewPoints(usize),
    /// Point at `index` repeats the point before it.
    ConsecutiveDuplicate { index: usize },
    Closed,
}

impl fmt::Display for ContourError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContourError::TooFewPoints(n) => {
                write!(f, "contour needs at least 2 points, got {n}")
            }
            ContourError::ConsecutiveDuplicate { index } => {
                write!(f, "point {index} duplicates its predecessor")
            }
            ContourError::Closed => f.write_str("contour is closed (first point equals last)"),
        }
    }
}

impl core::error::Error for ContourError {}

/// Ordered open polyline on the pixel grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contour {
    points: Vec<PixelPoint>,
}

impl Contour {
    pub fn new(points: Vec<PixelPoint>) -> Result<Self, ContourError> {
        if points.len() < 2 {
            return Err(ContourError::TooFewPoints(points.len()));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(ContourError::ConsecutiveDuplicate { index: i + 1 });
        }
        if points.first() == points.last() {
            return Err(ContourError::Closed);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[PixelPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<PixelPoint> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for the usual `len`/`is_empty` pairing.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> PixelPoint {
        self.points[0]
    }

    pub fn last(&self) -> PixelPoint {
        self.points[self.points.len() - 1]
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.points
            .iter()
            .all(|p| (p.x as usize) < width && (p.y as usize) < height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetaError {
    ZeroResolution,
    InvalidFov(f64),
}

impl fmt::Display for MetaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaError::ZeroResolution => f.write_str("acquisition resolution must be >= 1"),
            MetaError::InvalidFov(v) => write!(f, "field of view must be positive, got {v}"),
        }
    }
}

impl core::error::Error for MetaError {}

/// Millimetres per pixel for a square acquisition matrix.
pub fn pixel_spacing(fov_mm: f64, acq_resolution: u32) -> Result<f64, MetaError> {
    if acq_resolution == 0 {
        return Err(MetaError::ZeroResolution);
    }
    if !(fov_mm.is_finite() && fov_mm > 0.0) {
        return Err(MetaError::InvalidFov(fov_mm));
    }
    Ok(fov_mm / f64::from(acq_resolution))
}

/// Acquisition geometry. Spacing comes from the acquisition matrix, so it
/// survives cropping unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageMeta {
    pub fov_mm: f64,
    pub acq_resolution: u32,
    pub pixel_spacing_mm: f64,
}

impl ImageMeta {
    /// 19.2 cm field of view.
    pub const DEFAULT_FOV_MM: f64 = 192.0;
    /// 136x136 acquisition matrix.
    pub const DEFAULT_RESOLUTION: u32 = 136;

    pub fn new(fov_mm: f64, acq_resolution: u32) -> Result<Self, MetaError> {
        Ok(Self {
            fov_mm,
            acq_resolution,
            pixel_spacing_mm: pixel_spacing(fov_mm, acq_resolution)?,
        })
    }

    pub fn pixel_spacing(&self) -> f64 {
        self.pixel_spacing_mm
    }
}

impl Default for ImageMeta {
    fn default() -> Self {
        Self {
            fov_mm: Self::DEFAULT_FOV_MM,
            acq_resolution: Self::DEFAULT_RESOLUTION,
            pixel_spacing_mm: Self::DEFAULT_FOV_MM / Self::DEFAULT_RESOLUTION as f64,
        }
    }
}
