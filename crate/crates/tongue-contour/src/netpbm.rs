//! Binary Netpbm rasters: PGM (`P5`, 8- and 16-bit) and PPM (`P6`, 8-bit).
//!
//! Headers are written as `P5\n{w} {h}\n{maxval}\n`. The reader accepts any
//! whitespace and `#` comments between header tokens and exactly one
//! whitespace byte after the maxval. 16-bit samples are big-endian.

use thiserror::Error;
use tongue_contour_core::{BinaryMask, GrayImage, Grid, ProbMap};

const PROB_MAX: f64 = 65535.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct FormatError {
    pub offset: usize,
    pub kind: FormatErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatErrorKind {
    #[error("bad magic number, expected {0}")]
    Magic(&'static str),
    #[error("malformed header")]
    Header,
    #[error("image has a zero dimension")]
    ZeroDimension,
    #[error("unsupported maxval {0}")]
    Maxval(u32),
    #[error("payload truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
}

/// A decoded PGM: 8-bit images stay gray, 16-bit ones become probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum Pgm {
    Gray(GrayImage),
    Prob(ProbMap),
}

impl Pgm {
    /// 8-bit images are scaled by 1/255.
    pub fn into_prob(self) -> ProbMap {
        match self {
            Pgm::Prob(p) => p,
            Pgm::Gray(g) => ProbMap::from_grid(g.map(|v| f64::from(v) / 255.0))
                .expect("v/255 lies in [0, 1]"),
        }
    }

    /// 16-bit maps are quantized to 8 bits.
    pub fn into_gray(self) -> GrayImage {
        match self {
            Pgm::Gray(g) => g,
            Pgm::Prob(p) => p.grid().map(|v| (v * 255.0).round() as u8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Option<Self> {
        (width > 0 && height > 0 && data.len() == width * height).then_some(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_gray(image: &GrayImage) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            data: image.data().iter().map(|&v| [v, v, v]).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> Option<[u8; 3]> {
        (x < self.width && y < self.height).then(|| self.data[y * self.width + x])
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) outside image");
        self.data[y * self.width + x] = rgb;
    }
}

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first payload byte.
    payload: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, kind: FormatErrorKind) -> FormatError {
        FormatError {
            offset: self.pos,
            kind,
        }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32, FormatError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(FormatErrorKind::Header));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| FormatError {
                offset: start,
                kind: FormatErrorKind::Header,
            })
    }
}

fn read_header(bytes: &[u8], magic: &'static str) -> Result<Header, FormatError> {
    if !bytes.starts_with(magic.as_bytes()) {
        return Err(FormatError {
            offset: 0,
            kind: FormatErrorKind::Magic(magic),
        });
    }
    let mut cur = Cursor { bytes, pos: 2 };
    let width_at = cur.pos;
    let width = cur.number()? as usize;
    let height = cur.number()? as usize;
    if width == 0 || height == 0 {
        return Err(FormatError {
            offset: width_at,
            kind: FormatErrorKind::ZeroDimension,
        });
    }
    cur.skip_space_and_comments();
    let maxval_at = cur.pos;
    let maxval = cur.number()?;
    if maxval != 255 && maxval != 65535 {
        return Err(FormatError {
            offset: maxval_at,
            kind: FormatErrorKind::Maxval(maxval),
        });
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(cur.err(FormatErrorKind::Header)),
    }
    Ok(Header {
        width,
        height,
        maxval,
        payload: cur.pos,
    })
}

fn payload<'a>(bytes: &'a [u8], header: &Header, bytes_per_pixel: usize) -> Result<&'a [u8], FormatError> {
    let need = header.width * header.height * bytes_per_pixel;
    let have = bytes.len() - header.payload;
    if have < need {
        return Err(FormatError {
            offset: bytes.len(),
            kind: FormatErrorKind::Truncated { need, have },
        });
    }
    Ok(&bytes[header.payload..header.payload + need])
}

/// Decodes a `P5` image. Bytes after the payload are ignored.
pub fn read_pgm(bytes: &[u8]) -> Result<Pgm, FormatError> {
    let header = read_header(bytes, "P5")?;
    let (w, h) = (header.width, header.height);
    if header.maxval == 255 {
        let data = payload(bytes, &header, 1)?.to_vec();
        return Ok(Pgm::Gray(Grid::new(w, h, data).expect("size checked")));
    }
    let values = payload(bytes, &header, 2)?
        .chunks_exact(2)
        .map(|b| f64::from(u16::from_be_bytes([b[0], b[1]])) / PROB_MAX)
        .collect();
    Ok(Pgm::Prob(ProbMap::new(w, h, values).expect("size checked, values in [0, 1]")))
}

fn header_bytes(magic: &str, width: usize, height: usize, maxval: u32) -> Vec<u8> {
    format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes()
}

pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = header_bytes("P5", image.width(), image.height(), 255);
    out.extend_from_slice(image.data());
    out
}

/// Quantizes each probability to `round(p * 65535)`.
pub fn write_prob_pgm(map: &ProbMap) -> Vec<u8> {
    let mut out = header_bytes("P5", map.width(), map.height(), 65535);
    out.reserve(map.values().len() * 2);
    for &v in map.values() {
        out.extend_from_slice(&quantize(v).to_be_bytes());
    }
    out
}

pub fn quantize(p: f64) -> u16 {
    (p * PROB_MAX).round() as u16
}

/// Mask pixels become 255, background 0.
pub fn write_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    write_pgm(&mask.map(|b| if b { 255 } else { 0 }))
}

pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage, FormatError> {
    let header = read_header(bytes, "P6")?;
    if header.maxval != 255 {
        return Err(FormatError {
            offset: header.payload - 1,
            kind: FormatErrorKind::Maxval(header.maxval),
        });
    }
    let data = payload(bytes, &header, 3)?
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(RgbImage::new(header.width, header.height, data).expect("size checked"))
}

pub fn write_ppm(image: &RgbImage) -> Vec<u8> {
    let mut out = header_bytes("P6", image.width, image.height, 255);
    out.extend(image.data.iter().flatten());
    out
}
