//! Grayscale image input: PGM (P2 plain, P5 raw) and CSV integer grids.

use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_CSV_MAX_VALUE: u32 = 255;

/// Row-major integer grid with its declared maximum value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    width: usize,
    height: usize,
    max_value: u32,
    pixels: Vec<u32>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, max_value: u32, pixels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dim("image must be at least 1x1"));
        }
        if max_value == 0 {
            return Err(Error::range("max value must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::dim(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some((i, p)) = pixels.iter().enumerate().find(|(_, &p)| p > max_value) {
            return Err(Error::range(format!(
                "pixel {i} value {p} exceeds max value {max_value}"
            )));
        }
        Ok(Self {
            width,
            height,
            max_value,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_value(&self) -> u32 {
        self.max_value
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }
}

/// Pixel intensities scaled into `[0, 1]`, with a note on where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub source: String,
}

/// Row-major flattening with every pixel divided by the max value.
pub fn to_feature_vector(img: &RawImage, source: impl Into<String>) -> FeatureVector {
    let max = img.max_value as f64;
    FeatureVector {
        values: img
            .pixels
            .iter()
            .map(|&p| (p as f64 / max).clamp(0.0, 1.0))
            .collect(),
        source: source.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageReadOptions {
    /// Max value for CSV grids, which carry none of their own.
    pub csv_max_value: u32,
}

impl Default for ImageReadOptions {
    fn default() -> Self {
        Self {
            csv_max_value: DEFAULT_CSV_MAX_VALUE,
        }
    }
}

pub fn load_image(path: impl AsRef<Path>, options: &ImageReadOptions) -> Result<RawImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_image(&bytes, options)
}

/// Sniffs the content: `P2`/`P5` magic for PGM, digits for CSV.
pub fn parse_image(bytes: &[u8], options: &ImageReadOptions) -> Result<RawImage> {
    match bytes {
        [b'P', b'2' | b'5', ..] => parse_pgm(bytes),
        [b'P', c, ..] if c.is_ascii_digit() => Err(Error::Format(format!(
            "Netpbm P{} is not a grayscale PGM",
            *c as char
        ))),
        _ => {
            let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
            match first {
                Some(b) if b.is_ascii_digit() || *b == b'+' => {
                    parse_csv(bytes, options.csv_max_value)
                }
                Some(_) => Err(Error::Format(
                    "expected a PGM (P2/P5) or CSV grid".to_owned(),
                )),
                None => Err(Error::parse(0, "empty input")),
            }
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn unsigned(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if start >= self.bytes.len() {
                Error::parse(start, format!("truncated input: missing {what}"))
            } else {
                Error::parse(start, format!("expected {what}"))
            });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u32>()
            .map_err(|_| Error::parse(start, format!("{what} {text} is too large")))
    }
}

/// Parses a single PGM image. Trailing bytes after the raster are ignored.
pub fn parse_pgm(bytes: &[u8]) -> Result<RawImage> {
    let raw = match bytes {
        [b'P', b'2', ..] => false,
        [b'P', b'5', ..] => true,
        _ => return Err(Error::Format("missing P2/P5 magic number".to_owned())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if cur.pos < bytes.len() && !bytes[cur.pos].is_ascii_whitespace() && bytes[cur.pos] != b'#' {
        return Err(Error::parse(
            cur.pos,
            "expected whitespace after magic number",
        ));
    }
    let width = cur.unsigned("width")? as usize;
    let height = cur.unsigned("height")? as usize;
    let maxval_at = cur.pos;
    let max_value = cur.unsigned("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(maxval_at, "width and height must be positive"));
    }
    if max_value == 0 || max_value > 65535 {
        return Err(Error::parse(
            maxval_at,
            format!("maxval {max_value} outside 1..=65535"),
        ));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::parse(maxval_at, "image dimensions overflow"))?;

    let mut pixels = Vec::with_capacity(count);
    if raw {
        // Exactly one whitespace byte separates maxval from the raster.
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return Err(Error::parse(cur.pos, "expected whitespace after maxval")),
            None => return Err(Error::parse(cur.pos, "truncated input: missing raster")),
        }
        let sample_bytes = if max_value < 256 { 1 } else { 2 };
        let needed = count * sample_bytes;
        let raster = bytes.get(cur.pos..cur.pos + needed).ok_or_else(|| {
            Error::parse(
                bytes.len(),
                format!(
                    "truncated raster: need {needed} bytes, have {}",
                    bytes.len() - cur.pos
                ),
            )
        })?;
        for (i, chunk) in raster.chunks_exact(sample_bytes).enumerate() {
            let v = match chunk {
                [b] => *b as u32,
                [hi, lo] => u16::from_be_bytes([*hi, *lo]) as u32,
                _ => unreachable!(),
            };
            if v > max_value {
                return Err(Error::parse(
                    cur.pos + i * sample_bytes,
                    format!("sample {v} exceeds maxval {max_value}"),
                ));
            }
            pixels.push(v);
        }
    } else {
        for _ in 0..count {
            cur.skip_whitespace_and_comments();
            let at = cur.pos;
            let v = cur.unsigned("pixel value")?;
            if v > max_value {
                return Err(Error::parse(
                    at,
                    format!("sample {v} exceeds maxval {max_value}"),
                ));
            }
            pixels.push(v);
        }
    }
    RawImage::new(width, height, max_value, pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    /// P2
    Plain,
    /// P5
    Raw,
}

pub fn write_pgm(img: &RawImage, encoding: PgmEncoding) -> Vec<u8> {
    let magic = match encoding {
        PgmEncoding::Plain => "P2",
        PgmEncoding::Raw => "P5",
    };
    let mut out =
        format!("{magic}\n{} {}\n{}\n", img.width, img.height, img.max_value).into_bytes();
    match encoding {
        PgmEncoding::Plain => {
            for row in img.pixels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(u32::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmEncoding::Raw => {
            for &p in &img.pixels {
                if img.max_value < 256 {
                    out.push(p as u8);
                } else {
                    out.extend_from_slice(&(p as u16).to_be_bytes());
                }
            }
        }
    }
    out
}

/// Comma-separated unsigned integers, one image row per line. Blank lines are skipped.
pub fn parse_csv(bytes: &[u8], max_value: u32) -> Result<RawImage> {
    if max_value == 0 {
        return Err(Error::range("max value must be positive"));
    }
    let text =
        std::str::from_utf8(bytes).map_err(|e| Error::parse(e.valid_up_to(), "invalid UTF-8"))?;
    let mut width = None;
    let mut rows = 0;
    let mut pixels = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let line_start = offset;
        offset += line.len();
        let body = line.trim_end_matches(['\n', '\r']);
        if body.trim().is_empty() {
            continue;
        }
        let mut field_start = line_start;
        let mut count = 0;
        for field in body.split(',') {
            let trimmed = field.trim();
            let lead = field.len() - field.trim_start().len();
            let at = field_start + lead;
            let v: u32 = trimmed
                .parse()
                .map_err(|_| Error::parse(at, format!("invalid pixel value {trimmed:?}")))?;
            if v > max_value {
                return Err(Error::parse(
                    at,
                    format!("pixel {v} exceeds max value {max_value}"),
                ));
            }
            pixels.push(v);
            count += 1;
            field_start += field.len() + 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::parse(
                    line_start,
                    format!("row {rows} has {count} values, expected {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::parse(0, "no rows"))?;
    RawImage::new(width, rows, max_value, pixels)
}
