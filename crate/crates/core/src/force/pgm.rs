//! Reading and writing netpbm grayscale images (PGM, magic P2 and P5).
//!
//! Supports the common subset: `#` comments anywhere in the header,
//! maxval up to 255, ASCII samples for P2 and single-byte raw samples
//! for P5. Samples are stored as read; no rescaling happens here.

use thiserror::Error;

use super::{ForceError, IntensityGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PgmError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("maxval {0} not supported, expected 1..=255")]
    UnsupportedMaxval(u32),
    #[error("file ends before all {expected} samples were read")]
    TruncatedData { expected: usize },
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
}

impl From<ForceError> for PgmError {
    fn from(err: ForceError) -> Self {
        PgmError::MalformedHeader(err.to_string())
    }
}

/// Output flavor for [`write_pgm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// P2, ASCII samples.
    Ascii,
    /// P5, one raw byte per sample.
    Binary,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        let token = self
            .token()
            .ok_or_else(|| PgmError::MalformedHeader(format!("missing {what}")))?;
        let text = std::str::from_utf8(token)
            .map_err(|_| PgmError::MalformedHeader(format!("non-ASCII {what}")))?;
        text.parse()
            .map_err(|_| PgmError::MalformedHeader(format!("invalid {what}: {text:?}")))
    }
}

/// Parses a PGM image from raw bytes.
///
/// Sample (row, col) of the result is the file's pixel in reading order,
/// with row 0 the top image row.
///
/// # Errors
///
/// [`PgmError::MalformedHeader`] for an unknown magic, bad dimensions or
/// unparsable tokens; [`PgmError::UnsupportedMaxval`] for maxval outside
/// 1..=255; [`PgmError::TruncatedData`] when samples run out early;
/// [`PgmError::SampleOutOfRange`] when an ASCII sample exceeds maxval.
pub fn load_pgm(bytes: &[u8]) -> Result<IntensityGrid, PgmError> {
    let mut cursor = Cursor::new(bytes);
    let magic = cursor
        .token()
        .ok_or_else(|| PgmError::MalformedHeader("empty file".into()))?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        other => {
            let shown = String::from_utf8_lossy(other);
            return Err(PgmError::MalformedHeader(format!(
                "unrecognized magic {shown:?}"
            )));
        }
    };

    let width = cursor.number("width")? as usize;
    let height = cursor.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!(
            "zero image dimension {width}x{height}"
        )));
    }
    let maxval = cursor.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width * height;

    let samples = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        if cursor.pos >= bytes.len() || !bytes[cursor.pos].is_ascii_whitespace() {
            return Err(PgmError::MalformedHeader(
                "missing whitespace before binary raster".into(),
            ));
        }
        let start = cursor.pos + 1;
        if bytes.len() - start < expected {
            return Err(PgmError::TruncatedData { expected });
        }
        let raster = &bytes[start..start + expected];
        for &value in raster {
            if u32::from(value) > maxval {
                return Err(PgmError::SampleOutOfRange {
                    value: u32::from(value),
                    maxval,
                });
            }
        }
        raster.to_vec()
    } else {
        let mut samples = Vec::with_capacity(expected);
        for _ in 0..expected {
            let value = match cursor.token() {
                Some(token) => {
                    let text = std::str::from_utf8(token)
                        .map_err(|_| PgmError::MalformedHeader("non-ASCII sample".into()))?;
                    text.parse::<u32>().map_err(|_| {
                        PgmError::MalformedHeader(format!("invalid sample {text:?}"))
                    })?
                }
                None => return Err(PgmError::TruncatedData { expected }),
            };
            if value > maxval {
                return Err(PgmError::SampleOutOfRange {
                    value,
                    maxval,
                });
            }
            samples.push(value as u8);
        }
        samples
    };

    Ok(IntensityGrid::new(width, height, samples)?)
}

/// Serializes a grid as PGM with maxval 255.
pub fn write_pgm(grid: &IntensityGrid, format: PgmFormat) -> Vec<u8> {
    let header = format!(
        "{}\n{} {}\n255\n",
        match format {
            PgmFormat::Ascii => "P2",
            PgmFormat::Binary => "P5",
        },
        grid.width(),
        grid.height()
    );
    let mut out = header.into_bytes();
    match format {
        PgmFormat::Binary => out.extend_from_slice(grid.samples()),
        PgmFormat::Ascii => {
            for row in 0..grid.height() {
                let mut line = String::new();
                for col in 0..grid.width() {
                    if col > 0 {
                        line.push(' ');
                    }
                    line.push_str(&grid.get(row, col).to_string());
                }
                line.push('\n');
                out.extend_from_slice(line.as_bytes());
            }
        }
    }
    out
}
