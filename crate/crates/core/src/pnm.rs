//! PGM/PPM reading and writing.
//!
//! Reads ASCII (`P2`, `P3`) and binary (`P5`, `P6`) files with any maxval up
//! to 65535. Writes binary 8-bit PGM only.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{EdgeMap, GrayImage, RgbImage};

/// A decoded Netpbm image.
#[derive(Debug, Clone, PartialEq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    /// Gray images pass through; color images go through [`crate::image::rgb_to_gray`].
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(c) => crate::image::rgb_to_gray(&c),
        }
    }
}

struct Header {
    ascii: bool,
    channels: usize,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first byte after the header.
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        // Non-UTF-8 tokens are reported lossily by the caller.
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .or(Some("\u{FFFD}"))
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::format("<eof>", format!("missing {what}")))?;
        tok.parse::<u32>()
            .map_err(|_| Error::format(tok, format!("{what} is not a non-negative integer")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur
        .token()
        .ok_or_else(|| Error::format("<eof>", "missing magic number"))?;
    let (ascii, channels) = match magic {
        "P2" => (true, 1),
        "P3" => (true, 3),
        "P5" => (false, 1),
        "P6" => (false, 3),
        other => {
            return Err(Error::format(
                other,
                "unsupported magic number (expected P2, P3, P5 or P6)",
            ))
        }
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 {
        return Err(Error::format(width.to_string(), "width must be positive"));
    }
    if height == 0 {
        return Err(Error::format(height.to_string(), "height must be positive"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(
            maxval.to_string(),
            "maxval must be in 1..=65535",
        ));
    }
    // Binary rasters start after exactly one whitespace byte.
    let data_start = if ascii {
        cur.pos
    } else {
        match bytes.get(cur.pos) {
            Some(c) if c.is_ascii_whitespace() => cur.pos + 1,
            Some(_) => {
                return Err(Error::format(
                    String::from_utf8_lossy(&bytes[cur.pos..(cur.pos + 1)]),
                    "expected whitespace after maxval",
                ))
            }
            None => cur.pos,
        }
    };
    Ok(Header {
        ascii,
        channels,
        width: width as usize,
        height: height as usize,
        maxval,
        data_start,
    })
}

fn read_samples(bytes: &[u8], h: &Header) -> Result<Vec<u32>> {
    let count = h.width * h.height * h.channels;
    let mut samples = Vec::with_capacity(count);
    if h.ascii {
        let mut cur = Cursor {
            bytes,
            pos: h.data_start,
        };
        while samples.len() < count {
            let Some(tok) = cur.token() else {
                return Err(Error::Truncated {
                    expected: count,
                    actual: samples.len(),
                    unit: "samples",
                });
            };
            let v = tok
                .parse::<u32>()
                .map_err(|_| Error::format(tok, "sample is not a non-negative integer"))?;
            if v > h.maxval {
                return Err(Error::format(
                    tok,
                    format!("sample exceeds maxval {}", h.maxval),
                ));
            }
            samples.push(v);
        }
    } else {
        let width = if h.maxval < 256 { 1 } else { 2 };
        let expected = count * width;
        let data = &bytes[h.data_start..];
        if data.len() < expected {
            return Err(Error::Truncated {
                expected,
                actual: data.len(),
                unit: "bytes",
            });
        }
        for chunk in data[..expected].chunks_exact(width) {
            let v = if width == 1 {
                chunk[0] as u32
            } else {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            };
            if v > h.maxval {
                return Err(Error::format(
                    v.to_string(),
                    format!("sample exceeds maxval {}", h.maxval),
                ));
            }
            samples.push(v);
        }
    }
    Ok(samples)
}

/// Decodes a PGM or PPM byte buffer. Sample `v` maps to `v / maxval`.
pub fn decode(bytes: &[u8]) -> Result<Image> {
    let header = parse_header(bytes)?;
    let samples = read_samples(bytes, &header)?;
    let scale = header.maxval as f64;
    if header.channels == 1 {
        let pixels = samples.iter().map(|&v| v as f64 / scale).collect();
        Ok(Image::Gray(GrayImage::new(
            header.width,
            header.height,
            pixels,
        )?))
    } else {
        let pixels = samples
            .chunks_exact(3)
            .map(|c| {
                [
                    c[0] as f64 / scale,
                    c[1] as f64 / scale,
                    c[2] as f64 / scale,
                ]
            })
            .collect();
        Ok(Image::Rgb(RgbImage::new(
            header.width,
            header.height,
            pixels,
        )?))
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Quantizes an intensity to 8 bits: clamp to `[0, 1]`, then round half up.
pub fn quantize(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

fn encode_pgm(width: usize, height: usize, samples: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(samples);
    out
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    encode_pgm(
        img.width(),
        img.height(),
        img.pixels().iter().map(|&v| quantize(v)),
    )
}

/// Edge pixels become 255, everything else 0.
pub fn encode_edges(map: &EdgeMap) -> Vec<u8> {
    encode_pgm(
        map.width(),
        map.height(),
        map.mask().iter().map(|&m| if m { 255 } else { 0 }),
    )
}

/// Writes `bytes` through a temporary file in the destination directory and
/// renames it into place, so a failed write never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_gray(img))
}

pub fn write_edges(map: &EdgeMap, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_edges(map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(bytes: &[u8]) -> GrayImage {
        match decode(bytes).unwrap() {
            Image::Gray(g) => g,
            Image::Rgb(_) => panic!("expected gray"),
        }
    }

    #[test]
    fn endpoint_samples() {
        assert_eq!(gray(b"P5\n2 1\n255\n\x00\xff").pixels(), &[0.0, 1.0]);
        assert_eq!(gray(b"P2\n2 1\n255\n0 255\n").pixels(), &[0.0, 1.0]);
        match decode(b"P6 1 1 255\n\xff\x00\x00").unwrap() {
            Image::Rgb(c) => assert_eq!(c.pixels(), &[[1.0, 0.0, 0.0]]),
            Image::Gray(_) => panic!("expected rgb"),
        }
        match decode(b"P3\n1 1\n255\n255 0 0").unwrap() {
            Image::Rgb(c) => assert_eq!(c.pixels(), &[[1.0, 0.0, 0.0]]),
            Image::Gray(_) => panic!("expected rgb"),
        }
    }

    #[test]
    fn mid_sample_and_sixteen_bit() {
        assert!((gray(b"P5 1 1 255 \x80").get(0, 0) - 128.0 / 255.0).abs() < 1e-15);
        assert!((gray(b"P5 1 1 255 \x80").get(0, 0) - 0.50196).abs() < 1e-5);
        let g = gray(b"P5\n2 1\n65535\n\xff\xff\x80\x00");
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(1, 0), 32768.0 / 65535.0);
    }

    #[test]
    fn comments_are_skipped() {
        let g = gray(b"P2\n# made by hand\n2 # width then height\n1\n255\n0\n# mid\n255\n");
        assert_eq!(g.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn malformed_header_names_token() {
        match decode(b"P7\n1 1\n255\n\x00") {
            Err(Error::Format { token, .. }) => assert_eq!(token, "P7"),
            other => panic!("unexpected {other:?}"),
        }
        match decode(b"P5\n1 x\n255\n\x00") {
            Err(Error::Format { token, .. }) => assert_eq!(token, "x"),
            other => panic!("unexpected {other:?}"),
        }
        match decode(b"P2\n1 1\n255\n300\n") {
            Err(Error::Format { token, .. }) => assert_eq!(token, "300"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(decode(b""), Err(Error::Format { .. })));
        assert!(matches!(decode(b"P5 0 1 255 "), Err(Error::Format { .. })));
    }

    #[test]
    fn truncation_reports_counts() {
        match decode(b"P5\n3 2\n255\n\x00\x01\x02") {
            Err(Error::Truncated {
                expected, actual, ..
            }) => assert_eq!((expected, actual), (6, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match decode(b"P6\n1 1\n65535\n\x00\x01") {
            Err(Error::Truncated {
                expected, actual, ..
            }) => assert_eq!((expected, actual), (6, 2)),
            other => panic!("unexpected {other:?}"),
        }
        match decode(b"P2\n2 2\n255\n1 2 3") {
            Err(Error::Truncated {
                expected, actual, ..
            }) => assert_eq!((expected, actual), (4, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_encoding() {
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(-3.0), 0);
        assert_eq!(quantize(7.0), 255);
        let edges = EdgeMap::new(2, 1, vec![true, false]).unwrap();
        assert_eq!(encode_edges(&edges), b"P5\n2 1\n255\n\xff\x00");
    }

    #[test]
    fn file_round_trip_and_io_context() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let img = GrayImage::new(2, 2, vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        write_gray(&img, &path).unwrap();
        let back = read_image(&path).unwrap().into_gray();
        assert_eq!(back.pixels(), &[0.0, 64.0 / 255.0, 128.0 / 255.0, 1.0]);

        let missing = dir.path().join("nope").join("y.pgm");
        match write_gray(&img, &missing) {
            Err(Error::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_image(dir.path().join("absent.pgm")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_within_half_quantum(
            (w, h, px) in (1usize..8, 1usize..8).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(0.0..=1.0f64, w * h))
            })
        ) {
            let img = GrayImage::new(w, h, px).unwrap();
            let back = decode(&encode_gray(&img)).unwrap().into_gray();
            for (a, b) in img.pixels().iter().zip(back.pixels()) {
                prop_assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
            }
        }
    }
}
