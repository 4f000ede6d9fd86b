//! Carriers: turning real payloads into bitstrings plus an eligibility mask
//! that confines the watermark to positions where a flipped bit goes
//! unnoticed.
//!
//! Two formats are supported. `raw` expands bytes big-endian and marks every
//! bit eligible. `pgm_lsb` reads a binary 8-bit PGM (`P5`, maxval 255) and
//! marks only each pixel's least-significant bit, so any watermark changes a
//! pixel by at most one grey level. The header and anything after the pixel
//! block are kept verbatim so that emitting an untouched payload reproduces
//! the input byte for byte.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierFormat {
    Raw,
    PgmLsb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierPayload {
    pub bits: Vec<bool>,
    pub eligibility_mask: Vec<bool>,
    pub format: CarrierFormat,
}

/// Geometry of an 8-bit greyscale image plus the bytes needed to rebuild
/// the file around its pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub width: usize,
    pub height: usize,
    pub max_value: u32,
    header: Vec<u8>,
    trailer: Vec<u8>,
}

impl ImageMeta {
    /// Metadata for a freshly built image with a canonical `P5` header.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader("zero image dimension".into()));
        }
        Ok(ImageMeta {
            width,
            height,
            max_value: 255,
            header: format!("P5\n{width} {height}\n255\n").into_bytes(),
            trailer: Vec::new(),
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).map(move |i| b & (0x80 >> i) != 0))
        .collect()
}

/// Packs MSB-first; a ragged tail is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| if b { acc | (0x80 >> i) } else { acc })
        })
        .collect()
}

pub fn ingest_raw(bytes: &[u8]) -> Result<CarrierPayload> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let bits = bytes_to_bits(bytes);
    Ok(CarrierPayload {
        eligibility_mask: vec![true; bits.len()],
        bits,
        format: CarrierFormat::Raw,
    })
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{what} out of range")))
    }
}

/// Reads a binary PGM and masks each pixel's least-significant bit.
pub fn ingest_pgm(bytes: &[u8]) -> Result<(CarrierPayload, ImageMeta)> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !bytes.starts_with(b"P5") {
        return Err(Error::MalformedHeader("expected magic P5".into()));
    }
    let mut cur = HeaderCursor { data: bytes, pos: 2 };
    if !cur.data.get(cur.pos).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
        return Err(Error::MalformedHeader("expected whitespace after magic".into()));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image dimension".into()));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::MalformedHeader("expected whitespace after maxval".into())),
    }
    let header_end = cur.pos;
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("image too large".into()))?;
    let available = bytes.len() - header_end;
    if available < expected {
        return Err(Error::TruncatedPixelData {
            expected,
            found: available,
        });
    }
    let pixels = &bytes[header_end..header_end + expected];
    let bits = bytes_to_bits(pixels);
    let eligibility_mask = (0..bits.len()).map(|i| i % 8 == 7).collect();
    let meta = ImageMeta {
        width,
        height,
        max_value: maxval,
        header: bytes[..header_end].to_vec(),
        trailer: bytes[header_end + expected..].to_vec(),
    };
    Ok((
        CarrierPayload {
            bits,
            eligibility_mask,
            format: CarrierFormat::PgmLsb,
        },
        meta,
    ))
}

/// Builds a PGM payload directly from pixel values.
pub fn pgm_payload(pixels: &[u8], meta: &ImageMeta) -> Result<CarrierPayload> {
    if pixels.len() != meta.pixel_count() {
        return Err(Error::MetaMismatch("pixel count"));
    }
    let bits = bytes_to_bits(pixels);
    Ok(CarrierPayload {
        eligibility_mask: (0..bits.len()).map(|i| i % 8 == 7).collect(),
        bits,
        format: CarrierFormat::PgmLsb,
    })
}

/// Serializes a payload back to bytes; the inverse of the matching ingest.
pub fn emit(payload: &CarrierPayload, meta: Option<&ImageMeta>) -> Result<Vec<u8>> {
    match payload.format {
        CarrierFormat::Raw => Ok(bits_to_bytes(&payload.bits)),
        CarrierFormat::PgmLsb => {
            let meta = meta.ok_or(Error::MissingMeta)?;
            if payload.bits.len() != meta.pixel_count() * 8 {
                return Err(Error::MetaMismatch("bit length"));
            }
            let mut out = Vec::with_capacity(meta.header.len() + meta.pixel_count() + meta.trailer.len());
            out.extend_from_slice(&meta.header);
            out.extend(bits_to_bytes(&payload.bits));
            out.extend_from_slice(&meta.trailer);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pgm(w: usize, h: usize, pixels: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n{w} {h}\n255\n").into_bytes();
        v.extend_from_slice(pixels);
        v
    }

    #[test]
    fn raw_expansion() {
        let p = ingest_raw(&[0xA5]).unwrap();
        let s: String = p.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        assert_eq!(s, "10100101");
        assert_eq!(p.eligibility_mask, vec![true; 8]);
        assert_eq!(ingest_raw(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn pgm_two_pixels() {
        let (p, meta) = ingest_pgm(&pgm(2, 1, &[0x00, 0xFF])).unwrap();
        assert_eq!(p.bits.len(), 16);
        let ones: Vec<usize> = p
            .eligibility_mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        assert_eq!(ones, vec![7, 15]);
        assert_eq!((meta.width, meta.height, meta.max_value), (2, 1, 255));
    }

    #[test]
    fn pgm_header_with_comments_round_trips() {
        let mut bytes = b"P5 # made by hand\n# another\n3\t1\n255\r".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        bytes.extend_from_slice(b"trailing");
        let (p, meta) = ingest_pgm(&bytes).unwrap();
        assert_eq!((meta.width, meta.height), (3, 1));
        assert_eq!(emit(&p, Some(&meta)).unwrap(), bytes);
    }

    #[test]
    fn pgm_errors() {
        assert_eq!(ingest_pgm(&pgm(1, 1, &[])), Err(Error::TruncatedPixelData { expected: 1, found: 0 }));
        assert_eq!(
            ingest_pgm(b"P5\n1 1\n65535\n\0\0"),
            Err(Error::UnsupportedMaxval(65535))
        );
        assert!(matches!(ingest_pgm(b"P2\n1 1\n255\n0"), Err(Error::MalformedHeader(_))));
        assert!(matches!(ingest_pgm(b"P5\n1\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(ingest_pgm(b"P5\n0 1\n255\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(ingest_pgm(b"P51 1 255 x"), Err(Error::MalformedHeader(_))));
        assert_eq!(ingest_pgm(b""), Err(Error::EmptyInput));
    }

    #[test]
    fn emit_needs_meta() {
        let (p, _) = ingest_pgm(&pgm(1, 1, &[7])).unwrap();
        assert_eq!(emit(&p, None), Err(Error::MissingMeta));
    }

    #[test]
    fn lsb_flips_move_pixels_by_one() {
        let pixels: Vec<u8> = (0..=255).collect();
        let meta = ImageMeta::new(16, 16).unwrap();
        let mut p = pgm_payload(&pixels, &meta).unwrap();
        for i in 0..p.bits.len() {
            if p.eligibility_mask[i] {
                p.bits[i] = !p.bits[i];
            }
        }
        let out = emit(&p, Some(&meta)).unwrap();
        let (_, pix) = out.split_at(out.len() - 256);
        for (a, b) in pixels.iter().zip(pix) {
            assert_eq!(a.abs_diff(*b), 1);
        }
    }

    proptest! {
        #[test]
        fn raw_round_trip(bytes in proptest::collection::vec(any::<u8>(), 1..256)) {
            let p = ingest_raw(&bytes).unwrap();
            prop_assert_eq!(emit(&p, None).unwrap(), bytes);
        }

        #[test]
        fn pgm_single_lsb_flip(
            (w, h, pixels) in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(any::<u8>(), w * h))
            }),
            pick in any::<proptest::sample::Index>(),
        ) {
            let bytes = pgm(w, h, &pixels);
            let (mut p, meta) = ingest_pgm(&bytes).unwrap();
            prop_assert_eq!(emit(&p, Some(&meta)).unwrap(), bytes.clone());

            let px = pick.index(w * h);
            p.bits[px * 8 + 7] = !p.bits[px * 8 + 7];
            let out = emit(&p, Some(&meta)).unwrap();
            prop_assert_eq!(out.len(), bytes.len());
            let diffs: Vec<usize> = (0..out.len()).filter(|&i| out[i] != bytes[i]).collect();
            prop_assert_eq!(diffs.len(), 1);
            prop_assert_eq!(out[diffs[0]].abs_diff(bytes[diffs[0]]), 1);
            prop_assert!(ingest_pgm(&out).is_ok());
        }
    }
}
