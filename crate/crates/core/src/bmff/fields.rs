//! Field-value decoding for the supported box table.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fourcc::*;

/// Blobs up to this many bytes render as hex; longer ones as a digest.
pub const BLOB_INLINE_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    Text,
    Integer,
    Fixed,
    Timestamp,
    Blob,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Blob {
    Bytes(Vec<u8>),
    Digest { len: usize, sha256_prefix: String },
}

impl Blob {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        if bytes.len() <= BLOB_INLINE_MAX {
            Blob::Bytes(bytes.to_vec())
        } else {
            let digest = Sha256::digest(bytes);
            Blob::Digest { len: bytes.len(), sha256_prefix: hex::encode(&digest[..8]) }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldValue {
    Text(String),
    Integer(i128),
    /// Fixed-point number `raw / 2^frac_bits`.
    Fixed { raw: i64, frac_bits: u8 },
    /// Seconds since 1904-01-01 UTC.
    Timestamp(u64),
    Blob(Blob),
}

impl FieldValue {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldValue::Text(_) => FieldKind::Text,
            FieldValue::Integer(_) => FieldKind::Integer,
            FieldValue::Fixed { .. } => FieldKind::Fixed,
            FieldValue::Timestamp(_) => FieldKind::Timestamp,
            FieldValue::Blob(_) => FieldKind::Blob,
        }
    }

    /// Numeric reading, when the value has one.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            FieldValue::Integer(v) => Some(*v as f64),
            FieldValue::Fixed { raw, frac_bits } => Some(*raw as f64 / f64::from(1u32 << frac_bits)),
            FieldValue::Timestamp(v) => Some(*v as f64),
            FieldValue::Text(_) | FieldValue::Blob(_) => None,
        }
    }

    /// Inverse of the `Display` rendering for a known kind. Fixed-point values
    /// need the fractional width of the field they came from.
    pub fn parse_rendered(kind: FieldKind, text: &str, frac_bits: u8) -> Option<Self> {
        Some(match kind {
            FieldKind::Text => FieldValue::Text(text.to_owned()),
            FieldKind::Integer => FieldValue::Integer(text.parse().ok()?),
            FieldKind::Timestamp => FieldValue::Timestamp(text.parse().ok()?),
            FieldKind::Fixed => {
                let v: f64 = text.parse().ok()?;
                let raw = (v * f64::from(1u32 << frac_bits)).round() as i64;
                FieldValue::Fixed { raw, frac_bits }
            }
            FieldKind::Blob => match text.split_once("b#") {
                Some((len, prefix)) => FieldValue::Blob(Blob::Digest {
                    len: len.parse().ok()?,
                    sha256_prefix: prefix.to_owned(),
                }),
                None => FieldValue::Blob(Blob::Bytes(hex::decode(text).ok()?)),
            },
        })
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldValue::Text(s) => f.write_str(s),
            FieldValue::Integer(v) => write!(f, "{v}"),
            FieldValue::Fixed { .. } => write!(f, "{}", self.as_f64().unwrap_or_default()),
            FieldValue::Timestamp(v) => write!(f, "{v}"),
            FieldValue::Blob(Blob::Bytes(b)) => f.write_str(&hex::encode(b)),
            FieldValue::Blob(Blob::Digest { len, sha256_prefix }) => write!(f, "{len}b#{sha256_prefix}"),
        }
    }
}

pub type Fields = Vec<(String, FieldValue)>;

/// Where a box sits, as far as decoding needs to know.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxContext {
    Plain,
    /// Direct child of `stsd`.
    SampleEntry,
    /// Direct child of `udta`.
    UserData,
}

/// Big-endian reader that pushes each decoded value as a field.
struct FieldReader<'a> {
    buf: &'a [u8],
    pos: usize,
    out: Fields,
}

impl<'a> FieldReader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0, out: Vec::new() }
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn skip(&mut self, n: usize) -> Option<()> {
        self.take(n).map(|_| ())
    }

    fn uint(&mut self, n: usize) -> Option<u64> {
        Some(self.take(n)?.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
    }

    fn sint(&mut self, n: usize) -> Option<i64> {
        let v = self.uint(n)?;
        let shift = 64 - 8 * n as u32;
        Some(((v << shift) as i64) >> shift)
    }

    fn rest(&mut self) -> &'a [u8] {
        let s = &self.buf[self.pos.min(self.buf.len())..];
        self.pos = self.buf.len();
        s
    }

    fn push(&mut self, name: &str, v: FieldValue) {
        self.out.push((format!("@{name}"), v));
    }

    fn int(&mut self, name: &str, n: usize) -> Option<u64> {
        let v = self.uint(n)?;
        self.push(name, FieldValue::Integer(i128::from(v)));
        Some(v)
    }

    fn signed(&mut self, name: &str, n: usize) -> Option<()> {
        let v = self.sint(n)?;
        self.push(name, FieldValue::Integer(i128::from(v)));
        Some(())
    }

    fn fixed(&mut self, name: &str, n: usize, frac_bits: u8, signed: bool) -> Option<()> {
        let raw = if signed { self.sint(n)? } else { self.uint(n)? as i64 };
        self.push(name, FieldValue::Fixed { raw, frac_bits });
        Some(())
    }

    fn timestamp(&mut self, name: &str, n: usize) -> Option<()> {
        let v = self.uint(n)?;
        self.push(name, FieldValue::Timestamp(v));
        Some(())
    }

    fn fourcc(&mut self, name: &str) -> Option<()> {
        let b: [u8; 4] = self.take(4)?.try_into().ok()?;
        self.push(name, FieldValue::Text(FourCC(b).to_string()));
        Some(())
    }

    fn text(&mut self, name: &str, bytes: &[u8]) {
        self.push(name, FieldValue::Text(text_of(bytes)));
    }

    fn version_flags(&mut self) -> Option<u8> {
        let v = self.int("version", 1)? as u8;
        self.int("flags", 3)?;
        Some(v)
    }

    fn matrix(&mut self) -> Option<()> {
        let mut vals = Vec::with_capacity(9);
        for _ in 0..9 {
            vals.push(self.sint(4)?.to_string());
        }
        self.push("matrix", FieldValue::Text(vals.join(",")));
        Some(())
    }
}

/// Lossy UTF-8 with trailing NULs dropped.
fn text_of(bytes: &[u8]) -> String {
    let end = bytes.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
    String::from_utf8_lossy(&bytes[..end]).into_owned()
}

/// Strips a Pascal length byte when the string fits it with zero padding.
fn pascal_or_c(bytes: &[u8]) -> &[u8] {
    if let Some((&n, rest)) = bytes.split_first() {
        let n = n as usize;
        if n > 0 && n <= rest.len() && rest[n..].iter().all(|&b| b == 0) {
            return &rest[..n];
        }
    }
    bytes
}

/// Byte length of a sample-entry header that precedes its child boxes.
pub fn sample_entry_prefix_len(box_type: FourCC, payload: &[u8]) -> Option<usize> {
    if VISUAL_ENTRIES.contains(&box_type) {
        return Some(78);
    }
    if AUDIO_ENTRIES.contains(&box_type) {
        let version = u16::from_be_bytes(payload.get(8..10)?.try_into().ok()?);
        return Some(match version {
            1 => 28 + 16,
            2 => 28 + 36,
            _ => 28,
        });
    }
    None
}

/// Decodes the fields of one box from its decodable bytes (the whole payload
/// of a leaf, or the header region that precedes a container's children).
/// Returns the fields and whether decoding stopped early.
pub fn decode_fields(box_type: FourCC, context: BoxContext, payload: &[u8]) -> (Fields, bool) {
    let mut r = FieldReader::new(payload);
    let complete = decode_into(&mut r, box_type, context).is_some();
    (r.out, !complete)
}

fn decode_into(r: &mut FieldReader<'_>, t: FourCC, context: BoxContext) -> Option<()> {
    if context == BoxContext::SampleEntry {
        if VISUAL_ENTRIES.contains(&t) {
            return visual_entry(r);
        }
        if AUDIO_ENTRIES.contains(&t) {
            return audio_entry(r);
        }
        return Some(());
    }
    if context == BoxContext::UserData && t.0[0] == 0xA9 {
        let len = r.uint(2)? as usize;
        r.int("language", 2)?;
        let s = r.take(len.min(r.buf.len() - r.pos))?;
        r.text("text", s);
        return Some(());
    }
    match t.as_bytes() {
        b"ftyp" | b"styp" => {
            r.fourcc("major_brand")?;
            r.int("minor_version", 4)?;
            let mut brands = Vec::new();
            while r.buf.len() - r.pos >= 4 {
                brands.push(FourCC(r.take(4)?.try_into().ok()?).to_string());
            }
            r.push("compatible_brands", FieldValue::Text(brands.join(",")));
        }
        b"mvhd" => {
            let n = if r.version_flags()? == 1 { 8 } else { 4 };
            r.timestamp("creation_time", n)?;
            r.timestamp("modification_time", n)?;
            r.int("timescale", 4)?;
            r.int("duration", n)?;
            r.fixed("rate", 4, 16, true)?;
            r.fixed("volume", 2, 8, true)?;
            r.skip(10)?;
            r.matrix()?;
            r.skip(24)?;
            r.int("next_track_id", 4)?;
        }
        b"tkhd" => {
            let n = if r.version_flags()? == 1 { 8 } else { 4 };
            r.timestamp("creation_time", n)?;
            r.timestamp("modification_time", n)?;
            r.int("track_id", 4)?;
            r.skip(4)?;
            r.int("duration", n)?;
            r.skip(8)?;
            r.signed("layer", 2)?;
            r.signed("alternate_group", 2)?;
            r.fixed("volume", 2, 8, true)?;
            r.skip(2)?;
            r.matrix()?;
            r.fixed("width", 4, 16, false)?;
            r.fixed("height", 4, 16, false)?;
        }
        b"mdhd" => {
            let n = if r.version_flags()? == 1 { 8 } else { 4 };
            r.timestamp("creation_time", n)?;
            r.timestamp("modification_time", n)?;
            r.int("timescale", 4)?;
            r.int("duration", n)?;
            let packed = r.uint(2)? as u16;
            let lang: String = [10u16, 5, 0]
                .iter()
                .map(|s| char::from(((packed >> s) & 0x1F) as u8 + 0x60))
                .collect();
            r.push("language", FieldValue::Text(lang));
            r.int("quality", 2)?;
        }
        b"hdlr" => {
            r.version_flags()?;
            r.fourcc("pre_defined")?;
            r.fourcc("handler_type")?;
            r.skip(12)?;
            let rest = r.rest();
            r.text("name", pascal_or_c(rest));
        }
        b"vmhd" => {
            r.version_flags()?;
            r.int("graphicsmode", 2)?;
            let c = [r.uint(2)?, r.uint(2)?, r.uint(2)?];
            r.push("opcolor", FieldValue::Text(format!("{},{},{}", c[0], c[1], c[2])));
        }
        b"smhd" => {
            r.version_flags()?;
            r.fixed("balance", 2, 8, true)?;
        }
        b"dref" | b"stsd" | b"stts" | b"stss" | b"ctts" | b"stsc" | b"stco" | b"co64" | b"elst" => {
            r.version_flags()?;
            r.int("entry_count", 4)?;
        }
        b"stsz" => {
            r.version_flags()?;
            r.int("sample_size", 4)?;
            r.int("sample_count", 4)?;
        }
        b"url " | b"urn " => {
            r.version_flags()?;
            let rest = r.rest();
            if !rest.is_empty() {
                r.text("location", rest);
            }
        }
        b"avcC" => {
            r.int("configuration_version", 1)?;
            r.int("profile_indication", 1)?;
            r.int("profile_compatibility", 1)?;
            r.int("level_indication", 1)?;
            let b = r.uint(1)?;
            r.push("length_size_minus_one", FieldValue::Integer(i128::from(b & 3)));
            let num_sps = r.uint(1)? & 0x1F;
            r.push("num_sps", FieldValue::Integer(i128::from(num_sps)));
            for _ in 0..num_sps {
                let len = r.uint(2)? as usize;
                r.skip(len)?;
            }
            let num_pps = r.uint(1)?;
            r.push("num_pps", FieldValue::Integer(i128::from(num_pps)));
        }
        b"pasp" => {
            r.int("h_spacing", 4)?;
            r.int("v_spacing", 4)?;
        }
        b"btrt" => {
            r.int("buffer_size_db", 4)?;
            r.int("max_bitrate", 4)?;
            r.int("avg_bitrate", 4)?;
        }
        b"colr" => {
            let ty: [u8; 4] = r.take(4)?.try_into().ok()?;
            r.push("colour_type", FieldValue::Text(FourCC(ty).to_string()));
            if &ty == b"nclx" || &ty == b"nclc" {
                r.int("colour_primaries", 2)?;
                r.int("transfer_characteristics", 2)?;
                r.int("matrix_coefficients", 2)?;
                if &ty == b"nclx" {
                    let b = r.uint(1)?;
                    r.push("full_range_flag", FieldValue::Integer(i128::from(b >> 7)));
                }
            }
        }
        b"meta" => {
            if r.buf.len() >= 4 {
                r.version_flags()?;
            }
        }
        b"ilst" => ilst(r)?,
        b"uuid" => {
            let u = r.take(16)?;
            r.push("usertype", FieldValue::Blob(Blob::Bytes(u.to_vec())));
        }
        _ => {}
    }
    Some(())
}

fn visual_entry(r: &mut FieldReader<'_>) -> Option<()> {
    r.skip(6)?;
    r.int("data_reference_index", 2)?;
    r.skip(16)?;
    r.int("width", 2)?;
    r.int("height", 2)?;
    r.fixed("horizresolution", 4, 16, false)?;
    r.fixed("vertresolution", 4, 16, false)?;
    r.skip(4)?;
    r.int("frame_count", 2)?;
    let name = r.take(32)?;
    r.text("compressorname", pascal_or_c(name));
    r.int("depth", 2)?;
    r.skip(2)?;
    Some(())
}

fn audio_entry(r: &mut FieldReader<'_>) -> Option<()> {
    r.skip(6)?;
    r.int("data_reference_index", 2)?;
    r.int("version", 2)?;
    r.skip(6)?;
    r.int("channelcount", 2)?;
    r.int("samplesize", 2)?;
    r.skip(4)?;
    r.fixed("samplerate", 4, 16, false)?;
    Some(())
}

/// Apple item list: each child is an item box whose `data` child carries a
/// type indicator, a locale and the value.
fn ilst(r: &mut FieldReader<'_>) -> Option<()> {
    while r.buf.len() - r.pos >= 8 {
        let size = r.uint(4)? as usize;
        let key: [u8; 4] = r.take(4)?.try_into().ok()?;
        let body = r.take(size.checked_sub(8)?)?;
        let name = FourCC(key).to_string();
        let value = item_value(body);
        r.push(&name, value);
    }
    Some(())
}

fn item_value(body: &[u8]) -> FieldValue {
    if body.len() >= 16 && &body[4..8] == b"data" {
        let size = u32::from_be_bytes(body[0..4].try_into().unwrap()) as usize;
        let end = size.clamp(16, body.len());
        let type_indicator = u32::from_be_bytes(body[8..12].try_into().unwrap()) & 0x00FF_FFFF;
        let value = &body[16..end];
        if type_indicator == 1 {
            return FieldValue::Text(text_of(value));
        }
        return FieldValue::Blob(Blob::from_bytes(value));
    }
    FieldValue::Blob(Blob::from_bytes(body))
}
