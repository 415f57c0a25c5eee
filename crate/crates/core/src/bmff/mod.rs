//! ISO base media file format (MP4/MOV/3GP) box parsing.

mod avcc;
mod fields;
pub mod fourcc;

use std::fs::File;
use std::io::{self, BufReader, Cursor, Read, Seek, SeekFrom};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::avcc::{extract_parameter_set_blobs, AvcConfig};
pub use self::fields::{
    decode_fields, sample_entry_prefix_len, Blob, BoxContext, FieldKind, FieldValue, Fields,
    BLOB_INLINE_MAX,
};
pub use self::fourcc::FourCC;
use self::fourcc::*;

/// Leaf payloads above this size are not loaded (their fields stay empty).
pub const MAX_LEAF_PAYLOAD: u64 = 16 << 20;
/// Nesting beyond this depth is treated as malformed.
pub const MAX_DEPTH: usize = 32;

#[derive(Debug, Error)]
pub enum BmffError {
    #[error("not an ISO base media file: {0}")]
    NotIsoBmff(String),
    #[error("no avcC configuration record found")]
    NoAvcConfig,
    #[error("avcC record at offset {offset} is corrupt: {reason}")]
    CorruptAvcConfig { offset: u64, reason: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Declared size runs past the end of the file.
    Truncated,
    /// Declared size is smaller than the box header.
    InvalidSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub offset: u64,
    pub declared_size: u64,
    pub available: u64,
    pub reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxNode {
    pub box_type: FourCC,
    pub offset: u64,
    /// Size as written: the 32-bit field, or the 64-bit largesize when that
    /// field is 1. Zero means "to the end of the enclosing range".
    pub declared_size: u64,
    /// Effective size in bytes, header included.
    pub size: u64,
    pub header_len: u8,
    /// Bytes fields were decoded from: a leaf's payload, or the header region
    /// of a container that precedes its children. Never holds `mdat` data.
    #[serde(skip)]
    pub payload: Vec<u8>,
    pub fields: Fields,
    /// Field decoding stopped early, or the children did not tile the payload.
    pub malformed: bool,
    pub children: Vec<BoxNode>,
}

impl BoxNode {
    pub fn payload_offset(&self) -> u64 {
        self.offset + u64::from(self.header_len)
    }

    pub fn field(&self, name: &str) -> Option<&FieldValue> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn child(&self, t: FourCC) -> Option<&BoxNode> {
        self.children.iter().find(|c| c.box_type == t)
    }

    /// Pre-order walk of this node and its descendants.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a BoxNode, &[FourCC])) {
        let mut path = Vec::new();
        self.walk_inner(&mut path, visit);
    }

    fn walk_inner<'a>(&'a self, path: &mut Vec<FourCC>, visit: &mut impl FnMut(&'a BoxNode, &[FourCC])) {
        visit(self, path);
        path.push(self.box_type);
        for c in &self.children {
            c.walk_inner(path, visit);
        }
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxTree {
    /// Top-level boxes in file order.
    pub boxes: Vec<BoxNode>,
    pub truncated: Option<Truncation>,
    pub file_len: u64,
}

impl BoxTree {
    /// Pre-order walk; the slice holds the ancestor types of each node.
    pub fn walk<'a>(&'a self, mut visit: impl FnMut(&'a BoxNode, &[FourCC])) {
        for b in &self.boxes {
            b.walk(&mut visit);
        }
    }

    pub fn find_all(&self, t: FourCC) -> Vec<&BoxNode> {
        let mut out = Vec::new();
        self.walk(|b, _| {
            if b.box_type == t {
                out.push(b);
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(|_, _| n += 1);
        n
    }
}

pub fn parse_boxes(bytes: &[u8]) -> Result<BoxTree, BmffError> {
    parse_reader(Cursor::new(bytes))
}

pub fn parse_file(path: impl AsRef<Path>) -> Result<BoxTree, BmffError> {
    parse_reader(BufReader::new(File::open(path)?))
}

pub fn parse_reader<R: Read + Seek>(mut reader: R) -> Result<BoxTree, BmffError> {
    let file_len = reader.seek(SeekFrom::End(0))?;
    let mut p = Parser { r: reader, file_len };
    if file_len < 8 {
        return Err(BmffError::NotIsoBmff(format!("{file_len} bytes is shorter than a box header")));
    }
    let head = p.read_at(0, 8)?;
    let first = FourCC(head[4..8].try_into().unwrap());
    if !TOP_LEVEL.contains(&first) {
        return Err(BmffError::NotIsoBmff(format!("first box type {first} is not a top-level box")));
    }
    let (boxes, end) = p.parse_seq(0, file_len, BoxContext::Plain, 0)?;
    let truncated = match end {
        SeqEnd::Stopped(t) => Some(t),
        SeqEnd::Clean | SeqEnd::Malformed => None,
    };
    Ok(BoxTree { boxes, truncated, file_len })
}

enum SeqEnd {
    Clean,
    /// Children did not tile the range; the enclosing box is malformed.
    Malformed,
    /// Global stop.
    Stopped(Truncation),
}

struct Parser<R> {
    r: R,
    file_len: u64,
}

impl<R: Read + Seek> Parser<R> {
    fn read_at(&mut self, offset: u64, len: usize) -> io::Result<Vec<u8>> {
        self.r.seek(SeekFrom::Start(offset))?;
        let mut buf = vec![0u8; len];
        self.r.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn parse_seq(
        &mut self,
        start: u64,
        end: u64,
        context: BoxContext,
        depth: usize,
    ) -> Result<(Vec<BoxNode>, SeqEnd), BmffError> {
        let mut out = Vec::new();
        let mut pos = start;
        let top = depth == 0;
        while pos < end {
            let left = end - pos;
            if left < 8 {
                if top {
                    return Ok((out, SeqEnd::Stopped(self.stop(pos, 8, StopReason::Truncated))));
                }
                let tail = self.read_at(pos, left as usize)?;
                let end_state = if tail.iter().all(|&b| b == 0) { SeqEnd::Clean } else { SeqEnd::Malformed };
                return Ok((out, end_state));
            }
            let head = self.read_at(pos, 8)?;
            let size32 = u32::from_be_bytes(head[0..4].try_into().unwrap());
            let box_type = FourCC(head[4..8].try_into().unwrap());
            let mut header_len = 8u64;
            let (declared_size, size) = match size32 {
                0 => (0, left),
                1 => {
                    if left < 16 {
                        return Ok((out, self.overrun(pos, 16, top)));
                    }
                    let large = u64::from_be_bytes(self.read_at(pos + 8, 8)?.try_into().unwrap());
                    header_len = 16;
                    (large, large)
                }
                n => (u64::from(n), u64::from(n)),
            };
            if box_type == UUID {
                header_len += 16;
            }
            if size < header_len {
                if top || pos + header_len > self.file_len {
                    return Ok((out, SeqEnd::Stopped(self.stop(pos, size, StopReason::InvalidSize))));
                }
                return Ok((out, SeqEnd::Malformed));
            }
            if size > left {
                return Ok((out, self.overrun(pos, size, top)));
            }
            let (node, state) = self.parse_box(pos, declared_size, size, header_len as u8, box_type, context, depth)?;
            out.push(node);
            if let SeqEnd::Stopped(t) = state {
                return Ok((out, SeqEnd::Stopped(t)));
            }
            pos += size;
        }
        Ok((out, SeqEnd::Clean))
    }

    fn overrun(&self, pos: u64, size: u64, top: bool) -> SeqEnd {
        if top || pos.saturating_add(size) > self.file_len {
            SeqEnd::Stopped(self.stop(pos, size, StopReason::Truncated))
        } else {
            SeqEnd::Malformed
        }
    }

    fn stop(&self, offset: u64, declared_size: u64, reason: StopReason) -> Truncation {
        Truncation { offset, declared_size, available: self.file_len - offset, reason }
    }

    #[allow(clippy::too_many_arguments)]
    fn parse_box(
        &mut self,
        offset: u64,
        declared_size: u64,
        size: u64,
        header_len: u8,
        box_type: FourCC,
        context: BoxContext,
        depth: usize,
    ) -> Result<(BoxNode, SeqEnd), BmffError> {
        let body_start = offset + u64::from(header_len);
        let body_len = size - u64::from(header_len);
        let mut node = BoxNode {
            box_type,
            offset,
            declared_size,
            size,
            header_len,
            payload: Vec::new(),
            fields: Vec::new(),
            malformed: false,
            children: Vec::new(),
        };
        if box_type == UUID {
            node.payload = self.read_at(offset + u64::from(header_len) - 16, 16)?;
        }

        let prefix = self.container_prefix(box_type, context, body_start, body_len)?;
        let mut state = SeqEnd::Clean;
        match prefix {
            Some(prefix_len) if depth < MAX_DEPTH => {
                node.payload = self.read_at(body_start, prefix_len as usize)?;
                let child_ctx = match box_type {
                    t if t == STSD => BoxContext::SampleEntry,
                    t if t == UDTA => BoxContext::UserData,
                    _ => BoxContext::Plain,
                };
                let (children, end) =
                    self.parse_seq(body_start + prefix_len, body_start + body_len, child_ctx, depth + 1)?;
                node.children = children;
                match end {
                    SeqEnd::Malformed => node.malformed = true,
                    SeqEnd::Stopped(_) => state = end,
                    SeqEnd::Clean => {}
                }
            }
            Some(_) => node.malformed = true,
            None => {
                if box_type != MDAT && box_type != UUID && body_len <= MAX_LEAF_PAYLOAD {
                    node.payload = self.read_at(body_start, body_len as usize)?;
                }
            }
        }

        let (fields, bad) = decode_fields(box_type, context, &node.payload);
        node.fields = fields;
        node.malformed |= bad;
        Ok((node, state))
    }

    /// For container boxes, the length of the header region before the
    /// first child; `None` for leaves.
    fn container_prefix(
        &mut self,
        box_type: FourCC,
        context: BoxContext,
        body_start: u64,
        body_len: u64,
    ) -> Result<Option<u64>, BmffError> {
        if context == BoxContext::SampleEntry {
            let peek = self.read_at(body_start, body_len.min(10) as usize)?;
            return Ok(sample_entry_prefix_len(box_type, &peek)
                .map(|n| n as u64)
                .filter(|&n| n <= body_len));
        }
        if CONTAINERS.contains(&box_type) {
            return Ok(Some(0));
        }
        if box_type == STSD || box_type == DREF {
            return Ok((body_len >= 8).then_some(8));
        }
        if box_type == META {
            if body_len < 8 {
                return Ok(None);
            }
            // ISO style starts with version and flags; QuickTime style starts
            // directly with a child box whose size is never zero.
            let head = self.read_at(body_start, 4)?;
            return Ok(Some(if head == [0, 0, 0, 0] { 4 } else { 0 }));
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn bx(t: &[u8; 4], body: &[u8]) -> Vec<u8> {
        let mut v = ((body.len() + 8) as u32).to_be_bytes().to_vec();
        v.extend_from_slice(t);
        v.extend_from_slice(body);
        v
    }

    #[test]
    fn single_ftyp() {
        let bytes = [0, 0, 0, 0x10, 0x66, 0x74, 0x79, 0x70, 0x69, 0x73, 0x6F, 0x6D, 0, 0, 2, 0];
        let t = parse_boxes(&bytes).unwrap();
        assert_eq!(t.boxes.len(), 1);
        let b = &t.boxes[0];
        assert_eq!(b.box_type, FTYP);
        assert_eq!(b.declared_size, 16);
        assert_eq!(b.field("@major_brand"), Some(&FieldValue::Text("isom".into())));
        assert_eq!(b.field("@minor_version"), Some(&FieldValue::Integer(512)));
        assert!(t.truncated.is_none());
    }

    #[test]
    fn empty_input_is_not_bmff() {
        assert!(matches!(parse_boxes(&[]), Err(BmffError::NotIsoBmff(_))));
        let junk = bx(b"RIFF", b"AVI LIST");
        assert!(matches!(parse_boxes(&junk), Err(BmffError::NotIsoBmff(_))));
    }

    #[test]
    fn oversized_box_truncates() {
        let mut bytes = bx(b"ftyp", b"isom\0\0\0\0");
        bytes.extend_from_slice(&4096u32.to_be_bytes());
        bytes.extend_from_slice(b"moov");
        bytes.resize(bytes.len() + 92, 0);
        let t = parse_boxes(&bytes).unwrap();
        assert_eq!(t.boxes.len(), 1);
        let tr = t.truncated.unwrap();
        assert_eq!(tr.declared_size, 4096);
        assert_eq!(tr.available, 100);
        assert_eq!(tr.reason, StopReason::Truncated);
    }

    #[test]
    fn size_zero_and_largesize() {
        let mut bytes = bx(b"ftyp", b"isom\0\0\0\0");
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.extend_from_slice(b"free");
        bytes.extend_from_slice(&20u64.to_be_bytes());
        bytes.extend_from_slice(b"abcd");
        bytes.extend_from_slice(&0u32.to_be_bytes());
        bytes.extend_from_slice(b"mdat");
        bytes.extend_from_slice(&[9; 33]);
        let t = parse_boxes(&bytes).unwrap();
        let types: Vec<_> = t.boxes.iter().map(|b| b.box_type).collect();
        assert_eq!(types, vec![FTYP, FREE, MDAT]);
        assert_eq!(t.boxes[1].header_len, 16);
        assert_eq!(t.boxes[1].payload, b"abcd");
        assert_eq!(t.boxes[2].declared_size, 0);
        assert_eq!(t.boxes[2].size, 41);
        assert!(t.boxes[2].payload.is_empty());
        let total: u64 = t.boxes.iter().map(|b| b.size).sum();
        assert_eq!(total, t.file_len);
    }

    #[test]
    fn nested_overrun_marks_parent() {
        let inner = {
            let mut v = 64u32.to_be_bytes().to_vec();
            v.extend_from_slice(b"trak");
            v
        };
        let mut bytes = bx(b"moov", &inner);
        bytes.extend_from_slice(&[0; 64]);
        let t = parse_boxes(&bytes).unwrap();
        assert!(t.boxes[0].malformed);
        assert!(t.truncated.is_none());
    }

    #[test]
    fn unknown_box_is_leaf() {
        let mut bytes = bx(b"ftyp", b"isom\0\0\0\0");
        bytes.extend(bx(b"xyz ", b"\x01\x02"));
        let t = parse_boxes(&bytes).unwrap();
        assert!(t.boxes[1].fields.is_empty());
        assert!(t.boxes[1].children.is_empty());
        assert_eq!(t.boxes[1].payload, vec![1, 2]);
    }

    #[test]
    fn quicktime_and_iso_meta() {
        let hdlr = bx(b"hdlr", &[0u8; 24]);
        let iso = bx(b"meta", &[&[0u8, 0, 0, 0][..], &hdlr].concat());
        let qt = bx(b"meta", &hdlr);
        for (m, vf) in [(iso, true), (qt, false)] {
            let bytes = [bx(b"ftyp", b"qt  \0\0\0\0"), bx(b"moov", &bx(b"udta", &m))].concat();
            let t = parse_boxes(&bytes).unwrap();
            let meta = &t.boxes[1].children[0].children[0];
            assert_eq!(meta.children.len(), 1, "vf={vf}");
            assert_eq!(meta.children[0].box_type, HDLR);
            assert_eq!(meta.field("@version").is_some(), vf);
        }
    }
}
