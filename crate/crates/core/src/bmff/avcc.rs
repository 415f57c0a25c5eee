use serde::{Deserialize, Serialize};

use super::fourcc::{FourCC, AVCC, STSD};
use super::{BmffError, BoxTree};

/// Parameter-set blobs of one AVC decoder configuration record, NAL header
/// byte included, in record order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvcConfig {
    /// Type of the sample entry holding the record (`avc1`, `avc3`, ...).
    pub entry_type: FourCC,
    pub offset: u64,
    pub profile_indication: u8,
    pub level_indication: u8,
    pub length_size_minus_one: u8,
    pub sps: Vec<Vec<u8>>,
    pub pps: Vec<Vec<u8>>,
    /// File offsets of each SPS and PPS blob.
    pub sps_offsets: Vec<u64>,
    pub pps_offsets: Vec<u64>,
}

impl AvcConfig {
    /// Parses a record body; `base` is its file offset.
    pub fn parse(entry_type: FourCC, base: u64, body: &[u8]) -> Result<Self, BmffError> {
        let corrupt = |reason| BmffError::CorruptAvcConfig { offset: base, reason };
        if body.len() < 6 {
            return Err(corrupt("record shorter than its fixed header"));
        }
        let mut cfg = AvcConfig {
            entry_type,
            offset: base,
            profile_indication: body[1],
            level_indication: body[3],
            length_size_minus_one: body[4] & 3,
            sps: Vec::new(),
            pps: Vec::new(),
            sps_offsets: Vec::new(),
            pps_offsets: Vec::new(),
        };
        let mut pos = 6usize;
        let num_sps = body[5] & 0x1F;
        for _ in 0..num_sps {
            let (blob, at) = length_prefixed(body, &mut pos).ok_or_else(|| corrupt("SPS overruns record"))?;
            cfg.sps.push(blob.to_vec());
            cfg.sps_offsets.push(base + at as u64);
        }
        let num_pps = *body.get(pos).ok_or_else(|| corrupt("missing PPS count"))?;
        pos += 1;
        for _ in 0..num_pps {
            let (blob, at) = length_prefixed(body, &mut pos).ok_or_else(|| corrupt("PPS overruns record"))?;
            cfg.pps.push(blob.to_vec());
            cfg.pps_offsets.push(base + at as u64);
        }
        Ok(cfg)
    }
}

fn length_prefixed<'a>(body: &'a [u8], pos: &mut usize) -> Option<(&'a [u8], usize)> {
    let len = u16::from_be_bytes(body.get(*pos..*pos + 2)?.try_into().ok()?) as usize;
    let start = *pos + 2;
    let blob = body.get(start..start + len)?;
    *pos = start + len;
    Some((blob, start))
}

/// Collects every avcC record found under a sample description, in file
/// order.
pub fn extract_parameter_set_blobs(tree: &BoxTree) -> Result<Vec<AvcConfig>, BmffError> {
    let mut found = Vec::new();
    tree.walk(|node, path| {
        if path.last() == Some(&STSD) {
            if let Some(avcc) = node.child(AVCC) {
                found.push((node.box_type, avcc));
            }
        }
    });
    if found.is_empty() {
        return Err(BmffError::NoAvcConfig);
    }
    found
        .into_iter()
        .map(|(entry, avcc)| AvcConfig::parse(entry, avcc.payload_offset(), &avcc.payload))
        .collect()
}
