//! H.264 sequence and picture parameter set decoding.

pub mod bits;
mod core_params;
mod params;
mod pps;
mod sps;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::bits::{escape_rbsp, unescape_rbsp, BitCursor, BitWriter};
pub use self::core_params::{core_param_vector, CoreParams, CORE_PARAM_NAMES, USER_ADJUSTABLE_CORE};
pub use self::params::{
    Param, ParamSet, ParamSetKind, ParamValue, TraceEntry, PPS_PARAMS, SPS_PARAMS, VUI_PARAMS,
};
pub use self::pps::{parse_pps, PpsParams};
pub use self::sps::{parse_sps, Hrd, SpsParams, HIGH_PROFILES, KNOWN_PROFILES};

pub const NAL_SPS: u8 = 7;
pub const NAL_PPS: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum H264Error {
    #[error("bitstream exhausted at bit {bit}")]
    BitstreamExhausted { bit: usize },
    #[error("exp-golomb code at bit {bit} exceeds 32 leading zeros")]
    ExpGolombOverflow { bit: usize },
    #[error("empty NAL unit")]
    EmptyNal,
    #[error("expected NAL unit type {expected}, found {found}")]
    WrongNalType { expected: u8, found: u8 },
    #[error("{name} = {value} is out of range")]
    ValueOutOfRange { name: String, value: i64 },
    #[error("PPS references SPS id {found}, setting has SPS id {expected}")]
    SpsIdMismatch { expected: i64, found: i64 },
    #[error("core parameter {0} lies in an undecoded region")]
    MissingParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartialReason {
    /// Profile outside the decode table; only the common prefix was read.
    UnsupportedProfile(u8),
    /// PPS data after the known syntax that is not a trailing-bits pattern.
    UnknownTail,
    /// The bits after the last syntax element are not `1 0*`.
    BadTrailingBits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeStatus {
    Complete,
    Partial(PartialReason),
}

impl DecodeStatus {
    pub fn is_complete(self) -> bool {
        self == DecodeStatus::Complete
    }
}

/// An SPS with the PPSs that reference it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSetting {
    pub sps: SpsParams,
    pub pps: Vec<PpsParams>,
}

impl EncodingSetting {
    pub fn new(sps: SpsParams, pps: Vec<PpsParams>) -> Result<Self, H264Error> {
        if let Some(expected) = sps.params.int("seq_parameter_set_id") {
            for p in &pps {
                if let Some(found) = p.params.int("seq_parameter_set_id") {
                    if found != expected {
                        return Err(H264Error::SpsIdMismatch { expected, found });
                    }
                }
            }
        }
        Ok(Self { sps, pps })
    }

    /// Decodes an SPS blob and its PPS blobs (NAL header byte included).
    pub fn from_blobs<B: AsRef<[u8]>>(sps: &[u8], pps: &[B]) -> Result<Self, H264Error> {
        let sps = parse_sps(sps)?;
        let pps = pps
            .iter()
            .map(|b| parse_pps(b.as_ref(), Some(&sps)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sps, pps)
    }

    pub fn vui(&self) -> Option<&ParamSet> {
        self.sps.vui.as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.sps.status.is_complete() && self.pps.iter().all(|p| p.status.is_complete())
    }
}

/// Cursor wrapper that records every syntax element it reads.
pub(crate) struct TracingReader<'a> {
    cur: BitCursor<'a>,
    trace: Vec<TraceEntry>,
}

impl<'a> TracingReader<'a> {
    pub(crate) fn new(rbsp: &'a [u8]) -> Self {
        Self { cur: BitCursor::new(rbsp), trace: Vec::new() }
    }

    fn push(&mut self, bit: usize, name: &str, value: i64) -> i64 {
        self.trace.push(TraceEntry { bit, name: name.to_owned(), value });
        value
    }

    pub(crate) fn u(&mut self, name: &str, n: u32) -> Result<i64, H264Error> {
        let bit = self.cur.position();
        let v = self.cur.read_bits(n)? as i64;
        Ok(self.push(bit, name, v))
    }

    pub(crate) fn flag(&mut self, name: &str) -> Result<bool, H264Error> {
        Ok(self.u(name, 1)? == 1)
    }

    pub(crate) fn ue(&mut self, name: &str) -> Result<i64, H264Error> {
        let bit = self.cur.position();
        let v = self.cur.read_ue()? as i64;
        Ok(self.push(bit, name, v))
    }

    pub(crate) fn ue_max(&mut self, name: &str, max: i64) -> Result<i64, H264Error> {
        let v = self.ue(name)?;
        check_range(name, v, 0, max)
    }

    pub(crate) fn se(&mut self, name: &str) -> Result<i64, H264Error> {
        let bit = self.cur.position();
        let v = self.cur.read_se()?;
        Ok(self.push(bit, name, v))
    }

    pub(crate) fn se_range(&mut self, name: &str, min: i64, max: i64) -> Result<i64, H264Error> {
        let v = self.se(name)?;
        check_range(name, v, min, max)
    }

    pub(crate) fn more_rbsp_data(&self) -> bool {
        self.cur.more_rbsp_data()
    }

    /// Reads the NAL header and checks its type.
    pub(crate) fn nal_header(&mut self, expected: u8) -> Result<u8, H264Error> {
        if self.cur.bit_len() == 0 {
            return Err(H264Error::EmptyNal);
        }
        self.u("forbidden_zero_bit", 1)?;
        let ref_idc = self.u("nal_ref_idc", 2)? as u8;
        let found = self.u("nal_unit_type", 5)? as u8;
        if found != expected {
            return Err(H264Error::WrongNalType { expected, found });
        }
        Ok(ref_idc)
    }

    /// Consumes `rbsp_trailing_bits` when the tail matches; returns false
    /// (leaving the cursor in place) when it does not. A fully consumed
    /// cursor counts as a match.
    pub(crate) fn trailing_bits(&mut self) -> Result<bool, H264Error> {
        if self.cur.remaining() == 0 {
            return Ok(true);
        }
        if !self.cur.trailing_bits_valid() {
            return Ok(false);
        }
        self.u("rbsp_stop_one_bit", 1)?;
        while self.cur.position() % 8 != 0 {
            self.u("rbsp_alignment_zero_bit", 1)?;
        }
        Ok(true)
    }

    pub(crate) fn residue(&self) -> Vec<u8> {
        self.cur.residue()
    }

    pub(crate) fn into_trace(self) -> Vec<TraceEntry> {
        self.trace
    }
}

fn check_range(name: &str, v: i64, min: i64, max: i64) -> Result<i64, H264Error> {
    if v < min || v > max {
        return Err(H264Error::ValueOutOfRange { name: name.to_owned(), value: v });
    }
    Ok(v)
}

/// Shared `scaling_list()` syntax; entries are traced as `delta_scale[j]`.
pub(crate) fn skip_scaling_list(r: &mut TracingReader<'_>, size: usize) -> Result<(), H264Error> {
    let mut last = 8i64;
    let mut next = 8i64;
    for j in 0..size {
        if next != 0 {
            let delta = r.se_range(&format!("delta_scale[{j}]"), -128, 127)?;
            next = (last + delta + 256) % 256;
            if j == 0 && next == 0 {
                break;
            }
        }
        if next != 0 {
            last = next;
        }
    }
    Ok(())
}
