use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Four-character box type code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourCC(pub [u8; 4]);

impl FourCC {
    pub const fn new(code: &[u8; 4]) -> Self {
        FourCC(*code)
    }

    pub fn as_bytes(&self) -> &[u8; 4] {
        &self.0
    }

    /// Parses the `Display` form back into a code.
    pub fn parse(text: &str) -> Option<Self> {
        let mut out = Vec::with_capacity(4);
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            if c == '%' {
                let hi = chars.next()?.to_digit(16)?;
                let lo = chars.next()?.to_digit(16)?;
                out.push((hi * 16 + lo) as u8);
            } else {
                out.push(u8::try_from(u32::from(c)).ok()?);
            }
        }
        Some(FourCC(out.try_into().ok()?))
    }
}

/// Latin-1 rendering (`0xA9` shows as `©`); non-printable bytes and `%`
/// render as `%XX`.
impl fmt::Display for FourCC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            let printable = (0x20..0x7F).contains(&b) || b >= 0xA1;
            if printable && b != b'%' {
                write!(f, "{}", char::from(b))?;
            } else {
                write!(f, "%{b:02X}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FourCC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FourCC({self})")
    }
}

impl From<&[u8; 4]> for FourCC {
    fn from(b: &[u8; 4]) -> Self {
        FourCC(*b)
    }
}

impl PartialEq<&[u8; 4]> for FourCC {
    fn eq(&self, other: &&[u8; 4]) -> bool {
        &self.0 == *other
    }
}

impl Serialize for FourCC {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FourCC {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FourCC::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad fourcc {s:?}")))
    }
}

pub const FTYP: FourCC = FourCC::new(b"ftyp");
pub const MOOV: FourCC = FourCC::new(b"moov");
pub const MDAT: FourCC = FourCC::new(b"mdat");
pub const FREE: FourCC = FourCC::new(b"free");
pub const SKIP: FourCC = FourCC::new(b"skip");
pub const WIDE: FourCC = FourCC::new(b"wide");
pub const UUID: FourCC = FourCC::new(b"uuid");
pub const MVHD: FourCC = FourCC::new(b"mvhd");
pub const TRAK: FourCC = FourCC::new(b"trak");
pub const TKHD: FourCC = FourCC::new(b"tkhd");
pub const EDTS: FourCC = FourCC::new(b"edts");
pub const ELST: FourCC = FourCC::new(b"elst");
pub const MDIA: FourCC = FourCC::new(b"mdia");
pub const MDHD: FourCC = FourCC::new(b"mdhd");
pub const HDLR: FourCC = FourCC::new(b"hdlr");
pub const MINF: FourCC = FourCC::new(b"minf");
pub const VMHD: FourCC = FourCC::new(b"vmhd");
pub const SMHD: FourCC = FourCC::new(b"smhd");
pub const DINF: FourCC = FourCC::new(b"dinf");
pub const DREF: FourCC = FourCC::new(b"dref");
pub const URL: FourCC = FourCC::new(b"url ");
pub const STBL: FourCC = FourCC::new(b"stbl");
pub const STSD: FourCC = FourCC::new(b"stsd");
pub const STTS: FourCC = FourCC::new(b"stts");
pub const STSS: FourCC = FourCC::new(b"stss");
pub const CTTS: FourCC = FourCC::new(b"ctts");
pub const STSC: FourCC = FourCC::new(b"stsc");
pub const STSZ: FourCC = FourCC::new(b"stsz");
pub const STCO: FourCC = FourCC::new(b"stco");
pub const CO64: FourCC = FourCC::new(b"co64");
pub const AVC1: FourCC = FourCC::new(b"avc1");
pub const AVC3: FourCC = FourCC::new(b"avc3");
pub const AVCC: FourCC = FourCC::new(b"avcC");
pub const MP4A: FourCC = FourCC::new(b"mp4a");
pub const PASP: FourCC = FourCC::new(b"pasp");
pub const BTRT: FourCC = FourCC::new(b"btrt");
pub const COLR: FourCC = FourCC::new(b"colr");
pub const UDTA: FourCC = FourCC::new(b"udta");
pub const META: FourCC = FourCC::new(b"meta");
pub const ILST: FourCC = FourCC::new(b"ilst");
pub const DATA: FourCC = FourCC::new(b"data");
pub const MVEX: FourCC = FourCC::new(b"mvex");
pub const MOOF: FourCC = FourCC::new(b"moof");
pub const TRAF: FourCC = FourCC::new(b"traf");
pub const MFRA: FourCC = FourCC::new(b"mfra");
pub const TREF: FourCC = FourCC::new(b"tref");

/// Boxes whose payload is a plain sequence of child boxes.
pub const CONTAINERS: &[FourCC] = &[
    MOOV, TRAK, EDTS, MDIA, MINF, DINF, STBL, UDTA, MVEX, MOOF, TRAF, MFRA, TREF,
    FourCC::new(b"sinf"),
    FourCC::new(b"schi"),
    FourCC::new(b"wave"),
    FourCC::new(b"gmhd"),
];

/// Box types accepted as the first box of a file.
pub const TOP_LEVEL: &[FourCC] = &[
    FTYP, MOOV, MDAT, FREE, SKIP, WIDE, UUID, META, MOOF, MFRA,
    FourCC::new(b"styp"),
    FourCC::new(b"sidx"),
    FourCC::new(b"pdin"),
    FourCC::new(b"pnot"),
];

pub const VISUAL_ENTRIES: &[FourCC] = &[
    AVC1, AVC3,
    FourCC::new(b"avc2"),
    FourCC::new(b"avc4"),
    FourCC::new(b"encv"),
    FourCC::new(b"hvc1"),
    FourCC::new(b"hev1"),
    FourCC::new(b"mp4v"),
    FourCC::new(b"s263"),
    FourCC::new(b"jpeg"),
    FourCC::new(b"mjpa"),
    FourCC::new(b"mjpb"),
    FourCC::new(b"vp09"),
    FourCC::new(b"av01"),
];

pub const AUDIO_ENTRIES: &[FourCC] = &[
    MP4A,
    FourCC::new(b"enca"),
    FourCC::new(b"samr"),
    FourCC::new(b"sawb"),
    FourCC::new(b"sowt"),
    FourCC::new(b"twos"),
    FourCC::new(b"lpcm"),
    FourCC::new(b"ulaw"),
    FourCC::new(b"alaw"),
    FourCC::new(b"ac-3"),
    FourCC::new(b"ec-3"),
    FourCC::new(b"Opus"),
    FourCC::new(b"fLaC"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let c = FourCC([0xA9, b'x', b'y', b'z']);
        assert_eq!(c.to_string(), "©xyz");
        assert_eq!(FourCC::parse("©xyz"), Some(c));
        let odd = FourCC([0, b'%', 0x7F, b'a']);
        assert_eq!(odd.to_string(), "%00%25%7Fa");
        assert_eq!(FourCC::parse(&odd.to_string()), Some(odd));
        assert_eq!(URL.to_string(), "url ");
    }
}
