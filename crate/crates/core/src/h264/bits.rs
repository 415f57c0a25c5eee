//! Bit-level access to RBSP payloads: emulation-prevention handling,
//! fixed-width reads and Exp-Golomb codes.

use super::H264Error;

/// Removes emulation-prevention bytes: every `00 00 03` has its `03` dropped.
pub fn unescape_rbsp(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len());
    let mut zeros = 0usize;
    for &b in bytes {
        if zeros >= 2 && b == 0x03 {
            zeros = 0;
            continue;
        }
        zeros = if b == 0 { zeros + 1 } else { 0 };
        out.push(b);
    }
    out
}

/// Inserts emulation-prevention bytes so that no `00 00 0x` (x <= 3) sequence
/// appears in the escaped output.
pub fn escape_rbsp(rbsp: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(rbsp.len() + rbsp.len() / 64 + 1);
    let mut zeros = 0usize;
    for &b in rbsp {
        if zeros >= 2 && b <= 0x03 {
            out.push(0x03);
            zeros = 0;
        }
        zeros = if b == 0 { zeros + 1 } else { 0 };
        out.push(b);
    }
    out
}

/// Read cursor over an unescaped RBSP byte span.
#[derive(Debug, Clone)]
pub struct BitCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitCursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    /// Index of the next bit to be read.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8
    }

    pub fn remaining(&self) -> usize {
        self.bit_len() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool, H264Error> {
        if self.pos >= self.bit_len() {
            return Err(H264Error::BitstreamExhausted { bit: self.pos });
        }
        let byte = self.bytes[self.pos / 8];
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Ok(bit == 1)
    }

    /// Reads `n` bits (at most 64) MSB first.
    pub fn read_bits(&mut self, n: u32) -> Result<u64, H264Error> {
        assert!(n <= 64, "read_bits supports at most 64 bits");
        if (n as usize) > self.remaining() {
            return Err(H264Error::BitstreamExhausted { bit: self.bit_len() });
        }
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    /// Unsigned Exp-Golomb: `k` leading zeros, a one, then `k` suffix bits;
    /// value is `2^k - 1 + suffix`.
    pub fn read_ue(&mut self) -> Result<u64, H264Error> {
        let start = self.pos;
        let mut leading = 0u32;
        while !self.read_bit().map_err(|_| H264Error::BitstreamExhausted { bit: start })? {
            leading += 1;
            if leading > 32 {
                return Err(H264Error::ExpGolombOverflow { bit: start });
            }
        }
        if leading == 0 {
            return Ok(0);
        }
        let suffix = self.read_bits(leading)?;
        Ok((1u64 << leading) - 1 + suffix)
    }

    /// Signed Exp-Golomb: code `k` maps to `(-1)^(k+1) * ceil(k / 2)`.
    pub fn read_se(&mut self) -> Result<i64, H264Error> {
        let k = self.read_ue()?;
        let magnitude = k.div_ceil(2) as i64;
        Ok(if k % 2 == 1 { magnitude } else { -magnitude })
    }

    /// True when payload bits remain before the final `rbsp_stop_one_bit`.
    pub fn more_rbsp_data(&self) -> bool {
        match last_set_bit(self.bytes) {
            Some(stop) => self.pos < stop,
            None => false,
        }
    }

    /// Checks that the unread tail is exactly a stop bit followed by zero bits.
    /// An already-exhausted cursor counts as valid (trailing bits absent).
    pub fn trailing_bits_valid(&self) -> bool {
        if self.remaining() == 0 {
            return true;
        }
        last_set_bit(self.bytes) == Some(self.pos)
    }

    /// Bytes from the current position to the end, with the current partial
    /// byte masked to its unread bits.
    pub fn residue(&self) -> Vec<u8> {
        if self.pos >= self.bit_len() {
            return Vec::new();
        }
        let mut out = self.bytes[self.pos / 8..].to_vec();
        let used = self.pos % 8;
        if used > 0 {
            out[0] &= 0xFF >> used;
        }
        out
    }
}

fn last_set_bit(bytes: &[u8]) -> Option<usize> {
    let (idx, byte) = bytes.iter().enumerate().rev().find(|(_, b)| **b != 0)?;
    Some(idx * 8 + 7 - byte.trailing_zeros() as usize)
}

/// MSB-first bit writer, the inverse of [`BitCursor`].
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn write_bit(&mut self, bit: bool) {
        if self.bits % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.bits % 8);
        }
        self.bits += 1;
    }

    pub fn write_bits(&mut self, value: u64, n: u32) {
        for i in (0..n).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    pub fn write_ue(&mut self, value: u64) {
        let code = value + 1;
        let len = 64 - code.leading_zeros();
        self.write_bits(0, len - 1);
        self.write_bits(code, len);
    }

    pub fn write_se(&mut self, value: i64) {
        let k = if value > 0 {
            (value as u64) * 2 - 1
        } else {
            value.unsigned_abs() * 2
        };
        self.write_ue(k);
    }

    /// Appends `rbsp_stop_one_bit` and zero alignment bits.
    pub fn write_trailing_bits(&mut self) {
        self.write_bit(true);
        while self.bits % 8 != 0 {
            self.write_bit(false);
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}
