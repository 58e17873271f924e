//! Bitwise CRC over message bits, used for CRC-aided list decoding.
//!
//! Non-reflected, zero initial value, no final XOR: the checksum is the
//! remainder of `payload(x) * x^width` modulo the generator.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Generator polynomial without its leading `x^width` term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrcSpec {
    pub poly: u64,
    pub width: u32,
}

impl CrcSpec {
    /// CRC-8 with generator `0x07`.
    pub const CRC8: CrcSpec = CrcSpec { poly: 0x07, width: 8 };

    /// CRC-16 with generator `0x1021`.
    pub const CRC16: CrcSpec = CrcSpec {
        poly: 0x1021,
        width: 16,
    };

    pub fn new(poly: u64, width: u32) -> Result<Self> {
        if width == 0 || width > 63 {
            return Err(Error::InvalidConfig(format!(
                "CRC width {width} outside 1..=63"
            )));
        }
        if poly >> width != 0 {
            return Err(Error::InvalidConfig(format!(
                "CRC polynomial {poly:#x} does not fit in {width} bits"
            )));
        }
        Ok(Self { poly, width })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Checksum bits, most significant first.
    pub fn checksum(&self, bits: &[u8]) -> Vec<u8> {
        let top = 1u64 << (self.width - 1);
        let mask = if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        };
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg & top) != 0) ^ (b & 1 == 1);
            reg = (reg << 1) & mask;
            if feedback {
                reg ^= self.poly;
            }
        }
        (0..self.width)
            .rev()
            .map(|s| ((reg >> s) & 1) as u8)
            .collect()
    }
}

/// Appends the checksum of `payload`.
pub fn crc_attach(payload: &[u8], crc: &CrcSpec) -> Result<Vec<u8>> {
    if crc.width() >= payload.len() {
        return Err(Error::InvalidConfig(format!(
            "CRC width {} must be below the payload length {}",
            crc.width,
            payload.len()
        )));
    }
    let mut out = payload.to_vec();
    out.extend(crc.checksum(payload));
    Ok(out)
}

/// Checks payload-then-checksum bits. Words shorter than the checksum fail.
pub fn crc_check(bits: &[u8], crc: &CrcSpec) -> bool {
    let w = crc.width();
    if bits.len() <= w {
        return false;
    }
    let (payload, tail) = bits.split_at(bits.len() - w);
    crc.checksum(payload) == tail
}
