//! MSB-first bit packing for the container payload.

use crate::error::{Error, Result};

pub(crate) struct BitWriter {
    buf: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self {
            buf: Vec::new(),
            acc: 0,
            nbits: 0,
        }
    }

    /// Append the low `count` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u32, count: u32) {
        debug_assert!(count <= 32);
        debug_assert!(count == 32 || u64::from(value) < (1u64 << count));
        self.acc = (self.acc << count) | u64::from(value);
        self.nbits += count;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.buf.push((self.acc >> self.nbits) as u8);
        }
    }

    /// Pad with zero bits to the next byte boundary.
    pub fn align_byte(&mut self) {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.write_bits(0, pad);
        }
    }

    pub fn into_bytes(mut self) -> Vec<u8> {
        self.align_byte();
        self.buf
    }
}

pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u64,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            pos: 0,
            acc: 0,
            nbits: 0,
        }
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u32> {
        debug_assert!(count >= 1 && count <= 32);
        while self.nbits < count {
            let byte = *self.bytes.get(self.pos).ok_or(Error::TruncatedPayload {
                expected: self.pos + 1,
                found: self.bytes.len(),
            })?;
            self.pos += 1;
            self.acc = (self.acc << 8) | u64::from(byte);
            self.nbits += 8;
        }
        self.nbits -= count;
        let value = (self.acc >> self.nbits) & ((1u64 << count) - 1);
        Ok(value as u32)
    }
}
