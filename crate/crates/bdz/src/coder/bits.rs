//! MSB-first bit streams and Elias gamma codes.

use crate::error::{Error, Result};

/// Append-only bit sink, packed MSB-first and zero-padded on `finish`.
#[derive(Default, Debug)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn write_bit(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        if self.bit_len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit != 0 {
            let last = self.bytes.last_mut().unwrap();
            *last |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    /// Low `width` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, width: usize) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            self.write_bit(((value >> i) & 1) as u8);
        }
    }

    pub fn write_zeros(&mut self, count: usize) {
        for _ in 0..count {
            self.write_bit(0);
        }
    }

    /// Unary run: `count` zeros then a single one.
    pub fn write_run(&mut self, count: usize) {
        self.write_zeros(count);
        self.write_bit(1);
    }

    /// Elias gamma code of `m >= 1`: `floor(log2 m)` zeros, then the binary
    /// digits of `m` starting at the leading one.
    pub fn write_gamma(&mut self, m: u64) -> Result<()> {
        if m == 0 {
            return Err(Error::domain("gamma code is defined for m >= 1"));
        }
        let digits = 64 - m.leading_zeros() as usize;
        self.write_zeros(digits - 1);
        self.write_bits(m, digits);
        Ok(())
    }

    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Gamma codeword of `m` as a 0/1 vector.
pub fn elias_gamma(m: u64) -> Result<Vec<u8>> {
    let mut w = BitWriter::new();
    w.write_gamma(m)?;
    let bit_len = w.bit_len();
    let bytes = w.finish();
    let mut r = BitReader::new(&bytes);
    (0..bit_len).map(|_| r.read_bit()).collect()
}

/// Cursor over a packed MSB-first bit buffer; reads past the end fail with a
/// corrupt-input error.
#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    pub fn read_bit(&mut self) -> Result<u8> {
        if self.pos >= self.bytes.len() * 8 {
            return Err(Error::corrupt("bit stream ended early"));
        }
        let bit = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: usize) -> Result<u64> {
        debug_assert!(width <= 64);
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | self.read_bit()? as u64;
        }
        Ok(value)
    }

    /// Count zeros before the terminating one; fails if the run exceeds
    /// `max_zeros`.
    pub fn read_run(&mut self, max_zeros: usize) -> Result<usize> {
        let mut zeros = 0usize;
        loop {
            match self.read_bit()? {
                1 => return Ok(zeros),
                _ => {
                    zeros += 1;
                    if zeros > max_zeros {
                        return Err(Error::corrupt("unary run exceeds its bound"));
                    }
                }
            }
        }
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let zeros = self.read_run(63)?;
        let rest = self.read_bits(zeros)?;
        Ok((1u64 << zeros) | rest)
    }
}

/// Unpack bytes into one bit per element, MSB first.
pub fn bits_from_bytes(bytes: &[u8]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in (0..8).rev() {
            bits.push((b >> i) & 1);
        }
    }
    bits
}

/// Pack bits into bytes, MSB first, zero-padding the final byte.
pub fn bytes_from_bits(bits: &[u8]) -> Vec<u8> {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &bit) in bits.iter().enumerate() {
        if bit != 0 {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(elias_gamma(1).unwrap(), vec![1]);
        assert_eq!(elias_gamma(2).unwrap(), vec![0, 1, 0]);
        assert_eq!(elias_gamma(5).unwrap(), vec![0, 0, 1, 0, 1]);
        assert!(elias_gamma(0).is_err());
    }

    #[test]
    fn gamma_round_trip() {
        let mut w = BitWriter::new();
        let values = [1u64, 2, 3, 4, 5, 64, 65535, 1 << 40, u64::MAX];
        for &v in &values {
            w.write_gamma(v).unwrap();
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for &v in &values {
            assert_eq!(r.read_gamma().unwrap(), v);
        }
    }

    #[test]
    fn reads_fail_past_the_end() {
        let mut r = BitReader::new(&[0xFF]);
        assert_eq!(r.read_bits(8).unwrap(), 0xFF);
        assert!(r.read_bit().unwrap_err().is_corrupt());
        let mut r = BitReader::new(&[0x00]);
        assert!(r.read_gamma().unwrap_err().is_corrupt());
    }

    #[test]
    fn packing_round_trip() {
        let bits: Vec<u8> = (0..131u32).map(|i| (((i * 7) >> 2) & 1) as u8).collect();
        let packed = bytes_from_bits(&bits);
        let mut unpacked = bits_from_bytes(&packed);
        unpacked.truncate(bits.len());
        assert!(unpacked[bits.len()..].iter().all(|&b| b == 0));
        assert_eq!(unpacked, bits);
    }

    #[test]
    fn writer_packs_msb_first() {
        let mut w = BitWriter::new();
        w.write_bits(0b1011, 4);
        w.write_bit(1);
        assert_eq!(w.bit_len(), 5);
        assert_eq!(w.finish(), vec![0b1011_1000]);
    }
}
