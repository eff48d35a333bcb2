//! Non-cryptographic hasher for the interning tables (multiply-xor spread,
//! fxhash-style). Keys are program-derived, so DoS hardening buys nothing
//! here and the default hasher's per-call overhead shows up in profiles.

use std::hash::{BuildHasherDefault, Hasher};

const SPREAD: u64 = 0x51_7c_c1_b7_27_22_0a_95;

#[derive(Default)]
pub struct SpreadHasher(u64);

impl Hasher for SpreadHasher {
    #[inline]
    fn finish(&self) -> u64 {
        self.0
    }

    #[inline]
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
        // length-extension guard for variable-width keys
        self.write_u64(bytes.len() as u64);
    }

    #[inline]
    fn write_u32(&mut self, v: u32) {
        self.write_u64(v as u64);
    }

    #[inline]
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(SPREAD);
    }

    #[inline]
    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
}

pub type FastBuild = BuildHasherDefault<SpreadHasher>;
pub type FastMap<K, V> = std::collections::HashMap<K, V, FastBuild>;
pub type FastSet<K> = std::collections::HashSet<K, FastBuild>;
