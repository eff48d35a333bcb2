//! Minimal arbitrary-precision unsigned integers for enumerative ranks.
//!
//! The rank/unrank loops only ever need: multiply by a small scalar, exact
//! division by a small scalar, add, subtract, compare, and fixed-width bit
//! (de)serialization. Keeping the type this narrow lets every operation be a
//! single allocation-free pass over the limbs; exact division uses the
//! modular-inverse (Jebelean) scheme instead of hardware division, which is
//! what makes decoding large ranks affordable.

use std::cmp::Ordering;
use std::fmt;

use super::bits::{BitReader, BitWriter};
use crate::error::Result;

/// Nonnegative integer, little-endian 64-bit limbs, no trailing zero limbs.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Nat {
    limbs: Vec<u64>,
}

impl Nat {
    pub fn zero() -> Self {
        Nat { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        Nat { limbs: vec![1] }
    }

    pub fn from_u64(v: u64) -> Self {
        if v == 0 {
            Nat::zero()
        } else {
            Nat { limbs: vec![v] }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    /// Number of significant bits; 0 for zero.
    pub fn bit_len(&self) -> usize {
        match self.limbs.last() {
            None => 0,
            Some(top) => self.limbs.len() * 64 - top.leading_zeros() as usize,
        }
    }

    pub fn is_power_of_two(&self) -> bool {
        match self.limbs.last() {
            None => false,
            Some(top) => {
                top.is_power_of_two() && self.limbs[..self.limbs.len() - 1].iter().all(|&l| l == 0)
            }
        }
    }

    /// Overwrite with a copy of `other`, reusing the allocation.
    pub fn copy_from(&mut self, other: &Nat) {
        self.limbs.clear();
        self.limbs.extend_from_slice(&other.limbs);
    }

    fn normalize(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn mul_small(&mut self, factor: u64) {
        if factor == 0 {
            self.limbs.clear();
            return;
        }
        if factor == 1 {
            return;
        }
        let mut carry = 0u64;
        for limb in &mut self.limbs {
            let wide = *limb as u128 * factor as u128 + carry as u128;
            *limb = wide as u64;
            carry = (wide >> 64) as u64;
        }
        if carry != 0 {
            self.limbs.push(carry);
        }
    }

    /// Divide by `d`, which must divide self exactly.
    pub fn div_exact_small(&mut self, d: u64) {
        debug_assert!(d > 0);
        if d == 1 || self.is_zero() {
            return;
        }
        let tz = d.trailing_zeros();
        if tz > 0 {
            self.shr_small(tz);
        }
        let d = d >> tz;
        if d == 1 {
            return;
        }
        let inv = mod_inverse_u64(d);
        let mut borrow = 0u64;
        for limb in &mut self.limbs {
            let (cur, under) = limb.overflowing_sub(borrow);
            let q = cur.wrapping_mul(inv);
            *limb = q;
            let hi = ((q as u128 * d as u128) >> 64) as u64;
            borrow = hi + under as u64;
        }
        debug_assert_eq!(borrow, 0, "division was not exact");
        self.normalize();
    }

    /// `self = self * f / d` in one pass; the division must be exact.
    ///
    /// This is the rank-loop workhorse: the multiply carry chain, the
    /// right-shift for the even part of `d`, and the modular-inverse division
    /// all run LSB-first, so they fuse into a single sweep.
    pub fn scale_in_place(&mut self, f: u64, d: u64) {
        if self.is_zero() {
            return;
        }
        if f == 0 {
            self.limbs.clear();
            return;
        }
        if f == 1 && d == 1 {
            return;
        }
        self.limbs.push(0);
        let len = self.limbs.len();
        let div = ExactDiv::new(d);
        let mut mc = 0u64; // multiply carry
        let mut borrow = 0u64;
        if div.tz == 0 {
            for slot in self.limbs.iter_mut() {
                let wide = *slot as u128 * f as u128 + mc as u128;
                mc = (wide >> 64) as u64;
                *slot = div.step(wide as u64, &mut borrow);
            }
        } else {
            let mut pending = 0u64;
            for i in 0..len {
                let wide = self.limbs[i] as u128 * f as u128 + mc as u128;
                mc = (wide >> 64) as u64;
                let t = wide as u64;
                if i == 0 {
                    debug_assert_eq!(t & ((1u64 << div.tz) - 1), 0, "even part must divide");
                } else {
                    let s = (pending >> div.tz) | (t << (64 - div.tz));
                    self.limbs[i - 1] = div.step(s, &mut borrow);
                }
                pending = t;
            }
            self.limbs[len - 1] = div.step(pending >> div.tz, &mut borrow);
        }
        debug_assert_eq!(mc, 0);
        debug_assert_eq!(borrow, 0, "division was not exact");
        self.normalize();
    }

    /// `self = src * f / d` in one pass (exact division), reusing the
    /// allocation of `self`.
    pub fn scale_from(&mut self, src: &Nat, f: u64, d: u64) {
        if src.is_zero() || f == 0 {
            self.limbs.clear();
            return;
        }
        let k = src.limbs.len();
        self.limbs.clear();
        self.limbs.resize(k + 1, 0);
        let div = ExactDiv::new(d);
        let mut mc = 0u64;
        let mut borrow = 0u64;
        if div.tz == 0 {
            for (dst, &limb) in self.limbs.iter_mut().zip(&src.limbs) {
                let wide = limb as u128 * f as u128 + mc as u128;
                mc = (wide >> 64) as u64;
                *dst = div.step(wide as u64, &mut borrow);
            }
            self.limbs[k] = div.step(mc, &mut borrow);
        } else {
            let mut pending = 0u64;
            for i in 0..k {
                let wide = src.limbs[i] as u128 * f as u128 + mc as u128;
                mc = (wide >> 64) as u64;
                let t = wide as u64;
                if i == 0 {
                    debug_assert_eq!(t & ((1u64 << div.tz) - 1), 0, "even part must divide");
                } else {
                    let s = (pending >> div.tz) | (t << (64 - div.tz));
                    self.limbs[i - 1] = div.step(s, &mut borrow);
                }
                pending = t;
            }
            let s = (pending >> div.tz) | (mc << (64 - div.tz));
            self.limbs[k - 1] = div.step(s, &mut borrow);
            self.limbs[k] = div.step(mc >> div.tz, &mut borrow);
        }
        debug_assert_eq!(borrow, 0, "division was not exact");
        self.normalize();
    }

    /// `self += src * f / d` in one pass (exact division).
    pub fn add_scaled(&mut self, src: &Nat, f: u64, d: u64) {
        if src.is_zero() || f == 0 {
            return;
        }
        let k = src.limbs.len();
        if self.limbs.len() < k + 2 {
            self.limbs.resize(k + 2, 0);
        }
        let div = ExactDiv::new(d);
        let mut mc = 0u64;
        let mut borrow = 0u64;
        let mut carry = 0u64; // addition carry
        let add_at = |limbs: &mut Vec<u64>, i: usize, q: u64, carry: &mut u64| {
            let (a, c1) = limbs[i].overflowing_add(q);
            let (b, c2) = a.overflowing_add(*carry);
            limbs[i] = b;
            *carry = (c1 as u64) + (c2 as u64);
        };
        if div.tz == 0 {
            for i in 0..=k {
                let s = if i < k {
                    let wide = src.limbs[i] as u128 * f as u128 + mc as u128;
                    mc = (wide >> 64) as u64;
                    wide as u64
                } else {
                    mc
                };
                let q = div.step(s, &mut borrow);
                add_at(&mut self.limbs, i, q, &mut carry);
            }
        } else {
            let mut pending = 0u64;
            for i in 0..=k {
                let t = if i < k {
                    let wide = src.limbs[i] as u128 * f as u128 + mc as u128;
                    mc = (wide >> 64) as u64;
                    wide as u64
                } else {
                    mc
                };
                if i == 0 {
                    debug_assert_eq!(t & ((1u64 << div.tz) - 1), 0, "even part must divide");
                } else {
                    let s = (pending >> div.tz) | (t << (64 - div.tz));
                    let q = div.step(s, &mut borrow);
                    add_at(&mut self.limbs, i - 1, q, &mut carry);
                }
                pending = t;
            }
            let q = div.step(pending >> div.tz, &mut borrow);
            add_at(&mut self.limbs, k, q, &mut carry);
        }
        debug_assert_eq!(borrow, 0, "division was not exact");
        // propagate the leftover carry
        let mut i = k + 1;
        while carry != 0 {
            if i >= self.limbs.len() {
                self.limbs.push(0);
            }
            let (b, c) = self.limbs[i].overflowing_add(carry);
            self.limbs[i] = b;
            carry = c as u64;
            i += 1;
        }
        self.normalize();
    }

    /// Full product, schoolbook below a threshold and Karatsuba above it.
    pub fn mul_nat(&self, other: &Nat) -> Nat {
        if self.is_zero() || other.is_zero() {
            return Nat::zero();
        }
        let mut limbs = vec![0u64; self.limbs.len() + other.limbs.len()];
        mul_into(&mut limbs, &self.limbs, &other.limbs);
        let mut out = Nat { limbs };
        out.normalize();
        out
    }

    /// Divide by the product of `factors`, which must divide self exactly.
    /// Factors are packed into u64 chunks so each pass retires several.
    pub fn div_exact_factored(&mut self, factors: impl IntoIterator<Item = u64>) {
        let mut chunk = 1u64;
        for f in factors {
            debug_assert!(f > 0);
            if chunk > u64::MAX / f {
                self.div_exact_small(chunk);
                chunk = 1;
            }
            chunk *= f;
        }
        self.div_exact_small(chunk);
    }

    /// One unranking step, fused: `target -= m * pfx / r` and then
    /// `m = m * c / r`, all divisions exact, in a single sweep over `m`.
    /// Requires `m * pfx / r <= target` (the caller has settled the symbol).
    pub fn unrank_step(m: &mut Nat, target: &mut Nat, pfx: u64, c: u64, r: u64) {
        if m.is_zero() {
            return;
        }
        if pfx == 0 {
            if c != r {
                m.scale_in_place(c, r);
            }
            return;
        }
        m.limbs.push(0);
        let len = m.limbs.len();
        if target.limbs.len() < len {
            target.limbs.resize(len, 0);
        }
        let div = ExactDiv::new(r);
        let (mut mc_m, mut bor_m) = (0u64, 0u64);
        let (mut mc_l, mut bor_l) = (0u64, 0u64);
        let mut sub_borrow = 0u64;
        let subtract_at = |target: &mut Nat, i: usize, low: u64, sub_borrow: &mut u64| {
            let (a, b1) = target.limbs[i].overflowing_sub(low);
            let (b, b2) = a.overflowing_sub(*sub_borrow);
            target.limbs[i] = b;
            *sub_borrow = (b1 as u64) + (b2 as u64);
        };
        if div.tz == 0 {
            let t_limbs = &mut target.limbs[..len];
            for (mi, ti) in m.limbs.iter_mut().zip(t_limbs.iter_mut()) {
                let v = *mi;
                let wm = v as u128 * c as u128 + mc_m as u128;
                mc_m = (wm >> 64) as u64;
                *mi = div.step(wm as u64, &mut bor_m);
                let wl = v as u128 * pfx as u128 + mc_l as u128;
                mc_l = (wl >> 64) as u64;
                let low = div.step(wl as u64, &mut bor_l);
                let (a, b1) = ti.overflowing_sub(low);
                let (b, b2) = a.overflowing_sub(sub_borrow);
                *ti = b;
                sub_borrow = (b1 as u64) + (b2 as u64);
            }
        } else {
            let (mut pend_m, mut pend_l) = (0u64, 0u64);
            for i in 0..len {
                let v = m.limbs[i];
                let wm = v as u128 * c as u128 + mc_m as u128;
                mc_m = (wm >> 64) as u64;
                let tm = wm as u64;
                let wl = v as u128 * pfx as u128 + mc_l as u128;
                mc_l = (wl >> 64) as u64;
                let tl = wl as u64;
                if i > 0 {
                    let sm = (pend_m >> div.tz) | (tm << (64 - div.tz));
                    m.limbs[i - 1] = div.step(sm, &mut bor_m);
                    let sl = (pend_l >> div.tz) | (tl << (64 - div.tz));
                    let low = div.step(sl, &mut bor_l);
                    subtract_at(target, i - 1, low, &mut sub_borrow);
                }
                pend_m = tm;
                pend_l = tl;
            }
            m.limbs[len - 1] = div.step(pend_m >> div.tz, &mut bor_m);
            let low = div.step(pend_l >> div.tz, &mut bor_l);
            subtract_at(target, len - 1, low, &mut sub_borrow);
        }
        debug_assert_eq!(bor_m, 0, "division was not exact");
        debug_assert_eq!(bor_l, 0, "division was not exact");
        // a leftover borrow would walk into target limbs beyond m's length
        let mut i = len;
        while sub_borrow != 0 && i < target.limbs.len() {
            let (b, under) = target.limbs[i].overflowing_sub(sub_borrow);
            target.limbs[i] = b;
            sub_borrow = under as u64;
            i += 1;
        }
        debug_assert_eq!(sub_borrow, 0, "low exceeded the target");
        m.normalize();
        target.normalize();
    }

    fn shr_small(&mut self, k: u32) {
        debug_assert!(k < 64);
        if k == 0 {
            return;
        }
        let len = self.limbs.len();
        for i in 0..len {
            let hi = if i + 1 < len { self.limbs[i + 1] } else { 0 };
            self.limbs[i] = (self.limbs[i] >> k) | (hi << (64 - k));
        }
        self.normalize();
    }

    pub fn add_assign(&mut self, other: &Nat) {
        if other.limbs.len() > self.limbs.len() {
            self.limbs.resize(other.limbs.len(), 0);
        }
        let mut carry = 0u64;
        for (i, limb) in self.limbs.iter_mut().enumerate() {
            let rhs = other.limbs.get(i).copied().unwrap_or(0);
            let (a, c1) = limb.overflowing_add(rhs);
            let (b, c2) = a.overflowing_add(carry);
            *limb = b;
            carry = (c1 as u64) + (c2 as u64);
        }
        if carry != 0 {
            self.limbs.push(carry);
        }
    }

    /// Subtract `other`, which must not exceed self.
    pub fn sub_assign(&mut self, other: &Nat) {
        debug_assert!(*self >= *other);
        let mut borrow = 0u64;
        for (i, limb) in self.limbs.iter_mut().enumerate() {
            let rhs = other.limbs.get(i).copied().unwrap_or(0);
            let (a, b1) = limb.overflowing_sub(rhs);
            let (b, b2) = a.overflowing_sub(borrow);
            *limb = b;
            borrow = (b1 as u64) + (b2 as u64);
        }
        debug_assert_eq!(borrow, 0, "subtraction underflowed");
        self.normalize();
    }

    /// Approximate value as `mantissa * 2^exp` with full f64 precision on the
    /// top 128 bits. Used only to guide searches that are verified exactly.
    pub fn to_f2(&self) -> (f64, i64) {
        match self.limbs.len() {
            0 => (0.0, 0),
            1 => (self.limbs[0] as f64, 0),
            n => {
                let mant =
                    self.limbs[n - 1] as f64 * 18_446_744_073_709_551_616.0 + self.limbs[n - 2] as f64;
                (mant, 64 * (n as i64 - 2))
            }
        }
    }

    /// Emit exactly `width` bits, big-endian with leading zeros.
    pub fn write_bits_be(&self, width: usize, w: &mut BitWriter) {
        debug_assert!(self.bit_len() <= width);
        let lead = width % 8;
        let full_bytes = width / 8;
        if lead > 0 {
            w.write_bits(self.byte_at(full_bytes) as u64, lead);
        }
        for b in (0..full_bytes).rev() {
            w.write_bits(self.byte_at(b) as u64, 8);
        }
    }

    /// Byte `b` counted from the least significant end.
    fn byte_at(&self, b: usize) -> u8 {
        let limb = self.limbs.get(b / 8).copied().unwrap_or(0);
        (limb >> (8 * (b % 8))) as u8
    }

    /// Read exactly `width` big-endian bits.
    pub fn read_bits_be(width: usize, r: &mut BitReader) -> Result<Nat> {
        let lead = width % 8;
        let full_bytes = width / 8;
        let mut limbs = vec![0u64; width.div_ceil(64)];
        let mut put = |b: usize, byte: u64| {
            if byte != 0 {
                limbs[b / 8] |= byte << (8 * (b % 8));
            }
        };
        if lead > 0 {
            put(full_bytes, r.read_bits(lead)?);
        }
        for b in (0..full_bytes).rev() {
            put(b, r.read_bits(8)?);
        }
        let mut n = Nat { limbs };
        n.normalize();
        Ok(n)
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::from_u64(v)
    }
}

impl PartialEq<u64> for Nat {
    fn eq(&self, other: &u64) -> bool {
        match (self.limbs.len(), *other) {
            (0, v) => v == 0,
            (1, v) => self.limbs[0] == v,
            _ => false,
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.limbs.len() != other.limbs.len() {
            return self.limbs.len().cmp(&other.limbs.len());
        }
        for (a, b) in self.limbs.iter().rev().zip(other.limbs.iter().rev()) {
            if a != b {
                return a.cmp(b);
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut chunks = Vec::new();
        let mut value = self.clone();
        while !value.is_zero() {
            chunks.push(value.div_rem_small(10_000_000_000_000_000_000));
        }
        let mut out = chunks.pop().unwrap().to_string();
        for chunk in chunks.into_iter().rev() {
            out.push_str(&format!("{chunk:019}"));
        }
        write!(f, "{out}")
    }
}

impl Nat {
    /// General small division with remainder; slow, for display only.
    fn div_rem_small(&mut self, d: u64) -> u64 {
        let mut rem = 0u128;
        for limb in self.limbs.iter_mut().rev() {
            let cur = (rem << 64) | *limb as u128;
            *limb = (cur / d as u128) as u64;
            rem = cur % d as u128;
        }
        self.normalize();
        rem as u64
    }
}

const KARATSUBA_THRESHOLD: usize = 24;

/// `dst = a * b`; `dst` must be zeroed with length `a.len() + b.len()`.
fn mul_into(dst: &mut [u64], a: &[u64], b: &[u64]) {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return;
    }
    if short.len() <= KARATSUBA_THRESHOLD {
        mul_schoolbook(dst, long, short);
    } else if long.len() >= 2 * short.len() {
        // Unbalanced: multiply block-wise against chunks of the long side.
        let step = short.len();
        let mut partial = vec![0u64; 2 * step];
        for (i, chunk) in long.chunks(step).enumerate() {
            partial.truncate(0);
            partial.resize(chunk.len() + step, 0);
            mul_into(&mut partial, chunk, short);
            add_slices(&mut dst[i * step..], &partial);
        }
    } else {
        mul_karatsuba(dst, long, short);
    }
}

fn mul_schoolbook(dst: &mut [u64], a: &[u64], b: &[u64]) {
    for (i, &bi) in b.iter().enumerate() {
        if bi == 0 {
            continue;
        }
        let mut carry = 0u64;
        for (j, &aj) in a.iter().enumerate() {
            let wide = aj as u128 * bi as u128 + dst[i + j] as u128 + carry as u128;
            dst[i + j] = wide as u64;
            carry = (wide >> 64) as u64;
        }
        dst[i + a.len()] = dst[i + a.len()].wrapping_add(carry);
    }
}

fn mul_karatsuba(dst: &mut [u64], a: &[u64], b: &[u64]) {
    debug_assert!(a.len() >= b.len() && b.len() > KARATSUBA_THRESHOLD);
    let h = a.len().div_ceil(2);
    let (a0, a1) = a.split_at(h.min(a.len()));
    let (b0, b1) = b.split_at(h.min(b.len()));

    // z0 = a0*b0 into the low part, z2 = a1*b1 into the high part.
    let mut z0 = vec![0u64; a0.len() + b0.len()];
    mul_into(&mut z0, a0, b0);
    let mut z2 = vec![0u64; a1.len() + b1.len()];
    if !b1.is_empty() && !a1.is_empty() {
        mul_into(&mut z2, a1, b1);
    }

    // z1 = (a0+a1)(b0+b1) - z0 - z2
    let sa = add_to_vec(a0, a1);
    let sb = add_to_vec(b0, b1);
    let mut z1 = vec![0u64; sa.len() + sb.len()];
    mul_into(&mut z1, &sa, &sb);
    sub_slices(&mut z1, &z0);
    sub_slices(&mut z1, &z2);
    while z1.last() == Some(&0) {
        z1.pop();
    }

    dst[..z0.len()].copy_from_slice(&z0);
    add_slices(&mut dst[h..], &z1);
    add_slices(&mut dst[2 * h..], &z2);
}

fn add_to_vec(a: &[u64], b: &[u64]) -> Vec<u64> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(long.len() + 1);
    out.extend_from_slice(long);
    out.push(0);
    add_slices(&mut out, short);
    out
}

/// `dst += src` in place; `dst` must be long enough to absorb the carry.
fn add_slices(dst: &mut [u64], src: &[u64]) {
    let mut carry = 0u64;
    for (i, &s) in src.iter().enumerate() {
        let (x, c1) = dst[i].overflowing_add(s);
        let (y, c2) = x.overflowing_add(carry);
        dst[i] = y;
        carry = (c1 as u64) + (c2 as u64);
    }
    let mut i = src.len();
    while carry != 0 {
        let (y, c) = dst[i].overflowing_add(carry);
        dst[i] = y;
        carry = c as u64;
        i += 1;
    }
}

/// `dst -= src` in place; `dst >= src` as numbers.
fn sub_slices(dst: &mut [u64], src: &[u64]) {
    let mut borrow = 0u64;
    for (i, &s) in src.iter().enumerate() {
        let (x, b1) = dst[i].overflowing_sub(s);
        let (y, b2) = x.overflowing_sub(borrow);
        dst[i] = y;
        borrow = (b1 as u64) + (b2 as u64);
    }
    let mut i = src.len();
    while borrow != 0 {
        let (y, b) = dst[i].overflowing_sub(borrow);
        dst[i] = y;
        borrow = b as u64;
        i += 1;
    }
}

/// Precomputed state for exact division by a fixed small divisor: the odd
/// part's inverse modulo 2^64 plus the power-of-two shift.
#[derive(Clone, Copy)]
struct ExactDiv {
    tz: u32,
    d_odd: u64,
    inv: u64,
}

impl ExactDiv {
    #[inline]
    fn new(d: u64) -> Self {
        debug_assert!(d > 0);
        let tz = d.trailing_zeros();
        let d_odd = d >> tz;
        ExactDiv {
            tz,
            d_odd,
            inv: mod_inverse_u64(d_odd),
        }
    }

    /// One limb of the quotient, LSB-first (Jebelean's exact division).
    #[inline(always)]
    fn step(&self, s: u64, borrow: &mut u64) -> u64 {
        let (cur, under) = s.overflowing_sub(*borrow);
        let q = cur.wrapping_mul(self.inv);
        *borrow = (((q as u128 * self.d_odd as u128) >> 64) as u64) + under as u64;
        q
    }
}

/// Inverse of an odd number modulo 2^64 by Newton iteration.
fn mod_inverse_u64(d: u64) -> u64 {
    debug_assert!(d % 2 == 1);
    let mut x = d.wrapping_mul(3) ^ 2; // 5 correct low bits
    for _ in 0..4 {
        x = x.wrapping_mul(2u64.wrapping_sub(d.wrapping_mul(x)));
    }
    debug_assert_eq!(d.wrapping_mul(x), 1);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_big(n: &Nat) -> BigUint {
        let mut b = BigUint::default();
        for &limb in n.limbs.iter().rev() {
            b = (b << 64) + limb;
        }
        b
    }

    #[test]
    fn matches_reference_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut nat = Nat::from_u64(rng.gen_range(1..u64::MAX));
            let mut big = to_big(&nat);
            let mut divisors: Vec<u64> = Vec::new();
            for _ in 0..60 {
                match rng.gen_range(0..4) {
                    0 => {
                        let f = rng.gen_range(1..1u64 << 32);
                        nat.mul_small(f);
                        big *= f;
                        divisors.push(f);
                    }
                    1 if !divisors.is_empty() => {
                        let f = divisors.swap_remove(rng.gen_range(0..divisors.len()));
                        nat.div_exact_small(f);
                        big /= f;
                    }
                    2 => {
                        let other = Nat::from_u64(rng.gen());
                        big += to_big(&other);
                        nat.add_assign(&other);
                        divisors.clear(); // sums are no longer divisible
                    }
                    _ => {
                        let other = Nat::from_u64(rng.gen_range(0..1u64 << 30));
                        if nat >= other {
                            big -= to_big(&other);
                            nat.sub_assign(&other);
                            divisors.clear();
                        }
                    }
                }
                assert_eq!(to_big(&nat), big);
                assert_eq!(nat.bit_len() as u64, big.bits());
            }
        }
    }

    #[test]
    fn ordering_and_scalar_equality() {
        let mut a = Nat::from_u64(u64::MAX);
        a.mul_small(u64::MAX);
        let b = Nat::from_u64(u64::MAX);
        assert!(a > b);
        assert!(b < a);
        assert_eq!(Nat::from_u64(7), 7u64);
        assert_ne!(a, 7u64);
        assert!(Nat::zero() == 0u64);
    }

    #[test]
    fn bit_serialization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut n = Nat::from_u64(rng.gen());
            for _ in 0..rng.gen_range(0..6) {
                n.mul_small(rng.gen_range(1..u64::MAX));
            }
            let width = n.bit_len() + rng.gen_range(0..17);
            let mut w = BitWriter::new();
            n.write_bits_be(width, &mut w);
            assert_eq!(w.bit_len(), width);
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            let back = Nat::read_bits_be(width, &mut r).unwrap();
            assert_eq!(back, n);
        }
    }

    #[test]
    fn fused_scale_matches_separate_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let mut value = Nat::from_u64(rng.gen());
            for _ in 0..rng.gen_range(0..5) {
                value.mul_small(rng.gen());
            }
            let f = rng.gen_range(0..1u64 << 32);
            let d = rng.gen_range(1..1u64 << 32);
            // make the division exact by construction: scale up by d first
            let mut exact = value.clone();
            exact.mul_small(d);
            let mut reference = exact.clone();
            reference.mul_small(f);
            reference.div_exact_small(d);

            let mut fused = exact.clone();
            fused.scale_in_place(f, d);
            assert_eq!(fused, reference);

            let mut from = Nat::zero();
            from.scale_from(&exact, f, d);
            assert_eq!(from, reference);
        }
    }

    #[test]
    fn multiplication_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..120 {
            // sizes straddling the Karatsuba threshold, plus unbalanced pairs
            let la = rng.gen_range(0..90);
            let lb = rng.gen_range(0..90);
            let mut a = Nat::zero();
            let mut b = Nat::zero();
            for _ in 0..la {
                a.mul_small(rng.gen_range(1..u64::MAX));
                a.add_assign(&Nat::from_u64(rng.gen()));
            }
            for _ in 0..lb {
                b.mul_small(rng.gen_range(1..u64::MAX));
                b.add_assign(&Nat::from_u64(rng.gen()));
            }
            let got = a.mul_nat(&b);
            let want = to_big(&a) * to_big(&b);
            assert_eq!(to_big(&got), want, "trial {trial} ({la} x {lb})");
        }
    }

    #[test]
    fn add_scaled_matches_separate_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..200 {
            let mut acc = Nat::from_u64(rng.gen());
            acc.mul_small(rng.gen());
            let mut src = Nat::from_u64(rng.gen_range(1..u64::MAX));
            for _ in 0..rng.gen_range(0..4) {
                src.mul_small(rng.gen_range(1..u64::MAX));
            }
            let f = rng.gen_range(0..1u64 << 32);
            let d = rng.gen_range(1..1u64 << 32);
            let mut exact_src = src.clone();
            exact_src.mul_small(d);

            let mut want = exact_src.clone();
            want.mul_small(f);
            want.div_exact_small(d);
            want.add_assign(&acc);

            let mut got = acc.clone();
            got.add_scaled(&exact_src, f, d);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn unrank_step_matches_separate_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..200 {
            let r = rng.gen_range(2..1u64 << 20);
            let c = rng.gen_range(1..=r);
            let pfx = rng.gen_range(0..r - c + 1);
            // m divisible by r so every quotient is exact
            let mut m = Nat::from_u64(rng.gen_range(1..u64::MAX));
            for _ in 0..rng.gen_range(0..4) {
                m.mul_small(rng.gen_range(1..u64::MAX));
            }
            m.mul_small(r);
            let mut low = m.clone();
            low.mul_small(pfx);
            low.div_exact_small(r);
            // target = low + slack keeps the subtraction legal
            let mut target = low.clone();
            target.add_assign(&Nat::from_u64(rng.gen()));

            let mut want_m = m.clone();
            want_m.mul_small(c);
            want_m.div_exact_small(r);
            let mut want_target = target.clone();
            want_target.sub_assign(&low);

            let mut got_m = m.clone();
            let mut got_target = target.clone();
            Nat::unrank_step(&mut got_m, &mut got_target, pfx, c, r);
            assert_eq!(got_m, want_m);
            assert_eq!(got_target, want_target);
        }
    }

    #[test]
    fn factored_division() {
        let mut value = Nat::one();
        let factors: Vec<u64> = (1..=40).collect();
        for &f in &factors {
            value.mul_small(f);
        }
        let mut reduced = value.clone();
        reduced.div_exact_factored(factors.iter().copied());
        assert_eq!(reduced, 1u64);
    }

    #[test]
    fn fused_scale_edge_cases() {
        let mut z = Nat::zero();
        z.scale_in_place(7, 3);
        assert!(z.is_zero());
        let mut v = Nat::from_u64(12);
        v.scale_in_place(0, 5);
        assert!(v.is_zero());
        let mut v = Nat::from_u64(12);
        v.scale_in_place(1, 4);
        assert_eq!(v, 3u64);
        let mut v = Nat::from_u64(12);
        v.scale_in_place(5, 1);
        assert_eq!(v, 60u64);
        let mut dst = Nat::from_u64(999);
        dst.scale_from(&Nat::from_u64(21), 2, 6);
        assert_eq!(dst, 7u64);
    }

    #[test]
    fn power_of_two_detection() {
        let mut n = Nat::one();
        for _ in 0..200 {
            assert!(n.is_power_of_two());
            n.mul_small(2);
        }
        n.add_assign(&Nat::one());
        assert!(!n.is_power_of_two());
        assert!(!Nat::zero().is_power_of_two());
    }

    #[test]
    fn decimal_display() {
        let mut n = Nat::from_u64(1);
        for _ in 0..25 {
            n.mul_small(10);
        }
        assert_eq!(n.to_string(), "10000000000000000000000000");
        assert_eq!(Nat::zero().to_string(), "0");
    }

    #[test]
    fn float_approximation_tracks_magnitude() {
        let mut n = Nat::from_u64(3);
        for _ in 0..50 {
            n.mul_small(u64::MAX);
        }
        let (mant, exp) = n.to_f2();
        let approx_log2 = mant.log2() + exp as f64;
        let exact_log2 = to_big(&n).bits() as f64;
        assert!((approx_log2 - exact_log2).abs() < 1.0);
    }
}
