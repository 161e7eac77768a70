//! Binarization of integers and the context sets used for block records.
//!
//! An unsigned value `u` is coded as its magnitude class `k = floor(log2(u+1))`
//! in unary, followed by the `k` low bits of `u + 1`. Classes up to
//! [`TREE_CLASSES`] code those bits through a binary tree of contexts, which
//! makes small values an exact adaptive multi-symbol model; larger classes use
//! one context per bit position. Class [`ESCAPE_CLASS`] and above escape to a
//! raw 32-bit value.

use super::range_coder::{BitModel, RangeDecoder, RangeEncoder};

pub const ESCAPE_CLASS: usize = 16;
pub const TREE_CLASSES: usize = 7;

/// Anything that consumes binary decisions: a real encoder or a cost meter.
pub trait BinSink {
    fn bit(&mut self, model: &mut BitModel, bit: bool);
    fn bypass(&mut self, bit: bool);
}

impl BinSink for RangeEncoder {
    #[inline]
    fn bit(&mut self, model: &mut BitModel, bit: bool) {
        self.encode(model, bit);
    }

    #[inline]
    fn bypass(&mut self, bit: bool) {
        self.encode_bypass(bit);
    }
}

/// Accumulates ideal code length in bits while updating models exactly as an
/// encoder would.
#[derive(Debug, Clone, Copy, Default)]
pub struct CostMeter {
    pub bits: f64,
}

impl BinSink for CostMeter {
    #[inline]
    fn bit(&mut self, model: &mut BitModel, bit: bool) {
        self.bits += model.cost(bit);
        model.update(bit);
    }

    #[inline]
    fn bypass(&mut self, _bit: bool) {
        self.bits += 1.0;
    }
}

#[inline]
pub fn zigzag(v: i32) -> u32 {
    ((v << 1) ^ (v >> 31)) as u32
}

#[inline]
pub fn unzigzag(u: u32) -> i32 {
    ((u >> 1) as i32) ^ -((u & 1) as i32)
}

/// Contexts for one family of unsigned integers.
#[derive(Debug, Clone)]
pub struct UintContexts {
    class: [BitModel; ESCAPE_CLASS],
    /// Tree for class `k` occupies nodes `[2^k, 2^(k+1))`; node 0 is unused.
    tree: Vec<BitModel>,
    bits: [[BitModel; ESCAPE_CLASS]; ESCAPE_CLASS],
}

impl Default for UintContexts {
    fn default() -> Self {
        UintContexts {
            class: [BitModel::default(); ESCAPE_CLASS],
            tree: vec![BitModel::default(); 1 << (TREE_CLASSES + 1)],
            bits: [[BitModel::default(); ESCAPE_CLASS]; ESCAPE_CLASS],
        }
    }
}

impl UintContexts {
    pub fn put<S: BinSink>(&mut self, sink: &mut S, value: u32) {
        let v = value as u64 + 1;
        let k = (63 - v.leading_zeros()) as usize;
        if k >= ESCAPE_CLASS {
            for m in self.class.iter_mut() {
                sink.bit(m, true);
            }
            for b in (0..32).rev() {
                sink.bypass((value >> b) & 1 == 1);
            }
            return;
        }
        for m in self.class[..k].iter_mut() {
            sink.bit(m, true);
        }
        sink.bit(&mut self.class[k], false);
        let mantissa = v - (1 << k);
        if k <= TREE_CLASSES {
            let mut node = 1usize;
            for b in (0..k).rev() {
                let bit = (mantissa >> b) & 1 == 1;
                sink.bit(&mut self.tree[(1 << k) + node - 1], bit);
                node = 2 * node + bit as usize;
            }
        } else {
            for b in (0..k).rev() {
                sink.bit(&mut self.bits[k][b], (mantissa >> b) & 1 == 1);
            }
        }
    }

    pub fn get(&mut self, dec: &mut RangeDecoder<'_>) -> u32 {
        let mut k = 0;
        while k < ESCAPE_CLASS && dec.decode(&mut self.class[k]) {
            k += 1;
        }
        if k == ESCAPE_CLASS {
            let mut value = 0u32;
            for _ in 0..32 {
                value = (value << 1) | dec.decode_bypass() as u32;
            }
            return value;
        }
        let mut mantissa = 0u64;
        if k <= TREE_CLASSES {
            let mut node = 1usize;
            for _ in 0..k {
                let bit = dec.decode(&mut self.tree[(1 << k) + node - 1]);
                node = 2 * node + bit as usize;
                mantissa = (mantissa << 1) | bit as u64;
            }
        } else {
            for b in (0..k).rev() {
                mantissa = (mantissa << 1) | dec.decode(&mut self.bits[k][b]) as u64;
            }
        }
        ((1u64 << k) + mantissa - 1) as u32
    }

    pub fn put_signed<S: BinSink>(&mut self, sink: &mut S, value: i32) {
        self.put(sink, zigzag(value));
    }

    pub fn get_signed(&mut self, dec: &mut RangeDecoder<'_>) -> i32 {
        unzigzag(self.get(dec))
    }
}

/// Fixed-width value coded MSB first through a binary tree of contexts.
#[derive(Debug, Clone)]
pub struct TreeContexts<const BITS: usize> {
    nodes: Vec<BitModel>,
}

impl<const BITS: usize> Default for TreeContexts<BITS> {
    fn default() -> Self {
        TreeContexts { nodes: vec![BitModel::default(); 1 << BITS] }
    }
}

impl<const BITS: usize> TreeContexts<BITS> {
    pub fn put<S: BinSink>(&mut self, sink: &mut S, value: u32) {
        debug_assert!(value < (1 << BITS));
        let mut node = 1usize;
        for b in (0..BITS).rev() {
            let bit = (value >> b) & 1 == 1;
            sink.bit(&mut self.nodes[node], bit);
            node = 2 * node + bit as usize;
        }
    }

    pub fn get(&mut self, dec: &mut RangeDecoder<'_>) -> u32 {
        let mut node = 1usize;
        for _ in 0..BITS {
            let bit = dec.decode(&mut self.nodes[node]);
            node = 2 * node + bit as usize;
        }
        (node - (1 << BITS)) as u32
    }
}
