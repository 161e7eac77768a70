//! Binary range coder with carry propagation (32-bit range, byte output).

/// Adaptive probability of a binary event from occurrence counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitModel {
    counts: [u32; 2],
}

impl Default for BitModel {
    fn default() -> Self {
        BitModel { counts: [1, 1] }
    }
}

impl BitModel {
    /// Counts are halved once their sum reaches this.
    pub const LIMIT: u32 = 1 << 16;

    #[inline]
    pub fn total(&self) -> u32 {
        self.counts[0] + self.counts[1]
    }

    #[inline]
    pub fn count(&self, bit: bool) -> u32 {
        self.counts[bit as usize]
    }

    #[inline]
    pub fn update(&mut self, bit: bool) {
        self.counts[bit as usize] += 1;
        if self.total() >= Self::LIMIT {
            self.counts = self.counts.map(|c| c.div_ceil(2));
        }
    }

    /// Ideal code length of `bit` in bits.
    #[inline]
    pub fn cost(&self, bit: bool) -> f64 {
        (self.total() as f64 / self.count(bit) as f64).log2()
    }

    /// Split point of `range` for the zero symbol; always in `1..range`.
    #[inline]
    fn bound(&self, range: u32) -> u32 {
        ((range as u64 * self.counts[0] as u64) / self.total() as u64) as u32
    }
}

const TOP: u32 = 1 << 24;

#[derive(Debug, Clone)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder { low: 0, range: u32::MAX, cache: 0, cache_size: 1, out: Vec::new() }
    }

    pub fn encode(&mut self, model: &mut BitModel, bit: bool) {
        let bound = model.bound(self.range);
        self.encode_split(bound, bit);
        model.update(bit);
    }

    /// Equiprobable bit with no model.
    pub fn encode_bypass(&mut self, bit: bool) {
        self.encode_split(self.range >> 1, bit);
    }

    fn encode_split(&mut self, bound: u32, bit: bool) {
        if bit {
            self.low += bound as u64;
            self.range -= bound;
        } else {
            self.range = bound;
        }
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.out.push(byte.wrapping_add(carry));
                byte = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        let mut d = RangeDecoder { data, pos: 0, code: 0, range: u32::MAX };
        for _ in 0..5 {
            d.code = (d.code << 8) | d.next_byte() as u32;
        }
        d
    }

    /// Bytes past the end read as zero; callers verify integrity separately.
    #[inline]
    fn next_byte(&mut self) -> u8 {
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// True once the decoder has consumed more input than exists.
    pub fn overran(&self) -> bool {
        self.pos > self.data.len()
    }

    pub fn decode(&mut self, model: &mut BitModel) -> bool {
        let bound = model.bound(self.range);
        let bit = self.decode_split(bound);
        model.update(bit);
        bit
    }

    pub fn decode_bypass(&mut self) -> bool {
        self.decode_split(self.range >> 1)
    }

    fn decode_split(&mut self, bound: u32) -> bool {
        let bit = if self.code < bound {
            self.range = bound;
            false
        } else {
            self.code -= bound;
            self.range -= bound;
            true
        };
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | self.next_byte() as u32;
        }
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn counts_halve_at_limit() {
        let mut m = BitModel::default();
        for _ in 0..(BitModel::LIMIT - 3) {
            m.update(true);
        }
        assert_eq!(m.total(), BitModel::LIMIT - 1);
        m.update(true);
        assert!(m.total() < BitModel::LIMIT / 2 + 2);
        assert!(m.count(false) >= 1);
    }

    #[test]
    fn skewed_bits_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let bits: Vec<bool> = (0..50_000).map(|_| rng.gen_bool(0.03)).collect();
        let mut enc = RangeEncoder::new();
        let mut models = [BitModel::default(); 2];
        for (i, &b) in bits.iter().enumerate() {
            if i % 7 == 0 {
                enc.encode_bypass(b);
            } else {
                enc.encode(&mut models[i % 2], b);
            }
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes);
        let mut models = [BitModel::default(); 2];
        for (i, &b) in bits.iter().enumerate() {
            let got = if i % 7 == 0 { dec.decode_bypass() } else { dec.decode(&mut models[i % 2]) };
            assert_eq!(got, b, "bit {i}");
        }
        assert!(!dec.overran());
    }

    #[test]
    fn empty_stream() {
        let bytes = RangeEncoder::new().finish();
        assert_eq!(bytes.len(), 5);
    }
}
