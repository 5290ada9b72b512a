use std::fmt;

/// Activation pattern of every hidden neuron, layer-major.
///
/// Bit `i` is 1 when neuron `i`'s pre-activation is non-negative and 0 when
/// it is strictly negative.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationPattern {
    len: usize,
    words: Vec<u64>,
}

impl ActivationPattern {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut p = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            p.set(i, b);
        }
        p
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_bits(s: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.map(|b| Self::from_bits(&b))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for pattern of length {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for pattern of length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of neurons whose state differs between the two patterns.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Hex encoding, four neurons per digit with the lowest-index neuron in
    /// the most significant bit of each digit. The final digit is zero-padded.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut nibble = 0u32;
            for k in 0..4 {
                let i = chunk * 4 + k;
                if i < self.len && self.get(i) {
                    nibble |= 8 >> k;
                }
            }
            out.push(char::from_digit(nibble, 16).unwrap());
        }
        out
    }

    /// Stable 64-bit hash of the pattern, independent of platform and
    /// compiler version.
    pub fn stable_hash(&self) -> u64 {
        crate::rng::hash_words(&self.words) ^ self.len as u64
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActivationPattern({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_string_and_hex() {
        let p = ActivationPattern::parse_bits("100101").unwrap();
        assert_eq!(p.to_string(), "100101");
        assert_eq!(p.to_hex(), "94");
        assert_eq!(p.count_ones(), 3);
        let q = ActivationPattern::parse_bits("000101").unwrap();
        assert_eq!(p.hamming(&q), 1);
        assert!(ActivationPattern::parse_bits("10x").is_none());
    }

    #[test]
    fn wide_patterns_span_words() {
        let mut p = ActivationPattern::zeros(130);
        p.set(0, true);
        p.set(64, true);
        p.set(129, true);
        assert_eq!(p.count_ones(), 3);
        assert!(p.get(129) && !p.get(128));
        p.set(64, false);
        assert!(!p.get(64));
    }
}
