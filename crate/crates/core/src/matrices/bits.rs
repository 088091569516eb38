use rand::Rng;

use crate::error::{Error, Result};

/// Fixed-length binary word (an input `x ∈ {0,1}ⁿ`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        Self { n, words: vec![0; n.div_ceil(64).max(1)] }
    }

    /// Low `n` bits of `value`, bit `i` of the string = bit `i` of the integer.
    pub fn from_u64(value: u64, n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n.min(64) {
            if value >> i & 1 == 1 {
                s.set(i, true);
            }
        }
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(n);
        for (k, w) in s.words.iter_mut().enumerate() {
            let live = (n - 64 * k).min(64);
            let mask = if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
            *w = rng.random::<u64>() & mask;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.n);
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("bit lengths {} and {} differ", self.n, other.n)));
        }
        Ok(())
    }

    pub fn hamming(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// `⟨self, r⟩ mod 2`.
    pub fn inner_mod2(&self, r: &Self) -> Result<bool> {
        self.check_len(r)?;
        let ones: u32 = self.words.iter().zip(&r.words).map(|(a, b)| (a & b).count_ones()).sum();
        Ok(ones % 2 == 1)
    }

    /// Restriction to the given coordinates, in the order given.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut s = Self::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            s.set(k, self.get(i));
        }
        s
    }

    pub fn to_u64(&self) -> u64 {
        self.words[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hamming_and_parity() {
        let a = BitString::from_u64(0b1011, 4);
        let b = BitString::from_u64(0b0011, 4);
        assert_eq!(a.hamming(&b).unwrap(), 1);
        assert!(a.inner_mod2(&BitString::from_u64(0b1000, 4)).unwrap());
        assert!(!a.inner_mod2(&BitString::from_u64(0b0011, 4)).unwrap());
        assert!(a.hamming(&BitString::zeros(5)).is_err());
    }

    #[test]
    fn random_respects_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = BitString::random(70, &mut rng);
        assert_eq!(s.len(), 70);
        assert_eq!(s.words[1] >> 6, 0);
    }

    #[test]
    fn select_picks_coordinates() {
        let a = BitString::from_u64(0b1010, 4);
        assert_eq!(a.select(&[1, 3]).to_u64(), 0b11);
        assert_eq!(a.select(&[0, 2]).to_u64(), 0);
    }
}
