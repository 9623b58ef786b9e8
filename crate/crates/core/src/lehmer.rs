//! Symbol <-> permutation codec based on the Lehmer code.
//!
//! Ranks `0..M!` map to the permutations of `{0, .., M-1}` in lexicographic
//! order. A rank is first written in the factorial number system; digit `d_k`
//! (radix `M-k`) then selects, and removes, the `d_k`-th smallest unused tone.

use std::fmt;

use crate::error::{Error, Result};
use crate::special::factorial;

/// Largest block size whose factorial fits in a `u64`.
pub const MAX_BLOCK: usize = 20;

/// Ordering of `M` tone indices; entry `m` is the tone sent in pulse `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    /// Validates that `order` is a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        if m == 0 {
            return Err(Error::InvalidPermutation("empty sequence".into()));
        }
        let mut seen = vec![false; m];
        for &v in &order {
            if v >= m {
                return Err(Error::InvalidPermutation(format!(
                    "entry {v} out of range 0..{m}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("entry {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(Self(order))
    }

    pub fn identity(m: usize) -> Self {
        Self((0..m).collect())
    }

    pub fn reversed(m: usize) -> Self {
        Self((0..m).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Number of positions where the two orderings differ.
    pub fn hamming(&self, other: &Permutation) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// The same tones sent in reverse pulse order.
    pub fn reverse(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let order = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("cannot parse '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(order)
    }
}

/// A data symbol for block size `m`, `0 <= value < m!`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolRank {
    value: u64,
    m: usize,
}

impl SymbolRank {
    pub fn new(value: u64, m: usize) -> Result<Self> {
        let count = symbol_count(m)?;
        if value >= count {
            return Err(Error::RankOutOfRange {
                value,
                m,
                max: count - 1,
            });
        }
        Ok(Self { value, m })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn block_size(&self) -> usize {
        self.m
    }
}

/// `M!`, the number of distinct waveforms for block size `M`.
pub fn symbol_count(m: usize) -> Result<u64> {
    if m == 0 || m > MAX_BLOCK {
        return Err(Error::BlockSize(m));
    }
    Ok(factorial(m).expect("m <= 20"))
}

pub fn rank_to_permutation(symbol: SymbolRank) -> Permutation {
    let m = symbol.m;
    let mut pool: Vec<usize> = (0..m).collect();
    let mut order = Vec::with_capacity(m);
    let mut rest = symbol.value;
    for k in 0..m {
        let radix = factorial(m - 1 - k).expect("m <= 20");
        let digit = (rest / radix) as usize;
        rest %= radix;
        order.push(pool.remove(digit));
    }
    Permutation(order)
}

pub fn permutation_to_rank(perm: &Permutation) -> SymbolRank {
    let m = perm.len();
    let mut value = 0u64;
    for (k, &tone) in perm.0.iter().enumerate() {
        // Lehmer digit: later entries smaller than this one.
        let digit = perm.0[k + 1..].iter().filter(|&&t| t < tone).count() as u64;
        value += digit * factorial(m - 1 - k).expect("m <= 20");
    }
    SymbolRank { value, m }
}

/// Number of whole data bits carried by one block: `floor(log2(M!))`.
pub fn bits_per_block(m: usize) -> Result<u32> {
    let count = symbol_count(m)?;
    Ok(63 - count.leading_zeros())
}

/// Encode `bits_per_block(m)` data bits; only ranks below
/// `2^bits_per_block(m)` are ever produced.
pub fn encode_bits(data: u64, m: usize) -> Result<Permutation> {
    let bits = bits_per_block(m)?;
    if data >= 1u64 << bits {
        return Err(Error::RankOutOfRange {
            value: data,
            m,
            max: (1u64 << bits) - 1,
        });
    }
    Ok(rank_to_permutation(SymbolRank::new(data, m)?))
}

/// Inverse of [`encode_bits`]; permutations outside the bit-mode subset are
/// rejected.
pub fn decode_bits(perm: &Permutation) -> Result<u64> {
    let m = perm.len();
    let bits = bits_per_block(m)?;
    let rank = permutation_to_rank(perm).value;
    if rank >= 1u64 << bits {
        return Err(Error::RankOutOfRange {
            value: rank,
            m,
            max: (1u64 << bits) - 1,
        });
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    /// All permutations of 0..m in lexicographic order, by recursive
    /// enumeration.
    fn enumerate(m: usize) -> Vec<Vec<usize>> {
        fn go(prefix: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == m {
                out.push(prefix.clone());
                return;
            }
            for t in 0..m {
                if !prefix.contains(&t) {
                    prefix.push(t);
                    go(prefix, m, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), m, &mut out);
        out
    }

    #[test]
    fn rank_examples() {
        let r = |v, m| rank_to_permutation(SymbolRank::new(v, m).unwrap());
        assert_eq!(r(0, 3), perm(&[0, 1, 2]));
        assert_eq!(r(5, 3), perm(&[2, 1, 0]));
        assert_eq!(r(5, 4), perm(&[0, 3, 2, 1]));
        assert_eq!(enumerate(4)[5], vec![0, 3, 2, 1]);
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(permutation_to_rank(&perm(&[0, 1, 2])).value(), 0);
        assert_eq!(permutation_to_rank(&perm(&[2, 1, 0])).value(), 5);
        assert_eq!(permutation_to_rank(&perm(&[0, 3, 2, 1])).value(), 5);
    }

    #[test]
    fn matches_enumeration_oracle() {
        for m in 1..=6 {
            for (i, p) in enumerate(m).into_iter().enumerate() {
                let got = rank_to_permutation(SymbolRank::new(i as u64, m).unwrap());
                assert_eq!(got.as_slice(), &p[..]);
            }
        }
    }

    #[test]
    fn bit_counts() {
        assert_eq!(bits_per_block(1).unwrap(), 0);
        assert_eq!(bits_per_block(4).unwrap(), 4);
        assert_eq!(bits_per_block(8).unwrap(), 15);
        assert_eq!(bits_per_block(20).unwrap(), 61);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SymbolRank::new(6, 3),
            Err(Error::RankOutOfRange { max: 5, .. })
        ));
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![]).is_err());
        assert!(matches!(symbol_count(21), Err(Error::BlockSize(21))));
    }

    #[test]
    fn bit_mode_restricts_ranks() {
        // 4! = 24 but only 16 ranks are used in bit mode.
        assert!(encode_bits(15, 4).is_ok());
        assert!(encode_bits(16, 4).is_err());
        let p = rank_to_permutation(SymbolRank::new(20, 4).unwrap());
        assert!(decode_bits(&p).is_err());
        assert_eq!(decode_bits(&encode_bits(11, 4).unwrap()).unwrap(), 11);
    }

    #[test]
    fn parse_and_display() {
        let p: Permutation = "2 1,0 3".parse().unwrap();
        assert_eq!(p.to_string(), "2 1 0 3");
    }

    proptest::proptest! {
        #[test]
        fn round_trip_m20(value in 0u64..2_432_902_008_176_640_000) {
            let s = SymbolRank::new(value, 20).unwrap();
            proptest::prop_assert_eq!(permutation_to_rank(&rank_to_permutation(s)), s);
        }
    }
}
