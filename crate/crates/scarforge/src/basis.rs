//! Computational basis states of a periodic L-qubit chain.
//!
//! Site `s` (0-based; the 1-based qubit number is `s + 1`) is stored at bit
//! position `L - 1 - s`, so site 0 is the most significant bit. A 4-qubit
//! window `|0001⟩` therefore has value 1 and gate label 2.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::{Error, Result, C64};

/// Largest supported chain length (indices are `u64`).
pub const MAX_LEN: usize = 63;

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len % 2 != 0 || len > MAX_LEN {
        return Err(Error::ChainLength(len));
    }
    Ok(())
}

#[inline]
fn mask(len: usize) -> u64 {
    (1u64 << len) - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    index: u64,
    len: usize,
}

impl BasisState {
    pub fn new(index: u64, len: usize) -> Result<Self> {
        check_len(len)?;
        if index > mask(len) {
            return Err(Error::IndexRange { index, len });
        }
        Ok(Self { index, len })
    }

    /// Parses a 0/1 string, qubit 1 first.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let len = bits.chars().count();
        check_len(len)?;
        let mut index = 0u64;
        for c in bits.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Input(format!("not a bit string: {bits}"))),
                };
        }
        Ok(Self { index, len })
    }

    /// `|1010…⟩` when `first` is 1, `|0101…⟩` when it is 0.
    pub fn neel(len: usize, first: u8) -> Result<Self> {
        check_len(len)?;
        let pattern = 0xAAAA_AAAA_AAAA_AAAAu64 & mask(len);
        let index = if first == 1 { pattern } else { !pattern & mask(len) };
        Ok(Self { index, len })
    }

    /// `|11…1⟩`.
    pub fn polarized(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(Self { index: mask(len), len })
    }

    pub fn index(self) -> u64 {
        self.index
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bit(self, site: usize) -> u8 {
        bit(self.index, self.len, site)
    }

    /// Moves every qubit `shift` sites to the right with periodic wrap.
    pub fn translate(self, shift: usize) -> Self {
        Self { index: translate(self.index, self.len, shift), len: self.len }
    }

    /// Maps qubit `j` to qubit `L + 1 - j`.
    pub fn mirror(self) -> Self {
        Self { index: mirror(self.index, self.len), len: self.len }
    }

    pub fn global_spin_flip(self) -> Self {
        Self { index: !self.index & mask(self.len), len: self.len }
    }

    /// Bit string, qubit 1 first.
    pub fn bits(self) -> String {
        bits_string(self.index, self.len)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bits())
    }
}

#[inline]
pub fn bit(index: u64, len: usize, site: usize) -> u8 {
    ((index >> (len - 1 - site % len)) & 1) as u8
}

pub fn bits_string(index: u64, len: usize) -> String {
    (0..len).map(|s| if bit(index, len, s) == 1 { '1' } else { '0' }).collect()
}

#[inline]
pub fn translate(index: u64, len: usize, shift: usize) -> u64 {
    let k = shift % len;
    if k == 0 {
        return index;
    }
    ((index >> k) | (index << (len - k))) & mask(len)
}

#[inline]
pub fn mirror(index: u64, len: usize) -> u64 {
    index.reverse_bits() >> (64 - len)
}

#[inline]
pub fn flip(index: u64, len: usize) -> u64 {
    !index & mask(len)
}

/// Reads `width` consecutive sites starting at `site` (periodic); the first
/// site becomes the most significant bit of the returned window value.
#[inline]
pub fn window(index: u64, len: usize, site: usize, width: usize) -> usize {
    let mut v = 0usize;
    for t in 0..width {
        let s = (site + t) % len;
        v = (v << 1) | ((index >> (len - 1 - s)) & 1) as usize;
    }
    v
}

/// Overwrites the window at `site` with `value`.
#[inline]
pub fn set_window(index: u64, len: usize, site: usize, width: usize, value: usize) -> u64 {
    let mut out = index;
    for t in 0..width {
        let s = (site + t) % len;
        let pos = len - 1 - s;
        let b = ((value >> (width - 1 - t)) & 1) as u64;
        out = (out & !(1u64 << pos)) | (b << pos);
    }
    out
}

/// Gate label of a window value.
pub fn label_of(value: usize) -> usize {
    value + 1
}

pub fn value_of_label(label: usize) -> usize {
    label - 1
}

/// A basis state multiplied by a unit-modulus phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasedState {
    pub state: BasisState,
    pub phase: C64,
}

/// An ordered set of basis states of one chain, kept sorted so that lookups
/// are binary searches and iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSubset {
    len: usize,
    states: Vec<u64>,
}

impl BasisSubset {
    pub fn full(len: usize) -> Result<Self> {
        check_len(len)?;
        if len > 32 {
            return Err(Error::Guard(format!("full space at L = {len}"), 32));
        }
        Ok(Self { len, states: (0..=mask(len)).collect() })
    }

    /// Builds a subset from distinct states; the list is sorted.
    pub fn from_states(len: usize, mut states: Vec<u64>) -> Result<Self> {
        check_len(len)?;
        states.sort_unstable();
        if let Some(w) = states.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("duplicate state {}", bits_string(w[0], len))));
        }
        if let Some(&s) = states.last() {
            if s > mask(len) {
                return Err(Error::IndexRange { index: s, len });
            }
        }
        Ok(Self { len, states })
    }

    pub fn chain_len(&self) -> usize {
        self.len
    }

    /// `N_eff`.
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, pos: usize) -> u64 {
        self.states[pos]
    }

    pub fn position(&self, index: u64) -> Option<usize> {
        self.states.binary_search(&index).ok()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.position(index).is_some()
    }

    /// Hex SHA-256 over the chain length and state list.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len as u64).to_le_bytes());
        for s in &self.states {
            h.update(s.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Amplitudes over the states of a [`BasisSubset`], in subset order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self { amplitudes: vec![C64::new(0.0, 0.0); dim] }
    }

    pub fn basis(subset: &BasisSubset, index: u64) -> Result<Self> {
        let pos = subset
            .position(index)
            .ok_or_else(|| Error::Input(format!("{} not in subset", bits_string(index, subset.len))))?;
        let mut v = Self::zeros(subset.dim());
        v.amplitudes[pos] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-10
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(bits: &str) -> BasisState {
        BasisState::from_bits(bits).unwrap()
    }

    #[test]
    fn translate_moves_right() {
        assert_eq!(st("1000").translate(1), st("0100"));
        assert_eq!(st("0001").translate(1), st("1000"));
        assert_eq!(st("1101").translate(0), st("1101"));
        let neel = BasisState::neel(12, 1).unwrap();
        assert_eq!(neel.translate(2), neel);
        assert_eq!(neel.translate(1), BasisState::neel(12, 0).unwrap());
    }

    #[test]
    fn mirror_and_flip() {
        assert_eq!(st("1100").mirror(), st("0011"));
        assert_eq!(st("100000").mirror(), st("000001"));
        assert_eq!(st("100001").mirror(), st("100001"));
        assert_eq!(st("0000").global_spin_flip(), st("1111"));
        assert_eq!(BasisState::neel(8, 1).unwrap().global_spin_flip(), BasisState::neel(8, 0).unwrap());
    }

    #[test]
    fn compositions_exhaustive() {
        for len in [2, 4, 6, 8, 10] {
            for idx in 0..(1u64 << len) {
                let s = BasisState::new(idx, len).unwrap();
                assert_eq!(s.mirror().mirror(), s);
                assert_eq!(s.global_spin_flip().global_spin_flip(), s);
                for a in 0..len {
                    for b in 0..len {
                        assert_eq!(s.translate(a).translate(b), s.translate((a + b) % len));
                    }
                }
            }
        }
    }

    #[test]
    fn label_convention() {
        assert_eq!(st("0001").index(), 1);
        assert_eq!(label_of(st("0001").index() as usize), 2);
        for label in 1..=16 {
            assert_eq!(label_of(value_of_label(label)), label);
        }
        assert_eq!(BasisState::neel(4, 1).unwrap().bits(), "1010");
    }

    #[test]
    fn windows_wrap() {
        let s = st("10000001");
        assert_eq!(window(s.index(), 8, 7, 4), 0b1100);
        let t = set_window(0, 8, 6, 4, 0b1011);
        assert_eq!(bits_string(t, 8), "11000010");
        for idx in 0..256u64 {
            for site in 0..8 {
                let v = window(idx, 8, site, 4);
                assert_eq!(set_window(idx, 8, site, 4, v), idx);
            }
        }
    }

    #[test]
    fn rejects_odd_or_out_of_range() {
        assert!(BasisState::new(0, 5).is_err());
        assert!(BasisState::new(16, 4).is_err());
        assert!(BasisState::from_bits("101").is_err());
        assert!(BasisSubset::from_states(4, vec![1, 1]).is_err());
    }

    #[test]
    fn subset_index_map_inverts_list() {
        let sub = BasisSubset::from_states(6, vec![9, 3, 40, 17]).unwrap();
        for (pos, &s) in sub.states().iter().enumerate() {
            assert_eq!(sub.position(s), Some(pos));
        }
        assert_eq!(sub.position(4), None);
        assert_eq!(sub.dim(), 4);
    }
}
