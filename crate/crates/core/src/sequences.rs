//! Prime sequences `S_k` and the HMC sequences derived from them.
//!
//! `S_k` is the permutation `j -> j*k mod p` of `F_p`. `H_k` adds each pair
//! of neighbouring `S_k` elements as ordinary integers, which roughly doubles
//! the alphabet to `{1, ..., 2p-3}` while keeping the one-coincidence property
//! of the prime set.
//!
//! Storage is 0-based. Rendered HMC positions are 1-based (`a_1 .. a_p`),
//! rendered prime-sequence positions are 0-based (`j` in `F_p`).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modp::Prime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSequence {
    p: Prime,
    k: u32,
    elements: Vec<u32>,
}

impl PrimeSequence {
    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }
}

/// `S_k` for `0 <= k < p`. `S_0` is the all-zero sequence.
pub fn prime_sequence(p: Prime, k: u32) -> Result<PrimeSequence> {
    let modulus = p.get();
    if k >= modulus {
        return Err(Error::invalid(format!(
            "k = {k} out of range [0, {}]",
            modulus - 1
        )));
    }
    let elements = (0..modulus as u64)
        .map(|j| (j * k as u64 % modulus as u64) as u32)
        .collect();
    Ok(PrimeSequence { p, k, elements })
}

/// Prime sequences `S_0, ..., S_{p-1}`.
pub fn prime_set(p: Prime) -> Vec<PrimeSequence> {
    (0..p.get())
        .map(|k| prime_sequence(p, k).expect("k < p"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HmcSequence {
    p: Prime,
    k: u32,
    elements: Vec<u32>,
}

impl HmcSequence {
    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    /// `a_i` with the 1-based position used in rendered tables.
    pub fn at(&self, position: usize) -> u32 {
        self.elements[position - 1]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, frequency: u32) -> bool {
        self.elements.contains(&frequency)
    }

    /// Smallest `|a_{j+1} - a_j|` over consecutive positions. The wrap from
    /// `a_p` back to `a_1` is not counted.
    pub fn min_distance(&self) -> u32 {
        min_adjacent_distance(&self.elements)
    }
}

/// Minimum absolute difference between consecutive elements, non-cyclic.
///
/// Panics if `elements` has fewer than two entries.
pub fn min_adjacent_distance(elements: &[u32]) -> u32 {
    assert!(elements.len() >= 2, "need at least two elements");
    elements
        .windows(2)
        .map(|w| w[0].abs_diff(w[1]))
        .min()
        .expect("non-empty")
}

/// `H_k` for `1 <= k < p`.
pub fn hmc_sequence(p: Prime, k: u32) -> Result<HmcSequence> {
    if k == 0 {
        return Err(Error::invalid(
            "k = 0 has no HMC sequence (S_0 is all zero)",
        ));
    }
    let source = prime_sequence(p, k)?;
    Ok(hmc_from_prime(&source))
}

fn hmc_from_prime(source: &PrimeSequence) -> HmcSequence {
    let s = &source.elements;
    let mut elements: Vec<u32> = s.windows(2).map(|w| w[0] + w[1]).collect();
    elements.push(*s.last().expect("p >= 3"));
    HmcSequence {
        p: source.p,
        k: source.k,
        elements,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetMember {
    pub sequence: HmcSequence,
    pub min_distance: u32,
}

impl SetMember {
    pub fn new(sequence: HmcSequence) -> Self {
        let min_distance = sequence.min_distance();
        SetMember {
            sequence,
            min_distance,
        }
    }

    pub fn k(&self) -> u32 {
        self.sequence.k
    }
}

/// HMC sequences for one prime, in the order they were added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSet {
    p: Prime,
    members: Vec<SetMember>,
}

impl SequenceSet {
    /// Fails on mixed primes or a repeated `k`.
    pub fn from_sequences(p: Prime, sequences: Vec<HmcSequence>) -> Result<Self> {
        let mut seen = vec![false; p.get() as usize];
        let mut members = Vec::with_capacity(sequences.len());
        for seq in sequences {
            if seq.p != p {
                return Err(Error::invalid(format!(
                    "H{} belongs to p = {}, expected p = {p}",
                    seq.k, seq.p
                )));
            }
            let slot = &mut seen[seq.k as usize];
            if *slot {
                return Err(Error::invalid(format!("duplicate sequence H{}", seq.k)));
            }
            *slot = true;
            members.push(SetMember::new(seq));
        }
        Ok(SequenceSet { p, members })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn members(&self) -> &[SetMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ks(&self) -> Vec<u32> {
        self.members.iter().map(SetMember::k).collect()
    }

    pub fn get(&self, k: u32) -> Option<&SetMember> {
        self.members.iter().find(|m| m.k() == k)
    }

    pub fn min_distances(&self) -> Vec<u32> {
        self.members.iter().map(|m| m.min_distance).collect()
    }

    pub(crate) fn retain_ks(&self, keep: impl Fn(&SetMember) -> bool) -> SequenceSet {
        SequenceSet {
            p: self.p,
            members: self.members.iter().filter(|m| keep(m)).cloned().collect(),
        }
    }
}

/// The full set `H_1, ..., H_{p-1}`.
pub fn hmc_set(p: Prime) -> SequenceSet {
    let members = (1..p.get())
        .into_par_iter()
        .map(|k| SetMember::new(hmc_sequence(p, k).expect("1 <= k < p")))
        .collect();
    SequenceSet { p, members }
}
