//! Periodic Hamming correlation and the property checks for HMC sets.
//!
//! [`hamming_cross_correlation`] and [`correlation_profile`] count hits
//! directly, one shift at a time. Whole-set verification instead enumerates
//! coincidences through a value-to-position index (see [`CoincidenceIndex`]),
//! which produces the same profile in `O(L)` per pair for non-repeating
//! sequences. The two routes are cross-checked in tests.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modp::Prime;
use crate::sequences::{hmc_set, SequenceSet};

/// `H_XY(tau)` for every cyclic shift `tau` in `[0, L)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationProfile {
    values: Vec<u32>,
}

impl CorrelationProfile {
    pub fn new(values: Vec<u32>) -> Self {
        CorrelationProfile { values }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, tau: usize) -> u32 {
        self.values[tau]
    }

    pub fn max(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// Largest entry and the smallest shift attaining it.
    pub fn argmax(&self) -> Option<(usize, u32)> {
        if self.values.is_empty() {
            return None;
        }
        let (tau, count) = argmax(&self.values);
        Some((tau as usize, count))
    }

    pub fn total(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }

    /// Max over `tau != 0`; meaningful for autocorrelation profiles.
    pub fn out_of_phase_max(&self) -> u32 {
        self.values.iter().skip(1).copied().max().unwrap_or(0)
    }
}

fn argmax(values: &[u32]) -> (u32, u32) {
    let mut best = (0u32, values[0]);
    for (tau, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (tau as u32, v);
        }
    }
    best
}

fn check_lengths(x: &[u32], y: &[u32]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "sequence lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::invalid("sequences must be non-empty"));
    }
    Ok(x.len())
}

/// Number of `i` with `x[i] == y[(i + tau) mod L]`.
pub fn hamming_cross_correlation(x: &[u32], y: &[u32], tau: usize) -> Result<u32> {
    let len = check_lengths(x, y)?;
    if tau >= len {
        return Err(Error::invalid(format!(
            "shift {tau} out of range [0, {len})"
        )));
    }
    Ok(count_hits(x, y, tau))
}

fn count_hits(x: &[u32], y: &[u32], tau: usize) -> u32 {
    let len = x.len();
    let (head, tail) = y.split_at(tau);
    // y rotated left by tau is tail ++ head
    let hits = x[..len - tau]
        .iter()
        .zip(tail)
        .chain(x[len - tau..].iter().zip(head))
        .filter(|(a, b)| a == b)
        .count();
    hits as u32
}

pub fn correlation_profile(x: &[u32], y: &[u32]) -> Result<CorrelationProfile> {
    let len = check_lengths(x, y)?;
    Ok(CorrelationProfile::new(
        (0..len).map(|tau| count_hits(x, y, tau)).collect(),
    ))
}

/// Value-to-position lookup for a group of equal-length sequences.
///
/// Values are rank-compressed over the whole group, then each sequence keeps
/// a CSR table of positions per rank. Repeated values are allowed.
pub struct CoincidenceIndex {
    len: usize,
    ranks: Vec<Vec<u32>>,
    offsets: Vec<Vec<u32>>,
    positions: Vec<Vec<u32>>,
}

impl CoincidenceIndex {
    pub fn new(sequences: &[&[u32]]) -> Result<Self> {
        let len = sequences.first().map_or(0, |s| s.len());
        for s in sequences {
            check_lengths(sequences[0], s)?;
        }
        let mut alphabet: Vec<u32> = sequences.iter().flat_map(|s| s.iter().copied()).collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        let width = alphabet.len();

        let ranks: Vec<Vec<u32>> = sequences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|v| alphabet.binary_search(v).expect("value in alphabet") as u32)
                    .collect()
            })
            .collect();

        let mut offsets = Vec::with_capacity(ranks.len());
        let mut positions = Vec::with_capacity(ranks.len());
        for r in &ranks {
            let mut counts = vec![0u32; width + 1];
            for &v in r {
                counts[v as usize + 1] += 1;
            }
            for i in 1..=width {
                counts[i] += counts[i - 1];
            }
            let mut fill = counts.clone();
            let mut pos = vec![0u32; r.len()];
            for (i, &v) in r.iter().enumerate() {
                pos[fill[v as usize] as usize] = i as u32;
                fill[v as usize] += 1;
            }
            offsets.push(counts);
            positions.push(pos);
        }
        Ok(CoincidenceIndex {
            len,
            ranks,
            offsets,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Profile of sequence `a` against sequence `b`, written into `hist`.
    pub fn profile_into(&self, a: usize, b: usize, hist: &mut Vec<u32>) {
        let len = self.len;
        hist.clear();
        hist.resize(len, 0);
        let offs = &self.offsets[b];
        let pos = &self.positions[b];
        for (i, &v) in self.ranks[a].iter().enumerate() {
            let lo = offs[v as usize] as usize;
            let hi = offs[v as usize + 1] as usize;
            for &j in &pos[lo..hi] {
                let j = j as usize;
                let tau = if j >= i { j - i } else { j + len - i };
                hist[tau] += 1;
            }
        }
    }

    pub fn profile(&self, a: usize, b: usize) -> CorrelationProfile {
        let mut hist = Vec::new();
        self.profile_into(a, b, &mut hist);
        CorrelationProfile::new(hist)
    }
}

/// The pair and shift with the largest cross-correlation in a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offender {
    pub k: u32,
    pub l: u32,
    pub tau: u32,
    pub count: u32,
}

impl Offender {
    /// Higher count wins; ties go to the lexicographically smallest `(k, l, tau)`.
    fn worse(self, other: Offender) -> Offender {
        match self.count.cmp(&other.count) {
            Ordering::Greater => self,
            Ordering::Less => other,
            Ordering::Equal => {
                if (self.k, self.l, self.tau) <= (other.k, other.l, other.tau) {
                    self
                } else {
                    other
                }
            }
        }
    }
}

impl fmt::Display for Offender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H{} vs H{} at tau {}: {} hits",
            self.k, self.l, self.tau, self.count
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneCoincidenceOutcome {
    pub holds: bool,
    /// `None` when the set has fewer than two members.
    pub worst: Option<Offender>,
}

/// Brute force over all unordered pairs of distinct labels and all shifts.
///
/// Each pair is evaluated with the smaller label first, so `H_{k,l}(tau)`
/// with `k < l`.
pub fn verify_one_coincidence_labeled(members: &[(u32, &[u32])]) -> Result<OneCoincidenceOutcome> {
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by_key(|&i| members[i].0);
    for w in order.windows(2) {
        if members[w[0]].0 == members[w[1]].0 {
            return Err(Error::invalid(format!(
                "duplicate label {}",
                members[w[0]].0
            )));
        }
    }
    let seqs: Vec<&[u32]> = order.iter().map(|&i| members[i].1).collect();
    let labels: Vec<u32> = order.iter().map(|&i| members[i].0).collect();
    let index = CoincidenceIndex::new(&seqs)?;

    let worst = (0..seqs.len())
        .into_par_iter()
        .map_init(Vec::new, |hist, a| {
            let mut worst: Option<Offender> = None;
            for b in a + 1..seqs.len() {
                index.profile_into(a, b, hist);
                let (tau, count) = argmax(hist);
                let o = Offender {
                    k: labels[a],
                    l: labels[b],
                    tau,
                    count,
                };
                worst = Some(worst.map_or(o, |w| w.worse(o)));
            }
            worst
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(x), Some(y)) => Some(x.worse(y)),
                (x, None) => x,
                (None, y) => y,
            },
        );

    Ok(OneCoincidenceOutcome {
        holds: worst.is_none_or(|w| w.count <= 1),
        worst,
    })
}

pub fn verify_one_coincidence(set: &SequenceSet) -> OneCoincidenceOutcome {
    let members: Vec<(u32, &[u32])> = set
        .members()
        .iter()
        .map(|m| (m.k(), m.sequence.elements()))
        .collect();
    verify_one_coincidence_labeled(&members).expect("set members have distinct k and equal length")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Every `H_k` is non-repeating.
    Distinct,
    /// Elements lie in `{1, ..., 2p-3}`.
    Range,
    /// `a_{t+1} = p`, `a_p = p - a_1`, `a_{p-(i-1)} = 2p - a_i` for `2 <= i < t`.
    MidpointMirror,
    /// The mirror identity at `i = t`. Observed, not part of the proved statement.
    MirrorExtension,
    /// Pairwise cross-correlation at most one at every shift.
    OneCoincidence,
    /// `H_{p-k}` reversed equals `H_k`; table column `p-i+1` is column `i` reversed.
    TimeReversal,
    /// `d(H_1) = d(H_{p-1}) = 2` and `d(H_t) = d(H_{t+1}) = 1`.
    BoundaryDistances,
    /// Out-of-phase autocorrelation is zero for every sequence.
    ZeroAutocorrelation,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Distinct,
        Check::Range,
        Check::MidpointMirror,
        Check::MirrorExtension,
        Check::OneCoincidence,
        Check::TimeReversal,
        Check::BoundaryDistances,
        Check::ZeroAutocorrelation,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Check::Distinct => "distinct",
            Check::Range => "range",
            Check::MidpointMirror => "midpoint-mirror",
            Check::MirrorExtension => "mirror-extension",
            Check::OneCoincidence => "one-coincidence",
            Check::TimeReversal => "time-reversal",
            Check::BoundaryDistances => "boundary-distances",
            Check::ZeroAutocorrelation => "zero-autocorrelation",
        }
    }

    pub fn from_label(label: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.label() == label)
    }

    /// Empirical extras are reported but kept apart from the proved claims.
    pub fn is_extension(self) -> bool {
        matches!(self, Check::MirrorExtension)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    fn from_result(check: Check, result: std::result::Result<(), String>) -> Self {
        CheckOutcome {
            check,
            passed: result.is_ok(),
            counterexample: result.err(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub p: Prime,
    pub checks: Vec<CheckOutcome>,
    pub max_cross_correlation: u32,
    pub max_out_of_phase_autocorrelation: u32,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn outcome(&self, check: Check) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type CheckResult = std::result::Result<(), String>;

fn first_failure<T>(
    items: impl IntoIterator<Item = T>,
    f: impl Fn(T) -> CheckResult,
) -> CheckResult {
    items.into_iter().try_for_each(f)
}

/// Runs every property check against the full set `H_1, ..., H_{p-1}`.
pub fn verify_lemmas(p: Prime) -> VerificationReport {
    let set = hmc_set(p);
    let pv = p.get();
    let t = p.half() as usize;
    let rows: Vec<&[u32]> = set
        .members()
        .iter()
        .map(|m| m.sequence.elements())
        .collect();
    let row = |k: u32| rows[k as usize - 1];

    let distinct = first_failure(1..pv, |k| {
        let mut seen = vec![0usize; 2 * pv as usize];
        for (i, &v) in row(k).iter().enumerate() {
            let slot = &mut seen[v as usize];
            if *slot != 0 {
                return Err(format!(
                    "H{k} repeats {v} at positions {} and {}",
                    *slot,
                    i + 1
                ));
            }
            *slot = i + 1;
        }
        Ok(())
    });

    let range = first_failure(1..pv, |k| {
        match row(k).iter().position(|&v| v < 1 || v > 2 * pv - 3) {
            Some(i) => Err(format!("H{k} position {} holds {}", i + 1, row(k)[i])),
            None => Ok(()),
        }
    });

    // positions below are 1-based: a(i) = row[i - 1]
    let midpoint_mirror = first_failure(1..pv, |k| {
        let a = |i: usize| row(k)[i - 1];
        let len = pv as usize;
        if a(t + 1) != pv {
            return Err(format!("H{k}: a_{} = {} != {pv}", t + 1, a(t + 1)));
        }
        if a(len) + a(1) != pv {
            return Err(format!("H{k}: a_p + a_1 = {} != {pv}", a(len) + a(1)));
        }
        for i in 2..t {
            if a(len - (i - 1)) + a(i) != 2 * pv {
                return Err(format!("H{k}: a_{} + a_{i} != 2p", len - (i - 1)));
            }
        }
        Ok(())
    });

    let mirror_extension = first_failure(1..pv, |k| {
        let a = |i: usize| row(k)[i - 1];
        let len = pv as usize;
        if t >= 2 && a(len - (t - 1)) + a(t) != 2 * pv {
            return Err(format!("H{k}: a_{} + a_{t} != 2p", len - (t - 1)));
        }
        Ok(())
    });

    let one_coincidence = verify_one_coincidence(&set);
    let max_cross = one_coincidence.worst.map_or(0, |w| w.count);
    let coincidence = if one_coincidence.holds {
        Ok(())
    } else {
        Err(one_coincidence
            .worst
            .expect("failure has an offender")
            .to_string())
    };

    let time_reversal = first_failure(1..pv, |k| {
        let forward = row(k);
        let backward = row(pv - k);
        match forward
            .iter()
            .zip(backward.iter().rev())
            .position(|(x, y)| x != y)
        {
            Some(i) => Err(format!(
                "H{k} position {} differs from reversed H{}",
                i + 1,
                pv - k
            )),
            None => Ok(()),
        }
    })
    .and_then(|()| {
        let len = pv as usize;
        first_failure(1..=len, |i| {
            let mirrored = len - i + 1;
            let n = rows.len();
            match (0..n).position(|r| rows[r][mirrored - 1] != rows[n - 1 - r][i - 1]) {
                Some(r) => Err(format!(
                    "column {mirrored} row {} is not column {i} reversed",
                    r + 1
                )),
                None => Ok(()),
            }
        })
    });

    let d = |k: u32| set.members()[k as usize - 1].min_distance;
    let boundary = {
        let t = t as u32;
        let expected = [(1, 2), (pv - 1, 2), (t, 1), (t + 1, 1)];
        first_failure(expected, |(k, want)| {
            if d(k) == want {
                Ok(())
            } else {
                Err(format!("d(H{k}) = {} but expected {want}", d(k)))
            }
        })
    };

    let index = CoincidenceIndex::new(&rows).expect("equal lengths");
    let auto_max: Vec<u32> = (0..rows.len())
        .into_par_iter()
        .map(|r| index.profile(r, r).out_of_phase_max())
        .collect();
    let max_auto = auto_max.iter().copied().max().unwrap_or(0);
    let zero_auto = first_failure(auto_max.iter().enumerate(), |(r, &m)| {
        if m == 0 {
            Ok(())
        } else {
            Err(format!("H{} has out-of-phase autocorrelation {m}", r + 1))
        }
    });

    let checks = [
        (Check::Distinct, distinct),
        (Check::Range, range),
        (Check::MidpointMirror, midpoint_mirror),
        (Check::MirrorExtension, mirror_extension),
        (Check::OneCoincidence, coincidence),
        (Check::TimeReversal, time_reversal),
        (Check::BoundaryDistances, boundary),
        (Check::ZeroAutocorrelation, zero_auto),
    ]
    .into_iter()
    .map(|(c, r)| CheckOutcome::from_result(c, r))
    .collect();

    VerificationReport {
        p,
        checks,
        max_cross_correlation: max_cross,
        max_out_of_phase_autocorrelation: max_auto,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::hmc_sequence;

    fn h(p: u32, k: u32) -> Vec<u32> {
        hmc_sequence(Prime::new(p).unwrap(), k)
            .unwrap()
            .elements()
            .to_vec()
    }

    #[test]
    fn correlation_examples() {
        let h1 = h(7, 1);
        assert_eq!(hamming_cross_correlation(&h1, &h1, 0).unwrap(), 7);
        assert_eq!(hamming_cross_correlation(&h1, &h1, 3).unwrap(), 0);
        // position 4 of both H_2 and H_5 holds 7
        assert_eq!(hamming_cross_correlation(&h(7, 2), &h(7, 5), 0).unwrap(), 1);
    }

    #[test]
    fn correlation_errors() {
        assert!(hamming_cross_correlation(&[1, 2], &[1], 0)
            .unwrap_err()
            .is_invalid_input());
        assert!(hamming_cross_correlation(&[1, 2], &[1, 2], 2).is_err());
        assert!(correlation_profile(&[], &[]).is_err());
    }

    #[test]
    fn profile_examples() {
        let h1 = h(7, 1);
        assert_eq!(
            correlation_profile(&h1, &h1).unwrap().values(),
            &[7, 0, 0, 0, 0, 0, 0]
        );
        // tau 0: (1,1) hit, (1,2) miss ; tau 1: (1,2) miss, (1,1) hit
        assert_eq!(
            correlation_profile(&[1, 1], &[1, 2]).unwrap().values(),
            &[1, 1]
        );
    }

    #[test]
    fn index_handles_repeats() {
        let x = [1u32, 1];
        let y = [1u32, 2];
        let index = CoincidenceIndex::new(&[&x, &y]).unwrap();
        assert_eq!(index.profile(0, 1).values(), &[1, 1]);
        assert_eq!(index.profile(0, 0).values(), &[2, 2]);
    }

    #[test]
    fn one_coincidence_p7() {
        let out = verify_one_coincidence(&hmc_set(Prime::new(7).unwrap()));
        assert!(out.holds);
        assert_eq!(out.worst.unwrap().count, 1);
    }

    #[test]
    fn duplicated_sequence_is_flagged() {
        let h1 = h(7, 1);
        let out = verify_one_coincidence_labeled(&[(1, &h1), (2, &h1)]).unwrap();
        assert!(!out.holds);
        assert_eq!(
            out.worst,
            Some(Offender {
                k: 1,
                l: 2,
                tau: 0,
                count: 7
            })
        );
    }

    #[test]
    fn duplicate_labels_rejected() {
        let h1 = h(7, 1);
        assert!(verify_one_coincidence_labeled(&[(1, &h1), (1, &h1)]).is_err());
    }

    #[test]
    fn single_member_set_has_no_offender() {
        let h1 = h(7, 1);
        let out = verify_one_coincidence_labeled(&[(1, &h1)]).unwrap();
        assert!(out.holds);
        assert!(out.worst.is_none());
    }

    #[test]
    fn worst_offender_is_lexicographically_first() {
        // every pair of H(7) sequences shares the value 7; the first hit of (1, 2)
        let out = verify_one_coincidence(&hmc_set(Prime::new(7).unwrap()));
        let w = out.worst.unwrap();
        assert_eq!((w.k, w.l), (1, 2));
        let profile = correlation_profile(&h(7, 1), &h(7, 2)).unwrap();
        assert_eq!(w.tau as usize, profile.argmax().unwrap().0);
    }

    #[test]
    fn lemmas_p7_and_p19() {
        for p in [7, 19] {
            let report = verify_lemmas(Prime::new(p).unwrap());
            assert!(report.all_pass(), "{report:?}");
            assert_eq!(report.max_cross_correlation, 1);
            assert_eq!(report.max_out_of_phase_autocorrelation, 0);
            assert!(report.checks.iter().all(|c| c.counterexample.is_none()));
        }
    }

    #[test]
    fn p3_breaks_only_boundary_distances() {
        // H_1 = 1,3,2 is also H_t (t = 1): d = 1, so d(H_1) = 2 cannot hold
        let report = verify_lemmas(Prime::new(3).unwrap());
        let failed: Vec<Check> = report.failures().map(|c| c.check).collect();
        assert_eq!(failed, vec![Check::BoundaryDistances]);
        let cx = report.outcome(Check::BoundaryDistances).unwrap();
        assert_eq!(
            cx.counterexample.as_deref(),
            Some("d(H1) = 1 but expected 2")
        );
    }

    #[test]
    fn check_labels_round_trip() {
        for c in Check::ALL {
            assert_eq!(Check::from_label(c.label()), Some(c));
        }
        assert_eq!(Check::from_label("nope"), None);
    }
}
