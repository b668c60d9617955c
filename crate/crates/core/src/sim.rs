//! Slot-synchronous FH-CDMA collision simulator.
//!
//! Each user hops through its HMC sequence starting at its own cyclic delay.
//! A hit is a slot where two users sit on the same frequency. Only whole
//! periods are simulated.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{correlation_profile, hamming_cross_correlation, CorrelationProfile};
use crate::error::{Error, Result};
use crate::modp::Prime;
use crate::sequences::{hmc_sequence, HmcSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAssignment {
    pub user_id: String,
    pub sequence: HmcSequence,
    /// Phase offset in hop slots, `0 <= delay < p`.
    pub delay: u32,
}

impl UserAssignment {
    pub fn new(user_id: impl Into<String>, sequence: HmcSequence, delay: u32) -> Result<Self> {
        let user_id = user_id.into();
        validate_user_id(&user_id)?;
        let p = sequence.p().get();
        if delay >= p {
            return Err(Error::invalid(format!(
                "user {user_id}: delay {delay} out of range [0, {})",
                p - 1
            )));
        }
        Ok(UserAssignment {
            user_id,
            sequence,
            delay,
        })
    }

    /// Frequency occupied in `slot`.
    pub fn frequency_at(&self, slot: u64) -> u32 {
        let p = self.sequence.len() as u64;
        self.sequence.elements()[((slot + self.delay as u64) % p) as usize]
    }
}

/// Ids end up as bare CSV fields, so separators and quotes are refused.
pub fn validate_user_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::invalid("user id must be non-empty"));
    }
    if id.chars().any(|c| matches!(c, ',' | '"' | '\n' | '\r')) {
        return Err(Error::invalid(format!(
            "user id {id:?} may not contain commas, quotes or line breaks"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairHits {
    pub a: String,
    pub b: String,
    /// `(delay_b - delay_a) mod p`
    pub tau: u32,
    pub hits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitReport {
    /// Unordered pairs, `a` listed before `b` in assignment order.
    pub pairs: Vec<PairHits>,
    pub max_hits: u32,
}

fn validate(assignments: &[UserAssignment]) -> Result<Prime> {
    let first = assignments
        .first()
        .ok_or_else(|| Error::invalid("scenario has no users"))?;
    let p = first.sequence.p();
    let mut ks = HashSet::new();
    let mut ids = HashSet::new();
    for a in assignments {
        if a.sequence.p() != p {
            return Err(Error::invalid(format!(
                "user {} uses p = {}, expected p = {p}",
                a.user_id,
                a.sequence.p()
            )));
        }
        if !ks.insert(a.sequence.k()) {
            return Err(Error::invalid(format!(
                "sequence H{} assigned to more than one user",
                a.sequence.k()
            )));
        }
        if !ids.insert(a.user_id.as_str()) {
            return Err(Error::invalid(format!("duplicate user id {}", a.user_id)));
        }
        if a.delay >= p.get() {
            return Err(Error::invalid(format!(
                "user {}: delay {} out of range",
                a.user_id, a.delay
            )));
        }
    }
    Ok(p)
}

/// Runs one full period and counts hits for every pair of users.
///
/// Panics if a pair's slot count disagrees with the periodic correlation at
/// the relative delay; that would be a bug in this module.
pub fn simulate_period(assignments: &[UserAssignment]) -> Result<HitReport> {
    let p = validate(assignments)?.get();
    let n = assignments.len();
    let mut counts = vec![0u32; n * n];
    let mut current = vec![0u32; n];
    for slot in 0..p as u64 {
        for (f, a) in current.iter_mut().zip(assignments) {
            *f = a.frequency_at(slot);
        }
        for i in 0..n {
            for j in i + 1..n {
                if current[i] == current[j] {
                    counts[i * n + j] += 1;
                }
            }
        }
    }

    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (u, v) = (&assignments[i], &assignments[j]);
            let tau = (v.delay + p - u.delay) % p;
            let hits = counts[i * n + j];
            let expected = hamming_cross_correlation(
                u.sequence.elements(),
                v.sequence.elements(),
                tau as usize,
            )?;
            assert_eq!(
                hits, expected,
                "simulated hits for {} / {} disagree with correlation at tau {tau}",
                u.user_id, v.user_id
            );
            pairs.push(PairHits {
                a: u.user_id.clone(),
                b: v.user_id.clone(),
                tau,
                hits,
            });
        }
    }
    let max_hits = pairs.iter().map(|p| p.hits).max().unwrap_or(0);
    Ok(HitReport { pairs, max_hits })
}

/// Hits per period for every relative delay between two users.
pub fn sweep_delays(u: &UserAssignment, v: &UserAssignment) -> Result<CorrelationProfile> {
    validate(&[u.clone(), v.clone()])?;
    correlation_profile(u.sequence.elements(), v.sequence.elements())
}

/// `n` delays drawn uniformly from `[0, p)`.
pub fn random_delays(p: Prime, n: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..p.get())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloSummary {
    pub trials: u32,
    pub max_hits: u32,
    /// Sum over trials and pairs.
    pub total_hits: u64,
}

/// Re-runs [`simulate_period`] with freshly sampled delay vectors.
pub fn monte_carlo(
    sequences: &[(String, HmcSequence)],
    trials: u32,
    seed: u64,
) -> Result<MonteCarloSummary> {
    let p = sequences
        .first()
        .map(|(_, s)| s.p())
        .ok_or_else(|| Error::invalid("scenario has no users"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = MonteCarloSummary {
        trials,
        max_hits: 0,
        total_hits: 0,
    };
    for _ in 0..trials {
        let assignments = sequences
            .iter()
            .map(|(id, s)| UserAssignment::new(id.clone(), s.clone(), rng.gen_range(0..p.get())))
            .collect::<Result<Vec<_>>>()?;
        let report = simulate_period(&assignments)?;
        summary.max_hits = summary.max_hits.max(report.max_hits);
        summary.total_hits += report.pairs.iter().map(|p| p.hits as u64).sum::<u64>();
    }
    Ok(summary)
}

/// Scenario file: `{"p": int, "users": [{"id", "k", "delay"}], "seed": int?}`.
///
/// A user without `delay` gets one drawn from the seed, in user order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub p: u32,
    pub users: Vec<ScenarioUser>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioUser {
    pub id: String,
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<u32>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))
    }

    /// `seed_override` takes precedence over the file's seed.
    pub fn assignments(&self, seed_override: Option<u64>) -> Result<Vec<UserAssignment>> {
        let p = Prime::new(self.p)?;
        let seed = seed_override.or(self.seed);
        let missing = self.users.iter().filter(|u| u.delay.is_none()).count();
        let mut drawn = match (missing, seed) {
            (0, _) => Vec::new(),
            (_, Some(seed)) => random_delays(p, missing, seed),
            (_, None) => {
                return Err(Error::invalid("users without a delay need a seed"));
            }
        }
        .into_iter();

        self.users
            .iter()
            .map(|u| {
                if u.k == 0 || u.k >= self.p {
                    return Err(Error::invalid(format!(
                        "user {}: k = {} out of range [1, {}]",
                        u.id,
                        u.k,
                        self.p - 1
                    )));
                }
                let delay = match u.delay {
                    Some(d) => d,
                    None => drawn.next().expect("one draw per missing delay"),
                };
                UserAssignment::new(u.id.clone(), hmc_sequence(p, u.k)?, delay)
            })
            .collect()
    }
}
