//! Trimming an HMC set down to design requirements.
//!
//! Sequences are dropped whole. Bad frequencies are treated as bad for every
//! user; location-specific badness and swapping sequences between users are
//! left to whoever assigns sequences, using [`bad_frequency_flags`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{SequenceSet, SetMember};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    d_req: u32,
    bad_frequencies: BTreeSet<u32>,
}

impl DesignSpec {
    pub fn new(d_req: u32, bad_frequencies: impl IntoIterator<Item = u32>) -> Result<Self> {
        if d_req == 0 {
            return Err(Error::invalid("d_req must be at least 1"));
        }
        Ok(DesignSpec {
            d_req,
            bad_frequencies: bad_frequencies.into_iter().collect(),
        })
    }

    pub fn d_req(&self) -> u32 {
        self.d_req
    }

    pub fn bad_frequencies(&self) -> &BTreeSet<u32> {
        &self.bad_frequencies
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DropReason {
    #[serde(rename = "below-d_req")]
    BelowDReq,
    #[serde(rename = "contains-bad-frequency")]
    ContainsBadFrequency,
}

impl DropReason {
    pub fn label(self) -> &'static str {
        match self {
            DropReason::BelowDReq => "below-d_req",
            DropReason::ContainsBadFrequency => "contains-bad-frequency",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DropReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below-d_req" => Ok(DropReason::BelowDReq),
            "contains-bad-frequency" => Ok(DropReason::ContainsBadFrequency),
            other => Err(Error::Parse(format!("unknown drop reason {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub k: u32,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignResult {
    pub kept: SequenceSet,
    /// In the input set's order.
    pub dropped: Vec<Dropped>,
}

impl DesignResult {
    pub fn dropped_ks(&self) -> Vec<u32> {
        self.dropped.iter().map(|d| d.k).collect()
    }
}

fn partition(set: &SequenceSet, reject: impl Fn(&SetMember) -> Option<DropReason>) -> DesignResult {
    let dropped = set
        .members()
        .iter()
        .filter_map(|m| reject(m).map(|reason| Dropped { k: m.k(), reason }))
        .collect();
    DesignResult {
        kept: set.retain_ks(|m| reject(m).is_none()),
        dropped,
    }
}

pub fn filter_by_min_distance(set: &SequenceSet, d_req: u32) -> DesignResult {
    partition(set, |m| {
        (m.min_distance < d_req).then_some(DropReason::BelowDReq)
    })
}

pub fn filter_by_bad_frequencies(set: &SequenceSet, bad: &BTreeSet<u32>) -> DesignResult {
    partition(set, |m| {
        m.sequence
            .elements()
            .iter()
            .any(|v| bad.contains(v))
            .then_some(DropReason::ContainsBadFrequency)
    })
}

/// Distance filter, then bad-frequency filter. A sequence failing both is
/// reported as [`DropReason::BelowDReq`].
pub fn design(set: &SequenceSet, spec: &DesignSpec) -> DesignResult {
    partition(set, |m| {
        if m.min_distance < spec.d_req {
            Some(DropReason::BelowDReq)
        } else if m
            .sequence
            .elements()
            .iter()
            .any(|v| spec.bad_frequencies.contains(v))
        {
            Some(DropReason::ContainsBadFrequency)
        } else {
            None
        }
    })
}

/// For each member (in set order), the bad frequencies it uses, ascending.
pub fn bad_frequency_flags(set: &SequenceSet, bad: &BTreeSet<u32>) -> Vec<(u32, Vec<u32>)> {
    set.members()
        .iter()
        .map(|m| {
            let mut hits: Vec<u32> = m
                .sequence
                .elements()
                .iter()
                .copied()
                .filter(|v| bad.contains(v))
                .collect();
            hits.sort_unstable();
            (m.k(), hits)
        })
        .collect()
}
