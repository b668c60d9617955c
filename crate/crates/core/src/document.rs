//! Serialized output documents: sequence tables, profiles and reports.
//!
//! Every document renders to CSV or JSON and parses back to the same value.
//!
//! CSV layout: one `#` metadata line (`kind`, `p`, kind-specific keys, then
//! `tool`, `version` and free-form parameters as `key=value` words), followed
//! by one or more comma-separated sections with a header row each. Sections
//! are separated by a single blank line. Fields are never quoted; rendering
//! fails on a field that would need quoting.
//!
//! Sequence tables follow the printed tables: prime sequences are labelled
//! `S<k>` with 0-based column headers `0..p-1`; HMC sequences are labelled
//! `H<k>` with 1-based headers `1..p` and a trailing `d` column.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{Check, CheckOutcome, CorrelationProfile, VerificationReport};
use crate::designer::{DesignResult, DesignSpec, DropReason, Dropped};
use crate::error::{Error, Result};
use crate::modp::Prime;
use crate::sequences::{PrimeSequence, SequenceSet};
use crate::sim::{HitReport, PairHits, UserAssignment};

pub const TOOL_NAME: &str = "hmcseq";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Prime,
    Hmc,
}

impl Family {
    fn label_prefix(self) -> char {
        match self {
            Family::Prime => 'S',
            Family::Hmc => 'H',
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Prime => "prime",
            Family::Hmc => "hmc",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prime" => Ok(Family::Prime),
            "hmc" => Ok(Family::Hmc),
            other => Err(Error::invalid(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub params: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new<K: Into<String>, V: ToString>(params: impl IntoIterator<Item = (K, V)>) -> Self {
        Metadata {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            params: params
                .into_iter()
                .map(|(k, v)| (k.into(), v.to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceRow {
    pub k: u32,
    pub elements: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserRow {
    pub id: String,
    pub k: u32,
    pub delay: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TableBody {
    PrimeSet {
        family: Family,
        sequences: Vec<SequenceRow>,
    },
    HmcSet {
        family: Family,
        sequences: Vec<SequenceRow>,
    },
    FilteredSet {
        family: Family,
        sequences: Vec<SequenceRow>,
        dropped: Vec<Dropped>,
    },
    CorrelationProfile {
        k: u32,
        l: u32,
        profile: CorrelationProfile,
    },
    VerificationReport {
        reports: Vec<VerificationReport>,
    },
    HitReport {
        users: Vec<UserRow>,
        pairs: Vec<PairHits>,
        max_hits: u32,
    },
}

impl TableBody {
    pub fn kind(&self) -> &'static str {
        match self {
            TableBody::PrimeSet { .. } => "prime-set",
            TableBody::HmcSet { .. } => "hmc-set",
            TableBody::FilteredSet { .. } => "filtered-set",
            TableBody::CorrelationProfile { .. } => "correlation-profile",
            TableBody::VerificationReport { .. } => "verification-report",
            TableBody::HitReport { .. } => "hit-report",
        }
    }
}

/// One command's output. For a verification report over several primes,
/// `p` is the largest prime covered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDocument {
    pub p: Prime,
    #[serde(flatten)]
    pub body: TableBody,
    pub metadata: Metadata,
}

fn hmc_rows(set: &SequenceSet) -> Vec<SequenceRow> {
    set.members()
        .iter()
        .map(|m| SequenceRow {
            k: m.k(),
            elements: m.sequence.elements().to_vec(),
            d: Some(m.min_distance),
        })
        .collect()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

impl TableDocument {
    pub fn prime_set(p: Prime, sequences: &[PrimeSequence]) -> Self {
        TableDocument {
            p,
            body: TableBody::PrimeSet {
                family: Family::Prime,
                sequences: sequences
                    .iter()
                    .map(|s| SequenceRow {
                        k: s.k(),
                        elements: s.elements().to_vec(),
                        d: None,
                    })
                    .collect(),
            },
            metadata: Metadata::new([("family", "prime")]),
        }
    }

    pub fn hmc_set(set: &SequenceSet) -> Self {
        TableDocument {
            p: set.p(),
            body: TableBody::HmcSet {
                family: Family::Hmc,
                sequences: hmc_rows(set),
            },
            metadata: Metadata::new([("family", "hmc")]),
        }
    }

    pub fn filtered_set(result: &DesignResult, spec: &DesignSpec) -> Self {
        TableDocument {
            p: result.kept.p(),
            body: TableBody::FilteredSet {
                family: Family::Hmc,
                sequences: hmc_rows(&result.kept),
                dropped: result.dropped.clone(),
            },
            metadata: Metadata::new([
                ("bad", join(spec.bad_frequencies(), ";")),
                ("dreq", spec.d_req().to_string()),
            ]),
        }
    }

    pub fn correlation(p: Prime, k: u32, l: u32, profile: CorrelationProfile) -> Self {
        TableDocument {
            p,
            body: TableBody::CorrelationProfile { k, l, profile },
            metadata: Metadata::new(std::iter::empty::<(String, String)>()),
        }
    }

    /// `reports` must be non-empty.
    pub fn verification(reports: Vec<VerificationReport>) -> Self {
        let p = reports
            .iter()
            .map(|r| r.p)
            .max()
            .expect("at least one report");
        let all_pass = reports.iter().all(VerificationReport::all_pass);
        TableDocument {
            p,
            body: TableBody::VerificationReport { reports },
            metadata: Metadata::new([("all_pass", all_pass)]),
        }
    }

    pub fn hit_report(
        assignments: &[UserAssignment],
        report: &HitReport,
        seed: Option<u64>,
    ) -> Result<Self> {
        let p = assignments
            .first()
            .map(|a| a.sequence.p())
            .ok_or_else(|| Error::invalid("hit report needs at least one user"))?;
        let params: Vec<(&str, String)> =
            seed.map(|s| ("seed", s.to_string())).into_iter().collect();
        Ok(TableDocument {
            p,
            body: TableBody::HitReport {
                users: assignments
                    .iter()
                    .map(|a| UserRow {
                        id: a.user_id.clone(),
                        k: a.sequence.k(),
                        delay: a.delay,
                    })
                    .collect(),
                pairs: report.pairs.clone(),
                max_hits: report.max_hits,
            },
            metadata: Metadata::new(params),
        })
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn parse(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::from_csv(text),
            Format::Json => Self::from_json(text),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    fn validate(&self) -> Result<()> {
        let expect_family = |family: Family, want: Family| {
            if family == want {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "{} document with family {family}",
                    self.body.kind()
                )))
            }
        };
        match &self.body {
            TableBody::PrimeSet { family, .. } => expect_family(*family, Family::Prime),
            TableBody::HmcSet { family, .. } | TableBody::FilteredSet { family, .. } => {
                expect_family(*family, Family::Hmc)
            }
            TableBody::VerificationReport { reports } if reports.is_empty() => {
                Err(Error::Parse("verification report without entries".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut meta = vec![
            format!("kind={}", self.body.kind()),
            format!("p={}", self.p),
        ];
        if let TableBody::CorrelationProfile { k, l, .. } = &self.body {
            meta.push(format!("k={k}"));
            meta.push(format!("l={l}"));
        }
        meta.push(format!("tool={}", self.metadata.tool));
        meta.push(format!("version={}", self.metadata.version));
        for (key, value) in &self.metadata.params {
            meta.push(format!("{key}={value}"));
        }
        for word in &meta {
            let (key, value) = word.split_once('=').expect("key=value");
            if key.is_empty() || word_unsafe(key) || word_unsafe(value) {
                return Err(Error::invalid(format!(
                    "metadata entry {word:?} cannot be written as CSV"
                )));
            }
        }

        let mut sections: Vec<Vec<Vec<String>>> = Vec::new();
        let p = self.p.get();
        match &self.body {
            TableBody::PrimeSet { sequences, .. } => {
                sections.push(sequence_section(Family::Prime, p, sequences));
            }
            TableBody::HmcSet { sequences, .. } => {
                sections.push(sequence_section(Family::Hmc, p, sequences));
            }
            TableBody::FilteredSet {
                sequences, dropped, ..
            } => {
                sections.push(sequence_section(Family::Hmc, p, sequences));
                let mut section = vec![vec!["dropped".to_string(), "reason".to_string()]];
                section.extend(
                    dropped
                        .iter()
                        .map(|d| vec![format!("H{}", d.k), d.reason.label().to_string()]),
                );
                sections.push(section);
            }
            TableBody::CorrelationProfile { profile, .. } => {
                let mut section = vec![vec!["tau".to_string(), "count".to_string()]];
                section.extend(
                    profile
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(tau, c)| vec![tau.to_string(), c.to_string()]),
                );
                sections.push(section);
            }
            TableBody::VerificationReport { reports } => {
                let mut checks = vec![strings(["p", "check", "status", "counterexample"])];
                let mut summary = vec![strings([
                    "p",
                    "max_cross_correlation",
                    "max_out_of_phase_autocorrelation",
                ])];
                for r in reports {
                    for c in &r.checks {
                        checks.push(vec![
                            r.p.to_string(),
                            c.check.label().to_string(),
                            if c.passed { "pass" } else { "fail" }.to_string(),
                            c.counterexample.clone().unwrap_or_default(),
                        ]);
                    }
                    summary.push(vec![
                        r.p.to_string(),
                        r.max_cross_correlation.to_string(),
                        r.max_out_of_phase_autocorrelation.to_string(),
                    ]);
                }
                sections.push(checks);
                sections.push(summary);
            }
            TableBody::HitReport {
                users,
                pairs,
                max_hits,
            } => {
                let mut u = vec![strings(["user", "k", "delay"])];
                u.extend(
                    users
                        .iter()
                        .map(|r| vec![r.id.clone(), r.k.to_string(), r.delay.to_string()]),
                );
                let mut pr = vec![strings(["a", "b", "tau", "hits"])];
                pr.extend(pairs.iter().map(|h| {
                    vec![
                        h.a.clone(),
                        h.b.clone(),
                        h.tau.to_string(),
                        h.hits.to_string(),
                    ]
                }));
                sections.push(u);
                sections.push(pr);
                sections.push(vec![strings(["max_hits"]), vec![max_hits.to_string()]]);
            }
        }

        let mut out = String::new();
        writeln!(out, "# {}", meta.join(" ")).expect("string write");
        for (i, section) in sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for row in section {
                if let Some(bad) = row.iter().find(|f| field_unsafe(f)) {
                    return Err(Error::invalid(format!(
                        "field {bad:?} cannot be written as CSV"
                    )));
                }
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta_line = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::Parse("missing '# ' metadata line".into()))?;
        let mut meta: Vec<(&str, &str)> = Vec::new();
        for word in meta_line.split(' ') {
            let kv = word
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata word {word:?}")))?;
            meta.push(kv);
        }
        let mut meta = meta.into_iter().peekable();
        let mut take = |key: &str| -> Result<String> {
            match meta.next() {
                Some((k, v)) if k == key => Ok(v.to_string()),
                _ => Err(Error::Parse(format!("expected metadata key {key:?}"))),
            }
        };
        let kind = take("kind")?;
        let p_value: u32 = parse_num(&take("p")?)?;
        let p = Prime::new(p_value).map_err(|e| Error::Parse(e.to_string()))?;
        let kl = if kind == "correlation-profile" {
            Some((
                parse_num::<u32>(&take("k")?)?,
                parse_num::<u32>(&take("l")?)?,
            ))
        } else {
            None
        };
        let tool = take("tool")?;
        let version = take("version")?;
        let params: BTreeMap<String, String> =
            meta.map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let metadata = Metadata {
            tool,
            version,
            params,
        };

        let sections = split_sections(lines)?;
        let body = match kind.as_str() {
            "prime-set" => {
                let [seq] = expect_sections::<1>(sections)?;
                TableBody::PrimeSet {
                    family: Family::Prime,
                    sequences: parse_sequence_section(Family::Prime, p.get(), &seq)?,
                }
            }
            "hmc-set" => {
                let [seq] = expect_sections::<1>(sections)?;
                TableBody::HmcSet {
                    family: Family::Hmc,
                    sequences: parse_sequence_section(Family::Hmc, p.get(), &seq)?,
                }
            }
            "filtered-set" => {
                let [seq, dropped] = expect_sections::<2>(sections)?;
                let rows = section_rows(&dropped, &["dropped", "reason"])?;
                TableBody::FilteredSet {
                    family: Family::Hmc,
                    sequences: parse_sequence_section(Family::Hmc, p.get(), &seq)?,
                    dropped: rows
                        .iter()
                        .map(|r| {
                            Ok(Dropped {
                                k: parse_label(Family::Hmc, r[0])?,
                                reason: r[1].parse::<DropReason>()?,
                            })
                        })
                        .collect::<Result<_>>()?,
                }
            }
            "correlation-profile" => {
                let [profile] = expect_sections::<1>(sections)?;
                let rows = section_rows(&profile, &["tau", "count"])?;
                let mut values = Vec::with_capacity(rows.len());
                for (i, r) in rows.iter().enumerate() {
                    if parse_num::<usize>(r[0])? != i {
                        return Err(Error::Parse(format!("profile row {i} has tau {}", r[0])));
                    }
                    values.push(parse_num(r[1])?);
                }
                let (k, l) = kl.expect("set for correlation-profile");
                TableBody::CorrelationProfile {
                    k,
                    l,
                    profile: CorrelationProfile::new(values),
                }
            }
            "verification-report" => {
                let [checks, summary] = expect_sections::<2>(sections)?;
                let check_rows =
                    section_rows(&checks, &["p", "check", "status", "counterexample"])?;
                let summary_rows = section_rows(
                    &summary,
                    &[
                        "p",
                        "max_cross_correlation",
                        "max_out_of_phase_autocorrelation",
                    ],
                )?;
                let mut reports = Vec::with_capacity(summary_rows.len());
                for s in &summary_rows {
                    let rp =
                        Prime::new(parse_num(s[0])?).map_err(|e| Error::Parse(e.to_string()))?;
                    let checks = check_rows
                        .iter()
                        .filter(|r| r[0] == s[0])
                        .map(|r| {
                            let check = Check::from_label(r[1])
                                .ok_or_else(|| Error::Parse(format!("unknown check {:?}", r[1])))?;
                            let passed = match r[2] {
                                "pass" => true,
                                "fail" => false,
                                other => return Err(Error::Parse(format!("bad status {other:?}"))),
                            };
                            Ok(CheckOutcome {
                                check,
                                passed,
                                counterexample: (!r[3].is_empty()).then(|| r[3].to_string()),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    reports.push(VerificationReport {
                        p: rp,
                        checks,
                        max_cross_correlation: parse_num(s[1])?,
                        max_out_of_phase_autocorrelation: parse_num(s[2])?,
                    });
                }
                let covered: usize = reports.iter().map(|r| r.checks.len()).sum();
                if covered != check_rows.len() {
                    return Err(Error::Parse("check rows without a summary row".into()));
                }
                TableBody::VerificationReport { reports }
            }
            "hit-report" => {
                let [users, pairs, max] = expect_sections::<3>(sections)?;
                let users = section_rows(&users, &["user", "k", "delay"])?
                    .iter()
                    .map(|r| {
                        Ok(UserRow {
                            id: r[0].to_string(),
                            k: parse_num(r[1])?,
                            delay: parse_num(r[2])?,
                        })
                    })
                    .collect::<Result<_>>()?;
                let pairs = section_rows(&pairs, &["a", "b", "tau", "hits"])?
                    .iter()
                    .map(|r| {
                        Ok(PairHits {
                            a: r[0].to_string(),
                            b: r[1].to_string(),
                            tau: parse_num(r[2])?,
                            hits: parse_num(r[3])?,
                        })
                    })
                    .collect::<Result<_>>()?;
                let max_rows = section_rows(&max, &["max_hits"])?;
                let [row] = max_rows.as_slice() else {
                    return Err(Error::Parse("expected one max_hits row".into()));
                };
                TableBody::HitReport {
                    users,
                    pairs,
                    max_hits: parse_num(row[0])?,
                }
            }
            other => return Err(Error::Parse(format!("unknown document kind {other:?}"))),
        };
        let doc = TableDocument { p, body, metadata };
        doc.validate()?;
        Ok(doc)
    }
}

fn strings<const N: usize>(items: [&str; N]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn word_unsafe(s: &str) -> bool {
    s.chars().any(|c| c.is_whitespace() || c == '=')
}

fn field_unsafe(s: &str) -> bool {
    s.chars().any(|c| matches!(c, ',' | '"' | '\n' | '\r'))
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("expected a number, got {s:?}")))
}

fn parse_label(family: Family, s: &str) -> Result<u32> {
    s.strip_prefix(family.label_prefix())
        .ok_or_else(|| {
            Error::Parse(format!(
                "label {s:?} should start with {}",
                family.label_prefix()
            ))
        })
        .and_then(parse_num)
}

fn sequence_header(family: Family, p: u32) -> Vec<String> {
    let mut header = vec!["label".to_string()];
    match family {
        Family::Prime => header.extend((0..p).map(|j| j.to_string())),
        Family::Hmc => {
            header.extend((1..=p).map(|j| j.to_string()));
            header.push("d".to_string());
        }
    }
    header
}

fn sequence_section(family: Family, p: u32, rows: &[SequenceRow]) -> Vec<Vec<String>> {
    let mut section = vec![sequence_header(family, p)];
    for row in rows {
        let mut line = vec![format!("{}{}", family.label_prefix(), row.k)];
        line.extend(row.elements.iter().map(u32::to_string));
        if let Some(d) = row.d {
            line.push(d.to_string());
        }
        section.push(line);
    }
    section
}

fn parse_sequence_section(family: Family, p: u32, lines: &[&str]) -> Result<Vec<SequenceRow>> {
    let header = sequence_header(family, p);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = section_rows(lines, &header)?;
    rows.iter()
        .map(|r| {
            let k = parse_label(family, r[0])?;
            let elements = r[1..=p as usize]
                .iter()
                .map(|v| parse_num(v))
                .collect::<Result<Vec<u32>>>()?;
            let d = match family {
                Family::Prime => None,
                Family::Hmc => Some(parse_num(r[p as usize + 1])?),
            };
            Ok(SequenceRow { k, elements, d })
        })
        .collect()
}

fn split_sections<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Vec<Vec<&'a str>>> {
    let mut sections = vec![Vec::new()];
    for line in lines {
        if line.is_empty() {
            sections.push(Vec::new());
        } else {
            sections.last_mut().expect("non-empty").push(line);
        }
    }
    if sections.iter().any(Vec::is_empty) {
        return Err(Error::Parse("empty section".into()));
    }
    Ok(sections)
}

fn expect_sections<const N: usize>(sections: Vec<Vec<&str>>) -> Result<[Vec<&str>; N]> {
    let found = sections.len();
    sections
        .try_into()
        .map_err(|_| Error::Parse(format!("expected {N} sections, found {found}")))
}

/// Checks the header and splits the remaining rows into fields.
fn section_rows<'a>(lines: &[&'a str], header: &[&str]) -> Result<Vec<Vec<&'a str>>> {
    let (first, rest) = lines
        .split_first()
        .ok_or_else(|| Error::Parse("missing header row".into()))?;
    if first.split(',').ne(header.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {first:?}")));
    }
    rest.iter()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(Error::Parse(format!(
                    "row {line:?} has {} fields, expected {}",
                    fields.len(),
                    header.len()
                )));
            }
            Ok(fields)
        })
        .collect()
}
