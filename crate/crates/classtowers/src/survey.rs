//! Batch scans of radicands: admission, parameter computation, minimal
//! radicand aggregation, CSV/JSON export, and an on-disk record cache.
//!
//! The scan is two-pass: first every d in the range is profiled against the
//! admission conditions (cheap, sieve-backed), then class numbers are
//! computed once per distinct auxiliary field and joined back in ascending
//! order of d. Workers share only the read-only sieve; the merge is a
//! deterministic concatenation of chunk results, so parallel and serial
//! runs emit byte-identical records.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{profile_radicand, profile_radicand_sieved, FactorSieve, RadicandProfile};
use crate::quadclass;
use crate::towers::{self, TowerParams};

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("survey range must satisfy lo < hi, got ({0}, {1})")]
    BadRange(u64, u64),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("cache file {0}: {1}")]
    BadCache(PathBuf, String),
}

/// One accepted radicand with everything recomputable from d alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyRecord {
    pub d: u64,
    pub p1: u64,
    pub p2: u64,
    pub q: u64,
    pub m: u32,
    pub n: u32,
    pub legendre_p2_q: i32,
    pub position: String,
}

/// (m, n) -> smallest accepted d realizing those parameters.
pub type MinimalRadicandTable = BTreeMap<(u32, u32), u64>;

#[derive(Debug, Clone, Default)]
pub struct SurveySummary {
    pub count: u64,
    pub table: MinimalRadicandTable,
    /// Radicands whose parameter computation failed, with diagnostics;
    /// admission rejections are not errors.
    pub errors: Vec<(u64, String)>,
}

fn two_class_exponent(radicand: i64) -> Result<u32, String> {
    let h2 = quadclass::two_class_number(radicand).map_err(|e| e.to_string())?;
    Ok(h2.trailing_zeros())
}

/// Scan every d with lo < d < hi, calling `emit` for each accepted radicand
/// in ascending order of d.
pub fn survey_with<F: FnMut(&SurveyRecord)>(
    lo: u64,
    hi: u64,
    mut emit: F,
) -> Result<SurveySummary, SurveyError> {
    if lo >= hi {
        return Err(SurveyError::BadRange(lo, hi));
    }
    let sieve = FactorSieve::new(hi);
    const CHUNK: u64 = 1 << 16;
    let starts: Vec<u64> = (lo + 1..hi).step_by(CHUNK as usize).collect();
    let chunks: Vec<Vec<RadicandProfile>> = starts
        .par_iter()
        .map(|&start| {
            (start..(start + CHUNK).min(hi))
                .filter_map(|d| profile_radicand_sieved(d, &sieve).ok())
                .collect()
        })
        .collect();
    let profiles: Vec<RadicandProfile> = chunks.into_iter().flatten().collect();

    // Class numbers once per distinct auxiliary field.
    let mut p1s: Vec<u64> = profiles.iter().map(|p| p.p1).collect();
    p1s.sort_unstable();
    p1s.dedup();
    let mut p2qs: Vec<u64> = profiles.iter().map(|p| p.p2 * p.q).collect();
    p2qs.sort_unstable();
    p2qs.dedup();
    let m_of: HashMap<u64, Result<u32, String>> = p1s
        .par_iter()
        .map(|&p1| (p1, two_class_exponent(-(p1 as i64)).map(|e| e.saturating_sub(1))))
        .collect();
    let n_of: HashMap<u64, Result<u32, String>> = p2qs
        .par_iter()
        .map(|&pq| (pq, two_class_exponent(-(pq as i64))))
        .collect();

    let mut summary = SurveySummary::default();
    for prof in &profiles {
        let m = &m_of[&prof.p1];
        let n = &n_of[&(prof.p2 * prof.q)];
        match (m, n) {
            (Ok(m), Ok(n)) if *m >= 1 && *n >= 1 => {
                let params = TowerParams { m: *m, n: *n };
                let record = SurveyRecord {
                    d: prof.d,
                    p1: prof.p1,
                    p2: prof.p2,
                    q: prof.q,
                    m: *m,
                    n: *n,
                    legendre_p2_q: prof.legendre_p2_q,
                    position: towers::tree_position(params).label(),
                };
                emit(&record);
                summary.count += 1;
                summary.table.entry((*m, *n)).or_insert(prof.d);
            }
            (Ok(m), Ok(n)) => summary.errors.push((
                prof.d,
                format!("parameters ({}, {}) violate the m,n >= 1 hypothesis", m, n),
            )),
            (Err(e), _) | (_, Err(e)) => summary.errors.push((prof.d, e.clone())),
        }
    }
    Ok(summary)
}

/// Collecting variant of [`survey_with`].
pub fn survey(lo: u64, hi: u64) -> Result<(Vec<SurveyRecord>, SurveySummary), SurveyError> {
    let mut records = Vec::new();
    let summary = survey_with(lo, hi, |r| records.push(r.clone()))?;
    Ok((records, summary))
}

/// Recompute the record for a single d through the one-shot code path;
/// `None` when d is not admitted.
pub fn record_for(d: u64) -> Option<Result<SurveyRecord, String>> {
    let prof = profile_radicand(d).ok()?;
    Some(
        towers::params_from_radicand(&prof)
            .map(|params| SurveyRecord {
                d,
                p1: prof.p1,
                p2: prof.p2,
                q: prof.q,
                m: params.m,
                n: params.n,
                legendre_p2_q: prof.legendre_p2_q,
                position: towers::tree_position(params).label(),
            })
            .map_err(|e| e.to_string()),
    )
}

/// Re-aggregate a record list (already ascending in d) into a summary.
pub fn summarize(records: &[SurveyRecord]) -> SurveySummary {
    let mut summary = SurveySummary {
        count: records.len() as u64,
        ..Default::default()
    };
    for r in records {
        summary.table.entry((r.m, r.n)).or_insert(r.d);
    }
    summary
}

pub const CSV_HEADER: &str = "d,p1,p2,q,m,n,legendre_p2_q,position";

pub fn csv_line(r: &SurveyRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.d, r.p1, r.p2, r.q, r.m, r.n, r.legendre_p2_q, r.position
    )
}

pub fn export_csv<W: Write>(records: &[SurveyRecord], w: &mut W) -> io::Result<()> {
    writeln!(w, "{}", CSV_HEADER)?;
    for r in records {
        writeln!(w, "{}", csv_line(r))?;
    }
    Ok(())
}

pub fn export_json<W: Write>(records: &[SurveyRecord], w: &mut W) -> io::Result<()> {
    serde_json::to_writer(&mut *w, records)?;
    writeln!(w)?;
    Ok(())
}

fn parse_csv_line(line: &str) -> Result<SurveyRecord, String> {
    // the position label itself contains commas, so split off 7 fields only
    let parts: Vec<&str> = line.splitn(8, ',').collect();
    if parts.len() != 8 {
        return Err(format!("expected 8 fields, got {}", parts.len()));
    }
    let num = |i: usize| -> Result<u64, String> {
        parts[i]
            .parse()
            .map_err(|_| format!("bad number {:?}", parts[i]))
    };
    Ok(SurveyRecord {
        d: num(0)?,
        p1: num(1)?,
        p2: num(2)?,
        q: num(3)?,
        m: num(4)? as u32,
        n: num(5)? as u32,
        legendre_p2_q: parts[6]
            .parse()
            .map_err(|_| format!("bad legendre {:?}", parts[6]))?,
        position: parts[7].to_string(),
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<SurveyRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("bad header {:?}", other)),
    }
    lines
        .enumerate()
        .map(|(i, l)| parse_csv_line(l).map_err(|e| format!("line {}: {}", i + 2, e)))
        .collect()
}

// Survey results are cached keyed by (lo, hi, code version), so tables can
// be re-aggregated without recomputation.
const CACHE_KEY: &str = concat!("classtowers-", env!("CARGO_PKG_VERSION"), "-records-v1");

fn fnv1a(s: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn cache_path(dir: &Path, lo: u64, hi: u64) -> PathBuf {
    dir.join(format!("survey_{}_{}_{:016x}.csv", lo, hi, fnv1a(CACHE_KEY)))
}

pub fn save_cache(
    dir: &Path,
    lo: u64,
    hi: u64,
    records: &[SurveyRecord],
) -> Result<PathBuf, SurveyError> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, lo, hi);
    let mut buf = Vec::new();
    export_csv(records, &mut buf)?;
    fs::write(&path, buf)?;
    Ok(path)
}

pub fn load_cache(dir: &Path, lo: u64, hi: u64) -> Result<Option<Vec<SurveyRecord>>, SurveyError> {
    let path = cache_path(dir, lo, hi);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path)?;
    parse_csv(&text)
        .map(Some)
        .map_err(|e| SurveyError::BadCache(path, e))
}

/// Survey with a read-through cache: hit -> records re-aggregated from disk,
/// miss -> computed and written back. The bool reports a cache hit.
pub fn survey_cached(
    dir: &Path,
    lo: u64,
    hi: u64,
) -> Result<(Vec<SurveyRecord>, SurveySummary, bool), SurveyError> {
    if let Some(records) = load_cache(dir, lo, hi)? {
        let summary = summarize(&records);
        return Ok((records, summary, true));
    }
    let (records, summary) = survey(lo, hi)?;
    save_cache(dir, lo, hi, &records)?;
    Ok((records, summary, false))
}
