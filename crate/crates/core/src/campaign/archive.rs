use serde::{Deserialize, Serialize};

use super::score::{Family, Protocol};
use crate::error::{Error, Result};

/// One line of the campaign log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub iteration: u64,
    pub family: Family,
    pub protocol: Protocol,
    pub score: Option<f64>,
    pub accepted: bool,
    pub relative_gain_pct: Option<f64>,
    pub summary: String,
    pub seed: u64,
    pub elapsed_s: f64,
}

impl CandidateRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Append-only record list with acceptance bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CampaignArchive {
    records: Vec<CandidateRecord>,
    best_iteration: usize,
    accepted_count: usize,
    rejected_count: usize,
}

impl CampaignArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; accepted records become the new best.
    pub fn push(&mut self, record: CandidateRecord) -> Result<()> {
        if record.iteration != self.records.len() as u64 {
            return Err(Error::invalid(format!(
                "record iteration {} out of order (expected {})",
                record.iteration,
                self.records.len()
            )));
        }
        if record.iteration == 0 {
            if !record.accepted || record.score.is_none() {
                return Err(Error::invalid("baseline record must be scored and accepted"));
            }
        } else if record.accepted {
            self.accepted_count += 1;
        } else {
            self.rejected_count += 1;
        }
        if record.accepted {
            self.best_iteration = record.iteration as usize;
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[CandidateRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best(&self) -> Option<&CandidateRecord> {
        self.records.get(self.best_iteration)
    }

    pub fn best_score(&self) -> Option<f64> {
        self.best().and_then(|r| r.score)
    }

    pub fn best_iteration(&self) -> usize {
        self.best_iteration
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted_count
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected_count
    }

    /// Most recent successfully scored record.
    pub fn last_scored(&self) -> Option<&CandidateRecord> {
        self.records.iter().rev().find(|r| r.score.is_some())
    }

    pub fn tail(&self, n: usize) -> &[CandidateRecord] {
        &self.records[self.records.len().saturating_sub(n)..]
    }

    /// Prefix minima of the scores; failed records repeat the prior value.
    pub fn running_best(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.records
            .iter()
            .map(|r| {
                if let Some(s) = r.score {
                    best = best.min(s);
                }
                best
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_json_line() + "\n").collect()
    }

    /// Rebuilds an archive from its log, re-checking every invariant.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut archive = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: CandidateRecord =
                serde_json::from_str(line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            archive.push(record)?;
        }
        Ok(archive)
    }
}

/// The data behind a campaign report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub family: Family,
    pub iterations: usize,
    pub scores: Vec<Option<f64>>,
    pub running_best: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub baseline_score: f64,
    pub best_score: f64,
    pub best_iteration: usize,
    pub baseline_protocol: Protocol,
    pub best_protocol: Protocol,
}

pub fn summarize(archive: &CampaignArchive) -> Result<CampaignSummary> {
    let base = archive.records().first().ok_or_else(|| Error::invalid("archive is empty"))?;
    let best = archive.best().expect("non-empty archive has a best record");
    Ok(CampaignSummary {
        family: base.family,
        iterations: archive.len() - 1,
        scores: archive.records().iter().map(|r| r.score).collect(),
        running_best: archive.running_best(),
        accepted: archive.accepted_count(),
        rejected: archive.rejected_count(),
        baseline_score: base.score.expect("baseline is scored"),
        best_score: best.score.expect("best is scored"),
        best_iteration: archive.best_iteration(),
        baseline_protocol: base.protocol.clone(),
        best_protocol: best.protocol.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::Payload;
    use crate::presets;

    pub(crate) fn record(iteration: u64, score: Option<f64>, accepted: bool) -> CandidateRecord {
        CandidateRecord {
            iteration,
            family: Family::Dmrg,
            protocol: Protocol::new(Payload::Dmrg(presets::dmrg_baseline(iteration)), "chain", ""),
            score,
            accepted,
            relative_gain_pct: None,
            summary: String::new(),
            seed: 0,
            elapsed_s: 0.0,
        }
    }

    #[test]
    fn single_record_best_is_baseline() {
        let mut a = CampaignArchive::new();
        a.push(record(0, Some(-1.0), true)).unwrap();
        let s = summarize(&a).unwrap();
        assert_eq!(s.best_iteration, 0);
        assert_eq!(s.best_score, s.baseline_score);
    }

    #[test]
    fn running_best_is_prefix_min() {
        let mut a = CampaignArchive::new();
        a.push(record(0, Some(-1.0), true)).unwrap();
        a.push(record(1, Some(-0.5), false)).unwrap();
        a.push(record(2, None, false)).unwrap();
        a.push(record(3, Some(-2.0), true)).unwrap();
        assert_eq!(a.running_best(), vec![-1.0, -1.0, -1.0, -2.0]);
        assert_eq!(a.accepted_count() + a.rejected_count(), 3);
        assert_eq!(a.best_iteration(), 3);
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let mut a = CampaignArchive::new();
        a.push(record(0, Some(-1.0000000000000002), true)).unwrap();
        a.push(record(1, None, false)).unwrap();
        let text = a.to_jsonl();
        let back = CampaignArchive::from_jsonl(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_jsonl(), text);
        let s = summarize(&back).unwrap();
        assert_eq!(summarize(&CampaignArchive::from_jsonl(&back.to_jsonl()).unwrap()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_logs() {
        let mut a = CampaignArchive::new();
        assert!(a.push(record(1, Some(0.0), true)).is_err());
        assert!(a.push(record(0, None, true)).is_err());
        assert!(summarize(&CampaignArchive::new()).is_err());
        assert!(CampaignArchive::from_jsonl("{\"iteration\":0}").is_err());
    }
}
