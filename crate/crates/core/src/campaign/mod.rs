//! Mutate, score, archive: a budgeted search over solver protocols.
//!
//! Iteration 0 scores the baseline. Each later iteration asks a proposer
//! for a candidate, scores it under the same budget, and accepts it when it
//! beats (or, by default, ties) the best so far. Every record is appended
//! to a JSON-lines log as soon as it is decided.

mod archive;
mod propose;
mod score;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use archive::{summarize, CampaignArchive, CampaignSummary, CandidateRecord};
pub use propose::{
    default_levers, ArchiveView, ExternalProposer, Lever, MutationProposer, Proposal, Proposer, ScriptedProposer,
    ARCHIVE_TAIL, EXTERNAL_TIMEOUT, NUMERIC_FACTORS,
};
pub use score::{relative_gain, score_candidate, Family, Payload, Problem, Protocol, ScoreOutcome};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    #[default]
    AcceptTies,
    RejectTies,
}

#[derive(Debug, Clone)]
pub struct CampaignSettings {
    pub iterations: usize,
    pub budget: Budget,
    pub tie_policy: TiePolicy,
    /// Spread penalty for projector scores.
    pub lambda: f64,
    /// Recorded on every line; proposers carry their own streams.
    pub seed: u64,
    pub log_path: Option<PathBuf>,
    /// Candidates scored together when the proposer ignores the archive.
    pub speculate: usize,
}

impl CampaignSettings {
    pub fn new(iterations: usize, budget: Budget) -> Self {
        Self {
            iterations,
            budget,
            tie_policy: TiePolicy::AcceptTies,
            lambda: crate::projector::DEFAULT_LAMBDA,
            seed: 0,
            log_path: None,
            speculate: 4,
        }
    }
}

struct Log(Option<File>);

impl Log {
    fn append(&mut self, record: &CandidateRecord) -> Result<()> {
        if let Some(f) = &mut self.0 {
            writeln!(f, "{}", record.to_json_line())?;
            f.flush()?;
        }
        Ok(())
    }
}

/// Runs the loop. Fails only when the baseline itself cannot be scored or
/// the log cannot be written; candidate failures are recorded and skipped.
pub fn run_campaign(
    problem: &Problem,
    baseline: Protocol,
    proposer: &mut dyn Proposer,
    settings: &CampaignSettings,
) -> Result<CampaignArchive> {
    settings.budget.validate()?;
    if settings.budget.is_zero() && baseline.family() != Family::Vqe {
        return Err(Error::BudgetZero);
    }
    if !(settings.lambda >= 0.0) {
        return Err(Error::invalid("lambda must be >= 0"));
    }
    baseline.payload.validate()?;
    let family = baseline.family();
    let mut log = Log(match &settings.log_path {
        Some(p) => Some(File::create(p)?),
        None => None,
    });

    let base = score_candidate(problem, &baseline, settings.budget, settings.lambda);
    let Some(base_score) = base.score else {
        return Err(Error::Evaluation(format!("baseline could not be scored: {}", base.summary)));
    };
    let mut archive = CampaignArchive::new();
    let first = CandidateRecord {
        iteration: 0,
        family,
        protocol: baseline.clone(),
        score: Some(base_score),
        accepted: true,
        relative_gain_pct: None,
        summary: format!("baseline; {}", base.summary),
        seed: settings.seed,
        elapsed_s: base.elapsed_s,
    };
    log.append(&first)?;
    archive.push(first)?;
    let mut best_score = base_score;
    let mut best_protocol = baseline;

    let mut t = 1;
    while t <= settings.iterations {
        let batch = if proposer.independent() { settings.speculate.max(1) } else { 1 };
        let batch = batch.min(settings.iterations + 1 - t);
        let proposals: Vec<Result<Proposal>> = (0..batch)
            .map(|_| {
                let view = ArchiveView { archive_tail: archive.tail(ARCHIVE_TAIL), best_protocol: &best_protocol };
                proposer.propose(&view)
            })
            .collect();
        let outcomes: Vec<ScoreOutcome> = parallel::map_indexed(batch, |i| match &proposals[i] {
            Ok(p) if p.protocol.family() != family => ScoreOutcome {
                score: None,
                summary: format!("failed: family {} does not match the campaign", p.protocol.family().name()),
                elapsed_s: 0.0,
            },
            Ok(p) => score_candidate(problem, &p.protocol, settings.budget, settings.lambda),
            Err(e) => ScoreOutcome { score: None, summary: format!("proposer failed: {e}"), elapsed_s: 0.0 },
        });

        for (proposal, outcome) in proposals.into_iter().zip(outcomes) {
            let (protocol, summary) = match proposal {
                Ok(p) => (p.protocol, format!("{}; {}", p.summary, outcome.summary)),
                Err(_) => (best_protocol.clone(), outcome.summary),
            };
            let accepted = match outcome.score {
                Some(s) => s < best_score || (s == best_score && settings.tie_policy == TiePolicy::AcceptTies),
                None => false,
            };
            let relative_gain_pct = match (outcome.score, archive.last_scored()) {
                (Some(s), Some(prev)) => relative_gain(prev.score.expect("scored"), s),
                _ => None,
            };
            if accepted {
                best_score = outcome.score.expect("accepted records are scored");
                best_protocol = protocol.clone();
            }
            let record = CandidateRecord {
                iteration: t as u64,
                family,
                protocol,
                score: outcome.score,
                accepted,
                relative_gain_pct,
                summary,
                seed: settings.seed,
                elapsed_s: outcome.elapsed_s,
            };
            log.append(&record)?;
            archive.push(record)?;
            t += 1;
        }
    }
    Ok(archive)
}

/// Scripted proposer that re-issues every candidate of a logged campaign.
/// Record summaries are `<proposal>; <outcome>`, so the proposal text is
/// everything before the first `"; "`. Iterations where the proposer
/// itself failed replay as a re-proposal of the logged protocol.
pub fn replay_proposer(archive: &CampaignArchive) -> ScriptedProposer {
    let items = archive.records()[1.min(archive.len())..]
        .iter()
        .map(|r| Proposal {
            protocol: r.protocol.clone(),
            summary: r.summary.split_once("; ").map_or(r.summary.as_str(), |(p, _)| p).to_string(),
        })
        .collect();
    ScriptedProposer::new(items)
}
