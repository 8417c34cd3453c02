//! Passive learning of the reward signal of a fixed policy.

use std::fmt;

use crate::env::{Nmdp, Policy, Trace};
use crate::error::Result;
use crate::label::{AtomicPropositions, Word};
use crate::par;
use crate::prm::Prm;
use crate::table::{build_hypothesis, construct, ObservationTable, RhoConvention};

#[derive(Debug, Clone, PartialEq)]
pub struct PassiveConfig {
    pub n_check: u64,
    pub n_episode: usize,
    pub rho: RhoConvention,
    /// Longer suffixes are not added to `E`.
    pub max_experiment_len: usize,
    pub seed: u64,
    /// Repairs before giving up on closedness or consistency.
    pub max_repairs: usize,
}

impl Default for PassiveConfig {
    fn default() -> Self {
        Self {
            n_check: 100,
            n_episode: 50,
            rho: RhoConvention::Target,
            max_experiment_len: 12,
            seed: 0,
            max_repairs: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassiveReport {
    pub traces: usize,
    pub dropped_experiments: usize,
    pub closing_steps: usize,
    pub consistency_steps: usize,
    pub s_size: usize,
    pub e_size: usize,
    pub closed: bool,
    pub consistent: bool,
}

impl PassiveReport {
    pub fn complete(&self) -> bool {
        self.closed && self.consistent
    }
}

impl fmt::Display for PassiveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "traces: {}", self.traces)?;
        writeln!(f, "dropped_experiments: {}", self.dropped_experiments)?;
        writeln!(f, "closing_steps: {}", self.closing_steps)?;
        writeln!(f, "consistency_steps: {}", self.consistency_steps)?;
        writeln!(f, "s: {}", self.s_size)?;
        writeln!(f, "e: {}", self.e_size)?;
        writeln!(f, "closed: {}", self.closed)?;
        writeln!(f, "consistent: {}", self.consistent)
    }
}

#[derive(Debug, Clone)]
pub struct PassiveOutcome {
    pub table: ObservationTable,
    pub hypothesis: Prm,
    pub report: PassiveReport,
}

/// `episodes` rollouts of `policy`, episode `i` drawing from
/// [`par::episode_rng`]`(seed, i)`. The result does not depend on threading.
pub fn collect_traces(m: &Nmdp, policy: &Policy, episodes: usize, n_episode: usize, seed: u64) -> Result<Vec<Trace>> {
    par::map_range(episodes, |i| {
        let mut rng = par::episode_rng(seed, i as u64);
        m.rollout(policy, n_episode, &mut rng).map(|t| t.trace())
    })
    .into_iter()
    .collect()
}

pub fn learn_passive(m: &Nmdp, policy: &Policy, episodes: usize, cfg: &PassiveConfig) -> Result<PassiveOutcome> {
    let traces = collect_traces(m, policy, episodes, cfg.n_episode, cfg.seed)?;
    learn_from_traces(m.ap(), &traces, cfg)
}

/// Builds the table from recorded traces, closes it and repairs consistency.
///
/// Every prefix of every trace is a row and every suffix (up to
/// `max_experiment_len`) an experiment. The hypothesis is built even when the
/// repair budget runs out; the report says so.
pub fn learn_from_traces(ap: &AtomicPropositions, traces: &[Trace], cfg: &PassiveConfig) -> Result<PassiveOutcome> {
    let mut table = ObservationTable::new(ap.clone());
    let mut report = PassiveReport {
        traces: traces.len(),
        ..PassiveReport::default()
    };
    for t in traces {
        table.record(t);
        let word: Word = t.iter().map(|p| p.0).collect();
        for k in 0..word.len() {
            let e = word.suffix_from(k);
            if e.len() > cfg.max_experiment_len {
                report.dropped_experiments += 1;
                continue;
            }
            table.add_e(e);
        }
        for p in word.prefixes().take(cfg.max_experiment_len + 1) {
            table.add_s(p);
        }
    }

    let mut budget = cfg.max_repairs;
    while budget > 0 {
        if let Some(w) = table.closedness_witness() {
            table.add_s(w.s.with(w.label));
            report.closing_steps += 1;
        } else if let Some(w) = table.consistency_witness() {
            let e = Word::from(vec![w.label]).concat(&w.e);
            if !table.add_e(e) {
                break;
            }
            report.consistency_steps += 1;
        } else {
            break;
        }
        budget -= 1;
    }
    report.closed = table.is_closed();
    report.consistent = table.is_consistent();
    report.s_size = table.s().len();
    report.e_size = table.e().len();

    let hypothesis = if report.complete() {
        build_hypothesis(&table, cfg.n_check, cfg.rho)?
    } else {
        construct(&table, cfg.n_check, cfg.rho)
    };
    Ok(PassiveOutcome {
        table,
        hypothesis,
        report,
    })
}
