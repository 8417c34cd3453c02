//! Environments with non-Markovian rewards.

mod config;
mod grid;
mod membership;
mod product;
mod trace;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::label::{AtomicPropositions, Label, Reward, Word};
use crate::prm::{sample_weighted, Prm, PROB_TOLERANCE};

pub use config::{EnvConfig, Environment};
pub use grid::{build_office_nmdp, shortest_path_policy, Cell, GridMap, ACTIONS};
pub use membership::membership_reward_machine;
pub use product::{product, ProductMdp, ProductOutcome};
pub use trace::{parse_trace_log, print_trace_log, Trace};

/// One possible result of taking an action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: usize,
    pub prob: f64,
    pub label: Label,
}

/// Reward distributions keyed by the full label history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardTable {
    entries: HashMap<Word, Vec<(Reward, f64)>>,
}

impl RewardTable {
    pub fn insert(&mut self, word: Word, dist: Vec<(Reward, f64)>) -> Result<()> {
        let sum: f64 = dist.iter().map(|d| d.1).sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE || dist.iter().any(|d| !(d.1 >= 0.0)) {
            return Err(Error::InvalidEnvironment(format!("reward distribution sums to {sum}")));
        }
        self.entries.insert(word, dist);
        Ok(())
    }

    pub fn get(&self, word: &Word) -> Option<&[(Reward, f64)]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RewardSource {
    Prm(Prm),
    Table(RewardTable),
}

/// Hidden state of the reward process during an episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewardCursor {
    Machine(usize),
    History(Word),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub next: usize,
    pub label: Label,
    pub reward: Reward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nmdp {
    ap: AtomicPropositions,
    states: Vec<String>,
    actions: Vec<String>,
    init: usize,
    // `[state][action]`, `None` when the action is unavailable
    transitions: Vec<Vec<Option<Vec<Outcome>>>>,
    reward: RewardSource,
    terminal_labels: Vec<Label>,
}

impl Nmdp {
    pub fn new(
        ap: AtomicPropositions,
        states: Vec<String>,
        actions: Vec<String>,
        init: usize,
        transitions: Vec<Vec<Option<Vec<Outcome>>>>,
        reward: RewardSource,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidEnvironment(m));
        if states.is_empty() || init >= states.len() {
            return bad("no states or initial state out of range".into());
        }
        if transitions.len() != states.len() {
            return bad("transition table does not match the state count".into());
        }
        for (x, row) in transitions.iter().enumerate() {
            if row.len() != actions.len() {
                return bad(format!("state {x} lists {} actions", row.len()));
            }
            if row.iter().all(Option::is_none) {
                return bad(format!("state {x} has no available action"));
            }
            for outs in row.iter().flatten() {
                let mut sum = 0.0;
                for o in outs {
                    if o.next >= states.len() || !ap.contains(o.label) || !(o.prob >= 0.0) {
                        return bad(format!("bad outcome {o:?} at state {x}"));
                    }
                    sum += o.prob;
                }
                if (sum - 1.0).abs() > PROB_TOLERANCE {
                    return bad(format!("outcomes at state {x} sum to {sum}"));
                }
            }
        }
        if let RewardSource::Prm(h) = &reward {
            if h.ap() != &ap {
                return bad("reward machine uses different propositions".into());
            }
            if !h.is_total() {
                return bad("reward machine must be total".into());
            }
        }
        Ok(Self {
            ap,
            states,
            actions,
            init,
            transitions,
            reward,
            terminal_labels: Vec::new(),
        })
    }

    /// Episodes end after a transition whose label is one of `labels`.
    pub fn with_terminal_labels(mut self, labels: Vec<Label>) -> Self {
        self.terminal_labels = labels;
        self
    }

    pub fn terminal_labels(&self) -> &[Label] {
        &self.terminal_labels
    }

    pub fn is_terminal(&self, label: Label) -> bool {
        self.terminal_labels.contains(&label)
    }

    pub fn ap(&self) -> &AtomicPropositions {
        &self.ap
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, x: usize) -> &str {
        &self.states[x]
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn reward_source(&self) -> &RewardSource {
        &self.reward
    }

    pub fn available(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.transitions[x]
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .map(|(a, _)| a)
    }

    pub fn is_available(&self, x: usize, a: usize) -> bool {
        self.transitions
            .get(x)
            .and_then(|r| r.get(a))
            .is_some_and(Option::is_some)
    }

    pub fn outcomes(&self, x: usize, a: usize) -> Result<&[Outcome]> {
        self.transitions
            .get(x)
            .and_then(|r| r.get(a))
            .and_then(|o| o.as_deref())
            .ok_or(Error::UnavailableAction { state: x, action: a })
    }

    /// `p(x, a)(x')`, summed over labels.
    pub fn prob(&self, x: usize, a: usize, next: usize) -> Result<f64> {
        Ok(self.outcomes(x, a)?.iter().filter(|o| o.next == next).map(|o| o.prob).sum())
    }

    /// Labels that some transition can emit.
    pub fn label_range(&self) -> Vec<Label> {
        let mut seen = vec![false; self.ap.label_count()];
        for outs in self.transitions.iter().flatten().flatten() {
            for o in outs {
                if o.prob > 0.0 {
                    seen[o.label.index()] = true;
                }
            }
        }
        self.ap.labels().filter(|l| seen[l.index()]).collect()
    }

    pub fn reward_start(&self) -> RewardCursor {
        match &self.reward {
            RewardSource::Prm(h) => RewardCursor::Machine(h.init()),
            RewardSource::Table(_) => RewardCursor::History(Word::empty()),
        }
    }

    /// Draws the reward for reading `label` and advances the hidden state.
    pub fn sample_reward<R: Rng + ?Sized>(&self, cursor: &mut RewardCursor, label: Label, rng: &mut R) -> Result<Reward> {
        match (&self.reward, cursor) {
            (RewardSource::Prm(h), RewardCursor::Machine(y)) => {
                let e = h.sample_edge(*y, label, rng)?;
                *y = e.target;
                Ok(e.reward)
            }
            (RewardSource::Table(t), RewardCursor::History(w)) => {
                w.push(label);
                let dist = t
                    .get(w)
                    .ok_or_else(|| Error::NoRewardDistribution(self.ap.display_word(w)))?;
                Ok(sample_weighted(dist, |d| d.1, rng).0)
            }
            _ => Err(Error::InvalidEnvironment("reward cursor does not match the reward source".into())),
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, x: usize, a: usize, cursor: &mut RewardCursor, rng: &mut R) -> Result<Step> {
        let o = sample_weighted(self.outcomes(x, a)?, |o| o.prob, rng);
        let reward = self.sample_reward(cursor, o.label, rng)?;
        Ok(Step {
            next: o.next,
            label: o.label,
            reward,
        })
    }

    /// Runs `policy` for at most `max_steps` steps or until a terminal label.
    pub fn rollout<R: Rng + ?Sized>(&self, policy: &Policy, max_steps: usize, rng: &mut R) -> Result<Trajectory> {
        let mut t = Trajectory::start(self.init);
        let mut cursor = self.reward_start();
        let mut history = Vec::new();
        let mut x = self.init;
        for _ in 0..max_steps {
            let a = policy.sample(&history, x, rng)?;
            let s = self.step(x, a, &mut cursor, rng)?;
            history.push((x, a));
            t.push(a, s);
            x = s.next;
            if self.is_terminal(s.label) {
                break;
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub labels: Word,
    pub rewards: Vec<Reward>,
}

impl Trajectory {
    pub fn start(x: usize) -> Self {
        Self {
            states: vec![x],
            ..Self::default()
        }
    }

    pub fn push(&mut self, action: usize, step: Step) {
        self.actions.push(action);
        self.states.push(step.next);
        self.labels.push(step.label);
        self.rewards.push(step.reward);
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn trace(&self) -> Trace {
        self.labels.iter().copied().zip(self.rewards.iter().copied()).collect()
    }
}

pub type PolicyFn = dyn Fn(&[(usize, usize)], usize) -> Vec<(usize, f64)> + Send + Sync;

#[derive(Clone)]
pub enum Policy {
    /// Per-state distribution over actions.
    Positional(Vec<Vec<(usize, f64)>>),
    /// Distribution as a function of the `(state, action)` history and the current state.
    General(Arc<PolicyFn>),
}

impl fmt::Debug for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Positional(p) => f.debug_tuple("Positional").field(p).finish(),
            Policy::General(_) => f.write_str("General(..)"),
        }
    }
}

impl Policy {
    /// Pure positional policy.
    pub fn deterministic(actions: &[usize]) -> Self {
        Policy::Positional(actions.iter().map(|&a| vec![(a, 1.0)]).collect())
    }

    pub fn uniform(m: &Nmdp) -> Self {
        Policy::Positional(
            (0..m.num_states())
                .map(|x| {
                    let av: Vec<usize> = m.available(x).collect();
                    let p = 1.0 / av.len() as f64;
                    av.into_iter().map(|a| (a, p)).collect()
                })
                .collect(),
        )
    }

    pub fn distribution(&self, history: &[(usize, usize)], x: usize) -> Vec<(usize, f64)> {
        match self {
            Policy::Positional(p) => p.get(x).cloned().unwrap_or_default(),
            Policy::General(f) => f(history, x),
        }
    }

    pub fn prob(&self, history: &[(usize, usize)], x: usize, a: usize) -> f64 {
        self.distribution(history, x)
            .iter()
            .filter(|d| d.0 == a)
            .map(|d| d.1)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, history: &[(usize, usize)], x: usize, rng: &mut R) -> Result<usize> {
        let d = self.distribution(history, x);
        if d.is_empty() {
            return Err(Error::InvalidEnvironment(format!("policy has no action at state {x}")));
        }
        Ok(sample_weighted(&d, |d| d.1, rng).0)
    }
}

/// `∏ π(history)(a_k) · p(x_{k-1}, a_k)(x_k)`.
pub fn trajectory_probability(m: &Nmdp, policy: &Policy, t: &Trajectory) -> Result<f64> {
    if t.states.len() != t.actions.len() + 1 {
        return Err(Error::InvalidEnvironment("trajectory needs one more state than actions".into()));
    }
    let mut p = 1.0;
    let mut history = Vec::with_capacity(t.actions.len());
    for (k, &a) in t.actions.iter().enumerate() {
        let x = t.states[k];
        if !m.is_available(x, a) {
            return Err(Error::UnavailableAction { state: x, action: a });
        }
        p *= policy.prob(&history, x, a) * m.prob(x, a, t.states[k + 1])?;
        history.push((x, a));
    }
    Ok(p)
}
