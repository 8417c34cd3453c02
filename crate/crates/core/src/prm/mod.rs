//! Probabilistic reward machines and their matrix semantics.
//!
//! A machine reads labels from `2^AP`. Reading label `ℓ` in state `y` follows
//! one of the outgoing edges of `(y, ℓ)`, chosen with the edge probability, and
//! emits the edge reward. In a machine built with [`PrmBuilder::set_transition`]
//! every edge of `(y, ℓ)` carries the same reward, so the reward is a function
//! `ϱ(y, ℓ)`; hypotheses learned from data may attach the observed reward to the
//! successor instead, which is why rewards live on edges.

mod dot;
mod format;
pub mod library;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, RowDVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::label::{AtomicPropositions, Label, Reward, Word};

pub use dot::to_dot;
pub use format::{parse_prm, print_prm};

/// Name of the absorbing failure state in learned hypotheses.
pub const FAILURE_STATE: &str = "⊥";

/// Default cap on the number of labels enumerated when summing over `2^AP`.
pub const DEFAULT_LABEL_CAP: usize = 1 << 16;

pub(crate) const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub target: usize,
    pub prob: f64,
    pub reward: Reward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prm {
    ap: AtomicPropositions,
    gamma: Vec<Reward>,
    states: Vec<String>,
    init: usize,
    // indexed by `state * label_count + label`
    transitions: Vec<Option<Vec<Edge>>>,
}

/// A `|Y|×|Y|` matrix of (products of) transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(pub DMatrix<f64>);

impl TransitionMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

pub struct PrmBuilder {
    ap: AtomicPropositions,
    gamma: Vec<Reward>,
    states: Vec<String>,
    init: usize,
    edges: BTreeMap<(usize, Label), Vec<Edge>>,
}

impl PrmBuilder {
    pub fn new(ap: AtomicPropositions, gamma: impl IntoIterator<Item = Reward>) -> Self {
        let mut gamma: Vec<Reward> = gamma.into_iter().collect();
        gamma.sort();
        gamma.dedup();
        Self {
            ap,
            gamma,
            states: Vec::new(),
            init: 0,
            edges: BTreeMap::new(),
        }
    }

    pub fn ap(&self) -> &AtomicPropositions {
        &self.ap
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> usize {
        self.states.push(name.into());
        self.states.len() - 1
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn set_init(&mut self, state: usize) -> &mut Self {
        self.init = state;
        self
    }

    pub fn add_edge(&mut self, from: usize, label: Label, target: usize, prob: f64, reward: Reward) -> &mut Self {
        self.edges.entry((from, label)).or_default().push(Edge { target, prob, reward });
        self
    }

    /// Defines `(from, label)` with a single reward and a successor distribution.
    pub fn set_transition(&mut self, from: usize, label: Label, reward: Reward, successors: &[(usize, f64)]) -> &mut Self {
        let edges = successors
            .iter()
            .map(|&(target, prob)| Edge { target, prob, reward })
            .collect();
        self.edges.insert((from, label), edges);
        self
    }

    pub fn is_defined(&self, from: usize, label: Label) -> bool {
        self.edges.contains_key(&(from, label))
    }

    pub fn build(self) -> Result<Prm> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::InvalidMachine("no states".into()));
        }
        if self.init >= n {
            return Err(Error::InvalidMachine(format!("initial state {} out of range", self.init)));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) || s.contains(',') {
                return Err(Error::InvalidMachine(format!("bad state name `{s}`")));
            }
            if self.states[..i].contains(s) {
                return Err(Error::InvalidMachine(format!("duplicate state name `{s}`")));
            }
        }
        if !self.gamma.contains(&Reward::ZERO) {
            return Err(Error::InvalidMachine("reward set must contain 0".into()));
        }
        let label_count = self.ap.label_count();
        let mut transitions = vec![None; n * label_count];
        for ((from, label), mut edges) in self.edges {
            if from >= n || !self.ap.contains(label) {
                return Err(Error::InvalidMachine(format!("transition from state {from} on label {} out of range", label.0)));
            }
            let mut sum = 0.0;
            for e in &edges {
                if e.target >= n {
                    return Err(Error::InvalidMachine(format!("edge target {} out of range", e.target)));
                }
                if !(e.prob >= 0.0) || !e.prob.is_finite() {
                    return Err(Error::InvalidMachine(format!("bad probability {}", e.prob)));
                }
                if !self.gamma.contains(&e.reward) {
                    return Err(Error::UnknownReward(e.reward.0));
                }
                sum += e.prob;
            }
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::InvalidMachine(format!(
                    "probabilities of `{}` on `{}` sum to {sum}",
                    self.states[from],
                    self.ap.display_label(label)
                )));
            }
            edges.retain(|e| e.prob > 0.0);
            edges.sort_by(|a, b| a.target.cmp(&b.target).then(a.reward.cmp(&b.reward)));
            for w in edges.windows(2) {
                if w[0].target == w[1].target && w[0].reward == w[1].reward {
                    return Err(Error::InvalidMachine(format!(
                        "duplicate edge from `{}` to `{}`",
                        self.states[from], self.states[w[0].target]
                    )));
                }
            }
            transitions[from * label_count + label.index()] = Some(edges);
        }
        Ok(Prm {
            ap: self.ap,
            gamma: self.gamma,
            states: self.states,
            init: self.init,
            transitions,
        })
    }
}

impl Prm {
    pub fn ap(&self) -> &AtomicPropositions {
        &self.ap
    }

    pub fn gamma(&self) -> &[Reward] {
        &self.gamma
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn failure_state(&self) -> Option<usize> {
        self.state_index(FAILURE_STATE)
    }

    pub fn transition(&self, state: usize, label: Label) -> Option<&[Edge]> {
        self.transitions[state * self.ap.label_count() + label.index()].as_deref()
    }

    /// `ϱ(y, ℓ)` when every edge of `(y, ℓ)` carries the same reward.
    pub fn rho(&self, state: usize, label: Label) -> Option<Reward> {
        let edges = self.transition(state, label)?;
        let r = edges.first()?.reward;
        edges.iter().all(|e| e.reward == r).then_some(r)
    }

    pub fn is_total(&self) -> bool {
        self.transitions.iter().all(Option::is_some)
    }

    /// `(state, label)` pairs without a transition.
    pub fn missing_transitions(&self) -> Vec<(usize, Label)> {
        let lc = self.ap.label_count();
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(i, _)| (i / lc, Label((i % lc) as u32)))
            .collect()
    }

    /// True when the reward of every defined `(y, ℓ)` is independent of the successor.
    pub fn is_reward_deterministic(&self) -> bool {
        let lc = self.ap.label_count();
        (0..self.num_states()).all(|y| {
            (0..lc).all(|l| {
                self.transition(y, Label(l as u32)).is_none() || self.rho(y, Label(l as u32)).is_some()
            })
        })
    }

    pub fn defined_transitions(&self) -> impl Iterator<Item = (usize, Label, &[Edge])> + '_ {
        let lc = self.ap.label_count();
        self.transitions
            .iter()
            .enumerate()
            .filter_map(move |(i, t)| t.as_deref().map(|e| (i / lc, Label((i % lc) as u32), e)))
    }

    fn check_reward(&self, gamma: Reward) -> Result<()> {
        if self.gamma.contains(&gamma) {
            Ok(())
        } else {
            Err(Error::UnknownReward(gamma.0))
        }
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if self.ap.label_count() > cap {
            Err(Error::LabelCapExceeded {
                props: self.ap.len(),
                cap,
            })
        } else {
            Ok(())
        }
    }

    fn filtered_matrix(&self, label: Label, gamma: Option<Reward>) -> DMatrix<f64> {
        let n = self.num_states();
        let mut m = DMatrix::zeros(n, n);
        for y in 0..n {
            if let Some(edges) = self.transition(y, label) {
                for e in edges {
                    if gamma.is_none_or(|g| g == e.reward) {
                        m[(y, e.target)] += e.prob;
                    }
                }
            }
        }
        m
    }

    /// `H(ℓ)`: entry `(i, j)` is the probability of moving from `i` to `j` on `ℓ`.
    /// Rows of states without a transition on `ℓ` are zero.
    pub fn label_matrix(&self, label: Label) -> TransitionMatrix {
        TransitionMatrix(self.filtered_matrix(label, None))
    }

    /// `H(γ | ℓ)`: the part of `H(ℓ)` whose reward is `γ`.
    pub fn reward_conditional_matrix(&self, gamma: Reward, label: Label) -> Result<TransitionMatrix> {
        self.check_reward(gamma)?;
        Ok(TransitionMatrix(self.filtered_matrix(label, Some(gamma))))
    }

    /// `H(γ) = Σ_ℓ H(γ | ℓ)` over all of `2^AP`.
    pub fn reward_matrix(&self, gamma: Reward) -> Result<TransitionMatrix> {
        self.reward_matrix_capped(gamma, DEFAULT_LABEL_CAP)
    }

    pub fn reward_matrix_capped(&self, gamma: Reward, cap: usize) -> Result<TransitionMatrix> {
        self.check_reward(gamma)?;
        self.check_cap(cap)?;
        let n = self.num_states();
        let mut m = DMatrix::zeros(n, n);
        for label in self.ap.labels() {
            m += self.filtered_matrix(label, Some(gamma));
        }
        Ok(TransitionMatrix(m))
    }

    /// `H(ℓ₁⋯ℓₙ) = H(ℓ₁)⋯H(ℓₙ)`, identity for the empty word.
    pub fn word_matrix(&self, word: &Word) -> TransitionMatrix {
        let n = self.num_states();
        let m = word
            .iter()
            .fold(DMatrix::identity(n, n), |acc, &l| acc * self.filtered_matrix(l, None));
        TransitionMatrix(m)
    }

    pub fn initial_row(&self) -> RowDVector<f64> {
        let mut v = RowDVector::zeros(self.num_states());
        v[self.init] = 1.0;
        v
    }

    /// `y_I · H(γ₁)⋯H(γₙ) · 1`. Not normalised over `Γⁿ`: each `H(γ)` sums
    /// over every label.
    pub fn reward_sequence_probability(&self, rewards: &[Reward]) -> Result<f64> {
        let mut row = self.initial_row();
        for &g in rewards {
            row *= &self.reward_matrix(g)?.0;
        }
        Ok(row.sum())
    }

    /// `y_I · H(ℓ₁⋯ℓ_k) · H(γ) · 1`.
    pub fn conditional_reward_probability(&self, gamma: Reward, word: &Word) -> Result<f64> {
        let h_gamma = self.reward_matrix(gamma)?;
        let row = self.initial_row() * &self.word_matrix(word).0 * &h_gamma.0;
        Ok(row.sum())
    }

    /// Distribution of the reward emitted on `next` after reading `prefix`,
    /// normalised by the probability of reading `prefix · next`.
    pub fn next_reward_distribution(&self, prefix: &Word, next: Label) -> Result<BTreeMap<Reward, f64>> {
        let row = self.initial_row() * &self.word_matrix(prefix).0;
        self.next_reward_distribution_from(&row, next)
    }

    /// As [`Prm::next_reward_distribution`], starting from `y_I · H(prefix)`.
    pub fn next_reward_distribution_from(&self, row: &RowDVector<f64>, next: Label) -> Result<BTreeMap<Reward, f64>> {
        let total = (row * &self.filtered_matrix(next, None)).sum();
        if !(total > 0.0) {
            return Err(Error::UnreachableWord);
        }
        let mut out = BTreeMap::new();
        for &g in &self.gamma {
            let mass = (row * &self.filtered_matrix(next, Some(g))).sum();
            if mass > 0.0 {
                out.insert(g, mass / total);
            }
        }
        Ok(out)
    }

    /// Pushes a state distribution through `label` edge by edge. Returns the
    /// successor distribution and the (unnormalised) mass of each reward.
    pub fn advance_belief(&self, belief: &[f64], label: Label) -> (Vec<f64>, BTreeMap<Reward, f64>) {
        let mut next = vec![0.0; self.num_states()];
        let mut rewards = BTreeMap::new();
        for (y, &p) in belief.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for e in self.transition(y, label).unwrap_or(&[]) {
                next[e.target] += p * e.prob;
                *rewards.entry(e.reward).or_insert(0.0) += p * e.prob;
            }
        }
        (next, rewards)
    }

    /// Samples an edge of `(state, label)`.
    pub fn sample_edge<R: Rng + ?Sized>(&self, state: usize, label: Label, rng: &mut R) -> Result<Edge> {
        let edges = self
            .transition(state, label)
            .ok_or_else(|| self.undefined(state, label))?;
        Ok(sample_weighted(edges, |e| e.prob, rng))
    }

    /// Most likely edge of `(state, label)`; ties go to the lowest target.
    pub fn likeliest_edge(&self, state: usize, label: Label) -> Result<Edge> {
        let edges = self
            .transition(state, label)
            .ok_or_else(|| self.undefined(state, label))?;
        let mut best = edges[0];
        for e in &edges[1..] {
            if e.prob > best.prob {
                best = *e;
            }
        }
        Ok(best)
    }

    pub(crate) fn undefined(&self, state: usize, label: Label) -> Error {
        Error::UndefinedTransition {
            state: self.states[state].clone(),
            label: self.ap.display_label(label),
        }
    }

    /// Runs the machine on `word` from the initial state. Each element is the
    /// reward emitted on a label together with the state reached.
    pub fn sample_run<R: Rng + ?Sized>(&self, word: &Word, rng: &mut R) -> Result<Vec<(usize, Reward)>> {
        let mut y = self.init;
        let mut out = Vec::with_capacity(word.len());
        for &l in word {
            let e = self.sample_edge(y, l, rng)?;
            y = e.target;
            out.push((y, e.reward));
        }
        Ok(out)
    }
}

pub(crate) fn sample_weighted<T: Copy, R: Rng + ?Sized>(items: &[T], weight: impl Fn(&T) -> f64, rng: &mut R) -> T {
    debug_assert!(!items.is_empty());
    if items.len() == 1 {
        return items[0];
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for it in items {
        acc += weight(it);
        if u < acc {
            return *it;
        }
    }
    // rounding left `u` past the last bucket
    *items.iter().rev().find(|it| weight(it) > 0.0).unwrap_or(&items[items.len() - 1])
}
