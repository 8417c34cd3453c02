//! Exhaustive oracles used to check learned machines.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::str::FromStr;

use nalgebra::RowDVector;

use crate::env::{Nmdp, RewardSource, Trajectory};
use crate::error::{Error, Result};
use crate::label::{Label, Reward, Word};
use crate::prm::{Prm, FAILURE_STATE};

pub const DEFAULT_NODE_BUDGET: usize = 1000;

/// What a witness trajectory must satisfy besides producing the word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RealizabilityCriterion {
    #[default]
    LabelOnly,
    /// The reward after the last step is positive with non-zero probability.
    PositiveReward,
}

impl FromStr for RealizabilityCriterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label_only" => Ok(Self::LabelOnly),
            "positive_reward" => Ok(Self::PositiveReward),
            _ => Err(Error::Config(format!("unknown criterion `{s}`"))),
        }
    }
}

/// Support of the hidden reward process after a label prefix.
#[derive(Clone, PartialEq, Eq, Hash)]
enum Hidden {
    Machine(BTreeSet<usize>),
    History,
}

fn positive_possible(m: &Nmdp, hidden: &Hidden, word: &Word) -> bool {
    match (m.reward_source(), hidden) {
        (RewardSource::Prm(h), Hidden::Machine(ys)) => {
            let last = *word.labels().last().expect("non-empty");
            // `ys` is the support before the last label
            ys.iter().any(|&y| {
                h.transition(y, last)
                    .is_some_and(|es| es.iter().any(|e| e.prob > 0.0 && e.reward.0 > 0.0))
            })
        }
        (RewardSource::Table(t), _) => t
            .get(word)
            .is_some_and(|d| d.iter().any(|&(r, p)| p > 0.0 && r.0 > 0.0)),
        _ => false,
    }
}

fn machine_support(h: &Prm, prefix: &[Label]) -> BTreeSet<usize> {
    let mut ys = BTreeSet::from([h.init()]);
    for &l in prefix {
        ys = ys
            .iter()
            .flat_map(|&y| h.transition(y, l).unwrap_or(&[]).iter().filter(|e| e.prob > 0.0).map(|e| e.target))
            .collect();
    }
    ys
}

/// Searches for a trajectory whose label word is exactly `w`. Actions and
/// outcomes are tried in index order, so the witness found is the
/// lexicographically least one. Every transition emits a label, the empty
/// label included, so witnesses have length `|w|`.
pub fn brute_force_word_realizability(
    m: &Nmdp,
    w: &Word,
    max_len: usize,
    criterion: RealizabilityCriterion,
    budget: usize,
) -> Result<Option<Trajectory>> {
    if w.len() > max_len {
        return Ok(None);
    }
    if criterion == RealizabilityCriterion::PositiveReward && !w.is_empty() {
        let hidden = match m.reward_source() {
            RewardSource::Prm(h) => Hidden::Machine(machine_support(h, &w.labels()[..w.len() - 1])),
            RewardSource::Table(_) => Hidden::History,
        };
        if !positive_possible(m, &hidden, w) {
            return Ok(None);
        }
    }
    let mut nodes = 0;
    let mut dead: HashSet<(usize, usize)> = HashSet::new();
    let mut path = Trajectory::start(m.init());
    if search(m, w, m.init(), &mut path, &mut dead, &mut nodes, budget)? {
        Ok(Some(path))
    } else {
        Ok(None)
    }
}

fn search(
    m: &Nmdp,
    w: &Word,
    x: usize,
    path: &mut Trajectory,
    dead: &mut HashSet<(usize, usize)>,
    nodes: &mut usize,
    budget: usize,
) -> Result<bool> {
    let k = path.len();
    if k == w.len() {
        return Ok(true);
    }
    if dead.contains(&(x, k)) {
        return Ok(false);
    }
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::BudgetExceeded { nodes: *nodes - 1 });
    }
    let want = w.labels()[k];
    for a in m.available(x).collect::<Vec<_>>() {
        for o in m.outcomes(x, a)? {
            if o.prob <= 0.0 || o.label != want {
                continue;
            }
            path.actions.push(a);
            path.states.push(o.next);
            path.labels.push(o.label);
            path.rewards.push(Reward::ZERO);
            if search(m, w, o.next, path, dead, nodes, budget)? {
                return Ok(true);
            }
            path.actions.pop();
            path.states.pop();
            path.rewards.pop();
            path.labels = path.labels.prefix(k);
        }
    }
    dead.insert((x, k));
    Ok(false)
}

/// Distribution of the last reward along `w` by enumerating the hidden
/// machine's state distribution, without matrices.
pub fn brute_force_reward_distribution(m: &Nmdp, w: &Word) -> Result<BTreeMap<Reward, f64>> {
    match m.reward_source() {
        RewardSource::Prm(h) => enumerate_reward_distribution(h, w),
        RewardSource::Table(_) => Err(Error::InvalidEnvironment("reward source is not a machine".into())),
    }
}

pub fn enumerate_reward_distribution(h: &Prm, w: &Word) -> Result<BTreeMap<Reward, f64>> {
    let (&last, prefix) = w.labels().split_last().ok_or(Error::EmptyWord)?;
    let mut dist: BTreeMap<usize, f64> = BTreeMap::from([(h.init(), 1.0)]);
    for &l in prefix {
        let mut next = BTreeMap::new();
        for (&y, &p) in &dist {
            if let Some(edges) = h.transition(y, l) {
                for e in edges {
                    *next.entry(e.target).or_insert(0.0) += p * e.prob;
                }
            }
        }
        dist = next;
    }
    let mut out: BTreeMap<Reward, f64> = BTreeMap::new();
    for (&y, &p) in &dist {
        if let Some(edges) = h.transition(y, last) {
            for e in edges {
                *out.entry(e.reward).or_insert(0.0) += p * e.prob;
            }
        }
    }
    let total: f64 = out.values().sum();
    if !(total > 0.0) {
        return Err(Error::UnreachableWord);
    }
    out.retain(|_, p| *p > 0.0);
    for p in out.values_mut() {
        *p /= total;
    }
    Ok(out)
}

/// Words considered by [`encoding_distance`].
#[derive(Debug, Clone, Copy)]
pub enum WordDomain<'a> {
    /// Every word over `2^AP`.
    All,
    /// Words over the given labels.
    Alphabet(&'a [Label]),
    /// Words some trajectory of the environment produces.
    Realizable(&'a Nmdp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingReport {
    /// Largest total-variation distance found.
    pub distance: f64,
    /// Shortest, then canonically least, word attaining `distance`.
    pub worst: Option<Word>,
    pub words: usize,
    /// Words along which the hypothesis reaches `⊥` or gives zero probability.
    pub failure_words: usize,
}

fn total_variation(a: &BTreeMap<Reward, f64>, b: &BTreeMap<Reward, f64>) -> f64 {
    let keys: BTreeSet<Reward> = a.keys().chain(b.keys()).copied().collect();
    0.5 * keys
        .iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

struct Walker<'a> {
    h: &'a Prm,
    truth: &'a Prm,
    bottom: Option<usize>,
    max_len: usize,
    domain: WordDomain<'a>,
    report: EncodingReport,
}

impl Walker<'_> {
    fn children(&self, env_states: &BTreeSet<usize>) -> Vec<(Label, BTreeSet<usize>)> {
        match self.domain {
            WordDomain::All => self.truth.ap().labels().map(|l| (l, BTreeSet::new())).collect(),
            WordDomain::Alphabet(ls) => ls.iter().map(|&l| (l, BTreeSet::new())).collect(),
            WordDomain::Realizable(m) => {
                let mut by_label: BTreeMap<Label, BTreeSet<usize>> = BTreeMap::new();
                for &x in env_states {
                    for a in m.available(x) {
                        for o in m.outcomes(x, a).unwrap_or(&[]) {
                            if o.prob > 0.0 {
                                by_label.entry(o.label).or_default().insert(o.next);
                            }
                        }
                    }
                }
                by_label.into_iter().collect()
            }
        }
    }

    fn visit(&mut self, word: &mut Vec<Label>, h_row: &RowDVector<f64>, t_row: &RowDVector<f64>, env: &BTreeSet<usize>) {
        if word.len() == self.max_len {
            return;
        }
        for (l, next_env) in self.children(env) {
            word.push(l);
            let h_next = h_row * &self.h.label_matrix(l).0;
            let t_next = t_row * &self.truth.label_matrix(l).0;
            let truth_dist = self.truth.next_reward_distribution_from(t_row, l);
            if let Ok(td) = truth_dist {
                self.report.words += 1;
                let hit_bottom = self.bottom.is_some_and(|b| h_next[b] > 0.0);
                let d = match self.h.next_reward_distribution_from(h_row, l) {
                    Ok(hd) if !hit_bottom => total_variation(&hd, &td),
                    _ => {
                        self.report.failure_words += 1;
                        1.0
                    }
                };
                let w = Word::from(word.clone());
                let better = match &self.report.worst {
                    None => true,
                    Some(prev) => {
                        d > self.report.distance
                            || (d == self.report.distance && w.canonical_cmp(prev) == std::cmp::Ordering::Less)
                    }
                };
                if better {
                    self.report.distance = d;
                    self.report.worst = Some(w);
                }
                self.visit(word, &h_next, &t_next, &next_env);
            }
            word.pop();
        }
    }
}

/// Largest total-variation distance between the next-reward distributions of
/// `h` and `truth` over words of length `1..=max_len` from `domain`.
pub fn encoding_distance(h: &Prm, truth: &Prm, max_len: usize, domain: WordDomain<'_>) -> Result<EncodingReport> {
    if h.ap() != truth.ap() {
        return Err(Error::InvalidMachine("machines use different propositions".into()));
    }
    let mut w = Walker {
        h,
        truth,
        bottom: h.state_index(FAILURE_STATE),
        max_len,
        domain,
        report: EncodingReport {
            distance: 0.0,
            worst: None,
            words: 0,
            failure_words: 0,
        },
    };
    let env = match domain {
        WordDomain::Realizable(m) => BTreeSet::from([m.init()]),
        _ => BTreeSet::new(),
    };
    w.visit(&mut Vec::new(), &h.initial_row(), &truth.initial_row(), &env);
    Ok(w.report)
}
