//! Active learning of a reward machine with a Q-learning teacher.
//!
//! Membership queries prime an agent with the membership machine of the query
//! word so that it produces traces starting with that word. Equivalence
//! queries let an agent optimise the environment reward on the product with
//! the current hypothesis and watch its traces for counterexamples. Every
//! trace, whichever query produced it, goes into the observation table.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{membership_reward_machine, Nmdp, Trace};
use crate::error::{Error, Result};
use crate::label::{Label, Word};
use crate::prm::Prm;
use crate::table::{build_hypothesis, hoeffding_threshold, FreqMap, ObservationTable, RhoConvention};

/// Action values keyed by `(machine state, environment state, action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    ny: usize,
    nx: usize,
    na: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(ny: usize, nx: usize, na: usize) -> Self {
        Self {
            ny,
            nx,
            na,
            values: vec![0.0; ny * nx * na],
        }
    }

    pub fn for_pair(m: &Nmdp, h: &Prm) -> Self {
        Self::new(h.num_states(), m.num_states(), m.num_actions())
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.ny, self.nx, self.na)
    }

    /// Resets to zero when the shape differs. Returns whether it did.
    pub fn ensure_shape(&mut self, ny: usize, nx: usize, na: usize) -> bool {
        if self.shape() == (ny, nx, na) {
            return false;
        }
        *self = Self::new(ny, nx, na);
        true
    }

    fn idx(&self, y: usize, x: usize, a: usize) -> usize {
        (y * self.nx + x) * self.na + a
    }

    pub fn get(&self, y: usize, x: usize, a: usize) -> f64 {
        self.values[self.idx(y, x, a)]
    }

    pub fn set(&mut self, y: usize, x: usize, a: usize, v: f64) {
        let i = self.idx(y, x, a);
        self.values[i] = v;
    }

    pub fn max_over(&self, y: usize, x: usize, actions: impl Iterator<Item = usize>) -> f64 {
        actions.map(|a| self.get(y, x, a)).fold(f64::NEG_INFINITY, f64::max).max(f64::MIN)
    }

    /// `Q ← (1 − α)·Q + α·(r + β·future)`.
    pub fn update(&mut self, y: usize, x: usize, a: usize, reward: f64, future: f64, alpha: f64, beta: f64) {
        let q = self.get(y, x, a);
        self.set(y, x, a, (1.0 - alpha) * q + alpha * (reward + beta * future));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    /// Learn from the machine's reward.
    Membership,
    /// Learn from the environment's reward.
    Equivalence,
}

/// How the teacher tracks the machine state along an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MachineAdvance {
    #[default]
    Sample,
    Argmax,
}

impl FromStr for MachineAdvance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(Self::Sample),
            "argmax" => Ok(Self::Argmax),
            _ => Err(Error::Config(format!("machine advance must be `sample` or `argmax`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub n_check: u64,
    pub n_query: usize,
    pub n_stop: usize,
    pub n_episode: usize,
    pub learn_rate: f64,
    pub discount: f64,
    pub explore: f64,
    pub seed: u64,
    pub rho: RhoConvention,
    pub machine_advance: MachineAdvance,
    /// Equivalence rounds before giving up.
    pub max_rounds: usize,
    /// Teacher episodes before giving up.
    pub max_episodes: usize,
    /// Largest `|S| + |E|` before giving up.
    pub max_table: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            n_check: 100,
            n_query: 300,
            n_stop: 30,
            n_episode: 50,
            learn_rate: 0.5,
            discount: 0.9,
            explore: 0.1,
            seed: 0,
            rho: RhoConvention::Target,
            machine_advance: MachineAdvance::Sample,
            max_rounds: 500,
            max_episodes: 2_000_000,
            max_table: 400,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_check == 0 || self.n_query == 0 || self.n_stop == 0 || self.n_episode == 0 {
            return bad("n_check, n_query, n_stop and n_episode must be positive");
        }
        if !(self.learn_rate > 0.0 && self.learn_rate <= 1.0) {
            return bad("learn_rate must lie in (0, 1]");
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.explore) {
            return bad("explore must lie in [0, 1]");
        }
        Ok(())
    }
}

fn greedy_action<R: Rng + ?Sized>(q: &QTable, y: usize, x: usize, actions: &[usize], rng: &mut R) -> usize {
    let best = q.max_over(y, x, actions.iter().copied());
    let ties: Vec<usize> = actions.iter().copied().filter(|&a| q.get(y, x, a) == best).collect();
    ties[rng.random_range(0..ties.len())]
}

fn epsilon_greedy<R: Rng + ?Sized>(q: &QTable, y: usize, x: usize, actions: &[usize], eps: f64, rng: &mut R) -> usize {
    if eps > 0.0 && rng.random::<f64>() < eps {
        actions[rng.random_range(0..actions.len())]
    } else {
        greedy_action(q, y, x, actions, rng)
    }
}

/// One teacher episode on the product of `m` and `h`. The returned trace holds
/// the environment's labels and rewards; the Q-update target uses the machine
/// reward in membership mode and the environment reward otherwise.
pub fn teacher_query<R: Rng + ?Sized>(
    q: &mut QTable,
    m: &Nmdp,
    h: &Prm,
    mode: QueryMode,
    cfg: &LearnerConfig,
    rng: &mut R,
) -> Result<Trace> {
    q.ensure_shape(h.num_states(), m.num_states(), m.num_actions());
    let actions: Vec<Vec<usize>> = (0..m.num_states()).map(|x| m.available(x).collect()).collect();
    let mut trace = Vec::with_capacity(cfg.n_episode);
    let mut cursor = m.reward_start();
    let (mut x, mut y) = (m.init(), h.init());
    for _ in 0..cfg.n_episode {
        let a = epsilon_greedy(q, y, x, &actions[x], cfg.explore, rng);
        let step = m.step(x, a, &mut cursor, rng)?;
        let edge = match cfg.machine_advance {
            MachineAdvance::Sample => h.sample_edge(y, step.label, rng)?,
            MachineAdvance::Argmax => h.likeliest_edge(y, step.label)?,
        };
        let r = match mode {
            QueryMode::Membership => edge.reward.0,
            QueryMode::Equivalence => step.reward.0,
        };
        let terminal = m.is_terminal(step.label);
        let future = if terminal {
            0.0
        } else {
            q.max_over(edge.target, step.next, actions[step.next].iter().copied())
        };
        q.update(y, x, a, r, future, cfg.learn_rate, cfg.discount);
        trace.push((step.label, step.reward));
        x = step.next;
        y = edge.target;
        if terminal {
            break;
        }
    }
    Ok(trace)
}

/// Total machine reward of the greedy (`ε = 0`) rollout of `q`, ties going
/// to the lowest action index.
pub fn greedy_machine_return<R: Rng + ?Sized>(q: &QTable, m: &Nmdp, h: &Prm, n_episode: usize, rng: &mut R) -> Result<f64> {
    let mut cursor = m.reward_start();
    let (mut x, mut y) = (m.init(), h.init());
    let mut total = 0.0;
    for _ in 0..n_episode {
        let actions: Vec<usize> = m.available(x).collect();
        let best = q.max_over(y, x, actions.iter().copied());
        let a = *actions.iter().find(|&&a| q.get(y, x, a) == best).expect("an action is available");
        let step = m.step(x, a, &mut cursor, rng)?;
        let edge = h.likeliest_edge(y, step.label)?;
        total += edge.reward.0;
        x = step.next;
        y = edge.target;
        if m.is_terminal(step.label) {
            break;
        }
    }
    Ok(total)
}

/// Queries `zeta` until it has `n_check` samples or `n_query` episodes ran.
/// Returns the number of episodes.
pub fn membership_query<R: Rng + ?Sized>(
    table: &mut ObservationTable,
    zeta: &Word,
    m: &Nmdp,
    q_m: &mut QTable,
    cfg: &LearnerConfig,
    rng: &mut R,
) -> Result<usize> {
    let h = membership_reward_machine(m.ap(), zeta)?;
    let mut counter = 0;
    while table.sample(zeta) < cfg.n_check && counter < cfg.n_query {
        let trace = teacher_query(q_m, m, &h, QueryMode::Membership, cfg, rng)?;
        table.record(&trace);
        counter += 1;
    }
    Ok(counter)
}

/// Whether `T(w)` is statistically different from the predicted distribution
/// `dist`, taken at the same sample size.
fn differs_from_prediction(f: &FreqMap, masses: &std::collections::BTreeMap<crate::label::Reward, f64>, m: u64) -> bool {
    let n = f.total();
    let total: f64 = masses.values().sum();
    if n == 0 || !(total > 0.0) {
        return false;
    }
    let eps = hoeffding_threshold(n, n, m);
    let keys: BTreeSet<_> = f.iter().map(|c| c.0).chain(masses.keys().copied()).collect();
    keys.into_iter().any(|g| {
        let p = f.get(g) as f64 / n as f64;
        let q = masses.get(&g).copied().unwrap_or(0.0) / total;
        (p - q).abs() > eps
    })
}

/// Length of the shortest prefix of `trace` witnessing that `h` is wrong:
/// either the prefix has `n_check` samples and `h` puts mass on `⊥`, or its
/// recorded reward frequencies differ from `h`'s prediction.
pub fn counterexample_prefix(table: &ObservationTable, h: &Prm, trace: &Trace, n_check: u64) -> Option<usize> {
    let bottom = h.failure_state();
    let mut belief = vec![0.0; h.num_states()];
    belief[h.init()] = 1.0;
    let mut prefix = Word::empty();
    for (k, &(l, _)) in trace.iter().enumerate() {
        let (next, masses) = h.advance_belief(&belief, l);
        prefix.push(l);
        let sample = table.sample(&prefix);
        if sample == 0 {
            break;
        }
        if bottom.is_some_and(|b| next[b] > 0.0) && sample >= n_check {
            return Some(k + 1);
        }
        if differs_from_prediction(table.freq(&prefix), &masses, table.total_samples()) {
            return Some(k + 1);
        }
        belief = next;
    }
    None
}

pub fn is_counterexample(table: &ObservationTable, h: &Prm, trace: &Trace, n_check: u64) -> bool {
    counterexample_prefix(table, h, trace, n_check).is_some()
}

#[derive(Debug, Clone)]
pub struct EquivalenceOutcome {
    pub counterexample: Option<Word>,
    pub episodes: usize,
    pub hypothesis: Prm,
}

/// Builds the hypothesis and runs up to `n_stop` equivalence episodes,
/// stopping at the first counterexample.
pub fn equivalence_query<R: Rng + ?Sized>(
    table: &mut ObservationTable,
    m: &Nmdp,
    q_h: &mut QTable,
    cfg: &LearnerConfig,
    rng: &mut R,
) -> Result<EquivalenceOutcome> {
    let h = build_hypothesis(table, cfg.n_check, cfg.rho)?;
    let mut episodes = 0;
    while episodes < cfg.n_stop {
        let trace = teacher_query(q_h, m, &h, QueryMode::Equivalence, cfg, rng)?;
        table.record(&trace);
        episodes += 1;
        if let Some(k) = counterexample_prefix(table, &h, &trace, cfg.n_check) {
            let word = trace[..k].iter().map(|p| p.0).collect();
            return Ok(EquivalenceOutcome {
                counterexample: Some(word),
                episodes,
                hypothesis: h,
            });
        }
    }
    Ok(EquivalenceOutcome {
        counterexample: None,
        episodes,
        hypothesis: h,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundReport {
    pub membership_queries: usize,
    pub membership_episodes: usize,
    pub equivalence_episodes: usize,
    pub counterexample: Option<String>,
    pub s_size: usize,
    pub e_size: usize,
    pub hypothesis_states: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActiveReport {
    pub rounds: Vec<RoundReport>,
    pub membership_queries: usize,
    pub membership_episodes: usize,
    pub equivalence_episodes: usize,
    pub counterexamples: usize,
    pub budget_exhausted: bool,
    pub stop_reason: String,
}

impl fmt::Display for ActiveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "membership_queries: {}", self.membership_queries)?;
        writeln!(f, "membership_episodes: {}", self.membership_episodes)?;
        writeln!(f, "equivalence_episodes: {}", self.equivalence_episodes)?;
        writeln!(f, "counterexamples: {}", self.counterexamples)?;
        writeln!(f, "budget_exhausted: {}", self.budget_exhausted)?;
        writeln!(f, "stop: {}", self.stop_reason)?;
        writeln!(f, "round,mq,mq_episodes,eq_episodes,s,e,states,counterexample")?;
        for (i, r) in self.rounds.iter().enumerate() {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                r.membership_queries,
                r.membership_episodes,
                r.equivalence_episodes,
                r.s_size,
                r.e_size,
                r.hypothesis_states,
                r.counterexample.as_deref().unwrap_or("-")
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ActiveOutcome {
    pub hypothesis: Prm,
    pub table: ObservationTable,
    pub report: ActiveReport,
}

struct Learner<'a> {
    m: &'a Nmdp,
    cfg: &'a LearnerConfig,
    table: ObservationTable,
    rng: ChaCha8Rng,
    labels: BTreeSet<Label>,
    exhausted: HashSet<Word>,
    q_m: QTable,
    q_h: QTable,
    report: ActiveReport,
    round: RoundReport,
    episodes: usize,
}

impl Learner<'_> {
    fn out_of_budget(&self) -> bool {
        self.episodes >= self.cfg.max_episodes || self.table.s().len() + self.table.e().len() > self.cfg.max_table
    }

    fn observe(&mut self) {
        // labels of everything recorded so far; cheap relative to the episodes
        for (w, _, _) in self.table.recorded_words() {
            if let Some(&l) = w.labels().last() {
                self.labels.insert(l);
            }
        }
    }

    fn query(&mut self, words: IndexSet<Word>) -> Result<()> {
        for zeta in words {
            if zeta.is_empty() || self.exhausted.contains(&zeta) || self.table.sample(&zeta) >= self.cfg.n_check {
                continue;
            }
            if self.out_of_budget() {
                return Ok(());
            }
            // a fresh agent for every target machine
            self.q_m = QTable::new(0, 0, 0);
            let n = membership_query(&mut self.table, &zeta, self.m, &mut self.q_m, self.cfg, &mut self.rng)?;
            self.episodes += n;
            self.round.membership_queries += 1;
            self.round.membership_episodes += n;
            if self.table.sample(&zeta) < self.cfg.n_check {
                self.exhausted.insert(zeta);
            }
        }
        self.observe();
        Ok(())
    }

    fn middles(&self) -> Vec<Option<Label>> {
        std::iter::once(None).chain(self.labels.iter().copied().map(Some)).collect()
    }

    /// `prefixes · (ε ∪ L) · suffixes`.
    fn strings(&self, prefixes: &[Word], suffixes: &[Word]) -> IndexSet<Word> {
        let mut out = IndexSet::new();
        for s in prefixes {
            for x in self.middles() {
                let sx = match x {
                    Some(l) => s.with(l),
                    None => s.clone(),
                };
                for e in suffixes {
                    out.insert(sx.concat(e));
                }
            }
        }
        out
    }

    fn all_s(&self) -> Vec<Word> {
        self.table.s().iter().cloned().collect()
    }

    fn all_e(&self) -> Vec<Word> {
        self.table.e().iter().cloned().collect()
    }

    /// Repairs closedness and consistency until both hold.
    fn repair(&mut self) -> Result<bool> {
        loop {
            if self.out_of_budget() {
                return Ok(false);
            }
            if let Some(w) = self.table.consistency_witness() {
                let e = Word::from(vec![w.label]).concat(&w.e);
                if self.table.add_e(e.clone()) {
                    let q = self.strings(&self.all_s(), &[e]);
                    self.query(q)?;
                    continue;
                }
            }
            if let Some(w) = self.table.closedness_witness() {
                let s = w.s.with(w.label);
                if self.table.add_s(s.clone()) {
                    let q = self.strings(&[s], &self.all_e());
                    self.query(q)?;
                    continue;
                }
            }
            return Ok(self.table.is_closed() && self.table.is_consistent());
        }
    }

    fn finish_round(&mut self, h: Option<&Prm>) {
        let mut r = std::mem::take(&mut self.round);
        r.s_size = self.table.s().len();
        r.e_size = self.table.e().len();
        r.hypothesis_states = h.map_or(0, Prm::num_states);
        self.report.membership_queries += r.membership_queries;
        self.report.membership_episodes += r.membership_episodes;
        self.report.equivalence_episodes += r.equivalence_episodes;
        if r.counterexample.is_some() {
            self.report.counterexamples += 1;
        }
        self.report.rounds.push(r);
    }
}

/// The full learning loop. Always terminates: after `n_stop` consecutive
/// equivalence rounds without counterexample, or when a budget runs out.
pub fn learn_active(m: &Nmdp, cfg: &LearnerConfig) -> Result<ActiveOutcome> {
    cfg.validate()?;
    let ap = m.ap().clone();
    let mut l = Learner {
        m,
        cfg,
        table: ObservationTable::new(ap.clone()),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        labels: BTreeSet::new(),
        exhausted: HashSet::new(),
        q_m: QTable::new(0, 0, 0),
        q_h: QTable::new(0, 0, 0),
        report: ActiveReport::default(),
        round: RoundReport::default(),
        episodes: 0,
    };

    // S·(ε ∪ 2^AP)·E with S = E = {ε}, then every observed label becomes an experiment
    let singles: IndexSet<Word> = ap.labels().map(|x| Word::from(vec![x])).collect();
    l.query(singles)?;
    let observed: Vec<Label> = l.labels.iter().copied().collect();
    for x in observed {
        l.table.add_e(Word::from(vec![x]));
    }
    let fill = l.strings(&l.all_s(), &l.all_e());
    l.query(fill)?;

    let mut clean = 0;
    let mut last: Option<Prm> = None;
    let stop_reason;
    loop {
        if l.report.rounds.len() >= cfg.max_rounds {
            stop_reason = "round budget".to_string();
            l.report.budget_exhausted = true;
            break;
        }
        if !l.repair()? {
            stop_reason = "episode or table budget".to_string();
            l.report.budget_exhausted = true;
            break;
        }
        let eq = equivalence_query(&mut l.table, m, &mut l.q_h, cfg, &mut l.rng)?;
        l.episodes += eq.episodes;
        l.round.equivalence_episodes += eq.episodes;
        match &eq.counterexample {
            Some(cex) => {
                clean = 0;
                l.round.counterexample = Some(ap.display_word(cex));
                let mut new_s = Vec::new();
                for p in cex.prefixes() {
                    if l.table.add_s(p.clone()) {
                        new_s.push(p);
                    }
                }
                if new_s.is_empty() {
                    // every prefix is already a row; try the suffixes as experiments
                    let mut new_e = Vec::new();
                    for k in 1..cex.len() {
                        let e = cex.suffix_from(k);
                        if l.table.add_e(e.clone()) {
                            new_e.push(e);
                        }
                    }
                    let q = l.strings(&l.all_s(), &new_e);
                    l.query(q)?;
                } else {
                    let q = l.strings(&new_s, &l.all_e());
                    l.query(q)?;
                }
            }
            None => clean += 1,
        }
        l.finish_round(Some(&eq.hypothesis));
        last = Some(eq.hypothesis);
        if clean >= cfg.n_stop {
            stop_reason = format!("{clean} rounds without counterexample");
            break;
        }
        if l.out_of_budget() {
            stop_reason = "episode or table budget".to_string();
            l.report.budget_exhausted = true;
            break;
        }
    }
    if l.round != RoundReport::default() {
        l.finish_round(None);
    }
    l.report.stop_reason = stop_reason;

    let hypothesis = match build_hypothesis(&l.table, cfg.n_check, cfg.rho) {
        Ok(h) => h,
        Err(_) => match last {
            Some(h) => h,
            None => crate::table::construct(&l.table, cfg.n_check, cfg.rho),
        },
    };
    Ok(ActiveOutcome {
        hypothesis,
        table: l.table,
        report: l.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_office_nmdp, GridMap};
    use crate::label::{AtomicPropositions, Reward};
    use crate::prm::library::{coffee_prm, patrol_prm};
    use crate::prm::PrmBuilder;

    #[test]
    fn q_update_arithmetic() {
        let mut q = QTable::new(1, 1, 2);
        q.update(0, 0, 1, 1.0, 0.0, 0.5, 0.9);
        assert_eq!(q.get(0, 0, 1), 0.5);
        q.update(0, 0, 0, 0.0, 2.0, 0.5, 0.9);
        assert!((q.get(0, 0, 0) - 0.9).abs() < 1e-15);
        assert!(!q.ensure_shape(1, 1, 2));
        assert!(q.ensure_shape(2, 1, 2));
        assert_eq!(q.get(1, 0, 1), 0.0);
    }

    #[test]
    fn greedy_teacher_follows_q() {
        let map = GridMap::parse("Aco\n").unwrap();
        let truth = coffee_prm();
        let m = build_office_nmdp(&map, &truth).unwrap();
        let zeta = m.ap().parse_word("c;o").unwrap();
        let h = membership_reward_machine(m.ap(), &zeta).unwrap();
        let mut q = QTable::for_pair(&m, &h);
        q.set(0, 0, 2, 1.0);
        q.set(1, 1, 2, 1.0);
        let cfg = LearnerConfig {
            explore: 0.0,
            n_episode: 2,
            ..LearnerConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = teacher_query(&mut q, &m, &h, QueryMode::Membership, &cfg, &mut rng).unwrap();
        let labels: Word = t.iter().map(|p| p.0).collect();
        assert_eq!(labels, zeta);
    }

    #[test]
    fn unrealizable_membership_query_exhausts() {
        let map = GridMap::parse("A.\n").unwrap();
        let m = build_office_nmdp(&map, &coffee_prm()).unwrap();
        let zeta = m.ap().parse_word("c&o").unwrap();
        let cfg = LearnerConfig {
            n_query: 20,
            n_episode: 5,
            ..LearnerConfig::default()
        };
        let mut table = ObservationTable::new(m.ap().clone());
        let mut q = QTable::new(0, 0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = membership_query(&mut table, &zeta, &m, &mut q, &cfg, &mut rng).unwrap();
        assert_eq!((n, table.sample(&zeta)), (20, 0));
        // every episode was recorded anyway
        assert_eq!(table.sample(&Word::empty()), 20);
    }

    #[test]
    fn realizable_membership_query_fills() {
        let map = GridMap::parse("Ac\n").unwrap();
        let m = build_office_nmdp(&map, &patrol_prm()).unwrap();
        let zeta = m.ap().parse_word("c;~").unwrap();
        let cfg = LearnerConfig::default();
        let mut table = ObservationTable::new(m.ap().clone());
        let mut q = QTable::new(0, 0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        membership_query(&mut table, &zeta, &m, &mut q, &cfg, &mut rng).unwrap();
        assert!(table.sample(&zeta) >= cfg.n_check);
    }

    #[test]
    fn counterexample_detection() {
        let ap = AtomicPropositions::new(["a"]).unwrap();
        let a = Label(1);
        let mut table = ObservationTable::new(ap.clone());
        for _ in 0..200 {
            table.record(&[(a, Reward::ONE)]);
        }
        let mut b = PrmBuilder::new(ap.clone(), [Reward::ZERO, Reward::ONE]);
        let y = b.add_state("y0");
        for l in ap.labels() {
            b.set_transition(y, l, Reward::ZERO, &[(y, 1.0)]);
        }
        let wrong = b.build().unwrap();
        assert!(is_counterexample(&table, &wrong, &vec![(a, Reward::ONE)], 50));

        let right = crate::table::build_hypothesis(&table, 50, RhoConvention::Target).unwrap();
        assert!(!is_counterexample(&table, &right, &vec![(a, Reward::ONE)], 50));

        // under-sampled prefixes never witness anything
        let mut thin = ObservationTable::new(ap);
        thin.record(&[(a, Reward::ONE)]);
        assert!(!is_counterexample(&thin, &wrong, &vec![(a, Reward::ONE)], 50));
    }

    #[test]
    fn failure_state_is_immediate_counterexample() {
        let ap = AtomicPropositions::new(["a"]).unwrap();
        let mut table = ObservationTable::new(ap.clone());
        for _ in 0..100 {
            table.record(&[(Label(0), Reward::ZERO)]);
        }
        let h = crate::table::build_hypothesis(&table, 10, RhoConvention::Target).unwrap();
        for _ in 0..100 {
            table.record(&[(Label(1), Reward::ZERO)]);
        }
        assert_eq!(counterexample_prefix(&table, &h, &vec![(Label(1), Reward::ZERO)], 10), Some(1));
    }

    #[test]
    fn trivial_environment_learns_one_state() {
        let ap = AtomicPropositions::new(["a"]).unwrap();
        let mut b = PrmBuilder::new(ap.clone(), [Reward::ZERO]);
        let y = b.add_state("y0");
        for l in ap.labels() {
            b.set_transition(y, l, Reward::ZERO, &[(y, 1.0)]);
        }
        let zero = b.build().unwrap();
        let m = build_office_nmdp(&GridMap::parse("A\n").unwrap(), &{
            // the map has no propositions, so any machine over {a} works
            zero
        })
        .unwrap();
        let cfg = LearnerConfig {
            n_check: 20,
            n_query: 40,
            n_stop: 3,
            n_episode: 5,
            ..LearnerConfig::default()
        };
        let out = learn_active(&m, &cfg).unwrap();
        let h = out.hypothesis;
        assert_eq!(h.state_names(), ["q0", "⊥"]);
        let e = h.transition(0, Label::EMPTY).unwrap();
        assert_eq!((e[0].target, e[0].reward), (0, Reward::ZERO));
        assert!(!out.report.budget_exhausted);
    }
}
