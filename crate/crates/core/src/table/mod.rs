//! Sampling observation tables.
//!
//! Frequencies `T(w)` and sample counters are kept in a prefix tree over the
//! recorded label words, so recording a trace costs time linear in its length
//! and every prefix of every trace stays queryable when `S` or `E` grow later.

mod csv;
mod hypothesis;

use std::cmp::Ordering;

use indexmap::IndexSet;

use crate::label::{AtomicPropositions, Label, Reward, Word};

pub use csv::{dump_csv, load_csv};
pub use hypothesis::{build_hypothesis, RhoConvention};
pub use hypothesis::construct;

/// Reward frequencies of one word.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreqMap {
    // sorted by reward, no zero counts
    counts: Vec<(Reward, u64)>,
}

impl FreqMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, gamma: Reward) -> u64 {
        self.counts
            .binary_search_by(|c| c.0.cmp(&gamma))
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn add(&mut self, gamma: Reward, n: u64) {
        if n == 0 {
            return;
        }
        match self.counts.binary_search_by(|c| c.0.cmp(&gamma)) {
            Ok(i) => self.counts[i].1 += n,
            Err(i) => self.counts.insert(i, (gamma, n)),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Reward, u64)> + '_ {
        self.counts.iter().copied()
    }

    pub fn merge(&mut self, other: &FreqMap) {
        for (g, n) in other.iter() {
            self.add(g, n);
        }
    }
}

impl FromIterator<(Reward, u64)> for FreqMap {
    fn from_iter<T: IntoIterator<Item = (Reward, u64)>>(iter: T) -> Self {
        let mut f = FreqMap::new();
        for (g, n) in iter {
            f.add(g, n);
        }
        f
    }
}

static EMPTY: FreqMap = FreqMap { counts: Vec::new() };

/// `sqrt(½·ln(2/α))·(1/√N + 1/√N')` with `α = 1/M³`.
pub fn hoeffding_threshold(n: u64, n2: u64, m: u64) -> f64 {
    let m = m.max(1) as f64;
    let ln = std::f64::consts::LN_2 + 3.0 * m.ln();
    (0.5 * ln).sqrt() * (1.0 / (n as f64).sqrt() + 1.0 / (n2 as f64).sqrt())
}

/// Hoeffding test for two empirical reward distributions given `M` samples overall.
pub fn diff(f: &FreqMap, g: &FreqMap, m: u64) -> bool {
    let (n, n2) = (f.total(), g.total());
    if n == 0 || n2 == 0 {
        return false;
    }
    let eps = hoeffding_threshold(n, n2, m);
    let (nf, ng) = (n as f64, n2 as f64);
    let (mut i, mut j) = (0, 0);
    let (a, b) = (&f.counts, &g.counts);
    while i < a.len() || j < b.len() {
        let (p, q) = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                Ordering::Less => {
                    i += 1;
                    (x.1, 0)
                }
                Ordering::Greater => {
                    j += 1;
                    (0, y.1)
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (x.1, y.1)
                }
            },
            (Some(x), None) => {
                i += 1;
                (x.1, 0)
            }
            (None, Some(y)) => {
                j += 1;
                (0, y.1)
            }
            (None, None) => unreachable!(),
        };
        if (p as f64 / nf - q as f64 / ng).abs() > eps {
            return true;
        }
    }
    false
}

type NodeId = u32;
const ROOT: NodeId = 0;

#[derive(Debug, Clone, Default)]
struct Node {
    children: Vec<(Label, NodeId)>,
    freq: FreqMap,
    sample: u64,
}

/// Closedness witness: `s·ℓ` has no compatible row in `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosednessWitness {
    pub s: Word,
    pub label: Label,
}

/// Consistency witness: `s` and `s2` are compatible but `s·ℓ·e` and `s2·ℓ·e` are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyWitness {
    pub s: Word,
    pub s2: Word,
    pub label: Label,
    pub e: Word,
}

#[derive(Debug, Clone)]
pub struct ObservationTable {
    ap: AtomicPropositions,
    s: IndexSet<Word>,
    e: IndexSet<Word>,
    nodes: Vec<Node>,
    total_samples: u64,
    record_limit: Option<usize>,
    dropped: u64,
}

/// A row as trie nodes, one per experiment.
type Row = Vec<Option<NodeId>>;

impl ObservationTable {
    pub fn new(ap: AtomicPropositions) -> Self {
        Self {
            ap,
            s: IndexSet::from([Word::empty()]),
            e: IndexSet::from([Word::empty()]),
            nodes: vec![Node::default()],
            total_samples: 0,
            record_limit: None,
            dropped: 0,
        }
    }

    pub fn ap(&self) -> &AtomicPropositions {
        &self.ap
    }

    pub fn s(&self) -> &IndexSet<Word> {
        &self.s
    }

    pub fn e(&self) -> &IndexSet<Word> {
        &self.e
    }

    pub fn add_s(&mut self, w: Word) -> bool {
        self.s.insert(w)
    }

    pub fn add_e(&mut self, w: Word) -> bool {
        self.e.insert(w)
    }

    /// Prefixes longer than `limit` are not recorded; they are counted in [`Self::dropped`].
    pub fn set_record_limit(&mut self, limit: Option<usize>) {
        self.record_limit = limit;
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Number of distinct recorded words, including `ε`.
    pub fn tracked_words(&self) -> usize {
        self.nodes.len()
    }

    /// `M`: the sum of all sample counters.
    pub fn total_samples(&self) -> u64 {
        self.total_samples
    }

    fn child(&self, n: NodeId, l: Label) -> Option<NodeId> {
        self.nodes[n as usize]
            .children
            .iter()
            .find(|c| c.0 == l)
            .map(|c| c.1)
    }

    fn child_or_insert(&mut self, n: NodeId, l: Label) -> NodeId {
        if let Some(c) = self.child(n, l) {
            return c;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node::default());
        let children = &mut self.nodes[n as usize].children;
        let pos = children.partition_point(|c| c.0 < l);
        children.insert(pos, (l, id));
        id
    }

    fn walk(&self, from: Option<NodeId>, labels: &[Label]) -> Option<NodeId> {
        labels.iter().try_fold(from?, |n, &l| self.child(n, l))
    }

    fn node(&self, w: &Word) -> Option<NodeId> {
        self.walk(Some(ROOT), w.labels())
    }

    fn freq_of(&self, n: Option<NodeId>) -> &FreqMap {
        n.map(|n| &self.nodes[n as usize].freq).unwrap_or(&EMPTY)
    }

    /// `T(w)`.
    pub fn freq(&self, w: &Word) -> &FreqMap {
        self.freq_of(self.node(w))
    }

    pub fn sample(&self, w: &Word) -> u64 {
        self.node(w).map(|n| self.nodes[n as usize].sample).unwrap_or(0)
    }

    /// Records every prefix `ℓ₁r₁⋯ℓₖrₖ` of the trace. `sample(ε)` counts traces.
    pub fn record(&mut self, trace: &[(Label, Reward)]) {
        let limit = self.record_limit.unwrap_or(usize::MAX);
        let mut n = ROOT;
        self.nodes[0].sample += 1;
        self.total_samples += 1;
        for (k, &(l, r)) in trace.iter().enumerate() {
            if k >= limit {
                self.dropped += (trace.len() - k) as u64;
                break;
            }
            n = self.child_or_insert(n, l);
            let node = &mut self.nodes[n as usize];
            node.freq.add(r, 1);
            node.sample += 1;
            self.total_samples += 1;
        }
    }

    pub(crate) fn load_entry(&mut self, w: &Word, reward: Option<Reward>, count: u64, sample: u64) {
        let mut n = ROOT;
        for &l in w {
            n = self.child_or_insert(n, l);
        }
        let node = &mut self.nodes[n as usize];
        if let Some(g) = reward {
            node.freq.add(g, count);
        }
        if node.sample != sample {
            self.total_samples = self.total_samples - node.sample + sample;
            node.sample = sample;
        }
    }

    /// Adds all counts of `other`; `S` and `E` become the unions.
    pub fn merge(&mut self, other: &ObservationTable) {
        let mut stack = vec![(ROOT, ROOT)];
        while let Some((mine, theirs)) = stack.pop() {
            let src = &other.nodes[theirs as usize];
            let dst = &mut self.nodes[mine as usize];
            dst.freq.merge(&src.freq);
            dst.sample += src.sample;
            for &(l, c) in &src.children {
                let m = self.child_or_insert(mine, l);
                stack.push((m, c));
            }
        }
        self.total_samples += other.total_samples;
        self.dropped += other.dropped;
        for w in &other.s {
            self.s.insert(w.clone());
        }
        for w in &other.e {
            self.e.insert(w.clone());
        }
    }

    /// Every recorded word with its node, in canonical order.
    pub fn recorded_words(&self) -> Vec<(Word, &FreqMap, u64)> {
        let mut out = Vec::new();
        let mut stack = vec![(ROOT, Word::empty())];
        while let Some((n, w)) = stack.pop() {
            let node = &self.nodes[n as usize];
            for &(l, c) in &node.children {
                stack.push((c, w.with(l)));
            }
            out.push((w, &node.freq, node.sample));
        }
        out.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        out
    }

    /// Reward values observed anywhere.
    pub fn observed_rewards(&self) -> Vec<Reward> {
        let mut g: Vec<Reward> = self.nodes.iter().flat_map(|n| n.freq.iter().map(|c| c.0)).collect();
        g.sort();
        g.dedup();
        g
    }

    /// `Diff` on `T` with the current `M`.
    pub fn diff(&self, w: &Word, w2: &Word) -> bool {
        diff(self.freq(w), self.freq(w2), self.total_samples)
    }

    pub fn compatible_cells(&self, w: &Word, w2: &Word) -> bool {
        !self.diff(w, w2)
    }

    /// `row(w)`: `T(w·e)` for each `e ∈ E`.
    pub fn row(&self, w: &Word) -> Vec<&FreqMap> {
        self.row_nodes(w, None).into_iter().map(|n| self.freq_of(n)).collect()
    }

    fn row_nodes(&self, w: &Word, next: Option<Label>) -> Row {
        let mut base = self.node(w);
        if let Some(l) = next {
            base = base.and_then(|n| self.child(n, l));
        }
        self.e.iter().map(|e| self.walk(base, e.labels())).collect()
    }

    fn rows_compatible(&self, a: &Row, b: &Row) -> bool {
        a.iter()
            .zip(b)
            .all(|(&x, &y)| x == y || !diff(self.freq_of(x), self.freq_of(y), self.total_samples))
    }

    pub fn compatible_rows(&self, w: &Word, w2: &Word) -> bool {
        self.rows_compatible(&self.row_nodes(w, None), &self.row_nodes(w2, None))
    }

    fn s_rows(&self) -> Vec<Row> {
        self.s.iter().map(|s| self.row_nodes(s, None)).collect()
    }

    pub fn closedness_witness(&self) -> Option<ClosednessWitness> {
        let rows = self.s_rows();
        for s in &self.s {
            let base = self.node(s);
            for l in self.ap.labels() {
                if base.and_then(|n| self.child(n, l)).is_none() {
                    // an unobserved row is compatible with anything
                    continue;
                }
                let r = self.row_nodes(s, Some(l));
                if !rows.iter().any(|r2| self.rows_compatible(&r, r2)) {
                    return Some(ClosednessWitness { s: s.clone(), label: l });
                }
            }
        }
        None
    }

    pub fn is_closed(&self) -> bool {
        self.closedness_witness().is_none()
    }

    pub fn consistency_witness(&self) -> Option<ConsistencyWitness> {
        let s: Vec<&Word> = self.s.iter().collect();
        let rows = self.s_rows();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                if !self.rows_compatible(&rows[i], &rows[j]) {
                    continue;
                }
                let (ni, nj) = (self.node(s[i]), self.node(s[j]));
                for l in self.ap.labels() {
                    let (ci, cj) = (ni.and_then(|n| self.child(n, l)), nj.and_then(|n| self.child(n, l)));
                    let (fi, fj) = (self.freq_of(ci), self.freq_of(cj));
                    if !fi.iter().any(|(g, _)| fj.get(g) > 0) {
                        continue;
                    }
                    for e in &self.e {
                        let (a, b) = (self.walk(ci, e.labels()), self.walk(cj, e.labels()));
                        if a != b && diff(self.freq_of(a), self.freq_of(b), self.total_samples) {
                            return Some(ConsistencyWitness {
                                s: s[i].clone(),
                                s2: s[j].clone(),
                                label: l,
                                e: e.clone(),
                            });
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_consistent(&self) -> bool {
        self.consistency_witness().is_none()
    }

    /// `Σ_ℓ Σ_γ T(s·ℓ)(γ)`.
    pub fn rank(&self, w: &Word) -> u64 {
        self.node(w)
            .map(|n| {
                self.nodes[n as usize]
                    .children
                    .iter()
                    .map(|&(_, c)| self.nodes[c as usize].freq.total())
                    .sum()
            })
            .unwrap_or(0)
    }

    /// Higher rank first, then shorter, then canonical order.
    fn preference(&self, a: &Word, b: &Word) -> Ordering {
        self.rank(b).cmp(&self.rank(a)).then_with(|| a.canonical_cmp(b))
    }

    /// Most informative member of `S` whose row is compatible with `row(w)`.
    pub fn representative(&self, w: &Word) -> Option<Word> {
        let r = self.row_nodes(w, None);
        self.s
            .iter()
            .filter(|s| self.rows_compatible(&r, &self.row_nodes(s, None)))
            .min_by(|a, b| self.preference(a, b))
            .cloned()
    }

    /// Partition of `S` into classes of pairwise compatible rows. Words are
    /// taken in preference order and join the first class they are compatible
    /// with as a whole; the first member of each class is its representative.
    pub fn classes(&self) -> Vec<Vec<Word>> {
        let mut order: Vec<&Word> = self.s.iter().collect();
        order.sort_by(|a, b| self.preference(a, b));
        let mut classes: Vec<Vec<(&Word, Row)>> = Vec::new();
        for w in order {
            let r = self.row_nodes(w, None);
            match classes
                .iter_mut()
                .find(|c| c.iter().all(|(_, r2)| self.rows_compatible(&r, r2)))
            {
                Some(c) => c.push((w, r)),
                None => classes.push(vec![(w, r)]),
            }
        }
        classes
            .into_iter()
            .map(|c| c.into_iter().map(|(w, _)| w.clone()).collect())
            .collect()
    }

    /// Class index for an arbitrary word: its own class when in `S`, otherwise
    /// the class of its representative.
    pub fn class_of(&self, classes: &[Vec<Word>], w: &Word) -> Option<usize> {
        let find = |x: &Word| classes.iter().position(|c| c.contains(x));
        if self.s.contains(w) {
            return find(w);
        }
        find(&self.representative(w)?)
    }
}
