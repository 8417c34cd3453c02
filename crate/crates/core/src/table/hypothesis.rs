use std::collections::{BTreeMap, HashMap, VecDeque};
use std::str::FromStr;

use super::ObservationTable;
use crate::error::{Error, Result};
use crate::label::{Reward, Word};
use crate::prm::{Prm, PrmBuilder, FAILURE_STATE};

/// Which reward a hypothesis transition emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoConvention {
    /// The annotation `γ` of the source state.
    Source,
    /// The annotation `γ'` of the sampled successor, i.e. the observed reward.
    #[default]
    Target,
}

impl FromStr for RhoConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(Self::Source),
            "target" => Ok(Self::Target),
            _ => Err(Error::Config(format!("rho convention must be `source` or `target`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Pair(Reward, usize),
    Bottom,
}

/// Hypothesis machine of a closed and consistent table.
///
/// States are pairs `(γ, class)` reachable from `(0, class(ε))`, plus `⊥` when
/// reachable. A state whose class has fewer than `n_check` samples, or a label
/// never observed from it, leads to `⊥`. Counts are pooled over the members of
/// a class.
pub fn build_hypothesis(table: &ObservationTable, n_check: u64, rho: RhoConvention) -> Result<Prm> {
    if !table.is_closed() {
        return Err(Error::NotClosed);
    }
    if !table.is_consistent() {
        return Err(Error::NotConsistent);
    }
    Ok(construct(table, n_check, rho))
}

/// As [`build_hypothesis`] without checking closedness and consistency.
/// Successors without a compatible row go to `⊥`.
pub fn construct(table: &ObservationTable, n_check: u64, rho: RhoConvention) -> Prm {
    let ap = table.ap().clone();
    let classes = table.classes();
    let mut gamma = table.observed_rewards();
    gamma.push(Reward::ZERO);
    let mut b = PrmBuilder::new(ap.clone(), gamma);

    let pooled: Vec<u64> = classes
        .iter()
        .map(|c| c.iter().map(|u| table.sample(u)).sum())
        .collect();
    let mut succ_class: HashMap<Word, Option<usize>> = HashMap::new();

    let start = Key::Pair(Reward::ZERO, table.class_of(&classes, &Word::empty()).expect("ε ∈ S"));
    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    ids.insert(start, 0);
    let mut edges: Vec<(usize, crate::label::Label, Vec<(Key, u64)>, Reward)> = Vec::new();

    while let Some(key) = queue.pop_front() {
        let from = ids[&key];
        let (g, ci) = match key {
            Key::Bottom => {
                for l in ap.labels() {
                    edges.push((from, l, vec![(Key::Bottom, 1)], Reward::ZERO));
                }
                continue;
            }
            Key::Pair(g, ci) => (g, ci),
        };
        let well_sampled = pooled[ci] >= n_check;
        for l in ap.labels() {
            let mut counts: BTreeMap<Key, u64> = BTreeMap::new();
            if well_sampled {
                for u in &classes[ci] {
                    let ul = u.with(l);
                    let f = table.freq(&ul);
                    if f.is_empty() {
                        continue;
                    }
                    let cj = *succ_class
                        .entry(ul.clone())
                        .or_insert_with(|| table.class_of(&classes, &ul));
                    for (g2, k) in f.iter() {
                        let target = cj.map_or(Key::Bottom, |cj| Key::Pair(g2, cj));
                        *counts.entry(target).or_default() += k;
                    }
                }
            }
            if counts.is_empty() {
                counts.insert(Key::Bottom, 1);
            }
            for &t in counts.keys() {
                if !ids.contains_key(&t) {
                    ids.insert(t, order.len());
                    order.push(t);
                    queue.push_back(t);
                }
            }
            edges.push((from, l, counts.into_iter().collect(), g));
        }
    }

    let mut next_name = 0;
    for key in &order {
        match key {
            Key::Bottom => b.add_state(FAILURE_STATE),
            Key::Pair(..) => {
                next_name += 1;
                b.add_state(format!("q{}", next_name - 1))
            }
        };
    }
    b.set_init(0);
    for (from, l, counts, g) in edges {
        let total: u64 = counts.iter().map(|c| c.1).sum();
        for (t, k) in counts {
            let reward = match (rho, t) {
                (_, Key::Bottom) if order[from] == Key::Bottom => Reward::ZERO,
                (RhoConvention::Source, _) => g,
                (RhoConvention::Target, Key::Pair(g2, _)) => g2,
                (RhoConvention::Target, Key::Bottom) => Reward::ZERO,
            };
            b.add_edge(from, l, ids[&t], k as f64 / total as f64, reward);
        }
    }
    b.build().expect("hypothesis construction yields a valid machine")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{AtomicPropositions, Label};

    #[test]
    fn single_label_self_loop() {
        let ap = AtomicPropositions::new(["a"]).unwrap();
        let mut t = ObservationTable::new(ap);
        for _ in 0..10 {
            t.record(&[(Label::EMPTY, Reward::ZERO)]);
        }
        let h = build_hypothesis(&t, 5, RhoConvention::Target).unwrap();
        assert_eq!(h.state_names(), ["q0", "⊥"]);
        let e = h.transition(0, Label::EMPTY).unwrap();
        assert_eq!((e.len(), e[0].target, e[0].prob, e[0].reward), (1, 0, 1.0, Reward::ZERO));
        // the unobserved label leads to ⊥
        assert_eq!(h.transition(0, Label(1)).unwrap()[0].target, 1);
        assert!(h.is_total());
    }

    #[test]
    fn undersampled_routes_to_failure() {
        let ap = AtomicPropositions::new(["a"]).unwrap();
        let mut t = ObservationTable::new(ap);
        for _ in 0..3 {
            t.record(&[(Label::EMPTY, Reward::ZERO)]);
        }
        let h = build_hypothesis(&t, 5, RhoConvention::Target).unwrap();
        assert_eq!(h.num_states(), 2);
        for l in h.ap().labels() {
            assert_eq!(h.transition(0, l).unwrap()[0].target, 1);
        }
    }

    #[test]
    fn coffee_split_from_counts() {
        let ap = AtomicPropositions::new(["c", "o"]).unwrap();
        let c = ap.parse_label("c").unwrap();
        let o = ap.parse_label("o").unwrap();
        let mut t = ObservationTable::new(ap.clone());
        for i in 0..1000 {
            let r = if i % 10 == 0 { Reward::ZERO } else { Reward::ONE };
            t.record(&[(c, Reward::ZERO), (o, r)]);
        }
        t.add_e(Word::from(vec![o]));
        t.add_s(Word::from(vec![c]));
        t.add_s(Word::from(vec![c, o]));
        while let Some(w) = t.closedness_witness() {
            t.add_s(w.s.with(w.label));
        }
        let h = build_hypothesis(&t, 10, RhoConvention::Target).unwrap();
        let d = h.next_reward_distribution(&Word::from(vec![c]), o).unwrap();
        assert!((d[&Reward::ONE] - 0.9).abs() < 1e-12);
        assert_eq!(t.classes().len(), 2);
        let src = build_hypothesis(&t, 10, RhoConvention::Source).unwrap();
        assert_eq!(src.num_states(), h.num_states());
    }

    #[test]
    fn parses_convention() {
        assert_eq!("source".parse::<RhoConvention>().unwrap(), RhoConvention::Source);
        assert!("x".parse::<RhoConvention>().is_err());
    }
}
