use super::Nmdp;
use crate::error::{Error, Result};
use crate::label::{Label, Reward};
use crate::prm::Prm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductOutcome {
    pub next: usize,
    pub prob: f64,
    pub label: Label,
    pub reward: Reward,
}

/// Synchronous composition `M × H`. State `(x, y)` has index `x·|Y| + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMdp {
    env_states: usize,
    machine_states: usize,
    num_actions: usize,
    init: usize,
    transitions: Vec<Vec<Option<Vec<ProductOutcome>>>>,
}

impl ProductMdp {
    pub fn num_states(&self) -> usize {
        self.env_states * self.machine_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn machine_states(&self) -> usize {
        self.machine_states
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.machine_states + y
    }

    pub fn split(&self, s: usize) -> (usize, usize) {
        (s / self.machine_states, s % self.machine_states)
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn outcomes(&self, s: usize, a: usize) -> Option<&[ProductOutcome]> {
        self.transitions[s][a].as_deref()
    }

    /// `p'(s, a, t)`.
    pub fn prob(&self, s: usize, a: usize, t: usize) -> f64 {
        self.outcomes(s, a)
            .map(|o| o.iter().filter(|o| o.next == t).map(|o| o.prob).sum())
            .unwrap_or(0.0)
    }

    /// `Σ_{y'} p'((x, y), a, (x', y'))`.
    pub fn marginal(&self, s: usize, a: usize, next_env: usize) -> f64 {
        (0..self.machine_states)
            .map(|y| self.prob(s, a, self.index(next_env, y)))
            .sum()
    }
}

pub fn product(m: &Nmdp, h: &Prm) -> Result<ProductMdp> {
    if h.ap() != m.ap() {
        return Err(Error::InvalidMachine("machine and environment use different propositions".into()));
    }
    let ny = h.num_states();
    let mut missing = Vec::new();
    for l in m.label_range() {
        for y in 0..ny {
            if h.transition(y, l).is_none() {
                missing.push(format!("({}, {})", h.state_name(y), m.ap().display_label(l)));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingTransitions(missing.len(), missing[0].clone()));
    }
    let mut transitions = Vec::with_capacity(m.num_states() * ny);
    for x in 0..m.num_states() {
        for y in 0..ny {
            let row = (0..m.num_actions())
                .map(|a| {
                    let outs = m.outcomes(x, a).ok()?;
                    let mut v = Vec::new();
                    for o in outs {
                        for e in h.transition(y, o.label).unwrap_or(&[]) {
                            v.push(ProductOutcome {
                                next: o.next * ny + e.target,
                                prob: o.prob * e.prob,
                                label: o.label,
                                reward: e.reward,
                            });
                        }
                    }
                    Some(v)
                })
                .collect();
            transitions.push(row);
        }
    }
    Ok(ProductMdp {
        env_states: m.num_states(),
        machine_states: ny,
        num_actions: m.num_actions(),
        init: m.init() * ny + h.init(),
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_office_nmdp, GridMap};
    use super::*;
    use crate::env::tests::zero_machine;
    use crate::prm::library::coffee_prm;

    #[test]
    fn trivial_machine_is_identity() {
        let map = GridMap::parse("A.c\n").unwrap();
        let truth = coffee_prm();
        let m = build_office_nmdp(&map, &truth).unwrap();
        let p = product(&m, &zero_machine(m.ap())).unwrap();
        assert_eq!(p.num_states(), m.num_states());
        for s in 0..p.num_states() {
            for a in 0..4 {
                for o in p.outcomes(s, a).unwrap() {
                    assert_eq!(o.reward, Reward::ZERO);
                    assert_eq!(o.prob, m.prob(s, a, o.next).unwrap());
                }
            }
        }
    }

    #[test]
    fn coffee_split_in_product() {
        let map = GridMap::parse("Ac\n").unwrap();
        let truth = coffee_prm();
        let m = build_office_nmdp(&map, &truth).unwrap();
        let p = product(&m, &truth).unwrap();
        let s = p.index(0, 0);
        assert_eq!(p.prob(s, 2, p.index(1, 1)), 0.9);
        assert_eq!(p.prob(s, 2, p.index(1, 2)), 0.1);
        assert_eq!(p.marginal(s, 2, 1), 1.0);
        assert!(p.outcomes(s, 2).unwrap().len() <= m.num_states() * 2);
    }

    #[test]
    fn partial_machine_reports_missing_pairs() {
        let map = GridMap::parse("Ac\n").unwrap();
        let truth = coffee_prm();
        let m = build_office_nmdp(&map, &truth).unwrap();
        let mut b = crate::prm::PrmBuilder::new(m.ap().clone(), [Reward::ZERO]);
        let y = b.add_state("y0");
        b.set_transition(y, Label::EMPTY, Reward::ZERO, &[(y, 1.0)]);
        let h = b.build().unwrap();
        assert!(matches!(product(&m, &h), Err(Error::MissingTransitions(1, _))));
    }
}
