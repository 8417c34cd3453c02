#![allow(dead_code)]

use std::path::PathBuf;

use prmlearn::env::{Nmdp, Outcome, RewardSource};
use prmlearn::{AtomicPropositions, Label, Prm, PrmBuilder, Reward, Word};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

pub fn random_ap<R: Rng>(rng: &mut R, max_props: usize) -> AtomicPropositions {
    let n = rng.random_range(1..=max_props);
    AtomicPropositions::new(["p", "q", "r"].into_iter().take(n)).unwrap()
}

/// `k` probabilities summing to one. Dyadic ones add up exactly in floating point.
pub fn split<R: Rng>(rng: &mut R, k: usize, dyadic: bool) -> Vec<f64> {
    if dyadic {
        // halve repeatedly, the last piece takes the remainder
        let mut left = 1.0;
        let mut out = Vec::with_capacity(k);
        for _ in 1..k {
            let piece = left / 2f64.powi(rng.random_range(1..=3));
            out.push(piece);
            left -= piece;
        }
        out.push(left);
        out
    } else {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }
}

/// Total machine with up to `max_states` states and up to `max_rewards` reward values.
pub fn random_prm<R: Rng>(rng: &mut R, ap: &AtomicPropositions, max_states: usize, max_rewards: usize, dyadic: bool) -> Prm {
    let pool = [0.0, 1.0, 0.5, 2.0, -1.0];
    let k = rng.random_range(1..=max_rewards);
    let gamma: Vec<Reward> = pool[..k].iter().map(|&g| Reward(g)).collect();
    let n = rng.random_range(1..=max_states);
    let mut b = PrmBuilder::new(ap.clone(), gamma.iter().copied());
    for i in 0..n {
        b.add_state(format!("y{i}"));
    }
    for y in 0..n {
        for l in ap.labels() {
            let k = rng.random_range(1..=n.min(3));
            let mut targets: Vec<usize> = (0..n).collect();
            targets.sort_by_key(|_| rng.random::<u32>());
            for (t, p) in targets[..k].iter().zip(split(rng, k, dyadic)) {
                b.add_edge(y, l, *t, p, *gamma.choose(rng).unwrap());
            }
        }
    }
    b.build().unwrap()
}

/// One-state environment with an action per label, so every word is realizable.
pub fn free_nmdp(h: &Prm) -> Nmdp {
    let ap = h.ap().clone();
    let labels: Vec<Label> = ap.labels().collect();
    let actions = labels.iter().map(|&l| ap.display_label(l)).collect();
    let row = labels
        .iter()
        .map(|&l| Some(vec![Outcome { next: 0, prob: 1.0, label: l }]))
        .collect();
    Nmdp::new(ap, vec!["x".into()], actions, 0, vec![row], RewardSource::Prm(h.clone())).unwrap()
}

/// Random environment with dyadic outcome probabilities.
pub fn random_nmdp<R: Rng>(rng: &mut R, h: &Prm, max_states: usize, max_actions: usize) -> Nmdp {
    let ap = h.ap().clone();
    let labels: Vec<Label> = ap.labels().collect();
    let nx = rng.random_range(1..=max_states);
    let na = rng.random_range(1..=max_actions);
    let mut transitions = Vec::with_capacity(nx);
    for _ in 0..nx {
        let mut row = Vec::with_capacity(na);
        for a in 0..na {
            if a > 0 && rng.random_bool(0.2) {
                row.push(None);
                continue;
            }
            let k = rng.random_range(1..=3);
            let outcomes = split(rng, k, true)
                .into_iter()
                .map(|prob| Outcome {
                    next: rng.random_range(0..nx),
                    prob,
                    label: *labels.choose(rng).unwrap(),
                })
                .collect();
            row.push(Some(outcomes));
        }
        transitions.push(row);
    }
    let states = (0..nx).map(|x| format!("x{x}")).collect();
    let actions = (0..na).map(|a| format!("a{a}")).collect();
    Nmdp::new(ap, states, actions, 0, transitions, RewardSource::Prm(h.clone())).unwrap()
}

pub fn random_word<R: Rng>(rng: &mut R, ap: &AtomicPropositions, max_len: usize) -> Word {
    let labels: Vec<Label> = ap.labels().collect();
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| *labels.choose(rng).unwrap()).collect()
}
