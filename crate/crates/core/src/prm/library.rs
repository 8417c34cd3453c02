//! Ground-truth machines for the shipped experiments.

use super::{Prm, PrmBuilder};
use crate::label::{AtomicPropositions, Reward};

/// The probabilistic coffee task over `AP = {c, o, *}`.
///
/// `y0` has no coffee yet, `y1` holds good coffee, `y2` holds coffee from a
/// broken machine (10%), `y3` has delivered and `y4` has failed by touching a
/// decoration. Only delivering good coffee pays 1.
pub fn coffee_prm() -> Prm {
    let ap = AtomicPropositions::new(["c", "o", "*"]).expect("static propositions");
    let c = ap.label(["c"]).expect("static label");
    let o = ap.label(["o"]).expect("static label");
    let (zero, one) = (Reward::ZERO, Reward::ONE);
    let mut b = PrmBuilder::new(ap.clone(), [zero, one]);
    let y: Vec<usize> = (0..5).map(|i| b.add_state(format!("y{i}"))).collect();
    for l in ap.labels() {
        if l.contains_prop(2) {
            for &s in &y[..3] {
                b.set_transition(s, l, zero, &[(y[4], 1.0)]);
            }
        } else {
            if l == c {
                b.set_transition(y[0], l, zero, &[(y[1], 0.9), (y[2], 0.1)]);
            } else {
                b.set_transition(y[0], l, zero, &[(y[0], 1.0)]);
            }
            if l == o {
                b.set_transition(y[1], l, one, &[(y[3], 1.0)]);
                b.set_transition(y[2], l, zero, &[(y[3], 1.0)]);
            } else {
                b.set_transition(y[1], l, zero, &[(y[1], 1.0)]);
                b.set_transition(y[2], l, zero, &[(y[2], 1.0)]);
            }
        }
        b.set_transition(y[3], l, zero, &[(y[3], 1.0)]);
        b.set_transition(y[4], l, zero, &[(y[4], 1.0)]);
    }
    b.build().expect("coffee machine is well formed")
}

/// Deterministic two-state patrol over `AP = {c}`: entering `c` from `y0` pays
/// 1, then leaving it (label `ε`) from `y1` pays 1; everything else pays 0.
pub fn patrol_prm() -> Prm {
    let ap = AtomicPropositions::new(["c"]).expect("static propositions");
    let (zero, one) = (Reward::ZERO, Reward::ONE);
    let c = ap.label(["c"]).expect("static label");
    let e = crate::label::Label::EMPTY;
    let mut b = PrmBuilder::new(ap, [zero, one]);
    let y0 = b.add_state("y0");
    let y1 = b.add_state("y1");
    b.set_transition(y0, c, one, &[(y1, 1.0)]);
    b.set_transition(y0, e, zero, &[(y0, 1.0)]);
    b.set_transition(y1, e, one, &[(y0, 1.0)]);
    b.set_transition(y1, c, zero, &[(y1, 1.0)]);
    b.build().expect("patrol machine is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Word;

    #[test]
    fn patrol_alternates() {
        let p = patrol_prm();
        assert!(p.is_total());
        let ap = p.ap().clone();
        let w = ap.parse_word("c;~;c;c").unwrap();
        let d = p.next_reward_distribution(&w.prefix(3), w.labels()[3]).unwrap();
        assert_eq!(d[&Reward::ZERO], 1.0);
        let d = p.next_reward_distribution(&w.prefix(1), w.labels()[1]).unwrap();
        assert_eq!(d[&Reward::ONE], 1.0);
        assert_eq!(p.word_matrix(&Word::empty()).dim(), 2);
    }

    #[test]
    fn coffee_is_total() {
        let c = coffee_prm();
        assert!(c.is_total() && c.is_reward_deterministic());
        assert_eq!(c.num_states(), 5);
    }
}
