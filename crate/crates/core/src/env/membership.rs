use crate::error::{Error, Result};
use crate::label::{AtomicPropositions, Reward, Word};
use crate::prm::{Prm, PrmBuilder};

/// Deterministic machine paying 1 each time the next symbol of `zeta` is read.
/// The last state absorbs every label with reward 0.
pub fn membership_reward_machine(ap: &AtomicPropositions, zeta: &Word) -> Result<Prm> {
    if zeta.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut b = PrmBuilder::new(ap.clone(), [Reward::ZERO, Reward::ONE]);
    let states: Vec<usize> = (0..=zeta.len()).map(|k| b.add_state(format!("y{k}"))).collect();
    for (k, &y) in states.iter().enumerate() {
        let want = zeta.labels().get(k).copied();
        for l in ap.labels() {
            if Some(l) == want {
                b.set_transition(y, l, Reward::ONE, &[(states[k + 1], 1.0)]);
            } else {
                b.set_transition(y, l, Reward::ZERO, &[(y, 1.0)]);
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ap() -> AtomicPropositions {
        AtomicPropositions::new(["c", "o", "*"]).unwrap()
    }

    #[test]
    fn coffee_then_office() {
        let ap = ap();
        let zeta = ap.parse_word("c;o").unwrap();
        let h = membership_reward_machine(&ap, &zeta).unwrap();
        assert_eq!(h.num_states(), 3);
        let c = ap.parse_label("c").unwrap();
        let o = ap.parse_label("o").unwrap();
        assert_eq!(h.transition(0, c).unwrap()[0].target, 1);
        assert_eq!(h.rho(0, c), Some(Reward::ONE));
        assert_eq!((h.transition(0, o).unwrap()[0].target, h.rho(0, o)), (0, Some(Reward::ZERO)));
        assert_eq!((h.transition(1, o).unwrap()[0].target, h.rho(1, o)), (2, Some(Reward::ONE)));
        let run = h.sample_run(&zeta, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(run.iter().map(|r| r.1).collect::<Vec<_>>(), vec![Reward::ONE, Reward::ONE]);
    }

    #[test]
    fn single_symbol_pays_once() {
        let ap = ap();
        let h = membership_reward_machine(&ap, &ap.parse_word("c").unwrap()).unwrap();
        assert_eq!(h.num_states(), 2);
        let w = ap.parse_word("c;c;o;c").unwrap();
        let total: f64 = h
            .sample_run(&w, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap()
            .iter()
            .map(|r| r.1 .0)
            .sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn empty_word_rejected() {
        assert!(matches!(membership_reward_machine(&ap(), &Word::empty()), Err(Error::EmptyWord)));
    }
}
