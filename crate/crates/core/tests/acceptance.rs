//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prmlearn::active::{greedy_machine_return, learn_active, teacher_query, LearnerConfig, QTable, QueryMode};
use prmlearn::env::{membership_reward_machine, product, shortest_path_policy, Environment, Policy};
use prmlearn::passive::{collect_traces, learn_from_traces, learn_passive, PassiveConfig};
use prmlearn::table::{build_hypothesis, diff, FreqMap};
use prmlearn::verify::{brute_force_reward_distribution, encoding_distance, WordDomain};
use prmlearn::{Prm, Reward};

use common::*;

type Check = Result<String, String>;

fn coffee_split(h: &Prm) -> Option<f64> {
    let ap = h.ap();
    let d = h
        .next_reward_distribution(&ap.parse_word("c").ok()?, ap.parse_label("o").ok()?)
        .ok()?;
    Some(d.get(&Reward::ONE).copied().unwrap_or(0.0))
}

fn passive_reconstruction() -> Check {
    let env = Environment::load(asset("office.toml")).map_err(|e| e.to_string())?;
    let pi = shortest_path_policy(&env.map, &env.waypoints().unwrap()).unwrap();
    let cfg = PassiveConfig {
        n_episode: env.config.n_episode,
        seed: 7,
        ..PassiveConfig::default()
    };
    let out = learn_passive(&env.nmdp, &pi, 10_000, &cfg).map_err(|e| e.to_string())?;
    let h = &out.hypothesis;
    let p = coffee_split(h).ok_or("no delivery distribution")?;
    let bottom = h.failure_state().ok_or("no failure state")?;
    let star = h.ap().index_of("*").unwrap();
    let mut star_edges = 0;
    for (y, l, edges) in h.defined_transitions() {
        if y != bottom && l.contains_prop(star) {
            star_edges += edges.iter().filter(|e| e.target != bottom).count();
        }
    }
    let detail = format!("p = {p:.4}, non-failure `*` edges = {star_edges}");
    if (p - 0.9).abs() <= 0.02 && star_edges == 0 && out.report.complete() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..100 {
        let ap = random_ap(&mut rng, 2);
        let h = random_prm(&mut rng, &ap, 5, 3, false);
        let m = free_nmdp(&h);
        for _ in 0..10 {
            let w = random_word(&mut rng, &ap, 6);
            let (prefix, last) = (w.prefix(w.len() - 1), *w.labels().last().unwrap());
            match (brute_force_reward_distribution(&m, &w), h.next_reward_distribution(&prefix, last)) {
                (Ok(a), Ok(b)) => {
                    let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
                    for k in keys {
                        let d = (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs();
                        worst = worst.max(d);
                    }
                    compared += 1;
                }
                (Err(_), Err(_)) => {}
                (a, b) => return Err(format!("one side failed: {a:?} vs {b:?}")),
            }
        }
    }
    let detail = format!("{compared} words, max deviation {worst:.1e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn patrol_active() -> Check {
    let env = Environment::load(asset("patrol.toml")).map_err(|e| e.to_string())?;
    let mut good = 0;
    let mut dists = Vec::new();
    for seed in 0..10 {
        let cfg = LearnerConfig {
            n_check: 100,
            n_query: 300,
            n_stop: 30,
            n_episode: 50,
            seed,
            ..LearnerConfig::default()
        };
        let out = learn_active(&env.nmdp, &cfg).map_err(|e| e.to_string())?;
        let r = encoding_distance(&out.hypothesis, &env.truth, 5, WordDomain::Realizable(&env.nmdp))
            .map_err(|e| e.to_string())?;
        dists.push(format!("{:.2}", r.distance));
        if r.distance <= 0.05 {
            good += 1;
        }
    }
    let detail = format!("{good}/10 seeds within 0.05, distances [{}]", dists.join(" "));
    if good >= 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn office_active() -> Check {
    let env = Environment::load(asset("office.toml")).map_err(|e| e.to_string())?;
    let mut good = 0;
    let mut splits = Vec::new();
    for seed in 0..10 {
        let cfg = LearnerConfig {
            n_check: 200,
            n_query: 500,
            n_stop: 50,
            n_episode: 100,
            seed,
            ..LearnerConfig::default()
        };
        let out = learn_active(&env.nmdp, &cfg).map_err(|e| e.to_string())?;
        match coffee_split(&out.hypothesis) {
            Some(p) => {
                splits.push(format!("{p:.3}"));
                if (p - 0.9).abs() <= 0.05 {
                    good += 1;
                }
            }
            None => splits.push("-".into()),
        }
    }
    let detail = format!("{good}/10 seeds within 0.05, splits [{}]", splits.join(" "));
    if good >= 8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn freq(pairs: &[(u8, u64)]) -> FreqMap {
    pairs.iter().map(|&(g, n)| (Reward(g as f64), n)).collect()
}

fn hoeffding_suite() -> Check {
    // the threshold written out with α = 1/M³
    let m = 200u64;
    let alpha = 1.0 / (m as f64).powi(3);
    let eps = (0.5 * (2.0 / alpha).ln()).sqrt() * (2.0 / 100f64.sqrt());
    if (eps - 0.576).abs() > 0.001 {
        return Err(format!("threshold {eps:.4}"));
    }
    let one = freq(&[(1, 100)]);
    let zero = freq(&[(0, 100)]);
    let half = freq(&[(0, 50), (1, 50)]);
    if !diff(&one, &zero, m) || diff(&FreqMap::new(), &zero, m) || diff(&half, &half, m) {
        return Err("worked examples".into());
    }
    let map = prop::collection::vec((0u8..4, 0u64..60), 0..5);
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(map.clone(), map, 1u64..1_000_000), |(a, b, m)| {
            let (f, g) = (freq(&a), freq(&b));
            prop_assert_eq!(diff(&f, &g, m), diff(&g, &f, m));
            prop_assert!(!diff(&f, &FreqMap::new(), m));
            prop_assert!(!diff(&FreqMap::new(), &g, m));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("threshold {eps:.4}, 10000 property cases"))
}

fn hypothesis_suite() -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        max_global_rejects: 100_000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (any::<u64>(), 1usize..5, 10usize..150, 1u64..40);
    runner
        .run(&strategy, |(seed, len, episodes, n_check)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ap = random_ap(&mut rng, 2);
            let truth = random_prm(&mut rng, &ap, 3, 3, false);
            let m = free_nmdp(&truth);
            let traces = collect_traces(&m, &Policy::uniform(&m), episodes, len, seed).unwrap();
            let cfg = PassiveConfig {
                n_check,
                max_repairs: 50,
                ..PassiveConfig::default()
            };
            let out = learn_from_traces(&ap, &traces, &cfg).unwrap();
            prop_assume!(out.report.complete());
            let h = build_hypothesis(&out.table, n_check, cfg.rho).unwrap();
            prop_assert!(h.is_total());
            let mut seen = BTreeSet::from([h.init()]);
            let mut stack = vec![h.init()];
            for (y, _, edges) in h.defined_transitions() {
                let total: f64 = edges.iter().map(|e| e.prob).sum();
                prop_assert!((total - 1.0).abs() <= 1e-9, "row ({y}) sums to {total}");
                for e in edges {
                    prop_assert!(h.gamma().contains(&e.reward));
                }
            }
            while let Some(y) = stack.pop() {
                for l in ap.labels() {
                    for e in h.transition(y, l).unwrap() {
                        if e.prob > 0.0 && seen.insert(e.target) {
                            stack.push(e.target);
                        }
                    }
                }
            }
            prop_assert_eq!(seen.len(), h.num_states());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 closed and consistent tables".into())
}

fn product_factorization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut entries = 0;
    for _ in 0..100 {
        let ap = random_ap(&mut rng, 2);
        let h = random_prm(&mut rng, &ap, 4, 3, true);
        let m = random_nmdp(&mut rng, &h, 4, 3);
        let p = product(&m, &h).map_err(|e| e.to_string())?;
        for x in 0..m.num_states() {
            for a in m.available(x) {
                let mut env: BTreeMap<usize, f64> = BTreeMap::new();
                for o in m.outcomes(x, a).unwrap() {
                    *env.entry(o.next).or_default() += o.prob;
                }
                for y in 0..h.num_states() {
                    let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
                    for o in p.outcomes(p.index(x, y), a).unwrap() {
                        *sums.entry(p.split(o.next).0).or_default() += o.prob;
                    }
                    for x2 in 0..m.num_states() {
                        entries += 1;
                        let want = env.get(&x2).copied().unwrap_or(0.0);
                        let got = sums.get(&x2).copied().unwrap_or(0.0);
                        if want != got {
                            return Err(format!("({x},{y}) --{a}--> {x2}: {got} != {want}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{entries} entries exact"))
}

fn membership_priming() -> Check {
    let env = Environment::load(asset("office.toml")).map_err(|e| e.to_string())?;
    let m = &env.nmdp;
    let zeta = m.ap().parse_word("c;o").unwrap();
    let h = membership_reward_machine(m.ap(), &zeta).unwrap();
    let cfg = LearnerConfig {
        n_episode: env.config.n_episode,
        ..LearnerConfig::default()
    };
    let mut good = 0;
    let mut returns = Vec::new();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = QTable::for_pair(m, &h);
        for _ in 0..500 {
            teacher_query(&mut q, m, &h, QueryMode::Membership, &cfg, &mut rng).unwrap();
        }
        let r = greedy_machine_return(&q, m, &h, cfg.n_episode, &mut rng).unwrap();
        returns.push(format!("{r}"));
        if r == 2.0 {
            good += 1;
        }
    }
    let detail = format!("{good}/10 seeds reach 2, returns [{}]", returns.join(" "));
    if good >= 8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_prm"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Check {
    let office = asset("office.toml");
    let patrol = asset("patrol.toml");
    let coffee = asset("coffee.prm");
    let (office, patrol, coffee) = (office.to_str().unwrap(), patrol.to_str().unwrap(), coffee.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["simulate", "--env", office, "--episodes", "500", "--out", "traces.log"],
        vec!["learn-passive", "--env", office, "--episodes", "3000", "--out", "p.prm", "--dot", "p.dot", "--table", "p.csv"],
        vec!["learn-passive", "--env", office, "--traces", "traces.log", "--out", "t.prm"],
        vec!["learn-active", "--env", patrol, "--budget", "100,300,30,50", "--out", "a.prm", "--report", "a.txt", "--table", "a.csv"],
        vec!["eval-encoding", "--hypothesis", "p.prm", "--truth", coffee, "--max-len", "3"],
        vec!["mq", "--env", office, "--word", "c;o", "--max-len", "4"],
        vec!["export-dot", "--prm", "a.prm", "--out", "a.dot"],
    ];
    let files = ["traces.log", "p.prm", "p.dot", "p.csv", "t.prm", "a.prm", "a.txt", "a.csv", "a.dot"];
    let mut runs = Vec::new();
    for jobs in ["1", "4"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut stdout = Vec::new();
        for c in &commands {
            let mut args = c.clone();
            args.extend(["--seed", "11", "--jobs", jobs]);
            stdout.push(run_cli(dir.path(), &args)?);
        }
        let contents: Vec<Vec<u8>> = files
            .iter()
            .map(|f| fs::read(dir.path().join(f)).unwrap_or_default())
            .collect();
        if contents.iter().any(Vec::is_empty) {
            return Err("an output file is missing".into());
        }
        runs.push((stdout, contents));
    }
    if runs[0] == runs[1] {
        Ok(format!("{} commands, {} files identical across runs", commands.len(), files.len()))
    } else {
        let differing: Vec<&str> = files
            .iter()
            .zip(runs[0].1.iter().zip(&runs[1].1))
            .filter(|(_, (a, b))| a != b)
            .map(|(f, _)| *f)
            .collect();
        Err(format!("outputs differ: {differing:?}"))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("passive reconstruction", passive_reconstruction),
        ("oracle equivalence", oracle_equivalence),
        ("active learning, deterministic rewards", patrol_active),
        ("active learning, stochastic rewards", office_active),
        ("hoeffding diff suite", hoeffding_suite),
        ("hypothesis well-formedness", hypothesis_suite),
        ("product factorization", product_factorization),
        ("membership priming", membership_priming),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("criterion {id} PASS {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                failed += 1;
                println!("criterion {id} FAIL {name}: {d} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
