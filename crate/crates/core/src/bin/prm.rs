use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use prmlearn::active::{learn_active, LearnerConfig, MachineAdvance};
use prmlearn::env::{parse_trace_log, print_trace_log, shortest_path_policy, Environment, Nmdp, Policy};
use prmlearn::passive::{collect_traces, learn_from_traces, PassiveConfig};
use prmlearn::prm::{parse_prm, print_prm, to_dot};
use prmlearn::table::{dump_csv, RhoConvention};
use prmlearn::verify::{brute_force_word_realizability, encoding_distance, RealizabilityCriterion, WordDomain};
use prmlearn::{par, Error, Result};

#[derive(Parser)]
#[command(name = "prm", version, about = "Probabilistic reward machines: simulation, learning and checks")]
struct Cli {
    /// Seed for every random choice. Defaults to the environment's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for episode collection.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out a policy and log the traces.
    Simulate {
        #[arg(long)]
        env: PathBuf,
        /// `shortest-path`, `uniform`, or a file of `<state> <action>` lines.
        #[arg(long, default_value = "shortest-path")]
        policy: String,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn the reward machine of a fixed policy from its traces.
    LearnPassive {
        #[arg(long)]
        env: PathBuf,
        /// Learn from a trace log instead of rolling out.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long, default_value = "shortest-path")]
        policy: String,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long, default_value_t = 100)]
        n_check: u64,
        #[arg(long, default_value_t = 12)]
        max_experiment_len: usize,
        #[arg(long, default_value = "target")]
        rho: RhoConvention,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Learn the reward machine by querying the environment.
    LearnActive {
        #[arg(long)]
        env: PathBuf,
        /// `n_check,n_query,n_stop,n_episode`.
        #[arg(long, default_value = "100,300,30,50")]
        budget: String,
        #[arg(long, default_value_t = 0.5)]
        learn_rate: f64,
        #[arg(long, default_value_t = 0.9)]
        discount: f64,
        #[arg(long, default_value_t = 0.1)]
        explore: f64,
        #[arg(long, default_value = "target")]
        rho: RhoConvention,
        #[arg(long, default_value = "sample")]
        machine_advance: MachineAdvance,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        max_episodes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Worst next-reward distance between a hypothesis and the truth.
    EvalEncoding {
        #[arg(long)]
        hypothesis: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        /// Only words this environment can produce.
        #[arg(long)]
        env: Option<PathBuf>,
    },
    /// Search for a trajectory producing a label word.
    Mq {
        #[arg(long)]
        env: PathBuf,
        /// Labels separated by `;`, propositions inside a label by `&`, `~` for the empty label.
        #[arg(long)]
        word: String,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value = "label_only")]
        criterion: RealizabilityCriterion,
        #[arg(long, default_value_t = prmlearn::verify::DEFAULT_NODE_BUDGET)]
        nodes: usize,
    },
    /// Write a machine as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        prm: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Outcome {
    Done,
    Exhausted,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_policy(choice: &str, env: &Environment) -> Result<Policy> {
    let m = &env.nmdp;
    match choice {
        "shortest-path" => shortest_path_policy(&env.map, &env.waypoints()?),
        "uniform" => Ok(Policy::uniform(m)),
        path => parse_policy(m, &read(Path::new(path))?),
    }
}

/// `<state> <action>` per line; a `*` state sets the default action.
fn parse_policy(m: &Nmdp, text: &str) -> Result<Policy> {
    let mut default = None;
    let mut actions = vec![None; m.num_states()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: i + 1, msg };
        let (state, action) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| perr("expected `<state> <action>`".into()))?;
        let action = action.trim();
        let a = (0..m.num_actions())
            .find(|&a| m.action_name(a) == action)
            .ok_or_else(|| perr(format!("unknown action `{action}`")))?;
        if state == "*" {
            default = Some(a);
        } else {
            let x = (0..m.num_states())
                .find(|&x| m.state_name(x) == state)
                .ok_or_else(|| perr(format!("unknown state `{state}`")))?;
            actions[x] = Some(a);
        }
    }
    let actions = actions
        .into_iter()
        .enumerate()
        .map(|(x, a)| {
            a.or(default)
                .ok_or_else(|| Error::Config(format!("policy has no action for state `{}`", m.state_name(x))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Policy::deterministic(&actions))
}

fn parse_budget(text: &str) -> Result<[usize; 4]> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("budget must be four integers, got `{text}`")))?;
    parts
        .try_into()
        .map_err(|_| Error::Config(format!("budget must be n_check,n_query,n_stop,n_episode, got `{text}`")))
}

fn run(cli: Cli) -> Result<Outcome> {
    let seed_for = |env: &Environment| cli.seed.unwrap_or(env.config.seed);
    match cli.command {
        Command::Simulate { env, policy, episodes, out } => {
            let env = Environment::load(env)?;
            let pi = load_policy(&policy, &env)?;
            let traces = par::with_jobs(cli.jobs, || {
                collect_traces(&env.nmdp, &pi, episodes, env.config.n_episode, seed_for(&env))
            })?;
            write(&out, &print_trace_log(env.nmdp.ap(), &traces))?;
        }
        Command::LearnPassive {
            env,
            traces,
            policy,
            episodes,
            n_check,
            max_experiment_len,
            rho,
            out,
            dot,
            table,
        } => {
            let env = Environment::load(env)?;
            let cfg = PassiveConfig {
                n_check,
                n_episode: env.config.n_episode,
                rho,
                max_experiment_len,
                seed: seed_for(&env),
                ..PassiveConfig::default()
            };
            let traces = match traces {
                Some(path) => parse_trace_log(env.nmdp.ap(), &read(&path)?)?,
                None => {
                    let pi = load_policy(&policy, &env)?;
                    par::with_jobs(cli.jobs, || collect_traces(&env.nmdp, &pi, episodes, cfg.n_episode, cfg.seed))?
                }
            };
            let learned = learn_from_traces(env.nmdp.ap(), &traces, &cfg)?;
            write(&out, &print_prm(&learned.hypothesis))?;
            if let Some(p) = dot {
                write(&p, &to_dot(&learned.hypothesis))?;
            }
            if let Some(p) = table {
                write(&p, &dump_csv(&learned.table))?;
            }
            eprint!("{}", learned.report);
            if !learned.report.complete() {
                return Ok(Outcome::Exhausted);
            }
        }
        Command::LearnActive {
            env,
            budget,
            learn_rate,
            discount,
            explore,
            rho,
            machine_advance,
            max_rounds,
            max_episodes,
            out,
            report,
            dot,
            table,
        } => {
            let env = Environment::load(env)?;
            let [n_check, n_query, n_stop, n_episode] = parse_budget(&budget)?;
            let defaults = LearnerConfig::default();
            let cfg = LearnerConfig {
                n_check: n_check as u64,
                n_query,
                n_stop,
                n_episode,
                learn_rate,
                discount,
                explore,
                seed: seed_for(&env),
                rho,
                machine_advance,
                max_rounds: max_rounds.unwrap_or(defaults.max_rounds),
                max_episodes: max_episodes.unwrap_or(defaults.max_episodes),
                ..defaults
            };
            let start = Instant::now();
            let learned = learn_active(&env.nmdp, &cfg)?;
            eprintln!("wall time: {:.2?}", start.elapsed());
            write(&out, &print_prm(&learned.hypothesis))?;
            match report {
                Some(p) => write(&p, &learned.report.to_string())?,
                None => eprint!("{}", learned.report),
            }
            if let Some(p) = dot {
                write(&p, &to_dot(&learned.hypothesis))?;
            }
            if let Some(p) = table {
                write(&p, &dump_csv(&learned.table))?;
            }
            if learned.report.budget_exhausted {
                return Ok(Outcome::Exhausted);
            }
        }
        Command::EvalEncoding {
            hypothesis,
            truth,
            max_len,
            env,
        } => {
            let h = parse_prm(&read(&hypothesis)?)?;
            let truth = parse_prm(&read(&truth)?)?;
            let env = env.map(Environment::load).transpose()?;
            let domain = match &env {
                Some(e) => WordDomain::Realizable(&e.nmdp),
                None => WordDomain::All,
            };
            let r = encoding_distance(&h, &truth, max_len, domain)?;
            println!("{:?}", r.distance);
            let worst = r.worst.as_ref().map_or("-".to_string(), |w| truth.ap().display_word(w));
            println!("worst: {worst}");
            println!("words: {}", r.words);
            println!("failure_words: {}", r.failure_words);
        }
        Command::Mq {
            env,
            word,
            max_len,
            criterion,
            nodes,
        } => {
            let env = Environment::load(env)?;
            let m = &env.nmdp;
            let w = m.ap().parse_word(&word)?;
            let max_len = max_len.unwrap_or(w.len());
            match brute_force_word_realizability(m, &w, max_len, criterion, nodes) {
                Ok(Some(t)) => {
                    let actions: Vec<&str> = t.actions.iter().map(|&a| m.action_name(a)).collect();
                    let states: Vec<&str> = t.states.iter().map(|&x| m.state_name(x)).collect();
                    println!("actions: {}", actions.join(" "));
                    println!("states: {}", states.join(" "));
                    println!("labels: {}", m.ap().display_word(&t.labels));
                }
                Ok(None) => println!("none"),
                Err(e @ Error::BudgetExceeded { .. }) => {
                    eprintln!("{e}");
                    return Ok(Outcome::Exhausted);
                }
                Err(e) => return Err(e),
            }
        }
        Command::ExportDot { prm, out } => {
            let h = parse_prm(&read(&prm)?)?;
            write(&out, &to_dot(&h))?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Exhausted) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
