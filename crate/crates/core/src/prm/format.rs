//! Plain-text machine format.
//!
//! ```text
//! ap: c,o,*
//! gamma: 0,1
//! states: y0,y1
//! init: y0
//! y0 --c/0--> y1 : 1
//! ```
//!
//! `states:` is optional on input; without it states are numbered in order of
//! first appearance, starting with the initial state. `gamma:` is optional too
//! and defaults to the rewards used by transitions plus 0. Lines starting with
//! `#` are comments.

use std::fmt::Write as _;

use super::{Prm, PrmBuilder};
use crate::error::{Error, Result};
use crate::label::{AtomicPropositions, Reward};

pub fn print_prm(prm: &Prm) -> String {
    let ap = prm.ap();
    let mut out = String::new();
    let _ = writeln!(out, "ap: {}", ap.names().join(","));
    let gamma: Vec<String> = prm.gamma().iter().map(Reward::to_string).collect();
    let _ = writeln!(out, "gamma: {}", gamma.join(","));
    let _ = writeln!(out, "states: {}", prm.state_names().join(","));
    let _ = writeln!(out, "init: {}", prm.state_name(prm.init()));
    for (y, l, edges) in prm.defined_transitions() {
        for e in edges {
            let _ = writeln!(
                out,
                "{} --{}/{}--> {} : {}",
                prm.state_name(y),
                ap.display_label(l),
                e.reward,
                prm.state_name(e.target),
                e.prob
            );
        }
    }
    out
}

struct RawEdge {
    line: usize,
    from: String,
    label: String,
    reward: Reward,
    to: String,
    prob: f64,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn split_list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_edge(line: usize, text: &str) -> Result<RawEdge> {
    let (lhs, prob) = text
        .rsplit_once(" : ")
        .ok_or_else(|| perr(line, "expected ` : <prob>`"))?;
    let prob: f64 = prob
        .trim()
        .parse()
        .map_err(|_| perr(line, format!("bad probability `{}`", prob.trim())))?;
    let (from, rest) = lhs
        .split_once(" --")
        .ok_or_else(|| perr(line, "expected `<state> --<label>/<reward>--> <state>`"))?;
    let (mid, to) = rest
        .rsplit_once("-->")
        .ok_or_else(|| perr(line, "missing `-->`"))?;
    let (label, reward) = mid
        .split_once('/')
        .ok_or_else(|| perr(line, "expected `<label>/<reward>`"))?;
    let reward = Reward::parse(reward).map_err(|_| perr(line, format!("bad reward `{reward}`")))?;
    let to = to.trim();
    if to.is_empty() {
        return Err(perr(line, "missing target state"));
    }
    Ok(RawEdge {
        line,
        from: from.trim().to_string(),
        label: label.trim().to_string(),
        reward,
        to: to.to_string(),
        prob,
    })
}

pub fn parse_prm(text: &str) -> Result<Prm> {
    let mut ap = None;
    let mut gamma: Option<Vec<Reward>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut init: Option<String> = None;
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.contains("-->") {
            edges.push(parse_edge(line, t)?);
            continue;
        }
        let (key, val) = t
            .split_once(':')
            .ok_or_else(|| perr(line, format!("unrecognised line `{t}`")))?;
        match key.trim() {
            "ap" => {
                ap = Some(AtomicPropositions::new(split_list(val)).map_err(|e| perr(line, e.to_string()))?)
            }
            "gamma" => {
                gamma = Some(
                    split_list(val)
                        .into_iter()
                        .map(|g| Reward::parse(g).map_err(|_| perr(line, format!("bad reward `{g}`"))))
                        .collect::<Result<_>>()?,
                )
            }
            "states" => states = Some(split_list(val).into_iter().map(String::from).collect()),
            "init" => init = Some(val.trim().to_string()),
            k => return Err(perr(line, format!("unknown header `{k}`"))),
        }
    }

    let ap = ap.ok_or_else(|| perr(0, "missing `ap:` header"))?;
    let init = init.ok_or_else(|| perr(0, "missing `init:` header"))?;
    let gamma = gamma.unwrap_or_else(|| {
        let mut g: Vec<Reward> = edges.iter().map(|e| e.reward).collect();
        g.push(Reward::ZERO);
        g
    });

    let mut b = PrmBuilder::new(ap.clone(), gamma);
    let explicit = states.is_some();
    for s in states.unwrap_or_default() {
        b.add_state(s);
    }
    let index = |b: &mut PrmBuilder, name: &str, line: usize| -> Result<usize> {
        match b.state_index(name) {
            Some(i) => Ok(i),
            None if explicit => Err(perr(line, format!("undeclared state `{name}`"))),
            None => Ok(b.add_state(name)),
        }
    };
    let y0 = index(&mut b, &init, 0)?;
    b.set_init(y0);
    for e in edges {
        let from = index(&mut b, &e.from, e.line)?;
        let to = index(&mut b, &e.to, e.line)?;
        let label = ap.parse_label(&e.label).map_err(|err| perr(e.line, err.to_string()))?;
        b.add_edge(from, label, to, e.prob, e.reward);
    }
    b.build()
}
