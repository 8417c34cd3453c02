//! Trace logs: one episode per line, `label;reward` pairs joined by `;`.

use crate::error::{Error, Result};
use crate::label::{AtomicPropositions, Label, Reward};

pub type Trace = Vec<(Label, Reward)>;

pub fn print_trace_log(ap: &AtomicPropositions, traces: &[Trace]) -> String {
    let mut out = String::new();
    for t in traces {
        let fields: Vec<String> = t
            .iter()
            .map(|(l, r)| format!("{};{}", ap.display_label(*l), r))
            .collect();
        out.push_str(&fields.join(";"));
        out.push('\n');
    }
    out
}

/// Blank lines are empty episodes; lines starting with `#` are skipped.
pub fn parse_trace_log(ap: &AtomicPropositions, text: &str) -> Result<Vec<Trace>> {
    let mut traces = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            traces.push(Vec::new());
            continue;
        }
        let fields: Vec<&str> = line.split(';').collect();
        if fields.len() % 2 != 0 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected alternating label and reward fields".into(),
            });
        }
        let trace = fields
            .chunks(2)
            .map(|p| {
                let l = ap.parse_label(p[0]).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
                let r = Reward::parse(p[1]).map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad reward `{}`", p[1]),
                })?;
                Ok((l, r))
            })
            .collect::<Result<Trace>>()?;
        traces.push(trace);
    }
    Ok(traces)
}
