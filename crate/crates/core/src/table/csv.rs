//! Table dumps: `word,reward,count,sample` rows preceded by `#` lines holding
//! the propositions, `S` and `E`. The empty word is the empty field.

use std::fmt::Write as _;

use super::ObservationTable;
use crate::error::{Error, Result};
use crate::label::{AtomicPropositions, Reward};

pub fn dump_csv(table: &ObservationTable) -> String {
    let ap = table.ap();
    let words = |set: &indexmap::IndexSet<crate::label::Word>| {
        set.iter().map(|w| ap.display_word(w)).collect::<Vec<_>>().join(",")
    };
    let mut out = String::new();
    let _ = writeln!(out, "# ap: {}", ap.names().join(","));
    let _ = writeln!(out, "# S: {}", words(table.s()));
    let _ = writeln!(out, "# E: {}", words(table.e()));
    out.push_str("word,reward,count,sample\n");
    for (w, f, sample) in table.recorded_words() {
        let w = ap.display_word(&w);
        if f.is_empty() {
            if sample > 0 {
                let _ = writeln!(out, "{w},,0,{sample}");
            }
            continue;
        }
        for (g, n) in f.iter() {
            let _ = writeln!(out, "{w},{g},{n},{sample}");
        }
    }
    out
}

pub fn load_csv(text: &str) -> Result<ObservationTable> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut ap: Option<AtomicPropositions> = None;
    let mut s_line = None;
    let mut e_line = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(meta) = line.strip_prefix("# ") {
            let (k, v) = meta.split_once(": ").unwrap_or((meta.trim_end_matches(':'), ""));
            match k {
                "ap" => {
                    let names: Vec<&str> = v.split(',').filter(|s| !s.is_empty()).collect();
                    ap = Some(AtomicPropositions::new(names).map_err(|e| perr(n, e.to_string()))?);
                }
                "S" => s_line = Some((n, v.to_string())),
                "E" => e_line = Some((n, v.to_string())),
                _ => {}
            }
            continue;
        }
        if line.is_empty() || line == "word,reward,count,sample" {
            continue;
        }
        rows.push((n, line));
    }
    let ap = ap.ok_or_else(|| perr(0, "missing `# ap:` line".into()))?;
    let mut t = ObservationTable::new(ap.clone());
    for (n, line) in [s_line, e_line].into_iter().flatten() {
        let is_s = text.lines().nth(n - 1).is_some_and(|l| l.starts_with("# S"));
        for w in line.split(',') {
            let w = ap.parse_word(w).map_err(|e| perr(n, e.to_string()))?;
            if is_s {
                t.add_s(w);
            } else {
                t.add_e(w);
            }
        }
    }
    for (n, line) in rows {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(perr(n, format!("expected 4 fields, got {}", f.len())));
        }
        let w = ap.parse_word(f[0]).map_err(|e| perr(n, e.to_string()))?;
        let count: u64 = f[2].parse().map_err(|_| perr(n, format!("bad count `{}`", f[2])))?;
        let sample: u64 = f[3].parse().map_err(|_| perr(n, format!("bad sample `{}`", f[3])))?;
        let reward = if f[1].is_empty() {
            None
        } else {
            Some(Reward::parse(f[1]).map_err(|_| perr(n, format!("bad reward `{}`", f[1])))?)
        };
        t.load_entry(&w, reward, count, sample);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{Label, Word};

    #[test]
    fn dump_and_load_round_trip() {
        let ap = AtomicPropositions::new(["c", "o"]).unwrap();
        let c = ap.parse_label("c").unwrap();
        let o = ap.parse_label("o").unwrap();
        let mut t = ObservationTable::new(ap.clone());
        t.record(&[(c, Reward::ZERO), (o, Reward::ONE)]);
        t.record(&[(c, Reward::ZERO), (o, Reward::ZERO)]);
        t.record(&[(Label::EMPTY, Reward(0.5))]);
        t.add_s(Word::from(vec![c]));
        t.add_e(Word::from(vec![Label::EMPTY]));
        let text = dump_csv(&t);
        assert!(text.contains("\nc;o,0,1,2\n"));
        assert!(text.contains("\n,,0,3\n"));
        let back = load_csv(&text).unwrap();
        assert_eq!(dump_csv(&back), text);
        assert_eq!(back.total_samples(), t.total_samples());
        assert_eq!(back.s(), t.s());
        assert_eq!(back.e(), t.e());
    }
}
