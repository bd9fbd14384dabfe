//! Versioned plain-text MRP format.
//!
//! ```text
//! tabular-mrp v1
//! states 3
//! terminals 2
//! start 0:1
//! transitions 3
//! 0 1 1 0
//! 1 1 0.5 0
//! 1 2 0.5 1
//! end
//! ```
//!
//! Transition lines are `from to probability reward`, sorted by `(from, to)`
//! and listing only non-terminal rows with nonzero probability. Floats use
//! the shortest representation that round-trips. Blank lines and lines
//! starting with `#` are ignored.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::mrp::TabularMRP;
use crate::error::{Error, Result};

pub const FORMAT_HEADER: &str = "tabular-mrp v1";

pub fn write_mrp(mrp: &TabularMRP) -> String {
    let n = mrp.n_states();
    let mut out = String::new();
    writeln!(out, "{FORMAT_HEADER}").unwrap();
    writeln!(out, "states {n}").unwrap();
    let terminals: Vec<String> = mrp.terminals().map(|s| s.to_string()).collect();
    writeln!(
        out,
        "terminals{}{}",
        if terminals.is_empty() { "" } else { " " },
        terminals.join(" ")
    )
    .unwrap();
    let start: Vec<String> = (0..n)
        .filter(|&s| mrp.start_dist()[s] != 0.0)
        .map(|s| format!("{s}:{}", mrp.start_dist()[s]))
        .collect();
    writeln!(out, "start {}", start.join(" ")).unwrap();
    let mut lines = Vec::new();
    for s in (0..n).filter(|&s| !mrp.is_terminal(s)) {
        for t in 0..n {
            let p = mrp.transition()[(s, t)];
            if p != 0.0 {
                lines.push(format!("{s} {t} {p} {}", mrp.reward()[(s, t)]));
            }
        }
    }
    writeln!(out, "transitions {}", lines.len()).unwrap();
    for line in lines {
        writeln!(out, "{line}").unwrap();
    }
    writeln!(out, "end").unwrap();
    out
}

pub fn parse_mrp(text: &str) -> Result<TabularMRP> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            line: text.lines().count() + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })
    };
    let err = |line: usize, msg: String| Error::Parse { line, msg };

    let (ln, header) = next("header")?;
    if header != FORMAT_HEADER {
        return Err(err(ln, format!("expected `{FORMAT_HEADER}`, found `{header}`")));
    }

    let (ln, body) = next("states")?;
    let n: usize = keyword(ln, body, "states")?
        .parse()
        .map_err(|e| err(ln, format!("bad state count: {e}")))?;
    if n == 0 {
        return Err(err(ln, "state count must be positive".into()));
    }
    let state = |ln: usize, tok: &str| -> Result<usize> {
        let s: usize = tok.parse().map_err(|e| err(ln, format!("bad state id `{tok}`: {e}")))?;
        if s >= n {
            return Err(err(ln, format!("state id {s} out of range")));
        }
        Ok(s)
    };
    let number = |ln: usize, tok: &str| -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|e| err(ln, format!("bad number `{tok}`: {e}")))
    };

    let (ln, body) = next("terminals")?;
    let mut terminal = vec![false; n];
    for tok in keyword(ln, body, "terminals")?.split_whitespace() {
        terminal[state(ln, tok)?] = true;
    }

    let (ln, body) = next("start")?;
    let mut start = DVector::zeros(n);
    for tok in keyword(ln, body, "start")?.split_whitespace() {
        let (s, p) = tok
            .split_once(':')
            .ok_or_else(|| err(ln, format!("expected `state:prob`, found `{tok}`")))?;
        start[state(ln, s)?] += number(ln, p)?;
    }

    let (ln, body) = next("transitions")?;
    let count: usize = keyword(ln, body, "transitions")?
        .parse()
        .map_err(|e| err(ln, format!("bad transition count: {e}")))?;
    let mut p = DMatrix::zeros(n, n);
    let mut r = DMatrix::zeros(n, n);
    for _ in 0..count {
        let (ln, body) = next("transition line")?;
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(err(ln, format!("expected `from to prob reward`, found `{body}`")));
        }
        let (s, t) = (state(ln, toks[0])?, state(ln, toks[1])?);
        p[(s, t)] = number(ln, toks[2])?;
        r[(s, t)] = number(ln, toks[3])?;
    }
    let (ln, body) = next("end")?;
    if body != "end" {
        return Err(err(ln, format!("expected `end`, found `{body}`")));
    }
    TabularMRP::new(p, r, terminal, start).map_err(|e| err(ln, e.to_string()))
}

fn keyword<'a>(line: usize, body: &'a str, key: &str) -> Result<&'a str> {
    let rest = body.strip_prefix(key).ok_or_else(|| Error::Parse {
        line,
        msg: format!("expected `{key}`, found `{body}`"),
    })?;
    if !rest.is_empty() && !rest.starts_with(' ') {
        return Err(Error::Parse {
            line,
            msg: format!("expected `{key}`, found `{body}`"),
        });
    }
    Ok(rest.trim())
}
