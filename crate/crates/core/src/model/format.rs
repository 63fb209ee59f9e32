//! Policy text format, version 1.
//!
//! ```text
//! N 3 CLOSURE linear 2
//! ..B
//! .R
//! R
//! ```
//!
//! The header gives the horizon and the closure (`linear <c>` or `forced`).
//! Row `t` (for `t = 0..N`) lists the colors of `h = 0..N-t`.

use super::policy::{Closure, Color, Policy};
use crate::error::{Error, Result};

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl Policy {
    pub fn to_text(&self) -> String {
        let n = self.horizon();
        let closure = match self.closure() {
            Closure::LinearTail { c } => format!("linear {c}"),
            Closure::ForcedStop => "forced".to_string(),
        };
        let mut out = format!("N {n} CLOSURE {closure}\n");
        for t in 0..n {
            out.extend((0..n - t).map(|h| self.color_at(h, t).symbol()));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Policy> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let (_, header) = lines.next().ok_or_else(|| parse_error(1, "empty input"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n, closure) = match fields.as_slice() {
            ["N", n, "CLOSURE", rest @ ..] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| parse_error(1, format!("bad horizon {n:?}")))?;
                let closure = match rest {
                    ["forced"] => Closure::ForcedStop,
                    ["linear", c] => {
                        let c: u32 = c
                            .parse()
                            .map_err(|_| parse_error(1, format!("bad threshold {c:?}")))?;
                        if c == 0 {
                            return Err(parse_error(1, "linear threshold must be at least 1"));
                        }
                        Closure::LinearTail { c }
                    }
                    _ => return Err(parse_error(1, "closure must be `linear <c>` or `forced`")),
                };
                (n, closure)
            }
            _ => return Err(parse_error(1, "expected header `N <n> CLOSURE <linear c | forced>`")),
        };

        let mut rows: Vec<Vec<Color>> = Vec::with_capacity(n);
        for t in 0..n {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_error(t + 2, format!("missing row for t = {t}")))?;
            let row = line
                .chars()
                .map(|ch| {
                    Color::from_symbol(ch)
                        .ok_or_else(|| parse_error(line_no, format!("unexpected character {ch:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n - t {
                return Err(parse_error(
                    line_no,
                    format!("row t = {t} must have {} cells, found {}", n - t, row.len()),
                ));
            }
            rows.push(row);
        }
        if let Some((line_no, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(parse_error(line_no, format!("trailing content {line:?}")));
        }
        Policy::from_fn(n, closure, |h, t| rows[t][h])
    }
}
