//! Versioned text format for model banks.
//!
//! ```text
//! trajsign-model v1
//! # free-form metadata lines
//! bank classes=2 dims=5
//! class sign=1 states=12 mixtures=3 dims=5
//! initial <q reals>
//! transition <q reals>            (q lines, one per source state)
//! state 0
//! component weight=<real>
//! mean <d reals>
//! covariance <d reals>            (d lines, one per matrix row)
//! ...
//! end
//! ```
//!
//! Reals are written with 17 significant digits so a round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::classify::ModelBank;
use crate::error::{Error, Result};
use crate::gmm::{Gaussian, Gmm};
use crate::hmm::Hmm;

pub const MAGIC: &str = "trajsign-model v1";

fn push_reals(s: &mut String, key: &str, values: &[f64]) {
    s.push_str(key);
    for v in values {
        write!(s, " {v:.16e}").unwrap();
    }
    s.push('\n');
}

/// Serializes a bank; each `metadata` entry becomes a `# ` comment line.
pub fn bank_to_string(bank: &ModelBank, metadata: &[String]) -> String {
    let mut s = format!("{MAGIC}\n");
    for m in metadata {
        writeln!(s, "# {m}").unwrap();
    }
    writeln!(s, "bank classes={} dims={}", bank.len(), bank.dims()).unwrap();
    for (code, model) in bank.models() {
        let q = model.num_states();
        let d = model.dims();
        let m = model.emissions()[0].num_components();
        writeln!(s, "class sign={code} states={q} mixtures={m} dims={d}").unwrap();
        push_reals(&mut s, "initial", model.initial());
        for row in model.transitions().chunks_exact(q) {
            push_reals(&mut s, "transition", row);
        }
        for (j, e) in model.emissions().iter().enumerate() {
            writeln!(s, "state {j}").unwrap();
            for (w, g) in e.weights().iter().zip(e.components()) {
                writeln!(s, "component weight={w:.16e}").unwrap();
                push_reals(&mut s, "mean", g.mean());
                for row in g.covariance().chunks_exact(d) {
                    push_reals(&mut s, "covariance", row);
                }
            }
        }
    }
    s.push_str("end\n");
    s
}

pub fn write_bank(path: &Path, bank: &ModelBank, metadata: &[String]) -> Result<()> {
    fs::write(path, bank_to_string(bank, metadata))?;
    Ok(())
}

pub fn read_bank(path: &Path) -> Result<ModelBank> {
    parse_bank(&fs::read_to_string(path).map_err(Error::at(path))?)
        .map_err(|(line, msg)| Error::parse(path, line, msg))
}

type ParseResult<T> = std::result::Result<T, (usize, String)>;

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let iter: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self {
            inner: iter.peekable(),
            last: 0,
        }
    }

    fn next(&mut self, keyword: &str) -> ParseResult<(usize, Vec<&'a str>)> {
        let (n, line) = self.inner.next().ok_or((
            self.last,
            format!("unexpected end of file, expected '{keyword}'"),
        ))?;
        self.last = n;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some(k) if k == keyword => Ok((n, tokens.collect())),
            other => Err((
                n,
                format!("expected '{keyword}', found '{}'", other.unwrap_or("")),
            )),
        }
    }

    fn reals(&mut self, keyword: &str, count: usize) -> ParseResult<Vec<f64>> {
        let (n, tokens) = self.next(keyword)?;
        if tokens.len() != count {
            return Err((
                n,
                format!("'{keyword}' needs {count} values, found {}", tokens.len()),
            ));
        }
        tokens
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| (n, format!("bad number '{t}': {e}")))
            })
            .collect()
    }
}

fn attr<T: std::str::FromStr>(n: usize, tokens: &[&str], key: &str) -> ParseResult<T> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key)?.strip_prefix('='))
        .ok_or((n, format!("missing {key}=")))?
        .parse()
        .map_err(|_| (n, format!("bad value for {key}")))
}

pub fn parse_bank(text: &str) -> ParseResult<ModelBank> {
    let mut first = text.lines().enumerate().find(|(_, l)| !l.trim().is_empty());
    match first.take() {
        Some((_, l)) if l.trim() == MAGIC => {}
        Some((i, _)) => return Err((i + 1, format!("expected '{MAGIC}'"))),
        None => return Err((1, "empty model file".into())),
    }
    let mut lines = Lines::new(text);
    lines.inner.next();
    let (n, tokens) = lines.next("bank")?;
    let classes: usize = attr(n, &tokens, "classes")?;
    let mut models = Vec::with_capacity(classes);
    for _ in 0..classes {
        let (n, tokens) = lines.next("class")?;
        let code: u32 = attr(n, &tokens, "sign")?;
        let q: usize = attr(n, &tokens, "states")?;
        let m: usize = attr(n, &tokens, "mixtures")?;
        let d: usize = attr(n, &tokens, "dims")?;
        if q == 0 || m == 0 || d == 0 {
            return Err((n, "states, mixtures and dims must be positive".into()));
        }
        let initial = lines.reals("initial", q)?;
        let mut transitions = Vec::with_capacity(q * q);
        for _ in 0..q {
            transitions.extend(lines.reals("transition", q)?);
        }
        let mut emissions = Vec::with_capacity(q);
        for j in 0..q {
            let (n, tokens) = lines.next("state")?;
            if tokens.first().and_then(|t| t.parse::<usize>().ok()) != Some(j) {
                return Err((n, format!("expected state {j}")));
            }
            let mut weights = Vec::with_capacity(m);
            let mut comps = Vec::with_capacity(m);
            for _ in 0..m {
                let (n, tokens) = lines.next("component")?;
                weights.push(attr::<f64>(n, &tokens, "weight")?);
                let mean = lines.reals("mean", d)?;
                let mut cov = Vec::with_capacity(d * d);
                for _ in 0..d {
                    cov.extend(lines.reals("covariance", d)?);
                }
                // stored covariances already honour the training floor; re-flooring would perturb them
                comps.push(Gaussian::with_floor(mean, cov, 0.0).map_err(|e| (n, e.to_string()))?);
            }
            emissions.push(Gmm::new(weights, comps).map_err(|e| (n, e.to_string()))?);
        }
        let model = Hmm::new(initial, transitions, emissions).map_err(|e| (n, e.to_string()))?;
        models.push((code, model));
    }
    lines.next("end")?;
    ModelBank::new(models).map_err(|e| (lines.last, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank() -> ModelBank {
        let g = |m: f64, v: f64| Gaussian::new(vec![m, -m], vec![v, 0.1, 0.1, v]).unwrap();
        let e = Gmm::new(vec![0.25, 0.75], vec![g(0.1, 1.0), g(1.0 / 3.0, 2.0)]).unwrap();
        let h = Hmm::new(
            vec![0.3, 0.7],
            vec![0.9, 0.1, 1.0 / 3.0, 2.0 / 3.0],
            vec![e.clone(), e],
        )
        .unwrap();
        ModelBank::new(vec![(2, h.clone()), (5, h)]).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let b = bank();
        let text = bank_to_string(&b, &["seed=3".into()]);
        assert!(text.starts_with("trajsign-model v1\n# seed=3\nbank classes=2 dims=2\n"));
        assert_eq!(parse_bank(&text).unwrap(), b);
        assert_eq!(
            bank_to_string(&parse_bank(&text).unwrap(), &["seed=3".into()]),
            text
        );
    }

    #[test]
    fn truncated_file_reports_a_line() {
        let text = bank_to_string(&bank(), &[]);
        let cut: String = text.lines().take(9).map(|l| format!("{l}\n")).collect();
        let (line, msg) = parse_bank(&cut).unwrap_err();
        assert!(line >= 9, "{line}: {msg}");
        assert!(parse_bank("something else\n").is_err());
    }
}
