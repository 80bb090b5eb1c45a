use clap::Args;
use serde::Serialize;

use ltfsketch::boolean_fn::{maj, mon, wmon, LtfSpec};
use ltfsketch::csp::Predicate;
use ltfsketch::rational::{int, parse_rational};

/// Ways to name a predicate on the command line. At most one may be given.
#[derive(Args, Clone, Debug, Default, Serialize)]
#[group(multiple = false)]
pub struct PredicateArgs {
    /// `maj K`, `mon K`, `wmon K J`, `dict`, `ltf k θ w..`, `table <hex>`,
    /// or bare weights `w1 .. wk` (threshold 0)
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    pub predicate: Option<String>,
    /// Majority on K variables
    #[arg(long, value_name = "K")]
    pub maj: Option<usize>,
    /// Monarchy on K variables
    #[arg(long, value_name = "K")]
    pub mon: Option<usize>,
    /// Weak monarchy with K variables and president weight J
    #[arg(long, num_args = 2, value_names = ["K", "J"])]
    pub wmon: Option<Vec<usize>>,
    /// LTF as `ltf k θ w..` or bare weights
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    pub ltf: Option<String>,
    /// Truth table in hex, arity inferred from the digit count
    #[arg(long, value_name = "HEX")]
    pub table: Option<String>,
}

/// Named predicates that need no truth table, so their arity may exceed
/// the table limit.
pub enum Named {
    Wmon(usize, usize),
    Other,
}

impl PredicateArgs {
    pub fn is_given(&self) -> bool {
        self.predicate.is_some()
            || self.maj.is_some()
            || self.mon.is_some()
            || self.wmon.is_some()
            || self.ltf.is_some()
            || self.table.is_some()
    }

    pub fn named(&self) -> Named {
        match &self.wmon {
            Some(kj) => Named::Wmon(kj[0], kj[1]),
            None => {
                let words: Vec<&str> = self
                    .predicate
                    .as_deref()
                    .unwrap_or("")
                    .split_whitespace()
                    .collect();
                match words[..] {
                    ["wmon", k, j] => match (k.parse(), j.parse()) {
                        (Ok(k), Ok(j)) => Named::Wmon(k, j),
                        _ => Named::Other,
                    },
                    _ => Named::Other,
                }
            }
        }
    }

    /// Arity requested by a named family, before any table is built.
    pub fn requested_arity(&self) -> Option<usize> {
        if let Named::Wmon(k, _) = self.named() {
            return Some(k);
        }
        self.maj.or(self.mon).or_else(|| {
            let mut it = self.predicate.as_deref()?.split_whitespace();
            match it.next()? {
                "maj" | "mon" => it.next()?.parse().ok(),
                _ => None,
            }
        })
    }

    pub fn resolve(&self) -> Result<Predicate, String> {
        let err = |e: ltfsketch::Error| e.to_string();
        if let Some(k) = self.maj {
            return Predicate::from_ltf(maj(k)).map_err(err);
        }
        if let Some(k) = self.mon {
            return Predicate::from_ltf(mon(k)).map_err(err);
        }
        if let Some(kj) = &self.wmon {
            return wmon_predicate(kj[0], kj[1]);
        }
        if let Some(s) = &self.ltf {
            return Predicate::from_ltf(parse_ltf(s)?).map_err(err);
        }
        if let Some(hex) = &self.table {
            return format!("table {hex}").parse().map_err(err);
        }
        match &self.predicate {
            Some(s) => parse_predicate(s),
            None => Err("no predicate given".into()),
        }
    }
}

fn wmon_predicate(k: usize, j: usize) -> Result<Predicate, String> {
    if j == 0 || j >= k || !(k + j).is_multiple_of(2) {
        return Err(format!(
            "wmon needs 0 < j < k with k + j even, got k={k} j={j}"
        ));
    }
    Predicate::from_ltf(wmon(k, j)).map_err(|e| e.to_string())
}

/// `ltf k θ w..` or whitespace-separated weights with threshold 0.
pub fn parse_ltf(s: &str) -> Result<LtfSpec, String> {
    let s = s.trim();
    if s.starts_with("ltf") {
        return s.parse().map_err(|e: ltfsketch::Error| e.to_string());
    }
    let weights = s
        .split_whitespace()
        .map(|t| parse_rational(t).ok_or_else(|| format!("bad weight {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if weights.is_empty() {
        return Err("empty weight list".into());
    }
    Ok(LtfSpec::new(weights, int(0)))
}

pub fn parse_predicate(s: &str) -> Result<Predicate, String> {
    let mut it = s.split_whitespace();
    let head = it.next().ok_or("empty predicate")?;
    let rest: Vec<&str> = it.collect();
    let num = |i: usize| -> Result<usize, String> {
        rest.get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("`{head}` needs an integer argument"))
    };
    let err = |e: ltfsketch::Error| e.to_string();
    match head {
        "maj" => Predicate::from_ltf(maj(num(0)?)).map_err(err),
        "mon" => Predicate::from_ltf(mon(num(0)?)).map_err(err),
        "wmon" => wmon_predicate(num(0)?, num(1)?),
        "dict" => Predicate::from_ltf(LtfSpec::from_ints(&[1])).map_err(err),
        "table" => s.parse().map_err(err),
        _ => Predicate::from_ltf(parse_ltf(s)?).map_err(err),
    }
}
