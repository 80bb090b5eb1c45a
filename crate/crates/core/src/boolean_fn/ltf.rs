use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{check_arity, BooleanFunction};
use crate::error::{Error, Result};
use crate::rational::{clear_denominators, format_rational, int, parse_rational, Rational};

/// `f(x) = sign(sum_i w_i x_i + theta)` with `sign(z) = 1` iff `z > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtfSpec {
    pub weights: Vec<Rational>,
    pub threshold: Rational,
}

impl LtfSpec {
    pub fn new(weights: Vec<Rational>, threshold: Rational) -> Self {
        Self { weights, threshold }
    }

    /// Threshold-zero LTF with integer weights.
    pub fn from_ints(weights: &[i64]) -> Self {
        Self::new(weights.iter().map(|&w| int(w)).collect(), Rational::zero())
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn to_function(&self) -> Result<BooleanFunction> {
        ltf_to_function(self)
    }
}

impl fmt::Display for LtfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ltf {} {}",
            self.arity(),
            format_rational(&self.threshold)
        )?;
        for w in &self.weights {
            write!(f, " {}", format_rational(w))?;
        }
        Ok(())
    }
}

/// Parses `ltf k theta w1 ... wk`.
impl FromStr for LtfSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        if it.next() != Some("ltf") {
            return Err(Error::parse(0, "LTF spec must start with `ltf`"));
        }
        let k: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(0, "missing or bad arity"))?;
        let threshold = it
            .next()
            .and_then(parse_rational)
            .ok_or_else(|| Error::parse(0, "missing or bad threshold"))?;
        let weights = it
            .map(|t| parse_rational(t).ok_or_else(|| Error::parse(0, format!("bad weight {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if weights.len() != k || k == 0 {
            return Err(Error::parse(
                0,
                format!("arity {k} but {} weights given", weights.len()),
            ));
        }
        Ok(Self { weights, threshold })
    }
}

/// MON_k: president weight `k - 2`, citizens weight 1.
pub fn mon(k: usize) -> LtfSpec {
    wmon(k, k - 2)
}

/// WMON_{k,j}: president weight `j`, citizens weight 1.
pub fn wmon(k: usize, j: usize) -> LtfSpec {
    assert!(k >= 1, "arity must be positive");
    let mut w = vec![int(1); k];
    w[0] = int(j as i64);
    LtfSpec::new(w, Rational::zero())
}

pub fn maj(k: usize) -> LtfSpec {
    LtfSpec::new(vec![int(1); k], Rational::zero())
}

/// Evaluates `sum_t w_t x_t` for every input index with two half-tables, so a
/// full sweep costs `O(2^k)` additions.
pub(crate) struct LinearForm {
    lo_bits: usize,
    lo: Vec<i128>,
    hi: Vec<i128>,
}

impl LinearForm {
    /// `None` when the weights are too large for `i128` accumulation.
    pub(crate) fn new(weights: &[BigInt]) -> Option<Self> {
        let mut total = BigInt::zero();
        for w in weights {
            total += w.abs();
        }
        if total.bits() > 120 {
            return None;
        }
        let ws: Vec<i128> = weights.iter().map(|w| w.to_i128().unwrap()).collect();
        let lo_bits = ws.len().div_ceil(2);
        Some(Self {
            lo_bits,
            lo: half_table(&ws[..lo_bits]),
            hi: half_table(&ws[lo_bits..]),
        })
    }

    #[inline]
    pub(crate) fn value(&self, m: usize) -> i128 {
        self.lo[m & ((1 << self.lo_bits) - 1)] + self.hi[m >> self.lo_bits]
    }
}

fn half_table(ws: &[i128]) -> Vec<i128> {
    let mut tab = vec![0i128; 1 << ws.len()];
    tab[0] = -ws.iter().sum::<i128>();
    for m in 1..tab.len() {
        let low = m.trailing_zeros() as usize;
        tab[m] = tab[m & (m - 1)] + 2 * ws[low];
    }
    tab
}

pub fn ltf_to_function(spec: &LtfSpec) -> Result<BooleanFunction> {
    let k = spec.arity();
    check_arity(k)?;
    let mut all = spec.weights.clone();
    all.push(spec.threshold.clone());
    let scaled = clear_denominators(&all);
    let (ws, theta) = scaled.split_at(k);
    let theta = &theta[0];
    if let (Some(form), Some(t)) = (LinearForm::new(ws), theta.to_i128()) {
        if t.unsigned_abs() < 1u128 << 120 {
            return BooleanFunction::from_fn(k, |m| form.value(m) + t > 0);
        }
    }
    let mut x = vec![0i8; k];
    BooleanFunction::from_fn(k, |m| {
        super::decode_into(m, &mut x);
        let z: BigInt = ws
            .iter()
            .zip(&x)
            .map(|(w, &s)| if s > 0 { w.clone() } else { -w })
            .sum::<BigInt>()
            + theta;
        z.is_positive()
    })
}

/// Threshold zero and no sign pattern of the weights sums to zero.
///
/// A signed sum vanishes iff some subset of `|w|` sums to half the total, which
/// is checked by meet-in-the-middle over subset sums.
pub fn is_balanced_ltf(spec: &LtfSpec) -> bool {
    if !spec.threshold.is_zero() || spec.weights.is_empty() {
        return false;
    }
    let ws: Vec<BigInt> = clear_denominators(&spec.weights)
        .into_iter()
        .map(|w| w.abs())
        .collect();
    let total: BigInt = ws.iter().sum();
    if total.is_odd() {
        return true;
    }
    let target = total / 2;
    let (left, right) = ws.split_at(ws.len() / 2);
    let left_sums: HashSet<BigInt> = subset_sums(left).into_iter().collect();
    !subset_sums(right)
        .into_iter()
        .any(|s| left_sums.contains(&(&target - s)))
}

fn subset_sums(ws: &[BigInt]) -> Vec<BigInt> {
    let mut sums = vec![BigInt::zero()];
    for w in ws {
        let extra: Vec<BigInt> = sums.iter().map(|s| s + w).collect();
        sums.extend(extra);
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_fn::decode;
    use crate::rational::rat;

    fn brute_balanced(w: &[i64]) -> bool {
        (0..1usize << w.len()).all(|m| {
            decode(m, w.len())
                .iter()
                .zip(w)
                .map(|(&x, &wi)| i64::from(x) * wi)
                .sum::<i64>()
                != 0
        })
    }

    #[test]
    fn dictator_and_ties() {
        let d = ltf_to_function(&LtfSpec::from_ints(&[1])).unwrap();
        assert!(d.eval(&[1]));
        assert!(!d.eval(&[-1]));
        let tie = ltf_to_function(&LtfSpec::from_ints(&[1, 1])).unwrap();
        assert!(!tie.eval(&[1, -1]));
        assert!(tie.eval(&[1, 1]));
    }

    #[test]
    fn mon5_truth_table() {
        let f = ltf_to_function(&LtfSpec::from_ints(&[3, 1, 1, 1, 1])).unwrap();
        // President wins unless all four citizens vote against.
        for m in 0..32usize {
            let x = decode(m, 5);
            let citizens_against = x[1..].iter().all(|&c| c != x[0]);
            assert_eq!(f.get(m), (x[0] > 0) != citizens_against, "m = {m}");
        }
        assert_eq!(f, ltf_to_function(&mon(5)).unwrap());
    }

    #[test]
    fn rational_weights_and_threshold() {
        let spec = LtfSpec::new(vec![rat(1, 2), rat(1, 3)], rat(-1, 6));
        let f = ltf_to_function(&spec).unwrap();
        // z = x1/2 + x2/3 - 1/6: (1,1)=2/3, (1,-1)=0, (-1,1)=-1/3, (-1,-1)=-1
        assert!(f.eval(&[1, 1]));
        assert!(!f.eval(&[1, -1]));
        assert!(!f.eval(&[-1, 1]));
        assert!(!f.eval(&[-1, -1]));
    }

    #[test]
    fn huge_weights_use_exact_fallback() {
        let big = Rational::from_integer(BigInt::from(1) << 200);
        let spec = LtfSpec::new(vec![big.clone(), big - int(1)], Rational::zero());
        let f = ltf_to_function(&spec).unwrap();
        assert!(f.eval(&[1, -1]));
        assert!(!f.eval(&[-1, 1]));
    }

    #[test]
    fn balancedness_examples() {
        assert!(!is_balanced_ltf(&LtfSpec::from_ints(&[1, 1])));
        assert!(is_balanced_ltf(&LtfSpec::from_ints(&[3, 1, 1, 1, 1])));
        assert!(is_balanced_ltf(&LtfSpec::from_ints(&[2, 1, 1, 1])));
        assert!(!is_balanced_ltf(&LtfSpec::new(vec![int(1)], int(1))));
        assert!(!is_balanced_ltf(&LtfSpec::from_ints(&[0, 0])));
    }

    #[test]
    fn balancedness_matches_enumeration() {
        for a in 0..6 {
            for b in 0..6 {
                for c in -5..6 {
                    for d in 0..4 {
                        let w = [a, b, c, d];
                        assert_eq!(
                            is_balanced_ltf(&LtfSpec::from_ints(&w)),
                            brute_balanced(&w),
                            "{w:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn balanced_ltf_is_odd() {
        let f = ltf_to_function(&LtfSpec::from_ints(&[5, 4, 3, 1])).unwrap();
        let mask = f.len() - 1;
        assert!((0..f.len()).all(|m| f.get(m) != f.get(!m & mask)));
    }

    #[test]
    fn families() {
        assert_eq!(mon(5), wmon(5, 3));
        assert_eq!(wmon(8, 2), LtfSpec::from_ints(&[2, 1, 1, 1, 1, 1, 1, 1]));
        assert_eq!(maj(3), LtfSpec::from_ints(&[1, 1, 1]));
    }

    #[test]
    fn text_form_round_trip() {
        let spec = LtfSpec::new(vec![rat(7, 16), rat(-1, 16), int(2)], rat(1, 3));
        let text = spec.to_string();
        assert_eq!(text, "ltf 3 1/3 7/16 -1/16 2");
        assert_eq!(text.parse::<LtfSpec>().unwrap(), spec);
        assert!("ltf 2 0 1".parse::<LtfSpec>().is_err());
        assert!("table 2 0 1".parse::<LtfSpec>().is_err());
    }
}
