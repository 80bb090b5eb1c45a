//! Symmetric ("reduced") distributions for MON_k and the quantities that
//! decide whether the predicate is sketching approximable.
//!
//! A reduced distribution is a pair `(u, v)` of length-`k` vectors: `u_i` is
//! the mass on assignments with `x_1 = 1` and exactly `i` of the remaining
//! `k - 1` coordinates equal to 1, `v_i` the same with `x_1 = -1`.

mod decide;
mod witness;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::rational::{binomial, format_rational, int, parse_rational, pow2, rat, Rational};

pub use decide::{
    build_monarchy_lp, decide_monarchy, hand_k4_certificate, implied_bound, ky1_bound, solve_lp,
    verify_certificate, CertificateCheck, CertificateFile, Ky1Bound, MonarchyDecision, MonarchyLp,
    MonarchyOutcome, Verdict,
};
pub use witness::{comb_identity_residual, verify_witness, witness, WitnessReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedDistribution {
    u: Vec<Rational>,
    v: Vec<Rational>,
}

impl ReducedDistribution {
    /// Validated constructor: equal lengths `k >= 2`, nonnegative, mass 1.
    pub fn new(u: Vec<Rational>, v: Vec<Rational>) -> Result<Self> {
        let d = Self::raw(u, v)?;
        if let Some(msg) = d.invalid_reason() {
            return Err(Error::InvalidConstraint(msg));
        }
        Ok(d)
    }

    /// Only the shape is checked; used to report on candidate vectors that
    /// may fail the distribution conditions.
    pub fn raw(u: Vec<Rational>, v: Vec<Rational>) -> Result<Self> {
        if u.len() != v.len() || u.len() < 2 {
            return Err(Error::InvalidConstraint(format!(
                "u and v must have equal length k >= 2 (got {} and {})",
                u.len(),
                v.len()
            )));
        }
        Ok(Self { u, v })
    }

    /// `u_i = v_i = C(k-1, i) / 2^k`: the uniform distribution on `{-1,1}^k`.
    pub fn uniform(k: usize) -> Self {
        let denom = Rational::from_integer(pow2(k));
        let u: Vec<Rational> = (0..k)
            .map(|i| Rational::from_integer(binomial(k as i64 - 1, i as i64)) / &denom)
            .collect();
        Self { v: u.clone(), u }
    }

    pub fn k(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[Rational] {
        &self.u
    }

    pub fn v(&self) -> &[Rational] {
        &self.v
    }

    /// `(u_0, ..., u_{k-1}, v_0, ..., v_{k-1})`, the LP variable order.
    pub fn to_vector(&self) -> Vec<Rational> {
        self.u.iter().chain(&self.v).cloned().collect()
    }

    pub fn from_vector(x: &[Rational]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidConstraint("odd-length (u, v) vector".into()));
        }
        let (u, v) = x.split_at(x.len() / 2);
        Self::raw(u.to_vec(), v.to_vec())
    }

    pub fn mass(&self) -> Rational {
        self.u.iter().chain(&self.v).sum()
    }

    pub fn invalid_reason(&self) -> Option<String> {
        if let Some(x) = self.u.iter().chain(&self.v).find(|x| x.is_negative()) {
            return Some(format!("negative entry {x}"));
        }
        let mass = self.mass();
        (!mass.is_one()).then(|| format!("total mass {mass} != 1"))
    }

    pub fn is_valid(&self) -> bool {
        self.invalid_reason().is_none()
    }
}

/// `rdist k` followed by `u i p/q` / `v i p/q` lines for nonzero entries.
impl fmt::Display for ReducedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rdist {}", self.k())?;
        for (name, xs) in [("u", &self.u), ("v", &self.v)] {
            for (i, x) in xs.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                writeln!(f, "{name} {i} {}", format_rational(x))?;
            }
        }
        Ok(())
    }
}

/// Parses the text form. The result is shape-checked only.
impl FromStr for ReducedDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
        let k = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["rdist", k] => k
                .parse::<usize>()
                .map_err(|_| Error::parse(line, "bad k"))?,
            _ => return Err(Error::parse(line, "expected `rdist k`")),
        };
        if k < 2 {
            return Err(Error::parse(line, "k must be at least 2"));
        }
        let mut u = vec![Rational::zero(); k];
        let mut v = vec![Rational::zero(); k];
        for (line, text) in lines {
            let parts: Vec<&str> = text.split_whitespace().collect();
            let [side, idx, value] = parts[..] else {
                return Err(Error::parse(line, "expected `u|v index value`"));
            };
            let target = match side {
                "u" => &mut u,
                "v" => &mut v,
                _ => return Err(Error::parse(line, format!("unknown vector {side:?}"))),
            };
            let i: usize = idx
                .parse()
                .ok()
                .filter(|&i| i < k)
                .ok_or_else(|| Error::parse(line, format!("index {idx:?} out of range")))?;
            target[i] = parse_rational(value)
                .ok_or_else(|| Error::parse(line, format!("bad rational {value:?}")))?;
        }
        Self::raw(u, v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalPair {
    pub mu1: Rational,
    pub mu_prime: Rational,
}

/// `μ1 = Σ (u_i - v_i)`, `μ' = Σ (2i/(k-1) - 1)(u_i + v_i)`.
pub fn marginals(d: &ReducedDistribution) -> MarginalPair {
    let k = d.k();
    let mu1 = d.u.iter().zip(&d.v).map(|(a, b)| a - b).sum();
    let mu_prime = (0..k)
        .map(|i| (rat(2 * i as i64, k as i64 - 1) - int(1)) * (&d.u[i] + &d.v[i]))
        .sum();
    MarginalPair { mu1, mu_prime }
}

/// `μ1 (k-2) + μ' (k-1)`, the quantity the yes-side halfspace bounds below by 1.
pub fn ky1_value(m: &MarginalPair, k: usize) -> Rational {
    &m.mu1 * int(k as i64 - 2) + &m.mu_prime * int(k as i64 - 1)
}

pub fn in_ky1_halfspace(m: &MarginalPair, k: usize) -> bool {
    ky1_value(m, k) >= int(1)
}

/// `h` for a point mass on each coordinate of the `(u, v)` vector: entry `i`
/// is the `u_i` bracket, entry `k + i` the `v_i` bracket. `h_D` is the
/// `(u, v)`-weighted sum of these.
pub fn h_basis(k: usize) -> Vec<Polynomial> {
    let p = Polynomial::x();
    let q = Polynomial::linear(int(1), int(-1));
    let p_pow: Vec<Polynomial> = (0..=k).map(|e| p.pow(e)).collect();
    let q_pow: Vec<Polynomial> = (0..=k).map(|e| q.pow(e)).collect();
    let one = Polynomial::one();
    let mut basis = Vec::with_capacity(2 * k);
    for i in 0..k {
        // p(1 - (1-p)^i p^{k-1-i}) + (1-p)^{k-i} p^i
        let escape = &one - &(&q_pow[i] * &p_pow[k - 1 - i]);
        basis.push(&(&p * &escape) + &(&q_pow[k - i] * &p_pow[i]));
    }
    for i in 0..k {
        // (1-p)(1 - (1-p)^i p^{k-1-i}) + (1-p)^{k-1-i} p^{i+1}
        let escape = &one - &(&q_pow[i] * &p_pow[k - 1 - i]);
        basis.push(&(&q * &escape) + &(&q_pow[k - 1 - i] * &p_pow[i + 1]));
    }
    basis
}

/// Probability that a draw from `D`, with each coordinate kept with
/// probability `p` and flipped otherwise, satisfies MON_k.
pub fn h_polynomial(d: &ReducedDistribution) -> Polynomial {
    h_basis(d.k())
        .iter()
        .zip(d.to_vector())
        .filter(|(_, w)| !w.is_zero())
        .fold(Polynomial::zero(), |acc, (b, w)| &acc + &b.scale(&w))
}

/// No-side membership: `h_D ≡ 1/2`. Equality suffices because MON_k is odd,
/// which forces `h(p) + h(1-p) = 1`.
pub fn in_sn_half(d: &ReducedDistribution) -> bool {
    h_polynomial(d).is_constant(&rat(1, 2))
}

#[allow(clippy::too_many_arguments)]
fn condition_ii_terms<T>(
    d: &ReducedDistribution,
    a: &T,
    b: &T,
    pow: impl Fn(&T, usize) -> T,
    scale: impl Fn(&T, &Rational) -> T,
    add: impl Fn(&T, &T) -> T,
    sub: impl Fn(&T, &T) -> T,
    mul: impl Fn(&T, &T) -> T,
) -> T {
    // a = 1/2 + δ, b = 1/2 - δ
    let k = d.k();
    let su: Rational = d.u.iter().sum();
    let sv: Rational = d.v.iter().sum();
    let mut acc = add(&scale(b, &su), &scale(a, &sv));
    for i in 0..k {
        let tu = sub(
            &mul(&pow(b, i), &pow(a, k - i)),
            &mul(&pow(a, i), &pow(b, k - i)),
        );
        acc = add(&acc, &scale(&tu, &d.u[i]));
        let tv = sub(
            &mul(&pow(b, i + 1), &pow(a, k - 1 - i)),
            &mul(&pow(a, i + 1), &pow(b, k - 1 - i)),
        );
        acc = add(&acc, &scale(&tv, &d.v[i]));
    }
    acc
}

/// The three-part δ-expression of the sufficient condition, evaluated exactly.
pub fn verify_condition_ii(d: &ReducedDistribution, delta: &Rational) -> Rational {
    let half = rat(1, 2);
    condition_ii_terms(
        d,
        &(&half + delta),
        &(&half - delta),
        |x: &Rational, e| num_traits::pow(x.clone(), e),
        |x, c| x * c,
        |x, y| x + y,
        |x, y| x - y,
        |x, y| x * y,
    )
}

/// The same expression expanded as a polynomial in δ.
pub fn condition_ii_polynomial(d: &ReducedDistribution) -> Polynomial {
    condition_ii_terms(
        d,
        &Polynomial::linear(rat(1, 2), int(1)),
        &Polynomial::linear(rat(1, 2), int(-1)),
        |x: &Polynomial, e| x.pow(e),
        |x, c| x.scale(c),
        |x, y| x + y,
        |x, y| x - y,
        |x, y| x * y,
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionIii {
    pub p1: Rational,
    pub p_prime: Rational,
    pub holds: bool,
}

/// `p1 = Σ u_i`, `p' = Σ i (u_i + v_i) / (k-1)`, holds iff
/// `p' >= 1 - (k-2)/(k-1) p1`.
pub fn condition_iii_values(d: &ReducedDistribution) -> ConditionIii {
    let k = d.k() as i64;
    let p1: Rational = d.u.iter().sum();
    let p_prime: Rational = (0..d.k())
        .map(|i| int(i as i64) * (&d.u[i] + &d.v[i]))
        .sum::<Rational>()
        / int(k - 1);
    let holds = p_prime >= int(1) - rat(k - 2, k - 1) * &p1;
    ConditionIii { p1, p_prime, holds }
}
