//! Weighted Max-CSP(f) instances over Boolean variables.
//!
//! Variables are 0-based in the API and 1-based in the text format.
//! Assignments follow the truth-table convention: bit `ℓ` set means
//! `σ_ℓ = +1`.

mod format;
mod generate;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::boolean_fn::{ltf_to_function, BooleanFunction, LtfSpec};
use crate::error::{Error, Result};
use crate::rational::Rational;

pub use format::{read_instance, write_instance, InstanceReader};
pub use generate::{planted_instance, random_assignment, random_instance};

/// Largest `n` the exhaustive optimum search accepts.
pub const MAX_BRUTE_FORCE_VARS: usize = 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    indices: Vec<usize>,
    /// `+1` or `-1` per position.
    signs: Vec<i8>,
    weight: Rational,
}

impl Constraint {
    pub fn new(indices: Vec<usize>, signs: Vec<i8>, weight: Rational) -> Result<Self> {
        if indices.len() != signs.len() || indices.is_empty() {
            return Err(Error::InvalidConstraint(format!(
                "{} indices but {} signs",
                indices.len(),
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidConstraint("signs must be +1 or -1".into()));
        }
        if weight.is_negative() {
            return Err(Error::InvalidConstraint(format!(
                "negative weight {weight}"
            )));
        }
        for (a, i) in indices.iter().enumerate() {
            if indices[..a].contains(i) {
                return Err(Error::InvalidConstraint(format!(
                    "repeated variable {}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            indices,
            signs,
            weight,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn arity(&self) -> usize {
        self.indices.len()
    }

    /// Truth-table index of `b ⊙ σ|_j` for a packed assignment.
    #[inline]
    fn local_index(&self, sigma: &Assignment) -> usize {
        self.indices
            .iter()
            .zip(&self.signs)
            .enumerate()
            .fold(0, |acc, (t, (&j, &s))| {
                acc | (usize::from(sigma.get(j) == (s > 0)) << t)
            })
    }
}

/// The predicate as written: an explicit truth table or an LTF spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredicateSpec {
    Table,
    Ltf(LtfSpec),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    spec: PredicateSpec,
    function: BooleanFunction,
}

impl Predicate {
    pub fn from_function(function: BooleanFunction) -> Self {
        Self {
            spec: PredicateSpec::Table,
            function,
        }
    }

    pub fn from_ltf(spec: LtfSpec) -> Result<Self> {
        let function = ltf_to_function(&spec)?;
        Ok(Self {
            spec: PredicateSpec::Ltf(spec),
            function,
        })
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn spec(&self) -> &PredicateSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.function.arity()
    }

    /// Parses `table <hex>` (arity taken from `k`) or `ltf k θ w...`.
    pub fn parse(k: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(hex) = s.strip_prefix("table") {
            let f = BooleanFunction::from_hex(k, hex.trim())?;
            return Ok(Self::from_function(f));
        }
        let p = Self::from_ltf(s.parse::<LtfSpec>()?)?;
        if p.arity() != k {
            return Err(Error::parse(
                0,
                format!("predicate arity {} != {k}", p.arity()),
            ));
        }
        Ok(p)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.spec {
            PredicateSpec::Table => write!(f, "table {}", self.function.to_hex()),
            PredicateSpec::Ltf(spec) => write!(f, "{spec}"),
        }
    }
}

/// `ltf ...` or `table <hex>` with the arity implied by the digit count.
impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("table") {
            Some(hex) => {
                let hex = hex.trim();
                // One digit fits both k = 1 and k = 2; the larger wins.
                let k = (1..=crate::boolean_fn::MAX_ARITY)
                    .rev()
                    .find(|&k| (1usize << k).div_ceil(4) == hex.len())
                    .ok_or_else(|| {
                        Error::parse(0, format!("{} hex digits match no arity", hex.len()))
                    })?;
                Self::parse(k, s)
            }
            None => Self::from_ltf(s.parse()?),
        }
    }
}

/// `σ ∈ {-1,1}^n` packed into words; bit `ℓ` set means `σ_ℓ = +1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    n: usize,
    words: Vec<u64>,
}

impl Assignment {
    pub fn all_negative(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        let mut a = Self::all_negative(signs.len());
        for (l, &s) in signs.iter().enumerate() {
            a.set(l, s > 0);
        }
        a
    }

    /// Low `n` bits of `bits`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        let mut a = Self::all_negative(n);
        if n > 0 {
            a.words[0] = if n >= 64 {
                bits
            } else {
                bits & ((1u64 << n) - 1)
            };
        }
        a
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, l: usize) -> bool {
        (self.words[l / 64] >> (l % 64)) & 1 == 1
    }

    pub fn set(&mut self, l: usize, positive: bool) {
        assert!(l < self.n);
        let bit = 1u64 << (l % 64);
        if positive {
            self.words[l / 64] |= bit;
        } else {
            self.words[l / 64] &= !bit;
        }
    }

    pub fn sign(&self, l: usize) -> i8 {
        if self.get(l) {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n).map(|l| self.sign(l)).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in 0..self.n {
            f.write_str(if self.get(l) { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspInstance {
    n: usize,
    predicate: Predicate,
    constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new(n: usize, predicate: Predicate, constraints: Vec<Constraint>) -> Result<Self> {
        let mut inst = Self {
            n,
            predicate,
            constraints: Vec::with_capacity(constraints.len()),
        };
        for c in constraints {
            inst.push(c)?;
        }
        Ok(inst)
    }

    pub fn push(&mut self, c: Constraint) -> Result<()> {
        check_constraint(&c, self.n, self.predicate.arity())?;
        self.constraints.push(c);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    pub fn function(&self) -> &BooleanFunction {
        self.predicate.function()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn total_weight(&self) -> Rational {
        self.constraints.iter().map(|c| c.weight.clone()).sum()
    }

    /// Constraints in stream order, each exactly once.
    pub fn stream(&self) -> std::slice::Iter<'_, Constraint> {
        self.constraints.iter()
    }

    /// Appends `other`'s constraints; the predicates and `n` must agree.
    pub fn concat(&self, other: &CspInstance) -> Result<CspInstance> {
        if self.predicate.function() != other.predicate.function() || self.n != other.n {
            return Err(Error::InvalidConstraint(
                "instances differ in n or predicate".into(),
            ));
        }
        let mut out = self.clone();
        out.constraints.extend(other.constraints.iter().cloned());
        Ok(out)
    }

    /// `(1/W) Σ w_i f(b(i) ⊙ σ|_{j(i)})`.
    pub fn value(&self, sigma: &Assignment) -> Result<Rational> {
        if sigma.len() != self.n {
            return Err(Error::InvalidConstraint(format!(
                "assignment has length {} but n = {}",
                sigma.len(),
                self.n
            )));
        }
        let total = self.total_weight();
        if total.is_zero() {
            return Err(Error::ZeroWeight);
        }
        let f = self.function();
        let sat: Rational = self
            .constraints
            .iter()
            .filter(|c| f.get(c.local_index(sigma)))
            .map(|c| c.weight.clone())
            .sum();
        Ok(sat / total)
    }

    /// Exact optimum and its lowest-index maximizer, by exhaustive search.
    pub fn brute_force_value(&self) -> Result<(Rational, Assignment)> {
        if self.n > MAX_BRUTE_FORCE_VARS {
            return Err(Error::TooManyVariables {
                n: self.n,
                max: MAX_BRUTE_FORCE_VARS,
            });
        }
        let total = self.total_weight();
        if total.is_zero() {
            return Err(Error::ZeroWeight);
        }
        let scaled = crate::rational::clear_denominators(
            &self
                .constraints
                .iter()
                .map(|c| c.weight.clone())
                .collect::<Vec<_>>(),
        );
        let (best, arg) = match scaled
            .iter()
            .map(|w| w.to_u64().map(u128::from))
            .collect::<Option<Vec<u128>>>()
        {
            Some(ws) => {
                let (b, a) = self.search(&ws);
                (BigInt::from(b), a)
            }
            _ => self.search(&scaled),
        };
        let scaled_total: BigInt = scaled.iter().sum();
        Ok((
            Rational::new(best, scaled_total),
            Assignment::from_bits(self.n, arg),
        ))
    }

    fn search<W>(&self, weights: &[W]) -> (W, u64)
    where
        W: Clone + Ord + Zero + Send + Sync + for<'a> std::ops::AddAssign<&'a W>,
    {
        let f = self.function();
        let full: W = weights.iter().fold(W::zero(), |mut acc, w| {
            acc += w;
            acc
        });
        // Per constraint: packed variable indices and a sign-flip mask.
        let packed: Vec<(Vec<u32>, usize)> = self
            .constraints
            .iter()
            .map(|c| {
                let idx = c.indices.iter().map(|&j| j as u32).collect();
                let flip = c
                    .signs
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s < 0)
                    .fold(0usize, |acc, (t, _)| acc | (1 << t));
                (idx, flip)
            })
            .collect();
        let eval = |bits: u64| -> W {
            let mut sat = W::zero();
            for ((idx, flip), w) in packed.iter().zip(weights) {
                let mut local = 0usize;
                for (t, &j) in idx.iter().enumerate() {
                    local |= (((bits >> j) & 1) as usize) << t;
                }
                if f.get(local ^ flip) {
                    sat += w;
                }
            }
            sat
        };
        const CHUNK: u64 = 1 << 12;
        let space = 1u64 << self.n;
        let batch = CHUNK * rayon::current_num_threads().max(1) as u64;
        let mut best: Option<(W, u64)> = None;
        let mut start = 0u64;
        while start < space {
            let end = (start + batch).min(space);
            let chunks: Vec<(u64, u64)> = (start..end)
                .step_by(CHUNK as usize)
                .map(|s| (s, (s + CHUNK).min(end)))
                .collect();
            let local = chunks
                .into_par_iter()
                .map(|(s, e)| {
                    let mut b: Option<(W, u64)> = None;
                    for bits in s..e {
                        let v = eval(bits);
                        let hit = v == full;
                        if b.as_ref().is_none_or(|(bv, _)| v > *bv) {
                            b = Some((v, bits));
                        }
                        if hit {
                            break;
                        }
                    }
                    b.expect("nonempty chunk")
                })
                .reduce_with(|a, b| {
                    // Strictly greater value wins; ties keep the lower index.
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                })
                .expect("nonempty batch");
            if best.as_ref().is_none_or(|(bv, _)| local.0 > *bv) {
                best = Some(local);
            }
            if best.as_ref().is_some_and(|(bv, _)| *bv == full) {
                break;
            }
            start = end;
        }
        best.expect("nonempty search space")
    }
}

fn check_constraint(c: &Constraint, n: usize, k: usize) -> Result<()> {
    if c.arity() != k {
        return Err(Error::InvalidConstraint(format!(
            "constraint arity {} != predicate arity {k}",
            c.arity()
        )));
    }
    if let Some(&j) = c.indices.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidConstraint(format!(
            "variable {} exceeds n = {n}",
            j + 1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_fn::{maj, mon};
    use crate::rational::{int, rat};

    fn unit(indices: &[usize], signs: &[i8]) -> Constraint {
        Constraint::new(indices.to_vec(), signs.to_vec(), int(1)).unwrap()
    }

    fn brute_oracle(inst: &CspInstance) -> Rational {
        (0..1u64 << inst.n())
            .map(|b| inst.value(&Assignment::from_bits(inst.n(), b)).unwrap())
            .max()
            .unwrap()
    }

    #[test]
    fn value_examples() {
        let p = Predicate::from_ltf(maj(3)).unwrap();
        let inst = CspInstance::new(4, p, vec![unit(&[0, 1, 2], &[1, 1, 1])]).unwrap();
        assert_eq!(
            inst.value(&Assignment::from_signs(&[1, 1, -1, 1])).unwrap(),
            int(1)
        );
        assert_eq!(
            inst.value(&Assignment::from_signs(&[1, -1, -1, 1]))
                .unwrap(),
            int(0)
        );

        let p = Predicate::from_ltf(mon(5)).unwrap();
        let inst =
            CspInstance::new(6, p, vec![unit(&[5, 1, 2, 3, 4], &[1, -1, 1, -1, 1])]).unwrap();
        let sigma = Assignment::from_signs(&[1, -1, 1, -1, 1, 1]);
        assert_eq!(inst.value(&sigma).unwrap(), int(1));
    }

    #[test]
    fn contradiction_gives_half() {
        let p = Predicate::from_ltf(LtfSpec::from_ints(&[1])).unwrap();
        let inst = CspInstance::new(1, p, vec![unit(&[0], &[1]), unit(&[0], &[-1])]).unwrap();
        let (v, a) = inst.brute_force_value().unwrap();
        assert_eq!(v, rat(1, 2));
        assert_eq!(a, Assignment::from_bits(1, 0));
    }

    #[test]
    fn errors() {
        let p = Predicate::from_ltf(maj(3)).unwrap();
        let empty = CspInstance::new(3, p.clone(), vec![]).unwrap();
        assert_eq!(empty.brute_force_value(), Err(Error::ZeroWeight));
        assert_eq!(
            empty.value(&Assignment::all_negative(3)),
            Err(Error::ZeroWeight)
        );
        assert!(CspInstance::new(3, p.clone(), vec![unit(&[0, 1], &[1, 1])]).is_err());
        assert!(CspInstance::new(3, p.clone(), vec![unit(&[0, 1, 3], &[1, 1, 1])]).is_err());
        assert!(Constraint::new(vec![0, 0, 1], vec![1, 1, 1], int(1)).is_err());
        assert!(Constraint::new(vec![0, 1, 2], vec![1, 1, 1], int(-1)).is_err());
        let big = CspInstance::new(27, p, vec![]).unwrap();
        assert!(matches!(
            big.brute_force_value(),
            Err(Error::TooManyVariables { .. })
        ));
    }

    #[test]
    fn brute_force_matches_oracle_with_rational_weights() {
        let p = Predicate::from_ltf(maj(3)).unwrap();
        let cs = vec![
            Constraint::new(vec![0, 1, 2], vec![1, -1, 1], rat(1, 3)).unwrap(),
            Constraint::new(vec![3, 1, 2], vec![-1, 1, 1], rat(5, 7)).unwrap(),
            Constraint::new(vec![4, 0, 3], vec![-1, -1, -1], int(2)).unwrap(),
            Constraint::new(vec![4, 2, 1], vec![1, 1, -1], rat(1, 2)).unwrap(),
        ];
        let inst = CspInstance::new(5, p, cs).unwrap();
        let (v, a) = inst.brute_force_value().unwrap();
        assert_eq!(v, brute_oracle(&inst));
        assert_eq!(inst.value(&a).unwrap(), v);
        let first = (0..32u64)
            .find(|&b| inst.value(&Assignment::from_bits(5, b)).unwrap() == v)
            .unwrap();
        assert_eq!(a, Assignment::from_bits(5, first));
    }

    #[test]
    fn huge_weights_take_bigint_path() {
        let p = Predicate::from_ltf(LtfSpec::from_ints(&[1])).unwrap();
        let huge = Rational::from_integer(BigInt::from(1) << 130);
        let inst = CspInstance::new(
            2,
            p,
            vec![
                Constraint::new(vec![0], vec![1], huge.clone()).unwrap(),
                Constraint::new(vec![0], vec![-1], int(1)).unwrap(),
                Constraint::new(vec![1], vec![-1], huge.clone()).unwrap(),
            ],
        )
        .unwrap();
        let (v, a) = inst.brute_force_value().unwrap();
        assert_eq!(v, &huge * int(2) / (&huge * int(2) + int(1)));
        assert_eq!(a.signs(), vec![1, -1]);
    }

    #[test]
    fn assignment_bits() {
        let a = Assignment::from_signs(&[1, -1, 1]);
        assert_eq!(a, Assignment::from_bits(3, 0b101));
        assert_eq!(a.to_string(), "+-+");
        let mut b = Assignment::all_negative(70);
        b.set(69, true);
        assert!(b.get(69) && !b.get(5));
    }

    #[test]
    fn predicate_text() {
        let p: Predicate = "table e8".parse().unwrap();
        assert_eq!(
            p.function(),
            Predicate::from_ltf(maj(3)).unwrap().function()
        );
        assert_eq!(p.to_string(), "table e8");
        let q: Predicate = "ltf 3 0 1 1 1".parse().unwrap();
        assert_eq!(q.to_string(), "ltf 3 0 1 1 1");
        assert_eq!("table 8".parse::<Predicate>().unwrap().arity(), 2);
        assert!("table e8e".parse::<Predicate>().is_err());
    }
}
