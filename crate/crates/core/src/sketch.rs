//! Bias vectors, the Cauchy-projection l1 sketch, and the bias-based
//! approximation algorithm with the value bounds that bracket the optimum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolean_fn::{chow_parameters, epsilon0_with, epsilon_star_from, BooleanFunction};
use crate::csp::{Constraint, CspInstance};
use crate::error::{Error, Result};
use crate::rational::{clear_denominators, int, min_rational, rat, to_f64, Rational};

/// `r = ceil(c / eps^2)` with this `c` unless configured otherwise.
pub const DEFAULT_REPETITION_CONSTANT: f64 = 64.0;

/// Sketch counters are fixed point with this many fractional bits, so that
/// merging is integer addition and therefore exact and order-free.
const FIXED_POINT_BITS: i32 = 40;

/// Everything the bounds and the algorithm need to know about `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateProfile {
    pub k: usize,
    pub rho: Rational,
    /// Degree-1 Chow parameters.
    pub lambda: Vec<Rational>,
    pub eps0: Rational,
    pub eps_star: Rational,
}

impl PredicateProfile {
    pub fn new(f: &BooleanFunction) -> Result<Self> {
        let rho = f.rho();
        if rho.is_zero() {
            return Err(Error::ZeroDensity);
        }
        let chow = chow_parameters(f);
        let eps0 = epsilon0_with(f, &chow)?;
        let eps_star = epsilon_star_from(&eps0, &rho, f.arity());
        Ok(Self {
            k: f.arity(),
            rho,
            lambda: chow.degree1,
            eps0,
            eps_star,
        })
    }

    /// `min { 1/(3k), 2B / (9 ρ k^2) }`.
    pub fn delta(&self, b: &Rational) -> Rational {
        let k = self.k as i64;
        min_rational(rat(1, 3 * k), int(2) * b / (int(9 * k * k) * &self.rho))
    }

    /// `ρ + B δ(B)`.
    pub fn lower_bound(&self, b: &Rational) -> Rational {
        &self.rho + b * self.delta(b)
    }

    /// `(B + ρ k) / (ε0 + ρ k)`.
    pub fn upper_bound(&self, b: &Rational) -> Rational {
        let rk = &self.rho * int(self.k as i64);
        (b + &rk) / (&self.eps0 + &rk)
    }
}

pub fn bound_lower(b: &Rational, f: &BooleanFunction) -> Result<Rational> {
    Ok(PredicateProfile::new(f)?.lower_bound(b))
}

pub fn bound_upper(b: &Rational, f: &BooleanFunction) -> Result<Rational> {
    Ok(PredicateProfile::new(f)?.upper_bound(b))
}

/// Streaming accumulator for the unnormalized bias `Σ λ_t w_i b(i)_t` per
/// variable, plus the total weight.
#[derive(Clone, Debug, Default)]
pub struct BiasAccumulator {
    sums: BTreeMap<usize, Rational>,
    total_weight: Rational,
}

impl BiasAccumulator {
    pub fn update(&mut self, lambda: &[Rational], c: &Constraint) {
        self.total_weight += c.weight();
        for ((&j, &s), l) in c.indices().iter().zip(c.signs()).zip(lambda) {
            let term = l * c.weight() * int(i64::from(s));
            *self.sums.entry(j).or_insert_with(Rational::zero) += term;
        }
    }

    /// Nonzero normalized entries, by variable.
    pub fn normalized(&self) -> Result<BTreeMap<usize, Rational>> {
        if self.total_weight.is_zero() {
            return Err(Error::ZeroWeight);
        }
        Ok(self
            .sums
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(&j, v)| (j, v / &self.total_weight))
            .collect())
    }

    /// `Σ_ℓ |bias_ℓ|`.
    pub fn l1_norm(&self) -> Result<Rational> {
        Ok(self.normalized()?.values().map(|v| v.abs()).sum())
    }
}

/// `bias_ℓ = (1/W) Σ_{i,t : j(i)_t = ℓ} λ_t w_i b(i)_t`.
pub fn bias_vector(inst: &CspInstance, lambda: &[Rational]) -> Result<Vec<Rational>> {
    let mut acc = BiasAccumulator::default();
    for c in inst.stream() {
        acc.update(lambda, c);
    }
    let mut out = vec![Rational::zero(); inst.n()];
    for (j, v) in acc.normalized()? {
        out[j] = v;
    }
    Ok(out)
}

pub fn b_norm_exact(inst: &CspInstance, lambda: &[Rational]) -> Result<Rational> {
    Ok(bias_vector(inst, lambda)?.iter().map(|v| v.abs()).sum())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps.to_string()))
    }
}

/// Stable-projection sketch of the bias l1 norm.
///
/// Repetition `r` keeps `S_r = Σ_ℓ C_{ℓ,r} · (unnormalized bias)_ℓ`, where
/// `C_{ℓ,r}` is a standard Cauchy variate drawn from ChaCha8 keyed by the
/// seed, on stream `ℓ`, at position `r`; no per-coordinate table is stored.
/// The estimate is `median_r |S_r| / W`, since the median of `|C|` is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L1SketchState {
    seed: u64,
    eps_bits: u64,
    lambda_bits: Vec<u64>,
    sums: Vec<i128>,
    count: u64,
    total_weight: Rational,
}

impl L1SketchState {
    pub fn new(lambda: &[Rational], eps: f64, seed: u64) -> Result<Self> {
        Self::with_constant(lambda, eps, seed, DEFAULT_REPETITION_CONSTANT)
    }

    pub fn with_constant(lambda: &[Rational], eps: f64, seed: u64, c: f64) -> Result<Self> {
        check_eps(eps)?;
        let reps = repetitions(eps, c);
        Ok(Self {
            seed,
            eps_bits: eps.to_bits(),
            lambda_bits: lambda.iter().map(|l| to_f64(l).to_bits()).collect(),
            sums: vec![0; reps],
            count: 0,
            total_weight: Rational::zero(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn eps(&self) -> f64 {
        f64::from_bits(self.eps_bits)
    }

    pub fn repetitions(&self) -> usize {
        self.sums.len()
    }

    /// Number of fixed-point counters held; independent of `n` and `m`.
    pub fn counters(&self) -> usize {
        self.sums.len()
    }

    pub fn sums(&self) -> &[i128] {
        &self.sums
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total_weight(&self) -> &Rational {
        &self.total_weight
    }

    pub fn update(&mut self, c: &Constraint) {
        assert_eq!(
            c.arity(),
            self.lambda_bits.len(),
            "constraint arity mismatch"
        );
        let w = to_f64(c.weight());
        let base = ChaCha8Rng::seed_from_u64(self.seed);
        for ((&j, &s), &lb) in c.indices().iter().zip(c.signs()).zip(&self.lambda_bits) {
            let coeff = f64::from_bits(lb) * w * f64::from(s);
            if coeff == 0.0 {
                continue;
            }
            let mut rng = base.clone();
            rng.set_stream(j as u64);
            rng.set_word_pos(0);
            for sum in self.sums.iter_mut() {
                let inc = cauchy(rng.next_u64()) * coeff * (FIXED_POINT_BITS as f64).exp2();
                // `as` saturates; wrapping addition keeps merges associative.
                *sum = sum.wrapping_add(inc.round() as i128);
            }
        }
        self.count += 1;
        self.total_weight += c.weight();
    }

    pub fn is_compatible(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.eps_bits == other.eps_bits
            && self.lambda_bits == other.lambda_bits
            && self.sums.len() == other.sums.len()
    }

    /// State of the concatenated stream.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.seed != other.seed {
            return Err(Error::IncompatibleSketch("different seeds"));
        }
        if !self.is_compatible(other) {
            return Err(Error::IncompatibleSketch(
                "different accuracy or predicate weights",
            ));
        }
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a = a.wrapping_add(*b);
        }
        self.count += other.count;
        self.total_weight += &other.total_weight;
        Ok(())
    }

    /// `median_r |S_r| / W`; zero for an empty stream.
    pub fn estimate(&self) -> f64 {
        if self.total_weight.is_zero() {
            return 0.0;
        }
        let scale = (-FIXED_POINT_BITS as f64).exp2();
        let mut abs: Vec<f64> = self
            .sums
            .iter()
            .map(|&s| (s as f64).abs() * scale)
            .collect();
        abs.sort_by(f64::total_cmp);
        let r = abs.len();
        let median = if r % 2 == 1 {
            abs[r / 2]
        } else {
            (abs[r / 2 - 1] + abs[r / 2]) / 2.0
        };
        median / to_f64(&self.total_weight)
    }
}

pub fn repetitions(eps: f64, c: f64) -> usize {
    (c / (eps * eps)).ceil() as usize
}

/// `tan(π(U - 1/2))` with `U` strictly inside `(0, 1)`.
fn cauchy(bits: u64) -> f64 {
    let u = ((bits >> 11) as f64 + 0.5) * (-53f64).exp2();
    (std::f64::consts::PI * (u - 0.5)).tan()
}

/// One pass over `stream`, returning the estimate of `B_λ`.
pub fn l1_sketch<'a>(
    stream: impl IntoIterator<Item = &'a Constraint>,
    lambda: &[Rational],
    eps: f64,
    seed: u64,
) -> Result<f64> {
    let mut state = L1SketchState::new(lambda, eps, seed)?;
    for c in stream {
        state.update(c);
    }
    Ok(state.estimate())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiasMode {
    Sketch {
        seed: u64,
    },
    /// Uses the exact l1 norm in place of the sketch estimate.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchVerdict {
    pub b_tilde: Rational,
    pub delta: Rational,
    pub v: Rational,
    pub eps: Rational,
    pub eps_prime: Rational,
    /// Sketch repetitions, `None` in exact mode.
    pub repetitions: Option<usize>,
    pub warnings: Vec<String>,
}

enum BiasState {
    Exact(BiasAccumulator),
    Sketch(L1SketchState),
}

/// Single-pass runner for the bias algorithm: feed constraints with
/// [`Algorithm1::update`], then read the verdict with [`Algorithm1::finish`].
pub struct Algorithm1 {
    profile: PredicateProfile,
    eps: Rational,
    eps_prime: Rational,
    state: BiasState,
}

impl Algorithm1 {
    pub fn new(f: &BooleanFunction, eps: &Rational, mode: BiasMode) -> Result<Self> {
        if !(eps.is_positive() && eps < &int(1)) {
            return Err(Error::InvalidEpsilon(eps.to_string()));
        }
        let profile = PredicateProfile::new(f)?;
        let eps_prime = eps / int(8);
        let state = match mode {
            BiasMode::Exact => BiasState::Exact(BiasAccumulator::default()),
            BiasMode::Sketch { seed } => BiasState::Sketch(L1SketchState::new(
                &profile.lambda,
                to_f64(&eps_prime),
                seed,
            )?),
        };
        Ok(Self {
            profile,
            eps: eps.clone(),
            eps_prime,
            state,
        })
    }

    pub fn profile(&self) -> &PredicateProfile {
        &self.profile
    }

    pub fn update(&mut self, c: &Constraint) {
        match &mut self.state {
            BiasState::Exact(acc) => acc.update(&self.profile.lambda, c),
            BiasState::Sketch(s) => s.update(c),
        }
    }

    /// `v = ρ + B̃ δ̃ / (1 + ε')^2` with `ε' = ε/8` and
    /// `δ̃ = min { 1/(3k), 2B̃ / (9 ρ k^2) }`.
    pub fn finish(&self) -> Result<SketchVerdict> {
        let mut warnings = Vec::new();
        if !self.profile.eps_star.is_positive() {
            warnings.push(format!(
                "eps*(f) = {} <= 0: the output carries no guarantee beyond rho(f)",
                crate::rational::format_rational(&self.profile.eps_star)
            ));
        }
        let (b_tilde, repetitions) = match &self.state {
            BiasState::Exact(acc) => (acc.l1_norm()?, None),
            BiasState::Sketch(state) => {
                if state.total_weight().is_zero() {
                    return Err(Error::ZeroWeight);
                }
                let est = state.estimate().max(0.0);
                let b = Rational::from_float(est).unwrap_or_else(Rational::zero);
                (b, Some(state.repetitions()))
            }
        };
        let delta = self.profile.delta(&b_tilde);
        let one_plus = int(1) + &self.eps_prime;
        let v = &self.profile.rho + &b_tilde * &delta / (&one_plus * &one_plus);
        Ok(SketchVerdict {
            b_tilde,
            delta,
            v,
            eps: self.eps.clone(),
            eps_prime: self.eps_prime.clone(),
            repetitions,
            warnings,
        })
    }
}

pub fn algorithm1<'a>(
    stream: impl IntoIterator<Item = &'a Constraint>,
    f: &BooleanFunction,
    eps: &Rational,
    mode: BiasMode,
) -> Result<SketchVerdict> {
    let mut run = Algorithm1::new(f, eps, mode)?;
    for c in stream {
        run.update(c);
    }
    run.finish()
}

/// `max_{a ∈ {-1,1}^n} <a, x>` by enumeration; an oracle for the l1 norm.
pub fn max_signed_sum(x: &[Rational]) -> Rational {
    assert!(x.len() <= 20, "enumeration limited to n <= 20");
    let ints = clear_denominators(x);
    let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_zero()) else {
        return Rational::zero();
    };
    let scale = v / Rational::from_integer(ints[i].clone());
    let ints: Vec<i128> = ints
        .iter()
        .map(|c| c.to_i128().expect("entries fit i128"))
        .collect();
    let best = (0..1u64 << x.len())
        .map(|a| {
            ints.iter()
                .enumerate()
                .map(|(l, &v)| if (a >> l) & 1 == 1 { v } else { -v })
                .sum::<i128>()
        })
        .max()
        .unwrap();
    Rational::from_integer(BigInt::from(best)) * scale
}
