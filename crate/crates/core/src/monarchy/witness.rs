use num_traits::{Signed, Zero};

use super::{condition_ii_polynomial, condition_iii_values, h_polynomial, ReducedDistribution};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::rational::{binomial, int, rat, Rational};

fn big(n: i64, k: i64) -> Rational {
    Rational::from_integer(binomial(n, k))
}

/// Explicit point of the yes/no intersection for MON_k, `k >= 5`.
pub fn witness(k: usize) -> Result<ReducedDistribution> {
    if k < 5 {
        return Err(Error::NoWitness(k));
    }
    let mut u = vec![Rational::zero(); k];
    let mut v = vec![Rational::zero(); k];
    let n = k as i64;
    if k == 5 {
        u[4] = rat(1, 3);
        v[2] = rat(1, 3);
        v[3] = rat(1, 6);
        v[4] = rat(1, 6);
    } else {
        let (t, start) = if k.is_multiple_of(2) {
            let t = big(n, n / 2) - int(2);
            u[k / 2] = (&t - int(2)) / (int(2) * &t);
            (t, k / 2)
        } else {
            let t = int(2) * big(n - 1, (n - 1) / 2) - int(2);
            let share = (&t - int(2)) / (int(4) * &t);
            u[(k - 1) / 2] = share.clone();
            u[k.div_ceil(2)] = share;
            (t, (k - 1) / 2)
        };
        for (i, vi) in v.iter_mut().enumerate().skip(start) {
            let i = i as i64;
            *vi = (big(n - 1, i) - big(n - 1, i + 1)) / &t;
        }
    }
    ReducedDistribution::raw(u, v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub k: usize,
    /// `Σ (u_i + v_i) - 1`.
    pub mass_residual: Rational,
    pub min_entry: Rational,
    pub condition_i: bool,
    /// `h_D - 1/2`.
    pub h_residual: Polynomial,
    /// Condition (ii) δ-expression minus `1/2`.
    pub expansion_residual: Polynomial,
    pub condition_ii: bool,
    pub p1: Rational,
    pub p_prime: Rational,
    /// `p' - (1 - (k-2)/(k-1) p1)`.
    pub iii_slack: Rational,
    pub condition_iii: bool,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii
    }
}

/// Checks the three sufficient conditions; failures are reported, not raised.
pub fn verify_witness(d: &ReducedDistribution, k: usize) -> WitnessReport {
    let half = Polynomial::constant(rat(1, 2));
    let mass_residual = d.mass() - int(1);
    let min_entry = d
        .u()
        .iter()
        .chain(d.v())
        .min()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let condition_i = d.k() == k && mass_residual.is_zero() && !min_entry.is_negative();

    let h_residual = &h_polynomial(d) - &half;
    let expansion_residual = &condition_ii_polynomial(d) - &half;
    let condition_ii = h_residual.is_zero() && expansion_residual.is_zero();

    let c = condition_iii_values(d);
    let kk = d.k() as i64;
    let iii_slack = &c.p_prime - (int(1) - rat(kk - 2, kk - 1) * &c.p1);
    WitnessReport {
        k,
        mass_residual,
        min_entry,
        condition_i,
        h_residual,
        expansion_residual,
        condition_ii,
        p1: c.p1,
        p_prime: c.p_prime,
        condition_iii: c.holds,
        iii_slack,
    }
}

/// `Σ_{i=⌈m/2⌉}^{m} [a^{i+1} b^{m-i} - b^{i+1} a^{m-i}] (C(m,i) - C(m,i+1)) - 2δ`
/// with `a = 1/2 + δ`, `b = 1/2 - δ`, as a polynomial in δ.
pub fn comb_identity_residual(m: usize) -> Polynomial {
    let a = Polynomial::linear(rat(1, 2), int(1));
    let b = Polynomial::linear(rat(1, 2), int(-1));
    let mi = m as i64;
    let mut acc = Polynomial::linear(int(0), int(-2));
    for i in m.div_ceil(2)..=m {
        let c = big(mi, i as i64) - big(mi, i as i64 + 1);
        let term = &(&a.pow(i + 1) * &b.pow(m - i)) - &(&b.pow(i + 1) * &a.pow(m - i));
        acc = &acc + &term.scale(&c);
    }
    acc
}
