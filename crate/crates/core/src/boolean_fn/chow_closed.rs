//! Closed-form Chow parameters of weak monarchies, valid for any `k`.

use num_bigint::BigInt;

use super::fourier::chow_parameters;
use super::ltf::{ltf_to_function, wmon};
use super::MAX_ARITY;
use crate::error::{Error, Result};
use crate::rational::{binomial, binomial_prefix_below, int, pow2, Rational};

fn check_wmon(k: usize, j: usize) -> Result<()> {
    if j == 0 || j >= k || !(k + j).is_multiple_of(2) {
        return Err(Error::ParityViolation { k, j });
    }
    Ok(())
}

/// `(president, citizen)` Chow parameters of WMON_{k,j}:
/// president `= (2^{k-1} - 2 C(k-1, < (k-j)/2)) / 2^k`,
/// citizen `= C(k-2, (k-j)/2 - 1) / 2^{k-1}`.
pub fn wmon_chow_closed_form(k: usize, j: usize) -> Result<(Rational, Rational)> {
    check_wmon(k, j)?;
    let half_gap = ((k - j) / 2) as i64;
    let k_i = k as i64;
    let president_num = pow2(k - 1) - BigInt::from(2) * binomial_prefix_below(k_i - 1, half_gap);
    let president = Rational::new(president_num, pow2(k));
    let citizen = Rational::new(binomial(k_i - 2, half_gap - 1), pow2(k - 1));
    Ok((president, citizen))
}

/// President-to-citizen Chow ratio.
pub fn wmon_ratio(k: usize, j: usize) -> Result<Rational> {
    let (p, c) = wmon_chow_closed_form(k, j)?;
    Ok(p / c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WmonCertificate {
    /// Truth table of the Chow-weighted LTF equals WMON_{k,j}.
    TableCertified,
    /// `k` is beyond truth-table range, but the ratio lies in `(j-1, j+1)`,
    /// which forces the same sign pattern.
    RatioCertified {
        ratio: Rational,
    },
    NotCertified {
        ratio: Rational,
    },
}

/// Decides whether WMON_{k,j} is the sign of its own Chow form.
pub fn wmon_chow_certificate(k: usize, j: usize) -> Result<WmonCertificate> {
    let ratio = wmon_ratio(k, j)?;
    if k <= MAX_ARITY {
        let f = ltf_to_function(&wmon(k, j))?;
        let g = ltf_to_function(&chow_parameters(&f).as_ltf())?;
        return Ok(if f == g {
            WmonCertificate::TableCertified
        } else {
            WmonCertificate::NotCertified { ratio }
        });
    }
    let j_r = int(j as i64);
    let inside = ratio > &j_r - int(1) && ratio < &j_r + int(1);
    Ok(if inside {
        WmonCertificate::RatioCertified { ratio }
    } else {
        WmonCertificate::NotCertified { ratio }
    })
}
