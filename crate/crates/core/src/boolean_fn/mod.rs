//! Boolean functions `f: {-1,1}^k -> {0,1}` stored as packed truth tables.
//!
//! Input encoding: index `m` in `0..2^k` denotes the point `x` with
//! `x_{t+1} = 1` iff bit `t` of `m` is set (and `-1` otherwise).

mod chow_closed;
mod classify;
mod fourier;
mod ltf;

pub use chow_closed::{wmon_chow_certificate, wmon_chow_closed_form, wmon_ratio, WmonCertificate};
pub use classify::{classify_balanced_ltf4, Ltf4Class, Ltf4Classification};
pub use fourier::{
    chow_defines_self, chow_parameters, epsilon0, epsilon_star, fourier_spectrum, ChowVector,
    FourierSpectrum,
};
pub(crate) use fourier::{epsilon0_with, epsilon_star_from};
pub use ltf::{is_balanced_ltf, ltf_to_function, maj, mon, wmon, LtfSpec};

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const MAX_ARITY: usize = 24;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    words: Vec<u64>,
}

impl BooleanFunction {
    pub fn zero(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        let words = vec![0u64; word_count(arity)];
        Ok(Self { arity, words })
    }

    pub fn constant_one(arity: usize) -> Result<Self> {
        Self::from_fn(arity, |_| true)
    }

    /// Builds the table from a predicate on input indices.
    pub fn from_fn(arity: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        let mut out = Self::zero(arity)?;
        for m in 0..out.len() {
            if f(m) {
                out.words[m >> 6] |= 1u64 << (m & 63);
            }
        }
        Ok(out)
    }

    /// Builds the table from a predicate on decoded `±1` points.
    pub fn from_points(arity: usize, mut f: impl FnMut(&[i8]) -> bool) -> Result<Self> {
        let mut x = vec![0i8; arity];
        Self::from_fn(arity, |m| {
            decode_into(m, &mut x);
            f(&x)
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of table entries, `2^k`.
    pub fn len(&self) -> usize {
        1usize << self.arity
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, m: usize) -> bool {
        debug_assert!(m < self.len());
        (self.words[m >> 6] >> (m & 63)) & 1 == 1
    }

    /// Evaluates at a `±1` point of length `k`.
    pub fn eval(&self, x: &[i8]) -> bool {
        self.get(encode(x))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_constant_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Iterator over satisfying input indices in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some((i << 6) | b)
            })
        })
    }

    /// `rho(f) = 2^-k |f^-1(1)|`.
    pub fn rho(&self) -> Rational {
        Rational::new(
            BigInt::from(self.count_ones()),
            BigInt::from(1u64) << self.arity,
        )
    }

    /// Hex rendering of the table read as a little-endian bit string: bit `m`
    /// of the big integer is `f(m)`. Digits are printed most significant
    /// first, `max(1, 2^k / 4)` of them.
    pub fn to_hex(&self) -> String {
        let digits = hex_digits(self.arity);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let m = d * 4 + b;
                if m < self.len() && self.get(m) {
                    nibble |= 1 << b;
                }
            }
            s.push(char::from_digit(u32::from(nibble), 16).unwrap());
        }
        s
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        check_arity(arity)?;
        let digits = hex_digits(arity);
        if hex.len() != digits {
            return Err(Error::parse(
                0,
                format!(
                    "expected {digits} hex digits for arity {arity}, got {}",
                    hex.len()
                ),
            ));
        }
        let mut out = Self::zero(arity)?;
        for (pos, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::parse(0, format!("bad hex digit {c:?}")))?;
            let d = digits - 1 - pos;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let m = d * 4 + b;
                    if m >= out.len() {
                        return Err(Error::parse(0, "hex table sets bits beyond 2^k"));
                    }
                    out.words[m >> 6] |= 1u64 << (m & 63);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arity <= 8 {
            write!(f, "BooleanFunction(k={}, {})", self.arity, self.to_hex())
        } else {
            write!(
                f,
                "BooleanFunction(k={}, ones={})",
                self.arity,
                self.count_ones()
            )
        }
    }
}

pub(crate) fn check_arity(arity: usize) -> Result<()> {
    if (1..=MAX_ARITY).contains(&arity) {
        Ok(())
    } else {
        Err(Error::ArityOutOfRange(arity))
    }
}

fn word_count(arity: usize) -> usize {
    (1usize << arity).div_ceil(64)
}

fn hex_digits(arity: usize) -> usize {
    ((1usize << arity) / 4).max(1)
}

/// Index of a `±1` point.
pub fn encode(x: &[i8]) -> usize {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .fold(0, |m, (t, _)| m | (1 << t))
}

/// Writes the `±1` point with index `m` into `out` (length `k`).
pub fn decode_into(m: usize, out: &mut [i8]) {
    for (t, v) in out.iter_mut().enumerate() {
        *v = if m >> t & 1 == 1 { 1 } else { -1 };
    }
}

pub fn decode(m: usize, arity: usize) -> Vec<i8> {
    let mut x = vec![0; arity];
    decode_into(m, &mut x);
    x
}
