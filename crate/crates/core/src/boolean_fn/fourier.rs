use num_bigint::BigInt;
use num_traits::Zero;

use super::ltf::{ltf_to_function, LinearForm, LtfSpec};
use super::{check_arity, BooleanFunction};
use crate::error::{Error, Result};
use crate::rational::{min_rational, Rational};

/// All `2^k` Fourier coefficients, held as integer numerators over the common
/// denominator `2^k`. Index `s` is the subset bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierSpectrum {
    arity: usize,
    numerators: Vec<i64>,
}

impl FourierSpectrum {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn coefficient(&self, subset: usize) -> Rational {
        Rational::new(
            BigInt::from(self.numerators[subset]),
            BigInt::from(1u64) << self.arity,
        )
    }

    /// `sum_S fhat(S) chi_S(x)` at input index `m`.
    pub fn evaluate(&self, m: usize) -> Rational {
        let total: i64 = self
            .numerators
            .iter()
            .enumerate()
            .map(|(s, &c)| {
                if (s & !m).count_ones().is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .sum();
        Rational::new(BigInt::from(total), BigInt::from(1u64) << self.arity)
    }
}

/// Fast Walsh-Hadamard transform of the 0/1 table.
///
/// With bit `t` set meaning `x_{t+1} = +1`, `chi_S(x) = (-1)^{|S \ m|}`, so the
/// plain `(a+b, a-b)` butterfly is applied to the table indexed by the
/// complement of `m`.
pub fn fourier_spectrum(f: &BooleanFunction) -> Result<FourierSpectrum> {
    let k = f.arity();
    check_arity(k)?;
    let n = f.len();
    let mask = n - 1;
    let mut a: Vec<i64> = (0..n).map(|m| i64::from(f.get(!m & mask))).collect();
    let mut h = 1;
    while h < n {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
    Ok(FourierSpectrum {
        arity: k,
        numerators: a,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChowVector {
    pub degree0: Rational,
    pub degree1: Vec<Rational>,
    ones: i64,
    degree1_numerators: Vec<i64>,
}

impl ChowVector {
    pub fn arity(&self) -> usize {
        self.degree1.len()
    }

    /// Degree-1 coefficients scaled by `2^k`.
    pub fn degree1_numerators(&self) -> &[i64] {
        &self.degree1_numerators
    }

    pub fn satisfying_count(&self) -> i64 {
        self.ones
    }

    /// The LTF `sign(sum_i fhat({i}) x_i)`.
    pub fn as_ltf(&self) -> LtfSpec {
        LtfSpec::new(self.degree1.clone(), Rational::zero())
    }
}

const LOW_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Degree-0 and degree-1 coefficients from `k + 1` direct correlations with
/// word-level popcounts; never materializes the spectrum.
pub fn chow_parameters(f: &BooleanFunction) -> ChowVector {
    let k = f.arity();
    let ones = f.count_ones() as i64;
    let mut with_bit = vec![0i64; k];
    for (wi, &w) in f.words().iter().enumerate() {
        let pc = i64::from(w.count_ones());
        for (t, acc) in with_bit.iter_mut().enumerate() {
            *acc += if t < 6 {
                i64::from((w & LOW_MASKS[t]).count_ones())
            } else if wi >> (t - 6) & 1 == 1 {
                pc
            } else {
                0
            };
        }
    }
    let degree1_numerators: Vec<i64> = with_bit.iter().map(|&c| 2 * c - ones).collect();
    let denom = BigInt::from(1u64) << k;
    ChowVector {
        degree0: Rational::new(BigInt::from(ones), denom.clone()),
        degree1: degree1_numerators
            .iter()
            .map(|&c| Rational::new(BigInt::from(c), denom.clone()))
            .collect(),
        ones,
        degree1_numerators,
    }
}

/// `min { sum_i fhat({i}) x_i : f(x) = 1 }`.
pub fn epsilon0(f: &BooleanFunction) -> Result<Rational> {
    let chow = chow_parameters(f);
    epsilon0_with(f, &chow)
}

pub(crate) fn epsilon0_with(f: &BooleanFunction, chow: &ChowVector) -> Result<Rational> {
    if f.is_constant_zero() {
        return Err(Error::ConstantZero);
    }
    let ws: Vec<BigInt> = chow
        .degree1_numerators
        .iter()
        .map(|&c| BigInt::from(c))
        .collect();
    // |numerators| <= 2^24 each, so the form always fits.
    let form = LinearForm::new(&ws).expect("Chow numerators fit in i128");
    let min = f.ones().map(|m| form.value(m)).min().unwrap();
    Ok(Rational::new(
        BigInt::from(min),
        BigInt::from(1u64) << f.arity(),
    ))
}

/// `min { eps0 / 3k, 2 eps0^2 / (9 rho k^2) }`.
pub fn epsilon_star(f: &BooleanFunction) -> Result<Rational> {
    let rho = f.rho();
    if rho.is_zero() {
        return Err(Error::ZeroDensity);
    }
    let e0 = epsilon0(f)?;
    Ok(epsilon_star_from(&e0, &rho, f.arity()))
}

pub(crate) fn epsilon_star_from(e0: &Rational, rho: &Rational, k: usize) -> Rational {
    let k = Rational::from_integer(BigInt::from(k));
    let first = e0 / (Rational::from_integer(3.into()) * &k);
    let second = Rational::from_integer(2.into()) * e0 * e0
        / (Rational::from_integer(9.into()) * rho * &k * &k);
    min_rational(first, second)
}

/// True iff `f` coincides with `sign(sum_i fhat({i}) x_i)`. The constant-zero
/// function is excluded: it has no satisfying input for the Chow form to
/// certify.
pub fn chow_defines_self(f: &BooleanFunction) -> bool {
    if f.is_constant_zero() {
        return false;
    }
    let chow = chow_parameters(f);
    ltf_to_function(&chow.as_ltf()).is_ok_and(|g| &g == f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_fn::{decode, maj, mon, wmon};
    use crate::rational::{int, rat};
    use num_traits::Signed;
    use proptest::prelude::*;

    /// Oracle: `fhat(S) = E_x[f(x) chi_S(x)]` straight from the definition.
    fn brute_coefficient(f: &BooleanFunction, subset: usize) -> Rational {
        let k = f.arity();
        let mut acc = 0i64;
        for m in 0..f.len() {
            if f.get(m) {
                let x = decode(m, k);
                let chi: i64 = (0..k)
                    .filter(|t| subset >> t & 1 == 1)
                    .map(|t| i64::from(x[t]))
                    .product();
                acc += chi;
            }
        }
        Rational::new(acc.into(), (1i64 << k).into())
    }

    fn func(spec: &LtfSpec) -> BooleanFunction {
        ltf_to_function(spec).unwrap()
    }

    #[test]
    fn maj3_spectrum() {
        let f = func(&maj(3));
        let s = fourier_spectrum(&f).unwrap();
        assert_eq!(s.coefficient(0), rat(1, 2));
        for i in 0..3 {
            assert_eq!(s.coefficient(1 << i), rat(1, 4));
        }
        for subset in 0..8 {
            assert_eq!(s.coefficient(subset), brute_coefficient(&f, subset));
        }
    }

    #[test]
    fn dictator_and_constant_one() {
        let d = func(&LtfSpec::from_ints(&[1]));
        let s = fourier_spectrum(&d).unwrap();
        assert_eq!((s.coefficient(0), s.coefficient(1)), (rat(1, 2), rat(1, 2)));
        let one = BooleanFunction::constant_one(4).unwrap();
        let s = fourier_spectrum(&one).unwrap();
        assert_eq!(s.coefficient(0), int(1));
        assert!((1..16).all(|sub| s.coefficient(sub).is_zero()));
    }

    #[test]
    fn chow_examples() {
        let mon5 = chow_parameters(&func(&mon(5)));
        assert_eq!(mon5.degree0, rat(1, 2));
        assert_eq!(
            mon5.degree1,
            vec![rat(7, 16), rat(1, 16), rat(1, 16), rat(1, 16), rat(1, 16)]
        );
        let maj3 = chow_parameters(&func(&maj(3)));
        assert_eq!(maj3.degree0, rat(1, 2));
        assert_eq!(maj3.degree1, vec![rat(1, 4); 3]);
        let zero = chow_parameters(&BooleanFunction::zero(3).unwrap());
        assert!(zero.degree0.is_zero() && zero.degree1.iter().all(Zero::is_zero));
    }

    #[test]
    fn chow_word_path_matches_brute_force() {
        // arity >= 7 exercises the whole-word branch.
        let f = func(&wmon(9, 3));
        let chow = chow_parameters(&f);
        for i in 0..9 {
            assert_eq!(chow.degree1[i], brute_coefficient(&f, 1 << i));
        }
    }

    #[test]
    fn epsilon0_examples() {
        assert_eq!(epsilon0(&func(&maj(3))).unwrap(), rat(1, 4));
        assert_eq!(
            epsilon0(&func(&LtfSpec::from_ints(&[1]))).unwrap(),
            rat(1, 2)
        );
        // MON5 oracle: enumerate satisfying points directly.
        let f = func(&mon(5));
        let lambda = [rat(7, 16), rat(1, 16), rat(1, 16), rat(1, 16), rat(1, 16)];
        let brute = f
            .ones()
            .map(|m| {
                decode(m, 5)
                    .iter()
                    .zip(&lambda)
                    .map(|(&x, l)| l * int(i64::from(x)))
                    .sum::<Rational>()
            })
            .min()
            .unwrap();
        assert_eq!(epsilon0(&f).unwrap(), brute);
        // (-1, 1, 1, 1, 1) satisfies MON5 and scores -7/16 + 4/16.
        assert_eq!(brute, rat(-3, 16));
        assert_eq!(
            epsilon0(&BooleanFunction::zero(2).unwrap()),
            Err(Error::ConstantZero)
        );
    }

    #[test]
    fn epsilon_star_examples() {
        assert_eq!(epsilon_star(&func(&maj(3))).unwrap(), rat(1, 324));
        assert_eq!(
            epsilon_star(&func(&LtfSpec::from_ints(&[1]))).unwrap(),
            rat(1, 9)
        );
        assert_eq!(
            epsilon_star(&BooleanFunction::zero(2).unwrap()),
            Err(Error::ZeroDensity)
        );
        // MON4 has eps0 = 0 (president alone against three citizens).
        assert!(epsilon_star(&func(&mon(4))).unwrap().is_zero());
    }

    #[test]
    fn chow_self_definition() {
        assert!(chow_defines_self(&func(&maj(3))));
        assert!(!chow_defines_self(&func(&mon(5))));
        // sign(7 x1 + x2 + ... + x5) is the dictator on x1.
        let chow_ltf = chow_parameters(&func(&mon(5))).as_ltf();
        assert_eq!(func(&chow_ltf), func(&LtfSpec::from_ints(&[1, 0, 0, 0, 0])));
        assert!(!chow_defines_self(&BooleanFunction::zero(3).unwrap()));
    }

    fn arb_function(max_k: usize) -> impl Strategy<Value = BooleanFunction> {
        (1..=max_k).prop_flat_map(|k| {
            proptest::collection::vec(any::<bool>(), 1 << k)
                .prop_map(move |bits| BooleanFunction::from_fn(k, |m| bits[m]).unwrap())
        })
    }

    proptest! {
        #[test]
        fn prop_boolean_fn_bounds(f in arb_function(6)) {
            let s = fourier_spectrum(&f).unwrap();
            let d0 = s.coefficient(0);
            prop_assert_eq!(&d0, &f.rho());
            for subset in 0..f.len() {
                prop_assert!(s.coefficient(subset).abs() <= d0);
            }
            let chow = chow_parameters(&f);
            prop_assert_eq!(&chow.degree0, &d0);
            let bound = &d0 * int(f.arity() as i64);
            for m in 0..f.len() {
                let x = decode(m, f.arity());
                let sum: Rational = chow.degree1.iter().zip(&x).map(|(c, &v)| c * int(i64::from(v))).sum();
                prop_assert!(sum.abs() <= bound);
            }
            for i in 0..f.arity() {
                prop_assert_eq!(&chow.degree1[i], &s.coefficient(1 << i));
            }
        }

        #[test]
        fn prop_inversion_and_parseval(f in arb_function(12)) {
            let s = fourier_spectrum(&f).unwrap();
            let step = (f.len() / 64).max(1);
            for m in (0..f.len()).step_by(step) {
                let expected = if f.get(m) { int(1) } else { int(0) };
                prop_assert_eq!(s.evaluate(m), expected);
            }
            let energy: i128 = s.numerators().iter().map(|&c| i128::from(c) * i128::from(c)).sum();
            // sum fhat(S)^2 = fhat(0)  <=>  sum c_S^2 = 2^k c_0
            prop_assert_eq!(energy, i128::from(s.numerators()[0]) << f.arity());
        }
    }

    #[test]
    fn full_inversion_small_arities() {
        for k in 1..=8 {
            let f = BooleanFunction::from_fn(k, |m| (m * 2654435761) % 7 < 3).unwrap();
            let s = fourier_spectrum(&f).unwrap();
            for m in 0..f.len() {
                assert_eq!(s.evaluate(m), if f.get(m) { int(1) } else { int(0) });
            }
        }
    }
}
