//! Seeded instance generators.
//!
//! The stream is `Pcg32::seed_from_u64(seed)`. Each constraint draws its
//! `k` variables one at a time with `random_range(0..n)`, redrawing repeats,
//! then `k` signs with `random::<bool>()` (`true` is `+`). All weights are 1.

use num_traits::One;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;

use super::{Assignment, Constraint, CspInstance, Predicate};
use crate::error::{Error, Result};
use crate::rational::Rational;

fn draw(rng: &mut Pcg32, n: usize, k: usize) -> Constraint {
    let mut indices = Vec::with_capacity(k);
    while indices.len() < k {
        let j = rng.random_range(0..n);
        if !indices.contains(&j) {
            indices.push(j);
        }
    }
    let signs = (0..k)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    Constraint::new(indices, signs, Rational::one()).expect("generated constraint is well formed")
}

fn check(predicate: &Predicate, n: usize, m: usize) -> Result<()> {
    let k = predicate.arity();
    if n < k {
        return Err(Error::TooFewVariables { n, k });
    }
    if m == 0 {
        return Err(Error::InvalidConstraint("m must be at least 1".into()));
    }
    Ok(())
}

pub fn random_instance(
    predicate: &Predicate,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<CspInstance> {
    check(predicate, n, m)?;
    let mut rng = Pcg32::seed_from_u64(seed);
    let k = predicate.arity();
    let constraints = (0..m).map(|_| draw(&mut rng, n, k)).collect();
    CspInstance::new(n, predicate.clone(), constraints)
}

/// Uniform `σ ∈ {-1,1}^n` from `Pcg32::seed_from_u64(seed)`, one
/// `random::<bool>()` per variable.
pub fn random_assignment(n: usize, seed: u64) -> Assignment {
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut sigma = Assignment::all_negative(n);
    for l in 0..n {
        sigma.set(l, rng.random::<bool>());
    }
    sigma
}

/// Like [`random_instance`], but every constraint `sigma` violates is
/// discarded and redrawn, so `sigma` satisfies the whole instance.
pub fn planted_instance(
    predicate: &Predicate,
    n: usize,
    m: usize,
    seed: u64,
    sigma: &Assignment,
) -> Result<CspInstance> {
    check(predicate, n, m)?;
    if predicate.function().is_constant_zero() {
        return Err(Error::ConstantZero);
    }
    if sigma.len() != n {
        return Err(Error::InvalidConstraint(format!(
            "planted assignment has length {} but n = {n}",
            sigma.len()
        )));
    }
    let mut rng = Pcg32::seed_from_u64(seed);
    let k = predicate.arity();
    let f = predicate.function();
    let mut constraints = Vec::with_capacity(m);
    while constraints.len() < m {
        let c = draw(&mut rng, n, k);
        if f.get(c.local_index(sigma)) {
            constraints.push(c);
        }
    }
    CspInstance::new(n, predicate.clone(), constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_fn::{maj, mon, BooleanFunction};
    use crate::csp::write_instance;
    use crate::rational::{int, rat};

    fn maj3() -> Predicate {
        Predicate::from_ltf(maj(3)).unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let a = random_instance(&maj3(), 10, 40, 7).unwrap();
        let b = random_instance(&maj3(), 10, 40, 7).unwrap();
        let c = random_instance(&maj3(), 10, 40, 8).unwrap();
        assert_eq!(write_instance(&a), write_instance(&b));
        assert_ne!(write_instance(&a), write_instance(&c));
    }

    #[test]
    fn planted_has_optimum_one() {
        let p = Predicate::from_ltf(mon(4)).unwrap();
        for seed in 0..5 {
            let sigma = Assignment::from_bits(12, 0xa5a ^ seed);
            let inst = planted_instance(&p, 12, 60, seed, &sigma).unwrap();
            assert_eq!(inst.value(&sigma).unwrap(), int(1));
            assert_eq!(inst.brute_force_value().unwrap().0, int(1));
        }
    }

    #[test]
    fn random_optimum_beats_density() {
        for seed in 0..5 {
            let inst = random_instance(&maj3(), 14, 200, seed).unwrap();
            assert!(inst.brute_force_value().unwrap().0 >= rat(1, 2));
        }
    }

    #[test]
    fn generator_errors() {
        assert_eq!(
            random_instance(&maj3(), 2, 5, 0),
            Err(Error::TooFewVariables { n: 2, k: 3 })
        );
        let zero = Predicate::from_function(BooleanFunction::zero(3).unwrap());
        assert_eq!(
            planted_instance(&zero, 5, 5, 0, &Assignment::all_negative(5)),
            Err(Error::ConstantZero)
        );
    }
}
