use num_traits::{Signed, Zero};

use super::ltf::{is_balanced_ltf, LtfSpec};
use super::BooleanFunction;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ltf4Class {
    Dictator,
    Mon4,
    Maj3,
}

/// Verdict plus the normal form it was read off. Canonical position `c` holds
/// original variable `permutation[c]`, negated when `negated[c]` is set.
/// Positions at or beyond the spec's arity are zero-weight padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ltf4Classification {
    pub class: Ltf4Class,
    pub arity: usize,
    pub permutation: [usize; 4],
    pub negated: [bool; 4],
    pub normalized_weights: [Rational; 4],
}

impl Ltf4Classification {
    /// The canonical predicate (dictator, MON4, or MAJ on the top three
    /// positions) pulled back through the recorded relabeling.
    pub fn materialize(&self) -> Result<BooleanFunction> {
        let (weights, used): ([i32; 4], usize) = match self.class {
            Ltf4Class::Dictator => ([1, 0, 0, 0], 1),
            Ltf4Class::Mon4 => ([2, 1, 1, 1], 4),
            Ltf4Class::Maj3 => ([1, 1, 1, 0], 3),
        };
        debug_assert!(self.permutation[..used].iter().all(|&p| p < self.arity));
        BooleanFunction::from_points(self.arity, |x| {
            let z: i32 = (0..used)
                .map(|c| {
                    let v = i32::from(x[self.permutation[c]]);
                    weights[c] * if self.negated[c] { -v } else { v }
                })
                .sum();
            z > 0
        })
    }
}

/// Classifies a balanced LTF on at most four variables after padding to four,
/// flipping negative weights and sorting by magnitude.
pub fn classify_balanced_ltf4(spec: &LtfSpec) -> Result<Ltf4Classification> {
    let k = spec.arity();
    if k == 0 || k > 4 {
        return Err(Error::ArityOutOfRange(k));
    }
    if !is_balanced_ltf(spec) {
        return Err(Error::NotBalanced);
    }
    let mut entries: Vec<(usize, bool, Rational)> = (0..4)
        .map(|i| match spec.weights.get(i) {
            Some(w) => (i, w.is_negative(), w.abs()),
            None => (i, false, Rational::zero()),
        })
        .collect();
    // Stable: equal magnitudes keep their original order, padding stays last.
    entries.sort_by(|a, b| b.2.cmp(&a.2));
    let w: [Rational; 4] = std::array::from_fn(|c| entries[c].2.clone());
    let class = if w[0] > &w[1] + &w[2] + &w[3] {
        Ltf4Class::Dictator
    } else if w[0] < &w[1] + &w[2] - &w[3] {
        Ltf4Class::Maj3
    } else {
        // Balancedness rules out both boundary equalities.
        Ltf4Class::Mon4
    };
    Ok(Ltf4Classification {
        class,
        arity: k,
        permutation: std::array::from_fn(|c| entries[c].0),
        negated: std::array::from_fn(|c| entries[c].1),
        normalized_weights: w,
    })
}
