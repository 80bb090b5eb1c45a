use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{h_basis, ReducedDistribution};
use crate::error::{Error, Result};
use crate::lp::{
    minimize, solve, FarkasCertificate, FeasibilityOutcome, LinearProgram, LpRow, Relation,
};
use crate::rational::{format_rational, int, parse_rational, rat, Rational};

/// Feasibility system over `(u_0..u_{k-1}, v_0..v_{k-1})` whose solutions are
/// exactly the reduced distributions in both the yes-set and the no-set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonarchyLp {
    pub k: usize,
    pub lp: LinearProgram,
    pub mass_row: usize,
    /// `h_rows[r]` pins the coefficient of `p^r`.
    pub h_rows: Vec<usize>,
    pub ky1_row: usize,
}

impl MonarchyLp {
    pub fn row_labels(&self) -> Vec<&str> {
        self.lp.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.lp.rows.iter().position(|r| r.label == label)
    }

    /// Labels of the rows a candidate violates.
    pub fn check_witness(&self, d: &ReducedDistribution) -> Vec<String> {
        if d.k() != self.k {
            return vec![format!("arity {} != {}", d.k(), self.k)];
        }
        self.lp.violated_rows(&d.to_vector())
    }

    /// The yes-side objective `μ1 (k-2) + μ' (k-1)` in `(u, v)` coordinates.
    pub fn ky1_coeffs(&self) -> &[Rational] {
        &self.lp.rows[self.ky1_row].coeffs
    }

    fn without_ky1(&self) -> LinearProgram {
        let mut lp = self.lp.clone();
        lp.rows.remove(self.ky1_row);
        lp
    }
}

pub fn build_monarchy_lp(k: usize) -> MonarchyLp {
    assert!(k >= 2, "monarchy LP needs k >= 2");
    let n = 2 * k;
    let unit = |j: usize| -> Vec<Rational> {
        (0..n)
            .map(|t| if t == j { int(1) } else { int(0) })
            .collect()
    };
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        let name = if j < k {
            format!("u{j}")
        } else {
            format!("v{}", j - k)
        };
        lp.push(LpRow::new(
            format!("{name}>=0"),
            unit(j),
            Relation::Ge,
            int(0),
        ));
    }
    let mass_row = lp.push(LpRow::new("mass", vec![int(1); n], Relation::Eq, int(1)));
    let basis = h_basis(k);
    let h_rows = (0..=k)
        .map(|r| {
            let coeffs = basis.iter().map(|b| b.coeff(r)).collect();
            let rhs = if r == 0 { rat(1, 2) } else { int(0) };
            lp.push(LpRow::new(format!("h[p^{r}]"), coeffs, Relation::Eq, rhs))
        })
        .collect();
    // μ1 (k-2) + μ'(k-1) >= 1: u_i gets 2i - 1, v_i gets 2i - 2k + 3.
    let ki = k as i64;
    let ky1: Vec<Rational> = (0..ki)
        .map(|i| int(2 * i - 1))
        .chain((0..ki).map(|i| int(2 * i - 2 * ki + 3)))
        .collect();
    let ky1_row = lp.push(LpRow::new("ky1", ky1, Relation::Ge, int(1)));
    MonarchyLp {
        k,
        lp,
        mass_row,
        h_rows,
        ky1_row,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonarchyOutcome {
    Feasible { witness: ReducedDistribution },
    Infeasible { farkas: FarkasCertificate },
}

impl MonarchyOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, MonarchyOutcome::Feasible { .. })
    }
}

pub fn solve_lp(m: &MonarchyLp) -> Result<MonarchyOutcome> {
    Ok(match solve(&m.lp)? {
        FeasibilityOutcome::Feasible { point } => MonarchyOutcome::Feasible {
            witness: ReducedDistribution::from_vector(&point)?,
        },
        FeasibilityOutcome::Infeasible { farkas } => MonarchyOutcome::Infeasible { farkas },
    })
}

/// For a Farkas certificate that uses the `ky1` row with positive weight,
/// the remaining rows prove `μ1 (k-2) + μ' (k-1) <= bound` on the no-side.
pub fn implied_bound(m: &MonarchyLp, farkas: &FarkasCertificate) -> Option<Rational> {
    let lam = farkas.multipliers.get(m.ky1_row)?;
    if !lam.is_positive() {
        return None;
    }
    let total: Rational =
        m.lp.rows
            .iter()
            .zip(&farkas.multipliers)
            .map(|(r, l)| l * &r.rhs)
            .sum();
    Some(int(1) - total / lam)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ky1Bound {
    /// Exact maximum of the yes-side objective over the no-side set.
    pub max_value: Rational,
    /// Farkas certificate for the full system with `ky1` weight 1, present
    /// when `max_value < 1`.
    pub farkas: Option<FarkasCertificate>,
}

/// Maximizes the yes-side objective subject to every row except `ky1`.
pub fn ky1_bound(m: &MonarchyLp) -> Result<Ky1Bound> {
    let rest = m.without_ky1();
    let neg: Vec<Rational> = m.ky1_coeffs().iter().map(|c| -c).collect();
    let opt = minimize(&rest, &neg)?
        .ok_or_else(|| Error::MalformedLp("no-side system is empty".into()))?;
    let max_value = -opt.value;
    let farkas = (max_value < int(1)).then(|| {
        let mut multipliers = opt.dual;
        multipliers.insert(m.ky1_row, int(1));
        FarkasCertificate { multipliers }
    });
    Ok(Ky1Bound { max_value, farkas })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Approximable,
    Resistant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonarchyDecision {
    pub k: usize,
    pub verdict: Verdict,
    pub outcome: MonarchyOutcome,
    /// For approximable `k`: the exact no-side maximum of
    /// `μ1 (k-2) + μ' (k-1)`, certified by `outcome`.
    pub implied_bound: Option<Rational>,
}

/// Resistant iff the LP is feasible. Infeasible verdicts carry the tightest
/// certificate: the optimal dual of the no-side maximization.
pub fn decide_monarchy(k: usize) -> Result<MonarchyDecision> {
    let m = build_monarchy_lp(k);
    match solve_lp(&m)? {
        MonarchyOutcome::Feasible { witness } => Ok(MonarchyDecision {
            k,
            verdict: Verdict::Resistant,
            outcome: MonarchyOutcome::Feasible { witness },
            implied_bound: None,
        }),
        MonarchyOutcome::Infeasible { farkas } => {
            let tight = ky1_bound(&m)?;
            let (farkas, bound) = match tight.farkas {
                Some(f) => (f, Some(tight.max_value)),
                None => {
                    let b = implied_bound(&m, &farkas);
                    (farkas, b)
                }
            };
            m.lp.check_farkas(&farkas).map_err(Error::MalformedLp)?;
            Ok(MonarchyDecision {
                k,
                verdict: Verdict::Approximable,
                outcome: MonarchyOutcome::Infeasible { farkas },
                implied_bound: bound,
            })
        }
    }
}

/// The hand-derived k = 4 combination: `3 ×` the `p^1` row, `-13/6 ×` the
/// `p^3` row and `2/3 ×` the mass row, with the leftover coefficients charged
/// to nonnegativity rows.
pub fn hand_k4_certificate(m: &MonarchyLp) -> FarkasCertificate {
    assert_eq!(m.k, 4);
    let mut lam = vec![Rational::zero(); m.lp.rows.len()];
    lam[m.ky1_row] = int(1);
    lam[m.h_rows[1]] = int(-3);
    lam[m.h_rows[3]] = rat(13, 6);
    lam[m.mass_row] = rat(-2, 3);
    let combined = m.lp.combine(&lam);
    for (j, c) in combined.iter().enumerate() {
        // Rows 0..2k are the nonnegativity rows, in variable order.
        lam[j] = -c;
    }
    FarkasCertificate { multipliers: lam }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMultiplier {
    pub row: String,
    pub value: String,
}

/// Replayable form of a decision. Rationals are `p/q` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub k: usize,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_u: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_v: Option<Vec<String>>,
    /// Nonzero multipliers only, by row label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farkas: Option<Vec<RowMultiplier>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implied_bound: Option<String>,
}

impl MonarchyDecision {
    pub fn to_certificate(&self) -> CertificateFile {
        let strings = |xs: &[Rational]| xs.iter().map(format_rational).collect::<Vec<_>>();
        let mut file = CertificateFile {
            k: self.k,
            verdict: self.verdict,
            witness_u: None,
            witness_v: None,
            farkas: None,
            implied_bound: self.implied_bound.as_ref().map(format_rational),
        };
        match &self.outcome {
            MonarchyOutcome::Feasible { witness } => {
                file.witness_u = Some(strings(witness.u()));
                file.witness_v = Some(strings(witness.v()));
            }
            MonarchyOutcome::Infeasible { farkas } => {
                let m = build_monarchy_lp(self.k);
                file.farkas = Some(
                    m.lp.rows
                        .iter()
                        .zip(&farkas.multipliers)
                        .filter(|(_, l)| !l.is_zero())
                        .map(|(r, l)| RowMultiplier {
                            row: r.label.clone(),
                            value: format_rational(l),
                        })
                        .collect(),
                );
            }
        }
        file
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateCheck {
    pub k: usize,
    pub verdict: Verdict,
    pub valid: bool,
    pub detail: String,
    /// Bound re-derived from the multipliers, for infeasibility certificates.
    pub implied_bound: Option<Rational>,
}

fn parse_all(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter()
        .map(|s| parse_rational(s).ok_or_else(|| Error::parse(0, format!("bad rational {s:?}"))))
        .collect()
}

/// Rebuilds the LP for `k` and checks the certificate against it without
/// running the solver.
pub fn verify_certificate(cert: &CertificateFile) -> Result<CertificateCheck> {
    if cert.k < 2 {
        return Err(Error::MalformedLp(format!("k = {} too small", cert.k)));
    }
    let m = build_monarchy_lp(cert.k);
    let mut check = CertificateCheck {
        k: cert.k,
        verdict: cert.verdict,
        valid: false,
        detail: String::new(),
        implied_bound: None,
    };
    match cert.verdict {
        Verdict::Resistant => {
            let (Some(u), Some(v)) = (&cert.witness_u, &cert.witness_v) else {
                return Err(Error::MalformedLp(
                    "resistant verdict needs witness_u and witness_v".into(),
                ));
            };
            let d = ReducedDistribution::raw(parse_all(u)?, parse_all(v)?)?;
            let violated = m.check_witness(&d);
            check.valid = violated.is_empty();
            check.detail = if check.valid {
                format!("witness satisfies all {} rows", m.lp.rows.len())
            } else {
                format!("witness violates: {}", violated.join(", "))
            };
        }
        Verdict::Approximable => {
            let Some(entries) = &cert.farkas else {
                return Err(Error::MalformedLp(
                    "approximable verdict needs farkas multipliers".into(),
                ));
            };
            let mut lam = vec![Rational::zero(); m.lp.rows.len()];
            for e in entries {
                let i = m
                    .row_index(&e.row)
                    .ok_or_else(|| Error::MalformedLp(format!("unknown row {:?}", e.row)))?;
                lam[i] = parse_rational(&e.value)
                    .ok_or_else(|| Error::parse(0, format!("bad rational {:?}", e.value)))?;
            }
            let farkas = FarkasCertificate { multipliers: lam };
            match m.lp.check_farkas(&farkas) {
                Ok(gap) => {
                    check.valid = true;
                    check.detail = format!("rows combine to 0 >= {}", format_rational(&gap));
                    check.implied_bound = implied_bound(&m, &farkas);
                }
                Err(e) => check.detail = e,
            }
            if let (Some(claimed), true) = (&cert.implied_bound, check.valid) {
                let claimed = parse_rational(claimed)
                    .ok_or_else(|| Error::parse(0, format!("bad rational {claimed:?}")))?;
                if check.implied_bound.as_ref() != Some(&claimed) {
                    check.valid = false;
                    check.detail = format!(
                        "claimed bound {} does not follow from the multipliers",
                        format_rational(&claimed)
                    );
                }
            }
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monarchy::witness;

    #[test]
    fn k4_is_approximable_with_tight_bound() {
        let d = decide_monarchy(4).unwrap();
        assert_eq!(d.verdict, Verdict::Approximable);
        let bound = d.implied_bound.clone().unwrap();
        assert!(bound <= rat(2, 3), "bound {bound}");
        let m = build_monarchy_lp(4);
        let MonarchyOutcome::Infeasible { farkas } = &d.outcome else {
            panic!()
        };
        assert_eq!(implied_bound(&m, farkas), Some(bound));
    }

    #[test]
    fn hand_combination_replays() {
        let m = build_monarchy_lp(4);
        let cert = hand_k4_certificate(&m);
        assert_eq!(m.lp.check_farkas(&cert), Ok(rat(1, 3)));
        assert_eq!(implied_bound(&m, &cert), Some(rat(2, 3)));
        assert!(cert.multipliers[..8].iter().all(|l| !l.is_negative()));
    }

    #[test]
    fn small_k_verdicts() {
        for k in 2..=4 {
            assert_eq!(
                decide_monarchy(k).unwrap().verdict,
                Verdict::Approximable,
                "k={k}"
            );
        }
        for k in 5..=7 {
            let d = decide_monarchy(k).unwrap();
            assert_eq!(d.verdict, Verdict::Resistant, "k={k}");
            let MonarchyOutcome::Feasible { witness } = &d.outcome else {
                panic!()
            };
            assert!(build_monarchy_lp(k).check_witness(witness).is_empty());
        }
    }

    #[test]
    fn rows_and_witnesses() {
        let m = build_monarchy_lp(5);
        assert_eq!(m.lp.rows.len(), 10 + 1 + 6 + 1);
        assert!(m.check_witness(&witness(5).unwrap()).is_empty());
        let uniform = ReducedDistribution::uniform(5);
        assert_eq!(m.check_witness(&uniform), vec!["ky1".to_string()]);
        let m4 = build_monarchy_lp(4);
        let g: Vec<i64> = vec![-1, 1, 3, 5, -5, -3, -1, 1];
        assert_eq!(
            m4.ky1_coeffs(),
            g.iter().map(|&x| int(x)).collect::<Vec<_>>().as_slice()
        );
    }

    #[test]
    fn certificates_round_trip_through_checker() {
        for k in [4, 5] {
            let d = decide_monarchy(k).unwrap();
            let file = d.to_certificate();
            let check = verify_certificate(&file).unwrap();
            assert!(check.valid, "{check:?}");
            assert_eq!(check.implied_bound, d.implied_bound);
        }
    }

    #[test]
    fn tampered_certificates_fail() {
        let mut file = decide_monarchy(4).unwrap().to_certificate();
        let entries = file.farkas.as_mut().unwrap();
        entries[0].value = "12345".into();
        assert!(!verify_certificate(&file).unwrap().valid);

        let mut file = decide_monarchy(5).unwrap().to_certificate();
        file.witness_u.as_mut().unwrap()[0] = "1/2".into();
        assert!(!verify_certificate(&file).unwrap().valid);

        let mut file = decide_monarchy(4).unwrap().to_certificate();
        file.implied_bound = Some("1/2".into());
        assert!(!verify_certificate(&file).unwrap().valid);
    }
}
