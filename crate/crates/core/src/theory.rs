//! Closed-form calculators: hypothesis-space size, sample complexity, and
//! the condition under which the play-augmented learner needs fewer
//! examples than the plain one.

use num_bigint::BigUint;
use thiserror::Error;

/// Parameters of the sample-complexity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilParams {
    /// Predicate symbol count (>= 1).
    pub p: u64,
    /// Metarule count (>= 1).
    pub m: u64,
    /// Maximum body literals per metarule (>= 1).
    pub j: u32,
    /// Clause bound (>= 0 for the space size, >= 1 for the sample bound).
    pub n: u32,
    /// Error, in (0, 1].
    pub epsilon: f64,
    /// Confidence, in (0, 1].
    pub delta: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{0} must be >= 1")]
    AtLeastOne(&'static str),
    #[error("{0} must lie in (0, 1], got {1}")]
    UnitInterval(&'static str, f64),
}

impl MilParams {
    pub fn new(p: u64, m: u64, j: u32, n: u32, epsilon: f64, delta: f64) -> Result<Self, ParamError> {
        if p < 1 {
            return Err(ParamError::AtLeastOne("p"));
        }
        if m < 1 {
            return Err(ParamError::AtLeastOne("m"));
        }
        if j < 1 {
            return Err(ParamError::AtLeastOne("j"));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ParamError::UnitInterval("epsilon", epsilon));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(ParamError::UnitInterval("delta", delta));
        }
        Ok(MilParams { p, m, j, n, epsilon, delta })
    }
}

/// Number of programs expressible with n clauses: (m * p^(j+1))^n, exactly.
pub fn hypothesis_space_size(m: u64, p: u64, j: u32, n: u32) -> BigUint {
    (BigUint::from(m) * BigUint::from(p).pow(j + 1)).pow(n)
}

/// Lower bound on the number of training examples for error epsilon with
/// confidence delta:
/// (1/eps) * (n ln m + (j+1) n ln p + ln(1/delta)).
pub fn sample_bound(params: &MilParams) -> f64 {
    let MilParams { p, m, j, n, epsilon, delta } = *params;
    let n = n as f64;
    let terms = n * (m as f64).ln() + (j as f64 + 1.0) * n * (p as f64).ln() + (1.0 / delta).ln();
    terms / epsilon
}

/// Whether a learner that spends k fewer clauses at the price of c extra
/// predicate symbols has the strictly smaller sample bound:
/// n ln(p) > (n-k) ln(p+c), decided exactly as p^n > (p+c)^(n-k) so floating
/// error can never flip a near-equality.
pub fn playgol_improves(n: u32, k: u32, p: u64, c: u64) -> bool {
    assert!(n >= 1, "n must be >= 1");
    assert!(k <= n, "k must satisfy 0 <= k <= n");
    assert!(p >= 1, "p must be >= 1");
    BigUint::from(p).pow(n) > BigUint::from(p + c).pow(n - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_size_with_zero_clauses_is_one() {
        assert_eq!(hypothesis_space_size(3, 7, 2, 0), BigUint::from(1u8));
    }

    #[test]
    fn space_size_small_cases() {
        // Frozen from enumerating distinct instantiations: 2 metarules with
        // two free body slots over 3 symbols give 2*3^3 = 54 clauses; one
        // single-body-literal metarule over 2 symbols gives 4 clauses and
        // 16 ordered 2-clause programs.
        assert_eq!(hypothesis_space_size(2, 3, 2, 1), BigUint::from(54u8));
        assert_eq!(hypothesis_space_size(1, 2, 1, 2), BigUint::from(16u8));
    }

    #[test]
    fn sample_bound_reduces_when_eps_delta_are_one() {
        let params = MilParams::new(10, 4, 2, 3, 1.0, 1.0).unwrap();
        let expect = 3.0 * 4f64.ln() + 3.0 * 3.0 * 10f64.ln();
        assert!((sample_bound(&params) - expect).abs() < 1e-12);
    }

    #[test]
    fn sample_bound_monotone_in_p() {
        let at = |p| sample_bound(&MilParams::new(p, 4, 2, 3, 0.1, 0.05).unwrap());
        assert!(at(6) > at(5));
    }

    #[test]
    fn improvement_boundary_cases() {
        // No clause saved but extra predicates: strictly worse.
        assert!(!playgol_improves(3, 0, 2, 5));
        // Clauses saved at no predicate cost: strictly better.
        assert!(playgol_improves(3, 1, 2, 0));
        // 2 ln 10 > 1 ln 11.
        assert!(playgol_improves(2, 1, 10, 1));
        // Exact equality must come out false: p=4,c=0 gives p^n == (p+c)^n at k=0.
        assert!(!playgol_improves(2, 0, 4, 0));
        // p=1: 1^n = 1 is never greater than (1+c)^(n-k) >= 1.
        assert!(!playgol_improves(2, 1, 1, 3));
        // k=n: p^n > 1 whenever p >= 2.
        assert!(playgol_improves(2, 2, 2, 100));
    }

    #[test]
    fn param_validation() {
        assert!(MilParams::new(0, 1, 1, 1, 0.5, 0.5).is_err());
        assert!(MilParams::new(1, 1, 1, 1, 0.0, 0.5).is_err());
        assert!(MilParams::new(1, 1, 1, 1, 0.5, 1.5).is_err());
    }
}
