//! Transitive correlation bounds.
//!
//! Given the correlation `rho_tc` of the template with a group center and the
//! auto-correlation `rho_co` of that center with an outer location, the
//! unknown template/outer correlation lies in
//! `rho_tc*rho_co -/+ sqrt((1 - rho_tc^2)(1 - rho_co^2))`.

use crate::error::{Error, Result};
use crate::math;

const RANGE_TOLERANCE: f64 = 1e-9;

fn checked(rho: f64) -> Result<f64> {
    if !(rho >= -1.0 - RANGE_TOLERANCE && rho <= 1.0 + RANGE_TOLERANCE) {
        return Err(Error::CorrelationOutOfRange(rho));
    }
    Ok(math::clamp_unit(rho))
}

/// Lower and upper transitive bounds on the bounded correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

impl BoundPair {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, rho: f64, tol: f64) -> bool {
        rho >= self.lower - tol && rho <= self.upper + tol
    }
}

#[inline]
fn half_gap(a: f64, b: f64) -> f64 {
    math::sqrt_pos((1.0 - a * a) * (1.0 - b * b))
}

/// Unchecked upper bound for inputs already known to lie in `[-1, 1]`.
#[inline]
pub(crate) fn upper_bound(rho_tc: f64, rho_co: f64) -> f64 {
    math::clamp_unit(rho_tc * rho_co + half_gap(rho_tc, rho_co))
}

pub fn transitive_bounds(rho_tc: f64, rho_co: f64) -> Result<BoundPair> {
    let (a, b) = (checked(rho_tc)?, checked(rho_co)?);
    let prod = a * b;
    let half = half_gap(a, b);
    Ok(BoundPair { lower: math::clamp_unit(prod - half), upper: math::clamp_unit(prod + half) })
}

/// Transitive gap `2 sqrt(1 - rho_tc^2) sqrt(1 - rho_co^2)`.
pub fn transitive_gap(rho_tc: f64, rho_co: f64) -> Result<f64> {
    let (a, b) = (checked(rho_tc)?, checked(rho_co)?);
    Ok(2.0 * math::sqrt_pos(1.0 - a * a) * math::sqrt_pos(1.0 - b * b))
}

/// Sufficient elimination condition: an achieved correlation `rho_tb` at or
/// above the upper bound proves the outer location cannot do better.
pub fn sec_holds(rho_tb: f64, rho_tc: f64, rho_co: f64) -> Result<bool> {
    let tb = checked(rho_tb)?;
    let (a, b) = (checked(rho_tc)?, checked(rho_co)?);
    Ok(tb >= upper_bound(a, b))
}

/// Smallest auto-correlation for which the elimination condition holds at
/// threshold `rho_tb` and center correlation `rho_tc` (upper root of the
/// quadratic in `rho_co`; the lower root is ignored).
///
/// Only meaningful for `rho_tc <= rho_tb`: a center that already beats the
/// threshold leaves nothing in its group provably worse.
pub fn elimination_autocorr_threshold(rho_tb: f64, rho_tc: f64) -> Result<f64> {
    let (tb, tc) = (checked(rho_tb)?, checked(rho_tc)?);
    let radicand = 1.0 + tc * tc * tb * tb - (tc * tc + tb * tb);
    Ok(tb * tc + math::sqrt_pos(radicand))
}

/// `sqrt(1 - rho_tb^2)`: the auto-correlation above which a location is
/// expected to be eliminated when the template is uncorrelated with the center.
pub fn expected_elimination_threshold(rho_tb: f64) -> Result<f64> {
    let tb = checked(rho_tb)?;
    Ok(math::sqrt_pos(1.0 - tb * tb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_autocorrelation_collapses_gap() {
        for x in [-0.9, -0.2, 0.0, 0.35, 0.99] {
            let b = transitive_bounds(x, 1.0).unwrap();
            assert!((b.lower - x).abs() < 1e-15 && (b.upper - x).abs() < 1e-15);
            assert_eq!(transitive_gap(x, 1.0).unwrap(), 0.0);
            assert_eq!(transitive_gap(x, -1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn hand_evaluated_pair() {
        // 0.61*0.81 = 0.4941; sqrt(0.6279 * 0.3439) = 0.464684...
        let b = transitive_bounds(0.61, 0.81).unwrap();
        assert!((b.lower - 0.029416).abs() < 1e-5, "{b:?}");
        assert!((b.upper - 0.958784).abs() < 1e-5, "{b:?}");
        assert!((transitive_gap(0.61, 0.81).unwrap() - 0.929368).abs() < 1e-5);
    }

    #[test]
    fn uninformative_bounds() {
        let b = transitive_bounds(0.0, 0.0).unwrap();
        assert_eq!((b.lower, b.upper), (-1.0, 1.0));
        assert_eq!(transitive_gap(0.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn elimination_condition_examples() {
        assert!(sec_holds(1.0, 0.3, -0.2).unwrap());
        assert!(!sec_holds(0.5, 0.0, 0.0).unwrap());
        assert!(!sec_holds(0.95, 0.61, 0.81).unwrap());
    }

    #[test]
    fn autocorr_threshold_examples() {
        assert!((elimination_autocorr_threshold(0.8, 0.0).unwrap() - 0.6).abs() < 1e-12);
        assert!((elimination_autocorr_threshold(1.0, 0.42).unwrap() - 0.42).abs() < 1e-12);
        let want = 0.27 + 0.1729f64.sqrt();
        assert!((elimination_autocorr_threshold(0.9, 0.3).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.6858).abs() < 1e-4);
    }

    #[test]
    fn expected_threshold_examples() {
        assert_eq!(expected_elimination_threshold(1.0).unwrap(), 0.0);
        assert_eq!(expected_elimination_threshold(0.0).unwrap(), 1.0);
        assert!((expected_elimination_threshold(0.8).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn range_checks() {
        assert!(transitive_bounds(1.0 + 1e-10, 0.0).is_ok());
        assert!(matches!(transitive_bounds(1.01, 0.0), Err(Error::CorrelationOutOfRange(_))));
        assert!(sec_holds(0.5, f64::NAN, 0.0).is_err());
        assert!(expected_elimination_threshold(-1.5).is_err());
    }

    proptest! {
        #[test]
        fn gap_is_symmetric_and_matches_bounds(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            let g = transitive_gap(a, b).unwrap();
            prop_assert_eq!(g.to_bits(), transitive_gap(b, a).unwrap().to_bits());
            prop_assert!((0.0..=2.0).contains(&g));
            let prod = a * b;
            let half = ((1.0 - a * a) * (1.0 - b * b)).max(0.0).sqrt();
            prop_assert!(((prod + half) - (prod - half) - g).abs() < 1e-12);
            let bp = transitive_bounds(a, b).unwrap();
            prop_assert!(-1.0 <= bp.lower && bp.lower <= bp.upper && bp.upper <= 1.0);
        }

        #[test]
        fn gap_decreases_with_autocorrelation(tc in -0.999f64..0.999, x in 0.0f64..0.999, dx in 1e-6f64..0.5) {
            let y = (x + dx).min(1.0);
            prop_assert!(transitive_gap(tc, y).unwrap() < transitive_gap(tc, x).unwrap());
            prop_assert!(transitive_gap(tc, -y).unwrap() < transitive_gap(tc, -x).unwrap());
        }

        #[test]
        fn threshold_implies_elimination(tb in -1.0f64..=1.0, tc in -1.0f64..=1.0, extra in 0.0f64..1.0) {
            prop_assume!(tc <= tb);
            let thr = elimination_autocorr_threshold(tb, tc).unwrap();
            prop_assert!(thr <= 1.0 + 1e-12);
            let co = (thr + extra * (1.0 - thr)).min(1.0);
            // Allow the rounding of the root itself.
            prop_assert!(tb + 1e-9 >= upper_bound(tc, co));
        }
    }
}
