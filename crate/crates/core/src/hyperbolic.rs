//! Cancellation-free forms of the hyperbolic combinations that appear in the
//! exponential spline coefficients.
//!
//! Each function takes `y` and returns the named ratio. For `|y|` below
//! [`SERIES_CUTOFF`] the ratio is summed from its Taylor series in `y²`, whose
//! terms are all positive, so no digits are lost. Above the cutoff the closed
//! form is used; there the subtraction it contains costs at most a few ulps.

/// Below this argument the series branch is used.
pub const SERIES_CUTOFF: f64 = 2.0;

const MAX_TERMS: usize = 40;

/// Sums `Σ_{k≥0} coeff(k) u^k` where `coeff(k+1)/coeff(k) = ratio(k)`.
#[inline]
fn series(u: f64, first: f64, ratio: impl Fn(f64) -> f64) -> f64 {
    let mut term = first;
    let mut sum = first;
    for k in 0..MAX_TERMS {
        term *= u * ratio(k as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    sum
}

/// `sinh(y) / y`, equal to 1 at the origin.
pub fn sinhc(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        // 1/(2k+1)!
        series(y * y, 1.0, |k| 1.0 / ((2.0 * k + 2.0) * (2.0 * k + 3.0)))
    } else {
        y.sinh() / y
    }
}

/// `(cosh(y) - 1) / y²`, equal to 1/2 at the origin.
pub fn coshm1_sq(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        // 1/(2k+2)!
        series(y * y, 0.5, |k| 1.0 / ((2.0 * k + 3.0) * (2.0 * k + 4.0)))
    } else {
        2.0 * (0.5 * y).sinh().powi(2) / (y * y)
    }
}

/// `(sinh(y) - y) / y³`, equal to 1/6 at the origin.
pub fn sinhm_cube(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        // 1/(2k+3)!
        series(y * y, 1.0 / 6.0, |k| {
            1.0 / ((2.0 * k + 4.0) * (2.0 * k + 5.0))
        })
    } else {
        (y.sinh() - y) / (y * y * y)
    }
}

/// `(y cosh(y) - sinh(y)) / y³`, equal to 1/3 at the origin.
///
/// This is the common denominator of every spline coefficient.
pub fn tension_denominator(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        // (2k+2)/(2k+3)!
        series(y * y, 1.0 / 3.0, |k| {
            (2.0 * k + 4.0) / ((2.0 * k + 2.0) * (2.0 * k + 4.0) * (2.0 * k + 5.0))
        })
    } else {
        (y * y.cosh() - y.sinh()) / (y * y * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn origin_values() {
        assert_eq!(sinhc(0.0), 1.0);
        assert_eq!(coshm1_sq(0.0), 0.5);
        assert_eq!(sinhm_cube(0.0), 1.0 / 6.0);
        assert_eq!(tension_denominator(0.0), 1.0 / 3.0);
    }

    #[test]
    fn branches_meet_at_cutoff() {
        let below = f64::from_bits(SERIES_CUTOFF.to_bits() - 1);
        let above = SERIES_CUTOFF;
        for f in [sinhc, coshm1_sq, sinhm_cube, tension_denominator] {
            assert!(rel(f(below), f(above)) < 1e-14);
        }
    }

    #[test]
    fn matches_closed_form_where_closed_form_is_accurate() {
        for &y in &[0.5_f64, 1.0, 1.5, 1.99] {
            assert!(rel(sinhc(y), y.sinh() / y) < 1e-15);
            assert!(rel(coshm1_sq(y), (y.cosh() - 1.0) / (y * y)) < 1e-14);
            assert!(rel(sinhm_cube(y), (y.sinh() - y) / y.powi(3)) < 1e-13);
            assert!(rel(tension_denominator(y), (y * y.cosh() - y.sinh()) / y.powi(3)) < 1e-13);
        }
    }

    #[test]
    fn even_in_argument() {
        for &y in &[1e-7, 0.3, 2.5] {
            assert_eq!(sinhc(y), sinhc(-y));
            assert_eq!(tension_denominator(y), tension_denominator(-y));
        }
    }

    #[test]
    fn small_argument_leading_corrections() {
        // D(y) = 1/3 + y²/30 + y⁴/840 + ...
        let y: f64 = 1e-3;
        let expect = 1.0 / 3.0 + y * y / 30.0 + y.powi(4) / 840.0;
        assert!(rel(tension_denominator(y), expect) < 1e-16);
    }
}
