//! Exponential (tension) cubic B-splines on a uniform grid.
//!
//! `B_m` is supported on `[x_{m-2}, x_{m+2}]` and normalized so that
//! `B_m(x_m) = 1`. On the inner intervals it is
//! `a1 + b1·ξ + c1·exp(ρξ) + d1·exp(-ρξ)` with `ξ = |x - x_m|`, and on the
//! outer intervals `b2·(sinh(ρη)/ρ - η)` with `η = x_{m+2} - x` (mirrored on
//! the left).
//!
//! Every coefficient carries the denominator `ρh·cosh(ρh) - sinh(ρh)`, which
//! behaves like `(ρh)³/3`. For small `ρh` the closed forms lose roughly
//! `3·log10(1/ρh)` digits, so below [`SERIES_THRESHOLD`] the coefficients are
//! built from the cancellation-free series in [`crate::hyperbolic`].

use crate::error::{invalid, Result};
use crate::hyperbolic::{coshm1_sq, sinhc, sinhm_cube, tension_denominator};

/// `ρh` below which coefficients come from series expansions.
pub const SERIES_THRESHOLD: f64 = 1e-2;

/// Which branch produced the coefficients of a [`SplineBasis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Direct,
    Series,
}

impl EvalPath {
    pub fn for_tension(rho_h: f64) -> Self {
        if rho_h < SERIES_THRESHOLD {
            EvalPath::Series
        } else {
            EvalPath::Direct
        }
    }
}

/// Three-point collocation weights of `U`, `U'` and `U''` at a node.
///
/// With coefficients `δ`:
/// - `U_i   = α1·δ_{i-1} + α2·δ_i + α1·δ_{i+1}`
/// - `U'_i  = β1·δ_{i-1} - β1·δ_{i+1}`
/// - `U''_i = γ1·δ_{i-1} + γ2·δ_i + γ1·δ_{i+1}`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalStencils {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl NodalStencils {
    /// Weights of the polynomial cubic B-spline (normalized to 1 at its
    /// centre), the `ρ → 0` limit of the exponential family.
    pub fn polynomial_limit(h: f64) -> Self {
        let gamma1 = 1.5 / (h * h);
        NodalStencils {
            alpha1: 0.25,
            alpha2: 1.0,
            beta1: -0.75 / h,
            gamma1,
            gamma2: -2.0 * gamma1,
        }
    }

    /// `U_i` from coefficients `(δ_{i-1}, δ_i, δ_{i+1})`.
    #[inline]
    pub fn value(&self, left: f64, centre: f64, right: f64) -> f64 {
        self.alpha1 * (left + right) + self.alpha2 * centre
    }

    #[inline]
    pub fn slope(&self, left: f64, right: f64) -> f64 {
        self.beta1 * (left - right)
    }

    #[inline]
    pub fn curvature(&self, left: f64, centre: f64, right: f64) -> f64 {
        self.gamma1 * (left + right) + self.gamma2 * centre
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineBasis {
    pub rho: f64,
    pub h: f64,
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub d1: f64,
    /// `cosh(ρh)`
    pub c_h: f64,
    /// `sinh(ρh)`
    pub s_h: f64,
    pub eval_path: EvalPath,
    // c1 + d1 and c1 - d1; kept separately because c1 and d1 nearly cancel
    // for small ρh.
    even: f64,
    odd: f64,
    // b2 / ρ = 1 / (2(ρh·cosh ρh - sinh ρh))
    outer_scale: f64,
    stencils: NodalStencils,
}

impl SplineBasis {
    /// Builds the basis for tension `rho` and spacing `h`, choosing the
    /// evaluation branch from `ρh`.
    pub fn new(rho: f64, h: f64) -> Result<Self> {
        check_params(rho, h)?;
        Self::build(rho, h, EvalPath::for_tension(rho * h))
    }

    /// Builds the basis on a forced branch. Used to compare the two branches
    /// on their overlap.
    pub fn with_path(rho: f64, h: f64, path: EvalPath) -> Result<Self> {
        check_params(rho, h)?;
        Self::build(rho, h, path)
    }

    fn build(rho: f64, h: f64, path: EvalPath) -> Result<Self> {
        let z = rho * h;
        let c = z.cosh();
        let s = z.sinh();

        let basis = match path {
            EvalPath::Direct => {
                let den = z * c - s;
                if !(den > 0.0) {
                    return Err(invalid(
                        "rho",
                        format!("ρh = {z:e} is too small for direct evaluation"),
                    ));
                }
                let one_m_c = 1.0 - c;
                let ez = z.exp();
                let emz = (-z).exp();
                let a1 = z * c / den;
                let b1 = 0.5 * rho * (c * (c - 1.0) + s * s) / (den * one_m_c);
                let b2 = rho / (2.0 * den);
                let c1 = 0.25 * (emz * one_m_c + s * (emz - 1.0)) / (den * one_m_c);
                let d1 = 0.25 * (ez * (c - 1.0) + s * (ez - 1.0)) / (den * one_m_c);
                let stencils = NodalStencils {
                    alpha1: (s - z) / (2.0 * den),
                    alpha2: 1.0,
                    beta1: rho * one_m_c / (2.0 * den),
                    gamma1: rho * rho * s / (2.0 * den),
                    gamma2: -rho * rho * s / den,
                };
                SplineBasis {
                    rho,
                    h,
                    a1,
                    b1,
                    b2,
                    c1,
                    d1,
                    c_h: c,
                    s_h: s,
                    eval_path: path,
                    even: -s / den,
                    odd: -b1 / rho,
                    outer_scale: 0.5 / den,
                    stencils,
                }
            }
            EvalPath::Series => {
                // ρh·cosh ρh - sinh ρh = z³·D, sinh ρh = z·S
                let d = tension_denominator(z);
                let sc = sinhc(z);
                let z2d = z * z * d;
                let z3d = z2d * z;
                let even = -sc / z2d;
                let odd = (1.0 + 2.0 * c) / (2.0 * z3d);
                let gamma1 = sc / (2.0 * h * h * d);
                let stencils = NodalStencils {
                    alpha1: sinhm_cube(z) / (2.0 * d),
                    alpha2: 1.0,
                    beta1: -coshm1_sq(z) / (2.0 * h * d),
                    gamma1,
                    gamma2: -2.0 * gamma1,
                };
                SplineBasis {
                    rho,
                    h,
                    a1: c / z2d,
                    b1: -rho * odd,
                    b2: rho / (2.0 * z3d),
                    c1: 0.5 * (even + odd),
                    d1: 0.5 * (even - odd),
                    c_h: c,
                    s_h: s,
                    eval_path: path,
                    even,
                    odd,
                    outer_scale: 0.5 / z3d,
                    stencils,
                }
            }
        };

        let residual = basis.normalization_residual();
        let scale = basis.a1.abs() + basis.c1.abs() + basis.d1.abs();
        // Loose enough for the direct branch near the threshold, tight enough
        // to catch a mistyped coefficient.
        if residual.abs() > 1e-9 * scale {
            return Err(invalid(
                "rho",
                format!("basis normalization violated: a1 + c1 + d1 - 1 = {residual:e}"),
            ));
        }
        Ok(basis)
    }

    /// `a1 + c1 + d1 - 1`, zero in exact arithmetic.
    pub fn normalization_residual(&self) -> f64 {
        self.a1 + self.c1 + self.d1 - 1.0
    }

    pub fn stencils(&self) -> NodalStencils {
        self.stencils
    }

    /// Value and first two derivatives at `x` of the spline centred on
    /// `knot`. Zero outside `[knot - 2h, knot + 2h]`.
    pub fn eval_with_derivatives(&self, knot: f64, x: f64) -> (f64, f64, f64) {
        let offset = x - knot;
        let xi = offset.abs();
        let h = self.h;
        if !(xi < 2.0 * h) {
            return (0.0, 0.0, 0.0);
        }
        let sign = if offset < 0.0 { -1.0 } else { 1.0 };
        let rho = self.rho;

        // Derivatives below are with respect to ξ = |x - knot|.
        let (v, d1, d2) = if xi < h {
            let p = self.pieces(rho * xi);
            (
                1.0 + self.even * p.cosh_m1 + self.odd * p.sinh_m,
                rho * (self.even * p.sinh + self.odd * p.cosh_m1),
                rho * rho * (self.even * p.cosh + self.odd * p.sinh),
            )
        } else {
            let p = self.pieces(rho * (2.0 * h - xi));
            (
                self.outer_scale * p.sinh_m,
                -self.outer_scale * rho * p.cosh_m1,
                self.outer_scale * rho * rho * p.sinh,
            )
        };
        (v, sign * d1, d2)
    }
}

/// `cosh y - 1`, `sinh y - y`, `sinh y`, `cosh y`.
struct Pieces {
    cosh_m1: f64,
    sinh_m: f64,
    sinh: f64,
    cosh: f64,
}

impl SplineBasis {
    // The direct branch evaluates the same literal expressions its
    // coefficients were built from, so knot values reproduce the stencils.
    #[inline]
    fn pieces(&self, y: f64) -> Pieces {
        match self.eval_path {
            EvalPath::Direct => Pieces {
                cosh_m1: y.cosh() - 1.0,
                sinh_m: y.sinh() - y,
                sinh: y.sinh(),
                cosh: y.cosh(),
            },
            EvalPath::Series => Pieces {
                cosh_m1: y * y * coshm1_sq(y),
                sinh_m: y * y * y * sinhm_cube(y),
                sinh: y * sinhc(y),
                cosh: y.cosh(),
            },
        }
    }
}

fn check_params(rho: f64, h: f64) -> Result<()> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(invalid("rho", format!("must be finite and positive, got {rho}")));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(invalid("h", format!("must be finite and positive, got {h}")));
    }
    Ok(())
}
