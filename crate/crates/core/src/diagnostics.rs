//! Exact kink solution, nodal error norm, and the energy and momentum
//! functionals.

use crate::error::{invalid, Error, Result};
use crate::fitting::{nodal_u, CoefficientState, Grid};
use crate::spline_basis::{NodalStencils, SplineBasis};

/// Travelling kink `u = tanh((x - ct)/k)` with `k = sqrt(2(1 - c²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactKink {
    pub speed: f64,
    pub width: f64,
}

impl ExactKink {
    pub fn new(speed: f64) -> Result<Self> {
        if !speed.is_finite() || speed.abs() >= 1.0 {
            return Err(invalid("speed", format!("need |c| < 1, got {speed}")));
        }
        Ok(ExactKink {
            speed,
            width: (2.0 * (1.0 - speed * speed)).sqrt(),
        })
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        ((x - self.speed * t) / self.width).tanh()
    }

    /// `u_x`
    pub fn u_x(&self, x: f64, t: f64) -> f64 {
        sech2((x - self.speed * t) / self.width) / self.width
    }

    /// `v = u_t`
    pub fn v(&self, x: f64, t: f64) -> f64 {
        -self.speed / self.width * sech2((x - self.speed * t) / self.width)
    }

    pub fn v_x(&self, x: f64, t: f64) -> f64 {
        let z = (x - self.speed * t) / self.width;
        2.0 * self.speed / (self.width * self.width) * sech2(z) * z.tanh()
    }

    /// Energy and momentum of the kink on the whole line, shifted to the
    /// finite domain `[a, b]`: `E0 = 2(1 + c²)/(3k) + k/3 - (b - a)/4` and
    /// `P0 = -2c/(3k)`. Boundary tails of order `exp(-2·dist/k)` are dropped.
    pub fn closed_form_invariants(&self, a: f64, b: f64) -> (f64, f64) {
        let (c, k) = (self.speed, self.width);
        let energy = 2.0 * (1.0 + c * c) / (3.0 * k) + k / 3.0 - (b - a) / 4.0;
        let momentum = -2.0 * c / (3.0 * k);
        (energy, momentum)
    }
}

#[inline]
fn sech2(z: f64) -> f64 {
    let s = 1.0 / z.cosh();
    s * s
}

/// `max_j |w_j - W_j|`.
pub fn linf(exact: &[f64], numeric: &[f64]) -> f64 {
    exact
        .iter()
        .zip(numeric)
        .map(|(w, v)| (w - v).abs())
        .fold(0.0, f64::max)
}

/// Nodal maximum error of `U` against the kink at the state's time.
pub fn linf_error(
    state: &CoefficientState,
    kink: &ExactKink,
    grid: &Grid,
    stencils: &NodalStencils,
) -> f64 {
    let u = nodal_u(stencils, &state.delta);
    grid.node_positions()
        .zip(&u)
        .map(|(x, v)| (kink.u(x, state.t) - v).abs())
        .fold(0.0, f64::max)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussRule {
    pub nodes: &'static [f64],
    pub weights: &'static [f64],
}

impl GaussRule {
    pub const FOUR: GaussRule = GaussRule {
        nodes: &[
            -0.861_136_311_594_052_6,
            -0.339_981_043_584_856_3,
            0.339_981_043_584_856_3,
            0.861_136_311_594_052_6,
        ],
        weights: &[
            0.347_854_845_137_453_9,
            0.652_145_154_862_546_1,
            0.652_145_154_862_546_1,
            0.347_854_845_137_453_9,
        ],
    };

    pub const EIGHT: GaussRule = GaussRule {
        nodes: &[
            -0.960_289_856_497_536_3,
            -0.796_666_477_413_626_7,
            -0.525_532_409_916_329,
            -0.183_434_642_495_649_8,
            0.183_434_642_495_649_8,
            0.525_532_409_916_329,
            0.796_666_477_413_626_7,
            0.960_289_856_497_536_3,
        ],
        weights: &[
            0.101_228_536_290_376_26,
            0.222_381_034_453_374_47,
            0.313_706_645_877_887_3,
            0.362_683_783_378_362,
            0.362_683_783_378_362,
            0.313_706_645_877_887_3,
            0.222_381_034_453_374_47,
            0.101_228_536_290_376_26,
        ],
    };
}

/// `E = ½∫(V² + U_x² - U² + ½U⁴)` and `P = ½∫V·U_x` over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub energy: f64,
    pub momentum: f64,
}

/// Integrates both functionals of the spline reconstructions with the 4-point
/// rule on every element.
pub fn invariants(grid: &Grid, basis: &SplineBasis, state: &CoefficientState) -> Invariants {
    invariants_with_rule(grid, basis, state, GaussRule::FOUR)
}

pub fn invariants_with_rule(
    grid: &Grid,
    basis: &SplineBasis,
    state: &CoefficientState,
    rule: GaussRule,
) -> Invariants {
    let h = grid.h;
    let mut energy = 0.0;
    let mut momentum = 0.0;
    for cell in 0..grid.elements {
        let mut e_cell = 0.0;
        let mut p_cell = 0.0;
        for (&q, &w) in rule.nodes.iter().zip(rule.weights) {
            let s = 0.5 * (1.0 + q);
            let (mut u, mut ux, mut v) = (0.0, 0.0, 0.0);
            for i in 0..4 {
                // splines centred on nodes cell-1 ..= cell+2; storage is shifted by one
                let k = cell + i;
                let (b, db, _) = basis.eval_with_derivatives(0.0, (s + 1.0 - i as f64) * h);
                u += state.delta[k] * b;
                ux += state.delta[k] * db;
                v += state.phi[k] * b;
            }
            let u2 = u * u;
            e_cell += w * (v * v + ux * ux - u2 + 0.5 * u2 * u2);
            p_cell += w * v * ux;
        }
        energy += e_cell;
        momentum += p_cell;
    }
    // ½ from the functionals, h/2 from the reference element
    Invariants {
        energy: 0.25 * h * energy,
        momentum: 0.25 * h * momentum,
    }
}

pub fn energy(grid: &Grid, basis: &SplineBasis, state: &CoefficientState) -> f64 {
    invariants(grid, basis, state).energy
}

pub fn momentum(grid: &Grid, basis: &SplineBasis, state: &CoefficientState) -> f64 {
    invariants(grid, basis, state).momentum
}

/// `|current - reference| / |reference|`.
pub fn relative_change(current: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(((current - reference) / reference).abs())
}

/// One observation of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub t: f64,
    pub linf: f64,
    pub energy: f64,
    /// `½∫V·U_x`
    pub momentum: f64,
    pub c_e: f64,
    pub c_p: f64,
    pub growth_factor: f64,
}

impl RunRecord {
    /// `∫V·U_x`, the normalization some tabulations use for `P`.
    pub fn momentum_full(&self) -> f64 {
        2.0 * self.momentum
    }
}
