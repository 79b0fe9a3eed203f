//! Uniform grids, spline coefficient vectors, the initial fit, and
//! evaluation of the fitted spline.

use crate::banded::BandedMatrix;
use crate::error::{invalid, Error, Result};
use crate::spline_basis::{NodalStencils, SplineBasis};

/// Uniform partition `x_m = a + m·h`, `m = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub elements: usize,
    pub h: f64,
}

impl Grid {
    pub const MIN_ELEMENTS: usize = 4;

    pub fn new(a: f64, b: f64, elements: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || b <= a {
            return Err(invalid("b", format!("domain [{a}, {b}] is empty or not finite")));
        }
        if elements < Self::MIN_ELEMENTS {
            return Err(invalid(
                "nodes",
                format!("need at least {} elements, got {elements}", Self::MIN_ELEMENTS),
            ));
        }
        Ok(Grid {
            a,
            b,
            elements,
            h: (b - a) / elements as f64,
        })
    }

    /// Grid with spacing `h`, which must divide `b - a` into a whole number of
    /// elements.
    pub fn with_spacing(a: f64, b: f64, h: f64) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 {
            return Err(invalid("h", format!("must be finite and positive, got {h}")));
        }
        let count = (b - a) / h;
        let rounded = count.round();
        if !count.is_finite() || (count - rounded).abs() > 1e-9 * count.abs().max(1.0) {
            return Err(invalid(
                "h",
                format!("spacing {h} does not divide [{a}, {b}] evenly"),
            ));
        }
        Self::new(a, b, rounded as usize)
    }

    /// Number of nodes, `N + 1`.
    pub fn nodes(&self) -> usize {
        self.elements + 1
    }

    pub fn node(&self, m: usize) -> f64 {
        self.a + m as f64 * self.h
    }

    pub fn node_positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(|m| self.node(m))
    }
}

/// Spline coefficients for `U` (`delta`) and `V` (`phi`) at one time level.
///
/// Both vectors hold indices `-1..=N+1`; storage slot `k` is coefficient
/// `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    pub delta: Vec<f64>,
    pub phi: Vec<f64>,
    pub t: f64,
    pub step_index: usize,
}

impl CoefficientState {
    pub fn new(delta: Vec<f64>, phi: Vec<f64>) -> Self {
        debug_assert_eq!(delta.len(), phi.len());
        CoefficientState {
            delta,
            phi,
            t: 0.0,
            step_index: 0,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        let len = grid.elements + 3;
        Self::new(vec![0.0; len], vec![0.0; len])
    }

    /// Coefficient `δ_i` for `i` in `-1..=N+1`.
    pub fn delta_at(&self, i: isize) -> f64 {
        self.delta[(i + 1) as usize]
    }

    pub fn phi_at(&self, i: isize) -> f64 {
        self.phi[(i + 1) as usize]
    }

    /// Sets the ghost coefficients from the Neumann relations
    /// `c_{-1} = c_1`, `c_{N+1} = c_{N-1}`.
    pub fn mirror_ghosts(&mut self) {
        for v in [&mut self.delta, &mut self.phi] {
            let last = v.len() - 1;
            v[0] = v[2];
            v[last] = v[last - 2];
        }
    }

    pub fn ghosts_symmetric(&self) -> bool {
        [&self.delta, &self.phi].iter().all(|v| {
            let last = v.len() - 1;
            v[0] == v[2] && v[last] == v[last - 2]
        })
    }

    pub fn is_finite(&self) -> bool {
        self.delta.iter().chain(&self.phi).all(|v| v.is_finite())
    }
}

/// Spline coefficients (indices `-1..=N+1`) interpolating `values` at the
/// nodes with end slopes `(f'(a), f'(b))`.
pub fn fit_initial(
    grid: &Grid,
    stencils: &NodalStencils,
    values: &[f64],
    end_slopes: (f64, f64),
) -> Result<Vec<f64>> {
    let n = grid.elements;
    if values.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: values.len(),
        });
    }
    if !end_slopes.0.is_finite() || !end_slopes.1.is_finite() {
        return Err(invalid("end_slopes", "end slopes must be finite"));
    }
    let dim = n + 3;
    let mut m = BandedMatrix::new(dim, 2, 2)?;
    let mut rhs = Vec::with_capacity(dim);

    m.set(0, 0, stencils.beta1)?;
    m.set(0, 2, -stencils.beta1)?;
    rhs.push(end_slopes.0);
    for (k, &f) in values.iter().enumerate() {
        let row = k + 1;
        m.set(row, k, stencils.alpha1)?;
        m.set(row, k + 1, stencils.alpha2)?;
        m.set(row, k + 2, stencils.alpha1)?;
        rhs.push(f);
    }
    m.set(dim - 1, n, stencils.beta1)?;
    m.set(dim - 1, n + 2, -stencils.beta1)?;
    rhs.push(end_slopes.1);

    let mut coeffs = m.lu()?.solve(&rhs)?;
    // a zero slope row states c_{-1} = c_1 exactly; elimination only gets it
    // to rounding
    if end_slopes.0 == 0.0 {
        coeffs[0] = coeffs[2];
    }
    if end_slopes.1 == 0.0 {
        coeffs[dim - 1] = coeffs[dim - 3];
    }
    Ok(coeffs)
}

/// Nodal `U`, `U'`, `U''` from the three-point stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalValues {
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
    pub curvature: Vec<f64>,
}

pub fn nodal_values(stencils: &NodalStencils, coeffs: &[f64]) -> NodalValues {
    let nodes = coeffs.len().saturating_sub(2);
    let mut out = NodalValues {
        value: Vec::with_capacity(nodes),
        slope: Vec::with_capacity(nodes),
        curvature: Vec::with_capacity(nodes),
    };
    for w in coeffs.windows(3) {
        out.value.push(stencils.value(w[0], w[1], w[2]));
        out.slope.push(stencils.slope(w[0], w[2]));
        out.curvature.push(stencils.curvature(w[0], w[1], w[2]));
    }
    out
}

/// Nodal values `U_m` only.
pub fn nodal_u(stencils: &NodalStencils, coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .windows(3)
        .map(|w| stencils.value(w[0], w[1], w[2]))
        .collect()
}

/// `(U, U', U'')` at `x` for the spline with coefficients `coeffs`.
pub fn reconstruct(
    grid: &Grid,
    basis: &SplineBasis,
    coeffs: &[f64],
    x: f64,
) -> Result<(f64, f64, f64)> {
    if !(x >= grid.a && x <= grid.b) {
        return Err(Error::OutsideDomain {
            x,
            a: grid.a,
            b: grid.b,
        });
    }
    if coeffs.len() != grid.elements + 3 {
        return Err(Error::DimensionMismatch {
            expected: grid.elements + 3,
            got: coeffs.len(),
        });
    }
    let mut s = (x - grid.a) / grid.h;
    // points within rounding of a node are evaluated at the node itself
    let nearest = s.round();
    if (s - nearest).abs() <= 1e-12 * nearest.max(1.0) {
        s = nearest;
    }
    Ok(reconstruct_local(basis, coeffs, grid.elements, s))
}

/// Evaluation at grid coordinate `s = (x - a)/h`, with `s` in `[0, N]`.
pub(crate) fn reconstruct_local(
    basis: &SplineBasis,
    coeffs: &[f64],
    elements: usize,
    s: f64,
) -> (f64, f64, f64) {
    let cell = (s.floor() as isize).clamp(0, elements as isize - 1);
    let h = basis.h;
    let mut acc = (0.0, 0.0, 0.0);
    for i in (cell - 1)..=(cell + 2) {
        let c = coeffs[(i + 1) as usize];
        if c == 0.0 {
            continue;
        }
        let (v, d1, d2) = basis.eval_with_derivatives(0.0, (s - i as f64) * h);
        acc.0 += c * v;
        acc.1 += c * d1;
        acc.2 += c * d2;
    }
    acc
}
