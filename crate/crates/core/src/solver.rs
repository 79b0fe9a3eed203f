//! Linearized Crank–Nicolson collocation for the first-order system
//! `u_t = v`, `v_t = u_xx + u - u³`.
//!
//! Each step solves one banded system `A·x^{n+1} = B·x^n` for the interleaved
//! unknowns `(δ_0, φ_0, δ_1, φ_1, …, δ_N, φ_N)`. The ghost coefficients are
//! eliminated with the Neumann relations `δ_{-1} = δ_1`, `δ_{N+1} = δ_{N-1}`
//! (and likewise for `φ`), which keeps both matrices within three diagonals
//! of the main one.

use log::warn;

use crate::banded::BandedMatrix;
use crate::diagnostics::{invariants, linf_error, relative_change, ExactKink, RunRecord};
use crate::error::{invalid, Error, Result};
use crate::fitting::{fit_initial, CoefficientState, Grid};
use crate::spline_basis::{NodalStencils, SplineBasis};

/// Growth factors above this are reported as a warning.
pub const GROWTH_WARNING: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub grid: Grid,
    pub dt: f64,
    pub rho: f64,
    pub wave_speed: f64,
    pub t_final: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(invalid("dt", format!("must be finite and positive, got {}", self.dt)));
        }
        if !self.wave_speed.is_finite() || self.wave_speed.abs() >= 1.0 {
            return Err(invalid(
                "speed",
                format!("need |c| < 1, got {}", self.wave_speed),
            ));
        }
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(invalid(
                "t_final",
                format!("must be finite and non-negative, got {}", self.t_final),
            ));
        }
        self.total_steps().map(|_| ())
    }

    /// Number of steps of size `dt` that reach `t_final`.
    pub fn total_steps(&self) -> Result<usize> {
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * steps.max(1.0) {
            return Err(invalid(
                "t_final",
                format!("{} is not a whole number of steps of {}", self.t_final, self.dt),
            ));
        }
        Ok(steps as usize)
    }
}

/// Entries `ν_1 … ν_8` of one collocation row pair, for nodal value `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowCoefficients {
    pub nu: [f64; 8],
    pub k: f64,
}

impl RowCoefficients {
    #[inline]
    pub fn nu(&self, i: usize) -> f64 {
        self.nu[i - 1]
    }
}

pub fn row_coefficients(k: f64, stencils: &NodalStencils, dt: f64) -> RowCoefficients {
    let NodalStencils {
        alpha1: a1,
        alpha2: a2,
        gamma1: g1,
        gamma2: g2,
        ..
    } = *stencils;
    let k2 = k * k;
    RowCoefficients {
        nu: [
            (3.0 * k2 - 1.0) * a1 - g1,
            2.0 * a1 / dt,
            (3.0 * k2 - 1.0) * a2 - g2,
            2.0 * a2 / dt,
            (1.0 + k2) * a1 + g1,
            (1.0 + k2) * a2 + g2,
            -a1,
            -a2,
        ],
        k,
    }
}

/// Column of coefficient `j` (in `-1..=N+1`) after ghost elimination.
#[inline]
fn fold(j: isize, elements: isize) -> usize {
    if j < 0 {
        (-j) as usize
    } else if j > elements {
        (2 * elements - j) as usize
    } else {
        j as usize
    }
}

/// Builds `A` and `B·x^n` for the step from `state`.
pub fn assemble(
    state: &CoefficientState,
    grid: &Grid,
    stencils: &NodalStencils,
    dt: f64,
) -> Result<(BandedMatrix, Vec<f64>)> {
    let n = grid.elements as isize;
    let dim = 2 * grid.elements + 2;
    let mut a = BandedMatrix::new(dim, 3, 3)?;
    let mut rhs = vec![0.0; dim];
    let delta = &state.delta;
    let phi = &state.phi;

    for m in 0..=n {
        let c = (m + 1) as usize;
        let k = stencils.value(delta[c - 1], delta[c], delta[c + 1]);
        let r = row_coefficients(k, stencils, dt);
        let (row_v, row_u) = (2 * m as usize, 2 * m as usize + 1);
        let mut b_v = 0.0;
        let mut b_u = 0.0;
        for j in [m - 1, m, m + 1] {
            let centre = j == m;
            let col = fold(j, n);
            let (d_new, p_new, d_old) = if centre {
                (r.nu(3), r.nu(4), r.nu(6))
            } else {
                (r.nu(1), r.nu(2), r.nu(5))
            };
            let (ud, up) = if centre {
                (r.nu(4), r.nu(8))
            } else {
                (r.nu(2), r.nu(7))
            };
            a.add(row_v, 2 * col, d_new)?;
            a.add(row_v, 2 * col + 1, p_new)?;
            a.add(row_u, 2 * col, ud)?;
            a.add(row_u, 2 * col + 1, up)?;
            let (dj, pj) = (delta[col + 1], phi[col + 1]);
            b_v += d_old * dj + p_new * pj;
            b_u += ud * dj - up * pj;
        }
        rhs[row_v] = b_v;
        rhs[row_u] = b_u;
    }
    Ok((a, rhs))
}

/// Problem setup shared by every step of a run.
#[derive(Debug, Clone)]
pub struct Solver {
    pub spec: ProblemSpec,
    pub basis: SplineBasis,
    pub stencils: NodalStencils,
    pub kink: ExactKink,
}

/// Outcome of a run: the observations gathered and, if it stopped early, why.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub failure: Option<Error>,
    pub warnings: Vec<String>,
    pub steps_taken: usize,
}

impl RunOutcome {
    pub fn final_record(&self) -> Option<&RunRecord> {
        self.records.last()
    }
}

impl Solver {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let basis = SplineBasis::new(spec.rho, spec.grid.h)?;
        Self::with_stencils(spec, basis, basis.stencils())
    }

    /// Uses `stencils` for the collocation rows instead of those of the basis.
    pub fn with_stencils(
        spec: ProblemSpec,
        basis: SplineBasis,
        stencils: NodalStencils,
    ) -> Result<Self> {
        spec.validate()?;
        Ok(Solver {
            spec,
            basis,
            stencils,
            kink: ExactKink::new(spec.wave_speed)?,
        })
    }

    /// Coefficients fitted to nodal samples of `u` and `v` with the given end
    /// slopes.
    pub fn state_from_samples(
        &self,
        u: &[f64],
        u_slopes: (f64, f64),
        v: &[f64],
        v_slopes: (f64, f64),
    ) -> Result<CoefficientState> {
        let grid = &self.spec.grid;
        let delta = fit_initial(grid, &self.stencils, u, u_slopes)?;
        let phi = fit_initial(grid, &self.stencils, v, v_slopes)?;
        Ok(CoefficientState::new(delta, phi))
    }

    /// Kink initial data `u(x, 0)`, `v(x, 0) = u_t(x, 0)`.
    pub fn initial_state(&self) -> Result<CoefficientState> {
        let grid = &self.spec.grid;
        let k = &self.kink;
        let u: Vec<f64> = grid.node_positions().map(|x| k.u(x, 0.0)).collect();
        let v: Vec<f64> = grid.node_positions().map(|x| k.v(x, 0.0)).collect();
        self.state_from_samples(
            &u,
            (k.u_x(grid.a, 0.0), k.u_x(grid.b, 0.0)),
            &v,
            (k.v_x(grid.a, 0.0), k.v_x(grid.b, 0.0)),
        )
    }

    /// Advances one step. Returns the new state and the growth factor of the
    /// factorization.
    pub fn step(&self, state: &CoefficientState) -> Result<(CoefficientState, f64)> {
        let step_index = state.step_index + 1;
        let t = step_index as f64 * self.spec.dt;
        let (a, mut x) = assemble(state, &self.spec.grid, &self.stencils, self.spec.dt)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: state.t, step: state.step_index });
        }
        let lu = a.lu()?;
        lu.solve_in_place(&mut x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t, step: step_index });
        }
        let len = state.delta.len();
        let mut next = CoefficientState {
            delta: vec![0.0; len],
            phi: vec![0.0; len],
            t,
            step_index,
        };
        for (j, pair) in x.chunks_exact(2).enumerate() {
            next.delta[j + 1] = pair[0];
            next.phi[j + 1] = pair[1];
        }
        next.mirror_ghosts();
        Ok((next, lu.growth_factor()))
    }

    /// Runs from the kink initial data to `t_final`, observing every
    /// `observe_every` steps and at the final step.
    pub fn run(&self, observe_every: usize) -> Result<RunOutcome> {
        let initial = self.initial_state()?;
        Ok(self.run_from(initial, observe_every, |_, _| {}))
    }

    /// Runs from `initial`, calling `observer` with each state and its
    /// record.
    pub fn run_from(
        &self,
        initial: CoefficientState,
        observe_every: usize,
        mut observer: impl FnMut(&CoefficientState, &RunRecord),
    ) -> RunOutcome {
        let total = self.spec.total_steps().unwrap_or(0);
        let every = observe_every.max(1);
        let grid = &self.spec.grid;
        let inv0 = invariants(grid, &self.basis, &initial);

        let observe = |state: &CoefficientState, growth: f64| {
            let inv = invariants(grid, &self.basis, state);
            RunRecord {
                t: state.t,
                linf: linf_error(state, &self.kink, grid, &self.stencils),
                energy: inv.energy,
                momentum: inv.momentum,
                c_e: relative_change(inv.energy, inv0.energy).unwrap_or(f64::NAN),
                c_p: relative_change(inv.momentum, inv0.momentum).unwrap_or(f64::NAN),
                growth_factor: growth,
            }
        };

        let mut outcome = RunOutcome {
            records: Vec::new(),
            failure: None,
            warnings: Vec::new(),
            steps_taken: 0,
        };
        let first = observe(&initial, 1.0);
        observer(&initial, &first);
        outcome.records.push(first);

        let mut state = initial;
        let mut worst_growth: f64 = 1.0;
        for n in 1..=total {
            match self.step(&state) {
                Ok((next, growth)) => {
                    state = next;
                    if growth > GROWTH_WARNING && growth > worst_growth {
                        let msg = format!("growth factor {growth:.3e} at t = {}", state.t);
                        warn!("{msg}");
                        outcome.warnings.push(msg);
                    }
                    worst_growth = worst_growth.max(growth);
                    outcome.steps_taken = n;
                    if n % every == 0 || n == total {
                        let rec = observe(&state, worst_growth);
                        observer(&state, &rec);
                        outcome.records.push(rec);
                    }
                }
                Err(e) => {
                    outcome.failure = Some(e);
                    break;
                }
            }
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::nodal_u;

    fn spec(n: usize, dt: f64, speed: f64, t_final: f64) -> ProblemSpec {
        ProblemSpec {
            grid: Grid::new(-30.0, 30.0, n).unwrap(),
            dt,
            rho: 1.0,
            wave_speed: speed,
            t_final,
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(100, 0.01, 0.5, 1.0);
        assert!(s.validate().is_ok());
        s.dt = 0.0;
        assert!(s.validate().is_err());
        s.dt = 0.01;
        s.wave_speed = 1.0;
        assert!(s.validate().is_err());
        s.wave_speed = 0.5;
        s.t_final = 0.015;
        assert!(s.validate().is_err());
        s.t_final = 10.0;
        assert_eq!(s.total_steps().unwrap(), 1000);
    }

    #[test]
    fn row_coefficient_values() {
        let h = 0.02;
        let lim = NodalStencils::polynomial_limit(h);
        let r = row_coefficients(0.0, &lim, 0.005);
        assert!((r.nu(1) - (-0.25 - 1.5 / (h * h))).abs() < 1e-9);
        let st = SplineBasis::new(1.0, h).unwrap().stencils();
        let r = row_coefficients(0.37, &st, 0.005);
        assert!((r.nu(2) - 99.998).abs() < 1e-3);
        assert_eq!(r.nu(7), -st.alpha1);
        assert_eq!(r.nu(8), -1.0);
        assert_eq!(r.nu(4), 2.0 / 0.005);
        let k = 0.37_f64;
        let lhs = r.nu(1) - r.nu(5);
        let rhs = (2.0 * k * k - 2.0) * st.alpha1 - 2.0 * st.gamma1;
        assert!((lhs - rhs).abs() < 1e-9 * st.gamma1);
    }

    #[test]
    fn zero_state_gives_zero_rhs_and_stays_zero() {
        let s = spec(40, 0.05, 0.5, 1.0);
        let solver = Solver::new(s).unwrap();
        let zero = CoefficientState::zeros(&s.grid);
        let (_, rhs) = assemble(&zero, &s.grid, &solver.stencils, s.dt).unwrap();
        assert!(rhs.iter().all(|v| *v == 0.0));
        let (next, _) = solver.step(&zero).unwrap();
        assert!(next.delta.iter().chain(&next.phi).all(|v| *v == 0.0));
        assert_eq!(next.step_index, 1);
    }

    #[test]
    fn interior_row_pattern() {
        let s = spec(10, 0.05, 0.5, 1.0);
        let solver = Solver::new(s).unwrap();
        let st = solver.stencils;
        let mut state = CoefficientState::zeros(&s.grid);
        for (i, d) in state.delta.iter_mut().enumerate() {
            *d = 0.1 * i as f64;
        }
        state.mirror_ghosts();
        let (a, _) = assemble(&state, &s.grid, &st, s.dt).unwrap();
        let m = 4;
        let k = st.value(state.delta_at(3), state.delta_at(4), state.delta_at(5));
        let r = row_coefficients(k, &st, s.dt);
        let row = 2 * m;
        let expect = [r.nu(1), r.nu(2), r.nu(3), r.nu(4), r.nu(1), r.nu(2)];
        for (off, e) in (-2isize..=3).zip(expect) {
            assert_eq!(a.get(row, (row as isize + off) as usize), e);
        }
        let nonzero = (0..a.n()).filter(|&j| a.get(row, j) != 0.0).count();
        assert_eq!(nonzero, 6);
        let expect = [r.nu(2), r.nu(7), r.nu(4), r.nu(8), r.nu(2), r.nu(7)];
        for (off, e) in (-3isize..=2).zip(expect) {
            assert_eq!(a.get(row + 1, (row as isize + 1 + off) as usize), e);
        }
    }

    #[test]
    fn ghosts_mirror_after_steps() {
        let s = spec(300, 0.05, 0.5, 1.0);
        let solver = Solver::new(s).unwrap();
        let mut state = solver.initial_state().unwrap();
        for _ in 0..5 {
            state = solver.step(&state).unwrap().0;
            assert!(state.ghosts_symmetric());
        }
    }

    #[test]
    fn static_kink_initial_velocity() {
        let s = spec(600, 0.01, 0.0, 1.0);
        let solver = Solver::new(s).unwrap();
        let state = solver.initial_state().unwrap();
        assert!(state.phi.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn moving_kink_initial_data() {
        let s = spec(3000, 0.005, 0.5, 1.0);
        let solver = Solver::new(s).unwrap();
        assert_eq!(solver.kink.u(0.0, 0.0), 0.0);
        assert!((solver.kink.v(0.0, 0.0) + 0.408248).abs() < 1e-6);
        let state = solver.initial_state().unwrap();
        let u = nodal_u(&solver.stencils, &state.delta);
        for (x, v) in s.grid.node_positions().zip(&u) {
            assert!((solver.kink.u(x, 0.0) - v).abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_changes_with_state() {
        let s = spec(200, 0.05, 0.5, 1.0);
        let solver = Solver::new(s).unwrap();
        let s0 = solver.initial_state().unwrap();
        let s1 = solver.step(&s0).unwrap().0;
        let (a0, _) = assemble(&s0, &s.grid, &solver.stencils, s.dt).unwrap();
        let (a1, _) = assemble(&s1, &s.grid, &solver.stencils, s.dt).unwrap();
        assert_ne!(a0, a1);
    }

    #[test]
    fn zero_final_time_single_record() {
        let s = spec(100, 0.05, 0.5, 0.0);
        let out = Solver::new(s).unwrap().run(100).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].t, 0.0);
        assert_eq!(out.records[0].c_e, 0.0);
        assert!(out.failure.is_none());
    }

    #[test]
    fn divergence_is_reported() {
        // K³ overflows on the first assembly
        let s = spec(20, 0.5, 0.0, 5.0);
        let solver = Solver::new(s).unwrap();
        let u = vec![1e120; 21];
        let init = solver.state_from_samples(&u, (0.0, 0.0), &u, (0.0, 0.0)).unwrap();
        let out = solver.run_from(init, 1, |_, _| {});
        assert!(matches!(out.failure, Some(Error::Divergence { t, step: 0 }) if t == 0.0));
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.steps_taken, 0);
    }
}
