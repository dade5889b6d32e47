//! Time integration of
//!
//! ```text
//! ∂t u = Δu - k u^m v,    ∂t v = -k u v
//! ```
//!
//! `v` is never stepped. With `z(x, t) = ∫_0^t u(x, s) ds` the second
//! equation integrates to `v = v0 exp(-k z)`, so the solver carries `z`
//! (trapezoid in time) and rebuilds `v` on demand. Diffusion is θ-weighted;
//! the reaction enters the implicit side as `k (uⁿ)^(m-1) vⁿ u^(n+1)`, which
//! keeps every step a single tridiagonal solve.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{laplacian_matrix, BoundarySpec, Field, Grid1D};
use crate::tridiag::Tridiagonal;

/// Computed `u` may dip this far below zero through roundoff.
pub const NONNEGATIVITY_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Reaction exponent in the `u` equation.
    pub m: f64,
    /// Reaction rate.
    pub k: f64,
    pub grid: Grid1D,
    pub bc: BoundarySpec,
    pub u0: Field,
    pub v0: Field,
    pub t_final: f64,
    pub dt: f64,
    /// Implicitness of the diffusion term, in `[1/2, 1]`.
    pub theta: f64,
    /// Require `u0 v0 ≡ 0` on the grid.
    pub segregated: bool,
}

impl ProblemSpec {
    /// `m = 1` is accepted because the scaled inflow problem runs with a
    /// linear reaction; every other use has `m > 1`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return bad(format!("reaction exponent must be >= 1, got {}", self.m));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return bad(format!("reaction rate must be finite and >= 0, got {}", self.k));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("final time must be >= 0, got {}", self.t_final));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time step must be > 0, got {}", self.dt));
        }
        if self.t_final > 0.0 && self.dt > self.t_final {
            return bad(format!("time step {} exceeds final time {}", self.dt, self.t_final));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0.5, 1], got {}", self.theta));
        }
        for (name, f) in [("u0", &self.u0), ("v0", &self.v0)] {
            if *f.grid() != self.grid {
                return Err(Error::GridMismatch(format!("{name} is not on the problem grid")));
            }
            if f.values().iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and nonnegative")));
            }
        }
        if self.segregated {
            if let Some(i) = self
                .u0
                .values()
                .iter()
                .zip(self.v0.values())
                .position(|(u, v)| u * v != 0.0)
            {
                return bad(format!("initial data not segregated at node {i}"));
            }
        }
        self.bc.validate(self.t_final)?;
        let lap = laplacian_matrix(&self.grid, &self.bc)?;
        check_step_bound(&lap, self.dt, self.theta)
    }

    /// Number of steps to reach `t_final`, the last one possibly shortened.
    pub fn n_steps(&self) -> usize {
        if self.t_final == 0.0 {
            return 0;
        }
        let n = (self.t_final / self.dt - 1e-9).ceil();
        (n as usize).max(1)
    }

    /// Time after step `j`; the final step lands exactly on `t_final`.
    pub fn time_at(&self, j: usize) -> f64 {
        if j >= self.n_steps() {
            self.t_final
        } else {
            j as f64 * self.dt
        }
    }
}

/// Explicit part of the θ-scheme stays monotone when
/// `(1 - θ) dt max|L_ii| <= 1`.
pub(crate) fn check_step_bound(lap: &Tridiagonal, dt: f64, theta: f64) -> Result<()> {
    let max_diag = lap.diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let load = (1.0 - theta) * dt * max_diag;
    if load > 1.0 + 1e-12 {
        return Err(Error::InvalidSpec(format!(
            "step bound violated: (1 - theta) dt max|L_ii| = {load} > 1"
        )));
    }
    Ok(())
}

/// `v0 exp(-k z)`, in log form once the exponent leaves the comfortable range.
pub fn deplete(v0: f64, kz: f64) -> f64 {
    if v0 <= 0.0 {
        0.0
    } else if kz > 700.0 {
        (v0.ln() - kz).exp()
    } else {
        v0 * (-kz).exp()
    }
}

/// `u^(m-1)` with `0^(m-1) = 0` for `m > 1`.
#[inline]
fn reaction_power(u: f64, m: f64) -> f64 {
    if m == 1.0 {
        1.0
    } else if u <= 0.0 {
        0.0
    } else {
        ((m - 1.0) * u.ln()).exp()
    }
}

/// One θ-scheme diffusion step with an optional extra implicit diagonal.
/// The heat reference and the reaction solver both go through here, so a
/// zero absorption reproduces the heat step bit for bit.
#[derive(Debug, Clone)]
pub(crate) struct ThetaStepper {
    lap: Tridiagonal,
    bc: BoundarySpec,
    theta: f64,
    system: Tridiagonal,
    lap_u: Vec<f64>,
    scratch: Vec<f64>,
}

impl ThetaStepper {
    pub(crate) fn new(grid: &Grid1D, bc: &BoundarySpec, theta: f64) -> Result<Self> {
        let lap = laplacian_matrix(grid, bc)?;
        let n = grid.n_nodes();
        Ok(Self {
            lap,
            bc: bc.clone(),
            theta,
            system: Tridiagonal::zeros(n),
            lap_u: vec![0.0; n],
            scratch: vec![0.0; n],
        })
    }

    pub(crate) fn pinned(&self, i: usize) -> bool {
        (i == 0 && self.bc.left.is_dirichlet())
            || (i + 1 == self.lap.len() && self.bc.right.is_dirichlet())
    }

    pub(crate) fn advance(
        &mut self,
        u: &[f64],
        t_next: f64,
        dt: f64,
        absorption: Option<&[f64]>,
        out: &mut [f64],
    ) -> Result<()> {
        let n = u.len();
        // Solved for the increment `δ = u^(n+1) - u^n`:
        // (I - θ dt L + A) δ = dt L u^n - A u^n.
        // Rounding in the solve then scales with |δ| rather than |u|, which
        // keeps the Neumann mass balance at roundoff level over long runs.
        self.lap.apply(u, &mut self.lap_u);
        let implicit = self.theta * dt;
        for i in 0..n {
            let mut diag = 1.0 - implicit * self.lap.diag[i];
            let mut rhs = dt * self.lap_u[i];
            if let Some(a) = absorption {
                diag += a[i];
                rhs -= a[i] * u[i];
            }
            self.system.lower[i] = -implicit * self.lap.lower[i];
            self.system.diag[i] = diag;
            self.system.upper[i] = -implicit * self.lap.upper[i];
            out[i] = rhs;
        }
        if let Some(g) = self.bc.left.value_at(t_next) {
            self.system.lower[0] = 0.0;
            self.system.diag[0] = 1.0;
            self.system.upper[0] = 0.0;
            out[0] = g - u[0];
        }
        if let Some(g) = self.bc.right.value_at(t_next) {
            self.system.lower[n - 1] = 0.0;
            self.system.diag[n - 1] = 1.0;
            self.system.upper[n - 1] = 0.0;
            out[n - 1] = g - u[n - 1];
        }
        self.system.solve_in_place(out, &mut self.scratch)?;
        for i in 0..n {
            out[i] += u[i];
        }
        if self.bc.left.is_dirichlet() {
            out[0] = self.bc.left.value_at(t_next).unwrap_or(out[0]);
        }
        if self.bc.right.is_dirichlet() {
            out[n - 1] = self.bc.right.value_at(t_next).unwrap_or(out[n - 1]);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Field,
    /// `∫_0^t u ds`, trapezoid in time.
    pub z: Field,
    /// Cumulative `∫∫ k u^m v` removed from `u` by the reaction, measured
    /// with the grid quadrature weights.
    pub consumed: f64,
}

impl State {
    pub fn initial(spec: &ProblemSpec) -> Self {
        Self {
            t: 0.0,
            u: spec.u0.clone(),
            z: Field::zeros(spec.grid),
            consumed: 0.0,
        }
    }
}

/// Sampled solution history. `v` is reconstructed from `z` on request.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: Arc<ProblemSpec>,
    /// Factor applied to every reported `v` (`1/δ` for scaled runs).
    pub v_scale: f64,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn grid(&self) -> &Grid1D {
        &self.spec.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// Reported `v` at sample `i`.
    pub fn v(&self, i: usize) -> Field {
        let mut v = v_field(&self.states[i], &self.spec);
        if self.v_scale != 1.0 {
            v.values_mut().iter_mut().for_each(|x| *x *= self.v_scale);
        }
        v
    }

    /// `ln v` at sample `i`, finite wherever `v0 > 0` regardless of underflow.
    pub fn log_v(&self, i: usize) -> Vec<f64> {
        let k = self.spec.k;
        self.spec
            .v0
            .values()
            .iter()
            .zip(self.states[i].z.values())
            .map(|(&v0, &z)| (self.v_scale * v0).ln() - k * z)
            .collect()
    }
}

/// Stateful integrator; `run` and the lab sweeps drive it step by step.
#[derive(Debug, Clone)]
pub struct Simulation {
    spec: Arc<ProblemSpec>,
    stepper: ThetaStepper,
    state: State,
    steps_taken: usize,
    n_steps: usize,
    weights: Vec<f64>,
    absorption: Vec<f64>,
    next: Vec<f64>,
}

impl Simulation {
    pub fn new(spec: Arc<ProblemSpec>) -> Result<Self> {
        spec.validate()?;
        Self::from_state(State::initial(&spec), spec, 0)
    }

    fn from_state(state: State, spec: Arc<ProblemSpec>, steps_taken: usize) -> Result<Self> {
        let stepper = ThetaStepper::new(&spec.grid, &spec.bc, spec.theta)?;
        let n = spec.grid.n_nodes();
        Ok(Self {
            n_steps: spec.n_steps(),
            weights: spec.grid.quadrature_weights(),
            stepper,
            state,
            steps_taken,
            absorption: vec![0.0; n],
            next: vec![0.0; n],
            spec,
        })
    }

    pub fn spec(&self) -> &Arc<ProblemSpec> {
        &self.spec
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn is_finished(&self) -> bool {
        self.steps_taken >= self.n_steps
    }

    pub fn v(&self) -> Field {
        v_field(&self.state, &self.spec)
    }

    /// Advances one step. Returns `false` once `t_final` has been reached.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let t_next = self.spec.time_at(self.steps_taken + 1);
        self.advance_to(t_next)?;
        self.steps_taken += 1;
        Ok(true)
    }

    fn advance_to(&mut self, t_next: f64) -> Result<()> {
        let spec = &*self.spec;
        let dt = t_next - self.state.t;
        let u = self.state.u.values();
        let z = self.state.z.values();
        let v0 = spec.v0.values();
        for i in 0..u.len() {
            let v = deplete(v0[i], spec.k * z[i]);
            self.absorption[i] = dt * spec.k * reaction_power(u[i], spec.m) * v;
        }
        self.stepper
            .advance(u, t_next, dt, Some(&self.absorption), &mut self.next)
            .map_err(|e| Error::Run {
                t: t_next,
                source: Box::new(e),
            })?;

        let mut consumed = 0.0;
        for (i, &un) in self.next.iter().enumerate() {
            if un < NONNEGATIVITY_FLOOR {
                return Err(Error::SchemeViolation {
                    t: t_next,
                    node: i,
                    value: un,
                });
            }
            if !self.stepper.pinned(i) {
                consumed += self.weights[i] * self.absorption[i] * un;
            }
        }
        let z = self.state.z.values_mut();
        for i in 0..z.len() {
            z[i] += 0.5 * dt * (u[i] + self.next[i]);
        }
        self.state.u.values_mut().copy_from_slice(&self.next);
        self.state.consumed += consumed;
        self.state.t = t_next;
        Ok(())
    }
}

/// Advances `state` by one step of `spec.dt` (shortened so as not to pass
/// `t_final`).
pub fn step(state: &State, spec: &ProblemSpec) -> Result<State> {
    spec.validate()?;
    if *state.u.grid() != spec.grid || *state.z.grid() != spec.grid {
        return Err(Error::GridMismatch("state is not on the problem grid".into()));
    }
    let t_next = if spec.t_final > state.t {
        (state.t + spec.dt).min(spec.t_final)
    } else {
        state.t + spec.dt
    };
    let mut sim = Simulation::from_state(state.clone(), Arc::new(spec.clone()), 0)?;
    sim.advance_to(t_next)?;
    Ok(sim.state)
}

/// Integrates to `t_final`, keeping every `sample_stride`-th state plus the
/// initial and final ones.
pub fn run(spec: &ProblemSpec, sample_stride: usize) -> Result<Trajectory> {
    run_shared(Arc::new(spec.clone()), sample_stride)
}

pub fn run_shared(spec: Arc<ProblemSpec>, sample_stride: usize) -> Result<Trajectory> {
    if sample_stride == 0 {
        return Err(Error::InvalidSpec("sample stride must be >= 1".into()));
    }
    let mut sim = Simulation::new(spec.clone())?;
    let mut states = vec![sim.state().clone()];
    while sim.advance()? {
        if sim.steps_taken() % sample_stride == 0 || sim.is_finished() {
            states.push(sim.state().clone());
        }
    }
    Ok(Trajectory {
        spec,
        v_scale: 1.0,
        states,
    })
}

/// `v = v0 exp(-k z)` for a state of `spec`.
pub fn v_field(state: &State, spec: &ProblemSpec) -> Field {
    let values = spec
        .v0
        .values()
        .iter()
        .zip(state.z.values())
        .map(|(&v0, &z)| deplete(v0, spec.k * z))
        .collect();
    Field::new(spec.grid, values).expect("v0 and z share the problem grid")
}

/// Runs `∂t u = Δu - δ k u v, ∂t v = -k u v` with the data of `spec`
/// (`m` is ignored and taken as 1).
///
/// Substituting `ṽ = δ v` turns this into the unscaled linear-reaction system
/// with initial obstacle `δ v0`; the run is done in those variables and the
/// reported `v` is scaled back by `1/δ`.
pub fn scaled_run(spec: &ProblemSpec, delta: f64, sample_stride: usize) -> Result<Trajectory> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("scaling factor must be > 0, got {delta}")));
    }
    let mut scaled = spec.clone();
    scaled.m = 1.0;
    scaled
        .v0
        .values_mut()
        .iter_mut()
        .for_each(|v| *v *= delta);
    let mut traj = run(&scaled, sample_stride)?;
    traj.v_scale = 1.0 / delta;
    Ok(traj)
}
