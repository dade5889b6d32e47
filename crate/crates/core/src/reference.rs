//! Heat-equation reference solutions on the solver's grids.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BoundarySpec, Field, Grid1D};
use crate::solver::{ProblemSpec, State, ThetaStepper, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSpec {
    pub grid: Grid1D,
    pub bc: BoundarySpec,
    pub u0: Field,
    pub t_final: f64,
    pub dt: f64,
    pub theta: f64,
}

impl HeatSpec {
    /// The heat problem underlying a reaction problem.
    pub fn from_problem(spec: &ProblemSpec) -> Self {
        Self {
            grid: spec.grid,
            bc: spec.bc.clone(),
            u0: spec.u0.clone(),
            t_final: spec.t_final,
            dt: spec.dt,
            theta: spec.theta,
        }
    }

    /// Same problem written as a reaction problem with no obstacle.
    pub fn as_problem(&self) -> ProblemSpec {
        ProblemSpec {
            m: 1.0,
            k: 0.0,
            grid: self.grid,
            bc: self.bc.clone(),
            u0: self.u0.clone(),
            v0: Field::zeros(self.grid),
            t_final: self.t_final,
            dt: self.dt,
            theta: self.theta,
            segregated: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.as_problem().validate()
    }
}

/// θ-scheme heat flow, stepped in lockstep with a [`crate::solver::Simulation`]
/// of the same grid and step sequence.
#[derive(Debug, Clone)]
pub struct HeatSimulation {
    spec: Arc<ProblemSpec>,
    stepper: ThetaStepper,
    state: State,
    steps_taken: usize,
    n_steps: usize,
    next: Vec<f64>,
}

impl HeatSimulation {
    pub fn new(spec: &HeatSpec) -> Result<Self> {
        let problem = Arc::new(spec.as_problem());
        problem.validate()?;
        let stepper = ThetaStepper::new(&spec.grid, &spec.bc, spec.theta)?;
        Ok(Self {
            state: State::initial(&problem),
            n_steps: problem.n_steps(),
            next: vec![0.0; spec.grid.n_nodes()],
            spec: problem,
            stepper,
            steps_taken: 0,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn is_finished(&self) -> bool {
        self.steps_taken >= self.n_steps
    }

    pub fn advance(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let t_next = self.spec.time_at(self.steps_taken + 1);
        let dt = t_next - self.state.t;
        self.stepper
            .advance(self.state.u.values(), t_next, dt, None, &mut self.next)
            .map_err(|e| Error::Run {
                t: t_next,
                source: Box::new(e),
            })?;
        let u = self.state.u.values();
        let z = self.state.z.values_mut();
        for i in 0..z.len() {
            z[i] += 0.5 * dt * (u[i] + self.next[i]);
        }
        self.state.u.values_mut().copy_from_slice(&self.next);
        self.state.t = t_next;
        self.steps_taken += 1;
        Ok(true)
    }
}

/// Heat trajectory sampled like [`crate::solver::run`]; `v` is identically zero.
pub fn heat_run(spec: &HeatSpec, sample_stride: usize) -> Result<Trajectory> {
    if sample_stride == 0 {
        return Err(Error::InvalidSpec("sample stride must be >= 1".into()));
    }
    let mut sim = HeatSimulation::new(spec)?;
    let mut states = vec![sim.state().clone()];
    while sim.advance()? {
        if sim.steps_taken() % sample_stride == 0 || sim.is_finished() {
            states.push(sim.state().clone());
        }
    }
    Ok(Trajectory {
        spec: sim.spec,
        v_scale: 1.0,
        states,
    })
}

/// Trapezoid integral of `field`, with measure `r^(n-1) dr` on radial grids.
pub fn mass(field: &Field) -> f64 {
    field
        .grid()
        .quadrature_weights()
        .iter()
        .zip(field.values())
        .map(|(w, f)| w * f)
        .sum()
}
