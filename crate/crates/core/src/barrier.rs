//! Annular subsolution barrier.
//!
//! A one-dimensional inflow solution `u_{k,δ}` on `(d1, d2)` of the scaled
//! system `∂t u = u_rr - δ k u v, ∂t v = -k u v` is lifted to the annulus
//! `d1 < |x| < d2` in dimension `n` as
//!
//! ```text
//! ū(r, t) = exp(σ (d2 - r)) u_{k,δ}(r, t),    v̄ = v_{k,δ},    σ = 1 + (n - 1) / d1
//! ```
//!
//! with inflow level `U_* = exp(-σ (d2 - d1)) U0`. For large `k` the pair is a
//! subsolution of the full system and `ū` stays above a positive constant on
//! `An(d1, d3) × [t0, T0]`. This module builds the pair from simulations and
//! measures how well both differential inequalities hold.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{
    laplacian_matrix, BoundaryCondition, BoundarySpec, Field, Grid1D, TimeSeries,
};
use crate::par::{self, Execution};
use crate::profile::{gauss_quarter_integral, solve_iota};
use crate::solver::{scaled_run, ProblemSpec, Simulation, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusBarrierSpec {
    pub d1: f64,
    pub d3: f64,
    pub d2: f64,
    pub dim: u32,
    pub u0: f64,
    pub v0: f64,
    pub t0: f64,
    pub t_end: f64,
    pub m: f64,
    pub k: f64,
}

impl AnnulusBarrierSpec {
    pub fn validate(&self) -> Result<()> {
        let hyp = |msg: String| Err(Error::HypothesisViolated(msg));
        if !(0.0 < self.d1 && self.d1 < self.d3 && self.d3 < self.d2) {
            return hyp(format!(
                "need 0 < d1 < d3 < d2, got {}, {}, {}",
                self.d1, self.d3, self.d2
            ));
        }
        if self.dim == 0 {
            return hyp("dimension must be >= 1".into());
        }
        if !(self.u0 > 0.0 && self.v0 > 0.0) {
            return hyp("U0 and V0 must be positive".into());
        }
        if !(0.0 < self.t0 && self.t0 < self.t_end) {
            return hyp(format!("need 0 < t0 < T0, got {}, {}", self.t0, self.t_end));
        }
        if !(self.m > 1.0 && self.k > 0.0) {
            return hyp(format!("need m > 1 and k > 0, got m = {}, k = {}", self.m, self.k));
        }
        let (lo, hi) = self.window();
        if lo >= hi {
            return hyp(format!(
                "T0 < (d2/d3)² t0 fails: front window ({lo}, {hi}) is empty"
            ));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        1.0 + (self.dim as f64 - 1.0) / self.d1
    }

    /// Reduced inflow level `U_* = exp(-σ (d2 - d1)) U0`.
    pub fn u_star(&self) -> f64 {
        (-self.sigma() * (self.d2 - self.d1)).exp() * self.u0
    }

    /// Admissible front constants `(d3 / √t0, d2 / √T0)`.
    pub fn window(&self) -> (f64, f64) {
        (self.d3 / self.t0.sqrt(), self.d2 / self.t_end.sqrt())
    }

    /// `c_* = exp(-(m - 1) σ (d2 - d1))`.
    pub fn c_star(&self) -> f64 {
        (-(self.m - 1.0) * self.sigma() * (self.d2 - self.d1)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IotaChoice {
    pub iota_star: f64,
    pub delta: f64,
}

/// Picks the front constant `ι*` (geometric mean of the admissible window)
/// and the obstacle scaling `δ` with `ι(U_*, δ V0) = ι*`.
///
/// `δ` follows in closed form from the front equation:
/// `δ = 2 U_* / (V0 g(ι*))` with `g(ι) = ι ∫_0^ι exp((ι² - s²)/4) ds`.
pub fn choose_iota_star(spec: &AnnulusBarrierSpec) -> Result<IotaChoice> {
    spec.validate()?;
    let (lo, hi) = spec.window();
    let iota_star = (lo * hi).sqrt();
    let log_g = iota_star.ln() + 0.25 * iota_star * iota_star + gauss_quarter_integral(iota_star)?.ln();
    let delta = (2.0 * spec.u_star() / spec.v0).ln() - log_g;
    let delta = delta.exp();
    let check = solve_iota(spec.u_star(), delta * spec.v0)?;
    if (check - iota_star).abs() > 1e-10 * iota_star {
        return Err(Error::NoConvergence(format!(
            "front constant for δ = {delta} is {check}, wanted {iota_star}"
        )));
    }
    Ok(IotaChoice { iota_star, delta })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub value: f64,
    pub x: f64,
    pub t: f64,
}

impl Margin {
    const NONE: Margin = Margin {
        value: f64::NEG_INFINITY,
        x: f64::NAN,
        t: f64::NAN,
    };

    fn raise(&mut self, value: f64, x: f64, t: f64) {
        if value > self.value {
            *self = Margin { value, x, t };
        }
    }
}

/// `max k u^m v - λ1 k u v - λ2 u` over the interior nodes of every sample.
pub fn reaction_inequality_margin(traj: &Trajectory, lambda1: f64, lambda2: f64, m: f64) -> Margin {
    let k = traj.spec.k;
    let grid = traj.grid();
    let n = grid.n_nodes();
    let mut worst = Margin::NONE;
    for (j, state) in traj.states.iter().enumerate() {
        let v = traj.v(j);
        for i in 1..n - 1 {
            let u = state.u.values()[i].max(0.0);
            let vi = v.values()[i];
            worst.raise(k * u.powf(m) * vi - lambda1 * k * u * vi - lambda2 * u, grid.node(i), state.t);
        }
    }
    worst
}

/// Sampled barrier pair on the annulus grid.
#[derive(Debug, Clone)]
pub struct AnnulusSubsolution {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub u_bar: Vec<Vec<f64>>,
    pub v_bar: Vec<Vec<f64>>,
    /// `ln v̄`, kept separately so the depletion rate survives underflow.
    pub log_v_bar: Vec<Vec<f64>>,
    /// The underlying one-dimensional profile `u_{k,δ}`.
    pub u_interval: Vec<Vec<f64>>,
    pub k: f64,
    pub delta: f64,
}

/// Lifts `interval_traj` (a scaled run on `(d1, d2)`) to the annulus.
pub fn build_annulus_subsolution(
    spec: &AnnulusBarrierSpec,
    interval_traj: &Trajectory,
    delta: f64,
) -> Result<AnnulusSubsolution> {
    let g = interval_traj.grid();
    let tol = 1e-12 * spec.d2;
    if (g.x_min() - spec.d1).abs() > tol || (g.x_max() - spec.d2).abs() > tol {
        return Err(Error::GridMismatch(format!(
            "interval trajectory lives on [{}, {}], barrier needs [{}, {}]",
            g.x_min(),
            g.x_max(),
            spec.d1,
            spec.d2
        )));
    }
    let grid = Grid1D::radial(spec.d1, spec.d2, g.n_cells(), spec.dim)?;
    let sigma = spec.sigma();
    let lift: Vec<f64> = grid
        .positions()
        .iter()
        .map(|r| (sigma * (spec.d2 - r)).exp())
        .collect();
    let mut sub = AnnulusSubsolution {
        grid,
        times: interval_traj.times(),
        u_bar: Vec::with_capacity(interval_traj.len()),
        v_bar: Vec::with_capacity(interval_traj.len()),
        log_v_bar: Vec::with_capacity(interval_traj.len()),
        u_interval: Vec::with_capacity(interval_traj.len()),
        k: interval_traj.spec.k,
        delta,
    };
    for (j, state) in interval_traj.states.iter().enumerate() {
        let u = state.u.values();
        sub.u_bar.push(u.iter().zip(&lift).map(|(u, e)| e * u).collect());
        sub.v_bar.push(interval_traj.v(j).into_values());
        sub.log_v_bar.push(interval_traj.log_v(j));
        sub.u_interval.push(u.to_vec());
    }
    Ok(sub)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    /// Worst `∂t ū - Δū + k ū^m v̄`; nonpositive means the `u` inequality holds.
    pub sub_u: Margin,
    /// Worst `-(∂t v̄ + k ū v̄)`; nonpositive means the `v` inequality holds.
    pub sub_v: Margin,
    /// Worst reaction margin of `u_{k,δ}` with `λ1 = δ c_*`, `λ2 = c_*`.
    pub reaction: Margin,
    /// `min ū` over `[d1, d3] × [t0, T0]`.
    pub rho_hat: f64,
    /// Largest `∂r u_{k,δ}` and `-∂t u_{k,δ}` seen (both ideally `<= 0`).
    pub monotonicity_defect: f64,
    pub h: f64,
    /// Largest gap between consecutive samples used in the time differences.
    pub sample_dt: f64,
}

impl BarrierReport {
    /// Discretization scale `h² + Δt` the violations are measured against.
    pub fn resolution(&self) -> f64 {
        self.h * self.h + self.sample_dt
    }

    pub fn to_text(&self) -> String {
        let row = |name: &str, m: &Margin| format!("{name},{:.16e},{:.16e},{:.16e}\n", m.value, m.x, m.t);
        let mut out = String::from("quantity,value,x,t\n");
        out += &row("sub_u", &self.sub_u);
        out += &row("sub_v", &self.sub_v);
        out += &row("reaction", &self.reaction);
        out += &format!("rho_hat,{:.16e},,\n", self.rho_hat);
        out += &format!("monotonicity_defect,{:.16e},,\n", self.monotonicity_defect);
        out += &format!("h,{:.16e},,\n", self.h);
        out += &format!("sample_dt,{:.16e},,\n", self.sample_dt);
        out
    }
}

/// Partial maxima over one sample (and the gap to the next one).
struct Piece {
    sub_u: Margin,
    sub_v: Margin,
    reaction: Margin,
    rho_hat: f64,
    defect: f64,
    sample_dt: f64,
}

impl Default for Piece {
    fn default() -> Self {
        Self {
            sub_u: Margin::NONE,
            sub_v: Margin::NONE,
            reaction: Margin::NONE,
            rho_hat: f64::INFINITY,
            defect: f64::NEG_INFINITY,
            sample_dt: 0.0,
        }
    }
}

impl Piece {
    /// Ties keep the earlier sample, so the result does not depend on how
    /// the samples were split across threads.
    fn merge(&mut self, other: Piece) {
        for (a, b) in [
            (&mut self.sub_u, other.sub_u),
            (&mut self.sub_v, other.sub_v),
            (&mut self.reaction, other.reaction),
        ] {
            if b.value > a.value {
                *a = b;
            }
        }
        self.rho_hat = self.rho_hat.min(other.rho_hat);
        self.defect = self.defect.max(other.defect);
        self.sample_dt = self.sample_dt.max(other.sample_dt);
    }
}

/// Evaluates both differential inequalities between consecutive samples.
///
/// Differences are centred at the half step: `∂t ū` is the sample difference,
/// `Δū` and the reaction are averaged over the two samples. The `v`
/// inequality is checked through `∂t ln v̄ ≥ -k ū`, scaled back by the mean
/// `v̄`, which stays accurate where `v̄` collapses within one sample gap.
pub fn verify_subsolution(sub: &AnnulusSubsolution, spec: &AnnulusBarrierSpec) -> Result<BarrierReport> {
    let n = sub.grid.n_nodes();
    let used = sub
        .times
        .iter()
        .take_while(|&&t| t <= spec.t_end * (1.0 + 1e-12))
        .count();
    if used < 3 || n < 3 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 3 samples in time and space, got {used} x {n}"
        )));
    }
    let lap = laplacian_matrix(&sub.grid, &BoundarySpec::dirichlet(0.0, 0.0))?;
    let k = sub.k;
    let m = spec.m;
    let c_star = spec.c_star();
    let (lambda1, lambda2) = (sub.delta * c_star, c_star);
    let positions = sub.grid.positions();
    let indices: Vec<usize> = (0..used).collect();
    let pieces = par::map(Execution::Parallel, &indices, |&j| {
        let mut out = Piece::default();
        let t = sub.times[j];
        let u = &sub.u_interval[j];
        for i in 1..n - 1 {
            let v = sub.v_bar[j][i];
            let value = k * u[i].powf(m) * v - lambda1 * k * u[i] * v - lambda2 * u[i];
            out.reaction.raise(value, positions[i], t);
            out.defect = out.defect.max((u[i + 1] - u[i - 1]) / (positions[i + 1] - positions[i - 1]));
        }
        if t >= spec.t0 * (1.0 - 1e-12) {
            for i in 0..n {
                if positions[i] <= spec.d3 * (1.0 + 1e-12) {
                    out.rho_hat = out.rho_hat.min(sub.u_bar[j][i]);
                }
            }
        }
        if j + 1 == used {
            return out;
        }
        let t_next = sub.times[j + 1];
        let dt = t_next - t;
        out.sample_dt = dt;
        let t_mid = 0.5 * (t + t_next);
        let (ub0, ub1) = (&sub.u_bar[j], &sub.u_bar[j + 1]);
        let (vb0, vb1) = (&sub.v_bar[j], &sub.v_bar[j + 1]);
        let mut lap0 = vec![0.0; n];
        let mut lap1 = vec![0.0; n];
        lap.apply(ub0, &mut lap0);
        lap.apply(ub1, &mut lap1);
        for i in 1..n - 1 {
            out.defect = out.defect.max(-(sub.u_interval[j + 1][i] - u[i]) / dt);
            let ut = (ub1[i] - ub0[i]) / dt;
            let lap_mid = 0.5 * (lap0[i] + lap1[i]);
            let react = 0.5 * k * (ub0[i].powf(m) * vb0[i] + ub1[i].powf(m) * vb1[i]);
            out.sub_u.raise(ut - lap_mid + react, positions[i], t_mid);
            let (l0, l1) = (sub.log_v_bar[j][i], sub.log_v_bar[j + 1][i]);
            if l0.is_finite() && l1.is_finite() {
                let dlog = (l1 - l0) / dt;
                let u_mid = 0.5 * (ub0[i] + ub1[i]);
                let v_mid = 0.5 * (vb0[i] + vb1[i]);
                out.sub_v.raise(-v_mid * (dlog + k * u_mid), positions[i], t_mid);
            }
        }
        out
    });
    let mut total = Piece::default();
    for p in pieces {
        total.merge(p);
    }
    let Piece {
        sub_u,
        sub_v,
        reaction,
        rho_hat,
        defect,
        sample_dt,
    } = total;
    Ok(BarrierReport {
        sub_u,
        sub_v,
        reaction,
        rho_hat,
        monotonicity_defect: defect,
        h: sub.grid.spacing(),
        sample_dt,
    })
}

/// Resolution and sampling of a barrier experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierRunConfig {
    /// Cells across `(d1, d2)`; the inflow run on `(0, d2)` uses the same spacing.
    pub n_cells: usize,
    /// `dt = cfl h²`.
    pub cfl: f64,
    pub sample_stride: usize,
}

#[derive(Debug, Clone)]
pub struct BarrierOutcome {
    pub choice: IotaChoice,
    pub interval_traj: Trajectory,
    pub subsolution: AnnulusSubsolution,
    pub report: BarrierReport,
}

/// Inflow trace at `x = d1` of the inflow problem on `(0, d2)` with boundary
/// level `U_*` and obstacle `δ V0`, sampled at every time step.
pub fn inflow_trace(
    spec: &AnnulusBarrierSpec,
    delta: f64,
    h: f64,
    dt: f64,
) -> Result<TimeSeries> {
    let n_half = (spec.d2 / h).round() as usize;
    let grid = Grid1D::cartesian(0.0, spec.d2, n_half)?;
    let probe = grid
        .node_index(spec.d1, 1e-9)
        .ok_or_else(|| Error::GridMismatch(format!("d1 = {} is not a node of the inflow grid", spec.d1)))?;
    let problem = ProblemSpec {
        m: 1.0,
        k: spec.k,
        grid,
        bc: BoundarySpec::dirichlet(spec.u_star(), 0.0),
        u0: Field::zeros(grid),
        v0: Field::constant(grid, delta * spec.v0),
        t_final: spec.t_end,
        dt,
        theta: 1.0,
        segregated: true,
    };
    let mut sim = Simulation::new(Arc::new(problem))?;
    let mut times = vec![0.0];
    let mut values = vec![sim.state().u.values()[probe]];
    while sim.advance()? {
        times.push(sim.state().t);
        values.push(sim.state().u.values()[probe]);
    }
    TimeSeries::new(times, values)
}

/// Full pipeline: choose `(ι*, δ)`, build the inflow trace, run the scaled
/// interval problem on `(d1, d2)`, lift and verify.
pub fn run_barrier(spec: &AnnulusBarrierSpec, cfg: &BarrierRunConfig) -> Result<BarrierOutcome> {
    let choice = choose_iota_star(spec)?;
    let grid = Grid1D::cartesian(spec.d1, spec.d2, cfg.n_cells)?;
    let h = grid.spacing();
    let dt = cfg.cfl * h * h;
    let trace = inflow_trace(spec, choice.delta, h, dt)?;
    let problem = ProblemSpec {
        m: spec.m,
        k: spec.k,
        grid,
        bc: BoundarySpec::new(
            BoundaryCondition::DirichletSeries(trace),
            BoundaryCondition::DirichletConst(0.0),
        ),
        u0: Field::zeros(grid),
        v0: Field::constant(grid, spec.v0),
        t_final: spec.t_end,
        dt,
        theta: 1.0,
        segregated: true,
    };
    let interval_traj = scaled_run(&problem, choice.delta, cfg.sample_stride)?;
    let subsolution = build_annulus_subsolution(spec, &interval_traj, choice.delta)?;
    let report = verify_subsolution(&subsolution, spec)?;
    Ok(BarrierOutcome {
        choice,
        interval_traj,
        subsolution,
        report,
    })
}
