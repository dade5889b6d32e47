//! Inflow problem on `(0, L)` against the one-phase free-boundary limit.
//!
//! `u = U0` is held at `x = 0`, `u = 0` at `x = L`, with `u(·, 0) = 0` and
//! `v(·, 0) = V0`. As `k → ∞` the solution approaches `f(x / √t)` behind the
//! front `x = ι √t`.

use std::sync::Arc;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::grid::{BoundarySpec, Field, Grid1D};
use crate::lab::report::{fit_power_law, interface_position, PowerLaw, Table};
use crate::par::{self, Execution};
use crate::profile::SelfSimilarProfile;
use crate::solver::{deplete, ProblemSpec, Simulation};

/// Metrics skip `t < EARLY_FRACTION · T`, where the inflow boundary layer
/// dominates.
pub const EARLY_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct StefanSpec {
    pub u_level: f64,
    pub v_level: f64,
    pub length: f64,
    pub cells: usize,
    /// `dt = cfl h²`.
    pub cfl: f64,
    /// Defaults to the time the limiting front reaches `L`.
    pub t_final: Option<f64>,
    pub k_values: Vec<f64>,
    /// Steps between metric evaluations.
    pub metric_stride: usize,
    /// Interface level as a fraction of `V0`.
    pub interface_level: f64,
    pub exec: Execution,
}

impl StefanSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.u_level > 0.0 && self.v_level > 0.0 && self.length > 0.0) {
            return bad("inflow level, obstacle level and length must be positive".into());
        }
        if self.cells < 2 || !(self.cfl > 0.0) || self.metric_stride == 0 {
            return bad("need cells >= 2, cfl > 0 and metric stride >= 1".into());
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                return bad(format!("final time must be positive, got {t}"));
            }
        }
        if self.k_values.is_empty() || self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("k values must be nonempty and strictly increasing".into());
        }
        if self.k_values.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return bad("rates must be finite and positive".into());
        }
        if !(self.interface_level > 0.0 && self.interface_level <= 1.0) {
            return bad("interface level must lie in (0, 1]".into());
        }
        Ok(())
    }

    /// Time at which `ι √t` reaches `L`.
    pub fn horizon(&self, profile: &SelfSimilarProfile) -> f64 {
        (self.length / profile.iota()).powi(2)
    }

    pub fn problem(&self, k: f64, t_final: f64) -> Result<ProblemSpec> {
        let grid = Grid1D::cartesian(0.0, self.length, self.cells)?;
        let h = grid.spacing();
        let spec = ProblemSpec {
            m: 1.0,
            k,
            grid,
            bc: BoundarySpec::dirichlet(self.u_level, 0.0),
            u0: Field::zeros(grid),
            v0: Field::constant(grid, self.v_level),
            t_final,
            dt: (self.cfl * h * h).min(t_final),
            theta: 1.0,
            segregated: true,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StefanRow {
    pub k: f64,
    /// `sup |u_k - U|` over nodes and metric times in `[0.01 T, T]`.
    pub sup_error: f64,
    /// `sup |x*(t) - ι √t|` over the same times.
    pub interface_error: f64,
    /// Fit `x*(t) ≈ c t^p`.
    pub fit: PowerLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StefanCurve {
    pub k: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StefanReport {
    pub iota: f64,
    pub t_final: f64,
    /// Requested final time was cut back to the horizon.
    pub truncated: bool,
    pub rows: Vec<StefanRow>,
    pub interfaces: Vec<StefanCurve>,
    pub failures: Vec<(f64, String)>,
}

impl StefanReport {
    pub fn sup_error_nonincreasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sup_error <= w[0].sup_error * (1.0 + slack))
    }

    pub fn metrics_table(&self) -> Table {
        let mut t = Table::new([
            "k",
            "sup_error",
            "interface_error",
            "fit_prefactor",
            "fit_exponent",
            "iota",
            "t_final",
        ]);
        for r in &self.rows {
            t.push_values(&[
                r.k,
                r.sup_error,
                r.interface_error,
                r.fit.prefactor,
                r.fit.exponent,
                self.iota,
                self.t_final,
            ]);
        }
        t
    }

    pub fn interface_table(&self) -> Table {
        let mut t = Table::new(["k", "t", "x", "x_limit"]);
        for c in &self.interfaces {
            for (time, x) in c.times.iter().zip(&c.positions) {
                t.push_values(&[c.k, *time, *x, self.iota * time.sqrt()]);
            }
        }
        t
    }
}

fn run_one(spec: &StefanSpec, profile: &SelfSimilarProfile, k: f64, t_final: f64) -> Result<(StefanRow, StefanCurve)> {
    let problem = Arc::new(spec.problem(k, t_final)?);
    let grid = problem.grid;
    let positions = grid.positions();
    let level = spec.interface_level * spec.v_level;
    let t_start = EARLY_FRACTION * t_final;
    let mut sim = Simulation::new(problem)?;
    let mut v = vec![0.0; grid.n_nodes()];
    let mut sup_error: f64 = 0.0;
    let mut interface_error: f64 = 0.0;
    let mut curve = StefanCurve {
        k,
        times: Vec::new(),
        positions: Vec::new(),
    };
    while sim.advance()? {
        if !(sim.steps_taken() % spec.metric_stride == 0 || sim.is_finished()) {
            continue;
        }
        let s = sim.state();
        if s.t < t_start {
            continue;
        }
        for (i, (&x, &u)) in positions.iter().zip(s.u.values()).enumerate() {
            sup_error = sup_error.max((u - profile.limit_solution(x, s.t)?).abs());
            v[i] = deplete(spec.v_level, k * s.z.values()[i]);
        }
        let x_star = interface_position(&grid, &v, level);
        interface_error = interface_error.max((x_star - profile.front(s.t)).abs());
        curve.times.push(s.t);
        curve.positions.push(x_star);
    }
    let fit = fit_power_law(&curve.times, &curve.positions)?;
    Ok((
        StefanRow {
            k,
            sup_error,
            interface_error,
            fit,
        },
        curve,
    ))
}

pub fn stefan_experiment(spec: &StefanSpec) -> Result<StefanReport> {
    spec.validate()?;
    let profile = SelfSimilarProfile::new(spec.u_level, spec.v_level)?;
    let horizon = spec.horizon(&profile);
    let (t_final, truncated) = match spec.t_final {
        Some(t) if t > horizon * (1.0 + 1e-12) => {
            warn!("final time {t} lets the limiting front leave the domain; truncated to {horizon}");
            (horizon, true)
        }
        Some(t) => (t, false),
        None => (horizon, false),
    };
    let results = par::map(spec.exec, &spec.k_values, |&k| {
        let r = run_one(spec, &profile, k, t_final);
        match &r {
            Ok((row, _)) => info!("k = {k:e}: sup error {:.3e}", row.sup_error),
            Err(e) => warn!("k = {k:e} failed: {e}"),
        }
        r
    });
    let mut report = StefanReport {
        iota: profile.iota(),
        t_final,
        truncated,
        rows: Vec::new(),
        interfaces: Vec::new(),
        failures: Vec::new(),
    };
    for (k, r) in spec.k_values.iter().zip(results) {
        match r {
            Ok((row, curve)) => {
                report.rows.push(row);
                report.interfaces.push(curve);
            }
            Err(e) => report.failures.push((*k, e.to_string())),
        }
    }
    Ok(report)
}
