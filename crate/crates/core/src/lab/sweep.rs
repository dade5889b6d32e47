//! k-sweeps against the heat limit.
//!
//! Every run is stepped in lockstep with its own heat reference on the same
//! grid and step sequence, so `sup |u_k - u_∞|` is taken over every time level
//! rather than over output samples.

use std::sync::Arc;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::grid::BoundaryCondition;
use crate::lab::report::{interface_position, Table};
use crate::par::{self, Execution};
use crate::reference::{mass, HeatSimulation, HeatSpec};
use crate::solver::{deplete, ProblemSpec, Simulation};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ProblemSpec,
    pub k_values: Vec<f64>,
    /// `Ω₀ = [a, b]`.
    pub compact: [f64; 2],
    pub tau: f64,
    pub probe: f64,
    /// Interface level as a fraction of `max v0`.
    pub interface_level: f64,
    /// Steps between interface samples.
    pub interface_stride: usize,
    pub exec: Execution,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.k_values.is_empty() {
            return bad("empty k ladder".into());
        }
        if self.k_values.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return bad("rates must be finite and >= 0".into());
        }
        if self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("k values must be strictly increasing".into());
        }
        let g = &self.base.grid;
        let [a, b] = self.compact;
        let left_ok = if self.base.bc.left.is_dirichlet() { a > g.x_min() } else { a >= g.x_min() };
        let right_ok = if self.base.bc.right.is_dirichlet() { b < g.x_max() } else { b <= g.x_max() };
        if !(a < b && left_ok && right_ok) {
            return bad(format!(
                "compact subset [{a}, {b}] must lie inside [{}, {}], away from Dirichlet ends",
                g.x_min(),
                g.x_max()
            ));
        }
        if !(self.tau > 0.0 && self.tau < self.base.t_final) {
            return bad(format!("tau must lie in (0, T), got {}", self.tau));
        }
        if !(a..=b).contains(&self.probe) {
            return bad(format!("probe {} is outside the compact subset", self.probe));
        }
        if !(self.interface_level > 0.0 && self.interface_level <= 1.0) {
            return bad("interface level must lie in (0, 1]".into());
        }
        if self.interface_stride == 0 {
            return bad("interface stride must be >= 1".into());
        }
        Ok(())
    }

    fn conserves_mass(&self) -> bool {
        matches!(self.base.bc.left, BoundaryCondition::NeumannZero)
            && matches!(self.base.bc.right, BoundaryCondition::NeumannZero)
    }
}

/// Metrics of one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    /// `sup |u_k - u_∞|` over all nodes and time levels.
    pub u_error: f64,
    /// `sup v_k` over `Ω₀ × [τ, T]`.
    pub v_sup_compact: f64,
    /// `sup v_k` over the closed domain times `[τ, T]`.
    pub v_sup_domain: f64,
    /// `ln v_k(probe, τ)`.
    pub log_v_probe: f64,
    /// `max (u_k - u_∞)`; the comparison principle makes this `<= 0`.
    pub comparison_excess: f64,
    /// `max |M(u_k) + consumed - M(u0)|`, Neumann problems only.
    pub mass_balance: Option<f64>,
}

impl SweepRow {
    /// Whether `sup_{Ω₀ × [τ, T]} v_k < k⁻³`.
    pub fn below_cubic(&self) -> bool {
        self.v_sup_compact < self.k.powi(-3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceCurve {
    pub k: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
}

/// Slope of `ln v_k(probe, τ)` between consecutive rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySlope {
    pub k_lo: f64,
    pub k_hi: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatDiagnostics {
    /// `∫_0^τ u_∞(probe, s) ds`; `-z` is the limiting decay slope.
    pub z_probe: f64,
    /// `max |M(u_∞) - M(u0)|`, Neumann problems only.
    pub mass_drift: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub interfaces: Vec<InterfaceCurve>,
    pub decay: Vec<DecaySlope>,
    pub heat: Option<HeatDiagnostics>,
    pub failures: Vec<(f64, String)>,
}

impl SweepReport {
    /// Rate slopes against the reference `-∫_0^τ u_∞(probe)`.
    pub fn reference_slope(&self) -> Option<f64> {
        self.heat.as_ref().map(|h| -h.z_probe)
    }

    /// Smallest rate with `sup_{Ω₀ × [τ, T]} v_k < k⁻³`.
    pub fn cubic_onset(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.below_cubic()).map(|r| r.k)
    }

    /// True if the `u` error never grows by more than `slack` (relative)
    /// from one rate to the next.
    pub fn u_error_nonincreasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].u_error <= w[0].u_error * (1.0 + slack))
    }

    pub fn metrics_table(&self) -> Table {
        let mut t = Table::new([
            "k",
            "u_error",
            "v_sup_compact",
            "v_sup_domain",
            "log_v_probe",
            "comparison_excess",
            "mass_balance",
            "below_cubic",
        ]);
        for r in &self.rows {
            t.push(vec![
                Some(r.k),
                Some(r.u_error),
                Some(r.v_sup_compact),
                Some(r.v_sup_domain),
                Some(r.log_v_probe),
                Some(r.comparison_excess),
                r.mass_balance,
                Some(if r.below_cubic() { 1.0 } else { 0.0 }),
            ]);
        }
        t
    }

    pub fn decay_table(&self) -> Table {
        let mut t = Table::new(["k_lo", "k_hi", "slope", "reference_slope"]);
        for d in &self.decay {
            t.push(vec![Some(d.k_lo), Some(d.k_hi), Some(d.slope), self.reference_slope()]);
        }
        t
    }

    pub fn interface_table(&self) -> Table {
        let mut t = Table::new(["k", "t", "x"]);
        for c in &self.interfaces {
            for (time, x) in c.times.iter().zip(&c.positions) {
                t.push_values(&[c.k, *time, *x]);
            }
        }
        t
    }

    /// Rebuilds the per-rate rows from [`SweepReport::metrics_table`].
    pub fn rows_from_table(table: &Table) -> Result<Vec<SweepRow>> {
        let col = |name: &str| {
            table
                .column(name)
                .ok_or_else(|| Error::Config(format!("metrics table lacks column `{name}`")))
        };
        let need = |c: Vec<Option<f64>>, name: &str| -> Result<Vec<f64>> {
            c.into_iter()
                .map(|x| x.ok_or_else(|| Error::Config(format!("empty cell in column `{name}`"))))
                .collect()
        };
        let k = need(col("k")?, "k")?;
        let u_error = need(col("u_error")?, "u_error")?;
        let vc = need(col("v_sup_compact")?, "v_sup_compact")?;
        let vd = need(col("v_sup_domain")?, "v_sup_domain")?;
        let lv = need(col("log_v_probe")?, "log_v_probe")?;
        let ce = need(col("comparison_excess")?, "comparison_excess")?;
        let mb = col("mass_balance")?;
        Ok((0..k.len())
            .map(|i| SweepRow {
                k: k[i],
                u_error: u_error[i],
                v_sup_compact: vc[i],
                v_sup_domain: vd[i],
                log_v_probe: lv[i],
                comparison_excess: ce[i],
                mass_balance: mb[i],
            })
            .collect())
    }
}

struct Run {
    row: SweepRow,
    interface: InterfaceCurve,
    heat: HeatDiagnostics,
}

/// Linear interpolation of nodal values at `x`.
fn sample_at(grid: &crate::grid::Grid1D, values: &[f64], x: f64) -> f64 {
    let s = ((x - grid.x_min()) / grid.spacing()).clamp(0.0, grid.n_cells() as f64);
    let i = (s.floor() as usize).min(grid.n_cells() - 1);
    let w = s - i as f64;
    (1.0 - w) * values[i] + w * values[i + 1]
}

fn run_one(spec: &SweepSpec, k: f64) -> Result<Run> {
    let mut problem = spec.base.clone();
    problem.k = k;
    let problem = Arc::new(problem);
    let grid = problem.grid;
    let positions = grid.positions();
    let [a, b] = spec.compact;
    let tol = 1e-9 * grid.spacing();
    let compact: Vec<bool> = positions.iter().map(|&x| x >= a - tol && x <= b + tol).collect();
    let v0 = problem.v0.values();
    let level = spec.interface_level * problem.v0.max();
    let mass_tracked = spec.conserves_mass();
    let weights = grid.quadrature_weights();
    let m0 = mass(&problem.u0);

    let mut sim = Simulation::new(problem.clone())?;
    let mut heat = HeatSimulation::new(&HeatSpec::from_problem(&problem))?;

    let mut row = SweepRow {
        k,
        u_error: 0.0,
        v_sup_compact: 0.0,
        v_sup_domain: 0.0,
        log_v_probe: f64::NAN,
        comparison_excess: f64::NEG_INFINITY,
        mass_balance: mass_tracked.then_some(0.0),
    };
    let mut heat_diag = HeatDiagnostics {
        z_probe: f64::NAN,
        mass_drift: mass_tracked.then_some(0.0),
    };
    let mut interface = InterfaceCurve {
        k,
        times: Vec::new(),
        positions: Vec::new(),
    };
    let mut v = vec![0.0; grid.n_nodes()];
    let record_v = |z: &[f64], row: &mut SweepRow| {
        for i in 0..z.len() {
            let vi = deplete(v0[i], k * z[i]);
            row.v_sup_domain = row.v_sup_domain.max(vi);
            if compact[i] {
                row.v_sup_compact = row.v_sup_compact.max(vi);
            }
        }
    };
    let sample_interface = |t: f64, z: &[f64], v: &mut [f64], curve: &mut InterfaceCurve| {
        for i in 0..z.len() {
            v[i] = deplete(v0[i], k * z[i]);
        }
        curve.times.push(t);
        curve.positions.push(interface_position(&grid, v, level));
    };
    sample_interface(0.0, sim.state().z.values(), &mut v, &mut interface);

    let mut z_prev = sim.state().z.values().to_vec();
    let mut zh_prev = heat.state().z.values().to_vec();
    let mut before_tau = true;
    loop {
        let t_prev = sim.state().t;
        if before_tau {
            z_prev.copy_from_slice(sim.state().z.values());
            zh_prev.copy_from_slice(heat.state().z.values());
        }
        if !sim.advance()? {
            break;
        }
        heat.advance()?;
        let s = sim.state();
        let hs = heat.state();
        let u = s.u.values();
        let uh = hs.u.values();
        for i in 0..u.len() {
            let d = u[i] - uh[i];
            row.u_error = row.u_error.max(d.abs());
            row.comparison_excess = row.comparison_excess.max(d);
        }
        if let Some(mb) = row.mass_balance.as_mut() {
            let m: f64 = weights.iter().zip(u).map(|(w, u)| w * u).sum();
            *mb = mb.max((m + s.consumed - m0).abs());
        }
        if let Some(md) = heat_diag.mass_drift.as_mut() {
            *md = md.max((mass(&hs.u) - m0).abs());
        }
        if before_tau && s.t >= spec.tau {
            // z at exactly τ by linear interpolation within the step.
            let w = (spec.tau - t_prev) / (s.t - t_prev);
            let zt: Vec<f64> = z_prev
                .iter()
                .zip(s.z.values())
                .map(|(a, b)| a + w * (b - a))
                .collect();
            let zh: Vec<f64> = zh_prev
                .iter()
                .zip(hs.z.values())
                .map(|(a, b)| a + w * (b - a))
                .collect();
            record_v(&zt, &mut row);
            let v0_probe = sample_at(&grid, v0, spec.probe);
            row.log_v_probe = v0_probe.ln() - k * sample_at(&grid, &zt, spec.probe);
            heat_diag.z_probe = sample_at(&grid, &zh, spec.probe);
            before_tau = false;
        }
        if !before_tau {
            record_v(s.z.values(), &mut row);
        }
        if sim.steps_taken() % spec.interface_stride == 0 || sim.is_finished() {
            sample_interface(s.t, s.z.values(), &mut v, &mut interface);
        }
    }
    Ok(Run {
        row,
        interface,
        heat: heat_diag,
    })
}

/// Runs every rate of the ladder (in parallel under [`Execution::Parallel`])
/// and assembles the report in ladder order. A failed run is recorded and
/// the rest of the sweep continues.
pub fn sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let results = par::map(spec.exec, &spec.k_values, |&k| {
        let r = run_one(spec, k);
        match &r {
            Ok(run) => info!("k = {k:e}: u error {:.3e}", run.row.u_error),
            Err(e) => warn!("k = {k:e} failed: {e}"),
        }
        r
    });
    let mut report = SweepReport::default();
    for (k, r) in spec.k_values.iter().zip(results) {
        match r {
            Ok(run) => {
                if report.heat.is_none() {
                    report.heat = Some(run.heat);
                }
                report.rows.push(run.row);
                report.interfaces.push(run.interface);
            }
            Err(e) => report.failures.push((*k, e.to_string())),
        }
    }
    report.decay = report
        .rows
        .windows(2)
        .map(|w| DecaySlope {
            k_lo: w[0].k,
            k_hi: w[1].k,
            slope: (w[1].log_v_probe - w[0].log_v_probe) / (w[1].k - w[0].k),
        })
        .collect();
    Ok(report)
}
