//! Problem construction from configuration.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::barrier::{AnnulusBarrierSpec, BarrierRunConfig};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, BoundarySpec, Field, Geometry, Grid1D};
use crate::lab::config::Config;
use crate::lab::stefan::StefanSpec;
use crate::lab::sweep::SweepSpec;
use crate::par::Execution;
use crate::solver::ProblemSpec;

/// Initial profile on a grid, written in configs as a keyword followed by
/// numbers, e.g. `bump 0 0.5 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile {
    Zero,
    /// `const c`
    Const(f64),
    /// `box a b c`: `c` on `[a, b]`, zero elsewhere.
    Box { a: f64, b: f64, level: f64 },
    /// `bump a b c`: `c sin²(π (x - a) / (b - a))` on `(a, b)`, zero elsewhere.
    Bump { a: f64, b: f64, level: f64 },
    /// `sine a b c`: `c sin(π (x - a) / (b - a))` on `(a, b)`, zero elsewhere.
    Sine { a: f64, b: f64, level: f64 },
}

impl InitialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Const(c) => c,
            Self::Box { a, b, level } => {
                if (a..=b).contains(&x) {
                    level
                } else {
                    0.0
                }
            }
            Self::Bump { a, b, level } => {
                if x > a && x < b {
                    level * (PI * (x - a) / (b - a)).sin().powi(2)
                } else {
                    0.0
                }
            }
            Self::Sine { a, b, level } => {
                if x > a && x < b {
                    level * (PI * (x - a) / (b - a)).sin()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, grid: Grid1D) -> Field {
        // Snap box edges to nodes lying within roundoff of them.
        let h = grid.spacing();
        Field::from_fn(grid, |x| match *self {
            Self::Box { a, b, level } if x >= a - 1e-9 * h && x <= b + 1e-9 * h => level,
            _ => self.eval(x),
        })
    }
}

impl FromStr for InitialProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let nums = parts
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Config(format!("profile `{s}`: bad number `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Config(format!("profile `{kind}` takes {n} numbers, got {}", nums.len())))
            }
        };
        let interval = || {
            if nums[0] < nums[1] {
                Ok(())
            } else {
                Err(Error::Config(format!("profile `{s}`: need a < b")))
            }
        };
        match kind {
            "zero" => arity(0).map(|_| Self::Zero),
            "const" => arity(1).map(|_| Self::Const(nums[0])),
            "box" | "bump" | "sine" => {
                arity(3)?;
                interval()?;
                let (a, b, level) = (nums[0], nums[1], nums[2]);
                Ok(match kind {
                    "box" => Self::Box { a, b, level },
                    "bump" => Self::Bump { a, b, level },
                    _ => Self::Sine { a, b, level },
                })
            }
            _ => Err(Error::Config(format!(
                "unknown profile `{kind}` (expected zero, const, box, bump or sine)"
            ))),
        }
    }
}

/// Zeroes `v0` within `gap` nodes of every node where `u0 > 0`.
pub fn enforce_gap(u0: &Field, v0: &mut Field, gap: usize) {
    let n = u0.values().len();
    let support: Vec<usize> = (0..n).filter(|&i| u0.values()[i] > 0.0).collect();
    let v = v0.values_mut();
    for i in support {
        for j in i.saturating_sub(gap)..=(i + gap).min(n - 1) {
            v[j] = 0.0;
        }
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("key `{key}`: expected true or false, got `{s}`"))),
    }
}

fn pair(cfg: &Config, key: &str, default: [f64; 2]) -> Result<[f64; 2]> {
    match cfg.get_list(key)? {
        None => Ok(default),
        Some(v) if v.len() == 2 => Ok([v[0], v[1]]),
        Some(v) => Err(Error::Config(format!("key `{key}` takes 2 numbers, got {}", v.len()))),
    }
}

pub fn grid_from_config(cfg: &Config) -> Result<Grid1D> {
    let x_min = cfg.get_or("x_min", 0.0)?;
    let x_max = cfg.get_or("x_max", 1.0)?;
    let cells = cfg.get_or("cells", 512usize)?;
    let geometry = match cfg.raw("geometry").unwrap_or("cartesian") {
        "cartesian" => Geometry::Cartesian,
        "radial" => Geometry::Radial {
            dim: cfg.get_or("dim", 2u32)?,
        },
        other => return Err(Error::Config(format!("unknown geometry `{other}`"))),
    };
    Grid1D::new(x_min, x_max, cells, geometry)
}

pub fn boundary_from_config(cfg: &Config) -> Result<BoundarySpec> {
    let side = |kind: &str, value_key: &str| -> Result<BoundaryCondition> {
        match kind {
            "dirichlet" => Ok(BoundaryCondition::DirichletConst(cfg.get_or(value_key, 0.0)?)),
            "neumann" => Ok(BoundaryCondition::NeumannZero),
            other => Err(Error::Config(format!("unknown boundary condition `{other}`"))),
        }
    };
    let both = cfg.raw("bc").unwrap_or("dirichlet").to_string();
    let left = cfg.raw("bc_left_kind").unwrap_or(&both).to_string();
    let right = cfg.raw("bc_right_kind").unwrap_or(&both).to_string();
    Ok(BoundarySpec::new(side(&left, "bc_left")?, side(&right, "bc_right")?))
}

/// Reaction problem from `key = value` settings. Defaults reproduce the
/// segregated bump configuration on `(0, 1)`.
pub fn problem_from_config(cfg: &Config) -> Result<ProblemSpec> {
    let grid = grid_from_config(cfg)?;
    let bc = boundary_from_config(cfg)?;
    let u0: InitialProfile = cfg.raw("u0").unwrap_or("bump 0 0.5 100").parse()?;
    let v0: InitialProfile = cfg.raw("v0").unwrap_or("box 0.5 1 1").parse()?;
    let gap = cfg.get_or("gap_cells", 1usize)?;
    let u0 = u0.sample(grid);
    let mut v0 = v0.sample(grid);
    enforce_gap(&u0, &mut v0, gap);
    let h = grid.spacing();
    let dt = match (cfg.get::<f64>("dt")?, cfg.get::<f64>("cfl")?) {
        (Some(_), Some(_)) => return Err(Error::Config("give either `dt` or `cfl`, not both".into())),
        (Some(dt), None) => dt,
        (None, cfl) => cfl.unwrap_or(1.0) * h * h,
    };
    let segregated = match cfg.raw("segregated") {
        Some(s) => parse_bool("segregated", s)?,
        None => true,
    };
    let spec = ProblemSpec {
        m: cfg.get_or("m", 1.5)?,
        k: cfg.get_or("k", 1e3)?,
        grid,
        bc,
        u0,
        v0,
        t_final: cfg.get_or("t_final", 0.25)?,
        dt,
        theta: cfg.get_or("theta", 1.0)?,
        segregated,
    };
    spec.validate()?;
    Ok(spec)
}

/// Output sampling stride: `stride` if given, else about `samples` rows.
pub fn stride_from_config(cfg: &Config, n_steps: usize) -> Result<usize> {
    match cfg.get::<usize>("stride")? {
        Some(0) => Err(Error::Config("`stride` must be >= 1".into())),
        Some(s) => Ok(s),
        None => {
            let samples = cfg.get_or("samples", 100usize)?.max(1);
            Ok(n_steps.div_ceil(samples).max(1))
        }
    }
}

pub const DEFAULT_K_LADDER: [f64; 5] = [1e1, 1e2, 1e3, 1e4, 1e5];

pub fn sweep_from_config(cfg: &Config, exec: Execution) -> Result<SweepSpec> {
    let base = problem_from_config(cfg)?;
    let (a, b) = (base.grid.x_min(), base.grid.x_max());
    let len = b - a;
    let compact = pair(cfg, "omega0", [a + 0.1 * len, b - 0.1 * len])?;
    let spec = SweepSpec {
        k_values: cfg.get_list("k_values")?.unwrap_or_else(|| DEFAULT_K_LADDER.to_vec()),
        compact,
        tau: cfg.get_or("tau", 0.1 * base.t_final)?,
        probe: cfg.get_or("probe", a + 0.7 * len)?,
        interface_level: cfg.get_or("interface_level", 0.5)?,
        interface_stride: cfg.get_or("interface_stride", 256usize)?,
        exec,
        base,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn stefan_from_config(cfg: &Config, exec: Execution) -> Result<StefanSpec> {
    let spec = StefanSpec {
        u_level: cfg.get_or("u_level", 1.0)?,
        v_level: cfg.get_or("v_level", 1.0)?,
        length: cfg.get_or("length", 1.0)?,
        cells: cfg.get_or("cells", 512usize)?,
        cfl: cfg.get_or("cfl", 1.0)?,
        t_final: cfg.get("t_final")?,
        k_values: cfg
            .get_list("k_values")?
            .unwrap_or_else(|| vec![1e2, 1e3, 1e4, 1e5]),
        metric_stride: cfg.get_or("metric_stride", 64usize)?,
        interface_level: cfg.get_or("interface_level", 0.5)?,
        exec,
    };
    spec.validate()?;
    Ok(spec)
}

/// Barrier spec, run resolution and the reaction-margin constants `λ1, λ2`.
pub fn barrier_from_config(cfg: &Config) -> Result<(AnnulusBarrierSpec, BarrierRunConfig, [f64; 2])> {
    let spec = AnnulusBarrierSpec {
        d1: cfg.get_or("d1", 1.0)?,
        d3: cfg.get_or("d3", 1.5)?,
        d2: cfg.get_or("d2", 2.0)?,
        dim: cfg.get_or("dim", 2u32)?,
        u0: cfg.get_or("u_level", 1.0)?,
        v0: cfg.get_or("v_level", 1.0)?,
        t0: cfg.get_or("t0", 0.5)?,
        t_end: cfg.get_or("t_end", 0.8)?,
        m: cfg.get_or("m", 1.5)?,
        k: cfg.get_or("k", 1e4)?,
    };
    spec.validate()?;
    let run = BarrierRunConfig {
        n_cells: cfg.get_or("cells", 128usize)?,
        cfl: cfg.get_or("cfl", 1.0)?,
        sample_stride: cfg.get_or("stride", 4usize)?,
    };
    if run.sample_stride == 0 || run.n_cells < 2 || !(run.cfl > 0.0) {
        return Err(Error::Config("need cells >= 2, stride >= 1 and cfl > 0".into()));
    }
    let lambda = pair(cfg, "lambda", [0.1, 0.1])?;
    Ok((spec, run, lambda))
}
