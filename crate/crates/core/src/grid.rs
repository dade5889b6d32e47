//! Uniform node-centred meshes, grid-aligned fields, boundary descriptors
//! and the discrete Laplacian shared by every solver in the crate.
//!
//! Radial grids discretize `u'' + ((n - 1) / r) u'` for radially symmetric
//! functions in dimension `n`. A radial grid that starts at `r = 0` is a disk
//! (or ball); the origin row uses the regularized stencil `2n (u1 - u0) / h²`.

use crate::error::{Error, Result};
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Cartesian,
    /// Radially symmetric functions in `dim` space dimensions.
    Radial { dim: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    geometry: Geometry,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, geometry: Geometry) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "need x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        if let Geometry::Radial { dim } = geometry {
            if dim == 0 {
                return Err(Error::InvalidGeometry("radial dimension must be >= 1".into()));
            }
            if x_min < 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "radial grid must start at r >= 0, got {x_min}"
                )));
            }
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            geometry,
        })
    }

    pub fn cartesian(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        Self::new(x_min, x_max, n_cells, Geometry::Cartesian)
    }

    pub fn radial(r_min: f64, r_max: f64, n_cells: usize, dim: u32) -> Result<Self> {
        Self::new(r_min, r_max, n_cells, Geometry::Radial { dim })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    /// Position of node `i`. The last node is exactly `x_max`.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    /// True for a radial grid whose first node is the origin.
    pub fn has_origin(&self) -> bool {
        matches!(self.geometry, Geometry::Radial { .. }) && self.x_min == 0.0
    }

    /// Trapezoid weights for `∫ f dx`, or `∫ f r^(n-1) dr` on radial grids.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let last = self.n_cells;
        (0..self.n_nodes())
            .map(|i| {
                let base = if i == 0 || i == last { 0.5 * h } else { h };
                match self.geometry {
                    Geometry::Cartesian => base,
                    Geometry::Radial { dim } => base * self.node(i).powi(dim as i32 - 1),
                }
            })
            .collect()
    }

    /// Index of the node closest to `x`, provided `x` lies within `tol * h`
    /// of it.
    pub fn node_index(&self, x: f64, tol: f64) -> Option<usize> {
        let h = self.spacing();
        let s = (x - self.x_min) / h;
        let i = s.round();
        if i < 0.0 || i > self.n_cells as f64 || (s - i).abs() > tol {
            return None;
        }
        Some(i as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Builds a field that will enter a solver as `u`, `v` or `v0`: every
    /// value must be finite and nonnegative.
    pub fn nonnegative(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Domain(format!(
                "field value at node {i} is {v}, expected finite and >= 0"
            )));
        }
        Self::new(grid, values)
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.positions().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n_nodes()],
        }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// `max_i |a_i - b_i|` over fields living on the same grid.
pub fn sup_norm_diff(a: &Field, b: &Field) -> Result<f64> {
    a.check_same_grid(b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// How `restrict` treats interval endpoints that fall between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Snap {
    /// Widen the interval to the enclosing nodes.
    #[default]
    Outward,
    /// Fail unless both endpoints are nodes.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub field: Field,
    /// Index of the first retained node in the parent grid.
    pub offset: usize,
    /// The node-aligned interval actually used.
    pub interval: [f64; 2],
}

const NODE_TOL: f64 = 1e-9;

/// Restricts `field` to the nodes inside `[a, b]`.
pub fn restrict(field: &Field, a: f64, b: f64, snap: Snap) -> Result<Restriction> {
    let grid = field.grid;
    if a > b || b < grid.x_min || a > grid.x_max {
        return Err(Error::Domain(format!(
            "[{a}, {b}] does not intersect [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    if a < grid.x_min - NODE_TOL * grid.spacing() || b > grid.x_max + NODE_TOL * grid.spacing() {
        return Err(Error::Domain(format!(
            "[{a}, {b}] is not contained in [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    let h = grid.spacing();
    let (lo, hi) = match snap {
        Snap::Exact => {
            let lo = grid.node_index(a, NODE_TOL).ok_or_else(|| {
                Error::Domain(format!("{a} is not a grid node (h = {h})"))
            })?;
            let hi = grid.node_index(b, NODE_TOL).ok_or_else(|| {
                Error::Domain(format!("{b} is not a grid node (h = {h})"))
            })?;
            (lo, hi)
        }
        Snap::Outward => {
            let lo = grid
                .node_index(a, NODE_TOL)
                .unwrap_or_else(|| ((a - grid.x_min) / h).floor().max(0.0) as usize);
            let hi = grid.node_index(b, NODE_TOL).unwrap_or_else(|| {
                (((b - grid.x_min) / h).ceil() as usize).min(grid.n_cells)
            });
            (lo, hi)
        }
    };
    let sub = Grid1D::new(grid.node(lo), grid.node(hi), hi - lo, grid.geometry)?;
    let field = Field::new(sub, field.values[lo..=hi].to_vec())?;
    Ok(Restriction {
        field,
        offset: lo,
        interval: [sub.x_min, sub.x_max],
    })
}

/// Boundary data sampled in time, linearly interpolated and held constant
/// outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Domain(format!(
                "time series needs matching nonempty columns, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("time series times must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("time series values must be finite and >= 0".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn covers(&self, t0: f64, t1: f64) -> bool {
        let eps = 1e-12 * t1.abs().max(1.0);
        self.times[0] <= t0 + eps && *self.times.last().unwrap() >= t1 - eps
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let j = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * self.values[j - 1] + w * self.values[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    DirichletConst(f64),
    DirichletSeries(TimeSeries),
    NeumannZero,
}

impl BoundaryCondition {
    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, BoundaryCondition::NeumannZero)
    }

    /// Prescribed value at time `t`, `None` for a Neumann side.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        match self {
            BoundaryCondition::DirichletConst(c) => Some(*c),
            BoundaryCondition::DirichletSeries(s) => Some(s.eval(t)),
            BoundaryCondition::NeumannZero => None,
        }
    }

    fn validate(&self, t_final: f64) -> Result<()> {
        match self {
            BoundaryCondition::DirichletConst(c) if !c.is_finite() || *c < 0.0 => Err(
                Error::Domain(format!("Dirichlet value must be finite and >= 0, got {c}")),
            ),
            BoundaryCondition::DirichletSeries(s) if !s.covers(0.0, t_final) => {
                Err(Error::Domain(format!(
                    "Dirichlet series does not cover [0, {t_final}]"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl BoundarySpec {
    pub fn new(left: BoundaryCondition, right: BoundaryCondition) -> Self {
        Self { left, right }
    }

    pub fn dirichlet(left: f64, right: f64) -> Self {
        Self::new(
            BoundaryCondition::DirichletConst(left),
            BoundaryCondition::DirichletConst(right),
        )
    }

    pub fn neumann() -> Self {
        Self::new(BoundaryCondition::NeumannZero, BoundaryCondition::NeumannZero)
    }

    pub fn validate(&self, t_final: f64) -> Result<()> {
        self.left.validate(t_final)?;
        self.right.validate(t_final)
    }
}

/// Assembles the three-point discrete Laplacian.
///
/// Dirichlet rows are returned as zero rows: the value on that node is pinned
/// by the time stepper, not evolved. Neumann rows use ghost-node reflection.
pub fn laplacian_matrix(grid: &Grid1D, bc: &BoundarySpec) -> Result<Tridiagonal> {
    if grid.has_origin() && bc.left.is_dirichlet() {
        return Err(Error::InvalidGeometry(
            "radial grid starting at r = 0 has no left boundary; use NeumannZero (symmetry)".into(),
        ));
    }
    let n = grid.n_nodes();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let mut lap = Tridiagonal::zeros(n);

    // (1 - c_i, -2, 1 + c_i) / h² with c_i = (n - 1) h / (2 r_i); c_i = 0 for Cartesian.
    let drift = |i: usize| -> f64 {
        match grid.geometry {
            Geometry::Cartesian => 0.0,
            Geometry::Radial { dim } => (dim as f64 - 1.0) * h / (2.0 * grid.node(i)),
        }
    };

    for i in 1..n - 1 {
        let c = drift(i);
        lap.lower[i] = (1.0 - c) * inv_h2;
        lap.diag[i] = -2.0 * inv_h2;
        lap.upper[i] = (1.0 + c) * inv_h2;
    }

    if !bc.left.is_dirichlet() {
        if grid.has_origin() {
            let Geometry::Radial { dim } = grid.geometry else {
                unreachable!()
            };
            let two_n = 2.0 * dim as f64;
            lap.diag[0] = -two_n * inv_h2;
            lap.upper[0] = two_n * inv_h2;
        } else {
            // Ghost u_{-1} = u_1 folds both off-diagonal weights onto u_1.
            let c = drift(0);
            lap.diag[0] = -2.0 * inv_h2;
            lap.upper[0] = ((1.0 - c) + (1.0 + c)) * inv_h2;
        }
    }
    if !bc.right.is_dirichlet() {
        let c = drift(n - 1);
        lap.lower[n - 1] = ((1.0 - c) + (1.0 + c)) * inv_h2;
        lap.diag[n - 1] = -2.0 * inv_h2;
    }
    Ok(lap)
}
