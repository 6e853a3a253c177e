//! Uniform-grid density fields.
//!
//! Values outside the grid are defined by the boundary regime of each side:
//! zero (Dirichlet), a spatially constant driver value supplied by the
//! integrator, or the periodic continuation. Every windowed operation pads
//! the node values with these ghost values, so convolutions near an edge see
//! the same extension as the rest of the solver.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 8;

/// Uniform grid `x_i = x_min + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    dx: f64,
    n: usize,
}

impl Grid {
    pub fn from_nodes(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !x_min.is_finite() {
            return Err(Error::InvalidGrid("x_min must be finite".into()));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        Ok(Self { x_min, dx, n })
    }

    /// Grid with both endpoints as nodes. `x_max − x_min` must be a multiple
    /// of `dx` (up to rounding).
    pub fn closed(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        Self::from_nodes(x_min, dx, intervals(x_min, x_max, dx)? + 1)
    }

    /// Grid covering one period `[x_min, x_min + length)`; the node at
    /// `x_min + length` is identified with `x_min`.
    pub fn periodic(x_min: f64, length: f64, dx: f64) -> Result<Self> {
        Self::from_nodes(x_min, dx, intervals(x_min, x_min + length, dx)?)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> {
        let g = *self;
        (0..g.n).map(move |i| g.x(i))
    }

    /// `x_max − x_min`.
    pub fn length(&self) -> f64 {
        (self.n - 1) as f64 * self.dx
    }

    /// Circumference when the grid is used periodically.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// Same lattice (equal spacing, node offsets differing by whole steps).
    pub fn same_lattice(&self, other: &Grid) -> bool {
        if (self.dx - other.dx).abs() > 1e-12 * self.dx {
            return false;
        }
        let shift = (self.x_min - other.x_min) / self.dx;
        (shift - shift.round()).abs() < 1e-6
    }
}

fn intervals(x_min: f64, x_max: f64, dx: f64) -> Result<usize> {
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
    }
    if x_max.partial_cmp(&x_min) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidGrid(format!(
            "x_max ({x_max}) must exceed x_min ({x_min})"
        )));
    }
    let steps = (x_max - x_min) / dx;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-6 * rounded.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "domain length {} is not a multiple of dx = {dx}",
            x_max - x_min
        )));
    }
    Ok(rounded as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    DirichletZero,
    HomogeneousDriver,
    Periodic,
}

/// Boundary kinds of both sides; periodic on one side means periodic on both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryRegime {
    left: BoundaryKind,
    right: BoundaryKind,
}

impl BoundaryRegime {
    pub fn new(left: BoundaryKind, right: BoundaryKind) -> Result<Self> {
        let lp = left == BoundaryKind::Periodic;
        let rp = right == BoundaryKind::Periodic;
        if lp != rp {
            return Err(Error::InvalidBoundary(
                "periodic must apply to both sides or neither".into(),
            ));
        }
        Ok(Self { left, right })
    }

    pub fn periodic() -> Self {
        Self {
            left: BoundaryKind::Periodic,
            right: BoundaryKind::Periodic,
        }
    }

    pub fn dirichlet() -> Self {
        Self {
            left: BoundaryKind::DirichletZero,
            right: BoundaryKind::DirichletZero,
        }
    }

    pub fn left(&self) -> BoundaryKind {
        self.left
    }

    pub fn right(&self) -> BoundaryKind {
        self.right
    }

    pub fn side(&self, side: Side) -> BoundaryKind {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }
}

/// Density samples on a grid together with their boundary extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
    boundary: BoundaryRegime,
    /// Driver values for the left and right side.
    boundary_values: [f64; 2],
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>, boundary: BoundaryRegime) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "density values must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self {
            grid,
            values,
            boundary,
            boundary_values: [0.0; 2],
        })
    }

    /// Constructor for solver-internal stage fields that skips validation.
    pub(crate) fn from_parts(
        grid: Grid,
        values: Vec<f64>,
        boundary: BoundaryRegime,
        boundary_values: [f64; 2],
    ) -> Self {
        Self {
            grid,
            values,
            boundary,
            boundary_values,
        }
    }

    pub fn zeros(grid: Grid, boundary: BoundaryRegime) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()], boundary, [0.0; 2])
    }

    pub fn with_boundary_values(mut self, left: f64, right: f64) -> Self {
        self.boundary_values = [left, right];
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary(&self) -> BoundaryRegime {
        self.boundary
    }

    pub fn boundary_value(&self, side: Side) -> f64 {
        self.boundary_values[side.index()]
    }

    pub fn boundary_values(&self) -> [f64; 2] {
        self.boundary_values
    }

    pub fn set_boundary_value(&mut self, side: Side, value: f64) {
        self.boundary_values[side.index()] = value;
    }

    /// Value the field takes beyond the given side under its regime.
    /// Periodic sides have no single ghost value; callers wrap instead.
    fn side_ghost(&self, side: Side) -> f64 {
        match self.boundary.side(side) {
            BoundaryKind::DirichletZero | BoundaryKind::Periodic => 0.0,
            BoundaryKind::HomogeneousDriver => self.boundary_values[side.index()],
        }
    }

    /// Ghost extension for a point outside `[x_min, x_max]`.
    pub fn ghost_value(&self, x: f64) -> f64 {
        if self.boundary.is_periodic() {
            return self.periodic_interpolate(x);
        }
        if x < self.grid.x_min() {
            self.side_ghost(Side::Left)
        } else {
            self.side_ghost(Side::Right)
        }
    }

    fn periodic_interpolate(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let t = (x - self.grid.x_min()).rem_euclid(self.grid.period()) / self.grid.dx();
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        let a = self.values[i];
        let b = self.values[(i + 1) % n];
        if frac == 0.0 {
            a
        } else {
            (a + frac * (b - a)).max(0.0)
        }
    }

    /// Piecewise-linear interpolation inside the domain, ghost value
    /// outside. Never negative.
    pub fn interpolate(&self, x: f64) -> f64 {
        if self.boundary.is_periodic() {
            return self.periodic_interpolate(x);
        }
        let g = &self.grid;
        if x < g.x_min() || x > g.x_max() {
            return self.ghost_value(x);
        }
        let t = (x - g.x_min()) / g.dx();
        let i = (t.floor() as usize).min(g.len() - 2);
        let frac = t - i as f64;
        let a = self.values[i];
        let b = self.values[i + 1];
        if frac == 0.0 {
            a
        } else {
            (a + frac * (b - a)).max(0.0)
        }
    }

    /// Trapezoid rule of `weight(x)·ρ(x)` over the nodes. On a periodic grid
    /// the trapezoid over one period has equal weights.
    pub fn quad_integral(&self, weight: Option<&dyn Fn(f64) -> f64>) -> f64 {
        let g = &self.grid;
        let mut sum = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = weight.map_or(1.0, |f| f(g.x(i)));
            sum += w * v;
        }
        if !self.boundary.is_periodic() {
            let n = g.len();
            let end_w = |i: usize| weight.map_or(1.0, |f| f(g.x(i)));
            sum -= 0.5 * (end_w(0) * self.values[0] + end_w(n - 1) * self.values[n - 1]);
        }
        sum * g.dx()
    }

    /// Node values padded by `pad` ghost nodes on each side.
    pub fn padded(&self, pad: usize) -> Vec<f64> {
        padded_values(&self.values, self.boundary, self.boundary_values, pad)
    }

    /// `(k ∗ ρ)(x_i)` at every node by direct windowed summation.
    pub fn convolve(&self, k: &Kernel) -> Vec<f64> {
        let dx = self.grid.dx();
        let taps = k.taps(dx, dx);
        let ext = self.padded(taps.half_width());
        let mut out = vec![0.0; self.grid.len()];
        correlate_into(&ext, taps.weights(), &mut out);
        out
    }

    /// Doubles the domain length by extending one side. New nodes take the
    /// side's ghost value; existing nodes and spacing are untouched.
    pub fn enlarge(&self, side: Side) -> Result<DensityField> {
        if self.boundary.is_periodic() {
            return Err(Error::PeriodicEnlarge);
        }
        let g = self.grid;
        let added = g.len() - 1;
        let fill = self.side_ghost(side);
        let (x_min, values) = match side {
            Side::Right => {
                let mut v = self.values.clone();
                v.resize(g.len() + added, fill);
                (g.x_min(), v)
            }
            Side::Left => {
                let mut v = vec![fill; added];
                v.extend_from_slice(&self.values);
                // Keep the lattice exact: x_min moves by whole steps.
                (g.x_min() - added as f64 * g.dx(), v)
            }
        };
        let grid = Grid::from_nodes(x_min, g.dx(), values.len())?;
        Ok(DensityField::from_parts(
            grid,
            values,
            self.boundary,
            self.boundary_values,
        ))
    }

    /// Writes the `x,rho` snapshot CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::with_capacity(self.values.len() * 32);
        buf.push_str("x,rho\n");
        for (x, v) in self.grid.nodes().zip(&self.values) {
            let _ = writeln!(buf, "{x},{v}");
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads an `x,rho` snapshot CSV written by [`DensityField::write_csv`].
    pub fn read_csv<R: Read>(r: R, boundary: BoundaryRegime) -> Result<DensityField> {
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for (lineno, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                if line.trim() != "x,rho" {
                    return Err(Error::config("snapshot", "missing 'x,rho' header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::config("snapshot", format!("bad row {line:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("snapshot", format!("bad number {s:?}")))
            };
            xs.push(parse(x)?);
            vals.push(parse(v)?);
        }
        if xs.len() < 2 {
            return Err(Error::config("snapshot", "fewer than two rows"));
        }
        let dx = xs[1] - xs[0];
        let grid = Grid::from_nodes(xs[0], dx, xs.len())?;
        DensityField::new(grid, vals, boundary)
    }
}

pub(crate) fn padded_values(
    values: &[f64],
    boundary: BoundaryRegime,
    boundary_values: [f64; 2],
    pad: usize,
) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    if boundary.is_periodic() {
        let start = (n - pad % n) % n;
        out.extend((0..pad).map(|k| values[(start + k) % n]));
        out.extend_from_slice(values);
        out.extend((0..pad).map(|k| values[k % n]));
    } else {
        let ghost = |side: Side| match boundary.side(side) {
            BoundaryKind::HomogeneousDriver => boundary_values[side.index()],
            _ => 0.0,
        };
        out.resize(pad, ghost(Side::Left));
        out.extend_from_slice(values);
        out.resize(n + 2 * pad, ghost(Side::Right));
    }
    out
}

/// `out[i] = Σ_k weights[k] · input[i + k]`, for `out.len()` outputs.
///
/// Organized tap by tap so the inner loop is a contiguous axpy.
pub(crate) fn correlate_into(input: &[f64], weights: &[f64], out: &mut [f64]) {
    let m = out.len();
    debug_assert!(input.len() + 1 >= m + weights.len());
    out.fill(0.0);
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let src = &input[k..k + m];
        for (o, s) in out.iter_mut().zip(src) {
            *o += w * s;
        }
    }
}
