//! Right-hand side of the kinetic equation
//!
//! ```text
//! dρ/dt(x) = ½∬ c1(y,z;x) ρ(y)ρ(z) dy dz − ρ(x) ∫ a1(x−y) ρ(y) dy
//!          + jump gain(x) − jump loss(x)
//! ```
//!
//! with the coalescence intensity `c1(y,z;x) = a1(y−z)·δ(T(y,z) − x)` for
//! a merge map `T` that is either the midpoint `(y+z)/2` or the log-sum
//! `ln(e^y + e^z)`. Deltas are never smoothed: each gain term is evaluated
//! through its exact delta-reduced one-dimensional integral.
//!
//! Jumps move a particle from `y` to `x` at rate `c2(x−y)`, suppressed by
//! `E(x) = exp(−(φ ∗ ρ)(x))` evaluated at the landing point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{correlate_into, padded_values, BoundaryKind, DensityField};
use crate::kernels::{Kernel, Taps};

/// Where the repulsion factor is evaluated in the jump gain term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// `gain = E·(c2 ∗ ρ)`: repulsion acts at the landing point in both
    /// terms, which conserves the particle number exactly.
    #[default]
    Target,
    /// `gain = c2 ∗ (E·ρ)`: the gain term as literally printed, with the
    /// factor attached to the departure point.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalescenceForm {
    /// Merged particle at `(x + y)/2`.
    Midpoint,
    /// Merged particle at `ln(e^x + e^y)`; conserves `∫ e^x ρ dx`.
    LogMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coalescence {
    pub form: CoalescenceForm,
    pub kernel: Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jumps {
    pub kernel: Kernel,
    #[serde(default)]
    pub repulsion: Option<Kernel>,
    #[serde(default)]
    pub placement: Placement,
}

/// One instance of the kinetic equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default)]
    pub coalescence: Option<Coalescence>,
    #[serde(default)]
    pub jump: Option<Jumps>,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coalescence.is_none() && self.jump.is_none() {
            return Err(Error::config(
                "model",
                "at least one of coalescence or jump must be present",
            ));
        }
        Ok(())
    }

    pub fn midpoint(a1: Kernel) -> Self {
        Self {
            coalescence: Some(Coalescence {
                form: CoalescenceForm::Midpoint,
                kernel: a1,
            }),
            jump: None,
        }
    }

    pub fn log_mass(a1: Kernel) -> Self {
        Self {
            coalescence: Some(Coalescence {
                form: CoalescenceForm::LogMass,
                kernel: a1,
            }),
            jump: None,
        }
    }

    pub fn free_jumps(c2: Kernel) -> Self {
        Self {
            coalescence: None,
            jump: Some(Jumps {
                kernel: c2,
                repulsion: None,
                placement: Placement::Target,
            }),
        }
    }

    pub fn with_jumps(mut self, c2: Kernel, repulsion: Option<Kernel>) -> Self {
        self.jump = Some(Jumps {
            kernel: c2,
            repulsion,
            placement: self.jump.map(|j| j.placement).unwrap_or_default(),
        });
        self
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        if let Some(j) = self.jump.as_mut() {
            j.placement = placement;
        }
        self
    }

    /// All kernels the model uses.
    pub fn kernels(&self) -> impl Iterator<Item = Kernel> {
        let c = self.coalescence.map(|c| c.kernel);
        let j = self.jump.map(|j| j.kernel);
        let r = self.jump.and_then(|j| j.repulsion);
        c.into_iter().chain(j).chain(r)
    }

    pub fn max_support_radius(&self) -> f64 {
        self.kernels()
            .map(|k| k.convolution_radius())
            .fold(0.0, f64::max)
    }

    /// `dr/dt` for a spatially constant density `r`. Jumps cancel on
    /// constants; both merge maps give `−(⟨a1⟩/2)·r²`.
    pub fn homogeneous_rate(&self, r: f64) -> f64 {
        match self.coalescence {
            Some(c) => -0.5 * c.kernel.total_integral() * r * r,
            None => 0.0,
        }
    }
}

/// `ρ(x)·(a1 ∗ ρ)(x)`; the same for both merge maps since the delta
/// integrates to one.
pub fn coalescence_loss(f: &DensityField, a1: &Kernel) -> Vec<f64> {
    let dx = f.grid().dx();
    let mut out = vec![0.0; f.grid().len()];
    loss_into(f, &a1.taps(dx, dx), &mut out);
    out
}

/// Midpoint gain `∫ a1(2u) ρ(x+u) ρ(x−u) du`.
pub fn coalescence_gain_midpoint(f: &DensityField, a1: &Kernel) -> Vec<f64> {
    let dx = f.grid().dx();
    let mut out = vec![0.0; f.grid().len()];
    midpoint_gain_into(f, &a1.taps(dx, 0.5 * dx), &mut out);
    out
}

/// Log-sum gain
/// `½∫ a1(y* − z) ρ(y*) ρ(z) e^x/(e^x − e^z) dz` with `y* = ln(e^x − e^z)`,
/// restricted to `y* > x_min`.
pub fn coalescence_gain_logmass(f: &DensityField, a1: &Kernel) -> Vec<f64> {
    let mut out = vec![0.0; f.grid().len()];
    LogMassStencil::new(a1, f.grid().dx()).apply(f, &mut out);
    out
}

/// Jump gain minus jump loss at every node.
pub fn jump_rhs(
    f: &DensityField,
    c2: &Kernel,
    repulsion: Option<&Kernel>,
    placement: Placement,
) -> Vec<f64> {
    let dx = f.grid().dx();
    let c2 = c2.taps(dx, dx);
    let phi = repulsion.map(|k| k.taps(dx, dx));
    let mut out = vec![0.0; f.grid().len()];
    jump_into(f, &c2, phi.as_ref(), placement, &mut out, false);
    out
}

/// Full right-hand side for one field snapshot.
pub fn rhs(f: &DensityField, m: &ModelConfig) -> Vec<f64> {
    KineticOperator::new(*m, f.grid().dx()).rhs(f)
}

/// Repulsion factor `exp(−(φ ∗ ρ))` at every node.
pub fn repulsion_factor(f: &DensityField, phi: &Kernel) -> Vec<f64> {
    f.convolve(phi).into_iter().map(|v| (-v).exp()).collect()
}

fn loss_into(f: &DensityField, taps: &Taps, out: &mut [f64]) {
    let ext = f.padded(taps.half_width());
    correlate_into(&ext, taps.weights(), out);
    for (o, v) in out.iter_mut().zip(f.values()) {
        *o *= v;
    }
}

/// `taps` are `a1(m·dx)·dx/2`, i.e. offsets `u = m·dx/2`. Odd `m` puts
/// `x ± u` halfway between nodes, where the linear interpolant is the
/// average of the two neighbours.
fn midpoint_gain_into(f: &DensityField, taps: &Taps, out: &mut [f64]) {
    let half = taps.half_width();
    let w = taps.weights();
    let pad = half / 2 + 1;
    let ext = f.padded(pad);
    let n = out.len();
    let at = |k: isize| -> &[f64] {
        let s = (pad as isize + k) as usize;
        &ext[s..s + n]
    };
    for (o, v) in out.iter_mut().zip(at(0)) {
        *o = w[half] * v * v;
    }
    // Offsets ±u contribute equally.
    for m in 1..=half {
        let wm = 2.0 * w[half + m];
        if wm == 0.0 {
            continue;
        }
        let j = (m / 2) as isize;
        if m % 2 == 0 {
            for ((o, a), b) in out.iter_mut().zip(at(j)).zip(at(-j)) {
                *o += wm * a * b;
            }
        } else {
            let quarter = 0.25 * wm;
            let it = out
                .iter_mut()
                .zip(at(j).iter().zip(at(j + 1)))
                .zip(at(-j).iter().zip(at(-j - 1)));
            for ((o, (a0, a1)), (b0, b1)) in it {
                *o += quarter * (a0 + a1) * (b0 + b1);
            }
        }
    }
}

/// Precomputed weights of the log-sum gain.
///
/// Each unordered pair is counted once by letting `z` be the smaller
/// partner, `w = x − z ≥ ln 2`, and doubling. For a node offset `d` the
/// larger partner `y* = x + ln(1 − e^{−d·dx})` sits at a fixed offset from
/// `x`, so its cubic interpolation stencil does not depend on the node.
/// The partial cell between `w = ln 2` (where `y* = z`) and the first node
/// offset is integrated by the trapezoid rule through `ρ(x − ln 2)`.
#[derive(Debug, Clone)]
struct LogMassStencil {
    rows: Vec<LogMassRow>,
    end: Interp,
    end_weight: f64,
    pad: usize,
}

#[derive(Debug, Clone, Copy)]
struct LogMassRow {
    /// Offset from `x` to the `z` node.
    d: usize,
    y: Interp,
}

/// Four-point Lagrange interpolation at `x − t·dx`, pre-multiplied by a
/// weight. `w[k]` multiplies the node `back + 1 − k` below `x`.
#[derive(Debug, Clone, Copy)]
struct Interp {
    back: usize,
    w: [f64; 4],
}

impl Interp {
    fn new(t: f64, weight: f64) -> Self {
        let back = t.ceil() as usize;
        let s = back as f64 - t;
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ]
        .map(|l| l * weight);
        Self { back, w }
    }
}

/// Nodes `x − (back + 1)·dx … x − (back − 2)·dx` around every output node.
fn stencil<'a>(ext: &'a [f64], base: usize, ip: &Interp, n: usize) -> [&'a [f64]; 4] {
    let lo = base - ip.back - 1;
    [0, 1, 2, 3].map(|k| &ext[lo + k..lo + k + n])
}

impl LogMassStencil {
    fn new(a1: &Kernel, dx: f64) -> Self {
        let r = a1.convolution_radius();
        let ln2 = std::f64::consts::LN_2;
        // a1(y* − z) vanishes unless y* − z = ln(e^w − 1) ≤ R.
        let w_max = r.exp().ln_1p();
        let d_first = (ln2 / dx).floor() as usize + 1;
        let d_max = (w_max / dx).ceil() as usize + 1;
        let partial = d_first as f64 * dx - ln2;
        let end = Interp::new(ln2 / dx, 1.0);
        let mut rows = Vec::with_capacity(d_max.saturating_sub(d_first) + 1);
        let mut pad = end.back + 1;
        for d in d_first..=d_max.max(d_first) {
            let w = d as f64 * dx;
            let one_minus = -(-w).exp_m1();
            let offset = one_minus.ln();
            let a = a1.eval_on_grid(offset + w);
            if a == 0.0 {
                continue;
            }
            let quad = if d == d_first { 0.5 * (dx + partial) } else { dx };
            let y = Interp::new(-offset / dx, a * quad / one_minus);
            rows.push(LogMassRow { d, y });
            pad = pad.max(y.back + 1).max(d);
        }
        // At w = ln 2 both partners sit at x − ln 2 and e^x/(e^x − e^z) = 2.
        let end_weight = 0.5 * partial * 2.0 * a1.eval_on_grid(0.0);
        Self {
            rows,
            end,
            end_weight,
            pad,
        }
    }

    fn apply(&self, f: &DensityField, out: &mut [f64]) {
        let n = out.len();
        // Particles left of the domain are absent under every regime; the
        // right side takes the usual ghost values.
        let right = padded_values(f.values(), f.boundary(), f.boundary_values(), 2);
        let mut ext = vec![0.0; self.pad];
        ext.extend_from_slice(&right[2..]);
        let base = self.pad;
        let interp = |ip: &Interp, i: usize, s: &[&[f64]; 4]| {
            (ip.w[0] * s[0][i] + ip.w[1] * s[1][i] + ip.w[2] * s[2][i] + ip.w[3] * s[3][i]).max(0.0)
        };
        let s = stencil(&ext, base, &self.end, n);
        for (i, o) in out.iter_mut().enumerate() {
            let v = interp(&self.end, i, &s);
            *o = self.end_weight * v * v;
        }
        for row in &self.rows {
            let z = &ext[base - row.d..base - row.d + n];
            let s = stencil(&ext, base, &row.y, n);
            for (i, (o, zv)) in out.iter_mut().zip(z).enumerate() {
                if *zv != 0.0 {
                    *o += interp(&row.y, i, &s) * zv;
                }
            }
        }
    }
}

/// Per-term breakdown of the right-hand side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RhsTerms {
    pub coalescence_gain: Vec<f64>,
    pub coalescence_loss: Vec<f64>,
    pub jump: Vec<f64>,
}

/// Right-hand side evaluator with kernel weights cached for one spacing.
#[derive(Debug, Clone)]
pub struct KineticOperator {
    model: ModelConfig,
    dx: f64,
    loss: Option<Taps>,
    midpoint: Option<Taps>,
    logmass: Option<LogMassStencil>,
    c2: Option<Taps>,
    phi: Option<Taps>,
}

impl KineticOperator {
    pub fn new(model: ModelConfig, dx: f64) -> Self {
        let mut op = Self {
            model,
            dx,
            loss: None,
            midpoint: None,
            logmass: None,
            c2: None,
            phi: None,
        };
        if let Some(c) = model.coalescence {
            op.loss = Some(c.kernel.taps(dx, dx));
            match c.form {
                CoalescenceForm::Midpoint => op.midpoint = Some(c.kernel.taps(dx, 0.5 * dx)),
                CoalescenceForm::LogMass => op.logmass = Some(LogMassStencil::new(&c.kernel, dx)),
            }
        }
        if let Some(j) = model.jump {
            op.c2 = Some(j.kernel.taps(dx, dx));
            op.phi = j.repulsion.map(|k| k.taps(dx, dx));
        }
        op
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Checks a field against the operator's spacing and boundary needs.
    pub fn check_field(&self, f: &DensityField) -> Result<()> {
        if (f.grid().dx() - self.dx).abs() > 1e-12 * self.dx {
            return Err(Error::GridMismatch);
        }
        if self.logmass.is_some() && f.boundary().left() == BoundaryKind::HomogeneousDriver {
            return Err(Error::config(
                "domain.boundary_left",
                "log-mass coalescence needs a dirichlet_zero or periodic left boundary",
            ));
        }
        Ok(())
    }

    pub fn rhs(&self, f: &DensityField) -> Vec<f64> {
        let mut out = vec![0.0; f.grid().len()];
        self.rhs_into(f, &mut out);
        out
    }

    pub fn rhs_into(&self, f: &DensityField, out: &mut [f64]) {
        let n = f.grid().len();
        debug_assert_eq!(out.len(), n);
        out.fill(0.0);
        let mut scratch = vec![0.0; n];
        if let Some(loss) = &self.loss {
            if let Some(mid) = &self.midpoint {
                midpoint_gain_into(f, mid, &mut scratch);
            } else if let Some(lm) = &self.logmass {
                lm.apply(f, &mut scratch);
            }
            out.copy_from_slice(&scratch);
            loss_into(f, loss, &mut scratch);
            for (o, l) in out.iter_mut().zip(&scratch) {
                *o -= l;
            }
        }
        if let (Some(c2), Some(j)) = (&self.c2, self.model.jump) {
            jump_into(f, c2, self.phi.as_ref(), j.placement, out, true);
        }
    }

    pub fn terms(&self, f: &DensityField) -> RhsTerms {
        let n = f.grid().len();
        let mut t = RhsTerms {
            coalescence_gain: vec![0.0; n],
            coalescence_loss: vec![0.0; n],
            jump: vec![0.0; n],
        };
        if let Some(loss) = &self.loss {
            if let Some(mid) = &self.midpoint {
                midpoint_gain_into(f, mid, &mut t.coalescence_gain);
            } else if let Some(lm) = &self.logmass {
                lm.apply(f, &mut t.coalescence_gain);
            }
            loss_into(f, loss, &mut t.coalescence_loss);
        }
        if let (Some(c2), Some(j)) = (&self.c2, self.model.jump) {
            jump_into(f, c2, self.phi.as_ref(), j.placement, &mut t.jump, false);
        }
        t
    }
}

/// Writes (or adds, when `accumulate`) the jump gain minus loss.
fn jump_into(
    f: &DensityField,
    c2: &Taps,
    phi: Option<&Taps>,
    placement: Placement,
    out: &mut [f64],
    accumulate: bool,
) {
    let n = f.grid().len();
    let hc = c2.half_width();
    let Some(phi) = phi else {
        // E ≡ 1: gain = c2 ∗ ρ, loss = ρ·Σ taps.
        let ext = f.padded(hc);
        let mut gain = vec![0.0; n];
        correlate_into(&ext, c2.weights(), &mut gain);
        let total = c2.sum();
        for ((o, g), v) in out.iter_mut().zip(&gain).zip(f.values()) {
            let d = g - total * v;
            if accumulate {
                *o += d;
            } else {
                *o = d;
            }
        }
        return;
    };
    let hp = phi.half_width();
    // E on nodes −hc..n+hc, from ρ padded by hc + hp.
    let ext = f.padded(hc + hp);
    let mut e_ext = vec![0.0; n + 2 * hc];
    correlate_into(&ext, phi.weights(), &mut e_ext);
    for e in e_ext.iter_mut() {
        *e = (-*e).exp();
    }
    let rho_ext = &ext[hp..hp + n + 2 * hc];

    let mut gain = vec![0.0; n];
    match placement {
        Placement::Target => {
            correlate_into(rho_ext, c2.weights(), &mut gain);
            for (g, e) in gain.iter_mut().zip(&e_ext[hc..hc + n]) {
                *g *= e;
            }
        }
        Placement::PaperLiteral => {
            let er: Vec<f64> = e_ext.iter().zip(rho_ext).map(|(e, r)| e * r).collect();
            correlate_into(&er, c2.weights(), &mut gain);
        }
    }
    let mut c2e = vec![0.0; n];
    correlate_into(&e_ext, c2.weights(), &mut c2e);
    for (((o, g), l), v) in out.iter_mut().zip(&gain).zip(&c2e).zip(f.values()) {
        let d = g - v * l;
        if accumulate {
            *o += d;
        } else {
            *o = d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryRegime, Grid};
    use approx::assert_relative_eq;

    fn k(s: &str) -> Kernel {
        s.parse().unwrap()
    }

    fn periodic(len: f64, dx: f64, f: impl Fn(f64) -> f64) -> DensityField {
        let g = Grid::periodic(-len / 2.0, len, dx).unwrap();
        DensityField::new(g, g.nodes().map(f).collect(), BoundaryRegime::periodic()).unwrap()
    }

    fn closed(x0: f64, x1: f64, dx: f64, f: impl Fn(f64) -> f64) -> DensityField {
        let g = Grid::closed(x0, x1, dx).unwrap();
        DensityField::new(g, g.nodes().map(f).collect(), BoundaryRegime::dirichlet()).unwrap()
    }

    /// Brute-force `Q = ∬ a1(y − z) ρ(y) ρ(z) dy dz` over all node pairs.
    fn pair_integral(f: &DensityField, a1: &Kernel) -> f64 {
        let g = f.grid();
        let v = f.values();
        let mut q = 0.0;
        for i in 0..g.len() {
            for j in 0..g.len() {
                q += a1.eval_on_grid(g.x(i) - g.x(j)) * v[i] * v[j];
            }
        }
        q * g.dx() * g.dx()
    }

    #[test]
    fn loss_on_constant_field() {
        let f = periodic(20.0, 0.025, |_| 0.4);
        for v in coalescence_loss(&f, &k("G:2,1")) {
            assert_relative_eq!(v, 2.0 * 0.16, max_relative = 1e-10);
        }
        let z = periodic(20.0, 0.025, |_| 0.0);
        assert!(coalescence_loss(&z, &k("G:2,1")).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shifted_kernel_does_not_touch_step_interiors() {
        // Steps of width 2 with period 10; B_{1,0.8,8} only acts at pair
        // distances in [7.2, 8.8]. A point at offset |y| < 0.2 from its step
        // centre is more than 8.8 away from the neighbouring step and less
        // than 2 away from any point of its own.
        let b41 = k("B:4,1");
        let f = periodic(40.0, 0.025, |x| {
            let y = (x + 5.0).rem_euclid(10.0) - 5.0;
            b41.eval_on_grid(y)
        });
        let loss = coalescence_loss(&f, &k("B:1,0.8,8"));
        let g = f.grid();
        for (x, l) in g.nodes().zip(&loss) {
            let y = (x + 5.0).rem_euclid(10.0) - 5.0;
            if y.abs() < 0.19 {
                assert_eq!(*l, 0.0, "x = {x}");
            }
        }
        // Edge points interact (distance 8..8.8 to the neighbour).
        let edge = g.nodes().position(|x| (x - 0.9).abs() < 1e-9).unwrap();
        assert!(loss[edge] > 0.0);
    }

    #[test]
    fn midpoint_gain_on_constant_field() {
        let f = periodic(20.0, 0.025, |_| 0.4);
        for v in coalescence_gain_midpoint(&f, &k("G:1,1")) {
            assert_relative_eq!(v, 0.5 * 0.16, max_relative = 1e-10);
        }
        for v in coalescence_gain_midpoint(&f, &k("B:1,0.8,8")) {
            assert_relative_eq!(v, 0.5 * 0.16, max_relative = 1e-10);
        }
    }

    #[test]
    fn midpoint_gain_of_point_mass_stays_at_the_point() {
        let g = Grid::closed(-5.0, 5.0, 0.05).unwrap();
        let mut v = vec![0.0; g.len()];
        let mid = g.len() / 2;
        v[mid] = 1.0 / g.dx();
        let f = DensityField::new(g, v, BoundaryRegime::dirichlet()).unwrap();
        let gain = coalescence_gain_midpoint(&f, &k("G:1,1"));
        for (i, x) in gain.iter().enumerate() {
            if i == mid {
                assert!(*x > 0.0);
            } else {
                assert_eq!(*x, 0.0);
            }
        }
    }

    #[test]
    fn midpoint_gain_of_two_bumps_lands_between_them() {
        let bump = |c: f64| move |x: f64| (-(x - c) * (x - c) / (2.0 * 0.09)).exp();
        let f = closed(-10.0, 10.0, 0.025, |x| bump(-5.0)(x) + bump(5.0)(x));
        let a1 = k("B:1,0.8,8");
        let gain = coalescence_gain_midpoint(&f, &a1);
        let g = f.grid();
        // Only cross pairs reach distances in [7.2, 8.8].
        let total: f64 = gain.iter().sum::<f64>() * g.dx();
        let q = pair_integral(&f, &a1);
        assert!(total > 0.0);
        assert_relative_eq!(total, 0.5 * q, max_relative = 1e-2);
        for (i, v) in gain.iter().enumerate() {
            if g.x(i).abs() > 2.0 {
                assert!(*v < 1e-12 * total.max(1e-300), "x = {}", g.x(i));
            }
        }
    }

    #[test]
    fn midpoint_gain_even_for_even_density() {
        let f = closed(-6.0, 6.0, 0.05, |x| (-(x - 1.0).powi(2)).exp() + (-(x + 1.0).powi(2)).exp());
        let gain = coalescence_gain_midpoint(&f, &k("G:1,0.7,2"));
        let n = gain.len();
        for i in 0..n / 2 {
            assert!((gain[i] - gain[n - 1 - i]).abs() <= 1e-12 * gain[i].abs().max(1e-300));
        }
    }

    #[test]
    fn logmass_gain_vanishes_on_zero_field() {
        let f = closed(-1.0, 4.0, 0.025, |_| 0.0);
        assert!(coalescence_gain_logmass(&f, &k("G:1,0.2")).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn logmass_gain_support_lies_right_of_ln2() {
        let f = closed(-1.0, 4.0, 0.025, |x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 });
        let gain = coalescence_gain_logmass(&f, &k("B:1,3"));
        let g = f.grid();
        let lo = 2f64.ln();
        let hi = (2.0 * 1f64.exp()).ln();
        for (i, v) in gain.iter().enumerate() {
            let x = g.x(i);
            if x < lo - 2.0 * g.dx() || x > hi + 2.0 * g.dx() {
                assert_eq!(*v, 0.0, "x = {x}");
            }
        }
        let peak = gain.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 0.0);
    }

    #[test]
    fn logmass_constant_field_matches_homogeneous_rate() {
        // For constant ρ the log-sum gain equals (λ/2)ρ² away from x_min.
        let f = closed(-6.0, 6.0, 0.01, |_| 0.5);
        let a1 = k("G:1,0.2");
        let gain = coalescence_gain_logmass(&f, &a1);
        let g = f.grid();
        for (i, v) in gain.iter().enumerate() {
            if g.x(i) > 0.0 {
                assert_relative_eq!(*v, 0.5 * 0.25, max_relative = 2e-3);
            }
        }
    }

    #[test]
    fn logmass_number_and_mass_balance() {
        let bump = |x: f64| {
            if (0.0..=1.0).contains(&x) {
                (std::f64::consts::PI * x).sin().powi(2)
            } else {
                0.0
            }
        };
        let a1 = k("G:1,0.5");
        let mut prev = None;
        for dx in [0.02, 0.01] {
            let f = closed(-2.0, 6.0, dx, bump);
            let gain = coalescence_gain_logmass(&f, &a1);
            let loss = coalescence_loss(&f, &a1);
            let g = f.grid();
            let dn: f64 = gain.iter().zip(&loss).map(|(a, b)| a - b).sum::<f64>() * dx;
            let q = pair_integral(&f, &a1);
            assert_relative_eq!(dn, -0.5 * q, max_relative = 1e-2);
            let dm: f64 = (0..g.len())
                .map(|i| g.x(i).exp() * (gain[i] - loss[i]))
                .sum::<f64>()
                * dx;
            let scale: f64 = (0..g.len()).map(|i| g.x(i).exp() * loss[i]).sum::<f64>() * dx;
            let rel = dm.abs() / scale;
            assert!(rel < 1e-2, "dx {dx}: {rel}");
            if let Some(p) = prev {
                assert!(p / rel > 3.5, "ratio {}", p / rel);
            }
            prev = Some(rel);
        }
    }

    #[test]
    fn jumps_vanish_on_constants() {
        let f = periodic(40.0, 0.05, |_| 0.8);
        for placement in [Placement::Target, Placement::PaperLiteral] {
            let r = jump_rhs(&f, &k("G:1,1,2"), Some(&k("G:10,1,4")), placement);
            assert!(r.iter().all(|v| v.abs() < 1e-12), "{placement:?}");
        }
        let r = jump_rhs(&f, &k("G:1,1"), None, Placement::Target);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn repulsion_factor_on_unit_density() {
        let f = periodic(40.0, 0.05, |_| 1.0);
        for e in repulsion_factor(&f, &k("G:10,1,4")) {
            assert_relative_eq!(e, (-10f64).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn free_jump_on_half_line_is_balanced_at_origin() {
        use crate::field::BoundaryKind;
        let at_zero = |dx: f64| {
            let g = Grid::closed(-20.0, 20.0, dx).unwrap();
            let b = BoundaryRegime::new(BoundaryKind::HomogeneousDriver, BoundaryKind::DirichletZero)
                .unwrap();
            // Half weight on the jump node keeps ρ − ½ odd about 0.
            let v = g
                .nodes()
                .map(|x| if x.abs() < 1e-9 { 0.5 } else if x < 0.0 { 1.0 } else { 0.0 })
                .collect();
            let f = DensityField::new(g, v, b).unwrap().with_boundary_values(1.0, 0.0);
            let r = jump_rhs(&f, &k("G:1,1"), None, Placement::Target);
            r[g.nodes().position(|x| x.abs() < 1e-9).unwrap()]
        };
        assert!(at_zero(0.05).abs() < 1e-12);
        assert!(at_zero(0.025).abs() < 1e-12);
    }

    #[test]
    fn target_jumps_conserve_number_on_periodic_grids() {
        let f = periodic(40.0, 0.025, |x| 1.0 + (x * 0.7).sin() * 0.9 + (x * 2.3).cos() * 0.05);
        let r = jump_rhs(&f, &k("G:1,1,2"), Some(&k("G:10,1,4")), Placement::Target);
        let total: f64 = r.iter().sum::<f64>() * f.grid().dx();
        assert!(total.abs() <= 1e-10 * r.len() as f64, "{total}");
        let lit = jump_rhs(&f, &k("G:1,1,2"), Some(&k("G:10,1,4")), Placement::PaperLiteral);
        let total_lit: f64 = lit.iter().sum::<f64>() * f.grid().dx();
        assert!(total_lit.abs() > 1e-6, "{total_lit}");
    }

    #[test]
    fn rhs_midpoint_constant() {
        let f = periodic(20.0, 0.025, |_| 0.6);
        let m = ModelConfig::midpoint(k("G:1,1"));
        for v in rhs(&f, &m) {
            assert_relative_eq!(v, -0.5 * 0.36, max_relative = 1e-10);
        }
        let m = ModelConfig::free_jumps(k("G:1,1"));
        assert!(rhs(&f, &m).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn rhs_non_negative_where_density_vanishes() {
        let f = closed(-10.0, 10.0, 0.05, |x| if x.abs() < 3.0 { 1.0 + x.sin() * 0.5 } else { 0.0 });
        let m = ModelConfig::midpoint(k("G:0.5,1,2")).with_jumps(k("G:1,1,2"), Some(k("G:10,1,4")));
        let r = rhs(&f, &m);
        for (v, rho) in r.iter().zip(f.values()) {
            if *rho == 0.0 {
                assert!(*v >= 0.0);
            }
        }
    }

    #[test]
    fn empty_model_is_rejected() {
        let m = ModelConfig {
            coalescence: None,
            jump: None,
        };
        assert!(m.validate().is_err());
    }
}
