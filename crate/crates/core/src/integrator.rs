//! Classical RK4 time stepping of the semi-discrete equation.
//!
//! Boundary sides with a homogeneous driver carry the spatially constant
//! solution `r(t)` of the same equation. The driver is advanced with the
//! same four stages as the field so every stage sees ghost values at its own
//! stage time.

use crate::diagnostics::{DiagnosticsRecord, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::field::{BoundaryKind, DensityField, Side};
use crate::operators::{KineticOperator, ModelConfig};

/// Default time step.
pub const DEFAULT_DT: f64 = 0.01;

/// Closed-form homogeneous solution `r(t) = r0 / (1 + (⟨a1⟩/2)·r0·t)`;
/// constant without coalescence.
pub fn homogeneous_driver(m: &ModelConfig, r0: f64, t: f64) -> f64 {
    match m.coalescence {
        Some(c) => r0 / (1.0 + 0.5 * c.kernel.total_integral() * r0 * t),
        None => r0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnlargementEvent {
    pub t: f64,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub field: DensityField,
    pub t: f64,
    pub steps: u64,
    pub enlargements: Vec<EnlargementEvent>,
    /// Nodes clamped to zero by the most recent step.
    pub last_clamped: usize,
    pub total_clamped: usize,
}

impl SimState {
    pub fn new(field: DensityField) -> Self {
        Self {
            field,
            t: 0.0,
            steps: 0,
            enlargements: Vec::new(),
            last_clamped: 0,
            total_clamped: 0,
        }
    }

    /// Current driver value `r(t)` of a side.
    pub fn hom_value(&self, side: Side) -> f64 {
        self.field.boundary_value(side)
    }
}

/// Enlargement trigger. `None` fields take the defaults: margin twice the
/// largest kernel support radius, tolerance `1e−4·max(1, max ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnlargePolicy {
    pub enabled: bool,
    pub margin: Option<f64>,
    pub tol: Option<f64>,
}

impl Default for EnlargePolicy {
    fn default() -> Self {
        Self {
            enabled: true,
            margin: None,
            tol: None,
        }
    }
}

impl EnlargePolicy {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Steps between diagnostics rows.
    pub diagnostics_stride: u64,
    pub enlarge: EnlargePolicy,
}

impl TimeConfig {
    pub fn new(dt: f64, t_end: f64, snapshot_times: Vec<f64>) -> Self {
        Self {
            dt,
            t_end,
            snapshot_times,
            diagnostics_stride: 1,
            enlarge: EnlargePolicy::default(),
        }
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Step indices of the snapshots; rejects times off the step lattice.
    pub fn snapshot_steps(&self) -> Result<Vec<u64>> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("time.dt", "must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config("time.t_end", "must be non-negative"));
        }
        lattice_index(self.t_end, self.dt)?;
        if self.diagnostics_stride == 0 {
            return Err(Error::config("time.diagnostics_stride", "must be at least 1"));
        }
        let mut steps = Vec::with_capacity(self.snapshot_times.len());
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end * (1.0 + 1e-12)).contains(&t) {
                return Err(Error::config(
                    "time.snapshots",
                    format!("{t} is outside [0, {}]", self.t_end),
                ));
            }
            let k = lattice_index(t, self.dt)?;
            if steps.last().is_some_and(|&p| p >= k) {
                return Err(Error::config("time.snapshots", "must be strictly increasing"));
            }
            steps.push(k);
        }
        Ok(steps)
    }
}

fn lattice_index(t: f64, dt: f64) -> Result<u64> {
    let k = (t / dt).round();
    if (t - k * dt).abs() > 1e-9 * dt.max(t.abs() * 1e-3) {
        return Err(Error::SnapshotOffLattice { t, dt });
    }
    Ok(k as u64)
}

/// One classical RK4 step. Stage fields carry stage-time driver values; the
/// final field is clamped at zero.
pub fn rk4_step(s: &SimState, op: &KineticOperator, dt: f64) -> Result<SimState> {
    let f = &s.field;
    let model = op.model();
    let n = f.grid().len();
    let rho0 = f.values();
    let r0 = f.boundary_values();
    let driven = |side: Side| f.boundary().side(side) == BoundaryKind::HomogeneousDriver;
    let hom_rate = |r: [f64; 2]| {
        let mut k = [0.0; 2];
        for side in [Side::Left, Side::Right] {
            if driven(side) {
                k[side.index()] = model.homogeneous_rate(r[side.index()]);
            }
        }
        k
    };

    let stage = |scale: f64, k: &[f64], kr: [f64; 2]| -> DensityField {
        let values: Vec<f64> = rho0.iter().zip(k).map(|(v, d)| v + scale * d).collect();
        let bv = [r0[0] + scale * kr[0], r0[1] + scale * kr[1]];
        DensityField::from_parts(*f.grid(), values, f.boundary(), bv)
    };
    let check = |k: &[f64], t: f64| -> Result<()> {
        if k.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Unstable { t })
        }
    };

    let k1 = op.rhs(f);
    check(&k1, s.t)?;
    let kr1 = hom_rate(r0);

    let f2 = stage(0.5 * dt, &k1, kr1);
    let k2 = op.rhs(&f2);
    check(&k2, s.t + 0.5 * dt)?;
    let kr2 = hom_rate(f2.boundary_values());

    let f3 = stage(0.5 * dt, &k2, kr2);
    let k3 = op.rhs(&f3);
    check(&k3, s.t + 0.5 * dt)?;
    let kr3 = hom_rate(f3.boundary_values());

    let f4 = stage(dt, &k3, kr3);
    let k4 = op.rhs(&f4);
    check(&k4, s.t + dt)?;
    let kr4 = hom_rate(f4.boundary_values());

    let w = dt / 6.0;
    let mut values = Vec::with_capacity(n);
    let mut clamped = 0;
    for i in 0..n {
        let v = rho0[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !v.is_finite() {
            return Err(Error::Unstable { t: s.t + dt });
        }
        if v < 0.0 {
            clamped += 1;
            values.push(0.0);
        } else {
            values.push(v);
        }
    }
    let mut bv = [0.0; 2];
    for i in 0..2 {
        bv[i] = (r0[i] + w * (kr1[i] + 2.0 * kr2[i] + 2.0 * kr3[i] + kr4[i])).max(0.0);
    }
    let steps = s.steps + 1;
    Ok(SimState {
        field: DensityField::from_parts(*f.grid(), values, f.boundary(), bv),
        t: steps as f64 * dt,
        steps,
        enlargements: s.enlargements.clone(),
        last_clamped: clamped,
        total_clamped: s.total_clamped + clamped,
    })
}

/// Doubles the domain on every non-periodic side whose boundary layer
/// deviates from the side's boundary value by more than the tolerance.
pub fn maybe_enlarge(s: &mut SimState, model: &ModelConfig, policy: &EnlargePolicy) -> Result<()> {
    if !policy.enabled || s.field.boundary().is_periodic() {
        return Ok(());
    }
    let margin = policy
        .margin
        .unwrap_or_else(|| 2.0 * model.max_support_radius());
    let max_rho = s.field.values().iter().cloned().fold(0.0, f64::max);
    let tol = policy.tol.unwrap_or(1e-4 * max_rho.max(1.0));
    for side in [Side::Left, Side::Right] {
        if deviates(&s.field, side, margin, tol) {
            s.field = s.field.enlarge(side)?;
            s.enlargements.push(EnlargementEvent { t: s.t, side });
        }
    }
    Ok(())
}

fn deviates(f: &DensityField, side: Side, margin: f64, tol: f64) -> bool {
    let g = f.grid();
    let reference = f.boundary_value(side);
    let reference = match f.boundary().side(side) {
        BoundaryKind::HomogeneousDriver => reference,
        _ => 0.0,
    };
    let layer = ((margin / g.dx()).ceil() as usize + 1).min(g.len());
    let values = f.values();
    let slice = match side {
        Side::Left => &values[..layer],
        Side::Right => &values[g.len() - layer..],
    };
    slice.iter().any(|v| (v - reference).abs() > tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: DensityField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: DiagnosticsRecord,
    pub final_state: SimState,
}

/// Integrates from `t = 0` to `t_end`. Deterministic for a given input.
pub fn run(initial: DensityField, model: &ModelConfig, tc: &TimeConfig) -> Result<RunOutput> {
    run_with(initial, model, tc, |_| {})
}

/// [`run`] with a callback after every accepted step.
pub fn run_with(
    initial: DensityField,
    model: &ModelConfig,
    tc: &TimeConfig,
    mut on_step: impl FnMut(&SimState),
) -> Result<RunOutput> {
    model.validate()?;
    let snap_steps = tc.snapshot_steps()?;
    let op = KineticOperator::new(*model, initial.grid().dx());
    op.check_field(&initial)?;
    let total = tc.total_steps();

    let mut state = SimState::new(initial);
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut diagnostics = DiagnosticsRecord::default();
    let mut next_snap = snap_steps.iter().peekable();

    let mut observe = |state: &SimState, snapshots: &mut Vec<Snapshot>, diag: &mut DiagnosticsRecord| {
        if next_snap.peek().is_some_and(|&&k| k == state.steps) {
            next_snap.next();
            snapshots.push(Snapshot {
                t: state.t,
                field: state.field.clone(),
            });
        }
        if state.steps.is_multiple_of(tc.diagnostics_stride) || state.steps == total {
            diag.push(DiagnosticsRow::observe(state));
        }
    };
    observe(&state, &mut snapshots, &mut diagnostics);
    while state.steps < total {
        state = rk4_step(&state, &op, tc.dt)?;
        maybe_enlarge(&mut state, model, &tc.enlarge)?;
        on_step(&state);
        observe(&state, &mut snapshots, &mut diagnostics);
    }
    Ok(RunOutput {
        snapshots,
        diagnostics,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryRegime, Grid};
    use crate::kernels::Kernel;
    use approx::assert_relative_eq;

    fn k(s: &str) -> Kernel {
        s.parse().unwrap()
    }

    fn constant_periodic(r: f64, dx: f64) -> DensityField {
        let g = Grid::periodic(-5.0, 10.0, dx).unwrap();
        DensityField::new(g, vec![r; g.len()], BoundaryRegime::periodic()).unwrap()
    }

    #[test]
    fn scalar_rk4_step_matches_hand_stages() {
        // dr/dt = −r²/2: k1 = −0.5, k2 = −0.28125, k3 ≈ −0.3692627, k4 ≈ −0.1989147
        let k1: f64 = -0.5;
        let k2 = -0.5 * (1.0 + 0.5 * k1).powi(2);
        let k3 = -0.5 * (1.0 + 0.5 * k2).powi(2);
        let k4 = -0.5 * (1.0 + k3).powi(2);
        assert_relative_eq!(k2, -0.28125);
        assert!((k3 + 0.3692627).abs() < 1e-7);
        assert!((k4 + 0.1989147).abs() < 1e-7);
        let r1 = 1.0 + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        assert!((r1 - 0.66667664).abs() < 1e-8);

        let m = ModelConfig::midpoint(k("G:1,1"));
        let op = KineticOperator::new(m, 0.05);
        let s = SimState::new(constant_periodic(1.0, 0.05));
        let s1 = rk4_step(&s, &op, 1.0).unwrap();
        for v in s1.field.values() {
            assert!((v - r1).abs() < 1e-9, "{v}");
        }
        assert_eq!(s1.t, 1.0);
    }

    #[test]
    fn fixed_point_only_advances_time() {
        let m = ModelConfig::free_jumps(k("G:1,1"));
        let op = KineticOperator::new(m, 0.05);
        let s = SimState::new(constant_periodic(0.7, 0.05));
        let s1 = rk4_step(&s, &op, 0.1).unwrap();
        for v in s1.field.values() {
            assert!((v - 0.7).abs() < 1e-14);
        }
        assert!((s1.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn richardson_ratio_on_homogeneous_decay() {
        let m = ModelConfig::midpoint(k("G:1,1"));
        let err = |dt: f64| {
            let tc = TimeConfig::new(dt, 1.0, vec![1.0]);
            let out = run(constant_periodic(1.0, 0.05), &m, &tc).unwrap();
            let exact = homogeneous_driver(&m, 1.0, 1.0);
            (out.snapshots[0].field.values()[0] - exact).abs()
        };
        let (e1, e2, e3) = (err(0.1), err(0.05), err(0.025));
        let (q1, q2) = (e1 / e2, e2 / e3);
        assert!((14.0..=18.0).contains(&q1), "{q1}");
        assert!((14.0..=18.0).contains(&q2), "{q2}");
    }

    #[test]
    fn homogeneous_driver_examples() {
        let free = ModelConfig::free_jumps(k("G:1,1"));
        assert_eq!(homogeneous_driver(&free, 0.3, 100.0), 0.3);
        let m = ModelConfig::midpoint(k("G:1,1"));
        assert_relative_eq!(homogeneous_driver(&m, 1.0, 2.0), 0.5);
        assert_eq!(homogeneous_driver(&m, 0.8, 0.0), 0.8);
    }

    #[test]
    fn driven_boundary_tracks_closed_form() {
        let m = ModelConfig::midpoint(k("G:1,1"));
        let g = Grid::closed(-5.0, 5.0, 0.05).unwrap();
        let b = BoundaryRegime::new(BoundaryKind::HomogeneousDriver, BoundaryKind::HomogeneousDriver)
            .unwrap();
        let f = DensityField::new(g, vec![1.0; g.len()], b)
            .unwrap()
            .with_boundary_values(1.0, 1.0);
        let tc = TimeConfig::new(0.01, 4.0, vec![4.0]);
        let out = run(f, &m, &tc).unwrap();
        let exact = homogeneous_driver(&m, 1.0, 4.0);
        let s = &out.snapshots[0].field;
        assert!((s.boundary_value(Side::Left) - exact).abs() < 1e-9);
        for v in s.values() {
            assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
        }
        assert!(out.final_state.enlargements.is_empty());
    }

    #[test]
    fn step_then_reverse_returns_close_to_start() {
        let g = Grid::periodic(-10.0, 20.0, 0.05).unwrap();
        let f = DensityField::new(
            g,
            g.nodes().map(|x| 1.0 + 0.5 * (x * std::f64::consts::PI / 10.0).sin()).collect(),
            BoundaryRegime::periodic(),
        )
        .unwrap();
        let m = ModelConfig::free_jumps(k("G:1,1"));
        let op = KineticOperator::new(m, g.dx());
        let back = KineticOperator::new(m, g.dx());
        let dist = |dt: f64| {
            let s1 = rk4_step(&SimState::new(f.clone()), &op, dt).unwrap();
            // Backward step: integrate the negated field equation by
            // stepping with −dt.
            let s2 = rk4_step(&SimState::new(s1.field.clone()), &back, -dt).unwrap();
            s2.field
                .values()
                .iter()
                .zip(f.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (d1, d2) = (dist(0.4), dist(0.2));
        assert!(d1 < 1e-4, "{d1}");
        assert!(d1 / d2 > 24.0, "ratio {}", d1 / d2);
    }

    #[test]
    fn enlargement_triggers_on_deviation_only() {
        let m = ModelConfig::free_jumps(k("G:1,1"));
        let g = Grid::closed(-20.0, 20.0, 0.05).unwrap();
        let flat = DensityField::new(g, vec![0.0; g.len()], BoundaryRegime::dirichlet()).unwrap();
        let mut s = SimState::new(flat);
        maybe_enlarge(&mut s, &m, &EnlargePolicy::default()).unwrap();
        assert!(s.enlargements.is_empty());

        let bump = DensityField::new(
            g,
            g.nodes().map(|x| (-(x - 15.0).powi(2)).exp()).collect(),
            BoundaryRegime::dirichlet(),
        )
        .unwrap();
        let mut s = SimState::new(bump);
        maybe_enlarge(&mut s, &m, &EnlargePolicy::default()).unwrap();
        assert_eq!(s.enlargements.len(), 1);
        assert_eq!(s.enlargements[0].side, Side::Right);
        assert_relative_eq!(s.field.grid().x_max(), 60.0, max_relative = 1e-12);

        let p = Grid::periodic(-20.0, 40.0, 0.05).unwrap();
        let pf = DensityField::new(p, vec![1.0; p.len()], BoundaryRegime::periodic()).unwrap();
        let mut s = SimState::new(pf);
        maybe_enlarge(&mut s, &m, &EnlargePolicy::default()).unwrap();
        assert!(s.enlargements.is_empty());
    }

    #[test]
    fn zero_length_run_returns_initial() {
        let m = ModelConfig::free_jumps(k("G:1,1"));
        let f = constant_periodic(0.5, 0.05);
        let out = run(f.clone(), &m, &TimeConfig::new(0.01, 0.0, vec![0.0])).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].field, f);
        assert_eq!(out.diagnostics.rows().len(), 1);
    }

    #[test]
    fn off_lattice_snapshots_are_rejected() {
        let m = ModelConfig::free_jumps(k("G:1,1"));
        let tc = TimeConfig::new(0.1, 1.0, vec![0.05]);
        let err = run(constant_periodic(0.5, 0.05), &m, &tc).unwrap_err();
        assert!(matches!(err, Error::SnapshotOffLattice { .. }));
    }

    #[test]
    fn oversized_step_reports_instability() {
        let m = ModelConfig::midpoint(k("G:1e30,1"));
        let tc = TimeConfig::new(10.0, 1000.0, vec![]);
        let err = run(constant_periodic(1.0, 0.05), &m, &tc).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }), "{err:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let m = ModelConfig::midpoint(k("B:1,0.8,2")).with_jumps(k("G:0.3,1"), Some(k("G:2,1,1")));
        let g = Grid::closed(-10.0, 10.0, 0.05).unwrap();
        let f = DensityField::new(
            g,
            g.nodes().map(|x| if x.abs() < 2.0 { 1.0 } else { 0.0 }).collect(),
            BoundaryRegime::dirichlet(),
        )
        .unwrap();
        let tc = TimeConfig::new(0.05, 2.0, vec![1.0, 2.0]);
        let a = run(f.clone(), &m, &tc).unwrap();
        let b = run(f, &m, &tc).unwrap();
        assert_eq!(a, b);
    }
}
