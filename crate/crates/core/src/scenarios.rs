//! Initial conditions, scenario configuration files and the built-in
//! scenario registry.
//!
//! A scenario file is a JSON document:
//!
//! ```json
//! {
//!   "id": "free-jumps-periodic",
//!   "domain": { "x_min": -20, "x_max": 20, "dx": 0.025,
//!               "boundary_left": "periodic", "boundary_right": "periodic" },
//!   "time": { "dt": 0.01, "t_end": 80, "snapshots": [0, 2, 16, 80] },
//!   "model": { "coalescence": { "type": "none" },
//!              "jump": { "kernel": "G:1,1", "repulsion": null, "placement": "target" } },
//!   "initial": { "kind": "periodic_kernel", "params": { "kernel": "B:1,1", "period": 40 } },
//!   "output": { "dir": "out/free-jumps-periodic" }
//! }
//! ```
//!
//! For periodic domains `x_max` is the end of the period and is not a node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoundaryKind, BoundaryRegime, DensityField, Grid, Side};
use crate::integrator::{EnlargePolicy, TimeConfig, DEFAULT_DT};
use crate::kernels::Kernel;
use crate::operators::{Coalescence, CoalescenceForm, Jumps, ModelConfig, Placement};

/// Default grid spacing; puts the edges of every step kernel used by the
/// registry on nodes.
pub const DEFAULT_DX: f64 = 0.025;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `level · 1{x ≤ 0}`.
    HeavisideLeft {
        #[serde(default = "one")]
        level: f64,
    },
    /// `level · 1{x ≥ 0}`.
    HeavisideRight {
        #[serde(default = "one")]
        level: f64,
    },
    /// `Σ_k K(x − k·period)`.
    PeriodicKernel { kernel: Kernel, period: f64 },
    Constant { level: f64 },
    /// Piecewise-linear through `(x, ρ)` rows, zero outside them.
    Tabulated { rows: Vec<[f64; 2]> },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let level_ok = |l: f64| l.is_finite() && l >= 0.0;
        match self {
            Self::HeavisideLeft { level }
            | Self::HeavisideRight { level }
            | Self::Constant { level } => {
                if !level_ok(*level) {
                    return Err(Error::config("initial.params.level", "must be non-negative"));
                }
            }
            Self::PeriodicKernel { period, .. } => {
                if !(period.is_finite() && *period > 0.0) {
                    return Err(Error::config("initial.params.period", "must be positive"));
                }
            }
            Self::Tabulated { rows } => {
                if rows.is_empty() {
                    return Err(Error::config("initial.params.rows", "must not be empty"));
                }
                if rows.iter().any(|r| !r[0].is_finite() || !level_ok(r[1])) {
                    return Err(Error::config(
                        "initial.params.rows",
                        "x must be finite and ρ non-negative",
                    ));
                }
                if rows.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::config(
                        "initial.params.rows",
                        "x must be strictly increasing",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Density value far out on one side, used to seed driver boundaries.
    pub fn far_value(&self, side: Side) -> f64 {
        match (self, side) {
            (Self::HeavisideLeft { level }, Side::Left) => *level,
            (Self::HeavisideRight { level }, Side::Right) => *level,
            (Self::Constant { level }, _) => *level,
            _ => 0.0,
        }
    }

    /// Boundary regime prescribed for this initial condition: zero where the
    /// density vanishes, driven where it is homogeneous, periodic for
    /// cyclic patterns.
    pub fn natural_boundary(&self) -> BoundaryRegime {
        use BoundaryKind::*;
        let (l, r) = match self {
            Self::HeavisideLeft { .. } => (HomogeneousDriver, DirichletZero),
            Self::HeavisideRight { .. } => (DirichletZero, HomogeneousDriver),
            Self::PeriodicKernel { .. } => (Periodic, Periodic),
            Self::Constant { .. } => (HomogeneousDriver, HomogeneousDriver),
            Self::Tabulated { .. } => (DirichletZero, DirichletZero),
        };
        BoundaryRegime::new(l, r).expect("matching sides")
    }

    fn value_at(&self, x: f64) -> f64 {
        match self {
            Self::HeavisideLeft { level } => {
                if x <= 0.0 {
                    *level
                } else {
                    0.0
                }
            }
            Self::HeavisideRight { level } => {
                if x >= 0.0 {
                    *level
                } else {
                    0.0
                }
            }
            Self::Constant { level } => *level,
            Self::PeriodicKernel { kernel, period } => {
                let r = kernel.convolution_radius();
                let k_lo = ((x - r) / period).ceil() as i64;
                let k_hi = ((x + r) / period).floor() as i64;
                (k_lo..=k_hi)
                    .map(|k| kernel.eval_on_grid(x - k as f64 * period))
                    .sum()
            }
            Self::Tabulated { rows } => {
                let first = rows[0];
                let last = rows[rows.len() - 1];
                if x < first[0] || x > last[0] {
                    return 0.0;
                }
                if rows.len() == 1 {
                    return first[1];
                }
                let i = rows.partition_point(|r| r[0] <= x).clamp(1, rows.len() - 1);
                let (a, b) = (rows[i - 1], rows[i]);
                let s = (x - a[0]) / (b[0] - a[0]);
                (a[1] + s * (b[1] - a[1])).max(0.0)
            }
        }
    }
}

/// Samples the initial condition at the grid nodes and seeds driver
/// boundary values from the profile's far-field levels.
pub fn build_initial(
    ic: &InitialCondition,
    grid: Grid,
    boundary: BoundaryRegime,
) -> Result<DensityField> {
    ic.validate()?;
    if let InitialCondition::Tabulated { rows } = ic {
        let eps = 1e-9 * grid.dx();
        let hi = if boundary.is_periodic() {
            grid.x_min() + grid.period()
        } else {
            grid.x_max()
        };
        if let Some(r) = rows.iter().find(|r| r[0] < grid.x_min() - eps || r[0] > hi + eps) {
            return Err(Error::TabulatedOutOfDomain { x: r[0] });
        }
    }
    let values = grid.nodes().map(|x| ic.value_at(x)).collect();
    let f = DensityField::new(grid, values, boundary)?;
    let bv = |side: Side| match boundary.side(side) {
        BoundaryKind::HomogeneousDriver => ic.far_value(side),
        _ => 0.0,
    };
    let (l, r) = (bv(Side::Left), bv(Side::Right));
    Ok(f.with_boundary_values(l, r))
}

/// Spatial domain of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub boundary: BoundaryRegime,
}

impl Domain {
    pub fn grid(&self) -> Result<Grid> {
        if self.boundary.is_periodic() {
            Grid::periodic(self.x_min, self.x_max - self.x_min, self.dx)
        } else {
            Grid::closed(self.x_min, self.x_max, self.dx)
        }
    }
}

/// Extra run of a scenario with a different model, e.g. another kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub model: ModelConfig,
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub initial: InitialCondition,
    pub model: ModelConfig,
    pub domain: Domain,
    pub time: TimeConfig,
    /// Plotted window `[lo, hi]`.
    pub window: Option<(f64, f64)>,
    pub variants: Vec<Variant>,
    pub checks: Vec<String>,
    pub output_dir: Option<String>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.initial.validate()?;
        self.domain.grid()?;
        self.time.snapshot_steps()?;
        let expected = self.initial.natural_boundary();
        if self.domain.boundary != expected {
            return Err(Error::config(
                "domain.boundary_left",
                format!(
                    "initial condition {:?} requires boundaries ({:?}, {:?})",
                    self.initial,
                    expected.left(),
                    expected.right()
                ),
            ));
        }
        if let InitialCondition::PeriodicKernel { period, .. } = self.initial {
            let cycles = (self.domain.x_max - self.domain.x_min) / period;
            if (cycles - cycles.round()).abs() > 1e-9 || cycles.round() < 1.0 {
                return Err(Error::config(
                    "domain.x_max",
                    "periodic domain must span a whole number of pattern periods",
                ));
            }
        }
        for m in std::iter::once(&self.model).chain(self.variants.iter().map(|v| &v.model)) {
            m.validate()?;
            let lm = matches!(
                m.coalescence,
                Some(Coalescence {
                    form: CoalescenceForm::LogMass,
                    ..
                })
            );
            if lm && self.domain.boundary.left() == BoundaryKind::HomogeneousDriver {
                return Err(Error::config(
                    "domain.boundary_left",
                    "log-mass coalescence needs a dirichlet_zero or periodic left boundary",
                ));
            }
        }
        for v in &self.variants {
            let mut tc = self.time.clone();
            tc.t_end = v.snapshots.last().copied().unwrap_or(0.0);
            tc.snapshot_times = v.snapshots.clone();
            tc.snapshot_steps()?;
        }
        Ok(())
    }

    pub fn initial_field(&self) -> Result<DensityField> {
        build_initial(&self.initial, self.domain.grid()?, self.domain.boundary)
    }

    /// Time configuration of a variant: same step, ends at its last snapshot.
    pub fn variant_time(&self, v: &Variant) -> TimeConfig {
        let mut tc = self.time.clone();
        tc.t_end = v.snapshots.last().copied().unwrap_or(0.0);
        tc.snapshot_times = v.snapshots.clone();
        tc
    }

    /// Same scenario at another resolution; snapshot times are kept.
    pub fn with_resolution(mut self, dx: Option<f64>, dt: Option<f64>) -> Self {
        if let Some(dx) = dx {
            self.domain.dx = dx;
        }
        if let Some(dt) = dt {
            self.time.dt = dt;
        }
        self
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            id: Some(self.id.clone()),
            domain: DomainSection {
                x_min: self.domain.x_min,
                x_max: self.domain.x_max,
                dx: self.domain.dx,
                boundary_left: self.domain.boundary.left(),
                boundary_right: self.domain.boundary.right(),
                auto_enlarge: self.time.enlarge.enabled,
                trigger_margin: self.time.enlarge.margin,
                trigger_tol: self.time.enlarge.tol,
            },
            time: TimeSection {
                dt: self.time.dt,
                t_end: self.time.t_end,
                snapshots: self.time.snapshot_times.clone(),
                diagnostics_stride: self.time.diagnostics_stride,
            },
            model: ModelSection::from_model(&self.model),
            initial: self.initial.clone(),
            output: self.output_dir.clone().map(|dir| OutputSection { dir }),
            window: self.window.map(|(a, b)| [a, b]),
            variants: self
                .variants
                .iter()
                .map(|v| VariantSection {
                    label: v.label.clone(),
                    model: ModelSection::from_model(&v.model),
                    snapshots: v.snapshots.clone(),
                })
                .collect(),
            checks: self.checks.clone(),
        }
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let d = &file.domain;
        let boundary = BoundaryRegime::new(d.boundary_left, d.boundary_right)
            .map_err(|e| Error::config("domain.boundary_right", e.to_string()))?;
        let domain = Domain {
            x_min: d.x_min,
            x_max: d.x_max,
            dx: d.dx,
            boundary,
        };
        let time = TimeConfig {
            dt: file.time.dt,
            t_end: file.time.t_end,
            snapshot_times: file.time.snapshots.clone(),
            diagnostics_stride: file.time.diagnostics_stride,
            enlarge: EnlargePolicy {
                enabled: d.auto_enlarge,
                margin: d.trigger_margin,
                tol: d.trigger_tol,
            },
        };
        let model = file.model.to_model("model")?;
        let variants = file
            .variants
            .iter()
            .enumerate()
            .map(|(i, v)| {
                Ok(Variant {
                    label: v.label.clone(),
                    model: v.model.to_model(&format!("variants[{i}].model"))?,
                    snapshots: v.snapshots.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let s = Scenario {
            id: file.id.unwrap_or_else(|| "custom".to_string()),
            initial: file.initial,
            model,
            domain,
            time,
            window: file.window.map(|w| (w[0], w[1])),
            variants,
            checks: file.checks,
            output_dir: file.output.map(|o| o.dir),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| Error::config("document", e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }
}

// Serialized document -------------------------------------------------------

fn default_true() -> bool {
    true
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub domain: DomainSection,
    pub time: TimeSection,
    pub model: ModelSection,
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<VariantSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default = "default_dx")]
    pub dx: f64,
    pub boundary_left: BoundaryKind,
    pub boundary_right: BoundaryKind,
    #[serde(default = "default_true")]
    pub auto_enlarge: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_tol: Option<f64>,
}

fn default_dx() -> f64 {
    DEFAULT_DX
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default = "default_stride")]
    pub diagnostics_stride: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalescenceType {
    None,
    Midpoint,
    LogMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalescenceSection {
    #[serde(rename = "type")]
    pub kind: CoalescenceType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSection {
    pub kernel: String,
    #[serde(default)]
    pub repulsion: Option<String>,
    #[serde(default)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coalescence: Option<CoalescenceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<JumpSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    pub label: String,
    pub model: ModelSection,
    pub snapshots: Vec<f64>,
}

fn parse_kernel(s: &str, field: &str) -> Result<Kernel> {
    s.parse::<Kernel>()
        .map_err(|e| Error::config(field, e.to_string()))
}

impl ModelSection {
    pub fn from_model(m: &ModelConfig) -> Self {
        Self {
            coalescence: m.coalescence.map(|c| CoalescenceSection {
                kind: match c.form {
                    CoalescenceForm::Midpoint => CoalescenceType::Midpoint,
                    CoalescenceForm::LogMass => CoalescenceType::LogMass,
                },
                kernel: Some(c.kernel.to_string()),
            }),
            jump: m.jump.map(|j| JumpSection {
                kernel: j.kernel.to_string(),
                repulsion: j.repulsion.map(|k| k.to_string()),
                placement: j.placement,
            }),
        }
    }

    pub fn to_model(&self, path: &str) -> Result<ModelConfig> {
        let coalescence = match &self.coalescence {
            None => None,
            Some(c) => {
                let form = match c.kind {
                    CoalescenceType::None => None,
                    CoalescenceType::Midpoint => Some(CoalescenceForm::Midpoint),
                    CoalescenceType::LogMass => Some(CoalescenceForm::LogMass),
                };
                match form {
                    None => None,
                    Some(form) => {
                        let field = format!("{path}.coalescence.kernel");
                        let s = c
                            .kernel
                            .as_deref()
                            .ok_or_else(|| Error::config(&field, "required"))?;
                        Some(Coalescence {
                            form,
                            kernel: parse_kernel(s, &field)?,
                        })
                    }
                }
            }
        };
        let jump = match &self.jump {
            None => None,
            Some(j) => Some(Jumps {
                kernel: parse_kernel(&j.kernel, &format!("{path}.jump.kernel"))?,
                repulsion: j
                    .repulsion
                    .as_deref()
                    .map(|s| parse_kernel(s, &format!("{path}.jump.repulsion")))
                    .transpose()?,
                placement: j.placement,
            }),
        };
        let m = ModelConfig { coalescence, jump };
        m.validate().map_err(|_| {
            Error::config(path, "at least one of coalescence or jump must be present")
        })?;
        Ok(m)
    }
}

// Registry ------------------------------------------------------------------

fn kern(s: &str) -> Kernel {
    s.parse().expect("registry kernel strings are valid")
}

struct Builder {
    s: Scenario,
}

impl Builder {
    fn new(id: &str, initial: InitialCondition, model: ModelConfig, x: (f64, f64), times: &[f64]) -> Self {
        let boundary = initial.natural_boundary();
        let t_end = times.iter().cloned().fold(0.0, f64::max);
        Self {
            s: Scenario {
                id: id.to_string(),
                initial,
                model,
                domain: Domain {
                    x_min: x.0,
                    x_max: x.1,
                    dx: DEFAULT_DX,
                    boundary,
                },
                time: TimeConfig::new(DEFAULT_DT, t_end, times.to_vec()),
                window: None,
                variants: Vec::new(),
                checks: Vec::new(),
                output_dir: Some(format!("out/{id}")),
            },
        }
    }

    fn window(mut self, lo: f64, hi: f64) -> Self {
        self.s.window = Some((lo, hi));
        self
    }

    fn variant(mut self, label: &str, model: ModelConfig, snapshots: &[f64]) -> Self {
        self.s.variants.push(Variant {
            label: label.to_string(),
            model,
            snapshots: snapshots.to_vec(),
        });
        self
    }

    fn checks(mut self, checks: &[&str]) -> Self {
        self.s.checks = checks.iter().map(|c| c.to_string()).collect();
        self
    }

    fn build(self) -> Scenario {
        self.s
    }
}

/// One scenario per simulation figure, parameterized from the captions.
pub fn registry() -> Vec<Scenario> {
    use InitialCondition::*;
    let b11_periodic = PeriodicKernel {
        kernel: kern("B:1,1"),
        period: 40.0,
    };
    let b41_periodic = PeriodicKernel {
        kernel: kern("B:4,1"),
        period: 10.0,
    };
    let step_left = HeavisideLeft { level: 1.0 };
    let step_right = HeavisideRight { level: 1.0 };
    let repulsive = ModelConfig::free_jumps(kern("G:1,1,2")).with_jumps(kern("G:1,1,2"), Some(kern("G:10,1,4")));
    let shifted_coal = ModelConfig::midpoint(kern("B:1,0.8,8"));

    vec![
        Builder::new(
            "free-jumps-periodic",
            b11_periodic,
            ModelConfig::free_jumps(kern("G:1,1")),
            (-20.0, 20.0),
            &[0.0, 2.0, 16.0, 80.0],
        )
        .window(-10.0, 10.0)
        .variant("G:1,1", ModelConfig::free_jumps(kern("G:1,1")), &[20.0])
        .variant("G:3,1", ModelConfig::free_jumps(kern("G:3,1")), &[20.0])
        .variant("G:1,3", ModelConfig::free_jumps(kern("G:1,3")), &[20.0])
        .variant("G:1,1,3", ModelConfig::free_jumps(kern("G:1,1,3")), &[20.0])
        .checks(&["number_conserved", "variance_decreasing", "flattens_by_T80", "kernel_ordering_T20"])
        .build(),
        Builder::new(
            "free-jumps-step",
            step_left.clone(),
            ModelConfig::free_jumps(kern("G:1,1")),
            (-10.0, 10.0),
            &[0.0, 128.0, 640.0, 2560.0],
        )
        .window(-10.0, 10.0)
        .checks(&["midpoint_value_half", "monotone_profile"])
        .build(),
        Builder::new(
            "repulsive-jumps",
            step_left.clone(),
            repulsive,
            (-40.0, 40.0),
            &[0.0, 512.0, 1664.0, 2560.0],
        )
        .window(-40.0, 40.0)
        .checks(&["pattern_maxima_T2560", "enlarged_before_T512"])
        .build(),
        Builder::new(
            "pure-coalescence-shifted",
            b41_periodic.clone(),
            shifted_coal,
            (-20.0, 20.0),
            &[0.0, 2.0, 320.0, 1280.0],
        )
        .window(-7.0, 12.0)
        .variant("h=6", ModelConfig::midpoint(kern("B:1,0.8,6")), &[0.0, 10.0])
        .checks(&["near_stationary_320_1280", "peaks_between_steps", "h6_invariant"])
        .build(),
        Builder::new(
            "mass-coalescence",
            step_right.clone(),
            ModelConfig::log_mass(kern("G:0.02,0.2")),
            (-1.0, 4.0),
            &[0.0, 64.0, 192.0, 1280.0],
        )
        .window(-1.0, 4.0)
        .variant("B:0.02,0.2", ModelConfig::log_mass(kern("B:0.02,0.2")), &[0.0, 64.0, 192.0, 1280.0])
        .checks(&["mass_conserved"])
        .build(),
        Builder::new(
            "jumps-coalescence-repulsive",
            step_left,
            ModelConfig::midpoint(kern("G:0.05,1,2")).with_jumps(kern("G:1,1,2"), Some(kern("G:10,1,4"))),
            (-70.0, 10.0),
            &[0.0, 8.0, 32.0, 192.0, 256.0, 320.0],
        )
        .window(-70.0, 10.0)
        .checks(&["faster_heterogeneity_T192", "flattening_T320"])
        .build(),
        Builder::new(
            "coalescence-free-jumps",
            b41_periodic,
            ModelConfig::midpoint(kern("B:1,0.8,8")).with_jumps(kern("G:0.2,1"), None),
            (-20.0, 20.0),
            &[0.0, 2.0, 10.0, 30.0],
        )
        .window(-7.0, 12.0)
        .variant(
            "J=B:0.2,1",
            ModelConfig::midpoint(kern("B:1,0.8,8")).with_jumps(kern("B:0.2,1"), None),
            &[0.0, 2.0, 10.0, 30.0],
        )
        .checks(&["decay_towards_zero_T30"])
        .build(),
        Builder::new(
            "mass-coalescence-jumps",
            step_right,
            ModelConfig::log_mass(kern("G:0.02,0.2")).with_jumps(kern("G:0.01,0.2"), None),
            (-1.0, 4.0),
            &[0.0, 64.0, 192.0, 1280.0],
        )
        .window(-1.0, 4.0)
        .build(),
    ]
}

pub fn find(id: &str) -> Result<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))
}
