//! Gaussian and step interaction kernels, optionally shifted.
//!
//! A kernel is `G_{λ,σ}(x) = λ/(σ√(2π)) · exp(−x²/(2σ²))` or
//! `B_{λ,σ}(x) = λ/(2σ) · 1{|x| ≤ σ}`. The shifted version with `h > 0` is
//! the symmetrized translation `(f(x − h) + f(x + h)) / 2`, which keeps the
//! kernel even and its integral equal to `λ`.
//!
//! Kernels appear in configuration files as `"G:λ,σ"`, `"B:λ,σ"`,
//! `"G:λ,σ,h"` or `"B:λ,σ,h"`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Tail tolerance used whenever a Gaussian kernel is truncated for a
/// finite convolution.
pub const CONVOLUTION_TAIL_TOL: f64 = 1e-12;

/// Relative tolerance for deciding that a grid point sits on a step edge.
const EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    Gaussian,
    Step,
}

/// A non-negative even kernel with total integral `strength`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    shape: KernelShape,
    strength: f64,
    range: f64,
    shift: f64,
}

impl Kernel {
    pub fn new(shape: KernelShape, strength: f64, range: f64, shift: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite();
        if !(ok(strength) && strength > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "strength must be positive and finite, got {strength}"
            )));
        }
        if !(ok(range) && range > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "range must be positive and finite, got {range}"
            )));
        }
        if !(ok(shift) && shift >= 0.0) {
            return Err(Error::InvalidKernel(format!(
                "shift must be non-negative and finite, got {shift}"
            )));
        }
        Ok(Self {
            shape,
            strength,
            range,
            shift,
        })
    }

    /// `G_{λ,σ}`.
    pub fn gaussian(strength: f64, range: f64) -> Result<Self> {
        Self::new(KernelShape::Gaussian, strength, range, 0.0)
    }

    /// `B_{λ,σ}`.
    pub fn step(strength: f64, range: f64) -> Result<Self> {
        Self::new(KernelShape::Step, strength, range, 0.0)
    }

    /// Returns the symmetrized translate `S_h(self)`. Shifts do not compose:
    /// the result carries shift `h` regardless of the current shift.
    pub fn shifted(self, h: f64) -> Result<Self> {
        Self::new(self.shape, self.strength, self.range, h)
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn base(&self, x: f64) -> f64 {
        match self.shape {
            KernelShape::Gaussian => {
                let s = self.range;
                self.strength / (s * (2.0 * PI).sqrt()) * (-(x * x) / (2.0 * s * s)).exp()
            }
            KernelShape::Step => {
                if x.abs() <= self.range {
                    self.strength / (2.0 * self.range)
                } else {
                    0.0
                }
            }
        }
    }

    /// Step profile with half height exactly at the edges; identical to
    /// [`Kernel::base`] for Gaussians.
    fn base_on_grid(&self, x: f64) -> f64 {
        match self.shape {
            KernelShape::Gaussian => self.base(x),
            KernelShape::Step => {
                let d = x.abs() - self.range;
                if d.abs() <= EDGE_TOL * self.range.max(1.0) {
                    0.5 * self.strength / (2.0 * self.range)
                } else if d < 0.0 {
                    self.strength / (2.0 * self.range)
                } else {
                    0.0
                }
            }
        }
    }

    fn symmetrize(&self, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        if self.shift == 0.0 {
            f(x)
        } else {
            0.5 * (f(x - self.shift) + f(x + self.shift))
        }
    }

    /// Pointwise value `K(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        // |x| makes evenness exact in floating point as well.
        let x = x.abs();
        self.symmetrize(x, |y| self.base(y))
    }

    /// Value used when the kernel is sampled on a uniform grid: step edges
    /// that coincide with a node get half the step height, so the
    /// trapezoid sum of the samples reproduces the exact integral.
    pub fn eval_on_grid(&self, x: f64) -> f64 {
        let x = x.abs();
        self.symmetrize(x, |y| self.base_on_grid(y))
    }

    /// `∫ K(x) dx`. Always equal to the strength.
    pub fn total_integral(&self) -> f64 {
        self.strength
    }

    /// Radius `R` with `∫_{|x|>R} K ≤ tail_tol · λ`.
    ///
    /// Step kernels have compact support and return `h + σ`. Gaussians
    /// return `h + σ·z` with `z` the two-sided normal tail quantile.
    pub fn support_radius(&self, tail_tol: f64) -> f64 {
        match self.shape {
            KernelShape::Step => self.shift + self.range,
            KernelShape::Gaussian => {
                let tol = tail_tol.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                // P(|Z| > z) = erfc(z/√2)
                let z = std::f64::consts::SQRT_2 * erfc_inv(tol);
                self.shift + self.range * z
            }
        }
    }

    /// Support radius used by every convolution loop.
    pub fn convolution_radius(&self) -> f64 {
        self.support_radius(CONVOLUTION_TAIL_TOL)
    }

    /// Grid samples `K(j·step)·dx` for `j = −J..=J`, where `J` covers the
    /// convolution radius. `step` is the argument spacing and `dx` the
    /// quadrature weight; they differ for the midpoint coalescence gain.
    pub fn taps(&self, step: f64, dx: f64) -> Taps {
        let reach = self.convolution_radius() / step;
        let half = (reach * (1.0 + 1e-12)).floor() as usize;
        let weights = (0..=2 * half)
            .map(|k| {
                let j = k as f64 - half as f64;
                self.eval_on_grid(j * step) * dx
            })
            .collect();
        Taps { half, weights }
    }
}

/// Symmetric discrete kernel weights indexed by offset `−half..=half`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taps {
    half: usize,
    weights: Vec<f64>,
}

impl Taps {
    pub fn half_width(&self) -> usize {
        self.half
    }

    /// Weights in offset order, `weights()[half]` is offset 0.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.shape {
            KernelShape::Gaussian => "G",
            KernelShape::Step => "B",
        };
        if self.shift == 0.0 {
            write!(f, "{tag}:{},{}", self.strength, self.range)
        } else {
            write!(f, "{tag}:{},{},{}", self.strength, self.range, self.shift)
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: &str| Error::KernelParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (tag, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| parse_err("expected '<G|B>:λ,σ[,h]'"))?;
        let shape = match tag.trim() {
            "G" => KernelShape::Gaussian,
            "B" => KernelShape::Step,
            _ => return Err(parse_err("shape tag must be 'G' or 'B'")),
        };
        let nums = rest
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err("parameters must be decimal numbers"))?;
        let (strength, range, shift) = match nums.as_slice() {
            [l, s] => (*l, *s, 0.0),
            [l, s, h] => (*l, *s, *h),
            _ => return Err(parse_err("expected two or three parameters")),
        };
        Kernel::new(shape, strength, range, shift).map_err(|e| parse_err(&e.to_string()))
    }
}

impl Serialize for Kernel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Kernel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
