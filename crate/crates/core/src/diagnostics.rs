//! Observables of a density field and the per-step diagnostics record.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::integrator::SimState;

/// Relative prominence a local maximum needs to be counted.
pub const PROMINENCE_FRACTION: f64 = 0.05;

/// `∫ ρ dx`.
pub fn particle_number(f: &DensityField) -> f64 {
    f.quad_integral(None)
}

/// `∫ e^x ρ(x) dx`, the total mass when `x` is log-mass.
pub fn mass_functional(f: &DensityField) -> f64 {
    f.quad_integral(Some(&|x: f64| x.exp()))
}

/// Population variance of the node values.
pub fn spatial_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Sup-norm distance between two snapshots on the same grid.
pub fn stationarity_gap(a: &DensityField, b: &DensityField) -> Result<f64> {
    let (ga, gb) = (a.grid(), b.grid());
    if ga.len() != gb.len() || !ga.same_lattice(gb) || (ga.x_min() - gb.x_min()).abs() > 1e-9 * ga.dx()
    {
        return Err(Error::GridMismatch);
    }
    Ok(a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heterogeneity {
    pub variance: f64,
    pub maxima: usize,
    pub mean: f64,
}

impl Heterogeneity {
    /// Standard deviation relative to the mean; zero for an empty window.
    pub fn relative_spread(&self) -> f64 {
        if self.mean > 0.0 {
            self.variance.sqrt() / self.mean
        } else {
            0.0
        }
    }
}

/// Variance and prominent local-maximum count of the nodes in `[lo, hi]`.
pub fn heterogeneity_profile(f: &DensityField, lo: f64, hi: f64) -> Result<Heterogeneity> {
    let g = f.grid();
    let eps = 1e-9 * g.dx();
    let values: Vec<f64> = g
        .nodes()
        .zip(f.values())
        .filter(|(x, _)| *x >= lo - eps && *x <= hi + eps)
        .map(|(_, v)| *v)
        .collect();
    if values.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(Heterogeneity {
        variance: spatial_variance(&values),
        maxima: count_prominent_maxima(&values, PROMINENCE_FRACTION),
        mean,
    })
}

/// Counts strict local maxima (plateaus count once) whose topographic
/// prominence is at least `fraction·(max − min)` of the series.
pub fn count_prominent_maxima(values: &[f64], fraction: f64) -> usize {
    let n = values.len();
    if n < 3 {
        return 0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let threshold = fraction * (hi - lo);
    if hi - lo <= 0.0 {
        return 0;
    }
    let mut count = 0;
    let mut i = 1;
    while i < n - 1 {
        if values[i] > values[i - 1] {
            // Walk across a plateau.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let peak = values[i];
                let left_base = values[..i]
                    .iter()
                    .rev()
                    .take_while(|v| **v <= peak)
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                let right_base = values[j + 1..]
                    .iter()
                    .take_while(|v| **v <= peak)
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                let prominence = peak - left_base.max(right_base);
                if prominence >= threshold && prominence > 0.0 {
                    count += 1;
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub number: f64,
    pub mass: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub clamped: usize,
    pub domain_len: f64,
}

impl DiagnosticsRow {
    pub fn observe(s: &SimState) -> Self {
        let f = &s.field;
        let v = f.values();
        let (min, max) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        let g = f.grid();
        let domain_len = if f.boundary().is_periodic() {
            g.period()
        } else {
            g.length()
        };
        Self {
            t: s.t,
            number: particle_number(f),
            mass: mass_functional(f),
            variance: spatial_variance(v),
            min,
            max,
            clamped: s.last_clamped,
            domain_len,
        }
    }
}

/// Time series of diagnostics rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsRecord {
    rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsRecord {
    pub const HEADER: &'static str = "t,N,M,var,min,max,clamped,domain_len";

    pub fn push(&mut self, row: DiagnosticsRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.t < row.t));
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&DiagnosticsRow> {
        self.rows.last()
    }

    pub fn total_clamped(&self) -> usize {
        self.rows.iter().map(|r| r.clamped).sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::with_capacity(64 * (self.rows.len() + 1));
        buf.push_str(Self::HEADER);
        buf.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                buf,
                "{},{},{},{},{},{},{},{}",
                r.t, r.number, r.mass, r.variance, r.min, r.max, r.clamped, r.domain_len
            );
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryRegime, Grid};
    use crate::kernels::Kernel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn field(x0: f64, x1: f64, dx: f64, f: impl Fn(f64) -> f64) -> DensityField {
        let g = Grid::closed(x0, x1, dx).unwrap();
        DensityField::new(g, g.nodes().map(f).collect(), BoundaryRegime::dirichlet()).unwrap()
    }

    #[test]
    fn particle_number_examples() {
        let b: Kernel = "B:4,1".parse().unwrap();
        assert!((particle_number(&field(-5.0, 5.0, 0.025, |x| b.eval_on_grid(x))) - 4.0).abs() < 1e-10);
        assert_relative_eq!(particle_number(&field(-20.0, 20.0, 0.025, |_| 0.5)), 20.0, max_relative = 1e-12);
        assert_eq!(particle_number(&field(-1.0, 1.0, 0.1, |_| 0.0)), 0.0);
    }

    #[test]
    fn mass_functional_examples() {
        let ind = |x: f64| {
            if x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9 {
                0.5
            } else if (0.0..=1.0).contains(&x) {
                1.0
            } else {
                0.0
            }
        };
        let m = mass_functional(&field(-1.0, 2.0, 0.01, ind));
        assert!((m - (1f64.exp() - 1.0)).abs() < 1e-4, "{m}");
        assert_eq!(mass_functional(&field(-1.0, 1.0, 0.1, |_| 0.0)), 0.0);

        let bump = |c: f64| move |x: f64| (-(x - c) * (x - c) * 4.0).exp();
        let m0 = mass_functional(&field(-5.0, 8.0, 0.01, bump(0.0)));
        let m1 = mass_functional(&field(-5.0, 8.0, 0.01, bump(1.5)));
        assert_relative_eq!(m1 / m0, 1.5f64.exp(), max_relative = 1e-9);
    }

    #[test]
    fn stationarity_gap_examples() {
        let a = field(-1.0, 1.0, 0.1, |x| x * x);
        assert_eq!(stationarity_gap(&a, &a).unwrap(), 0.0);
        let mut vals = a.values().to_vec();
        vals[4] += 1e-3;
        let b = DensityField::new(*a.grid(), vals, BoundaryRegime::dirichlet()).unwrap();
        assert!((stationarity_gap(&a, &b).unwrap() - 1e-3).abs() < 1e-15);
        let c = field(-2.0, 1.0, 0.1, |_| 0.0);
        assert!(matches!(stationarity_gap(&a, &c), Err(Error::GridMismatch)));
    }

    #[test]
    fn heterogeneity_examples() {
        let c = field(-10.0, 10.0, 0.1, |_| 0.3);
        let h = heterogeneity_profile(&c, -5.0, 5.0).unwrap();
        assert!(h.variance < 1e-28);
        assert_eq!(h.maxima, 0);

        let bump = field(-10.0, 10.0, 0.1, |x| (-x * x).exp());
        let h = heterogeneity_profile(&bump, -5.0, 5.0).unwrap();
        assert!(h.variance > 0.0);
        assert_eq!(h.maxima, 1);

        let b: Kernel = "B:1,1".parse().unwrap();
        let step = field(-10.0, 10.0, 0.1, |x| b.eval_on_grid(x));
        assert_eq!(heterogeneity_profile(&step, -5.0, 5.0).unwrap().maxima, 1);

        assert!(matches!(
            heterogeneity_profile(&c, 30.0, 40.0),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn small_ripples_are_not_counted() {
        let v: Vec<f64> = (0..400)
            .map(|i| {
                let x = i as f64 * 0.05;
                (x * 0.5).sin() + 0.01 * (x * 40.0).sin()
            })
            .collect();
        // sin(x/2) over [0, 20] has maxima at π and 5π.
        assert_eq!(count_prominent_maxima(&v, PROMINENCE_FRACTION), 2);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        DiagnosticsRecord::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,N,M,var,min,max,clamped,domain_len\n");
    }

    proptest! {
        #[test]
        fn functionals_are_linear(
            a in prop::collection::vec(0.0f64..2.0, 41),
            b in prop::collection::vec(0.0f64..2.0, 41),
            s in 0.0f64..3.0,
        ) {
            let g = Grid::closed(-2.0, 2.0, 0.1).unwrap();
            let mk = |v: Vec<f64>| DensityField::new(g, v, BoundaryRegime::dirichlet()).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            let (fa, fb, fs) = (mk(a), mk(b), mk(sum));
            let n = particle_number(&fa) + s * particle_number(&fb);
            prop_assert!((particle_number(&fs) - n).abs() < 1e-12 * n.max(1.0));
            let m = mass_functional(&fa) + s * mass_functional(&fb);
            prop_assert!((mass_functional(&fs) - m).abs() < 1e-12 * m.max(1.0));
        }

        #[test]
        fn stationarity_gap_is_a_metric(
            a in prop::collection::vec(0.0f64..2.0, 21),
            b in prop::collection::vec(0.0f64..2.0, 21),
            c in prop::collection::vec(0.0f64..2.0, 21),
        ) {
            let g = Grid::closed(0.0, 2.0, 0.1).unwrap();
            let mk = |v: Vec<f64>| DensityField::new(g, v, BoundaryRegime::dirichlet()).unwrap();
            let (fa, fb, fc) = (mk(a), mk(b), mk(c));
            let ab = stationarity_gap(&fa, &fb).unwrap();
            prop_assert_eq!(ab, stationarity_gap(&fb, &fa).unwrap());
            let ac = stationarity_gap(&fa, &fc).unwrap();
            let cb = stationarity_gap(&fc, &fb).unwrap();
            prop_assert!(ab <= ac + cb + 1e-15);
        }
    }
}
