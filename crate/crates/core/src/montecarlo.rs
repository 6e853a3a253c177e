//! Event-driven stochastic simulation of the particle system on a torus.
//!
//! Pairs `{x, y}` coalesce at rate `a1(d(x, y))`, with `d` the torus
//! distance, into the midpoint or into `ln(e^x + e^y)` computed along the
//! shorter arc. Each particle proposes jumps at rate `⟨c2⟩` with
//! displacement law `c2 / ⟨c2⟩`; a proposal to `y` is accepted with
//! probability `Π_{u ≠ x} exp(−φ(y − u))`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelShape};
use crate::operators::{CoalescenceForm, ModelConfig};

/// Points of a finite configuration on the torus `[0, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    positions: Vec<f64>,
    period: f64,
}

impl Configuration {
    pub fn new(period: f64, positions: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::config("period", "must be positive"));
        }
        let positions = positions.into_iter().map(|x| x.rem_euclid(period)).collect();
        Ok(Self { positions, period })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Signed shortest displacement from `a` to `b`.
    fn displacement(&self, a: f64, b: f64) -> f64 {
        let p = self.period;
        let d = (b - a).rem_euclid(p);
        if d > 0.5 * p {
            d - p
        } else {
            d
        }
    }

    fn wrap(&self, x: f64) -> f64 {
        let y = x.rem_euclid(self.period);
        if y >= self.period {
            0.0
        } else {
            y
        }
    }
}

/// Rate bound used for thinning: the largest of `rho0` over `samples`
/// evenly spaced points of `[0, period)` and their midpoints.
fn intensity_bound(rho0: &dyn Fn(f64) -> f64, period: f64) -> f64 {
    let samples = 8192;
    (0..2 * samples)
        .map(|i| rho0(period * i as f64 / (2 * samples) as f64))
        .fold(0.0, f64::max)
}

/// Poisson configuration with intensity `rho0` on `[0, period)`, drawn by
/// thinning a homogeneous process at rate `sup rho0`.
pub fn sample_poisson_initial(rho0: &dyn Fn(f64) -> f64, period: f64, seed: u64) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_poisson_with(rho0, period, &mut rng)
}

fn sample_poisson_with<R: Rng>(rho0: &dyn Fn(f64) -> f64, period: f64, rng: &mut R) -> Result<Configuration> {
    let bound = intensity_bound(rho0, period);
    let mut pts = Vec::new();
    if bound > 0.0 {
        let count = rand_distr::Poisson::new(bound * period)
            .map_err(|e| Error::config("rho0", e.to_string()))?
            .sample(rng) as usize;
        for _ in 0..count {
            let x = rng.gen::<f64>() * period;
            if rng.gen::<f64>() * bound < rho0(x) {
                pts.push(x);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    Configuration::new(period, pts)
}

/// Draws a displacement from the normalized law `K / ⟨K⟩`.
pub fn sample_displacement<R: Rng>(k: &Kernel, rng: &mut R) -> f64 {
    let core = match k.shape() {
        KernelShape::Gaussian => Normal::new(0.0, k.range()).expect("σ > 0").sample(rng),
        KernelShape::Step => rng.gen_range(-k.range()..=k.range()),
    };
    let shift = if k.shift() > 0.0 && rng.gen::<bool>() {
        -k.shift()
    } else {
        k.shift()
    };
    core + shift
}

/// What happened in one event of the embedded chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Coalescence { x: f64, y: f64, merged: f64 },
    Jump { from: f64, to: f64 },
    RejectedJump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub waiting: f64,
    pub event: Event,
}

/// Event counts and invariant checks accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InvariantCounters {
    pub coalescences: u64,
    pub jumps: u64,
    pub rejected_jumps: u64,
    /// Log-sum merges checked for exact `Σ e^x` conservation.
    pub mass_checks: u64,
    pub violations: u64,
}

impl InvariantCounters {
    pub fn merge(mut self, o: Self) -> Self {
        self.coalescences += o.coalescences;
        self.jumps += o.jumps;
        self.rejected_jumps += o.rejected_jumps;
        self.mass_checks += o.mass_checks;
        self.violations += o.violations;
        self
    }
}

struct Rates {
    pairs: Vec<(usize, usize, f64)>,
    coalescence: f64,
    jump_bound: f64,
}

impl Rates {
    fn total(&self) -> f64 {
        self.coalescence + self.jump_bound
    }
}

fn rates(c: &Configuration, m: &ModelConfig) -> Rates {
    let mut pairs = Vec::new();
    let mut coalescence = 0.0;
    if let Some(co) = m.coalescence {
        let p = c.positions();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let r = co.kernel.eval(c.displacement(p[i], p[j]));
                if r > 0.0 {
                    coalescence += r;
                    pairs.push((i, j, r));
                }
            }
        }
    }
    let jump_bound = m
        .jump
        .map_or(0.0, |j| c.len() as f64 * j.kernel.total_integral());
    Rates {
        pairs,
        coalescence,
        jump_bound,
    }
}

fn apply_event<R: Rng>(
    c: &mut Configuration,
    m: &ModelConfig,
    rates: &Rates,
    rng: &mut R,
    counters: &mut InvariantCounters,
) -> Event {
    let before = c.len();
    let u = rng.gen::<f64>() * rates.total();
    if u < rates.coalescence {
        let mut acc = 0.0;
        let target = u;
        let &(i, j, _) = rates
            .pairs
            .iter()
            .find(|(_, _, r)| {
                acc += r;
                acc > target
            })
            .unwrap_or_else(|| rates.pairs.last().expect("positive rate has a pair"));
        let x = c.positions[i];
        let y = x + c.displacement(x, c.positions[j]);
        let form = m.coalescence.expect("coalescence rate implies a kernel").form;
        let raw = match form {
            CoalescenceForm::Midpoint => 0.5 * (x + y),
            CoalescenceForm::LogMass => x.max(y) + (-(x - y).abs()).exp().ln_1p(),
        };
        let merged = c.wrap(raw);
        let unwrapped = y >= 0.0 && y < c.period && raw < c.period;
        if form == CoalescenceForm::LogMass && unwrapped {
            counters.mass_checks += 1;
            let lhs = x.exp() + y.exp();
            if (merged.exp() - lhs).abs() > 1e-12 * lhs {
                counters.violations += 1;
            }
        }
        c.positions.swap_remove(j);
        c.positions.swap_remove(i);
        c.positions.push(merged);
        counters.coalescences += 1;
        if c.len() + 1 != before {
            counters.violations += 1;
        }
        Event::Coalescence {
            x,
            y: c.wrap(y),
            merged,
        }
    } else {
        let jump = m.jump.expect("jump rate implies a kernel");
        let k = rng.gen_range(0..c.len());
        let from = c.positions[k];
        let to = c.wrap(from + sample_displacement(&jump.kernel, rng));
        let accept = match jump.repulsion {
            None => 1.0,
            Some(phi) => {
                let energy: f64 = c
                    .positions
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, u)| phi.eval(c.displacement(*u, to)))
                    .sum();
                (-energy).exp()
            }
        };
        let event = if accept >= 1.0 || rng.gen::<f64>() < accept {
            c.positions[k] = to;
            counters.jumps += 1;
            Event::Jump { from, to }
        } else {
            counters.rejected_jumps += 1;
            Event::RejectedJump
        };
        if c.len() != before {
            counters.violations += 1;
        }
        event
    }
}

/// Total event rate `Σ_pairs a1 + n·⟨c2⟩` of the configuration.
pub fn total_rate(c: &Configuration, m: &ModelConfig) -> f64 {
    rates(c, m).total()
}

/// One exact event: exponential waiting time at the total bound rate, then
/// a coalescence or a (possibly rejected) jump proposal. `None` when no
/// event can ever happen.
pub fn gillespie_step<R: Rng>(
    c: &mut Configuration,
    m: &ModelConfig,
    rng: &mut R,
    counters: &mut InvariantCounters,
) -> Option<StepOutcome> {
    let r = rates(c, m);
    if r.total() <= 0.0 {
        return None;
    }
    let waiting = Exp::new(r.total()).expect("positive rate").sample(rng);
    let event = apply_event(c, m, &r, rng, counters);
    Some(StepOutcome { waiting, event })
}

/// Advances `c` to time `t_end`.
pub fn simulate<R: Rng>(
    c: &mut Configuration,
    m: &ModelConfig,
    t_end: f64,
    rng: &mut R,
    counters: &mut InvariantCounters,
) {
    let mut t = 0.0;
    loop {
        let r = rates(c, m);
        if r.total() <= 0.0 {
            return;
        }
        t += Exp::new(r.total()).expect("positive rate").sample(rng);
        if t > t_end {
            return;
        }
        apply_event(c, m, &r, rng, counters);
    }
}

/// Binned ensemble mean of the density.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDensity {
    pub bin_centers: Vec<f64>,
    pub mean_density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replicas: usize,
    pub counters: InvariantCounters,
}

impl EnsembleDensity {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_center,mean_density,stderr")?;
        for ((x, m), s) in self.bin_centers.iter().zip(&self.mean_density).zip(&self.stderr) {
            writeln!(w, "{x},{m},{s}")?;
        }
        Ok(())
    }

    /// Mean over all bins, i.e. the ensemble mean of `count / period`.
    pub fn overall_mean(&self) -> f64 {
        self.mean_density.iter().sum::<f64>() / self.mean_density.len() as f64
    }
}

/// Runs `replicas` independent copies from Poisson(`rho0`) to time `t` and
/// histograms their positions. Replica `i` uses stream `i` of a ChaCha
/// generator seeded with `seed`, so the result depends only on the inputs.
pub fn ensemble_density(
    m: &ModelConfig,
    rho0: &(dyn Fn(f64) -> f64 + Sync),
    period: f64,
    t: f64,
    replicas: usize,
    bins: usize,
    seed: u64,
) -> Result<EnsembleDensity> {
    if replicas == 0 {
        return Err(Error::config("replicas", "must be at least 1"));
    }
    if bins == 0 {
        return Err(Error::config("bins", "must be at least 1"));
    }
    let width = period / bins as f64;
    let per_replica: Vec<(Vec<f64>, InvariantCounters)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut counters = InvariantCounters::default();
            let mut c = sample_poisson_with(rho0, period, &mut rng)?;
            simulate(&mut c, m, t, &mut rng, &mut counters);
            let mut hist = vec![0.0; bins];
            for x in c.positions() {
                let b = ((x / width) as usize).min(bins - 1);
                hist[b] += 1.0 / width;
            }
            Ok((hist, counters))
        })
        .collect::<Result<_>>()?;

    let r = replicas as f64;
    let mut mean = vec![0.0; bins];
    let mut counters = InvariantCounters::default();
    for (h, c) in &per_replica {
        for (m, v) in mean.iter_mut().zip(h) {
            *m += v / r;
        }
        counters = counters.merge(*c);
    }
    let stderr = (0..bins)
        .map(|b| {
            if replicas < 2 {
                return f64::NAN;
            }
            let ss: f64 = per_replica.iter().map(|(h, _)| (h[b] - mean[b]).powi(2)).sum();
            (ss / (r - 1.0)).sqrt() / r.sqrt()
        })
        .collect();
    Ok(EnsembleDensity {
        bin_centers: (0..bins).map(|b| (b as f64 + 0.5) * width).collect(),
        mean_density: mean,
        stderr,
        replicas,
        counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal as NormalDist};

    fn k(s: &str) -> Kernel {
        s.parse().unwrap()
    }

    #[test]
    fn poisson_mean_count() {
        let reps = 2000;
        let total: usize = (0..reps)
            .map(|s| sample_poisson_initial(&|_| 0.5, 20.0, s).unwrap().len())
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 10.0).abs() < 3.0 * (10.0f64).sqrt() / (reps as f64).sqrt(), "{mean}");
    }

    #[test]
    fn poisson_thinning_respects_support() {
        assert!(sample_poisson_initial(&|_| 0.0, 20.0, 1).unwrap().is_empty());
        for seed in 0..50 {
            let c = sample_poisson_initial(&|x| if x <= 10.0 { 1.0 } else { 0.0 }, 20.0, seed).unwrap();
            assert!(c.positions().iter().all(|x| *x <= 10.0));
        }
    }

    #[test]
    fn distant_pair_never_coalesces() {
        let mut c = Configuration::new(20.0, vec![1.0, 5.0]).unwrap();
        let m = ModelConfig::midpoint(k("B:1,1"));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut n = InvariantCounters::default();
        assert!(gillespie_step(&mut c, &m, &mut rng, &mut n).is_none());
    }

    #[test]
    fn pair_hazard_is_kernel_value() {
        let c = Configuration::new(20.0, vec![3.0, 3.5]).unwrap();
        assert_eq!(total_rate(&c, &ModelConfig::midpoint(k("B:1,1"))), 0.5);
        // Across the seam the torus distance is used.
        let c = Configuration::new(20.0, vec![0.1, 19.7]).unwrap();
        assert!((total_rate(&c, &ModelConfig::midpoint(k("B:1,1"))) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn midpoint_merge_follows_shorter_arc() {
        let mut c = Configuration::new(20.0, vec![0.2, 19.8]).unwrap();
        let m = ModelConfig::midpoint(k("B:1,1"));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut n = InvariantCounters::default();
        let out = gillespie_step(&mut c, &m, &mut rng, &mut n).unwrap();
        let Event::Coalescence { merged, .. } = out.event else {
            panic!("{out:?}")
        };
        assert!(merged.abs() < 1e-12 || (merged - 20.0).abs() < 1e-12);
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn single_particle_jumps_are_always_accepted() {
        let mut c = Configuration::new(50.0, vec![25.0]).unwrap();
        let m = ModelConfig::free_jumps(k("G:1,1")).with_jumps(k("G:1,1"), Some(k("G:10,1,4")));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut n = InvariantCounters::default();
        for _ in 0..1000 {
            gillespie_step(&mut c, &m, &mut rng, &mut n).unwrap();
        }
        assert_eq!((n.jumps, n.rejected_jumps), (1000, 0));
    }

    #[test]
    fn repulsion_acceptance_matches_product() {
        // Two particles; proposals land near the neighbour and are thinned
        // by exp(−φ(y − u)). Acceptance frequency over many proposals
        // matches the expectation computed by quadrature.
        let phi = k("G:2,1");
        let c2 = k("B:1,1");
        let m = ModelConfig::free_jumps(c2).with_jumps(c2, Some(phi));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut n = InvariantCounters::default();
        let trials = 40_000;
        for _ in 0..trials {
            let mut c = Configuration::new(100.0, vec![50.0, 50.5]).unwrap();
            gillespie_step(&mut c, &m, &mut rng, &mut n).unwrap();
        }
        // Mover 0 at 50 lands in [49, 51], distance to 50.5 is s − 0.5.
        let steps = 20_000;
        let mut expected = 0.0;
        for i in 0..steps {
            let s = -1.0 + 2.0 * (i as f64 + 0.5) / steps as f64;
            expected += (-phi.eval(s - 0.5)).exp() / steps as f64;
        }
        let freq = n.jumps as f64 / trials as f64;
        let sd = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!((freq - expected).abs() < 4.0 * sd, "{freq} vs {expected}");
    }

    #[test]
    fn displacement_law_passes_chi_square() {
        let c2 = k("G:1,1,2");
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let bins = 24;
        let (lo, hi) = (-6.0, 6.0);
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins + 2];
        let events = 100_000;
        for _ in 0..events {
            let d = sample_displacement(&c2, &mut rng);
            let b = if d < lo {
                bins
            } else if d >= hi {
                bins + 1
            } else {
                ((d - lo) / w) as usize
            };
            counts[b] += 1;
        }
        let nd = NormalDist::new(0.0, 1.0).unwrap();
        let cdf = |x: f64| 0.5 * (nd.cdf(x - 2.0) + nd.cdf(x + 2.0));
        let mut probs: Vec<f64> = (0..bins)
            .map(|b| cdf(lo + (b + 1) as f64 * w) - cdf(lo + b as f64 * w))
            .collect();
        probs.push(cdf(lo));
        probs.push(1.0 - cdf(hi));
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(o, p)| {
                let e = p * events as f64;
                (*o as f64 - e).powi(2) / e
            })
            .sum();
        let crit = ChiSquared::new((bins + 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "chi2 {chi2} ≥ {crit}");
    }

    #[test]
    fn jump_only_runs_conserve_cardinality() {
        let m = ModelConfig::free_jumps(k("G:1,1"));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = sample_poisson_with(&|_| 1.0, 20.0, &mut rng).unwrap();
        let n0 = c.len();
        let mut n = InvariantCounters::default();
        simulate(&mut c, &m, 5.0, &mut rng, &mut n);
        assert_eq!(c.len(), n0);
        assert!(n.jumps > 0);
        assert_eq!(n.violations, 0);
    }

    #[test]
    fn log_sum_merges_conserve_exponential_mass() {
        let m = ModelConfig::log_mass(k("G:1,0.5"));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut n = InvariantCounters::default();
        for _ in 0..20 {
            let mut c = sample_poisson_with(&|x| if (90.0..100.0).contains(&x) { 2.0 } else { 0.0 }, 200.0, &mut rng)
                .unwrap();
            let before: f64 = c.positions().iter().map(|x| (x - 100.0).exp()).sum();
            simulate(&mut c, &m, 5.0, &mut rng, &mut n);
            let after: f64 = c.positions().iter().map(|x| (x - 100.0).exp()).sum();
            assert!((after - before).abs() <= 1e-12 * before, "{before} {after}");
        }
        assert!(n.mass_checks > 0);
        assert_eq!(n.mass_checks, n.coalescences);
        assert_eq!(n.violations, 0);
    }

    #[test]
    fn ensemble_is_deterministic_and_matches_initial_law() {
        let m = ModelConfig::midpoint(k("B:1,1"));
        let a = ensemble_density(&m, &|_| 0.5, 20.0, 0.0, 400, 4, 17).unwrap();
        let b = ensemble_density(&m, &|_| 0.5, 20.0, 0.0, 400, 4, 17).unwrap();
        assert_eq!(a, b);
        for (v, s) in a.mean_density.iter().zip(&a.stderr) {
            assert!((v - 0.5).abs() < 4.0 * s, "{v} ± {s}");
        }
        let mut out = Vec::new();
        a.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("bin_center,mean_density,stderr\n"));
    }
}
