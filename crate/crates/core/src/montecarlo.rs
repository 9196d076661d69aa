//! Network-level Monte Carlo simulation.
//!
//! Each trial draws a full network realization, assigns pilots uniformly at
//! random, and extracts `X`, `Y` and the TIN indicator. Trials are grouped
//! into fixed-size chunks; chunk `i` draws from ChaCha stream `i` of the run
//! seed, so results do not depend on how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distributions::{derive, CurveKind, CurveTable, DerivedQuantities, NetworkConfig};
use crate::error::{Error, Result};
use crate::geometry::{poisson_count, sample_uniform_disk, DiskWindow, Point2D};

/// Trials per deterministic RNG stream.
pub const CHUNK_SIZE: usize = 1024;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Pilot index of the typical UE.
pub const TYPICAL_PILOT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointModel {
    /// Exactly `K - 1` other UEs and `L` APs, uniform on the window.
    Bpp,
    /// Poisson numbers of UEs and APs with the same mean counts.
    Ppp,
}

impl PointModel {
    pub fn name(&self) -> &'static str {
        match self {
            PointModel::Bpp => "bpp",
            PointModel::Ppp => "ppp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub ap_points: Vec<Point2D>,
    /// `ue_points[0]` is the typical UE at the origin.
    pub ue_points: Vec<Point2D>,
    /// Pilot index in `1..=tau_p` for each UE.
    pub pilot_labels: Vec<u32>,
    pub reference_ap: Point2D,
}

impl NetworkRealization {
    /// UEs other than the typical one that share its pilot.
    pub fn copilot_ues(&self) -> impl Iterator<Item = &Point2D> {
        self.ue_points
            .iter()
            .zip(&self.pilot_labels)
            .skip(1)
            .filter(|(_, &label)| label == TYPICAL_PILOT)
            .map(|(p, _)| p)
    }
}

fn window_of(config: &NetworkConfig) -> Result<DiskWindow> {
    DiskWindow::centered(config.radius)
}

fn random_pilot<R: Rng + ?Sized>(num_pilots: usize, rng: &mut R) -> u32 {
    rng.random_range(1..=num_pilots as u32)
}

fn assemble(
    config: &NetworkConfig,
    aps: Vec<Point2D>,
    others: Vec<Point2D>,
    labels: Vec<u32>,
) -> NetworkRealization {
    let mut ue_points = Vec::with_capacity(others.len() + 1);
    ue_points.push(Point2D::ORIGIN);
    ue_points.extend(others);
    let mut pilot_labels = Vec::with_capacity(labels.len() + 1);
    pilot_labels.push(TYPICAL_PILOT);
    pilot_labels.extend(labels);
    NetworkRealization {
        ap_points: aps,
        ue_points,
        pilot_labels,
        reference_ap: Point2D::new(config.influence_radius, 0.0),
    }
}

pub fn sample_realization<R: Rng + ?Sized>(
    config: &NetworkConfig,
    model: PointModel,
    rng: &mut R,
) -> Result<NetworkRealization> {
    config.validate()?;
    let window = window_of(config)?;
    let (num_others, num_aps) = match model {
        PointModel::Bpp => (config.num_ues - 1, config.num_aps),
        PointModel::Ppp => (
            poisson_count(config.num_ues as f64, rng),
            poisson_count(config.num_aps as f64, rng),
        ),
    };
    let others = sample_uniform_disk(num_others, &window, rng);
    let labels = (0..num_others)
        .map(|_| random_pilot(config.num_pilots, rng))
        .collect();
    let aps = sample_uniform_disk(num_aps, &window, rng);
    Ok(assemble(config, aps, others, labels))
}

/// BPP realization conditioned on exactly `k_prime` co-pilot UEs besides the typical one.
pub fn sample_realization_with_copilots<R: Rng + ?Sized>(
    config: &NetworkConfig,
    k_prime: usize,
    rng: &mut R,
) -> Result<NetworkRealization> {
    config.validate()?;
    let num_others = config.num_ues - 1;
    if k_prime > num_others {
        return Err(Error::validation(
            "k_prime",
            format!("must be <= K - 1 = {num_others}"),
        ));
    }
    if config.num_pilots == 1 && k_prime != num_others {
        return Err(Error::validation(
            "k_prime",
            "with a single pilot every UE is a co-pilot",
        ));
    }
    let window = window_of(config)?;
    let others = sample_uniform_disk(num_others, &window, rng);
    // positions are exchangeable, so the first k_prime take the typical pilot
    let labels = (0..num_others)
        .map(|i| {
            if i < k_prime {
                TYPICAL_PILOT
            } else {
                rng.random_range(2..=config.num_pilots as u32)
            }
        })
        .collect();
    let aps = sample_uniform_disk(config.num_aps, &window, rng);
    Ok(assemble(config, aps, others, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Reference AP to nearest co-pilot UE; `None` without co-pilots.
    pub x_min: Option<f64>,
    /// Typical UE to nearest interfering AP; `None` without interfering APs.
    pub y_min: Option<f64>,
    pub serving_exists: bool,
    pub tin_holds: bool,
}

/// Extracts `X`, `Y` and the TIN indicator. Influence regions are closed balls.
///
/// Without a co-pilot UE or an interfering AP there is no interference and
/// the condition holds whenever a serving AP exists.
pub fn extract_outcome(
    realization: &NetworkRealization,
    config: &NetworkConfig,
    derived: &DerivedQuantities,
) -> TrialOutcome {
    let r = config.influence_radius;
    let r2 = r * r;
    let copilots: Vec<Point2D> = realization.copilot_ues().copied().collect();

    let x_min = copilots
        .iter()
        .map(|p| realization.reference_ap.distance_squared(p))
        .min_by(f64::total_cmp)
        .map(f64::sqrt);

    let mut serving_exists = false;
    let mut best_y2 = f64::INFINITY;
    for ap in &realization.ap_points {
        let d2 = ap.distance_squared(&Point2D::ORIGIN);
        if d2 <= r2 {
            serving_exists = true;
            continue;
        }
        if d2 >= best_y2 {
            continue;
        }
        if copilots.iter().any(|c| c.distance_squared(ap) <= r2) {
            best_y2 = d2;
        }
    }
    let y_min = best_y2.is_finite().then(|| best_y2.sqrt());

    let tin_holds = serving_exists
        && match (x_min, y_min) {
            (Some(x), Some(y)) => x * y >= derived.g_r,
            _ => true,
        };
    TrialOutcome {
        x_min,
        y_min,
        serving_exists,
        tin_holds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub mean: f64,
    pub half_width: f64,
    pub n_trials: usize,
    pub confidence: f64,
}

/// Two-sided normal quantile `z` for the given confidence.
pub fn z_value(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::validation("confidence", "must lie in (0, 1)"));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + 0.5 * confidence))
}

impl EstimateCI {
    pub fn from_counts(successes: usize, n_trials: usize, confidence: f64) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::validation("n_trials", "must be >= 1"));
        }
        let z = z_value(confidence)?;
        let mean = successes as f64 / n_trials as f64;
        Ok(Self {
            mean,
            half_width: z * (mean * (1.0 - mean) / n_trials as f64).sqrt(),
            n_trials,
            confidence,
        })
    }

    /// Standard error of the estimate, `sqrt(mean (1 - mean) / n)`.
    pub fn standard_error(&self) -> f64 {
        (self.mean * (1.0 - self.mean) / self.n_trials as f64).sqrt()
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// RNG for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `n_trials` trials in deterministic chunks and returns results in trial order.
pub fn run_trials<T, F>(n_trials: usize, seed: u64, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let chunks = n_trials.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let len = CHUNK_SIZE.min(n_trials - chunk * CHUNK_SIZE);
            (0..len).map(|_| trial(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n_trials);
    for chunk in per_chunk {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Counts trials for which `trial` returns true; the reduction is an integer sum.
pub fn count_successes<F>(n_trials: usize, seed: u64, trial: F) -> Result<usize>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
{
    let chunks = n_trials.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let len = CHUNK_SIZE.min(n_trials - chunk * CHUNK_SIZE);
            let mut hits = 0usize;
            for _ in 0..len {
                hits += usize::from(trial(&mut rng)?);
            }
            Ok(hits)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` keeps the global pool).
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(threads: usize, f: F) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::validation("threads", e.to_string()))?;
    Ok(pool.install(f))
}

fn check_trials(n_trials: usize) -> Result<()> {
    if n_trials == 0 {
        return Err(Error::validation("n_trials", "must be >= 1"));
    }
    Ok(())
}

pub fn simulate_outcomes(
    config: &NetworkConfig,
    model: PointModel,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    check_trials(n_trials)?;
    let derived = derive(config)?;
    run_trials(n_trials, seed, |rng| {
        let realization = sample_realization(config, model, rng)?;
        Ok(extract_outcome(&realization, config, &derived))
    })
}

/// Outcomes of BPP trials with exactly `k_prime` co-pilot UEs.
pub fn simulate_outcomes_with_copilots(
    config: &NetworkConfig,
    k_prime: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    check_trials(n_trials)?;
    let derived = derive(config)?;
    run_trials(n_trials, seed, |rng| {
        let realization = sample_realization_with_copilots(config, k_prime, rng)?;
        Ok(extract_outcome(&realization, config, &derived))
    })
}

/// Aggregate counts over a batch of trials, including how often the censoring rule applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub n_trials: usize,
    pub tin_count: usize,
    pub serving_count: usize,
    pub no_copilot_count: usize,
    /// Trials with co-pilots but no interfering AP.
    pub no_interferer_count: usize,
}

impl OutcomeSummary {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        outcomes.iter().fold(Self::default(), |mut s, o| {
            s.n_trials += 1;
            s.tin_count += usize::from(o.tin_holds);
            s.serving_count += usize::from(o.serving_exists);
            if o.x_min.is_none() {
                s.no_copilot_count += 1;
            } else if o.y_min.is_none() {
                s.no_interferer_count += 1;
            }
            s
        })
    }

    pub fn censored_count(&self) -> usize {
        self.no_copilot_count + self.no_interferer_count
    }

    pub fn p_tin(&self, confidence: f64) -> Result<EstimateCI> {
        EstimateCI::from_counts(self.tin_count, self.n_trials, confidence)
    }

    pub fn p_serving(&self, confidence: f64) -> Result<EstimateCI> {
        EstimateCI::from_counts(self.serving_count, self.n_trials, confidence)
    }
}

pub fn estimate_p_tin(
    config: &NetworkConfig,
    model: PointModel,
    n_trials: usize,
    seed: u64,
) -> Result<EstimateCI> {
    let outcomes = simulate_outcomes(config, model, n_trials, seed)?;
    let summary = OutcomeSummary::from_outcomes(&outcomes);
    log::info!(
        "{} trials ({}): {} censored ({} without co-pilots, {} without interfering APs)",
        summary.n_trials,
        model.name(),
        summary.censored_count(),
        summary.no_copilot_count,
        summary.no_interferer_count
    );
    summary.p_tin(DEFAULT_CONFIDENCE)
}

/// Frequency of at least one AP within `r` of the typical UE; only APs are drawn.
pub fn estimate_serving_probability(
    config: &NetworkConfig,
    model: PointModel,
    n_trials: usize,
    seed: u64,
) -> Result<EstimateCI> {
    check_trials(n_trials)?;
    config.validate()?;
    let window = window_of(config)?;
    let r2 = config.influence_radius * config.influence_radius;
    let hits = count_successes(n_trials, seed, |rng| {
        let count = match model {
            PointModel::Bpp => config.num_aps,
            PointModel::Ppp => poisson_count(config.num_aps as f64, rng),
        };
        let mut found = false;
        for _ in 0..count {
            // keep drawing so the stream consumption does not depend on the outcome
            found |= window.sample_point(rng).distance_squared(&Point2D::ORIGIN) <= r2;
        }
        Ok(found)
    })?;
    EstimateCI::from_counts(hits, n_trials, DEFAULT_CONFIDENCE)
}

/// Hit-or-miss estimate of the window fraction within `x` of the reference AP `(r, 0)`.
pub fn hit_or_miss_p_x<R: Rng + ?Sized>(
    x: f64,
    r: f64,
    big_r: f64,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    check_trials(n)?;
    let window = DiskWindow::centered(big_r)?;
    let center = Point2D::new(r, 0.0);
    let x2 = x * x;
    let hits = (0..n)
        .filter(|_| window.sample_point(rng).distance_squared(&center) <= x2)
        .count();
    Ok(hits as f64 / n as f64)
}

/// Deterministic, parallel hit-or-miss estimate of the same fraction from `n` samples.
pub fn estimate_hit_or_miss_p_x(x: f64, r: f64, big_r: f64, n: usize, seed: u64) -> Result<f64> {
    check_trials(n)?;
    let window = DiskWindow::centered(big_r)?;
    let center = Point2D::new(r, 0.0);
    let x2 = x * x;
    let hits = count_successes(n, seed, |rng| {
        Ok(window.sample_point(rng).distance_squared(&center) <= x2)
    })?;
    Ok(hits as f64 / n as f64)
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::domain("empirical_curve", "samples must be finite"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Empirical curve of `samples` on `grid`.
///
/// `Cdf`: the right-continuous ECDF at each grid point. `Pdf`: `grid` holds
/// histogram bin edges; values are densities at bin midpoints, normalised by
/// the number of samples inside the grid range so the histogram integrates to one.
pub fn empirical_curve(samples: &[f64], kind: CurveKind, grid: &[f64]) -> Result<CurveTable> {
    let sorted = sorted_finite(samples)?;
    let n = sorted.len() as f64;
    match kind {
        CurveKind::Cdf => {
            let values = grid
                .iter()
                .map(|&g| sorted.partition_point(|&s| s <= g) as f64 / n)
                .collect();
            CurveTable::new(grid.to_vec(), values, kind)
        }
        CurveKind::Pdf => {
            if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::validation(
                    "grid",
                    "pdf bin edges must be strictly increasing with at least two entries",
                ));
            }
            let last = grid.len() - 1;
            let counts: Vec<usize> = (0..last)
                .map(|i| {
                    let lo = sorted.partition_point(|&s| s < grid[i]);
                    // last bin is closed on the right
                    let hi = if i + 1 == last {
                        sorted.partition_point(|&s| s <= grid[i + 1])
                    } else {
                        sorted.partition_point(|&s| s < grid[i + 1])
                    };
                    hi - lo
                })
                .collect();
            let in_range: usize = counts.iter().sum();
            if in_range == 0 {
                return Err(Error::EmptySample);
            }
            let midpoints = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let values = counts
                .iter()
                .zip(grid.windows(2))
                .map(|(&c, w)| c as f64 / (in_range as f64 * (w[1] - w[0])))
                .collect();
            CurveTable::new(midpoints, values, kind)
        }
    }
}

/// Kolmogorov-Smirnov distance between the ECDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    let sorted = sorted_finite(samples)?;
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // ties jump together
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = cdf(sorted[i]);
        worst = worst
            .max((f - i as f64 / n).abs())
            .max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{cdf_x_ppp, linear_grid};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Exp};

    fn cfg(r: f64) -> NetworkConfig {
        NetworkConfig {
            influence_radius: r,
            ..NetworkConfig::default()
        }
    }

    fn hand_realization(ues: &[(f64, f64, u32)], aps: &[(f64, f64)], r: f64) -> NetworkRealization {
        let mut ue_points = vec![Point2D::ORIGIN];
        let mut pilot_labels = vec![TYPICAL_PILOT];
        for &(x, y, p) in ues {
            ue_points.push(Point2D::new(x, y));
            pilot_labels.push(p);
        }
        NetworkRealization {
            ap_points: aps.iter().map(|&(x, y)| Point2D::new(x, y)).collect(),
            ue_points,
            pilot_labels,
            reference_ap: Point2D::new(r, 0.0),
        }
    }

    #[test]
    fn bpp_counts_are_exact() {
        let c = cfg(100.0);
        let mut rng = chunk_rng(1, 0);
        for _ in 0..20 {
            let real = sample_realization(&c, PointModel::Bpp, &mut rng).unwrap();
            assert_eq!(real.ue_points.len(), 400);
            assert_eq!(real.ap_points.len(), 1000);
            assert_eq!(real.ue_points[0], Point2D::ORIGIN);
            assert_eq!(real.pilot_labels[0], 1);
            assert!(real.pilot_labels.iter().all(|&p| (1..=10).contains(&p)));
            assert!(real
                .ue_points
                .iter()
                .chain(&real.ap_points)
                .all(|p| p.norm() <= 1000.0));
            assert_eq!(real.reference_ap, Point2D::new(100.0, 0.0));
        }
    }

    #[test]
    fn copilot_count_mean() {
        let c = cfg(100.0);
        let n = 100_000;
        let counts = run_trials(n, 5, |rng| {
            let real = sample_realization(&c, PointModel::Bpp, rng)?;
            Ok(real.copilot_ues().count() as f64)
        })
        .unwrap();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let expected = 399.0 / 10.0;
        let se = (399.0 * 0.1 * 0.9 / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn ppp_ap_count_mean() {
        let c = cfg(100.0);
        let n = 100_000;
        let counts = run_trials(n, 6, |rng| {
            let real = sample_realization(&c, PointModel::Ppp, rng)?;
            assert_eq!(real.ue_points[0], Point2D::ORIGIN);
            Ok(real.ap_points.len() as f64)
        })
        .unwrap();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let se = (1000.0 / n as f64).sqrt();
        assert!((mean - 1000.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn stratified_realization_has_exact_copilots() {
        let c = cfg(100.0);
        let mut rng = chunk_rng(2, 3);
        let real = sample_realization_with_copilots(&c, 40, &mut rng).unwrap();
        assert_eq!(real.copilot_ues().count(), 40);
        assert!(sample_realization_with_copilots(&c, 400, &mut rng).is_err());
    }

    #[test]
    fn hand_built_geometry() {
        let c = cfg(100.0);
        let d = derive(&c).unwrap();
        // one co-pilot at (300, 0), a non-co-pilot UE, an AP serving UE0 and one AP near the co-pilot
        let real = hand_realization(
            &[(300.0, 0.0, 1), (0.0, 500.0, 2)],
            &[(350.0, 0.0), (0.0, 50.0), (0.0, 560.0)],
            100.0,
        );
        let o = extract_outcome(&real, &c, &d);
        assert_eq!(o.x_min, Some(200.0));
        assert_eq!(o.y_min, Some(350.0));
        assert!(o.serving_exists);
        assert_eq!(o.tin_holds, 200.0 * 350.0 >= d.g_r);
    }

    #[test]
    fn ap_inside_typical_region_is_not_interfering() {
        let c = cfg(100.0);
        let d = derive(&c).unwrap();
        // AP at (80, 0) is within r of both UE0 and the co-pilot at (150, 0)
        let real = hand_realization(&[(150.0, 0.0, 1)], &[(80.0, 0.0), (240.0, 0.0)], 100.0);
        let o = extract_outcome(&real, &c, &d);
        assert_eq!(o.y_min, Some(240.0));
        assert_eq!(o.x_min, Some(50.0));
    }

    #[test]
    fn closed_ball_boundary_is_inclusive() {
        let c = cfg(100.0);
        let d = derive(&c).unwrap();
        let real = hand_realization(&[(300.0, 0.0, 1)], &[(100.0, 0.0), (400.0, 0.0)], 100.0);
        let o = extract_outcome(&real, &c, &d);
        assert!(o.serving_exists);
        assert_eq!(o.y_min, Some(400.0));
    }

    #[test]
    fn censoring_rule() {
        let c = cfg(100.0);
        let d = derive(&c).unwrap();
        let no_copilot = hand_realization(&[(300.0, 0.0, 3)], &[(10.0, 0.0), (350.0, 0.0)], 100.0);
        let o = extract_outcome(&no_copilot, &c, &d);
        assert_eq!((o.x_min, o.y_min), (None, None));
        assert!(o.tin_holds);

        let no_interferer =
            hand_realization(&[(300.0, 0.0, 1)], &[(10.0, 0.0), (700.0, 0.0)], 100.0);
        let o = extract_outcome(&no_interferer, &c, &d);
        assert_eq!(o.x_min, Some(200.0));
        assert_eq!(o.y_min, None);
        assert!(o.tin_holds);

        let unserved = hand_realization(&[(300.0, 0.0, 3)], &[(700.0, 0.0)], 100.0);
        let o = extract_outcome(&unserved, &c, &d);
        assert!(!o.serving_exists && !o.tin_holds);
    }

    #[test]
    fn summary_counts() {
        let outcomes = [
            TrialOutcome {
                x_min: None,
                y_min: None,
                serving_exists: true,
                tin_holds: true,
            },
            TrialOutcome {
                x_min: Some(1.0),
                y_min: None,
                serving_exists: false,
                tin_holds: false,
            },
            TrialOutcome {
                x_min: Some(1.0),
                y_min: Some(2.0),
                serving_exists: true,
                tin_holds: false,
            },
        ];
        let s = OutcomeSummary::from_outcomes(&outcomes);
        assert_eq!((s.n_trials, s.tin_count, s.serving_count), (3, 1, 2));
        assert_eq!(
            (
                s.no_copilot_count,
                s.no_interferer_count,
                s.censored_count()
            ),
            (1, 1, 2)
        );
    }

    #[test]
    fn estimate_ci_formula() {
        assert!((z_value(0.95).unwrap() - 1.959963984540054).abs() < 1e-9);
        let e = EstimateCI::from_counts(250, 1000, 0.95).unwrap();
        assert_eq!(e.mean, 0.25);
        assert!((e.half_width - 1.959963984540054 * (0.25 * 0.75 / 1000.0f64).sqrt()).abs() < 1e-9);
        assert!(EstimateCI::from_counts(0, 0, 0.95).is_err());
        assert!(z_value(1.0).is_err());
    }

    #[test]
    fn same_seed_same_estimate() {
        let c = NetworkConfig {
            num_ues: 100,
            num_aps: 200,
            ..cfg(100.0)
        };
        let a = estimate_p_tin(&c, PointModel::Bpp, 3000, 9).unwrap();
        let b = estimate_p_tin(&c, PointModel::Bpp, 3000, 9).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        let other = estimate_p_tin(&c, PointModel::Bpp, 3000, 10).unwrap();
        assert_ne!(a.mean.to_bits(), other.mean.to_bits());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let c = NetworkConfig {
            num_ues: 100,
            num_aps: 200,
            ..cfg(100.0)
        };
        let one = with_threads(1, || simulate_outcomes(&c, PointModel::Ppp, 5000, 4))
            .unwrap()
            .unwrap();
        let four = with_threads(4, || simulate_outcomes(&c, PointModel::Ppp, 5000, 4))
            .unwrap()
            .unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn prefix_property_of_chunked_streams() {
        let a = run_trials(3000, 77, |rng| Ok(rng.random::<u64>())).unwrap();
        let b = run_trials(2000, 77, |rng| Ok(rng.random::<u64>())).unwrap();
        assert_eq!(&a[..2000], &b[..]);
    }

    #[test]
    fn radius_near_window_kills_tin() {
        let c = NetworkConfig {
            influence_radius: 999.0,
            ..NetworkConfig::default()
        };
        let outcomes = simulate_outcomes(&c, PointModel::Bpp, 2000, 3).unwrap();
        let s = OutcomeSummary::from_outcomes(&outcomes);
        // every success comes from the censoring rule; no trial with an interferer passes
        let uncensored_hits = outcomes
            .iter()
            .filter(|o| o.tin_holds && o.x_min.is_some() && o.y_min.is_some())
            .count();
        assert_eq!(uncensored_hits, 0);
        assert_eq!(s.tin_count, s.censored_count());
    }

    #[test]
    fn single_sample_ecdf() {
        let t = empirical_curve(&[2.0], CurveKind::Cdf, &[1.0, 1.999, 2.0, 3.0]).unwrap();
        assert_eq!(t.values(), &[0.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            empirical_curve(&[], CurveKind::Cdf, &[1.0]),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn ecdf_matches_rayleigh_law() {
        let lambda_0 = 400.0 / 10.0 / (std::f64::consts::PI * 1e6);
        let mut rng = chunk_rng(8, 0);
        let scale = Exp::new(std::f64::consts::PI * lambda_0).unwrap();
        // X^2 is exponential with rate pi lambda_0
        let samples: Vec<f64> = (0..100_000)
            .map(|_| scale.sample(&mut rng).sqrt())
            .collect();
        let ks = ks_distance(&samples, |x| cdf_x_ppp(x, lambda_0).unwrap()).unwrap();
        assert!(ks < 1.36 / (1e5f64).sqrt() * 2.0, "{ks}");
    }

    #[test]
    fn hit_or_miss_small_disk() {
        let mut rng = chunk_rng(12, 0);
        // x <= R - r: the ball lies inside the window
        let p = hit_or_miss_p_x(300.0, 100.0, 1000.0, 200_000, &mut rng).unwrap();
        assert!(
            (p - 0.09).abs() < 4.0 * (0.09f64 * 0.91 / 2e5).sqrt(),
            "{p}"
        );
    }

    #[test]
    fn serving_frequency_matches_binomial() {
        let c = cfg(50.0);
        let e = estimate_serving_probability(&c, PointModel::Bpp, 20_000, 21).unwrap();
        let p = 1.0 - (1.0 - 0.0025f64).powi(1000);
        assert!((e.mean - p).abs() < 3.0 * (p * (1.0 - p) / 20_000.0).sqrt());
    }

    proptest! {
        #[test]
        fn histogram_integrates_to_one(samples in prop::collection::vec(0.0f64..10.0, 1..300), bins in 1usize..40) {
            let grid = linear_grid(0.0, 10.0, bins + 1);
            let t = empirical_curve(&samples, CurveKind::Pdf, &grid).unwrap();
            let total: f64 = t.values().iter().zip(grid.windows(2)).map(|(v, w)| v * (w[1] - w[0])).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ecdf_nondecreasing_and_bounded(samples in prop::collection::vec(-5.0f64..5.0, 1..200)) {
            let grid = linear_grid(-6.0, 6.0, 50);
            let t = empirical_curve(&samples, CurveKind::Cdf, &grid).unwrap();
            prop_assert_eq!(t.values()[0], 0.0);
            prop_assert_eq!(*t.values().last().unwrap(), 1.0);
            prop_assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn ks_in_unit_interval(samples in prop::collection::vec(0.0f64..1.0, 1..200)) {
            let ks = ks_distance(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
            prop_assert!((0.0..=1.0).contains(&ks));
            prop_assert!(ks >= 0.5 / samples.len() as f64 - 1e-15);
        }
    }
}
