//! Loss-rate sweeps over several code distances and threshold estimation
//! from the crossing of the logical-error-rate curves.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bsm::{qpc_probs, BsmModel, Convention, Protocol};
use crate::erasure::{run_batch, CorrelationMode, ErasureModel};
use crate::error::{Error, Result};
use crate::gsm::Architecture;
use crate::network::build_network;
use crate::stats::{
    corrected_logit, median, percentile, point_seed, splitmix64, wilson_interval, Z95,
};
use crate::syndrome::{build_syndrome_graphs, HubRule, SyndromeGraphs};

pub const DEFAULT_DISTANCES: [u32; 3] = [9, 11, 13];
pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_GRID_POINTS: usize = 9;
/// Half-width of the default grid relative to its centre.
pub const DEFAULT_GRID_SPAN: f64 = 0.3;
pub const DEFAULT_BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub architecture: Architecture,
    pub protocol: Protocol,
    pub n: u32,
    pub m: u32,
    pub j: u32,
    pub convention: Convention,
    pub distances: Vec<u32>,
    pub etas: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub correlation: CorrelationMode,
    pub hub_rotation: u8,
    /// Worker threads; 0 uses the available parallelism. Results do not
    /// depend on it.
    pub workers: usize,
}

impl SweepConfig {
    /// Static or active configuration with default distances and samples,
    /// the architecture's preferred convention and an empty grid.
    pub fn new(architecture: Architecture, protocol: Protocol, n: u32, m: u32, j: u32) -> Self {
        SweepConfig {
            architecture,
            protocol,
            n,
            m,
            j,
            convention: architecture.default_convention(),
            distances: DEFAULT_DISTANCES.to_vec(),
            etas: Vec::new(),
            samples: DEFAULT_SAMPLES,
            seed: 1,
            correlation: CorrelationMode::Independent,
            hub_rotation: 0,
            workers: 0,
        }
    }

    pub fn bsm_model(&self, eta: f64) -> Result<BsmModel> {
        BsmModel::new(self.protocol, self.n, self.m, self.j, self.convention, eta)
    }

    pub fn validate(&self) -> Result<()> {
        self.bsm_model(0.0)?;
        if self.distances.len() < 2 {
            return Err(Error::validation(
                "distances",
                "at least two code distances are needed",
            ));
        }
        for &d in &self.distances {
            if d < 3 || d % 2 == 0 {
                return Err(Error::validation(
                    "distances",
                    format!("distance {d} must be odd and at least 3"),
                ));
            }
        }
        let mut sorted = self.distances.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.distances.len() {
            return Err(Error::validation("distances", "distances must be distinct"));
        }
        validate_grid(&self.etas)?;
        if self.samples == 0 {
            return Err(Error::validation(
                "samples",
                "at least one sample per point is required",
            ));
        }
        Ok(())
    }

    /// Short label such as `cyclic static (3,2)` or `cyclic active (2,2,1)`.
    pub fn label(&self) -> String {
        format!(
            "{} {} ({})",
            self.architecture,
            self.protocol,
            params_key(self.protocol, self.n, self.m, self.j)
        )
    }
}

/// `"n,m"` for static and `"n,m,j"` for active schemes.
pub fn params_key(protocol: Protocol, n: u32, m: u32, j: u32) -> String {
    match protocol {
        Protocol::Static => format!("{n},{m}"),
        Protocol::Active => format!("{n},{m},{j}"),
    }
}

pub fn validate_grid(etas: &[f64]) -> Result<()> {
    if etas.is_empty() {
        return Err(Error::validation("eta_grid", "the loss-rate grid is empty"));
    }
    if etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::validation(
            "eta_grid",
            "loss rates must lie in [0, 1]",
        ));
    }
    if etas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(
            "eta_grid",
            "loss rates must be strictly increasing",
        ));
    }
    Ok(())
}

/// `points` evenly spaced loss rates over `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || (points > 1 && hi <= lo) {
        return Err(Error::validation(
            "eta_grid",
            format!("cannot span {points} points over [{lo}, {hi}]"),
        ));
    }
    let grid: Vec<f64> = if points == 1 {
        vec![lo]
    } else {
        (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect()
    };
    validate_grid(&grid)?;
    Ok(grid)
}

/// Grid of `points` rates spanning `centre * (1 ± span)`, kept inside `[0, 1]`.
pub fn centred_grid(centre: f64, span: f64, points: usize) -> Result<Vec<f64>> {
    if !(centre > 0.0 && centre < 1.0) || !(span > 0.0 && span < 1.0) {
        return Err(Error::validation(
            "eta_center",
            format!("grid centre {centre} with span {span} is not usable"),
        ));
    }
    linear_grid(
        centre * (1.0 - span),
        (centre * (1.0 + span)).min(1.0),
        points,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eta: f64,
    pub failures: u64,
    pub samples: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl CurvePoint {
    pub fn from_counts(eta: f64, failures: u64, samples: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, samples, Z95);
        CurvePoint {
            eta,
            failures,
            samples,
            rate: failures as f64 / samples as f64,
            ci_low,
            ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub distance: u32,
    pub points: Vec<CurvePoint>,
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Runtime(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn graphs_for(config: &SweepConfig, d: u32) -> Result<SyndromeGraphs> {
    let network = build_network(d, config.architecture)?;
    build_syndrome_graphs(
        &network,
        HubRule {
            rotation: config.hub_rotation,
        },
    )
}

/// Logical error rates for every `(distance, eta)` of the configuration.
pub fn sweep(config: &SweepConfig) -> Result<Vec<ThresholdCurve>> {
    sweep_with_progress(config, |_, _| {})
}

/// `sweep`, calling `progress(distance, point)` as points complete.
pub fn sweep_with_progress<F>(config: &SweepConfig, progress: F) -> Result<Vec<ThresholdCurve>>
where
    F: Fn(u32, &CurvePoint) + Sync + Send,
{
    config.validate()?;
    let models: Vec<ErasureModel> = config
        .etas
        .iter()
        .map(|&eta| {
            let probs = qpc_probs(&config.bsm_model(eta)?)?;
            ErasureModel::from_bsm(config.architecture, &probs, config.correlation)
        })
        .collect::<Result<_>>()?;
    with_workers(config.workers, || {
        config
            .distances
            .iter()
            .map(|&d| {
                let graphs = graphs_for(config, d)?;
                let seed = point_seed(config.seed, d);
                let points = config
                    .etas
                    .par_iter()
                    .zip(&models)
                    .map(|(&eta, model)| {
                        let r = run_batch(&graphs, model, config.samples, seed)?;
                        let point = CurvePoint::from_counts(eta, r.failures, r.samples);
                        progress(d, &point);
                        Ok(point)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ThresholdCurve {
                    distance: d,
                    points,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub d_small: u32,
    pub d_large: u32,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub eta_c: f64,
    /// Standard deviation of the bootstrap estimates.
    pub std_err: f64,
    /// 95% percentile interval of the bootstrap estimates.
    pub ci_low: f64,
    pub ci_high: f64,
    pub pairs: Vec<PairCrossing>,
    /// Bootstrap resamples that produced a crossing.
    pub resamples_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions {
            resamples: DEFAULT_BOOTSTRAP,
            seed: 1,
        }
    }
}

/// Counts per grid point, curves sorted by distance and points by eta.
struct Counts {
    distances: Vec<u32>,
    etas: Vec<f64>,
    /// `[curve][point] = (failures, samples)`.
    counts: Vec<Vec<(u64, u64)>>,
}

fn canonical_counts(curves: &[ThresholdCurve]) -> Result<Counts> {
    if curves.len() < 2 {
        return Err(Error::validation(
            "curves",
            "a crossing needs at least two curves",
        ));
    }
    let mut sorted: Vec<ThresholdCurve> = curves.to_vec();
    sorted.sort_by_key(|c| c.distance);
    for c in &mut sorted {
        c.points.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    }
    let etas: Vec<f64> = sorted[0].points.iter().map(|p| p.eta).collect();
    for c in &sorted {
        let these: Vec<f64> = c.points.iter().map(|p| p.eta).collect();
        if these != etas {
            return Err(Error::validation(
                "curves",
                "all curves must share one loss-rate grid",
            ));
        }
        if c.points
            .iter()
            .any(|p| p.samples == 0 || p.failures > p.samples)
        {
            return Err(Error::validation(
                "curves",
                "every point needs failures <= samples and samples > 0",
            ));
        }
    }
    Ok(Counts {
        distances: sorted.iter().map(|c| c.distance).collect(),
        etas,
        counts: sorted
            .iter()
            .map(|c| c.points.iter().map(|p| (p.failures, p.samples)).collect())
            .collect(),
    })
}

enum PairOutcome {
    Crossing(f64),
    Identical,
    None,
}

/// Crossing of two curves by linear interpolation of the logit difference.
/// Points where both curves are saturated at 0 or at 1 carry no
/// information and are skipped. Several sign changes give their median.
fn pair_crossing(etas: &[f64], a: &[(u64, u64)], b: &[(u64, u64)]) -> PairOutcome {
    let saturated = |(k, n): (u64, u64)| k == 0 || k == n;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut identical = true;
    for i in 0..etas.len() {
        let (pa, pb) = (a[i], b[i]);
        let ra = pa.0 as f64 / pa.1 as f64;
        let rb = pb.0 as f64 / pb.1 as f64;
        identical &= ra == rb;
        if saturated(pa) && saturated(pb) && ra == rb {
            continue;
        }
        pts.push((
            etas[i],
            corrected_logit(pa.0, pa.1) - corrected_logit(pb.0, pb.1),
        ));
    }
    if identical {
        return PairOutcome::Identical;
    }
    let mut crossings = Vec::new();
    for i in 0..pts.len() {
        let (e0, d0) = pts[i];
        if d0 == 0.0 {
            crossings.push(e0);
            continue;
        }
        if let Some(&(e1, d1)) = pts.get(i + 1) {
            if d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0) {
                crossings.push(e0 + (e1 - e0) * d0 / (d0 - d1));
            }
        }
    }
    if crossings.is_empty() {
        PairOutcome::None
    } else {
        PairOutcome::Crossing(median(&mut crossings))
    }
}

fn crossing_from_counts(c: &Counts) -> Result<(f64, Vec<PairCrossing>)> {
    let mut pairs = Vec::new();
    let mut found = Vec::new();
    let mut all_identical = true;
    for i in 0..c.distances.len() {
        for j in i + 1..c.distances.len() {
            let eta = match pair_crossing(&c.etas, &c.counts[i], &c.counts[j]) {
                PairOutcome::Crossing(e) => {
                    all_identical = false;
                    found.push(e);
                    Some(e)
                }
                PairOutcome::Identical => None,
                PairOutcome::None => {
                    all_identical = false;
                    None
                }
            };
            pairs.push(PairCrossing {
                d_small: c.distances[i],
                d_large: c.distances[j],
                eta,
            });
        }
    }
    if all_identical {
        return Err(Error::DegenerateCrossing);
    }
    if found.is_empty() {
        return Err(Error::NoCrossing);
    }
    Ok((found.iter().sum::<f64>() / found.len() as f64, pairs))
}

/// Threshold as the mean pairwise crossing, with a parametric bootstrap
/// over binomial counts for its uncertainty.
pub fn estimate_crossing(
    curves: &[ThresholdCurve],
    options: &CrossingOptions,
) -> Result<CrossingEstimate> {
    let counts = canonical_counts(curves)?;
    let (eta_c, pairs) = crossing_from_counts(&counts)?;

    let mut boot: Vec<f64> = (0..options.resamples)
        .filter_map(|r| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(splitmix64(options.seed ^ splitmix64(r as u64)));
            let resampled = Counts {
                distances: counts.distances.clone(),
                etas: counts.etas.clone(),
                counts: counts
                    .counts
                    .iter()
                    .map(|curve| {
                        curve
                            .iter()
                            .map(|&(k, n)| {
                                let p = k as f64 / n as f64;
                                let draw =
                                    Binomial::new(n, p).map(|b| b.sample(&mut rng)).unwrap_or(k);
                                (draw, n)
                            })
                            .collect()
                    })
                    .collect(),
            };
            crossing_from_counts(&resampled).ok().map(|(e, _)| e)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let (std_err, ci_low, ci_high) = if boot.len() >= 2 {
        let mean = boot.iter().sum::<f64>() / boot.len() as f64;
        let var = boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64;
        (
            var.sqrt(),
            percentile(&boot, 0.025),
            percentile(&boot, 0.975),
        )
    } else {
        (f64::NAN, eta_c, eta_c)
    };
    Ok(CrossingEstimate {
        eta_c,
        std_err,
        ci_low,
        ci_high,
        pairs,
        resamples_used: boot.len(),
    })
}

/// How the grid centre was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentreSource {
    Configured,
    PreScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRun {
    pub config: SweepConfig,
    pub centre: f64,
    pub centre_source: CentreSource,
    /// Grid passes: 1, or 2 when the first grid did not bracket a crossing.
    pub passes: u32,
    pub curves: Vec<ThresholdCurve>,
    pub estimate: CrossingEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    /// Grid centre; `None` runs a coarse pre-scan to find one.
    pub centre: Option<f64>,
    pub span: f64,
    pub points: usize,
    pub crossing: CrossingOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            centre: None,
            span: DEFAULT_GRID_SPAN,
            points: DEFAULT_GRID_POINTS,
            crossing: CrossingOptions::default(),
        }
    }
}

/// Samples per point of the pre-scan.
const PRESCAN_SAMPLES: u64 = 400;

/// Locates the crossing roughly with a wide grid, few samples and the
/// smallest and largest configured distances.
pub fn prescan_centre(config: &SweepConfig) -> Result<f64> {
    let mut distances = config.distances.clone();
    distances.sort_unstable();
    let mut coarse = config.clone();
    coarse.distances = vec![distances[0], *distances.last().expect("validated")];
    coarse.samples = PRESCAN_SAMPLES.min(config.samples);
    // Geometric grid from 0.5% to 25% loss.
    coarse.etas = (0..24)
        .map(|i| 0.005 * (50f64).powf(i as f64 / 23.0))
        .collect();
    let curves = sweep(&coarse)?;
    let counts = canonical_counts(&curves)?;
    crossing_from_counts(&counts).map(|(e, _)| e)
}

/// Sweeps a grid around the centre, re-centres once if no crossing is
/// bracketed, and estimates the threshold.
pub fn estimate_threshold(
    config: &SweepConfig,
    options: &ThresholdOptions,
) -> Result<ThresholdRun> {
    let mut probe = config.clone();
    probe.etas = vec![0.0];
    probe.validate()?;
    let (mut centre, centre_source) = match options.centre {
        Some(c) => (c, CentreSource::Configured),
        None => (prescan_centre(&probe)?, CentreSource::PreScan),
    };
    let mut passes = 0;
    loop {
        passes += 1;
        let mut run = config.clone();
        run.etas = centred_grid(centre, options.span, options.points)?;
        let curves = sweep(&run)?;
        match estimate_crossing(&curves, &options.crossing) {
            Ok(estimate) => {
                return Ok(ThresholdRun {
                    config: run,
                    centre,
                    centre_source,
                    passes,
                    curves,
                    estimate,
                })
            }
            Err(Error::NoCrossing) if passes == 1 => {
                centre = shifted_centre(&curves, centre, options.span);
            }
            Err(e) => return Err(e),
        }
    }
}

/// New centre one grid width up when the largest distance is still better
/// everywhere (threshold above the grid), else one width down.
fn shifted_centre(curves: &[ThresholdCurve], centre: f64, span: f64) -> f64 {
    let small = curves.iter().min_by_key(|c| c.distance).expect("non-empty");
    let large = curves.iter().max_by_key(|c| c.distance).expect("non-empty");
    let below: f64 = small
        .points
        .iter()
        .zip(&large.points)
        .map(|(s, l)| s.rate - l.rate)
        .sum();
    let factor = if below > 0.0 {
        1.0 + 2.0 * span
    } else {
        1.0 - span
    };
    (centre * factor).clamp(1e-4, 0.75)
}
