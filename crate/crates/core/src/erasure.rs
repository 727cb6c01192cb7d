//! Monte-Carlo erasure sampling and percolation decoding.
//!
//! An erased outcome contracts its syndrome-graph edge. A trial fails when
//! the contracted clusters join the two boundary nodes of either graph.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bsm::{joint_distribution, BsmOutcomeProbs, JointDistribution};
use crate::error::{Error, Result};
use crate::gsm::{erasure_from_bsm, Architecture};
use crate::stats::{point_seed, wilson_interval, Z95};
use crate::syndrome::{LatticeKind, OutcomeType, SyndromeGraph, SyndromeGraphs};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMode {
    /// Every outcome is erased independently with its marginal probability.
    #[default]
    Independent,
    /// Each BSM of a GSM draws one joint outcome; outcomes sharing a BSM are
    /// erased together.
    PerBsm,
}

impl std::fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorrelationMode::Independent => "independent",
            CorrelationMode::PerBsm => "per-bsm",
        })
    }
}

impl std::str::FromStr for CorrelationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "independent" => Ok(CorrelationMode::Independent),
            "per-bsm" | "perbsm" => Ok(CorrelationMode::PerBsm),
            _ => Err(Error::validation(
                "correlation",
                format!("unknown correlation mode {s:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureModel {
    /// Erasure probability per outcome type, indexed by `OutcomeType::index`.
    pub probs: [f64; 4],
    pub mode: CorrelationMode,
    /// Per-BSM outcome split; required by `PerBsm`.
    pub joint: Option<JointDistribution>,
}

impl ErasureModel {
    /// Independent erasures with explicit per-type probabilities.
    pub fn independent(probs: [f64; 4]) -> Result<Self> {
        for (t, p) in OutcomeType::ALL.iter().zip(probs) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(
                    "erasure probability",
                    format!("{t} probability {p} outside [0, 1]"),
                ));
            }
        }
        Ok(ErasureModel {
            probs,
            mode: CorrelationMode::Independent,
            joint: None,
        })
    }

    /// Model induced by encoded BSMs with the given outcome rates.
    pub fn from_bsm(
        architecture: Architecture,
        bsm: &BsmOutcomeProbs,
        mode: CorrelationMode,
    ) -> Result<Self> {
        let joint = joint_distribution(bsm)?;
        let mut probs = [0.0; 4];
        for arity in 2..=4 {
            probs[OutcomeType::product_x(arity).index()] =
                erasure_from_bsm(architecture, arity, bsm).p_erase_x;
        }
        probs[OutcomeType::Zz.index()] = erasure_from_bsm(architecture, 4, bsm).p_erase_zz;
        Ok(ErasureModel {
            probs,
            mode,
            joint: Some(joint),
        })
    }

    pub fn prob(&self, kind: OutcomeType) -> f64 {
        self.probs[kind.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TrialResult {
    pub primal_percolated: bool,
    pub dual_percolated: bool,
    pub logical_error: bool,
}

/// Per-sample random stream: ChaCha8 keyed by the distance seed, with the
/// sample index as the stream number.
pub fn sample_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

/// Threshold for comparing a uniform `u32` against probability `p`.
fn u32_threshold(p: f64) -> u64 {
    (p * 4_294_967_296.0).round() as u64
}

/// Draws skip lengths of a Bernoulli(p) sequence, i.e. geometric gaps.
struct GeometricSkip {
    p: f64,
    log_q: f64,
}

impl GeometricSkip {
    fn new(p: f64) -> Self {
        GeometricSkip {
            p,
            log_q: (-p).ln_1p(),
        }
    }

    /// Number of non-events before the next event.
    fn draw<R: RngCore>(&self, rng: &mut R) -> usize {
        if self.p >= 1.0 {
            return 0;
        }
        // Uniform in (0, 1].
        let u = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let g = (u.ln() / self.log_q).floor();
        if g >= usize::MAX as f64 {
            usize::MAX
        } else {
            g as usize
        }
    }
}

/// Graphs plus the precomputed layout the sampler needs.
pub struct Sampler<'g> {
    graphs: &'g SyndromeGraphs,
    model: ErasureModel,
    /// Erasable outcome ids per outcome type.
    classes: [Vec<u32>; 4],
    /// Erasable GSMs as `(first outcome, BSM count)`.
    gsms: Vec<(u32, u32)>,
    /// Endpoints per outcome id, in a node space where dual nodes follow
    /// primal nodes.
    endpoints: Vec<[u32; 2]>,
    dual_offset: u32,
    joint_cuts: [u64; 3],
}

impl<'g> Sampler<'g> {
    pub fn new(graphs: &'g SyndromeGraphs, model: ErasureModel) -> Result<Self> {
        for (t, p) in OutcomeType::ALL.iter().zip(model.probs) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(
                    "erasure probability",
                    format!("{t} probability {p} outside [0, 1]"),
                ));
            }
        }
        let joint_cuts = match (model.mode, model.joint) {
            (CorrelationMode::PerBsm, None) => {
                return Err(Error::validation(
                    "correlation",
                    "per-bsm sampling needs a BSM outcome distribution",
                ))
            }
            (_, Some(j)) => {
                let c1 = j.both;
                let c2 = c1 + j.zz_only;
                let c3 = c2 + j.xx_only;
                [u32_threshold(c1), u32_threshold(c2), u32_threshold(c3)]
            }
            (_, None) => [0; 3],
        };
        let dual_offset = graphs.primal.nodes.len() as u32;
        let mut classes: [Vec<u32>; 4] = Default::default();
        let mut endpoints = Vec::with_capacity(graphs.outcomes.len());
        for (id, o) in graphs.outcomes.iter().enumerate() {
            let (graph, offset) = match o.lattice {
                LatticeKind::Primal => (&graphs.primal, 0),
                LatticeKind::Dual => (&graphs.dual, dual_offset),
            };
            let e = graph.edges[o.edge as usize];
            endpoints.push([e.a + offset, e.b + offset]);
            if o.erasable {
                classes[o.kind.index()].push(id as u32);
            }
        }
        let gsms = graphs
            .gsms
            .iter()
            .filter(|g| g.erasable)
            .map(|g| (g.first_outcome, g.bsms))
            .collect();
        Ok(Sampler {
            graphs,
            model,
            classes,
            gsms,
            endpoints,
            dual_offset,
            joint_cuts,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graphs.primal.nodes.len() + self.graphs.dual.nodes.len()
    }

    pub fn outcome_count(&self) -> usize {
        self.endpoints.len()
    }

    /// Calls `f` once per erased outcome id.
    pub fn for_each_erasure<R: RngCore, F: FnMut(u32)>(&self, rng: &mut R, mut f: F) {
        match self.model.mode {
            CorrelationMode::Independent => {
                for (kind, ids) in OutcomeType::ALL.iter().zip(&self.classes) {
                    let p = self.model.prob(*kind);
                    if p <= 0.0 || ids.is_empty() {
                        continue;
                    }
                    let skip = GeometricSkip::new(p);
                    let mut pos = 0usize;
                    loop {
                        pos = pos.saturating_add(skip.draw(rng));
                        if pos >= ids.len() {
                            break;
                        }
                        f(ids[pos]);
                        pos += 1;
                    }
                }
            }
            CorrelationMode::PerBsm => {
                let [c_both, c_zz, c_xx] = self.joint_cuts;
                for &(first, bsms) in &self.gsms {
                    let mut x_lost = false;
                    for i in 0..bsms {
                        let u = u64::from(rng.next_u32());
                        // Categories: both, zz only, xx only, neither.
                        let has_zz = u < c_zz;
                        let has_xx = u < c_both || (u >= c_zz && u < c_xx);
                        x_lost |= !has_xx;
                        if !has_zz {
                            f(first + 1 + i);
                        }
                    }
                    if x_lost {
                        f(first);
                    }
                }
            }
        }
    }

    /// One decoding trial with the given random stream.
    pub fn trial<R: RngCore>(&self, rng: &mut R, uf: &mut UnionFind) -> TrialResult {
        uf.reset();
        self.for_each_erasure(rng, |id| {
            let [a, b] = self.endpoints[id as usize];
            uf.union(a, b);
        });
        let (p, d) = (&self.graphs.primal, &self.graphs.dual);
        let primal = uf.connected(p.low, p.high);
        let dual = uf.connected(d.low + self.dual_offset, d.high + self.dual_offset);
        TrialResult {
            primal_percolated: primal,
            dual_percolated: dual,
            logical_error: primal || dual,
        }
    }

    pub fn scratch(&self) -> UnionFind {
        UnionFind::new(self.node_count())
    }
}

/// Erased outcome ids of one trial, sorted.
pub fn sample_erasures<R: RngCore>(
    graphs: &SyndromeGraphs,
    model: &ErasureModel,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let sampler = Sampler::new(graphs, *model)?;
    let mut out = Vec::new();
    sampler.for_each_erasure(rng, |id| out.push(id));
    out.sort_unstable();
    Ok(out)
}

/// Whether the erased edges (indices into `graph.edges`) join the two
/// boundary nodes.
pub fn percolates(graph: &SyndromeGraph, erased_edges: &[u32]) -> bool {
    let mut uf = UnionFind::new(graph.nodes.len());
    for &e in erased_edges {
        let edge = graph.edges[e as usize];
        uf.union(edge.a, edge.b);
    }
    uf.connected(graph.low, graph.high)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchResult {
    pub samples: u64,
    pub failures: u64,
    pub primal_failures: u64,
    pub dual_failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BatchResult {
    fn from_counts(samples: u64, failures: u64, primal: u64, dual: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, samples, Z95);
        BatchResult {
            samples,
            failures,
            primal_failures: primal,
            dual_failures: dual,
            rate: failures as f64 / samples as f64,
            ci_low,
            ci_high,
        }
    }
}

/// Samples per parallel work unit. Fixed so that work division never
/// depends on the thread count.
const CHUNK: u64 = 128;

/// Runs `samples` trials with random streams derived from `seed` and
/// counts failures. Uses the current rayon pool; the result does not depend
/// on its size.
pub fn run_batch(
    graphs: &SyndromeGraphs,
    model: &ErasureModel,
    samples: u64,
    seed: u64,
) -> Result<BatchResult> {
    if samples == 0 {
        return Err(Error::validation(
            "samples",
            "at least one sample is required",
        ));
    }
    let sampler = Sampler::new(graphs, *model)?;
    let chunks = samples.div_ceil(CHUNK);
    let (failures, primal, dual) = (0..chunks)
        .into_par_iter()
        .map_init(
            || sampler.scratch(),
            |uf, c| {
                let mut counts = (0u64, 0u64, 0u64);
                for s in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                    let mut rng = sample_rng(seed, s);
                    let r = sampler.trial(&mut rng, uf);
                    counts.0 += u64::from(r.logical_error);
                    counts.1 += u64::from(r.primal_percolated);
                    counts.2 += u64::from(r.dual_percolated);
                }
                counts
            },
        )
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(BatchResult::from_counts(samples, failures, primal, dual))
}

/// `run_batch` with the stream seed derived from a master seed and the
/// code distance.
pub fn run_batch_for_distance(
    graphs: &SyndromeGraphs,
    model: &ErasureModel,
    samples: u64,
    master_seed: u64,
) -> Result<BatchResult> {
    run_batch(
        graphs,
        model,
        samples,
        point_seed(master_seed, graphs.distance),
    )
}
