//! Randomized rounding of LP solutions into chromatic clusterings: cluster
//! sampling, color-wise pivoting, and the mixture of the two.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{CccError, Result};
use crate::model::{cost, pair_index, ChromaticClustering, EdgeColoring};
use crate::relax::{check_standard, induce_unchecked, ClusterDistribution, StandardSolution};
use crate::rng::RngStream;

/// Tolerance used when validating LP solutions handed to the rounders.
pub const INPUT_TOL: f64 = 1e-6;

type Unary = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Maps an edge's LP value to the probability of keeping the edge out of the
/// pivot's block, separately for same-color, gamma and other-color edges.
#[derive(Clone)]
pub struct RoundingFunctions {
    plus: Unary,
    minus: Unary,
    circ: Unary,
    greedy: bool,
}

impl RoundingFunctions {
    /// `f+ = 0`, `f- = f∘ = 1`: join exactly the same-color neighbors.
    pub fn greedy() -> Self {
        Self {
            plus: Arc::new(|_| 0.0),
            minus: Arc::new(|_| 1.0),
            circ: Arc::new(|_| 1.0),
            greedy: true,
        }
    }

    pub fn new(
        plus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        minus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        circ: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            plus: Arc::new(plus),
            minus: Arc::new(minus),
            circ: Arc::new(circ),
            greedy: false,
        }
    }

    pub fn is_greedy(&self) -> bool {
        self.greedy
    }

    fn clamp(p: f64) -> f64 {
        if p.is_nan() {
            1.0
        } else {
            p.clamp(0.0, 1.0)
        }
    }

    pub fn plus(&self, x: f64) -> f64 {
        Self::clamp((self.plus)(x))
    }

    pub fn minus(&self, x: f64) -> f64 {
        Self::clamp((self.minus)(x))
    }

    pub fn circ(&self, x: f64) -> f64 {
        Self::clamp((self.circ)(x))
    }

    /// Separation probability of `v` from a color-`c` pivot `u`.
    fn separation(&self, phi_uv: Option<usize>, c: usize, x: f64) -> f64 {
        match phi_uv {
            Some(d) if d == c => self.plus(x),
            None => self.minus(x),
            Some(_) => self.circ(x),
        }
    }
}

impl Default for RoundingFunctions {
    fn default() -> Self {
        Self::greedy()
    }
}

impl fmt::Debug for RoundingFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.greedy {
            f.write_str("RoundingFunctions::greedy")
        } else {
            f.write_str("RoundingFunctions::custom")
        }
    }
}

fn check_dist(phi: &EdgeColoring, dist: &ClusterDistribution) -> Result<()> {
    if dist.n() != phi.n() {
        return Err(CccError::VertexCountMismatch {
            expected: phi.n(),
            got: dist.n(),
        });
    }
    if dist.num_colors() != phi.num_colors() {
        return Err(CccError::Format(format!(
            "distribution has {} colors, instance has {}",
            dist.num_colors(),
            phi.num_colors()
        )));
    }
    dist.require_feasible()
}

fn check_solution(phi: &EdgeColoring, sol: &StandardSolution) -> Result<()> {
    if sol.n() != phi.n() {
        return Err(CccError::VertexCountMismatch {
            expected: phi.n(),
            got: sol.n(),
        });
    }
    if sol.num_colors() != phi.num_colors() {
        return Err(CccError::Format(format!(
            "solution has {} colors, instance has {}",
            sol.num_colors(),
            phi.num_colors()
        )));
    }
    let report = check_standard(sol, false);
    if !report.is_feasible(INPUT_TOL) {
        return Err(CccError::Infeasible {
            what: "standard LP solution",
            detail: format!("violated families: {:?}", report.violated(INPUT_TOL)),
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(1.5..=2.0).contains(&alpha) {
        return Err(CccError::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in [1.5, 2]",
        });
    }
    Ok(())
}

/// Cumulative weights of a distribution, for repeated sampling.
struct ClusterSampler<'a> {
    dist: &'a ClusterDistribution,
    cumulative: Vec<f64>,
}

impl<'a> ClusterSampler<'a> {
    fn new(dist: &'a ClusterDistribution) -> Self {
        let mut acc = 0.0;
        let cumulative = dist
            .entries()
            .iter()
            .map(|e| {
                acc += e.weight;
                acc
            })
            .collect();
        Self { dist, cumulative }
    }

    fn round(&self, rng: &mut RngStream) -> ChromaticClustering {
        let n = self.dist.n();
        let total = *self
            .cumulative
            .last()
            .expect("feasible distribution is nonempty");
        let entries = self.dist.entries();
        let mut remaining: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut blocks = Vec::new();
        let mut colors = Vec::new();
        while remaining != 0 {
            let r = rng.uniform() * total;
            let i = self
                .cumulative
                .partition_point(|&c| c <= r)
                .min(entries.len() - 1);
            let hit = entries[i].mask & remaining;
            if hit != 0 {
                blocks.push(crate::relax::mask_members(hit).collect());
                colors.push(entries[i].color);
                remaining &= !hit;
            }
        }
        ChromaticClustering::from_parts_unchecked(n, blocks, colors)
    }
}

/// Repeatedly samples `(S, c)` with probability proportional to its weight
/// and, if `S` meets the unclustered vertices, makes their intersection a
/// block of color `c`.
pub fn round_cluster_based(
    phi: &EdgeColoring,
    dist: &ClusterDistribution,
    rng: &mut RngStream,
) -> Result<ChromaticClustering> {
    check_dist(phi, dist)?;
    Ok(ClusterSampler::new(dist).round(rng))
}

fn pivot_unchecked(
    phi: &EdgeColoring,
    sol: &StandardSolution,
    f: &RoundingFunctions,
    rng: &mut RngStream,
) -> ChromaticClustering {
    let (n, l) = (phi.n(), phi.num_colors());
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); l];
    let mut blocks = Vec::new();
    let mut colors = Vec::new();
    for u in 0..n {
        match (0..l).find(|&c| sol.vertex(u, c) < 0.5) {
            Some(c) => classes[c].push(u),
            None => {
                blocks.push(vec![u]);
                colors.push(0);
            }
        }
    }
    let x = sol.x_edge();
    for (c, mut rest) in classes.into_iter().enumerate() {
        while !rest.is_empty() {
            let pivot = rest.remove(rng.index(rest.len()));
            let mut block = vec![pivot];
            let mut left = Vec::with_capacity(rest.len());
            for v in rest {
                let xc = x[pair_index(n, pivot, v) * l + c];
                let p = f.separation(phi.color(pivot, v), c, xc);
                if rng.uniform() < 1.0 - p {
                    block.push(v);
                } else {
                    left.push(v);
                }
            }
            rest = left;
            blocks.push(block);
            colors.push(c);
        }
    }
    ChromaticClustering::from_parts_unchecked(n, blocks, colors)
}

/// Vertices with `x_u^c < 1/2` form the class of color `c`; others become
/// singletons of color 0. Each class, in ascending color order, is split by
/// repeated uniform pivots; a vertex joins the pivot's block with probability
/// `1 - f(x_uv^c)` for the rounding function matching `phi(uv)`.
pub fn round_pivot_based(
    phi: &EdgeColoring,
    sol: &StandardSolution,
    f: &RoundingFunctions,
    rng: &mut RngStream,
) -> Result<ChromaticClustering> {
    check_solution(phi, sol)?;
    Ok(pivot_unchecked(phi, sol, f, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Cluster,
    Pivot,
}

struct MixedRounder<'a> {
    phi: &'a EdgeColoring,
    sampler: ClusterSampler<'a>,
    induced: StandardSolution,
    alpha: f64,
    f: &'a RoundingFunctions,
}

impl<'a> MixedRounder<'a> {
    fn new(
        phi: &'a EdgeColoring,
        dist: &'a ClusterDistribution,
        alpha: f64,
        f: &'a RoundingFunctions,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        check_dist(phi, dist)?;
        Ok(Self {
            phi,
            sampler: ClusterSampler::new(dist),
            induced: induce_unchecked(dist),
            alpha,
            f,
        })
    }

    fn round(&self, rng: &mut RngStream) -> (ChromaticClustering, Branch) {
        if rng.bernoulli(self.alpha / 2.0) {
            (self.sampler.round(rng), Branch::Cluster)
        } else {
            (
                pivot_unchecked(self.phi, &self.induced, self.f, rng),
                Branch::Pivot,
            )
        }
    }
}

/// Cluster-based rounding with probability `alpha / 2`, otherwise pivot
/// rounding of the induced standard solution.
pub fn round_mixed(
    phi: &EdgeColoring,
    dist: &ClusterDistribution,
    alpha: f64,
    f: &RoundingFunctions,
    rng: &mut RngStream,
) -> Result<ChromaticClustering> {
    Ok(round_mixed_with_branch(phi, dist, alpha, f, rng)?.0)
}

/// As [`round_mixed`], also reporting which branch ran.
pub fn round_mixed_with_branch(
    phi: &EdgeColoring,
    dist: &ClusterDistribution,
    alpha: f64,
    f: &RoundingFunctions,
    rng: &mut RngStream,
) -> Result<(ChromaticClustering, Branch)> {
    Ok(MixedRounder::new(phi, dist, alpha, f)?.round(rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    /// Standard error of the mean; `None` for a single trial.
    pub stderr: Option<f64>,
    pub trials: usize,
}

impl CostEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let k = samples.len();
        let mean = samples.iter().sum::<f64>() / k as f64;
        let stderr = (k > 1).then(|| {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        });
        Self {
            mean,
            stderr,
            trials: k,
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(CccError::InvalidParameter {
            name: "trials",
            value: 0.0,
            reason: "need at least one trial",
        });
    }
    Ok(())
}

/// Cost of `round` over `trials` independent runs; run `t` draws from
/// stream `t` of `seed`, so the result does not depend on thread scheduling.
pub fn estimate_cost_of<F>(
    phi: &EdgeColoring,
    trials: usize,
    seed: u64,
    round: F,
) -> Result<CostEstimate>
where
    F: Fn(&mut RngStream) -> ChromaticClustering + Sync,
{
    check_trials(trials)?;
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::with_stream(seed, t);
            let cl = round(&mut rng);
            cost(phi, &cl).expect("rounders return clusterings over the instance") as f64
        })
        .collect();
    Ok(CostEstimate::from_samples(&samples))
}

/// Mean and standard error of the mixed rounding's cost.
pub fn estimate_expected_cost(
    phi: &EdgeColoring,
    dist: &ClusterDistribution,
    alpha: f64,
    f: &RoundingFunctions,
    trials: usize,
    seed: u64,
) -> Result<CostEstimate> {
    check_trials(trials)?;
    let rounder = MixedRounder::new(phi, dist, alpha, f)?;
    estimate_cost_of(phi, trials, seed, |rng| rounder.round(rng).0)
}

/// Mean and standard error of cluster-based rounding alone.
pub fn estimate_cluster_cost(
    phi: &EdgeColoring,
    dist: &ClusterDistribution,
    trials: usize,
    seed: u64,
) -> Result<CostEstimate> {
    check_trials(trials)?;
    check_dist(phi, dist)?;
    let sampler = ClusterSampler::new(dist);
    estimate_cost_of(phi, trials, seed, |rng| sampler.round(rng))
}
