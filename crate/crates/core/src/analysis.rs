//! Numerical checks of the pivot-charging analysis and of the closed-form
//! co-clustering probabilities of cluster-based rounding.
//!
//! Within one color class every edge carries a sign: `+` (same color), `-`
//! (gamma) or `∘` (another color). With the greedy rounding functions a pivot
//! takes exactly its `+` neighbors, so the expected violations charged to a
//! triangle (ALG) depend only on the signs, while the LP charge is a sum of
//! per-edge budgets `b` scaled by the probability that the pivot touches the
//! edge. The sweeps below evaluate ALG <= LP and the per-edge sufficiency
//! inequalities on closed grids.

use std::fmt;

use rayon::prelude::*;

use crate::error::{CccError, Result};
use crate::model::EdgeColoring;
use crate::relax::{induce_unchecked, ClusterDistribution};
use crate::rng::RngStream;

/// Absolute tolerance for calling a gap a violation or a tight point.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
    Circ,
}

impl Sign {
    /// Greedy rejection probability: a pivot keeps only `+` neighbors.
    fn greedy_p(self) -> f64 {
        match self {
            Sign::Plus => 0.0,
            Sign::Minus | Sign::Circ => 1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
            Sign::Circ => "o",
        })
    }
}

/// The four sign patterns with nonzero greedy ALG, edges ordered `(uv, vw, wu)`.
pub const PATTERNS: [[Sign; 3]; 4] = [
    [Sign::Plus, Sign::Plus, Sign::Minus],
    [Sign::Plus, Sign::Plus, Sign::Circ],
    [Sign::Plus, Sign::Minus, Sign::Circ],
    [Sign::Plus, Sign::Circ, Sign::Circ],
];

pub fn pattern_name(signs: &[Sign; 3]) -> String {
    format!("({},{},{})", signs[0], signs[1], signs[2])
}

fn check_domain(name: &'static str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&x) {
        return Err(CccError::InvalidParameter {
            name,
            value: x,
            reason: "outside the function's domain",
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(1.5..2.0).contains(&alpha) {
        return Err(CccError::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in [1.5, 2)",
        });
    }
    Ok(())
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(CccError::InvalidParameter {
            name: "step",
            value: step,
            reason: "must lie in (0, 0.1]",
        });
    }
    Ok(())
}

#[inline]
fn g_raw(x: f64) -> f64 {
    x * x / (1.0 + x)
}

#[inline]
fn h_raw(x: f64) -> f64 {
    (3.0 - 2.0 * x) * x / (2.0 * (2.0 - x))
}

/// `g(x) = x² / (1 + x)` on `[0, 1]`.
pub fn g(x: f64) -> Result<f64> {
    check_domain("x", x, 0.0, 1.0)?;
    Ok(g_raw(x))
}

/// `h(x) = (3 - 2x)x / (2(2 - x))` on `[0, 1]`.
pub fn h(x: f64) -> Result<f64> {
    check_domain("x", x, 0.0, 1.0)?;
    Ok(h_raw(x))
}

/// `alpha / (1 - alpha/2)`; equals 9 at `alpha = 18/11`.
pub fn budget_prefactor(alpha: f64) -> f64 {
    alpha / (1.0 - alpha / 2.0)
}

#[inline]
fn budget_raw(sign: Sign, x: f64, m: f64, pref: f64) -> f64 {
    pref * match sign {
        Sign::Plus => g_raw(x),
        Sign::Minus => h_raw(1.0 - x),
        Sign::Circ => g_raw(m),
    }
}

/// Charging budget of an edge: the prefactor times `g(x)` for `+`,
/// `h(1 - x)` for `-` and `g(m)` for `∘`, where `m` is the triangle's
/// `max{1/2, 1-x, 1-y, 1-z}` (ignored unless the sign is `∘`).
pub fn budget_b(sign: Sign, x: f64, m: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_domain("x", x, 0.0, 1.0)?;
    if sign == Sign::Circ {
        check_domain("m", m, 0.5, 1.0)?;
    }
    Ok(budget_raw(sign, x, m, budget_prefactor(alpha)))
}

/// Signs and LP values `(x, y, z)` of the edges `(uv, vw, wu)` of a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleConfig {
    pub signs: [Sign; 3],
    pub xs: [f64; 3],
}

impl TriangleConfig {
    /// Checks `xs` lie in `[0, 1]` and satisfy the triangle inequality.
    pub fn new(signs: [Sign; 3], xs: [f64; 3]) -> Result<Self> {
        for &x in &xs {
            check_domain("x", x, 0.0, 1.0)?;
        }
        let [x, y, z] = xs;
        if x > y + z + 1e-12 || y > x + z + 1e-12 || z > x + y + 1e-12 {
            return Err(CccError::InvalidParameter {
                name: "xs",
                value: x.max(y).max(z),
                reason: "violates the triangle inequality",
            });
        }
        Ok(Self { signs, xs })
    }

    fn m(&self) -> f64 {
        let [x, y, z] = self.xs;
        0.5f64.max(1.0 - x).max(1.0 - y).max(1.0 - z)
    }
}

/// Indices of the other two edges; both share a vertex with edge `i` and meet
/// at the vertex opposite to it, which is the pivot for edge `i`.
const OTHERS: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

fn alg_raw(signs: &[Sign; 3]) -> f64 {
    let mut total = 0.0;
    for (i, &(j, k)) in OTHERS.iter().enumerate() {
        let (pj, pk) = (signs[j].greedy_p(), signs[k].greedy_p());
        total += match signs[i] {
            Sign::Plus => pj * (1.0 - pk) + (1.0 - pj) * pk,
            Sign::Minus => (1.0 - pj) * (1.0 - pk),
            Sign::Circ => 1.0 - pj * pk,
        };
    }
    total
}

fn lp_raw(signs: &[Sign; 3], xs: &[f64; 3], pref: f64) -> f64 {
    let m = 0.5f64.max(1.0 - xs[0]).max(1.0 - xs[1]).max(1.0 - xs[2]);
    let mut total = 0.0;
    for (i, &(j, k)) in OTHERS.iter().enumerate() {
        let touch = 1.0 - signs[j].greedy_p() * signs[k].greedy_p();
        if touch != 0.0 {
            total += touch * budget_raw(signs[i], xs[i], m, pref);
        }
    }
    total
}

/// Expected violations on the triangle's edges over its three pivots, with
/// greedy rounding.
pub fn alg_triangle(config: &TriangleConfig) -> f64 {
    alg_raw(&config.signs)
}

/// Budgeted LP charge of the triangle with greedy rounding.
pub fn lp_triangle(config: &TriangleConfig, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    debug_assert!(config.m() >= 0.5);
    Ok(lp_raw(&config.signs, &config.xs, budget_prefactor(alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePoint {
    pub signs: [Sign; 3],
    pub xs: [f64; 3],
    pub alg: f64,
    pub lp: f64,
    /// Whether the point came from the perturbation pass.
    pub perturbed: bool,
}

impl TrianglePoint {
    pub fn gap(&self) -> f64 {
        self.lp - self.alg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSummary {
    pub signs: [Sign; 3],
    pub points_checked: usize,
    pub min_gap: f64,
    pub argmin: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport {
    pub alpha: f64,
    pub step: f64,
    pub points_checked: usize,
    pub perturbed_checked: usize,
    pub violations: Vec<TrianglePoint>,
    pub min_gap: f64,
    pub tight_points: Vec<TrianglePoint>,
    pub patterns: Vec<PatternSummary>,
}

fn grid_size(step: f64) -> usize {
    (1.0 / step).round().max(1.0) as usize
}

/// Moves a point back into the triangle-feasible region by shrinking the one
/// coordinate that exceeds the sum of the other two.
fn project_triangle(mut xs: [f64; 3]) -> [f64; 3] {
    for v in &mut xs {
        *v = v.clamp(0.0, 1.0);
    }
    for i in 0..3 {
        let (j, k) = OTHERS[i];
        let bound = xs[j] + xs[k];
        if xs[i] > bound {
            xs[i] = bound;
        }
    }
    xs
}

struct Partial {
    checked: usize,
    violations: Vec<TrianglePoint>,
    tight: Vec<TrianglePoint>,
    near: Vec<TrianglePoint>,
    min: Option<TrianglePoint>,
}

impl Partial {
    fn new() -> Self {
        Self {
            checked: 0,
            violations: Vec::new(),
            tight: Vec::new(),
            near: Vec::new(),
            min: None,
        }
    }

    fn see(&mut self, p: TrianglePoint, near_band: f64) {
        self.checked += 1;
        let gap = p.gap();
        if gap < -GAP_TOL {
            self.violations.push(p);
        }
        if gap.abs() <= GAP_TOL {
            self.tight.push(p);
        }
        if gap <= near_band {
            self.near.push(p);
        }
        if self.min.is_none_or(|m| gap < m.gap()) {
            self.min = Some(p);
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.checked += other.checked;
        self.violations.extend(other.violations);
        self.tight.extend(other.tight);
        self.near.extend(other.near);
        if let Some(o) = other.min {
            if self.min.is_none_or(|m| o.gap() < m.gap()) {
                self.min = Some(o);
            }
        }
        self
    }
}

/// Sweeps the four sign patterns over every triangle-feasible point of the
/// grid `{0, step, ..., 1}³`, then re-checks every point within `step` of
/// tight at the 26 offsets of `±step/10`.
pub fn verify_triangle_inequality(alpha: f64, step: f64) -> Result<TriangleReport> {
    check_alpha(alpha)?;
    check_step(step)?;
    let n = grid_size(step);
    let scale = 1.0 / n as f64;
    let pref = budget_prefactor(alpha);
    let delta = step / 10.0;
    let mut report = TriangleReport {
        alpha,
        step,
        points_checked: 0,
        perturbed_checked: 0,
        violations: Vec::new(),
        min_gap: f64::INFINITY,
        tight_points: Vec::new(),
        patterns: Vec::new(),
    };
    for signs in PATTERNS {
        let alg = alg_raw(&signs);
        let grid = (0..=n)
            .into_par_iter()
            .map(|i| {
                let mut part = Partial::new();
                for j in 0..=n {
                    for k in 0..=n {
                        if i > j + k || j > i + k || k > i + j {
                            continue;
                        }
                        let xs = [i as f64 * scale, j as f64 * scale, k as f64 * scale];
                        let lp = lp_raw(&signs, &xs, pref);
                        let p = TrianglePoint {
                            signs,
                            xs,
                            alg,
                            lp,
                            perturbed: false,
                        };
                        part.see(p, step);
                    }
                }
                part
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Partial::new(), Partial::merge);

        let offsets: Vec<[f64; 3]> = (0..27)
            .filter(|&code| code != 13)
            .map(|code| {
                let d = |t: usize| (t as f64 - 1.0) * delta;
                [d(code % 3), d(code / 3 % 3), d(code / 9)]
            })
            .collect();
        let mut perturbed = Partial::new();
        for base in &grid.near {
            for off in &offsets {
                let xs = project_triangle([
                    base.xs[0] + off[0],
                    base.xs[1] + off[1],
                    base.xs[2] + off[2],
                ]);
                let p = TrianglePoint {
                    signs,
                    xs,
                    alg,
                    lp: lp_raw(&signs, &xs, pref),
                    perturbed: true,
                };
                perturbed.see(p, f64::NEG_INFINITY);
            }
        }

        let min = [grid.min, perturbed.min]
            .into_iter()
            .flatten()
            .min_by(|a, b| a.gap().total_cmp(&b.gap()))
            .expect("grid is nonempty");
        report.points_checked += grid.checked;
        report.perturbed_checked += perturbed.checked;
        report.violations.extend(grid.violations);
        report.violations.extend(perturbed.violations);
        report.tight_points.extend(grid.tight);
        report.min_gap = report.min_gap.min(min.gap());
        report.patterns.push(PatternSummary {
            signs,
            points_checked: grid.checked + perturbed.checked,
            min_gap: min.gap(),
            argmin: min.xs,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChargeCase {
    /// Colored edge whose color is the pivot class color.
    ColoredMatch,
    /// Gamma edge inside the pivot class.
    Gamma,
    /// Colored edge of another color inside the pivot class.
    ColoredMismatch,
    /// Colored edge whose endpoints share no pivot class.
    UnpivotedColored,
}

impl ChargeCase {
    pub const ALL: [ChargeCase; 4] = [
        ChargeCase::ColoredMatch,
        ChargeCase::Gamma,
        ChargeCase::ColoredMismatch,
        ChargeCase::UnpivotedColored,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChargeCase::ColoredMatch => "colored_match",
            ChargeCase::Gamma => "gamma",
            ChargeCase::ColoredMismatch => "colored_mismatch",
            ChargeCase::UnpivotedColored => "unpivoted_colored",
        }
    }

    /// Names of the scalars of a point of this case, in order.
    pub fn scalar_names(self) -> &'static [&'static str] {
        match self {
            ChargeCase::ColoredMatch => &["x", "r"],
            ChargeCase::Gamma => &["x", "s"],
            ChargeCase::ColoredMismatch => &["x", "r", "m"],
            ChargeCase::UnpivotedColored => &["x"],
        }
    }
}

/// Left side (expected cost) and right side (`alpha` times LP value) of one
/// per-edge sufficiency inequality.
///
/// Scalars: `ColoredMatch` takes the edge's own-color value `x` and the mass
/// `r` of the other colors; `Gamma` takes the class color's `x` and the total
/// co-clustering mass `s`; `ColoredMismatch` adds the triangle maximum `m`;
/// `UnpivotedColored` takes `x`.
pub fn charge_sides(case: ChargeCase, scalars: &[f64], alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if scalars.len() != case.scalar_names().len() {
        return Err(CccError::Format(format!(
            "{} takes {} scalars, got {}",
            case.name(),
            case.scalar_names().len(),
            scalars.len()
        )));
    }
    Ok(charge_raw(case, scalars, alpha))
}

fn charge_raw(case: ChargeCase, s: &[f64], alpha: f64) -> (f64, f64) {
    let pref = budget_prefactor(alpha);
    let half = alpha / 2.0;
    match case {
        ChargeCase::ColoredMatch => {
            let (x, r) = (s[0], s[1]);
            let lhs = half * (2.0 * x - r) / (1.0 + x - r)
                + (1.0 - half) * budget_raw(Sign::Plus, x, 0.0, pref);
            (lhs, alpha * x)
        }
        ChargeCase::Gamma => {
            let (x, t) = (s[0], s[1]);
            let lhs = half * t / (2.0 - t) + (1.0 - half) * budget_raw(Sign::Minus, x, 0.0, pref);
            (lhs, alpha * t)
        }
        ChargeCase::ColoredMismatch => {
            let (x, r, m) = (s[0], s[1], s[2]);
            let lhs = half * (2.0 * x - r) / (1.0 + x - r)
                + (1.0 - half) * budget_raw(Sign::Circ, x, m, pref);
            (lhs, alpha * x)
        }
        ChargeCase::UnpivotedColored => {
            let x = s[0];
            (1.0 - half * (1.0 - x) / (1.0 + x), alpha * x)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargePoint {
    pub case: ChargeCase,
    pub scalars: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

impl ChargePoint {
    pub fn gap(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub case: ChargeCase,
    pub points_checked: usize,
    pub violations: Vec<ChargePoint>,
    pub min_gap: f64,
    pub argmin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargingReport {
    pub alpha: f64,
    pub step: f64,
    pub cases: Vec<CaseReport>,
}

impl ChargingReport {
    pub fn total_violations(&self) -> usize {
        self.cases.iter().map(|c| c.violations.len()).sum()
    }

    pub fn case(&self, case: ChargeCase) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.case == case)
    }
}

impl TriangleReport {
    pub fn pattern(&self, signs: [Sign; 3]) -> Option<&PatternSummary> {
        self.patterns.iter().find(|p| p.signs == signs)
    }
}

/// Grid points of `[lo, hi]` at multiples of `1/n`, plus `lo` itself when it
/// is off the grid.
fn grid_range(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let first = (lo * n as f64 - 1e-9).ceil().max(0.0) as usize;
    let last = (hi * n as f64 + 1e-9).floor() as usize;
    let mut out = Vec::new();
    let on = first as f64 / n as f64;
    if (on - lo).abs() > 1e-12 && lo <= hi {
        out.push(lo);
    }
    out.extend((first..=last.min(n)).map(|k| k as f64 / n as f64));
    out
}

/// Sweeps the per-edge sufficiency inequalities over their feasible boxes:
/// `ColoredMatch` over `x ∈ [0,1], r ∈ [0,x]`; `Gamma` over `x ∈ [0,1],
/// s ∈ [1-x, 1]`; `ColoredMismatch` over `x ∈ [1/2,1], r ∈ [0,x],
/// m ∈ [1/2, x]`; `UnpivotedColored` over `x ∈ [1/2, 1]`.
pub fn verify_charging(alpha: f64, step: f64) -> Result<ChargingReport> {
    check_alpha(alpha)?;
    check_step(step)?;
    let n = grid_size(step);
    let xs = grid_range(0.0, 1.0, n);
    let mut cases = Vec::new();
    for case in ChargeCase::ALL {
        let points: Vec<Vec<f64>> = match case {
            ChargeCase::ColoredMatch => xs
                .iter()
                .flat_map(|&x| grid_range(0.0, x, n).into_iter().map(move |r| vec![x, r]))
                .collect(),
            ChargeCase::Gamma => xs
                .iter()
                .flat_map(|&x| {
                    grid_range(1.0 - x, 1.0, n)
                        .into_iter()
                        .map(move |s| vec![x, s])
                })
                .collect(),
            ChargeCase::ColoredMismatch => grid_range(0.5, 1.0, n)
                .into_iter()
                .flat_map(|x| {
                    grid_range(0.0, x, n).into_iter().flat_map(move |r| {
                        grid_range(0.5, x, n)
                            .into_iter()
                            .map(move |m| vec![x, r, m])
                    })
                })
                .collect(),
            ChargeCase::UnpivotedColored => grid_range(0.5, 1.0, n)
                .into_iter()
                .map(|x| vec![x])
                .collect(),
        };
        let mut report = CaseReport {
            case,
            points_checked: points.len(),
            violations: Vec::new(),
            min_gap: f64::INFINITY,
            argmin: Vec::new(),
        };
        for scalars in points {
            let (lhs, rhs) = charge_raw(case, &scalars, alpha);
            let gap = rhs - lhs;
            if gap < report.min_gap {
                report.min_gap = gap;
                report.argmin = scalars.clone();
            }
            if gap < -GAP_TOL {
                report.violations.push(ChargePoint {
                    case,
                    scalars,
                    lhs,
                    rhs,
                });
            }
        }
        cases.push(report);
    }
    Ok(ChargingReport { alpha, step, cases })
}

/// What cluster-based rounding can get wrong on a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Colored(usize),
    Gamma,
}

/// Closed-form violation probability of a pair under cluster-based rounding,
/// from its per-color values `x^c`: with `a = Σ_c (1 - x^c)` the pair ends up
/// together with probability `a / (2 - a)`, and together under color `c` with
/// probability `(1 - x^c) / (2 - a)`.
pub fn cluster_violation_probability(kind: EdgeKind, x: &[f64]) -> Result<f64> {
    let a: f64 = x.iter().map(|v| 1.0 - v).sum();
    if x.iter().any(|v| !(-1e-9..=1.0 + 1e-9).contains(v)) || !(-1e-9..=1.0 + 1e-9).contains(&a) {
        return Err(CccError::InvalidParameter {
            name: "x",
            value: a,
            reason: "total co-clustering mass must lie in [0, 1]",
        });
    }
    let a = a.clamp(0.0, 1.0);
    Ok(match kind {
        EdgeKind::Gamma => a / (2.0 - a),
        EdgeKind::Colored(c) => {
            if c >= x.len() {
                return Err(CccError::ColorOutOfRange {
                    color: c,
                    num_colors: x.len(),
                });
            }
            1.0 - (1.0 - x[c]).clamp(0.0, 1.0) / (2.0 - a)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub u: usize,
    pub v: usize,
    pub predicted: f64,
    pub empirical: f64,
    /// Standardized difference; 0 or infinite when the prediction is 0 or 1.
    pub z: f64,
    pub flagged: bool,
}

/// Runs cluster-based rounding `trials` times (trial `t` on stream `t` of
/// `seed`) and compares each pair's violation frequency with
/// [`cluster_violation_probability`] of the induced values.
pub fn montecarlo_check(
    phi: &EdgeColoring,
    dist: &ClusterDistribution,
    trials: usize,
    seed: u64,
) -> Result<Vec<PairCheck>> {
    if trials == 0 {
        return Err(CccError::InvalidParameter {
            name: "trials",
            value: 0.0,
            reason: "need at least one trial",
        });
    }
    // validate once up front so sampling errors surface as errors, not panics
    crate::rounding::round_cluster_based(phi, dist, &mut RngStream::new(seed))?;
    let pairs: Vec<(usize, usize, Option<usize>)> = phi.iter_pairs().collect();
    let counts = (0..trials as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; pairs.len()],
            |mut acc, t| {
                let mut rng = RngStream::with_stream(seed, t);
                let cl = crate::rounding::round_cluster_based(phi, dist, &mut rng)
                    .expect("distribution validated by the first trial");
                let of = cl.membership();
                for (i, &(u, v, c)) in pairs.iter().enumerate() {
                    let together = of[u] == of[v];
                    let bad = match c {
                        None => together,
                        Some(c) => !(together && cl.colors()[of[u]] == c),
                    };
                    acc[i] += bad as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; pairs.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let induced = induce_unchecked(dist);
    let l = phi.num_colors();
    let mut out = Vec::with_capacity(pairs.len());
    for (i, &(u, v, c)) in pairs.iter().enumerate() {
        let x: Vec<f64> = (0..l).map(|k| induced.edge(u, v, k)).collect();
        let kind = c.map_or(EdgeKind::Gamma, EdgeKind::Colored);
        let predicted = cluster_violation_probability(kind, &x)?;
        let empirical = counts[i] as f64 / trials as f64;
        let (z, flagged) = if predicted <= 1e-9 || predicted >= 1.0 - 1e-9 {
            let exact = (empirical - predicted.round()).abs() == 0.0;
            (if exact { 0.0 } else { f64::INFINITY }, !exact)
        } else {
            let se = (predicted * (1.0 - predicted) / trials as f64).sqrt();
            let z = (empirical - predicted) / se;
            (z, z.abs() > 3.0)
        };
        out.push(PairCheck {
            u,
            v,
            predicted,
            empirical,
            z,
            flagged,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relax::{solve_cluster, ClusterEntry};
    use crate::ALPHA_18_11;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn helper_values() {
        assert!(close(g(0.5).unwrap(), 1.0 / 6.0));
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert_eq!(h(0.0).unwrap(), 0.0);
        assert!(close(h(1.0).unwrap(), 0.5));
        assert!(g(1.1).is_err());
        assert!(h(-0.1).is_err());
    }

    #[test]
    fn helpers_monotone_and_g_convex() {
        let n = 10_000;
        let at = |i: usize| i as f64 / n as f64;
        for i in 0..n {
            assert!(g_raw(at(i + 1)) >= g_raw(at(i)));
            assert!(h_raw(at(i + 1)) >= h_raw(at(i)));
        }
        for i in 1..n {
            let second = g_raw(at(i + 1)) - 2.0 * g_raw(at(i)) + g_raw(at(i - 1));
            assert!(second > 0.0, "i={i}");
        }
    }

    #[test]
    fn budget_examples() {
        assert!((budget_prefactor(ALPHA_18_11) - 9.0).abs() < 1e-12);
        assert!((budget_b(Sign::Plus, 0.5, 0.5, ALPHA_18_11).unwrap() - 1.5).abs() < 1e-12);
        assert!(budget_b(Sign::Minus, 1.0, 0.5, ALPHA_18_11).unwrap().abs() < 1e-12);
        assert!((budget_b(Sign::Circ, 0.3, 0.5, ALPHA_18_11).unwrap() - 1.5).abs() < 1e-12);
        assert!(budget_b(Sign::Plus, 0.5, 0.5, 2.0).is_err());
        assert!(budget_b(Sign::Circ, 0.5, 0.4, ALPHA_18_11).is_err());
    }

    #[test]
    fn alg_constants() {
        use Sign::*;
        let expect = [
            ([Plus, Plus, Minus], 3.0),
            ([Plus, Plus, Circ], 3.0),
            ([Plus, Minus, Circ], 1.0),
            ([Plus, Circ, Circ], 2.0),
        ];
        for (signs, alg) in expect {
            assert_eq!(alg_raw(&signs), alg);
        }
        let all = [Plus, Minus, Circ];
        for a in all {
            for b in all {
                for c in all {
                    let s = [a, b, c];
                    let mut sorted = s;
                    sorted.sort();
                    if !PATTERNS.contains(&sorted) {
                        assert_eq!(alg_raw(&s), 0.0, "{}", pattern_name(&s));
                    }
                    assert_eq!(alg_raw(&s), alg_raw(&sorted));
                }
            }
        }
    }

    #[test]
    fn lp_at_known_points() {
        use Sign::*;
        let c = TriangleConfig::new([Plus, Plus, Minus], [0.5, 0.5, 1.0]).unwrap();
        assert_eq!(alg_triangle(&c), 3.0);
        assert!((lp_triangle(&c, ALPHA_18_11).unwrap() - 3.0).abs() < 1e-12);
        assert!(TriangleConfig::new([Plus, Plus, Minus], [0.2, 0.2, 1.0]).is_err());
        // pivot at the vertex opposite the + edge keeps neither endpoint
        let c = TriangleConfig::new([Plus, Minus, Circ], [0.3, 0.6, 0.5]).unwrap();
        let expected = 9.0 * (h_raw(1.0 - 0.6) + g_raw(0.7));
        assert!((lp_triangle(&c, ALPHA_18_11).unwrap() - expected).abs() < 1e-12);
        assert!(lp_triangle(&c, ALPHA_18_11).unwrap() >= 1.5);
    }

    #[test]
    fn lp_nondecreasing_in_alpha() {
        let c = TriangleConfig::new([Sign::Plus, Sign::Plus, Sign::Circ], [0.4, 0.3, 0.6]).unwrap();
        let mut prev = 0.0;
        for k in 0..50 {
            let alpha = 1.5 + k as f64 * 0.0099;
            let lp = lp_triangle(&c, alpha).unwrap();
            assert!(lp >= prev);
            prev = lp;
        }
    }

    #[test]
    fn coarse_triangle_sweep() {
        let r = verify_triangle_inequality(ALPHA_18_11, 0.05).unwrap();
        assert!(r.violations.is_empty());
        assert!(r.min_gap.abs() < 1e-9);
        assert!(r
            .tight_points
            .iter()
            .any(|p| p.signs == PATTERNS[0] && p.xs == [0.5, 0.5, 1.0]));
        assert!(verify_triangle_inequality(2.0, 0.05).is_err());
        assert!(verify_triangle_inequality(ALPHA_18_11, 0.2).is_err());
    }

    #[test]
    fn projection_restores_feasibility() {
        let xs = project_triangle([0.49, 0.49, 1.01]);
        assert_eq!(xs, [0.49, 0.49, 0.98]);
    }

    #[test]
    fn charging_boundaries() {
        // r = 0 makes the matched-color inequality an identity
        let (lhs, rhs) = charge_sides(ChargeCase::ColoredMatch, &[0.5, 0.0], 1.5).unwrap();
        assert!((rhs - lhs).abs() < 1e-12);
        let (lhs, rhs) = charge_sides(ChargeCase::UnpivotedColored, &[0.5], 1.5).unwrap();
        assert!((rhs - lhs).abs() < 1e-12);
        let (lhs, rhs) = charge_sides(ChargeCase::UnpivotedColored, &[0.5], 1.51).unwrap();
        assert!(rhs > lhs);
        // s = 1 - x reduces the gamma case to h(s) <= h(s)
        for x in [0.0, 0.3, 0.9] {
            let (lhs, rhs) = charge_sides(ChargeCase::Gamma, &[x, 1.0 - x], ALPHA_18_11).unwrap();
            assert!(rhs - lhs >= -1e-12);
        }
        assert!(charge_sides(ChargeCase::Gamma, &[0.5], ALPHA_18_11).is_err());
    }

    #[test]
    fn coarse_charging_sweep() {
        let r = verify_charging(ALPHA_18_11, 0.05).unwrap();
        assert_eq!(r.total_violations(), 0);
        assert_eq!(r.cases.len(), 4);
    }

    #[test]
    fn grid_range_includes_offgrid_lower_end() {
        assert_eq!(grid_range(0.5, 0.7, 3), vec![0.5, 2.0 / 3.0]);
        assert_eq!(grid_range(0.0, 0.5, 4), vec![0.0, 0.25, 0.5]);
    }

    #[test]
    fn probability_examples() {
        assert_eq!(
            cluster_violation_probability(EdgeKind::Gamma, &[1.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(
            cluster_violation_probability(EdgeKind::Colored(0), &[0.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(
            cluster_violation_probability(EdgeKind::Gamma, &[0.0, 1.0]).unwrap(),
            1.0
        );
        assert!(cluster_violation_probability(EdgeKind::Gamma, &[0.0, 0.0]).is_err());
        assert!(cluster_violation_probability(EdgeKind::Colored(2), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn montecarlo_integral_is_exact() {
        let phi = EdgeColoring::from_pairs(4, 2, [(0, 1, 0), (2, 3, 1)]).unwrap();
        let dist = ClusterDistribution::new(
            4,
            2,
            vec![
                ClusterEntry {
                    mask: 0b0011,
                    color: 0,
                    weight: 1.0,
                },
                ClusterEntry {
                    mask: 0b1100,
                    color: 1,
                    weight: 1.0,
                },
            ],
        )
        .unwrap();
        let rows = montecarlo_check(&phi, &dist, 10, 3).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows {
            assert!(r.predicted == 0.0 || r.predicted == 1.0);
            assert_eq!(r.empirical, r.predicted);
            assert!(!r.flagged);
        }
    }

    #[test]
    fn montecarlo_t1() {
        let phi = EdgeColoring::from_pairs(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap();
        let (_, dist) = solve_cluster(&phi).unwrap();
        let rows = montecarlo_check(&phi, &dist, 10_000, 2024).unwrap();
        assert!(rows.iter().all(|r| !r.flagged), "{rows:?}");
    }
}
