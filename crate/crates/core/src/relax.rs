//! LP relaxations: the standard per-color metric LP (optionally with the
//! strengthened triangle rows) and the exact chromatic cluster LP over all
//! nonempty subsets, plus conversions and feasibility checks.

use crate::error::{CccError, Result};
use crate::lp::{self, LinearProgram, LpStatus, Relation};
use crate::model::{pair_count, pair_index, pairs, EdgeColoring};

/// Largest `n` for which the cluster LP is built by default.
pub const CLUSTER_LP_CAP: usize = 12;

/// Mass below which a cluster-LP weight is dropped after solving.
pub const CLEANUP_THRESHOLD: f64 = 1e-9;

/// Tolerance on per-vertex mass when validating a distribution.
pub const MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relaxation {
    Standard,
    Strong,
    Cluster,
}

/// Variables of the standard LP: `x_u^c` per vertex/color and `x_uv^c` per
/// pair/color, pairs in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSolution {
    n: usize,
    num_colors: usize,
    x_vertex: Vec<f64>,
    x_edge: Vec<f64>,
}

impl StandardSolution {
    pub fn new(n: usize, num_colors: usize, x_vertex: Vec<f64>, x_edge: Vec<f64>) -> Result<Self> {
        if x_vertex.len() != n * num_colors || x_edge.len() != pair_count(n) * num_colors {
            return Err(CccError::Format(format!(
                "standard solution arrays have lengths {} and {}, expected {} and {}",
                x_vertex.len(),
                x_edge.len(),
                n * num_colors,
                pair_count(n) * num_colors
            )));
        }
        Ok(Self {
            n,
            num_colors,
            x_vertex,
            x_edge,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    #[inline]
    pub fn vertex(&self, u: usize, c: usize) -> f64 {
        self.x_vertex[u * self.num_colors + c]
    }

    #[inline]
    pub fn edge(&self, u: usize, v: usize, c: usize) -> f64 {
        self.x_edge[pair_index(self.n, u, v) * self.num_colors + c]
    }

    pub fn x_vertex(&self) -> &[f64] {
        &self.x_vertex
    }

    pub fn x_edge(&self) -> &[f64] {
        &self.x_edge
    }

    /// Standard-LP objective of this point.
    pub fn objective(&self, phi: &EdgeColoring) -> f64 {
        let mut total = 0.0;
        for (u, v, c) in phi.iter_pairs() {
            total += match c {
                Some(c) => self.edge(u, v, c),
                None => (0..self.num_colors).map(|c| 1.0 - self.edge(u, v, c)).sum(),
            };
        }
        total
    }
}

struct StandardLayout {
    n: usize,
    l: usize,
}

impl StandardLayout {
    fn vertex(&self, u: usize, c: usize) -> usize {
        u * self.l + c
    }

    fn edge(&self, u: usize, v: usize, c: usize) -> usize {
        self.n * self.l + pair_index(self.n, u, v) * self.l + c
    }
}

fn check_dims(phi: &EdgeColoring) -> Result<()> {
    if phi.n() == 0 {
        return Err(CccError::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "need at least one vertex",
        });
    }
    if phi.num_colors() == 0 {
        return Err(CccError::InvalidParameter {
            name: "L",
            value: 0.0,
            reason: "need at least one color",
        });
    }
    Ok(())
}

/// Triangle rows `x_{first,middle} + x_{middle,last} >= x_{last,first}`
/// per triple, rotation and color; the strengthened form also subtracts
/// `x_middle`.
fn triangle_rows(n: usize, l: usize, strengthened: bool) -> Vec<Vec<(usize, f64)>> {
    let lay = StandardLayout { n, l };
    let mut rows = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for d in b + 1..n {
                for (p, mid, q) in [(a, b, d), (b, d, a), (d, a, b)] {
                    for c in 0..l {
                        let mut row = vec![
                            (lay.edge(p, mid, c), 1.0),
                            (lay.edge(mid, q, c), 1.0),
                            (lay.edge(q, p, c), -1.0),
                        ];
                        if strengthened {
                            row.push((lay.vertex(mid, c), -1.0));
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    rows
}

/// Variables, objective, edge-dominates-vertex rows and vertex sums.
fn standard_base(phi: &EdgeColoring) -> Result<LinearProgram> {
    check_dims(phi)?;
    let (n, l) = (phi.n(), phi.num_colors());
    let lay = StandardLayout { n, l };
    let mut lp = LinearProgram::new();
    for _ in 0..n * l {
        lp.add_variable(0.0, 1.0, 0.0);
    }
    let mut gamma_pairs = 0usize;
    for (u, v, col) in phi.iter_pairs() {
        for c in 0..l {
            let cost = match col {
                Some(p) if p == c => 1.0,
                Some(_) => 0.0,
                None => -1.0,
            };
            let idx = lp.add_variable(0.0, 1.0, cost);
            debug_assert_eq!(idx, lay.edge(u, v, c));
        }
        if col.is_none() {
            gamma_pairs += 1;
        }
    }
    lp.set_offset((gamma_pairs * l) as f64);

    for (u, v) in pairs(n) {
        for c in 0..l {
            let e = lay.edge(u, v, c);
            lp.add_constraint(vec![(e, 1.0), (lay.vertex(u, c), -1.0)], Relation::Ge, 0.0);
            lp.add_constraint(vec![(e, 1.0), (lay.vertex(v, c), -1.0)], Relation::Ge, 0.0);
        }
    }
    for u in 0..n {
        let row = (0..l).map(|c| (lay.vertex(u, c), 1.0)).collect();
        lp.add_constraint(row, Relation::Eq, (l - 1) as f64);
    }
    Ok(lp)
}

/// Builds the standard LP with every triangle row. With `strengthened`,
/// every triple contributes `x_uv + x_vw >= x_wu + x_v` per color and middle
/// vertex `v` in place of the plain triangle rows.
pub fn build_standard_lp(phi: &EdgeColoring, strengthened: bool) -> Result<LinearProgram> {
    let mut lp = standard_base(phi)?;
    for row in triangle_rows(phi.n(), phi.num_colors(), strengthened) {
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    Ok(lp)
}

fn require_optimal(sol: &lp::LpSolution, what: &str) -> Result<()> {
    match sol.status {
        LpStatus::Optimal => Ok(()),
        other => Err(CccError::Solver(format!("{what} LP returned {other:?}"))),
    }
}

/// Triangle rows violated by more than this are added in the next round.
const CUT_TOL: f64 = 1e-9;

/// Solves the standard (or strengthened) LP; returns its value and the point.
///
/// Triangle rows are added lazily: solve without them, add every violated
/// row, re-solve, until the point satisfies all of them. The final point is
/// optimal for the full program since it is feasible for it and optimal for
/// a relaxation.
pub fn solve_standard(phi: &EdgeColoring, strengthened: bool) -> Result<(f64, StandardSolution)> {
    let mut program = standard_base(phi)?;
    let (n, l) = (phi.n(), phi.num_colors());
    let rows = triangle_rows(n, l, strengthened);
    let mut added = vec![false; rows.len()];
    loop {
        let sol = lp::solve(&program)?;
        require_optimal(&sol, "standard")?;
        let activity =
            |row: &[(usize, f64)]| row.iter().map(|&(j, a)| a * sol.values[j]).sum::<f64>();
        let mut grew = false;
        for (i, row) in rows.iter().enumerate() {
            if !added[i] && activity(row) < -CUT_TOL {
                program.add_constraint(row.clone(), Relation::Ge, 0.0);
                added[i] = true;
                grew = true;
            }
        }
        if !grew {
            let mut values = sol.values;
            let x_edge = values.split_off(n * l);
            return Ok((sol.objective, StandardSolution::new(n, l, values, x_edge)?));
        }
    }
}

/// One weighted `(S, c)` term of a cluster distribution; `S` is a bitmask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterEntry {
    pub mask: u64,
    pub color: usize,
    pub weight: f64,
}

/// Sparse cluster-LP point, entries sorted by `(mask, color)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDistribution {
    n: usize,
    num_colors: usize,
    entries: Vec<ClusterEntry>,
}

/// Per-pair co-clustering masses of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAggregates {
    /// Mass of clusters of each color containing both endpoints.
    pub same_color_mass: Vec<f64>,
    pub total_co_mass: f64,
}

pub fn mask_members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&v| mask >> v & 1 == 1)
}

pub fn members_mask(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &v| m | 1 << v)
}

impl ClusterDistribution {
    /// Checks keys and weights; per-vertex mass is checked by [`check_cluster`].
    pub fn new(n: usize, num_colors: usize, mut entries: Vec<ClusterEntry>) -> Result<Self> {
        if n > 64 {
            return Err(CccError::TooLarge {
                what: "cluster distribution",
                n,
                cap: 64,
            });
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for e in &entries {
            if e.mask == 0 || e.mask & !full != 0 {
                return Err(CccError::Format(format!(
                    "mask {:#b} invalid for n={n}",
                    e.mask
                )));
            }
            if e.color >= num_colors {
                return Err(CccError::ColorOutOfRange {
                    color: e.color,
                    num_colors,
                });
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(CccError::Format(format!(
                    "weight {} must be finite and >= 0",
                    e.weight
                )));
            }
        }
        entries.sort_by_key(|e| (e.mask, e.color));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].mask, w[0].color) == (w[1].mask, w[1].color))
        {
            return Err(CccError::Format(format!(
                "duplicate entry mask={} color={}",
                w[0].mask, w[0].color
            )));
        }
        Ok(Self {
            n,
            num_colors,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn entries(&self) -> &[ClusterEntry] {
        &self.entries
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn vertex_mass(&self, u: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.mask >> u & 1 == 1)
            .map(|e| e.weight)
            .sum()
    }

    /// Mass of color-`c` clusters containing `u`.
    pub fn vertex_color_mass(&self, u: usize, c: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.color == c && e.mask >> u & 1 == 1)
            .map(|e| e.weight)
            .sum()
    }

    pub fn aggregates(&self, u: usize, v: usize) -> EdgeAggregates {
        let both = 1u64 << u | 1u64 << v;
        let mut same = vec![0.0; self.num_colors];
        for e in &self.entries {
            if e.mask & both == both {
                same[e.color] += e.weight;
            }
        }
        let total = same.iter().sum();
        EdgeAggregates {
            same_color_mass: same,
            total_co_mass: total,
        }
    }

    /// Whether every weight is within `tol` of 0 or 1.
    pub fn is_integral(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|e| e.weight <= tol || (e.weight - 1.0).abs() <= tol)
    }

    pub(crate) fn require_feasible(&self) -> Result<()> {
        for u in 0..self.n {
            let mass = self.vertex_mass(u);
            if (mass - 1.0).abs() > MASS_TOL {
                return Err(CccError::Infeasible {
                    what: "cluster distribution",
                    detail: format!("vertex {u} has mass {mass}"),
                });
            }
        }
        Ok(())
    }
}

/// Cluster-LP objective of a distribution, computed from pair aggregates.
pub fn cluster_objective(phi: &EdgeColoring, dist: &ClusterDistribution) -> f64 {
    let mut total = 0.0;
    for (u, v, c) in phi.iter_pairs() {
        let agg = dist.aggregates(u, v);
        total += match c {
            Some(c) => 1.0 - agg.same_color_mass[c],
            None => agg.total_co_mass,
        };
    }
    total
}

fn check_cluster_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 30 {
        return Err(CccError::TooLarge {
            what: "cluster LP",
            n,
            cap: cap.min(30),
        });
    }
    Ok(())
}

/// Cluster LP with the default size cap.
pub fn build_cluster_lp(phi: &EdgeColoring) -> Result<LinearProgram> {
    build_cluster_lp_capped(phi, CLUSTER_LP_CAP)
}

/// One variable per `(mask, color)` for every nonempty mask, in ascending
/// `(mask, color)` order; the edge variables are substituted out, leaving one
/// coverage row per vertex.
pub fn build_cluster_lp_capped(phi: &EdgeColoring, cap: usize) -> Result<LinearProgram> {
    check_dims(phi)?;
    let (n, l) = (phi.n(), phi.num_colors());
    check_cluster_cap(n, cap)?;
    let size = 1usize << n;
    let counts = phi.subset_pair_counts();
    let mut lp = LinearProgram::new();
    for mask in 1..size {
        let gamma = counts[mask * (l + 1) + l] as f64;
        for c in 0..l {
            lp.add_variable(
                0.0,
                f64::INFINITY,
                gamma - counts[mask * (l + 1) + c] as f64,
            );
        }
    }
    lp.set_offset(phi.num_positive() as f64);
    for u in 0..n {
        let row = (1..size)
            .filter(|m| m >> u & 1 == 1)
            .flat_map(|m| (0..l).map(move |c| ((m - 1) * l + c, 1.0)))
            .collect();
        lp.add_constraint(row, Relation::Eq, 1.0);
    }
    Ok(lp)
}

/// Solves the cluster LP; returns the LP value and the cleaned distribution.
pub fn solve_cluster(phi: &EdgeColoring) -> Result<(f64, ClusterDistribution)> {
    solve_cluster_capped(phi, CLUSTER_LP_CAP)
}

pub fn solve_cluster_capped(phi: &EdgeColoring, cap: usize) -> Result<(f64, ClusterDistribution)> {
    let program = build_cluster_lp_capped(phi, cap)?;
    let sol = lp::solve(&program)?;
    require_optimal(&sol, "cluster")?;
    let (n, l) = (phi.n(), phi.num_colors());
    let raw: Vec<ClusterEntry> = sol
        .values
        .iter()
        .enumerate()
        .filter(|(_, &z)| z >= CLEANUP_THRESHOLD)
        .map(|(i, &z)| ClusterEntry {
            mask: (i / l + 1) as u64,
            color: i % l,
            weight: z,
        })
        .collect();
    let dist = top_up_singletons(ClusterDistribution::new(n, l, raw)?);
    Ok((sol.objective, dist))
}

/// Restores unit per-vertex mass lost to cleanup by adding weight to the
/// vertex's singleton cluster, which has no internal pairs and so no cost.
fn top_up_singletons(dist: ClusterDistribution) -> ClusterDistribution {
    let ClusterDistribution {
        n,
        num_colors,
        mut entries,
    } = dist;
    for u in 0..n {
        let mass: f64 = entries
            .iter()
            .filter(|e| e.mask >> u & 1 == 1)
            .map(|e| e.weight)
            .sum();
        let deficit = 1.0 - mass;
        if deficit <= 0.0 {
            continue;
        }
        let single = 1u64 << u;
        match entries.iter_mut().find(|e| e.mask == single) {
            Some(e) => e.weight += deficit,
            None => entries.push(ClusterEntry {
                mask: single,
                color: 0,
                weight: deficit,
            }),
        }
    }
    entries.sort_by_key(|e| (e.mask, e.color));
    ClusterDistribution {
        n,
        num_colors,
        entries,
    }
}

/// Standard-LP point induced by a feasible distribution:
/// `x_u^c = 1 - sum_{S ∋ u} z_S^c`, `x_uv^c = 1 - sum_{S ⊇ uv} z_S^c`.
pub fn induced_standard(dist: &ClusterDistribution) -> Result<StandardSolution> {
    dist.require_feasible()?;
    Ok(induce_unchecked(dist))
}

pub(crate) fn induce_unchecked(dist: &ClusterDistribution) -> StandardSolution {
    let (n, l) = (dist.n, dist.num_colors);
    let mut xv = vec![1.0; n * l];
    let mut xe = vec![1.0; pair_count(n) * l];
    for e in &dist.entries {
        let members: Vec<usize> = mask_members(e.mask).collect();
        for (i, &u) in members.iter().enumerate() {
            xv[u * l + e.color] -= e.weight;
            for &v in &members[i + 1..] {
                xe[pair_index(n, u, v) * l + e.color] -= e.weight;
            }
        }
    }
    StandardSolution {
        n,
        num_colors: l,
        x_vertex: xv,
        x_edge: xe,
    }
}

/// Worst residual of one constraint family, with the indices attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResidual {
    pub family: &'static str,
    pub worst: f64,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub families: Vec<FamilyResidual>,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        self.families.iter().map(|f| f.worst).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }

    pub fn family(&self, name: &str) -> Option<&FamilyResidual> {
        self.families.iter().find(|f| f.family == name)
    }

    /// Families whose worst residual exceeds `tol`.
    pub fn violated(&self, tol: f64) -> Vec<&'static str> {
        self.families
            .iter()
            .filter(|f| f.worst > tol)
            .map(|f| f.family)
            .collect()
    }
}

struct Tracker {
    family: &'static str,
    worst: f64,
    witness: Vec<usize>,
}

impl Tracker {
    fn new(family: &'static str) -> Self {
        Self {
            family,
            worst: 0.0,
            witness: Vec::new(),
        }
    }

    fn see(&mut self, violation: f64, witness: &[usize]) {
        if violation > self.worst {
            self.worst = violation;
            self.witness = witness.to_vec();
        }
    }

    fn done(self) -> FamilyResidual {
        FamilyResidual {
            family: self.family,
            worst: self.worst,
            witness: self.witness,
        }
    }
}

/// Evaluates every standard-LP row at `sol`. Family names: `bounds`,
/// `vertex-sum`, `edge-dominates-vertex`, `triangle` and, with `strong`,
/// `strong-triangle`. Witnesses are `[u, c]`, `[u, v, c]` or `[first, middle, last, c]`.
pub fn check_standard(sol: &StandardSolution, strong: bool) -> FeasibilityReport {
    let (n, l) = (sol.n, sol.num_colors);
    let mut bounds = Tracker::new("bounds");
    let mut vsum = Tracker::new("vertex-sum");
    let mut dom = Tracker::new("edge-dominates-vertex");
    let mut tri = Tracker::new("triangle");
    let mut stri = Tracker::new("strong-triangle");
    for u in 0..n {
        let s: f64 = (0..l).map(|c| sol.vertex(u, c)).sum();
        vsum.see((s - (l as f64 - 1.0)).abs(), &[u]);
        for c in 0..l {
            let x = sol.vertex(u, c);
            bounds.see((-x).max(x - 1.0), &[u, c]);
        }
    }
    for (u, v) in pairs(n) {
        for c in 0..l {
            let x = sol.edge(u, v, c);
            bounds.see((-x).max(x - 1.0), &[u, v, c]);
            dom.see(sol.vertex(u, c) - x, &[u, v, c]);
            dom.see(sol.vertex(v, c) - x, &[u, v, c]);
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for d in b + 1..n {
                for (p, mid, q) in [(a, b, d), (b, d, a), (d, a, b)] {
                    for c in 0..l {
                        let lhs = sol.edge(p, mid, c) + sol.edge(mid, q, c);
                        let long = sol.edge(q, p, c);
                        tri.see(long - lhs, &[p, mid, q, c]);
                        if strong {
                            stri.see(long + sol.vertex(mid, c) - lhs, &[p, mid, q, c]);
                        }
                    }
                }
            }
        }
    }
    let mut families = vec![bounds.done(), vsum.done(), dom.done(), tri.done()];
    if strong {
        families.push(stri.done());
    }
    FeasibilityReport { families }
}

/// Cluster-LP feasibility: `nonnegativity` (witness `[entry]`) and
/// `vertex-coverage` (witness `[u]`).
pub fn check_cluster(dist: &ClusterDistribution) -> FeasibilityReport {
    let mut nonneg = Tracker::new("nonnegativity");
    for (i, e) in dist.entries.iter().enumerate() {
        nonneg.see(-e.weight, &[i]);
    }
    let mut cover = Tracker::new("vertex-coverage");
    for u in 0..dist.n {
        cover.see((dist.vertex_mass(u) - 1.0).abs(), &[u]);
    }
    FeasibilityReport {
        families: vec![nonneg.done(), cover.done()],
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Candidate<'a> {
    Standard(&'a StandardSolution),
    Cluster(&'a ClusterDistribution),
}

/// Checks a candidate against a relaxation's constraints. A distribution
/// checked against the standard or strong LP is checked through the point it
/// induces.
pub fn check_feasibility(
    candidate: Candidate<'_>,
    phi: &EdgeColoring,
    which: Relaxation,
) -> Result<FeasibilityReport> {
    let (n, l) = match candidate {
        Candidate::Standard(s) => (s.n, s.num_colors),
        Candidate::Cluster(d) => (d.n, d.num_colors),
    };
    if n != phi.n() {
        return Err(CccError::VertexCountMismatch {
            expected: phi.n(),
            got: n,
        });
    }
    if l != phi.num_colors() {
        return Err(CccError::Format(format!(
            "candidate has {l} colors, instance has {}",
            phi.num_colors()
        )));
    }
    Ok(match (candidate, which) {
        (Candidate::Standard(s), Relaxation::Standard) => check_standard(s, false),
        (Candidate::Standard(s), Relaxation::Strong) => check_standard(s, true),
        (Candidate::Standard(_), Relaxation::Cluster) => {
            return Err(CccError::Format(
                "a standard-LP point cannot be checked against the cluster LP".into(),
            ))
        }
        (Candidate::Cluster(d), Relaxation::Cluster) => check_cluster(d),
        (Candidate::Cluster(d), strength) => {
            let mut report = check_cluster(d);
            let induced = induce_unchecked(d);
            report
                .families
                .extend(check_standard(&induced, strength == Relaxation::Strong).families);
            report
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EdgeColoring;

    fn t1() -> EdgeColoring {
        EdgeColoring::from_pairs(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap()
    }

    fn planted() -> EdgeColoring {
        EdgeColoring::from_pairs(4, 2, [(0, 1, 0), (2, 3, 1)]).unwrap()
    }

    #[test]
    fn lazy_triangles_match_full_program() {
        let mut rng = crate::rng::RngStream::new(8);
        for _ in 0..20 {
            let (n, l) = (3 + rng.index(5), 1 + rng.index(3));
            let mut phi = EdgeColoring::new(n, l);
            for (u, v) in pairs(n) {
                let c = rng.index(l + 1);
                phi.set(u, v, (c < l).then_some(c)).unwrap();
            }
            for strong in [false, true] {
                let full = lp::solve(&build_standard_lp(&phi, strong).unwrap()).unwrap();
                let (value, sol) = solve_standard(&phi, strong).unwrap();
                assert!(
                    (full.objective - value).abs() < 1e-7,
                    "{} vs {value}",
                    full.objective
                );
                assert!(check_standard(&sol, strong).is_feasible(1e-7));
            }
        }
    }

    #[test]
    fn standard_lp_shape() {
        let phi = t1();
        let plain = build_standard_lp(&phi, false).unwrap();
        // 3·2 vertex + 3 pairs·2 edge variables
        assert_eq!(plain.num_variables(), 12);
        // (3): 2·3·2, (4): 3·1·2, (5): 3
        assert_eq!(plain.num_constraints(), 12 + 6 + 3);
        let strong = build_standard_lp(&phi, true).unwrap();
        assert_eq!(strong.num_constraints(), plain.num_constraints());
        assert_eq!(strong.num_nonzeros(), plain.num_nonzeros() + 6);
        assert_eq!(plain.offset(), 2.0);
    }

    #[test]
    fn standard_lp_single_edge() {
        let phi = EdgeColoring::from_pairs(2, 1, [(0, 1, 0)]).unwrap();
        let (v, sol) = solve_standard(&phi, false).unwrap();
        assert!(v.abs() < 1e-9);
        assert!(sol.edge(0, 1, 0).abs() < 1e-9);
    }

    #[test]
    fn planted_lps_are_zero() {
        let phi = planted();
        for strong in [false, true] {
            let (v, sol) = solve_standard(&phi, strong).unwrap();
            assert!(v.abs() < 1e-9, "value {v}");
            assert!(check_standard(&sol, strong).is_feasible(1e-6));
        }
        let (v, dist) = solve_cluster(&phi).unwrap();
        assert!(v.abs() < 1e-9);
        assert!(dist.is_integral(1e-6));
        let w = |mask, color| {
            dist.entries()
                .iter()
                .find(|e| e.mask == mask && e.color == color)
                .map_or(0.0, |e| e.weight)
        };
        assert!((w(0b0011, 0) - 1.0).abs() < 1e-9);
        assert!((w(0b1100, 1) - 1.0).abs() < 1e-9);
    }

    /// Frozen by solving each relaxation of T1 independently of the rounding
    /// code; brute force gives OPT = 1.
    #[test]
    fn t1_dominance_chain() {
        let phi = t1();
        let (plain, _) = solve_standard(&phi, false).unwrap();
        let (strong, sol) = solve_standard(&phi, true).unwrap();
        let (cluster, dist) = solve_cluster(&phi).unwrap();
        assert!(plain <= strong + 1e-6);
        assert!(strong <= cluster + 1e-6);
        assert!(cluster <= 1.0 + 1e-6);
        assert!(check_standard(&sol, true).is_feasible(1e-6));
        let induced = induced_standard(&dist).unwrap();
        assert!(check_standard(&induced, true).is_feasible(1e-6));
        assert!((cluster_objective(&phi, &dist) - cluster).abs() < 1e-6);
    }

    #[test]
    fn single_vertex_cluster_lp() {
        let phi = EdgeColoring::new(1, 2);
        let (v, dist) = solve_cluster(&phi).unwrap();
        assert!(v.abs() < 1e-12);
        assert!((dist.vertex_mass(0) - 1.0).abs() < 1e-12);
        assert!(dist.entries().iter().all(|e| e.mask == 1));
    }

    #[test]
    fn cluster_lp_size_cap() {
        let phi = EdgeColoring::new(13, 1);
        assert!(matches!(
            build_cluster_lp(&phi),
            Err(CccError::TooLarge { n: 13, cap: 12, .. })
        ));
        let phi = EdgeColoring::new(5, 1);
        assert!(build_cluster_lp_capped(&phi, 4).is_err());
    }

    #[test]
    fn cluster_lp_variable_order_and_costs() {
        let phi = t1();
        let lp = build_cluster_lp(&phi).unwrap();
        assert_eq!(lp.num_variables(), 7 * 2);
        assert_eq!(lp.num_constraints(), 3);
        // mask 0b111: one gamma pair, two color-0 pairs
        let idx = |mask: usize, c: usize| (mask - 1) * 2 + c;
        assert_eq!(lp.objective()[idx(0b111, 0)], 1.0 - 2.0);
        assert_eq!(lp.objective()[idx(0b111, 1)], 1.0);
        assert_eq!(lp.objective()[idx(0b011, 0)], -1.0);
        assert_eq!(lp.objective()[idx(0b101, 1)], 1.0);
        assert_eq!(lp.objective()[idx(0b001, 1)], 0.0);
        assert_eq!(lp.offset(), 2.0);
    }

    #[test]
    fn induced_examples() {
        let entry = |mask, color, weight| ClusterEntry {
            mask,
            color,
            weight,
        };
        let d = ClusterDistribution::new(2, 1, vec![entry(0b11, 0, 1.0)]).unwrap();
        let x = induced_standard(&d).unwrap();
        assert_eq!(
            (x.vertex(0, 0), x.vertex(1, 0), x.edge(0, 1, 0)),
            (0.0, 0.0, 0.0)
        );

        let d =
            ClusterDistribution::new(2, 1, vec![entry(0b01, 0, 1.0), entry(0b10, 0, 1.0)]).unwrap();
        assert_eq!(induced_standard(&d).unwrap().edge(0, 1, 0), 1.0);

        let half =
            ClusterDistribution::new(2, 1, vec![entry(0b01, 0, 0.5), entry(0b10, 0, 1.0)]).unwrap();
        assert!(matches!(
            induced_standard(&half),
            Err(CccError::Infeasible { .. })
        ));
    }

    #[test]
    fn distribution_rejects_bad_entries() {
        let entry = |mask, color, weight| ClusterEntry {
            mask,
            color,
            weight,
        };
        assert!(ClusterDistribution::new(2, 1, vec![entry(0, 0, 1.0)]).is_err());
        assert!(ClusterDistribution::new(2, 1, vec![entry(0b100, 0, 1.0)]).is_err());
        assert!(ClusterDistribution::new(2, 1, vec![entry(0b1, 1, 1.0)]).is_err());
        assert!(ClusterDistribution::new(2, 1, vec![entry(0b1, 0, -0.1)]).is_err());
        assert!(
            ClusterDistribution::new(2, 1, vec![entry(0b1, 0, 0.5), entry(0b1, 0, 0.5)]).is_err()
        );
    }

    #[test]
    fn feasibility_flags_hand_built_violations() {
        // x_01^0 < x_0^0 breaks edge dominance
        let sol = StandardSolution::new(2, 1, vec![0.5, 0.0], vec![0.2]).unwrap();
        let report = check_standard(&sol, false);
        let dom = report.family("edge-dominates-vertex").unwrap();
        assert!((dom.worst - 0.3).abs() < 1e-12);
        assert_eq!(dom.witness, vec![0, 1, 0]);
        assert!(report.violated(1e-6).contains(&"edge-dominates-vertex"));

        let entry = ClusterEntry {
            mask: 0b1,
            color: 0,
            weight: 0.5,
        };
        let d = ClusterDistribution::new(1, 1, vec![entry]).unwrap();
        let report = check_cluster(&d);
        assert_eq!(report.violated(1e-6), vec!["vertex-coverage"]);
        let phi = EdgeColoring::new(1, 1);
        let via = check_feasibility(Candidate::Cluster(&d), &phi, Relaxation::Cluster).unwrap();
        assert_eq!(via, report);
        assert!(check_feasibility(Candidate::Standard(&sol), &phi, Relaxation::Standard).is_err());
    }

    #[test]
    fn strong_rows_detect_plain_feasible_point() {
        // metric-feasible, but x_01 + x_12 < x_02 + x_1 in color 0
        let (n, l) = (3, 2);
        let xv = vec![0.6, 0.4, 0.6, 0.4, 0.6, 0.4];
        let xe = vec![0.6, 0.6, 1.0, 0.6, 0.6, 0.6];
        let sol = StandardSolution::new(n, l, xv, xe).unwrap();
        assert!(check_standard(&sol, false).is_feasible(1e-9));
        assert!(!check_standard(&sol, true).is_feasible(1e-9));
    }
}
