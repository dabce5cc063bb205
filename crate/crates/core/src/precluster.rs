//! Preclustering: a pivot seed clustering, atoms carved out of it, normalized
//! atom degrees, admissible edge sets, and the two conceptual refinements of
//! an optimal clustering that the admissible sets are meant to cover.

use crate::error::{CccError, Result};
use crate::exact::{all_optimal, optimal_cost, EXACT_CAP};
use crate::model::{cost, d0, d0_k, ChromaticClustering, EdgeColoring, VertexRow};
use crate::rng::RngStream;

pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.1;

fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(CccError::InvalidParameter {
            name,
            value,
            reason: "must lie in (0, 1)",
        });
    }
    Ok(())
}

/// Repeatedly picks a uniform unclustered pivot and clusters it with its
/// unclustered neighbors of the most frequent color among them (lowest color
/// on ties); a pivot without colored neighbors becomes a singleton.
pub fn pivot_heuristic(phi: &EdgeColoring, rng: &mut RngStream) -> ChromaticClustering {
    let (n, l) = (phi.n(), phi.num_colors());
    let mut rest: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::new();
    let mut colors = Vec::new();
    while !rest.is_empty() {
        let u = rest.remove(rng.index(rest.len()));
        let mut counts = vec![0usize; l];
        for &v in &rest {
            if let Some(c) = phi.color(u, v) {
                counts[c] += 1;
            }
        }
        let top = counts.iter().copied().max().unwrap_or(0);
        if top == 0 {
            blocks.push(vec![u]);
            colors.push(0);
            continue;
        }
        let c = counts.iter().position(|&k| k == top).expect("max exists");
        let (mut block, left): (Vec<usize>, Vec<usize>) =
            rest.iter().partition(|&&v| phi.color(u, v) == Some(c));
        block.push(u);
        rest = left;
        blocks.push(block);
        colors.push(c);
    }
    ChromaticClustering::from_parts_unchecked(n, blocks, colors)
}

/// A clustering whose blocks are atoms, with the atom of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomClustering {
    clustering: ChromaticClustering,
    atom_of: Vec<usize>,
}

impl AtomClustering {
    pub fn from_clustering(clustering: ChromaticClustering) -> Self {
        let atom_of = clustering.membership();
        Self {
            clustering,
            atom_of,
        }
    }

    pub fn clustering(&self) -> &ChromaticClustering {
        &self.clustering
    }

    pub fn num_atoms(&self) -> usize {
        self.clustering.num_blocks()
    }

    pub fn atom_of(&self, u: usize) -> usize {
        self.atom_of[u]
    }

    pub fn atom(&self, id: usize) -> &[usize] {
        &self.clustering.blocks()[id]
    }

    /// The atom containing `u` (the set `K_u`).
    pub fn atom_containing(&self, u: usize) -> &[usize] {
        self.atom(self.atom_of[u])
    }

    /// Color of a non-singleton atom; `None` for singletons.
    pub fn atom_color(&self, id: usize) -> Option<usize> {
        (self.atom(id).len() > 1).then(|| self.clustering.colors()[id])
    }

    pub fn non_singleton(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.clustering
            .blocks()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.len() > 1)
            .map(|(i, b)| (i, b.as_slice()))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clustering.blocks().iter().map(Vec::len).collect()
    }
}

/// Marks `u ∈ C` when `d0(phi_u, Phi_u) > (beta/2)|C|` and marks `C` when at
/// least a `beta/3` fraction of it is marked. Marked vertices and every
/// vertex of a marked cluster become singleton atoms; the rest of each
/// cluster stays together with the cluster's color.
pub fn build_atoms(
    phi: &EdgeColoring,
    seed: &ChromaticClustering,
    beta: f64,
) -> Result<AtomClustering> {
    check_open_unit("beta", beta)?;
    crate::model::validate(seed, phi.n(), phi.num_colors())
        .map_err(|v| CccError::InvalidClustering(v.iter().map(|x| x.to_string()).collect()))?;
    let of = seed.membership();
    let mut blocks = Vec::new();
    let mut colors = Vec::new();
    for (block, color) in seed.iter() {
        let size = block.len() as f64;
        let marked: Vec<bool> = block
            .iter()
            .map(|&u| {
                let f = VertexRow::of_coloring(phi, u);
                let g = VertexRow::from_membership(&of, seed.colors(), u);
                d0(&f, &g).expect("same domain") as f64 > beta / 2.0 * size
            })
            .collect();
        let count = marked.iter().filter(|&&m| m).count() as f64;
        if count >= beta / 3.0 * size {
            blocks.extend(block.iter().map(|&u| vec![u]));
            colors.extend(std::iter::repeat_n(0, block.len()));
            continue;
        }
        let kept: Vec<usize> = block
            .iter()
            .zip(&marked)
            .filter(|(_, &m)| !m)
            .map(|(&u, _)| u)
            .collect();
        for (&u, _) in block.iter().zip(&marked).filter(|(_, &m)| m) {
            blocks.push(vec![u]);
            colors.push(0);
        }
        if !kept.is_empty() {
            colors.push(if kept.len() > 1 { color } else { 0 });
            blocks.push(kept);
        }
    }
    let clustering = ChromaticClustering::from_parts_unchecked(phi.n(), blocks, colors);
    Ok(AtomClustering::from_clustering(clustering))
}

/// Atom-level color densities and per-vertex normalized degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedDegrees {
    num_atoms: usize,
    num_colors: usize,
    atom_of: Vec<usize>,
    /// `density[(a * num_atoms + b) * L + c]`: fraction of ordered pairs of
    /// `K_a × K_b` colored `c`.
    density: Vec<f64>,
    total: Vec<f64>,
}

impl NormalizedDegrees {
    /// `w^c_{uv}`; for `u, v` in one atom this counts ordered pairs, so it is
    /// twice the atom's `c`-pairs over its size squared.
    pub fn pair(&self, u: usize, v: usize, c: usize) -> f64 {
        let (a, b) = (self.atom_of[u], self.atom_of[v]);
        self.density[(a * self.num_atoms + b) * self.num_colors + c]
    }

    /// `w_u^c`.
    pub fn total(&self, u: usize, c: usize) -> f64 {
        self.total[u * self.num_colors + c]
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }
}

/// `w^c_{uv} = |phi⁻¹(c) ∩ (K_u × K_v)| / (|K_u||K_v|)` and
/// `w_u^c = Σ_{v ∉ K_u} w^c_{uv} + |K_u|·[K_u is a singleton or colored c]`.
pub fn normalized_degrees(phi: &EdgeColoring, atoms: &AtomClustering) -> NormalizedDegrees {
    let (n, l) = (phi.n(), phi.num_colors());
    let k = atoms.num_atoms();
    let mut density = vec![0.0; k * k * l];
    for (u, v, c) in phi.positive_pairs() {
        let (a, b) = (atoms.atom_of(u), atoms.atom_of(v));
        density[(a * k + b) * l + c] += 1.0;
        density[(b * k + a) * l + c] += 1.0;
    }
    let sizes = atoms.sizes();
    for a in 0..k {
        for b in 0..k {
            let norm = (sizes[a] * sizes[b]) as f64;
            for c in 0..l {
                density[(a * k + b) * l + c] /= norm;
            }
        }
    }
    let mut total = vec![0.0; n * l];
    for u in 0..n {
        let a = atoms.atom_of(u);
        for c in 0..l {
            let outside: f64 = (0..k)
                .filter(|&b| b != a)
                .map(|b| density[(a * k + b) * l + c] * sizes[b] as f64)
                .sum();
            let own = match atoms.atom_color(a) {
                None => true,
                Some(col) => col == c,
            };
            total[u * l + c] = outside + if own { sizes[a] as f64 } else { 0.0 };
        }
    }
    NormalizedDegrees {
        num_atoms: k,
        num_colors: l,
        atom_of: atoms.atom_of.clone(),
        density,
        total,
    }
}

/// Admissible pairs per color, each list sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleEdges {
    pub e1: Vec<Vec<(usize, usize)>>,
    pub e2: Vec<Vec<(usize, usize)>>,
}

impl AdmissibleEdges {
    pub fn e2_size(&self) -> usize {
        self.e2.iter().map(Vec::len).sum()
    }

    pub fn in_e2(&self, u: usize, v: usize, c: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.e2[c].binary_search(&key).is_ok()
    }
}

/// `N^c_u = K_u ∪ {v : uv ∈ edges}` as a membership mask per vertex.
fn neighborhoods(n: usize, atoms: &AtomClustering, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut nb = vec![vec![false; n]; n];
    for (u, row) in nb.iter_mut().enumerate() {
        for &p in atoms.atom_containing(u) {
            row[p] = true;
        }
    }
    for &(u, v) in edges {
        nb[u][v] = true;
        nb[v][u] = true;
    }
    nb
}

/// `uv ∈ E1[c]` iff `w_u^c > eps·w_v^c` and `w_v^c > eps·w_u^c`;
/// `uv ∈ E2[c]` iff `K_u ≠ K_v` and
/// `Σ_{p ∈ N1_u ∩ N1_v} w^c_{up} w^c_{vp} > eps·(w_u^c + w_v^c)`.
pub fn admissible_edges(
    phi: &EdgeColoring,
    atoms: &AtomClustering,
    degrees: &NormalizedDegrees,
    epsilon: f64,
) -> Result<AdmissibleEdges> {
    check_open_unit("epsilon", epsilon)?;
    let (n, l) = (phi.n(), phi.num_colors());
    let mut e1 = vec![Vec::new(); l];
    let mut e2 = vec![Vec::new(); l];
    for c in 0..l {
        for (u, v) in crate::model::pairs(n) {
            let (wu, wv) = (degrees.total(u, c), degrees.total(v, c));
            if wu > epsilon * wv && wv > epsilon * wu {
                e1[c].push((u, v));
            }
        }
        let nb = neighborhoods(n, atoms, &e1[c]);
        for (u, v) in crate::model::pairs(n) {
            if atoms.atom_of(u) == atoms.atom_of(v) {
                continue;
            }
            let common: f64 = (0..n)
                .filter(|&p| nb[u][p] && nb[v][p])
                .map(|p| degrees.pair(u, p, c) * degrees.pair(v, p, c))
                .sum();
            if common > epsilon * (degrees.total(u, c) + degrees.total(v, c)) {
                e2[c].push((u, v));
            }
        }
    }
    Ok(AdmissibleEdges { e1, e2 })
}

fn check_respects_atoms(base: &ChromaticClustering, atoms: &AtomClustering) -> Result<()> {
    let of = base.membership();
    for (id, atom) in atoms.non_singleton() {
        if atom.iter().any(|&u| of[u] != of[atom[0]]) {
            return Err(CccError::InvalidClustering(vec![format!(
                "atom {id} {atom:?} is split across blocks"
            )]));
        }
    }
    Ok(())
}

fn split(base: &ChromaticClustering, block: usize, part: &[usize]) -> ChromaticClustering {
    let mut blocks = base.blocks().to_vec();
    let mut colors = base.colors().to_vec();
    blocks[block].retain(|v| !part.contains(v));
    blocks.push(part.to_vec());
    colors.push(colors[block]);
    ChromaticClustering::from_parts_unchecked(base.n(), blocks, colors)
}

/// Atoms strictly inside a block, as `(block index, atom)` in block order.
fn atoms_strictly_inside<'a>(
    base: &ChromaticClustering,
    atoms: &'a AtomClustering,
) -> Vec<(usize, &'a [usize])> {
    let of = base.membership();
    (0..atoms.num_atoms())
        .map(|id| atoms.atom(id))
        .map(|k| (of[k[0]], k))
        .filter(|&(b, k)| k.len() < base.blocks()[b].len())
        .collect()
}

/// The split-atoms guard for atom `k` inside block `c` of color `color`:
/// `Σ_{u∈K} (d0^K(phi_u, color·χ_K) - d0^K(phi_u, color·χ_C)) <= 2·eps·Σ_{u∈K} d0^K(phi_u, color·χ_K)`.
pub fn split_guard(
    phi: &EdgeColoring,
    k: &[usize],
    c: &[usize],
    color: usize,
    epsilon: f64,
) -> (i64, f64) {
    let n = phi.n();
    let mut diff = 0i64;
    let mut own = 0usize;
    for &u in k {
        let f = VertexRow::of_coloring(phi, u);
        let in_k = d0_k(&f, &VertexRow::indicator(n, u, color, k), k).expect("same domain");
        let in_c = d0_k(&f, &VertexRow::indicator(n, u, color, c), k).expect("same domain");
        diff += in_k as i64 - in_c as i64;
        own += in_k;
    }
    (diff, 2.0 * epsilon * own as f64)
}

/// Starting from `base`, splits off any atom strictly inside its block while
/// the split-atoms guard holds. Returns the result and the number of splits.
pub fn refine_split_atoms(
    phi: &EdgeColoring,
    base: &ChromaticClustering,
    atoms: &AtomClustering,
    epsilon: f64,
) -> Result<(ChromaticClustering, usize)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CccError::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must lie in [0, 1)",
        });
    }
    check_respects_atoms(base, atoms)?;
    let mut current = base.clone();
    let mut steps = 0;
    'outer: loop {
        for (b, k) in atoms_strictly_inside(&current, atoms) {
            let block = current.blocks()[b].clone();
            let color = current.colors()[b];
            let (diff, bound) = split_guard(phi, k, &block, color, epsilon);
            if diff as f64 <= bound {
                current = split(&current, b, k);
                steps += 1;
                continue 'outer;
            }
        }
        return Ok((current, steps));
    }
}

/// Starting from `base`, splits off `K_u` from its block `C` while
/// `|K_u| < |C| < |K_u| + eps1·|N2_u ∖ K_u|`, with `N2_u` taken in the color
/// of `C`. Returns the result and the number of splits.
pub fn refine_size_filter(
    phi: &EdgeColoring,
    base: &ChromaticClustering,
    atoms: &AtomClustering,
    e2: &AdmissibleEdges,
    epsilon1: f64,
) -> Result<(ChromaticClustering, usize)> {
    check_open_unit("epsilon1", epsilon1)?;
    check_respects_atoms(base, atoms)?;
    let n = phi.n();
    let outside: Vec<Vec<usize>> = (0..phi.num_colors())
        .map(|c| {
            let nb = neighborhoods(n, atoms, &e2.e2[c]);
            (0..n)
                .map(|u| {
                    let atom = atoms.atom_containing(u);
                    (0..n).filter(|&p| nb[u][p] && !atom.contains(&p)).count()
                })
                .collect()
        })
        .collect();
    let mut current = base.clone();
    let mut steps = 0;
    'outer: loop {
        let of = current.membership();
        for u in 0..n {
            let b = of[u];
            let size_c = current.blocks()[b].len() as f64;
            let k = atoms.atom_containing(u);
            let size_k = k.len() as f64;
            let c = current.colors()[b];
            if size_k < size_c && size_c < size_k + epsilon1 * outside[c][u] as f64 {
                current = split(&current, b, k);
                steps += 1;
                continue 'outer;
            }
        }
        return Ok((current, steps));
    }
}

/// Whether every non-singleton atom lies inside one block of `optimum` whose
/// color is the atom's color.
pub fn atoms_preserved(atoms: &AtomClustering, optimum: &ChromaticClustering) -> bool {
    let of = optimum.membership();
    atoms.non_singleton().all(|(id, k)| {
        let b = of[k[0]];
        k.iter().all(|&u| of[u] == b) && Some(optimum.colors()[b]) == atoms.atom_color(id)
    })
}

/// Whether `d0(phi_u, Phi^p_u) < beta·|K|` for every `u` of every non-singleton atom `K`.
pub fn atom_distance_bound_holds(phi: &EdgeColoring, atoms: &AtomClustering, beta: f64) -> bool {
    let of = &atoms.atom_of;
    let colors = atoms.clustering.colors();
    atoms.non_singleton().all(|(_, k)| {
        k.iter().all(|&u| {
            let f = VertexRow::of_coloring(phi, u);
            let g = VertexRow::from_membership(of, colors, u);
            (d0(&f, &g).expect("same domain") as f64) < beta * k.len() as f64
        })
    })
}

/// Co-clustered pairs `(u, v)` of `refined` violating `w_u^c > eps·w_v^c`
/// in either direction, `c` being their block color.
pub fn degree_condition_failures(
    refined: &ChromaticClustering,
    degrees: &NormalizedDegrees,
    epsilon: f64,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (block, c) in refined.iter() {
        for (i, &u) in block.iter().enumerate() {
            for &v in &block[i + 1..] {
                let (wu, wv) = (degrees.total(u, c), degrees.total(v, c));
                if !(wu > epsilon * wv && wv > epsilon * wu) {
                    out.push((u, v));
                }
            }
        }
    }
    out
}

/// Co-clustered cross-atom pairs of `refined` missing from `E2` of their
/// block color. Pairs inside one atom are covered by the atom itself.
pub fn coverage_failures(
    refined: &ChromaticClustering,
    atoms: &AtomClustering,
    edges: &AdmissibleEdges,
) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (block, c) in refined.iter() {
        for (i, &u) in block.iter().enumerate() {
            for &v in &block[i + 1..] {
                if atoms.atom_of(u) != atoms.atom_of(v) && !edges.in_e2(u, v, c) {
                    out.push((u, v, c));
                }
            }
        }
    }
    out
}

/// Results of the full pipeline on one instance. Ratios are `None` when
/// their denominator is zero or the optimum was not computed.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PreclusterReport {
    pub n: usize,
    pub seed_cost: usize,
    pub opt: Option<usize>,
    pub seed_ratio: Option<f64>,
    pub num_atoms: usize,
    pub num_singleton_atoms: usize,
    /// Sizes of the non-singleton atoms, largest first.
    pub atom_sizes: Vec<usize>,
    pub e1_size: usize,
    pub e2_size: usize,
    /// `|E2|·eps²/OPT`.
    pub e2_scaled: Option<f64>,
    pub atom_distance_ok: bool,
    /// Whether every optimal clustering preserves every non-singleton atom.
    pub atoms_preserved: Option<bool>,
    pub num_optima: Option<usize>,
    pub refined_cost: Option<usize>,
    pub refine_splits: Option<usize>,
    pub degree_failures: Option<usize>,
    pub coverage_failures: Option<usize>,
    pub notices: Vec<String>,
}

/// Runs pivot seeding, atoms, degrees and admissible edges, and, when `n` is
/// within the exact solver's cap, the checks that need the optimum.
pub fn precluster_report(
    phi: &EdgeColoring,
    epsilon: f64,
    beta: f64,
    rng: &mut RngStream,
) -> Result<PreclusterReport> {
    check_open_unit("epsilon", epsilon)?;
    let seed = pivot_heuristic(phi, rng);
    let atoms = build_atoms(phi, &seed, beta)?;
    let degrees = normalized_degrees(phi, &atoms);
    let edges = admissible_edges(phi, &atoms, &degrees, epsilon)?;
    let seed_cost = cost(phi, &seed)?;
    let mut sizes: Vec<usize> = atoms.non_singleton().map(|(_, k)| k.len()).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut report = PreclusterReport {
        n: phi.n(),
        seed_cost,
        opt: None,
        seed_ratio: None,
        num_atoms: atoms.num_atoms(),
        num_singleton_atoms: atoms.num_atoms() - sizes.len(),
        atom_sizes: sizes,
        e1_size: edges.e1.iter().map(Vec::len).sum(),
        e2_size: edges.e2_size(),
        e2_scaled: None,
        atom_distance_ok: atom_distance_bound_holds(phi, &atoms, beta),
        atoms_preserved: None,
        num_optima: None,
        refined_cost: None,
        refine_splits: None,
        degree_failures: None,
        coverage_failures: None,
        notices: Vec::new(),
    };
    if phi.n() > EXACT_CAP {
        report.notices.push(format!(
            "n = {} exceeds the exact solver cap {EXACT_CAP}; optimum-dependent fields omitted",
            phi.n()
        ));
        return Ok(report);
    }
    let (opt, witness) = optimal_cost(phi)?;
    let optima = all_optimal(phi)?;
    report.opt = Some(opt);
    if opt > 0 {
        report.seed_ratio = Some(seed_cost as f64 / opt as f64);
        report.e2_scaled = Some(report.e2_size as f64 * epsilon * epsilon / opt as f64);
    }
    report.num_optima = Some(optima.len());
    report.atoms_preserved = Some(optima.iter().all(|o| atoms_preserved(&atoms, o)));
    match refine_split_atoms(phi, &witness, &atoms, epsilon) {
        Ok((refined, splits)) => {
            report.refined_cost = Some(cost(phi, &refined)?);
            report.refine_splits = Some(splits);
            report.degree_failures =
                Some(degree_condition_failures(&refined, &degrees, epsilon).len());
            report.coverage_failures = Some(coverage_failures(&refined, &atoms, &edges).len());
        }
        Err(e) => report.notices.push(format!("refinement skipped: {e}")),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::optimal_cost;

    fn planted() -> (EdgeColoring, ChromaticClustering) {
        let mut pairs = Vec::new();
        for (block, c) in [(&[0, 1, 2][..], 0), (&[3, 4, 5][..], 1)] {
            for (i, &u) in block.iter().enumerate() {
                for &v in &block[i + 1..] {
                    pairs.push((u, v, c));
                }
            }
        }
        let phi = EdgeColoring::from_pairs(6, 2, pairs).unwrap();
        let truth =
            ChromaticClustering::new(6, 2, vec![vec![0, 1, 2], vec![3, 4, 5]], vec![0, 1]).unwrap();
        (phi, truth)
    }

    #[test]
    fn pivot_on_planted_and_gamma() {
        let (phi, truth) = planted();
        for seed in 0..30 {
            assert_eq!(pivot_heuristic(&phi, &mut RngStream::new(seed)), truth);
        }
        let gamma = EdgeColoring::new(5, 2);
        assert_eq!(
            pivot_heuristic(&gamma, &mut RngStream::new(1)),
            ChromaticClustering::singletons(5)
        );
    }

    #[test]
    fn pivot_constant_factor_on_t1() {
        let phi = EdgeColoring::from_pairs(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap();
        let total: usize = (0..1000)
            .map(|s| cost(&phi, &pivot_heuristic(&phi, &mut RngStream::new(s))).unwrap())
            .sum();
        assert!(total as f64 / 1000.0 <= 3.0);
    }

    #[test]
    fn atoms_of_planted() {
        let (phi, truth) = planted();
        let atoms = build_atoms(&phi, &truth, DEFAULT_BETA).unwrap();
        assert_eq!(atoms.clustering(), &truth);
        assert_eq!(atoms.atom_color(atoms.atom_of(4)), Some(1));
        let gamma = EdgeColoring::new(4, 1);
        let atoms = build_atoms(&gamma, &ChromaticClustering::singletons(4), 0.1).unwrap();
        assert_eq!(atoms.num_atoms(), 4);
        assert!(build_atoms(&phi, &truth, 1.0).is_err());
        assert!(build_atoms(&phi, &truth, 0.0).is_err());
    }

    #[test]
    fn disagreeing_vertex_is_split_off() {
        // block of 10 all color 0 except vertex 9, which is gamma to everyone
        let mut pairs = Vec::new();
        for u in 0..9 {
            for v in u + 1..9 {
                pairs.push((u, v, 0));
            }
        }
        let phi = EdgeColoring::from_pairs(10, 1, pairs).unwrap();
        let seed = ChromaticClustering::new(10, 1, vec![(0..10).collect()], vec![0]).unwrap();
        // beta = 0.5: vertex 9 has d0 = 9 > 2.5 and is marked, the others
        // disagree only at 9; one mark in ten stays below the 1/6 cluster fraction
        let atoms = build_atoms(&phi, &seed, 0.5).unwrap();
        assert_eq!(atoms.atom_containing(9), &[9]);
        assert_eq!(atoms.atom_containing(0), &(0..9).collect::<Vec<_>>()[..]);
        assert_eq!(atoms.atom_color(atoms.atom_of(0)), Some(0));
        // beta = 0.3: the mark fraction 0.1 reaches 0.3/3 and the cluster dissolves
        let atoms = build_atoms(&phi, &seed, 0.3).unwrap();
        assert_eq!(atoms.num_atoms(), 10);
    }

    #[test]
    fn degree_examples() {
        let phi = EdgeColoring::from_pairs(2, 1, [(0, 1, 0)]).unwrap();
        let atoms = AtomClustering::from_clustering(ChromaticClustering::singletons(2));
        let w = normalized_degrees(&phi, &atoms);
        assert_eq!(w.pair(0, 1, 0), 1.0);
        assert_eq!(w.total(0, 0), 2.0);

        // atoms {0,1} and {2,3,4}, three color-0 cross pairs
        let phi = EdgeColoring::from_pairs(
            5,
            2,
            [
                (0, 2, 0),
                (0, 3, 0),
                (1, 4, 0),
                (0, 1, 1),
                (2, 3, 1),
                (3, 4, 1),
                (2, 4, 1),
            ],
        )
        .unwrap();
        let atoms = AtomClustering::from_clustering(
            ChromaticClustering::new(5, 2, vec![vec![0, 1], vec![2, 3, 4]], vec![1, 1]).unwrap(),
        );
        let w = normalized_degrees(&phi, &atoms);
        assert!((w.pair(0, 3, 0) - 0.5).abs() < 1e-12);
        assert!((w.pair(3, 0, 0) - 0.5).abs() < 1e-12);
        // atom of color 1 and no outside color-1 pairs: only the indicator term
        assert!((w.total(0, 1) - 2.0).abs() < 1e-12);
        // same-atom density counts ordered pairs: 2·3 / 9
        assert!((w.pair(2, 4, 1) - 6.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn admissible_examples() {
        let phi = EdgeColoring::from_pairs(2, 1, [(0, 1, 0)]).unwrap();
        let atoms = AtomClustering::from_clustering(ChromaticClustering::singletons(2));
        let w = normalized_degrees(&phi, &atoms);
        let e = admissible_edges(&phi, &atoms, &w, 0.5).unwrap();
        assert_eq!(e.e1[0], vec![(0, 1)]);
        // common neighborhood {0, 1}: w_00·w_10 + w_01·w_11 = 0
        assert!(e.e2[0].is_empty());

        let (phi, truth) = planted();
        let atoms = AtomClustering::from_clustering(truth);
        let w = normalized_degrees(&phi, &atoms);
        let e = admissible_edges(&phi, &atoms, &w, 0.01).unwrap();
        assert_eq!(e.e2_size(), 0);
        // color-1 degree of color-0 atoms is 0; those pairs never enter E1[1]
        assert!(!e.e1[1].contains(&(0, 1)));
        assert!(e.e1[0].contains(&(0, 1)));
        assert!(admissible_edges(&phi, &atoms, &w, 0.0).is_err());
    }

    #[test]
    fn split_refinement_examples() {
        let (phi, truth) = planted();
        let atoms = AtomClustering::from_clustering(truth.clone());
        assert_eq!(
            refine_split_atoms(&phi, &truth, &atoms, 0.1).unwrap(),
            (truth.clone(), 0)
        );

        let t1 = EdgeColoring::from_pairs(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap();
        let base = ChromaticClustering::new(3, 2, vec![vec![0, 1, 2]], vec![0]).unwrap();
        let singles = AtomClustering::from_clustering(ChromaticClustering::singletons(3));
        // K = {2}: rows of 2 are (0:gamma, 1:0). chi_K disagrees at 1 (outside K, weight 2);
        // chi_C disagrees at 0 (weight 2). Difference 0 ≤ 2·0.2·2.
        let (diff, bound) = split_guard(&t1, &[2], &[0, 1, 2], 0, 0.2);
        assert_eq!((diff, bound), (0, 0.8));
        let (out, steps) = refine_split_atoms(&t1, &base, &singles, 0.2).unwrap();
        assert!(steps >= 1);
        assert!(cost(&t1, &out).unwrap() <= 1 + 2);

        let broken =
            ChromaticClustering::new(6, 2, vec![vec![0, 1], vec![2, 3, 4, 5]], vec![0, 1]).unwrap();
        assert!(refine_split_atoms(&phi, &broken, &atoms, 0.1).is_err());
    }

    #[test]
    fn zero_epsilon_split_keeps_optimum() {
        let t1 = EdgeColoring::from_pairs(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap();
        let (opt, w) = optimal_cost(&t1).unwrap();
        let singles = AtomClustering::from_clustering(ChromaticClustering::singletons(3));
        let (out, _) = refine_split_atoms(&t1, &w, &singles, 0.0).unwrap();
        assert_eq!(cost(&t1, &out).unwrap(), opt);
    }

    #[test]
    fn size_filter_examples() {
        let (phi, truth) = planted();
        let atoms = AtomClustering::from_clustering(truth.clone());
        let w = normalized_degrees(&phi, &atoms);
        let e = admissible_edges(&phi, &atoms, &w, 0.1).unwrap();
        assert_eq!(
            refine_size_filter(&phi, &truth, &atoms, &e, 0.5).unwrap().1,
            0
        );

        // block {0,1,2} with atoms {0,1}, {2}; |C| = 3 = |K_0| + 1, N2 of 0 holds 4 outsiders
        let phi = EdgeColoring::from_pairs(6, 1, [(0, 1, 0), (0, 2, 0), (1, 2, 0)]).unwrap();
        let atoms = AtomClustering::from_clustering(
            ChromaticClustering::new(
                6,
                1,
                vec![vec![0, 1], vec![2], vec![3], vec![4], vec![5]],
                vec![0, 0, 0, 0, 0],
            )
            .unwrap(),
        );
        let edges = AdmissibleEdges {
            e1: vec![vec![]],
            e2: vec![vec![(0, 2), (0, 3), (0, 4), (0, 5)]],
        };
        let base = ChromaticClustering::new(
            6,
            1,
            vec![vec![0, 1, 2], vec![3], vec![4], vec![5]],
            vec![0, 0, 0, 0],
        )
        .unwrap();
        // 2 < 3 < 2 + 0.5·4
        let (out, steps) = refine_size_filter(&phi, &base, &atoms, &edges, 0.5).unwrap();
        assert_eq!(steps, 1);
        assert!(out.blocks().contains(&vec![0, 1]));
        // 2 < 3 < 2 + 0.2·4 fails
        assert_eq!(
            refine_size_filter(&phi, &base, &atoms, &edges, 0.2)
                .unwrap()
                .1,
            0
        );
    }

    #[test]
    fn reports_are_finite() {
        let (phi, _) = planted();
        let r = precluster_report(&phi, 0.1, 0.1, &mut RngStream::new(4)).unwrap();
        assert_eq!(r.seed_cost, 0);
        assert_eq!(r.opt, Some(0));
        assert_eq!(r.atoms_preserved, Some(true));
        assert_eq!(r.seed_ratio, None);
        let gamma = EdgeColoring::new(4, 2);
        let r = precluster_report(&gamma, 0.1, 0.1, &mut RngStream::new(4)).unwrap();
        assert_eq!((r.opt, r.e2_size), (Some(0), 0));
        let big = EdgeColoring::new(12, 1);
        let r = precluster_report(&big, 0.1, 0.1, &mut RngStream::new(4)).unwrap();
        assert_eq!(r.opt, None);
        assert_eq!(r.notices.len(), 1);
    }
}
