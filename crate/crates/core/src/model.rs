//! Edge-colored graphs, chromatic clusterings and the disagreement cost.
//!
//! Vertices are dense indices `0..n`, positive colors are dense indices `0..L`.
//! Pairs without a stored color are negative (gamma). A clustering is a
//! partition of the vertex set with one color per block.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{CccError, Result};

/// Value of the binary view of a coloring or clustering at a vertex pair.
///
/// `Zero` only occurs on the diagonal, `Gamma` marks a negative (or cut) pair.
/// The partial order puts `Zero` below every color and every color below
/// `Gamma`; distinct colors are incomparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorLabel {
    Zero,
    Color(usize),
    Gamma,
}

impl ColorLabel {
    pub fn from_option(color: Option<usize>) -> Self {
        color.map_or(ColorLabel::Gamma, ColorLabel::Color)
    }

    pub fn color(self) -> Option<usize> {
        match self {
            ColorLabel::Color(c) => Some(c),
            _ => None,
        }
    }
}

impl PartialOrd for ColorLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ColorLabel::*;
        match (self, other) {
            (a, b) if a == b => Some(Ordering::Equal),
            (Zero, _) | (_, Gamma) => Some(Ordering::Less),
            (_, Zero) | (Gamma, _) => Some(Ordering::Greater),
            (Color(_), Color(_)) => None,
        }
    }
}

impl fmt::Display for ColorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorLabel::Zero => write!(f, "0*"),
            ColorLabel::Color(c) => write!(f, "{c}"),
            ColorLabel::Gamma => write!(f, "gamma"),
        }
    }
}

/// Number of unordered pairs over `n` vertices.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic index of the pair `{u, v}` (order of arguments irrelevant).
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(a != b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All pairs `u < v` in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

/// The input coloring: a total map from vertex pairs to a color or gamma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    n: usize,
    num_colors: usize,
    colors: Vec<Option<usize>>,
}

impl EdgeColoring {
    /// All-gamma coloring.
    pub fn new(n: usize, num_colors: usize) -> Self {
        Self {
            n,
            num_colors,
            colors: vec![None; pair_count(n)],
        }
    }

    pub fn from_pairs<I>(n: usize, num_colors: usize, colored: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize)>,
    {
        let mut phi = Self::new(n, num_colors);
        for (u, v, c) in colored {
            phi.set(u, v, Some(c))?;
        }
        Ok(phi)
    }

    pub fn set(&mut self, u: usize, v: usize, color: Option<usize>) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(CccError::SelfPair(u));
        }
        if let Some(c) = color {
            if c >= self.num_colors {
                return Err(CccError::ColorOutOfRange {
                    color: c,
                    num_colors: self.num_colors,
                });
            }
        }
        let idx = pair_index(self.n, u, v);
        self.colors[idx] = color;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Color of the pair, `None` for gamma. Panics on a self-pair.
    #[inline]
    pub fn color(&self, u: usize, v: usize) -> Option<usize> {
        assert!(u != v, "self-pair has no edge color");
        self.colors[pair_index(self.n, u, v)]
    }

    /// Binary view of the coloring (`Zero` on the diagonal).
    pub fn label(&self, u: usize, v: usize) -> ColorLabel {
        if u == v {
            ColorLabel::Zero
        } else {
            ColorLabel::from_option(self.color(u, v))
        }
    }

    /// Every pair `u < v` with its color, lexicographic order.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, Option<usize>)> + '_ {
        pairs(self.n)
            .zip(self.colors.iter())
            .map(|((u, v), &c)| (u, v, c))
    }

    /// Colored pairs only, lexicographic order.
    pub fn positive_pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.iter_pairs()
            .filter_map(|(u, v, c)| c.map(|c| (u, v, c)))
    }

    pub fn num_positive(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    /// Per-vertex neighbor bitmasks: `masks[v][c]` has bit `u` set iff
    /// `phi(uv) = c`; index `L` holds the gamma neighbors. Requires `n <= 64`.
    pub fn neighbor_masks(&self) -> Vec<Vec<u64>> {
        assert!(self.n <= 64, "bitmask view requires n <= 64");
        let mut masks = vec![vec![0u64; self.num_colors + 1]; self.n];
        for (u, v, c) in self.iter_pairs() {
            let slot = c.unwrap_or(self.num_colors);
            masks[u][slot] |= 1 << v;
            masks[v][slot] |= 1 << u;
        }
        masks
    }

    /// Internal pair counts of every vertex subset: entry `mask * (L + 1) + slot`
    /// counts pairs inside `mask` of color `slot` (slot `L` is gamma).
    /// Requires `n < 32`.
    pub fn subset_pair_counts(&self) -> Vec<u32> {
        assert!(self.n < 32, "subset enumeration requires n < 32");
        let stride = self.num_colors + 1;
        let nbr = self.neighbor_masks();
        let size = 1usize << self.n;
        let mut counts = vec![0u32; size * stride];
        for mask in 1..size {
            let v = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            for slot in 0..stride {
                counts[mask * stride + slot] =
                    counts[rest * stride + slot] + (nbr[v][slot] & rest as u64).count_ones();
            }
        }
        counts
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(CccError::VertexOutOfRange {
                vertex: v,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// A partition of the vertex set with one color per block.
///
/// Blocks are stored sorted (vertices ascending, blocks by smallest vertex), so
/// two clusterings describing the same colored partition compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChromaticClustering {
    n: usize,
    blocks: Vec<Vec<usize>>,
    colors: Vec<usize>,
}

/// A broken partition axiom, as reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    VertexCount { expected: usize, got: usize },
    ColorCount { blocks: usize, colors: usize },
    EmptyBlock(usize),
    VertexOutOfRange(usize),
    NotDisjoint(usize),
    NotCovering(usize),
    ColorOutOfRange { block: usize, color: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexCount { expected, got } => {
                write!(f, "vertex count {got} differs from {expected}")
            }
            Violation::ColorCount { blocks, colors } => {
                write!(f, "{blocks} blocks but {colors} block colors")
            }
            Violation::EmptyBlock(b) => write!(f, "block {b} is empty"),
            Violation::VertexOutOfRange(v) => write!(f, "vertex {v} out of range"),
            Violation::NotDisjoint(v) => write!(f, "not disjoint: vertex {v} in several blocks"),
            Violation::NotCovering(v) => write!(f, "not covering: vertex {v} in no block"),
            Violation::ColorOutOfRange { block, color } => {
                write!(f, "block {block} has color {color} out of range")
            }
        }
    }
}

impl ChromaticClustering {
    /// Build and validate a clustering of `0..n` with colors in `0..num_colors`.
    pub fn new(
        n: usize,
        num_colors: usize,
        blocks: Vec<Vec<usize>>,
        colors: Vec<usize>,
    ) -> Result<Self> {
        let clustering = Self::from_parts_unchecked(n, blocks, colors);
        validate(&clustering, n, num_colors).map_err(|violations| {
            CccError::InvalidClustering(violations.iter().map(|v| v.to_string()).collect())
        })?;
        Ok(clustering)
    }

    /// Build without checking the partition axioms; run [`validate`] before use.
    pub fn from_parts_unchecked(n: usize, mut blocks: Vec<Vec<usize>>, colors: Vec<usize>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        if blocks.len() != colors.len() {
            // left unsorted; validate reports the mismatch
            return Self { n, blocks, colors };
        }
        let mut paired: Vec<(Vec<usize>, usize)> = blocks.into_iter().zip(colors).collect();
        paired.sort_by(|a, b| a.0.first().cmp(&b.0.first()).then_with(|| a.0.cmp(&b.0)));
        let (blocks, colors) = paired.into_iter().unzip();
        Self { n, blocks, colors }
    }

    /// Clustering from a block label per vertex; `colors[label]` colors each block.
    pub fn from_assignment(labels: &[usize], colors: &[usize], num_colors: usize) -> Result<Self> {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (v, &b) in labels.iter().enumerate() {
            blocks[b].push(v);
        }
        let (blocks, colors): (Vec<_>, Vec<_>) = blocks
            .into_iter()
            .zip(colors.iter().copied())
            .filter(|(b, _)| !b.is_empty())
            .unzip();
        Self::new(labels.len(), num_colors, blocks, colors)
    }

    /// Every vertex in its own block, colored 0.
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            blocks: (0..n).map(|v| vec![v]).collect(),
            colors: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], usize)> {
        self.blocks
            .iter()
            .zip(self.colors.iter())
            .map(|(b, &c)| (b.as_slice(), c))
    }

    /// Block index of every vertex. Only meaningful for a valid clustering.
    pub fn membership(&self) -> Vec<usize> {
        let mut of = vec![usize::MAX; self.n];
        for (i, block) in self.blocks.iter().enumerate() {
            for &v in block {
                if v < self.n {
                    of[v] = i;
                }
            }
        }
        of
    }

    /// Same partition with every singleton block recolored to 0.
    pub fn canonicalize_singletons(&self) -> Self {
        let colors = self
            .iter()
            .map(|(b, c)| if b.len() == 1 { 0 } else { c })
            .collect();
        Self {
            n: self.n,
            blocks: self.blocks.clone(),
            colors,
        }
    }
}

/// Check the partition axioms and color range; returns every violation found.
pub fn validate(
    clustering: &ChromaticClustering,
    n: usize,
    num_colors: usize,
) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if clustering.n != n {
        out.push(Violation::VertexCount {
            expected: n,
            got: clustering.n,
        });
    }
    if clustering.colors.len() != clustering.blocks.len() {
        out.push(Violation::ColorCount {
            blocks: clustering.blocks.len(),
            colors: clustering.colors.len(),
        });
    }
    let mut seen = vec![0usize; n];
    for (i, block) in clustering.blocks.iter().enumerate() {
        if block.is_empty() {
            out.push(Violation::EmptyBlock(i));
        }
        for &v in block {
            if v >= n {
                out.push(Violation::VertexOutOfRange(v));
            } else {
                seen[v] += 1;
                if seen[v] == 2 {
                    out.push(Violation::NotDisjoint(v));
                }
            }
        }
        if let Some(&c) = clustering.colors.get(i) {
            if c >= num_colors {
                out.push(Violation::ColorOutOfRange { block: i, color: c });
            }
        }
    }
    out.extend(
        seen.iter()
            .enumerate()
            .filter(|(_, &k)| k == 0)
            .map(|(v, _)| Violation::NotCovering(v)),
    );
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Number of disagreements of `clustering` with `phi`.
pub fn cost(phi: &EdgeColoring, clustering: &ChromaticClustering) -> Result<usize> {
    check_same_n(phi, clustering)?;
    let of = clustering.membership();
    let mut total = 0;
    for (u, v, c) in phi.iter_pairs() {
        let together = of[u] == of[v];
        total += match c {
            Some(c) => usize::from(!together || clustering.colors[of[u]] != c),
            None => usize::from(together),
        };
    }
    Ok(total)
}

/// Binary view of a clustering: `Zero` on the diagonal, the block color for
/// co-clustered pairs, `Gamma` otherwise.
pub fn binary_view(clustering: &ChromaticClustering, u: usize, v: usize) -> Result<ColorLabel> {
    let n = clustering.n;
    for w in [u, v] {
        if w >= n {
            return Err(CccError::VertexOutOfRange { vertex: w, n });
        }
    }
    if u == v {
        return Ok(ColorLabel::Zero);
    }
    let of = clustering.membership();
    Ok(if of[u] == of[v] {
        ColorLabel::Color(clustering.colors[of[u]])
    } else {
        ColorLabel::Gamma
    })
}

/// One row `f(owner, ·)` of a binary function over the vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRow {
    owner: usize,
    values: Vec<ColorLabel>,
}

impl VertexRow {
    pub fn new(owner: usize, values: Vec<ColorLabel>) -> Result<Self> {
        match values.get(owner) {
            None => Err(CccError::VertexOutOfRange {
                vertex: owner,
                n: values.len(),
            }),
            Some(ColorLabel::Zero) => Ok(Self { owner, values }),
            Some(_) => Err(CccError::Format(format!(
                "row of vertex {owner} must hold Zero at its owner"
            ))),
        }
    }

    /// The row `phi_u`.
    pub fn of_coloring(phi: &EdgeColoring, u: usize) -> Self {
        Self {
            owner: u,
            values: (0..phi.n()).map(|v| phi.label(u, v)).collect(),
        }
    }

    /// The row `Phi_u` of a clustering.
    pub fn of_clustering(clustering: &ChromaticClustering, u: usize) -> Self {
        let of = clustering.membership();
        Self::from_membership(&of, clustering.colors(), u)
    }

    pub(crate) fn from_membership(of: &[usize], colors: &[usize], u: usize) -> Self {
        let values = (0..of.len())
            .map(|v| {
                if v == u {
                    ColorLabel::Zero
                } else if of[v] == of[u] {
                    ColorLabel::Color(colors[of[u]])
                } else {
                    ColorLabel::Gamma
                }
            })
            .collect();
        Self { owner: u, values }
    }

    /// `color` on `set`, gamma elsewhere, zero at the owner.
    pub fn indicator(n: usize, owner: usize, color: usize, set: &[usize]) -> Self {
        let mut values = vec![ColorLabel::Gamma; n];
        for &v in set {
            values[v] = ColorLabel::Color(color);
        }
        values[owner] = ColorLabel::Zero;
        Self { owner, values }
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn values(&self) -> &[ColorLabel] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_domains(f: &VertexRow, g: &VertexRow) -> Result<()> {
    if f.len() != g.len() {
        return Err(CccError::DomainMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    Ok(())
}

/// Number of positions where the rows disagree.
pub fn d0(f: &VertexRow, g: &VertexRow) -> Result<usize> {
    check_domains(f, g)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .filter(|(a, b)| a != b)
        .count())
}

/// Disagreements inside `k` counted once, outside `k` counted twice.
pub fn d0_k(f: &VertexRow, g: &VertexRow, k: &[usize]) -> Result<usize> {
    check_domains(f, g)?;
    let n = f.len();
    let mut inside = vec![false; n];
    for &v in k {
        if v >= n {
            return Err(CccError::VertexOutOfRange { vertex: v, n });
        }
        inside[v] = true;
    }
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(&inside)
        .filter(|((a, b), _)| a != b)
        .map(|(_, &ins)| if ins { 1 } else { 2 })
        .sum())
}

/// Cost computed as half the summed row distances between `phi` and the clustering.
pub fn cost_via_binary(phi: &EdgeColoring, clustering: &ChromaticClustering) -> Result<usize> {
    check_same_n(phi, clustering)?;
    let of = clustering.membership();
    let mut twice = 0;
    for u in 0..phi.n() {
        let f = VertexRow::of_coloring(phi, u);
        let g = VertexRow::from_membership(&of, clustering.colors(), u);
        twice += d0(&f, &g)?;
    }
    debug_assert!(twice % 2 == 0);
    Ok(twice / 2)
}

fn check_same_n(phi: &EdgeColoring, clustering: &ChromaticClustering) -> Result<()> {
    if phi.n() != clustering.n() {
        return Err(CccError::VertexCountMismatch {
            expected: phi.n(),
            got: clustering.n(),
        });
    }
    Ok(())
}
