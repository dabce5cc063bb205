//! Brute-force exact solver over all set partitions.
//!
//! For a fixed partition the block colors are independent, so each block takes
//! its majority internal color and only partitions need enumerating.

use crate::error::{CccError, Result};
use crate::model::{ChromaticClustering, EdgeColoring};

/// Largest `n` accepted by [`optimal_cost`] and [`all_optimal`] by default.
pub const EXACT_CAP: usize = 11;

/// Enumerates the set partitions of `0..n` as restricted-growth strings:
/// `labels[0] = 0` and `labels[i] <= 1 + max(labels[..i])`.
#[derive(Debug, Clone)]
pub struct PartitionIterator {
    labels: Vec<usize>,
    started: bool,
    done: bool,
}

impl PartitionIterator {
    pub fn new(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            started: false,
            done: false,
        }
    }

    /// Advances to the next partition without allocating.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.labels);
        }
        let n = self.labels.len();
        let mut prefix_max = vec![0usize; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.labels[i - 1]);
        }
        for i in (1..n).rev() {
            if self.labels[i] <= prefix_max[i] {
                self.labels[i] += 1;
                for l in &mut self.labels[i + 1..] {
                    *l = 0;
                }
                return Some(&self.labels);
            }
        }
        self.done = true;
        None
    }
}

impl Iterator for PartitionIterator {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().map(<[usize]>::to_vec)
    }
}

fn block_counts(phi: &EdgeColoring, block: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; phi.num_colors()];
    for (i, &u) in block.iter().enumerate() {
        for &v in &block[i + 1..] {
            if let Some(c) = phi.color(u, v) {
                counts[c] += 1;
            }
        }
    }
    counts
}

fn majority(counts: &[usize]) -> usize {
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&k| k == best).unwrap_or(0)
}

/// Colors each block with its most frequent internal pair color (lowest index
/// on ties, 0 for singletons and blocks without colored pairs).
pub fn best_coloring(blocks: &[Vec<usize>], phi: &EdgeColoring) -> Result<ChromaticClustering> {
    let colors = blocks
        .iter()
        .map(|b| majority(&block_counts(phi, b)))
        .collect();
    ChromaticClustering::new(phi.n(), phi.num_colors().max(1), blocks.to_vec(), colors)
}

fn check_cap(phi: &EdgeColoring, cap: usize) -> Result<()> {
    if phi.n() > cap {
        return Err(CccError::TooLarge {
            what: "exact solver",
            n: phi.n(),
            cap,
        });
    }
    Ok(())
}

/// Cost contribution of a block relative to cutting everything:
/// internal gamma pairs minus internal pairs of the majority color.
struct BlockTable {
    stride: usize,
    counts: Vec<u32>,
    best: Vec<i64>,
}

impl BlockTable {
    fn new(phi: &EdgeColoring) -> Self {
        let l = phi.num_colors();
        let stride = l + 1;
        let counts = phi.subset_pair_counts();
        let best = (0..1usize << phi.n())
            .map(|m| {
                let row = &counts[m * stride..m * stride + stride];
                let top = row[..l].iter().copied().max().unwrap_or(0);
                row[l] as i64 - top as i64
            })
            .collect();
        Self {
            stride,
            counts,
            best,
        }
    }

    fn tied_colors(&self, mask: usize) -> Vec<usize> {
        let l = self.stride - 1;
        let row = &self.counts[mask * self.stride..mask * self.stride + l];
        let top = row.iter().copied().max().unwrap_or(0);
        (0..l).filter(|&c| row[c] == top).collect()
    }
}

/// Enumerates every partition, calling `visit(cost, block_masks)`.
fn for_each_partition(
    phi: &EdgeColoring,
    table: &BlockTable,
    mut visit: impl FnMut(usize, &[usize]),
) {
    let base = phi.num_positive() as i64;
    let mut masks = Vec::with_capacity(phi.n());
    let mut it = PartitionIterator::new(phi.n());
    while let Some(labels) = it.advance() {
        masks.clear();
        for (v, &b) in labels.iter().enumerate() {
            if b == masks.len() {
                masks.push(0usize);
            }
            masks[b] |= 1 << v;
        }
        let cost = base + masks.iter().map(|&m| table.best[m]).sum::<i64>();
        visit(cost as usize, &masks);
    }
}

fn blocks_of(masks: &[usize]) -> Vec<Vec<usize>> {
    masks
        .iter()
        .map(|&m| {
            (0..usize::BITS as usize)
                .filter(|v| m >> v & 1 == 1)
                .collect()
        })
        .collect()
}

/// Minimum cost over all chromatic clusterings, with a witness.
pub fn optimal_cost(phi: &EdgeColoring) -> Result<(usize, ChromaticClustering)> {
    optimal_cost_capped(phi, EXACT_CAP)
}

pub fn optimal_cost_capped(phi: &EdgeColoring, cap: usize) -> Result<(usize, ChromaticClustering)> {
    check_cap(phi, cap.min(20))?;
    let table = BlockTable::new(phi);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for_each_partition(phi, &table, |cost, masks| {
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, masks.to_vec()));
        }
    });
    let (opt, masks) = best.expect("at least one partition exists");
    Ok((opt, best_coloring(&blocks_of(&masks), phi)?))
}

/// Every optimal clustering. Ties between block colors are expanded; singleton
/// blocks are always colored 0.
pub fn all_optimal(phi: &EdgeColoring) -> Result<Vec<ChromaticClustering>> {
    all_optimal_capped(phi, EXACT_CAP)
}

pub fn all_optimal_capped(phi: &EdgeColoring, cap: usize) -> Result<Vec<ChromaticClustering>> {
    check_cap(phi, cap.min(20))?;
    let table = BlockTable::new(phi);
    let mut opt = usize::MAX;
    let mut partitions: Vec<Vec<usize>> = Vec::new();
    for_each_partition(phi, &table, |cost, masks| {
        if cost < opt {
            opt = cost;
            partitions.clear();
        }
        if cost == opt {
            partitions.push(masks.to_vec());
        }
    });
    let mut out = Vec::new();
    for masks in partitions {
        let choices: Vec<Vec<usize>> = masks
            .iter()
            .map(|&m| {
                if m.count_ones() == 1 {
                    vec![0]
                } else {
                    table.tied_colors(m)
                }
            })
            .collect();
        let blocks = blocks_of(&masks);
        let mut pick = vec![0usize; masks.len()];
        loop {
            let colors = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            out.push(ChromaticClustering::from_parts_unchecked(
                phi.n(),
                blocks.clone(),
                colors,
            ));
            // odometer over tied colors
            let mut i = 0;
            while i < pick.len() {
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == pick.len() {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cost;
    use proptest::prelude::*;

    fn t1() -> EdgeColoring {
        EdgeColoring::from_pairs(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap()
    }

    fn planted() -> EdgeColoring {
        EdgeColoring::from_pairs(4, 2, [(0, 1, 0), (2, 3, 1)]).unwrap()
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(PartitionIterator::new(n).count(), b, "n={n}");
        }
    }

    #[test]
    fn partitions_are_distinct_rgs() {
        let all: Vec<Vec<usize>> = PartitionIterator::new(5).collect();
        let unique: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(unique.len(), all.len());
        for rgs in &all {
            let mut max = 0;
            assert_eq!(rgs[0], 0);
            for &l in &rgs[1..] {
                assert!(l <= max + 1);
                max = max.max(l);
            }
        }
    }

    #[test]
    fn best_coloring_rules() {
        let phi = t1();
        let c = best_coloring(&[vec![0, 1, 2]], &phi).unwrap();
        assert_eq!(c.colors(), &[0]);
        let phi2 = EdgeColoring::from_pairs(3, 2, [(0, 1, 1), (1, 2, 0)]).unwrap();
        assert_eq!(
            best_coloring(&[vec![0, 1, 2]], &phi2).unwrap().colors(),
            &[0]
        );
        let single = best_coloring(&[vec![0], vec![1], vec![2]], &phi2).unwrap();
        assert_eq!(single.colors(), &[0, 0, 0]);
    }

    #[test]
    fn t1_optimum() {
        let phi = t1();
        // partition costs enumerated by hand: {012}=1, {01}{2}=1, {02}{1}=3, {0}{12}=1, singletons=2
        let (opt, w) = optimal_cost(&phi).unwrap();
        assert_eq!(opt, 1);
        assert_eq!(cost(&phi, &w).unwrap(), 1);
        let all = all_optimal(&phi).unwrap();
        assert_eq!(all.len(), 3);
        let expect = [
            ChromaticClustering::new(3, 2, vec![vec![0, 1, 2]], vec![0]).unwrap(),
            ChromaticClustering::new(3, 2, vec![vec![0, 1], vec![2]], vec![0, 0]).unwrap(),
            ChromaticClustering::new(3, 2, vec![vec![0], vec![1, 2]], vec![0, 0]).unwrap(),
        ];
        for e in &expect {
            assert!(all.contains(e), "missing {e:?}");
        }
    }

    #[test]
    fn planted_and_trivial() {
        let phi = planted();
        let (opt, w) = optimal_cost(&phi).unwrap();
        assert_eq!(opt, 0);
        let truth =
            ChromaticClustering::new(4, 2, vec![vec![0, 1], vec![2, 3]], vec![0, 1]).unwrap();
        assert_eq!(w, truth);
        assert_eq!(all_optimal(&phi).unwrap(), vec![truth]);

        let one = EdgeColoring::new(1, 1);
        assert_eq!(
            optimal_cost(&one).unwrap(),
            (0, ChromaticClustering::singletons(1))
        );

        let gamma = EdgeColoring::new(2, 1);
        assert_eq!(
            all_optimal(&gamma).unwrap(),
            vec![ChromaticClustering::singletons(2)]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let phi = EdgeColoring::new(12, 1);
        assert!(matches!(
            optimal_cost(&phi),
            Err(CccError::TooLarge { cap: 11, .. })
        ));
        assert!(all_optimal(&phi).is_err());
    }

    fn arb_coloring(max_n: usize) -> impl Strategy<Value = EdgeColoring> {
        (1..=max_n, 1..=3usize).prop_flat_map(|(n, l)| {
            let pairs = n * (n - 1) / 2;
            prop::collection::vec(prop::option::weighted(0.6, 0..l), pairs).prop_map(move |cols| {
                let mut phi = EdgeColoring::new(n, l);
                for ((u, v), c) in crate::model::pairs(n).zip(cols) {
                    phi.set(u, v, c).unwrap();
                }
                phi
            })
        })
    }

    /// Naive oracle: every partition and every coloring of its blocks.
    fn naive_opt(phi: &EdgeColoring) -> usize {
        let mut best = usize::MAX;
        for labels in PartitionIterator::new(phi.n()) {
            let k = labels.iter().max().map_or(0, |m| m + 1);
            let total = phi.num_colors().pow(k as u32);
            for code in 0..total {
                let colors: Vec<usize> = (0..k)
                    .map(|b| code / phi.num_colors().pow(b as u32) % phi.num_colors())
                    .collect();
                let cl = ChromaticClustering::from_assignment(&labels, &colors, phi.num_colors())
                    .unwrap();
                best = best.min(cost(phi, &cl).unwrap());
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn matches_naive_search(phi in arb_coloring(6)) {
            let (opt, w) = optimal_cost(&phi).unwrap();
            prop_assert_eq!(opt, naive_opt(&phi));
            prop_assert_eq!(cost(&phi, &w).unwrap(), opt);
            let all = all_optimal(&phi).unwrap();
            prop_assert!(all.contains(&w.canonicalize_singletons()));
            for cl in &all {
                prop_assert_eq!(cost(&phi, cl).unwrap(), opt);
            }
        }

        #[test]
        fn relabeling_one_pair_moves_opt_by_at_most_one(phi in arb_coloring(7), pick in any::<prop::sample::Index>()) {
            prop_assume!(phi.num_positive() > 0);
            let positive: Vec<_> = phi.positive_pairs().collect();
            let (u, v, _) = positive[pick.index(positive.len())];
            let mut deleted = phi.clone();
            deleted.set(u, v, None).unwrap();
            let a = optimal_cost(&phi).unwrap().0 as i64;
            let b = optimal_cost(&deleted).unwrap().0 as i64;
            prop_assert!((a - b).abs() <= 1);
        }
    }
}
