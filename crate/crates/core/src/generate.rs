//! Planted-partition instance generator.

use crate::error::{check_unit_interval, CccError, Result};
use crate::model::{ChromaticClustering, EdgeColoring};
use crate::rng::RngStream;

/// Consecutive vertex ranges form the planted clusters; cluster `i` has color
/// `i mod L`. An intra-cluster pair deviates from its cluster's color with
/// probability `noise_in` (half of the deviations go to gamma, half to a
/// uniform other color; all to gamma when `L = 1`). An inter-cluster pair
/// takes a uniform color with probability `noise_out` and is gamma otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedModel {
    pub num_colors: usize,
    pub cluster_sizes: Vec<usize>,
    pub noise_in: f64,
    pub noise_out: f64,
    pub seed: u64,
}

impl PlantedModel {
    /// `k` clusters of nearly equal size (larger ones first).
    pub fn balanced(
        n: usize,
        num_colors: usize,
        k: usize,
        noise_in: f64,
        noise_out: f64,
        seed: u64,
    ) -> Result<Self> {
        if k == 0 || k > n {
            return Err(CccError::InvalidParameter {
                name: "clusters",
                value: k as f64,
                reason: "need between 1 and n clusters",
            });
        }
        let sizes = (0..k).map(|i| n / k + usize::from(i < n % k)).collect();
        let model = Self {
            num_colors,
            cluster_sizes: sizes,
            noise_in,
            noise_out,
            seed,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_colors == 0 {
            return Err(CccError::InvalidParameter {
                name: "L",
                value: 0.0,
                reason: "need at least one color",
            });
        }
        if self.cluster_sizes.contains(&0) {
            return Err(CccError::InvalidParameter {
                name: "cluster_sizes",
                value: 0.0,
                reason: "clusters must be nonempty",
            });
        }
        check_unit_interval("noise_in", self.noise_in)?;
        check_unit_interval("noise_out", self.noise_out)
    }

    /// Cluster index of every vertex.
    pub fn labels(&self) -> Vec<usize> {
        self.cluster_sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat_n(i, s))
            .collect()
    }

    /// The planted clustering.
    pub fn planted(&self) -> Result<ChromaticClustering> {
        self.validate()?;
        let colors: Vec<usize> = (0..self.cluster_sizes.len())
            .map(|i| i % self.num_colors)
            .collect();
        ChromaticClustering::from_assignment(&self.labels(), &colors, self.num_colors)
    }
}

/// Draws an instance; the same model always yields the same instance.
pub fn generate(model: &PlantedModel) -> Result<EdgeColoring> {
    model.validate()?;
    let labels = model.labels();
    let l = model.num_colors;
    let mut phi = EdgeColoring::new(labels.len(), l);
    let mut rng = RngStream::new(model.seed);
    for (u, v) in crate::model::pairs(labels.len()) {
        let color = if labels[u] == labels[v] {
            let own = labels[u] % l;
            if rng.uniform() < model.noise_in {
                if l == 1 || rng.uniform() < 0.5 {
                    None
                } else {
                    // uniform over the other L - 1 colors
                    let k = rng.index(l - 1);
                    Some(if k >= own { k + 1 } else { k })
                }
            } else {
                Some(own)
            }
        } else if rng.uniform() < model.noise_out {
            Some(rng.index(l))
        } else {
            None
        };
        phi.set(u, v, color)?;
    }
    Ok(phi)
}
