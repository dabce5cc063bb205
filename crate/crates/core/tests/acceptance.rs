//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use ccc_core::analysis::{montecarlo_check, verify_charging, verify_triangle_inequality, Sign};
use ccc_core::exact::{all_optimal, optimal_cost, PartitionIterator};
use ccc_core::generate::{generate, PlantedModel};
use ccc_core::model::{cost, cost_via_binary};
use ccc_core::precluster::{
    atom_distance_bound_holds, atoms_preserved, build_atoms, pivot_heuristic, DEFAULT_BETA,
};
use ccc_core::relax::{
    check_cluster, members_mask, solve_cluster, solve_standard, ClusterDistribution, ClusterEntry,
};
use ccc_core::rng::RngStream;
use ccc_core::rounding::{
    estimate_expected_cost, round_cluster_based, round_mixed, round_pivot_based, RoundingFunctions,
};
use ccc_core::{ChromaticClustering, EdgeColoring, ALPHA_18_11};

const STEP: f64 = 0.01;
const LP_SLACK: f64 = 1e-6;
const NOISE_LEVELS: [f64; 4] = [0.0, 0.1, 0.2, 0.35];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Planted instance with sizes, colors and noise drawn from stream `i` of `seed`.
fn random_instance(
    seed: u64,
    i: u64,
    n_range: (usize, usize),
    l_range: (usize, usize),
) -> EdgeColoring {
    let mut rng = RngStream::with_stream(seed, i);
    let n = n_range.0 + rng.index(n_range.1 - n_range.0 + 1);
    let l = l_range.0 + rng.index(l_range.1 - l_range.0 + 1);
    let k = 1 + rng.index(n.div_ceil(2));
    let noise_in = NOISE_LEVELS[rng.index(NOISE_LEVELS.len())];
    let noise_out = NOISE_LEVELS[rng.index(NOISE_LEVELS.len())];
    let model = PlantedModel::balanced(n, l, k, noise_in, noise_out, seed ^ (i << 20)).unwrap();
    generate(&model).unwrap()
}

fn triangles() -> Outcome {
    let r = verify_triangle_inequality(ALPHA_18_11, STEP).unwrap();
    let target = [Sign::Plus, Sign::Plus, Sign::Minus];
    let anchor_tight = r.tight_points.iter().any(|p| {
        p.signs == target
            && p.gap().abs() <= 1e-9
            && (p.xs[0] - 0.5).abs() <= STEP
            && (p.xs[1] - 0.5).abs() <= STEP
            && (p.xs[2] - 1.0).abs() <= STEP
    });
    outcome(
        r.violations.is_empty() && anchor_tight,
        format!(
            "{} grid + {} perturbed points, {} violations, min gap {:.3e}, tight point near (+,+,-)/(1/2,1/2,1): {}",
            r.points_checked,
            r.perturbed_checked,
            r.violations.len(),
            r.min_gap,
            anchor_tight
        ),
    )
}

fn charging() -> Outcome {
    let r = verify_charging(ALPHA_18_11, STEP).unwrap();
    let points: usize = r.cases.iter().map(|c| c.points_checked).sum();
    let gaps: Vec<String> = r
        .cases
        .iter()
        .map(|c| format!("{} {:.3e}", c.case.name(), c.min_gap))
        .collect();
    outcome(
        r.total_violations() == 0,
        format!(
            "{points} points over {} cases, {} violations, min gaps [{}]",
            r.cases.len(),
            r.total_violations(),
            gaps.join(", ")
        ),
    )
}

struct BatchRow {
    phi: EdgeColoring,
    standard: f64,
    strong: f64,
    cluster: f64,
    dist: ClusterDistribution,
    opt: usize,
}

fn lp_batch() -> Vec<BatchRow> {
    (0..200u64)
        .into_par_iter()
        .map(|i| {
            let phi = random_instance(3, i, (4, 9), (1, 3));
            let (standard, _) = solve_standard(&phi, false).unwrap();
            let (strong, _) = solve_standard(&phi, true).unwrap();
            let (cluster, dist) = solve_cluster(&phi).unwrap();
            let (opt, _) = optimal_cost(&phi).unwrap();
            BatchRow {
                phi,
                standard,
                strong,
                cluster,
                dist,
                opt,
            }
        })
        .collect()
}

fn dominance(batch: &[BatchRow]) -> Outcome {
    let mut bad = Vec::new();
    let mut strict = [0usize; 3];
    for (i, r) in batch.iter().enumerate() {
        let chain = [r.standard, r.strong, r.cluster, r.opt as f64];
        for k in 0..3 {
            if chain[k] > chain[k + 1] + LP_SLACK {
                bad.push(format!("#{i} link {k}: {} > {}", chain[k], chain[k + 1]));
            }
            if chain[k] < chain[k + 1] - LP_SLACK {
                strict[k] += 1;
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} instances, {} broken links{}; strict gaps standard<strong {}, strong<cluster {}, cluster<OPT {}",
            batch.len(),
            bad.len(),
            bad.first().map(|b| format!(" (first {b})")).unwrap_or_default(),
            strict[0],
            strict[1],
            strict[2]
        ),
    )
}

fn approximation(batch: &[BatchRow]) -> Outcome {
    let f = RoundingFunctions::greedy();
    let rows: Vec<(f64, f64, usize, f64)> = batch
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let est =
                estimate_expected_cost(&r.phi, &r.dist, ALPHA_18_11, &f, 2000, 1000 + i as u64)
                    .unwrap();
            (est.mean, est.stderr.unwrap_or(0.0), r.opt, r.cluster)
        })
        .collect();
    let mut over = 0;
    for &(mean, se, _, cluster) in &rows {
        if mean > ALPHA_18_11 * cluster + 3.0 * se {
            over += 1;
        }
    }
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.2 > 0)
        .map(|r| r.0 / r.2 as f64)
        .collect();
    let batch_mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        over == 0 && batch_mean <= 1.64,
        format!(
            "{} instances x 2000 trials, {over} above bound; mean ratio {batch_mean:.4} over {} with OPT > 0 (max {worst:.4})",
            rows.len(),
            ratios.len()
        ),
    )
}

/// The cluster LP optimum, mixed with two random clusterings when it is
/// integral so that the check also sees fractional probabilities.
fn fractional_distribution(phi: &EdgeColoring, rng: &mut RngStream) -> ClusterDistribution {
    let (_, dist) = solve_cluster(phi).unwrap();
    if !dist.is_integral(1e-6) {
        return dist;
    }
    let (n, l) = (phi.n(), phi.num_colors());
    let w = [0.5, 0.3, 0.2];
    let mut mass: BTreeMap<(u64, usize), f64> = BTreeMap::new();
    for e in dist.entries() {
        *mass.entry((e.mask, e.color)).or_default() += w[0] * e.weight;
    }
    for &wk in &w[1..] {
        let labels: Vec<usize> = (0..n).map(|_| rng.index(n.div_ceil(2))).collect();
        let colors: Vec<usize> = (0..n).map(|_| rng.index(l)).collect();
        let cl = ChromaticClustering::from_assignment(&labels, &colors, l).unwrap();
        for (block, c) in cl.iter() {
            *mass.entry((members_mask(block), c)).or_default() += wk;
        }
    }
    let entries = mass
        .into_iter()
        .map(|((mask, color), weight)| ClusterEntry {
            mask,
            color,
            weight,
        })
        .collect();
    ClusterDistribution::new(n, l, entries).unwrap()
}

fn cluster_probabilities() -> Outcome {
    let results: Vec<(usize, usize, usize, f64)> = (0..24u64)
        .into_par_iter()
        .map(|i| {
            let phi = random_instance(5, i, (4, 6), (1, 3));
            let dist = fractional_distribution(&phi, &mut RngStream::with_stream(6, i));
            assert!(check_cluster(&dist).is_feasible(1e-9));
            let checks = montecarlo_check(&phi, &dist, 10_000, 177 + i).unwrap();
            let flagged = checks.iter().filter(|c| c.flagged).count();
            let interior = checks
                .iter()
                .filter(|c| c.predicted > 1e-9 && c.predicted < 1.0 - 1e-9)
                .count();
            let max_z = checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
            (checks.len(), interior, flagged, max_z)
        })
        .collect();
    let pairs: usize = results.iter().map(|r| r.0).sum();
    let interior: usize = results.iter().map(|r| r.1).sum();
    let flagged: usize = results.iter().map(|r| r.2).sum();
    let max_z = results.iter().map(|r| r.3).fold(0.0, f64::max);
    outcome(
        flagged == 0 && interior > 0,
        format!(
            "{} instances, {pairs} pairs ({interior} with fractional prediction) x 10000 trials, {flagged} flagged, max |z| {max_z:.2}",
            results.len()
        ),
    )
}

fn atom_preservation() -> Outcome {
    let results: Vec<(usize, bool, bool)> = (0..120u64)
        .into_par_iter()
        .map(|i| {
            let phi = random_instance(11, i, (4, 8), (1, 3));
            let seed = pivot_heuristic(&phi, &mut RngStream::with_stream(12, i));
            let atoms = build_atoms(&phi, &seed, DEFAULT_BETA).unwrap();
            let optima = all_optimal(&phi).unwrap();
            let preserved = optima.iter().all(|o| atoms_preserved(&atoms, o));
            let bounded = atom_distance_bound_holds(&phi, &atoms, DEFAULT_BETA);
            (atoms.non_singleton().count(), preserved, bounded)
        })
        .collect();
    let atoms: usize = results.iter().map(|r| r.0).sum();
    let not_preserved = results.iter().filter(|r| !r.1).count();
    let unbounded = results.iter().filter(|r| !r.2).count();
    outcome(
        not_preserved == 0 && unbounded == 0 && atoms > 0,
        format!(
            "{} instances, {atoms} non-singleton atoms, {not_preserved} instances with a split atom, {unbounded} with a distance-bound failure",
            results.len()
        ),
    )
}

/// Every chromatic clustering of `n` vertices with `l` colors.
fn all_clusterings(n: usize, l: usize) -> Vec<ChromaticClustering> {
    let mut out = Vec::new();
    for labels in PartitionIterator::new(n) {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut colors = vec![0; k];
        loop {
            out.push(ChromaticClustering::from_assignment(&labels, &colors, l).unwrap());
            let Some(i) = colors.iter().position(|&c| c + 1 < l) else {
                break;
            };
            colors[i] += 1;
            colors[..i].fill(0);
        }
    }
    out
}

fn cost_equivalence() -> Outcome {
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for i in 0..10u64 {
        let phi = random_instance(21, i, (3, 6), (1, 3));
        for cl in all_clusterings(phi.n(), phi.num_colors()) {
            checked += 1;
            mismatches +=
                usize::from(cost(&phi, &cl).unwrap() != cost_via_binary(&phi, &cl).unwrap());
        }
    }
    let exhaustive = checked;
    for i in 0..10_000u64 {
        let phi = random_instance(22, i, (1, 10), (1, 4));
        let mut rng = RngStream::with_stream(23, i);
        let n = phi.n();
        let labels: Vec<usize> = (0..n).map(|_| rng.index(n)).collect();
        let colors: Vec<usize> = (0..n).map(|_| rng.index(phi.num_colors())).collect();
        let cl = ChromaticClustering::from_assignment(&labels, &colors, phi.num_colors()).unwrap();
        checked += 1;
        mismatches += usize::from(cost(&phi, &cl).unwrap() != cost_via_binary(&phi, &cl).unwrap());
    }
    outcome(
        mismatches == 0,
        format!(
            "{exhaustive} exhaustive + {} random clusterings, {mismatches} mismatches",
            checked - exhaustive
        ),
    )
}

fn zero_opt() -> Outcome {
    let mut problems = Vec::new();
    let f = RoundingFunctions::greedy();
    let mut runs = 0usize;
    for (i, (n, l, k)) in [
        (4, 1, 2),
        (6, 2, 2),
        (6, 3, 3),
        (7, 2, 3),
        (8, 3, 4),
        (9, 2, 3),
        (10, 3, 5),
    ]
    .into_iter()
    .enumerate()
    {
        let model = PlantedModel::balanced(n, l, k, 0.0, 0.0, i as u64).unwrap();
        let phi = generate(&model).unwrap();
        let (standard, std_sol) = solve_standard(&phi, false).unwrap();
        let (strong, strong_sol) = solve_standard(&phi, true).unwrap();
        let (cluster, dist) = solve_cluster(&phi).unwrap();
        for (name, v) in [
            ("standard", standard),
            ("strong", strong),
            ("cluster", cluster),
        ] {
            if v.abs() > LP_SLACK {
                problems.push(format!("n={n} {name} value {v}"));
            }
        }
        if !dist.is_integral(LP_SLACK) {
            problems.push(format!("n={n} cluster solution fractional"));
        }
        for s in 0..50u64 {
            let mut rng = RngStream::with_stream(s, i as u64);
            let outs = [
                round_cluster_based(&phi, &dist, &mut rng).unwrap(),
                round_pivot_based(&phi, &std_sol, &f, &mut rng).unwrap(),
                round_pivot_based(&phi, &strong_sol, &f, &mut rng).unwrap(),
                round_mixed(&phi, &dist, ALPHA_18_11, &f, &mut rng).unwrap(),
            ];
            for cl in outs {
                runs += 1;
                let c = cost(&phi, &cl).unwrap();
                if c != 0 {
                    problems.push(format!("n={n} seed {s}: rounding cost {c}"));
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "7 planted instances, {runs} rounding runs, {} problems{}",
            problems.len(),
            problems
                .first()
                .map(|p| format!(" (first {p})"))
                .unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, run: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{verdict}] criterion {id}: {name}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    };
    report(1, "triangle sweep", &triangles);
    report(2, "charging sweep", &charging);
    let batch = lp_batch();
    report(3, "LP dominance chain", &|| dominance(&batch));
    report(4, "approximation bound", &|| approximation(&batch));
    report(5, "cluster rounding probabilities", &cluster_probabilities);
    report(6, "atom preservation", &atom_preservation);
    report(7, "cost formula equivalence", &cost_equivalence);
    report(8, "zero-OPT integrality", &zero_opt);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
