//! Lloyd's k-means with k-means++ seeding, fully seeded and deterministic.

use super::EncodeError;
use crate::matrix::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const MAX_ITERATIONS: usize = 300;
const RELATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansCodebook {
    pub k: usize,
    pub dim: usize,
    pub centers: Vec<Vec<f64>>,
}

/// Fit result: the codebook plus the inertia after every Lloyd iteration
/// (monotonically non-increasing).
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub codebook: KMeansCodebook,
    pub inertia: Vec<f64>,
}

pub fn fit_kmeans(
    descriptors: &FeatureMatrix,
    k: usize,
    seed: u64,
) -> Result<KMeansFit, EncodeError> {
    let n = descriptors.rows();
    if k == 0 {
        return Err(EncodeError::TooFewSamples { needed: 1, got: 0 });
    }
    if n < k {
        return Err(EncodeError::TooFewSamples { needed: k, got: n });
    }
    let dim = descriptors.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_seeds(descriptors, k, &mut rng);

    let mut assignment = vec![0usize; n];
    let mut inertia_trace = Vec::new();
    let mut previous = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        // Assign (ties go to the lower center index).
        let mut inertia = 0.0;
        for i in 0..n {
            let (best, d2) = nearest_center(descriptors.row(i), &centers);
            assignment[i] = best;
            inertia += d2;
        }
        inertia_trace.push(inertia);

        // Update.
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = assignment[i];
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(descriptors.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centers[c] = sums[c].clone();
            }
        }
        // Empty clusters grab the point farthest from its assigned center.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut by_distance: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let d2 = dist2(descriptors.row(i), &centers[assignment[i]]);
                    (d2, i)
                })
                .collect();
            by_distance.sort_by(|a, b| {
                b.0.partial_cmp(&a.0).expect("finite distances").then(a.1.cmp(&b.1))
            });
            for (slot, empty) in empties.into_iter().enumerate() {
                let (_, point) = by_distance[slot.min(n - 1)];
                centers[empty] = descriptors.row(point).to_vec();
            }
            previous = f64::INFINITY; // distances changed, keep iterating
            continue;
        }

        let inertia = *inertia_trace.last().expect("pushed above");
        if previous.is_finite() {
            let improvement = (previous - inertia) / previous.max(f64::MIN_POSITIVE);
            if improvement.abs() < RELATIVE_TOLERANCE {
                break;
            }
        }
        if inertia == 0.0 {
            break;
        }
        previous = inertia;
    }

    Ok(KMeansFit {
        codebook: KMeansCodebook {
            k,
            dim,
            centers,
        },
        inertia: inertia_trace,
    })
}

pub(crate) fn nearest_center(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d2 = dist2(row, center);
        if d2 < best_d2 {
            best_d2 = d2;
            best = c;
        }
    }
    (best, best_d2)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// k-means++: each next seed is drawn with probability proportional to its
/// squared distance to the closest seed so far. When all remaining
/// distances are zero, the first unchosen row is taken.
fn plus_plus_seeds(descriptors: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = descriptors.rows();
    let first = rng.gen_range(0..n);
    let mut centers = vec![descriptors.row(first).to_vec()];
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut min_d2: Vec<f64> = (0..n)
        .map(|i| dist2(descriptors.row(i), &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut picked = None;
            for (i, &d2) in min_d2.iter().enumerate() {
                target -= d2;
                if target <= 0.0 && d2 > 0.0 {
                    picked = Some(i);
                    break;
                }
            }
            picked.unwrap_or_else(|| {
                min_d2
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(_, &d2)| d2 > 0.0)
                    .map(|(i, _)| i)
                    .expect("total > 0 implies a positive entry")
            })
        } else {
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        centers.push(descriptors.row(pick).to_vec());
        for i in 0..n {
            let d2 = dist2(descriptors.row(i), centers.last().expect("just pushed"));
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
        }
    }
    centers
}
