use rand::Rng;

use super::Partition;
use crate::error::{Error, Result};
use crate::scenario::{stream_rng, Point, Stream};

const RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 100;

/// Balanced geographic clustering of O-RUs into `num_edu` contiguous groups.
///
/// k-means with k-means++ seeding, where each assignment step is a
/// capacity-limited greedy match (closest point/centre pairs first) that keeps
/// every group at `floor(L/M)` or `ceil(L/M)` O-RUs. The lowest within-group
/// squared error over a few seeded restarts wins.
pub fn clustered_baseline(points: &[Point], num_edu: usize, seed: u64) -> Result<Partition> {
    let n = points.len();
    if num_edu == 0 || n < num_edu {
        return Err(Error::Infeasible(format!("cannot split {n} O-RUs into {num_edu} EDUs")));
    }
    if num_edu == 1 {
        return Ok(Partition::single(n));
    }
    if num_edu == n {
        return Ok(Partition::singletons(n));
    }
    let mut rng = stream_rng(seed, 0, Stream::Clustering);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..RESTARTS {
        let mut centres = kmeans_pp(points, num_edu, &mut rng);
        let mut labels = balanced_assign(points, &centres);
        for _ in 0..MAX_ITERATIONS {
            centres = centroids(points, &labels, num_edu);
            let next = balanced_assign(points, &centres);
            if next == labels {
                break;
            }
            labels = next;
        }
        let centres = centroids(points, &labels, num_edu);
        let sse: f64 = points.iter().zip(&labels).map(|(p, &m)| sq_dist(p, &centres[m])).sum();
        let canon = Partition::from_genome(labels, num_edu)?.genome().to_vec();
        let better = match &best {
            None => true,
            Some((b, g)) => sse < b - 1e-9 || ((sse - b).abs() <= 1e-9 && canon < *g),
        };
        if better {
            best = Some((sse, canon));
        }
    }
    let (_, genome) = best.expect("at least one restart");
    Partition::from_genome(genome, num_edu)
}

fn sq_dist(a: &Point, b: &Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

fn kmeans_pp<R: Rng + ?Sized>(points: &[Point], k: usize, rng: &mut R) -> Vec<Point> {
    let mut centres = vec![points[rng.random_range(0..points.len())]];
    while centres.len() < k {
        let w: Vec<f64> = points
            .iter()
            .map(|p| centres.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = w.iter().sum();
        let idx = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            w.iter()
                .position(|&x| {
                    t -= x;
                    t < 0.0
                })
                .unwrap_or(points.len() - 1)
        } else {
            rng.random_range(0..points.len())
        };
        centres.push(points[idx]);
    }
    centres
}

fn balanced_assign(points: &[Point], centres: &[Point]) -> Vec<usize> {
    let n = points.len();
    let k = centres.len();
    let lo = n / k;
    let extra = n % k;
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|p| (0..k).map(move |c| (p, c)))
        .map(|(p, c)| (sq_dist(&points[p], &centres[c]), p, c))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut labels = vec![usize::MAX; n];
    let mut sizes = vec![0usize; k];
    let mut at_ceiling = 0;
    let mut assigned = 0;
    for (_, p, c) in pairs {
        if labels[p] != usize::MAX {
            continue;
        }
        let room = sizes[c] < lo || (sizes[c] == lo && at_ceiling < extra);
        if !room {
            continue;
        }
        if sizes[c] == lo && extra > 0 {
            at_ceiling += 1;
        }
        labels[p] = c;
        sizes[c] += 1;
        assigned += 1;
        if assigned == n {
            break;
        }
    }
    labels
}

fn centroids(points: &[Point], labels: &[usize], k: usize) -> Vec<Point> {
    let mut sum = vec![[0.0; 3]; k];
    let mut count = vec![0usize; k];
    for (p, &m) in points.iter().zip(labels) {
        for i in 0..3 {
            sum[m][i] += p[i];
        }
        count[m] += 1;
    }
    sum.into_iter()
        .zip(count)
        .map(|(s, c)| {
            let c = c.max(1) as f64;
            [s[0] / c, s[1] / c, s[2] / c]
        })
        .collect()
}
