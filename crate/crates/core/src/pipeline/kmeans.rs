use crate::rng::Rng;

#[derive(Debug, Clone, Copy)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative change in inertia below which Lloyd iterations stop.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.below(n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total <= 0.0 {
            rng.below(n)
        } else {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let c = points[pick].clone();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (c, ctr) in centers.iter().enumerate() {
            let d = sq_dist(p, ctr);
            if d < bd {
                bd = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = bd;
        inertia += bd;
    }
    inertia
}

fn lloyd(points: &[Vec<f64>], k: usize, params: &KMeansParams, rng: &mut Rng) -> KMeansResult {
    let n = points.len();
    let dim = points[0].len();
    let mut centers = seed_plus_plus(points, k, rng);
    let mut labels = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut inertia = assign(points, &centers, &mut labels, &mut dists);
    for _ in 0..params.max_iters {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed an empty cluster at the point farthest from its center.
                let far = (0..n)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                centers[c] = points[far].clone();
                dists[far] = 0.0;
            } else {
                for (ctr, s) in centers[c].iter_mut().zip(&sums[c]) {
                    *ctr = s / counts[c] as f64;
                }
            }
        }
        let new_inertia = assign(points, &centers, &mut labels, &mut dists);
        let change = (inertia - new_inertia).abs();
        inertia = new_inertia;
        if change <= params.tol * inertia.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    KMeansResult { labels, inertia }
}

/// k-means++ seeding followed by Lloyd iterations; the restart with the
/// smallest within-cluster sum of squares wins (first one on ties).
pub fn kmeans(points: &[Vec<f64>], k: usize, params: &KMeansParams, rng: &mut Rng) -> KMeansResult {
    assert!(k >= 1 && k <= points.len(), "k out of range");
    let mut best: Option<KMeansResult> = None;
    for _ in 0..params.restarts.max(1) {
        let r = lloyd(points, k, params, rng);
        if best.as_ref().is_none_or(|b| r.inertia < b.inertia) {
            best = Some(r);
        }
    }
    best.expect("at least one restart")
}
