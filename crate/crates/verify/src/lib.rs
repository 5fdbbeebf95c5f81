//! Slow, obviously-correct reference implementations used to check the
//! optimized code paths in `stressgrade`. Nothing here depends on the
//! crate under test.

/// ROC-AUC by counting every (positive, negative) pair, ties worth one half.
/// Returns `None` when either class is absent.
pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for (i, &yi) in labels.iter().enumerate() {
        if !yi {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Positive fraction among the `k` nearest training points. A point is a
/// neighbour when fewer than `k` points beat it, where a point beats
/// another by being strictly closer, or equally close with a lower index.
pub fn brute_force_knn_score(train: &[Vec<f64>], labels: &[bool], query: &[f64], k: usize) -> f64 {
    let d: Vec<f64> = train.iter().map(|x| squared_distance(x, query)).collect();
    let mut positives = 0;
    for i in 0..train.len() {
        let beaten_by = (0..train.len())
            .filter(|&j| d[j] < d[i] || (d[j] == d[i] && j < i))
            .count();
        if beaten_by < k && labels[i] {
            positives += 1;
        }
    }
    positives as f64 / k as f64
}

/// Per-index mean over the clipped window `[i - h, i + h]`.
pub fn naive_moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let h = (window / 2) as isize;
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            let mut count = 0;
            for j in (i - h)..=(i + h) {
                if j >= 0 && j < n {
                    acc += x[j as usize];
                    count += 1;
                }
            }
            acc / count as f64
        })
        .collect()
}

/// Central finite-difference gradient with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let up = f(&probe);
        probe[k] = x[k] - h;
        let down = f(&probe);
        probe[k] = x[k];
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// SVM dual objective `sum a - 1/2 a'Qa` with `Q_ij = y_i y_j K_ij`.
pub fn dual_objective(kernel: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{a : 0 <= a <= c, y'a = 0}` with `y` in
/// {-1, +1}. The multiplier of the equality constraint is found by
/// bisection.
pub fn project_feasible(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let balance = |lambda: f64| -> f64 {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| yi * (vi - lambda * yi).clamp(0.0, c))
            .sum()
    };
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect()
}

/// Maximizes the SVM dual by accelerated projected gradient with
/// restarts. Returns the multipliers.
pub fn projected_gradient_dual(kernel: &[Vec<f64>], y: &[f64], c: f64, max_iter: usize) -> Vec<f64> {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * kernel[i][j]).collect())
        .collect();
    // Gershgorin bound on the largest eigenvalue
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    // minimization form 1/2 a'Qa - e'a
    let objective = |a: &[f64]| -dual_objective(kernel, y, a);

    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    let mut last = objective(&a);
    for _ in 0..max_iter {
        let grad: Vec<f64> = (0..n)
            .map(|i| q[i].iter().zip(&z).map(|(qij, zj)| qij * zj).sum::<f64>() - 1.0)
            .collect();
        let step: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - gi / lipschitz).collect();
        let next = project_feasible(&step, y, c);
        let value = objective(&next);
        if value > last {
            if t == 1.0 {
                // a plain projected step no longer improves
                break;
            }
            // restart momentum
            z = a.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let moved: f64 = next.iter().zip(&a).map(|(p, q)| (p - q).abs()).sum();
        z = next
            .iter()
            .zip(&a)
            .map(|(p, q)| p + (t - 1.0) / t_next * (p - q))
            .collect();
        a = next;
        t = t_next;
        last = value;
        if moved < 1e-13 {
            break;
        }
    }
    a
}
