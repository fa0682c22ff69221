//! Small dense linear algebra helpers.
//!
//! Everything here operates on tiny systems (ambient dimension d+1 with
//! d <= 5 in practice, active sets of a handful of points), so plain
//! `Vec<f64>` with partial pivoting is both simple and fast enough.

/// Determinant of a square matrix given as rows, by LU with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut sign = 1.0;
    let mut d = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[piv][k].abs() {
                piv = i;
            }
        }
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        d *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    sign * d
}

/// Solve `A x = b` in place for a small square system. Returns `None` when a
/// pivot falls below `1e-13` times the largest entry (treated as singular).
#[allow(clippy::needless_range_loop)]
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<f64> = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[i][k].abs() > m[piv][k].abs() {
                piv = i;
            }
        }
        if m[piv][k].abs() < 1e-13 * scale {
            return None;
        }
        if piv != k {
            m.swap(piv, k);
            x.swap(piv, k);
        }
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    Some(x)
}

/// One-dimensional null space of `d` row vectors in R^{d+1}, via the cofactor
/// (generalised cross product) expansion. The result is not normalised; a
/// near-zero norm signals a rank-deficient input.
pub fn null_vector(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() + 1;
    debug_assert!(rows.iter().all(|r| r.len() == n));
    let mut z = vec![0.0; n];
    for (j, zj) in z.iter_mut().enumerate() {
        let minor: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *zj = sign * det(&minor);
    }
    z
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimum-norm point of the convex hull of `points`, by Wolfe's algorithm.
///
/// Returns `(x, lambda)` with `x = sum lambda_i p_i`, `lambda` on the simplex
/// and `||x||` minimal. Terminates when the Wolfe duality gap
/// `||x||^2 - min_i <x, p_i>` drops below `tol`.
pub fn min_norm_point(points: &[Vec<f64>], tol: f64) -> (Vec<f64>, Vec<f64>) {
    let m = points.len();
    assert!(m > 0, "min_norm_point needs at least one point");
    let n = points[0].len();

    // start from the shortest input point
    let start = (0..m)
        .min_by(|&i, &j| norm(&points[i]).total_cmp(&norm(&points[j])))
        .unwrap();
    let mut support: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();

    let combine = |support: &[usize], lambda: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (&i, &l) in support.iter().zip(lambda) {
            for (vj, pj) in v.iter_mut().zip(&points[i]) {
                *vj += l * pj;
            }
        }
        v
    };

    for _ in 0..64 * (m + n) {
        // most violating vertex
        let j = (0..m)
            .min_by(|&a, &b| dot(&x, &points[a]).total_cmp(&dot(&x, &points[b])))
            .unwrap();
        let gap = dot(&x, &x) - dot(&x, &points[j]);
        if gap <= tol {
            break;
        }
        if !support.contains(&j) {
            support.push(j);
            lambda.push(0.0);
        } else {
            // numerical stall: the best vertex is already in the corral
            break;
        }

        // minor cycle: project onto the affine hull of the corral, stepping
        // back towards the previous feasible point when coefficients go
        // negative
        loop {
            let k = support.len();
            // min-norm point of the affine hull of the corral: bordered KKT
            // system [[P^T P, 1], [1^T, 0]] [mu; nu] = [0; 1]
            let mut kkt: Vec<Vec<f64>> = (0..k + 1)
                .map(|r| {
                    (0..k + 1)
                        .map(|c| {
                            if r < k && c < k {
                                dot(&points[support[r]], &points[support[c]])
                            } else if r == k && c == k {
                                0.0
                            } else {
                                1.0
                            }
                        })
                        .collect()
                })
                .collect();
            let mut rhs = vec![0.0; k + 1];
            rhs[k] = 1.0;
            // tiny Tikhonov term keeps nearly affinely dependent corrals solvable
            for (i, row) in kkt.iter_mut().take(k).enumerate() {
                row[i] += 1e-13;
            }
            let mu = solve(&kkt, &rhs).map(|sol| sol[..k].to_vec());
            let mu = match mu {
                Some(mu) => mu,
                None => {
                    // singular corral: drop the newest point and stop the cycle
                    support.pop();
                    lambda.pop();
                    break;
                }
            };
            if mu.iter().all(|&v| v > 1e-12) {
                lambda = mu;
                break;
            }
            // line search towards mu
            let mut theta = 1.0f64;
            for i in 0..k {
                if mu[i] <= 1e-12 {
                    let denom = lambda[i] - mu[i];
                    if denom > 1e-300 {
                        theta = theta.min(lambda[i] / denom);
                    }
                }
            }
            for i in 0..k {
                lambda[i] += theta * (mu[i] - lambda[i]);
            }
            // drop vanished coordinates
            let mut keep_support = Vec::with_capacity(k);
            let mut keep_lambda = Vec::with_capacity(k);
            for i in 0..k {
                if lambda[i] > 1e-12 {
                    keep_support.push(support[i]);
                    keep_lambda.push(lambda[i]);
                }
            }
            support = keep_support;
            lambda = keep_lambda;
            if support.is_empty() {
                // can only happen by cancellation; restart from the best vertex
                support.push(j);
                lambda.push(1.0);
            }
        }
        x = combine(&support, &lambda);
    }

    let mut full = vec![0.0; m];
    for (&i, &l) in support.iter().zip(&lambda) {
        full[i] += l;
    }
    (x, full)
}

/// Nonnegative least squares `min ||A lambda - b||, lambda >= 0`
/// (Lawson–Hanson active set). `a` holds the generator columns.
#[allow(clippy::needless_range_loop)]
pub fn nnls(columns: &[Vec<f64>], b: &[f64], tol: f64) -> Vec<f64> {
    let m = columns.len();
    let mut lambda = vec![0.0f64; m];
    if m == 0 {
        return lambda;
    }
    let n = b.len();
    let mut passive: Vec<usize> = Vec::new();
    let residual = |lambda: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (i, &l) in lambda.iter().enumerate() {
            if l != 0.0 {
                for (rj, cj) in r.iter_mut().zip(&columns[i]) {
                    *rj -= l * cj;
                }
            }
        }
        r
    };

    for _outer in 0..8 * m + 32 {
        let r = residual(&lambda);
        // most positive gradient among active constraints
        let mut best = None;
        let mut best_w = tol;
        for i in 0..m {
            if passive.contains(&i) {
                continue;
            }
            let w = dot(&columns[i], &r);
            if w > best_w {
                best_w = w;
                best = Some(i);
            }
        }
        let Some(enter) = best else { break };
        passive.push(enter);

        // inner loop: unconstrained LS on the passive set, stepping back when
        // coefficients go negative
        loop {
            let k = passive.len();
            let gram: Vec<Vec<f64>> = (0..k)
                .map(|r| {
                    (0..k)
                        .map(|c| dot(&columns[passive[r]], &columns[passive[c]]))
                        .collect()
                })
                .collect();
            let rhs: Vec<f64> = (0..k).map(|i| dot(&columns[passive[i]], b)).collect();
            let z = match solve(&gram, &rhs) {
                Some(z) => z,
                None => {
                    passive.pop();
                    break;
                }
            };
            if z.iter().all(|&v| v > 0.0) {
                for v in lambda.iter_mut() {
                    *v = 0.0;
                }
                for (i, &p) in passive.iter().enumerate() {
                    lambda[p] = z[i];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (i, &p) in passive.iter().enumerate() {
                if z[i] <= 0.0 {
                    let denom = lambda[p] - z[i];
                    if denom > 1e-300 {
                        alpha = alpha.min(lambda[p] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                passive.pop();
                break;
            }
            for (i, &p) in passive.iter().enumerate() {
                lambda[p] += alpha * (z[i] - lambda[p]);
            }
            passive.retain(|&p| lambda[p] > 1e-14);
            let _ = n;
        }
    }
    lambda
}

/// Projection of `b` onto the cone spanned by `generators` (nonnegative hull).
pub fn project_to_cone(generators: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let lambda = nnls(generators, b, 1e-12);
    let mut p = vec![0.0; b.len()];
    for (g, &l) in generators.iter().zip(&lambda) {
        for (pj, gj) in p.iter_mut().zip(g) {
            *pj += l * gj;
        }
    }
    p
}

/// Derivative-free Nelder–Mead minimisation of `f` starting at `x0`.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    iters: usize,
) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() < 1e-14 * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let mix = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };
        let refl = mix(&centroid, &simplex[n].0, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = mix(&centroid, &simplex[n].0, -2.0);
            let fe = f(&exp);
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
        } else {
            let contr = mix(&centroid, &simplex[n].0, 0.5);
            let fc = f(&contr);
            if fc < simplex[n].1 {
                simplex[n] = (contr, fc);
            } else {
                // shrink
                let best_p = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    item.0 = mix(&best_p, &item.0, 0.5);
                    item.1 = f(&item.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].0.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_solve() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        assert!((det(&a) - 5.0).abs() < 1e-12);
        let x = solve(&a, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_vector_is_cross_product_in_3d() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let z = null_vector(&rows);
        assert!((z[0]).abs() < 1e-15 && (z[1]).abs() < 1e-15 && (z[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn min_norm_point_simplex() {
        // hull of (1,0) and (0,1): min-norm point is (1/2, 1/2)
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (x, l) = min_norm_point(&pts, 1e-14);
        assert!((x[0] - 0.5).abs() < 1e-7 && (x[1] - 0.5).abs() < 1e-7);
        assert!((l[0] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn min_norm_point_contains_origin() {
        let pts = vec![
            vec![1.0, 0.0],
            vec![-0.5, 0.8],
            vec![-0.5, -0.8],
        ];
        let (x, _) = min_norm_point(&pts, 1e-16);
        assert!(norm(&x) < 1e-6, "norm {}", norm(&x));
    }

    #[test]
    fn nnls_projection() {
        // project (1,1) onto cone of (1,0): expect (1,0)
        let gens = vec![vec![1.0, 0.0]];
        let p = project_to_cone(&gens, &[1.0, 1.0]);
        assert!((p[0] - 1.0).abs() < 1e-10 && p[1].abs() < 1e-10);
        // point inside the cone projects to itself
        let gens = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = project_to_cone(&gens, &[0.3, 0.7]);
        assert!((p[0] - 0.3).abs() < 1e-10 && (p[1] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2);
        let x = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 200);
        assert!((x[0] - 2.0).abs() < 1e-5 && (x[1] + 1.0).abs() < 1e-5);
    }
}
