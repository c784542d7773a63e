//! Derivative-free local minimization and numerical curvature, sized for
//! the five-parameter likelihood fits in this crate.

/// Nelder-Mead stopping rules and budget.
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    /// Simplex size tolerance (max vertex distance from the best point).
    pub x_tol: f64,
    /// Spread tolerance on objective values across the simplex.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-6,
            f_tol: 1e-10,
            max_iter: 4_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    /// Tolerances met within the iteration budget.
    pub converged: bool,
}

/// Classic Nelder-Mead simplex search. `scale[i]` sets the initial simplex
/// extent along coordinate i.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: &[f64],
    opts: &NmOptions,
) -> NmResult {
    let n = x0.len();
    assert_eq!(scale.len(), n);
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut fx: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        // order best..worst
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fx[a].partial_cmp(&fx[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let x_spread = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        let f_spread = fx[worst] - fx[best];
        if x_spread < opts.x_tol && f_spread.abs() < opts.f_tol * (1.0 + fx[best].abs()) {
            converged = true;
            break;
        }

        // centroid excluding the worst vertex
        let mut centroid = vec![0.0f64; n];
        for (k, v) in simplex.iter().enumerate() {
            if k == worst {
                continue;
            }
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(&c, &w)| c + alpha * (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < fx[best] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + gamma * (c - w))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                fx[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                fx[worst] = f_reflect;
            }
        } else if f_reflect < fx[second_worst] {
            simplex[worst] = reflect;
            fx[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + rho * (w - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < fx[worst] {
                simplex[worst] = contract;
                fx[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                let best_point = simplex[best].clone();
                for (k, v) in simplex.iter_mut().enumerate() {
                    if k == best {
                        continue;
                    }
                    for (x, &b) in v.iter_mut().zip(&best_point) {
                        *x = b + sigma * (*x - b);
                    }
                    fx[k] = f(v);
                }
            }
        }
    }

    let (mut bi, mut bf) = (0usize, fx[0]);
    for (k, &v) in fx.iter().enumerate() {
        if v < bf {
            bi = k;
            bf = v;
        }
    }
    NmResult {
        x: simplex.swap_remove(bi),
        fx: bf,
        iterations,
        converged,
    }
}

/// Central-difference Hessian with per-coordinate relative step
/// `rel_step * max(|x_i|, 1e-4)`.
pub fn numerical_hessian<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    rel_step: f64,
) -> Vec<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|&v| rel_step * v.abs().max(1e-4)).collect();
    let mut hess = vec![vec![0.0f64; n]; n];
    let f0 = f(x);
    let mut probe = x.to_vec();
    for i in 0..n {
        // diagonal: (f(x+h) - 2 f(x) + f(x-h)) / h^2
        probe[i] = x[i] + h[i];
        let fp = f(&probe);
        probe[i] = x[i] - h[i];
        let fm = f(&probe);
        probe[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            probe[i] = x[i] + h[i];
            probe[j] = x[j] + h[j];
            let fpp = f(&probe);
            probe[j] = x[j] - h[j];
            let fpm = f(&probe);
            probe[i] = x[i] - h[i];
            let fmm = f(&probe);
            probe[j] = x[j] + h[j];
            let fmp = f(&probe);
            probe[i] = x[i];
            probe[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
pub fn invert(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for x in &mut a[col] {
            *x /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..2 * n {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}
