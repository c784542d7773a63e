//! Small numeric helpers: compensated summation, sample summaries, ranks.

/// Neumaier-compensated sum. Order-insensitive to ~1 ulp per term, which is
/// what makes Monte Carlo reductions reproducible across iteration orders.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean, sample standard deviation and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub stderr: f64,
}

/// Two-pass compensated mean/std/stderr. `std_dev` uses the n-1 divisor;
/// both are NaN for n < 2.
pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            std_dev: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return Summary {
            n,
            mean,
            std_dev: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let ss = compensated_sum(xs.iter().map(|&x| (x - mean) * (x - mean)));
    let std_dev = (ss / (n - 1) as f64).sqrt();
    Summary {
        n,
        mean,
        std_dev,
        stderr: std_dev / (n as f64).sqrt(),
    }
}

pub fn sample_mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Sample variance with the n-1 divisor.
pub fn sample_var(xs: &[f64]) -> f64 {
    let mean = sample_mean(xs);
    compensated_sum(xs.iter().map(|&x| (x - mean) * (x - mean))) / (xs.len() - 1) as f64
}

/// Sample lag-1 autocorrelation (centered, biased denominator).
pub fn lag1_autocorr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = sample_mean(xs);
    let num = compensated_sum((1..n).map(|t| (xs[t] - mean) * (xs[t - 1] - mean)));
    let den = compensated_sum(xs.iter().map(|&x| (x - mean) * (x - mean)));
    num / den
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman needs paired samples");
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = sample_mean(xs);
    let my = sample_mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("NaN in rank input"));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // average rank over the tie run, 1-based
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}
