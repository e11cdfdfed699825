//! Test statistics used by the validation experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample KS test with the asymptotic Kolmogorov distribution and the
/// small-sample correction `(√n_e + 0.12 + 0.11/√n_e) D`. Ties are handled
/// by stepping over equal values together; for discrete data the p-value
/// is conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return KsResult { statistic: 0.0, p_value: 1.0, n1, n2 };
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n1 && j < n2 {
        let v = x[i].min(y[j]);
        while i < n1 && x[i] == v {
            i += 1;
        }
        while j < n2 && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    KsResult { statistic: d, p_value: kolmogorov_q(lambda), n1, n2 }
}

/// `Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev = 0.0f64;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() <= 1e-12 * prev.abs() || term.abs() < 1e-300 {
            break;
        }
        prev = term;
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts against expected
/// probabilities. Adjacent bins are pooled until each expects at least 5.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let t = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &p) in observed.iter().zip(probs) {
        o += ob as f64;
        e += p * t;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    let stat: f64 = bins.iter().map(|(o, e)| if *e > 0.0 { (o - e) * (o - e) / e } else { 0.0 }).sum();
    let df = bins.len().saturating_sub(1);
    ChiSquareResult { statistic: stat, df, p_value: chi_square_sf(stat, df) }
}

/// Survival function of the chi-square law; `df = 0` gives 1.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Effective sample size by Geyer's initial positive sequence.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return n as f64;
    }
    let rho = |k: usize| -> f64 { (0..n - k).map(|i| (x[i] - m) * (x[i + k] - m)).sum::<f64>() / n as f64 / c0 };
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    (n as f64 / tau.max(1.0)).min(n as f64)
}

/// Geweke z-score comparing the first 10% and last 50% of a trace.
pub fn geweke_z(x: &[f64]) -> f64 {
    let n = x.len();
    let a = &x[..n / 10];
    let b = &x[n / 2..];
    if a.len() < 2 || b.len() < 2 {
        return 0.0;
    }
    let va = variance(a) / effective_sample_size(a);
    let vb = variance(b) / effective_sample_size(b);
    if va + vb == 0.0 {
        return 0.0;
    }
    (mean(a) - mean(b)) / (va + vb).sqrt()
}
