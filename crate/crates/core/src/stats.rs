//! Small statistical helpers shared by experiments and test oracles:
//! Kolmogorov-Smirnov distances, rank correlation, and least-squares line
//! fitting. Nothing here is domain-specific.

use crate::error::{invalid, Result};

/// One-sample Kolmogorov-Smirnov statistic of `samples` against the
/// continuous CDF `cdf`: sup |F_n(x) - F(x)|.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("ks_statistic needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic: sup |F_a(x) - F_b(x)| over the
/// pooled sample points.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("ks_two_sample needs non-empty samples"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Least-squares fit y = slope * x + intercept. Errors when fewer than two
/// points or when x carries no variance.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(invalid("linear_fit needs equally long x and y"));
    }
    if x.len() < 2 {
        return Err(invalid("linear_fit needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx = x.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>();
    if sxx == 0.0 {
        return Err(invalid("linear_fit x values are all identical"));
    }
    let sxy = x
        .iter()
        .zip(y)
        .map(|(u, v)| (u - mx) * (v - my))
        .sum::<f64>();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Ranks with average tie handling, the usual prelude to Spearman.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("pearson needs two equally long series of >= 2 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (u, v) in x.iter().zip(y) {
        sxx += (u - mx) * (u - mx);
        syy += (v - my) * (v - my);
        sxy += (u - mx) * (v - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(invalid("pearson input has zero variance"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(&ranks(x), &ranks(y))
}
