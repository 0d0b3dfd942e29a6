//! Quantiles and MCMC convergence statistics.

use alloc::vec::Vec;
use num_traits::Float;

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
/// Returns NaN for empty input.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type-7 quantile of unsorted data.
pub fn quantile(xs: &[f64], prob: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, prob)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Each chain split into halves; an odd middle draw is dropped.
fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        let half = c.len() / 2;
        out.push(&c[..half]);
        out.push(&c[c.len() - half..]);
    }
    out
}

/// Within-chain variance `W` and pooled variance estimate `var+`.
fn variance_components(parts: &[&[f64]]) -> (f64, f64) {
    let n = parts[0].len() as f64;
    let means: Vec<f64> = parts.iter().map(|p| mean(p)).collect();
    let w = parts.iter().zip(&means).map(|(p, &m)| variance(p, m)).sum::<f64>() / parts.len() as f64;
    let b = n * variance(&means, mean(&means));
    (w, (n - 1.0) / n * w + b / n)
}

/// Split potential scale reduction factor. Needs at least one chain of
/// length four; chains are truncated to the shortest.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let Some(parts) = prepared(chains) else { return f64::NAN };
    let (w, var_plus) = variance_components(&parts);
    if w == 0.0 {
        return if var_plus == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (var_plus / w).sqrt()
}

fn prepared(chains: &[Vec<f64>]) -> Option<Vec<&[f64]>> {
    let len = chains.iter().map(Vec::len).min()?;
    if len < 4 {
        return None;
    }
    let parts = split(chains);
    let half = len / 2;
    Some(parts.into_iter().map(|p| &p[..half]).collect())
}

/// Effective sample size across split chains, from the pooled
/// autocorrelation truncated by Geyer's initial monotone sequence.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let Some(parts) = prepared(chains) else { return f64::NAN };
    let m = parts.len() as f64;
    let n = parts[0].len();
    let total = m * n as f64;
    let (w, var_plus) = variance_components(&parts);
    if !(var_plus > 0.0) {
        return total;
    }
    let means: Vec<f64> = parts.iter().map(|p| mean(p)).collect();
    let autocov = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for (p, &mu) in parts.iter().zip(&means) {
            let mut s = 0.0;
            for t in 0..n - lag {
                s += (p[t] - mu) * (p[t + lag] - mu);
            }
            acc += s / n as f64;
        }
        acc / m
    };
    let rho = |lag: usize| 1.0 - (w - autocov(lag)) / var_plus;
    // Sum of pairs rho(2k) + rho(2k+1), kept positive and non-increasing.
    let mut sum = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let mut pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        pair = pair.min(prev_pair);
        sum += pair;
        prev_pair = pair;
        lag += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / total.log10().max(1.0));
    total / tau
}
