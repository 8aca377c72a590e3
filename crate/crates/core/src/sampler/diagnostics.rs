//! Convergence diagnostics: split R-hat and multi-chain effective sample size.

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Split each chain in half and return `(sequences, common length)`.
fn split(chains: &[Vec<f64>]) -> (Vec<&[f64]>, usize) {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        out.push(&c[..n]);
        out.push(&c[n..2 * n]);
    }
    (out, n)
}

fn pooled_variance(seqs: &[&[f64]], n: usize) -> (f64, f64) {
    let means: Vec<f64> = seqs.iter().map(|s| mean(s)).collect();
    let w = seqs.iter().map(|s| var(s)).sum::<f64>() / seqs.len() as f64;
    let b_over_n = var(&means);
    let nf = n as f64;
    ((nf - 1.0) / nf * w + b_over_n, w)
}

/// Split R-hat of one coordinate; `chains[c]` holds chain `c`'s draws.
///
/// NaN when fewer than 4 draws per half-chain are available; 1 when every
/// draw is identical.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let (seqs, n) = split(chains);
    if n < 4 {
        return f64::NAN;
    }
    let (var_plus, w) = pooled_variance(&seqs, n);
    if w == 0.0 {
        return 1.0;
    }
    (var_plus / w).sqrt()
}

/// Multi-chain effective sample size of one coordinate, using split chains
/// and Geyer's initial monotone sequence of paired autocorrelations.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let (seqs, n) = split(chains);
    if n < 4 {
        return f64::NAN;
    }
    let total = (seqs.len() * n) as f64;
    let (var_plus, w) = pooled_variance(&seqs, n);
    if w == 0.0 || var_plus == 0.0 {
        return total;
    }
    let centered: Vec<Vec<f64>> = seqs
        .iter()
        .map(|s| {
            let m = mean(s);
            s.iter().map(|x| x - m).collect()
        })
        .collect();
    let acov = |lag: usize| -> f64 {
        centered
            .iter()
            .map(|s| s[..n - lag].iter().zip(&s[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
            .sum::<f64>()
            / centered.len() as f64
    };
    let rho = |lag: usize| 1.0 - (w - acov(lag)) / var_plus;
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    total / tau.max(1.0 / total.log10().max(1.0))
}
