//! Entropy and divergence in bits, with `0 log 0 = 0`.

/// Shannon entropy of a probability vector.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * libm::log2(p))
        .sum()
}

/// Total code length `sum_a -n_a log2(n_a / n)` of a count vector, in bits.
///
/// Dividing by the total gives the plug-in entropy.
pub fn entropy_of_counts<I>(counts: I) -> f64
where
    I: IntoIterator<Item = u64>,
{
    let mut total = 0u64;
    let mut acc = 0.0;
    for c in counts {
        if c > 0 {
            total += c;
            acc += c as f64 * libm::log2(c as f64);
        }
    }
    if total == 0 {
        return 0.0;
    }
    let cost = total as f64 * libm::log2(total as f64) - acc;
    if cost < 0.0 {
        0.0
    } else {
        cost
    }
}

/// `D(p || q)` in bits. Infinite when `q` misses mass that `p` has.
pub fn kl_divergence_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pa, &qa) in p.iter().zip(q) {
        if pa > 0.0 {
            if qa <= 0.0 {
                return f64::INFINITY;
            }
            d += pa * libm::log2(pa / qa);
        }
    }
    if d < 0.0 {
        0.0
    } else {
        d
    }
}
