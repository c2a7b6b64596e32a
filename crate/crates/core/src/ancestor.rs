//! Two-sequence common-ancestor test.
//!
//! The contexts of `Y` and `Z` with sliding frequency at least
//! `1/floor(N^(1-eps))` (depth `min(ceil((log2 N)^2), N - 1)`) are pooled.
//! A context is feasible when some law `P` lies within `eps` bits of
//! KL-divergence from the empirical successor law of each sequence in which
//! the context occurs. The test accepts when every pooled context is
//! feasible.

use alloc::vec;
use alloc::vec::Vec;

use crate::classifier::vector_depth;
use crate::codec::floor_pow;
use crate::tree::{ContextSet, ContextTree, InverseFloor};
use crate::{kl_divergence_bits, Error, Result, Sequence};

/// `min_P max(D(p || P), D(q || P))` in bits and the minimizing `P`.
///
/// The optimum is a mixture `(1 - l) p + l q`. Along that path the first
/// divergence grows and the second shrinks, so their maximum is unimodal
/// and golden-section search finds it.
pub fn min_max_divergence(p: &[f64], q: &[f64]) -> (f64, Vec<f64>) {
    let mix = |l: f64| -> Vec<f64> { p.iter().zip(q).map(|(&a, &b)| (1.0 - l) * a + l * b).collect() };
    let f = |l: f64| -> f64 {
        let m = mix(l);
        kl_divergence_bits(p, &m).max(kl_divergence_bits(q, &m))
    };
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..90 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (f1, x1) } else { (f2, x2) };
    for l in [0.0, 0.5, 1.0] {
        let v = f(l);
        if v < best.0 {
            best = (v, l);
        }
    }
    (best.0, mix(best.1))
}

/// Verdict on one pooled context.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextVerdict {
    pub context: Vec<u8>,
    /// Smallest achievable worst-side divergence, bits.
    pub divergence: f64,
    /// A law attaining it.
    pub law: Vec<f64>,
    pub in_y: bool,
    pub in_z: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AncestorReport {
    pub accept: bool,
    /// Every pooled context, sorted.
    pub verdicts: Vec<ContextVerdict>,
    /// Index into `verdicts` of the largest divergence (shortest context on
    /// ties); the rejecting witness when `accept` is false.
    pub worst: usize,
}

impl AncestorReport {
    pub fn worst(&self) -> &ContextVerdict {
        &self.verdicts[self.worst]
    }

    pub fn first_infeasible(&self, epsilon: f64) -> Option<&ContextVerdict> {
        self.verdicts.iter().find(|v| v.divergence > epsilon)
    }
}

fn counts_over(set: &ContextSet, x: &[u8], depth: usize, a: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; a]; set.len()];
    for p in depth..x.len() {
        set.walk(&x[p - depth..p], |v| counts[v][x[p] as usize] += 1);
    }
    counts
}

fn law(counts: &[u64]) -> Option<Vec<f64>> {
    let n: u64 = counts.iter().sum();
    (n > 0).then(|| counts.iter().map(|&c| c as f64 / n as f64).collect())
}

pub fn common_ancestor_test(y: &Sequence, z: &Sequence, epsilon: f64) -> Result<AncestorReport> {
    if y.len() != z.len() {
        return Err(Error::BlockLength {
            expected: y.len(),
            actual: z.len(),
        });
    }
    if y.alphabet() != z.alphabet() {
        return Err(Error::param("sequences use different alphabets"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon must lie in (0, 1)"));
    }
    let n = y.len();
    if n < 2 {
        return Err(Error::SequenceTooShort { len: n, needed: 2 });
    }
    let a = y.alphabet().size();
    let depth = vector_depth(n);
    let floor = InverseFloor::integer(floor_pow(n, 1.0 - epsilon))?;

    let ty = ContextTree::build(y.alphabet(), y.symbols(), floor, depth)?;
    let tz = ContextTree::build(z.alphabet(), z.symbols(), floor, depth)?;
    let mut pooled: Vec<Vec<u8>> = (0..ty.nodes().len()).map(|i| ty.context(i)).collect();
    pooled.extend((0..tz.nodes().len()).map(|i| tz.context(i)));
    pooled.sort();
    pooled.dedup();
    let set = ContextSet::from_contexts(pooled.iter().map(|c| c.as_slice()));
    let cy = counts_over(&set, y.symbols(), depth, a);
    let cz = counts_over(&set, z.symbols(), depth, a);

    let mut verdicts = Vec::with_capacity(pooled.len());
    for c in pooled {
        let v = set.find(&c).expect("pooled context");
        let (py, pz) = (law(&cy[v]), law(&cz[v]));
        let (divergence, best) = match (&py, &pz) {
            (Some(p), Some(q)) => min_max_divergence(p, q),
            (Some(p), None) | (None, Some(p)) => (0.0, p.clone()),
            (None, None) => (0.0, vec![1.0 / a as f64; a]),
        };
        verdicts.push(ContextVerdict {
            context: c,
            divergence,
            law: best,
            in_y: py.is_some(),
            in_z: pz.is_some(),
        });
    }
    let mut worst = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let w = &verdicts[worst];
        if v.divergence > w.divergence || (v.divergence == w.divergence && v.context.len() < w.context.len()) {
            worst = i;
        }
    }
    Ok(AncestorReport {
        accept: verdicts.iter().all(|v| v.divergence <= epsilon),
        verdicts,
        worst,
    })
}
