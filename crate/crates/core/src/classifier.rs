//! Training signatures and the cross-entropy classifier.
//!
//! A signature keeps, for a context sub-tree chosen on the training
//! sequence with floor `1/N''` (`N'' = floor(N^(1-2 eps))`), the successor
//! counts of the training positions each context predicts. A test vector
//! `Z` of length `N` is scored by its cross-entropy `h_u` against those
//! conditionals, and
//!
//! `Delta = h_u - min(H_u(t, N', M') of Z, H_min)`, `N' = floor(N^(1-eps))`.
//!
//! `Z` is accepted when `Delta <= eps'`.

use alloc::vec;
use alloc::vec::Vec;

use crate::codec::floor_pow;
use crate::stats::{default_depth, distinct_windows};
use crate::tree::{h_u_of, ContextSet, ContextTree, InverseFloor};
use crate::{Alphabet, Error, Result, Sequence};

/// `H_min(N, X, tolerance)`: `(1/N) log2` of the size of the smallest set
/// of most frequent N-vectors holding at least `1 - tolerance` of the
/// measure. Ties in frequency are broken lexicographically.
pub fn h_min(x: &Sequence, block_len: usize, tolerance: f64) -> Result<f64> {
    let m = x.len();
    if block_len == 0 || m < 2 * block_len {
        return Err(Error::InsufficientTraining {
            len: m,
            needed: 2 * block_len.max(1),
        });
    }
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::param("tolerance must lie in (0, 1)"));
    }
    let blocks = m / block_len;
    // with window length N the measure is uniform over starts 1..=(M-1)N
    let data = &x.symbols()[..(blocks - 1) * block_len + block_len - 1];
    let mut windows = distinct_windows(data, block_len);
    windows.sort_by(|a, b| b.1.cmp(&a.1));
    let total = ((blocks - 1) * block_len) as f64;
    let need = (1.0 - tolerance) * total;
    let mut acc = 0u64;
    let mut size = 0usize;
    for (_, c) in windows {
        acc += c;
        size += 1;
        if acc as f64 >= need - 1e-9 {
            break;
        }
    }
    Ok(libm::log2(size as f64) / block_len as f64)
}

/// `eps^2 / 2 + N^-eps`.
pub fn analytic_threshold(epsilon: f64, block_len: usize) -> f64 {
    0.5 * epsilon * epsilon + libm::pow(block_len as f64, -epsilon)
}

/// How stored conditionals turn into probabilities for scoring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Estimator {
    /// `(c + 1/2) / (n + A/2)`.
    Kt,
    /// `c / n`; a zero probability costs the given number of bits.
    Plugin { zero_penalty_bits: f64 },
}

/// The O(N) summary of a training sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    alphabet: Alphabet,
    block_len: usize,
    depth: usize,
    epsilon: f64,
    contexts: ContextSet,
    counts: Vec<Vec<u64>>,
    h_min: f64,
    epsilon_prime: f64,
    train_h_u: f64,
    estimator: Estimator,
    /// Bits per (node, symbol) under `estimator`, row-major.
    costs: Vec<f64>,
}

/// Stored parts of a signature, for files.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureParts {
    pub alphabet: Alphabet,
    pub block_len: usize,
    pub depth: usize,
    pub epsilon: f64,
    pub h_min: f64,
    pub epsilon_prime: f64,
    pub train_h_u: f64,
    /// Every context (oldest symbol first) with its successor counts.
    pub contexts: Vec<(Vec<u8>, Vec<u64>)>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::param("epsilon must lie in (0, 1/2)"))
    }
}

/// Context depth used for N-vectors: `min(ceil((log2 N)^2), N - 1)`.
pub fn vector_depth(block_len: usize) -> usize {
    default_depth(block_len).min(block_len.saturating_sub(1))
}

impl Signature {
    /// Signature with the analytic threshold; see [`Self::calibrate`].
    pub fn train(x: &Sequence, block_len: usize, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let m = x.len();
        if block_len < 2 || m < 2 * block_len {
            return Err(Error::InsufficientTraining {
                len: m,
                needed: 2 * block_len.max(2),
            });
        }
        let depth = vector_depth(block_len);
        let floor = InverseFloor::integer(floor_pow(block_len, 1.0 - 2.0 * epsilon))?;
        let a = x.alphabet();
        let s = x.symbols();

        // first pass: candidate tree and its best sub-tree
        let pruned = ContextTree::build(a, s, floor, depth)?.select();
        let contexts = pruned.context_set();

        // second pass: successor counts of the positions each context predicts
        let mut counts = vec![vec![0u64; a.size()]; contexts.len()];
        for p in depth..m {
            let v = contexts.resolve(&s[p - depth..p]);
            counts[v][s[p] as usize] += 1;
        }

        Ok(Signature {
            alphabet: a,
            block_len,
            depth,
            epsilon,
            contexts,
            counts,
            h_min: h_min(x, block_len, epsilon / 2.0)?,
            epsilon_prime: analytic_threshold(epsilon, block_len),
            train_h_u: pruned.h_u,
            estimator: Estimator::Kt,
            costs: Vec::new(),
        }
        .with_costs())
    }

    pub fn from_parts(parts: SignatureParts) -> Result<Self> {
        check_epsilon(parts.epsilon)?;
        let a = parts.alphabet;
        if parts.block_len < 2 || parts.depth >= parts.block_len {
            return Err(Error::Format("inconsistent block length and depth"));
        }
        for (c, n) in &parts.contexts {
            if c.len() > parts.depth || n.len() != a.size() {
                return Err(Error::Format("context record does not fit the signature"));
            }
            a.validate(c).map_err(|_| Error::Format("context symbol outside the alphabet"))?;
        }
        let contexts = ContextSet::from_contexts(parts.contexts.iter().map(|(c, _)| c.as_slice()));
        if contexts.len() != parts.contexts.len() {
            return Err(Error::Format("context set is not closed under suffixes"));
        }
        let mut counts = vec![Vec::new(); contexts.len()];
        for (c, n) in parts.contexts {
            let v = contexts.find(&c).expect("inserted above");
            if !counts[v].is_empty() {
                return Err(Error::Format("duplicate context"));
            }
            counts[v] = n;
        }
        Ok(Signature {
            alphabet: a,
            block_len: parts.block_len,
            depth: parts.depth,
            epsilon: parts.epsilon,
            contexts,
            counts,
            h_min: parts.h_min,
            epsilon_prime: parts.epsilon_prime,
            train_h_u: parts.train_h_u,
            estimator: Estimator::Kt,
            costs: Vec::new(),
        }
        .with_costs())
    }

    pub fn to_parts(&self) -> SignatureParts {
        let mut contexts: Vec<(Vec<u8>, Vec<u64>)> = (0..self.contexts.len())
            .map(|v| (self.contexts.context(v), self.counts[v].clone()))
            .collect();
        contexts.sort();
        SignatureParts {
            alphabet: self.alphabet,
            block_len: self.block_len,
            depth: self.depth,
            epsilon: self.epsilon,
            h_min: self.h_min,
            epsilon_prime: self.epsilon_prime,
            train_h_u: self.train_h_u,
            contexts,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn epsilon_prime(&self) -> f64 {
        self.epsilon_prime
    }

    /// `H_u(N, N'', M)` of the training sequence.
    pub fn train_h_u(&self) -> f64 {
        self.train_h_u
    }

    pub fn contexts(&self) -> &ContextSet {
        &self.contexts
    }

    /// Successor counts of context node `v`.
    pub fn counts(&self, v: usize) -> &[u64] {
        &self.counts[v]
    }

    /// Leaves of the stored sub-tree, at most `N''` of them.
    pub fn leaf_count(&self) -> usize {
        (0..self.contexts.len()).filter(|&v| self.contexts.is_leaf(v)).count()
    }

    /// Number of stored count entries.
    pub fn storage_entries(&self) -> usize {
        self.counts.len() * self.alphabet.size()
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self.with_costs()
    }

    fn with_costs(mut self) -> Self {
        let a = self.alphabet.size();
        self.costs = vec![0.0; self.counts.len() * a];
        for v in 0..self.counts.len() {
            self.refresh_costs(v);
        }
        self
    }

    fn refresh_costs(&mut self, v: usize) {
        let a = self.alphabet.size();
        for s in 0..a {
            self.costs[v * a + s] = self.symbol_cost(v, s as u8);
        }
    }

    /// Replaces the counts of node `v`.
    pub fn set_counts(&mut self, v: usize, counts: Vec<u64>) {
        assert_eq!(counts.len(), self.alphabet.size());
        self.counts[v] = counts;
        self.refresh_costs(v);
    }

    pub fn set_epsilon_prime(&mut self, epsilon_prime: f64) {
        self.epsilon_prime = epsilon_prime;
    }

    /// When every vector must be accepted: `min(H_u, H_min) + eps' > log2 A`.
    pub fn accepts_everything(&self) -> bool {
        self.train_h_u.min(self.h_min) + self.epsilon_prime > self.alphabet.log2_size()
    }

    /// Bits to code `symbol` after context node `v`.
    fn cost(&self, v: usize, symbol: u8) -> f64 {
        self.costs[v * self.alphabet.size() + symbol as usize]
    }

    fn symbol_cost(&self, v: usize, symbol: u8) -> f64 {
        let c = &self.counts[v];
        let n: u64 = c.iter().sum();
        let k = c[symbol as usize];
        match self.estimator {
            Estimator::Kt => -libm::log2((k as f64 + 0.5) / (n as f64 + self.alphabet.size() as f64 / 2.0)),
            Estimator::Plugin { zero_penalty_bits } => {
                if k == 0 {
                    zero_penalty_bits
                } else {
                    -libm::log2(k as f64 / n as f64)
                }
            }
        }
    }

    /// Calibrates `eps'` to the `(1 - eps)` quantile of `deltas`, floored at
    /// the analytic threshold.
    pub fn calibrate(&mut self, deltas: &[f64]) {
        self.epsilon_prime = calibrate_epsilon_prime(deltas, self.epsilon, self.block_len);
    }

    fn check_vector(&self, z: &[u8]) -> Result<()> {
        if z.len() != self.block_len {
            return Err(Error::BlockLength {
                expected: self.block_len,
                actual: z.len(),
            });
        }
        self.alphabet.validate(z)
    }
}

/// Signature with `eps'` calibrated over all training windows.
pub fn build_signature(x: &Sequence, block_len: usize, epsilon: f64) -> Result<Signature> {
    let mut sig = Signature::train(x, block_len, epsilon)?;
    let deltas = training_deltas(x, &sig)?;
    sig.calibrate(&deltas);
    Ok(sig)
}

/// Average bits per test position of `z` under the signature's
/// conditionals, each position using the deepest stored context.
pub fn cross_entropy(z: &[u8], sig: &Signature) -> Result<f64> {
    sig.check_vector(z)?;
    let t = sig.depth;
    let mut bits = 0.0;
    for p in t..z.len() {
        let v = sig.contexts.resolve(&z[p - t..p]);
        bits += sig.cost(v, z[p]);
    }
    Ok(bits / (z.len() - t) as f64)
}

/// Empirical conditional entropy of `z` over the same context resolution.
pub fn self_entropy(z: &[u8], sig: &Signature) -> Result<f64> {
    sig.check_vector(z)?;
    let t = sig.depth;
    let a = sig.alphabet.size();
    let mut cells = vec![0u64; sig.contexts.len() * a];
    for p in t..z.len() {
        let v = sig.contexts.resolve(&z[p - t..p]);
        cells[v * a + z[p] as usize] += 1;
    }
    let bits: f64 = cells.chunks(a).map(|c| crate::entropy_of_counts(c.iter().copied())).sum();
    Ok(bits / (z.len() - t) as f64)
}

/// `H_u(t, N', M')` of a test vector, `N' = floor(N^(1 - eps))`.
pub fn vector_h_u(z: &[u8], sig: &Signature) -> Result<f64> {
    let floor = InverseFloor::integer(floor_pow(sig.block_len, 1.0 - sig.epsilon))?;
    h_u_of(sig.alphabet, z, floor, sig.depth)
}

/// Outcome for one test vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    pub delta: f64,
    pub accept: bool,
    pub h_u: f64,
    /// `H_u(t, N', M')` of the (minimizing) test vector.
    pub self_h_u: f64,
    /// Accepted by the `log2 A` rule regardless of `delta`.
    pub escaped: bool,
}

fn delta_at(z: &[u8], sig: &Signature) -> Result<(f64, f64, f64)> {
    let h = cross_entropy(z, sig)?;
    let own = vector_h_u(z, sig)?;
    Ok((h - own.min(sig.h_min), h, own))
}

/// Largest block length for which a distortion radius may be searched.
pub const MAX_RADIUS_BLOCK_LEN: usize = 20;

/// Scores `z`. With `radius > 0` the statistic is minimized over the
/// Hamming ball of that radius around `z`.
pub fn classify(z: &[u8], sig: &Signature, radius: usize) -> Result<ClassificationResult> {
    sig.check_vector(z)?;
    let (delta, h_u, self_h_u) = if radius == 0 {
        delta_at(z, sig)?
    } else {
        if z.len() > MAX_RADIUS_BLOCK_LEN {
            return Err(Error::RadiusTooLarge {
                radius,
                block_len: z.len(),
            });
        }
        let mut best = delta_at(z, sig)?;
        let mut w = z.to_vec();
        hamming_ball(&mut w, 0, radius.min(z.len()), sig.alphabet.size(), &mut |v| {
            let d = delta_at(v, sig)?;
            if d.0 < best.0 {
                best = d;
            }
            Ok(())
        })?;
        best
    };
    let escaped = sig.accepts_everything();
    Ok(ClassificationResult {
        delta,
        accept: escaped || delta <= sig.epsilon_prime,
        h_u,
        self_h_u,
        escaped,
    })
}

/// Visits every vector differing from `w` in between 1 and `left`
/// positions at or after `from`.
fn hamming_ball(
    w: &mut [u8],
    from: usize,
    left: usize,
    a: usize,
    f: &mut dyn FnMut(&[u8]) -> Result<()>,
) -> Result<()> {
    if left == 0 {
        return Ok(());
    }
    for i in from..w.len() {
        let orig = w[i];
        for s in 0..a as u8 {
            if s == orig {
                continue;
            }
            w[i] = s;
            f(w)?;
            hamming_ball(w, i + 1, left - 1, a, f)?;
        }
        w[i] = orig;
    }
    Ok(())
}

/// `Delta` of every training window `X_{j+1}^{j+N}`, `j = 0..=m-N`.
pub fn training_deltas(x: &Sequence, sig: &Signature) -> Result<Vec<f64>> {
    let n = sig.block_len;
    let s = x.symbols();
    if s.len() < n {
        return Err(Error::InsufficientTraining { len: s.len(), needed: n });
    }
    (0..=s.len() - n).map(|j| delta_at(&s[j..j + n], sig).map(|d| d.0)).collect()
}

/// `max(q, eps^2/2 + N^-eps)` where `q` is the `(1 - eps)` quantile of
/// `deltas`: the value at sorted index `ceil((1 - eps) W) - 1`, so at least
/// that many windows satisfy `Delta <= eps'`.
pub fn calibrate_epsilon_prime(deltas: &[f64], epsilon: f64, block_len: usize) -> f64 {
    let floor = analytic_threshold(epsilon, block_len);
    if deltas.is_empty() {
        return floor;
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let w = sorted.len();
    let k = (libm::ceil((1.0 - epsilon) * w as f64 - 1e-9) as usize).clamp(1, w);
    sorted[k - 1].max(floor)
}
