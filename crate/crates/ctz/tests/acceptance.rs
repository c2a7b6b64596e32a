//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 3 5`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ctz::{container, parallel};
use ctz_core::adversarial::{self, AdversarialParams};
use ctz_core::ancestor::common_ancestor_test;
use ctz_core::classifier::{classify, cross_entropy, self_entropy, Estimator, Signature};
use ctz_core::codec::{self, CodecLength, CodecParams, TableLength};
use ctz_core::stats::{EmpiricalModel, Ratio};
use ctz_core::{entropy_of_counts, Alphabet, Sequence};

type Outcome = (bool, String);

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "lossless round trip", round_trip),
        (2, "Kraft sum over all binary blocks", kraft_exhaustive),
        (3, "worst-phase rate above the N-block entropy", lower_bound),
        (4, "per-block length accounting", accounting),
        (5, "adversarial entropy chain", adversarial_chain),
        (6, "classifier efficiency", classifier_efficiency),
        (7, "accepted-vector count", acceptance_count),
        (8, "cross-entropy Gibbs property", gibbs),
        (9, "common ancestor", common_ancestor),
        (10, "empirical measure against brute force", stats_oracle),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match panic::catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {n:>2} {}: {name}: {detail} [{secs:.1} s]", if ok { "PASS" } else { "FAIL" });
        failed += !ok as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn seq(a: usize, v: Vec<u8>) -> Sequence {
    Sequence::new(Alphabet::new(a).unwrap(), v).unwrap()
}

fn markov2(len: usize, stay: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut s: u8 = rng.gen_range(0..2);
    (0..len)
        .map(|_| {
            if !rng.gen_bool(stay) {
                s ^= 1;
            }
            s
        })
        .collect()
}

/// Order-`k` source over `a` symbols with skewed random conditionals.
fn random_source(a: usize, k: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let states = a.pow(k as u32);
    let table: Vec<Vec<f64>> = (0..states)
        .map(|_| {
            let w: Vec<f64> = (0..a).map(|_| rng.gen::<f64>().powi(3)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let mut out: Vec<u8> = (0..k).map(|_| rng.gen_range(0..a) as u8).collect();
    while out.len() < len {
        let st = out[out.len() - k..].iter().fold(0, |acc, &s| acc * a + s as usize);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = a - 1;
        for (i, &p) in table[st].iter().enumerate() {
            acc += p;
            if u < acc {
                next = i;
                break;
            }
        }
        out.push(next as u8);
    }
    out.truncate(len);
    out
}

fn corpus_item(k: usize) -> (usize, usize, usize, Vec<u8>) {
    let a = [2, 4, 256][k % 3];
    let n = [64, 256, 1024][(k / 3) % 3];
    let m = [4, 16][(k / 9) % 2];
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
    let len = m * n + rng.gen_range(0..n / 2);
    let x = match (k / 18) % 4 {
        0 => (0..len).map(|_| rng.gen_range(0..a) as u8).collect(),
        1 => random_source(a.min(16), 1, len, &mut rng),
        2 => {
            let period: Vec<u8> = (0..rng.gen_range(1..20)).map(|_| rng.gen_range(0..a) as u8).collect();
            let mut v: Vec<u8> = period.iter().copied().cycle().take(len).collect();
            for _ in 0..len / 50 {
                let i = rng.gen_range(0..len);
                v[i] = rng.gen_range(0..a) as u8;
            }
            v
        }
        _ => {
            let mut v = Vec::with_capacity(len);
            while v.len() < len {
                let run = rng.gen_range(1..200);
                if rng.gen_bool(0.5) {
                    v.extend((0..run).map(|_| rng.gen_range(0..a) as u8));
                } else {
                    v.extend(random_source(a.min(4), 2, run, &mut rng));
                }
            }
            v.truncate(len);
            v
        }
    };
    (a, n, m, x)
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let bad: Vec<usize> = (0..1000usize)
        .into_par_iter()
        .filter(|&k| {
            let (a, n, _, x) = corpus_item(k);
            let p = CodecParams::new(Alphabet::new(a).unwrap(), n).unwrap();
            let c = container::compress(&x, &p).unwrap();
            container::decompress(&c.bytes).map(|(y, _)| y != x).unwrap_or(true)
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    (
        bad.is_empty() && secs < 60.0,
        format!("1000 sequences, {} mismatches, {secs:.1} s (limit 60 s)", bad.len()),
    )
}

fn kraft_exhaustive() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [8usize, 10, 12] {
        let base = CodecParams::new(Alphabet::BINARY, n).unwrap();
        for t in [None, Some(2), Some(3)] {
            let p = match t {
                Some(t) => base.with_depth(t).unwrap(),
                None => base,
            };
            let lengths: Vec<u64> = (0u32..1 << n)
                .into_par_iter()
                .map(|v| {
                    let block: Vec<u8> = (0..n).map(|i| ((v >> i) & 1) as u8).collect();
                    codec::encode_block(&block, &p).unwrap().total_bits(&p) as u64
                })
                .collect();
            let holds = codec::kraft_holds(&lengths);
            let sum: f64 = lengths.iter().map(|&l| (-(l as f64)).exp2()).sum();
            ok &= holds;
            parts.push(format!("N={n} t={} sum={sum:.3e}", p.depth()));
        }
    }
    (ok, parts.join(", "))
}

/// Huffman code lengths for the given weights.
fn huffman(weights: &[u64]) -> Vec<u64> {
    if weights.len() == 1 {
        return vec![1];
    }
    let mut parent = vec![usize::MAX; weights.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = weights.iter().enumerate().map(|(i, &w)| Reverse((w, i))).collect();
    while heap.len() > 1 {
        let Reverse((w1, i1)) = heap.pop().unwrap();
        let Reverse((w2, i2)) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[i1] = id;
        parent[i2] = id;
        heap.push(Reverse((w1 + w2, id)));
    }
    (0..weights.len())
        .map(|mut i| {
            let mut d = 0;
            while parent[i] != usize::MAX {
                i = parent[i];
                d += 1;
            }
            d
        })
        .collect()
}

/// Huffman code on the sliding N-window law of the first M blocks, with one
/// escape leaf followed by a raw block for unseen vectors.
fn huffman_length(x: &Sequence, n: usize, m: usize) -> TableLength {
    let s = x.symbols();
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    for start in 0..(m - 1) * n {
        *counts.entry(&s[start..start + n]).or_default() += 1;
    }
    let mut keys: Vec<&[u8]> = counts.keys().copied().collect();
    keys.sort();
    let mut weights: Vec<u64> = keys.iter().map(|k| counts[k] << 20).collect();
    weights.push(1);
    let lengths = huffman(&weights);
    let b = x.alphabet().symbol_bits() as u64;
    TableLength {
        alphabet: x.alphabet(),
        block_len: n,
        table: keys.iter().zip(&lengths).map(|(k, &l)| (k.to_vec(), l)).collect(),
        default: lengths[keys.len()] + n as u64 * b,
    }
}

fn lower_bound() -> Outcome {
    let results: Vec<(f64, f64, f64)> = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + k);
            let n = [8, 12, 16, 24, 32, 48, 64][(k % 7) as usize];
            let m = [2, 3, 4, 6, 8][((k / 7) % 5) as usize];
            let a = if k % 2 == 0 { 2 } else { 4 };
            let len = n * m;
            let v: Vec<u8> = match k % 5 {
                0 => (0..len).map(|_| rng.gen_range(0..a) as u8).collect(),
                1 => random_source(a, 2, len, &mut rng),
                2 => vec![(k % a as u64) as u8; len],
                3 => {
                    let p: Vec<u8> = (0..rng.gen_range(2..9)).map(|_| rng.gen_range(0..a) as u8).collect();
                    p.iter().copied().cycle().take(len).collect()
                }
                _ => {
                    // repeated random block
                    let b: Vec<u8> = (0..n).map(|_| rng.gen_range(0..a) as u8).collect();
                    b.repeat(m)
                }
            };
            let x = seq(a, v);
            let codec_len = CodecLength {
                params: CodecParams::new(x.alphabet(), n).unwrap(),
            };
            let c = codec::check_lower_bound(&x, m, &codec_len).unwrap();
            let h = codec::check_lower_bound(&x, m, &huffman_length(&x, n, m)).unwrap();
            let boundary = (n as f64 * x.alphabet().symbol_bits() as f64 + 2.0) / (m * n) as f64;
            (c.margin, h.margin, 1.0 / n as f64 + boundary)
        })
        .collect();
    let codec_neg = results.iter().filter(|r| r.0 < -1e-12).count();
    let huff_neg = results.iter().filter(|r| r.1 < -1e-12).count();
    let huff_over = results.iter().filter(|r| r.1 > r.2 + 1e-9).count();
    let min_c = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let min_h = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    (
        codec_neg == 0 && huff_neg == 0 && huff_over == 0,
        format!(
            "200 instances; codec margin min {min_c:.4} ({codec_neg} negative); Huffman margin min {min_h:.4} ({huff_neg} negative, {huff_over} above 1/N + boundary)"
        ),
    )
}

fn accounting() -> Outcome {
    let rows: Vec<(usize, f64, bool, bool)> = (0..1000usize)
        .into_par_iter()
        .flat_map_iter(|k| {
            let (a, n, m, x) = corpus_item(k);
            let p = CodecParams::new(Alphabet::new(a).unwrap(), n).unwrap();
            let b = p.alphabet().symbol_bits() as usize;
            x[..m * n]
                .chunks_exact(n)
                .map(|block| {
                    let (_, r) = codec::encode_block_with_report(block, &p).unwrap();
                    let bound = n as f64 * r.h_u
                        + codec::tree_bits_bound(r.leaves, p.depth(), p.alphabet()) as f64
                        + (p.depth() * b) as f64
                        + 64.0;
                    let slack = bound - r.total_bits() as f64;
                    (a, slack, slack >= 0.0, slack + kt_regret_bound(block, &p) >= 0.0)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.2).count();
    let with_regret = rows.iter().filter(|r| !r.3).count();
    let min_slack = |a: usize| rows.iter().filter(|r| r.0 == a).map(|r| r.1).fold(f64::INFINITY, f64::min);
    (
        violations == 0,
        format!(
            "{} blocks, {violations} violations; least slack in bits A=2: {:.0}, A=4: {:.0}, A=256: {:.0}; \
             adding the KT term sum over coded contexts of ((A-1)/2) log2 n + log2 A leaves {with_regret} violations",
            rows.len(),
            min_slack(2),
            min_slack(4),
            min_slack(256)
        ),
    )
}

/// Bound on the KT excess over the plug-in cost: per coded context with
/// `n` symbols, `((A - 1) / 2) log2 n + log2 A`.
fn kt_regret_bound(block: &[u8], p: &CodecParams) -> f64 {
    let set = codec::block_tree(block, p).unwrap().context_set();
    let t = p.depth();
    let mut n = vec![0u64; set.len()];
    for i in t..block.len() {
        n[set.resolve(&block[i - t..i])] += 1;
    }
    let a = p.alphabet().size() as f64;
    n.iter()
        .filter(|&&c| c > 0)
        .map(|&c| (a - 1.0) / 2.0 * (c as f64).log2() + a.log2())
        .sum()
}

fn adversarial_chain() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (l, h, codec_block) in [(8usize, 0.5, 1024usize), (12, 0.25, 512), (16, 0.25, 2048)] {
        let mut links = [true; 4];
        let mut worst_codec = f64::NEG_INFINITY;
        let mut allowed = 0.0f64;
        let mut letter = f64::INFINITY;
        for seed in 0..3 {
            let p = AdversarialParams::from_rate(Alphabet::BINARY, l, h, 16, seed).unwrap();
            let x = adversarial::generate(&p).unwrap();
            let r = adversarial::verify_entropy_bounds(&x, &p).unwrap();
            links[0] &= r.h_u_below_block_entropy();
            links[1] &= r.block_entropy_below_log_bound();
            links[2] &= r.log_bound_below_two_h();
            links[3] &= r.letter_entropy >= 0.9 * x.alphabet().log2_size() && r.segments_above_floor();
            letter = letter.min(r.letter_entropy);

            let cp = CodecParams::new(Alphabet::BINARY, codec_block).unwrap();
            for block in x.symbols().chunks_exact(codec_block) {
                let (_, rep) = codec::encode_block_with_report(block, &cp).unwrap();
                let overhead = (codec::tree_bits_bound(rep.leaves, cp.depth(), cp.alphabet()) + cp.depth() + 64) as f64
                    / codec_block as f64;
                let rate = rep.total_bits() as f64 / codec_block as f64;
                worst_codec = worst_codec.max(rate - overhead);
                allowed = 2.0 * h;
                links[3] &= rate <= 2.0 * h + overhead;
            }
        }
        let n = p_block_len(l, h);
        let this = links.iter().all(|&b| b);
        ok &= this;
        parts.push(format!(
            "(l={l}, h={h}, N={n}): H_u<=H_l {} H_l<=log2N/l {} log2N/l={:.4}<=2h {} codec+letters {} (letter entropy {letter:.3}, codec rate minus overhead at most {worst_codec:.3} vs 2h = {allowed})",
            links[0],
            links[1],
            (n as f64).log2() / l as f64,
            links[2],
            links[3]
        ));
    }
    (ok, parts.join("; "))
}

fn p_block_len(l: usize, h: f64) -> usize {
    l << (h * l as f64).round() as usize
}

fn classifier_efficiency() -> Outcome {
    let start = Instant::now();
    let n = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = seq(2, markov2(1 << 20, 0.9, &mut rng));
    let mut sig = Signature::train(&x, n, 0.1).unwrap();
    let deltas = parallel::training_deltas(&x, &sig).unwrap();
    sig.calibrate(&deltas);
    let train_acc = deltas.iter().filter(|&&d| sig.accepts_everything() || d <= sig.epsilon_prime()).count() as f64
        / deltas.len() as f64;
    let tests: Vec<Vec<u8>> = (0..10_000).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
    let views: Vec<&[u8]> = tests.iter().map(|v| v.as_slice()).collect();
    let res = parallel::classify_all(&views, &sig, 0).unwrap();
    let rejected = res.iter().filter(|r| !r.accept).count() as f64 / res.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    (
        train_acc >= 0.9 && rejected >= 0.99 && secs < 300.0,
        format!(
            "training acceptance {train_acc:.4} over {} windows, random rejection {rejected:.4}, eps'={:.4}, H_min={:.4}, {secs:.0} s (limit 300 s)",
            deltas.len(),
            sig.epsilon_prime(),
            sig.h_min()
        ),
    )
}

fn acceptance_count() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [12usize, 16] {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + n as u64);
        let x = seq(2, markov2(1 << 16, 0.9, &mut rng));
        let sig = parallel::build_signature(&x, n, 0.1).unwrap();
        let accepted = (0u32..1 << n)
            .into_par_iter()
            .filter(|&v| {
                let z: Vec<u8> = (0..n).map(|i| ((v >> i) & 1) as u8).collect();
                classify(&z, &sig, 0).unwrap().accept
            })
            .count();
        let exponent = n as f64 * (sig.h_min() + sig.epsilon_prime());
        let slack = (n as f64).log2().powi(3);
        let log_count = (accepted.max(1) as f64).log2();
        let holds = log_count <= exponent + slack;
        ok &= holds;
        parts.push(format!(
            "N={n}: accepted {accepted} of {}, log2 {log_count:.2} vs N(H_min+eps')={exponent:.2} + slack {slack:.1} (within bound without slack: {})",
            1u64 << n,
            log_count <= exponent
        ));
    }
    (ok, parts.join("; "))
}

/// Visit counts of `z` per signature node.
fn visits(z: &[u8], sig: &Signature) -> Vec<Vec<u64>> {
    let t = sig.depth();
    let a = sig.alphabet().size();
    let mut c = vec![vec![0u64; a]; sig.contexts().len()];
    for p in t..z.len() {
        c[sig.contexts().resolve(&z[p - t..p])][z[p] as usize] += 1;
    }
    c
}

fn conditionals_match(z: &[u8], sig: &Signature) -> bool {
    let a = sig.alphabet().size() as f64;
    visits(z, sig).iter().enumerate().all(|(v, n)| {
        let tot: u64 = n.iter().sum();
        if tot == 0 {
            return true;
        }
        let c = sig.counts(v);
        let ct: u64 = c.iter().sum();
        (0..n.len()).all(|s| {
            let q = match sig.estimator() {
                Estimator::Kt => (c[s] as f64 + 0.5) / (ct as f64 + a / 2.0),
                Estimator::Plugin { .. } => c[s] as f64 / ct as f64,
            };
            (q - n[s] as f64 / tot as f64).abs() < 1e-12
        })
    })
}

fn gibbs() -> Outcome {
    let results: Vec<(usize, usize, f64)> = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(8000 + k);
            let a = 2 + (k % 3) as usize;
            let n = [32, 64, 128][(k / 3 % 3) as usize];
            let x = seq(a, random_source(a, 1 + (k % 2) as usize, 8 * n, &mut rng));
            let sig = Signature::train(&x, n, 0.1).unwrap();
            let mut pairs = 0;
            let mut bad = 0;
            let mut min_gap = f64::INFINITY;
            let mut check = |z: &[u8], s: &Signature, expect_equal: Option<bool>| {
                let h = cross_entropy(z, s).unwrap();
                let e = self_entropy(z, s).unwrap();
                let equal = (h - e).abs() <= 1e-10;
                let matched = conditionals_match(z, s);
                pairs += 1;
                min_gap = min_gap.min(h - e);
                if h < e - 1e-10 || equal != matched || expect_equal.is_some_and(|x| x != equal) {
                    bad += 1;
                }
            };
            for i in 0..10 {
                let z = if i % 2 == 0 {
                    random_source(a, 1, n, &mut rng)
                } else {
                    let s = rng.gen_range(0..x.len() - n);
                    x.symbols()[s..s + n].to_vec()
                };
                check(&z, &sig, None);
            }
            for i in 0..10 {
                let z: Vec<u8> = random_source(a, 2, n, &mut rng);
                let mut s = sig.clone().with_estimator(Estimator::Plugin { zero_penalty_bits: 64.0 });
                let vis = visits(&z, &s);
                let scale = rng.gen_range(1..5);
                for (v, c) in vis.iter().enumerate() {
                    if c.iter().sum::<u64>() > 0 {
                        s.set_counts(v, c.iter().map(|&x| x * scale).collect());
                    }
                }
                if i % 2 == 1 {
                    let v = vis.iter().position(|c| c.iter().sum::<u64>() > 0).unwrap();
                    let sym = vis[v].iter().position(|&c| c == 0).unwrap_or(0);
                    let mut c = s.counts(v).to_vec();
                    c[sym] += 1;
                    s.set_counts(v, c);
                    check(&z, &s, Some(false));
                } else {
                    check(&z, &s, Some(true));
                }
            }
            (pairs, bad, min_gap)
        })
        .collect();
    let pairs: usize = results.iter().map(|r| r.0).sum();
    let bad: usize = results.iter().map(|r| r.1).sum();
    let gap = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    (bad == 0, format!("{pairs} pairs, {bad} violations, smallest h_u - self entropy {gap:.2e}"))
}

fn common_ancestor() -> Outcome {
    let trials: Vec<(bool, f64, usize, usize)> = (0..100u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + k);
            let y = seq(2, markov2(4096, 0.9, &mut rng));
            let z = seq(2, markov2(4096, 0.9, &mut rng));
            let r = common_ancestor_test(&y, &z, 0.05).unwrap();
            let bad = r.verdicts.iter().filter(|v| v.divergence > 0.05).count();
            (r.accept, r.worst().divergence, bad, r.verdicts.len())
        })
        .collect();
    let accepted = trials.iter().filter(|t| t.0).count();
    let mut worst: Vec<f64> = trials.iter().map(|t| t.1).collect();
    worst.sort_by(f64::total_cmp);
    let bad = trials.iter().map(|t| t.2).sum::<usize>() as f64 / 100.0;
    let pooled = trials.iter().map(|t| t.3).sum::<usize>() as f64 / 100.0;
    let y = seq(2, (0..4096).map(|i| (i % 2) as u8).collect());
    let z = seq(2, vec![0; 4096]);
    let r = common_ancestor_test(&y, &z, 0.05).unwrap();
    let w = r.worst();
    let back = common_ancestor_test(&z, &y, 0.05).unwrap();
    let witness_ok = !r.accept && w.context == [0] && w.divergence >= 1.0 - 1e-9 && !back.accept && back.worst().context == [0];
    (
        accepted >= 95 && witness_ok,
        format!(
            "same-source accepted {accepted}/100 (need 95), median worst divergence {:.3} bits, \
             on average {bad:.1} of {pooled:.0} pooled contexts above eps; (ab)* vs a*: accept={} witness={:?} divergence={:.6}",
            worst[50], r.accept, w.context, w.divergence
        ),
    )
}

/// Direct double sum: windows at offset `i - 1 + j l` for phases `i = 1..=N`
/// and `j = 0..=M-2`.
fn oracle_distribution(x: &[u8], n: usize, m: usize, l: usize) -> HashMap<Vec<u8>, u64> {
    let mut d = HashMap::new();
    for i in 1..=n {
        for j in 0..=m - 2 {
            let s = i - 1 + j * l;
            *d.entry(x[s..s + l].to_vec()).or_insert(0) += 1;
        }
    }
    d
}

fn stats_oracle() -> Outcome {
    let bad: Vec<String> = (0..500u64)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + k);
            let a = [2, 3, 4, 16][(k % 4) as usize];
            let n = rng.gen_range(2..=200);
            let m = rng.gen_range(2..=(10_000 / n).clamp(2, 40));
            let len = (n * m + rng.gen_range(0..n)).min(10_000).max(n * m);
            let v = match k % 3 {
                0 => (0..len).map(|_| rng.gen_range(0..a) as u8).collect(),
                1 => random_source(a, 2, len, &mut rng),
                _ => {
                    let mut p: Vec<u8> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0..a) as u8).collect();
                    p.shuffle(&mut rng);
                    p.iter().copied().cycle().take(len).collect()
                }
            };
            let x = seq(a, v);
            let s = &x.symbols()[..n * m];
            let t = n.min(8);
            let model = EmpiricalModel::with_depth(&x, n, t).unwrap();
            let den = (n * (m - 1)) as u64;
            for l in 1..=t {
                let want = oracle_distribution(s, n, m, l);
                let got = model.distribution(l).unwrap();
                if got.len() != want.len() {
                    return Some(format!("case {k}: support size at l={l}"));
                }
                for (z, &c) in &want {
                    if got.get(z) != Some(&c) || model.probability(z).unwrap() != Ratio::new(c, den) {
                        return Some(format!("case {k}: P({z:?}) at l={l}"));
                    }
                }
                let h = entropy_of_counts(want.values().copied()) / (den as f64 * l as f64);
                if (model.block_entropy(l).unwrap() - h).abs() > 1e-12 {
                    return Some(format!("case {k}: H at l={l}"));
                }
                // phase measures
                for i in [1, n / 2 + 1, n] {
                    let z = &s[i - 1..i - 1 + l];
                    let hits = (0..m - 1).filter(|j| &s[i - 1 + j * l..i - 1 + j * l + l] == z).count() as u64;
                    if model.phase_probability(z, i).unwrap() != Ratio::new(hits, (m - 1) as u64) {
                        return Some(format!("case {k}: phase {i} at l={l}"));
                    }
                }
                // conditional entropy of every context of length l - 1 < t
                if l < t {
                    let next = oracle_distribution(s, n, m, l + 1);
                    for z in want.keys() {
                        let succ: Vec<u64> = (0..a as u8)
                            .map(|b| {
                                let mut za = z.clone();
                                za.push(b);
                                next.get(&za).copied().unwrap_or(0)
                            })
                            .collect();
                        if succ.iter().sum::<u64>() == 0 {
                            continue;
                        }
                        let tot: u64 = succ.iter().sum();
                        let hc = entropy_of_counts(succ.into_iter()) / tot as f64;
                        if (model.conditional_entropy(z).unwrap() - hc).abs() > 1e-12 {
                            return Some(format!("case {k}: conditional entropy of {z:?}"));
                        }
                    }
                }
            }
            // N-block entropy from every sliding N-window over starts 1..=(M-1)N
            let mut full: HashMap<&[u8], u64> = HashMap::new();
            for st in 0..(m - 1) * n {
                *full.entry(&s[st..st + n]).or_default() += 1;
            }
            let hf = entropy_of_counts(full.values().copied()) / (den as f64 * n as f64);
            if (model.full_block_entropy() - hf).abs() > 1e-12 {
                return Some(format!("case {k}: N-block entropy"));
            }
            None
        })
        .collect();
    (
        bad.is_empty(),
        if bad.is_empty() {
            "500 sequences, all measures and entropies agree".into()
        } else {
            format!("{} mismatches, first: {}", bad.len(), bad[0])
        },
    )
}
