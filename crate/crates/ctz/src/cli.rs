//! Command-line front end.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 infeasible or invalid
//! parameters (including malformed command lines), 4 corrupt input stream
//! or signature.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ctz_core::adversarial::{self, AdversarialParams};
use ctz_core::ancestor::common_ancestor_test;
use ctz_core::codec::{self, CodecLength, CodecParams};
use ctz_core::stats::{default_depth, EmpiricalModel};
use ctz_core::tree::{ContextTree, InverseFloor};
use ctz_core::{Alphabet, Sequence};

use crate::report::Report;
use crate::{container, input, parallel, sigfile, CtzError, Result};

#[derive(Parser, Debug)]
#[command(name = "ctz", version, about = "Context-tree block compression and classification")]
pub struct Cli {
    #[command(flatten)]
    pub config: Config,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Alphabet size A; symbols are bytes below A.
    #[arg(long, global = true, default_value_t = 256)]
    pub alphabet: usize,
    /// Block length N.
    #[arg(long, global = true, default_value_t = 1024)]
    pub block: usize,
    /// Codec exponent; the candidate floor is N^(delta - 1).
    #[arg(long, global = true, default_value_t = codec::DEFAULT_DELTA)]
    pub delta: f64,
    /// Classifier tolerance.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Context depth override.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print the machine-readable report instead of the table.
    #[arg(long, global = true)]
    pub report: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compress a symbol file block by block.
    Compress { input: PathBuf, output: PathBuf },
    /// Restore a compressed stream.
    Decompress { input: PathBuf, output: PathBuf },
    /// Empirical entropies of a symbol file.
    Stats {
        input: PathBuf,
        /// With --rate: check the adversarial entropy chain for this
        /// segment length, regenerating segments from --seed.
        #[arg(long, requires = "rate")]
        segment: Option<usize>,
        #[arg(long, requires = "segment")]
        rate: Option<f64>,
    },
    /// Build a classifier signature from a training file.
    Train { training: PathBuf, output: PathBuf },
    /// Score the N-vectors of test files against a signature.
    Classify {
        signature: PathBuf,
        #[arg(required = true)]
        tests: Vec<PathBuf>,
        /// Hamming radius to minimize over (N <= 20 only).
        #[arg(long, default_value_t = 0)]
        radius: usize,
    },
    /// Test whether two equal-length files admit a common source.
    Ancestor { y: PathBuf, z: PathBuf },
    /// Write a repeated block of distinct random segments.
    Genadv {
        output: PathBuf,
        #[arg(long)]
        segment: usize,
        /// Segments per block is 2^(rate * segment).
        #[arg(long)]
        rate: f64,
        /// Block repetitions M.
        #[arg(long, default_value_t = 4)]
        blocks: usize,
    },
}

impl Config {
    fn alphabet(&self) -> Result<Alphabet> {
        Ok(Alphabet::new(self.alphabet)?)
    }

    fn codec_params(&self) -> Result<CodecParams> {
        let p = CodecParams::new(self.alphabet()?, self.block)?.with_delta(self.delta)?;
        Ok(match self.depth {
            Some(t) => p.with_depth(t)?,
            None => p,
        })
    }

    fn epsilon(&self) -> Result<f64> {
        if self.epsilon > 0.0 && self.epsilon < 1.0 {
            Ok(self.epsilon)
        } else {
            Err(CtzError::Usage("--epsilon must lie in (0, 1)".into()))
        }
    }
}

/// Parses `args` (program name first), runs the command and prints its
/// report. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    let machine = cli.config.report;
    match run(&cli) {
        Ok(r) => {
            print!("{}", r.render(machine));
            0
        }
        Err(e) => {
            eprintln!("ctz: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Compress { input, output } => compress(cfg, input, output),
        Command::Decompress { input, output } => decompress(input, output),
        Command::Stats { input, segment, rate } => stats(cfg, input, segment.zip(*rate)),
        Command::Train { training, output } => train(cfg, training, output),
        Command::Classify {
            signature,
            tests,
            radius,
        } => classify(signature, tests, *radius),
        Command::Ancestor { y, z } => ancestor(cfg, y, z),
        Command::Genadv {
            output,
            segment,
            rate,
            blocks,
        } => genadv(cfg, output, *segment, *rate, *blocks),
    }
}

fn compress(cfg: &Config, input: &PathBuf, output: &PathBuf) -> Result<Report> {
    let params = cfg.codec_params()?;
    let data = input::read_bytes(input)?;
    let c = container::compress(&data, &params)?;
    input::write_bytes(output, &c.bytes)?;

    let mut r = Report::new("compress");
    r.put("alphabet", params.alphabet().size());
    r.put("block_len", params.block_len());
    r.put("depth", params.depth());
    r.put("floor_inverse", params.floor().value());
    r.put("blocks", c.header.blocks);
    r.put("tail", c.tail_len);
    let mut coded = 0usize;
    let mut h_sum = 0.0;
    for (i, b) in c.reports.iter().enumerate() {
        r.put(format!("block.{i}.tree_bits"), b.tree_bits);
        r.put(format!("block.{i}.prefix_bits"), b.prefix_bits);
        r.put(format!("block.{i}.payload_bits"), b.payload_bits);
        r.put(format!("block.{i}.leaves"), b.leaves);
        r.put_f(format!("block.{i}.bits_per_letter"), b.total_bits() as f64 / params.block_len() as f64);
        r.put_f(format!("block.{i}.h_u"), b.h_u);
        coded += b.total_bits();
        h_sum += b.h_u;
    }
    let letters = (c.header.blocks * params.block_len()) as f64;
    r.put_f("bits_per_letter", coded as f64 / letters);
    r.put_f("h_u_mean", h_sum / c.reports.len() as f64);
    r.put("input_bytes", data.len());
    r.put("output_bytes", c.bytes.len());
    Ok(r)
}

fn decompress(input: &PathBuf, output: &PathBuf) -> Result<Report> {
    let bytes = input::read_bytes(input)?;
    let (data, h) = container::decompress(&bytes)?;
    input::write_bytes(output, &data)?;
    let mut r = Report::new("decompress");
    r.put("alphabet", h.alphabet.size());
    r.put("block_len", h.block_len);
    r.put("depth", h.depth);
    r.put("blocks", h.blocks);
    r.put("output_bytes", data.len());
    Ok(r)
}

fn stats(cfg: &Config, input: &PathBuf, chain: Option<(usize, f64)>) -> Result<Report> {
    let alphabet = cfg.alphabet()?;
    let x = input::read_sequence(input, alphabet)?;
    let mut r = Report::new("stats");

    if let Some((segment, rate)) = chain {
        let len_blocks = |n: usize| x.len() / n.max(1);
        let probe = AdversarialParams::from_rate(alphabet, segment, rate, 2, cfg.seed)?;
        let n = probe.block_len();
        let p = AdversarialParams {
            blocks: len_blocks(n),
            ..probe
        };
        p.validate()?;
        let e = adversarial::verify_entropy_bounds(&x, &p)?;
        r.put("block_len", n);
        r.put("blocks", p.blocks);
        r.put_f("chain.h_u", e.h_u);
        r.put_f("chain.block_entropy", e.block_entropy);
        r.put_f("chain.log_bound", e.log_bound);
        r.put_f("chain.two_h", e.two_h);
        r.put_f("chain.letter_entropy", e.letter_entropy);
        r.put("chain.min_segment_probability", format!("{}/{}", e.min_segment_probability.num, e.min_segment_probability.den));
        r.put("chain.segment_floor", format!("{}/{}", e.segment_floor.num, e.segment_floor.den));
        r.put("chain.h_u_below_block_entropy", e.h_u_below_block_entropy());
        r.put("chain.block_entropy_below_log_bound", e.block_entropy_below_log_bound());
        r.put("chain.log_bound_below_two_h", e.log_bound_below_two_h());
        r.put("chain.segments_above_floor", e.segments_above_floor());
        r.put("chain.holds", e.chain_holds());
        return Ok(r);
    }

    let n = cfg.block;
    let m = x.len() / n.max(1);
    if n < 2 || m < 2 {
        return Err(ctz_core::Error::SequenceTooShort {
            len: x.len(),
            needed: 2 * n.max(2),
        }
        .into());
    }
    let max_len = 8.min(n);
    let model = EmpiricalModel::with_depth(&x, n, max_len)?;
    r.put("block_len", n);
    r.put("blocks", m);
    for l in 1..=max_len {
        r.put_f(format!("block_entropy.{l}"), model.block_entropy(l)?);
    }
    r.put_f("block_entropy.full", model.full_block_entropy());

    let t = cfg.depth.unwrap_or(default_depth(n)).min(m * n - 1);
    let floor = InverseFloor::ratio((n * m) as u64, (m - 1) as u64)?;
    let tree = ContextTree::build(alphabet, &x.symbols()[..m * n], floor, t)?;
    r.put("h_u.depth", t);
    r.put_f("h_u", tree.h_u());

    let params = cfg.codec_params()?;
    let lb = codec::check_lower_bound(&x, m, &CodecLength { params })?;
    r.put_f("lower_bound.rho", lb.rho);
    r.put("lower_bound.worst_phase", lb.worst_phase);
    r.put_f("lower_bound.block_entropy", lb.block_entropy);
    r.put_f("lower_bound.margin", lb.margin);
    Ok(r)
}

fn train(cfg: &Config, training: &PathBuf, output: &PathBuf) -> Result<Report> {
    let eps = cfg.epsilon()?;
    let x = input::read_sequence(training, cfg.alphabet()?)?;
    let sig = parallel::build_signature(&x, cfg.block, eps)?;
    let bytes = sigfile::write_signature(&sig);
    input::write_bytes(output, &bytes)?;
    let mut r = Report::new("train");
    r.put("alphabet", sig.alphabet().size());
    r.put("block_len", sig.block_len());
    r.put("depth", sig.depth());
    r.put_f("epsilon", sig.epsilon());
    r.put_f("h_min", sig.h_min());
    r.put_f("epsilon_prime", sig.epsilon_prime());
    r.put_f("train_h_u", sig.train_h_u());
    r.put("contexts", sig.contexts().len());
    r.put("leaves", sig.leaf_count());
    r.put("accepts_everything", sig.accepts_everything());
    r.put("signature_bytes", bytes.len());
    Ok(r)
}

fn classify(signature: &PathBuf, tests: &[PathBuf], radius: usize) -> Result<Report> {
    let sig = sigfile::read_signature(&input::read_bytes(signature)?)?;
    let n = sig.block_len();
    let mut r = Report::new("classify");
    r.put("block_len", n);
    r.put_f("epsilon_prime", sig.epsilon_prime());
    let mut accepted = 0usize;
    let mut total = 0usize;
    for (f, path) in tests.iter().enumerate() {
        let x = input::read_sequence(path, sig.alphabet())?;
        let vectors: Vec<&[u8]> = x.symbols().chunks_exact(n).collect();
        if vectors.is_empty() {
            return Err(ctz_core::Error::SequenceTooShort { len: x.len(), needed: n }.into());
        }
        let results = parallel::classify_all(&vectors, &sig, radius)?;
        r.put(format!("file.{f}.path"), path.display());
        r.put(format!("file.{f}.vectors"), vectors.len());
        r.put(format!("file.{f}.ignored"), x.len() % n);
        for (i, c) in results.iter().enumerate() {
            r.put_f(format!("file.{f}.vector.{i}.delta"), c.delta);
            r.put(format!("file.{f}.vector.{i}.accept"), c.accept);
            accepted += c.accept as usize;
        }
        total += results.len();
    }
    r.put("accepted", accepted);
    r.put("vectors", total);
    r.put_f("acceptance_rate", accepted as f64 / total as f64);
    Ok(r)
}

fn ancestor(cfg: &Config, y: &PathBuf, z: &PathBuf) -> Result<Report> {
    let eps = cfg.epsilon()?;
    let a = cfg.alphabet()?;
    let y: Sequence = input::read_sequence(y, a)?;
    let z: Sequence = input::read_sequence(z, a)?;
    let rep = common_ancestor_test(&y, &z, eps)?;
    let mut r = Report::new("ancestor");
    r.put_f("epsilon", eps);
    r.put("accept", rep.accept);
    r.put("contexts", rep.verdicts.len());
    let w = rep.worst();
    r.put("worst.context", symbols_text(&w.context));
    r.put_f("worst.divergence", w.divergence);
    let infeasible = rep.verdicts.iter().filter(|v| v.divergence > eps).count();
    r.put("infeasible", infeasible);
    if !rep.accept {
        r.put("witness.context", symbols_text(&w.context));
        r.put_f("witness.divergence", w.divergence);
    }
    Ok(r)
}

fn genadv(cfg: &Config, output: &PathBuf, segment: usize, rate: f64, blocks: usize) -> Result<Report> {
    let p = AdversarialParams::from_rate(cfg.alphabet()?, segment, rate, blocks, cfg.seed)?;
    let x = adversarial::generate(&p)?;
    input::write_bytes(output, x.symbols())?;
    let mut r = Report::new("genadv");
    r.put("segment_len", p.segment_len);
    r.put("rate_bits", p.rate_bits);
    r.put("segments", p.segments());
    r.put("block_len", p.block_len());
    r.put("blocks", p.blocks);
    r.put("seed", p.seed);
    r.put("length", x.len());
    Ok(r)
}

/// Context as comma-separated symbol values, oldest first; `-` when empty.
fn symbols_text(c: &[u8]) -> String {
    if c.is_empty() {
        return "-".into();
    }
    c.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}
