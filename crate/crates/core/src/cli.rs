//! Command-line front end.
//!
//! Every file the tool writes starts with `# key: value` metadata lines that
//! record the tool version, the parsed parameters and the seed. [`run`] does
//! all the work and reports assertion failures in [`Outcome`] so that the
//! binary can map them to the exit status.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    bhattacharyya_bounds, bsc_observe, moments, Bsc, CompoundBsc, MomentPair, SoftObservation,
    DEFAULT_COMPONENT_LIMIT,
};
use crate::codebook::{encode_monomial_sum, encode_plotkin, rm_info_set, CodeSpec, Codeword, Message, Path};
use crate::decoder::{block_error_rate, genie_error_rates, sc_decode, SIGMA_SLACK};
use crate::format::{fmt_num, Metadata, Table};
use crate::ordering::{comparison_curve, construct_code, order_scan};
use crate::polarization::{
    ab_histogram, expected_v, interior_grid, ratio_curve, ratio_lambda, ratio_scan_lambda, SQRT3_OVER_2,
};

const BOUND_SLACK: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "polar-moments", version, about = "Reed-Muller and polar code construction, decoding and moment analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Table layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pretty,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Choose an information set by B ordering, or take RM(r, m).
    Construct(ConstructArgs),
    /// Encode a message file (or a random message) into a codeword.
    Encode(EncodeArgs),
    /// Successive-cancellation decode of soft values or BSC hard symbols.
    Decode(DecodeArgs),
    /// Monte Carlo error rates on BSC(ε) with the all-zero codeword.
    Simulate(SimulateArgs),
    /// Moments along one path, or a comparison of two paths over ε.
    Trace(TraceArgs),
    /// Exact statistics of V = √(A·B) over all paths of a given length.
    Polarize(PolarizeArgs),
    /// Look for order changes between paths of equal weight.
    OrderScan(OrderScanArgs),
}

/// A BSC given by offset or by crossover probability.
#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// Offset ε = 1 - 2p.
    #[arg(long, conflicts_with = "crossover")]
    pub epsilon: Option<f64>,

    /// Crossover probability p.
    #[arg(long)]
    pub crossover: Option<f64>,
}

impl ChannelArgs {
    fn bsc(&self) -> Result<Option<Bsc>> {
        Ok(match (self.epsilon, self.crossover) {
            (Some(e), None) => Some(Bsc::new(e)?),
            (None, Some(p)) => Some(Bsc::from_crossover(p)?),
            (None, None) => None,
            (Some(_), Some(_)) => bail!("--epsilon and --crossover are mutually exclusive"),
        })
    }

    fn require(&self) -> Result<Bsc> {
        self.bsc()?.context("one of --epsilon or --crossover is required")
    }

    fn start(&self, b0: Option<f64>) -> Result<MomentPair> {
        match (self.bsc()?, b0) {
            (Some(_), Some(_)) => bail!("--b0 cannot be combined with --epsilon or --crossover"),
            (Some(bsc), None) => Ok(bsc.moment_pair()),
            (None, Some(b)) => Ok(MomentPair::from_b(b)?),
            (None, None) => bail!("one of --epsilon, --crossover or --b0 is required"),
        }
    }
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long)]
    pub m: u32,

    /// Number of information paths.
    #[arg(long, required_unless_present = "rm_r", conflicts_with = "rm_r")]
    pub k: Option<usize>,

    /// Take the Reed-Muller set of all paths with weight at least m - r.
    #[arg(long)]
    pub rm_r: Option<u32>,

    #[command(flatten)]
    pub channel: ChannelArgs,

    /// Write the full `path,B,selected` table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Encoder {
    Plotkin,
    Monomial,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Code specification (TOML).
    #[arg(long)]
    pub spec: PathBuf,

    /// Message file of `path bit` lines; a random message is drawn when absent.
    #[arg(long)]
    pub message: Option<PathBuf>,

    /// Save the message that was encoded.
    #[arg(long)]
    pub message_out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Encoder::Plotkin)]
    pub encoder: Encoder,

    /// Pass the codeword through this BSC and write the received word.
    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub spec: PathBuf,

    /// One log-likelihood ratio per line.
    #[arg(long, conflicts_with = "received", required_unless_present = "received")]
    pub soft: Option<PathBuf>,

    /// Hard received word as a line of 0/1 characters; needs the BSC.
    #[arg(long)]
    pub received: Option<PathBuf>,

    #[command(flatten)]
    pub channel: ChannelArgs,

    /// Also write the re-encoded codeword.
    #[arg(long)]
    pub codeword_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,

    #[command(flatten)]
    pub channel: ChannelArgs,

    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    /// Free-running block error rate instead of per-path genie rates.
    #[arg(long)]
    pub block: bool,

    /// Fail unless every empirical rate is within its bound plus 5σ.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    /// Path `a_1...a_m`; `a_1` is applied first.
    #[arg(long)]
    pub path: String,

    #[command(flatten)]
    pub channel: ChannelArgs,

    /// Starting B instead of a BSC.
    #[arg(long)]
    pub b0: Option<f64>,

    /// Compound BSC file of `beta epsilon` rows; traces every moment.
    #[arg(long = "channel", conflicts_with_all = ["b0", "versus"])]
    pub compound: Option<PathBuf>,

    /// Compare B of `--path` and this path over an ε grid.
    #[arg(long)]
    pub versus: Option<String>,

    /// Interior grid points for `--versus`.
    #[arg(long, default_value_t = 99)]
    pub grid: usize,

    /// Fail unless the Bhattacharyya sandwiches hold at every step.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Args, Debug)]
pub struct PolarizeArgs {
    /// Path length ℓ.
    #[arg(long, required_unless_present = "ratio_curve")]
    pub levels: Option<u32>,

    #[command(flatten)]
    pub channel: ChannelArgs,

    #[arg(long)]
    pub b0: Option<f64>,

    /// One row for every length 1..=ℓ.
    #[arg(long)]
    pub all_levels: bool,

    /// Write the log2(A·B) histogram of the last length here.
    #[arg(long)]
    pub histogram: Option<PathBuf>,

    /// Quantiles of log2(A·B) and the fraction below each `--threshold`.
    #[arg(long, conflicts_with = "all_levels")]
    pub summary: bool,

    #[arg(long = "threshold", allow_negative_numbers = true)]
    pub thresholds: Vec<f64>,

    /// Emit the one-step ratio curve instead of path statistics.
    #[arg(long)]
    pub ratio_curve: bool,

    /// Exponent of the generalized potential (A·B)^λ for `--ratio-curve`.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Interior grid points for `--ratio-curve`.
    #[arg(long, default_value_t = 999)]
    pub grid: usize,

    /// Fail unless the mean and tail bounds hold.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Args, Debug)]
pub struct OrderScanArgs {
    #[arg(long)]
    pub m: u32,

    #[arg(long)]
    pub weight: u32,

    /// Interior ε grid points.
    #[arg(long, default_value_t = 99)]
    pub grid: usize,
}

/// What a command left for the caller to report.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Violated assertions; a non-empty list means failure.
    pub violations: Vec<String>,
    /// Short human-readable notes for standard error.
    pub notes: Vec<String>,
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    let mut ctx = Ctx {
        cli,
        stdout,
        outcome: Outcome::default(),
    };
    match &cli.command {
        Command::Construct(a) => ctx.construct(a)?,
        Command::Encode(a) => ctx.encode(a)?,
        Command::Decode(a) => ctx.decode(a)?,
        Command::Simulate(a) => ctx.simulate(a)?,
        Command::Trace(a) => ctx.trace(a)?,
        Command::Polarize(a) => ctx.polarize(a)?,
        Command::OrderScan(a) => ctx.order_scan(a)?,
    }
    Ok(ctx.outcome)
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdout: &'a mut dyn Write,
    outcome: Outcome,
}

impl Ctx<'_> {
    fn meta(&self, command: &str, params: &impl std::fmt::Debug) -> Metadata {
        let mut m = Metadata::new(command);
        m.push("params", format!("{params:?}"));
        m.push("seed", self.cli.seed.to_string());
        m
    }

    fn table_text(&self, t: &Table) -> String {
        match self.cli.format {
            Format::Csv => t.to_csv(),
            Format::Pretty => t.to_pretty(),
        }
    }

    fn emit(&mut self, meta: &Metadata, body: &str) -> Result<()> {
        let text = format!("{}{body}", meta.render());
        match &self.cli.out {
            Some(path) => write_file(path, &text),
            None => self.stdout.write_all(text.as_bytes()).context("writing output"),
        }
    }

    fn violation(&mut self, msg: String) {
        self.outcome.violations.push(msg);
    }

    fn construct(&mut self, a: &ConstructArgs) -> Result<()> {
        let bsc = a.channel.bsc()?;
        let (spec, design) = match (a.k, a.rm_r) {
            (Some(k), _) => {
                let bsc = bsc.context("--k needs --epsilon or --crossover")?;
                let (spec, design) = construct_code(a.m, k, bsc.epsilon())?;
                (spec, Some(design))
            }
            (None, Some(r)) => {
                let spec = rm_info_set(r, a.m)?;
                let design = match bsc {
                    Some(bsc) => {
                        let (_, mut d) = construct_code(a.m, 1, bsc.epsilon())?;
                        d.selected = spec.mask().to_vec();
                        d.sum_selected_b = spec.info_paths().iter().map(|p| d.b(p)).sum();
                        Some(d)
                    }
                    None => None,
                };
                (spec, design)
            }
            (None, None) => bail!("one of --k or --rm-r is required"),
        };

        let mut meta = self.meta("construct", a);
        meta.push("k", spec.k().to_string());
        if let Some(d) = &design {
            meta.push("b0", fmt_num(d.b0));
            meta.push("moment_steps", d.moment_steps.to_string());
            meta.push("sum_selected_B", fmt_num(d.sum_selected_b));
            self.outcome
                .notes
                .push(format!("sum of selected B: {}", fmt_num(d.sum_selected_b)));
        }
        if let Some(path) = &a.table {
            let d = design.as_ref().context("--table needs --epsilon or --crossover")?;
            let text = format!("{}{}", meta.render(), self.table_text(&d.to_table()));
            write_file(path, &text)?;
        }
        self.emit(&meta, &spec.to_toml())
    }

    fn encode(&mut self, a: &EncodeArgs) -> Result<()> {
        let spec = read_spec(&a.spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cli.seed);
        let msg = match &a.message {
            Some(path) => Message::from_text(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))?,
            None => Message::random(&spec, &mut rng),
        };
        let cw = match a.encoder {
            Encoder::Plotkin => encode_plotkin(&spec, &msg)?,
            Encoder::Monomial => encode_monomial_sum(&spec, &msg)?,
        };
        let meta = self.meta("encode", a);
        if let Some(path) = &a.message_out {
            write_file(path, &format!("{}{}", meta.render(), msg.to_text()))?;
        }
        let word = match a.channel.bsc()? {
            Some(bsc) => {
                let symbols = bsc_observe(&cw, bsc.epsilon(), &mut rng)?;
                let bits = symbols.iter().map(|&s| u8::from(s < 0)).collect();
                Codeword::from_bits(bits)?
            }
            None => cw,
        };
        self.emit(&meta, &format!("{word}\n"))
    }

    fn decode(&mut self, a: &DecodeArgs) -> Result<()> {
        let spec = read_spec(&a.spec)?;
        let soft = match (&a.soft, &a.received) {
            (Some(path), _) => {
                SoftObservation::from_text(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(path)) => {
                let bsc = a.channel.require()?;
                let word: Codeword = read_file(path)?
                    .parse()
                    .with_context(|| format!("parsing {}", path.display()))?;
                SoftObservation::from_bsc(&word.symbols(), bsc.epsilon())?
            }
            (None, None) => bail!("one of --soft or --received is required"),
        };
        let out = sc_decode(&spec, &soft)?;
        let meta = self.meta("decode", a);
        if let Some(path) = &a.codeword_out {
            write_file(path, &format!("{}{}\n", meta.render(), out.codeword))?;
        }
        self.emit(&meta, &out.message.to_text())
    }

    fn simulate(&mut self, a: &SimulateArgs) -> Result<()> {
        let spec = read_spec(&a.spec)?;
        let bsc = a.channel.require()?;
        let mut meta = self.meta("simulate", a);
        meta.push("trials", a.trials.to_string());
        if a.block {
            let r = block_error_rate(&spec, bsc.epsilon(), a.trials, self.cli.seed)?;
            let mut t = Table::new(&["statistic", "value"]);
            t.push(vec!["trials".into(), r.trials.to_string()]);
            t.push(vec!["block_errors".into(), r.block_errors.to_string()]);
            t.push(vec!["rate".into(), fmt_num(r.rate)]);
            t.push(vec!["sum_selected_B".into(), fmt_num(r.union_bound)]);
            t.push(vec!["sigma".into(), fmt_num(r.sigma)]);
            t.push(vec!["within_bound".into(), r.within_bound.to_string()]);
            if a.assert && !r.within_bound {
                self.violation(format!(
                    "block error rate {} > sum of B {} + {SIGMA_SLACK}σ ({})",
                    fmt_num(r.rate),
                    fmt_num(r.union_bound),
                    fmt_num(r.sigma)
                ));
            }
            let body = self.table_text(&t);
            return self.emit(&meta, &body);
        }
        let report = genie_error_rates(&spec, bsc.epsilon(), a.trials, self.cli.seed)?;
        if a.assert {
            for e in &report.entries {
                if !e.z_bound_ok {
                    self.violation(format!("path {}: rate {} > Z {} + {SIGMA_SLACK}σ", e.path, fmt_num(e.rate), fmt_num(e.z)));
                }
                if !e.b_bound_ok {
                    self.violation(format!("path {}: rate {} > B {} + {SIGMA_SLACK}σ", e.path, fmt_num(e.rate), fmt_num(e.b)));
                }
            }
        }
        let body = self.table_text(&report.to_table());
        self.emit(&meta, &body)
    }

    fn trace(&mut self, a: &TraceArgs) -> Result<()> {
        let path: Path = a.path.parse()?;
        let meta = self.meta("trace", a);

        if let Some(other) = &a.versus {
            if a.b0.is_some() || a.channel.bsc()?.is_some() {
                bail!("--versus scans ε itself; drop --epsilon, --crossover and --b0");
            }
            let other: Path = other.parse()?;
            let t = comparison_curve(&path, &other, &interior_grid(a.grid))?;
            let body = self.table_text(&t);
            return self.emit(&meta, &body);
        }

        if let Some(file) = &a.compound {
            if a.channel.bsc()?.is_some() {
                bail!("--channel cannot be combined with --epsilon or --crossover");
            }
            let mut w = CompoundBsc::from_text(&read_file(file)?).with_context(|| format!("parsing {}", file.display()))?;
            let mut t = Table::new(&["step", "prefix", "components", "D", "A", "B", "Z", "V", "bounds_ok"]);
            let mut prefix = Path::empty();
            for step in 0..=path.len() {
                if step > 0 {
                    let bit = path.bit(step);
                    w = w.transform(bit, DEFAULT_COMPONENT_LIMIT)?;
                    prefix = prefix.child(bit);
                }
                let mo = moments(&w);
                let bounds = bhattacharyya_bounds(&mo);
                if a.assert && !bounds.ok() {
                    self.violation(format!("prefix {prefix:?}: Bhattacharyya sandwich violated ({bounds:?})"));
                }
                t.push(vec![
                    step.to_string(),
                    prefix.to_string(),
                    w.len().to_string(),
                    fmt_num(mo.d),
                    fmt_num(mo.a),
                    fmt_num(mo.b),
                    fmt_num(mo.z),
                    fmt_num(mo.v),
                    bounds.ok().to_string(),
                ]);
            }
            let body = self.table_text(&t);
            return self.emit(&meta, &body);
        }

        let mut pair = a.channel.start(a.b0)?;
        let mut t = Table::new(&["step", "prefix", "A", "B", "V"]);
        let mut prefix = Path::empty();
        for step in 0..=path.len() {
            if step > 0 {
                let bit = path.bit(step);
                pair = pair.step(bit);
                prefix = prefix.child(bit);
            }
            t.push(vec![
                step.to_string(),
                prefix.to_string(),
                fmt_num(pair.a),
                fmt_num(pair.b),
                fmt_num(pair.potential()),
            ]);
        }
        let body = self.table_text(&t);
        self.emit(&meta, &body)
    }

    fn polarize(&mut self, a: &PolarizeArgs) -> Result<()> {
        let mut meta = self.meta("polarize", a);
        if a.ratio_curve {
            let grid = interior_grid(a.grid);
            let lambda = a.lambda.unwrap_or(0.5);
            let t = if a.lambda.is_none() {
                ratio_curve(&grid)?
            } else {
                let mut t = Table::new(&["x", "ratio"]);
                for &x in &grid {
                    t.push(vec![fmt_num(x), fmt_num(ratio_lambda(x, lambda)?)]);
                }
                t
            };
            let scan = ratio_scan_lambda(lambda, a.grid)?;
            meta.push("sup", fmt_num(scan.sup));
            meta.push("argmax", fmt_num(scan.argmax));
            if a.assert && a.lambda.is_none() && scan.sup > SQRT3_OVER_2 + BOUND_SLACK {
                self.violation(format!("max ratio {} exceeds √3/2", fmt_num(scan.sup)));
            }
            let body = self.table_text(&t);
            return self.emit(&meta, &body);
        }

        let levels = a.levels.context("--levels is required")?;
        let start = a.channel.start(a.b0)?;
        let b0 = start.b;
        meta.push("b0", fmt_num(b0));

        if a.summary {
            let s = ab_histogram(levels, b0, &a.thresholds)?;
            if let Some(path) = &a.histogram {
                write_file(path, &format!("{}{}", meta.render(), self.table_text(&s.histogram.to_table())))?;
            }
            let body = self.table_text(&s.to_table());
            return self.emit(&meta, &body);
        }

        let range = if a.all_levels { 1..=levels } else { levels..=levels };
        let mut t = crate::polarization::PolarStats::table_header();
        let mut last = None;
        for l in range {
            let s = expected_v(l, b0)?;
            if a.assert {
                if s.mean_v > s.bound + BOUND_SLACK {
                    self.violation(format!(
                        "level {l}: mean V {} > (√3/2)^{l} = {}",
                        fmt_num(s.mean_v),
                        fmt_num(s.bound)
                    ));
                }
                if s.fraction_ge_threshold >= s.threshold {
                    self.violation(format!(
                        "level {l}: fraction {} with V >= (√3/2)^(ℓ/2) is not below {}",
                        fmt_num(s.fraction_ge_threshold),
                        fmt_num(s.threshold)
                    ));
                }
            }
            t.push(s.row());
            last = Some(s);
        }
        if let (Some(path), Some(s)) = (&a.histogram, &last) {
            write_file(path, &format!("{}{}", meta.render(), self.table_text(&s.histogram.to_table())))?;
        }
        let body = self.table_text(&t);
        self.emit(&meta, &body)
    }

    fn order_scan(&mut self, a: &OrderScanArgs) -> Result<()> {
        let report = order_scan(a.m, a.weight, &interior_grid(a.grid))?;
        let crossing = report.crossing_pairs().count();
        let mut meta = self.meta("order-scan", a);
        meta.push("pairs", report.pairs.len().to_string());
        meta.push("crossing_pairs", crossing.to_string());
        self.outcome.notes.push(format!(
            "{} pairs, {crossing} with a sign change on the grid",
            report.pairs.len()
        ));
        let body = self.table_text(&report.to_table());
        self.emit(&meta, &body)
    }
}

fn read_file(path: &std::path::Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &std::path::Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_spec(path: &std::path::Path) -> Result<CodeSpec> {
    CodeSpec::from_toml(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))
}
