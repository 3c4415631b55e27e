//! Monte Carlo harnesses over `BSC(ε)` with the all-zero codeword.
//!
//! Trial `t` draws its noise from a ChaCha8 stream selected by `(seed, t)`,
//! so counts do not depend on how trials are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{hard_bit, HardDecision, LeafPolicy, ScDecoder};
use crate::channel::{bsc_soft, moments, pairs_along_path, Bsc, CompoundBsc, DEFAULT_COMPONENT_LIMIT};
use crate::codebook::{CodeSpec, Path};
use crate::error::{Error, Result};
use crate::format::{fmt_num, Table};

const CHUNK: u64 = 256;

/// Standard deviations of slack allowed in bound checks.
pub const SIGMA_SLACK: f64 = 5.0;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn fill_received(llrs: &mut [f64], crossover: f64, reliability: f64, rng: &mut ChaCha8Rng) {
    for l in llrs.iter_mut() {
        *l = if crossover > 0.0 && rng.random_bool(crossover) {
            -reliability
        } else {
            reliability
        };
    }
}

/// Binomial standard deviation of an empirical rate whose true value is at
/// most `bound`.
pub fn rate_sigma(bound: f64, trials: u64) -> f64 {
    let q = bound.clamp(0.0, 0.5);
    (q * (1.0 - q) / trials as f64).sqrt()
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain {
            name: "trials",
            value: 0.0,
            range: ">= 1",
        });
    }
    Ok(())
}

/// Per-path statistics of genie-aided decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct GenieEntry {
    pub path: Path,
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    pub a: f64,
    pub b: f64,
    pub z: f64,
    pub z_bound_ok: bool,
    pub b_bound_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenieReport {
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub entries: Vec<GenieEntry>,
}

impl GenieReport {
    pub fn entry(&self, path: &Path) -> Option<&GenieEntry> {
        self.entries.iter().find(|e| e.path == *path)
    }

    pub fn all_bounds_ok(&self) -> bool {
        self.entries.iter().all(|e| e.z_bound_ok && e.b_bound_ok)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "path", "trials", "errors", "rate", "A", "B", "Z", "z_bound_ok", "b_bound_ok",
        ]);
        for e in &self.entries {
            t.push(vec![
                e.path.to_string(),
                e.trials.to_string(),
                e.errors.to_string(),
                fmt_num(e.rate),
                fmt_num(e.a),
                fmt_num(e.b),
                fmt_num(e.z),
                e.z_bound_ok.to_string(),
                e.b_bound_ok.to_string(),
            ]);
        }
        t
    }
}

struct Genie<'a> {
    errors: &'a mut [u64],
}

impl LeafPolicy for Genie<'_> {
    fn decide(&mut self, path: u32, llr: f64, _info: bool) -> u8 {
        self.errors[path as usize] += u64::from(hard_bit(llr));
        0
    }
}

/// Genie-aided error rate of every path in `T`: each leaf decision is
/// recorded and then replaced by the true bit 0 before decoding continues.
pub fn genie_error_rates(spec: &CodeSpec, epsilon: f64, trials: u64, seed: u64) -> Result<GenieReport> {
    check_trials(trials)?;
    let bsc = Bsc::new(epsilon)?;
    let reliability = bsc_soft(1, epsilon)?.llr;
    let crossover = bsc.crossover();
    let n = spec.n();
    let chunks = trials.div_ceil(CHUNK);

    let errors = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut decoder = ScDecoder::new(spec.m());
            let mut llrs = vec![0.0; n];
            let mut errors = vec![0u64; n];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(seed, t);
                fill_received(&mut llrs, crossover, reliability, &mut rng);
                let mut genie = Genie { errors: &mut errors };
                decoder
                    .decode_with(spec, &llrs, &mut genie)
                    .expect("validated dimensions");
            }
            errors
        })
        .reduce(
            || vec![0u64; n],
            |mut acc, e| {
                acc.iter_mut().zip(e).for_each(|(a, b)| *a += b);
                acc
            },
        );

    let start = bsc.moment_pair();
    let entries = spec
        .info_paths()
        .iter()
        .map(|&path| {
            let pair = *pairs_along_path(start, &path).last().expect("non-empty");
            let mut w = CompoundBsc::bsc(epsilon)?;
            for bit in path.bits() {
                w = w.transform(bit, DEFAULT_COMPONENT_LIMIT)?;
            }
            let z = moments(&w).z;
            let errs = errors[path.index() as usize];
            let rate = errs as f64 / trials as f64;
            Ok(GenieEntry {
                path,
                trials,
                errors: errs,
                rate,
                a: pair.a,
                b: pair.b,
                z,
                z_bound_ok: rate <= z + SIGMA_SLACK * rate_sigma(z, trials),
                b_bound_ok: rate <= pair.b + SIGMA_SLACK * rate_sigma(pair.b, trials),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GenieReport {
        epsilon,
        trials,
        seed,
        entries,
    })
}

/// Free-running SC block error statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockErrorReport {
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub block_errors: u64,
    pub rate: f64,
    /// `Σ_{ξ ∈ T} B_ξ`.
    pub union_bound: f64,
    pub sigma: f64,
    pub within_bound: bool,
}

/// Decodes `trials` noisy copies of the all-zero codeword with ordinary
/// hard decisions and counts blocks with any wrong information bit.
pub fn block_error_rate(spec: &CodeSpec, epsilon: f64, trials: u64, seed: u64) -> Result<BlockErrorReport> {
    check_trials(trials)?;
    let bsc = Bsc::new(epsilon)?;
    let reliability = bsc_soft(1, epsilon)?.llr;
    let crossover = bsc.crossover();
    let n = spec.n();
    let chunks = trials.div_ceil(CHUNK);

    let block_errors: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut decoder = ScDecoder::new(spec.m());
            let mut llrs = vec![0.0; n];
            let mut count = 0;
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(seed, t);
                fill_received(&mut llrs, crossover, reliability, &mut rng);
                decoder
                    .decode_with(spec, &llrs, &mut HardDecision)
                    .expect("validated dimensions");
                count += u64::from(decoder.decisions().iter().any(|&d| d != 0));
            }
            count
        })
        .sum();

    let start = bsc.moment_pair();
    let union_bound: f64 = spec
        .info_paths()
        .iter()
        .map(|p| pairs_along_path(start, p).last().expect("non-empty").b)
        .sum();
    let rate = block_errors as f64 / trials as f64;
    let sigma = rate_sigma(union_bound, trials);
    Ok(BlockErrorReport {
        epsilon,
        trials,
        seed,
        block_errors,
        rate,
        union_bound,
        sigma,
        within_bound: rate <= union_bound + SIGMA_SLACK * sigma,
    })
}
