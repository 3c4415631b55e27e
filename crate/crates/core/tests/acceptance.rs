//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::cmp::Ordering;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polar_moments::channel::{
    bhattacharyya_bounds, moments, Bsc, CompoundBsc, SoftObservation, DEFAULT_COMPONENT_LIMIT,
};
use polar_moments::codebook::{encode_monomial_sum, encode_plotkin, CodeSpec, Message, Path};
use polar_moments::decoder::{block_error_rate, exact_leaf_posterior, genie_error_rates, sc_decode};
use polar_moments::ordering::{cmu_compare, construct_code, default_grid, example3_compare, sbu_compare};
use polar_moments::polarization::{
    ab_histogram, expected_v, fast_polarization_params, ratio_r, ratio_scan_lambda, SQRT3_OVER_2,
};

const TRANSFORM_TOL: f64 = 1e-10;
const BOUND_SLACK: f64 = 1e-12;
const RATIO_TOL: f64 = 1e-6;
const RATIO_AT_THREE_QUARTERS: f64 = 0.852_330_459_056_953_8;
const SBU_TOL: f64 = 1e-12;
const EXAMPLE3_TOL: f64 = 1e-6;
const POSTERIOR_TOL: f64 = 1e-9;
const V_CHANNEL_RATE: f64 = 0.375;
const V_CHANNEL_TOL: f64 = 0.005;
const SCALING_BUDGET: Duration = Duration::from_secs(5);
const DOUBLING_RANGE: (f64, f64) = (1.0, 3.0);

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

/// Compound channels for every path of length 0..=8 from BSC(0.5), with the
/// scalar recursion alongside.
fn transform_ensemble() -> Vec<(Path, CompoundBsc, f64, f64)> {
    let bsc = Bsc::new(0.5).unwrap();
    let mut level = vec![(Path::empty(), CompoundBsc::bsc(0.5).unwrap(), bsc.moment_pair())];
    let mut all = Vec::new();
    for depth in 0..=8 {
        for (p, w, pair) in &level {
            all.push((*p, w.clone(), pair.a, pair.b));
        }
        if depth == 8 {
            break;
        }
        level = level
            .iter()
            .flat_map(|(p, w, pair)| {
                [0u8, 1].map(|bit| {
                    (
                        p.child(bit),
                        w.transform(bit, DEFAULT_COMPONENT_LIMIT).unwrap(),
                        pair.step(bit),
                    )
                })
            })
            .collect();
    }
    all
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let ensemble = transform_ensemble();
    let mut worst = 0.0f64;
    for (_, w, a, b) in &ensemble {
        let m = moments(w);
        worst = worst.max((m.a - a).abs()).max((m.b - b).abs());
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst <= TRANSFORM_TOL && elapsed < Duration::from_secs(30),
        format!(
            "{} channels, max |ensemble - recursion| = {worst:.3e}, {:.2?}",
            ensemble.len(),
            elapsed
        ),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for b0 in [0.1, 0.25, 0.5, 0.75, 0.9] {
        for level in 1..=16 {
            let s = expected_v(level, b0).unwrap();
            worst_gap = worst_gap.max(s.mean_v - s.bound);
            if s.mean_v > s.bound + BOUND_SLACK {
                failures.push(format!("b0={b0} l={level}"));
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        failures.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "max E[V] - (sqrt3/2)^l = {worst_gap:.3e}, violations {failures:?}, {:.2?}",
            elapsed
        ),
    )
}

fn criterion_3() -> Verdict {
    let scan = ratio_scan_lambda(0.5, 999).unwrap();
    let r75 = ratio_r(0.75).unwrap();
    let pass = (scan.sup - SQRT3_OVER_2).abs() <= RATIO_TOL
        && (scan.argmax - 0.5).abs() < 1e-12
        && (r75 - RATIO_AT_THREE_QUARTERS).abs() <= 1e-12;
    Verdict::new(
        pass,
        format!("max R = {:.12} at x = {}, R(0.75) = {r75:.16}", scan.sup, scan.argmax),
    )
}

fn criterion_4() -> Verdict {
    let s = expected_v(16, 0.75).unwrap();
    let limit = 0.316_406_25;
    Verdict::new(
        s.fraction_ge_threshold < limit && (s.threshold - limit).abs() < 1e-15,
        format!("fraction with V >= {} is {:.6}", s.threshold, s.fraction_ge_threshold),
    )
}

fn criterion_5() -> Verdict {
    let grid = default_grid();
    let mut sbu_worst = 0.0f64;
    let mut sbu_order_ok = true;
    let mut cmu_ok = true;
    for &eps in &grid {
        let s = sbu_compare(eps).unwrap();
        sbu_worst = sbu_worst.max((s.difference - s.closed_form).abs());
        sbu_order_ok &= s.b01 <= s.b10;
        cmu_ok &= cmu_compare(eps).unwrap().ordering == Ordering::Less;
    }
    let e3 = example3_compare(0.5).unwrap();
    let e3_ok = (e3.b_first - 0.989_828_4).abs() <= EXAMPLE3_TOL && (e3.b_second - 0.989_678_8).abs() <= EXAMPLE3_TOL;
    let sign = match e3.ordering {
        Ordering::Less => "<",
        Ordering::Equal => "=",
        Ordering::Greater => ">",
    };
    Verdict::new(
        sbu_worst <= SBU_TOL && sbu_order_ok && cmu_ok && e3_ok,
        format!(
            "SBU max residual {sbu_worst:.3e}, CMU strict on grid: {cmu_ok}, \
             at eps=0.5 B_100101 = {:.7} {sign} B_011010 = {:.7}",
            e3.b_first, e3.b_second
        ),
    )
}

fn criterion_6() -> Verdict {
    let ensemble = transform_ensemble();
    let bad: Vec<String> = ensemble
        .iter()
        .filter(|(_, w, _, _)| !bhattacharyya_bounds(&moments(w)).ok())
        .map(|(p, _, _, _)| format!("{p:?}"))
        .collect();
    Verdict::new(
        bad.is_empty(),
        format!("{} channels checked, violations {bad:?}", ensemble.len()),
    )
}

fn random_spec(m: u32, rng: &mut ChaCha8Rng) -> CodeSpec {
    loop {
        let mask: Vec<bool> = (0..1usize << m).map(|_| rng.random_bool(0.5)).collect();
        if mask.iter().any(|&b| b) {
            return CodeSpec::from_mask(m, mask).unwrap();
        }
    }
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut leaves = 0;
    for m in 1..=3u32 {
        for _ in 0..100 {
            let spec = random_spec(m, &mut rng);
            let llrs: Vec<f64> = (0..spec.n()).map(|_| rng.random_range(-4.0..4.0)).collect();
            let post: Vec<(f64, f64)> = llrs
                .iter()
                .map(|&l| {
                    let q = 1.0 / (1.0 + (-l).exp());
                    (q, 1.0 - q)
                })
                .collect();
            let out = sc_decode(&spec, &SoftObservation::from_llrs(llrs).unwrap()).unwrap();
            let mut decided = Vec::new();
            for idx in (0..spec.n() as u32).rev() {
                let path = Path::from_index(idx, m);
                let exact = exact_leaf_posterior(&spec, &post, &path, &decided).unwrap();
                worst = worst.max((exact - out.leaf_posterior(&path)).abs());
                decided.push((path, out.decisions[idx as usize]));
                leaves += 1;
            }
        }
    }
    Verdict::new(
        worst <= POSTERIOR_TOL,
        format!("{leaves} leaves, max |SC - exact| = {worst:.3e}"),
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let single = CodeSpec::new(1, ["1".parse().unwrap()]).unwrap();
    let r1 = genie_error_rates(&single, 0.5, 100_000, 0).unwrap();
    let rate1 = r1.entries[0].rate;
    let rate_ok = (rate1 - V_CHANNEL_RATE).abs() <= V_CHANNEL_TOL;

    let full = CodeSpec::full(6).unwrap();
    let r6 = genie_error_rates(&full, 0.5, 100_000, 0).unwrap();
    let z_bad: Vec<String> = r6
        .entries
        .iter()
        .filter(|e| !e.z_bound_ok)
        .map(|e| e.path.to_string())
        .collect();
    let b_bad: Vec<String> = r6
        .entries
        .iter()
        .filter(|e| !e.b_bound_ok)
        .map(|e| format!("{} (rate {:.4} vs B {:.4})", e.path, e.rate, e.b))
        .collect();
    let elapsed = start.elapsed();
    Verdict::new(
        rate_ok && z_bad.is_empty() && b_bad.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "m=1 rate {rate1:.4}; m=6 paths over Z+5sigma {z_bad:?}, over B+5sigma {b_bad:?}; {:.2?}",
            elapsed
        ),
    )
}

fn criterion_9() -> Verdict {
    let (spec, design) = construct_code(10, 512, 0.98).unwrap();
    let r = block_error_rate(&spec, 0.98, 10_000, 0).unwrap();
    Verdict::new(
        r.within_bound && (r.union_bound - design.sum_selected_b).abs() <= 1e-12 * design.sum_selected_b.max(1e-300),
        format!(
            "block error rate {} ({} / {}), sum of selected B {:.3e}, sigma {:.3e}",
            r.rate, r.block_errors, r.trials, r.union_bound, r.sigma
        ),
    )
}

fn min_time(m: u32, repeats: usize) -> Duration {
    (0..repeats)
        .map(|_| {
            let t = Instant::now();
            let out = construct_code(m, 1 << (m - 1), 0.98).unwrap();
            let elapsed = t.elapsed();
            drop(out);
            elapsed
        })
        .min()
        .unwrap()
}

fn criterion_10() -> Verdict {
    let start = Instant::now();
    let (_, design) = construct_code(20, 1 << 19, 0.98).unwrap();
    let elapsed = start.elapsed();
    let steps_ok = design.moment_steps == (1u64 << 21) - 2;

    let t16 = min_time(16, 7).as_secs_f64();
    let t17 = min_time(17, 7).as_secs_f64();
    let t18 = min_time(18, 7).as_secs_f64();
    let (r1, r2) = (t17 / t16, t18 / t17);
    let in_range = |r: f64| (DOUBLING_RANGE.0..=DOUBLING_RANGE.1).contains(&r);
    Verdict::new(
        elapsed < SCALING_BUDGET && steps_ok && in_range(r1) && in_range(r2),
        format!(
            "m=20 in {:.2?} with {} steps; time ratios 17/16 = {r1:.2}, 18/17 = {r2:.2}",
            elapsed, design.moment_steps
        ),
    )
}

fn criterion_11() -> Verdict {
    let mut ell_le_m = Vec::new();
    let mut feasible = Vec::new();
    for m in 1..=1u64 << 20 {
        let p = fast_polarization_params(m);
        if p.feasible {
            feasible.push(m);
        }
        // at m = 1, λ = 1 and ℓ = 0; infeasibility there comes from s < 2
        if m >= 2 && p.ell <= m {
            ell_le_m.push(m);
        }
    }
    let m1 = fast_polarization_params(1);

    let doubling_ok = (0..=1000).all(|i| {
        let a = f64::from(i) / 1000.0;
        1.0 - (1.0 - a) * (1.0 - a) <= 2.0 * a + 1e-15
    });

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bernoulli_ok = true;
    for t in 1..=1024u32 {
        for _ in 0..20 {
            let x = rng.random_range(0.0..1.0 / f64::from(t));
            let lhs = (1.0 - x).powi(t as i32);
            bernoulli_ok &= lhs >= 1.0 - x * f64::from(t) - 1e-15;
        }
    }

    let medians: Vec<f64> = (10..=20)
        .map(|m| ab_histogram(m, 0.75, &[]).unwrap().median())
        .collect();
    let monotone = medians.windows(2).all(|w| w[1] < w[0]);

    Verdict::new(
        feasible.is_empty() && ell_le_m.is_empty() && m1.s < 2 && doubling_ok && bernoulli_ok && monotone,
        format!(
            "no feasible m <= 2^20: {}, l > m for 2 <= m <= 2^20: {}, m=1 has s = {}; \
             1-(1-A)^2 <= 2A: {doubling_ok}; (1-x)^t >= 1-xt: {bernoulli_ok}; \
             median log2(AB) m=10..20: {:.1} .. {:.1}, strictly decreasing: {monotone}",
            feasible.is_empty(),
            ell_le_m.is_empty(),
            m1.s,
            medians[0],
            medians[medians.len() - 1]
        ),
    )
}

fn criterion_12() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut failures = Vec::new();
    for m in 1..=10u32 {
        for trial in 0..100 {
            let spec = random_spec(m, &mut rng);
            let msg = Message::random(&spec, &mut rng);
            let cw = encode_plotkin(&spec, &msg).unwrap();
            let same = encode_monomial_sum(&spec, &msg).unwrap() == cw;
            let soft = SoftObservation::from_bsc(&cw.symbols(), 1.0).unwrap();
            let out = sc_decode(&spec, &soft).unwrap();
            if !same || out.message != msg || out.codeword != cw {
                failures.push(format!("m={m} trial={trial}"));
            }
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!("1000 round trips, failures {failures:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 12] = [
        ("transform exactness", criterion_1),
        ("mean potential bound", criterion_2),
        ("one-step ratio bound", criterion_3),
        ("potential tail fraction", criterion_4),
        ("path comparisons", criterion_5),
        ("Bhattacharyya sandwiches", criterion_6),
        ("decoder posterior oracle", criterion_7),
        ("genie Monte Carlo", criterion_8),
        ("end-to-end block error", criterion_9),
        ("construction scaling", criterion_10),
        ("fast polarization substitutes", criterion_11),
        ("encode/decode round trip", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{status}] {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
