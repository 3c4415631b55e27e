//! Successive-cancellation decoding of `C(m, T)`.
//!
//! The decoder walks the Plotkin tree depth first. At a node holding `2μ`
//! soft values it first forms the `v` half with the degrading combine
//! (offsets multiply, positions `i` and `i + μ`), decodes that subtree, then
//! forms the `u` half with the upgrading combine (likelihoods multiply,
//! with the right half flipped wherever `v̂_i = 1`) and decodes it. Each
//! subtree hands back its re-encoded bits and the node returns
//! `(û, û + v̂)`. Leaves are therefore visited in decreasing path order,
//! `11...1` first and `00...0` last.

mod oracle;
mod sim;

pub use oracle::{exact_leaf_posterior, ORACLE_MAX_FREE_PATHS};
pub use sim::{block_error_rate, genie_error_rates, rate_sigma, BlockErrorReport, GenieEntry, GenieReport, SIGMA_SLACK};

use crate::codebook::{CodeSpec, Codeword, Message, Path};
use crate::error::{Error, Result};
use crate::channel::SoftObservation;

/// Combines two soft values into the soft value of their parity:
/// `tanh(L/2) = tanh(L_left/2) · tanh(L_right/2)`.
///
/// Evaluated as `sign · (min(|a|, |b|) + ln(1 + e^{-(|a|+|b|)}) - ln(1 + e^{-||a|-|b||}))`,
/// which is exact and stays finite for large finite inputs.
#[inline]
pub fn degrade_combine(left: f64, right: f64) -> f64 {
    let sign = if (left < 0.0) != (right < 0.0) { -1.0 } else { 1.0 };
    let (a, b) = (left.abs(), right.abs());
    if a.is_infinite() && b.is_infinite() {
        return sign * f64::INFINITY;
    }
    let mag = a.min(b) + (-(a + b)).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    sign * mag.max(0.0)
}

/// Soft value of `u_i` from its two copies: `L_left + L_right` when
/// `v̂ = 0`, `L_left - L_right` when `v̂ = 1`. Opposite certainties cancel to 0.
#[inline]
pub fn upgrade_combine(left: f64, right: f64, v_hat: u8) -> f64 {
    let sum = if v_hat == 0 { left + right } else { left - right };
    if sum.is_nan() {
        0.0
    } else {
        sum
    }
}

/// What the decoder does at a leaf.
pub trait LeafPolicy {
    /// Returns the bit handed back up the tree for the leaf `path`.
    fn decide(&mut self, path: u32, llr: f64, info: bool) -> u8;
}

/// Hard decision on information leaves (`L ≥ 0` gives 0), 0 on frozen ones.
#[derive(Clone, Copy, Debug, Default)]
pub struct HardDecision;

#[inline]
pub fn hard_bit(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

impl LeafPolicy for HardDecision {
    fn decide(&mut self, _path: u32, llr: f64, info: bool) -> u8 {
        if info {
            hard_bit(llr)
        } else {
            0
        }
    }
}

/// Result of one decode.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub message: Message,
    pub codeword: Codeword,
    /// Leaf soft value for every path, indexed by path integer.
    pub leaf_llrs: Vec<f64>,
    /// Bit handed back at every leaf (0 on frozen leaves).
    pub decisions: Vec<u8>,
    /// Degrading plus upgrading combines performed.
    pub combine_ops: u64,
}

impl DecodeOutput {
    /// Posterior `Pr{f_ξ = 0 | y, earlier decisions}` at the leaf of `path`.
    pub fn leaf_posterior(&self, path: &Path) -> f64 {
        crate::channel::SoftEntry {
            llr: self.leaf_llrs[path.index() as usize],
        }
        .q()
    }
}

/// Reusable SC decoder for one depth `m`.
#[derive(Clone, Debug)]
pub struct ScDecoder {
    m: u32,
    // level l occupies [offsets[l], offsets[l] + 2^(m-l))
    llr: Vec<f64>,
    offsets: Vec<usize>,
    bits: Vec<u8>,
    leaf_llrs: Vec<f64>,
    decisions: Vec<u8>,
    ops: u64,
}

impl ScDecoder {
    pub fn new(m: u32) -> Self {
        let n = 1usize << m;
        let mut offsets = Vec::with_capacity(m as usize + 1);
        let mut off = 0;
        for l in 0..=m {
            offsets.push(off);
            off += n >> l;
        }
        ScDecoder {
            m,
            llr: vec![0.0; off],
            offsets,
            bits: vec![0; n],
            leaf_llrs: vec![0.0; n],
            decisions: vec![0; n],
            ops: 0,
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Standard SC decoding with hard decisions.
    pub fn decode(&mut self, spec: &CodeSpec, soft: &SoftObservation) -> Result<DecodeOutput> {
        self.decode_with(spec, soft.llrs(), &mut HardDecision)?;
        Ok(self.output(spec))
    }

    /// Runs the tree walk with a custom leaf policy, leaving results in the
    /// decoder's buffers. Returns the re-encoded block.
    pub fn decode_with<P: LeafPolicy>(
        &mut self,
        spec: &CodeSpec,
        llrs: &[f64],
        policy: &mut P,
    ) -> Result<&[u8]> {
        if spec.m() != self.m {
            return Err(Error::PathLength {
                expected: self.m,
                got: spec.m(),
            });
        }
        if llrs.len() != spec.n() {
            return Err(Error::Length {
                expected: spec.n(),
                got: llrs.len(),
            });
        }
        self.llr[..llrs.len()].copy_from_slice(llrs);
        self.ops = 0;
        let mut bits = std::mem::take(&mut self.bits);
        self.node(spec, policy, 0, 0, &mut bits);
        self.bits = bits;
        Ok(&self.bits)
    }

    fn node<P: LeafPolicy>(
        &mut self,
        spec: &CodeSpec,
        policy: &mut P,
        level: u32,
        prefix: u32,
        out: &mut [u8],
    ) {
        let here = self.offsets[level as usize];
        if level == self.m {
            let llr = self.llr[here];
            let bit = policy.decide(prefix, llr, spec.is_info(prefix as usize));
            self.leaf_llrs[prefix as usize] = llr;
            self.decisions[prefix as usize] = bit;
            out[0] = bit;
            return;
        }
        let mu = out.len() / 2;
        let child = self.offsets[level as usize + 1];
        for i in 0..mu {
            self.llr[child + i] = degrade_combine(self.llr[here + i], self.llr[here + mu + i]);
        }
        let (u_out, v_out) = out.split_at_mut(mu);
        self.node(spec, policy, level + 1, (prefix << 1) | 1, v_out);
        for (i, &v) in v_out.iter().enumerate() {
            self.llr[child + i] = upgrade_combine(self.llr[here + i], self.llr[here + mu + i], v);
        }
        self.node(spec, policy, level + 1, prefix << 1, u_out);
        for (v, u) in v_out.iter_mut().zip(u_out.iter()) {
            *v ^= *u;
        }
        self.ops += 2 * mu as u64;
    }

    /// Packages the buffers of the last decode.
    pub fn output(&self, spec: &CodeSpec) -> DecodeOutput {
        let message = Message::from_pairs(
            spec.info_paths()
                .iter()
                .map(|p| (*p, self.decisions[p.index() as usize] == 1)),
        );
        DecodeOutput {
            message,
            codeword: Codeword::from_bits(self.bits.clone()).expect("binary"),
            leaf_llrs: self.leaf_llrs.clone(),
            decisions: self.decisions.clone(),
            combine_ops: self.ops,
        }
    }

    pub fn leaf_llrs(&self) -> &[f64] {
        &self.leaf_llrs
    }

    pub fn decisions(&self) -> &[u8] {
        &self.decisions
    }

    pub fn combine_ops(&self) -> u64 {
        self.ops
    }
}

/// One-shot SC decode of `soft` for the code `spec`.
pub fn sc_decode(spec: &CodeSpec, soft: &SoftObservation) -> Result<DecodeOutput> {
    ScDecoder::new(spec.m()).decode(spec, soft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bsc_soft, SoftObservation};
    use crate::codebook::{encode_plotkin, rm_info_set};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LN3: f64 = 1.0986122886681098;

    fn g(l: f64) -> f64 {
        (l / 2.0).tanh()
    }

    #[test]
    fn degrade_combine_examples() {
        assert_abs_diff_eq!(degrade_combine(LN3, LN3), (5.0f64 / 3.0).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(degrade_combine(LN3, LN3), 0.5108256, epsilon = 1e-7);
        for l in [-3.0, 0.0, 2.5, f64::INFINITY] {
            assert_eq!(degrade_combine(l, 0.0), 0.0);
        }
        assert_eq!(degrade_combine(f64::INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(degrade_combine(f64::INFINITY, f64::INFINITY), f64::INFINITY);
        assert_abs_diff_eq!(degrade_combine(f64::INFINITY, -2.0), -2.0, epsilon = 1e-15);
        // large finite inputs stay finite
        assert!(degrade_combine(80.0, 90.0).is_finite());
    }

    #[test]
    fn upgrade_combine_examples() {
        assert_abs_diff_eq!(upgrade_combine(LN3, LN3, 0), 2.0 * LN3, epsilon = 1e-15);
        assert_abs_diff_eq!(upgrade_combine(LN3, LN3, 0), 2.1972246, epsilon = 1e-7);
        assert_eq!(upgrade_combine(LN3, LN3, 1), 0.0);
        assert_eq!(upgrade_combine(1.7, 0.0, 0), 1.7);
        assert_eq!(upgrade_combine(1.7, 0.0, 1), 1.7);
        assert_eq!(upgrade_combine(f64::INFINITY, f64::NEG_INFINITY, 0), 0.0);
        assert_eq!(upgrade_combine(f64::INFINITY, f64::INFINITY, 1), 0.0);
    }

    proptest! {
        #[test]
        fn degrade_combine_is_tanh_rule(a in -12.0f64..12.0, b in -12.0f64..12.0) {
            let l = degrade_combine(a, b);
            prop_assert!((g(l) - g(a) * g(b)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_level_v_leaf() {
        let spec = CodeSpec::new(1, ["1".parse().unwrap()]).unwrap();
        let soft = SoftObservation::from_llrs(vec![LN3, LN3]).unwrap();
        let out = sc_decode(&spec, &soft).unwrap();
        assert_abs_diff_eq!(out.leaf_llrs[1], (5.0f64 / 3.0).ln(), epsilon = 1e-15);
        assert_eq!(out.message.get(&"1".parse().unwrap()), Some(false));
    }

    #[test]
    fn noiseless_round_trip_rm13() {
        let spec = rm_info_set(1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let msg = Message::random(&spec, &mut rng);
            let cw = encode_plotkin(&spec, &msg).unwrap();
            let soft = SoftObservation::from_bsc(&cw.symbols(), 1.0).unwrap();
            let out = sc_decode(&spec, &soft).unwrap();
            assert_eq!(out.message, msg);
            assert_eq!(out.codeword, cw);
        }
    }

    #[test]
    fn errors() {
        let spec = rm_info_set(1, 3).unwrap();
        let soft = SoftObservation::from_llrs(vec![0.0; 4]).unwrap();
        assert_eq!(
            sc_decode(&spec, &soft),
            Err(Error::Length { expected: 8, got: 4 })
        );
        let mut dec = ScDecoder::new(2);
        let soft = SoftObservation::from_llrs(vec![0.0; 8]).unwrap();
        assert!(dec.decode(&spec, &soft).is_err());
    }

    #[test]
    fn output_invariants_and_op_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 1..=8 {
            let mask: Vec<bool> = (0..1 << m).map(|_| rng.random_bool(0.6)).collect();
            let Ok(spec) = CodeSpec::from_mask(m, mask) else { continue };
            let llrs: Vec<f64> = (0..spec.n()).map(|_| rng.random_range(-4.0..4.0)).collect();
            let out = sc_decode(&spec, &SoftObservation::from_llrs(llrs).unwrap()).unwrap();
            assert_eq!(out.combine_ops, (spec.n() as u64) * u64::from(m));
            assert_eq!(out.codeword, encode_plotkin(&spec, &out.message).unwrap());
            for (i, (&l, &d)) in out.leaf_llrs.iter().zip(&out.decisions).enumerate() {
                if !spec.is_info(i) || l >= 0.0 {
                    assert_eq!(d, 0);
                } else {
                    assert_eq!(d, 1);
                }
            }
        }
    }

    #[test]
    fn noiseless_soft_with_bsc_soft_entries() {
        let y = bsc_soft(-1, 1.0).unwrap();
        assert_eq!(hard_bit(y.llr), 1);
        assert_eq!(hard_bit(0.0), 0);
    }
}
