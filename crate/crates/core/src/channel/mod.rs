//! Binary symmetric channels, compound BSC ensembles and their moments.
//!
//! A symmetric channel is handled as a mixture `{(β_t, ε_t)}` of BSCs with
//! offsets `ε_t = 1 - 2 p_t`. Appending bit 1 to a path degrades the channel
//! (offsets multiply), appending bit 0 upgrades it (Bhattacharyya factors
//! `z_t = √(1 - ε_t²)` multiply). The second moments `A = E(ε²)` and
//! `B = E(z²) = 1 - A` follow a closed scalar recursion under both
//! transforms, implemented by [`moment_step`] and [`MomentPair`].

mod compound;
mod soft;

pub use compound::{
    bhattacharyya_bounds, degrade, moments, upgrade, BoundReport, ChannelMoments, CompoundBsc,
    DEFAULT_COMPONENT_LIMIT, MERGE_TOLERANCE,
};
pub use soft::{bsc_observe, bsc_soft, SoftEntry, SoftObservation};

use crate::codebook::Path;
use crate::error::{check_open_unit, check_unit, Error, Result};

/// `BSC(ε)` with crossover probability `p = (1 - ε) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bsc {
    epsilon: f64,
}

impl Bsc {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        Ok(Bsc { epsilon })
    }

    pub fn from_crossover(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::Domain {
                name: "crossover",
                value: p,
                range: "[0, 1/2]",
            });
        }
        Ok(Bsc {
            epsilon: 1.0 - 2.0 * p,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn crossover(&self) -> f64 {
        (1.0 - self.epsilon) / 2.0
    }

    /// `B = 1 - ε²`.
    pub fn b_moment(&self) -> f64 {
        1.0 - self.epsilon * self.epsilon
    }

    pub fn moment_pair(&self) -> MomentPair {
        let a = self.epsilon * self.epsilon;
        MomentPair { a, b: 1.0 - a }
    }
}

/// One step of the `B` recursion: bit 0 gives `B²`, bit 1 gives `1 - (1 - B)²`.
pub fn moment_step(b: f64, bit: u8) -> Result<f64> {
    check_unit("B", b)?;
    Ok(step_b(b, bit))
}

// 1 - (1 - b)^2 written as b (2 - b) keeps relative precision for small b.
#[inline]
pub(crate) fn step_b(b: f64, bit: u8) -> f64 {
    if bit == 0 {
        b * b
    } else {
        b * (2.0 - b)
    }
}

/// The pair `(A, B)` carried with separate relative precision.
///
/// `A + B = 1` holds algebraically. Each component is updated from itself,
/// so values near 0 keep full relative accuracy on either side; this is what
/// makes `log2(A·B)` and orderings among nearly-perfect or nearly-useless
/// channels meaningful at depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentPair {
    pub a: f64,
    pub b: f64,
}

impl MomentPair {
    pub fn from_b(b: f64) -> Result<Self> {
        check_unit("B", b)?;
        Ok(MomentPair { a: 1.0 - b, b })
    }

    #[inline]
    pub fn step(self, bit: u8) -> Self {
        if bit == 0 {
            MomentPair {
                a: self.a * (2.0 - self.a),
                b: self.b * self.b,
            }
        } else {
            MomentPair {
                a: self.a * self.a,
                b: self.b * (2.0 - self.b),
            }
        }
    }

    /// `V = √(A·B)`.
    pub fn potential(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    /// `log2(A·B)`, `-inf` when either moment underflowed to zero.
    pub fn log2_ab(&self) -> f64 {
        self.a.log2() + self.b.log2()
    }

    /// Sign-exact comparison of `B` between two channels.
    ///
    /// When both `B` exceed 1/2 the comparison is made on `A` (reversed),
    /// which is where the precision lives.
    pub fn cmp_b(&self, other: &MomentPair) -> std::cmp::Ordering {
        if self.b > 0.5 && other.b > 0.5 {
            other.a.total_cmp(&self.a)
        } else {
            self.b.total_cmp(&other.b)
        }
    }

    /// `B_self - B_other`, evaluated on whichever side keeps precision.
    pub fn b_difference(&self, other: &MomentPair) -> f64 {
        if self.b > 0.5 && other.b > 0.5 {
            other.a - self.a
        } else {
            self.b - other.b
        }
    }
}

/// `B` after each prefix of `xi`, starting from `b0`; `a_1` is applied first.
pub fn moments_along_path(b0: f64, xi: &Path) -> Result<Vec<f64>> {
    check_unit("B", b0)?;
    let mut out = Vec::with_capacity(xi.len() as usize + 1);
    let mut b = b0;
    out.push(b);
    for bit in xi.bits() {
        b = step_b(b, bit);
        out.push(b);
    }
    Ok(out)
}

/// Like [`moments_along_path`] but carrying `(A, B)`.
pub fn pairs_along_path(start: MomentPair, xi: &Path) -> Vec<MomentPair> {
    let mut out = Vec::with_capacity(xi.len() as usize + 1);
    let mut pair = start;
    out.push(pair);
    for bit in xi.bits() {
        pair = pair.step(bit);
        out.push(pair);
    }
    out
}

/// `B = 1 - ε²` for an interior offset, as used by code construction.
pub fn design_b0(epsilon: f64) -> Result<f64> {
    check_open_unit("epsilon", epsilon)?;
    Ok(1.0 - epsilon * epsilon)
}
