use std::fmt::Write as _;

use crate::error::{check_unit, Error, Result};
use crate::format::fmt_num;

/// Offsets closer than this are merged into one component.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of components an ensemble may reach.
pub const DEFAULT_COMPONENT_LIMIT: usize = 1_000_000;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// A finite mixture `{(β_t, ε_t)}` of binary symmetric channels, kept sorted
/// by offset with near-equal offsets merged.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundBsc {
    components: Vec<(f64, f64)>,
}

impl CompoundBsc {
    /// Validates and canonicalizes `(weight, offset)` pairs.
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Channel("no components".into()));
        }
        let mut total = 0.0;
        for &(beta, eps) in &components {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Channel(format!("weight {beta} outside (0, 1]")));
            }
            check_unit("epsilon", eps)?;
            total += beta;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::Channel(format!("weights sum to {total}, not 1")));
        }
        Ok(Self::canonical(components))
    }

    pub fn bsc(epsilon: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        Ok(CompoundBsc {
            components: vec![(1.0, epsilon)],
        })
    }

    fn canonical(mut components: Vec<(f64, f64)>) -> Self {
        components.retain(|&(beta, _)| beta > 0.0);
        components.sort_unstable_by(|x, y| x.1.total_cmp(&y.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(components.len());
        for (beta, eps) in components {
            match merged.last_mut() {
                Some(last) if (eps - last.1).abs() <= MERGE_TOLERANCE => last.0 += beta,
                _ => merged.push((beta, eps)),
            }
        }
        CompoundBsc { components: merged }
    }

    /// `(β_t, ε_t)` sorted by ascending offset.
    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.0).sum()
    }

    /// Rows of `beta epsilon`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(beta, eps) in &self.components {
            let _ = writeln!(s, "{} {}", fmt_num(beta), fmt_num(eps));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err("expected `beta epsilon`".into()));
            }
            let beta: f64 = fields[0]
                .parse()
                .map_err(|_| err(format!("bad weight {:?}", fields[0])))?;
            let eps: f64 = fields[1]
                .parse()
                .map_err(|_| err(format!("bad offset {:?}", fields[1])))?;
            rows.push((beta, eps));
        }
        CompoundBsc::new(rows)
    }

    /// Applies [`degrade`] (bit 1) or [`upgrade`] (bit 0).
    pub fn transform(&self, bit: u8, limit: usize) -> Result<Self> {
        if bit == 1 {
            degrade_with_limit(self, limit)
        } else {
            upgrade_with_limit(self, limit)
        }
    }
}

fn check_growth(w: &CompoundBsc, limit: usize) -> Result<()> {
    let needed = w.len().saturating_mul(w.len());
    if needed > limit {
        Err(Error::ComponentLimit { needed, limit })
    } else {
        Ok(())
    }
}

// Pairs (t, s) and (s, t) give the same component; visit t <= s once with
// doubled weight off the diagonal.
fn pairwise(w: &CompoundBsc, combine: impl Fn(f64, f64) -> f64) -> CompoundBsc {
    let c = &w.components;
    let mut out = Vec::with_capacity(c.len() * (c.len() + 1) / 2);
    for (t, &(bt, et)) in c.iter().enumerate() {
        out.push((bt * bt, combine(et, et)));
        for &(bs, es) in &c[t + 1..] {
            out.push((2.0 * bt * bs, combine(et, es)));
        }
    }
    CompoundBsc::canonical(out)
}

/// The degrading transform: components `(β_t β_s, ε_t ε_s)`.
pub fn degrade(w: &CompoundBsc) -> Result<CompoundBsc> {
    degrade_with_limit(w, DEFAULT_COMPONENT_LIMIT)
}

/// The upgrading transform: components `(β_t β_s)` with `z' = z_t z_s`.
pub fn upgrade(w: &CompoundBsc) -> Result<CompoundBsc> {
    upgrade_with_limit(w, DEFAULT_COMPONENT_LIMIT)
}

fn degrade_with_limit(w: &CompoundBsc, limit: usize) -> Result<CompoundBsc> {
    check_growth(w, limit)?;
    Ok(pairwise(w, |et, es| et * es))
}

fn upgrade_with_limit(w: &CompoundBsc, limit: usize) -> Result<CompoundBsc> {
    check_growth(w, limit)?;
    // ε'² = 1 - (1 - ε_t²)(1 - ε_s²), expanded to avoid cancellation near ε = 0
    Ok(pairwise(w, |et, es| {
        let (x, y) = (et * et, es * es);
        (x + y - x * y).clamp(0.0, 1.0).sqrt()
    }))
}

/// `D = E(ε)`, `A = E(ε²)`, `B = E(z²)`, `Z = E(z)` and `V = √(A·B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelMoments {
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub z: f64,
    pub v: f64,
}

pub fn moments(w: &CompoundBsc) -> ChannelMoments {
    let (mut d, mut a, mut b, mut z) = (0.0, 0.0, 0.0, 0.0);
    for &(beta, eps) in &w.components {
        let e2 = eps * eps;
        let z2 = 1.0 - e2;
        d += beta * eps;
        a += beta * e2;
        b += beta * z2;
        z += beta * z2.sqrt();
    }
    ChannelMoments {
        d,
        a,
        b,
        z,
        v: (a * b).sqrt(),
    }
}

/// The two Bhattacharyya sandwiches `B ≤ Z ≤ √B` and `1 - D ≤ Z ≤ √(1 - D²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub z: f64,
    pub b: f64,
    pub sqrt_b: f64,
    pub one_minus_d: f64,
    pub sqrt_one_minus_d2: f64,
    pub b_sandwich_ok: bool,
    pub d_sandwich_ok: bool,
}

impl BoundReport {
    pub fn ok(&self) -> bool {
        self.b_sandwich_ok && self.d_sandwich_ok
    }
}

const BOUND_SLACK: f64 = 1e-12;

pub fn bhattacharyya_bounds(m: &ChannelMoments) -> BoundReport {
    let sqrt_b = m.b.max(0.0).sqrt();
    let one_minus_d = 1.0 - m.d;
    let sqrt_one_minus_d2 = (1.0 - m.d * m.d).max(0.0).sqrt();
    BoundReport {
        z: m.z,
        b: m.b,
        sqrt_b,
        one_minus_d,
        sqrt_one_minus_d2,
        b_sandwich_ok: m.b <= m.z + BOUND_SLACK && m.z <= sqrt_b + BOUND_SLACK,
        d_sandwich_ok: one_minus_d <= m.z + BOUND_SLACK
            && m.z <= sqrt_one_minus_d2 + BOUND_SLACK,
    }
}
