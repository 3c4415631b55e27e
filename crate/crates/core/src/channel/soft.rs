use rand::Rng;

use crate::codebook::Codeword;
use crate::error::{check_unit, Error, Result};

/// One soft value, stored as the log-likelihood `L = ln h` of the symbol
/// `+1` (bit 0) against `-1` (bit 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftEntry {
    pub llr: f64,
}

impl SoftEntry {
    /// `q = Pr{c = +1 | y} = e^L / (1 + e^L)`.
    pub fn q(&self) -> f64 {
        llr_to_q(self.llr)
    }

    /// `g = 2q - 1 = tanh(L/2)`.
    pub fn g(&self) -> f64 {
        (self.llr / 2.0).tanh()
    }

    /// `h = q / (1 - q) = e^L`.
    pub fn h(&self) -> f64 {
        self.llr.exp()
    }
}

pub(crate) fn llr_to_q(llr: f64) -> f64 {
    if llr >= 0.0 {
        1.0 / (1.0 + (-llr).exp())
    } else {
        let e = llr.exp();
        e / (1.0 + e)
    }
}

/// Soft values for a whole received block.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftObservation {
    llrs: Vec<f64>,
}

impl SoftObservation {
    pub fn from_llrs(llrs: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = llrs.iter().find(|l| l.is_nan()) {
            return Err(Error::Domain {
                name: "llr",
                value: bad,
                range: "[-inf, +inf]",
            });
        }
        Ok(SoftObservation { llrs })
    }

    /// Soft values for hard `±1` symbols received over `BSC(ε)`.
    pub fn from_bsc(symbols: &[i8], epsilon: f64) -> Result<Self> {
        let llrs = symbols
            .iter()
            .map(|&y| bsc_soft(y, epsilon).map(|e| e.llr))
            .collect::<Result<Vec<f64>>>()?;
        Ok(SoftObservation { llrs })
    }

    pub fn llrs(&self) -> &[f64] {
        &self.llrs
    }

    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn entry(&self, i: usize) -> SoftEntry {
        SoftEntry { llr: self.llrs[i] }
    }

    /// One value per line; `inf` and `-inf` are accepted, `#` lines skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut llrs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad log-likelihood {line:?}"),
            })?;
            if v.is_nan() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "NaN log-likelihood".into(),
                });
            }
            llrs.push(v);
        }
        Ok(SoftObservation { llrs })
    }

    pub fn to_text(&self) -> String {
        self.llrs
            .iter()
            .map(|&l| crate::format::fmt_num(l) + "\n")
            .collect()
    }
}

/// Soft value of a `BSC(ε)` output `y = ±1`: `g = εy`, `h = (1 + εy)/(1 - εy)`.
pub fn bsc_soft(y: i8, epsilon: f64) -> Result<SoftEntry> {
    check_unit("epsilon", epsilon)?;
    if y != 1 && y != -1 {
        return Err(Error::Domain {
            name: "channel symbol",
            value: f64::from(y),
            range: "{-1, +1}",
        });
    }
    let llr = if epsilon == 1.0 {
        f64::from(y) * f64::INFINITY
    } else {
        // ln((1 + ε)/(1 - ε)) = 2 atanh(ε)
        f64::from(y) * 2.0 * epsilon.atanh()
    };
    Ok(SoftEntry { llr })
}

/// Sends `cw` through `BSC(ε)`: each `±1` symbol flips with probability `(1 - ε)/2`.
pub fn bsc_observe<R: Rng + ?Sized>(cw: &Codeword, epsilon: f64, rng: &mut R) -> Result<Vec<i8>> {
    check_unit("epsilon", epsilon)?;
    let p = (1.0 - epsilon) / 2.0;
    Ok(cw
        .symbols()
        .into_iter()
        .map(|s| if p > 0.0 && rng.random_bool(p) { -s } else { s })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bsc_soft_examples() {
        let e = bsc_soft(1, 0.5).unwrap();
        assert_abs_diff_eq!(e.g(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.h(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.llr, 3f64.ln(), epsilon = 1e-15);

        let e = bsc_soft(-1, 0.0).unwrap();
        assert_eq!(e.g(), 0.0);
        assert_eq!(e.llr, 0.0);

        let e = bsc_soft(-1, 1.0).unwrap();
        assert_eq!(e.g(), -1.0);
        assert_eq!(e.llr, f64::NEG_INFINITY);
        assert_eq!(e.q(), 0.0);

        assert!(bsc_soft(0, 0.5).is_err());
        assert!(bsc_soft(1, 1.5).is_err());
    }

    #[test]
    fn observe_noiseless() {
        let cw = Codeword::zeros(64);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = bsc_observe(&cw, 1.0, &mut rng).unwrap();
        assert!(y.iter().all(|&s| s == 1));
    }

    #[test]
    fn observe_flip_fraction() {
        let cw = Codeword::zeros(100_000);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y = bsc_observe(&cw, 0.5, &mut rng).unwrap();
        let frac = y.iter().filter(|&&s| s == -1).count() as f64 / y.len() as f64;
        assert!((frac - 0.25).abs() <= 0.005, "flip fraction {frac}");
    }

    #[test]
    fn observe_is_deterministic() {
        let cw: Codeword = "0110100110010110".parse().unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            bsc_observe(&cw, 0.3, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn soft_text_accepts_infinities() {
        let s = SoftObservation::from_text("# header\n1.5\ninf\n-inf\n-0.25\n").unwrap();
        assert_eq!(s.llrs(), &[1.5, f64::INFINITY, f64::NEG_INFINITY, -0.25]);
        assert_eq!(SoftObservation::from_text(&s.to_text()).unwrap(), s);
        assert!(matches!(
            SoftObservation::from_text("1\nx\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn soft_views_are_consistent(llr in prop_oneof![
            -50.0f64..50.0,
            Just(f64::INFINITY),
            Just(f64::NEG_INFINITY),
        ]) {
            let e = SoftEntry { llr };
            let (q, g) = (e.q(), e.g());
            prop_assert!((0.0..=1.0).contains(&q));
            prop_assert!((-1.0..=1.0).contains(&g));
            prop_assert!((g - (2.0 * q - 1.0)).abs() < 1e-12);
            if llr != 0.0 {
                prop_assert_eq!(llr > 0.0, g > 0.0);
            }
            if llr.is_infinite() {
                prop_assert_eq!(g.abs(), 1.0);
            } else if llr.abs() < 30.0 {
                prop_assert!(g.abs() < 1.0);
            }
        }
    }
}
