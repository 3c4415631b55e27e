use crate::codebook::{monomial_codeword, plotkin_transform, CodeSpec, Path};
use crate::error::{check_unit, Error, Result};

/// Largest number of undecided paths [`exact_leaf_posterior`] will enumerate.
pub const ORACLE_MAX_FREE_PATHS: usize = 20;

/// Brute-force `Pr{f_ξ = 0 | y, decided bits}` for the leaf `target`.
///
/// `posteriors[j]` is `(Pr{c_j = +1 | y_j}, Pr{c_j = -1 | y_j})`. Every path
/// that is neither `target` nor listed in `decided` is summed out with a
/// uniform prior, frozen or not: successive cancellation knows nothing about
/// bits it has not reached yet, so this is the quantity its leaf soft value
/// represents. Codewords are enumerated in Gray-code order.
pub fn exact_leaf_posterior(
    spec: &CodeSpec,
    posteriors: &[(f64, f64)],
    target: &Path,
    decided: &[(Path, u8)],
) -> Result<f64> {
    let m = spec.m();
    let n = spec.n();
    if posteriors.len() != n {
        return Err(Error::Length {
            expected: n,
            got: posteriors.len(),
        });
    }
    for &(p0, p1) in posteriors {
        check_unit("posterior", p0)?;
        check_unit("posterior", p1)?;
    }
    if target.len() != m {
        return Err(Error::PathLength {
            expected: m,
            got: target.len(),
        });
    }

    let mut fixed = vec![None; n];
    for &(p, bit) in decided {
        if p.len() != m {
            return Err(Error::PathLength {
                expected: m,
                got: p.len(),
            });
        }
        if p == *target {
            return Err(Error::Domain {
                name: "decided target bit",
                value: f64::from(bit),
                range: "target must be undecided",
            });
        }
        fixed[p.index() as usize] = Some(bit & 1);
    }
    let free: Vec<usize> = (0..n)
        .filter(|&i| fixed[i].is_none() && i != target.index() as usize)
        .collect();
    if free.len() > ORACLE_MAX_FREE_PATHS {
        return Err(Error::Budget {
            needed: 1u128 << free.len().min(127),
            limit: 1u128 << ORACLE_MAX_FREE_PATHS,
        });
    }

    let base: Vec<u8> = fixed.iter().map(|b| b.unwrap_or(0)).collect();
    let mut word = plotkin_transform(&base);
    let target_row = monomial_codeword(m, target)?;
    let rows = free
        .iter()
        .map(|&i| monomial_codeword(m, &Path::from_index(i as u32, m)))
        .collect::<Result<Vec<_>>>()?;

    let likelihood = |c: &[u8], flip: Option<&[u8]>| -> f64 {
        let mut prod = 1.0;
        for j in 0..n {
            let bit = c[j] ^ flip.map_or(0, |f| f[j]);
            prod *= if bit == 0 { posteriors[j].0 } else { posteriors[j].1 };
        }
        prod
    };

    let (mut zero, mut one) = (0.0, 0.0);
    let count = 1u64 << free.len();
    for step in 0..count {
        if step > 0 {
            let flip = step.trailing_zeros() as usize;
            for (w, r) in word.iter_mut().zip(rows[flip].bits()) {
                *w ^= r;
            }
        }
        zero += likelihood(&word, None);
        one += likelihood(&word, Some(target_row.bits()));
    }
    let total = zero + one;
    if total <= 0.0 {
        return Err(Error::Inconsistent);
    }
    Ok(zero / total)
}
