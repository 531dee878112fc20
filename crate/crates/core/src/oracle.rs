//! Brute-force local oracles, independent of the closed-form symbol and
//! invariant code. Used by the test suites and by `selftest`.
//!
//! A diagonal form with square-free integer coefficients is isotropic over
//! `ℚ_p` iff it has a primitive zero modulo `p^K`, with `K = 2` for odd `p`
//! and `K = 4` for `p = 2`: a primitive zero in which some unit coordinate
//! meets a unit coefficient lifts by Hensel's lemma (needing the congruence
//! mod `p`, resp. mod 8); otherwise dividing the form by `p` produces such a
//! zero one level down, which costs two more powers of `p`.

/// Place for the oracle: `None` is the real place, `Some(p)` a prime.
pub type OraclePlace = Option<u64>;

fn squarefree_i64(n: i64) -> i64 {
    assert!(n != 0, "zero coefficient");
    let sign = n.signum();
    let mut m = n.unsigned_abs();
    let mut out = 1u64;
    let mut d = 2u64;
    while d * d <= m {
        let mut e = 0;
        while m.is_multiple_of(d) {
            m /= d;
            e += 1;
        }
        if e % 2 == 1 {
            out *= d;
        }
        d += 1;
    }
    out *= m;
    sign * out as i64
}

/// Exhaustive count of primitive zeros modulo `p^K`, organised as a
/// convolution of per-coordinate value histograms.
fn has_primitive_zero_mod(coeffs: &[i64], p: u64, k: u32) -> bool {
    let m = p.pow(k);
    let hist = |a: i64, only_multiples: bool| -> Vec<u64> {
        let mut h = vec![0u64; m as usize];
        let a = a.rem_euclid(m as i64) as u64;
        for x in 0..m {
            if only_multiples && x % p != 0 {
                continue;
            }
            let r = (a as u128 * x as u128 * x as u128 % m as u128) as usize;
            h[r] += 1;
        }
        h
    };
    let convolve = |acc: &[u64], h: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; m as usize];
        for (i, &ca) in acc.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (j, &cb) in h.iter().enumerate() {
                if cb != 0 {
                    out[(i + j) % m as usize] += ca * cb;
                }
            }
        }
        out
    };
    let mut all = vec![0u64; m as usize];
    all[0] = 1;
    let mut imprimitive = all.clone();
    for &a in coeffs {
        all = convolve(&all, &hist(a, false));
        imprimitive = convolve(&imprimitive, &hist(a, true));
    }
    all[0] > imprimitive[0]
}

/// Whether `Σ aᵢ xᵢ²` is isotropic over the completion at `v`.
pub fn local_isotropic(coeffs: &[i64], v: OraclePlace) -> bool {
    let reduced: Vec<i64> = coeffs.iter().map(|&a| squarefree_i64(a)).collect();
    match v {
        None => reduced.iter().any(|&a| a > 0) && reduced.iter().any(|&a| a < 0),
        Some(p) => {
            let k = if p == 2 { 4 } else { 2 };
            has_primitive_zero_mod(&reduced, p, k)
        }
    }
}

/// Hilbert symbol by solvability of `z² = a·x² + b·y²`.
pub fn hilbert(a: i64, b: i64, v: OraclePlace) -> i8 {
    if local_isotropic(&[a, b, -1], v) {
        1
    } else {
        -1
    }
}

/// Evaluates `Σ aᵢ xᵢ²` exactly.
pub fn evaluate(coeffs: &[i64], x: &[i64]) -> i128 {
    coeffs
        .iter()
        .zip(x)
        .map(|(&a, &xi)| a as i128 * xi as i128 * xi as i128)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_of_squares_at_two() {
        // x² + y² + z² = 7w² has no primitive 2-adic zero; with 6 it does.
        assert!(!local_isotropic(&[1, 1, 1, -7], Some(2)));
        assert!(local_isotropic(&[1, 1, 1, -6], Some(2)));
        assert!(!local_isotropic(&[1, 1, 1, 1], Some(2)));
        assert!(local_isotropic(&[1, 1, 1, 1], Some(3)));
    }

    #[test]
    fn classical_symbols() {
        assert_eq!(hilbert(-1, -1, None), -1);
        assert_eq!(hilbert(-1, -1, Some(2)), -1);
        assert_eq!(hilbert(-1, -1, Some(3)), 1);
        assert_eq!(hilbert(2, 3, Some(3)), -1);
        assert_eq!(hilbert(5, 5, Some(5)), 1);
        assert_eq!(hilbert(3, 3, Some(3)), -1);
        assert_eq!(hilbert(18, 3, Some(3)), hilbert(2, 3, Some(3)));
    }

    #[test]
    fn squarefree_reduction() {
        assert_eq!(squarefree_i64(-12), -3);
        assert_eq!(squarefree_i64(49), 1);
        assert_eq!(squarefree_i64(30), 30);
    }
}
