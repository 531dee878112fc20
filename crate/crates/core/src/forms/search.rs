//! Height-bounded search for isotropic vectors.
//!
//! Vectors are enumerated shell by shell (max-norm `1, 2, …`), and inside a
//! shell in lexicographic order, restricted to vectors whose first nonzero
//! entry is positive. The first hit is therefore the minimum of that order.

use num_bigint::BigInt;
use num_integer::Roots;

use super::DiagonalForm;

/// Smallest isotropic vector with entries bounded by `height_bound`.
///
/// `None` means the bound was exhausted, which is not a proof of anisotropy.
/// Forms whose coefficients do not fit in 64 bits are not searched.
pub fn isotropic_vector(q: &DiagonalForm, height_bound: u64) -> Option<Vec<BigInt>> {
    let coeffs: Vec<i128> = q.to_i64_vec()?.into_iter().map(i128::from).collect();
    search(&coeffs, height_bound).map(|v| v.into_iter().map(BigInt::from).collect())
}

pub(crate) fn search(coeffs: &[i128], height_bound: u64) -> Option<Vec<i128>> {
    if coeffs.len() < 2 {
        return None;
    }
    let mut prefix = vec![0i128; coeffs.len() - 1];
    (1..=height_bound as i128).find_map(|m| shell(coeffs, m, &mut prefix, 0, true, 0, 0))
}

/// Largest height whose full enumeration in dimension `dim` stays within
/// `budget` visited prefixes.
pub(crate) fn height_for_budget(dim: usize, budget: u64, cap: u64) -> u64 {
    if dim < 2 {
        return 0;
    }
    let mut spent: u64 = 0;
    let mut m = 0;
    while m < cap {
        let side = 2 * (m + 1) + 1;
        let cost = side.saturating_pow(dim as u32 - 1);
        spent = spent.saturating_add(cost);
        if spent > budget {
            break;
        }
        m += 1;
    }
    m.max(1)
}

fn shell(
    a: &[i128],
    m: i128,
    prefix: &mut Vec<i128>,
    idx: usize,
    all_zero: bool,
    partial: i128,
    prefix_max: i128,
) -> Option<Vec<i128>> {
    let last = a.len() - 1;
    if idx == last {
        let rhs = -partial;
        let an = a[last];
        if rhs % an != 0 {
            return None;
        }
        let t2 = rhs / an;
        if t2 < 0 {
            return None;
        }
        let t = t2.sqrt();
        if t * t != t2 || t > m || (prefix_max < m && t != m) {
            return None;
        }
        if t == 0 && all_zero {
            return None;
        }
        // Lexicographic order prefers −t, unless it would lead with a negative entry.
        let x_last = if all_zero { t } else { -t };
        let mut v = prefix.clone();
        v.push(x_last);
        return Some(v);
    }
    let lo = if all_zero { 0 } else { -m };
    for x in lo..=m {
        prefix[idx] = x;
        let found = shell(
            a,
            m,
            prefix,
            idx + 1,
            all_zero && x == 0,
            partial + a[idx] * x * x,
            prefix_max.max(x.abs()),
        );
        if found.is_some() {
            return found;
        }
    }
    prefix[idx] = 0;
    None
}
