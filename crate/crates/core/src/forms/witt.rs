//! Witt decomposition `q ≅ ⟨1,−1⟩^{⊥i} ⊥ q_an`.
//!
//! The Witt index always comes from the invariant-level peeling in
//! [`anisotropic_invariants`]. The concrete anisotropic part is obtained by
//! explicit splitting (cancelling `a, −a` pairs, then splitting hyperbolic
//! planes off isotropic vectors found by the bounded search) and, when the
//! search budget runs out, by synthesising a diagonal form with the target
//! invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::search::{height_for_budget, search};
use super::{anisotropic_invariants, invariants, DiagonalForm, FormError, FormInvariants};
use crate::arith::{exact_sqrt, squarefree_part, witness_order, Rational, SquareClass};

#[derive(Debug, Clone)]
pub struct WittOptions {
    /// Prefixes the vector search may visit per split.
    pub search_budget: u64,
    pub height_cap: u64,
    /// Coefficient bounds tried, in order, when synthesising.
    pub synthesis_bounds: Vec<u64>,
}

impl Default for WittOptions {
    fn default() -> Self {
        WittOptions {
            search_budget: 2_000_000,
            height_cap: 200,
            synthesis_bounds: vec![30, 100],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnisotropicPart {
    Zero,
    Form(DiagonalForm),
}

impl AnisotropicPart {
    pub fn dim(&self) -> usize {
        match self {
            AnisotropicPart::Zero => 0,
            AnisotropicPart::Form(q) => q.dim(),
        }
    }

    pub fn as_form(&self) -> Option<&DiagonalForm> {
        match self {
            AnisotropicPart::Zero => None,
            AnisotropicPart::Form(q) => Some(q),
        }
    }

    pub fn invariants(&self) -> FormInvariants {
        match self {
            AnisotropicPart::Zero => FormInvariants::zero(),
            AnisotropicPart::Form(q) => invariants(q),
        }
    }
}

impl Serialize for AnisotropicPart {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            AnisotropicPart::Zero => serializer.collect_seq(std::iter::empty::<SquareClass>()),
            AnisotropicPart::Form(q) => q.serialize(serializer),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WittDecomposition {
    pub witt_index: usize,
    pub anisotropic_part: AnisotropicPart,
    /// Isotropic vectors, in the coordinates of the input form, that were
    /// used for explicit splitting.
    pub explicit_witnesses: Vec<Vec<BigInt>>,
    /// Whether the anisotropic part had to be synthesised from invariants.
    pub synthesized: bool,
}

pub fn witt_decompose(q: &DiagonalForm) -> Result<WittDecomposition, FormError> {
    witt_decompose_with(q, &WittOptions::default())
}

type Vector = Vec<BigRational>;

pub fn witt_decompose_with(
    q: &DiagonalForm,
    options: &WittOptions,
) -> Result<WittDecomposition, FormError> {
    let (witt_index, target) = anisotropic_invariants(q);
    let n = q.dim();
    let mut coeffs: Vec<SquareClass> = q.coefficients().to_vec();
    // basis[i] has q(basis[i]) = coeffs[i]; the basis vectors are pairwise orthogonal.
    let mut basis: Vec<Vector> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut witnesses = Vec::new();

    while witnesses.len() < witt_index {
        let Some((i, j)) = opposite_pair(&coeffs) else {
            break;
        };
        witnesses.push(primitive_integer_vector(&add(&basis[i], &basis[j])));
        for k in [j, i] {
            coeffs.remove(k);
            basis.remove(k);
        }
    }

    while witnesses.len() < witt_index {
        let Some(small) = coeffs
            .iter()
            .map(SquareClass::to_i64)
            .collect::<Option<Vec<_>>>()
        else {
            break;
        };
        let small: Vec<i128> = small.into_iter().map(i128::from).collect();
        let height = height_for_budget(coeffs.len(), options.search_budget, options.height_cap);
        let Some(x) = search(&small, height) else {
            break;
        };
        let witness = combine(&basis, &x);
        witnesses.push(primitive_integer_vector(&witness));
        let (c, b) = split_plane(&coeffs, &basis, &x);
        coeffs = c;
        basis = b;
    }

    let explicit = if witnesses.len() == witt_index {
        let part = if coeffs.is_empty() {
            AnisotropicPart::Zero
        } else {
            AnisotropicPart::Form(DiagonalForm::new(coeffs)?)
        };
        part.invariants().same_class(&target).then_some(part)
    } else {
        None
    };
    let (anisotropic_part, synthesized) = match explicit {
        Some(part) => (part, false),
        None => (synthesize(&target, options)?, true),
    };
    Ok(WittDecomposition {
        witt_index,
        anisotropic_part,
        explicit_witnesses: witnesses,
        synthesized,
    })
}

fn opposite_pair(coeffs: &[SquareClass]) -> Option<(usize, usize)> {
    coeffs.iter().enumerate().find_map(|(i, a)| {
        let neg = a.neg();
        coeffs[i + 1..]
            .iter()
            .position(|b| *b == neg)
            .map(|off| (i, i + 1 + off))
    })
}

fn add(u: &Vector, v: &Vector) -> Vector {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

fn combine(basis: &[Vector], x: &[i128]) -> Vector {
    let n = basis.first().map_or(0, Vec::len);
    let mut out = vec![BigRational::zero(); n];
    for (b, &xi) in basis.iter().zip(x) {
        if xi == 0 {
            continue;
        }
        let xi = BigRational::from_integer(BigInt::from(xi));
        for (o, bj) in out.iter_mut().zip(b) {
            *o += bj * &xi;
        }
    }
    out
}

fn primitive_integer_vector(v: &Vector) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let g = if g.is_zero() { BigInt::one() } else { g };
    let mut out: Vec<BigInt> = ints.into_iter().map(|x| x / &g).collect();
    if out
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        out.iter_mut().for_each(|x| *x = -&*x);
    }
    out
}

/// Splits the hyperbolic plane spanned by the isotropic `x` and a coordinate
/// vector off `⟨s₁,…,sₘ⟩` and returns a diagonalised orthogonal complement
/// together with its basis in the original coordinates.
fn split_plane(
    coeffs: &[SquareClass],
    basis: &[Vector],
    x: &[i128],
) -> (Vec<SquareClass>, Vec<Vector>) {
    let rat = |v: &BigInt| BigRational::from_integer(v.clone());
    let s: Vec<BigRational> = coeffs.iter().map(|c| rat(c.value())).collect();
    let xr: Vec<BigRational> = x.iter().map(|&v| rat(&BigInt::from(v))).collect();
    let j = x.iter().position(|&v| v != 0).expect("nonzero witness");
    let k = (0..x.len())
        .find(|&k| k != j && x[k] != 0)
        .expect("an isotropic vector has two nonzero entries");
    let others: Vec<usize> = (0..x.len()).filter(|&i| i != j && i != k).collect();
    let pivot = &s[k] * &xr[k];
    // Complement of span(x, e_j): x_j-coordinate zero and orthogonal to x.
    let c: Vec<BigRational> = others.iter().map(|&i| &s[i] * &xr[i] / &pivot).collect();
    let u: Vec<Vector> = others
        .iter()
        .zip(&c)
        .map(|(&i, ci)| {
            basis[i]
                .iter()
                .zip(&basis[k])
                .map(|(bi, bk)| bi - ci * bk)
                .collect()
        })
        .collect();
    let denom = &s[k] * &xr[k] * &xr[k];
    let gram: Vec<Vec<BigRational>> = others
        .iter()
        .enumerate()
        .map(|(a, &i)| {
            others
                .iter()
                .enumerate()
                .map(|(b, &l)| {
                    let cross = &s[i] * &xr[i] * &s[l] * &xr[l] / &denom;
                    if a == b {
                        &s[i] + cross
                    } else {
                        cross
                    }
                })
                .collect()
        })
        .collect();
    let (diag, transform) = diagonalize(gram);
    let mut new_coeffs = Vec::with_capacity(diag.len());
    let mut new_basis = Vec::with_capacity(diag.len());
    for (d, row) in diag.into_iter().zip(transform) {
        let mut w = vec![BigRational::zero(); basis.first().map_or(0, Vec::len)];
        for (t, ul) in row.iter().zip(&u) {
            if t.is_zero() {
                continue;
            }
            for (o, v) in w.iter_mut().zip(ul) {
                *o += t * v;
            }
        }
        let class = squarefree_part(&Rational::from(d.clone())).expect("regular complement");
        let ratio = d / rat(class.value());
        let t = BigRational::new(
            exact_sqrt(ratio.numer()).expect("square ratio"),
            exact_sqrt(ratio.denom()).expect("square ratio"),
        );
        new_basis.push(w.into_iter().map(|v| v / &t).collect());
        new_coeffs.push(class);
    }
    (new_coeffs, new_basis)
}

/// Symmetric congruence diagonalisation: returns `D` and `T` with
/// `T·G·Tᵀ = diag(D)`. `G` must be nondegenerate.
fn diagonalize(mut g: Vec<Vec<BigRational>>) -> (Vec<BigRational>, Vec<Vec<BigRational>>) {
    let r = g.len();
    let mut t: Vec<Vec<BigRational>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for i in 0..r {
        if g[i][i].is_zero() {
            if let Some(l) = (i + 1..r).find(|&l| !g[l][l].is_zero()) {
                g.swap(i, l);
                for row in g.iter_mut() {
                    row.swap(i, l);
                }
                t.swap(i, l);
            } else if let Some(l) = (i + 1..r).find(|&l| !g[i][l].is_zero()) {
                // Row/column i += row/column l makes the pivot 2·g[i][l].
                for col in 0..r {
                    let v = g[l][col].clone();
                    g[i][col] += v;
                }
                for row in 0..r {
                    let v = g[row][l].clone();
                    g[row][i] += v;
                }
                let tl = t[l].clone();
                for (a, b) in t[i].iter_mut().zip(tl) {
                    *a += b;
                }
            } else {
                panic!("degenerate Gram matrix in Witt splitting");
            }
        }
        let pivot = g[i][i].clone();
        for l in i + 1..r {
            if g[l][i].is_zero() {
                continue;
            }
            let f = &g[l][i] / &pivot;
            for col in 0..r {
                let v = &f * &g[i][col];
                g[l][col] -= v;
            }
            for row in 0..r {
                let v = &f * &g[row][i];
                g[row][l] -= v;
            }
            let ti = t[i].clone();
            for (a, b) in t[l].iter_mut().zip(ti) {
                *a -= &f * b;
            }
        }
    }
    ((0..r).map(|i| g[i][i].clone()).collect(), t)
}

/// Bounded search for a diagonal form realising `target`.
fn synthesize(
    target: &FormInvariants,
    options: &WittOptions,
) -> Result<AnisotropicPart, FormError> {
    let m = target.dimension;
    if m == 0 {
        return Ok(AnisotropicPart::Zero);
    }
    // Anisotropic forms of dimension ≥ 5 over ℚ are definite.
    let sign = if target.signature.0 > 0 {
        SquareClass::one()
    } else {
        SquareClass::minus_one()
    };
    let prefix: Vec<SquareClass> = vec![sign; m.saturating_sub(4)];
    let tail = m - prefix.len();
    let base = prefix
        .iter()
        .fold(target.determinant.clone(), |acc, c| acc.mul(c));
    let mut last_bound = 0;
    for &bound in &options.synthesis_bounds {
        last_bound = bound;
        let pool = witness_order(bound);
        let mut idx = vec![0usize; tail - 1];
        loop {
            let mut coeffs = prefix.clone();
            let mut det = base.clone();
            for &i in &idx {
                coeffs.push(pool[i].clone());
                det = det.mul(&pool[i]);
            }
            coeffs.push(det);
            let candidate = DiagonalForm::new(coeffs)?;
            if invariants(&candidate).same_class(target) {
                return Ok(AnisotropicPart::Form(candidate));
            }
            if !next_multiset(&mut idx, pool.len()) {
                break;
            }
        }
    }
    Err(FormError::SynthesisExhausted { bound: last_bound })
}

/// Advances a nondecreasing index tuple; false when exhausted.
fn next_multiset(idx: &mut [usize], n: usize) -> bool {
    for pos in (0..idx.len()).rev() {
        if idx[pos] + 1 < n {
            idx[pos] += 1;
            let v = idx[pos];
            for later in idx[pos + 1..].iter_mut() {
                *later = v;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{evaluate, is_isotropic};

    fn form(c: &[i64]) -> DiagonalForm {
        DiagonalForm::from_integers(c).unwrap()
    }

    #[test]
    fn hyperbolic_plane_splits_completely() {
        let w = witt_decompose(&form(&[1, -1])).unwrap();
        assert_eq!(w.witt_index, 1);
        assert_eq!(w.anisotropic_part, AnisotropicPart::Zero);
    }

    #[test]
    fn definite_form_is_its_own_part() {
        let q = form(&[1, 1, 1, 1]);
        let w = witt_decompose(&q).unwrap();
        assert_eq!(w.witt_index, 0);
        assert_eq!(w.anisotropic_part, AnisotropicPart::Form(q));
        assert!(w.explicit_witnesses.is_empty());
    }

    #[test]
    fn cancels_two_planes() {
        let q = form(&[1, 1, 1, 1, -1, -1, -3, -3]);
        let w = witt_decompose(&q).unwrap();
        assert_eq!(w.witt_index, 2);
        assert_eq!(
            w.anisotropic_part,
            AnisotropicPart::Form(form(&[1, 1, -3, -3]))
        );
        assert!(!w.synthesized);
        for v in &w.explicit_witnesses {
            assert!(evaluate(&q, v).is_zero());
        }
        assert!(!is_isotropic(&form(&[1, 1, -3, -3])));
    }

    #[test]
    fn explicit_split_through_search() {
        let q = form(&[1, 1, -2, 3, 5]);
        let w = witt_decompose(&q).unwrap();
        assert_eq!(w.witt_index, 1);
        assert!(!w.synthesized);
        assert_eq!(
            w.explicit_witnesses[0],
            vec![1, -1, -1, 0, 0]
                .into_iter()
                .map(BigInt::from)
                .collect::<Vec<_>>()
        );
        let part = w.anisotropic_part.as_form().unwrap();
        assert!(!is_isotropic(part));
        assert!(invariants(&part.with_hyperbolic_planes(1)).same_class(&invariants(&q)));
    }

    #[test]
    fn synthesis_realises_invariants() {
        let opts = WittOptions {
            search_budget: 0,
            height_cap: 0,
            synthesis_bounds: vec![30],
        };
        for c in [&[2, 3, -5, 7, -7][..], &[1, 2, 3, -6, 5, 5]] {
            let q = form(c);
            let w = witt_decompose_with(&q, &opts).unwrap();
            let (_, target) = anisotropic_invariants(&q);
            assert!(w.anisotropic_part.invariants().same_class(&target), "{q}");
        }
    }

    #[test]
    fn multiset_enumeration() {
        let mut idx = vec![0, 0];
        let mut seen = vec![idx.clone()];
        while next_multiset(&mut idx, 3) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 6);
    }
}
