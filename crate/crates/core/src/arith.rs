//! Exact integer and rational kernel: factorization, square classes and
//! residue symbols.
//!
//! Everything downstream works with [`SquareClass`] values, i.e. elements of
//! `ℚ^× / (ℚ^×)²` stored through their unique square-free integer
//! representative, so equality of classes is plain integer equality.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Trial division bound before switching to Pollard rho.
const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero has no factorization or square class")]
    Zero,
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("{0} is not an odd prime")]
    NotOddPrime(BigInt),
    #[error("{0} is not square-free")]
    NotSquareFree(BigInt),
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

/// An exact rational number in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self, ArithError> {
        if denominator.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        // BigRational::new reduces and normalises the sign into the numerator.
        Ok(Rational(BigRational::new(numerator, denominator)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let parse_int = |x: &str| -> Result<BigInt, ArithError> {
            x.trim()
                .parse::<BigInt>()
                .map_err(|_| ArithError::Parse(s.to_string()))
        };
        match t.split_once('/') {
            Some((n, d)) => Rational::new(parse_int(n)?, parse_int(d)?),
            None => Ok(Rational::from_integer(parse_int(t)?)),
        }
    }
}

/// Sign and prime-power decomposition of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub sign: i8,
    /// Strictly increasing primes with exponents `>= 1`.
    pub prime_powers: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn reconstruct(&self) -> BigInt {
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.prime_powers {
            acc *= num_traits::pow(p.clone(), *e as usize);
        }
        acc
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.prime_powers.iter().map(|(p, _)| p)
    }
}

/// Exact factorization: trial division up to 10⁶, Pollard rho (Brent) on
/// whatever cofactor remains.
pub fn factor(n: &BigInt) -> Result<Factorization, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut powers: BTreeMap<BigUint, u32> = BTreeMap::new();
    factor_magnitude(n.magnitude().clone(), &mut powers);
    Ok(Factorization {
        sign,
        prime_powers: powers
            .into_iter()
            .map(|(p, e)| (BigInt::from_biguint(Sign::Plus, p), e))
            .collect(),
    })
}

fn factor_magnitude(m: BigUint, out: &mut BTreeMap<BigUint, u32>) {
    if let Some(small) = m.to_u64() {
        let mut local = BTreeMap::new();
        factor_u64(small, &mut local);
        for (p, e) in local {
            *out.entry(BigUint::from(p)).or_insert(0) += e;
        }
        return;
    }
    let mut m = m;
    let mut d: u64 = 2;
    while d <= TRIAL_DIVISION_LIMIT {
        let dd = BigUint::from(d);
        if &dd * &dd > m {
            break;
        }
        while (&m % &dd).is_zero() {
            m /= &dd;
            *out.entry(dd.clone()).or_insert(0) += 1;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m.is_one() {
        return;
    }
    if m.to_u64().is_some() {
        factor_magnitude(m, out);
        return;
    }
    split_big(m, out);
}

fn split_big(m: BigUint, out: &mut BTreeMap<BigUint, u32>) {
    if m.is_one() {
        return;
    }
    if let Some(small) = m.to_u64() {
        factor_magnitude(BigUint::from(small), out);
        return;
    }
    if is_probable_prime_big(&m) {
        *out.entry(m).or_insert(0) += 1;
        return;
    }
    let d = rho_big(&m);
    let rest = &m / &d;
    split_big(d, out);
    split_big(rest, out);
}

fn factor_u64(mut n: u64, out: &mut BTreeMap<u64, u32>) {
    if n <= 1 {
        return;
    }
    let mut d = 2u64;
    while d <= TRIAL_DIVISION_LIMIT && d * d <= n {
        while n.is_multiple_of(d) {
            n /= d;
            *out.entry(d).or_insert(0) += 1;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        split_u64(n, out);
    }
}

fn split_u64(n: u64, out: &mut BTreeMap<u64, u32>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = rho_u64(n);
    split_u64(d, out);
    split_u64(n / d, out);
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn is_probable_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for p in MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'bases: for a in MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn is_prime(n: &BigInt) -> bool {
    !n.is_negative() && is_probable_prime_big(n.magnitude())
}

fn rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn rho_big(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if (n % &two).is_zero() {
        return two;
    }
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut x, mut y, mut d) = (two.clone(), two.clone(), BigUint::one());
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

/// Element of `ℚ^× / (ℚ^×)²`, held as its square-free integer representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SquareClass(BigInt);

impl SquareClass {
    pub fn one() -> Self {
        SquareClass(BigInt::one())
    }

    pub fn minus_one() -> Self {
        SquareClass(BigInt::from(-1))
    }

    /// Accepts `n` only if it is already a nonzero square-free integer.
    pub fn from_squarefree(n: BigInt) -> Result<Self, ArithError> {
        if n.is_zero() {
            return Err(ArithError::Zero);
        }
        let f = factor(&n)?;
        if f.prime_powers.iter().any(|(_, e)| *e > 1) {
            return Err(ArithError::NotSquareFree(n));
        }
        Ok(SquareClass(n))
    }

    /// Class of an arbitrary nonzero integer.
    pub fn of_integer(n: impl Into<BigInt>) -> Result<Self, ArithError> {
        squarefree_part(&Rational::from_integer(n.into()))
    }

    /// Class of a nonzero machine integer. Panics on zero; intended for
    /// literals and test fixtures.
    pub fn from_i64(n: i64) -> Self {
        Self::of_integer(n).expect("nonzero integer")
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Product of classes. For square-free `a`, `b` with `g = gcd(a, b)` the
    /// class of `ab` is `(a/g)(b/g)`, which is again square-free.
    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        let g = self.0.gcd(&other.0);
        SquareClass((&self.0 / &g) * (&other.0 / &g))
    }

    pub fn neg(&self) -> SquareClass {
        SquareClass(-&self.0)
    }

    pub fn factorization(&self) -> Factorization {
        factor(&self.0).expect("square classes are nonzero")
    }

    /// Odd primes dividing the representative, ascending.
    pub fn odd_primes(&self) -> Vec<BigInt> {
        self.factorization()
            .prime_powers
            .into_iter()
            .map(|(p, _)| p)
            .filter(|p| p.is_odd())
            .collect()
    }
}

impl Ord for SquareClass {
    /// Witness order: `|c|` ascending, positive before negative.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .magnitude()
            .cmp(other.0.magnitude())
            .then_with(|| other.0.sign().cmp(&self.0.sign()))
    }
}

impl PartialOrd for SquareClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for SquareClass {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r: Rational = s.parse()?;
        squarefree_part(&r)
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => serializer.serialize_i64(v),
            None => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for SquareClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Int(v) => SquareClass::of_integer(v),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// The unique square-free integer `s` with `r = s·t²` for a rational `t`.
pub fn squarefree_part(r: &Rational) -> Result<SquareClass, ArithError> {
    if r.is_zero() {
        return Err(ArithError::Zero);
    }
    // n/d and n·d share a square class.
    let mut acc = BigInt::from(if r.numerator().is_negative() { -1 } else { 1 });
    for part in [r.numerator(), r.denominator()] {
        for (p, e) in factor(part)?.prime_powers {
            if e % 2 == 1 {
                acc *= p;
            }
        }
    }
    Ok(SquareClass(acc))
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: &BigInt) -> Result<i8, ArithError> {
    if p <= &BigInt::from(2) || !is_prime(p) {
        return Err(ArithError::NotOddPrime(p.clone()));
    }
    Ok(jacobi(&a.mod_floor(p), p))
}

/// Jacobi symbol for odd positive `n`; `a` is taken modulo `n`.
pub(crate) fn jacobi(a: &BigInt, n: &BigInt) -> i8 {
    debug_assert!(n.is_positive() && n.is_odd());
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut result = 1i8;
    let three = BigInt::from(3);
    let five = BigInt::from(5);
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let r = n.mod_floor(&eight);
        if tz % 2 == 1 && (r == three || r == five) {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Whether a positive machine integer is square-free.
pub fn is_squarefree_u64(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = BTreeMap::new();
    factor_u64(n, &mut m);
    m.values().all(|e| *e == 1)
}

/// Square classes with `|c| <= bound` in witness order (`|c|` ascending,
/// positive before negative), starting with `1, -1, 2, -2, 3, -3, 5, ...`.
pub fn witness_order(bound: u64) -> Vec<SquareClass> {
    let mut out = Vec::new();
    for m in 1..=bound {
        if is_squarefree_u64(m) {
            out.push(SquareClass(BigInt::from(m)));
            out.push(SquareClass(-BigInt::from(m)));
        }
    }
    out
}

/// Integer square root of a nonnegative integer if it is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn trial_division_oracle(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while n > 1 {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        out
    }

    #[test]
    fn factor_examples() {
        let one = factor(&big(1)).unwrap();
        assert_eq!(one.sign, 1);
        assert!(one.prime_powers.is_empty());

        let f = factor(&big(-12)).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.prime_powers, vec![(big(2), 2), (big(3), 1)]);

        assert_eq!(trial_division_oracle(9991), vec![(97, 1), (103, 1)]);
        let f = factor(&big(9991)).unwrap();
        assert_eq!(f.prime_powers, vec![(big(97), 1), (big(103), 1)]);

        assert_eq!(factor(&big(0)), Err(ArithError::Zero));
    }

    #[test]
    fn factor_round_trip_exhaustive() {
        for n in -100_000i64..=100_000 {
            if n == 0 {
                continue;
            }
            let f = factor(&big(n)).unwrap();
            assert_eq!(f.reconstruct(), big(n), "n = {n}");
            assert!(f.prime_powers.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn factor_needs_rho() {
        // Two primes above the trial-division limit.
        let p = BigInt::from(1_000_003u64);
        let q = BigInt::from(1_000_033u64);
        let r = BigInt::from(4_294_967_311u64);
        let n = &p * &q * &r * &r;
        let f = factor(&n).unwrap();
        assert_eq!(f.reconstruct(), n);
        assert_eq!(f.prime_powers, vec![(p, 1), (q, 1), (r, 2)]);
    }

    #[test]
    fn squarefree_examples() {
        let sf = |s: &str| squarefree_part(&s.parse().unwrap()).unwrap();
        assert_eq!(sf("18"), SquareClass::from_i64(2));
        assert_eq!(sf("-4/9"), SquareClass::from_i64(-1));
        assert_eq!(sf("1").value(), &big(1));
        assert_eq!(sf("3/2").value(), &big(6));
        assert_eq!(
            squarefree_part(&Rational::from_integer(0)),
            Err(ArithError::Zero)
        );
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(&big(1), &big(5)), Ok(1));
        assert_eq!(legendre(&big(3), &big(7)), Ok(-1));
        assert_eq!(legendre(&big(14), &big(7)), Ok(0));
        assert!(legendre(&big(3), &big(2)).is_err());
        assert!(legendre(&big(3), &big(9)).is_err());
    }

    #[test]
    fn legendre_matches_squares_and_is_multiplicative() {
        let primes: Vec<i64> = (3..=50).filter(|&p| is_prime_u64(p as u64)).collect();
        for p in primes {
            let squares: Vec<i64> = (1..p).map(|x| x * x % p).collect();
            for a in 1..p {
                let expected = if squares.contains(&a) { 1 } else { -1 };
                assert_eq!(legendre(&big(a), &big(p)).unwrap(), expected);
                for b in 1..p {
                    let lhs = legendre(&big(a * b), &big(p)).unwrap();
                    let rhs =
                        legendre(&big(a), &big(p)).unwrap() * legendre(&big(b), &big(p)).unwrap();
                    assert_eq!(lhs, rhs, "a={a} b={b} p={p}");
                }
            }
        }
    }

    #[test]
    fn square_class_product() {
        let a = SquareClass::from_i64(6);
        let b = SquareClass::from_i64(-10);
        assert_eq!(a.mul(&b), SquareClass::from_i64(-15));
        assert_eq!(a.mul(&a), SquareClass::one());
        assert!(SquareClass::from_squarefree(big(12)).is_err());
    }

    #[test]
    fn witness_order_prefix() {
        let got: Vec<i64> = witness_order(6)
            .iter()
            .map(|c| c.to_i64().unwrap())
            .collect();
        assert_eq!(got, vec![1, -1, 2, -2, 3, -3, 5, -5, 6, -6]);
        let mut sorted = witness_order(30);
        sorted.sort();
        assert_eq!(sorted, witness_order(30));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn squarefree_ignores_square_factors(
            n in -5000i64..5000,
            d in 1i64..5000,
            s in 1i64..200,
        ) {
            prop_assume!(n != 0);
            let r = Rational::new(big(n), big(d)).unwrap();
            let scaled = Rational::new(big(n) * big(s * s), big(d)).unwrap();
            prop_assert_eq!(squarefree_part(&r).unwrap(), squarefree_part(&scaled).unwrap());
        }
    }
}
