//! Square classes over an unspecified base: a rational square class times a
//! product of opaque symbols. Distinct symbol sets are distinct classes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::SquareClass;
use crate::forms::{signed_discriminant, DiagonalForm};
use crate::quaternion::QuaternionAlgebra;

use super::TowerError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalClass {
    rational: SquareClass,
    symbols: BTreeSet<String>,
}

impl FormalClass {
    pub fn one() -> Self {
        SquareClass::one().into()
    }

    pub fn minus_one() -> Self {
        SquareClass::minus_one().into()
    }

    pub fn symbol(name: &str) -> Self {
        FormalClass {
            rational: SquareClass::one(),
            symbols: BTreeSet::from([name.to_string()]),
        }
    }

    pub fn rational(&self) -> &SquareClass {
        &self.rational
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(String::as_str)
    }

    pub fn is_one(&self) -> bool {
        self.symbols.is_empty() && self.rational.is_one()
    }

    pub fn as_concrete(&self) -> Option<&SquareClass> {
        self.symbols.is_empty().then_some(&self.rational)
    }

    pub fn mul(&self, other: &FormalClass) -> FormalClass {
        FormalClass {
            rational: self.rational.mul(&other.rational),
            symbols: self
                .symbols
                .symmetric_difference(&other.symbols)
                .cloned()
                .collect(),
        }
    }

    pub fn neg(&self) -> FormalClass {
        FormalClass {
            rational: self.rational.neg(),
            symbols: self.symbols.clone(),
        }
    }
}

impl From<SquareClass> for FormalClass {
    fn from(rational: SquareClass) -> Self {
        FormalClass {
            rational,
            symbols: BTreeSet::new(),
        }
    }
}

impl fmt::Display for FormalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return write!(f, "{}", self.rational);
        }
        let r = self.rational.value();
        if self.rational.is_negative() {
            write!(f, "-")?;
        }
        let magnitude = r.magnitude();
        if *magnitude != num_bigint::BigUint::from(1u32) {
            write!(f, "{magnitude}*")?;
        }
        let names: Vec<&str> = self.symbols().collect();
        write!(f, "{}", names.join("*"))
    }
}

impl FromStr for FormalClass {
    type Err = TowerError;

    /// Accepts products such as `-2*a*b`, `a`, `-1` or `15`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TowerError::Coefficient(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let mut out = FormalClass::one();
        for factor in body.split('*').map(str::trim) {
            let next = if factor.chars().all(|c| c.is_ascii_digit()) && !factor.is_empty() {
                let n: BigInt = factor.parse().map_err(|_| bad())?;
                FormalClass::from(SquareClass::of_integer(n).map_err(|_| bad())?)
            } else if is_identifier(factor) {
                FormalClass::symbol(factor)
            } else {
                return Err(bad());
            };
            out = out.mul(&next);
        }
        Ok(if negative { out.neg() } else { out })
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Serialize for FormalClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.as_concrete() {
            Some(c) => c.serialize(serializer),
            None => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for FormalClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) => SquareClass::of_integer(n)
                .map(FormalClass::from)
                .map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Diagonal form whose coefficients are formal classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TowerForm {
    coefficients: Vec<FormalClass>,
}

impl TowerForm {
    pub fn new(coefficients: Vec<FormalClass>) -> Result<Self, TowerError> {
        if coefficients.is_empty() {
            return Err(TowerError::EmptyForm);
        }
        Ok(TowerForm { coefficients })
    }

    pub fn coefficients(&self) -> &[FormalClass] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_concrete(&self) -> bool {
        self.coefficients.iter().all(|c| c.as_concrete().is_some())
    }

    pub fn to_diagonal(&self) -> Option<DiagonalForm> {
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| c.as_concrete().cloned())
            .collect::<Option<Vec<_>>>()?;
        DiagonalForm::new(coeffs).ok()
    }

    pub fn determinant(&self) -> FormalClass {
        self.coefficients
            .iter()
            .fold(FormalClass::one(), |acc, c| acc.mul(c))
    }

    /// `(−1)^{n(n−1)/2} · det`.
    pub fn signed_discriminant(&self) -> FormalClass {
        let sign = signed_discriminant(self.dim(), &SquareClass::one());
        self.determinant().mul(&sign.into())
    }

    pub fn negated(&self) -> TowerForm {
        TowerForm {
            coefficients: self.coefficients.iter().map(FormalClass::neg).collect(),
        }
    }

    pub fn orthogonal_sum(&self, other: &TowerForm) -> TowerForm {
        let mut coefficients = self.coefficients.clone();
        coefficients.extend_from_slice(&other.coefficients);
        TowerForm { coefficients }
    }

    fn sorted_coefficients(&self) -> Vec<FormalClass> {
        let mut v = self.coefficients.clone();
        v.sort();
        v
    }

    /// Equality up to permuting the coefficients.
    pub fn same_multiset(&self, other: &TowerForm) -> bool {
        self.dim() == other.dim() && self.sorted_coefficients() == other.sorted_coefficients()
    }
}

impl From<&DiagonalForm> for TowerForm {
    fn from(q: &DiagonalForm) -> Self {
        TowerForm {
            coefficients: q
                .coefficients()
                .iter()
                .cloned()
                .map(FormalClass::from)
                .collect(),
        }
    }
}

impl FromStr for TowerForm {
    type Err = TowerError;

    /// Comma-separated coefficients, optionally wrapped in `<…>` or `[…]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix('<')
            .and_then(|t| t.strip_suffix('>'))
            .or_else(|| t.strip_prefix('[').and_then(|t| t.strip_suffix(']')))
            .unwrap_or(t);
        let coeffs = t
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<FormalClass>, _>>()?;
        TowerForm::new(coeffs)
    }
}

impl fmt::Display for TowerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        write!(f, "<{}>", items.join(","))
    }
}

/// `⟨1, g₁⟩ ⊗ … ⊗ ⟨1, gₙ⟩` over formal classes, in binary subset order.
pub fn formal_pfister(generators: &[FormalClass]) -> TowerForm {
    let coefficients = (0..1usize << generators.len())
        .map(|mask| {
            generators
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(FormalClass::one(), |acc, (_, g)| acc.mul(g))
        })
        .collect();
    TowerForm { coefficients }
}

/// Generators exhibiting `q` as an `n`-fold Pfister form (`n ≥ 1`), if the
/// coefficients of `q` are literally those of one.
pub fn recognize_pfister(q: &TowerForm) -> Option<Vec<FormalClass>> {
    let dim = q.dim();
    if dim < 2 || !dim.is_power_of_two() || dim > 16 {
        return None;
    }
    let n = dim.trailing_zeros() as usize;
    let mut values: Vec<FormalClass> = q.sorted_coefficients();
    values.dedup();
    let target = q.sorted_coefficients();
    let mut idx = vec![0usize; n];
    loop {
        let generators: Vec<FormalClass> = idx.iter().map(|&i| values[i].clone()).collect();
        if formal_pfister(&generators).sorted_coefficients() == target {
            return Some(generators);
        }
        // Next nondecreasing index tuple.
        let Some(pos) = (0..n).rev().find(|&p| idx[p] + 1 < values.len()) else {
            return None;
        };
        idx[pos] += 1;
        let v = idx[pos];
        idx[pos + 1..].iter_mut().for_each(|x| *x = v);
    }
}

/// Quaternion algebra `(a, b)` with formal entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    pub a: FormalClass,
    pub b: FormalClass,
}

impl Algebra {
    pub fn new(a: FormalClass, b: FormalClass) -> Self {
        Algebra { a, b }
    }

    pub fn to_concrete(&self) -> Option<QuaternionAlgebra> {
        Some(QuaternionAlgebra::new(
            self.a.as_concrete()?.clone(),
            self.b.as_concrete()?.clone(),
        ))
    }

    /// `⟨1, −a, −b, ab⟩`.
    pub fn norm_form(&self) -> TowerForm {
        TowerForm {
            coefficients: vec![
                FormalClass::one(),
                self.a.neg(),
                self.b.neg(),
                self.a.mul(&self.b),
            ],
        }
    }

    /// `⟨a, b, −ab⟩`.
    pub fn pure_part(&self) -> TowerForm {
        TowerForm {
            coefficients: vec![self.a.clone(), self.b.clone(), self.a.mul(&self.b).neg()],
        }
    }

    /// `⟨c, −a, −b, ab⟩`; isotropic exactly when `√c` embeds in the algebra.
    pub fn embedding_form(&self, c: &FormalClass) -> TowerForm {
        TowerForm {
            coefficients: vec![c.clone(), self.a.neg(), self.b.neg(), self.a.mul(&self.b)],
        }
    }

    /// `⟨a, b, −ab, −a′, −b′, a′b′⟩`.
    pub fn albert_form(&self, other: &Algebra) -> TowerForm {
        self.pure_part()
            .orthogonal_sum(&other.pure_part().negated())
    }

    /// For algebras sharing an entry, the algebra `(x, y·y′)` in the Brauer
    /// class of their product.
    pub fn shared_slot_product(&self, other: &Algebra) -> Option<Algebra> {
        let pairs = [
            (&self.a, &self.b, &other.a, &other.b),
            (&self.a, &self.b, &other.b, &other.a),
            (&self.b, &self.a, &other.a, &other.b),
            (&self.b, &self.a, &other.b, &other.a),
        ];
        pairs
            .into_iter()
            .find(|(x, _, x2, _)| x == x2)
            .map(|(x, y, _, y2)| Algebra::new(x.clone(), y.mul(y2)))
    }
}

impl From<&QuaternionAlgebra> for Algebra {
    fn from(q: &QuaternionAlgebra) -> Self {
        Algebra::new(q.a.clone().into(), q.b.clone().into())
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl FromStr for Algebra {
    type Err = TowerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(t);
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| TowerError::Coefficient(s.to_string()))?;
        Ok(Algebra::new(a.parse()?, b.parse()?))
    }
}

impl Serialize for Algebra {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Algebra {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Pair([FormalClass; 2]),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Pair([a, b]) => Ok(Algebra::new(a, b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fc(s: &str) -> FormalClass {
        s.parse().unwrap()
    }

    fn tf(s: &str) -> TowerForm {
        s.parse().unwrap()
    }

    #[test]
    fn class_arithmetic() {
        assert_eq!(fc("a").mul(&fc("a")), FormalClass::one());
        assert_eq!(fc("-2*a").mul(&fc("3*b*a")), fc("-6*b"));
        assert_eq!(fc("-12").to_string(), "-3");
        assert_eq!(fc("-4*b*a").to_string(), "-a*b");
        assert_eq!(fc("b*a*2").to_string(), "2*a*b");
        assert!(fc("a*a").is_one());
        assert!("".parse::<FormalClass>().is_err());
        assert!("0".parse::<FormalClass>().is_err());
        assert!("a+b".parse::<FormalClass>().is_err());
    }

    #[test]
    fn serde_round_trip() {
        let q = tf("<1,-a,-b,a*b>");
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"[1,"-a","-b","a*b"]"#);
        assert_eq!(serde_json::from_str::<TowerForm>(&json).unwrap(), q);
        let d: Algebra = serde_json::from_str(r#"[-1, "c"]"#).unwrap();
        assert_eq!(d.to_string(), "(-1,c)");
        assert_eq!(tf("[1,2,3]"), tf("1,2,3"));
    }

    #[test]
    fn discriminants() {
        assert_eq!(tf("1,-a,-b,a*b").signed_discriminant(), FormalClass::one());
        assert_eq!(tf("-2,1,3,3").signed_discriminant(), fc("-2"));
        assert_eq!(tf("c,-a,-b,a*b").signed_discriminant(), fc("c"));
        assert_eq!(tf("1,1").signed_discriminant(), fc("-1"));
    }

    #[test]
    fn pfister_recognition() {
        assert_eq!(
            recognize_pfister(&tf("1,1,1,1")),
            Some(vec![fc("1"), fc("1")])
        );
        let g = recognize_pfister(&tf("a*b,1,-b,-a")).unwrap();
        assert!(formal_pfister(&g).same_multiset(&tf("1,-a,-b,a*b")));
        assert!(recognize_pfister(&tf("1,1,3,3")).is_some());
        assert!(recognize_pfister(&tf("-2,1,3,3")).is_none());
        assert!(recognize_pfister(&tf("1,1,1")).is_none());
        assert!(recognize_pfister(&tf("1,2,3,6,5,10,15,30")).is_some());
    }

    #[test]
    fn algebra_forms() {
        let d: Algebra = "(a,b)".parse().unwrap();
        let e: Algebra = "a,c".parse().unwrap();
        assert_eq!(d.norm_form(), tf("1,-a,-b,a*b"));
        assert_eq!(d.albert_form(&e), tf("a,b,-a*b,-a,-c,a*c"));
        assert_eq!(d.shared_slot_product(&e), Some("(a,b*c)".parse().unwrap()));
        assert_eq!(d.embedding_form(&fc("-2")), tf("-2,-a,-b,a*b"));
        let q: Algebra = "-1,-3".parse().unwrap();
        assert_eq!(q.to_concrete().unwrap().to_string(), "(-1,-3)");
    }
}
