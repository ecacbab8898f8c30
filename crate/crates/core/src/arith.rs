//! Exact integer, rational and 2x2 integer-matrix arithmetic, plus the
//! action of integer matrices on the projective line by linear fractional
//! transformations.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),
    #[error("bit size of an empty set is undefined")]
    EmptySet,
    #[error("cannot parse matrix: {0}")]
    Parse(String),
}

/// A 2x2 matrix with arbitrary-precision integer entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2Z {
    pub m11: BigInt,
    pub m12: BigInt,
    pub m21: BigInt,
    pub m22: BigInt,
}

impl Mat2Z {
    pub fn new(m11: impl Into<BigInt>, m12: impl Into<BigInt>, m21: impl Into<BigInt>, m22: impl Into<BigInt>) -> Self {
        Mat2Z { m11: m11.into(), m12: m12.into(), m21: m21.into(), m22: m22.into() }
    }

    pub fn identity() -> Self {
        Mat2Z::new(1, 0, 0, 1)
    }

    pub fn neg_identity() -> Self {
        Mat2Z::new(-1, 0, 0, -1)
    }

    /// `[[1, t], [0, 1]]`; `A_n^k` is `upper(k * n)`.
    pub fn upper(t: impl Into<BigInt>) -> Self {
        Mat2Z::new(BigInt::one(), t, BigInt::zero(), BigInt::one())
    }

    /// `[[1, 0], [t, 1]]`; `B_n^k` is `lower(k * n)`.
    pub fn lower(t: impl Into<BigInt>) -> Self {
        Mat2Z::new(BigInt::one(), BigInt::zero(), t, BigInt::one())
    }

    pub fn det(&self) -> BigInt {
        &self.m11 * &self.m22 - &self.m12 * &self.m21
    }

    pub fn is_identity(&self) -> bool {
        self.m11.is_one() && self.m22.is_one() && self.m12.is_zero() && self.m21.is_zero()
    }

    pub fn is_neg_identity(&self) -> bool {
        let minus_one = -BigInt::one();
        self.m11 == minus_one && self.m22 == minus_one && self.m12.is_zero() && self.m21.is_zero()
    }

    /// Exact inverse via the adjugate.
    pub fn inverse(&self) -> Result<Mat2Z, ArithError> {
        let det = self.det();
        if det.is_one() {
            Ok(Mat2Z { m11: self.m22.clone(), m12: -&self.m12, m21: -&self.m21, m22: self.m11.clone() })
        } else if det == -BigInt::one() {
            Ok(Mat2Z { m11: -&self.m22, m12: self.m12.clone(), m21: self.m21.clone(), m22: -&self.m11 })
        } else {
            Err(ArithError::NotUnimodular(det))
        }
    }

    /// Integer power; negative exponents require a unimodular matrix.
    pub fn pow(&self, e: i64) -> Result<Mat2Z, ArithError> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Mat2Z::identity();
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            k >>= 1;
            if k > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// In place `self := [[1, t], [0, 1]] * self`.
    pub fn left_mul_upper(&mut self, t: &BigInt) {
        self.m11 += t * &self.m21;
        self.m12 += t * &self.m22;
    }

    /// In place `self := [[1, 0], [t, 1]] * self`.
    pub fn left_mul_lower(&mut self, t: &BigInt) {
        self.m21 += t * &self.m11;
        self.m22 += t * &self.m12;
    }

    /// Sum of the bit sizes of the four entries.
    pub fn entry_bit_size(&self) -> u64 {
        self.entries().iter().map(|e| bit_size_int(e)).sum()
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.m11, &self.m12, &self.m21, &self.m22]
    }

    /// Row-major decimal strings.
    pub fn to_decimal(&self) -> [String; 4] {
        self.entries().map(|e| e.to_str_radix(10))
    }

    pub fn from_decimal<S: AsRef<str>>(entries: &[S]) -> Result<Mat2Z, ArithError> {
        if entries.len() != 4 {
            return Err(ArithError::Parse(format!("expected 4 entries, found {}", entries.len())));
        }
        let mut parsed = Vec::with_capacity(4);
        for e in entries {
            let s = e.as_ref().trim();
            let v = BigInt::from_str(s).map_err(|_| ArithError::Parse(format!("invalid integer {s:?}")))?;
            parsed.push(v);
        }
        let mut it = parsed.into_iter();
        Ok(Mat2Z { m11: it.next().unwrap(), m12: it.next().unwrap(), m21: it.next().unwrap(), m22: it.next().unwrap() })
    }
}

pub fn mat_mul(a: &Mat2Z, b: &Mat2Z) -> Mat2Z {
    Mat2Z {
        m11: &a.m11 * &b.m11 + &a.m12 * &b.m21,
        m12: &a.m11 * &b.m12 + &a.m12 * &b.m22,
        m21: &a.m21 * &b.m11 + &a.m22 * &b.m21,
        m22: &a.m21 * &b.m12 + &a.m22 * &b.m22,
    }
}

pub fn mat_inv(a: &Mat2Z) -> Result<Mat2Z, ArithError> {
    a.inverse()
}

impl Mul for &Mat2Z {
    type Output = Mat2Z;
    fn mul(self, rhs: &Mat2Z) -> Mat2Z {
        mat_mul(self, rhs)
    }
}

impl Mul for Mat2Z {
    type Output = Mat2Z;
    fn mul(self, rhs: Mat2Z) -> Mat2Z {
        mat_mul(&self, &rhs)
    }
}

impl fmt::Debug for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m11, self.m12, self.m21, self.m22)
    }
}

impl fmt::Display for Mat2Z {
    /// Four whitespace-separated decimal entries, row-major.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.m11, self.m12, self.m21, self.m22)
    }
}

impl FromStr for Mat2Z {
    type Err = ArithError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        Mat2Z::from_decimal(&parts)
    }
}

impl Serialize for Mat2Z {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_decimal().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat2Z {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(deserializer)?;
        Mat2Z::from_decimal(&raw).map_err(serde::de::Error::custom)
    }
}

/// A point of the projective line over the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProjectivePoint {
    Finite(Rational),
    Infinity,
}

/// Position of a point relative to the open unit disk `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `|z| < 1`
    Disk,
    /// `|z| > 1` or infinity
    Exterior,
    /// `|z| = 1`
    Boundary,
}

impl ProjectivePoint {
    pub fn finite(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        ProjectivePoint::Finite(Rational::new(num.into(), den.into()))
    }

    pub fn region(&self) -> Region {
        match self {
            ProjectivePoint::Infinity => Region::Exterior,
            ProjectivePoint::Finite(q) => classify_fraction(q.numer(), q.denom()),
        }
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectivePoint::Infinity => write!(f, "inf"),
            ProjectivePoint::Finite(q) => write!(f, "{q}"),
        }
    }
}

/// Region of `num / den` for `den != 0`, without reducing the fraction.
pub(crate) fn classify_fraction(num: &BigInt, den: &BigInt) -> Region {
    match num.magnitude().cmp(den.magnitude()) {
        std::cmp::Ordering::Less => Region::Disk,
        std::cmp::Ordering::Greater => Region::Exterior,
        std::cmp::Ordering::Equal => Region::Boundary,
    }
}

/// `z -> (m11 z + m12) / (m21 z + m22)`.
pub fn mobius_apply(m: &Mat2Z, z: &ProjectivePoint) -> ProjectivePoint {
    match z {
        ProjectivePoint::Infinity => {
            if m.m21.is_zero() {
                ProjectivePoint::Infinity
            } else {
                ProjectivePoint::Finite(Rational::new(m.m11.clone(), m.m21.clone()))
            }
        }
        ProjectivePoint::Finite(q) => {
            let (p, r) = (q.numer(), q.denom());
            let num = &m.m11 * p + &m.m12 * r;
            let den = &m.m21 * p + &m.m22 * r;
            if den.is_zero() {
                ProjectivePoint::Infinity
            } else {
                ProjectivePoint::Finite(Rational::new(num, den))
            }
        }
    }
}

/// Bit size of `|a|`, with `l(0) = 1`.
pub fn bit_size_int(a: &BigInt) -> u64 {
    if a.is_zero() {
        1
    } else {
        a.abs().bits()
    }
}

pub fn bit_size_i64(a: i64) -> u64 {
    if a == 0 {
        1
    } else {
        u64::from(64 - a.unsigned_abs().leading_zeros())
    }
}

/// Sum of the bit sizes of the elements.
pub fn bit_size_set(set: &[i64]) -> Result<u64, ArithError> {
    if set.is_empty() {
        return Err(ArithError::EmptySet);
    }
    Ok(set.iter().map(|&a| bit_size_i64(a)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a2() -> Mat2Z {
        Mat2Z::upper(2)
    }
    fn b2() -> Mat2Z {
        Mat2Z::lower(2)
    }

    #[test]
    fn products() {
        let m = Mat2Z::new(3, -7, 11, 4);
        assert_eq!(mat_mul(&Mat2Z::identity(), &m), m);
        assert_eq!(mat_mul(&a2(), &b2()), Mat2Z::new(5, 2, 2, 1));
        assert_eq!(mat_mul(&a2(), &a2().inverse().unwrap()), Mat2Z::identity());
    }

    #[test]
    fn inverses() {
        assert_eq!(mat_inv(&Mat2Z::identity()).unwrap(), Mat2Z::identity());
        assert_eq!(mat_inv(&Mat2Z::new(1, 2, 0, 1)).unwrap(), Mat2Z::new(1, -2, 0, 1));
        let m = Mat2Z::new(5, 2, 2, 1);
        let inv = mat_inv(&m).unwrap();
        assert_eq!(inv, Mat2Z::new(1, -2, -2, 5));
        assert!(mat_mul(&m, &inv).is_identity());
        // det -1
        let r = Mat2Z::new(0, 1, 1, 0);
        assert!(mat_mul(&r, &mat_inv(&r).unwrap()).is_identity());
        assert_eq!(mat_inv(&Mat2Z::new(2, 0, 0, 1)), Err(ArithError::NotUnimodular(BigInt::from(2))));
    }

    #[test]
    fn powers() {
        assert_eq!(a2().pow(3).unwrap(), Mat2Z::upper(6));
        assert_eq!(b2().pow(-4).unwrap(), Mat2Z::lower(-8));
        assert_eq!(Mat2Z::new(5, 2, 2, 1).pow(0).unwrap(), Mat2Z::identity());
    }

    #[test]
    fn mobius_examples() {
        let half = ProjectivePoint::finite(1, 2);
        assert_eq!(mobius_apply(&Mat2Z::identity(), &half), half);
        assert_eq!(mobius_apply(&a2(), &ProjectivePoint::finite(2, 1)), ProjectivePoint::finite(4, 1));
        assert_eq!(mobius_apply(&b2().inverse().unwrap(), &half), ProjectivePoint::Infinity);
        assert_eq!(mobius_apply(&a2(), &ProjectivePoint::Infinity), ProjectivePoint::Infinity);
        assert_eq!(mobius_apply(&Mat2Z::new(5, 2, 2, 1), &ProjectivePoint::Infinity), ProjectivePoint::finite(5, 2));
    }

    #[test]
    fn regions() {
        assert_eq!(ProjectivePoint::Infinity.region(), Region::Exterior);
        assert_eq!(ProjectivePoint::finite(1, 2).region(), Region::Disk);
        assert_eq!(ProjectivePoint::finite(-3, 2).region(), Region::Exterior);
        assert_eq!(ProjectivePoint::finite(-1, 1).region(), Region::Boundary);
        assert_eq!(ProjectivePoint::finite(0, 1).region(), Region::Disk);
    }

    #[test]
    fn bit_sizes() {
        assert_eq!(bit_size_int(&BigInt::from(0)), 1);
        assert_eq!(bit_size_int(&BigInt::from(5)), 3);
        assert_eq!(bit_size_int(&BigInt::from(-8)), 4);
        assert_eq!(bit_size_set(&[1]), Ok(1));
        assert_eq!(bit_size_set(&[1, 2]), Ok(3));
        assert_eq!(bit_size_set(&[3, -5]), Ok(5));
        assert_eq!(bit_size_set(&[]), Err(ArithError::EmptySet));
        for a in [-1000i64, -1, 0, 1, 7, 8, i64::MAX, i64::MIN] {
            assert_eq!(bit_size_i64(a), bit_size_int(&BigInt::from(a)), "a = {a}");
        }
    }

    #[test]
    fn text_round_trip() {
        let m = Mat2Z::new(BigInt::from(10).pow(40), -3, 0, 1);
        assert_eq!(m.to_string().parse::<Mat2Z>().unwrap(), m);
        assert!("1 2 3".parse::<Mat2Z>().is_err());
        assert!("1 2 x 4".parse::<Mat2Z>().is_err());
    }

    fn unimodular() -> impl Strategy<Value = Mat2Z> {
        // products of elementary matrices and the swap
        prop::collection::vec((0u8..3, -5i64..=5), 0..6).prop_map(|steps| {
            steps.into_iter().fold(Mat2Z::identity(), |acc, (kind, t)| {
                let e = match kind {
                    0 => Mat2Z::upper(t),
                    1 => Mat2Z::lower(t),
                    _ => Mat2Z::new(0, 1, 1, 0),
                };
                &acc * &e
            })
        })
    }

    fn point() -> impl Strategy<Value = ProjectivePoint> {
        prop_oneof![
            Just(ProjectivePoint::Infinity),
            (-50i64..=50, 1i64..=50).prop_map(|(p, q)| ProjectivePoint::finite(p, q)),
        ]
    }

    proptest! {
        #[test]
        fn mul_is_associative(
            a in (-20i64..20, -20i64..20, -20i64..20, -20i64..20),
            b in (-20i64..20, -20i64..20, -20i64..20, -20i64..20),
            c in (-20i64..20, -20i64..20, -20i64..20, -20i64..20),
        ) {
            let a = Mat2Z::new(a.0, a.1, a.2, a.3);
            let b = Mat2Z::new(b.0, b.1, b.2, b.3);
            let c = Mat2Z::new(c.0, c.1, c.2, c.3);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&Mat2Z::identity() * &a, a.clone());
            prop_assert_eq!(&a * &Mat2Z::identity(), a);
        }

        #[test]
        fn action_is_compatible_with_products(a in unimodular(), b in unimodular(), z in point()) {
            let lhs = mobius_apply(&(&a * &b), &z);
            let rhs = mobius_apply(&a, &mobius_apply(&b, &z));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn minus_identity_acts_trivially(z in point()) {
            prop_assert_eq!(mobius_apply(&Mat2Z::neg_identity(), &z), z);
        }

        #[test]
        fn images_are_in_lowest_terms(a in unimodular(), z in point()) {
            if let ProjectivePoint::Finite(q) = mobius_apply(&a, &z) {
                prop_assert!(num_integer::Integer::gcd(q.numer(), q.denom()).is_one());
                prop_assert!(q.denom().is_positive());
            }
        }
    }
}
