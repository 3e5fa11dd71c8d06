//! Exact scalars: rationals for weights and lengths, exact square roots of
//! rationals for radii, and integer fractions for squared-distance tests.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for weights, heights and word lengths.
pub type Q = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("cannot parse `{0}` as a rational number")]
    BadRational(String),
    #[error("cannot parse `{0}` as a radius")]
    BadRadius(String),
    #[error("negative radius `{0}`")]
    NegativeRadius(String),
}

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qf(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `3`, `-2/5`, `1.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Q, NumError> {
    let t = text.trim();
    let bad = || NumError::BadRational(text.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let den = 10i128.pow(frac.len() as u32);
        let f: i128 = frac.parse().map_err(|_| bad())?;
        let mag = int_part.abs() * den + f;
        return Ok(Q::new(if neg { -mag } else { mag }, den));
    }
    t.parse::<i128>().map(Q::from_integer).map_err(|_| bad())
}

/// Exact conversion of a dyadic float (small denominator) to a rational.
pub fn exact_from_f64(x: f64) -> Option<Q> {
    if !x.is_finite() || x.abs() > 1e15 {
        return None;
    }
    let scale = (1u64 << 24) as f64;
    let scaled = x * scale;
    if scaled.fract() != 0.0 {
        return None;
    }
    Some(Q::new(scaled as i128, 1i128 << 24))
}

/// A nonnegative length stored through its exact square, so that radii like
/// `sqrt(1/2)` compare exactly against squared distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Radius {
    squared: Q,
}

impl Radius {
    pub fn from_length(len: Q) -> Result<Radius, NumError> {
        if len.is_negative() {
            return Err(NumError::NegativeRadius(len.to_string()));
        }
        Ok(Radius { squared: len * len })
    }

    pub fn from_squared(sq: Q) -> Result<Radius, NumError> {
        if sq.is_negative() {
            return Err(NumError::NegativeRadius(format!("sqrt({sq})")));
        }
        Ok(Radius { squared: sq })
    }

    pub fn squared(&self) -> &Q {
        &self.squared
    }

    pub fn value(&self) -> f64 {
        to_f64(&self.squared).sqrt()
    }

    /// Exact rational value when the radius is rational.
    pub fn as_rational(&self) -> Option<Q> {
        let n = isqrt(*self.squared.numer())?;
        let d = isqrt(*self.squared.denom())?;
        Some(Q::new(n, d))
    }
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "sqrt({})", self.squared),
        }
    }
}

impl FromStr for Radius {
    type Err = NumError;

    /// Accepts `3/2`, `0.7`, or `sqrt(1/2)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let sq = parse_rational(inner).map_err(|_| NumError::BadRadius(s.to_string()))?;
            return Radius::from_squared(sq);
        }
        let len = parse_rational(t).map_err(|_| NumError::BadRadius(s.to_string()))?;
        Radius::from_length(len)
    }
}

/// Nonreduced integer fraction `num/den` with `den > 0`; used for exact
/// squared distances without paying for gcd normalisation in hot loops.
#[derive(Clone, Copy, Debug)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub fn new(num: i128, den: i128) -> Frac {
        debug_assert!(den != 0);
        if den < 0 {
            Frac { num: -num, den: -den }
        } else {
            Frac { num, den }
        }
    }

    pub fn int(n: i128) -> Frac {
        Frac { num: n, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_q(self) -> Q {
        Q::new(self.num, self.den)
    }

    /// Divides by an integer scale factor (e.g. undoing coordinate scaling).
    pub fn div_int(self, k: i128) -> Frac {
        Frac::new(self.num, self.den * k)
    }

    pub fn reduced(self) -> Frac {
        let g = self.num.gcd(&self.den);
        if g == 0 {
            return self;
        }
        Frac::new(self.num / g, self.den / g)
    }

    pub fn cmp_q(&self, other: &Q) -> Ordering {
        (self.num * other.denom()).cmp(&(other.numer() * self.den))
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl Zero for Frac {
    fn zero() -> Self {
        Frac::int(0)
    }
    fn is_zero(&self) -> bool {
        self.num == 0
    }
}

impl std::ops::Add for Frac {
    type Output = Frac;
    fn add(self, o: Frac) -> Frac {
        if self.den == o.den {
            Frac::new(self.num + o.num, self.den)
        } else {
            Frac::new(self.num * o.den + o.num * self.den, self.den * o.den)
        }
    }
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Q>) -> i128 {
    values
        .into_iter()
        .fold(1i128, |acc, v| acc.lcm(v.denom()))
}

/// `v * scale` as an integer; panics if `scale` does not clear the denominator.
pub fn scaled_int(v: &Q, scale: i128) -> i128 {
    let s = v * Q::from_integer(scale);
    assert!(s.is_integer(), "scale {scale} does not clear {v}");
    s.to_integer()
}

/// Rationals in config files: integers, decimal floats, or strings like
/// `"3/2"`. Serialized as strings.
pub mod qser {
    use super::{exact_from_f64, parse_rational, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Float(f64),
        Text(String),
    }

    fn convert<E: Error>(r: Repr) -> Result<Q, E> {
        match r {
            Repr::Int(i) => Ok(Q::from_integer(i as i128)),
            Repr::Float(f) => parse_rational(&f.to_string())
                .ok()
                .or_else(|| exact_from_f64(f))
                .ok_or_else(|| E::custom(format!("cannot read {f} as a rational"))),
            Repr::Text(t) => parse_rational(&t).map_err(E::custom),
        }
    }

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        convert(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(convert).collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
            serde::Serialize::serialize(&rows, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
            Vec::<Vec<Repr>>::deserialize(d)?
                .into_iter()
                .map(|r| r.into_iter().map(convert).collect())
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&x.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(convert).transpose()
        }
    }

    pub mod map {
        use super::*;
        use std::collections::BTreeMap;

        pub fn serialize<S: Serializer>(v: &BTreeMap<String, Q>, s: S) -> Result<S::Ok, S::Error> {
            let m: BTreeMap<&String, String> = v.iter().map(|(k, x)| (k, x.to_string())).collect();
            serde::Serialize::serialize(&m, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Q>, D::Error> {
            BTreeMap::<String, Repr>::deserialize(d)?
                .into_iter()
                .map(|(k, r)| convert(r).map(|v| (k, v)))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("2/1").unwrap(), q(2));
        assert_eq!(parse_rational(" -3/6 ").unwrap(), qf(-1, 2));
        assert_eq!(parse_rational("1.25").unwrap(), qf(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), qf(-1, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn radius_forms() {
        let r: Radius = "sqrt(1/2)".parse().unwrap();
        assert_eq!(r.squared(), &qf(1, 2));
        assert!((r.value() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r.as_rational(), None);
        let r: Radius = "3/2".parse().unwrap();
        assert_eq!(r.as_rational(), Some(qf(3, 2)));
        assert_eq!(r.to_string(), "3/2");
        assert!("sqrt(-1)".parse::<Radius>().is_err());
        assert_eq!("sqrt(9/4)".parse::<Radius>().unwrap().as_rational(), Some(qf(3, 2)));
    }

    #[test]
    fn frac_ordering_is_exact() {
        let a = Frac::new(1, 3);
        let b = Frac::new(2, 6);
        assert_eq!(a, b);
        assert!(Frac::new(1, 2) > Frac::new(49, 100));
        assert_eq!(Frac::new(4, 8).reduced().den, 2);
        assert_eq!(Frac::new(1, 2).cmp_q(&qf(1, 2)), Ordering::Equal);
    }

    #[test]
    fn dyadic_floats_convert_exactly() {
        assert_eq!(exact_from_f64(2.5), Some(qf(5, 2)));
        assert_eq!(exact_from_f64(0.1), None);
    }
}
