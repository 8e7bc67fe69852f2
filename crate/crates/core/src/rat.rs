//! Exact rational scalars, parsing, and named irrational approximants.
//!
//! Every endpoint, measure, and orbit point in this crate is a [`Rat`]:
//! an arbitrary-precision rational. Irrational inputs (the golden ratio,
//! square roots) enter as continued-fraction convergents carrying an
//! explicit rational error bound; see [`ApproxRat`] and
//! [`named_approximant`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used for all endpoint arithmetic.
pub type Rat = BigRational;

/// `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `num/den` as a rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Fractional part in `[0, 1)`.
pub fn fract(x: &Rat) -> Rat {
    x - x.floor()
}

/// `⌊x⌋` as an integer.
pub fn floor_int(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

/// Best-effort `f64` rendering for reports; exact values stay rational.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Render as `p` (integral) or `p/q`.
pub fn format_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `p/q`, an integer, a decimal (`0.25`), or scientific notation
/// (`2.5e-3`, `1e-12`). All forms are exact.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("bad rational literal {s:?}")));
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational literal {s:?}")))?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rat::from_integer(n * ten.pow(scale as u32))
    } else {
        Rat::new(n, ten.pow((-scale) as u32))
    };
    Ok(value)
}

/// Serde adapter: a `Rat` as the string `"p/q"`.
pub mod rat_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a `Vec<Rat>` as strings.
pub mod rat_vec_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(format_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter: an `Option<Rat>` as an optional string.
pub mod rat_opt_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        x: &Option<Rat>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&format_rat(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rat>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|s| parse_rat(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// A rational together with an exact upper bound on its distance from
/// the real number it stands for. `error == 0` means the value is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRat {
    pub value: Rat,
    pub error: Rat,
    /// Where the value came from, e.g. `golden@1e-12`.
    pub provenance: Option<String>,
}

impl ApproxRat {
    pub fn exact(value: Rat) -> Self {
        ApproxRat {
            value,
            error: Rat::zero(),
            provenance: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }
}

/// Continued-fraction convergent of a named constant with
/// `|constant − value| ≤ precision`. Supported names: `golden`,
/// `sqrt<d>` for nonsquare `d ≥ 2` (e.g. `sqrt2`, `sqrt5`).
pub fn named_approximant(name: &str, precision: &Rat) -> Result<ApproxRat> {
    if !precision.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "approximant precision must be positive, got {}",
            format_rat(precision)
        )));
    }
    let terms: Box<dyn Iterator<Item = BigInt>> = if name == "golden" {
        Box::new(std::iter::repeat(BigInt::one()))
    } else if let Some(d) = name.strip_prefix("sqrt") {
        let d: u64 = d
            .parse()
            .map_err(|_| Error::Parse(format!("unknown constant {name:?}")))?;
        let root = d.isqrt();
        if root * root == d {
            return Err(Error::InvalidParameter(format!(
                "sqrt{d} is rational; write it directly"
            )));
        }
        Box::new(sqrt_cf_terms(d))
    } else {
        return Err(Error::Parse(format!(
            "unknown constant {name:?} (expected golden or sqrt<d>)"
        )));
    };
    let (value, error) = cf_convergent(terms, precision);
    Ok(ApproxRat {
        value,
        error,
        provenance: Some(format!("{name}@{}", format_rat(precision))),
    })
}

/// Continued-fraction terms of √d for nonsquare d (periodic expansion).
fn sqrt_cf_terms(d: u64) -> impl Iterator<Item = BigInt> {
    let a0 = d.isqrt();
    let mut m = 0u64;
    let mut den = 1u64;
    let mut a = a0;
    let mut first = true;
    std::iter::from_fn(move || {
        if first {
            first = false;
            return Some(BigInt::from(a0));
        }
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
        Some(BigInt::from(a))
    })
}

/// First convergent p/q with |x − p/q| ≤ precision, together with the
/// recorded bound 1/(q_k·q_{k+1}) ≥ |x − p/q|.
fn cf_convergent(terms: impl Iterator<Item = BigInt>, precision: &Rat) -> (Rat, Rat) {
    let mut p_prev = BigInt::zero();
    let mut q_prev = BigInt::one();
    let mut p = BigInt::one();
    let mut q = BigInt::zero();
    let mut pending: Option<(BigInt, BigInt)> = None;
    for a in terms {
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        if let Some((cp, cq)) = pending.take() {
            // |x − cp/cq| < 1/(cq·q_next)
            let bound = Rat::new(BigInt::one(), &cq * &q_next);
            if &bound <= precision {
                return (Rat::new(cp, cq), bound);
            }
        }
        pending = Some((p_next.clone(), q_next.clone()));
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
    unreachable!("continued fraction terms are infinite");
}

/// Parse a CLI-style value: `p/q` (exact) or `name@precision`
/// (continued-fraction approximant, default precision 1e-12 when the
/// `@precision` suffix is omitted on a known constant name).
pub fn parse_value(s: &str) -> Result<ApproxRat> {
    let s = s.trim();
    if let Some((name, prec)) = s.split_once('@') {
        let precision = parse_rat(prec)?;
        return named_approximant(name, &precision);
    }
    if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return named_approximant(s, &Rat::new(BigInt::one(), BigInt::from(10u64).pow(12)));
    }
    Ok(ApproxRat::exact(parse_rat(s)?))
}
