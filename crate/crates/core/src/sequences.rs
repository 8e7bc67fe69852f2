//! Generators for strictly increasing real sequences with exact term
//! evaluation, integer parts, and density/growth diagnostics.
//!
//! All kinds except `prime_power` evaluate exactly; `prime_power`
//! involves irrational powers `p^θ` and returns fixed-precision values
//! with a recorded error bound (default precision 10⁻³⁰).

use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{floor_int, format_rat, fract, rat_str, rat_vec_str, Rat};

/// Decimal digits of precision carried by `prime_power` terms.
const POWER_PRECISION_DIGITS: u32 = 30;

/// Largest exponent index allowed for the built-in `2^(2^i)` schedule;
/// beyond this a single term would not fit in memory comfortably.
const DOUBLE_EXP_MAX_INDEX: u64 = 25;

fn default_sieve_limit() -> u64 {
    1_000_000
}

/// Schedule `f` for block sequences `{f(i)+j : 1 ≤ j ≤ i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSchedule {
    /// `f(i) = 2^(2^i)`.
    DoubleExponential,
    /// Explicit finite table `f(1), f(2), …`.
    Table {
        #[serde(with = "rat_vec_str")]
        values: Vec<Rat>,
    },
}

/// A strictly increasing sequence generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `a_n = Q(n)` with rational coefficients in ascending degree.
    Polynomial {
        #[serde(with = "rat_vec_str")]
        coeffs: Vec<Rat>,
    },
    /// `a_n = b^n` for rational `b > 1`.
    Geometric {
        #[serde(with = "rat_str")]
        b: Rat,
    },
    /// `a_n = b^n` for integer `b ≥ 2`.
    IntegerPower { b: u64 },
    /// Elements of `{f(i)+j : 1 ≤ j ≤ i}` in increasing order.
    Block { f: BlockSchedule },
    /// `a_n = Σ_j coeffs[j] · p_n^(exponents[j])` over the primes `p_n`.
    PrimePower {
        #[serde(with = "rat_vec_str")]
        exponents: Vec<Rat>,
        #[serde(with = "rat_vec_str")]
        coeffs: Vec<Rat>,
        #[serde(default = "default_sieve_limit")]
        sieve_limit: u64,
    },
    /// A finite explicit list.
    Explicit {
        #[serde(with = "rat_vec_str")]
        terms: Vec<Rat>,
    },
}

/// A term value together with an exact error bound (zero when exact).
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub value: Rat,
    pub error: Rat,
}

impl Term {
    fn exact(value: Rat) -> Term {
        Term {
            value,
            error: Rat::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }
}

impl SequenceSpec {
    pub fn polynomial(coeffs: Vec<Rat>) -> Result<SequenceSpec> {
        let s = SequenceSpec::Polynomial { coeffs };
        s.validate()?;
        Ok(s)
    }

    pub fn geometric(b: Rat) -> Result<SequenceSpec> {
        let s = SequenceSpec::Geometric { b };
        s.validate()?;
        Ok(s)
    }

    pub fn integer_power(b: u64) -> Result<SequenceSpec> {
        let s = SequenceSpec::IntegerPower { b };
        s.validate()?;
        Ok(s)
    }

    pub fn block_double_exponential() -> SequenceSpec {
        SequenceSpec::Block {
            f: BlockSchedule::DoubleExponential,
        }
    }

    pub fn block_table(values: Vec<Rat>) -> Result<SequenceSpec> {
        let s = SequenceSpec::Block {
            f: BlockSchedule::Table { values },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn prime_power(exponents: Vec<Rat>, coeffs: Vec<Rat>, sieve_limit: u64) -> Result<SequenceSpec> {
        let s = SequenceSpec::PrimePower {
            exponents,
            coeffs,
            sieve_limit,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit(terms: Vec<Rat>) -> Result<SequenceSpec> {
        let s = SequenceSpec::Explicit { terms };
        s.validate()?;
        Ok(s)
    }

    /// Construction-time checks: parameter ranges, block non-overlap,
    /// and strict monotonicity on a prefix for the unbounded kinds.
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Polynomial { coeffs } => {
                let degree = coeffs
                    .iter()
                    .rposition(|c| !c.is_zero())
                    .ok_or_else(|| Error::InvalidParameter("polynomial is zero".into()))?;
                if degree == 0 {
                    return Err(Error::InvalidParameter(
                        "polynomial sequence must be nonconstant".into(),
                    ));
                }
                self.check_increasing_prefix(32)
            }
            SequenceSpec::Geometric { b } => {
                if b <= &Rat::one() {
                    return Err(Error::InvalidParameter(format!(
                        "geometric base must exceed 1, got {}",
                        format_rat(b)
                    )));
                }
                Ok(())
            }
            SequenceSpec::IntegerPower { b } => {
                if *b < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "integer power base must be at least 2, got {b}"
                    )));
                }
                Ok(())
            }
            SequenceSpec::Block { f } => match f {
                BlockSchedule::DoubleExponential => Ok(()),
                BlockSchedule::Table { values } => {
                    if values.is_empty() {
                        return Err(Error::InvalidParameter("empty block schedule".into()));
                    }
                    for (i, pair) in values.windows(2).enumerate() {
                        // blocks must not overlap: f(i+1) > f(i) + i
                        let i1 = i as i64 + 1;
                        if pair[1] <= &pair[0] + Rat::from_integer(i1.into()) {
                            return Err(Error::InvalidParameter(format!(
                                "block schedule overlap: f({}) = {} must exceed f({}) + {}",
                                i1 + 1,
                                format_rat(&pair[1]),
                                i1,
                                format_rat(&(&pair[0] + Rat::from_integer(i1.into())))
                            )));
                        }
                    }
                    Ok(())
                }
            },
            SequenceSpec::PrimePower {
                exponents, coeffs, ..
            } => {
                if exponents.is_empty() || exponents.len() != coeffs.len() {
                    return Err(Error::InvalidParameter(
                        "prime_power needs matching nonempty exponent/coefficient lists".into(),
                    ));
                }
                for theta in exponents {
                    if !theta.is_positive() {
                        return Err(Error::InvalidParameter(
                            "prime_power exponents must be positive".into(),
                        ));
                    }
                    if theta.denom() > &BigInt::from(16) || theta.numer() > &BigInt::from(64) {
                        return Err(Error::InvalidParameter(
                            "prime_power exponents limited to numerator <= 64, denominator <= 16"
                                .into(),
                        ));
                    }
                }
                self.check_increasing_prefix(8)
            }
            SequenceSpec::Explicit { terms } => {
                for (i, pair) in terms.windows(2).enumerate() {
                    if pair[1] <= pair[0] {
                        return Err(Error::NotIncreasing {
                            index: i as u64 + 1,
                            prev: format_rat(&pair[0]),
                            next: format_rat(&pair[1]),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    fn check_increasing_prefix(&self, upto: u64) -> Result<()> {
        let mut prev: Option<Rat> = None;
        for n in 1..=upto {
            let t = match self.term(n) {
                Ok(t) => t.value,
                // a short sieve is not a monotonicity violation
                Err(Error::SieveExhausted { .. }) => break,
                Err(e) => return Err(e),
            };
            if let Some(p) = prev {
                if t <= p {
                    return Err(Error::NotIncreasing {
                        index: n - 1,
                        prev: format_rat(&p),
                        next: format_rat(&t),
                    });
                }
            }
            prev = Some(t);
        }
        Ok(())
    }

    /// Short human label for reports.
    pub fn describe(&self) -> String {
        match self {
            SequenceSpec::Polynomial { coeffs } => {
                let body: Vec<String> = coeffs.iter().map(format_rat).collect();
                format!("polynomial[{}]", body.join(","))
            }
            SequenceSpec::Geometric { b } => format!("geometric(b={})", format_rat(b)),
            SequenceSpec::IntegerPower { b } => format!("integer_power(b={b})"),
            SequenceSpec::Block {
                f: BlockSchedule::DoubleExponential,
            } => "block(f=2^(2^i))".into(),
            SequenceSpec::Block {
                f: BlockSchedule::Table { values },
            } => format!("block(table,{} entries)", values.len()),
            SequenceSpec::PrimePower { exponents, .. } => {
                format!("prime_power({} terms)", exponents.len())
            }
            SequenceSpec::Explicit { terms } => format!("explicit({} terms)", terms.len()),
        }
    }

    /// Whether every term is exactly an integer.
    pub fn is_integer_valued(&self) -> bool {
        match self {
            SequenceSpec::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_integer()),
            SequenceSpec::Geometric { b } => b.is_integer(),
            SequenceSpec::IntegerPower { .. } => true,
            SequenceSpec::Block { f } => match f {
                BlockSchedule::DoubleExponential => true,
                BlockSchedule::Table { values } => values.iter().all(|v| v.is_integer()),
            },
            SequenceSpec::PrimePower { .. } => false,
            SequenceSpec::Explicit { terms } => terms.iter().all(|t| t.is_integer()),
        }
    }

    /// Number of terms the spec can produce, when finite.
    pub fn known_len(&self) -> Option<u64> {
        match self {
            SequenceSpec::Explicit { terms } => Some(terms.len() as u64),
            SequenceSpec::Block {
                f: BlockSchedule::Table { values },
            } => {
                let i = values.len() as u64;
                Some(i * (i + 1) / 2)
            }
            _ => None,
        }
    }

    /// Integer base for `a_n = b^n` kinds, when applicable.
    pub fn integer_base(&self) -> Option<u64> {
        match self {
            SequenceSpec::IntegerPower { b } => Some(*b),
            SequenceSpec::Geometric { b } if b.is_integer() => b.numer().to_u64(),
            _ => None,
        }
    }

    /// `a_n` for `n ≥ 1`.
    pub fn term(&self, n: u64) -> Result<Term> {
        if n == 0 {
            return Err(Error::InvalidParameter("term index starts at 1".into()));
        }
        match self {
            SequenceSpec::Polynomial { coeffs } => {
                let x = Rat::from_integer(BigInt::from(n));
                let mut acc = Rat::zero();
                for c in coeffs.iter().rev() {
                    acc = acc * &x + c;
                }
                Ok(Term::exact(acc))
            }
            SequenceSpec::Geometric { b } => {
                let e = i32::try_from(n)
                    .map_err(|_| Error::InvalidParameter(format!("exponent {n} too large")))?;
                Ok(Term::exact(Pow::pow(b.clone(), e)))
            }
            SequenceSpec::IntegerPower { b } => {
                let e = u32::try_from(n)
                    .map_err(|_| Error::InvalidParameter(format!("exponent {n} too large")))?;
                Ok(Term::exact(Rat::from_integer(BigInt::from(*b).pow(e))))
            }
            SequenceSpec::Block { f } => {
                let (i, j) = block_position(n);
                Ok(Term::exact(
                    schedule_value(f, i)? + Rat::from_integer(BigInt::from(j)),
                ))
            }
            SequenceSpec::PrimePower {
                exponents,
                coeffs,
                sieve_limit,
            } => {
                let p = nth_prime(n, *sieve_limit)?;
                let scale = BigInt::from(10u32).pow(POWER_PRECISION_DIGITS);
                let mut value = Rat::zero();
                let mut error = Rat::zero();
                for (theta, alpha) in exponents.iter().zip(coeffs) {
                    if theta.is_integer() {
                        let e = theta.to_integer().to_u32().ok_or_else(|| {
                            Error::InvalidParameter("integer exponent too large".into())
                        })?;
                        value += alpha * Rat::from_integer(BigInt::from(p).pow(e));
                    } else {
                        let (approx, err) = rational_power_approx(p, theta, &scale)?;
                        value += alpha * approx;
                        error += alpha.abs() * err;
                    }
                }
                Ok(Term { value, error })
            }
            SequenceSpec::Explicit { terms } => terms
                .get(n as usize - 1)
                .cloned()
                .map(Term::exact)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "explicit sequence has {} terms, term {n} requested",
                        terms.len()
                    ))
                }),
        }
    }

    /// Exact value of `a_n`; errors if the kind is only approximate.
    pub fn term_value(&self, n: u64) -> Result<Rat> {
        let t = self.term(n)?;
        Ok(t.value)
    }

    /// `⌊a_n⌋`. For approximate kinds this errors when the recorded
    /// error straddles an integer boundary.
    pub fn term_floor(&self, n: u64) -> Result<BigInt> {
        let t = self.term(n)?;
        if !t.error.is_zero() {
            let f = fract(&t.value);
            if f < t.error || Rat::one() - &f <= t.error {
                return Err(Error::PrecisionShortfall(format!(
                    "term {n} is within {} of an integer; its floor is not determined",
                    format_rat(&t.error)
                )));
            }
        }
        Ok(floor_int(&t.value))
    }

    /// `a_n mod m` for every `n ≤ n_terms`, for integer-valued
    /// sequences with `m ≤ 2^32`. Tracks residues only — terms like
    /// `b^n` are never materialized.
    pub fn terms_mod_u64(&self, m: u64, n_terms: u64) -> Option<Vec<u64>> {
        if m == 0 || m > u32::MAX as u64 || !self.is_integer_valued() {
            return None;
        }
        let mut out = Vec::with_capacity(n_terms as usize);
        match self {
            SequenceSpec::Polynomial { coeffs } => {
                let cmods: Vec<u64> = coeffs
                    .iter()
                    .map(|c| {
                        c.to_integer()
                            .mod_floor(&BigInt::from(m))
                            .to_u64()
                            .expect("residue fits")
                    })
                    .collect();
                for n in 1..=n_terms {
                    let x = n % m;
                    let mut acc: u64 = 0;
                    for c in cmods.iter().rev() {
                        acc = ((acc as u128 * x as u128 + *c as u128) % m as u128) as u64;
                    }
                    out.push(acc);
                }
            }
            SequenceSpec::Geometric { .. } | SequenceSpec::IntegerPower { .. } => {
                let b = self.integer_base()? % m;
                let mut r: u64 = 1;
                for _ in 1..=n_terms {
                    r = (r as u128 * b as u128 % m as u128) as u64;
                    out.push(r);
                }
            }
            SequenceSpec::Block { f } => {
                for n in 1..=n_terms {
                    let (i, j) = block_position(n);
                    let base = match f {
                        BlockSchedule::DoubleExponential => {
                            // 2^(2^i) mod m via modular exponentiation
                            let exp = BigUint::one() << i as usize;
                            BigInt::from(2)
                                .modpow(&BigInt::from(exp), &BigInt::from(m))
                                .to_u64()?
                        }
                        BlockSchedule::Table { values } => values
                            .get(i as usize - 1)?
                            .to_integer()
                            .mod_floor(&BigInt::from(m))
                            .to_u64()?,
                    };
                    out.push((base + j % m) % m);
                }
            }
            SequenceSpec::Explicit { terms } => {
                if (n_terms as usize) > terms.len() {
                    return None;
                }
                for t in &terms[..n_terms as usize] {
                    out.push(t.to_integer().mod_floor(&BigInt::from(m)).to_u64()?);
                }
            }
            SequenceSpec::PrimePower { .. } => return None,
        }
        Some(out)
    }
}

/// Block index `i` and offset `j` (1-based) with
/// `n = i(i−1)/2 + j`, `1 ≤ j ≤ i`.
fn block_position(n: u64) -> (u64, u64) {
    let mut i = (8 * n + 1).isqrt().div_ceil(2);
    while i * (i + 1) / 2 < n {
        i += 1;
    }
    while i > 1 && (i - 1) * i / 2 >= n {
        i -= 1;
    }
    let j = n - (i - 1) * i / 2;
    (i, j)
}

fn schedule_value(f: &BlockSchedule, i: u64) -> Result<Rat> {
    match f {
        BlockSchedule::DoubleExponential => {
            if i > DOUBLE_EXP_MAX_INDEX {
                return Err(Error::InvalidParameter(format!(
                    "2^(2^{i}) is too large to materialize (max index {DOUBLE_EXP_MAX_INDEX})"
                )));
            }
            Ok(Rat::from_integer(
                BigInt::from(BigUint::one() << (1usize << i as usize)),
            ))
        }
        BlockSchedule::Table { values } => values.get(i as usize - 1).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "block schedule table has {} entries, block {i} requested",
                values.len()
            ))
        }),
    }
}

/// `p^(u/v)` rounded down to `1/scale`, with the error bound `1/scale`.
fn rational_power_approx(p: u64, theta: &Rat, scale: &BigInt) -> Result<(Rat, Rat)> {
    let u = theta
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidParameter("exponent numerator too large".into()))?;
    let v = theta
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidParameter("exponent denominator too large".into()))?;
    let scale_u: BigUint = scale.to_biguint().expect("scale positive");
    let radicand = BigUint::from(p).pow(u) * scale_u.pow(v);
    let root = radicand.nth_root(v);
    let approx = Rat::new(BigInt::from(root), scale.clone());
    let err = Rat::new(BigInt::one(), scale.clone());
    Ok((approx, err))
}

// ---------------------------------------------------------------------
// Prime table: sieved once, grown on demand, read-only afterwards.
// ---------------------------------------------------------------------

struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

static PRIME_TABLE: OnceLock<Mutex<PrimeTable>> = OnceLock::new();

fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

/// The `n`-th prime (1-based) when it lies within `limit`; the shared
/// table grows monotonically but each request is judged against its
/// own bound.
pub fn nth_prime(n: u64, limit: u64) -> Result<u64> {
    let table = PRIME_TABLE.get_or_init(|| {
        Mutex::new(PrimeTable {
            limit: 0,
            primes: Vec::new(),
        })
    });
    let mut table = table.lock().expect("prime table lock");
    if (table.primes.len() as u64) < n && table.limit < limit {
        table.primes = sieve(limit);
        table.limit = limit;
    }
    let hit = table
        .primes
        .get(n as usize - 1)
        .copied()
        .filter(|p| *p <= limit);
    hit.ok_or_else(|| {
        // p_n < n(ln n + ln ln n) for n ≥ 6
        let nf = (n.max(6)) as f64;
        let required = (nf * (nf.ln() + nf.ln().ln())).ceil() as u64;
        Error::SieveExhausted {
            term: n,
            required,
            limit,
        }
    })
}

// ---------------------------------------------------------------------
// Density and growth diagnostics
// ---------------------------------------------------------------------

/// Best window count of integer parts: maximizes
/// `#(A ∩ {h+1, …, h+n})` over `h` in a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub window_length: u64,
    pub best_offset: String,
    pub count: u64,
    #[serde(with = "rat_str")]
    pub ratio: Rat,
}

/// Maximize the hit count of `{⌊a_k⌋ : k ≤ max_terms}` over windows
/// `{h+1, …, h+n}` with `h ∈ [h_lo, h_hi]`. Enlarging the range never
/// lowers the result.
pub fn banach_density_estimate(
    s: &SequenceSpec,
    n: u64,
    h_lo: &BigInt,
    h_hi: &BigInt,
    max_terms: u64,
) -> Result<DensityEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "window length must be positive".into(),
        ));
    }
    if h_hi < h_lo {
        return Err(Error::InvalidParameter("empty offset range".into()));
    }
    let mut floors: Vec<BigInt> = Vec::with_capacity(max_terms as usize);
    for k in 1..=max_terms {
        floors.push(s.term_floor(k)?);
    }
    floors.sort();
    floors.dedup();

    let count_at = |h: &BigInt| -> u64 {
        let hi = h + BigInt::from(n);
        let below_hi = floors.partition_point(|a| a <= &hi);
        let below_lo = floors.partition_point(|a| a <= h);
        (below_hi - below_lo) as u64
    };

    let mut candidates: Vec<BigInt> = vec![h_lo.clone()];
    for a in &floors {
        let c = a - BigInt::from(n);
        let c = if &c < h_lo {
            h_lo.clone()
        } else if &c > h_hi {
            continue;
        } else {
            c
        };
        candidates.push(c);
    }
    candidates.sort();
    candidates.dedup();

    let mut best_h = h_lo.clone();
    let mut best_count = 0u64;
    for h in candidates {
        let c = count_at(&h);
        if c > best_count {
            best_count = c;
            best_h = h;
        }
    }
    Ok(DensityEstimate {
        window_length: n,
        best_offset: best_h.to_string(),
        count: best_count,
        ratio: Rat::new(BigInt::from(best_count), BigInt::from(n)),
    })
}

/// Consecutive-ratio profile with a 1-separation flag.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    /// `a_{n+1}/a_n` for `n = 1 … N−1`.
    pub ratios: Vec<Rat>,
    /// Whether `a_{n+1} − a_n ≥ 1` held for every tested `n`.
    pub one_separated: bool,
    /// False when any term carried a nonzero error bound.
    pub exact: bool,
}

pub fn growth_profile(s: &SequenceSpec, n_terms: u64) -> Result<GrowthProfile> {
    if n_terms < 2 {
        return Err(Error::InvalidParameter(
            "growth profile needs at least two terms".into(),
        ));
    }
    let mut ratios = Vec::with_capacity(n_terms as usize - 1);
    let mut one_separated = true;
    let mut exact = true;
    let mut prev = s.term(1)?;
    exact &= prev.is_exact();
    for n in 2..=n_terms {
        let t = s.term(n)?;
        exact &= t.is_exact();
        if t.value <= prev.value {
            return Err(Error::NotIncreasing {
                index: n - 1,
                prev: format_rat(&prev.value),
                next: format_rat(&t.value),
            });
        }
        if prev.value.is_zero() {
            return Err(Error::InvalidParameter(
                "growth ratio undefined at a zero term".into(),
            ));
        }
        ratios.push(&t.value / &prev.value);
        if &t.value - &prev.value < Rat::one() {
            one_separated = false;
        }
        prev = t;
    }
    Ok(GrowthProfile {
        ratios,
        one_separated,
        exact,
    })
}
