//! Builders for the explicit avoider sets: large subsets of the line
//! that dodge every affine copy of a prescribed sequence family.
//!
//! Each [`AvoiderSet`] exposes an exact membership predicate and a
//! window materializer producing an [`IntervalSet`] for the largeness
//! sweep. Membership follows the closed-boundary conventions of the
//! defining inequalities while materialization is half-open; the two
//! agree away from a measure-zero set of boundary points.
//!
//! Four kinds are built:
//!
//! * `lemma2` — `T ∩ yT` for the period-one strip
//!   `T = {⟨x⟩ ≤ 1−α}` and a dilation `y > 1`; `(1−ε)`-large.
//! * `power_strip` — the strip `{0 ≤ ⟨x⟩ ≤ 1/ℓ(b) − ε}` keyed to the
//!   reduced length `ℓ(b)` of a rational base `b`.
//! * `integer_power` — the strip `{0 < ⟨x⟩ < 1/b − ε/2}` minus a
//!   doubly-exponential ladder of fractional bins; membership decides
//!   the ladder block by bit length alone, so it runs in time
//!   polylogarithmic in `|x|`.
//! * `enumeration` — the complement of four stripe systems that meet
//!   every translated and dilated copy from a countable dilation list,
//!   driven by a pairing-function enumeration and a greedy subsequence
//!   satisfying two growth inequalities.

use num_bigint::BigInt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet, PeriodicSet, Window};
use crate::rat::{floor_int, format_rat, fract, rat_str, rat_vec_str, Rat};
use crate::sequences::SequenceSpec;

/// Widest window (in integer count) the integer-power materializer will
/// enumerate stripes for.
const MAX_STRIPE_WINDOW: u64 = 2_000_000;

/// Largest base-sequence index the greedy subsequence search will
/// bracket before giving up.
const MAX_GREEDY_INDEX: u64 = 1 << 40;

// ---------------------------------------------------------------------
// Pairing
// ---------------------------------------------------------------------

/// Diagonal enumeration of `ℕ × (ℕ ∪ {0})`:
/// `f(m, n) = (m+n)(m+n−1)/2 + m`, a bijection onto `ℕ`.
pub fn pair(m: u64, n: u64) -> u64 {
    debug_assert!(m >= 1);
    let s = m as u128 + n as u128;
    (s * (s - 1) / 2 + m as u128) as u64
}

/// Inverse of [`pair`]: the unique `(m, n)` with `f(m, n) = k`.
pub fn unpair(k: u64) -> (u64, u64) {
    debug_assert!(k >= 1);
    let kk = k as u128;
    let mut s = (8 * kk + 1).isqrt().div_ceil(2);
    while s * (s - 1) / 2 >= kk {
        s -= 1;
    }
    while s * (s + 1) / 2 < kk {
        s += 1;
    }
    let m = kk - s * (s - 1) / 2;
    ((m) as u64, (s - m) as u64)
}

/// Reduced length of a rational `b = p/q > 1` in lowest terms:
/// `max{p, q} = p`. Integers give back themselves.
pub fn reduced_length_rational(b: &Rat) -> Result<BigInt> {
    if b <= &Rat::one() {
        return Err(Error::InvalidParameter(format!(
            "reduced length needs b > 1, got {}",
            format_rat(b)
        )));
    }
    Ok(b.numer().clone())
}

// ---------------------------------------------------------------------
// Avoider sets
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum AvoiderKind {
    Lemma2 {
        epsilon: Rat,
        y: Rat,
        alpha: Rat,
        beta: Rat,
        y_provenance: Option<String>,
    },
    PowerStrip {
        b: Rat,
        ell: BigInt,
        epsilon: Rat,
        /// kept strip width `1/ℓ(b) − ε`
        width: Rat,
    },
    IntegerPower {
        b: u64,
        epsilon: Rat,
        /// number of fractional bins `N`, the least with `1/N ≤ ε/2`
        bins: u64,
        /// kept strip width `1/b − ε/2`
        strip: Rat,
    },
    Enumeration(Box<EnumerationAvoider>),
}

/// A constructed large set: parameters, an exact membership predicate,
/// and a window materializer. The recorded `target` is the largeness
/// level the construction guarantees.
#[derive(Debug, Clone)]
pub struct AvoiderSet {
    kind: AvoiderKind,
    target: Rat,
}

/// Serializable descriptor (kind + parameters + provenance metadata).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AvoiderDescriptor {
    Lemma2 {
        #[serde(with = "rat_str")]
        epsilon: Rat,
        #[serde(with = "rat_str")]
        y: Rat,
        #[serde(with = "rat_str")]
        alpha: Rat,
        #[serde(with = "rat_str")]
        beta: Rat,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        y_provenance: Option<String>,
        #[serde(with = "rat_str")]
        target: Rat,
    },
    PowerStrip {
        #[serde(with = "rat_str")]
        b: Rat,
        ell: String,
        #[serde(with = "rat_str")]
        epsilon: Rat,
        #[serde(with = "rat_str")]
        width: Rat,
        #[serde(with = "rat_str")]
        target: Rat,
    },
    IntegerPower {
        b: u64,
        #[serde(with = "rat_str")]
        epsilon: Rat,
        bins: u64,
        #[serde(with = "rat_str")]
        strip: Rat,
        #[serde(with = "rat_str")]
        target: Rat,
    },
    Enumeration {
        #[serde(with = "rat_str")]
        epsilon: Rat,
        bins: u64,
        depth: u64,
        sequence: SequenceSpec,
        #[serde(with = "rat_vec_str")]
        dilations: Vec<Rat>,
        stripe_count: usize,
        #[serde(with = "crate::rat::rat_opt_str", skip_serializing_if = "Option::is_none", default)]
        safe_lo: Option<Rat>,
        #[serde(with = "crate::rat::rat_opt_str", skip_serializing_if = "Option::is_none", default)]
        safe_hi: Option<Rat>,
        #[serde(with = "rat_str")]
        target: Rat,
    },
}

impl AvoiderSet {
    /// `T ∩ yT` with `T = {⟨x⟩ ≤ 1−α}`, `β = ε/(1+y)` (the extremal
    /// admissible choice, equal to `1 − (1−ε+y)/(1+y)`) and `α = β/2`.
    pub fn lemma2(epsilon: Rat, y: Rat, y_provenance: Option<String>) -> Result<AvoiderSet> {
        if !epsilon.is_positive() || epsilon > Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {}",
                format_rat(&epsilon)
            )));
        }
        if y <= Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "dilation y must exceed 1, got {}",
                format_rat(&y)
            )));
        }
        let beta = &epsilon / (Rat::one() + &y);
        let alpha = &beta / Rat::from_integer(2.into());
        let target = Rat::one() - &epsilon;
        Ok(AvoiderSet {
            kind: AvoiderKind::Lemma2 {
                epsilon,
                y,
                alpha,
                beta,
                y_provenance,
            },
            target,
        })
    }

    /// The strip `{0 ≤ ⟨x⟩ ≤ 1/ℓ(b) − ε}` for rational `b > 1`.
    pub fn power_strip(b: Rat, epsilon: Rat) -> Result<AvoiderSet> {
        let ell = reduced_length_rational(&b)?;
        let inv_ell = Rat::new(BigInt::one(), ell.clone());
        if !epsilon.is_positive() || epsilon >= inv_ell {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/{}), got {}",
                ell,
                format_rat(&epsilon)
            )));
        }
        let width = &inv_ell - &epsilon;
        Ok(AvoiderSet {
            kind: AvoiderKind::PowerStrip {
                b,
                ell,
                epsilon,
                width: width.clone(),
            },
            target: width,
        })
    }

    /// The strip `{0 < ⟨x⟩ < 1/b − ε/2}` minus the fractional-bin
    /// ladder over the doubly-exponential blocks, for integer `b ≥ 2`.
    pub fn integer_power(b: u64, epsilon: Rat) -> Result<AvoiderSet> {
        if b < 2 {
            return Err(Error::InvalidParameter(format!(
                "integer base must be at least 2, got {b}"
            )));
        }
        let inv_b = Rat::new(BigInt::one(), BigInt::from(b));
        if !epsilon.is_positive() || epsilon >= inv_b {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/{b}), got {}",
                format_rat(&epsilon)
            )));
        }
        // least N with 1/N <= eps/2; the per-unit stripe loss 1/N then
        // stays within the eps/2 budget
        let two_over_eps = Rat::from_integer(2.into()) / &epsilon;
        let bins = ceil_rat(&two_over_eps)
            .to_u64()
            .ok_or_else(|| Error::InvalidParameter("epsilon too small".into()))?;
        let strip = &inv_b - &epsilon / Rat::from_integer(2.into());
        let target = inv_b - &epsilon;
        Ok(AvoiderSet {
            kind: AvoiderKind::IntegerPower {
                b,
                epsilon,
                bins,
                strip,
            },
            target,
        })
    }

    /// Complement of the stripe systems covering every copy
    /// `b·{a_n} + t` with `b` from a countable dilation list, built to
    /// enumeration depth `depth`.
    pub fn enumeration(
        seq: SequenceSpec,
        dilations: &[Rat],
        epsilon: Rat,
        depth: u64,
    ) -> Result<AvoiderSet> {
        let inner = EnumerationAvoider::build(seq, dilations, epsilon, depth)?;
        let target = Rat::one() - &inner.epsilon;
        Ok(AvoiderSet {
            kind: AvoiderKind::Enumeration(Box::new(inner)),
            target,
        })
    }

    pub fn kind(&self) -> &AvoiderKind {
        &self.kind
    }

    pub fn as_enumeration(&self) -> Option<&EnumerationAvoider> {
        match &self.kind {
            AvoiderKind::Enumeration(e) => Some(e),
            _ => None,
        }
    }

    /// The largeness level this construction guarantees.
    pub fn target(&self) -> &Rat {
        &self.target
    }

    /// Whether membership depends on `⟨x⟩` alone (period-one torus
    /// predicate). Needed for the periodicity upgrade in witness
    /// searches.
    pub fn is_torus_periodic(&self) -> bool {
        matches!(self.kind, AvoiderKind::PowerStrip { .. })
    }

    /// Exact membership. For the enumeration kind, points beyond the
    /// materialized safe region that are not inside a known stripe
    /// yield a depth error rather than a silent verdict.
    pub fn contains(&self, x: &Rat) -> Result<bool> {
        match &self.kind {
            AvoiderKind::Lemma2 { y, alpha, .. } => {
                let keep = Rat::one() - alpha;
                Ok(fract(x) <= keep && fract(&(x / y)) <= keep)
            }
            AvoiderKind::PowerStrip { width, .. } => Ok(fract(x) <= *width),
            AvoiderKind::IntegerPower { bins, strip, .. } => {
                let f = fract(x);
                if !(f.is_positive() && &f < strip) {
                    return Ok(false);
                }
                let (m, phi) = split_abs(x);
                Ok(!in_bin_ladder(&m, &phi, *bins))
            }
            AvoiderKind::Enumeration(e) => e.contains(x),
        }
    }

    /// When `x` is excluded, how far its deciding quantity sits from
    /// the membership boundary; `None` for members.
    pub fn witness_margin(&self, x: &Rat) -> Result<Option<Rat>> {
        if self.contains(x)? {
            return Ok(None);
        }
        let margin = match &self.kind {
            AvoiderKind::Lemma2 { y, alpha, .. } => {
                let keep = Rat::one() - alpha;
                let mut best: Option<Rat> = None;
                for f in [fract(x), fract(&(x / y))] {
                    if f > keep {
                        let d = min_rat(&f - &keep, Rat::one() - &f);
                        if best.as_ref().is_none_or(|b| &d > b) {
                            best = Some(d);
                        }
                    }
                }
                best
            }
            AvoiderKind::PowerStrip { width, .. } => {
                let f = fract(x);
                Some(min_rat(&f - width, Rat::one() - &f))
            }
            AvoiderKind::IntegerPower { bins, strip, .. } => {
                let f = fract(x);
                if f.is_zero() {
                    Some(Rat::zero())
                } else if &f >= strip {
                    Some(min_rat(&f - strip, Rat::one() - &f))
                } else {
                    // removed by the bin ladder: distance to the bin edges
                    let (_, phi) = split_abs(x);
                    let i = floor_int(&(&phi * Rat::from_integer((*bins).into())));
                    let lo = Rat::new(i.clone(), BigInt::from(*bins));
                    let hi = Rat::new(i + 1, BigInt::from(*bins));
                    Some(min_rat(&phi - &lo, &hi - &phi))
                }
            }
            AvoiderKind::Enumeration(e) => e.stripes.parts().iter().find_map(|p| {
                p.contains(x)
                    .then(|| min_rat(x - p.lo(), p.hi() - x))
            }),
        };
        Ok(margin)
    }

    /// Exact interval picture of the set on a window.
    pub fn materialize(&self, w: &Window) -> Result<IntervalSet> {
        match &self.kind {
            AvoiderKind::Lemma2 { y, alpha, .. } => {
                let keep = Rat::one() - alpha;
                let t_strip = PeriodicSet::strip(Rat::one(), keep)?;
                let outer = t_strip.tile(w.lo(), w.hi());
                let inner_lo = w.lo() / y - Rat::one();
                let inner_hi = w.hi() / y + Rat::one();
                let scaled = t_strip
                    .tile(&inner_lo, &inner_hi)
                    .affine_image(y, &Rat::zero())?;
                Ok(outer.intersect(&scaled))
            }
            AvoiderKind::PowerStrip { width, .. } => {
                Ok(PeriodicSet::strip(Rat::one(), width.clone())?.tile(w.lo(), w.hi()))
            }
            AvoiderKind::IntegerPower { bins, strip, .. } => {
                let kept = PeriodicSet::strip(Rat::one(), strip.clone())?.tile(w.lo(), w.hi());
                let stripes = bin_ladder_stripes(w, *bins)?;
                Ok(kept.difference(&stripes))
            }
            AvoiderKind::Enumeration(e) => e.materialize(w),
        }
    }

    pub fn descriptor(&self) -> AvoiderDescriptor {
        match &self.kind {
            AvoiderKind::Lemma2 {
                epsilon,
                y,
                alpha,
                beta,
                y_provenance,
            } => AvoiderDescriptor::Lemma2 {
                epsilon: epsilon.clone(),
                y: y.clone(),
                alpha: alpha.clone(),
                beta: beta.clone(),
                y_provenance: y_provenance.clone(),
                target: self.target.clone(),
            },
            AvoiderKind::PowerStrip {
                b,
                ell,
                epsilon,
                width,
            } => AvoiderDescriptor::PowerStrip {
                b: b.clone(),
                ell: ell.to_string(),
                epsilon: epsilon.clone(),
                width: width.clone(),
                target: self.target.clone(),
            },
            AvoiderKind::IntegerPower {
                b,
                epsilon,
                bins,
                strip,
            } => AvoiderDescriptor::IntegerPower {
                b: *b,
                epsilon: epsilon.clone(),
                bins: *bins,
                strip: strip.clone(),
                target: self.target.clone(),
            },
            AvoiderKind::Enumeration(e) => AvoiderDescriptor::Enumeration {
                epsilon: e.epsilon.clone(),
                bins: e.bins,
                depth: e.depth,
                sequence: e.sequence.clone(),
                dilations: e.dilations.clone(),
                stripe_count: e.stripes.parts().len(),
                safe_lo: e.safe_lo.clone(),
                safe_hi: e.safe_hi.clone(),
                target: self.target.clone(),
            },
        }
    }
}

/// Membership of the integer-power ladder set as a standalone check.
pub fn integer_power_membership(b: u64, epsilon: &Rat, x: &Rat) -> Result<bool> {
    AvoiderSet::integer_power(b, epsilon.clone())?.contains(x)
}

fn min_rat(a: Rat, b: Rat) -> Rat {
    if a < b {
        a
    } else {
        b
    }
}

fn ceil_rat(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

/// `(⌊|x|⌋, ⟨|x|⟩)`.
fn split_abs(x: &Rat) -> (BigInt, Rat) {
    let a = x.abs();
    let m = floor_int(&a);
    let phi = a - Rat::from_integer(m.clone());
    (m, phi)
}

// ---------------------------------------------------------------------
// Integer-power bin ladder
// ---------------------------------------------------------------------

/// Block index `j` with `2^(2^j) ≤ m < 2^(2^(j+1))`, decided by the bit
/// length of `m` alone (never materializing the block bounds). The
/// half-open blocks partition the integers `≥ 2`, so every unit
/// interval carries at most one removed bin.
fn ladder_block(m: &BigInt) -> Option<u64> {
    if m < &BigInt::from(2) {
        return None;
    }
    let e = m.bits() - 1; // m in [2^e, 2^(e+1)), e >= 1
    Some(e.ilog2() as u64)
}

/// Is `m + phi` inside the removed bin `[m + i/N, m + (i+1)/N)` with
/// `i = j mod N` for the block containing `m`?
fn in_bin_ladder(m: &BigInt, phi: &Rat, bins: u64) -> bool {
    ladder_block(m).is_some_and(|j| {
        let i = j % bins;
        let lo = Rat::new(BigInt::from(i), BigInt::from(bins));
        let hi = Rat::new(BigInt::from(i + 1), BigInt::from(bins));
        phi >= &lo && phi < &hi
    })
}

/// All removed stripes intersecting the window, on both half-lines.
fn bin_ladder_stripes(w: &Window, bins: u64) -> Result<IntervalSet> {
    let width = w.width();
    if width > Rat::from_integer(BigInt::from(MAX_STRIPE_WINDOW)) {
        return Err(Error::InvalidParameter(format!(
            "window {w} too wide to enumerate stripes (max {MAX_STRIPE_WINDOW})"
        )));
    }
    let mut raw: Vec<(Rat, Rat)> = Vec::new();
    let mut push_clipped = |lo: Rat, hi: Rat| {
        let lo = if &lo > w.lo() { lo } else { w.lo().clone() };
        let hi = if &hi < w.hi() { hi } else { w.hi().clone() };
        if lo < hi {
            raw.push((lo, hi));
        }
    };
    // positive side: integers m with [m, m+1) meeting the window
    let mut m = floor_int(w.lo()).max(BigInt::zero());
    let m_hi = floor_int(w.hi());
    while m <= m_hi {
        if let Some(j) = ladder_block(&m) {
            let i = j % bins;
            let base = Rat::from_integer(m.clone());
            let lo = &base + Rat::new(BigInt::from(i), BigInt::from(bins));
            let hi = &base + Rat::new(BigInt::from(i + 1), BigInt::from(bins));
            push_clipped(lo, hi);
        }
        m += 1;
    }
    // negative side: reflections of the positive-side stripes
    if w.lo().is_negative() {
        let mut m = BigInt::zero();
        let m_hi = ceil_rat(&(-w.lo()));
        while m <= m_hi {
            if let Some(j) = ladder_block(&m) {
                let i = j % bins;
                let base = Rat::from_integer(m.clone());
                let hi = -(&base + Rat::new(BigInt::from(i), BigInt::from(bins)));
                let lo = -(&base + Rat::new(BigInt::from(i + 1), BigInt::from(bins)));
                push_clipped(lo, hi);
            }
            m += 1;
        }
    }
    Ok(IntervalSet::normalize(raw))
}

// ---------------------------------------------------------------------
// Enumeration avoider
// ---------------------------------------------------------------------

/// One of the four stripe systems: a sign class of dilations crossed
/// with a sign class of translations.
#[derive(Debug, Clone)]
pub struct StripeFamily {
    positive_b: bool,
    nonneg_t: bool,
    /// entries of the dilation list with this sign, enumeration order
    dilations: Vec<Rat>,
    /// `selected[l-1]` = index into the base sequence for abstract
    /// index `l`
    selected: Vec<u64>,
    /// `terms[l-1]` = the selected term value
    terms: Vec<Rat>,
    /// stripes in block-major order: `(k-1)·N + i`
    stripes: Vec<Interval>,
    /// base of the first stripe of block `depth+1` (the nearest
    /// unmaterialized stripe)
    next_block_base: Rat,
    bins: u64,
}

impl StripeFamily {
    pub fn positive_b(&self) -> bool {
        self.positive_b
    }

    pub fn nonneg_t(&self) -> bool {
        self.nonneg_t
    }

    pub fn dilations(&self) -> &[Rat] {
        &self.dilations
    }

    /// Index into the base sequence chosen for abstract index `l ≥ 1`.
    pub fn subsequence_index(&self, l: u64) -> Option<u64> {
        self.selected.get(l as usize - 1).copied()
    }

    pub fn selected_term(&self, l: u64) -> Option<&Rat> {
        self.terms.get(l as usize - 1)
    }

    pub fn stripe(&self, k: u64, i: u64) -> Option<&Interval> {
        if k == 0 || i >= self.bins {
            return None;
        }
        self.stripes.get(((k - 1) * self.bins + i) as usize)
    }

    pub fn stripes(&self) -> &[Interval] {
        &self.stripes
    }

    pub fn next_block_base(&self) -> &Rat {
        &self.next_block_base
    }

    /// Signed integer part of the translations this family covers for
    /// enumeration coordinate `n`.
    fn signed_offset(&self, n: u64) -> Rat {
        if self.nonneg_t {
            Rat::from_integer(n.into())
        } else {
            -Rat::from_integer(BigInt::from(n) + 1)
        }
    }

    /// The guaranteed covered point `b_m·a'_{f(m,n)·N+i} + t` for any
    /// translation `t` with the given integer part coordinate `n` and
    /// fractional part `theta ∈ [i/N, (i+1)/N)`.
    pub fn guaranteed_point(&self, m: u64, n: u64, i: u64, theta: &Rat) -> Result<Rat> {
        if m == 0 || m as usize > self.dilations.len() {
            return Err(Error::InvalidParameter(format!(
                "dilation index {m} out of range (1..={})",
                self.dilations.len()
            )));
        }
        if i >= self.bins {
            return Err(Error::InvalidParameter(format!(
                "fractional bin {i} out of range (N = {})",
                self.bins
            )));
        }
        let lo = Rat::new(BigInt::from(i), BigInt::from(self.bins));
        let hi = Rat::new(BigInt::from(i + 1), BigInt::from(self.bins));
        if theta < &lo || theta >= &hi {
            return Err(Error::InvalidParameter(format!(
                "theta {} outside bin [{}, {})",
                format_rat(theta),
                format_rat(&lo),
                format_rat(&hi)
            )));
        }
        let k = pair(m, n);
        let l = k * self.bins + i;
        let term = self.selected_term(l).ok_or_else(|| {
            Error::DepthExceeded(format!(
                "pair index {k} needs abstract index {l}, materialized up to {}",
                self.terms.len()
            ))
        })?;
        let b = &self.dilations[m as usize - 1];
        let offset = self.signed_offset(n);
        Ok(b * term + offset + theta)
    }
}

/// The enumeration construction: stripe systems per sign family plus
/// the region where the finite-depth truncation is provably complete.
#[derive(Debug, Clone)]
pub struct EnumerationAvoider {
    epsilon: Rat,
    bins: u64,
    depth: u64,
    sequence: SequenceSpec,
    dilations: Vec<Rat>,
    families: Vec<StripeFamily>,
    stripes: IntervalSet,
    safe_lo: Option<Rat>,
    safe_hi: Option<Rat>,
}

impl EnumerationAvoider {
    fn build(
        seq: SequenceSpec,
        dilations: &[Rat],
        epsilon: Rat,
        depth: u64,
    ) -> Result<EnumerationAvoider> {
        if !epsilon.is_positive() || epsilon > Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {}",
                format_rat(&epsilon)
            )));
        }
        if dilations.iter().any(|b| b.is_zero()) {
            return Err(Error::InvalidParameter(
                "dilation list must not contain zero".into(),
            ));
        }
        if dilations.is_empty() {
            return Err(Error::InvalidParameter("dilation list is empty".into()));
        }
        seq.validate()?;
        if !seq.term(1)?.is_exact() {
            return Err(Error::InvalidParameter(
                "enumeration avoider needs an exactly evaluable sequence".into(),
            ));
        }
        // epsilon >= 4/N, so N = ceil(4/eps)
        let bins = ceil_rat(&(Rat::from_integer(4.into()) / &epsilon))
            .to_u64()
            .ok_or_else(|| Error::InvalidParameter("epsilon too small".into()))?;

        let positives: Vec<Rat> = dilations.iter().filter(|b| b.is_positive()).cloned().collect();
        let negatives: Vec<Rat> = dilations.iter().filter(|b| b.is_negative()).cloned().collect();

        let mut families = Vec::new();
        for (side, positive_b) in [(&positives, true), (&negatives, false)] {
            if side.is_empty() {
                continue;
            }
            for nonneg_t in [true, false] {
                families.push(build_family(
                    &seq, side, positive_b, nonneg_t, bins, depth,
                )?);
            }
        }

        let mut raw = Vec::new();
        for fam in &families {
            for s in &fam.stripes {
                raw.push((s.lo().clone(), s.hi().clone()));
            }
        }
        let stripes = IntervalSet::normalize(raw);

        let inv_bins = Rat::new(BigInt::one(), BigInt::from(bins));
        let safe_hi = families
            .iter()
            .filter(|f| f.positive_b)
            .map(|f| f.next_block_base.clone())
            .min();
        let safe_lo = families
            .iter()
            .filter(|f| !f.positive_b)
            .map(|f| &f.next_block_base + &inv_bins)
            .max();

        Ok(EnumerationAvoider {
            epsilon,
            bins,
            depth,
            sequence: seq,
            dilations: dilations.to_vec(),
            families,
            stripes,
            safe_lo,
            safe_hi,
        })
    }

    pub fn bins(&self) -> u64 {
        self.bins
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn sequence(&self) -> &SequenceSpec {
        &self.sequence
    }

    pub fn families(&self) -> &[StripeFamily] {
        &self.families
    }

    pub fn family(&self, positive_b: bool, nonneg_t: bool) -> Option<&StripeFamily> {
        self.families
            .iter()
            .find(|f| f.positive_b == positive_b && f.nonneg_t == nonneg_t)
    }

    /// Region on which the depth-truncated stripe system is complete.
    pub fn safe_region(&self) -> (Option<&Rat>, Option<&Rat>) {
        (self.safe_lo.as_ref(), self.safe_hi.as_ref())
    }

    fn within_safe(&self, x: &Rat) -> bool {
        self.safe_hi.as_ref().is_none_or(|hi| x < hi)
            && self.safe_lo.as_ref().is_none_or(|lo| x >= lo)
    }

    pub fn contains(&self, x: &Rat) -> Result<bool> {
        if self.stripes.contains(x) {
            return Ok(false);
        }
        if self.within_safe(x) {
            Ok(true)
        } else {
            Err(Error::DepthExceeded(format!(
                "{} lies beyond the depth-{} safe region; extend the depth",
                format_rat(x),
                self.depth
            )))
        }
    }

    pub fn materialize(&self, w: &Window) -> Result<IntervalSet> {
        let lo_ok = self.safe_lo.as_ref().is_none_or(|lo| w.lo() >= lo);
        let hi_ok = self.safe_hi.as_ref().is_none_or(|hi| w.hi() <= hi);
        if !(lo_ok && hi_ok) {
            let lo = self
                .safe_lo
                .as_ref()
                .map_or("-inf".to_string(), format_rat);
            let hi = self
                .safe_hi
                .as_ref()
                .map_or("+inf".to_string(), format_rat);
            return Err(Error::DepthExceeded(format!(
                "window {w} exceeds the depth-{} safe region [{lo}, {hi}); extend the depth",
                self.depth
            )));
        }
        Ok(w.as_set().difference(&self.stripes))
    }
}

/// Greedy subsequence selection and stripe layout for one family.
///
/// Abstract indices run `l = 1, 2, …`; block `k` (a pairing index) owns
/// `l = kN+i` for `i = 0 … N−1`. Within a block the stripe bases must
/// advance by more than 2 in the marching direction, and the first
/// stripe of a block must clear the previous block's last base by more
/// than 2. A finite dilation list bounds the usable enumeration depth;
/// the first future block whose dilation index exists supplies the
/// safe-region boundary.
fn build_family(
    seq: &SequenceSpec,
    dilations: &[Rat],
    positive_b: bool,
    nonneg_t: bool,
    bins: u64,
    depth: u64,
) -> Result<StripeFamily> {
    let side_len = dilations.len() as u64;
    for k in 1..=depth {
        let (m, _) = unpair(k);
        if m > side_len {
            return Err(Error::InvalidParameter(format!(
                "depth {depth} reaches pair index {k} = (m={m}, ..), but only {side_len} \
                 dilations of this sign were given; supply at least {m} or lower the depth"
            )));
        }
    }
    // first existing block beyond the materialized depth; blocks whose
    // dilation index exceeds the finite list simply do not exist
    let mut safe_k = depth + 1;
    while unpair(safe_k).0 > side_len {
        safe_k += 1;
    }

    let signed_offset = |n: u64| -> Rat {
        if nonneg_t {
            Rat::from_integer(n.into())
        } else {
            -Rat::from_integer(BigInt::from(n) + 1)
        }
    };
    let coords = |k: u64| -> (Rat, Rat) {
        let (m, n) = unpair(k);
        (dilations[m as usize - 1].clone(), signed_offset(n))
    };

    let mut selected: Vec<u64> = Vec::new();
    let mut terms: Vec<Rat> = Vec::new();
    let mut cursor: u64 = 0; // last consumed original index

    let pick = |terms: &mut Vec<Rat>,
                    selected: &mut Vec<u64>,
                    cursor: &mut u64,
                    bound: Option<Rat>|
     -> Result<()> {
        // effective bound folds in strict monotonicity
        let eff = match (terms.last(), bound) {
            (None, b) => b,
            (Some(p), None) => Some(p.clone()),
            (Some(p), Some(b)) => Some(if &b > p { b } else { p.clone() }),
        };
        let idx = match eff {
            None => *cursor + 1,
            Some(eb) => least_term_above(seq, *cursor, &eb)?,
        };
        selected.push(idx);
        terms.push(seq.term_value(idx)?);
        *cursor = idx;
        Ok(())
    };

    // jump bound: the next block's first base must clear the previous
    // block's last base by more than 2 in the marching direction
    let jump_bound = |terms: &[Rat], k: u64, prev_k: u64| -> Rat {
        let (b, n_off) = coords(k);
        let (pb, pn_off) = coords(prev_k);
        let prev = terms.last().expect("previous term exists");
        let prev_base = &pb * prev + &pn_off;
        let rhs = if positive_b {
            prev_base + Rat::from_integer(2.into()) - &n_off
        } else {
            prev_base - Rat::from_integer(2.into()) - &n_off
        };
        rhs / b // dividing by a negative b flips the inequality
    };

    // plain prefix l = 1 … N−1 (not owned by any block)
    for _ in 1..bins {
        pick(&mut terms, &mut selected, &mut cursor, None)?;
    }
    // blocks k = 1 … depth
    for k in 1..=depth {
        let (b, _) = coords(k);
        for i in 0..bins {
            let bound = if i > 0 {
                let prev = terms.last().expect("previous term exists");
                Some(prev + Rat::from_integer(2.into()) / b.abs())
            } else if k >= 2 {
                Some(jump_bound(&terms, k, k - 1))
            } else {
                None
            };
            pick(&mut terms, &mut selected, &mut cursor, bound)?;
        }
    }
    // first index of the safe block, for the truncation boundary
    let safe_bound = if depth >= 1 {
        Some(jump_bound(&terms, safe_k, depth))
    } else {
        None
    };
    pick(&mut terms, &mut selected, &mut cursor, safe_bound)?;
    let (safe_b, safe_off) = coords(safe_k);
    let next_block_base = &safe_b * terms.last().expect("safe term exists") + &safe_off;
    // the safe pick is not part of the abstract index layout
    terms.pop();
    selected.pop();

    // stripes for blocks 1..=depth, block-major
    let mut stripes = Vec::with_capacity((depth * bins) as usize);
    for k in 1..=depth {
        let (b, n_off) = coords(k);
        for i in 0..bins {
            let l = k * bins + i;
            let base = &b * &terms[l as usize - 1] + &n_off;
            let lo = &base + Rat::new(BigInt::from(i), BigInt::from(bins));
            let hi = &base + Rat::new(BigInt::from(i + 1), BigInt::from(bins));
            stripes.push(Interval::new(lo, hi).expect("stripe has positive width"));
        }
    }

    Ok(StripeFamily {
        positive_b,
        nonneg_t,
        dilations: dilations.to_vec(),
        selected,
        terms,
        stripes,
        next_block_base,
        bins,
    })
}

/// Least index `idx > after` with `a_idx > bound`, by exponential
/// bracketing plus bisection on the strictly increasing sequence.
fn least_term_above(seq: &SequenceSpec, after: u64, bound: &Rat) -> Result<u64> {
    let hard_cap = seq.known_len().unwrap_or(MAX_GREEDY_INDEX);
    if after >= hard_cap {
        return Err(Error::DepthExceeded(format!(
            "sequence exhausted at index {hard_cap} during greedy subsequence selection"
        )));
    }
    let mut lo = after; // invariant: lo == after or a_lo <= bound
    let mut hi = after + 1;
    let mut step = 1u64;
    loop {
        if hi >= hard_cap {
            hi = hard_cap;
            if seq.term_value(hi)? <= *bound {
                return Err(Error::DepthExceeded(format!(
                    "sequence provides no term above {} within its first {hard_cap} terms",
                    format_rat(bound)
                )));
            }
            break;
        }
        if seq.term_value(hi)? > *bound {
            break;
        }
        lo = hi;
        step = step.saturating_mul(2);
        hi = after.saturating_add(step);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if seq.term_value(mid)? > *bound {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
