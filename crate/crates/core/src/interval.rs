//! Exact arithmetic on finite unions of half-open intervals.
//!
//! [`IntervalSet`] is the universal set representation: a sorted list of
//! disjoint, non-adjacent `[lo, hi)` pieces with rational endpoints.
//! [`PeriodicSet`] tiles a pattern along the line and materializes it on
//! a window. [`min_unit_window_measure`] computes the exact minimum of
//! `|S ∩ [a, a+1]|` over a window by evaluating the piecewise-linear
//! window measure at its breakpoints only — no sampling anywhere.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rat::{floor_int, format_rat, Rat};

/// Half-open interval `[lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl Interval {
    /// `None` when `lo >= hi` (empty intervals are never stored).
    pub fn new(lo: Rat, hi: Rat) -> Option<Interval> {
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn length(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x < &self.hi
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {})", format_rat(&self.lo), format_rat(&self.hi))
    }
}

/// Set-algebra mode for [`boolean_combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

/// Finite disjoint union of half-open intervals, sorted by `lo`, with
/// strict gaps between consecutive parts (adjacent parts are merged).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet { parts: Vec::new() }
    }

    /// Canonicalize an arbitrary list of endpoint pairs: pairs with
    /// `lo >= hi` are dropped, overlapping and adjacent pieces merged.
    /// Idempotent.
    pub fn normalize(raw: impl IntoIterator<Item = (Rat, Rat)>) -> IntervalSet {
        let mut pieces: Vec<(Rat, Rat)> = raw.into_iter().filter(|(lo, hi)| lo < hi).collect();
        pieces.sort();
        let mut parts: Vec<Interval> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match parts.last_mut() {
                Some(last) if lo <= last.hi => {
                    if hi > last.hi {
                        last.hi = hi;
                    }
                }
                _ => parts.push(Interval { lo, hi }),
            }
        }
        IntervalSet { parts }
    }

    /// A single interval, or the empty set when `lo >= hi`.
    pub fn segment(lo: Rat, hi: Rat) -> IntervalSet {
        IntervalSet {
            parts: Interval::new(lo, hi).into_iter().collect(),
        }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Total length, exact.
    pub fn measure(&self) -> Rat {
        self.parts
            .iter()
            .fold(Rat::zero(), |acc, p| acc + p.length())
    }

    /// Point membership (half-open convention).
    pub fn contains(&self, x: &Rat) -> bool {
        let idx = self.parts.partition_point(|p| &p.hi <= x);
        self.parts.get(idx).is_some_and(|p| &p.lo <= x)
    }

    /// Measure of `self ∩ [lo, hi)`, exact.
    pub fn measure_between(&self, lo: &Rat, hi: &Rat) -> Rat {
        if lo >= hi {
            return Rat::zero();
        }
        let start = self.parts.partition_point(|p| &p.hi <= lo);
        let mut total = Rat::zero();
        for p in &self.parts[start..] {
            if &p.lo >= hi {
                break;
            }
            let a = if &p.lo > lo { &p.lo } else { lo };
            let b = if &p.hi < hi { &p.hi } else { hi };
            if a < b {
                total += b - a;
            }
        }
        total
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        boolean_combine(self, other, SetOp::Union)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        boolean_combine(self, other, SetOp::Intersect)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        boolean_combine(self, other, SetOp::Difference)
    }

    /// Exact image `{scale·x + shift : x ∈ self}`. A negative scale
    /// reverses orientation; each image part is stored as half-open
    /// `[min, max)`, so individual boundary points (measure zero) may
    /// switch sides relative to the closed-interval picture.
    pub fn affine_image(&self, scale: &Rat, shift: &Rat) -> Result<IntervalSet> {
        if scale.is_zero() {
            return Err(Error::ZeroScale);
        }
        let mut parts: Vec<Interval> = Vec::with_capacity(self.parts.len());
        if scale.is_positive() {
            for p in &self.parts {
                parts.push(Interval {
                    lo: scale * &p.lo + shift,
                    hi: scale * &p.hi + shift,
                });
            }
        } else {
            for p in self.parts.iter().rev() {
                parts.push(Interval {
                    lo: scale * &p.hi + shift,
                    hi: scale * &p.lo + shift,
                });
            }
        }
        Ok(IntervalSet { parts })
    }
}

impl std::fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

// Wire format: array of [lo_num, lo_den, hi_num, hi_den] quadruples.
// Components are decimal strings so arbitrary-precision endpoints stay
// exact.
impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.parts.iter().map(|p| {
            [
                p.lo.numer().to_string(),
                p.lo.denom().to_string(),
                p.hi.numer().to_string(),
                p.hi.denom().to_string(),
            ]
        }))
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let quads = Vec::<[String; 4]>::deserialize(d)?;
        let mut raw = Vec::with_capacity(quads.len());
        for [a, b, c, e] in &quads {
            let parse = |t: &str| -> std::result::Result<BigInt, D::Error> {
                t.parse()
                    .map_err(|_| D::Error::custom(format!("bad integer {t:?} in interval set")))
            };
            let (lo_n, lo_d, hi_n, hi_d) = (parse(a)?, parse(b)?, parse(c)?, parse(e)?);
            if lo_d.is_zero() || hi_d.is_zero() {
                return Err(D::Error::custom("zero denominator in interval set"));
            }
            raw.push((Rat::new(lo_n, lo_d), Rat::new(hi_n, hi_d)));
        }
        Ok(IntervalSet::normalize(raw))
    }
}

/// Exact union / intersection / difference of two normalized sets.
pub fn boolean_combine(a: &IntervalSet, b: &IntervalSet, op: SetOp) -> IntervalSet {
    match op {
        SetOp::Union => {
            let raw = a
                .parts
                .iter()
                .chain(b.parts.iter())
                .map(|p| (p.lo.clone(), p.hi.clone()));
            IntervalSet::normalize(raw)
        }
        SetOp::Intersect => {
            let mut parts = Vec::new();
            let (mut i, mut j) = (0, 0);
            while i < a.parts.len() && j < b.parts.len() {
                let (pa, pb) = (&a.parts[i], &b.parts[j]);
                let lo = if pa.lo > pb.lo { &pa.lo } else { &pb.lo };
                let hi = if pa.hi < pb.hi { &pa.hi } else { &pb.hi };
                if lo < hi {
                    parts.push(Interval {
                        lo: lo.clone(),
                        hi: hi.clone(),
                    });
                }
                if pa.hi <= pb.hi {
                    i += 1;
                } else {
                    j += 1;
                }
            }
            IntervalSet { parts }
        }
        SetOp::Difference => {
            let mut parts = Vec::new();
            let mut j = 0;
            for pa in &a.parts {
                let mut lo = pa.lo.clone();
                while j < b.parts.len() && b.parts[j].hi <= lo {
                    j += 1;
                }
                let mut k = j;
                while k < b.parts.len() && b.parts[k].lo < pa.hi {
                    let pb = &b.parts[k];
                    if pb.lo > lo {
                        parts.push(Interval {
                            lo: lo.clone(),
                            hi: pb.lo.clone(),
                        });
                    }
                    if pb.hi > lo {
                        lo = pb.hi.clone();
                    }
                    if lo >= pa.hi {
                        break;
                    }
                    k += 1;
                }
                if lo < pa.hi {
                    parts.push(Interval {
                        lo,
                        hi: pa.hi.clone(),
                    });
                }
            }
            IntervalSet { parts }
        }
    }
}

/// Window of the line with length at least one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    lo: Rat,
    hi: Rat,
}

impl Window {
    pub fn new(lo: Rat, hi: Rat) -> Result<Window> {
        if &hi - &lo < Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "window [{}, {}) must have length >= 1",
                format_rat(&lo),
                format_rat(&hi)
            )));
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn as_set(&self) -> IntervalSet {
        IntervalSet::segment(self.lo.clone(), self.hi.clone())
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {})", format_rat(&self.lo), format_rat(&self.hi))
    }
}

/// A period plus a pattern contained in `[0, period)`; stands for the
/// tiling `∪_{k∈ℤ} (pattern + k·period)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicSet {
    period: Rat,
    pattern: IntervalSet,
}

impl PeriodicSet {
    pub fn new(period: Rat, pattern: IntervalSet) -> Result<PeriodicSet> {
        if !period.is_positive() {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        if let Some(last) = pattern.parts().last() {
            if pattern.parts()[0].lo() < &Rat::zero() || last.hi() > &period {
                return Err(Error::InvalidParameter(
                    "pattern must be contained in [0, period)".into(),
                ));
            }
        }
        Ok(PeriodicSet { period, pattern })
    }

    /// The set `step·ℤ + [0, width)`, the basic congruence strip.
    pub fn strip(step: Rat, width: Rat) -> Result<PeriodicSet> {
        if width > step {
            return Err(Error::InvalidParameter(
                "strip width must not exceed the step".into(),
            ));
        }
        let pattern = IntervalSet::segment(Rat::zero(), width);
        PeriodicSet::new(step, pattern)
    }

    pub fn period(&self) -> &Rat {
        &self.period
    }

    pub fn pattern(&self) -> &IntervalSet {
        &self.pattern
    }

    /// Exact tiling restricted to `[lo, hi)`. `lo >= hi` gives the
    /// empty set; sub-unit spans are allowed here (callers that expose
    /// windows use [`PeriodicSet::materialize`]).
    pub fn tile(&self, lo: &Rat, hi: &Rat) -> IntervalSet {
        if lo >= hi || self.pattern.is_empty() {
            return IntervalSet::empty();
        }
        let mut k = floor_int(&(lo / &self.period)) - BigInt::one();
        let k_hi = floor_int(&(hi / &self.period)) + BigInt::one();
        let mut raw = Vec::new();
        while k <= k_hi {
            let shift = Rat::from_integer(k.clone()) * &self.period;
            for p in self.pattern.parts() {
                let a = p.lo() + &shift;
                let b = p.hi() + &shift;
                let a = if &a > lo { a } else { lo.clone() };
                let b = if &b < hi { b } else { hi.clone() };
                if a < b {
                    raw.push((a, b));
                }
            }
            k += 1;
        }
        IntervalSet::normalize(raw)
    }

    /// Tiling restricted to a unit-or-longer window.
    pub fn materialize(&self, w: &Window) -> IntervalSet {
        self.tile(w.lo(), w.hi())
    }
}

/// Exact minimum of `a ↦ |s ∩ [a, a+1]|` over `a ∈ [w.lo, w.hi − 1]`,
/// returned with a minimizing `a` (the smallest one among breakpoints).
///
/// The window measure is piecewise linear in `a` with breakpoints
/// exactly at `{e, e−1}` for endpoints `e` of `s`, so evaluating at the
/// breakpoints plus the window ends is exact.
pub fn min_unit_window_measure(s: &IntervalSet, w: &Window) -> (Rat, Rat) {
    let a_lo = w.lo().clone();
    let a_hi = w.hi() - Rat::one();
    let mut candidates: Vec<Rat> = vec![a_lo.clone(), a_hi.clone()];
    for p in s.parts() {
        for e in [p.lo(), p.hi()] {
            if e >= &a_lo && e <= &a_hi {
                candidates.push(e.clone());
            }
            let shifted = e - Rat::one();
            if shifted >= a_lo && shifted <= a_hi {
                candidates.push(shifted);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut best: Option<(Rat, Rat)> = None;
    for a in candidates {
        let b = &a + Rat::one();
        let v = s.measure_between(&a, &b);
        match &best {
            Some((min, _)) if *min <= v => {}
            _ => best = Some((v, a)),
        }
    }
    best.expect("window ends always provide a candidate")
}
