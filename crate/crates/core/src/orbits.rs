//! Fractional-part orbit statistics, exceptional-set probing,
//! discrepancy, exact congruence-overlap measures, and escape probes.
//!
//! Orbits of rational dilations are computed exactly. When the sequence
//! is integer-valued and the common denominator fits in a machine word,
//! only residues are tracked (never the full terms), so scans over
//! `n ~ 10^5` or grids of thousands of dilations stay cheap.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet, PeriodicSet, Window};
use crate::rat::{format_rat, fract, rat_str, to_f64, Rat};
use crate::sequences::SequenceSpec;

/// Per-dilation orbit statistics at finite depth.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitStats {
    #[serde(with = "rat_str")]
    pub x: Rat,
    pub n_terms: u64,
    /// Largest empty circular arc left by the orbit (density witness).
    #[serde(with = "rat_str")]
    pub max_gap: Rat,
    #[serde(with = "rat_str")]
    pub star_discrepancy: Rat,
    pub histogram: Vec<u64>,
}

/// Arithmetic grid `start + k·step` for `k = 0 … count−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(with = "rat_str")]
    pub start: Rat,
    #[serde(with = "rat_str")]
    pub step: Rat,
    pub count: u64,
}

impl GridSpec {
    pub fn new(start: Rat, step: Rat, count: u64) -> Result<GridSpec> {
        if !step.is_positive() {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        Ok(GridSpec { start, step, count })
    }

    pub fn point(&self, k: u64) -> Rat {
        &self.start + &self.step * Rat::from_integer(BigInt::from(k))
    }

    pub fn points(&self) -> Vec<Rat> {
        (0..self.count).map(|k| self.point(k)).collect()
    }
}

/// One probed grid point.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    #[serde(with = "rat_str")]
    pub x: Rat,
    #[serde(with = "rat_str")]
    pub max_gap: Rat,
    #[serde(with = "rat_str")]
    pub star_discrepancy: Rat,
}

/// Grid scan for dilations whose orbit leaves a gap of at least `delta`.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalProbe {
    #[serde(with = "rat_str")]
    pub delta: Rat,
    pub n_terms: u64,
    pub grid: GridSpec,
    pub rows: Vec<ProbeRow>,
    #[serde(with = "crate::rat::rat_vec_str")]
    pub hits: Vec<Rat>,
}

/// Box-counting slope over a ladder of scales; a finite-sample proxy
/// for the upper box dimension, not an estimate of the true dimension.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    #[serde(with = "crate::rat::rat_vec_str")]
    pub scales: Vec<Rat>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub r2: f64,
}

// ---------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------

/// `⟨x·a_n + t⟩` for `n = 1 … n_terms`, in index order.
pub fn torus_orbit(s: &SequenceSpec, x: &Rat, t: &Rat, n_terms: u64) -> Result<Vec<Rat>> {
    if let Some((numers, den)) = torus_numerators(s, x, t, n_terms) {
        let den = BigInt::from(den);
        return Ok(numers
            .into_iter()
            .map(|c| Rat::new(BigInt::from(c), den.clone()))
            .collect());
    }
    let mut out = Vec::with_capacity(n_terms as usize);
    for n in 1..=n_terms {
        let v = x * s.term(n)?.value + t;
        out.push(fract(&v));
    }
    Ok(out)
}

/// Sorted multiset of fractional parts `⟨x·a_n + t⟩`, `n ≤ n_terms`.
pub fn fractional_orbit(s: &SequenceSpec, x: &Rat, t: &Rat, n_terms: u64) -> Result<Vec<Rat>> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("orbit needs at least one term".into()));
    }
    if let Some((mut numers, den)) = torus_numerators(s, x, t, n_terms) {
        numers.sort_unstable();
        let den = BigInt::from(den);
        return Ok(numers
            .into_iter()
            .map(|c| Rat::new(BigInt::from(c), den.clone()))
            .collect());
    }
    let mut points = torus_orbit(s, x, t, n_terms)?;
    points.sort();
    Ok(points)
}

/// Residue fast path: numerators of `⟨x·a_n + t⟩` over the common
/// denominator `lcm(den(x), den(t))`, when the sequence is integer
/// valued and the denominator fits in 32 bits.
fn torus_numerators(s: &SequenceSpec, x: &Rat, t: &Rat, n_terms: u64) -> Option<(Vec<u64>, u64)> {
    let den_big: BigInt = x.denom().lcm(t.denom());
    let den = den_big.to_u64()?;
    if den > u32::MAX as u64 {
        return None;
    }
    let mods = s.terms_mod_u64(den, n_terms)?;
    let scale_x = (&den_big / x.denom()) * x.numer();
    let num_x = scale_x.mod_floor(&den_big).to_u64()?;
    let scale_t = (&den_big / t.denom()) * t.numer();
    let num_t = scale_t.mod_floor(&den_big).to_u64()?;
    let numers = mods
        .into_iter()
        .map(|r| ((num_x as u128 * r as u128 + num_t as u128) % den as u128) as u64)
        .collect();
    Some((numers, den))
}

/// Largest empty circular arc of `[0, 1)` left by a sorted, nonempty
/// list of fractional parts (wrap-around arc included).
pub fn max_gap(points: &[Rat]) -> Result<Rat> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("max_gap of an empty orbit".into()));
    }
    let first = &points[0];
    let last = &points[points.len() - 1];
    let mut best = first + Rat::one() - last;
    for w in points.windows(2) {
        let gap = &w[1] - &w[0];
        if gap > best {
            best = gap;
        }
    }
    Ok(best)
}

/// Exact star discrepancy of a sorted list of fractional parts via the
/// closed-form `max_i max(i/N − p_i, p_i − (i−1)/N)`.
pub fn star_discrepancy(points: &[Rat]) -> Result<Rat> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "star discrepancy of an empty orbit".into(),
        ));
    }
    let mut best = Rat::zero();
    for (idx, p) in points.iter().enumerate() {
        let i = idx + 1;
        let a = Rat::new(BigInt::from(i), BigInt::from(n)) - p;
        let b = p - Rat::new(BigInt::from(i - 1), BigInt::from(n));
        if a > best {
            best = a;
        }
        if b > best {
            best = b;
        }
    }
    Ok(best)
}

fn max_gap_u64(sorted: &[u64], den: u64) -> Rat {
    debug_assert!(!sorted.is_empty());
    let mut best = sorted[0] + den - sorted[sorted.len() - 1];
    for w in sorted.windows(2) {
        let gap = w[1] - w[0];
        if gap > best {
            best = gap;
        }
    }
    Rat::new(BigInt::from(best), BigInt::from(den))
}

fn star_discrepancy_u64(sorted: &[u64], den: u64) -> Rat {
    let n = sorted.len() as u64;
    let mut best: i128 = 0;
    for (idx, c) in sorted.iter().enumerate() {
        let i = idx as i128 + 1;
        let a = i * den as i128 - *c as i128 * n as i128;
        let b = *c as i128 * n as i128 - (i - 1) * den as i128;
        best = best.max(a).max(b);
    }
    Rat::new(BigInt::from(best), BigInt::from(n as i128 * den as i128))
}

fn histogram_u64(sorted: &[u64], den: u64, bins: u64) -> Vec<u64> {
    let mut hist = vec![0u64; bins as usize];
    for c in sorted {
        let b = (*c as u128 * bins as u128 / den as u128) as usize;
        hist[b] += 1;
    }
    hist
}

fn histogram_rat(points: &[Rat], bins: u64) -> Vec<u64> {
    let mut hist = vec![0u64; bins as usize];
    let bins_rat = Rat::from_integer(BigInt::from(bins));
    for p in points {
        let idx = (p * &bins_rat).floor().to_integer().to_u64().unwrap_or(0);
        hist[(idx.min(bins - 1)) as usize] += 1;
    }
    hist
}

/// Full orbit statistics for the dilation `x` (translation 0).
pub fn orbit_stats(s: &SequenceSpec, x: &Rat, n_terms: u64, bins: u64) -> Result<OrbitStats> {
    if n_terms == 0 || bins == 0 {
        return Err(Error::InvalidParameter(
            "orbit stats need n_terms >= 1 and bins >= 1".into(),
        ));
    }
    let zero = Rat::zero();
    if let Some((mut numers, den)) = torus_numerators(s, x, &zero, n_terms) {
        numers.sort_unstable();
        return Ok(OrbitStats {
            x: x.clone(),
            n_terms,
            max_gap: max_gap_u64(&numers, den),
            star_discrepancy: star_discrepancy_u64(&numers, den),
            histogram: histogram_u64(&numers, den, bins),
        });
    }
    let points = fractional_orbit(s, x, &zero, n_terms)?;
    Ok(OrbitStats {
        x: x.clone(),
        n_terms,
        max_gap: max_gap(&points)?,
        star_discrepancy: star_discrepancy(&points)?,
        histogram: histogram_rat(&points, bins),
    })
}

// ---------------------------------------------------------------------
// Exceptional-set probing
// ---------------------------------------------------------------------

/// Scan a dilation grid for orbits whose max gap reaches `delta` after
/// `n_terms` terms. Deterministic; grid points evaluated in parallel.
pub fn exceptional_probe(
    s: &SequenceSpec,
    delta: &Rat,
    n_terms: u64,
    grid: &GridSpec,
) -> Result<ExceptionalProbe> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("probe needs n_terms >= 1".into()));
    }
    // shared fast path: all grid points over one denominator
    let den_big: BigInt = grid.start.denom().lcm(grid.step.denom());
    let shared = den_big
        .to_u64()
        .filter(|d| *d <= u32::MAX as u64)
        .and_then(|den| {
            let mods = s.terms_mod_u64(den, n_terms)?;
            let start = ((&den_big / grid.start.denom()) * grid.start.numer())
                .mod_floor(&den_big)
                .to_u64()?;
            let step = ((&den_big / grid.step.denom()) * grid.step.numer())
                .mod_floor(&den_big)
                .to_u64()?;
            Some((den, mods, start, step))
        });

    let rows: Result<Vec<ProbeRow>> = (0..grid.count)
        .into_par_iter()
        .map(|k| {
            let x = grid.point(k);
            if let Some((den, mods, start, step)) = &shared {
                let num_x = ((*start as u128 + *step as u128 * k as u128) % *den as u128) as u64;
                let mut numers: Vec<u64> = mods
                    .iter()
                    .map(|r| ((num_x as u128 * *r as u128) % *den as u128) as u64)
                    .collect();
                numers.sort_unstable();
                Ok(ProbeRow {
                    x,
                    max_gap: max_gap_u64(&numers, *den),
                    star_discrepancy: star_discrepancy_u64(&numers, *den),
                })
            } else {
                let points = fractional_orbit(s, &x, &Rat::zero(), n_terms)?;
                Ok(ProbeRow {
                    x,
                    max_gap: max_gap(&points)?,
                    star_discrepancy: star_discrepancy(&points)?,
                })
            }
        })
        .collect();
    let rows = rows?;
    let hits = rows
        .iter()
        .filter(|r| &r.max_gap >= delta)
        .map(|r| r.x.clone())
        .collect();
    Ok(ExceptionalProbe {
        delta: delta.clone(),
        n_terms,
        grid: grid.clone(),
        rows,
        hits,
    })
}

/// CSV rows `(x, max_gap, star_discrepancy)` for a probe.
pub fn probe_csv(p: &ExceptionalProbe) -> String {
    let mut out = String::from("x,max_gap,star_discrepancy\n");
    for row in &p.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            format_rat(&row.x),
            format_rat(&row.max_gap),
            format_rat(&row.star_discrepancy)
        ));
    }
    out
}

/// Least-squares slope of `log(boxes hit)` against `log(1/scale)` over
/// the given ladder of scales, with fit diagnostics.
pub fn box_dimension_estimate(p: &ExceptionalProbe, scales: &[Rat]) -> Result<DimensionEstimate> {
    if scales.len() < 2 {
        return Err(Error::InvalidParameter(
            "dimension estimate needs at least two scales".into(),
        ));
    }
    for w in scales.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidParameter(
                "scales must be strictly descending".into(),
            ));
        }
    }
    for sc in scales {
        if !sc.is_positive() {
            return Err(Error::InvalidParameter("scales must be positive".into()));
        }
        if !(sc / &p.grid.step).is_integer() {
            return Err(Error::InvalidParameter(format!(
                "scale {} is not a multiple of the grid step {}",
                format_rat(sc),
                format_rat(&p.grid.step)
            )));
        }
    }
    if p.hits.is_empty() {
        return Err(Error::InvalidParameter(
            "probe has no hits; nothing to measure".into(),
        ));
    }
    let mut counts = Vec::with_capacity(scales.len());
    for sc in scales {
        let mut boxes: Vec<BigInt> = p.hits.iter().map(|x| (x / sc).floor().to_integer()).collect();
        boxes.sort();
        boxes.dedup();
        counts.push(boxes.len() as u64);
    }
    let xs: Vec<f64> = scales.iter().map(|s| -to_f64(s).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (*c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var_x: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let var_y: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let (slope, r2) = if var_y == 0.0 {
        (0.0, 1.0)
    } else {
        let raw = cov / var_x;
        (raw.clamp(0.0, 1.0), (cov * cov) / (var_x * var_y))
    };
    Ok(DimensionEstimate {
        scales: scales.to_vec(),
        counts,
        slope,
        r2,
    })
}

/// CSV rows `(scale, count)` for a dimension fit.
pub fn dimension_csv(d: &DimensionEstimate) -> String {
    let mut out = String::from("scale,count\n");
    for (s, c) in d.scales.iter().zip(&d.counts) {
        out.push_str(&format!("{},{}\n", format_rat(s), c));
    }
    out
}

// ---------------------------------------------------------------------
// Congruence overlap (exact sweep vs asymptotic prediction)
// ---------------------------------------------------------------------

/// Parameters for the exact overlap measure of two congruence strips
/// `αℤ+[0,ε)` and `βℤ+[0,ε)` on a window.
#[derive(Debug, Clone)]
pub struct CongruenceCase {
    pub alpha: Rat,
    pub beta: Rat,
    pub epsilon: Rat,
    pub window: Window,
}

impl CongruenceCase {
    pub fn new(alpha: Rat, beta: Rat, epsilon: Rat, window: Window) -> Result<CongruenceCase> {
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::InvalidParameter(
                "strip periods must be positive".into(),
            ));
        }
        let narrower = if alpha < beta { &alpha } else { &beta };
        if !epsilon.is_positive() || &epsilon >= narrower {
            return Err(Error::InvalidParameter(format!(
                "strip width must satisfy 0 < epsilon < min(alpha, beta), got {}",
                format_rat(&epsilon)
            )));
        }
        Ok(CongruenceCase {
            alpha,
            beta,
            epsilon,
            window,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    #[serde(with = "rat_str")]
    pub exact: Rat,
    #[serde(with = "rat_str")]
    pub asymptotic: Rat,
    #[serde(with = "rat_str")]
    pub relative_error: Rat,
    pub relative_error_approx: f64,
}

/// Exact measure of `(αℤ+[0,ε)) ∩ (βℤ+[0,ε)) ∩ window` next to the
/// asymptotic prediction `ε²·width/(αβ)`.
pub fn lemma41_exact_measure(c: &CongruenceCase) -> Result<OverlapReport> {
    let a = PeriodicSet::strip(c.alpha.clone(), c.epsilon.clone())?;
    let b = PeriodicSet::strip(c.beta.clone(), c.epsilon.clone())?;
    let sa = a.materialize(&c.window);
    let sb = b.materialize(&c.window);
    let exact = sa.intersect(&sb).measure();
    let asymptotic = &c.epsilon * &c.epsilon * c.window.width() / (&c.alpha * &c.beta);
    let relative_error = (&exact - &asymptotic).abs() / &asymptotic;
    Ok(OverlapReport {
        exact,
        asymptotic,
        relative_error_approx: to_f64(&relative_error),
        relative_error,
    })
}

// ---------------------------------------------------------------------
// Chung–Erdős lower bound
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ChungErdosReport {
    #[serde(with = "rat_str")]
    pub lhs: Rat,
    #[serde(with = "rat_str")]
    pub rhs: Rat,
    pub holds: bool,
}

/// `P(∪B_i)` against the Chung–Erdős lower bound
/// `(ΣP(B_i))² / ΣΣP(B_i ∩ B_j)`, probabilities taken as normalized
/// measures on the window. `holds` must always come back true; the
/// check is a regression test of the measure kernel.
pub fn chung_erdos_check(events: &[PeriodicSet], window: &Window) -> Result<ChungErdosReport> {
    if events.is_empty() {
        return Err(Error::InvalidParameter("no events given".into()));
    }
    let width = window.width();
    let sets: Vec<IntervalSet> = events.iter().map(|e| e.materialize(window)).collect();
    let probs: Vec<Rat> = sets.iter().map(|s| s.measure() / &width).collect();

    let mut union = IntervalSet::empty();
    for s in &sets {
        union = union.union(s);
    }
    let lhs = union.measure() / &width;

    let sum: Rat = probs.iter().fold(Rat::zero(), |acc, p| acc + p);
    let mut denom: Rat = probs.iter().fold(Rat::zero(), |acc, p| acc + p);
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let inter = sets[i].intersect(&sets[j]).measure() / &width;
            denom += &inter + &inter;
        }
    }
    let rhs = if denom.is_zero() {
        Rat::zero()
    } else {
        &sum * &sum / &denom
    };
    let holds = lhs >= rhs;
    Ok(ChungErdosReport { lhs, rhs, holds })
}

// ---------------------------------------------------------------------
// Escape probe against a prescribed run of torus intervals
// ---------------------------------------------------------------------

/// First index `n ≤ n_terms` with `⟨a_n·x⟩ ∈ Δ_n` (deltas cycled when
/// shorter than the scan), or `None` when `x` survives to full depth.
pub fn delta_escape_probe(
    s: &SequenceSpec,
    deltas: &[Interval],
    x: &Rat,
    n_terms: u64,
) -> Result<Option<u64>> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("no target intervals given".into()));
    }
    for d in deltas {
        if d.lo() < &Rat::zero() || d.hi() > &Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "target interval {d} is not contained in [0, 1)"
            )));
        }
    }
    let points = torus_orbit(s, x, &Rat::zero(), n_terms)?;
    for (idx, p) in points.iter().enumerate() {
        let d = &deltas[idx % deltas.len()];
        if d.contains(p) {
            return Ok(Some(idx as u64 + 1));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use proptest::prelude::*;

    fn seq_identity() -> SequenceSpec {
        SequenceSpec::polynomial(vec![rat_int(0), rat_int(1)]).unwrap()
    }

    fn seq_squares() -> SequenceSpec {
        SequenceSpec::polynomial(vec![rat_int(0), rat_int(0), rat_int(1)]).unwrap()
    }

    fn seq_powers() -> SequenceSpec {
        SequenceSpec::integer_power(2).unwrap()
    }

    #[test]
    fn orbit_identity_thirds() {
        let pts = fractional_orbit(&seq_identity(), &rat(1, 3), &Rat::zero(), 6).unwrap();
        let want: Vec<Rat> = [0, 0, 1, 1, 2, 2]
            .iter()
            .map(|&k| rat(k, 3))
            .collect();
        assert_eq!(pts, want);
    }

    #[test]
    fn orbit_powers_alternate() {
        let pts = torus_orbit(&seq_powers(), &rat(1, 3), &Rat::zero(), 6).unwrap();
        let want: Vec<Rat> = [2, 1, 2, 1, 2, 1].iter().map(|&k| rat(k, 3)).collect();
        assert_eq!(pts, want);
    }

    #[test]
    fn orbit_zero_dilation_is_translation() {
        let pts = fractional_orbit(&seq_squares(), &Rat::zero(), &rat(1, 2), 5).unwrap();
        assert!(pts.iter().all(|p| p == &rat(1, 2)));
    }

    #[test]
    fn orbit_over_primes() {
        // a_n = p_n with an integer exponent is exact: <p_n/2> is 0 for
        // p_1 = 2 and 1/2 for every odd prime
        let s = SequenceSpec::prime_power(vec![rat_int(1)], vec![rat_int(1)], 10_000).unwrap();
        let pts = fractional_orbit(&s, &rat(1, 2), &Rat::zero(), 6).unwrap();
        let mut want = vec![Rat::zero()];
        want.extend(std::iter::repeat_n(rat(1, 2), 5));
        assert_eq!(pts, want);
    }

    #[test]
    fn fast_path_matches_direct_evaluation() {
        let s = seq_powers();
        let (x, t) = (rat(5, 7), rat(1, 3));
        let fast = fractional_orbit(&s, &x, &t, 40).unwrap();
        let mut slow: Vec<Rat> = (1..=40)
            .map(|n| fract(&(&x * s.term_value(n).unwrap() + &t)))
            .collect();
        slow.sort();
        assert_eq!(fast, slow);
    }

    #[test]
    fn max_gap_examples() {
        let pts = vec![rat(1, 3), rat(2, 3)];
        assert_eq!(max_gap(&pts).unwrap(), rat(2, 3));
        assert_eq!(max_gap(&[Rat::zero()]).unwrap(), rat_int(1));
        let grid: Vec<Rat> = (0..10).map(|k| rat(k, 10)).collect();
        assert_eq!(max_gap(&grid).unwrap(), rat(1, 10));
    }

    #[test]
    fn star_discrepancy_examples() {
        assert_eq!(star_discrepancy(&[rat(1, 2)]).unwrap(), rat(1, 2));
        let n = 16i64;
        let centered: Vec<Rat> = (0..n).map(|k| rat(2 * k + 1, 2 * n)).collect();
        assert_eq!(star_discrepancy(&centered).unwrap(), rat(1, 2 * n));
    }

    /// independent oracle: sup over anchored intervals with endpoints
    /// at the points themselves, counting both strict and weak ranks
    fn star_discrepancy_brute(points: &[Rat]) -> Rat {
        let n = points.len();
        let nn = BigInt::from(n);
        let mut best = Rat::zero();
        let mut candidates: Vec<Rat> = points.to_vec();
        candidates.push(Rat::one());
        for c in &candidates {
            let strict = points.iter().filter(|p| *p < c).count();
            let weak = points.iter().filter(|p| *p <= c).count();
            for cnt in [strict, weak] {
                let d = (Rat::new(BigInt::from(cnt), nn.clone()) - c).abs();
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    #[test]
    fn star_discrepancy_matches_brute_oracle() {
        let s = seq_identity();
        for q in [7i64, 12, 101] {
            let pts = fractional_orbit(&s, &rat(5, q), &Rat::zero(), 37).unwrap();
            assert_eq!(
                star_discrepancy(&pts).unwrap(),
                star_discrepancy_brute(&pts),
                "q={q}"
            );
        }
    }

    #[test]
    fn golden_kronecker_small_discrepancy() {
        let golden = crate::rat::named_approximant("golden", &rat(1, 1_000_000_000_000)).unwrap();
        let stats = orbit_stats(&seq_identity(), &golden.value, 1000, 16).unwrap();
        assert!(stats.star_discrepancy < rat(1, 100));
        assert_eq!(stats.histogram.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn probe_identity_grid_hits_only_trivial() {
        let grid = GridSpec::new(Rat::zero(), rat(1, 997), 998).unwrap();
        let p = exceptional_probe(&seq_identity(), &rat(1, 2), 1000, &grid).unwrap();
        assert_eq!(p.hits, vec![Rat::zero(), Rat::one()]);
    }

    #[test]
    fn probe_powers_grid_hits_thirds() {
        let grid = GridSpec::new(Rat::zero(), rat(1, 999), 1000).unwrap();
        let p = exceptional_probe(&seq_powers(), &rat(1, 2), 1000, &grid).unwrap();
        for want in [rat(1, 3), rat(2, 3), Rat::zero(), Rat::one()] {
            assert!(p.hits.contains(&want), "missing {}", format_rat(&want));
        }
        // 1/9 orbits through 6 residues; its gap stays below 1/2
        assert!(!p.hits.contains(&rat(1, 9)));
    }

    #[test]
    fn probe_delta_one_keeps_single_valued_orbits() {
        let grid = GridSpec::new(Rat::zero(), rat(1, 4), 5).unwrap();
        let p = exceptional_probe(&seq_identity(), &Rat::one(), 100, &grid).unwrap();
        assert_eq!(p.hits, vec![Rat::zero(), Rat::one()]);
    }

    #[test]
    fn argument_validation() {
        assert!(GridSpec::new(Rat::zero(), Rat::zero(), 5).is_err());
        assert!(GridSpec::new(Rat::zero(), rat(-1, 4), 5).is_err());
        assert!(fractional_orbit(&seq_identity(), &rat(1, 3), &Rat::zero(), 0).is_err());
        assert!(max_gap(&[]).is_err());
        assert!(star_discrepancy(&[]).is_err());
        let bad = Interval::new(rat(1, 2), rat(3, 2)).unwrap();
        assert!(delta_escape_probe(&seq_identity(), &[bad], &rat(1, 3), 10).is_err());
        assert!(delta_escape_probe(&seq_identity(), &[], &rat(1, 3), 10).is_err());
        let w = Window::new(rat_int(0), rat_int(2)).unwrap();
        assert!(chung_erdos_check(&[], &w).is_err());
    }

    #[test]
    fn probe_hits_shrink_with_depth() {
        let grid = GridSpec::new(Rat::zero(), rat(1, 64), 65).unwrap();
        let shallow = exceptional_probe(&seq_squares(), &rat(2, 5), 50, &grid).unwrap();
        let deep = exceptional_probe(&seq_squares(), &rat(2, 5), 500, &grid).unwrap();
        for x in &deep.hits {
            assert!(shallow.hits.contains(x));
        }
    }

    #[test]
    fn dimension_full_grid_and_singleton() {
        let grid = GridSpec::new(Rat::zero(), rat(1, 256), 257).unwrap();
        let scales: Vec<Rat> = (2..=7).map(|k| rat(1, 1 << k)).collect();
        // delta 0 marks every grid point: slope ~ 1
        let full = exceptional_probe(&seq_identity(), &Rat::zero(), 10, &grid).unwrap();
        let est = box_dimension_estimate(&full, &scales).unwrap();
        assert!(est.slope > 0.9, "full-grid slope {}", est.slope);
        // delta 1 keeps only 0 and 1: slope ~ 0
        let tiny = exceptional_probe(&seq_identity(), &Rat::one(), 100, &grid).unwrap();
        let est = box_dimension_estimate(&tiny, &scales).unwrap();
        assert!(est.slope < 0.2, "singleton slope {}", est.slope);
    }

    #[test]
    fn overlap_equal_periods_shows_rational_resonance() {
        let w = Window::new(rat_int(0), rat_int(100)).unwrap();
        let c = CongruenceCase::new(rat_int(1), rat_int(1), rat(1, 10), w).unwrap();
        let r = lemma41_exact_measure(&c).unwrap();
        assert_eq!(r.exact, rat_int(10));
        assert_eq!(r.asymptotic, rat_int(1));
        assert_eq!(r.relative_error, rat_int(9));
    }

    #[test]
    fn overlap_rejects_wide_strip() {
        let w = Window::new(rat_int(0), rat_int(10)).unwrap();
        assert!(CongruenceCase::new(rat_int(1), rat_int(2), rat_int(1), w).is_err());
    }

    #[test]
    fn overlap_near_prediction_for_incommensurate_periods() {
        // a close convergent of √2 against period 1: the exact overlap
        // tracks eps²·width/(alpha·beta) within 2% already at width 10^4
        let alpha = rat(665857, 470832);
        let w = Window::new(rat_int(0), rat_int(10_000)).unwrap();
        let c = CongruenceCase::new(alpha, rat_int(1), rat(1, 10), w).unwrap();
        let r = lemma41_exact_measure(&c).unwrap();
        assert!(
            r.relative_error < rat(1, 50),
            "relative error {}",
            format_rat(&r.relative_error)
        );
    }

    #[test]
    fn overlap_symmetric_and_scales_with_whole_windows() {
        let w = Window::new(rat_int(0), rat_int(60)).unwrap();
        let c1 = CongruenceCase::new(rat(3, 2), rat(5, 2), rat(1, 4), w.clone()).unwrap();
        let c2 = CongruenceCase::new(rat(5, 2), rat(3, 2), rat(1, 4), w).unwrap();
        let (r1, r2) = (
            lemma41_exact_measure(&c1).unwrap(),
            lemma41_exact_measure(&c2).unwrap(),
        );
        assert_eq!(r1.exact, r2.exact);
        // doubling a window that is a whole number of both periods
        // doubles the exact overlap
        let w2 = Window::new(rat_int(0), rat_int(120)).unwrap();
        let c3 = CongruenceCase::new(rat(3, 2), rat(5, 2), rat(1, 4), w2).unwrap();
        let r3 = lemma41_exact_measure(&c3).unwrap();
        assert_eq!(r3.exact, &r1.exact + &r1.exact);
    }

    #[test]
    fn chung_erdos_single_event_collapses() {
        let e = PeriodicSet::strip(rat_int(2), rat(1, 3)).unwrap();
        let w = Window::new(rat_int(0), rat_int(10)).unwrap();
        let r = chung_erdos_check(&[e], &w).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn chung_erdos_tight_for_disjoint_equal_events() {
        let a = PeriodicSet::new(rat_int(1), IntervalSet::segment(Rat::zero(), rat(1, 4))).unwrap();
        let b = PeriodicSet::new(rat_int(1), IntervalSet::segment(rat(1, 2), rat(3, 4))).unwrap();
        let w = Window::new(rat_int(0), rat_int(1)).unwrap();
        let r = chung_erdos_check(&[a, b], &w).unwrap();
        assert_eq!(r.lhs, rat(1, 2));
        assert_eq!(r.rhs, rat(1, 2));
        assert!(r.holds);
    }

    #[test]
    fn delta_probe_examples() {
        // <1/3> and <2/3> miss [0, 1/4); <1> = 0 hits at n = 3
        let quarter = Interval::new(Rat::zero(), rat(1, 4)).unwrap();
        let hit = delta_escape_probe(&seq_identity(), &[quarter], &rat(1, 3), 1000).unwrap();
        assert_eq!(hit, Some(3));

        let full = Interval::new(Rat::zero(), Rat::one()).unwrap();
        assert_eq!(
            delta_escape_probe(&seq_powers(), &[full], &rat(22, 7), 10).unwrap(),
            Some(1)
        );

        let mid = Interval::new(rat(2, 5), rat(3, 5)).unwrap();
        assert_eq!(
            delta_escape_probe(&seq_powers(), &[mid], &rat(1, 3), 2000).unwrap(),
            None
        );
    }

    proptest! {
        #[test]
        fn residue_fast_path_matches_term_evaluation(
            px in -40i64..40, qx in 1i64..24,
            pt in -12i64..12, qt in 1i64..12,
            kind in 0u8..3,
        ) {
            prop_assume!(px != 0);
            let s = match kind {
                0 => seq_powers(),
                1 => seq_squares(),
                _ => SequenceSpec::block_double_exponential(),
            };
            let x = rat(px, qx);
            let t = rat(pt, qt);
            let n = 24u64;
            let fast = fractional_orbit(&s, &x, &t, n).unwrap();
            let mut slow: Vec<Rat> = (1..=n)
                .map(|k| fract(&(&x * s.term_value(k).unwrap() + &t)))
                .collect();
            slow.sort();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn gap_rotation_invariant(nums in prop::collection::vec(0i64..720, 1..40), shift in 0i64..720) {
            let mut pts: Vec<Rat> = nums.iter().map(|&k| rat(k, 720)).collect();
            pts.sort();
            let g1 = max_gap(&pts).unwrap();
            let mut rotated: Vec<Rat> = pts.iter().map(|p| fract(&(p + rat(shift, 720)))).collect();
            rotated.sort();
            prop_assert_eq!(g1, max_gap(&rotated).unwrap());
        }

        #[test]
        fn star_disc_lower_bound(nums in prop::collection::vec(0i64..997, 1..60)) {
            let mut pts: Vec<Rat> = nums.iter().map(|&k| rat(k, 997)).collect();
            pts.sort();
            let n = pts.len() as i64;
            prop_assert!(star_discrepancy(&pts).unwrap() >= rat(1, 2 * n));
        }

        #[test]
        fn gap_nonincreasing_in_depth(q in 2i64..50, p in 1i64..50) {
            let s = seq_squares();
            let x = rat(p, q);
            let mut prev: Option<Rat> = None;
            for n in [5u64, 20, 80] {
                let pts = fractional_orbit(&s, &x, &Rat::zero(), n).unwrap();
                let g = max_gap(&pts).unwrap();
                if let Some(pg) = prev {
                    prop_assert!(g <= pg);
                }
                prev = Some(g);
            }
        }

        #[test]
        fn chung_erdos_always_holds(
            periods in prop::collection::vec((1i64..20, 1i64..6), 1..5),
            eps_num in 1i64..4,
        ) {
            let events: Vec<PeriodicSet> = periods
                .iter()
                .map(|&(num, den)| {
                    let period = rat(num, den) + rat_int(1); // >= 1
                    let width = &period * rat(eps_num, 5) / rat_int(4);
                    PeriodicSet::strip(period, width).unwrap()
                })
                .collect();
            let w = Window::new(rat_int(0), rat_int(30)).unwrap();
            let r = chung_erdos_check(&events, &w).unwrap();
            prop_assert!(r.holds, "lhs={} rhs={}", format_rat(&r.lhs), format_rat(&r.rhs));
        }
    }
}
