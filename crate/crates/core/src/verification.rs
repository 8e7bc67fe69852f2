//! Exact largeness certification and affine-copy escape-witness search.
//!
//! A witness is an index `n` with `x·a_n + t` outside the avoider —
//! one refuted embedding. Searches are depth-bounded and report
//! inconclusive outcomes explicitly; when both the orbit and the
//! membership predicate are periodic on the torus, a finite scan
//! upgrades to an all-depth certificate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::AvoiderSet;
use crate::error::{Error, Result};
use crate::interval::{min_unit_window_measure, Window};
use crate::rat::{format_rat, rat_opt_str, rat_str, Rat};
use crate::sequences::SequenceSpec;

/// Largest modulus the residue cycle detector will walk.
const MAX_CYCLE_MODULUS: u64 = 100_000_000;

// ---------------------------------------------------------------------
// Largeness
// ---------------------------------------------------------------------

/// Exact minimum unit-window measure of an avoider over a window,
/// judged against its recorded target.
#[derive(Debug, Clone, Serialize)]
pub struct LargenessReport {
    #[serde(with = "rat_str")]
    pub target: Rat,
    #[serde(with = "rat_str")]
    pub min_measure: Rat,
    /// a minimizing left endpoint of a unit window
    #[serde(with = "rat_str")]
    pub argmin_window: Rat,
    pub windows_checked: String,
    pub pass: bool,
}

pub fn verify_largeness(a: &AvoiderSet, w: &Window) -> Result<LargenessReport> {
    let set = a.materialize(w)?;
    let (min_measure, argmin_window) = min_unit_window_measure(&set, w);
    let target = a.target().clone();
    let pass = min_measure >= target;
    Ok(LargenessReport {
        target,
        min_measure,
        argmin_window,
        windows_checked: w.to_string(),
        pass,
    })
}

// ---------------------------------------------------------------------
// Residue periodicity
// ---------------------------------------------------------------------

/// Eventual periodicity of `b^n mod modulus`: the minimal preperiod
/// `μ` and period `λ` with `b^(μ+λ) ≡ b^μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodCertificate {
    pub b: String,
    pub modulus: String,
    pub preperiod: u64,
    pub period: u64,
}

/// Brent cycle detection on the residue orbit of `b^n mod modulus`,
/// starting from `b^0 = 1`. Constant memory, `O(μ + λ)` steps.
pub fn eventual_period(b: &BigInt, modulus: &BigInt) -> Result<PeriodCertificate> {
    if b < &BigInt::from(2) {
        return Err(Error::InvalidParameter(format!("base must be >= 2, got {b}")));
    }
    if modulus < &BigInt::one() {
        return Err(Error::InvalidParameter(format!(
            "modulus must be >= 1, got {modulus}"
        )));
    }
    if modulus > &BigInt::from(MAX_CYCLE_MODULUS) {
        return Err(Error::InvalidParameter(format!(
            "modulus {modulus} exceeds the cycle-detection cap {MAX_CYCLE_MODULUS}"
        )));
    }
    let step = |r: &BigInt| -> BigInt { (r * b).mod_floor(modulus) };
    let x0 = BigInt::one().mod_floor(modulus);

    // Brent: find the cycle length
    let mut power: u64 = 1;
    let mut lam: u64 = 1;
    let mut tortoise = x0.clone();
    let mut hare = step(&x0);
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = step(&hare);
        lam += 1;
    }
    // find the preperiod
    let mut tortoise = x0.clone();
    let mut hare = x0;
    for _ in 0..lam {
        hare = step(&hare);
    }
    let mut mu: u64 = 0;
    while tortoise != hare {
        tortoise = step(&tortoise);
        hare = step(&hare);
        mu += 1;
    }
    Ok(PeriodCertificate {
        b: b.to_string(),
        modulus: modulus.to_string(),
        preperiod: mu,
        period: lam,
    })
}

// ---------------------------------------------------------------------
// Escape witnesses
// ---------------------------------------------------------------------

/// Verdict carried by a completed periodicity upgrade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllDepthVerdict {
    /// a witness lands in the periodic part, so the copy escapes at
    /// infinitely many indices
    EscapesInfinitelyOften,
    /// the full residue cycle was scanned without a witness: the copy
    /// stays inside the set at every depth
    NoWitnessAtAnyDepth,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodUpgrade {
    pub certificate: PeriodCertificate,
    pub verdict: AllDepthVerdict,
}

/// Outcome of a depth-bounded witness search for one `(x, t)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeWitness {
    #[serde(with = "rat_str")]
    pub x: Rat,
    #[serde(with = "rat_str")]
    pub t: Rat,
    /// least `n ≤ depth` with `x·a_n + t` outside the set
    pub witness_index: Option<u64>,
    pub depth: u64,
    /// how far the witness value clears the membership boundary
    #[serde(with = "rat_opt_str")]
    pub margin: Option<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upgrade: Option<PeriodUpgrade>,
}

impl EscapeWitness {
    /// Conclusive means either a witness was found or the all-depth
    /// no-witness certificate applies.
    pub fn conclusive(&self) -> bool {
        self.witness_index.is_some()
            || self
                .upgrade
                .as_ref()
                .is_some_and(|u| u.verdict == AllDepthVerdict::NoWitnessAtAnyDepth)
    }
}

/// Least `n ≤ depth` with `x·a_n + t` outside the avoider, with the
/// periodicity upgrade where the orbit and the membership predicate
/// are both torus-periodic (integer power base, period-one strip).
pub fn find_escape_witness(
    a: &AvoiderSet,
    s: &SequenceSpec,
    x: &Rat,
    t: &Rat,
    depth: u64,
) -> Result<EscapeWitness> {
    if x.is_zero() {
        return Err(Error::InvalidParameter(
            "escape search needs a nonzero dilation".into(),
        ));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be positive".into()));
    }

    // periodicity upgrade: <x·b^n + t> is determined by b^n mod L
    let cert = if a.is_torus_periodic() {
        s.integer_base().and_then(|b| {
            let modulus: BigInt = x.denom().lcm(t.denom());
            eventual_period(&BigInt::from(b), &modulus).ok()
        })
    } else {
        None
    };
    let horizon = cert.as_ref().map(|c| c.preperiod + c.period.max(1));
    let scan_to = horizon.map_or(depth, |h| depth.min(h));

    let mut witness_index = None;
    let mut margin = None;
    let mut witness_in_cycle = false;
    if a.is_torus_periodic() {
        // membership depends on the fractional part alone
        let points = crate::orbits::torus_orbit(s, x, t, scan_to)?;
        for (idx, p) in points.iter().enumerate() {
            if !a.contains(p)? {
                let n = idx as u64 + 1;
                if witness_index.is_none() {
                    witness_index = Some(n);
                    margin = a.witness_margin(p)?;
                }
                if let Some(c) = &cert {
                    if n > c.preperiod {
                        witness_in_cycle = true;
                        break;
                    }
                } else {
                    break;
                }
            }
        }
    } else {
        for n in 1..=scan_to {
            let v = x * s.term(n)?.value + t;
            if !a.contains(&v)? {
                witness_index = Some(n);
                margin = a.witness_margin(&v)?;
                break;
            }
        }
    }

    let upgrade = cert.and_then(|certificate| {
        let h = certificate.preperiod + certificate.period.max(1);
        if witness_in_cycle {
            Some(PeriodUpgrade {
                certificate,
                verdict: AllDepthVerdict::EscapesInfinitelyOften,
            })
        } else if witness_index.is_none() && depth >= h {
            Some(PeriodUpgrade {
                certificate,
                verdict: AllDepthVerdict::NoWitnessAtAnyDepth,
            })
        } else {
            None
        }
    });

    Ok(EscapeWitness {
        x: x.clone(),
        t: t.clone(),
        witness_index,
        depth,
        margin,
        upgrade,
    })
}

/// Deterministic table of witness searches over a dilation/translation
/// grid. Cells are independent and evaluated in parallel; assembly
/// order is the input order.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub cells: Vec<EscapeWitness>,
    pub max_witness_index: Option<u64>,
    pub inconclusive: u64,
}

pub fn grid_escape_scan(
    a: &AvoiderSet,
    s: &SequenceSpec,
    x_grid: &[Rat],
    t_grid: &[Rat],
    depth: u64,
) -> Result<ScanReport> {
    let cells: Result<Vec<EscapeWitness>> = x_grid
        .par_iter()
        .flat_map(|x| t_grid.par_iter().map(move |t| (x, t)))
        .map(|(x, t)| find_escape_witness(a, s, x, t, depth))
        .collect();
    let cells = cells?;
    let max_witness_index = cells.iter().filter_map(|c| c.witness_index).max();
    let inconclusive = cells.iter().filter(|c| !c.conclusive()).count() as u64;
    Ok(ScanReport {
        cells,
        max_witness_index,
        inconclusive,
    })
}

/// CSV matrix `(x, t, witness_index)`; empty index means inconclusive
/// or certified witness-free (see the JSON report for which).
pub fn scan_csv(r: &ScanReport) -> String {
    let mut out = String::from("x,t,witness_index\n");
    for c in &r.cells {
        out.push_str(&format!(
            "{},{},{}\n",
            format_rat(&c.x),
            format_rat(&c.t),
            c.witness_index.map_or(String::new(), |n| n.to_string())
        ));
    }
    out
}

/// Membership of the replayed witness value (None when no witness).
pub fn replay_witness(a: &AvoiderSet, s: &SequenceSpec, w: &EscapeWitness) -> Result<Option<bool>> {
    match w.witness_index {
        None => Ok(None),
        Some(n) => {
            let v = &w.x * s.term(n)?.value + &w.t;
            Ok(Some(a.contains(&v)?))
        }
    }
}
