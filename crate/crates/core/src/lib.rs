//! Exact construction and verification of "large" subsets of the real
//! line that avoid every affine copy of a prescribed sequence.
//!
//! A set is `(1−ε)`-large when it meets every unit interval in measure
//! at least `1−ε`. This crate builds the explicit avoider sets for
//! several sequence families, certifies their largeness by an exact
//! rational sweep, hunts for escape witnesses (indices where a dilated
//! and translated copy leaves the set), and probes the exceptional
//! dilations whose fractional-part orbits fail to fill the circle.
//!
//! Everything is exact rational arithmetic; irrational inputs enter as
//! continued-fraction convergents with recorded error bounds.

pub mod constructions;
pub mod error;
pub mod interval;
pub mod orbits;
pub mod rat;
pub mod sequences;
pub mod verification;

pub use constructions::{
    integer_power_membership, pair, reduced_length_rational, unpair, AvoiderDescriptor,
    AvoiderKind, AvoiderSet, EnumerationAvoider, StripeFamily,
};
pub use error::{Error, Result};
pub use interval::{
    boolean_combine, min_unit_window_measure, Interval, IntervalSet, PeriodicSet, SetOp, Window,
};
pub use orbits::{
    box_dimension_estimate, chung_erdos_check, delta_escape_probe, dimension_csv,
    exceptional_probe, fractional_orbit, lemma41_exact_measure, max_gap, orbit_stats, probe_csv,
    star_discrepancy, torus_orbit, ChungErdosReport, CongruenceCase, DimensionEstimate,
    ExceptionalProbe, GridSpec, OrbitStats, OverlapReport, ProbeRow,
};
pub use rat::{
    format_rat, fract, named_approximant, parse_rat, parse_value, ApproxRat, Rat,
};
pub use sequences::{
    banach_density_estimate, growth_profile, nth_prime, BlockSchedule, DensityEstimate,
    GrowthProfile, SequenceSpec, Term,
};
pub use verification::{
    eventual_period, find_escape_witness, grid_escape_scan, replay_witness, scan_csv,
    AllDepthVerdict, EscapeWitness, LargenessReport, PeriodCertificate, PeriodUpgrade,
    ScanReport,
};

pub use verification::verify_largeness;
