//! Fourier restriction on the parabola over (Z/NZ)^2.
//!
//! The crate computes both sides of the restriction, extension and
//! uncertainty inequalities for the parabola `{(t, t^2)}`, fuzzes them, and
//! recovers sparse signals whose spectrum is missing along a frequency set,
//! either by l1 minimization or by least squares on a known support.

pub mod error;
pub mod fourier;
pub mod parabola;
pub mod recovery;
pub mod report;
pub mod restriction;
pub mod rng;
pub mod testfn;
pub mod zmod;

pub use error::{Error, Result};
pub use fourier::{dft, idft, lp_norm, normalized_lp_norm, GridJson, Signal2D, Spectrum2D};
pub use parabola::{
    build_parabola, decay_profile, energy_exact, exp_sum, extend_from, random_subset, restrict_to, DecayProfile,
    EnergyReport, ParabolaSet,
};
pub use recovery::{
    ds_threshold, erase, improved_threshold, least_squares_recover, logan_recover, project_feasible, random_instance,
    threshold_sweep, Amplitudes, LoganParams, RecoveryProblem, RecoveryResult, RecoveryStatus, SweepConfig, SweepRow,
};
pub use report::{summarize, write_csv, Summary, SummaryRow};
pub use restriction::{
    fuzz_extension, fuzz_main_theorem, fuzz_restriction, restriction_lhs, restriction_report, sharpness_probe,
    support_lower_bound, uncertainty_search, universal_certificate, verify_dual, verify_l1_l2, verify_main_theorem,
    ExtensionCheck, FuzzPlan, ProbeConfig, RestrictionParams, RestrictionReport, SearchConfig, SharpnessReport,
    UncertaintyVerdict, UniversalCertificate,
};
pub use zmod::{count_square_roots, crt_combine, make_ring, square_roots_mod, RingContext};
