//! Numerical toolkit for energies of punctured pseudo-holomorphic maps into a
//! ball with a cylindrical end over the round sphere.
//!
//! The crate is organized bottom-up: `geometry` builds the end model (charts,
//! almost complex structures, frame splitting, Reeb dynamics, decay fits),
//! `forms` the covector fields and derived two-forms, `curves` the map
//! catalogue, `energy` the quadrature stack, and `theorems` the verification
//! harness consumed by the command-line driver.

pub mod catalog;
pub mod curves;
pub mod energy;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod linalg;
pub mod report;
pub mod theorems;

pub use catalog::{standard_catalog, CatalogEntry};
pub use curves::{
    asymptotic_orbit, cr_residual, multiplicity_at_point, to_cylinder, total_multiplicity,
    AsymptoticData, CurveMap, CylinderCurve, CylinderKind, MultiplicityRecord, PolyMap,
    PuncturedCurve,
};
pub use energy::{
    ball_area, bathtub_optimum, e_lambda, e_lambda_lower_bound, e_lambda_lower_bound_profile,
    e_omega, e_symp_a, e_symp_limit, energy_report, lambda_mass_profile, stokes_crosscheck,
    BathtubSolution, EnergyReport, LambdaProfile,
};
pub use error::{Error, Result};
pub use forms::{
    d_lambda_inf_form, dr_form, dr_wedge_lambda_inf_form, estimate_constants,
    fd_exterior_derivative, j_positivity_infimum, lambda_inf_form, omega_form, omega_from_limit,
    omega_inf_form, omega_prime_form, pullback_density, sigma_lambda_form, OneForm,
    PositivityConstants, TwoForm,
};
pub use report::{
    checks_csv, energies_csv, energy_vs_a_svg, hbar_svg, monotonicity_csv, run, run_acs_suite,
    run_energy_suite, run_monotonicity_suite, run_theorem3_suite, CheckRecord, Measured, Report,
    RunSpec, SCHEMA_VERSION,
};
pub use theorems::{
    check_convergence, check_corollary, check_energy_bound, check_energy_bound_multi,
    check_finiteness_equivalences, check_monotonicity, monotonicity_sweep, BoundCheck,
    ConvergenceRecord, CorollaryRecord, FinitenessRecord, MonotonicityReport, MonotonicityRow,
};
pub use geometry::{
    acc1_decay_estimate, chart_to_cylinder, constant_orbit, cylinder_to_chart,
    detect_simple_period, orbit_action, orbit_action_lambda_st, pushforward_acs, reeb_flow,
    reeb_flow_pushforward, reeb_limit_field, splitting_at, standard_cylindrical_acs, AcsField,
    AcsKind, ChartPoint, DecayFit, Diffeo, EndModel, EndSign, FrameSplitting, ReebOrbit,
    TangentVector,
};
