//! Quantum Otto engines whose working medium is one anyon on a flux ring or
//! two Calogero–Sutherland anyons on a ring.
//!
//! * [`special_functions`]: θ₃, partial theta and weighted Gaussian lattice
//!   sums with certified truncation.
//! * [`spectra`]: level families, level enumeration, Pauli energy.
//! * [`thermo`]: Gibbs ensembles and the heat/work split.
//! * [`otto`]: the four-stroke cycle, its discretisation and sweeps.
//! * [`closed_form`]: theta-function forms of the cycle quantities, each
//!   checked against direct summation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod otto;
pub mod special_functions;
pub mod spectra;
pub mod thermo;

pub use closed_form::{CheckSettings, ClosedFormReport, EfficiencyCheck, FormulaVariant};
pub use error::{Error, Result};
pub use otto::{
    run_cycle, CycleMedium, CycleReport, MediumKind, OttoCycleSpec, Regime, SweepAxis, SweepRow,
};
pub use special_functions::SumAccuracy;
pub use spectra::{CsPairSpectrum, Label, LevelSet, RingAnyonSpectrum, Spectrum, WorkingMedium};
pub use thermo::{GibbsEnsemble, PathStep};
