//! Zeta-regularized determinants and gluing.
//!
//! Spectra of model cross-sections feed zeta functions of shifted operators;
//! cylinder and Dirichlet-to-Neumann determinants are assembled from them and
//! compared across a cut in [`glue`].

pub mod error;
pub mod special;
pub mod spectra;
pub mod zeta;
pub mod cylinder;
pub mod dtn;
pub mod glue;
pub mod symbols;

pub use cylinder::{cylinder_log_det, cylinder_log_det_2d, BoundaryCondition, CylinderOp, LogDet};
pub use dtn::{dtn_eigenvalue, dtn_log_det, min_block_eigen, perturbation_bound, DtnFamily};
pub use error::{Error, Result};
pub use glue::{
    adiabatic_limit, check_gluing, check_power_gluing_m2, torsion_report, GeometryConfig, Identity, Report,
    ReportRow, Tolerances,
};
pub use spectra::{enumerate_spectrum, heat_expansion, CrossSection, Eigenvalue, SpectralModel};
pub use symbols::{ricatti_expansion, smoothing_decay_check, SymbolExpansion, TrigPotential};
pub use zeta::{zeta_invariants, zeta_shifted, RayShift};
