//! Discontinuous Galerkin discretisations of scalar viscous conservation laws
//! with reconstruction-based a posteriori estimators, and the model adaptation
//! loop that switches each cell between the viscous ("complex") and the
//! inviscid ("simple") model.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: periodic/Dirichlet interval meshes and Cartesian meshes.
//! * [`dg`]: Gauss quadrature, nodal bases, fields, projections, traces,
//!   discrete gradients and the interior penalty form.
//! * [`flux`]: flux models and the Richtmyer numerical flux.
//! * [`solver`]: hyperbolic right-hand side and first order IMEX stepping.
//! * [`reconstruction`]: flux and solution reconstructions and the residual split.
//! * [`estimator`]: modelling and discretisation terms, the dual norm and the
//!   total bound.
//! * [`systems`]: relative entropy toolkit for isothermal Navier-Stokes and
//!   Navier-Stokes-Fourier.
//! * [`adaptivity`]: marking/coarsening of the model field and the adaptive driver.
//! * [`cli_io`]: presets, configuration files, CSV and field dumps.

pub mod adaptivity;
pub mod cli_io;
pub mod dg;
pub mod error;
pub mod estimator;
pub mod flux;
pub mod linalg;
pub mod mesh;
pub mod reconstruction;
pub mod solver;
pub mod systems;

pub use error::{Error, Result};
