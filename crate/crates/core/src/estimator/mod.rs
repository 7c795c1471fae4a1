//! A posteriori modelling and discretisation estimators: per-cell terms
//! `E_M`, `E_D`, the dual norm of the parabolic residual and the total bound
//! with its Gronwall weight.

mod dual;
mod one_d;
mod two_d;

pub use dual::{DualNorm1D, DualNorm2D, DualSolution};
pub use one_d::{modeling_term_1d, Estimator1D, Reconstruction1D};
pub use two_d::{modeling_term_2d, Estimator2D, Reconstruction2D};

use crate::adaptivity::ModelField;
use crate::dg::DgField;
use crate::solver::{Hyperbolic, Scheme};
use crate::{Error, Result};

/// Per-cell discretisation term `|R_H|_K^2 + e_K / eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizationTerm {
    pub cells: Vec<f64>,
    pub total: f64,
    /// `|R_H|_{L2}^2`.
    pub r_h_sq: f64,
    /// `|R_P|_{H^-1}^2`.
    pub r_p_sq: f64,
}

/// Combine `|R_H|^2` per cell with the dual energy of `R_P` weighted by `1 / eps`.
pub fn discretization_term(r_h_cells: &[f64], r_p: &DualSolution, eps: f64) -> Result<DiscretizationTerm> {
    if r_p.norm_sq > 0.0 && !(eps > 0.0) {
        return Err(Error::InvalidConfiguration(
            "parabolic residual is nonzero but eps = 0".into(),
        ));
    }
    let cells: Vec<f64> = if r_p.norm_sq > 0.0 {
        r_h_cells.iter().zip(&r_p.cell_energy).map(|(h, e)| h + e / eps).collect()
    } else {
        r_h_cells.to_vec()
    };
    let r_h_sq = r_h_cells.iter().sum();
    Ok(DiscretizationTerm {
        total: cells.iter().sum(),
        cells,
        r_h_sq,
        r_p_sq: r_p.norm_sq,
    })
}

/// Indicator data for one time step `t_n -> t_{n+1}`, per unit time.
#[derive(Clone, Debug, PartialEq)]
pub struct StepIndicators {
    /// `int_K (eps - eps_hat) |grad v_hat|^2`.
    pub modeling: Vec<f64>,
    /// `int_K eps |grad v_hat|^2`, the modelling term the cell would carry
    /// under the simple model.
    pub potential: Vec<f64>,
    pub discretization: DiscretizationTerm,
    /// Largest `|grad v_hat|` over quadrature points and cell ends.
    pub grad_max: f64,
    /// `|v_hat - v_h|_{L2}^2` at `t_{n+1}`.
    pub gap_sq: f64,
}

/// Computes reconstructions and step indicators for one discretisation.
pub trait Estimator {
    type Scheme: Scheme;
    type Recon: Clone;

    fn scheme(&self) -> &Self::Scheme;

    fn reconstruct(&self, v: &DgField, hyp: &Hyperbolic<<Self::Scheme as Scheme>::Edges>) -> Result<Self::Recon>;

    /// Indicators of the step from `prev` to `next`, taken with `eps_hat`.
    fn indicators(&self, prev: (&DgField, &Self::Recon), next: (&DgField, &Self::Recon), eps_hat: &ModelField) -> Result<StepIndicators>;

    /// `|u_0 - v_hat(0)|_{L2}^2`.
    fn initial_error_sq(&self, recon: &Self::Recon) -> f64;

    /// Largest `|grad v_hat|` over quadrature points and cell ends.
    fn grad_max(&self, recon: &Self::Recon) -> f64;

    /// `|v_hat - v_h|_{L2}^2`.
    fn gap_sq(&self, v: &DgField, recon: &Self::Recon) -> f64;

    /// Value of `v_hat` at a physical point, if it lies in the domain.
    fn recon_value(&self, recon: &Self::Recon, x: &[f64]) -> Option<f64>;
}

/// Running totals of the estimator along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorBreakdown {
    pub t: f64,
    /// `|u_0 - v_hat(0)|^2`.
    pub init_term: f64,
    /// `C_f` of the flux on the state set.
    pub c_f: f64,
    pub cum_em: f64,
    pub cum_ed: f64,
    /// Running maximum of `|grad v_hat|_{L_inf}`.
    pub grad_max: f64,
    pub em_inc: f64,
    pub ed_inc: f64,
    /// Per-cell time-weighted increments of the latest step.
    pub cell_em: Vec<f64>,
    pub cell_ed: Vec<f64>,
}

impl EstimatorBreakdown {
    pub fn new(init_term: f64, c_f: f64, grad_max: f64, n_cells: usize) -> Self {
        Self {
            t: 0.0,
            init_term,
            c_f,
            cum_em: 0.0,
            cum_ed: 0.0,
            grad_max,
            em_inc: 0.0,
            ed_inc: 0.0,
            cell_em: vec![0.0; n_cells],
            cell_ed: vec![0.0; n_cells],
        }
    }

    /// Add one step of length `tau` ending at `t`.
    pub fn accumulate(&mut self, t: f64, tau: f64, step: &StepIndicators) {
        self.t = t;
        self.cell_em = step.modeling.iter().map(|e| tau * e.max(0.0)).collect();
        self.cell_ed = step.discretization.cells.iter().map(|e| tau * e.max(0.0)).collect();
        self.em_inc = self.cell_em.iter().sum();
        self.ed_inc = self.cell_ed.iter().sum();
        self.cum_em += self.em_inc;
        self.cum_ed += self.ed_inc;
        self.grad_max = self.grad_max.max(step.grad_max);
    }

    /// `exp((|grad v_hat|_{L_inf(0,t)} C_f + 1) t)`.
    pub fn gronwall_factor(&self) -> f64 {
        ((self.grad_max * self.c_f + 1.0) * self.t).exp()
    }

    pub fn total_bound(&self) -> f64 {
        total_bound(self, self.t)
    }
}

/// `(init + E_M + E_D) exp((|grad v_hat|_{L_inf} C_f + 1) t)`.
pub fn total_bound(b: &EstimatorBreakdown, t: f64) -> f64 {
    (b.init_term + b.cum_em + b.cum_ed) * ((b.grad_max * b.c_f + 1.0) * t).exp()
}
