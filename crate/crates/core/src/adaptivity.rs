//! Model adaptation: per-cell switching between the viscous and the inviscid
//! model driven by the a posteriori indicators.

use crate::dg::DgField;
use crate::estimator::{Estimator, EstimatorBreakdown};
use crate::solver::Scheme;
use crate::{Error, Result};

/// Piecewise constant diffusion coefficient taking only the values `0` and `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelField {
    eps: f64,
    active: Vec<bool>,
}

impl ModelField {
    /// Simple model everywhere.
    pub fn zeros(n_cells: usize, eps: f64) -> Self {
        Self {
            eps,
            active: vec![false; n_cells],
        }
    }

    /// Full model everywhere.
    pub fn full(n_cells: usize, eps: f64) -> Self {
        Self {
            eps,
            active: vec![true; n_cells],
        }
    }

    pub fn from_active(eps: f64, active: Vec<bool>) -> Self {
        Self { eps, active }
    }

    /// Build from per-cell values, each of which must be `0` or `eps`.
    pub fn from_values(eps: f64, values: &[f64]) -> Result<Self> {
        let active = values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if v == 0.0 {
                    Ok(false)
                } else if v == eps {
                    Ok(true)
                } else {
                    Err(Error::InvalidParameter(format!(
                        "model value {v} on cell {k} is neither 0 nor {eps}"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eps, active })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.active[k]
    }

    pub fn set_active(&mut self, k: usize, on: bool) {
        self.active[k] = on;
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.active[k] {
            self.eps
        } else {
            0.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn active_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, &a)| a).map(|(k, _)| k)
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Total measure of the cells running the full model.
    pub fn active_measure(&self, cell_measure: &[f64]) -> f64 {
        self.active_cells().map(|k| cell_measure[k]).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.eps == 0.0 || !self.active.iter().any(|&a| a)
    }
}

/// Parameters of the model adaptation loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptConfig {
    pub tol: f64,
    pub tol_c: f64,
    pub eps: f64,
    /// Dörfler fraction in `(0, 1]`.
    pub theta: f64,
}

impl AdaptConfig {
    pub fn new(tol: f64, tol_c: f64, eps: f64) -> Self {
        Self {
            tol,
            tol_c,
            eps,
            theta: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.tol_c > 0.0) {
            return Err(Error::InvalidConfiguration("tol and tol_c must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "marking fraction must lie in (0, 1], got {}",
                self.theta
            )));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidConfiguration("eps must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of one adaptation call.
#[derive(Clone, Debug, PartialEq)]
pub struct Adaptation {
    pub field: ModelField,
    /// Cells selected by the marking step (ascending).
    pub marked: Vec<usize>,
    /// Cells switched back to the simple model (ascending).
    pub coarsened: Vec<usize>,
    /// Global indicator `sum(E_D + E_M)` that was compared with `tol`.
    pub total: f64,
}

/// Smallest set of cells whose indicators cover `theta` of the total, taking
/// cells by decreasing indicator and breaking ties by index.
pub fn dorfler_mark(indicator: &[f64], theta: f64) -> Vec<usize> {
    let total: f64 = indicator.iter().sum();
    let mut order: Vec<usize> = (0..indicator.len()).collect();
    order.sort_by(|&a, &b| indicator[b].total_cmp(&indicator[a]).then(a.cmp(&b)));
    let goal = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for k in order {
        if acc >= goal {
            break;
        }
        acc += indicator[k];
        marked.push(k);
    }
    marked.sort_unstable();
    marked
}

/// One pass of the adaptation algorithm.
///
/// `indicator[k]` is the per-cell `E_D + E_M` of the current step, `modelling[k]`
/// the quantity compared against `|K| tol_c tol / eps` for coarsening, and
/// `measure[k] = |K|`.
pub fn adapt_model(
    indicator: &[f64],
    modelling: &[f64],
    measure: &[f64],
    eps_hat: &ModelField,
    cfg: &AdaptConfig,
) -> Adaptation {
    let mut field = eps_hat.clone();
    let total: f64 = indicator.iter().sum();
    let marked = if total > cfg.tol {
        dorfler_mark(indicator, cfg.theta)
    } else {
        Vec::new()
    };
    for &k in &marked {
        field.set_active(k, true);
    }
    let mut coarsened = Vec::new();
    for k in 0..field.len() {
        let keep = cfg.eps > 0.0 && modelling[k] >= measure[k] * cfg.tol_c * cfg.tol / cfg.eps;
        if !keep {
            if field.is_active(k) {
                coarsened.push(k);
            }
            field.set_active(k, false);
        }
    }
    Adaptation {
        field,
        marked,
        coarsened,
        total,
    }
}

/// Options of an adaptive run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Stop after this many steps even if `T` is not reached.
    pub max_steps: Option<usize>,
    /// Advance a full-model reference in lockstep and report the distance.
    pub reference: bool,
    /// Times at which fields are kept; each is matched to the nearest step.
    pub snapshot_times: Vec<f64>,
}

/// Scalar record of one step of an adaptive run.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSummary {
    pub step: usize,
    pub t: f64,
    pub em_inc: f64,
    pub ed_inc: f64,
    pub cum_em: f64,
    pub cum_ed: f64,
    pub total_bound: f64,
    pub grad_max: f64,
    pub gronwall: f64,
    /// `|v_hat - v_h|_{L2}`.
    pub recon_gap: f64,
    /// Measure of `{eps_hat = eps}` after adaptation.
    pub active_measure: f64,
    pub marked: usize,
    pub coarsened: usize,
    /// `|u_h - u_{eps,h}|` in `L2` and at the nodes, when a reference runs.
    pub error_l2: Option<f64>,
    pub error_linf: Option<f64>,
}

/// Fields kept at a snapshot time.
#[derive(Clone, Debug)]
pub struct Snapshot<R> {
    pub t: f64,
    pub v_h: DgField,
    pub recon: R,
    /// Model field in force after adaptation at `t`.
    pub eps_hat: ModelField,
    pub reference: Option<DgField>,
}

/// Outcome of [`run_adaptive`].
#[derive(Clone, Debug)]
pub struct AdaptiveRun<R> {
    pub steps: Vec<StepSummary>,
    /// `history[n]` is the model field used for the step from `t_n` to `t_{n+1}`.
    pub history: Vec<ModelField>,
    pub snapshots: Vec<Snapshot<R>>,
    pub breakdown: EstimatorBreakdown,
    pub final_field: DgField,
    pub final_model: ModelField,
}

/// Model adaptive time stepping: start from `eps_hat = 0`, advance one step
/// with the current model field, evaluate `E_M`, `E_D` and adapt the field
/// for the next step.
///
/// Indicators enter the adaptation as rates per unit time. Marking uses
/// `E_M + E_D` per cell; coarsening compares `eps int_K |grad v_hat|^2`, the
/// modelling term the cell would carry under the simple model, with
/// `|K| tol_c tol / eps`.
pub fn run_adaptive<E: Estimator>(est: &E, adapt: &AdaptConfig, opts: &RunOptions) -> Result<AdaptiveRun<E::Recon>> {
    adapt.validate()?;
    let scheme = est.scheme();
    let cfg = scheme.config();
    if adapt.eps != cfg.eps {
        return Err(Error::InvalidConfiguration(format!(
            "adaptation eps {} differs from solver eps {}",
            adapt.eps, cfg.eps
        )));
    }
    let tau = cfg.tau;
    let n_steps = opts.max_steps.map_or(cfg.n_steps(), |m| m.min(cfg.n_steps()));
    let measure = scheme.cell_measures();
    let c_f = cfg.flux.second_derivative_bound(cfg.numflux.state_set());
    let full = ModelField::full(scheme.n_cells(), cfg.eps);

    let mut v = scheme.initial_field()?;
    let mut hyp = scheme.hyperbolic(&v)?;
    let mut recon = est.reconstruct(&v, &hyp)?;
    let mut v_ref = opts.reference.then(|| v.clone());
    let mut eps_hat = ModelField::zeros(scheme.n_cells(), cfg.eps);
    let mut breakdown = EstimatorBreakdown::new(est.initial_error_sq(&recon), c_f, est.grad_max(&recon), scheme.n_cells());

    let mut pending: Vec<f64> = opts.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let mut snapshots = Vec::new();
    let mut take = |t: f64, v: &DgField, recon: &E::Recon, eps_hat: &ModelField, v_ref: &Option<DgField>, pending: &mut Vec<f64>| {
        while pending.last().is_some_and(|&ts| ts <= t + 0.5 * tau) {
            pending.pop();
            snapshots.push(Snapshot {
                t,
                v_h: v.clone(),
                recon: recon.clone(),
                eps_hat: eps_hat.clone(),
                reference: v_ref.clone(),
            });
        }
    };
    take(0.0, &v, &recon, &eps_hat, &v_ref, &mut pending);

    let mut steps = Vec::with_capacity(n_steps);
    let mut history = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let t = n as f64 * tau;
        let v_next = scheme.imex_step(&v, &hyp, &eps_hat)?;
        if !v_next.is_finite() {
            return Err(Error::NonFinite(format!("solution at step {n}")));
        }
        let hyp_next = scheme.hyperbolic(&v_next)?;
        let recon_next = est.reconstruct(&v_next, &hyp_next)?;
        let ind = est.indicators((&v, &recon), (&v_next, &recon_next), &eps_hat)?;
        breakdown.accumulate(t, tau, &ind);
        let indicator: Vec<f64> = ind
            .modeling
            .iter()
            .zip(&ind.discretization.cells)
            .map(|(a, b)| a.max(0.0) + b.max(0.0))
            .collect();
        let adaptation = adapt_model(&indicator, &ind.potential, &measure, &eps_hat, adapt);

        let (error_l2, error_linf) = match v_ref.as_mut() {
            Some(r) => {
                let rh = scheme.hyperbolic(r)?;
                *r = scheme.imex_step(r, &rh, &full)?;
                let d = v_next.axpy(-1.0, r);
                (Some(scheme.l2_norm(&d)), Some(d.max_abs()))
            }
            None => (None, None),
        };
        history.push(std::mem::replace(&mut eps_hat, adaptation.field));
        steps.push(StepSummary {
            step: n,
            t,
            em_inc: breakdown.em_inc,
            ed_inc: breakdown.ed_inc,
            cum_em: breakdown.cum_em,
            cum_ed: breakdown.cum_ed,
            total_bound: breakdown.total_bound(),
            grad_max: breakdown.grad_max,
            gronwall: breakdown.gronwall_factor(),
            recon_gap: ind.gap_sq.sqrt(),
            active_measure: eps_hat.active_measure(&measure),
            marked: adaptation.marked.len(),
            coarsened: adaptation.coarsened.len(),
            error_l2,
            error_linf,
        });
        if n % 1000 == 0 {
            log::info!(
                "step {n} t={t:.4} bound={:.4e} active={} ",
                breakdown.total_bound(),
                eps_hat.active_count()
            );
        }
        v = v_next;
        hyp = hyp_next;
        recon = recon_next;
        take(t, &v, &recon, &eps_hat, &v_ref, &mut pending);
    }
    Ok(AdaptiveRun {
        steps,
        history,
        snapshots,
        breakdown,
        final_field: v,
        final_model: eps_hat,
    })
}
