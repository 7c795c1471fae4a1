//! Semi-discrete dG operators and first order IMEX time stepping.

mod scheme1d;
mod scheme2d;

use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra_sparse::{CooMatrix, CsrMatrix};

pub use scheme1d::{EdgeData1D, Scheme1D};
pub use scheme2d::{EdgeData2D, Scheme2D};

use crate::adaptivity::ModelField;
use crate::dg::DgField;
use crate::flux::{FluxModel, NumericalFlux, Richtmyer};
use crate::linalg::pcg;
use crate::mesh::Boundary;
use crate::{Error, Result};

/// Initial data `u_0`.
#[derive(Clone)]
pub enum InitialCondition {
    /// `sin(x)` (first coordinate).
    Sine,
    /// `exp(-a |x|^2)`.
    Gaussian { a: f64 },
    Constant(f64),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl InitialCondition {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Sine => x[0].sin(),
            Self::Gaussian { a } => (-a * x.iter().map(|v| v * v).sum::<f64>()).exp(),
            Self::Constant(c) => *c,
            Self::Custom(f) => f(x),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Sine => "sine".into(),
            Self::Gaussian { a } if *a == 10.0 => "gaussian".into(),
            Self::Gaussian { a } => format!("gaussian({a})"),
            Self::Constant(c) => format!("constant({c})"),
            Self::Custom(_) => "custom".into(),
        }
    }
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parameters of the space-time discretisation.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub flux: Arc<dyn FluxModel>,
    pub numflux: Arc<dyn NumericalFlux>,
    pub degree: usize,
    pub tau: f64,
    pub t_final: f64,
    pub sigma: f64,
    pub eps: f64,
    pub boundary: Boundary,
    pub initial: InitialCondition,
}

impl SolverConfig {
    /// Richtmyer flux on the default state set, `sigma = 10`.
    pub fn new(flux: Arc<dyn FluxModel>, degree: usize, tau: f64, t_final: f64, eps: f64, boundary: Boundary, initial: InitialCondition) -> Self {
        Self {
            flux,
            numflux: Arc::new(Richtmyer::default()),
            degree,
            tau,
            t_final,
            sigma: 10.0,
            eps,
            boundary,
            initial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.t_final > 0.0) {
            return Err(Error::InvalidConfiguration("tau and T must be positive".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("penalty sigma must be positive, got {}", self.sigma)));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidConfiguration("eps must be non-negative".into()));
        }
        Ok(())
    }

    /// Number of steps `n` with `n tau <= T`.
    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.tau) * (1.0 + 1e-12)).floor() as usize
    }
}

/// One accepted time step of a trajectory.
#[derive(Clone, Debug)]
pub struct TimestepRecord {
    pub t: f64,
    pub v_h: DgField,
    pub eps_hat: ModelField,
    pub em_inc: f64,
    pub ed_inc: f64,
}

/// Hyperbolic right-hand side `H(v)` together with the edge data it used.
#[derive(Clone, Debug)]
pub struct Hyperbolic<E> {
    pub rhs: DgField,
    pub edges: E,
}

/// A dG discretisation that can be advanced in time.
pub trait Scheme {
    type Edges: Clone + fmt::Debug;

    fn config(&self) -> &SolverConfig;
    fn n_cells(&self) -> usize;
    fn cell_measures(&self) -> Vec<f64>;
    fn initial_field(&self) -> Result<DgField>;

    /// `H` with `M H = int f(v) . grad phi - int_E F(v-, v+) [phi]`.
    fn hyperbolic(&self, v: &DgField) -> Result<Hyperbolic<Self::Edges>>;

    /// Diagonal of the mass matrix, in field layout.
    fn mass_diagonal(&self) -> &[f64];

    fn ip_matrix(&self, eps: &[f64]) -> Result<CsrMatrix<f64>>;

    fn stepper(&self) -> &ImexCache;

    /// Solve `(M + tau A(eps_hat)) v_new = M v + tau M H(v)`.
    fn imex_step(&self, v: &DgField, hyp: &Hyperbolic<Self::Edges>, eps_hat: &ModelField) -> Result<DgField> {
        let tau = self.config().tau;
        let explicit = v.axpy(tau, &hyp.rhs);
        if eps_hat.all_simple() {
            return Ok(explicit);
        }
        let m = self.mass_diagonal();
        let b: Vec<f64> = explicit.values().iter().zip(m).map(|(x, m)| m * x).collect();
        let mut x = explicit.values().to_vec();
        self.stepper().solve(eps_hat, tau, m, |e| self.ip_matrix(e), &b, &mut x)?;
        Ok(DgField::from_values(v.shape(), x))
    }

    /// Discrete diffusion `D_h = -M^{-1} A(eps_hat) v`.
    fn diffusion(&self, v: &DgField, eps_hat: &ModelField) -> Result<DgField> {
        let mut out = DgField::zeros(v.shape());
        if eps_hat.all_simple() {
            return Ok(out);
        }
        let a = self.ip_matrix(&eps_hat.values())?;
        crate::linalg::spmv(&a, v.values(), out.values_mut());
        for (o, m) in out.values_mut().iter_mut().zip(self.mass_diagonal()) {
            *o = -*o / m;
        }
        Ok(out)
    }

    fn l2_norm(&self, v: &DgField) -> f64 {
        v.values()
            .iter()
            .zip(self.mass_diagonal())
            .map(|(x, m)| m * x * x)
            .sum::<f64>()
            .sqrt()
    }

    fn integral(&self, v: &DgField) -> f64 {
        v.values().iter().zip(self.mass_diagonal()).map(|(x, m)| m * x).sum()
    }
}

/// Caches the IMEX system matrices of the two most recent model fields, so
/// an adaptive run and its full-model reference can share one scheme.
#[derive(Debug, Default)]
pub struct ImexCache {
    slots: Mutex<Vec<(Vec<bool>, f64, CsrMatrix<f64>)>>,
}

impl ImexCache {
    fn solve(
        &self,
        eps_hat: &ModelField,
        tau: f64,
        mass: &[f64],
        assemble: impl Fn(&[f64]) -> Result<CsrMatrix<f64>>,
        b: &[f64],
        x: &mut [f64],
    ) -> Result<()> {
        let mut slots = self.slots.lock().expect("imex cache poisoned");
        let hit = slots
            .iter()
            .position(|(act, e, _)| act.as_slice() == eps_hat.active() && *e == eps_hat.eps());
        match hit {
            Some(i) => slots[..=i].rotate_right(1),
            None => {
                let a = assemble(&eps_hat.values())?;
                let n = mass.len();
                let mut coo = CooMatrix::new(n, n);
                for (i, m) in mass.iter().enumerate() {
                    coo.push(i, i, *m);
                }
                for (i, j, v) in a.triplet_iter() {
                    coo.push(i, j, tau * v);
                }
                slots.insert(0, (eps_hat.active().to_vec(), eps_hat.eps(), CsrMatrix::from(&coo)));
                slots.truncate(2);
            }
        }
        pcg(&slots[0].2, b, x, 1e-13, 20 * b.len() + 100)?;
        Ok(())
    }
}

/// Advance with the full model `eps_hat = eps` for every step, recording the
/// initial state, every `record_every`-th step and the final step.
pub fn run_reference<S: Scheme>(scheme: &S, record_every: usize) -> Result<Vec<TimestepRecord>> {
    let record_every = record_every.max(1);
    let cfg = scheme.config();
    let eps_hat = ModelField::full(scheme.n_cells(), cfg.eps);
    let mut v = scheme.initial_field()?;
    let mut out = vec![TimestepRecord {
        t: 0.0,
        v_h: v.clone(),
        eps_hat: eps_hat.clone(),
        em_inc: 0.0,
        ed_inc: 0.0,
    }];
    let steps = cfg.n_steps();
    for n in 1..=steps {
        let hyp = scheme.hyperbolic(&v)?;
        v = scheme.imex_step(&v, &hyp, &eps_hat)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("solution at step {n}")));
        }
        if n % record_every != 0 && n != steps {
            continue;
        }
        out.push(TimestepRecord {
            t: n as f64 * cfg.tau,
            v_h: v.clone(),
            eps_hat: eps_hat.clone(),
            em_inc: 0.0,
            ed_inc: 0.0,
        });
    }
    Ok(out)
}
