//! Relative entropy toolkit for systems: entropy pairs of the isothermal
//! Navier-Stokes (INS) and Navier-Stokes-Fourier (NSF) systems and of the
//! scalar quadratic entropy, relative entropy and its flux, the dissipation
//! functional `D`, checks of the compatibility inequalities and the systems
//! indicators `E_M`, `E_D`.
//!
//! States are conserved variables: `u` for the scalar model, `(rho, rho v)`
//! for INS and `(rho, rho v, e)` for NSF. Gradients are passed as one vector
//! of conserved-variable derivatives per space direction.

mod hypothesis;

pub use hypothesis::{
    check_hypothesis_inequalities, indicator_terms_system, FieldPair, HypothesisReport, PointPair, SystemIndicators,
    SystemSample,
};

use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Barotropic pressure law together with its Helmholtz energy `W`, related
/// by `p'(rho) = rho W''(rho)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureLaw {
    /// `p = c2 rho`, `W = c2 rho ln rho`.
    Isothermal { c2: f64 },
    /// `p = kappa rho^gamma`, `W = kappa rho^gamma / (gamma - 1)`.
    Polytropic { kappa: f64, gamma: f64 },
}

impl PressureLaw {
    pub fn p(&self, rho: f64) -> f64 {
        match *self {
            Self::Isothermal { c2 } => c2 * rho,
            Self::Polytropic { kappa, gamma } => kappa * rho.powf(gamma),
        }
    }

    pub fn dp(&self, rho: f64) -> f64 {
        match *self {
            Self::Isothermal { c2 } => c2,
            Self::Polytropic { kappa, gamma } => kappa * gamma * rho.powf(gamma - 1.0),
        }
    }

    /// `W`, `W'` and `W''`.
    pub fn helmholtz(&self, rho: f64) -> (f64, f64, f64) {
        match *self {
            Self::Isothermal { c2 } => (c2 * rho * rho.ln(), c2 * (rho.ln() + 1.0), c2 / rho),
            Self::Polytropic { kappa, gamma } => (
                kappa * rho.powf(gamma) / (gamma - 1.0),
                kappa * gamma * rho.powf(gamma - 1.0) / (gamma - 1.0),
                kappa * gamma * rho.powf(gamma - 2.0),
            ),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Isothermal { c2 } => c2 > 0.0,
            Self::Polytropic { kappa, gamma } => kappa > 0.0 && gamma > 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("pressure law {self:?} is not monotone")))
        }
    }
}

/// Constitutive part of a [`SystemModel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemKind {
    /// Burgers flux `f_a = u^2 / 2` with `eta = u^2 / 2` and `g_a = d_a u`.
    Scalar,
    Ins { law: PressureLaw },
    Nsf { kappa_over_mu: f64, r: f64, gamma: f64 },
}

/// Box of admissible states in primitive variables: `u` for the scalar model,
/// `(rho, v_1, .., v_d)` for INS and `(rho, v_1, .., v_d, T)` for NSF.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StateBox {
    pub fn scalar(lo: f64, hi: f64) -> Self {
        Self { lo: vec![lo], hi: vec![hi] }
    }

    /// Densities in `rho`, velocity components in `[-speed, speed]`.
    pub fn ins(dim: usize, rho: (f64, f64), speed: f64) -> Self {
        let mut lo = vec![rho.0];
        let mut hi = vec![rho.1];
        lo.extend(std::iter::repeat(-speed).take(dim));
        hi.extend(std::iter::repeat(speed).take(dim));
        Self { lo, hi }
    }

    pub fn nsf(dim: usize, rho: (f64, f64), speed: f64, temp: (f64, f64)) -> Self {
        let mut b = Self::ins(dim, rho, speed);
        b.lo.push(temp.0);
        b.hi.push(temp.1);
        b
    }

    pub fn contains(&self, prim: &[f64]) -> bool {
        prim.len() == self.lo.len()
            && prim.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&x, (&lo, &hi))| {
                let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                x >= lo - slack && x <= hi + slack
            })
    }

    /// Tensor grid with `per_axis` equispaced points per primitive variable.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = per_axis.max(2);
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
            .collect();
        let total = n.pow(axes.len() as u32);
        (0..total)
            .map(|mut idx| {
                axes.iter()
                    .map(|a| {
                        let x = a[idx % n];
                        idx /= n;
                        x
                    })
                    .collect()
            })
            .collect()
    }
}

/// Sampled constants of the entropy on the state set: `c_lower |v|^2 <=
/// v^T D^2 eta v <= c_upper |v|^2` and `|D^3 eta| <= c_third`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyBounds {
    pub c_lower: f64,
    pub c_upper: f64,
    pub c_third: f64,
}

/// Viscous system `u_t + div f(u) = eps div g(u, grad u)` with an entropy pair,
/// a dissipation functional `D` and the compatibility constant `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemModel {
    kind: SystemKind,
    dim: usize,
    mu: f64,
    k: f64,
    set: StateBox,
}

/// Scalar Burgers model with the quadratic entropy.
pub fn scalar_model(dim: usize, mu: f64, set: StateBox) -> Result<SystemModel> {
    SystemModel::new(SystemKind::Scalar, dim, mu, set)
}

/// Isothermal Navier-Stokes with `g_a = (0, d_a v)` and `D = |grad v - grad v~|^2`.
pub fn ins_model(dim: usize, mu: f64, law: PressureLaw, set: StateBox) -> Result<SystemModel> {
    law.validate()?;
    SystemModel::new(SystemKind::Ins { law }, dim, mu, set)
}

/// Navier-Stokes-Fourier for an ideal gas with `g_a = (0, d_a v, v . d_a v +
/// (kappa / mu) d_a T)`.
pub fn nsf_model(dim: usize, mu: f64, kappa_over_mu: f64, r: f64, gamma: f64, set: StateBox) -> Result<SystemModel> {
    if !(r > 0.0 && gamma > 1.0 && kappa_over_mu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need R > 0, gamma > 1, kappa / mu >= 0; got R = {r}, gamma = {gamma}, kappa / mu = {kappa_over_mu}"
        )));
    }
    SystemModel::new(SystemKind::Nsf { kappa_over_mu, r, gamma }, dim, mu, set)
}

impl SystemModel {
    fn new(kind: SystemKind, dim: usize, mu: f64, set: StateBox) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in 1..=3")));
        }
        if !(mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("viscosity {mu} must be non-negative")));
        }
        let model = Self { kind, dim, mu, k: 1.0, set };
        let n_prim = model.n_vars();
        if model.set.lo.len() != n_prim || model.set.hi.len() != n_prim {
            return Err(Error::InvalidState(format!(
                "state set has {} primitive variables, model needs {n_prim}",
                model.set.lo.len()
            )));
        }
        if model.set.lo.iter().zip(&model.set.hi).any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::InvalidState("state set bounds are not ordered".into()));
        }
        if !matches!(kind, SystemKind::Scalar) && !(model.set.lo[0] > 0.0) {
            return Err(Error::InvalidState(format!(
                "state set admits nonpositive density {}",
                model.set.lo[0]
            )));
        }
        if matches!(kind, SystemKind::Nsf { .. }) && !(model.set.lo[n_prim - 1] > 0.0) {
            return Err(Error::InvalidState(format!(
                "state set admits nonpositive temperature {}",
                model.set.lo[n_prim - 1]
            )));
        }
        if let SystemKind::Ins { law } = kind {
            let (lo, hi) = (model.set.lo[0], model.set.hi[0]);
            if (0..=16).any(|i| !(law.dp(lo + (hi - lo) * i as f64 / 16.0) > 0.0)) {
                return Err(Error::InvalidParameter("pressure is not monotone on the density range".into()));
            }
        }
        Ok(model)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Viscosity, identified with the small parameter `eps`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Compatibility constant `k` (default 1).
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn state_set(&self) -> &StateBox {
        &self.set
    }

    pub fn n_vars(&self) -> usize {
        match self.kind {
            SystemKind::Scalar => 1,
            SystemKind::Ins { .. } => 1 + self.dim,
            SystemKind::Nsf { .. } => 2 + self.dim,
        }
    }

    fn cv(&self) -> f64 {
        match self.kind {
            SystemKind::Nsf { r, gamma, .. } => r / (gamma - 1.0),
            _ => 1.0,
        }
    }

    /// Primitive variables of a conserved state.
    pub fn primitive(&self, u: &[f64]) -> Vec<f64> {
        match self.kind {
            SystemKind::Scalar => u.to_vec(),
            SystemKind::Ins { .. } => {
                let mut p = vec![u[0]];
                p.extend(u[1..=self.dim].iter().map(|m| m / u[0]));
                p
            }
            SystemKind::Nsf { .. } => {
                let rho = u[0];
                let v: Vec<f64> = u[1..=self.dim].iter().map(|m| m / rho).collect();
                let kin: f64 = 0.5 * v.iter().map(|x| x * x).sum::<f64>();
                let t = (u[self.dim + 1] / rho - kin) / self.cv();
                let mut p = vec![rho];
                p.extend(v);
                p.push(t);
                p
            }
        }
    }

    /// Conserved state of primitive variables.
    pub fn conserved(&self, prim: &[f64]) -> Vec<f64> {
        match self.kind {
            SystemKind::Scalar => prim.to_vec(),
            SystemKind::Ins { .. } => {
                let mut u = vec![prim[0]];
                u.extend(prim[1..=self.dim].iter().map(|v| prim[0] * v));
                u
            }
            SystemKind::Nsf { .. } => {
                let rho = prim[0];
                let v = &prim[1..=self.dim];
                let kin: f64 = 0.5 * v.iter().map(|x| x * x).sum::<f64>();
                let mut u = vec![rho];
                u.extend(v.iter().map(|x| rho * x));
                u.push(rho * (self.cv() * prim[self.dim + 1] + kin));
                u
            }
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.n_vars() && u.iter().all(|x| x.is_finite()) && self.set.contains(&self.primitive(u))
    }

    pub fn check(&self, u: &[f64]) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::InvalidState(format!("state {u:?} lies outside the admissible set")))
        }
    }

    /// Conserved states on the primitive tensor grid of the state set.
    pub fn sample_states(&self, per_axis: usize) -> Vec<Vec<f64>> {
        self.set.grid(per_axis).iter().map(|p| self.conserved(p)).collect()
    }

    fn pressure(&self, u: &[f64]) -> f64 {
        match self.kind {
            SystemKind::Scalar => 0.0,
            SystemKind::Ins { law } => law.p(u[0]),
            SystemKind::Nsf { gamma, .. } => {
                let m2: f64 = u[1..=self.dim].iter().map(|m| m * m).sum();
                (gamma - 1.0) * (u[self.dim + 1] - 0.5 * m2 / u[0])
            }
        }
    }

    /// Flux `f_a(u)`.
    pub fn flux(&self, u: &[f64], a: usize) -> Vec<f64> {
        match self.kind {
            SystemKind::Scalar => vec![0.5 * u[0] * u[0]],
            SystemKind::Ins { .. } | SystemKind::Nsf { .. } => {
                let d = self.dim;
                let rho = u[0];
                let va = u[1 + a] / rho;
                let p = self.pressure(u);
                let mut f = vec![u[1 + a]];
                f.extend((0..d).map(|i| u[1 + i] * va + if i == a { p } else { 0.0 }));
                if matches!(self.kind, SystemKind::Nsf { .. }) {
                    f.push((u[d + 1] + p) * va);
                }
                f
            }
        }
    }

    /// Jacobian `D f_a(u)`.
    pub fn flux_jacobian(&self, u: &[f64], a: usize) -> DMatrix<f64> {
        let n = self.n_vars();
        let d = self.dim;
        let mut j = DMatrix::zeros(n, n);
        match self.kind {
            SystemKind::Scalar => j[(0, 0)] = u[0],
            SystemKind::Ins { law } => {
                let rho = u[0];
                let v: Vec<f64> = u[1..=d].iter().map(|m| m / rho).collect();
                j[(0, 1 + a)] = 1.0;
                for i in 0..d {
                    j[(1 + i, 0)] = -v[i] * v[a] + if i == a { law.dp(rho) } else { 0.0 };
                    j[(1 + i, 1 + i)] += v[a];
                    j[(1 + i, 1 + a)] += v[i];
                }
            }
            SystemKind::Nsf { gamma, .. } => {
                let g = gamma - 1.0;
                let rho = u[0];
                let e = u[d + 1];
                let v: Vec<f64> = u[1..=d].iter().map(|m| m / rho).collect();
                let v2: f64 = v.iter().map(|x| x * x).sum();
                let p = self.pressure(u);
                let p_rho = 0.5 * g * v2;
                j[(0, 1 + a)] = 1.0;
                for i in 0..d {
                    j[(1 + i, 0)] = -v[i] * v[a] + if i == a { p_rho } else { 0.0 };
                    j[(1 + i, 1 + i)] += v[a];
                    j[(1 + i, 1 + a)] += v[i];
                    j[(1 + a, 1 + i)] -= g * v[i];
                }
                j[(1 + a, d + 1)] = g;
                let h = (e + p) / rho;
                j[(d + 1, 0)] = v[a] * (p_rho - h);
                for k in 0..d {
                    j[(d + 1, 1 + k)] = -g * v[k] * v[a] + if k == a { h } else { 0.0 };
                }
                j[(d + 1, d + 1)] = gamma * v[a];
            }
        }
        j
    }

    /// Entropy `eta(u)`.
    pub fn eta(&self, u: &[f64]) -> f64 {
        match self.kind {
            SystemKind::Scalar => 0.5 * u[0] * u[0],
            SystemKind::Ins { law } => {
                let m2: f64 = u[1..=self.dim].iter().map(|m| m * m).sum();
                law.helmholtz(u[0]).0 + 0.5 * m2 / u[0]
            }
            SystemKind::Nsf { gamma, .. } => {
                let rho = u[0];
                -rho * (self.pressure(u) / rho.powf(gamma)).ln()
            }
        }
    }

    /// Entropy variables `D eta(u)`.
    pub fn d_eta(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim;
        match self.kind {
            SystemKind::Scalar => vec![u[0]],
            SystemKind::Ins { law } => {
                let rho = u[0];
                let v: Vec<f64> = u[1..=d].iter().map(|m| m / rho).collect();
                let v2: f64 = v.iter().map(|x| x * x).sum();
                let mut out = vec![law.helmholtz(rho).1 - 0.5 * v2];
                out.extend(v);
                out
            }
            SystemKind::Nsf { gamma, .. } => {
                let g = gamma - 1.0;
                let rho = u[0];
                let p = self.pressure(u);
                let m2: f64 = u[1..=d].iter().map(|m| m * m).sum();
                let s = 0.5 * g * m2 / rho;
                let mut out = vec![-(p / rho.powf(gamma)).ln() + gamma - s / p];
                out.extend(u[1..=d].iter().map(|m| g * m / p));
                out.push(-g * rho / p);
                out
            }
        }
    }

    /// Entropy Hessian `D^2 eta(u)`.
    pub fn d2_eta(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.n_vars();
        let d = self.dim;
        let mut h = DMatrix::zeros(n, n);
        match self.kind {
            SystemKind::Scalar => h[(0, 0)] = 1.0,
            SystemKind::Ins { law } => {
                let rho = u[0];
                let m = &u[1..=d];
                let m2: f64 = m.iter().map(|x| x * x).sum();
                h[(0, 0)] = law.helmholtz(rho).2 + m2 / rho.powi(3);
                for j in 0..d {
                    h[(0, 1 + j)] = -m[j] / (rho * rho);
                    h[(1 + j, 0)] = h[(0, 1 + j)];
                    h[(1 + j, 1 + j)] = 1.0 / rho;
                }
            }
            SystemKind::Nsf { gamma, .. } => {
                let g = gamma - 1.0;
                let rho = u[0];
                let m = &u[1..=d];
                let m2: f64 = m.iter().map(|x| x * x).sum();
                let p = self.pressure(u);
                let p2 = p * p;
                let p_rho = 0.5 * g * m2 / (rho * rho);
                let s = rho * p_rho;
                h[(0, 0)] = gamma / rho + s * p_rho / p2;
                h[(0, n - 1)] = -g / p + s * g / p2;
                h[(n - 1, 0)] = h[(0, n - 1)];
                h[(n - 1, n - 1)] = g * g * rho / p2;
                for j in 0..d {
                    let p_mj = -g * m[j] / rho;
                    h[(0, 1 + j)] = s * p_mj / p2;
                    h[(1 + j, 0)] = h[(0, 1 + j)];
                    h[(1 + j, n - 1)] = -g * g * m[j] / p2;
                    h[(n - 1, 1 + j)] = h[(1 + j, n - 1)];
                    for k in 0..d {
                        h[(1 + j, 1 + k)] = g * g * m[j] * m[k] / (rho * p2) + if j == k { g / p } else { 0.0 };
                    }
                }
            }
        }
        h
    }

    /// Entropy flux `q_a(u)`.
    pub fn entropy_flux(&self, u: &[f64], a: usize) -> f64 {
        match self.kind {
            SystemKind::Scalar => u[0].powi(3) / 3.0,
            SystemKind::Ins { .. } => (self.eta(u) + self.pressure(u)) * u[1 + a] / u[0],
            SystemKind::Nsf { .. } => self.eta(u) * u[1 + a] / u[0],
        }
    }

    /// `eta(u | v)`.
    pub fn relative_entropy_density(&self, u: &[f64], v: &[f64]) -> f64 {
        let dv = self.d_eta(v);
        self.eta(u) - self.eta(v) - dot(&dv, &sub(u, v))
    }

    /// `q_a(u | v)`.
    pub fn relative_entropy_flux_density(&self, u: &[f64], v: &[f64], a: usize) -> f64 {
        let dv = self.d_eta(v);
        self.entropy_flux(u, a) - self.entropy_flux(v, a) - dot(&dv, &sub(&self.flux(u, a), &self.flux(v, a)))
    }

    /// Velocity gradient `d_a v_b` as `grad_v[a][b]` from conserved gradients.
    fn velocity_gradient(&self, u: &[f64], grad: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let rho = u[0];
        grad.iter()
            .map(|ga| (0..self.dim).map(|b| (ga[1 + b] - u[1 + b] / rho * ga[0]) / rho).collect())
            .collect()
    }

    /// Temperature gradient from conserved gradients (NSF only).
    fn temperature_gradient(&self, u: &[f64], grad: &[Vec<f64>], grad_v: &[Vec<f64>]) -> Vec<f64> {
        let d = self.dim;
        let rho = u[0];
        let e = u[d + 1];
        grad.iter()
            .zip(grad_v)
            .map(|(ga, gva)| {
                let vdv: f64 = (0..d).map(|b| u[1 + b] / rho * gva[b]).sum();
                ((ga[d + 1] - e / rho * ga[0]) / rho - vdv) / self.cv()
            })
            .collect()
    }

    /// Diffusive fluxes `g_a(u, grad u)`, one vector per direction.
    pub fn diffusive_flux(&self, u: &[f64], grad: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let d = self.dim;
        match self.kind {
            SystemKind::Scalar => grad.iter().map(|ga| vec![ga[0]]).collect(),
            SystemKind::Ins { .. } => {
                let gv = self.velocity_gradient(u, grad);
                gv.iter()
                    .map(|gva| std::iter::once(0.0).chain(gva.iter().copied()).collect())
                    .collect()
            }
            SystemKind::Nsf { kappa_over_mu, .. } => {
                let gv = self.velocity_gradient(u, grad);
                let gt = self.temperature_gradient(u, grad, &gv);
                gv.iter()
                    .zip(&gt)
                    .map(|(gva, &gta)| {
                        let vdv: f64 = (0..d).map(|b| u[1 + b] / u[0] * gva[b]).sum();
                        let mut g = vec![0.0];
                        g.extend(gva);
                        g.push(vdv + kappa_over_mu * gta);
                        g
                    })
                    .collect()
            }
        }
    }

    /// `d_a D eta(u) = D^2 eta(u) d_a u`.
    pub fn entropy_variable_gradient(&self, u: &[f64], grad: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let h = self.d2_eta(u);
        grad.iter()
            .map(|ga| (&h * nalgebra::DVector::from_column_slice(ga)).iter().copied().collect())
            .collect()
    }

    /// Entropy dissipation rate `sum_a g_a(u, grad u) . d_a D eta(u)`.
    pub fn entropy_dissipation(&self, u: &[f64], grad: &[Vec<f64>]) -> f64 {
        let g = self.diffusive_flux(u, grad);
        let de = self.entropy_variable_gradient(u, grad);
        g.iter().zip(&de).map(|(a, b)| dot(a, b)).sum()
    }

    /// Dissipation functional `D(w, grad w, w~, grad w~)`.
    pub fn dissipation(&self, w: &[f64], grad_w: &[Vec<f64>], wt: &[f64], grad_wt: &[Vec<f64>]) -> f64 {
        match self.kind {
            SystemKind::Scalar => grad_w.iter().zip(grad_wt).map(|(a, b)| (a[0] - b[0]).powi(2)).sum(),
            SystemKind::Ins { .. } => {
                let gv = self.velocity_gradient(w, grad_w);
                let gvt = self.velocity_gradient(wt, grad_wt);
                frobenius_sq_diff(&gv, &gvt)
            }
            SystemKind::Nsf { kappa_over_mu, .. } => {
                let gv = self.velocity_gradient(w, grad_w);
                let gvt = self.velocity_gradient(wt, grad_wt);
                let gt = self.temperature_gradient(w, grad_w, &gv);
                let gtt = self.temperature_gradient(wt, grad_wt, &gvt);
                let tt = self.primitive(wt)[self.dim + 1];
                let dt: f64 = gt.iter().zip(&gtt).map(|(a, b)| (a - b).powi(2)).sum();
                frobenius_sq_diff(&gv, &gvt) / tt + kappa_over_mu * dt / (tt * tt)
            }
        }
    }

    /// Sampled bounds of `D^2 eta` and `D^3 eta` on the state set.
    pub fn entropy_bounds(&self, per_axis: usize) -> EntropyBounds {
        let mut lower = f64::INFINITY;
        let mut upper: f64 = 0.0;
        let mut third: f64 = 0.0;
        for u in self.sample_states(per_axis) {
            let eig = SymmetricEigen::new(self.d2_eta(&u)).eigenvalues;
            lower = lower.min(eig.min());
            upper = upper.max(eig.max());
            third = third.max(self.third_derivative_norm(&u));
        }
        EntropyBounds {
            c_lower: lower,
            c_upper: upper,
            c_third: third,
        }
    }

    /// Frobenius norm of `D^3 eta(u)` by central differences of the Hessian.
    pub fn third_derivative_norm(&self, u: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..u.len() {
            let h = 1e-4 * (1.0 + u[i].abs());
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[i] += h;
            dn[i] -= h;
            sum += ((self.d2_eta(&up) - self.d2_eta(&dn)) / (2.0 * h)).norm_squared();
        }
        sum.sqrt()
    }

    /// `|(D f_a)^T D^2 eta - D^2 eta D f_a|_F`, maximised over directions.
    pub fn commutation_defect(&self, u: &[f64]) -> f64 {
        let h = self.d2_eta(u);
        (0..self.dim)
            .map(|a| {
                let j = self.flux_jacobian(u, a);
                (j.transpose() * &h - &h * j).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `int eta(u | v)` for states at quadrature points with the given weights.
pub fn relative_entropy(model: &SystemModel, u: &[Vec<f64>], v: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    check_fields(model, u, v, weights)?;
    Ok(u.iter()
        .zip(v)
        .zip(weights)
        .map(|((a, b), w)| w * model.relative_entropy_density(a, b))
        .sum())
}

/// `int q_a(u | v)` for every direction `a`.
pub fn relative_entropy_flux(model: &SystemModel, u: &[Vec<f64>], v: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    check_fields(model, u, v, weights)?;
    Ok((0..model.dim())
        .map(|a| {
            u.iter()
                .zip(v)
                .zip(weights)
                .map(|((x, y), w)| w * model.relative_entropy_flux_density(x, y, a))
                .sum()
        })
        .collect())
}

fn check_fields(model: &SystemModel, u: &[Vec<f64>], v: &[Vec<f64>], weights: &[f64]) -> Result<()> {
    if u.len() != v.len() || u.len() != weights.len() {
        return Err(Error::InvalidParameter(format!(
            "field lengths differ: {}, {}, {} weights",
            u.len(),
            v.len(),
            weights.len()
        )));
    }
    for s in u.iter().chain(v) {
        model.check(s)?;
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn frobenius_sq_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ins(dim: usize) -> SystemModel {
        ins_model(dim, 0.01, PressureLaw::Isothermal { c2: 1.0 }, StateBox::ins(dim, (0.5, 2.0), 1.5)).unwrap()
    }

    fn ins_poly(dim: usize) -> SystemModel {
        ins_model(dim, 0.01, PressureLaw::Polytropic { kappa: 1.0, gamma: 1.4 }, StateBox::ins(dim, (0.5, 2.0), 1.5)).unwrap()
    }

    fn nsf(dim: usize) -> SystemModel {
        nsf_model(dim, 0.01, 1.3, 287.0, 1.4, StateBox::nsf(dim, (0.5, 2.0), 1.5, (0.5, 2.0))).unwrap()
    }

    fn models() -> Vec<SystemModel> {
        let mut v = vec![scalar_model(1, 0.01, StateBox::scalar(-2.0, 2.0)).unwrap()];
        for d in 1..=2 {
            v.extend([ins(d), ins_poly(d), nsf(d)]);
        }
        v
    }

    fn random_state(m: &SystemModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let s = m.state_set();
        let prim: Vec<f64> = s.lo.iter().zip(&s.hi).map(|(&lo, &hi)| rng.gen_range(lo..=hi)).collect();
        m.conserved(&prim)
    }

    fn fd_gradient(f: impl Fn(&[f64]) -> f64, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .map(|i| {
                let h = 1e-6 * (1.0 + u[i].abs());
                let mut a = u.to_vec();
                let mut b = u.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn momentum_entropy_variable_is_velocity() {
        let m = ins(1);
        let de = m.d_eta(&[2.0, 4.0]);
        assert!((de[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn isothermal_law_satisfies_gibbs_duhem() {
        let law = PressureLaw::Isothermal { c2: 1.0 };
        for rho in [0.3, 1.0, 2.7] {
            let (w, _, w2) = law.helmholtz(rho);
            assert!((w - rho * rho.ln()).abs() < 1e-15);
            assert!((rho * w2 - law.dp(rho)).abs() < 1e-14);
        }
        let law = PressureLaw::Polytropic { kappa: 2.0, gamma: 1.4 };
        for rho in [0.3, 1.0, 2.7] {
            assert!((rho * law.helmholtz(rho).2 - law.dp(rho)).abs() < 1e-13);
        }
    }

    #[test]
    fn energy_entropy_variable_is_minus_inverse_temperature() {
        let m = nsf(2);
        let u = m.conserved(&[1.3, 0.2, -0.4, 1.7]);
        let de = m.d_eta(&u);
        assert!((de[3] + 0.4 / (287.0 * 1.7)).abs() < 1e-15);
        assert!((de[1] - 0.4 / 287.0 * 0.2 / 1.7).abs() < 1e-15);
        assert!((de[2] + 0.4 / 287.0 * 0.4 / 1.7).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in models() {
            for _ in 0..20 {
                let u = random_state(&m, &mut rng);
                let de = m.d_eta(&u);
                let fd = fd_gradient(|x| m.eta(x), &u);
                for (a, b) in de.iter().zip(&fd) {
                    assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{m:?}: {de:?} vs {fd:?}");
                }
                let h = m.d2_eta(&u);
                for i in 0..u.len() {
                    let row = fd_gradient(|x| m.d_eta(x)[i], &u);
                    for j in 0..u.len() {
                        assert!((h[(i, j)] - row[j]).abs() < 1e-5 * (1.0 + h[(i, j)].abs()));
                    }
                }
                for a in 0..m.dim() {
                    let j = m.flux_jacobian(&u, a);
                    for i in 0..u.len() {
                        let row = fd_gradient(|x| m.flux(x, a)[i], &u);
                        for k in 0..u.len() {
                            assert!((j[(i, k)] - row[k]).abs() < 1e-5 * (1.0 + j[(i, k)].abs()), "{m:?} a={a}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn entropy_flux_is_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in models() {
            for _ in 0..20 {
                let u = random_state(&m, &mut rng);
                let de = m.d_eta(&u);
                for a in 0..m.dim() {
                    let dq = fd_gradient(|x| m.entropy_flux(x, a), &u);
                    let j = m.flux_jacobian(&u, a);
                    for k in 0..u.len() {
                        let lhs: f64 = (0..u.len()).map(|i| de[i] * j[(i, k)]).sum();
                        assert!((lhs - dq[k]).abs() < 1e-6 * (1.0 + dq[k].abs()), "{m:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn commutation_holds_with_finite_difference_hessians() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in models() {
            for _ in 0..100 {
                let u = random_state(&m, &mut rng);
                let n = u.len();
                let mut h = DMatrix::zeros(n, n);
                for i in 0..n {
                    let row = fd_gradient(|x| m.d_eta(x)[i], &u);
                    for j in 0..n {
                        h[(i, j)] = row[j];
                    }
                }
                let h = (&h + h.transpose()) * 0.5;
                for a in 0..m.dim() {
                    let j = m.flux_jacobian(&u, a);
                    let scale = 1.0 + j.norm() * h.norm();
                    assert!((j.transpose() * &h - &h * &j).norm() < 1e-8 * scale, "{m:?}");
                }
                assert!(m.commutation_defect(&u) < 1e-12 * (1.0 + m.d2_eta(&u).norm() * 10.0));
            }
        }
    }

    #[test]
    fn hessian_is_positive_definite_on_the_state_set() {
        for m in models() {
            let b = m.entropy_bounds(4);
            assert!(b.c_lower > 0.0 && b.c_lower <= b.c_upper && b.c_third.is_finite(), "{m:?} {b:?}");
        }
    }

    #[test]
    fn relative_entropy_is_positive_for_distinct_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in models() {
            for _ in 0..50 {
                let u = random_state(&m, &mut rng);
                let v = random_state(&m, &mut rng);
                assert!(m.relative_entropy_density(&u, &u).abs() < 1e-10);
                assert!(m.relative_entropy_density(&u, &v) > 0.0);
            }
        }
    }

    #[test]
    fn scalar_relative_entropy_is_half_squared_difference() {
        let m = scalar_model(1, 0.0, StateBox::scalar(-2.0, 2.0)).unwrap();
        let u = vec![vec![0.5], vec![-1.0], vec![1.9]];
        let v = vec![vec![0.1], vec![1.0], vec![1.9]];
        let w = [0.25, 0.5, 0.25];
        let r = relative_entropy(&m, &u, &v, &w).unwrap();
        let exact = 0.5 * (0.25 * 0.16 + 0.5 * 4.0);
        assert!((r - exact).abs() < 1e-15);
        assert!(relative_entropy(&m, &[vec![2.5]], &[vec![0.0]], &[1.0]).is_err());
    }

    #[test]
    fn relative_entropy_flux_vanishes_on_equal_fields() {
        let m = nsf(2);
        let u = vec![m.conserved(&[1.0, 0.3, 0.1, 1.2])];
        let f = relative_entropy_flux(&m, &u, &u, &[1.0]).unwrap();
        assert!(f.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn ins_relative_entropy_lies_between_hessian_bounds() {
        let m = ins(2);
        let b = m.entropy_bounds(6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let rho = rng.gen_range(0.5..2.0);
            let u = m.conserved(&[rho, rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
            let v = m.conserved(&[rho, rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
            let d2: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
            let r = m.relative_entropy_density(&u, &v);
            assert!(r >= 0.5 * b.c_lower * d2 * (1.0 - 1e-12) && r <= 0.5 * b.c_upper * d2 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dissipation_vanishes_for_equal_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in models() {
            let u = random_state(&m, &mut rng);
            let g: Vec<Vec<f64>> = (0..m.dim()).map(|_| (0..u.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            assert_eq!(m.dissipation(&u, &g, &u, &g), 0.0);
        }
    }

    #[test]
    fn shear_flow_at_uniform_temperature_dissipates_velocity_gradient() {
        let m = nsf(2);
        let (rho, t) = (1.2, 1.5);
        let v = [0.3, -0.2];
        let u = m.conserved(&[rho, v[0], v[1], t]);
        let gv = [[0.0, 0.7], [0.4, 0.0]];
        let grad: Vec<Vec<f64>> = (0..2)
            .map(|a| {
                let mut g = vec![0.0; 4];
                g[1] = rho * gv[a][0];
                g[2] = rho * gv[a][1];
                g[3] = rho * (v[0] * gv[a][0] + v[1] * gv[a][1]);
                g
            })
            .collect();
        let grad_v2 = 0.7f64.powi(2) + 0.4f64.powi(2);
        let expect = 0.4 / (287.0 * t) * grad_v2;
        assert!((m.entropy_dissipation(&u, &grad) - expect).abs() < 1e-14);
    }

    #[test]
    fn invalid_state_sets_are_rejected() {
        let law = PressureLaw::Isothermal { c2: 1.0 };
        assert!(matches!(ins_model(1, 0.1, law, StateBox::ins(1, (0.0, 1.0), 1.0)), Err(Error::InvalidState(_))));
        assert!(matches!(
            nsf_model(1, 0.1, 1.0, 287.0, 1.4, StateBox::nsf(1, (0.5, 1.0), 1.0, (-1.0, 1.0))),
            Err(Error::InvalidState(_))
        ));
        assert!(ins_model(1, 0.1, PressureLaw::Polytropic { kappa: 1.0, gamma: 0.5 }, StateBox::ins(1, (0.5, 1.0), 1.0)).is_err());
    }
}
