//! Scalar flux functions and numerical fluxes.

use std::fmt::Debug;

use crate::{Error, Result};

/// Compact interval of admissible states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSet {
    pub lo: f64,
    pub hi: f64,
}

impl StateSet {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("empty state set [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }

    pub fn check(&self, u: f64, location: impl FnOnce() -> String) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::StateSpaceViolation {
                value: u,
                lo: self.lo,
                hi: self.hi,
                location: location(),
            })
        }
    }

    /// `n` equally spaced states covering the set, end points included.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1).max(1) as f64)
            .collect()
    }
}

impl Default for StateSet {
    fn default() -> Self {
        Self { lo: -2.0, hi: 2.0 }
    }
}

/// Scalar flux `f = (f_1, ..., f_d)`.
pub trait FluxModel: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn flux(&self, u: f64, dir: usize) -> f64;
    fn derivative(&self, u: f64, dir: usize) -> f64;
    fn second_derivative(&self, u: f64, dir: usize) -> f64;

    /// `C_f` : bound on the norm of `f''` over `set`.
    fn second_derivative_bound(&self, set: &StateSet) -> f64;

    /// `sup |f_dir'|` over `set`.
    fn max_speed(&self, set: &StateSet, dir: usize) -> f64;

    fn name(&self) -> String;
}

/// Burgers flux `u^2 / 2` in every direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Burgers {
    pub dim: usize,
}

pub fn burgers_1d() -> Burgers {
    Burgers { dim: 1 }
}

pub fn burgers_2d() -> Burgers {
    Burgers { dim: 2 }
}

impl FluxModel for Burgers {
    fn dim(&self) -> usize {
        self.dim
    }

    fn flux(&self, u: f64, _dir: usize) -> f64 {
        0.5 * u * u
    }

    fn derivative(&self, u: f64, _dir: usize) -> f64 {
        u
    }

    fn second_derivative(&self, _u: f64, _dir: usize) -> f64 {
        1.0
    }

    /// `f'' = (1, ..., 1)`, whose Euclidean norm is `sqrt(d)`.
    fn second_derivative_bound(&self, _set: &StateSet) -> f64 {
        (self.dim as f64).sqrt()
    }

    fn max_speed(&self, set: &StateSet, _dir: usize) -> f64 {
        set.lo.abs().max(set.hi.abs())
    }

    fn name(&self) -> String {
        format!("burgers{}d", self.dim)
    }
}

/// Linear advection `f_i(u) = a_i u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearAdvection {
    pub velocity: Vec<f64>,
}

pub fn linear(velocity: &[f64]) -> LinearAdvection {
    LinearAdvection {
        velocity: velocity.to_vec(),
    }
}

impl FluxModel for LinearAdvection {
    fn dim(&self) -> usize {
        self.velocity.len()
    }

    fn flux(&self, u: f64, dir: usize) -> f64 {
        self.velocity[dir] * u
    }

    fn derivative(&self, _u: f64, dir: usize) -> f64 {
        self.velocity[dir]
    }

    fn second_derivative(&self, _u: f64, _dir: usize) -> f64 {
        0.0
    }

    fn second_derivative_bound(&self, _set: &StateSet) -> f64 {
        0.0
    }

    fn max_speed(&self, _set: &StateSet, dir: usize) -> f64 {
        self.velocity[dir].abs()
    }

    fn name(&self) -> String {
        "linear".into()
    }
}

/// Value of a numerical flux on one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFlux {
    /// `F(u-, u+)`.
    pub flux: f64,
    /// Intermediate state with `F = f(w)`.
    pub w: f64,
}

/// Numerical flux written as `F(u-, u+) = f(w(u-, u+))`.
pub trait NumericalFlux: Debug + Send + Sync {
    fn evaluate(&self, f: &dyn FluxModel, dir: usize, u_minus: f64, u_plus: f64, tau_over_h: f64) -> Result<EdgeFlux>;

    /// Lipschitz constant of `w` on the admissible set.
    fn lipschitz(&self, f: &dyn FluxModel, dir: usize, tau_over_h: f64) -> f64;

    fn state_set(&self) -> &StateSet;
}

/// Richtmyer flux `w = (u- + u+)/2 - (tau/h)(f(u+) - f(u-))`, `F = f(w)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Richtmyer {
    pub set: StateSet,
}

impl Richtmyer {
    pub fn new(set: StateSet) -> Self {
        Self { set }
    }
}

impl NumericalFlux for Richtmyer {
    fn evaluate(&self, f: &dyn FluxModel, dir: usize, u_minus: f64, u_plus: f64, tau_over_h: f64) -> Result<EdgeFlux> {
        self.set.check(u_minus, || "left state of numerical flux".into())?;
        self.set.check(u_plus, || "right state of numerical flux".into())?;
        let w = 0.5 * (u_minus + u_plus) - tau_over_h * (f.flux(u_plus, dir) - f.flux(u_minus, dir));
        self.set.check(w, || "Richtmyer intermediate state".into())?;
        Ok(EdgeFlux {
            flux: f.flux(w, dir),
            w,
        })
    }

    fn lipschitz(&self, f: &dyn FluxModel, dir: usize, tau_over_h: f64) -> f64 {
        1.0 + 2.0 * tau_over_h * f.max_speed(&self.set, dir)
    }

    fn state_set(&self) -> &StateSet {
        &self.set
    }
}

/// Richtmyer flux on the default state set `[-2, 2]`, returning `(F, w)`.
pub fn richtmyer_flux(f: &dyn FluxModel, u_minus: f64, u_plus: f64, tau_over_h: f64) -> Result<(f64, f64)> {
    let e = Richtmyer::default().evaluate(f, 0, u_minus, u_plus, tau_over_h)?;
    Ok((e.flux, e.w))
}
