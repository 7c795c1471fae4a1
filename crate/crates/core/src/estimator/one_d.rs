use super::{discretization_term, DualNorm1D, DualSolution, Estimator, StepIndicators};
use crate::adaptivity::ModelField;
use crate::dg::{DgField, QuadratureRule};
use crate::mesh::Mesh1D;
use crate::reconstruction::{
    reconstruct_flux_1d, reconstruct_solution_1d, split_residual_1d, FluxReconstruction1D, Level1D, ResidualSplit,
    SolutionReconstruction1D,
};
use crate::solver::{EdgeData1D, Hyperbolic, Scheme, Scheme1D};
use crate::Result;

/// Solution and flux reconstruction at one time level.
#[derive(Clone, Debug)]
pub struct Reconstruction1D {
    pub vhat: SolutionReconstruction1D,
    pub fhat: FluxReconstruction1D,
}

/// `int_K |v_hat'|^2` per cell, exact for the polynomial degree of `v_hat`.
fn gradient_energy(mesh: &Mesh1D, vhat: &SolutionReconstruction1D) -> Vec<f64> {
    let deg = vhat.cells.first().map_or(1, |p| p.degree()).max(1);
    let rule = QuadratureRule::gauss(deg);
    (0..mesh.n_cells())
        .map(|k| {
            let h = mesh.width(k);
            rule.iter()
                .map(|(xi, w)| {
                    let d = vhat.cells[k].eval(xi).1 * 2.0 / h;
                    0.5 * h * w * d * d
                })
                .sum()
        })
        .collect()
}

/// `int_K (eps - eps_hat) |v_hat'|^2` for every cell.
pub fn modeling_term_1d(mesh: &Mesh1D, vhat: &SolutionReconstruction1D, eps: f64, eps_hat: &ModelField) -> Vec<f64> {
    gradient_energy(mesh, vhat)
        .into_iter()
        .enumerate()
        .map(|(k, g)| (eps - eps_hat.value(k)) * g)
        .collect()
}

/// Estimator for [`Scheme1D`].
#[derive(Debug)]
pub struct Estimator1D<'a> {
    scheme: &'a Scheme1D,
    dual: DualNorm1D,
    residual_rule: QuadratureRule,
    gap_rule: QuadratureRule,
    init_rule: QuadratureRule,
}

impl<'a> Estimator1D<'a> {
    pub fn new(scheme: &'a Scheme1D) -> Result<Self> {
        let q = scheme.space().degree();
        Ok(Self {
            scheme,
            dual: DualNorm1D::new(scheme.space().mesh(), q)?,
            residual_rule: QuadratureRule::gauss(ResidualSplit::points_for_degree(q)),
            gap_rule: QuadratureRule::gauss(q + 3),
            init_rule: QuadratureRule::gauss(q + 6),
        })
    }

    pub fn dual(&self) -> &DualNorm1D {
        &self.dual
    }

    /// `|R_H|_K^2` for every cell.
    pub fn hyperbolic_cells(&self, split: &ResidualSplit) -> Vec<f64> {
        let mesh = self.scheme.space().mesh();
        (0..mesh.n_cells())
            .map(|k| {
                let h = mesh.width(k);
                split
                    .hyperbolic_cell(k)
                    .iter()
                    .zip(&self.residual_rule.weights)
                    .map(|(r, w)| 0.5 * h * w * r * r)
                    .sum()
            })
            .collect()
    }

    /// Residual split for the step `prev -> next` taken with `eps_hat`.
    pub fn split(&self, prev: (&DgField, &Reconstruction1D), next: (&DgField, &Reconstruction1D), eps_hat: &ModelField) -> Result<ResidualSplit> {
        let cfg = self.scheme.config();
        let d_h = self.scheme.diffusion(next.0, eps_hat)?;
        Ok(split_residual_1d(
            self.scheme.space(),
            Level1D {
                v: prev.0,
                vhat: &prev.1.vhat,
            },
            Level1D {
                v: next.0,
                vhat: &next.1.vhat,
            },
            &prev.1.fhat,
            &d_h,
            eps_hat,
            cfg.tau,
            cfg.flux.as_ref(),
        ))
    }
}

impl Estimator for Estimator1D<'_> {
    type Scheme = Scheme1D;
    type Recon = Reconstruction1D;

    fn scheme(&self) -> &Scheme1D {
        self.scheme
    }

    fn reconstruct(&self, v: &DgField, hyp: &Hyperbolic<EdgeData1D>) -> Result<Reconstruction1D> {
        let space = self.scheme.space();
        Ok(Reconstruction1D {
            vhat: reconstruct_solution_1d(space, v, &hyp.edges.w)?,
            fhat: reconstruct_flux_1d(space, &hyp.rhs, &hyp.edges.flux)?,
        })
    }

    fn indicators(&self, prev: (&DgField, &Reconstruction1D), next: (&DgField, &Reconstruction1D), eps_hat: &ModelField) -> Result<StepIndicators> {
        let eps = self.scheme.config().eps;
        let mesh = self.scheme.space().mesh();
        let split = self.split(prev, next, eps_hat)?;
        let r_p = if split.parabolic_is_zero() {
            DualSolution {
                norm_sq: 0.0,
                cell_energy: vec![0.0; mesh.n_cells()],
            }
        } else {
            self.dual.evaluate(&split.r0, &split.r1)?
        };
        let discretization = discretization_term(&self.hyperbolic_cells(&split), &r_p, eps)?;
        let g = gradient_energy(mesh, &next.1.vhat);
        Ok(StepIndicators {
            modeling: g.iter().enumerate().map(|(k, g)| (eps - eps_hat.value(k)) * g).collect(),
            potential: g.iter().map(|g| eps * g).collect(),
            discretization,
            grad_max: self.grad_max(next.1),
            gap_sq: self.gap_sq(next.0, next.1),
        })
    }

    fn initial_error_sq(&self, recon: &Reconstruction1D) -> f64 {
        let mesh = self.scheme.space().mesh();
        let u0 = &self.scheme.config().initial;
        (0..mesh.n_cells())
            .map(|k| {
                let h = mesh.width(k);
                self.init_rule
                    .iter()
                    .map(|(xi, w)| {
                        let d = u0.eval(&[mesh.map(k, xi)]) - recon.vhat.cells[k].eval(xi).0;
                        0.5 * h * w * d * d
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    fn grad_max(&self, recon: &Reconstruction1D) -> f64 {
        let mesh = self.scheme.space().mesh();
        let mut m: f64 = 0.0;
        for k in 0..mesh.n_cells() {
            let j = 2.0 / mesh.width(k);
            let p = &recon.vhat.cells[k];
            for &xi in self.residual_rule.nodes.iter().chain(&[-1.0, 1.0]) {
                m = m.max((p.eval(xi).1 * j).abs());
            }
        }
        m
    }

    fn gap_sq(&self, v: &DgField, recon: &Reconstruction1D) -> f64 {
        let space = self.scheme.space();
        let mesh = space.mesh();
        (0..mesh.n_cells())
            .map(|k| {
                let h = mesh.width(k);
                self.gap_rule
                    .iter()
                    .map(|(xi, w)| {
                        let d = recon.vhat.cells[k].eval(xi).0 - space.eval(v, k, xi);
                        0.5 * h * w * d * d
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    fn recon_value(&self, recon: &Reconstruction1D, x: &[f64]) -> Option<f64> {
        recon.vhat.eval_at(self.scheme.space().mesh(), x[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::burgers_1d;
    use crate::mesh::Boundary;
    use crate::solver::{InitialCondition, SolverConfig};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn scheme(n: usize, eps: f64) -> Scheme1D {
        let mesh = Mesh1D::uniform(-PI, PI, n, Boundary::Dirichlet).unwrap();
        let cfg = SolverConfig::new(Arc::new(burgers_1d()), 1, 1e-4, 1.0, eps, Boundary::Dirichlet, InitialCondition::Sine);
        Scheme1D::new(mesh, cfg).unwrap()
    }

    #[test]
    fn modeling_term_of_sine_matches_analytic_integral() {
        let s = scheme(1000, 0.005);
        let est = Estimator1D::new(&s).unwrap();
        let v = s.initial_field().unwrap();
        let r = est.reconstruct(&v, &s.hyperbolic(&v).unwrap()).unwrap();
        let m = modeling_term_1d(s.space().mesh(), &r.vhat, 0.005, &ModelField::zeros(1000, 0.005));
        let total: f64 = m.iter().sum();
        assert!((total - 0.005 * PI).abs() < 1e-5 * 0.005 * PI, "{total}");
        let full = modeling_term_1d(s.space().mesh(), &r.vhat, 0.005, &ModelField::full(1000, 0.005));
        assert!(full.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_reconstruction_has_no_modeling_term() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 10, Boundary::Periodic).unwrap();
        let cfg = SolverConfig::new(Arc::new(burgers_1d()), 2, 1e-3, 1.0, 0.01, Boundary::Periodic, InitialCondition::Constant(0.7));
        let s = Scheme1D::new(mesh, cfg).unwrap();
        let est = Estimator1D::new(&s).unwrap();
        let v = s.initial_field().unwrap();
        let r = est.reconstruct(&v, &s.hyperbolic(&v).unwrap()).unwrap();
        let m = modeling_term_1d(s.space().mesh(), &r.vhat, 0.01, &ModelField::zeros(10, 0.01));
        assert!(m.iter().all(|&x| x.abs() < 1e-28));
        assert!(est.initial_error_sq(&r) < 1e-28);
    }

    #[test]
    fn indicators_are_nonnegative_and_localised() {
        let s = scheme(64, 0.05);
        let est = Estimator1D::new(&s).unwrap();
        let mut eh = ModelField::zeros(64, 0.05);
        for k in 20..30 {
            eh.set_active(k, true);
        }
        let v0 = s.initial_field().unwrap();
        let h0 = s.hyperbolic(&v0).unwrap();
        let v1 = s.imex_step(&v0, &h0, &eh).unwrap();
        let h1 = s.hyperbolic(&v1).unwrap();
        let r0 = est.reconstruct(&v0, &h0).unwrap();
        let r1 = est.reconstruct(&v1, &h1).unwrap();
        let ind = est.indicators((&v0, &r0), (&v1, &r1), &eh).unwrap();
        for k in 0..64 {
            assert!(ind.modeling[k] >= 0.0 && ind.discretization.cells[k] >= 0.0);
            assert_eq!(ind.modeling[k] == 0.0, eh.is_active(k));
        }
        assert!(ind.discretization.r_p_sq > 0.0);
        assert!(ind.grad_max >= 0.9);
    }
}
