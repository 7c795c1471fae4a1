use super::{discretization_term, DualNorm2D, DualSolution, Estimator, StepIndicators};
use crate::adaptivity::ModelField;
use crate::dg::{DgField, LagrangeBasis, QuadratureRule, Space2D};
use crate::mesh::Mesh2D;
use crate::reconstruction::{
    extended_nodes, reconstruct_flux_2d, reconstruct_solution_2d, split_residual_2d, FluxReconstruction2D, Level2D, ResidualSplit,
    SolutionReconstruction2D,
};
use crate::solver::{EdgeData2D, Hyperbolic, Scheme, Scheme2D};
use crate::Result;

/// Solution and flux reconstruction at one time level.
#[derive(Clone, Debug)]
pub struct Reconstruction2D {
    pub vhat: SolutionReconstruction2D,
    pub fhat: FluxReconstruction2D,
}

/// Basis tables of `v_hat` at a tensor Gauss rule.
#[derive(Clone, Debug)]
struct HatTables {
    rule: QuadratureRule,
    val: Vec<Vec<f64>>,
    der: Vec<Vec<f64>>,
}

impl HatTables {
    /// Rule with one point per reconstruction node, exact for `|grad v_hat|^2`.
    fn new(basis: &LagrangeBasis) -> Self {
        let rule = QuadratureRule::gauss(basis.len());
        Self {
            val: basis.value_table(&rule.nodes),
            der: basis.derivative_table(&rule.nodes),
            rule,
        }
    }

    /// Calls `f(weight, value, d_x, d_y)` at every point of cell `k`, with the
    /// physical weight and gradient.
    fn for_each(&self, mesh: &Mesh2D, vhat: &SolutionReconstruction2D, k: usize, mut f: impl FnMut(f64, f64, f64, f64)) {
        let (hx, hy) = mesh.cell_size(k);
        let n = vhat.nodes_per_line();
        let c = vhat.cell(k);
        let np = self.rule.len();
        for s in 0..np {
            for p in 0..np {
                let (mut v, mut dx, mut dy) = (0.0, 0.0, 0.0);
                for t in 0..n {
                    let (vy, dyt) = (self.val[s][t], self.der[s][t]);
                    for r in 0..n {
                        let a = c[r + n * t];
                        v += a * self.val[p][r] * vy;
                        dx += a * self.der[p][r] * vy;
                        dy += a * self.val[p][r] * dyt;
                    }
                }
                let w = 0.25 * hx * hy * self.rule.weights[p] * self.rule.weights[s];
                f(w, v, dx * 2.0 / hx, dy * 2.0 / hy);
            }
        }
    }
}

fn gradient_energy(mesh: &Mesh2D, vhat: &SolutionReconstruction2D, tab: &HatTables) -> Vec<f64> {
    (0..mesh.n_cells())
        .map(|k| {
            let mut e = 0.0;
            tab.for_each(mesh, vhat, k, |w, _, dx, dy| e += w * (dx * dx + dy * dy));
            e
        })
        .collect()
}

/// `int_K (eps - eps_hat) |grad v_hat|^2` for every cell.
pub fn modeling_term_2d(mesh: &Mesh2D, vhat: &SolutionReconstruction2D, eps: f64, eps_hat: &ModelField) -> Vec<f64> {
    let tab = HatTables::new(vhat.basis());
    gradient_energy(mesh, vhat, &tab)
        .into_iter()
        .enumerate()
        .map(|(k, g)| (eps - eps_hat.value(k)) * g)
        .collect()
}

/// Estimator for [`Scheme2D`].
#[derive(Debug)]
pub struct Estimator2D<'a> {
    scheme: &'a Scheme2D,
    dual: DualNorm2D,
    residual_rule: QuadratureRule,
    grad_tables: HatTables,
    init_rule: QuadratureRule,
}

impl<'a> Estimator2D<'a> {
    pub fn new(scheme: &'a Scheme2D) -> Result<Self> {
        let q = scheme.space().degree();
        Ok(Self {
            scheme,
            dual: DualNorm2D::new(scheme.space().mesh(), q)?,
            residual_rule: QuadratureRule::gauss(ResidualSplit::points_for_degree(q)),
            grad_tables: HatTables::new(&LagrangeBasis::new(&extended_nodes(&scheme.space().reference().rule.nodes))),
            init_rule: QuadratureRule::gauss(q + 5),
        })
    }

    fn space(&self) -> &Space2D {
        self.scheme.space()
    }

    /// `|R_H|_K^2` for every cell.
    pub fn hyperbolic_cells(&self, split: &ResidualSplit) -> Vec<f64> {
        let mesh = self.space().mesh();
        let w = &self.residual_rule.weights;
        let np = w.len();
        (0..mesh.n_cells())
            .map(|k| {
                let area = mesh.area(k);
                split
                    .hyperbolic_cell(k)
                    .iter()
                    .enumerate()
                    .map(|(i, r)| 0.25 * area * w[i % np] * w[i / np] * r * r)
                    .sum()
            })
            .collect()
    }

    pub fn split(&self, prev: (&DgField, &Reconstruction2D), next: (&DgField, &Reconstruction2D), eps_hat: &ModelField) -> Result<ResidualSplit> {
        let cfg = self.scheme.config();
        let d_h = self.scheme.diffusion(next.0, eps_hat)?;
        Ok(split_residual_2d(
            self.space(),
            Level2D {
                v: prev.0,
                vhat: &prev.1.vhat,
            },
            Level2D {
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

impl Estimator for Estimator2D<'_> {
    type Scheme = Scheme2D;
    type Recon = Reconstruction2D;

    fn scheme(&self) -> &Scheme2D {
        self.scheme
    }

    fn reconstruct(&self, v: &DgField, hyp: &Hyperbolic<EdgeData2D>) -> Result<Reconstruction2D> {
        Ok(Reconstruction2D {
            vhat: reconstruct_solution_2d(self.space(), v, &hyp.edges)?,
            fhat: reconstruct_flux_2d(self.space(), &hyp.edges)?,
        })
    }

    fn indicators(&self, prev: (&DgField, &Reconstruction2D), next: (&DgField, &Reconstruction2D), eps_hat: &ModelField) -> Result<StepIndicators> {
        let eps = self.scheme.config().eps;
        let mesh = self.space().mesh();
        let split = self.split(prev, next, eps_hat)?;
        let r_p = if split.parabolic_is_zero() {
            DualSolution {
                norm_sq: 0.0,
                cell_energy: vec![0.0; mesh.n_cells()],
            }
        } else {
            self.dual.evaluate(mesh, &split.r0, &split.r1)?
        };
        let discretization = discretization_term(&self.hyperbolic_cells(&split), &r_p, eps)?;
        let g = gradient_energy(mesh, &next.1.vhat, &self.grad_tables);
        Ok(StepIndicators {
            modeling: g.iter().enumerate().map(|(k, g)| (eps - eps_hat.value(k)) * g).collect(),
            potential: g.iter().map(|g| eps * g).collect(),
            discretization,
            grad_max: self.grad_max(next.1),
            gap_sq: self.gap_sq(next.0, next.1),
        })
    }

    fn initial_error_sq(&self, recon: &Reconstruction2D) -> f64 {
        let mesh = self.space().mesh();
        let u0 = &self.scheme.config().initial;
        let r = &self.init_rule;
        let mut total = 0.0;
        for k in 0..mesh.n_cells() {
            let area = mesh.area(k);
            for (eta, wy) in r.iter() {
                for (xi, wx) in r.iter() {
                    let (x, y) = mesh.map(k, xi, eta);
                    let d = u0.eval(&[x, y]) - recon.vhat.eval(mesh, k, xi, eta).0;
                    total += 0.25 * area * wx * wy * d * d;
                }
            }
        }
        total
    }

    fn grad_max(&self, recon: &Reconstruction2D) -> f64 {
        let mesh = self.space().mesh();
        let mut pts = self.residual_rule.nodes.clone();
        pts.extend_from_slice(&[-1.0, 1.0]);
        let val = recon.vhat.basis().value_table(&pts);
        let der = recon.vhat.basis().derivative_table(&pts);
        let n = recon.vhat.nodes_per_line();
        let mut m: f64 = 0.0;
        for k in 0..mesh.n_cells() {
            let (hx, hy) = mesh.cell_size(k);
            let c = recon.vhat.cell(k);
            for s in 0..pts.len() {
                for p in 0..pts.len() {
                    let (mut dx, mut dy) = (0.0, 0.0);
                    for t in 0..n {
                        for r in 0..n {
                            dx += c[r + n * t] * der[p][r] * val[s][t];
                            dy += c[r + n * t] * val[p][r] * der[s][t];
                        }
                    }
                    m = m.max((dx * 2.0 / hx).hypot(dy * 2.0 / hy));
                }
            }
        }
        m
    }

    fn gap_sq(&self, v: &DgField, recon: &Reconstruction2D) -> f64 {
        let space = self.space();
        let mesh = space.mesh();
        let tab = &self.grad_tables;
        let phi = space.reference().basis.value_table(&tab.rule.nodes);
        let n = space.reference().n();
        let np = tab.rule.len();
        let mut total = 0.0;
        for k in 0..mesh.n_cells() {
            let c = v.cell(k);
            let mut i = 0;
            tab.for_each(mesh, &recon.vhat, k, |w, vh, _, _| {
                let (p, s) = (i % np, i / np);
                let mut u = 0.0;
                for b in 0..n {
                    for a in 0..n {
                        u += c[a + n * b] * phi[p][a] * phi[s][b];
                    }
                }
                total += w * (vh - u) * (vh - u);
                i += 1;
            });
        }
        total
    }

    fn recon_value(&self, recon: &Reconstruction2D, x: &[f64]) -> Option<f64> {
        recon.vhat.eval_at(self.space().mesh(), x[0], x[1])
    }
}
