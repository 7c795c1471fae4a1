use super::{extended_nodes, FluxReconstruction1D, FluxReconstruction2D, LegendreTable, SolutionReconstruction1D, SolutionReconstruction2D};
use crate::adaptivity::ModelField;
use crate::dg::{DgField, LagrangeBasis, QuadratureRule, Space1D, Space2D};
use crate::flux::FluxModel;

/// A dG field together with its reconstruction at one time level.
#[derive(Clone, Copy, Debug)]
pub struct Level1D<'a> {
    pub v: &'a DgField,
    pub vhat: &'a SolutionReconstruction1D,
}

#[derive(Clone, Copy, Debug)]
pub struct Level2D<'a> {
    pub v: &'a DgField,
    pub vhat: &'a SolutionReconstruction2D,
}

/// Residual of the reconstruction over one time step, split as `R_H + R_P`.
///
/// `R_H` is a function sampled at the tensor Gauss points of every cell.
/// `R_P` is the functional `<R_P, chi> = sum_K int_K (r0 chi + r1 . grad chi)`
/// with `r0 = D_h`, `r1 = eps_hat grad v_hat`, sampled at the same points.
/// Point `p + n_points * s` of a 2D cell sits at `(xi_p, xi_s)`; `r1` stores
/// `dim` components per point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSplit {
    pub dim: usize,
    pub n_points: usize,
    pub hyperbolic: Vec<f64>,
    pub r0: Vec<f64>,
    pub r1: Vec<f64>,
}

impl ResidualSplit {
    /// Gauss points per direction used for a degree `q` scheme.
    pub fn points_for_degree(q: usize) -> usize {
        2 * q + 2
    }

    pub fn points_per_cell(&self) -> usize {
        self.n_points.pow(self.dim as u32)
    }

    pub fn rule(&self) -> QuadratureRule {
        QuadratureRule::gauss(self.n_points)
    }

    pub fn hyperbolic_cell(&self, k: usize) -> &[f64] {
        let m = self.points_per_cell();
        &self.hyperbolic[k * m..(k + 1) * m]
    }

    pub fn parabolic_is_zero(&self) -> bool {
        self.r0.iter().chain(&self.r1).all(|&x| x == 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `R_H = d_t (v_hat - v_h) + d_x f(v_hat^n) - d_x f_hat` and the parabolic
/// part for the step `prev -> next` of a 1D scheme with diffusion `d_h`.
#[allow(clippy::too_many_arguments)]
pub fn split_residual_1d(
    space: &Space1D,
    prev: Level1D,
    next: Level1D,
    fhat: &FluxReconstruction1D,
    d_h: &DgField,
    eps_hat: &ModelField,
    tau: f64,
    flux: &dyn FluxModel,
) -> ResidualSplit {
    let q = space.degree();
    let np = ResidualSplit::points_for_degree(q);
    let rule = QuadratureRule::gauss(np);
    let leg = LegendreTable::new(q + 2, &rule.nodes);
    let phi = space.reference().basis.value_table(&rule.nodes);
    let mesh = space.mesh();
    let n = space.n_cells() * np;
    let (mut hyperbolic, mut r0, mut r1) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..space.n_cells() {
        let j = 2.0 / mesh.width(k);
        let e = eps_hat.value(k);
        for (p, row) in phi.iter().enumerate() {
            let (a0, da0) = leg.eval(&prev.vhat.cells[k], p);
            let (a1, da1) = leg.eval(&next.vhat.cells[k], p);
            let dv = dot(row, next.v.cell(k)) - dot(row, prev.v.cell(k));
            let df = leg.eval(&fhat.cells[k], p).1 * j;
            hyperbolic.push((a1 - a0 - dv) / tau + flux.derivative(a0, 0) * da0 * j - df);
            r0.push(dot(row, d_h.cell(k)));
            r1.push(e * da1 * j);
        }
    }
    ResidualSplit {
        dim: 1,
        n_points: np,
        hyperbolic,
        r0,
        r1,
    }
}

/// Values of a tensor nodal polynomial at tensor points, by sum factorisation.
/// `tx[p][r]` and `ty[s][t]` are the 1D basis tables; output index `p + np * s`.
pub(crate) fn tensor_eval(c: &[f64], tx: &[Vec<f64>], ty: &[Vec<f64>], out: &mut Vec<f64>) {
    let n = tx[0].len();
    let np = tx.len();
    let mut tmp = vec![0.0; np * n];
    for t in 0..n {
        let line = &c[t * n..(t + 1) * n];
        for (p, row) in tx.iter().enumerate() {
            tmp[p + np * t] = dot(row, line);
        }
    }
    out.clear();
    for rs in ty {
        for p in 0..np {
            out.push((0..n).map(|t| rs[t] * tmp[p + np * t]).sum());
        }
    }
}

/// Reconstruction tables at the residual points of a 2D scheme.
pub(crate) struct Tables2D {
    pub rule: QuadratureRule,
    pub hat: Vec<Vec<f64>>,
    pub hat_d: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub leg: LegendreTable,
}

impl Tables2D {
    pub(crate) fn new(space: &Space2D) -> Self {
        let re = space.reference();
        let rule = QuadratureRule::gauss(ResidualSplit::points_for_degree(re.q));
        let ext = LagrangeBasis::new(&extended_nodes(&re.rule.nodes));
        Self {
            hat: ext.value_table(&rule.nodes),
            hat_d: ext.derivative_table(&rule.nodes),
            phi: re.basis.value_table(&rule.nodes),
            leg: LegendreTable::new(re.q + 1, &rule.nodes),
            rule,
        }
    }

    /// `v_hat`, `d_x v_hat`, `d_y v_hat` (reference derivatives) at the points.
    pub(crate) fn hat_values(&self, c: &[f64], out: &mut [Vec<f64>; 3]) {
        tensor_eval(c, &self.hat, &self.hat, &mut out[0]);
        tensor_eval(c, &self.hat_d, &self.hat, &mut out[1]);
        tensor_eval(c, &self.hat, &self.hat_d, &mut out[2]);
    }
}

/// Two dimensional analogue of [`split_residual_1d`].
#[allow(clippy::too_many_arguments)]
pub fn split_residual_2d(
    space: &Space2D,
    prev: Level2D,
    next: Level2D,
    fhat: &FluxReconstruction2D,
    d_h: &DgField,
    eps_hat: &ModelField,
    tau: f64,
    flux: &dyn FluxModel,
) -> ResidualSplit {
    let tab = Tables2D::new(space);
    let np = tab.rule.len();
    let n = space.reference().n();
    let mesh = space.mesh();
    let total = space.n_cells() * np * np;
    let (mut hyperbolic, mut r0, mut r1) = (Vec::with_capacity(total), Vec::with_capacity(total), Vec::with_capacity(2 * total));
    let mut h0: [Vec<f64>; 3] = Default::default();
    let mut h1: [Vec<f64>; 3] = Default::default();
    let (mut vh0, mut vh1, mut dh) = (Vec::new(), Vec::new(), Vec::new());
    let mut line_d = vec![0.0; n * np];
    let mut div = vec![0.0; np * np];
    for k in 0..space.n_cells() {
        let (hx, hy) = mesh.cell_size(k);
        let (jx, jy) = (2.0 / hx, 2.0 / hy);
        tab.hat_values(prev.vhat.cell(k), &mut h0);
        tab.hat_values(next.vhat.cell(k), &mut h1);
        tensor_eval(prev.v.cell(k), &tab.phi, &tab.phi, &mut vh0);
        tensor_eval(next.v.cell(k), &tab.phi, &tab.phi, &mut vh1);
        tensor_eval(d_h.cell(k), &tab.phi, &tab.phi, &mut dh);
        div.iter_mut().for_each(|d| *d = 0.0);
        for dir in 0..2 {
            let j = if dir == 0 { jx } else { jy };
            for m in 0..n {
                let poly = fhat.line(dir, k, m);
                for p in 0..np {
                    line_d[m * np + p] = tab.leg.eval(poly, p).1 * j;
                }
            }
            for s in 0..np {
                for p in 0..np {
                    let (along, across) = if dir == 0 { (p, s) } else { (s, p) };
                    div[p + np * s] += (0..n).map(|m| tab.phi[across][m] * line_d[m * np + along]).sum::<f64>();
                }
            }
        }
        let e = eps_hat.value(k);
        for i in 0..np * np {
            let a0 = h0[0][i];
            let adv = flux.derivative(a0, 0) * h0[1][i] * jx + flux.derivative(a0, 1) * h0[2][i] * jy;
            hyperbolic.push((h1[0][i] - a0 - (vh1[i] - vh0[i])) / tau + adv - div[i]);
            r0.push(dh[i]);
            r1.push(e * h1[1][i] * jx);
            r1.push(e * h1[2][i] * jy);
        }
    }
    ResidualSplit {
        dim: 2,
        n_points: np,
        hyperbolic,
        r0,
        r1,
    }
}
