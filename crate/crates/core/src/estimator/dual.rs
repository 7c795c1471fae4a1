use nalgebra::{DMatrix, SymmetricEigen};

use crate::dg::{LagrangeBasis, QuadratureRule};
use crate::linalg::{BandedCholesky, BorderedBanded};
use crate::mesh::{Boundary, Mesh1D, Mesh2D};
use crate::reconstruction::ResidualSplit;
use crate::{Error, Result};

/// Riesz representative of a functional and its squared `H^1` norm.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    /// `|psi|_{H^1}^2 = |R|_{H^-1}^2`.
    pub norm_sq: f64,
    /// `int_K |grad psi|^2 + psi^2` for every cell, summing to `norm_sq`.
    pub cell_energy: Vec<f64>,
}

impl DualSolution {
    fn zero(n: usize) -> Self {
        Self {
            norm_sq: 0.0,
            cell_energy: vec![0.0; n],
        }
    }
}

/// Reference tables of the continuous degree `p` element on Chebyshev-Lobatto nodes.
#[derive(Clone, Debug)]
struct DualElement {
    p: usize,
    stiff: Vec<f64>,
    mass: Vec<f64>,
    load_val: Vec<Vec<f64>>,
    load_der: Vec<Vec<f64>>,
    load_w: Vec<f64>,
}

impl DualElement {
    fn new(p: usize, n_points: usize) -> Self {
        let nodes: Vec<f64> = (0..=p).map(|i| -(std::f64::consts::PI * i as f64 / p as f64).cos()).collect();
        let basis = LagrangeBasis::new(&nodes);
        let g = QuadratureRule::gauss(p + 1);
        let val = basis.value_table(&g.nodes);
        let der = basis.derivative_table(&g.nodes);
        let n = p + 1;
        let mut stiff = vec![0.0; n * n];
        let mut mass = vec![0.0; n * n];
        for (q, w) in g.weights.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    stiff[i * n + j] += w * der[q][i] * der[q][j];
                    mass[i * n + j] += w * val[q][i] * val[q][j];
                }
            }
        }
        let r = QuadratureRule::gauss(n_points);
        Self {
            p,
            stiff,
            mass,
            load_val: basis.value_table(&r.nodes),
            load_der: basis.derivative_table(&r.nodes),
            load_w: r.weights,
        }
    }

    fn n(&self) -> usize {
        self.p + 1
    }

    /// Local `H^1` matrix `(2/h) K + (h/2) M`.
    fn local(&self, h: f64, i: usize, j: usize) -> f64 {
        let n = self.n();
        2.0 / h * self.stiff[i * n + j] + 0.5 * h * self.mass[i * n + j]
    }
}

/// Global numbering of the continuous nodes along one axis. Periodic axes
/// place the node at the domain start last; Dirichlet axes drop both end nodes.
#[derive(Clone, Debug)]
struct DualAxis {
    p: usize,
    n_cells: usize,
    periodic: bool,
    widths: Vec<f64>,
}

impl DualAxis {
    fn new(mesh: &Mesh1D, p: usize) -> Self {
        Self {
            p,
            n_cells: mesh.n_cells(),
            periodic: mesh.boundary() == Boundary::Periodic,
            widths: mesh.widths(),
        }
    }

    fn len(&self) -> usize {
        let g = self.n_cells * self.p;
        if self.periodic {
            g
        } else {
            g - 1
        }
    }

    fn node(&self, k: usize, j: usize) -> Option<usize> {
        let g = k * self.p + j;
        let total = self.n_cells * self.p;
        if self.periodic {
            Some((g + total - 1) % total)
        } else if g == 0 || g == total {
            None
        } else {
            Some(g - 1)
        }
    }

    /// Dense global `K` and `M` matrices of this axis.
    fn dense(&self, el: &DualElement) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.len();
        let mut k = DMatrix::zeros(n, n);
        let mut m = DMatrix::zeros(n, n);
        let nl = el.n();
        for c in 0..self.n_cells {
            let h = self.widths[c];
            for i in 0..nl {
                let Some(gi) = self.node(c, i) else { continue };
                for j in 0..nl {
                    let Some(gj) = self.node(c, j) else { continue };
                    k[(gi, gj)] += 2.0 / h * el.stiff[i * nl + j];
                    m[(gi, gj)] += 0.5 * h * el.mass[i * nl + j];
                }
            }
        }
        (k, m)
    }
}

#[derive(Clone, Debug)]
enum Factor {
    Banded(BandedCholesky),
    Bordered(BorderedBanded),
}

/// Dual norm `|R|_{H^-1}` of functionals on a 1D mesh, computed from the
/// Riesz problem `(psi', chi') + (psi, chi) = <R, chi>` over continuous
/// piecewise polynomials of degree `q + 2` (with zero end values under
/// Dirichlet conditions).
#[derive(Clone, Debug)]
pub struct DualNorm1D {
    el: DualElement,
    axis: DualAxis,
    factor: Factor,
}

impl DualNorm1D {
    pub fn new(mesh: &Mesh1D, q: usize) -> Result<Self> {
        let p = q + 2;
        let el = DualElement::new(p, ResidualSplit::points_for_degree(q));
        let axis = DualAxis::new(mesh, p);
        let n = axis.len();
        if n == 0 {
            return Err(Error::SingularOperator("dual space has no unknowns".into()));
        }
        let nl = el.n();
        let band_rows = if axis.periodic { n - 1 } else { n };
        let mut band = vec![0.0; band_rows * (p + 1)];
        let mut border = vec![0.0; n.saturating_sub(1)];
        let mut corner = 0.0;
        for c in 0..axis.n_cells {
            let h = axis.widths[c];
            for i in 0..nl {
                let Some(gi) = axis.node(c, i) else { continue };
                for j in 0..nl {
                    let Some(gj) = axis.node(c, j) else { continue };
                    let v = el.local(h, i, j);
                    let last = n - 1;
                    if axis.periodic && gi == last && gj == last {
                        corner += v;
                    } else if axis.periodic && gj == last {
                        border[gi] += v;
                    } else if axis.periodic && gi == last {
                        continue;
                    } else if gj <= gi {
                        band[gi * (p + 1) + p - (gi - gj)] += v;
                    }
                }
            }
        }
        let entry = |i: usize, j: usize| band[i * (p + 1) + p - (i - j)];
        let factor = if axis.periodic {
            Factor::Bordered(BorderedBanded::factor(n, p, entry, border, corner)?)
        } else {
            Factor::Banded(BandedCholesky::factor(n, p, entry)?)
        };
        Ok(Self { el, axis, factor })
    }

    /// Gauss points per cell expected in `r0`, `r1`.
    pub fn n_points(&self) -> usize {
        self.el.load_w.len()
    }

    /// Norm of `chi -> sum_K int_K (r0 chi + r1 chi')`, with `r0`, `r1`
    /// sampled at the residual Gauss points of every cell.
    pub fn evaluate(&self, r0: &[f64], r1: &[f64]) -> Result<DualSolution> {
        let np = self.n_points();
        let nc = self.axis.n_cells;
        if r0.len() != nc * np || r1.len() != nc * np {
            return Err(Error::InvalidParameter("functional data does not match the mesh".into()));
        }
        if r0.iter().chain(r1).all(|&x| x == 0.0) {
            return Ok(DualSolution::zero(nc));
        }
        let nl = self.el.n();
        let mut b = vec![0.0; self.axis.len()];
        for c in 0..nc {
            let h = self.axis.widths[c];
            for p in 0..np {
                let w = 0.5 * h * self.el.load_w[p];
                let (a0, a1) = (r0[c * np + p], r1[c * np + p] * 2.0 / h);
                for i in 0..nl {
                    if let Some(g) = self.axis.node(c, i) {
                        b[g] += w * (a0 * self.el.load_val[p][i] + a1 * self.el.load_der[p][i]);
                    }
                }
            }
        }
        let psi = match &self.factor {
            Factor::Banded(f) => f.solve(&b),
            Factor::Bordered(f) => f.solve(&b),
        };
        let mut cell_energy = Vec::with_capacity(nc);
        let mut local = vec![0.0; nl];
        for c in 0..nc {
            let h = self.axis.widths[c];
            for (i, l) in local.iter_mut().enumerate() {
                *l = self.axis.node(c, i).map_or(0.0, |g| psi[g]);
            }
            let mut e = 0.0;
            for i in 0..nl {
                for j in 0..nl {
                    e += local[i] * self.el.local(h, i, j) * local[j];
                }
            }
            cell_energy.push(e.max(0.0));
        }
        Ok(DualSolution {
            norm_sq: cell_energy.iter().sum(),
            cell_energy,
        })
    }

    pub fn norm(&self, r0: &[f64], r1: &[f64]) -> Result<f64> {
        Ok(self.evaluate(r0, r1)?.norm_sq.sqrt())
    }
}

/// Generalised eigenpairs `K u = lambda M u` with `U^T M U = I`.
fn generalized_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularOperator("dual mass matrix not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularOperator("dual mass factor not invertible".into()))?;
    let c = &linv * k * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let u = linv.transpose() * eig.eigenvectors;
    Ok((u, eig.eigenvalues.iter().copied().collect()))
}

/// Two dimensional dual norm on tensor continuous `Q_{q+2}` elements, solved
/// by fast diagonalisation of `K_x (x) M_y + M_x (x) K_y + M_x (x) M_y`.
#[derive(Clone, Debug)]
pub struct DualNorm2D {
    el: DualElement,
    ax: DualAxis,
    ay: DualAxis,
    ux: DMatrix<f64>,
    uy: DMatrix<f64>,
    lx: Vec<f64>,
    ly: Vec<f64>,
    energy_val: Vec<Vec<f64>>,
    energy_der: Vec<Vec<f64>>,
    energy_w: Vec<f64>,
}

impl DualNorm2D {
    pub fn new(mesh: &Mesh2D, q: usize) -> Result<Self> {
        let p = q + 2;
        let el = DualElement::new(p, ResidualSplit::points_for_degree(q));
        let ax = DualAxis::new(mesh.x_axis(), p);
        let ay = DualAxis::new(mesh.y_axis(), p);
        if ax.len() == 0 || ay.len() == 0 {
            return Err(Error::SingularOperator("dual space has no unknowns".into()));
        }
        let (kx, mx) = ax.dense(&el);
        let (ky, my) = ay.dense(&el);
        let (ux, lx) = generalized_eigen(&kx, &mx)?;
        let (uy, ly) = generalized_eigen(&ky, &my)?;
        let nodes: Vec<f64> = (0..=p).map(|i| -(std::f64::consts::PI * i as f64 / p as f64).cos()).collect();
        let basis = LagrangeBasis::new(&nodes);
        let g = QuadratureRule::gauss(p + 1);
        Ok(Self {
            el,
            ax,
            ay,
            ux,
            uy,
            lx,
            ly,
            energy_val: basis.value_table(&g.nodes),
            energy_der: basis.derivative_table(&g.nodes),
            energy_w: g.weights,
        })
    }

    pub fn n_points(&self) -> usize {
        self.el.load_w.len()
    }

    /// `r0` holds one value and `r1` two components per residual point, with
    /// point `p + n_points * s` of cell `k` at `(xi_p, xi_s)`.
    pub fn evaluate(&self, mesh: &Mesh2D, r0: &[f64], r1: &[f64]) -> Result<DualSolution> {
        let np = self.n_points();
        let nc = mesh.n_cells();
        let ppc = np * np;
        if r0.len() != nc * ppc || r1.len() != 2 * nc * ppc {
            return Err(Error::InvalidParameter("functional data does not match the mesh".into()));
        }
        if r0.iter().chain(r1).all(|&x| x == 0.0) {
            return Ok(DualSolution::zero(nc));
        }
        let (nx, ny) = (self.ax.len(), self.ay.len());
        let nl = self.el.n();
        let (val, der, w) = (&self.el.load_val, &self.el.load_der, &self.el.load_w);
        let mut b = DMatrix::<f64>::zeros(nx, ny);
        let mut t0 = vec![0.0; nl * np];
        let mut t1 = vec![0.0; nl * np];
        for k in 0..nc {
            let (i, j) = mesh.cell_ij(k);
            let (hx, hy) = mesh.cell_size(k);
            let jac = 0.25 * hx * hy;
            let base = k * ppc;
            // Contract in x first: t[a][s] = sum_p w_p (.) phi_a(xi_p).
            for a in 0..nl {
                for s in 0..np {
                    let (mut s0, mut s1) = (0.0, 0.0);
                    for p in 0..np {
                        let idx = base + p + np * s;
                        let wp = w[p];
                        s0 += wp * (r0[idx] * val[p][a] + r1[2 * idx] * der[p][a] * 2.0 / hx);
                        s1 += wp * r1[2 * idx + 1] * val[p][a];
                    }
                    t0[a * np + s] = s0;
                    t1[a * np + s] = s1;
                }
            }
            for a in 0..nl {
                let Some(gx) = self.ax.node(i, a) else { continue };
                for c in 0..nl {
                    let Some(gy) = self.ay.node(j, c) else { continue };
                    let mut s = 0.0;
                    for q in 0..np {
                        s += w[q] * (t0[a * np + q] * val[q][c] + t1[a * np + q] * der[q][c] * 2.0 / hy);
                    }
                    b[(gx, gy)] += jac * s;
                }
            }
        }
        let mut z = self.ux.transpose() * b * &self.uy;
        for gx in 0..nx {
            for gy in 0..ny {
                z[(gx, gy)] /= self.lx[gx] + self.ly[gy] + 1.0;
            }
        }
        let psi = &self.ux * z * self.uy.transpose();
        let mut cell_energy = Vec::with_capacity(nc);
        let nq = self.energy_w.len();
        let mut local = vec![0.0; nl * nl];
        for k in 0..nc {
            let (i, j) = mesh.cell_ij(k);
            let (hx, hy) = mesh.cell_size(k);
            for a in 0..nl {
                for c in 0..nl {
                    local[a + nl * c] = match (self.ax.node(i, a), self.ay.node(j, c)) {
                        (Some(gx), Some(gy)) => psi[(gx, gy)],
                        _ => 0.0,
                    };
                }
            }
            let mut e = 0.0;
            for qy in 0..nq {
                for qx in 0..nq {
                    let (mut v, mut dx, mut dy) = (0.0, 0.0, 0.0);
                    for c in 0..nl {
                        for a in 0..nl {
                            let l = local[a + nl * c];
                            v += l * self.energy_val[qx][a] * self.energy_val[qy][c];
                            dx += l * self.energy_der[qx][a] * self.energy_val[qy][c];
                            dy += l * self.energy_val[qx][a] * self.energy_der[qy][c];
                        }
                    }
                    let (dx, dy) = (dx * 2.0 / hx, dy * 2.0 / hy);
                    e += self.energy_w[qx] * self.energy_w[qy] * 0.25 * hx * hy * (v * v + dx * dx + dy * dy);
                }
            }
            cell_energy.push(e);
        }
        Ok(DualSolution {
            norm_sq: cell_energy.iter().sum(),
            cell_energy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample_1d(mesh: &Mesh1D, np: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let r = QuadratureRule::gauss(np);
        (0..mesh.n_cells())
            .flat_map(|k| r.nodes.iter().map(|&xi| f(mesh.map(k, xi))).collect::<Vec<_>>())
            .collect()
    }

    #[test]
    fn zero_functional_has_zero_norm() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 8, Boundary::Periodic).unwrap();
        let d = DualNorm1D::new(&mesh, 1).unwrap();
        let z = vec![0.0; 8 * d.n_points()];
        assert_eq!(d.norm(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn periodic_sine_matches_fourier_value() {
        let mesh = Mesh1D::uniform(-PI, PI, 200, Boundary::Periodic).unwrap();
        let d = DualNorm1D::new(&mesh, 1).unwrap();
        for k in 1..4 {
            let kf = k as f64;
            let r0 = sample_1d(&mesh, d.n_points(), |x| (kf * x).sin());
            let zero = vec![0.0; r0.len()];
            let n2 = d.evaluate(&r0, &zero).unwrap().norm_sq;
            let exact = PI / (1.0 + kf * kf);
            assert!((n2 - exact).abs() < 1e-6 * exact, "k={k} {n2} {exact}");
        }
    }

    #[test]
    fn derivative_functional_matches_fourier_value() {
        // chi -> int cos(2x) chi' is the functional 2 sin(2x), norm^2 = 4 pi / 5.
        let mesh = Mesh1D::uniform(-PI, PI, 150, Boundary::Periodic).unwrap();
        let d = DualNorm1D::new(&mesh, 2).unwrap();
        let r1 = sample_1d(&mesh, d.n_points(), |x| (2.0 * x).cos());
        let r0 = vec![0.0; r1.len()];
        let n2 = d.evaluate(&r0, &r1).unwrap().norm_sq;
        assert!((n2 - 4.0 * PI / 5.0).abs() < 1e-6);
    }

    #[test]
    fn dirichlet_solution_matches_dense_solve() {
        let nodes = vec![0.0, 0.1, 0.35, 0.4, 0.8, 1.0];
        let mesh = Mesh1D::from_nodes(nodes, Boundary::Dirichlet).unwrap();
        let d = DualNorm1D::new(&mesh, 1).unwrap();
        let r0 = sample_1d(&mesh, d.n_points(), |x| 1.0 + x * x);
        let r1 = sample_1d(&mesh, d.n_points(), |x| x.sin());
        let got = d.evaluate(&r0, &r1).unwrap().norm_sq;
        let (k, m) = d.axis.dense(&d.el);
        let a = k + m;
        let mut b = nalgebra::DVector::zeros(d.axis.len());
        let np = d.n_points();
        for c in 0..mesh.n_cells() {
            let h = mesh.width(c);
            for p in 0..np {
                for i in 0..d.el.n() {
                    if let Some(g) = d.axis.node(c, i) {
                        b[g] += 0.5 * h * d.el.load_w[p] * (r0[c * np + p] * d.el.load_val[p][i] + r1[c * np + p] * 2.0 / h * d.el.load_der[p][i]);
                    }
                }
            }
        }
        let psi = a.lu().solve(&b).unwrap();
        assert!((got - b.dot(&psi)).abs() < 1e-12 * got);
    }

    #[test]
    fn periodic_two_dimensional_mode_matches_fourier_value() {
        let mesh = Mesh2D::uniform((-PI, PI), (-PI, PI), 24, 24, Boundary::Periodic).unwrap();
        let d = DualNorm2D::new(&mesh, 1).unwrap();
        let np = d.n_points();
        let r = QuadratureRule::gauss(np);
        let mut r0 = Vec::new();
        for k in 0..mesh.n_cells() {
            for s in 0..np {
                for p in 0..np {
                    let (x, y) = mesh.map(k, r.nodes[p], r.nodes[s]);
                    r0.push(x.sin() * (2.0 * y).cos());
                }
            }
        }
        let r1 = vec![0.0; 2 * r0.len()];
        let n2 = d.evaluate(&mesh, &r0, &r1).unwrap().norm_sq;
        let exact = PI * PI / 6.0;
        assert!((n2 - exact).abs() < 1e-5 * exact, "{n2} {exact}");
    }

    #[test]
    fn homogeneous_of_degree_one() {
        let mesh = Mesh2D::uniform((0.0, 1.0), (0.0, 2.0), 5, 4, Boundary::Dirichlet).unwrap();
        let d = DualNorm2D::new(&mesh, 1).unwrap();
        let n = mesh.n_cells() * d.n_points().pow(2);
        let r0: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let r1: Vec<f64> = (0..2 * n).map(|i| ((i * 5) % 11) as f64 * 0.1).collect();
        let a = d.evaluate(&mesh, &r0, &r1).unwrap().norm_sq.sqrt();
        let r0b: Vec<f64> = r0.iter().map(|x| 2.0 * x).collect();
        let r1b: Vec<f64> = r1.iter().map(|x| 2.0 * x).collect();
        let b = d.evaluate(&mesh, &r0b, &r1b).unwrap().norm_sq.sqrt();
        assert!(a > 0.0);
        assert!((b - 2.0 * a).abs() < 1e-10 * a);
    }
}
