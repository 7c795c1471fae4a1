use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{line_ip_triplets, DgField, FieldShape, QuadratureRule, RefElement, TraceSide};
use crate::adaptivity::ModelField;
use crate::mesh::{Boundary, Mesh2D};
use crate::{Error, Result};

/// Tensor-product broken space `Q_q` on a Cartesian mesh, nodal at the tensor
/// Gauss points. Node `a + (q + 1) * b` sits at `(xi_a, xi_b)`.
#[derive(Clone, Debug)]
pub struct Space2D {
    mesh: Mesh2D,
    re: RefElement,
    proj: QuadratureRule,
    proj_phi: Vec<Vec<f64>>,
}

impl Space2D {
    pub fn new(mesh: Mesh2D, q: usize) -> Self {
        let re = RefElement::new(q);
        let proj = QuadratureRule::gauss(q + 5);
        let proj_phi = re.basis.value_table(&proj.nodes);
        Self {
            mesh,
            re,
            proj,
            proj_phi,
        }
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.re.q
    }

    pub fn reference(&self) -> &RefElement {
        &self.re
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.re.n() * self.re.n()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_cells() * self.nodes_per_cell()
    }

    pub fn shape(&self) -> FieldShape {
        FieldShape {
            dim: 2,
            cells: self.n_cells(),
            degree: self.re.q,
            n_comp: 1,
        }
    }

    pub fn zeros(&self) -> DgField {
        DgField::zeros(self.shape())
    }

    pub fn node(&self, a: usize, b: usize) -> usize {
        a + self.re.n() * b
    }

    pub fn node_xy(&self, k: usize, node: usize) -> (f64, f64) {
        let n = self.re.n();
        let xs = &self.re.rule.nodes;
        self.mesh.map(k, xs[node % n], xs[node / n])
    }

    pub fn mass(&self, k: usize, node: usize) -> f64 {
        let n = self.re.n();
        let w = &self.re.rule.weights;
        0.25 * self.mesh.area(k) * w[node % n] * w[node / n]
    }

    /// L2 projection onto the space.
    pub fn project(&self, f: impl Fn(f64, f64) -> f64) -> Result<DgField> {
        let n = self.re.n();
        let m = self.proj.len();
        let mut out = self.zeros();
        let mut fx = vec![0.0; m * m];
        for k in 0..self.n_cells() {
            for r in 0..m {
                for s in 0..m {
                    let (x, y) = self.mesh.map(k, self.proj.nodes[r], self.proj.nodes[s]);
                    let v = f(x, y);
                    if !v.is_finite() {
                        return Err(Error::NonFinite(format!("projected function at ({x}, {y})")));
                    }
                    fx[r + m * s] = v;
                }
            }
            let w = &self.re.rule.weights;
            let cell = out.cell_mut(k);
            for b in 0..n {
                for a in 0..n {
                    let mut acc = 0.0;
                    for s in 0..m {
                        let ws = self.proj.weights[s] * self.proj_phi[s][b];
                        for r in 0..m {
                            acc += self.proj.weights[r] * self.proj_phi[r][a] * ws * fx[r + m * s];
                        }
                    }
                    cell[a + n * b] = acc / (w[a] * w[b]);
                }
            }
        }
        Ok(out)
    }

    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> DgField {
        let mut out = self.zeros();
        for k in 0..self.n_cells() {
            for node in 0..self.nodes_per_cell() {
                let (x, y) = self.node_xy(k, node);
                out.set(k, node, 0, f(x, y));
            }
        }
        out
    }

    pub fn eval(&self, v: &DgField, k: usize, xi: f64, eta: f64) -> f64 {
        let n = self.re.n();
        let px = self.re.basis.values(xi);
        let py = self.re.basis.values(eta);
        let c = v.cell(k);
        let mut s = 0.0;
        for b in 0..n {
            for a in 0..n {
                s += c[a + n * b] * px[a] * py[b];
            }
        }
        s
    }

    /// Physical gradient inside cell `k`.
    pub fn grad(&self, v: &DgField, k: usize, xi: f64, eta: f64) -> (f64, f64) {
        let n = self.re.n();
        let px = self.re.basis.values(xi);
        let py = self.re.basis.values(eta);
        let dx = self.re.basis.derivatives(xi);
        let dy = self.re.basis.derivatives(eta);
        let c = v.cell(k);
        let (mut gx, mut gy) = (0.0, 0.0);
        for b in 0..n {
            for a in 0..n {
                gx += c[a + n * b] * dx[a] * py[b];
                gy += c[a + n * b] * px[a] * dy[b];
            }
        }
        let (hx, hy) = self.mesh.cell_size(k);
        (gx * 2.0 / hx, gy * 2.0 / hy)
    }

    pub fn eval_at(&self, v: &DgField, x: f64, y: f64) -> Option<f64> {
        self.mesh.locate(x, y).map(|(k, xi, eta)| self.eval(v, k, xi, eta))
    }

    /// Trace of cell `k` on its face normal to `dir`, at `side` (0 = minus
    /// end, 1 = plus end), evaluated at transverse Gauss node `m`.
    pub fn face_trace(&self, v: &DgField, k: usize, dir: usize, side: usize, m: usize) -> f64 {
        let n = self.re.n();
        let c = v.cell(k);
        let e = &self.re.ends[side];
        if dir == 0 {
            (0..n).map(|a| e[a] * c[a + n * m]).sum()
        } else {
            (0..n).map(|b| e[b] * c[m + n * b]).sum()
        }
    }

    /// Limit of cell `k` at its corner `(sx, sy)` (0 = minus, 1 = plus end).
    pub fn corner_value(&self, v: &DgField, k: usize, sx: usize, sy: usize) -> f64 {
        let n = self.re.n();
        let c = v.cell(k);
        let (ex, ey) = (&self.re.ends[sx], &self.re.ends[sy]);
        let mut s = 0.0;
        for b in 0..n {
            for a in 0..n {
                s += ex[a] * ey[b] * c[a + n * b];
            }
        }
        s
    }

    /// Discrete gradient in direction `dir` using the `side` trace on edges.
    pub fn discrete_gradient(&self, y: &DgField, side: TraceSide, dir: usize) -> DgField {
        let n = self.re.n();
        let w = &self.re.rule.weights;
        let mut out = self.zeros();
        for k in 0..self.n_cells() {
            let (hx, hy) = self.mesh.cell_size(k);
            let h = if dir == 0 { hx } else { hy };
            let lower = self.mesh.neighbor(k, dir, 0);
            let upper = self.mesh.neighbor(k, dir, 1);
            for m in 0..n {
                // traces on the lower and upper faces, at transverse node m
                let yl = match side {
                    TraceSide::Minus => lower.map_or(0.0, |c| self.face_trace(y, c, dir, 1, m)),
                    TraceSide::Plus => self.face_trace(y, k, dir, 0, m),
                };
                let yu = match side {
                    TraceSide::Minus => self.face_trace(y, k, dir, 1, m),
                    TraceSide::Plus => upper.map_or(0.0, |c| self.face_trace(y, c, dir, 0, m)),
                };
                let idx = |a: usize| if dir == 0 { a + n * m } else { m + n * a };
                let yk = y.cell(k);
                let vals: Vec<f64> = (0..n)
                    .map(|j| {
                        let vol: f64 = (0..n).map(|p| w[p] * yk[idx(p)] * self.re.dphi[p][j]).sum();
                        let b = -vol + yu * self.re.ends[1][j] - yl * self.re.ends[0][j];
                        b / (0.5 * h * w[j])
                    })
                    .collect();
                let cell = out.cell_mut(k);
                for (j, v) in vals.into_iter().enumerate() {
                    cell[idx(j)] = v;
                }
            }
        }
        out
    }

    pub fn integrate(&self, v: &DgField) -> f64 {
        let mut s = 0.0;
        for k in 0..self.n_cells() {
            for node in 0..self.nodes_per_cell() {
                s += self.mass(k, node) * v.get(k, node, 0);
            }
        }
        s
    }

    pub fn inner(&self, a: &DgField, b: &DgField) -> f64 {
        let mut s = 0.0;
        for k in 0..self.n_cells() {
            for node in 0..self.nodes_per_cell() {
                s += self.mass(k, node) * a.get(k, node, 0) * b.get(k, node, 0);
            }
        }
        s
    }

    pub fn l2_norm(&self, v: &DgField) -> f64 {
        self.inner(v, v).sqrt()
    }

    pub fn ip_matrix(&self, eps: &[f64], sigma: f64) -> Result<CsrMatrix<f64>> {
        let mut trip = Vec::new();
        self.ip_triplets(eps, sigma, &mut trip)?;
        let n = self.n_dofs();
        let mut coo = CooMatrix::new(n, n);
        for (i, j, v) in trip {
            coo.push(i, j, v);
        }
        Ok(CsrMatrix::from(&coo))
    }

    /// The 2D operator splits into one-dimensional operators along every
    /// row and column of Gauss nodes, weighted by the transverse quadrature.
    pub(crate) fn ip_triplets(&self, eps: &[f64], sigma: f64, out: &mut Vec<(usize, usize, f64)>) -> Result<()> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("penalty sigma must be positive, got {sigma}")));
        }
        let n = self.re.n();
        let npc = self.nodes_per_cell();
        let (nx, ny) = (self.mesh.nx(), self.mesh.ny());
        let periodic = self.mesh.boundary() == Boundary::Periodic;
        let w = &self.re.rule.weights;
        let xw = self.mesh.x_axis().widths();
        let yw = self.mesh.y_axis().widths();
        let mut line_eps = Vec::new();
        for j in 0..ny {
            line_eps.clear();
            line_eps.extend((0..nx).map(|i| eps[i + nx * j]));
            if line_eps.iter().all(|&e| e == 0.0) {
                continue;
            }
            for b in 0..n {
                let scale = 0.5 * yw[j] * w[b];
                line_ip_triplets(&self.re, &xw, &line_eps, periodic, sigma, scale, |i, a| {
                    (i + nx * j) * npc + a + n * b
                }, out);
            }
        }
        for i in 0..nx {
            line_eps.clear();
            line_eps.extend((0..ny).map(|j| eps[i + nx * j]));
            if line_eps.iter().all(|&e| e == 0.0) {
                continue;
            }
            for a in 0..n {
                let scale = 0.5 * xw[i] * w[a];
                line_ip_triplets(&self.re, &yw, &line_eps, periodic, sigma, scale, |j, b| {
                    (i + nx * j) * npc + a + n * b
                }, out);
            }
        }
        Ok(())
    }

    pub fn ip_form(&self, w: &DgField, phi: &DgField, eps_hat: &ModelField, sigma: f64) -> Result<f64> {
        let a = self.ip_matrix(&eps_hat.values(), sigma)?;
        let mut aw = vec![0.0; self.n_dofs()];
        crate::linalg::spmv(&a, w.values(), &mut aw);
        Ok(phi.values().iter().zip(&aw).map(|(x, y)| x * y).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(s: &Space2D, rng: &mut ChaCha8Rng) -> DgField {
        let mut f = s.zeros();
        f.values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        f
    }

    #[test]
    fn projection_reproduces_tensor_polynomials() {
        let mesh = Mesh2D::uniform((0.0, 2.0), (0.0, 1.0), 2, 3, Boundary::Periodic).unwrap();
        let s = Space2D::new(mesh, 2);
        let f = |x: f64, y: f64| 1.0 + x * y - x * x * y * y;
        let p = s.project(f).unwrap();
        for k in 0..s.n_cells() {
            for node in 0..9 {
                let (x, y) = s.node_xy(k, node);
                assert!((p.get(k, node, 0) - f(x, y)).abs() < 1e-13);
            }
        }
        let g = s.project(|x, y| s.eval_at(&p, x, y).unwrap()).unwrap();
        for (a, b) in p.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn discrete_gradients_are_dual_in_each_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let q = trial % 3;
            let mesh = Mesh2D::uniform((-1.0, 1.0), (0.0, 3.0), 3 + trial % 2, 4, Boundary::Periodic).unwrap();
            let s = Space2D::new(mesh, q);
            let phi = random_field(&s, &mut rng);
            let psi = random_field(&s, &mut rng);
            for dir in 0..2 {
                let lhs = s.inner(&phi, &s.discrete_gradient(&psi, TraceSide::Minus, dir));
                let rhs = -s.inner(&psi, &s.discrete_gradient(&phi, TraceSide::Plus, dir));
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_of_affine_field_is_exact() {
        let mesh = Mesh2D::uniform((-1.0, 1.0), (-1.0, 1.0), 4, 4, Boundary::Dirichlet).unwrap();
        let s = Space2D::new(mesh, 1);
        let y = s.interpolate(|x, y| 2.0 * x - y);
        let gx = s.discrete_gradient(&y, TraceSide::Minus, 0);
        let gy = s.discrete_gradient(&y, TraceSide::Plus, 1);
        for (i, j) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let k = s.mesh().cell_index(i, j);
            for node in 0..4 {
                assert!((gx.get(k, node, 0) - 2.0).abs() < 1e-12);
                assert!((gy.get(k, node, 0) + 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ip_form_is_nonnegative_and_symmetric() {
        let mesh = Mesh2D::uniform((-1.0, 1.0), (-1.0, 1.0), 5, 4, Boundary::Periodic).unwrap();
        let s = Space2D::new(mesh, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eps: Vec<f64> = (0..20).map(|_| if rng.gen_bool(0.5) { 0.01 } else { 0.0 }).collect();
        let field = ModelField::from_values(0.01, &eps).unwrap();
        for _ in 0..10 {
            let a = random_field(&s, &mut rng);
            let b = random_field(&s, &mut rng);
            assert!(s.ip_form(&a, &a, &field, 10.0).unwrap() >= 0.0);
            let ab = s.ip_form(&a, &b, &field, 10.0).unwrap();
            let ba = s.ip_form(&b, &a, &field, 10.0).unwrap();
            assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn ip_form_of_smooth_periodic_field_matches_dirichlet_energy() {
        let mesh = Mesh2D::uniform((0.0, 1.0), (0.0, 1.0), 3, 3, Boundary::Periodic).unwrap();
        let s = Space2D::new(mesh, 1);
        let hat = |t: f64| (1.0 - 3.0 * (t - 1.0 / 3.0).abs()).max(0.0);
        let w = s.interpolate(|x, y| hat(x) * hat(y));
        let field = ModelField::full(9, 1.0);
        let a = s.ip_form(&w, &w, &field, 10.0).unwrap();
        let mut e = 0.0;
        let r = QuadratureRule::gauss(3);
        for k in 0..9 {
            for (xi, wx) in r.iter() {
                for (eta, wy) in r.iter() {
                    let (gx, gy) = s.grad(&w, k, xi, eta);
                    e += 0.25 * s.mesh().area(k) * wx * wy * (gx * gx + gy * gy);
                }
            }
        }
        assert!((a - e).abs() < 1e-12);
    }
}
