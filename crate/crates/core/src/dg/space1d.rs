use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{line_ip_triplets, DgField, FieldShape, QuadratureRule, RefElement, TraceSide};
use crate::adaptivity::ModelField;
use crate::mesh::{Boundary, Mesh1D};
use crate::{Error, Result};

/// One-sided limits on every edge of a 1D mesh.
///
/// `minus` is the limit from the left cell and `plus` from the right cell;
/// at a Dirichlet boundary the missing side carries the ghost value 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceData {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl TraceData {
    pub fn jump(&self, e: usize) -> f64 {
        self.minus[e] - self.plus[e]
    }

    pub fn average(&self, e: usize) -> f64 {
        0.5 * (self.minus[e] + self.plus[e])
    }

    pub fn len(&self) -> usize {
        self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty()
    }
}

/// Broken polynomial space of degree `q` on a 1D mesh, nodal at Gauss points.
#[derive(Clone, Debug)]
pub struct Space1D {
    mesh: Mesh1D,
    re: RefElement,
    proj: QuadratureRule,
    proj_phi: Vec<Vec<f64>>,
}

impl Space1D {
    pub fn new(mesh: Mesh1D, q: usize) -> Self {
        let re = RefElement::new(q);
        let proj = QuadratureRule::gauss(q + 6);
        let proj_phi = re.basis.value_table(&proj.nodes);
        Self {
            mesh,
            re,
            proj,
            proj_phi,
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
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

    pub fn n_dofs(&self) -> usize {
        self.n_cells() * self.re.n()
    }

    pub fn shape(&self) -> FieldShape {
        FieldShape {
            dim: 1,
            cells: self.n_cells(),
            degree: self.re.q,
            n_comp: 1,
        }
    }

    pub fn zeros(&self) -> DgField {
        DgField::zeros(self.shape())
    }

    /// Physical coordinate of Gauss node `p` in cell `k`.
    pub fn node_x(&self, k: usize, p: usize) -> f64 {
        self.mesh.map(k, self.re.rule.nodes[p])
    }

    /// Diagonal mass entry of node `p` in cell `k`.
    pub fn mass(&self, k: usize, p: usize) -> f64 {
        0.5 * self.mesh.width(k) * self.re.rule.weights[p]
    }

    /// L2 projection onto the space.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> Result<DgField> {
        let mut out = self.zeros();
        let n = self.re.n();
        for k in 0..self.n_cells() {
            let fx: Vec<f64> = self.proj.nodes.iter().map(|&xi| f(self.mesh.map(k, xi))).collect();
            if let Some(bad) = fx.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "projected function at x = {}",
                    self.mesh.map(k, self.proj.nodes[bad])
                )));
            }
            let cell = out.cell_mut(k);
            for j in 0..n {
                let s: f64 = (0..self.proj.len())
                    .map(|r| self.proj.weights[r] * fx[r] * self.proj_phi[r][j])
                    .sum();
                cell[j] = s / self.re.rule.weights[j];
            }
        }
        Ok(out)
    }

    /// Nodal interpolation at the Gauss points.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> DgField {
        let mut out = self.zeros();
        for k in 0..self.n_cells() {
            for p in 0..self.re.n() {
                out.set(k, p, 0, f(self.node_x(k, p)));
            }
        }
        out
    }

    pub fn eval(&self, v: &DgField, k: usize, xi: f64) -> f64 {
        self.re.eval(v.cell(k), xi)
    }

    /// Physical derivative inside cell `k`.
    pub fn eval_deriv(&self, v: &DgField, k: usize, xi: f64) -> f64 {
        self.re.eval_deriv(v.cell(k), xi) * 2.0 / self.mesh.width(k)
    }

    pub fn eval_at(&self, v: &DgField, x: f64) -> Option<f64> {
        self.mesh.locate(x).map(|(k, xi)| self.eval(v, k, xi))
    }

    /// Trace of cell `k` at its left (`side = 0`) or right (`side = 1`) end.
    pub fn trace(&self, v: &DgField, k: usize, side: usize) -> f64 {
        self.re.end_value(v.cell(k), side)
    }

    pub fn traces(&self, v: &DgField) -> TraceData {
        let edges = self.mesh.edges();
        let mut minus = Vec::with_capacity(edges.len());
        let mut plus = Vec::with_capacity(edges.len());
        for e in edges {
            minus.push(e.left.map_or(0.0, |k| self.trace(v, k, 1)));
            plus.push(e.right.map_or(0.0, |k| self.trace(v, k, 0)));
        }
        TraceData { minus, plus }
    }

    /// Discrete gradient using the `side` trace of `y` on every edge.
    pub fn discrete_gradient(&self, y: &DgField, side: TraceSide) -> DgField {
        let tr = self.traces(y);
        let pick = |e: usize| match side {
            TraceSide::Minus => tr.minus[e],
            TraceSide::Plus => tr.plus[e],
        };
        let n = self.re.n();
        let mut out = self.zeros();
        for k in 0..self.n_cells() {
            let yl = pick(self.mesh.cell_edge(k, 0));
            let yr = pick(self.mesh.cell_edge(k, 1));
            let yk = y.cell(k);
            let h = self.mesh.width(k);
            let w = &self.re.rule.weights;
            let cell = out.cell_mut(k);
            for j in 0..n {
                let vol: f64 = (0..n).map(|p| w[p] * yk[p] * self.re.dphi[p][j]).sum();
                let b = -vol + yr * self.re.ends[1][j] - yl * self.re.ends[0][j];
                cell[j] = b / (0.5 * h * w[j]);
            }
        }
        out
    }

    pub fn integrate(&self, v: &DgField) -> f64 {
        let mut s = 0.0;
        for k in 0..self.n_cells() {
            for p in 0..self.re.n() {
                s += self.mass(k, p) * v.get(k, p, 0);
            }
        }
        s
    }

    pub fn inner(&self, a: &DgField, b: &DgField) -> f64 {
        let mut s = 0.0;
        for k in 0..self.n_cells() {
            for p in 0..self.re.n() {
                s += self.mass(k, p) * a.get(k, p, 0) * b.get(k, p, 0);
            }
        }
        s
    }

    pub fn l2_norm(&self, v: &DgField) -> f64 {
        self.inner(v, v).sqrt()
    }

    /// Global index of node `p` in cell `k`.
    pub fn dof(&self, k: usize, p: usize) -> usize {
        k * self.re.n() + p
    }

    /// Interior-penalty matrix for per-cell diffusion coefficients `eps`.
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

    pub(crate) fn ip_triplets(&self, eps: &[f64], sigma: f64, out: &mut Vec<(usize, usize, f64)>) -> Result<()> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("penalty sigma must be positive, got {sigma}")));
        }
        let n = self.re.n();
        line_ip_triplets(
            &self.re,
            &self.mesh.widths(),
            eps,
            self.mesh.boundary() == Boundary::Periodic,
            sigma,
            1.0,
            |c, j| c * n + j,
            out,
        );
        Ok(())
    }

    /// Interior-penalty bilinear form weighted by the model field.
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
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize, q: usize, b: Boundary) -> Space1D {
        Space1D::new(Mesh1D::uniform(-1.0, 1.0, n, b).unwrap(), q)
    }

    fn random_field(s: &Space1D, rng: &mut ChaCha8Rng) -> DgField {
        let mut f = s.zeros();
        f.values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        f
    }

    #[test]
    fn projection_reproduces_polynomials_and_constants() {
        let s = space(5, 2, Boundary::Periodic);
        let f = s.project(|x| 1.0 - 2.0 * x + 3.0 * x * x).unwrap();
        for k in 0..5 {
            for p in 0..3 {
                let x = s.node_x(k, p);
                assert!((f.get(k, p, 0) - (1.0 - 2.0 * x + 3.0 * x * x)).abs() < 1e-13);
            }
        }
        let c = s.project(|_| 2.5).unwrap();
        assert!(c.values().iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn projection_is_idempotent() {
        let s = space(7, 3, Boundary::Periodic);
        let f = s.project(|x| (3.0 * x).sin()).unwrap();
        let g = s.project(|x| s.eval_at(&f, x).unwrap()).unwrap();
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_error_is_second_order() {
        let mesh = Mesh1D::uniform(-std::f64::consts::PI, std::f64::consts::PI, 1000, Boundary::Periodic).unwrap();
        let h = mesh.width(0);
        let s = Space1D::new(mesh, 1);
        let f = s.project(f64::sin).unwrap();
        // dense-quadrature projection oracle on a single cell
        let oracle = |k: usize| {
            let (a, b) = s.mesh().cell(k);
            let r = QuadratureRule::gauss(20);
            let m = |f: &dyn Fn(f64) -> f64| r.integrate(a, b, f);
            let c = 0.5 * (a + b);
            let l0 = m(&|x| x.sin());
            let l1 = m(&|x| x.sin() * (x - c));
            let i1 = m(&|x| (x - c) * (x - c));
            (l0 / (b - a), l1 / i1, c)
        };
        let mut max_err: f64 = 0.0;
        for k in (0..1000).step_by(37) {
            let (c0, c1, c) = oracle(k);
            for p in 0..2 {
                let x = s.node_x(k, p);
                assert!((f.get(k, p, 0) - (c0 + c1 * (x - c))).abs() < 1e-12);
                max_err = max_err.max((f.get(k, p, 0) - x.sin()).abs());
            }
        }
        assert!(max_err < h * h);
    }

    #[test]
    fn non_finite_projection_is_an_error() {
        let s = space(3, 1, Boundary::Periodic);
        assert!(matches!(s.project(|_| f64::NAN), Err(Error::NonFinite(_))));
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let s = space(6, 2, Boundary::Periodic);
        let c = s.project(|_| 1.7).unwrap();
        for side in [TraceSide::Minus, TraceSide::Plus] {
            assert!(s.discrete_gradient(&c, side).max_abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_gradients_are_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..50 {
            let q = trial % 3;
            let n = 3 + trial % 5;
            let mut nodes = vec![0.0];
            for _ in 0..n {
                nodes.push(nodes.last().unwrap() + rng.gen_range(0.2..1.0));
            }
            let s = Space1D::new(Mesh1D::from_nodes(nodes, Boundary::Periodic).unwrap(), q);
            let phi = random_field(&s, &mut rng);
            let psi = random_field(&s, &mut rng);
            let lhs = s.inner(&phi, &s.discrete_gradient(&psi, TraceSide::Minus));
            let rhs = -s.inner(&psi, &s.discrete_gradient(&phi, TraceSide::Plus));
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn gradient_of_continuous_hat_is_its_derivative() {
        let s = space(4, 1, Boundary::Periodic);
        let hat = |x: f64| (1.0 - 2.0 * x.abs()).max(0.0);
        let y = s.interpolate(hat);
        let d = s.discrete_gradient(&y, TraceSide::Minus);
        for k in 0..4 {
            let (a, b) = s.mesh().cell(k);
            let slope = (hat(b) - hat(a)) / (b - a);
            for p in 0..2 {
                assert!((d.get(k, p, 0) - slope).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ip_form_of_continuous_linear_is_volume_term() {
        let s = space(8, 1, Boundary::Periodic);
        let eps = ModelField::full(8, 0.3);
        let w = s.interpolate(|x| 1.0 - x.abs());
        let phi = s.interpolate(|x| x * x);
        let a = s.ip_form(&w, &phi, &eps, 10.0).unwrap();
        let mut vol = 0.0;
        for k in 0..8 {
            let r = QuadratureRule::gauss(4);
            for (xi, wt) in r.iter() {
                vol += 0.5 * s.mesh().width(k) * wt * s.eval_deriv(&w, k, xi) * s.eval_deriv(&phi, k, xi);
            }
        }
        assert!((a - 0.3 * vol).abs() < 1e-12);
    }

    #[test]
    fn ip_form_vanishes_for_simple_model_and_rejects_bad_penalty() {
        let s = space(5, 2, Boundary::Dirichlet);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_field(&s, &mut rng);
        let off = ModelField::zeros(5, 0.1);
        assert_eq!(s.ip_form(&w, &w, &off, 10.0).unwrap(), 0.0);
        assert!(matches!(
            s.ip_form(&w, &w, &off, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ip_operator_is_coercive_on_test_one_mesh() {
        let mesh = Mesh1D::uniform(-std::f64::consts::PI, std::f64::consts::PI, 1000, Boundary::Dirichlet).unwrap();
        let s = Space1D::new(mesh, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let eps: Vec<f64> = (0..1000).map(|_| if rng.gen_bool(0.5) { 0.005 } else { 0.0 }).collect();
        let a = s.ip_matrix(&eps, 10.0).unwrap();
        // eigenvalue scan on a window of the operator plus the full quadratic form
        let n = 200;
        let dense = DMatrix::from_fn(n, n, |i, j| a.get_entry(i, j).map_or(0.0, |e| e.into_value()));
        let ev = SymmetricEigen::new(dense).eigenvalues;
        assert!(ev.iter().all(|&l| l > -1e-12));
        let field = ModelField::from_values(0.005, &eps).unwrap();
        for _ in 0..20 {
            let w = random_field(&s, &mut rng);
            assert!(s.ip_form(&w, &w, &field, 10.0).unwrap() >= 0.0);
        }
    }

    #[test]
    fn ip_matrix_is_symmetric() {
        let s = space(6, 2, Boundary::Dirichlet);
        let eps = [0.1, 0.0, 0.1, 0.1, 0.0, 0.1];
        let a = s.ip_matrix(&eps, 10.0).unwrap();
        let n = s.n_dofs();
        for i in 0..n {
            for j in 0..n {
                let x = a.get_entry(i, j).map_or(0.0, |e| e.into_value());
                let y = a.get_entry(j, i).map_or(0.0, |e| e.into_value());
                assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
