//! Legendre polynomials, Lagrange bases on arbitrary node sets and a small
//! modal (Legendre) polynomial type used by the reconstructions.

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Lagrange basis `l_j(x_k) = delta_jk` on a set of distinct nodes.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[f64]) -> Self {
        let denom = nodes
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != j)
                    .map(|(_, &xm)| xj - xm)
                    .product()
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            denom,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, j: usize, x: f64) -> f64 {
        let num: f64 = self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != j)
            .map(|(_, &xm)| x - xm)
            .product();
        num / self.denom[j]
    }

    pub fn derivative(&self, j: usize, x: f64) -> f64 {
        let n = self.nodes.len();
        let mut s = 0.0;
        for r in 0..n {
            if r == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..n {
                if m != j && m != r {
                    p *= x - self.nodes[m];
                }
            }
            s += p;
        }
        s / self.denom[j]
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        (0..self.len()).map(|j| self.value(j, x)).collect()
    }

    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        (0..self.len()).map(|j| self.derivative(j, x)).collect()
    }

    /// Table `[point][j]` of basis values.
    pub fn value_table(&self, points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&x| self.values(x)).collect()
    }

    pub fn derivative_table(&self, points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&x| self.derivatives(x)).collect()
    }

    /// Evaluate the interpolant with nodal values `coeffs` at `x`.
    pub fn interpolate(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.value(j, x))
            .sum()
    }

    pub fn interpolate_derivative(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.derivative(j, x))
            .sum()
    }
}

/// Polynomial on `[-1, 1]` stored by Legendre coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendrePoly {
    pub coeffs: Vec<f64>,
}

impl LegendrePoly {
    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Value and reference derivative at `xi`.
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        // Clenshaw-free direct recurrence; degrees here are tiny.
        let mut v = 0.0;
        let mut d = 0.0;
        if self.coeffs.is_empty() {
            return (0.0, 0.0);
        }
        let (mut p0, mut p1) = (1.0, xi);
        let (mut d0, mut d1) = (0.0, 1.0);
        v += self.coeffs[0] * p0;
        d += self.coeffs[0] * d0;
        if self.coeffs.len() > 1 {
            v += self.coeffs[1] * p1;
            d += self.coeffs[1] * d1;
        }
        for k in 1..self.coeffs.len().saturating_sub(1) {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * xi * p1 - kf * p0) / (kf + 1.0);
            let d2 = d0 + (2.0 * kf + 1.0) * p1;
            v += self.coeffs[k + 1] * p2;
            d += self.coeffs[k + 1] * d2;
            p0 = p1;
            p1 = p2;
            d0 = d1;
            d1 = d2;
        }
        (v, d)
    }

    /// Coefficients of the degree-`q` polynomial interpolating `values` at
    /// the `q + 1` Gauss points of `rule` (exact via discrete orthogonality).
    pub fn from_gauss_values(values: &[f64], nodes: &[f64], weights: &[f64]) -> Self {
        let n = values.len();
        let coeffs = (0..n)
            .map(|m| {
                let s: f64 = (0..n)
                    .map(|k| weights[k] * values[k] * legendre(m, nodes[k]).0)
                    .sum();
                s * (2.0 * m as f64 + 1.0) / 2.0
            })
            .collect();
        Self { coeffs }
    }

    /// Antiderivative vanishing at `xi = -1`.
    pub fn antiderivative(&self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (m, &c) in self.coeffs.iter().enumerate() {
            if m == 0 {
                // int_{-1}^x P_0 = P_1 + P_0
                out[0] += c;
                out[1] += c;
            } else {
                let s = c / (2.0 * m as f64 + 1.0);
                out[m + 1] += s;
                out[m - 1] -= s;
            }
        }
        Self { coeffs: out }
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    pub fn add_constant(&mut self, c: f64) {
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
        self.coeffs[0] += c;
    }
}
