//! Uniform interval meshes and Cartesian tensor meshes.
//!
//! Both mesh types support a periodic mode (the torus) and a boundary mode
//! where the outermost edges carry a homogeneous Dirichlet ghost state.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// An interface between two cells. `left`/`right` are `None` on a physical
/// boundary in Dirichlet mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge1D {
    pub x: f64,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    boundary: Boundary,
    edges: Vec<Edge1D>,
}

impl Mesh1D {
    /// Uniform partition of `[a, b]` into `n_cells` intervals.
    pub fn uniform(a: f64, b: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        if !(a.is_finite() && b.is_finite()) || b - a <= 0.0 {
            return Err(Error::InvalidMesh(format!("degenerate interval [{a}, {b}]")));
        }
        let h = (b - a) / n_cells as f64;
        let nodes: Vec<f64> = (0..=n_cells)
            .map(|i| if i == n_cells { b } else { a + h * i as f64 })
            .collect();
        Self::from_nodes(nodes, boundary)
    }

    pub fn from_nodes(nodes: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidMesh("need at least 2 cells".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMesh("nodes must be strictly increasing".into()));
        }
        let n = nodes.len() - 1;
        let edges = match boundary {
            Boundary::Periodic => (0..n)
                .map(|e| Edge1D {
                    x: nodes[e],
                    left: Some((e + n - 1) % n),
                    right: Some(e),
                })
                .collect(),
            Boundary::Dirichlet => (0..=n)
                .map(|e| Edge1D {
                    x: nodes[e],
                    left: e.checked_sub(1),
                    right: (e < n).then_some(e),
                })
                .collect(),
        };
        Ok(Self {
            nodes,
            boundary,
            edges,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn edges(&self) -> &[Edge1D] {
        &self.edges
    }

    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.nodes[k], self.nodes[k + 1])
    }

    pub fn width(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// Index of the edge on the left (`side = 0`) or right (`side = 1`) of cell `k`.
    pub fn cell_edge(&self, k: usize, side: usize) -> usize {
        match (self.boundary, side) {
            (_, 0) => k,
            (Boundary::Periodic, _) => (k + 1) % self.n_cells(),
            (Boundary::Dirichlet, _) => k + 1,
        }
    }

    /// Neighbouring cell across the left (`side = 0`) or right (`side = 1`) edge.
    pub fn neighbor(&self, k: usize, side: usize) -> Option<usize> {
        let e = &self.edges[self.cell_edge(k, side)];
        if side == 0 {
            e.left
        } else {
            e.right
        }
    }

    /// Map reference coordinate in `[-1, 1]` to cell `k`.
    pub fn map(&self, k: usize, xi: f64) -> f64 {
        let (a, b) = self.cell(k);
        0.5 * (a + b) + 0.5 * (b - a) * xi
    }

    /// Locate the cell containing `x` together with its reference coordinate.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let (a, b) = self.domain();
        if x < a || x > b {
            return None;
        }
        let k = match self
            .nodes
            .binary_search_by(|n| n.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.n_cells() - 1),
            Err(i) => i - 1,
        };
        let (c0, c1) = self.cell(k);
        Some((k, (2.0 * x - c0 - c1) / (c1 - c0)))
    }
}

/// Vertical (normal `e_1`) or horizontal (normal `e_2`) edge of a Cartesian mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge2D {
    /// Cell on the `-e_alpha` side.
    pub minus: Option<usize>,
    /// Cell on the `+e_alpha` side.
    pub plus: Option<usize>,
    /// Line index (`i` for vertical edges at `x_i`, `j` for horizontal edges at `y_j`).
    pub line: usize,
    /// Index of the segment along the line (row `j` or column `i`).
    pub segment: usize,
}

/// Tensor mesh `[x_i, x_{i+1}] x [y_j, y_{j+1}]`, cells ordered with `i` fastest.
#[derive(Clone, Debug)]
pub struct Mesh2D {
    x: Mesh1D,
    y: Mesh1D,
    vertical: Vec<Edge2D>,
    horizontal: Vec<Edge2D>,
}

impl Mesh2D {
    pub fn uniform(
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
        nx: usize,
        ny: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        let x = Mesh1D::uniform(x0, x1, nx, boundary)?;
        let y = Mesh1D::uniform(y0, y1, ny, boundary)?;
        Ok(Self::from_axes(x, y))
    }

    pub fn from_axes(x: Mesh1D, y: Mesh1D) -> Self {
        let nx = x.n_cells();
        let ny = y.n_cells();
        let mut vertical = Vec::new();
        for j in 0..ny {
            for e in x.edges() {
                let line = x.nodes().iter().position(|&n| n == e.x).unwrap();
                vertical.push(Edge2D {
                    minus: e.left.map(|i| i + nx * j),
                    plus: e.right.map(|i| i + nx * j),
                    line,
                    segment: j,
                });
            }
        }
        let mut horizontal = Vec::new();
        for e in y.edges() {
            let line = y.nodes().iter().position(|&n| n == e.x).unwrap();
            for i in 0..nx {
                horizontal.push(Edge2D {
                    minus: e.left.map(|j| i + nx * j),
                    plus: e.right.map(|j| i + nx * j),
                    line,
                    segment: i,
                });
            }
        }
        Self {
            x,
            y,
            vertical,
            horizontal,
        }
    }

    pub fn x_axis(&self) -> &Mesh1D {
        &self.x
    }

    pub fn y_axis(&self) -> &Mesh1D {
        &self.y
    }

    pub fn nx(&self) -> usize {
        self.x.n_cells()
    }

    pub fn ny(&self) -> usize {
        self.y.n_cells()
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn boundary(&self) -> Boundary {
        self.x.boundary()
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }

    pub fn cell_ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx(), k / self.nx())
    }

    pub fn cell_size(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.cell_ij(k);
        (self.x.width(i), self.y.width(j))
    }

    pub fn area(&self, k: usize) -> f64 {
        let (hx, hy) = self.cell_size(k);
        hx * hy
    }

    pub fn measure(&self) -> f64 {
        self.x.length() * self.y.length()
    }

    pub fn vertical_edges(&self) -> &[Edge2D] {
        &self.vertical
    }

    pub fn horizontal_edges(&self) -> &[Edge2D] {
        &self.horizontal
    }

    /// Neighbour of cell `k` in direction `dir` (0 = x, 1 = y) on side `side`
    /// (0 = minus, 1 = plus).
    pub fn neighbor(&self, k: usize, dir: usize, side: usize) -> Option<usize> {
        let (i, j) = self.cell_ij(k);
        match dir {
            0 => self.x.neighbor(i, side).map(|i2| self.cell_index(i2, j)),
            _ => self.y.neighbor(j, side).map(|j2| self.cell_index(i, j2)),
        }
    }

    /// Index of the edge normal to `dir` on side `side` of cell `k`, within
    /// [`Self::vertical_edges`] (`dir = 0`) or [`Self::horizontal_edges`].
    pub fn cell_edge(&self, k: usize, dir: usize, side: usize) -> usize {
        let (i, j) = self.cell_ij(k);
        if dir == 0 {
            j * self.x.edges().len() + self.x.cell_edge(i, side)
        } else {
            self.y.cell_edge(j, side) * self.nx() + i
        }
    }

    pub fn map(&self, k: usize, xi: f64, eta: f64) -> (f64, f64) {
        let (i, j) = self.cell_ij(k);
        (self.x.map(i, xi), self.y.map(j, eta))
    }

    pub fn center(&self, k: usize) -> (f64, f64) {
        self.map(k, 0.0, 0.0)
    }

    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, f64, f64)> {
        let (i, xi) = self.x.locate(x)?;
        let (j, eta) = self.y.locate(y)?;
        Some((self.cell_index(i, j), xi, eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn test1_mesh_has_width_pi_over_500() {
        let m = Mesh1D::uniform(-PI, PI, 1000, Boundary::Periodic).unwrap();
        assert_eq!(m.n_cells(), 1000);
        for w in m.widths() {
            assert!((w - PI / 500.0).abs() < 1e-13);
        }
    }

    #[test]
    fn smallest_periodic_mesh() {
        let m = Mesh1D::uniform(0.0, 1.0, 2, Boundary::Periodic).unwrap();
        assert_eq!(m.cell(0), (0.0, 0.5));
        assert_eq!(m.cell(1), (0.5, 1.0));
        assert_eq!(m.edges().len(), 2);
    }

    #[test]
    fn boundary_mode_counts_edges() {
        let m = Mesh1D::uniform(-1.0, 1.0, 4, Boundary::Dirichlet).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.edges().len(), 5);
        assert_eq!(m.edges()[0].left, None);
        assert_eq!(m.edges()[4].right, None);
        assert_eq!(m.neighbor(0, 0), None);
        assert_eq!(m.neighbor(3, 1), None);
    }

    #[test]
    fn invalid_meshes() {
        assert!(matches!(
            Mesh1D::uniform(0.0, 1.0, 1, Boundary::Periodic),
            Err(Error::InvalidMesh(_))
        ));
        assert!(Mesh1D::uniform(1.0, 1.0, 4, Boundary::Periodic).is_err());
        assert!(Mesh2D::uniform((0.0, 1.0), (2.0, 2.0), 4, 4, Boundary::Periodic).is_err());
        assert!(Mesh1D::from_nodes(vec![0.0, 0.5, 0.5, 1.0], Boundary::Periodic).is_err());
    }

    #[test]
    fn periodic_2d_counts() {
        let m = Mesh2D::uniform((-1.0, 1.0), (-1.0, 1.0), 4, 4, Boundary::Periodic).unwrap();
        assert_eq!(m.n_cells(), 16);
        assert_eq!(m.vertical_edges().len(), 16);
        assert_eq!(m.horizontal_edges().len(), 16);
        for e in m.vertical_edges().iter().chain(m.horizontal_edges()) {
            assert!(e.minus.is_some() && e.plus.is_some());
        }
    }

    #[test]
    fn test2_mesh_width_close_to_reference() {
        let m = Mesh2D::uniform((-1.0, 1.0), (-1.0, 1.0), 70, 70, Boundary::Periodic).unwrap();
        let target = 2f64.sqrt() / 50.0;
        let (hx, hy) = m.cell_size(0);
        assert!(((hx - target) / target).abs() < 0.03);
        assert!(((hy - target) / target).abs() < 0.03);
    }

    #[test]
    fn anisotropic_cells() {
        let m = Mesh2D::uniform((0.0, 2.0), (0.0, 1.0), 2, 2, Boundary::Periodic).unwrap();
        for k in 0..4 {
            assert_eq!(m.cell_size(k), (1.0, 0.5));
        }
    }

    #[test]
    fn measures_sum_to_domain() {
        let m = Mesh1D::uniform(-PI, PI, 997, Boundary::Dirichlet).unwrap();
        let s: f64 = m.widths().iter().sum();
        assert!(((s - 2.0 * PI) / (2.0 * PI)).abs() < 1e-13);
        let m2 = Mesh2D::uniform((-1.0, 3.0), (0.0, 0.7), 13, 29, Boundary::Periodic).unwrap();
        let a: f64 = (0..m2.n_cells()).map(|k| m2.area(k)).sum();
        assert!(((a - m2.measure()) / m2.measure()).abs() < 1e-13);
    }

    #[test]
    fn neighbor_is_involution_when_periodic() {
        let m = Mesh1D::uniform(0.0, 1.0, 7, Boundary::Periodic).unwrap();
        for k in 0..7 {
            for side in 0..2 {
                let n = m.neighbor(k, side).unwrap();
                assert_eq!(m.neighbor(n, 1 - side), Some(k));
            }
        }
        let m2 = Mesh2D::uniform((0.0, 1.0), (0.0, 1.0), 5, 3, Boundary::Periodic).unwrap();
        for k in 0..m2.n_cells() {
            for dir in 0..2 {
                for side in 0..2 {
                    let n = m2.neighbor(k, dir, side).unwrap();
                    assert_eq!(m2.neighbor(n, dir, 1 - side), Some(k));
                }
            }
        }
    }

    #[test]
    fn locate_round_trips() {
        let m = Mesh1D::uniform(-1.0, 2.0, 9, Boundary::Periodic).unwrap();
        for &x in &[-1.0, -0.3, 0.0, 1.99, 2.0] {
            let (k, xi) = m.locate(x).unwrap();
            assert!((m.map(k, xi) - x).abs() < 1e-14);
            assert!((-1.0..=1.0).contains(&xi));
        }
    }
}
