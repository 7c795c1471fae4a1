/// Shape of a nodal dG field: `cells` cells carrying `(q + 1)^dim` Gauss
/// nodes each, `n_comp` components per node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldShape {
    pub dim: usize,
    pub cells: usize,
    pub degree: usize,
    pub n_comp: usize,
}

impl FieldShape {
    pub fn nodes_per_cell(&self) -> usize {
        (self.degree + 1).pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.cells * self.nodes_per_cell() * self.n_comp
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Piecewise polynomial field stored by nodal values at mapped Gauss points.
///
/// Layout is `[cell][node][component]`; in 2D the node index is
/// `k + (q + 1) * l` with `k` along `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct DgField {
    shape: FieldShape,
    values: Vec<f64>,
}

impl DgField {
    pub fn zeros(shape: FieldShape) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    pub fn from_values(shape: FieldShape, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), shape.len(), "value count does not match shape");
        Self { shape, values }
    }

    pub fn shape(&self) -> FieldShape {
        self.shape
    }

    pub fn degree(&self) -> usize {
        self.shape.degree
    }

    pub fn n_cells(&self) -> usize {
        self.shape.cells
    }

    pub fn n_comp(&self) -> usize {
        self.shape.n_comp
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.shape.nodes_per_cell()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// All values of cell `k` (nodes x components).
    pub fn cell(&self, k: usize) -> &[f64] {
        let n = self.nodes_per_cell() * self.n_comp();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn cell_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.nodes_per_cell() * self.n_comp();
        &mut self.values[k * n..(k + 1) * n]
    }

    pub fn get(&self, cell: usize, node: usize, comp: usize) -> f64 {
        self.values[(cell * self.nodes_per_cell() + node) * self.n_comp() + comp]
    }

    pub fn set(&mut self, cell: usize, node: usize, comp: usize, v: f64) {
        let i = (cell * self.nodes_per_cell() + node) * self.n_comp() + comp;
        self.values[i] = v;
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &DgField) -> DgField {
        assert_eq!(self.shape, other.shape);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        DgField {
            shape: self.shape,
            values,
        }
    }

    pub fn scaled(&self, a: f64) -> DgField {
        DgField {
            shape: self.shape,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
