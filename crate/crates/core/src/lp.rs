//! Dense linear programs small enough to solve by enumerating vertices.
//!
//! Used for the incentive LPs over value vectors `v ∈ [0, 1]^S`, where the
//! number of constraints is a small multiple of `|S| ≤ 8`.

use nalgebra::{DMatrix, DVector};

/// `A x ≤ b`, one row per constraint.
#[derive(Debug, Clone, Default)]
pub struct Polyhedron {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub point: Vec<f64>,
    pub objective: f64,
}

impl Polyhedron {
    pub fn new(dim: usize) -> Self {
        Self { rows: Vec::new(), rhs: Vec::new(), dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `row · x ≤ rhs`.
    pub fn le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.dim, "constraint has wrong dimension");
        self.rows.push(row);
        self.rhs.push(rhs);
        self
    }

    /// Adds `row · x ≥ rhs`.
    pub fn ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le(row.into_iter().map(|x| -x).collect(), -rhs)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.rows
            .iter()
            .zip(&self.rhs)
            .all(|(row, b)| dot(row, x) <= b + tol * (1.0 + b.abs()))
    }

    /// Minimises `objective · x` over the polyhedron by checking every basic
    /// solution. Returns `None` when no vertex is feasible. The caller is
    /// responsible for the problem being bounded and pointed.
    pub fn minimize(&self, objective: &[f64]) -> Option<Vertex> {
        assert_eq!(objective.len(), self.dim);
        let m = self.rows.len();
        let n = self.dim;
        if m < n {
            return None;
        }
        let mut best: Option<Vertex> = None;
        let mut subset: Vec<usize> = (0..n).collect();
        loop {
            if let Some(x) = self.basic_solution(&subset) {
                if self.contains(&x, 1e-10) {
                    let value = dot(objective, &x);
                    if best.as_ref().is_none_or(|b| value < b.objective) {
                        best = Some(Vertex { point: x, objective: value });
                    }
                }
            }
            if !next_combination(&mut subset, m) {
                break;
            }
        }
        best
    }

    pub fn maximize(&self, objective: &[f64]) -> Option<Vertex> {
        let neg: Vec<f64> = objective.iter().map(|x| -x).collect();
        self.minimize(&neg).map(|v| Vertex { objective: -v.objective, point: v.point })
    }

    fn basic_solution(&self, active: &[usize]) -> Option<Vec<f64>> {
        let n = self.dim;
        let a = DMatrix::from_fn(n, n, |i, j| self.rows[active[i]][j]);
        let b = DVector::from_iterator(n, active.iter().map(|&i| self.rhs[i]));
        let lu = a.lu();
        // reject (near-)singular active sets
        let det = lu.determinant();
        if !det.is_finite() || det.abs() < 1e-14 {
            return None;
        }
        lu.solve(&b).map(|x| x.iter().copied().collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Advances `c` to the next `k`-combination of `0..m` in lexicographic order.
fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < m - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
