//! Sparse Liouvillian in column-stacking vectorization,
//! vec(ρ)[i + j·d] = ρ_ij, so that vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::operators::Operator;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix, summing duplicate entries and dropping exact
    /// zeros.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            *rows[i].entry(j).or_default() += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != Complex64::new(0.0, 0.0) {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(j, _)| j == i).map_or(Complex64::new(0.0, 0.0), |(_, v)| v))
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Copy with row `r` replaced by the given entries.
    pub fn with_row(&self, r: usize, entries: &[(usize, Complex64)]) -> Self {
        let triplets = (0..self.n)
            .filter(|&i| i != r)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .chain(entries.iter().map(|&(j, v)| (r, j, v)));
        Self::from_triplets(self.n, triplets.collect::<Vec<_>>())
    }
}

fn nonzeros(op: &Operator) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for j in 0..op.ncols() {
        for i in 0..op.nrows() {
            let v = op[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Triplets of `scale · (B ⊗ A)`.
fn kron_triplets(b: &Operator, a: &Operator, scale: Complex64, out: &mut Vec<(usize, usize, Complex64)>) {
    let d = a.nrows();
    let na = nonzeros(a);
    for (bi, bj, bv) in nonzeros(b) {
        for &(ai, aj, av) in &na {
            out.push((bi * d + ai, bj * d + aj, scale * bv * av));
        }
    }
}

/// 𝓛ρ = −i[H, ρ] + Σ_k (c_k ρ c_k† − ½{c_k†c_k, ρ}).
pub fn liouvillian(h: &Operator, c_ops: &[Operator]) -> CsrMatrix {
    let d = h.nrows();
    let id = Operator::identity(d, d);
    let mut t = Vec::new();
    let minus_i = Complex64::new(0.0, -1.0);
    kron_triplets(&id, h, minus_i, &mut t);
    kron_triplets(&h.transpose(), &id, -minus_i, &mut t);
    let half = Complex64::new(-0.5, 0.0);
    for c in c_ops {
        let cdc = c.adjoint() * c;
        kron_triplets(&c.conjugate(), c, Complex64::new(1.0, 0.0), &mut t);
        kron_triplets(&id, &cdc, half, &mut t);
        kron_triplets(&cdc.transpose(), &id, half, &mut t);
    }
    CsrMatrix::from_triplets(d * d, t)
}

pub fn vectorize(rho: &Operator) -> Vec<Complex64> {
    // nalgebra storage is column-major, which is exactly column stacking.
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[Complex64], d: usize) -> Operator {
    Operator::from_column_slice(d, d, v)
}
