//! Dense N-way tensors and the mode-n algebra.
//!
//! Elements are stored with the **first index varying fastest** (the
//! column-major generalization). The mode-n unfolding puts the fiber
//! `(i_1, .., i_{n-1}, :, i_{n+1}, .., i_N)` at column
//! `sum_{k != n} i_k * J_k` with `J_k = prod_{m < k, m != n} I_m`,
//! so that `vec(S x_1 A1 .. x_N AN) = (AN ⊗ .. ⊗ A1) vec(S)`.

use crate::error::{Error, Result};

/// Maximum supported tensor order.
pub const MAX_ORDER: usize = 8;

/// Dense N-way array of f64 with a fixed first-index-fastest linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "tensor order must be in 1..={MAX_ORDER}, got {}",
                shape.len()
            )));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidArgument("zero extent in shape".into()));
        }
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match shape product {}",
                data.len(),
                expect
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let n: usize = shape.iter().product();
        Self::new(shape, vec![0.0; n])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Flat position of a multi-index under the first-fastest linearization.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let mut flat = 0;
        let mut stride = 1;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[k]);
            flat += i * stride;
            stride *= self.shape[k];
        }
        flat
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flat_index(idx);
        self.data[f] = v;
    }

    /// Vectorization: the flat data in linearization order.
    pub fn vectorize(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("subtraction of unequal shapes".into()));
        }
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Hadamard (elementwise) product.
    pub fn hadamard(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("hadamard of unequal shapes".into()));
        }
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Column strides `J_k` of the mode-`mode` unfolding and its column count.
    fn unfold_strides(&self, mode: usize) -> (Vec<usize>, usize) {
        let n = self.order();
        let mut jk = vec![0usize; n];
        let mut acc = 1usize;
        for (k, slot) in jk.iter_mut().enumerate() {
            if k == mode {
                continue;
            }
            *slot = acc;
            acc *= self.shape[k];
        }
        (jk, acc)
    }

    /// Mode-n unfolding: rows index mode `mode`, columns enumerate the
    /// remaining indices with the lower modes varying fastest.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        if mode >= self.order() {
            return Err(Error::InvalidMode {
                mode,
                order: self.order(),
            });
        }
        let (jk, ncols) = self.unfold_strides(mode);
        let nrows = self.shape[mode];
        let mut out = Matrix::zeros(nrows, ncols);
        let mut idx = vec![0usize; self.order()];
        for &v in &self.data {
            let mut col = 0;
            for (k, &i) in idx.iter().enumerate() {
                if k != mode {
                    col += i * jk[k];
                }
            }
            out.data[idx[mode] * ncols + col] = v;
            Self::advance(&mut idx, &self.shape);
        }
        Ok(out)
    }

    /// Inverse of [`DenseTensor::unfold`]: rebuilds the tensor of `shape`
    /// from its mode-n unfolding. Exact (bitwise) round trip.
    pub fn fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
        if mode >= shape.len() {
            return Err(Error::InvalidMode {
                mode,
                order: shape.len(),
            });
        }
        let mut t = DenseTensor::zeros(shape.to_vec())?;
        let expect_cols: usize = shape
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != mode)
            .map(|(_, &d)| d)
            .product();
        if m.rows != shape[mode] || m.cols != expect_cols {
            return Err(Error::ShapeMismatch(format!(
                "cannot fold {}x{} matrix into shape {:?} at mode {}",
                m.rows, m.cols, shape, mode
            )));
        }
        let (jk, ncols) = t.unfold_strides(mode);
        let mut idx = vec![0usize; shape.len()];
        for flat in 0..t.data.len() {
            let mut col = 0;
            for (k, &i) in idx.iter().enumerate() {
                if k != mode {
                    col += i * jk[k];
                }
            }
            t.data[flat] = m.data[idx[mode] * ncols + col];
            Self::advance(&mut idx, shape);
        }
        Ok(t)
    }

    /// Mode-n product: contracts mode `mode` with `m`, so that
    /// `unfold(result, mode) = m * unfold(self, mode)`.
    pub fn mode_product(&self, m: &Matrix, mode: usize) -> Result<DenseTensor> {
        if mode >= self.order() {
            return Err(Error::InvalidMode {
                mode,
                order: self.order(),
            });
        }
        if m.cols != self.shape[mode] {
            return Err(Error::ShapeMismatch(format!(
                "mode-{} product: matrix has {} cols, extent is {}",
                mode, m.cols, self.shape[mode]
            )));
        }
        let unfolded = self.unfold(mode)?;
        let product = m.matmul(&unfolded);
        let mut new_shape = self.shape.clone();
        new_shape[mode] = m.rows;
        Self::fold(&product, mode, &new_shape)
    }

    /// Odometer increment with the first index fastest.
    fn advance(idx: &mut [usize], shape: &[usize]) {
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                return;
            }
            idx[k] = 0;
        }
    }
}

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    /// Contiguous view of row `r`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = &self.data[i * self.cols..(i + 1) * self.cols];
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &bkj) in orow.iter_mut().zip(brow) {
                    *o += aik * bkj;
                }
            }
        }
        out
    }

    /// `self * other^T`, without materializing the transpose.
    pub fn matmul_transb(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.cols,
            "matmul_transb dimension mismatch {}x{} * ({}x{})^T",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let arow = self.row(i);
            for j in 0..other.rows {
                let brow = other.row(j);
                let mut s = 0.0;
                for (a, b) in arow.iter().zip(brow) {
                    s += a * b;
                }
                out.data[i * other.rows + j] = s;
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Hadamard (elementwise) product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("hadamard of unequal shapes".into()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Kronecker product: block (i, j) of the result is `self[i,j] * other`.
    pub fn kronecker(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(rows, cols);
        for ia in 0..self.rows {
            for ja in 0..self.cols {
                let a = self.data[ia * self.cols + ja];
                if a == 0.0 {
                    continue;
                }
                for ib in 0..other.rows {
                    for jb in 0..other.cols {
                        out.data[(ia * other.rows + ib) * cols + (ja * other.cols + jb)] =
                            a * other.data[ib * other.cols + jb];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
