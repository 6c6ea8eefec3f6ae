//! Dense complex matrices and the linear-algebra kernels used by the
//! diagram semantics: multiplication, Kronecker products, adjoints,
//! traces and partial traces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite entry at ({0},{1})")]
    NonFinite(usize, usize),
}

pub type MatrixResult<T> = Result<T, MatrixError>;

/// Dense rectangular complex matrix, row-major storage.
///
/// A morphism between spaces of dimension `m` and `n` is stored as an
/// `n × m` matrix acting on column vectors.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                let z = self.get(r, c);
                write!(f, "{:+.3}{:+.3}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> MatrixResult<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::ShapeMismatch("ragged row lengths".into()));
        }
        Ok(ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Real matrix literal, mostly for tests and generator tables.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn check_finite(&self) -> MatrixResult<()> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let z = self.get(r, c);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(MatrixError::NonFinite(r, c));
                }
            }
        }
        Ok(())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> MatrixResult<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(MatrixError::ShapeMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; the left factor owns the major index, so
    /// basis vector `|i⟩ ⊗ |j⟩` sits at position `i * other.dim + j`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).conj())
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| s * self.get(r, c))
    }

    pub fn add(&self, other: &ComplexMatrix) -> MatrixResult<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::ShapeMismatch(format!(
                "add {}x{} to {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c) + other.get(r, c)
        }))
    }

    pub fn sub(&self, other: &ComplexMatrix) -> MatrixResult<ComplexMatrix> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn trace(&self) -> MatrixResult<Complex64> {
        if !self.is_square() {
            return Err(MatrixError::ShapeMismatch(format!(
                "trace of {}x{}",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// Trace out tensor factor `which` of a square matrix on the space
    /// `dims[0] ⊗ dims[1] ⊗ …` (major index first, matching [`kron`]).
    ///
    /// [`kron`]: ComplexMatrix::kron
    pub fn partial_trace(&self, dims: &[usize], which: usize) -> MatrixResult<ComplexMatrix> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total {
            return Err(MatrixError::ShapeMismatch(format!(
                "partial trace of {}x{} over factors {:?}",
                self.rows, self.cols, dims
            )));
        }
        if which >= dims.len() {
            return Err(MatrixError::ShapeMismatch(format!(
                "factor index {} out of range for {:?}",
                which, dims
            )));
        }
        let d_w = dims[which];
        let left: usize = dims[..which].iter().product();
        let right: usize = dims[which + 1..].iter().product();
        let mut out = ComplexMatrix::zeros(left * right, left * right);
        for a in 0..left {
            for b in 0..right {
                for a2 in 0..left {
                    for b2 in 0..right {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..d_w {
                            let row = (a * d_w + k) * right + b;
                            let col = (a2 * d_w + k) * right + b2;
                            acc += self.get(row, col);
                        }
                        out.set(a * right + b, a2 * right + b2, acc);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise absolute value.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-norm distance; the residual used by every
    /// structural identity check.
    pub fn max_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.rows, other.rows, "max_diff shape");
        assert_eq!(self.cols, other.cols, "max_diff shape");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_diff(other) <= tol
    }

    /// Column vector carrying the matrix entries row by row; the name
    /// of the map in the cup/cap convention fixed by [`crate::cpm`].
    pub fn vectorize(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows * self.cols,
            cols: 1,
            data: self.data.clone(),
        }
    }

    /// Inverse of [`vectorize`]: reshape a column of length `rows*cols`.
    ///
    /// [`vectorize`]: ComplexMatrix::vectorize
    pub fn unvectorize(v: &ComplexMatrix, rows: usize, cols: usize) -> MatrixResult<ComplexMatrix> {
        if v.cols != 1 || v.rows != rows * cols {
            return Err(MatrixError::ShapeMismatch(format!(
                "unvectorize {}x{} into {}x{}",
                v.rows, v.cols, rows, cols
            )));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            data: v.data.clone(),
        })
    }
}

/// JSON wire format: `{"rows":r,"cols":c,"data":[[re,im],…]}` row-major.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let repr = MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(de)?;
        if repr.data.len() != repr.rows * repr.cols {
            return Err(serde::de::Error::custom(format!(
                "matrix data length {} does not match {}x{}",
                repr.data.len(),
                repr.rows,
                repr.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: repr.rows,
            cols: repr.cols,
            data: repr
                .data
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_of_identity_is_dimension() {
        for n in 1..6 {
            assert_eq!(
                ComplexMatrix::identity(n).trace().unwrap(),
                c(n as f64, 0.0)
            );
        }
    }

    #[test]
    fn adjoint_is_involutive() {
        let m = ComplexMatrix::from_fn(3, 2, |r, cc| c(r as f64, cc as f64 + 1.0));
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn kron_respects_shapes_and_entries() {
        let a = ComplexMatrix::from_real(&[&[1.0, 2.0]]);
        let b = ComplexMatrix::from_real(&[&[0.0], &[3.0]]);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (2, 2));
        assert_eq!(k.get(1, 0), c(3.0, 0.0));
        assert_eq!(k.get(1, 1), c(6.0, 0.0));
    }

    #[test]
    fn mixed_product_identity() {
        // (A⊗B)(C⊗D) = AC ⊗ BD on small random-ish integers.
        let a = ComplexMatrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 1.0]]);
        let cmat = ComplexMatrix::from_real(&[&[2.0, 0.0], &[1.0, 1.0]]);
        let d = ComplexMatrix::from_real(&[&[1.0, 1.0], &[0.0, 2.0]]);
        let lhs = a.kron(&b).matmul(&cmat.kron(&d)).unwrap();
        let rhs = a.matmul(&cmat).unwrap().kron(&b.matmul(&d).unwrap());
        assert!(lhs.approx_eq(&rhs, 0.0));
    }

    #[test]
    fn partial_trace_contracts_one_factor() {
        // Σ_i |ii⟩⟨ii| on C²⊗C², traced over the first factor, is 1₂.
        let mut m = ComplexMatrix::zeros(4, 4);
        m.set(0, 0, c(1.0, 0.0));
        m.set(3, 3, c(1.0, 0.0));
        let t0 = m.partial_trace(&[2, 2], 0).unwrap();
        assert!(t0.approx_eq(&ComplexMatrix::identity(2), 0.0));
        let t1 = m.partial_trace(&[2, 2], 1).unwrap();
        assert!(t1.approx_eq(&ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn partial_trace_shape_errors() {
        let m = ComplexMatrix::identity(6);
        assert!(m.partial_trace(&[2, 2], 0).is_err());
        assert!(m.partial_trace(&[2, 3], 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::from_fn(2, 3, |r, cc| c(r as f64 / 3.0, cc as f64 * 0.1));
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"rows\":2"));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert!(m.approx_eq(&back, 0.0));
    }

    #[test]
    fn json_rejects_bad_length() {
        let bad = r#"{"rows":2,"cols":2,"data":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
