//! Dense row-major `f32` matrices and the distance kernels shared by every
//! clustering backend.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// A dense row-major matrix of 32-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    /// Wraps `data` as a `rows × cols` matrix.
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if cols == 0 {
            return Err(invalid!("matrix must have at least one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Number of rows.
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Iterator over rows.
    pub fn iter_rows(&self) -> core::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.cols)
    }

    /// The backing buffer.
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Consumes the matrix, returning its buffer.
    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    /// A new matrix holding the selected rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f32) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// First non-finite entry as `(row, col)`, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.cols, p % self.cols))
    }

    /// Largest per-column range `max - min`.
    pub fn max_feature_range(&self) -> f64 {
        self.column_ranges().into_iter().fold(0.0, f64::max)
    }

    /// Length of the bounding-box diagonal; an upper bound on any pairwise
    /// distance.
    pub fn bounding_diagonal(&self) -> f64 {
        let s: f64 = self.column_ranges().into_iter().map(|r| r * r).sum();
        num_traits::Float::sqrt(s)
    }

    fn column_ranges(&self) -> Vec<f64> {
        if self.rows == 0 {
            return alloc::vec![0.0; self.cols];
        }
        let mut lo = self.row(0).to_vec();
        let mut hi = lo.clone();
        for r in self.iter_rows() {
            for ((l, h), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(r) {
                if v < *l {
                    *l = v;
                }
                if v > *h {
                    *h = v;
                }
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(&l, &h)| h as f64 - l as f64)
            .collect()
    }

    /// Column means in `f64`.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sum = alloc::vec![0.0f64; self.cols];
        for r in self.iter_rows() {
            for (s, &v) in sum.iter_mut().zip(r) {
                *s += v as f64;
            }
        }
        let n = self.rows.max(1) as f64;
        sum.iter_mut().for_each(|s| *s /= n);
        sum
    }
}

const LANES: usize = 8;

/// Squared Euclidean distance accumulated in `f32` over eight lanes.
///
/// The reduction order is fixed, so results are bit-reproducible.
#[inline]
pub fn sq_euclidean(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Squared Euclidean distance between two `f32` rows, accumulated in `f64`.
#[inline]
pub fn sq_euclidean_f64(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let d = x[l] as f64 - y[l] as f64;
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0f64;
    for (x, y) in ra.iter().zip(rb) {
        let d = *x as f64 - *y as f64;
        tail += d * d;
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// Squared Euclidean distance between an `f32` row and an `f64` point.
#[inline]
pub fn sq_euclidean_mixed(a: &[f32], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y;
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_agree_on_small_rows() {
        let a: Vec<f32> = (0..19).map(|i| i as f32 * 0.5).collect();
        let b: Vec<f32> = (0..19).map(|i| (i as f32).sin()).collect();
        let exact: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
            .sum();
        assert!((sq_euclidean(&a, &b) as f64 - exact).abs() < 1e-4 * exact);
        assert!((sq_euclidean_f64(&a, &b) - exact).abs() < 1e-12 * exact);
        let b64: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        assert!((sq_euclidean_mixed(&a, &b64) - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn shape_checks() {
        assert!(Matrix::new(2, 3, alloc::vec![0.0; 5]).is_err());
        assert!(Matrix::new(0, 0, Vec::new()).is_err());
        let m = Matrix::from_rows(&[[1.0f32, 2.0], [3.0, -1.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, -1.0]);
        assert_eq!(m.max_feature_range(), 3.0);
        assert!(Matrix::from_rows(&[alloc::vec![1.0f32], alloc::vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn finds_first_non_finite() {
        let mut data = alloc::vec![0.0f32; 12];
        data[7] = f32::NAN;
        let m = Matrix::new(4, 3, data).unwrap();
        assert_eq!(m.first_non_finite(), Some((2, 1)));
    }
}
