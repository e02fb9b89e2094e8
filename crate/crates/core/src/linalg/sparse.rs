use crate::error::{Error, Result};
use crate::Real;

/// Triplet accumulator; duplicates are summed by [`CooBuilder::finalize`].
#[derive(Clone, Debug)]
pub struct CooBuilder<T> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> CooBuilder<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, capacity: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends a triplet. Range is checked by [`CooBuilder::finalize`].
    pub fn push(&mut self, row: usize, col: usize, value: T) {
        self.entries.push((row, col, value));
    }

    /// Appends a triplet, rejecting it immediately if out of range.
    pub fn try_push(&mut self, row: usize, col: usize, value: T) -> Result<()> {
        self.check(row, col)?;
        self.entries.push((row, col, value));
        Ok(())
    }

    fn check(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        Ok(())
    }

    /// Sums duplicates and produces sorted compressed-row storage.
    pub fn finalize(self) -> Result<SparseMatrix<T>> {
        for &(r, c, _) in &self.entries {
            self.check(r, c)?;
        }
        let mut counts = vec![0usize; self.n_rows + 1];
        for &(r, _, _) in &self.entries {
            counts[r + 1] += 1;
        }
        for i in 0..self.n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut bucketed = vec![(0usize, T::zero()); self.entries.len()];
        for &(r, c, v) in &self.entries {
            bucketed[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::with_capacity(bucketed.len());
        let mut values = Vec::with_capacity(bucketed.len());
        row_offsets.push(0);
        for r in 0..self.n_rows {
            let row = &mut bucketed[counts[r]..counts[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if col_indices.len() > row_offsets[r] && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }
}

/// Real sparse matrix in compressed-row storage with sorted, unique columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds a matrix from a sparsity pattern with all stored values zero.
    ///
    /// `rows[i]` lists the (strictly increasing) columns stored in row `i`.
    pub fn from_pattern(n_cols: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for (i, cols) in rows.iter().enumerate() {
            for (k, &c) in cols.iter().enumerate() {
                if c >= n_cols || (k > 0 && cols[k - 1] >= c) {
                    return Err(Error::IndexOutOfRange {
                        row: i,
                        col: c,
                        n_rows: rows.len(),
                        n_cols,
                    });
                }
            }
            col_indices.extend_from_slice(cols);
            row_offsets.push(col_indices.len());
        }
        let nnz = col_indices.len();
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            row_offsets,
            col_indices,
            values: vec![T::zero(); nnz],
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Iterates `(col, value)` over the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Storage index of entry `(i, j)`, if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_offsets[i];
        let cols = &self.col_indices[start..self.row_offsets[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.position(i, j).map_or(T::zero(), |p| self.values[p])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yi = acc;
        }
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[T], x: &[T]) -> T {
        let ax = self.mul_vec(x);
        super::dot(y, &ax)
    }

    pub fn transpose(&self) -> Self {
        let mut b = CooBuilder::with_capacity(self.n_cols, self.n_rows, self.nnz());
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                b.push(j, i, v);
            }
        }
        b.finalize().expect("transpose indices in range")
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.n_rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Largest `|A_ij - A_ji|` over the stored entries.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        super::norm_inf(&self.values)
    }
}
