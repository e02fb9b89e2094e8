use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::{ColMut, Conj, Par, Side};

use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::Real;

/// Sparse `L D L^T` without pivoting, AMD ordered, backed by `faer`.
///
/// Stable for symmetric quasi-definite matrices `[[A, B^T], [B, -C]]` with
/// `A` and `C` positive definite, in any symmetric ordering. Only the lower
/// triangle of the input is read.
pub struct SparseLdlt<T: Real> {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseLdlt<T> {
    pub fn new(a: &SparseMatrix<T>) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "LDLT needs a square matrix, got {}x{}",
                n,
                a.n_cols()
            )));
        }
        // CSR of a symmetric matrix is its own CSC.
        let view = SymbolicSparseColMatRef::new_checked(n, n, a.row_offsets(), None, a.col_indices());
        let symbolic = factorize_symbolic_cholesky(view, Side::Lower, SymmetricOrdering::Amd, Default::default())
            .map_err(|_| Error::StructurallySingular)?;
        let mut values = vec![T::zero(); symbolic.len_val()];
        let par = Par::Seq;
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_ldlt_scratch::<T>(par, Default::default()));
        symbolic
            .factorize_numeric_ldlt(
                &mut values,
                SparseColMatRef::new(view, a.values()),
                Side::Lower,
                LdltRegularization::default(),
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|_| Error::StructurallySingular)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::StructurallySingular);
        }
        Ok(Self { symbolic, values })
    }

    pub fn n(&self) -> usize {
        self.symbolic.nrows()
    }

    /// Number of stored factor entries.
    pub fn factor_len(&self) -> usize {
        self.values.len()
    }

    /// Overwrites `x` with `A^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let par = Par::Seq;
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<T>(1, par));
        let col = ColMut::from_slice_mut(x);
        LdltRef::new(&self.symbolic, &self.values).solve_in_place_with_conj(
            Conj::No,
            col.as_mat_mut(),
            par,
            MemStack::new(&mut mem),
        );
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::linalg::{norm2, CooBuilder};

    #[test]
    fn quasi_definite_saddle_point() {
        // [[A, B^T], [B, -C]] with A, C diagonal-dominant SPD and random B.
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let (na, nc) = (40, 15);
        let n = na + nc;
        let mut coo = CooBuilder::new(n, n);
        for i in 0..na {
            coo.push(i, i, 4.0);
            if i + 1 < na {
                coo.push(i, i + 1, -1.0);
                coo.push(i + 1, i, -1.0);
            }
        }
        for i in 0..nc {
            coo.push(na + i, na + i, -0.5);
            for _ in 0..3 {
                let j = rng.random_range(0..na);
                let v = rng.random_range(-1.0..1.0);
                coo.push(na + i, j, v);
                coo.push(j, na + i, v);
            }
        }
        let a = coo.finalize().unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let f = SparseLdlt::new(&a).unwrap();
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-12, "{}", norm2(&r));
    }
}
