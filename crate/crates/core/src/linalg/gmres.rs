use super::{dot, norm2};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOutcome<T> {
    pub converged: bool,
    pub iterations: usize,
    /// True residual `||b - A x||_2` at exit.
    pub residual: T,
}

/// Restarted GMRES with right preconditioning.
///
/// `apply` computes `y = A x`, `precondition` overwrites its argument with
/// `M^{-1} v`. Iterates until `||b - A x||_2 <= tol` or `max_iter` inner
/// iterations have been spent. `x` holds the initial guess on entry.
pub fn gmres<T, A, P>(
    mut apply: A,
    mut precondition: P,
    b: &[T],
    x: &mut [T],
    tol: T,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome<T>
where
    T: Real,
    A: FnMut(&[T], &mut [T]),
    P: FnMut(&mut [T]),
{
    let n = b.len();
    let restart = restart.max(1);
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let residual_of = |apply: &mut A, x: &[T], r: &mut [T]| {
        apply(x, r);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        norm2(r)
    };

    let mut beta = residual_of(&mut apply, x, &mut r);
    let mut iterations = 0;
    while beta > tol && iterations < max_iter {
        let m = restart.min(max_iter - iterations);
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        let mut search: Vec<Vec<T>> = Vec::with_capacity(m);
        basis.push(r.iter().map(|&v| v / beta).collect());
        let mut hess = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m {
            let mut z = basis[k].clone();
            precondition(&mut z);
            apply(&z, &mut w);
            search.push(z);
            for (i, v) in basis.iter().enumerate() {
                let h = dot(&w, v);
                hess[i][k] = h;
                for (wj, &vj) in w.iter_mut().zip(v) {
                    *wj -= h * vj;
                }
            }
            let h_next = norm2(&w);
            hess[k + 1][k] = h_next;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == T::zero() {
                k += 1;
                iterations += 1;
                break;
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k += 1;
            iterations += 1;
            if g[k].abs() <= tol * T::lit(0.5) || h_next == T::zero() {
                break;
            }
            basis.push(w.iter().map(|&v| v / h_next).collect());
        }

        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= hess[i][j] * y[j];
            }
            y[i] = if hess[i][i] == T::zero() { T::zero() } else { s / hess[i][i] };
        }
        for (yj, zj) in y.iter().zip(&search) {
            for (xi, &zi) in x.iter_mut().zip(zj) {
                *xi += *yj * zi;
            }
        }
        let previous = beta;
        beta = residual_of(&mut apply, x, &mut r);
        if !beta.is_finite() || (k == 0 && beta >= previous) {
            break;
        }
    }
    GmresOutcome {
        converged: beta <= tol,
        iterations,
        residual: beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CooBuilder;

    #[test]
    fn unpreconditioned_nonsymmetric_system() {
        let n = 20;
        let mut b = CooBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 4.0);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -2.0);
            }
        }
        let a = b.finalize().unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let out = gmres(|v, y| a.mul_vec_into(v, y), |_| {}, &rhs, &mut x, 1e-12, 8, 200);
        assert!(out.converged, "{out:?}");
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&rhs).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-12);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_iteration() {
        let diag = [2.0f64, 5.0, -3.0];
        let rhs = [1.0f64, 1.0, 1.0];
        let mut x = [0.0; 3];
        let out = gmres(
            |v, y| y.iter_mut().zip(v).zip(diag).for_each(|((yi, vi), d)| *yi = d * vi),
            |v| v.iter_mut().zip(diag).for_each(|(vi, d)| *vi /= d),
            &rhs,
            &mut x,
            1e-14,
            5,
            5,
        );
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
    }
}
