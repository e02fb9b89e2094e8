use std::fmt;
use std::sync::Arc;

use super::ExactSolution;
use crate::fem::{norms, pressure_h_seminorm, FeFunction};
use crate::mesh::TriMesh;
use crate::scheme::StateTriple;
use crate::tensor::Sym2;
use crate::Real;

/// The six relative errors against the nodal interpolant of the exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RelativeErrors<T> {
    /// Velocity, `ℓ∞(L²)`.
    pub er1: T,
    /// Velocity, `ℓ²(H¹)`.
    pub er2: T,
    /// Pressure, `ℓ²(L²)`.
    pub er3: T,
    /// Pressure, `ℓ²(|·|_h)` over `ℓ²(L²)` of the interpolant.
    pub er4: T,
    /// Conformation, `ℓ∞(L²)`.
    pub er5: T,
    /// Conformation, `ℓ²(H¹)`.
    pub er6: T,
}

impl<T: Copy> RelativeErrors<T> {
    pub fn to_array(&self) -> [T; 6] {
        [self.er1, self.er2, self.er3, self.er4, self.er5, self.er6]
    }
}

impl<T: fmt::LowerExp> fmt::Display for RelativeErrors<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Er1={:.3e} Er2={:.3e} Er3={:.3e} Er4={:.3e} Er5={:.3e} Er6={:.3e}",
            self.er1, self.er2, self.er3, self.er4, self.er5, self.er6
        )
    }
}

/// Nodal interpolant of the exact solution at time `t`.
pub fn interpolate_exact<T: Real>(exact: &ExactSolution, mesh: &Arc<TriMesh<T>>, t: T) -> StateTriple<T> {
    let tf = t.to_f64_lossy();
    let xf = |x: [T; 2]| [x[0].to_f64_lossy(), x[1].to_f64_lossy()];
    StateTriple {
        u: FeFunction::interpolate_vector(mesh.clone(), |x| exact.velocity(xf(x), tf).map(T::lit)),
        p: FeFunction::interpolate_scalar(mesh.clone(), |x| T::lit(exact.pressure(xf(x), tf))),
        c: FeFunction::interpolate_tensor(mesh.clone(), |x| {
            let c = exact.conformation(xf(x), tf);
            Sym2::new(T::lit(c.xx), T::lit(c.xy), T::lit(c.yy))
        }),
        t,
    }
}

/// Streams time levels `n = 0..N_T` into the error norms.
///
/// Maxima include `n = 0`; the `ℓ²` sums start at `n = 1` and carry the factor `dt`.
#[derive(Clone, Debug)]
pub struct ErrorAccumulator<'a, T> {
    exact: &'a ExactSolution,
    dt: T,
    u_l2: [T; 2],
    u_h1: [T; 2],
    p_l2: [T; 2],
    p_h: T,
    c_l2: [T; 2],
    c_h1: [T; 2],
}

impl<'a, T: Real> ErrorAccumulator<'a, T> {
    pub fn new(exact: &'a ExactSolution, dt: T) -> Self {
        let z = [T::zero(); 2];
        Self {
            exact,
            dt,
            u_l2: z,
            u_h1: z,
            p_l2: z,
            p_h: T::zero(),
            c_l2: z,
            c_h1: z,
        }
    }

    /// Adds time level `n`, whose time stamp is `state.t`.
    pub fn record(&mut self, n: usize, state: &StateTriple<T>) {
        let exact = interpolate_exact(self.exact, state.u.mesh(), state.t);
        let diff = |a: &FeFunction<T>, b: &FeFunction<T>| norms(&a.difference(b).expect("same space"));
        let eu = diff(&state.u, &exact.u);
        let ru = norms(&exact.u);
        let ec = diff(&state.c, &exact.c);
        let rc = norms(&exact.c);
        self.u_l2 = [self.u_l2[0].max(eu.l2), self.u_l2[1].max(ru.l2)];
        self.c_l2 = [self.c_l2[0].max(ec.l2), self.c_l2[1].max(rc.l2)];
        if n == 0 {
            return;
        }
        let sq = |x: T| x * x;
        let pd = state.p.difference(&exact.p).expect("same space");
        let ep = norms(&pd);
        let rp = norms(&exact.p);
        self.u_h1[0] += self.dt * sq(eu.h1());
        self.u_h1[1] += self.dt * sq(ru.h1());
        self.p_l2[0] += self.dt * sq(ep.l2);
        self.p_l2[1] += self.dt * sq(rp.l2);
        self.p_h += self.dt * sq(pressure_h_seminorm(&pd));
        self.c_h1[0] += self.dt * sq(ec.h1());
        self.c_h1[1] += self.dt * sq(rc.h1());
    }

    pub fn finish(&self) -> RelativeErrors<T> {
        let ratio = |a: T, b: T| if b > T::zero() { a / b } else { a };
        let root = |p: [T; 2]| ratio(p[0].sqrt(), p[1].sqrt());
        RelativeErrors {
            er1: ratio(self.u_l2[0], self.u_l2[1]),
            er2: root(self.u_h1),
            er3: root(self.p_l2),
            er4: ratio(self.p_h.sqrt(), self.p_l2[1].sqrt()),
            er5: ratio(self.c_l2[0], self.c_l2[1]),
            er6: root(self.c_h1),
        }
    }
}

/// Relative errors of a complete trajectory `n = 0..N_T`.
pub fn relative_errors<T: Real>(trajectory: &[StateTriple<T>], exact: &ExactSolution, dt: T) -> RelativeErrors<T> {
    let mut acc = ErrorAccumulator::new(exact, dt);
    for (n, s) in trajectory.iter().enumerate() {
        acc.record(n, s);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trajectory(mesh: &Arc<TriMesh<f64>>, dt: f64, steps: usize) -> Vec<StateTriple<f64>> {
        let e = ExactSolution::new();
        (0..=steps).map(|n| interpolate_exact(&e, mesh, n as f64 * dt)).collect()
    }

    #[test]
    fn interpolant_has_zero_error() {
        let m = Arc::new(TriMesh::structured(6).unwrap());
        let tr = trajectory(&m, 0.1, 3);
        let e = relative_errors(&tr, &ExactSolution::new(), 0.1);
        assert_eq!(e.to_array(), [0.0; 6]);
    }

    #[test]
    fn perturbation_is_scale_invariant() {
        let m = Arc::new(TriMesh::structured(6).unwrap());
        let exact = ExactSolution::new();
        let mut tr = trajectory(&m, 0.1, 3);
        for s in &mut tr {
            s.u.coeffs_mut().iter_mut().for_each(|v| *v *= 1.1);
            s.p.coeffs_mut()[7] += 0.3;
            s.c.coeffs_mut()[4] -= 0.2;
        }
        let e = relative_errors(&tr, &exact, 0.1);
        assert!((e.er1 - 0.1).abs() < 1e-12 && (e.er2 - 0.1).abs() < 1e-12);
        assert!(e.er3 > 0.0 && e.er4 > 0.0 && e.er5 > 0.0 && e.er6 > 0.0);
    }

    #[test]
    fn ell_infinity_includes_initial_level() {
        let m = Arc::new(TriMesh::structured(4).unwrap());
        let mut tr = trajectory(&m, 0.1, 2);
        tr[0].c.coeffs_mut()[0] += 1.0;
        let e = relative_errors(&tr, &ExactSolution::new(), 0.1);
        assert!(e.er5 > 0.0 && e.er6 == 0.0);
    }
}
