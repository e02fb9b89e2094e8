//! The nonlinear stabilized Lagrange-Galerkin time stepper.

mod precond;
mod stepper;
mod stokes;
mod system;

use std::sync::Arc;

pub use precond::{BlockPreconditioner, BorderedStokes, CoupledSolver};
pub use stepper::{run, solve_timestep, uniqueness_advisory, NewtonReport, RunSummary, Stepper};
pub use stokes::{stokes_project, DiscreteStokesData, StokesData};
pub use system::{Layout, System, COMPONENTS};

use crate::error::{Error, Result};
use crate::fem::{FeFunction, FieldKind};
use crate::mesh::TriMesh;
use crate::tensor::{Mat2, Point, Sym2, Vec2};
use crate::Real;

/// `D^# = [[D22, -D12], [-D12, D11]]`.
pub fn adjugate<T: Real>(d: &Sym2<T>) -> Sym2<T> {
    Sym2::new(d.yy, -d.xy, d.xx)
}

/// `(tr D) D : E - E D : D - ½ (tr E) D^# : D`, which vanishes for symmetric `D`.
pub fn lemma5_residual<T: Real>(e: &Mat2<T>, d: &Sym2<T>) -> T {
    lemma5_residual_with(e, d, adjugate)
}

/// [`lemma5_residual`] with a caller-supplied adjugate.
pub fn lemma5_residual_with<T: Real>(e: &Mat2<T>, d: &Sym2<T>, adj: impl Fn(&Sym2<T>) -> Sym2<T>) -> T {
    let dm = d.to_mat();
    d.trace() * dm.ddot(e) - e.matmul(&dm).ddot(&dm) - T::lit(0.5) * e.trace() * adj(d).ddot(d)
}

/// Physical and solver parameters of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeParams<T> {
    pub nu: T,
    pub eps: T,
    pub delta0: T,
    pub dt: T,
    pub t_end: T,
    /// Newton stops when `||R|| <= newton_tol (1 + ||b||)`, `b` the load vector.
    pub newton_tol: T,
    pub newton_max_iter: usize,
    /// Smallest step fraction tried by the backtracking line search.
    pub damping_min: T,
}

impl<T: Real> SchemeParams<T> {
    pub fn new(nu: T, eps: T, dt: T, t_end: T) -> Self {
        Self {
            nu,
            eps,
            delta0: T::one(),
            dt,
            t_end,
            newton_tol: T::lit(1e-10),
            newton_max_iter: 20,
            damping_min: T::lit(1.0 / 64.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.nu > T::zero()) {
            return bad("nu must be positive");
        }
        if !(self.eps >= T::zero()) {
            return bad("eps must be nonnegative");
        }
        if !(self.delta0 > T::zero()) {
            return bad("delta0 must be positive");
        }
        if !(self.dt > T::zero()) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= self.dt) {
            return bad("t_end must be at least dt");
        }
        if !(self.newton_tol > T::zero()) || self.newton_max_iter == 0 {
            return bad("newton controls must be positive");
        }
        if !(self.damping_min > T::zero() && self.damping_min <= T::one()) {
            return bad("damping_min must lie in (0, 1]");
        }
        Ok(())
    }

    /// `N_T = ⌊T / Δt⌋`; quotients within 1e-9 of an integer round to it.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + T::lit(1e-9)).floor().to_usize().unwrap_or(0)
    }

    /// `tⁿ = n Δt`.
    pub fn time(&self, n: usize) -> T {
        T::from_count(n) * self.dt
    }
}

/// One time level `(uⁿ, pⁿ, Cⁿ)` at time `t`.
#[derive(Clone, Debug)]
pub struct StateTriple<T> {
    pub u: FeFunction<T>,
    pub p: FeFunction<T>,
    pub c: FeFunction<T>,
    pub t: T,
}

impl<T: Real> StateTriple<T> {
    pub fn zeros(mesh: Arc<TriMesh<T>>, t: T) -> Self {
        Self {
            u: FeFunction::zeros(mesh.clone(), FieldKind::Vector2),
            p: FeFunction::zeros(mesh.clone(), FieldKind::Scalar),
            c: FeFunction::zeros(mesh, FieldKind::SymTensor2),
            t,
        }
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        self.u.mesh()
    }
}

/// Right-hand sides `(f, F)` of the momentum and conformation equations.
pub trait Forcing<T: Real> {
    fn at(&self, x: Point<T>, t: T) -> (Vec2<T>, Sym2<T>);
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroForcing;

impl<T: Real> Forcing<T> for ZeroForcing {
    fn at(&self, _x: Point<T>, _t: T) -> (Vec2<T>, Sym2<T>) {
        ([T::zero(); 2], Sym2::zero())
    }
}

impl<T: Real, F: Fn(Point<T>, T) -> (Vec2<T>, Sym2<T>)> Forcing<T> for F {
    fn at(&self, x: Point<T>, t: T) -> (Vec2<T>, Sym2<T>) {
        self(x, t)
    }
}
