use std::sync::Arc;

use super::{CoupledSolver, Forcing, Layout, SchemeParams, StateTriple, System};
use crate::characteristics::VelocityField;
use crate::error::{Error, Result};
use crate::linalg::{norm2, SolverStats};
use crate::mesh::TriMesh;
use crate::Real;

/// Outcome of one Newton solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NewtonReport<T> {
    /// Newton updates applied.
    pub iterations: usize,
    /// Final residual norm.
    pub residual: T,
    /// Norm of the load vector the tolerance is relative to.
    pub load_norm: T,
}

/// Solves one time step `t_{n-1} -> t` by damped Newton from `prev`.
pub fn solve_timestep<T, W, F>(
    system: &System<T>,
    solver: &mut CoupledSolver<T>,
    prev: &StateTriple<T>,
    w: &W,
    forcing: &F,
    t: T,
) -> Result<(StateTriple<T>, NewtonReport<T>)>
where
    T: Real,
    W: VelocityField<T> + ?Sized,
    F: Forcing<T> + ?Sized,
{
    let params = system.params();
    let layout = system.layout();
    let b = system.load(prev, w, forcing, t)?;
    let b_norm = norm2(&b);
    let tol = params.newton_tol * (T::one() + b_norm);
    let mut x = layout.pack(prev);
    for (i, xi) in x.iter_mut().enumerate() {
        if layout.is_dirichlet(i) {
            *xi = T::zero();
        }
    }
    let mut r = system.residual(&x, &b);
    let mut r_norm = norm2(&r);
    let mut iterations = 0;
    while r_norm > tol {
        if iterations == params.newton_max_iter || !r_norm.is_finite() {
            return Err(Error::NewtonDiverged {
                iterations,
                residual: r_norm.to_f64_lossy(),
            });
        }
        let jac = system.jacobian(&x);
        let neg: Vec<T> = r.iter().map(|&v| -v).collect();
        let lin_tol = (T::lit(1e-6) * r_norm).max(T::lit(0.1) * tol);
        let delta = solver.solve(&jac, &neg, lin_tol)?;
        let mut alpha = T::one();
        loop {
            let trial: Vec<T> = x.iter().zip(&delta).map(|(&a, &d)| a + alpha * d).collect();
            let r_trial = system.residual(&trial, &b);
            let n_trial = norm2(&r_trial);
            if n_trial < r_norm || alpha * T::lit(0.5) < params.damping_min {
                x = trial;
                r = r_trial;
                r_norm = n_trial;
                break;
            }
            alpha *= T::lit(0.5);
        }
        iterations += 1;
        log::trace!("newton {iterations}: residual {r_norm} (tol {tol}, step {alpha})");
    }
    Ok((
        layout.unpack(&x, t),
        NewtonReport {
            iterations,
            residual: r_norm,
            load_norm: b_norm,
        },
    ))
}

/// A system together with the linear solver whose factors persist across steps.
pub struct Stepper<T: Real> {
    system: System<T>,
    solver: CoupledSolver<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(mesh: Arc<TriMesh<T>>, params: SchemeParams<T>) -> Result<Self> {
        let system = System::new(Arc::new(Layout::new(mesh)), params)?;
        let solver = CoupledSolver::new(&system)?;
        Ok(Self { system, solver })
    }

    pub fn system(&self) -> &System<T> {
        &self.system
    }

    pub fn solver_stats(&self) -> SolverStats {
        self.solver.stats()
    }

    pub fn step<W, F>(&mut self, prev: &StateTriple<T>, w: &W, forcing: &F, t: T) -> Result<(StateTriple<T>, NewtonReport<T>)>
    where
        W: VelocityField<T> + ?Sized,
        F: Forcing<T> + ?Sized,
    {
        solve_timestep(&self.system, &mut self.solver, prev, w, forcing, t)
    }
}

/// Totals over a complete run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub newton_iterations: usize,
    pub linear: SolverStats,
}

impl RunSummary {
    pub fn newton_avg_iters(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.newton_iterations as f64 / self.steps as f64
        }
    }
}

/// Warns when the step-size conditions guaranteeing a unique discrete
/// solution may fail, with every unknown constant taken as 1:
/// `Δt ≤ D(h)⁻²` for `ε > 0`, `Δt ≤ h` for `ε = 0`, `D(h) = (1 + |log h|)^{1/2}`.
pub fn uniqueness_advisory<T: Real>(h: T, dt: T, eps: T) -> Option<String> {
    if eps > T::zero() {
        let bound = T::one() / (T::one() + h.ln().abs());
        (dt > bound).then(|| format!("dt = {dt} exceeds D(h)^-2 = {bound} (h = {h}); uniqueness is not guaranteed"))
    } else {
        (dt > h).then(|| format!("dt = {dt} exceeds h = {h} with eps = 0; uniqueness is not guaranteed"))
    }
}

/// Runs `n = 1..N_T` from `initial`, calling `on_step(n, state, report)` for
/// every level including `n = 0` (without a report).
pub fn run<T, W, F, CB>(
    params: &SchemeParams<T>,
    mesh: Arc<TriMesh<T>>,
    initial: StateTriple<T>,
    w: &W,
    forcing: &F,
    mut on_step: CB,
) -> Result<RunSummary>
where
    T: Real,
    W: VelocityField<T> + ?Sized,
    F: Forcing<T> + ?Sized,
    CB: FnMut(usize, &StateTriple<T>, Option<&NewtonReport<T>>),
{
    params.validate()?;
    if let Some(msg) = uniqueness_advisory(mesh.h, params.dt, params.eps) {
        log::warn!("{msg}");
    }
    let mut stepper = Stepper::new(mesh, params.clone())?;
    let n_steps = params.n_steps();
    let mut summary = RunSummary::default();
    on_step(0, &initial, None);
    let mut state = initial;
    for n in 1..=n_steps {
        let t = params.time(n);
        let (next, report) = stepper.step(&state, w, forcing, t).map_err(|e| Error::StepFailed {
            step: n,
            source: Box::new(e),
        })?;
        log::debug!("step {n}/{n_steps} t={t}: {} newton iterations", report.iterations);
        summary.steps += 1;
        summary.newton_iterations += report.iterations;
        on_step(n, &next, Some(&report));
        state = next;
    }
    summary.linear = stepper.solver_stats();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::ZeroVelocity;
    use crate::fem::FeFunction;
    use crate::scheme::ZeroForcing;
    use crate::tensor::Sym2;

    fn mesh(n: usize) -> Arc<TriMesh<f64>> {
        Arc::new(TriMesh::structured(n).unwrap())
    }

    #[test]
    fn homogeneous_problem_stays_at_zero() {
        let m = mesh(4);
        let mut stepper = Stepper::new(m.clone(), SchemeParams::new(0.1, 0.1, 0.1, 0.5)).unwrap();
        let zero = StateTriple::zeros(m, 0.0);
        let (s, rep) = stepper.step(&zero, &ZeroVelocity, &ZeroForcing, 0.1).unwrap();
        assert!(rep.iterations <= 1);
        assert!(s.u.coeffs().iter().chain(s.p.coeffs()).chain(s.c.coeffs()).all(|&v| v == 0.0));
    }

    #[test]
    fn step_count_and_times() {
        let m = mesh(2);
        let params = SchemeParams::new(1.0, 0.1, 0.15, 0.5);
        let mut times = Vec::new();
        let s = run(&params, m.clone(), StateTriple::zeros(m, 0.0), &ZeroVelocity, &ZeroForcing, |_, st, _| {
            times.push(st.t)
        })
        .unwrap();
        assert_eq!(s.steps, 3);
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn reaction_ode_oracle() {
        let m = mesh(3);
        let dt = 0.05;
        let params = SchemeParams::new(1.0, 0.2, dt, 1.0);
        let c0 = 0.3;
        let mut init = StateTriple::zeros(m.clone(), 0.0);
        init.c = FeFunction::interpolate_tensor(m.clone(), |_| Sym2::new(c0, 0.0, c0));
        let mut oracle = c0;
        let mut worst = 0.0f64;
        run(&params, m, init, &ZeroVelocity, &ZeroForcing, |n, s, _| {
            if n > 0 {
                // backward Euler for c' = -4c³ + 2c by scalar Newton
                let prev = oracle;
                for _ in 0..50 {
                    let g = oracle - prev + dt * (4.0 * oracle.powi(3) - 2.0 * oracle);
                    oracle -= g / (1.0 + dt * (12.0 * oracle * oracle - 2.0));
                }
            }
            for v in 0..s.c.mesh().n_vertices() {
                let c = s.c.node(v);
                worst = worst.max((c[0] - oracle).abs()).max((c[2] - oracle).abs()).max(c[1].abs());
            }
        })
        .unwrap();
        assert!(worst <= 1e-9, "{worst}");
    }

    #[test]
    fn advisory_thresholds() {
        let h = 2f64.sqrt() / 32.0;
        assert!(uniqueness_advisory(h, 1.0 / 64.0, 0.1).is_none());
        assert!(uniqueness_advisory(h, 0.5, 0.1).is_some());
        assert!(uniqueness_advisory(h, 1.0 / 64.0, 0.0).is_none());
        assert!(uniqueness_advisory(h, 0.1, 0.0).is_some());
    }
}
