//! Convergence study driver: one manufactured-solution run per mesh level.

use std::sync::Arc;
use std::time::Instant;

use crate::characteristics::check_step_condition;
use crate::error::Result;
use crate::manufactured::{interpolate_exact, ErrorAccumulator, ExactSolution, RelativeErrors};
use crate::mesh::TriMesh;
use crate::scheme::{run, stokes_project, RunSummary, SchemeParams, StateTriple};

/// Settings shared by all levels of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub nu: f64,
    pub eps: f64,
    pub delta0: f64,
    /// `Δt = dt_ratio / N`.
    pub dt_ratio: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl StudyConfig {
    pub fn new(nu: f64, eps: f64) -> Self {
        Self {
            nu,
            eps,
            delta0: 1.0,
            dt_ratio: 0.5,
            t_end: 0.5,
            newton_tol: 1e-10,
            newton_max_iter: 20,
        }
    }

    pub fn params(&self, n: usize) -> SchemeParams<f64> {
        let mut p = SchemeParams::new(self.nu, self.eps, self.dt_ratio / n as f64, self.t_end);
        p.delta0 = self.delta0;
        p.newton_tol = self.newton_tol;
        p.newton_max_iter = self.newton_max_iter;
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelResult {
    pub n: usize,
    /// `1 / N`.
    pub h: f64,
    pub dt: f64,
    pub errors: RelativeErrors<f64>,
    pub newton_avg_iters: f64,
    pub wall_seconds: f64,
    pub summary: RunSummary,
}

/// Initial state: Stokes projection of `(u⁰, 0)` and the nodal interpolant of `C⁰`.
pub fn initial_state(exact: &ExactSolution, mesh: &Arc<TriMesh<f64>>, nu: f64, delta0: f64) -> Result<StateTriple<f64>> {
    let (u, p) = stokes_project(&exact.velocity_at(0.0), mesh, nu, delta0)?;
    let c = interpolate_exact(exact, mesh, 0.0).c;
    Ok(StateTriple { u, p, c, t: 0.0 })
}

/// Runs the manufactured problem on the `n x n` structured mesh.
pub fn run_level(config: &StudyConfig, n: usize) -> Result<LevelResult> {
    let start = Instant::now();
    let exact = ExactSolution::new();
    let params = config.params(n);
    params.validate()?;
    let cond = check_step_condition(exact.velocity_w1inf(config.t_end), params.dt);
    if !cond.jacobian_bounded {
        log::warn!("N={n}: dt |w| exceeds 1/4 ({cond:?})");
    }
    let mesh = Arc::new(TriMesh::structured(n)?);
    let initial = initial_state(&exact, &mesh, config.nu, config.delta0)?;
    let forcing = exact.forcing_for(config.nu, config.eps);
    let mut acc = ErrorAccumulator::new(&exact, params.dt);
    let summary = run(&params, mesh, initial, &exact, &forcing, |k, s, _| acc.record(k, s))?;
    let errors = acc.finish();
    let wall_seconds = start.elapsed().as_secs_f64();
    log::info!("N={n}: {errors} ({:.2} newton/step, {wall_seconds:.1}s)", summary.newton_avg_iters());
    Ok(LevelResult {
        n,
        h: 1.0 / n as f64,
        dt: params.dt,
        errors,
        newton_avg_iters: summary.newton_avg_iters(),
        wall_seconds,
        summary,
    })
}

/// Observed order between two levels: `log(e_coarse / e_fine) / log(n_fine / n_coarse)`.
pub fn slope(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

/// Slopes of all six errors between consecutive levels.
pub fn slopes(levels: &[LevelResult]) -> Vec<[f64; 6]> {
    levels
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].errors.to_array(), w[1].errors.to_array());
            std::array::from_fn(|i| slope(a[i], b[i], w[0].n, w[1].n))
        })
        .collect()
}
