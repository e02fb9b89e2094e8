//! Property suites behind the `check` command.
//!
//! Every suite compares an implementation route against an independent
//! oracle and reports the worst observed discrepancy.

use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::characteristics::{UpwindMap, ZeroVelocity};
use crate::fem::{assemble_ac, assemble_mass, norms, FeFunction, FieldKind};
use crate::linalg::norm2;
use crate::manufactured::ExactSolution;
use crate::mesh::TriMesh;
use crate::quadrature::QuadratureRule;
use crate::scheme::{
    adjugate, lemma5_residual_with, run, stokes_project, DiscreteStokesData, Layout, SchemeParams, StateTriple,
    System, ZeroForcing, COMPONENTS,
};
use crate::study::slope;
use crate::tensor::{Mat2, Point, Sym2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl SuiteReport {
    fn verdict(name: &'static str, ok: bool, detail: String) -> Self {
        Self {
            name,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail,
        }
    }

    fn skip(name: &'static str, why: &str) -> Self {
        Self {
            name,
            outcome: Outcome::Skip,
            detail: why.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{tag} {:<22} {}", self.name, self.detail)
    }
}

/// Physical parameters the scheme-level suites run with.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub nu: f64,
    pub eps: f64,
    pub delta0: f64,
    pub seed: u64,
    /// Random pairs for the cancellation-identity and adjugate suites.
    pub samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            nu: 0.1,
            eps: 0.1,
            delta0: 1.0,
            seed: 2024,
            samples: 100_000,
        }
    }
}

fn random_sym(rng: &mut StdRng, r: f64) -> Sym2<f64> {
    Sym2::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

fn random_mat(rng: &mut StdRng, r: f64) -> Mat2<f64> {
    Mat2 {
        m: [
            [rng.random_range(-r..r), rng.random_range(-r..r)],
            [rng.random_range(-r..r), rng.random_range(-r..r)],
        ],
    }
}

/// `|lemma5(E, D)| <= 1e-10 (1 + |E| |D|^2)` over random pairs with entries in
/// `[-10, 10]`, using the supplied adjugate.
pub fn lemma5_suite(samples: usize, seed: u64, adj: impl Fn(&Sym2<f64>) -> Sym2<f64>) -> SuiteReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let e = random_mat(&mut rng, 10.0);
        let d = random_sym(&mut rng, 10.0);
        let scale = 1.0 + e.norm_frobenius() * d.norm_frobenius().powi(2);
        worst = worst.max(lemma5_residual_with(&e, &d, &adj).abs() / scale);
    }
    SuiteReport::verdict("lemma5", worst <= 1e-10, format!("{samples} pairs, worst scaled residual {worst:.3e}"))
}

/// `D D^# = det(D) I` to 1e-12, relative to `1 + |D|^2`.
pub fn adjugate_suite(samples: usize, seed: u64) -> SuiteReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let d = random_sym(&mut rng, 10.0);
        let prod = d.to_mat().matmul(&adjugate(&d).to_mat());
        let det = d.xx * d.yy - d.xy * d.xy;
        let err = (prod - Mat2::identity().scale(det)).norm_frobenius();
        worst = worst.max(err / (1.0 + d.norm_frobenius().powi(2)));
    }
    SuiteReport::verdict("adjugate", worst <= 1e-12, format!("{samples} samples, worst {worst:.3e}"))
}

fn system(n: usize, cfg: &CheckConfig, dt: f64) -> System<f64> {
    let mesh = Arc::new(TriMesh::structured(n).expect("valid division"));
    let mut params = SchemeParams::new(cfg.nu, cfg.eps, dt, 1.0);
    params.delta0 = cfg.delta0;
    System::new(Arc::new(Layout::new(mesh)), params).expect("valid parameters")
}

/// Analytic Jacobian action against central differences of the residual at
/// `N = 8`, 20 random states and directions, relative error `<= 1e-6`.
pub fn jacobian_suite(cfg: &CheckConfig) -> SuiteReport {
    let sys = system(8, cfg, 1.0 / 16.0);
    let layout = sys.layout();
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let random = |rng: &mut StdRng| -> Vec<f64> {
        (0..layout.n_dofs())
            .map(|i| if layout.is_dirichlet(i) { 0.0 } else { rng.random_range(-1.0..1.0) })
            .collect()
    };
    let b = random(&mut rng);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random(&mut rng);
        let d = random(&mut rng);
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let h = 1e-6 * (1.0 + inf(&x)) / inf(&d);
        let shifted = |s: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
        let rp = sys.residual(&shifted(h), &b);
        let rm = sys.residual(&shifted(-h), &b);
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        let jd = sys.jacobian(&x).mul_vec(&d);
        let diff: Vec<f64> = jd.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / norm2(&fd));
    }
    SuiteReport::verdict("jacobian-fd", worst <= 1e-6, format!("N=8, 20 directions, worst relative {worst:.3e}"))
}

/// With `w = 0` the transported load equals the mass action, to 1e-12.
pub fn transport_reduction_suite(cfg: &CheckConfig) -> SuiteReport {
    let mesh = Arc::new(TriMesh::<f64>::structured(8).expect("valid division"));
    let rule = QuadratureRule::degree5();
    let map = match UpwindMap::new(&mesh, &ZeroVelocity, 0.5, 0.1, &rule) {
        Ok(m) => m,
        Err(e) => return SuiteReport::verdict("transport-w0", false, e.to_string()),
    };
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    for kind in [FieldKind::Scalar, FieldKind::Vector2, FieldKind::SymTensor2] {
        let m = kind.components();
        let coeffs: Vec<f64> = (0..m * mesh.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = FeFunction::from_coeffs(mesh.clone(), kind, coeffs).expect("sizes");
        let expected = assemble_mass(&mesh, m).mul_vec(g.coeffs());
        let got = map.load(&g);
        let diff: Vec<f64> = got.iter().zip(&expected).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff));
    }
    SuiteReport::verdict("transport-w0", worst <= 1e-12, format!("scalar/vector/tensor, worst {worst:.3e}"))
}

/// Backward Euler for `c' = -4c^3 + 2c` by scalar Newton.
pub fn reaction_oracle_step(prev: f64, dt: f64) -> f64 {
    let mut c = prev;
    for _ in 0..60 {
        let g = c - prev + dt * (4.0 * c * c * c - 2.0 * c);
        let step = g / (1.0 + dt * (12.0 * c * c - 2.0));
        c -= step;
        if step.abs() <= 1e-16 * (1.0 + c.abs()) {
            break;
        }
    }
    c
}

/// With `u = 0`, `w = 0` and spatially constant `C = c I`, 20 scheme steps
/// follow the scalar backward-Euler oracle componentwise to 1e-9.
pub fn reaction_ode_suite(cfg: &CheckConfig) -> SuiteReport {
    let mesh = Arc::new(TriMesh::<f64>::structured(4).expect("valid division"));
    let dt = 0.05;
    let mut params = SchemeParams::new(cfg.nu, cfg.eps, dt, 20.0 * dt);
    params.delta0 = cfg.delta0;
    let c0 = 0.3;
    let mut init = StateTriple::zeros(mesh.clone(), 0.0);
    init.c = FeFunction::interpolate_tensor(mesh.clone(), |_| Sym2::new(c0, 0.0, c0));
    let mut oracle = c0;
    let mut worst = 0.0f64;
    let outcome = run(&params, mesh, init, &ZeroVelocity, &ZeroForcing, |n, s, _| {
        if n > 0 {
            oracle = reaction_oracle_step(oracle, dt);
        }
        for v in 0..s.c.mesh().n_vertices() {
            let c = s.c.node(v);
            worst = worst.max((c[0] - oracle).abs()).max((c[2] - oracle).abs()).max(c[1].abs());
        }
        for &u in s.u.coeffs() {
            worst = worst.max(u.abs());
        }
    });
    match outcome {
        Ok(summary) => SuiteReport::verdict(
            "reaction-ode",
            summary.steps == 20 && worst <= 1e-9,
            format!("{} steps, worst deviation {worst:.3e}", summary.steps),
        ),
        Err(e) => SuiteReport::verdict("reaction-ode", false, e.to_string()),
    }
}

/// Stokes projection fixed point on a discrete field (1e-10) and H1 error
/// rate of the manufactured initial velocity across `N = 16, 32, 64` (>= 0.9).
pub fn stokes_suite(cfg: &CheckConfig) -> SuiteReport {
    let mesh = Arc::new(TriMesh::<f64>::structured(8).expect("valid division"));
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let u = FeFunction::interpolate_vector(mesh.clone(), |x| {
        let b = x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
        [b * rng.random_range(-1.0..1.0), b * rng.random_range(-1.0..1.0)]
    });
    let fixed = match stokes_project(&DiscreteStokesData { u: &u, p: None }, &mesh, cfg.nu, cfg.delta0) {
        Ok((uh, ph)) => uh
            .coeffs()
            .iter()
            .zip(u.coeffs())
            .map(|(a, b)| (a - b).abs())
            .chain(ph.coeffs().iter().map(|p| p.abs()))
            .fold(0.0f64, f64::max),
        Err(e) => return SuiteReport::verdict("stokes-projection", false, e.to_string()),
    };
    let exact = ExactSolution::new();
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let mesh = Arc::new(TriMesh::<f64>::structured(n).expect("valid division"));
        match stokes_project(&exact.velocity_at(0.0), &mesh, cfg.nu, cfg.delta0) {
            Ok((uh, _)) => {
                let pi = FeFunction::interpolate_vector(mesh.clone(), |x| exact.velocity(x, 0.0));
                errs.push(norms(&uh.difference(&pi).expect("same mesh")).h1());
            }
            Err(e) => return SuiteReport::verdict("stokes-projection", false, e.to_string()),
        }
    }
    let rates = [slope(errs[0], errs[1], 16, 32), slope(errs[1], errs[2], 32, 64)];
    let ok = fixed <= 1e-10 && rates.iter().all(|&r| r >= 0.9);
    SuiteReport::verdict(
        "stokes-projection",
        ok,
        format!("fixed point {fixed:.3e}, H1 slopes {:.2} {:.2}", rates[0], rates[1]),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Every analytic derivative entering the forcing against central
/// differences (step 1e-5) of the closed forms at 1e3 random `(x, t)`;
/// relative error `|a - b| / max(|b|, 1) <= 1e-7`.
pub fn forcing_fd_suite(cfg: &CheckConfig) -> SuiteReport {
    let e = ExactSolution::new();
    let h = 1e-5;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64| worst = worst.max(rel(a, b));
    for _ in 0..1000 {
        let x: Point<f64> = [rng.random(), rng.random()];
        let t: f64 = rng.random_range(0.0..0.5);
        let sh = |k: usize, s: f64| {
            let mut y = x;
            y[k] += s;
            y
        };
        let gu = e.velocity_grad(x, t);
        let gp = e.pressure_grad(x, t);
        let gc = e.conformation_grad(x, t);
        let hu = e.velocity_hessian(x, t);
        let hc = e.conformation_hessian(x, t);
        for k in 0..2 {
            let du = |s: f64| e.velocity(sh(k, s), t);
            let dc = |s: f64| e.conformation(sh(k, s), t).components();
            let dg = |s: f64| e.velocity_grad(sh(k, s), t);
            let dgc = |s: f64| e.conformation_grad(sh(k, s), t);
            let (up, um) = (du(h), du(-h));
            let (cp, cm) = (dc(h), dc(-h));
            let (gp_, gm_) = (dg(h), dg(-h));
            let (gcp, gcm) = (dgc(h), dgc(-h));
            for i in 0..2 {
                track(gu.m[i][k], (up[i] - um[i]) / (2.0 * h));
            }
            track(gp[k], (e.pressure(sh(k, h), t) - e.pressure(sh(k, -h), t)) / (2.0 * h));
            let gck = gc[k].components();
            for m in 0..3 {
                track(gck[m], (cp[m] - cm[m]) / (2.0 * h));
            }
            // second derivatives: hessian rows [xx, xy, yy]
            for l in 0..2 {
                let idx = k + l;
                for i in 0..2 {
                    track(hu[idx][i], (gp_.m[i][l] - gm_.m[i][l]) / (2.0 * h));
                }
                let fd = (gcp[l].components(), gcm[l].components());
                let an = hc[idx].components();
                for m in 0..3 {
                    track(an[m], (fd.0[m] - fd.1[m]) / (2.0 * h));
                }
            }
        }
        let (vp, vm) = (e.velocity(x, t + h), e.velocity(x, t - h));
        let vt = e.velocity_dt(x, t);
        for i in 0..2 {
            track(vt[i], (vp[i] - vm[i]) / (2.0 * h));
        }
        let (cp, cm) = (e.conformation(x, t + h).components(), e.conformation(x, t - h).components());
        let ct = e.conformation_dt(x, t).components();
        for m in 0..3 {
            track(ct[m], (cp[m] - cm[m]) / (2.0 * h));
        }
        let lap = e.velocity_laplacian(x, t);
        for i in 0..2 {
            track(lap[i], hu[0][i] + hu[2][i]);
        }
        let lc = e.conformation_laplacian(x, t).components();
        let (hxx, hyy) = (hc[0].components(), hc[2].components());
        for m in 0..3 {
            track(lc[m], hxx[m] + hyy[m]);
        }
    }
    SuiteReport::verdict("forcing-fd", worst <= 1e-7, format!("1000 points, worst relative {worst:.3e}"))
}

/// The conformation block of the linear part minus mass/Δt equals
/// `ε w_m K` (weights 1, 2, 1). Only meaningful for `ε > 0`.
pub fn diffusion_suite(cfg: &CheckConfig) -> SuiteReport {
    if cfg.eps == 0.0 {
        return SuiteReport::skip("conformation-diffusion", "eps = 0: no diffusion block");
    }
    let dt = 0.125;
    let sys = system(6, cfg, dt);
    let layout = sys.layout();
    let mesh = layout.mesh();
    let mass = assemble_mass(mesh, 3);
    let ac = assemble_ac(mesh);
    let lin = sys.linear_part();
    let mut worst = 0.0f64;
    for v in 0..mesh.n_vertices() {
        for m in 0..3 {
            let r = layout.dof(v, 3 + m);
            for (c, val) in lin.row(r) {
                if c == layout.multiplier() {
                    continue;
                }
                let (u, j) = (c / COMPONENTS, c % COMPONENTS);
                let expected = if j == 3 + m {
                    let (a, b) = (3 * v + m, 3 * u + m);
                    mass.get(a, b) / dt + cfg.eps * ac.get(a, b)
                } else {
                    0.0
                };
                worst = worst.max((val - expected).abs());
            }
        }
    }
    SuiteReport::verdict("conformation-diffusion", worst <= 1e-12, format!("worst entry deviation {worst:.3e}"))
}

/// All suites in a fixed order.
pub fn run_all(cfg: &CheckConfig) -> Vec<SuiteReport> {
    vec![
        lemma5_suite(cfg.samples, cfg.seed, adjugate),
        adjugate_suite(cfg.samples, cfg.seed + 1),
        jacobian_suite(cfg),
        transport_reduction_suite(cfg),
        reaction_ode_suite(cfg),
        stokes_suite(cfg),
        forcing_fd_suite(cfg),
        diffusion_suite(cfg),
    ]
}
