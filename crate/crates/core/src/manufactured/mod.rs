//! Closed-form solution on the unit square, its forcing, and relative error norms.

mod errors;
mod wave;

use std::f64::consts::PI;

pub use errors::{interpolate_exact, relative_errors, ErrorAccumulator, RelativeErrors};
pub use wave::{Envelope, Wave, WaveJet, JET_ORDER};

use crate::characteristics::VelocityField;
use crate::mesh::Bary;
use crate::scheme::{Forcing, StokesData};
use crate::tensor::{Mat2, Point, Sym2, Vec2};
use crate::Real;

/// Exact fields at one space-time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactValues {
    pub u: Vec2<f64>,
    pub p: f64,
    pub c: Sym2<f64>,
}

/// Right-hand sides of the momentum and conformation equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingValues {
    pub f: Vec2<f64>,
    pub big_f: Sym2<f64>,
}

/// Divergence-free velocity from a stream function `ψ`, a travelling-wave
/// pressure, and a conformation tensor `C = I + ½ sin²sin² (waves)`.
///
/// `u = (∂ψ/∂x₂, -∂ψ/∂x₁)` with
/// `ψ = √3/(2π) sin²(πx₁) sin²(πx₂) sin(π(x₁+x₂+t))`,
/// `p = sin(π(x₁+2x₂+t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub psi: Wave,
    pub p: Wave,
    /// `(C11, C12, C22)` without the identity offset.
    pub c: [Wave; 3],
    pub c_offset: [f64; 3],
}

impl Default for ExactSolution {
    fn default() -> Self {
        Self::new()
    }
}

fn bump(amp: f64, alpha: f64, beta: f64) -> Wave {
    Wave {
        amp,
        env: [Envelope::SinSquared, Envelope::SinSquared],
        alpha,
        beta,
        gamma: 1.0,
    }
}

impl ExactSolution {
    pub fn new() -> Self {
        Self {
            psi: bump(3f64.sqrt() / (2.0 * PI), 1.0, 1.0),
            p: Wave {
                amp: 1.0,
                env: [Envelope::One, Envelope::One],
                alpha: 1.0,
                beta: 2.0,
                gamma: 1.0,
            },
            c: [bump(0.5, 1.0, 0.0), bump(0.5, 1.0, 1.0), bump(0.5, 0.0, 1.0)],
            c_offset: [1.0, 0.0, 1.0],
        }
    }

    fn jets(&self, x: Point<f64>, t: f64) -> Jets {
        Jets {
            psi: self.psi.jet(x, t),
            p: self.p.jet(x, t),
            c: std::array::from_fn(|k| self.c[k].jet(x, t)),
            c_offset: self.c_offset,
        }
    }

    pub fn eval(&self, x: Point<f64>, t: f64) -> ExactValues {
        let j = self.jets(x, t);
        ExactValues {
            u: j.velocity(),
            p: j.pressure(),
            c: j.conformation(),
        }
    }

    pub fn velocity(&self, x: Point<f64>, t: f64) -> Vec2<f64> {
        self.jets(x, t).velocity()
    }

    /// `(∇u)_ij = ∂u_i/∂x_j`.
    pub fn velocity_grad(&self, x: Point<f64>, t: f64) -> Mat2<f64> {
        self.jets(x, t).velocity_grad()
    }

    pub fn velocity_dt(&self, x: Point<f64>, t: f64) -> Vec2<f64> {
        self.jets(x, t).velocity_dt()
    }

    /// Second derivatives `[∂₁∂₁u, ∂₁∂₂u, ∂₂∂₂u]`.
    pub fn velocity_hessian(&self, x: Point<f64>, t: f64) -> [Vec2<f64>; 3] {
        self.jets(x, t).velocity_hessian()
    }

    pub fn velocity_laplacian(&self, x: Point<f64>, t: f64) -> Vec2<f64> {
        self.jets(x, t).velocity_laplacian()
    }

    /// `∇(div u)`, which vanishes identically.
    pub fn grad_div(&self, x: Point<f64>, t: f64) -> Vec2<f64> {
        self.jets(x, t).grad_div()
    }

    pub fn pressure(&self, x: Point<f64>, t: f64) -> f64 {
        self.p.value(x, t)
    }

    pub fn pressure_grad(&self, x: Point<f64>, t: f64) -> Vec2<f64> {
        self.jets(x, t).pressure_grad()
    }

    pub fn conformation(&self, x: Point<f64>, t: f64) -> Sym2<f64> {
        self.jets(x, t).conformation()
    }

    /// `[∂C/∂x₁, ∂C/∂x₂]`.
    pub fn conformation_grad(&self, x: Point<f64>, t: f64) -> [Sym2<f64>; 2] {
        let j = self.jets(x, t);
        [j.c_deriv(1, 0, 0), j.c_deriv(0, 1, 0)]
    }

    pub fn conformation_dt(&self, x: Point<f64>, t: f64) -> Sym2<f64> {
        self.jets(x, t).c_deriv(0, 0, 1)
    }

    /// Second derivatives `[∂₁∂₁C, ∂₁∂₂C, ∂₂∂₂C]`.
    pub fn conformation_hessian(&self, x: Point<f64>, t: f64) -> [Sym2<f64>; 3] {
        let j = self.jets(x, t);
        [j.c_deriv(2, 0, 0), j.c_deriv(1, 1, 0), j.c_deriv(0, 2, 0)]
    }

    pub fn conformation_laplacian(&self, x: Point<f64>, t: f64) -> Sym2<f64> {
        self.jets(x, t).conformation_laplacian()
    }

    /// `f = u_t + (u·∇)u - div(2ν D(u)) + ∇p - div[(tr C) C]` and
    /// `F = C_t + (u·∇)C - εΔC - (∇u)C - C(∇u)ᵀ + (tr C)² C - (tr C) I`,
    /// with the transporting velocity equal to `u`.
    pub fn forcing(&self, x: Point<f64>, t: f64, nu: f64, eps: f64) -> ForcingValues {
        self.jets(x, t).forcing(nu, eps)
    }

    /// Largest `max(|u|, |∇u|)` over a uniform space-time sample, an estimate
    /// of `|u|_{C(W^{1,∞})}` on `[0, t_end]`.
    pub fn velocity_w1inf(&self, t_end: f64) -> f64 {
        let n = 40;
        let mut best = 0.0f64;
        for it in 0..=8 {
            let t = t_end * f64::from(it) / 8.0;
            for i in 0..=n {
                for j in 0..=n {
                    let x = [f64::from(i) / f64::from(n), f64::from(j) / f64::from(n)];
                    let u = self.velocity(x, t);
                    let g = self.velocity_grad(x, t);
                    best = best.max(u[0].hypot(u[1])).max(g.m.iter().flatten().fold(0.0, |m, v| m.max(v.abs())));
                }
            }
        }
        best
    }

    /// Forcing provider for the time stepper.
    pub fn forcing_for(&self, nu: f64, eps: f64) -> ManufacturedForcing<'_> {
        ManufacturedForcing { exact: self, nu, eps }
    }

    /// Exact velocity and pressure frozen at time `t`, as Stokes projection data.
    pub fn at(&self, t: f64) -> ExactAt<'_> {
        ExactAt {
            exact: self,
            t,
            with_pressure: true,
        }
    }

    /// Exact velocity at time `t` paired with a zero pressure.
    pub fn velocity_at(&self, t: f64) -> ExactAt<'_> {
        ExactAt {
            exact: self,
            t,
            with_pressure: false,
        }
    }
}

/// Wave derivatives of every field at one space-time point.
struct Jets {
    psi: WaveJet,
    p: WaveJet,
    c: [WaveJet; 3],
    c_offset: [f64; 3],
}

impl Jets {
    fn velocity(&self) -> Vec2<f64> {
        [self.psi.d(0, 1, 0), -self.psi.d(1, 0, 0)]
    }

    fn velocity_grad(&self) -> Mat2<f64> {
        let xy = self.psi.d(1, 1, 0);
        Mat2::new(xy, self.psi.d(0, 2, 0), -self.psi.d(2, 0, 0), -xy)
    }

    fn velocity_dt(&self) -> Vec2<f64> {
        [self.psi.d(0, 1, 1), -self.psi.d(1, 0, 1)]
    }

    fn velocity_hessian(&self) -> [Vec2<f64>; 3] {
        let d = |a, b| self.psi.d(a, b, 0);
        [[d(2, 1), -d(3, 0)], [d(1, 2), -d(2, 1)], [d(0, 3), -d(1, 2)]]
    }

    fn velocity_laplacian(&self) -> Vec2<f64> {
        let [xx, _, yy] = self.velocity_hessian();
        [xx[0] + yy[0], xx[1] + yy[1]]
    }

    fn grad_div(&self) -> Vec2<f64> {
        let [xx, xy, yy] = self.velocity_hessian();
        [xx[0] + xy[1], xy[0] + yy[1]]
    }

    fn pressure(&self) -> f64 {
        self.p.d(0, 0, 0)
    }

    fn pressure_grad(&self) -> Vec2<f64> {
        [self.p.d(1, 0, 0), self.p.d(0, 1, 0)]
    }

    fn c_deriv(&self, a: usize, b: usize, c: usize) -> Sym2<f64> {
        Sym2::from_components(std::array::from_fn(|k| self.c[k].d(a, b, c)))
    }

    fn conformation(&self) -> Sym2<f64> {
        self.c_deriv(0, 0, 0) + Sym2::from_components(self.c_offset)
    }

    fn conformation_laplacian(&self) -> Sym2<f64> {
        self.c_deriv(2, 0, 0) + self.c_deriv(0, 2, 0)
    }

    fn forcing(&self, nu: f64, eps: f64) -> ForcingValues {
        let u = self.velocity();
        let g = self.velocity_grad();
        let ut = self.velocity_dt();
        let lap = self.velocity_laplacian();
        let gd = self.grad_div();
        let gp = self.pressure_grad();
        let c = self.conformation();
        let [cx, cy] = [self.c_deriv(1, 0, 0), self.c_deriv(0, 1, 0)];
        let tr = c.trace();
        let (trx, try_) = (cx.trace(), cy.trace());
        // div[(tr C) C]_i = Σ_j ∂_j(tr C) C_ij + tr C ∂_j C_ij
        let div_stress = [
            trx * c.xx + try_ * c.xy + tr * (cx.xx + cy.xy),
            trx * c.xy + try_ * c.yy + tr * (cx.xy + cy.yy),
        ];
        let conv = g.mul_vec(u);
        let f = std::array::from_fn(|i| ut[i] + conv[i] - nu * (lap[i] + gd[i]) + gp[i] - div_stress[i]);

        let ct = self.c_deriv(0, 0, 1);
        let conv_c = cx * u[0] + cy * u[1];
        let lap_c = self.conformation_laplacian();
        let gc = g.mul_sym(&c);
        let stretch = Sym2::new(2.0 * gc.m[0][0], gc.m[0][1] + gc.m[1][0], 2.0 * gc.m[1][1]);
        let big_f = ct + conv_c - lap_c * eps - stretch + c * (tr * tr) - Sym2::identity() * tr;
        ForcingValues { f, big_f }
    }
}

fn to_f64<T: Real>(x: Point<T>) -> Point<f64> {
    [x[0].to_f64_lossy(), x[1].to_f64_lossy()]
}

fn vec_lit<T: Real>(v: Vec2<f64>) -> Vec2<T> {
    [T::lit(v[0]), T::lit(v[1])]
}

fn sym_lit<T: Real>(s: Sym2<f64>) -> Sym2<T> {
    Sym2::new(T::lit(s.xx), T::lit(s.xy), T::lit(s.yy))
}

impl<T: Real> VelocityField<T> for ExactSolution {
    fn velocity(&self, x: Point<T>, t: T) -> Vec2<T> {
        vec_lit(ExactSolution::velocity(self, to_f64(x), t.to_f64_lossy()))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ManufacturedForcing<'a> {
    pub exact: &'a ExactSolution,
    pub nu: f64,
    pub eps: f64,
}

impl<T: Real> Forcing<T> for ManufacturedForcing<'_> {
    fn at(&self, x: Point<T>, t: T) -> (Vec2<T>, Sym2<T>) {
        let v = self.exact.forcing(to_f64(x), t.to_f64_lossy(), self.nu, self.eps);
        (vec_lit(v.f), sym_lit(v.big_f))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExactAt<'a> {
    pub exact: &'a ExactSolution,
    pub t: f64,
    pub with_pressure: bool,
}

impl<T: Real> StokesData<T> for ExactAt<'_> {
    fn velocity_grad(&self, _tri: usize, _bary: &Bary<T>, x: Point<T>) -> Mat2<T> {
        let g = self.exact.velocity_grad(to_f64(x), self.t);
        Mat2::new(T::lit(g.m[0][0]), T::lit(g.m[0][1]), T::lit(g.m[1][0]), T::lit(g.m[1][1]))
    }

    fn pressure(&self, _tri: usize, _bary: &Bary<T>, x: Point<T>) -> T {
        if self.with_pressure {
            T::lit(self.exact.pressure(to_f64(x), self.t))
        } else {
            T::zero()
        }
    }
}
