//! First-order characteristics: upwind points and transported load vectors.

use crate::error::{Error, Result};
use crate::fem::{FeFunction, FieldKind};
use crate::mesh::{Bary, TriMesh};
use crate::quadrature::QuadratureRule;
use crate::tensor::{sym_weight, Point, Vec2};
use crate::Real;

/// Transporting velocity `w(x, t)`.
pub trait VelocityField<T: Real> {
    fn velocity(&self, x: Point<T>, t: T) -> Vec2<T>;

    /// Velocity at a point already located at `bary` in triangle `tri`.
    fn velocity_in(&self, _tri: usize, _bary: &Bary<T>, x: Point<T>, t: T) -> Vec2<T> {
        self.velocity(x, t)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroVelocity;

impl<T: Real> VelocityField<T> for ZeroVelocity {
    fn velocity(&self, _x: Point<T>, _t: T) -> Vec2<T> {
        [T::zero(); 2]
    }
}

/// Closed-form velocity.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticVelocity<F>(pub F);

impl<T: Real, F: Fn(Point<T>, T) -> Vec2<T>> VelocityField<T> for AnalyticVelocity<F> {
    fn velocity(&self, x: Point<T>, t: T) -> Vec2<T> {
        (self.0)(x, t)
    }
}

/// A discrete P1 velocity, frozen in time.
#[derive(Clone, Copy, Debug)]
pub struct DiscreteVelocity<'a, T>(pub &'a FeFunction<T>);

impl<T: Real> VelocityField<T> for DiscreteVelocity<'_, T> {
    fn velocity(&self, x: Point<T>, _t: T) -> Vec2<T> {
        match self.0.mesh().locate(x, None) {
            Ok((tri, bary)) => self.0.eval_vector(tri, &bary),
            Err(_) => [T::zero(); 2],
        }
    }

    fn velocity_in(&self, tri: usize, bary: &Bary<T>, _x: Point<T>, _t: T) -> Vec2<T> {
        self.0.eval_vector(tri, bary)
    }
}

/// Samples `w` at `samples` points spread along the boundary of the unit square
/// and reports whether it vanishes there to 1e-12.
pub fn is_boundary_compatible<T: Real, W: VelocityField<T> + ?Sized>(w: &W, t: T, samples: usize) -> bool {
    let tol = T::lit(1e-12);
    (0..samples).all(|i| {
        let s = T::from_count(4 * i) / T::from_count(samples);
        let side = s.floor().to_usize().unwrap_or(0).min(3);
        let r = s - T::from_count(side);
        let x = match side {
            0 => [r, T::zero()],
            1 => [T::one(), r],
            2 => [T::one() - r, T::one()],
            _ => [T::zero(), T::one() - r],
        };
        let v = w.velocity(x, t);
        v[0].abs() <= tol && v[1].abs() <= tol
    })
}

fn step_back<T: Real>(mesh: &TriMesh<T>, x: Point<T>, v: Vec2<T>, dt: T) -> Result<Point<T>> {
    let y = [x[0] - v[0] * dt, x[1] - v[1] * dt];
    mesh.snap(y).map_err(|_| Error::UpwindEscaped {
        x: y[0].to_f64_lossy(),
        y: y[1].to_f64_lossy(),
    })
}

/// `X₁(x) = x - w(x, t) dt`, snapped onto the domain when within 1e-10 of it.
pub fn upwind_point<T: Real, W: VelocityField<T> + ?Sized>(
    mesh: &TriMesh<T>,
    w: &W,
    x: Point<T>,
    t: T,
    dt: T,
) -> Result<Point<T>> {
    step_back(mesh, x, w.velocity(x, t), dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepCondition {
    /// `dt |w| < 1`: the upwind map is a bijection of the domain.
    pub bijective: bool,
    /// `dt |w| <= 1/4`: its Jacobian stays within `[1/2, 3/2]`.
    pub jacobian_bounded: bool,
}

/// Step-size conditions for a velocity with `|w|_{C(W^{1,∞})} = w_norm`.
pub fn check_step_condition<T: Real>(w_norm: T, dt: T) -> StepCondition {
    let s = w_norm * dt;
    StepCondition {
        bijective: s < T::one(),
        jacobian_bounded: s <= T::lit(0.25),
    }
}

/// Upwind images of every quadrature point of a mesh, located once per time step.
#[derive(Clone, Debug)]
pub struct UpwindMap<T> {
    rule: QuadratureRule<T>,
    /// `feet[k * nq + q]` is the located upwind point of quadrature point `q` of triangle `k`.
    feet: Vec<(usize, Bary<T>)>,
}

impl<T: Real> UpwindMap<T> {
    pub fn new<W: VelocityField<T> + ?Sized>(
        mesh: &TriMesh<T>,
        w: &W,
        t: T,
        dt: T,
        rule: &QuadratureRule<T>,
    ) -> Result<Self> {
        let mut feet = Vec::with_capacity(mesh.n_triangles() * rule.len());
        for k in 0..mesh.n_triangles() {
            for bary in &rule.points {
                let x = mesh.position(k, bary);
                let y = step_back(mesh, x, w.velocity_in(k, bary, x, t), dt)?;
                feet.push(mesh.locate(y, Some(k))?);
            }
        }
        Ok(Self {
            rule: rule.clone(),
            feet,
        })
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    /// Upwind foot `(triangle, bary)` of quadrature point `q` in triangle `k`.
    pub fn foot(&self, k: usize, q: usize) -> &(usize, Bary<T>) {
        &self.feet[k * self.rule.len() + q]
    }

    /// `(g ∘ X₁, φ)` for every test basis function `φ` of the space of `g`.
    ///
    /// Tensor components are weighted as in the Frobenius product.
    pub fn load(&self, g: &FeFunction<T>) -> Vec<T> {
        let mesh = g.mesh();
        let m = g.components();
        let weights: Vec<T> = (0..m)
            .map(|c| if g.kind() == FieldKind::SymTensor2 { sym_weight(c) } else { T::one() })
            .collect();
        let nq = self.rule.len();
        let mut out = vec![T::zero(); mesh.n_vertices() * m];
        let mut vals = vec![T::zero(); m];
        for (k, tri) in mesh.triangles.iter().enumerate() {
            let area = mesh.area(k);
            for (q, (bary, wq)) in self.rule.iter().enumerate() {
                let (foot, fb) = &self.feet[k * nq + q];
                for (c, v) in vals.iter_mut().enumerate() {
                    *v = weights[c] * g.eval_component(*foot, fb, c);
                }
                for a in 0..3 {
                    let phi = area * wq * bary[a];
                    for c in 0..m {
                        out[tri[a] * m + c] += phi * vals[c];
                    }
                }
            }
        }
        out
    }
}

/// `(g_prev ∘ X₁ⁿ, φ)` for all test functions `φ`, with `X₁ⁿ(x) = x - w(x, t) dt`.
pub fn transported_load<T: Real, W: VelocityField<T> + ?Sized>(
    g_prev: &FeFunction<T>,
    w: &W,
    t: T,
    dt: T,
    quad: &QuadratureRule<T>,
) -> Result<Vec<T>> {
    Ok(UpwindMap::new(g_prev.mesh(), w, t, dt, quad)?.load(g_prev))
}
