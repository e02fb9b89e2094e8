//! Fixed-size 2D vectors and 2x2 matrices used at quadrature points.

use std::ops::{Add, Mul, Neg, Sub};

use crate::Real;

pub type Point<T> = [T; 2];
pub type Vec2<T> = [T; 2];

/// General 2x2 matrix, row-major: `m[i][j]` is row `i`, column `j`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

/// Symmetric 2x2 matrix stored as `(xx, xy, yy)`; `yx` is `xy` by construction.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    /// Frobenius product `A : B = sum_ij A_ij B_ij`.
    pub fn ddot(&self, other: &Self) -> T {
        self.m[0][0] * other.m[0][0]
            + self.m[0][1] * other.m[0][1]
            + self.m[1][0] * other.m[1][0]
            + self.m[1][1] * other.m[1][1]
    }

    /// Symmetric part `(A + A^T) / 2`.
    pub fn sym(&self) -> Sym2<T> {
        let half = T::lit(0.5);
        Sym2::new(self.m[0][0], half * (self.m[0][1] + self.m[1][0]), self.m[1][1])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let a = &self.m;
        let b = &other.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn mul_sym(&self, s: &Sym2<T>) -> Self {
        self.matmul(&s.to_mat())
    }

    pub fn mul_vec(&self, v: Vec2<T>) -> Vec2<T> {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn norm_frobenius(&self) -> T {
        self.ddot(self).sqrt()
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-T::one())
    }
}

impl<T: Real> Sym2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { xx, xy, yy }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::one())
    }

    /// Builds from the `(T11, T12, T22)` component triple.
    pub fn from_components(c: [T; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn components(&self) -> [T; 3] {
        [self.xx, self.xy, self.yy]
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn to_mat(&self) -> Mat2<T> {
        Mat2::new(self.xx, self.xy, self.xy, self.yy)
    }

    /// Frobenius product; the off-diagonal entry counts twice.
    pub fn ddot(&self, o: &Self) -> T {
        self.xx * o.xx + T::lit(2.0) * self.xy * o.xy + self.yy * o.yy
    }

    pub fn ddot_mat(&self, o: &Mat2<T>) -> T {
        self.to_mat().ddot(o)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn norm_frobenius(&self) -> T {
        self.ddot(self).sqrt()
    }
}

impl<T: Real> Add for Sym2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl<T: Real> Sub for Sym2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl<T: Real> Neg for Sym2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for Sym2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// The symmetric basis tensor for component `k` of the `(T11, T12, T22)` layout.
///
/// The off-diagonal basis element has ones in both off-diagonal slots.
pub fn sym_basis<T: Real>(k: usize) -> Sym2<T> {
    match k {
        0 => Sym2::new(T::one(), T::zero(), T::zero()),
        1 => Sym2::new(T::zero(), T::one(), T::zero()),
        2 => Sym2::new(T::zero(), T::zero(), T::one()),
        _ => panic!("symmetric tensor component {k} out of range"),
    }
}

/// Weight of component `k` in the Frobenius product of symmetric tensors.
pub fn sym_weight<T: Real>(k: usize) -> T {
    if k == 1 {
        T::lit(2.0)
    } else {
        T::one()
    }
}

pub fn dot<T: Real>(a: Vec2<T>, b: Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}
