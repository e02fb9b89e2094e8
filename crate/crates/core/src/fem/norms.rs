use crate::fem::{element_mass, FeFunction, FieldKind};
use crate::tensor::sym_weight;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms<T> {
    pub l2: T,
    pub h1_semi: T,
}

impl<T: Real> Norms<T> {
    /// Full H¹ norm.
    pub fn h1(&self) -> T {
        (self.l2 * self.l2 + self.h1_semi * self.h1_semi).sqrt()
    }
}

fn weight<T: Real>(kind: FieldKind, k: usize) -> T {
    if kind == FieldKind::SymTensor2 {
        sym_weight(k)
    } else {
        T::one()
    }
}

/// L² norm and H¹ seminorm, integrated exactly. Tensors use the Frobenius norm.
pub fn norms<T: Real>(f: &FeFunction<T>) -> Norms<T> {
    let mesh = f.mesh();
    let m = f.components();
    let mut l2 = T::zero();
    let mut semi = T::zero();
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.area(k);
        let mass = element_mass(area);
        for c in 0..m {
            let w = weight::<T>(f.kind(), c);
            let v = tri.map(|i| f.coeffs()[i * m + c]);
            let mut q = T::zero();
            for a in 0..3 {
                for b in 0..3 {
                    q += v[a] * mass[a][b] * v[b];
                }
            }
            let g = f.grad_component(k, c);
            l2 += w * q;
            semi += w * area * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    Norms {
        l2: l2.max(T::zero()).sqrt(),
        h1_semi: semi.sqrt(),
    }
}

/// `|p|_h = (Σ_K h_K² ‖∇p‖²_K)^{1/2}` with `h_K` the element diameter.
pub fn pressure_h_seminorm<T: Real>(p: &FeFunction<T>) -> T {
    let mesh = p.mesh();
    (0..mesh.n_triangles())
        .map(|k| {
            let g = p.grad_component(k, 0);
            mesh.h_k[k] * mesh.h_k[k] * mesh.area(k) * (g[0] * g[0] + g[1] * g[1])
        })
        .sum::<T>()
        .sqrt()
}
