//! Exact element matrices of the P1 bilinear forms and their global assembly.
//!
//! Global layouts interleave components per node: dof `v * m + k`.

use crate::linalg::{CooBuilder, SparseMatrix};
use crate::mesh::TriMesh;
use crate::tensor::sym_weight;
use crate::Real;

/// `∫_K φ_a φ_b = |K| (1 + δ_ab) / 12`.
pub fn element_mass<T: Real>(area: T) -> [[T; 3]; 3] {
    let off = area / T::lit(12.0);
    let diag = off + off;
    let mut m = [[off; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = diag;
    }
    m
}

/// `∫_K ∇φ_a · ∇φ_b`.
pub fn element_stiffness<T: Real>(grads: &[[T; 2]; 3], area: T) -> [[T; 3]; 3] {
    let mut s = [[T::zero(); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            s[a][b] = area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
        }
    }
    s
}

/// `2 ∫_K D(φ_b e_l) : D(φ_a e_k)` at row `2a + k`, column `2b + l`.
pub fn element_au<T: Real>(grads: &[[T; 2]; 3], area: T) -> [[T; 6]; 6] {
    let mut m = [[T::zero(); 6]; 6];
    for a in 0..3 {
        for b in 0..3 {
            let gg = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
            for k in 0..2 {
                for l in 0..2 {
                    let diag = if k == l { gg } else { T::zero() };
                    m[2 * a + k][2 * b + l] = area * (diag + grads[a][l] * grads[b][k]);
                }
            }
        }
    }
    m
}

/// `-∫_K (div φ_b e_l) ψ_a` at row `a` (pressure), column `2b + l` (velocity).
pub fn element_b<T: Real>(grads: &[[T; 2]; 3], area: T) -> [[T; 6]; 3] {
    let third = area / T::lit(3.0);
    let mut m = [[T::zero(); 6]; 3];
    for row in m.iter_mut() {
        for b in 0..3 {
            for l in 0..2 {
                row[2 * b + l] = -third * grads[b][l];
            }
        }
    }
    m
}

fn scatter_blocks<T: Real>(
    mesh: &TriMesh<T>,
    components: usize,
    weights: &[T],
    element: impl Fn(usize) -> [[T; 3]; 3],
) -> SparseMatrix<T> {
    let n = mesh.n_vertices() * components;
    let mut coo = CooBuilder::with_capacity(n, n, 9 * components * mesh.n_triangles());
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let e = element(k);
        for a in 0..3 {
            for b in 0..3 {
                for (c, &w) in weights.iter().enumerate() {
                    coo.push(tri[a] * components + c, tri[b] * components + c, w * e[a][b]);
                }
            }
        }
    }
    coo.finalize().expect("element indices in range")
}

fn component_weights<T: Real>(components: usize) -> Vec<T> {
    if components == 3 {
        (0..3).map(sym_weight).collect()
    } else {
        vec![T::one(); components]
    }
}

/// L² mass matrix for 1, 2 or 3 interleaved components.
///
/// With 3 components the layout is `(T11, T12, T22)` and the `T12` block is
/// doubled, so `x^T M y` is the Frobenius inner product of symmetric tensors.
pub fn assemble_mass<T: Real>(mesh: &TriMesh<T>, components: usize) -> SparseMatrix<T> {
    assert!((1..=3).contains(&components), "mass matrix for {components} components");
    scatter_blocks(mesh, components, &component_weights(components), |k| {
        element_mass(mesh.area(k))
    })
}

/// `a_u(u, v) = 2 (D(u), D(v))` on 2-component velocity dofs.
pub fn assemble_au<T: Real>(mesh: &TriMesh<T>) -> SparseMatrix<T> {
    let n = 2 * mesh.n_vertices();
    let mut coo = CooBuilder::with_capacity(n, n, 36 * mesh.n_triangles());
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let e = element_au(mesh.basis_gradients(k), mesh.area(k));
        for (i, row) in e.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                coo.push(2 * tri[i / 2] + i % 2, 2 * tri[j / 2] + j % 2, v);
            }
        }
    }
    coo.finalize().expect("element indices in range")
}

/// `b(u, q) = -(div u, q)`: pressure rows, velocity columns.
pub fn assemble_b<T: Real>(mesh: &TriMesh<T>) -> SparseMatrix<T> {
    let nv = mesh.n_vertices();
    let mut coo = CooBuilder::with_capacity(nv, 2 * nv, 18 * mesh.n_triangles());
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let e = element_b(mesh.basis_gradients(k), mesh.area(k));
        for (a, row) in e.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                coo.push(tri[a], 2 * tri[j / 2] + j % 2, v);
            }
        }
    }
    coo.finalize().expect("element indices in range")
}

/// `S_h(p, q) = δ₀ Σ_K h_K² (∇p, ∇q)_K`.
pub fn assemble_sh<T: Real>(mesh: &TriMesh<T>, delta0: T) -> SparseMatrix<T> {
    scatter_blocks(mesh, 1, &[T::one()], |k| {
        let s = delta0 * mesh.h_k[k] * mesh.h_k[k];
        element_stiffness(mesh.basis_gradients(k), mesh.area(k)).map(|row| row.map(|v| s * v))
    })
}

/// `a_c(C, D) = (∇C, ∇D)` on `(C11, C12, C22)` dofs; the `C12` block counts twice.
pub fn assemble_ac<T: Real>(mesh: &TriMesh<T>) -> SparseMatrix<T> {
    scatter_blocks(mesh, 3, &component_weights(3), |k| {
        element_stiffness(mesh.basis_gradients(k), mesh.area(k))
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::fem::{FeFunction, FieldKind};
    use crate::quadrature::QuadratureRule;

    type Mesh = TriMesh<f64>;

    fn mesh(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::structured(n).unwrap())
    }

    fn random(m: &Arc<Mesh>, kind: FieldKind, seed: u64) -> FeFunction<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = m.n_vertices() * kind.components();
        FeFunction::from_coeffs(m.clone(), kind, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn integrate(m: &Mesh, mut g: impl FnMut(usize, &[f64; 3]) -> f64) -> f64 {
        let rule = QuadratureRule::degree2();
        (0..m.n_triangles())
            .map(|k| m.area(k) * rule.iter().map(|(b, w)| w * g(k, b)).sum::<f64>())
            .sum()
    }

    #[test]
    fn mass_sums_to_area() {
        let m = mesh(1);
        let a = assemble_mass(&m, 1);
        let total: f64 = a.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn element_mass_of_unit_right_triangle() {
        let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let a = assemble_mass(&m, 1).to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let e = 0.5 / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert!((a[i][j] - e).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn mass_is_positive_definite() {
        let m = mesh(3);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for comps in 1..=3 {
            let a = assemble_mass(&m, comps);
            for _ in 0..10 {
                let x: Vec<f64> = (0..a.n_rows()).map(|_| rng.random_range(-1.0..1.0)).collect();
                assert!(a.bilinear(&x, &x) > 0.0);
            }
        }
    }

    #[test]
    fn rigid_rotation_is_in_kernel_of_au() {
        let m = mesh(4);
        let u = FeFunction::interpolate_vector(m.clone(), |x| [x[1], -x[0]]);
        assert!(assemble_au(&m).bilinear(u.coeffs(), u.coeffs()).abs() < 1e-12);
    }

    #[test]
    fn stretching_energy_is_two() {
        let m = mesh(4);
        let u = FeFunction::interpolate_vector(m.clone(), |x| [x[0], 0.0]);
        assert!((assemble_au(&m).bilinear(u.coeffs(), u.coeffs()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_form() {
        let m = mesh(4);
        let b = assemble_b(&m);
        let rot = FeFunction::interpolate_vector(m.clone(), |x| [x[1], -x[0]]);
        assert!(b.mul_vec(rot.coeffs()).iter().all(|v| v.abs() < 1e-12));
        let stretch = FeFunction::interpolate_vector(m.clone(), |x| [x[0], 0.0]);
        let ones = vec![1.0; m.n_vertices()];
        assert!((b.bilinear(&ones, stretch.coeffs()) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stabilization_values() {
        let n = 6;
        let m = mesh(n);
        let s = assemble_sh(&m, 1.0);
        let ones = vec![1.0; m.n_vertices()];
        assert!(s.bilinear(&ones, &ones).abs() < 1e-13);
        let p = FeFunction::interpolate_scalar(m.clone(), |x| x[0]);
        let expected = 2.0 / (n * n) as f64;
        assert!((s.bilinear(p.coeffs(), p.coeffs()) - expected).abs() < 1e-13);
        let s2 = assemble_sh(&m, 2.0);
        for (a, b) in s.values().iter().zip(s2.values()) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn conformation_stiffness_values() {
        let m = mesh(4);
        let a = assemble_ac(&m);
        let c = FeFunction::interpolate_tensor(m.clone(), |_| crate::tensor::Sym2::new(1.0, 2.0, 3.0));
        assert!(a.bilinear(c.coeffs(), c.coeffs()).abs() < 1e-12);
        let d = FeFunction::interpolate_tensor(m.clone(), |x| crate::tensor::Sym2::new(x[0], 0.0, 0.0));
        assert!((a.bilinear(d.coeffs(), d.coeffs()) - 1.0).abs() < 1e-12);
        let o = FeFunction::interpolate_tensor(m.clone(), |x| crate::tensor::Sym2::new(0.0, x[0], 0.0));
        assert!((a.bilinear(o.coeffs(), o.coeffs()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_forms_are_symmetric() {
        let m = mesh(5);
        assert!(assemble_mass(&m, 3).max_asymmetry() <= 1e-14);
        assert!(assemble_au(&m).max_asymmetry() <= 1e-14);
        assert!(assemble_sh(&m, 1.0).max_asymmetry() <= 1e-14);
        assert!(assemble_ac(&m).max_asymmetry() <= 1e-14);
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn assembled_forms_match_quadrature() {
        let m = mesh(4);
        let mass1 = assemble_mass(&m, 1);
        let mass3 = assemble_mass(&m, 3);
        let au = assemble_au(&m);
        let b = assemble_b(&m);
        let sh = assemble_sh(&m, 0.7);
        let ac = assemble_ac(&m);
        for seed in 0..20 {
            let p = random(&m, FieldKind::Scalar, 100 + seed);
            let q = random(&m, FieldKind::Scalar, 200 + seed);
            let u = random(&m, FieldKind::Vector2, 300 + seed);
            let v = random(&m, FieldKind::Vector2, 400 + seed);
            let c = random(&m, FieldKind::SymTensor2, 500 + seed);
            let d = random(&m, FieldKind::SymTensor2, 600 + seed);

            let mq = integrate(&m, |k, x| p.eval_scalar(k, x) * q.eval_scalar(k, x));
            assert!(rel(mass1.bilinear(q.coeffs(), p.coeffs()), mq) < 1e-12);

            let mt = integrate(&m, |k, x| c.eval_tensor(k, x).ddot(&d.eval_tensor(k, x)));
            assert!(rel(mass3.bilinear(d.coeffs(), c.coeffs()), mt) < 1e-12);

            let aq = integrate(&m, |k, _| 2.0 * u.sym_grad(k).ddot(&v.sym_grad(k)));
            assert!(rel(au.bilinear(v.coeffs(), u.coeffs()), aq) < 1e-12);

            let bq = integrate(&m, |k, x| -u.div(k) * q.eval_scalar(k, x));
            assert!(rel(b.bilinear(q.coeffs(), u.coeffs()), bq) < 1e-12);

            let sq = integrate(&m, |k, _| {
                let (gp, gq) = (p.grad_component(k, 0), q.grad_component(k, 0));
                0.7 * m.h_k[k] * m.h_k[k] * (gp[0] * gq[0] + gp[1] * gq[1])
            });
            assert!(rel(sh.bilinear(q.coeffs(), p.coeffs()), sq) < 1e-12);

            let cq = integrate(&m, |k, _| {
                (0..3)
                    .map(|i| {
                        let (gc, gd) = (c.grad_component(k, i), d.grad_component(k, i));
                        sym_weight::<f64>(i) * (gc[0] * gd[0] + gc[1] * gd[1])
                    })
                    .sum()
            });
            assert!(rel(ac.bilinear(d.coeffs(), c.coeffs()), cq) < 1e-12);
        }
    }

    // Dense Cholesky succeeds exactly when the matrix is positive definite.
    fn cholesky_ok(mut a: Vec<Vec<f64>>) -> bool {
        let n = a.len();
        for j in 0..n {
            let d = a[j][j] - (0..j).map(|k| a[j][k] * a[j][k]).sum::<f64>();
            if d <= 1e-12 {
                return false;
            }
            a[j][j] = d.sqrt();
            for i in j + 1..n {
                let s = a[i][j] - (0..j).map(|k| a[i][k] * a[j][k]).sum::<f64>();
                a[i][j] = s / a[j][j];
            }
        }
        true
    }

    #[test]
    fn korn_positivity_on_interior_dofs() {
        let m = mesh(4);
        let a = assemble_au(&m).to_dense();
        let interior: Vec<usize> = (0..m.n_vertices())
            .filter(|&v| !m.boundary_vertex[v])
            .flat_map(|v| [2 * v, 2 * v + 1])
            .collect();
        let restricted: Vec<Vec<f64>> =
            interior.iter().map(|&i| interior.iter().map(|&j| a[i][j]).collect()).collect();
        assert!(cholesky_ok(restricted));
        let all: Vec<Vec<f64>> = a.clone();
        assert!(!cholesky_ok(all));
    }
}
