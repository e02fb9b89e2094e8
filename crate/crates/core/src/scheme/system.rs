//! Monolithic discretization: dof layout, linear part, residual and Jacobian.

use std::sync::Arc;

use super::{adjugate, Forcing, SchemeParams, StateTriple};
use crate::characteristics::{UpwindMap, VelocityField};
use crate::error::{Error, Result};
use crate::fem::{element_au, element_b, element_mass, element_stiffness, FeFunction, FieldKind};
use crate::linalg::SparseMatrix;
use crate::mesh::TriMesh;
use crate::quadrature::QuadratureRule;
use crate::tensor::{sym_basis, sym_weight, Mat2, Sym2};
use crate::Real;

/// Unknowns per vertex: `u1, u2, p, C11, C12, C22`.
pub const COMPONENTS: usize = 6;
pub(crate) const P: usize = 2;
pub(crate) const C0: usize = 3;
const LOCAL: usize = 3 * COMPONENTS;

type LocalMatrix<T> = [[T; LOCAL]; LOCAL];

/// Dof numbering and the fixed sparsity pattern of the coupled system.
///
/// Dof `6 v + k` is component `k` of vertex `v`; the last dof is the
/// multiplier enforcing `∫p = 0`.
#[derive(Clone, Debug)]
pub struct Layout<T> {
    mesh: Arc<TriMesh<T>>,
    pattern: SparseMatrix<T>,
    /// `slots[k][a][b]`: rank of vertex `tri[b]` among the neighbours of `tri[a]`.
    slots: Vec<[[usize; 3]; 3]>,
    /// `∫φ_v` for every vertex.
    pmass: Vec<T>,
}

impl<T: Real> Layout<T> {
    pub fn new(mesh: Arc<TriMesh<T>>) -> Self {
        let nv = mesh.n_vertices();
        let neighbors = mesh.vertex_neighbors();
        let mult = COMPONENTS * nv;
        let mut rows = Vec::with_capacity(mult + 1);
        for list in &neighbors {
            for k in 0..COMPONENTS {
                let mut cols: Vec<usize> =
                    list.iter().flat_map(|&w| (0..COMPONENTS).map(move |j| COMPONENTS * w + j)).collect();
                if k == P {
                    cols.push(mult);
                }
                rows.push(cols);
            }
        }
        let mut last: Vec<usize> = (0..nv).map(|v| COMPONENTS * v + P).collect();
        last.push(mult);
        rows.push(last);
        let pattern = SparseMatrix::from_pattern(mult + 1, &rows).expect("sorted pattern");

        let slots = mesh
            .triangles
            .iter()
            .map(|tri| {
                std::array::from_fn(|a| {
                    std::array::from_fn(|b| neighbors[tri[a]].binary_search(&tri[b]).expect("adjacent"))
                })
            })
            .collect();
        let mut pmass = vec![T::zero(); nv];
        for (k, tri) in mesh.triangles.iter().enumerate() {
            let third = mesh.area(k) / T::lit(3.0);
            for &v in tri {
                pmass[v] += third;
            }
        }
        Self {
            mesh,
            pattern,
            slots,
            pmass,
        }
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        COMPONENTS * self.mesh.n_vertices() + 1
    }

    pub fn multiplier(&self) -> usize {
        COMPONENTS * self.mesh.n_vertices()
    }

    pub fn dof(&self, v: usize, k: usize) -> usize {
        COMPONENTS * v + k
    }

    /// Whether `dof` is a velocity component at a boundary vertex.
    pub fn is_dirichlet(&self, dof: usize) -> bool {
        dof < self.multiplier() && dof % COMPONENTS < 2 && self.mesh.boundary_vertex[dof / COMPONENTS]
    }

    pub fn pattern(&self) -> &SparseMatrix<T> {
        &self.pattern
    }

    /// `∫φ_v` for every vertex.
    pub fn pressure_mass(&self) -> &[T] {
        &self.pmass
    }

    /// Storage index of local entry `(6a + i, 6b + j)` of triangle `k`.
    fn position(&self, k: usize, row: usize, col: usize) -> usize {
        let tri = self.mesh.triangles[k];
        let (a, i) = (row / COMPONENTS, row % COMPONENTS);
        let (b, j) = (col / COMPONENTS, col % COMPONENTS);
        self.pattern.row_offsets()[COMPONENTS * tri[a] + i] + COMPONENTS * self.slots[k][a][b] + j
    }

    fn global(&self, k: usize, local: usize) -> usize {
        COMPONENTS * self.mesh.triangles[k][local / COMPONENTS] + local % COMPONENTS
    }

    /// Adds a local element matrix, dropping Dirichlet rows and columns.
    fn scatter(&self, values: &mut [T], k: usize, local: &LocalMatrix<T>) {
        for (r, row) in local.iter().enumerate() {
            if self.is_dirichlet(self.global(k, r)) {
                continue;
            }
            for (c, &v) in row.iter().enumerate() {
                if v != T::zero() && !self.is_dirichlet(self.global(k, c)) {
                    values[self.position(k, r, c)] += v;
                }
            }
        }
    }

    /// Flattens a state into the system vector (multiplier set to 0).
    pub fn pack(&self, s: &StateTriple<T>) -> Vec<T> {
        let mut x = vec![T::zero(); self.n_dofs()];
        for v in 0..self.mesh.n_vertices() {
            let base = COMPONENTS * v;
            x[base..base + 2].copy_from_slice(s.u.node(v));
            x[base + P] = s.p.node(v)[0];
            x[base + C0..base + COMPONENTS].copy_from_slice(s.c.node(v));
        }
        x
    }

    pub fn unpack(&self, x: &[T], t: T) -> StateTriple<T> {
        let nv = self.mesh.n_vertices();
        let pick = |offset: usize, m: usize| -> Vec<T> {
            (0..nv).flat_map(|v| (0..m).map(move |k| COMPONENTS * v + offset + k)).map(|i| x[i]).collect()
        };
        let mk = |kind, c| FeFunction::from_coeffs(self.mesh.clone(), kind, c).expect("layout sizes");
        StateTriple {
            u: mk(FieldKind::Vector2, pick(0, 2)),
            p: mk(FieldKind::Scalar, pick(P, 1)),
            c: mk(FieldKind::SymTensor2, pick(C0, 3)),
            t,
        }
    }
}

/// The coupled system of one run: layout plus the state-independent matrix.
///
/// For a candidate `x` the residual is `L x + N(x) - b`, where `L` collects
/// mass/Δt, `ν a_u`, `b`, `-S_h`, `ε a_c` and the multiplier, `N` the
/// nonlinear element terms, and `b` the transported and forcing loads.
#[derive(Clone, Debug)]
pub struct System<T> {
    layout: Arc<Layout<T>>,
    params: SchemeParams<T>,
    linear: SparseMatrix<T>,
    rule: QuadratureRule<T>,
}

fn basis_mat<T: Real>(m: usize) -> Mat2<T> {
    sym_basis::<T>(m).to_mat()
}

impl<T: Real> System<T> {
    pub fn new(layout: Arc<Layout<T>>, params: SchemeParams<T>) -> Result<Self> {
        params.validate()?;
        let mesh = layout.mesh().clone();
        let mut linear = layout.pattern().clone();
        let inv_dt = T::one() / params.dt;
        {
            let values = linear.values_mut();
            for k in 0..mesh.n_triangles() {
                let grads = mesh.basis_gradients(k);
                let area = mesh.area(k);
                let mass = element_mass(area);
                let stiff = element_stiffness(grads, area);
                let au = element_au(grads, area);
                let bm = element_b(grads, area);
                let sh = params.delta0 * mesh.h_k[k] * mesh.h_k[k];
                let mut local = [[T::zero(); LOCAL]; LOCAL];
                for a in 0..3 {
                    for b in 0..3 {
                        let (ra, cb) = (COMPONENTS * a, COMPONENTS * b);
                        for i in 0..2 {
                            local[ra + i][cb + i] += inv_dt * mass[a][b];
                            for j in 0..2 {
                                local[ra + i][cb + j] += params.nu * au[2 * a + i][2 * b + j];
                            }
                            // b(v, p) in momentum rows, b(u, q) in continuity rows
                            local[ra + i][cb + P] += bm[b][2 * a + i];
                            local[ra + P][cb + i] += bm[a][2 * b + i];
                        }
                        local[ra + P][cb + P] -= sh * stiff[a][b];
                        for m in 0..3 {
                            let w = sym_weight::<T>(m);
                            local[ra + C0 + m][cb + C0 + m] += w * (inv_dt * mass[a][b] + params.eps * stiff[a][b]);
                        }
                    }
                }
                layout.scatter(values, k, &local);
            }
        }
        let mult = layout.multiplier();
        for v in 0..mesh.n_vertices() {
            let pv = layout.dof(v, P);
            let at = linear.position(pv, mult).expect("multiplier column");
            linear.values_mut()[at] = layout.pressure_mass()[v];
            let at = linear.position(mult, pv).expect("multiplier row");
            linear.values_mut()[at] = layout.pressure_mass()[v];
            for k in 0..2 {
                let d = layout.dof(v, k);
                if layout.is_dirichlet(d) {
                    let at = linear.position(d, d).expect("diagonal");
                    linear.values_mut()[at] = T::one();
                }
            }
        }
        Ok(Self {
            layout,
            params,
            linear,
            rule: QuadratureRule::degree5(),
        })
    }

    pub fn layout(&self) -> &Arc<Layout<T>> {
        &self.layout
    }

    pub fn params(&self) -> &SchemeParams<T> {
        &self.params
    }

    /// The state-independent part `L` of the Jacobian.
    pub fn linear_part(&self) -> &SparseMatrix<T> {
        &self.linear
    }

    pub fn quadrature(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    /// Load vector `b` of the step to time `t`: transported previous state
    /// over `Δt` plus the forcing at `t`. Dirichlet rows are zero.
    pub fn load<W, F>(&self, prev: &StateTriple<T>, w: &W, forcing: &F, t: T) -> Result<Vec<T>>
    where
        W: VelocityField<T> + ?Sized,
        F: Forcing<T> + ?Sized,
    {
        let mesh = self.layout.mesh();
        if prev.mesh().n_vertices() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch("previous state lives on another mesh".into()));
        }
        let dt = self.params.dt;
        let map = UpwindMap::new(mesh, w, t, dt, &self.rule)?;
        let lu = map.load(&prev.u);
        let lc = map.load(&prev.c);
        let mut b = vec![T::zero(); self.layout.n_dofs()];
        let inv_dt = T::one() / dt;
        for v in 0..mesh.n_vertices() {
            for k in 0..2 {
                b[self.layout.dof(v, k)] = inv_dt * lu[2 * v + k];
            }
            for m in 0..3 {
                b[self.layout.dof(v, C0 + m)] = inv_dt * lc[3 * v + m];
            }
        }
        for (k, tri) in mesh.triangles.iter().enumerate() {
            let area = mesh.area(k);
            for (bary, wq) in self.rule.iter() {
                let (f, big_f) = forcing.at(mesh.position(k, bary), t);
                let fc = big_f.components();
                for a in 0..3 {
                    let phi = area * wq * bary[a];
                    for i in 0..2 {
                        b[self.layout.dof(tri[a], i)] += phi * f[i];
                    }
                    for m in 0..3 {
                        b[self.layout.dof(tri[a], C0 + m)] += phi * sym_weight::<T>(m) * fc[m];
                    }
                }
            }
        }
        for (i, bi) in b.iter_mut().enumerate() {
            if self.layout.is_dirichlet(i) {
                *bi = T::zero();
            }
        }
        Ok(b)
    }

    /// Element-wise nonlinear terms; fills the residual and/or Jacobian values.
    fn nonlinear(&self, x: &[T], mut res: Option<&mut [T]>, mut jac: Option<&mut [T]>) {
        let layout = &self.layout;
        let mesh = layout.mesh();
        let two = T::lit(2.0);
        let basis: [Mat2<T>; 3] = std::array::from_fn(basis_mat);
        let traces: [T; 3] = std::array::from_fn(|m| basis[m].trace());
        let adj_basis: [Mat2<T>; 3] = std::array::from_fn(|m| adjugate(&sym_basis::<T>(m)).to_mat());
        for (k, tri) in mesh.triangles.iter().enumerate() {
            let g = mesh.basis_gradients(k);
            let area = mesh.area(k);
            let node = |a: usize, c: usize| x[COMPONENTS * tri[a] + c];
            let mut grad_u = Mat2::zero();
            for a in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        grad_u.m[i][j] += node(a, i) * g[a][j];
                    }
                }
            }
            let div_u = grad_u.trace();
            let cs: [Sym2<T>; 3] = std::array::from_fn(|a| Sym2::new(node(a, C0), node(a, C0 + 1), node(a, C0 + 2)));

            // State-independent pieces of the C-C Jacobian block within this element.
            let mut cc = [[T::zero(); 3]; 3];
            for (m, em) in basis.iter().enumerate() {
                for n in 0..3 {
                    cc[m][n] = -two * grad_u.matmul(&basis[n]).ddot(em) - div_u * adj_basis[n].ddot(em)
                        - traces[n] * traces[m];
                }
            }

            let mut r_loc = [T::zero(); LOCAL];
            let mut j_loc = [[T::zero(); LOCAL]; LOCAL];
            for (bary, wq) in self.rule.iter() {
                let wa = wq * area;
                let c = cs[0] * bary[0] + cs[1] * bary[1] + cs[2] * bary[2];
                let cm = c.to_mat();
                let tr = c.trace();
                let gc = grad_u.mul_sym(&c);
                let c_adj = adjugate(&c).to_mat();
                let mut conf = [T::zero(); 3];
                for (m, em) in basis.iter().enumerate() {
                    conf[m] = -two * gc.ddot(em) - div_u * c_adj.ddot(em) + tr * tr * cm.ddot(em) - tr * traces[m];
                }
                let cg: [[T; 2]; 3] = std::array::from_fn(|a| cm.mul_vec(g[a]));
                if res.is_some() {
                    for a in 0..3 {
                        for i in 0..2 {
                            r_loc[COMPONENTS * a + i] += wa * tr * cg[a][i];
                        }
                        for m in 0..3 {
                            r_loc[COMPONENTS * a + C0 + m] += wa * bary[a] * conf[m];
                        }
                    }
                }
                if jac.is_some() {
                    for a in 0..3 {
                        let ra = COMPONENTS * a;
                        for b in 0..3 {
                            let cb = COMPONENTS * b;
                            // momentum rows, conformation columns
                            for n in 0..3 {
                                let eg = basis[n].mul_vec(g[a]);
                                for i in 0..2 {
                                    j_loc[ra + i][cb + C0 + n] += wa * bary[b] * (traces[n] * cg[a][i] + tr * eg[i]);
                                }
                            }
                            // conformation rows, velocity columns: δG = e_l ⊗ ∇φ_b
                            for l in 0..2 {
                                let mut dg_c = Mat2::zero();
                                dg_c.m[l] = cg[b];
                                let dtr = g[b][l];
                                for (m, em) in basis.iter().enumerate() {
                                    j_loc[ra + C0 + m][cb + l] +=
                                        wa * bary[a] * (-two * dg_c.ddot(em) - dtr * c_adj.ddot(em));
                                }
                            }
                            // conformation rows, conformation columns
                            let ab = wa * bary[a] * bary[b];
                            for (m, em) in basis.iter().enumerate() {
                                let cem = cm.ddot(em);
                                for n in 0..3 {
                                    let quad = two * tr * traces[n] * cem + tr * tr * basis[n].ddot(em);
                                    j_loc[ra + C0 + m][cb + C0 + n] += ab * (cc[m][n] + quad);
                                }
                            }
                        }
                    }
                }
            }
            if let Some(r) = res.as_deref_mut() {
                for (l, &v) in r_loc.iter().enumerate() {
                    let d = layout.global(k, l);
                    if !layout.is_dirichlet(d) {
                        r[d] += v;
                    }
                }
            }
            if let Some(jv) = jac.as_deref_mut() {
                layout.scatter(jv, k, &j_loc);
            }
        }
    }

    /// `R(x) = L x + N(x) - b`.
    pub fn residual(&self, x: &[T], b: &[T]) -> Vec<T> {
        let mut r = self.linear.mul_vec(x);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri -= bi;
        }
        self.nonlinear(x, Some(&mut r), None);
        r
    }

    /// Analytic Jacobian `L + N'(x)`.
    pub fn jacobian(&self, x: &[T]) -> SparseMatrix<T> {
        let mut j = self.linear.clone();
        self.nonlinear(x, None, Some(j.values_mut()));
        j
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::characteristics::ZeroVelocity;
    use crate::linalg::norm2;
    use crate::scheme::ZeroForcing;

    fn setup(n: usize, params: SchemeParams<f64>) -> System<f64> {
        let mesh = Arc::new(TriMesh::structured(n).unwrap());
        System::new(Arc::new(Layout::new(mesh)), params).unwrap()
    }

    fn random_state(sys: &System<f64>, seed: u64) -> Vec<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let l = sys.layout();
        (0..l.n_dofs())
            .map(|i| if l.is_dirichlet(i) { 0.0 } else { rng.random_range(-1.0..1.0) })
            .collect()
    }

    #[test]
    fn pack_unpack_round_trip() {
        let sys = setup(3, SchemeParams::new(0.1, 0.1, 0.1, 0.5));
        let mut x = random_state(&sys, 1);
        let m = sys.layout().multiplier();
        x[m] = 0.0;
        let s = sys.layout().unpack(&x, 0.0);
        assert_eq!(sys.layout().pack(&s), x);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let sys = setup(4, SchemeParams::new(0.1, 0.1, 0.1, 0.5));
        let mesh = sys.layout().mesh().clone();
        let prev = StateTriple::zeros(mesh, 0.0);
        let b = sys.load(&prev, &ZeroVelocity, &ZeroForcing, 0.1).unwrap();
        let x = vec![0.0; sys.layout().n_dofs()];
        assert_eq!(norm2(&sys.residual(&x, &b)), 0.0);
    }

    #[test]
    fn constant_conformation_reduces_to_scalar_map() {
        let dt = 0.1;
        let sys = setup(4, SchemeParams::new(0.1, 0.3, dt, 0.5));
        let l = sys.layout();
        let mesh = l.mesh().clone();
        let (c, c_prev) = (0.8, 0.5);
        let mut prev = StateTriple::zeros(mesh.clone(), 0.0);
        prev.c = FeFunction::interpolate_tensor(mesh.clone(), |_| Sym2::new(c_prev, 0.0, c_prev));
        let b = sys.load(&prev, &ZeroVelocity, &ZeroForcing, dt).unwrap();
        let mut cand = StateTriple::zeros(mesh.clone(), dt);
        cand.c = FeFunction::interpolate_tensor(mesh.clone(), |_| Sym2::new(c, 0.0, c));
        let r = sys.residual(&l.pack(&cand), &b);
        let scalar = (c - c_prev) / dt + 4.0 * c * c * c - 2.0 * c;
        for v in 0..mesh.n_vertices() {
            let mass = l.pressure_mass()[v];
            assert!((r[l.dof(v, C0)] - scalar * mass).abs() < 1e-12);
            assert!((r[l.dof(v, C0 + 2)] - scalar * mass).abs() < 1e-12);
            assert!(r[l.dof(v, C0 + 1)].abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let sys = setup(3, SchemeParams::new(0.1, 0.05, 0.1, 0.5));
        let b = random_state(&sys, 7);
        for seed in 0..5 {
            let x = random_state(&sys, 100 + seed);
            let d = random_state(&sys, 200 + seed);
            let jd = sys.jacobian(&x).mul_vec(&d);
            let h = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - h * b).collect();
            let fd: Vec<f64> = sys
                .residual(&xp, &b)
                .iter()
                .zip(sys.residual(&xm, &b))
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect();
            let diff: Vec<f64> = jd.iter().zip(&fd).map(|(a, b)| a - b).collect();
            assert!(norm2(&diff) <= 1e-6 * norm2(&fd), "{} vs {}", norm2(&diff), norm2(&fd));
        }
    }

    #[test]
    fn stokes_block_is_symmetric() {
        let sys = setup(4, SchemeParams::new(0.7, 0.1, 0.1, 0.5));
        let l = sys.layout();
        let j = sys.jacobian(&random_state(&sys, 3));
        let is_up = |d: usize| d == l.multiplier() || d % COMPONENTS < C0;
        let mut worst = 0.0f64;
        for (r, c, v) in j.triplets() {
            if is_up(r) && is_up(c) && !l.is_dirichlet(r) && !l.is_dirichlet(c) {
                worst = worst.max((v - j.get(c, r)).abs());
            }
        }
        assert!(worst <= 1e-12, "{worst}");
    }
}
