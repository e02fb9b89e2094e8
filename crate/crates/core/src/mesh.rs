//! Conforming triangulations of the unit square and point location.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tensor::Point;
use crate::Real;

/// Points this far outside the domain are snapped back onto the boundary.
pub const SNAP_TOLERANCE: f64 = 1e-10;
const BOUNDARY_TOLERANCE: f64 = 1e-12;
const INSIDE_TOLERANCE: f64 = 1e-12;

/// Barycentric coordinates of a point with respect to one triangle.
pub type Bary<T> = [T; 3];

#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    pub vertices: Vec<Point<T>>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_vertex: Vec<bool>,
    /// Diameter (longest edge) of each triangle.
    pub h_k: Vec<T>,
    pub h: T,
    /// Division count when built by [`TriMesh::structured`].
    pub structured_n: Option<usize>,
    areas: Vec<T>,
    /// Gradients of the three barycentric coordinates, constant per triangle.
    grads: Vec<[[T; 2]; 3]>,
    /// `neighbors[k][i]` is the triangle across the edge opposite local vertex `i`.
    neighbors: Vec<[Option<usize>; 3]>,
    lower: Point<T>,
    upper: Point<T>,
}

impl<T: Real> TriMesh<T> {
    /// Uniform Friedrichs-Keller triangulation with `n` divisions per side.
    ///
    /// Every grid cell is split along its lower-left to upper-right diagonal.
    /// Cell `(i, j)` owns triangles `2c` (below the diagonal) and `2c + 1`
    /// (above it), where `c = j * n + i`.
    pub fn structured(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDivision);
        }
        let inv_n = T::one() / T::from_count(n);
        let stride = n + 1;
        let mut vertices = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                let x = if i == n { T::one() } else { T::from_count(i) * inv_n };
                let y = if j == n { T::one() } else { T::from_count(j) * inv_n };
                vertices.push([x, y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let mut mesh = Self::from_parts(vertices, triangles)?;
        mesh.structured_n = Some(n);
        Ok(mesh)
    }

    /// Builds a mesh from raw vertices and counterclockwise triangles.
    pub fn from_parts(vertices: Vec<Point<T>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        let mut h_k = Vec::with_capacity(triangles.len());
        for (k, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::MeshFormat {
                    line: 0,
                    message: format!("triangle {k} references a missing vertex"),
                });
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let twice_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if twice_area <= T::zero() {
                return Err(Error::MeshFormat {
                    line: 0,
                    message: format!("triangle {k} is not counterclockwise"),
                });
            }
            // grad(lambda_i) = rot90(edge opposite i) / (2 |K|)
            let inv = T::one() / twice_area;
            let g = [
                [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
                [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
                [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
            ];
            let edge = |p: Point<T>, q: Point<T>| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            h_k.push(edge(a, b).max(edge(b, c)).max(edge(c, a)));
            areas.push(twice_area * T::lit(0.5));
            grads.push(g);
        }

        let mut edge_owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut neighbors = vec![[None; 3]; triangles.len()];
        for (k, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (p, q) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let key = (p.min(q), p.max(q));
                match edge_owner.remove(&key) {
                    Some((other, oi)) => {
                        neighbors[k][i] = Some(other);
                        neighbors[other][oi] = Some(k);
                    }
                    None => {
                        edge_owner.insert(key, (k, i));
                    }
                }
            }
        }

        let mut lower = [T::infinity(); 2];
        let mut upper = [T::neg_infinity(); 2];
        for v in &vertices {
            for d in 0..2 {
                lower[d] = lower[d].min(v[d]);
                upper[d] = upper[d].max(v[d]);
            }
        }
        let tol = T::lit(BOUNDARY_TOLERANCE);
        let boundary_vertex = vertices
            .iter()
            .map(|v| v.iter().any(|&x| x.abs() <= tol || (x - T::one()).abs() <= tol))
            .collect();
        let h = h_k.iter().copied().fold(T::zero(), T::max);
        Ok(Self {
            vertices,
            triangles,
            boundary_vertex,
            h_k,
            h,
            structured_n: None,
            areas,
            grads,
            neighbors,
            lower,
            upper,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, k: usize) -> T {
        self.areas[k]
    }

    /// Gradients of the three P1 basis functions on triangle `k`.
    pub fn basis_gradients(&self, k: usize) -> &[[T; 2]; 3] {
        &self.grads[k]
    }

    pub fn triangle_neighbors(&self, k: usize) -> [Option<usize>; 3] {
        self.neighbors[k]
    }

    /// Physical position of barycentric coordinates on triangle `k`.
    pub fn position(&self, k: usize, bary: &Bary<T>) -> Point<T> {
        let tri = self.triangles[k];
        let mut p = [T::zero(); 2];
        for i in 0..3 {
            let v = self.vertices[tri[i]];
            p[0] += bary[i] * v[0];
            p[1] += bary[i] * v[1];
        }
        p
    }

    /// Barycentric coordinates of `p` with respect to triangle `k` (unclamped).
    pub fn barycentric(&self, k: usize, p: Point<T>) -> Bary<T> {
        let tri = self.triangles[k];
        let a = self.vertices[tri[0]];
        let g = &self.grads[k];
        let dx = p[0] - a[0];
        let dy = p[1] - a[1];
        let l1 = g[1][0] * dx + g[1][1] * dy;
        let l2 = g[2][0] * dx + g[2][1] * dy;
        [T::one() - l1 - l2, l1, l2]
    }

    /// Sorted vertex neighbourhoods (each list includes the vertex itself).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = (0..self.n_vertices()).map(|v| vec![v]).collect();
        for tri in &self.triangles {
            for &a in tri {
                for &b in tri {
                    adj[a].push(b);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Whether `p` lies in the bounding box of the mesh, up to `tol`.
    pub fn contains(&self, p: Point<T>, tol: T) -> bool {
        (0..2).all(|d| p[d] >= self.lower[d] - tol && p[d] <= self.upper[d] + tol)
    }

    /// Clamps a point lying within [`SNAP_TOLERANCE`] of the domain onto it.
    pub fn snap(&self, p: Point<T>) -> Result<Point<T>> {
        if !self.contains(p, T::lit(SNAP_TOLERANCE)) {
            return Err(Error::PointOutsideDomain {
                x: p[0].to_f64_lossy(),
                y: p[1].to_f64_lossy(),
            });
        }
        Ok([
            p[0].max(self.lower[0]).min(self.upper[0]),
            p[1].max(self.lower[1]).min(self.upper[1]),
        ])
    }

    /// Finds a triangle containing `p` and the barycentric coordinates of `p` in it.
    ///
    /// Structured meshes use direct index arithmetic; other meshes walk from
    /// `hint` towards the point.
    pub fn locate(&self, p: Point<T>, hint: Option<usize>) -> Result<(usize, Bary<T>)> {
        let p = self.snap(p)?;
        match self.structured_n {
            Some(n) => Ok(self.locate_structured(n, p)),
            None => self.locate_walking(p, hint.unwrap_or(0)),
        }
    }

    fn locate_structured(&self, n: usize, p: Point<T>) -> (usize, Bary<T>) {
        let nf = T::from_count(n);
        let cell = |x: T| -> (usize, T) {
            let scaled = x * nf;
            let i = scaled.floor().to_usize().unwrap_or(0).min(n - 1);
            (i, scaled - T::from_count(i))
        };
        let (i, s) = cell(p[0]);
        let (j, t) = cell(p[1]);
        let c = j * n + i;
        if s >= t {
            (2 * c, [T::one() - s, s - t, t])
        } else {
            (2 * c + 1, [T::one() - t, s, t - s])
        }
    }

    fn locate_walking(&self, p: Point<T>, start: usize) -> Result<(usize, Bary<T>)> {
        let tol = T::lit(INSIDE_TOLERANCE);
        let mut k = start.min(self.n_triangles().saturating_sub(1));
        for _ in 0..self.n_triangles() {
            let bary = self.barycentric(k, p);
            let (worst, min) = bary
                .iter()
                .enumerate()
                .fold((0, T::infinity()), |acc, (i, &l)| if l < acc.1 { (i, l) } else { acc });
            if min >= -tol {
                return Ok((k, bary));
            }
            match self.neighbors[k][worst] {
                Some(next) => k = next,
                None => break,
            }
        }
        // The walk can stall on non-convex domains; fall back to a full scan.
        let best = (0..self.n_triangles())
            .map(|k| {
                let bary = self.barycentric(k, p);
                (k, bary, bary.iter().copied().fold(T::infinity(), T::min))
            })
            .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal));
        match best {
            Some((k, bary, min)) if min >= -tol => Ok((k, bary)),
            _ => Err(Error::PointOutsideDomain {
                x: p[0].to_f64_lossy(),
                y: p[1].to_f64_lossy(),
            }),
        }
    }

    /// Writes the plain-text interchange format: `nv nt`, vertices, triangles.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "{} {}", self.n_vertices(), self.n_triangles()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{} {}", v[0], v[1]).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Reads the plain-text interchange format written by [`TriMesh::write_text`].
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
            match lines.next() {
                Some((i, line)) => Ok((i + 1, line?.split_whitespace().map(str::to_owned).collect())),
                None => Err(Error::MeshFormat {
                    line: 0,
                    message: format!("unexpected end of input, expected {what}"),
                }),
            }
        };
        let bad = |line: usize, message: &str| Error::MeshFormat {
            line,
            message: message.to_owned(),
        };

        let (line, header) = next("header")?;
        if header.len() != 2 {
            return Err(bad(line, "expected \"nv nt\""));
        }
        let nv: usize = header[0].parse().map_err(|_| bad(line, "invalid vertex count"))?;
        let nt: usize = header[1].parse().map_err(|_| bad(line, "invalid triangle count"))?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, f) = next("vertex")?;
            if f.len() != 2 {
                return Err(bad(line, "expected \"x y\""));
            }
            let mut xy = [T::zero(); 2];
            for d in 0..2 {
                let v: f64 = f[d].parse().map_err(|_| bad(line, "invalid coordinate"))?;
                xy[d] = T::lit(v);
            }
            vertices.push(xy);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (line, f) = next("triangle")?;
            if f.len() != 3 {
                return Err(bad(line, "expected \"i j k\""));
            }
            let mut ijk = [0usize; 3];
            for d in 0..3 {
                ijk[d] = f[d].parse().map_err(|_| bad(line, "invalid vertex index"))?;
                if ijk[d] >= nv {
                    return Err(bad(line, "vertex index out of range"));
                }
            }
            triangles.push(ijk);
        }
        Self::from_parts(vertices, triangles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_structured_mesh() {
        let m = TriMesh::<f64>::structured(1).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 2);
        assert!((m.h - 2f64.sqrt()).abs() < 1e-15);
        assert!(m.boundary_vertex.iter().all(|&b| b));
    }

    #[test]
    fn zero_divisions_rejected() {
        assert!(matches!(TriMesh::<f64>::structured(0), Err(Error::InvalidDivision)));
    }

    #[test]
    fn counts_for_n32() {
        let m = TriMesh::<f64>::structured(32).unwrap();
        assert_eq!(m.n_vertices(), 1089);
        assert_eq!(m.n_triangles(), 2048);
    }

    #[test]
    fn centre_is_interior_for_n2() {
        let m = TriMesh::<f64>::structured(2).unwrap();
        let centre = m.vertices.iter().position(|v| *v == [0.5, 0.5]).unwrap();
        assert!(!m.boundary_vertex[centre]);
        assert_eq!(m.boundary_vertex.iter().filter(|&&b| !b).count(), 1);
    }

    #[test]
    fn locate_lower_triangle_of_first_cell() {
        let m = TriMesh::<f64>::structured(2).unwrap();
        let (k, bary) = m.locate([0.25, 0.1], None).unwrap();
        assert_eq!(k, 0);
        assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(bary.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn locate_on_shared_edge() {
        let m = TriMesh::<f64>::structured(2).unwrap();
        // On the diagonal of cell (0, 0): the vertex opposite the diagonal gets 0.
        let (k, bary) = m.locate([0.2, 0.2], None).unwrap();
        let opposite = if k == 0 { 1 } else { 2 };
        assert!(k == 0 || k == 1);
        assert_eq!(bary[opposite], 0.0);
    }

    #[test]
    fn locate_rejects_far_points_and_snaps_near_ones() {
        let m = TriMesh::<f64>::structured(4).unwrap();
        assert!(matches!(
            m.locate([1.0 + 1e-6, 0.5], None),
            Err(Error::PointOutsideDomain { .. })
        ));
        let (k, bary) = m.locate([1.0 + 1e-11, -1e-11], None).unwrap();
        let p = m.position(k, &bary);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
    }

    #[test]
    fn structured_and_walking_agree() {
        let m = TriMesh::<f64>::structured(5).unwrap();
        let general = TriMesh::from_parts(m.vertices.clone(), m.triangles.clone()).unwrap();
        for &p in &[[0.13, 0.77], [0.91, 0.05], [0.5, 0.5], [0.0, 1.0]] {
            let (k1, b1) = m.locate(p, None).unwrap();
            let (k2, b2) = general.locate(p, Some(17)).unwrap();
            let q1 = m.position(k1, &b1);
            let q2 = general.position(k2, &b2);
            assert!((q1[0] - q2[0]).abs() < 1e-14 && (q1[1] - q2[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_clockwise_triangles() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(TriMesh::from_parts(v, vec![[0, 2, 1]]).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let m = TriMesh::<f64>::structured(3).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("16 18\n0 0\n"));
        let back = TriMesh::<f64>::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary_vertex, m.boundary_vertex);
    }

    #[test]
    fn text_format_errors_name_the_line() {
        let err = TriMesh::<f64>::read_text("2 0\n0 0\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MeshFormat { line: 3, .. }));
    }
}
