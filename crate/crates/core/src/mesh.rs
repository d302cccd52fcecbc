//! Closed oriented triangulations carrying an intrinsic metric.
//!
//! The metric lives in the edge lengths, not in an embedding: the flat torus
//! has no smooth isometric embedding and conformal changes are pure length
//! rescalings. Positions, when present, are generator metadata used for
//! distance estimates and OFF round trips.

use std::collections::HashMap;

use thiserror::Error;

/// Relative area floor below which a face counts as degenerate.
pub const DEGENERATE_AREA_FLOOR: f64 = 1e-14;

/// Resource guard for icosphere subdivision depth.
pub const MAX_SUBDIVISIONS: u32 = 8;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("vertex index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { index: usize, vertex_count: usize },
    #[error("face {face} repeats a vertex")]
    RepeatedVertex { face: usize },
    #[error("edge ({a}, {b}) lies on {count} faces; a closed surface needs exactly 2")]
    NotClosed { a: usize, b: usize, count: usize },
    #[error("edge ({a}, {b}) is traversed twice in the same direction; orientation is inconsistent")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("edge ({a}, {b}) has non-positive length {length}")]
    NonPositiveLength { a: usize, b: usize, length: f64 },
    #[error("face {face} violates the strict triangle inequality: lengths ({a}, {b}, {c})")]
    TriangleInequality { face: usize, a: f64, b: f64, c: f64 },
    #[error("face {face} is degenerate: area {area:.3e} below {floor:.3e} x mean area")]
    DegenerateFace { face: usize, area: f64, floor: f64 },
    #[error("V - E + F = {chi} is odd; not a closed surface")]
    OddEulerCharacteristic { chi: i64 },
    #[error("subdivision level {requested} exceeds the resource guard ({max})")]
    SubdivisionGuard { requested: u32, max: u32 },
    #[error("torus grid must be at least 3 x 3, got {n} x {m}")]
    GridTooSmall { n: usize, m: usize },
    #[error("non-finite conformal factor at vertex {vertex}")]
    NonFiniteFactor { vertex: usize },
    #[error("radius must be positive, got {radius}")]
    NonPositiveRadius { radius: f64 },
    #[error("side lengths must be positive, got {a} x {b}")]
    NonPositiveSide { a: f64, b: f64 },
}

/// A closed oriented triangulation with intrinsic edge lengths.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    edge_lengths: Vec<f64>,
    /// Optional embedding, used only for generation and distance estimates.
    pub positions: Option<Vec<[f64; 3]>>,
    /// Optional per-vertex tags.
    pub labels: Option<Vec<String>>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Numerically stable triangle area from edge lengths (Kahan's ordering).
pub fn triangle_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let (a, b, c) = (s[0], s[1], s[2]);
    let t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if t <= 0.0 {
        0.0
    } else {
        0.25 * t.sqrt()
    }
}

impl TriangleMesh {
    /// Assemble and validate a mesh from faces and a per-edge length lookup.
    pub fn from_faces_and_lengths(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        length_of: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, MeshError> {
        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        for face in &faces {
            for k in 0..3 {
                let key = edge_key(face[k], face[(k + 1) % 3]);
                edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
        }
        // canonical edge order: sorted pairs
        edges.sort();
        for (i, &e) in edges.iter().enumerate() {
            edge_index.insert(e, i);
        }
        let edge_lengths: Vec<f64> = edges.iter().map(|&(a, b)| length_of(a, b)).collect();
        let mesh = Self {
            vertex_count,
            faces,
            edges,
            edge_index,
            edge_lengths,
            positions: None,
            labels: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Assemble from an embedding; edge lengths are Euclidean distances.
    pub fn from_positions(
        positions: Vec<[f64; 3]>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        let dist = |a: usize, b: usize| {
            let (p, q) = (positions[a], positions[b]);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
        };
        let mut mesh = Self::from_faces_and_lengths(positions.len(), faces, dist)?;
        mesh.positions = Some(positions);
        Ok(mesh)
    }

    fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertex_count;
        // index range and distinct corners
        for (f, face) in self.faces.iter().enumerate() {
            for &v in face {
                if v >= n {
                    return Err(MeshError::IndexOutOfRange {
                        index: v,
                        vertex_count: n,
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(MeshError::RepeatedVertex { face: f });
            }
        }
        // closedness and orientation: every undirected edge on exactly two
        // faces, once per direction
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for face in &self.faces {
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                *undirected.entry(edge_key(a, b)).or_insert(0) += 1;
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        let mut keys: Vec<_> = undirected.keys().copied().collect();
        keys.sort();
        for (a, b) in keys {
            let count = undirected[&(a, b)];
            if count != 2 {
                return Err(MeshError::NotClosed { a, b, count });
            }
            if directed.get(&(a, b)) != Some(&1) || directed.get(&(b, a)) != Some(&1) {
                return Err(MeshError::InconsistentOrientation { a, b });
            }
        }
        // metric: positive lengths, strict triangle inequality, no slivers
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            let l = self.edge_lengths[e];
            if !(l.is_finite() && l > 0.0) {
                return Err(MeshError::NonPositiveLength { a, b, length: l });
            }
        }
        let mut areas = Vec::with_capacity(self.faces.len());
        for (f, face) in self.faces.iter().enumerate() {
            let [la, lb, lc] = self.face_lengths(f);
            if la + lb <= lc || lb + lc <= la || lc + la <= lb {
                return Err(MeshError::TriangleInequality {
                    face: f,
                    a: la,
                    b: lb,
                    c: lc,
                });
            }
            let _ = face;
            areas.push(triangle_area(la, lb, lc));
        }
        let mean_area = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
        for (f, &area) in areas.iter().enumerate() {
            if area < DEGENERATE_AREA_FLOOR * mean_area {
                return Err(MeshError::DegenerateFace {
                    face: f,
                    area,
                    floor: DEGENERATE_AREA_FLOOR,
                });
            }
        }
        if self.euler_characteristic() % 2 != 0 {
            return Err(MeshError::OddEulerCharacteristic {
                chi: self.euler_characteristic(),
            });
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        self.edge_lengths[self.edge_index[&edge_key(a, b)]]
    }

    pub fn edge_length_by_index(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    /// Lengths of the three edges (v0,v1), (v1,v2), (v2,v0) of face `f`.
    pub fn face_lengths(&self, f: usize) -> [f64; 3] {
        let [i, j, k] = self.faces[f];
        [
            self.edge_length(i, j),
            self.edge_length(j, k),
            self.edge_length(k, i),
        ]
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.edge_lengths.iter().sum::<f64>() / self.edge_lengths.len() as f64
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.face_lengths(f);
                triangle_area(a, b, c)
            })
            .sum()
    }

    /// Neighbors of each vertex, sorted, computed from the edge list.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
        for list in &mut nbrs {
            list.sort_unstable();
        }
        nbrs
    }
}

/// Icosphere: subdivided icosahedron with vertices projected to the sphere
/// of the given radius. Edge lengths are the chord lengths of the projected
/// points.
pub fn gen_icosphere(subdivisions: u32, radius: f64) -> Result<TriangleMesh, MeshError> {
    if subdivisions > MAX_SUBDIVISIONS {
        return Err(MeshError::SubdivisionGuard {
            requested: subdivisions,
            max: MAX_SUBDIVISIONS,
        });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(MeshError::NonPositiveRadius { radius });
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut positions: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let project = |p: [f64; 3], r: f64| {
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] * r / norm, p[1] * r / norm, p[2] * r / norm]
    };
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for face in &faces {
            let mut mids = [0usize; 3];
            for k in 0..3 {
                let key = edge_key(face[k], face[(k + 1) % 3]);
                mids[k] = *midpoint.entry(key).or_insert_with(|| {
                    let (p, q) = (positions[key.0], positions[key.1]);
                    positions.push([
                        0.5 * (p[0] + q[0]),
                        0.5 * (p[1] + q[1]),
                        0.5 * (p[2] + q[2]),
                    ]);
                    positions.len() - 1
                });
            }
            let [a, b, c] = *face;
            let [ab, bc, ca] = mids;
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }
    let positions: Vec<[f64; 3]> = positions.into_iter().map(|p| project(p, radius)).collect();
    TriangleMesh::from_positions(positions, faces)
}

/// n x m grid on an a x b rectangle with opposite sides identified, each
/// cell split into two triangles. Every angle defect vanishes identically.
pub fn gen_flat_torus(n: usize, m: usize, a: f64, b: f64) -> Result<TriangleMesh, MeshError> {
    if n < 3 || m < 3 {
        return Err(MeshError::GridTooSmall { n, m });
    }
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(MeshError::NonPositiveSide { a, b });
    }
    let dx = a / n as f64;
    let dy = b / m as f64;
    let diag = (dx * dx + dy * dy).sqrt();
    let vid = |i: usize, j: usize| (j % m) * n + (i % n);
    let mut faces = Vec::with_capacity(2 * n * m);
    for j in 0..m {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    // classify each edge by the grid offset of its endpoints
    let length_of = move |u: usize, v: usize| {
        let (iu, ju) = (u % n, u / n);
        let (iv, jv) = (v % n, v / n);
        let di = (iu as i64 - iv as i64).rem_euclid(n as i64);
        let dj = (ju as i64 - jv as i64).rem_euclid(m as i64);
        let horizontal = di == 1 || di == n as i64 - 1;
        let vertical = dj == 1 || dj == m as i64 - 1;
        match (horizontal, vertical) {
            (true, false) => dx,
            (false, true) => dy,
            (true, true) => diag,
            _ => unreachable!("non-adjacent grid vertices"),
        }
    };
    TriangleMesh::from_faces_and_lengths(n * m, faces, length_of)
}

/// Conformal rescaling: l'_ij = e^{(u_i + u_j)/4} l_ij, so lengths transform
/// like e^{u/2}. Combinatorics are unchanged; positions are dropped because
/// the embedding is no longer isometric.
pub fn apply_conformal_factor(mesh: &TriangleMesh, u: &[f64]) -> Result<TriangleMesh, MeshError> {
    assert_eq!(u.len(), mesh.vertex_count(), "factor length mismatch");
    for (v, &ui) in u.iter().enumerate() {
        if !ui.is_finite() {
            return Err(MeshError::NonFiniteFactor { vertex: v });
        }
    }
    let length_of =
        |a: usize, b: usize| ((u[a] + u[b]) / 4.0).exp() * mesh.edge_length(a, b);
    let mut out = TriangleMesh::from_faces_and_lengths(
        mesh.vertex_count(),
        mesh.faces().to_vec(),
        length_of,
    )?;
    out.labels = mesh.labels.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_combinatorics() {
        let mesh = gen_icosphere(0, 1.0).unwrap();
        assert_eq!(mesh.vertex_count(), 12);
        assert_eq!(mesh.edge_count(), 30);
        assert_eq!(mesh.faces().len(), 20);
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn icosphere_subdivision_counts() {
        let mesh = gen_icosphere(1, 1.0).unwrap();
        assert_eq!(mesh.vertex_count(), 42);
        assert_eq!(mesh.edge_count(), 120);
        assert_eq!(mesh.faces().len(), 80);
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn icosphere_homothety() {
        let m1 = gen_icosphere(2, 1.0).unwrap();
        let m2 = gen_icosphere(2, 2.0).unwrap();
        assert_eq!(m1.faces(), m2.faces());
        for &(a, b) in m1.edges() {
            let r = m2.edge_length(a, b) / m1.edge_length(a, b);
            assert!((r - 2.0).abs() < 1e-12, "length ratio {r}");
        }
    }

    #[test]
    fn icosphere_guard() {
        assert!(matches!(
            gen_icosphere(9, 1.0),
            Err(MeshError::SubdivisionGuard { .. })
        ));
    }

    #[test]
    fn flat_torus_combinatorics() {
        let mesh = gen_flat_torus(3, 3, 1.0, 1.0).unwrap();
        assert_eq!(mesh.vertex_count(), 9);
        assert_eq!(mesh.edge_count(), 27);
        assert_eq!(mesh.faces().len(), 18);
        assert_eq!(mesh.euler_characteristic(), 0);
    }

    #[test]
    fn flat_torus_unit_area() {
        let mesh = gen_flat_torus(8, 8, 1.0, 1.0).unwrap();
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_grid_guard() {
        assert!(matches!(
            gen_flat_torus(2, 5, 1.0, 1.0),
            Err(MeshError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn conformal_identity_and_constant() {
        let mesh = gen_icosphere(1, 1.0).unwrap();
        let zero = vec![0.0; mesh.vertex_count()];
        let same = apply_conformal_factor(&mesh, &zero).unwrap();
        for &(a, b) in mesh.edges() {
            assert_eq!(same.edge_length(a, b), mesh.edge_length(a, b));
        }
        // u = 2c scales lengths by e^c
        let c = 0.3;
        let konst = vec![2.0 * c; mesh.vertex_count()];
        let scaled = apply_conformal_factor(&mesh, &konst).unwrap();
        for &(a, b) in mesh.edges() {
            let r = scaled.edge_length(a, b) / mesh.edge_length(a, b);
            assert!((r - c.exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn conformal_round_trip_restores_lengths() {
        let mesh = gen_icosphere(2, 1.0).unwrap();
        let mut rng = crate::rng::SplitMix64::new(11);
        let u: Vec<f64> = (0..mesh.vertex_count())
            .map(|_| 0.4 * rng.next_signed())
            .collect();
        let fwd = apply_conformal_factor(&mesh, &u).unwrap();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let back = apply_conformal_factor(&fwd, &neg).unwrap();
        for &(a, b) in mesh.edges() {
            let rel = (back.edge_length(a, b) - mesh.edge_length(a, b)).abs()
                / mesh.edge_length(a, b);
            assert!(rel < 1e-12, "round trip rel error {rel}");
        }
    }

    #[test]
    fn conformal_rejects_nonfinite() {
        let mesh = gen_icosphere(0, 1.0).unwrap();
        let mut u = vec![0.0; 12];
        u[3] = f64::NAN;
        assert!(matches!(
            apply_conformal_factor(&mesh, &u),
            Err(MeshError::NonFiniteFactor { vertex: 3 })
        ));
    }

    #[test]
    fn boundary_is_rejected() {
        // a single triangle is not a closed surface
        let err = TriangleMesh::from_faces_and_lengths(3, vec![[0, 1, 2]], |_, _| 1.0);
        assert!(matches!(err, Err(MeshError::NotClosed { .. })));
    }

    #[test]
    fn bad_orientation_is_rejected() {
        // tetrahedron with one face flipped
        let faces = vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]];
        let mut flipped = faces.clone();
        flipped[3] = [0, 3, 2];
        let ok = TriangleMesh::from_faces_and_lengths(4, faces, |_, _| 1.0);
        assert!(ok.is_ok(), "{:?}", ok.err());
        let err = TriangleMesh::from_faces_and_lengths(4, flipped, |_, _| 1.0);
        assert!(matches!(err, Err(MeshError::InconsistentOrientation { .. })));
    }
}
