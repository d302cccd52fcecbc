//! Slow reference implementations and validation fixtures.
//!
//! Everything here deliberately avoids the production code paths: dense
//! stiffness assembly goes through the area formula for cotangents instead
//! of acos, angles come from atan2, and the constrained eigenvalue is read
//! off a full Jacobi eigendecomposition. Tests compare the fast paths
//! against these.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::mesh::{triangle_area, TriangleMesh};

/// Dense cotangent stiffness via cot θ = (a² + b² - c²) / (4 A).
pub fn dense_stiffness(mesh: &TriangleMesh) -> Vec<Vec<f64>> {
    let n = mesh.vertex_count();
    let mut l = vec![vec![0.0; n]; n];
    for face in 0..mesh.faces().len() {
        let [i, j, k] = mesh.faces()[face];
        let lij = mesh.edge_length(i, j);
        let ljk = mesh.edge_length(j, k);
        let lki = mesh.edge_length(k, i);
        let area = triangle_area(lij, ljk, lki);
        // cot of the angle opposite each edge
        let entries = [
            (j, k, (lij * lij + lki * lki - ljk * ljk) / (4.0 * area)),
            (k, i, (lij * lij + ljk * ljk - lki * lki) / (4.0 * area)),
            (i, j, (ljk * ljk + lki * lki - lij * lij) / (4.0 * area)),
        ];
        for &(a, b, cot) in &entries {
            let w = 0.5 * cot;
            l[a][a] += w;
            l[b][b] += w;
            l[a][b] -= w;
            l[b][a] -= w;
        }
    }
    l
}

/// Angle defects via atan2(4A, a² + b² - c²).
pub fn dense_defects(mesh: &TriangleMesh) -> Vec<f64> {
    let n = mesh.vertex_count();
    let mut sums = vec![0.0; n];
    for face in 0..mesh.faces().len() {
        let [i, j, k] = mesh.faces()[face];
        let lij = mesh.edge_length(i, j);
        let ljk = mesh.edge_length(j, k);
        let lki = mesh.edge_length(k, i);
        let area = triangle_area(lij, ljk, lki);
        sums[i] += (4.0 * area).atan2(lij * lij + lki * lki - ljk * ljk);
        sums[j] += (4.0 * area).atan2(ljk * ljk + lij * lij - lki * lki);
        sums[k] += (4.0 * area).atan2(lki * lki + ljk * ljk - lij * lij);
    }
    sums.iter().map(|&s| 2.0 * PI - s).collect()
}

pub fn dense_mass(mesh: &TriangleMesh) -> Vec<f64> {
    let n = mesh.vertex_count();
    let mut m = vec![0.0; n];
    for face in 0..mesh.faces().len() {
        let [i, j, k] = mesh.faces()[face];
        let [a, b, c] = mesh.face_lengths(face);
        let area = triangle_area(a, b, c);
        m[i] += area / 3.0;
        m[j] += area / 3.0;
        m[k] += area / 3.0;
    }
    m
}

pub fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| crate::linalg::dot(row, x)).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors) with `eigenvectors[v]` the v-th
/// eigenvector, both sorted by ascending eigenvalue.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let tol = 1e-15 * frob.max(f64::MIN_POSITIVE);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values: Vec<f64> = idx.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = idx
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}

/// Smallest Rayleigh quotient u·Lu / u·Mu over { c·u = 0 }, by shifting the
/// constraint direction out of the spectrum of the whitened operator.
pub fn dense_constrained_min_eigen(l: &[Vec<f64>], m_diag: &[f64], constraint: &[f64]) -> f64 {
    let n = l.len();
    let w: Vec<f64> = m_diag.iter().map(|&m| m.sqrt()).collect();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            s[i][j] = l[i][j] / (w[i] * w[j]);
        }
    }
    let mut chat: Vec<f64> = constraint.iter().zip(&w).map(|(&c, &wi)| c / wi).collect();
    let norm = crate::linalg::norm2(&chat);
    for c in chat.iter_mut() {
        *c /= norm;
    }
    // A = P S P + shift * chat chatᵀ
    let shift = 2.0 * s
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
        + 1.0;
    let sc = dense_mul(&s, &chat);
    let csc = crate::linalg::dot(&chat, &sc);
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = s[i][j] - chat[i] * sc[j] - sc[i] * chat[j]
                + csc * chat[i] * chat[j]
                + shift * chat[i] * chat[j];
        }
    }
    let (values, _) = jacobi_eigen(a);
    values[0]
}

/// Genus-2 fixture: two tori of revolution, one vertex star removed from
/// each, bridged by a six-sided tube. V - E + F = -2 by construction; all
/// invariants are enforced by the mesh validator on assembly.
pub fn gen_double_torus() -> TriangleMesh {
    let (n_u, n_v) = (16usize, 10usize);
    let (big_r, small_r) = (1.0, 0.45);
    let gap = 0.5;
    let centers = [-(big_r + small_r) - gap / 2.0, big_r + small_r + gap / 2.0];

    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut torus_vertex = Vec::new(); // (base index, vertex id of the hole center)

    for (t, &cx) in centers.iter().enumerate() {
        let base = positions.len();
        for j in 0..n_v {
            for i in 0..n_u {
                let u = 2.0 * PI * i as f64 / n_u as f64;
                let v = 2.0 * PI * j as f64 / n_v as f64;
                let rho = big_r + small_r * v.cos();
                positions.push([cx + rho * u.cos(), rho * u.sin(), small_r * v.sin()]);
            }
        }
        let vid = |i: usize, j: usize| base + (j % n_v) * n_u + (i % n_u);
        for j in 0..n_v {
            for i in 0..n_u {
                faces.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
                faces.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        // hole center: the vertex facing the other torus on the outer equator
        let i_facing = if t == 0 { 0 } else { n_u / 2 };
        torus_vertex.push(vid(i_facing, 0));
    }
    let (va, vb) = (torus_vertex[0], torus_vertex[1]);

    // remove the two stars, collecting the oriented link cycles
    let link_cycle = |faces: &[[usize; 3]], v: usize| -> Vec<usize> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for f in faces.iter().filter(|f| f.contains(&v)) {
            let pos = f.iter().position(|&x| x == v).unwrap();
            let (p, q) = (f[(pos + 1) % 3], f[(pos + 2) % 3]);
            next.insert(p, q);
        }
        let start = *next.keys().min().unwrap();
        let mut cycle = vec![start];
        let mut cur = next[&start];
        while cur != start {
            cycle.push(cur);
            cur = next[&cur];
        }
        assert_eq!(cycle.len(), next.len(), "vertex star is not a disc");
        cycle
    };
    let cycle_a = link_cycle(&faces, va);
    let cycle_b = link_cycle(&faces, vb);
    faces.retain(|f| !f.contains(&va) && !f.contains(&vb));

    // bridge: traverse cycle A forward and cycle B forward; reversing B in
    // the quad strip keeps every directed edge used exactly once
    let ka = cycle_a.len();
    assert_eq!(ka, cycle_b.len(), "hole boundaries must match");
    let dist2 = |p: [f64; 3], q: [f64; 3]| {
        (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)
    };
    let reversed_b = |offset: usize, i: usize| cycle_b[(2 * ka + offset - i) % ka];
    let best_offset = (0..ka)
        .min_by(|&o1, &o2| {
            let cost = |o: usize| -> f64 {
                (0..ka)
                    .map(|i| dist2(positions[cycle_a[i]], positions[reversed_b(o, i)]))
                    .sum()
            };
            cost(o1).total_cmp(&cost(o2))
        })
        .unwrap();
    for i in 0..ka {
        let (a0, a1) = (cycle_a[i], cycle_a[(i + 1) % ka]);
        let (b0, b1) = (reversed_b(best_offset, i), reversed_b(best_offset, i + 1));
        faces.push([a0, a1, b0]);
        faces.push([a1, b1, b0]);
    }

    // drop the two isolated hole centersand compact indices
    let mut remap = vec![usize::MAX; positions.len()];
    let mut new_positions = Vec::with_capacity(positions.len() - 2);
    for (old, pos) in positions.into_iter().enumerate() {
        if old == va || old == vb {
            continue;
        }
        remap[old] = new_positions.len();
        new_positions.push(pos);
    }
    let faces: Vec<[usize; 3]> = faces
        .iter()
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    TriangleMesh::from_positions(new_positions, faces).expect("double torus must validate")
}
