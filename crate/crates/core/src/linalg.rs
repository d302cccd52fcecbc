//! Sparse symmetric matrices and the two Krylov solvers the lab needs.
//!
//! Assembly sorts triplets into CSR with a fixed order and the solvers use
//! fixed reduction orders, so every result is bit-reproducible for identical
//! inputs.

/// Compressed-sparse-row matrix. Only square symmetric matrices are built
/// here, but the storage is general.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed in
    /// sorted order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut rows = Vec::with_capacity(triplets.len());
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for &(r, c, v) in &triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn mul_vec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// u · A v.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let av = self.mul_vec_alloc(v);
        dot(u, &av)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] += self.values[k];
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[r][self.col_idx[k]] += self.values[k];
            }
        }
        a
    }

    /// Iterate the stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += alpha x.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..y.len() {
        y[i] += alpha * x[i];
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final true residual ‖b − A x‖ / ‖b‖.
    pub rel_residual: f64,
    pub converged: bool,
}

/// Conjugate gradients for symmetric positive (semi)definite systems.
///
/// For a singular consistent system the optional `project` hook is applied
/// to the residual every iteration to suppress kernel drift; iterates then
/// stay in the range space and CG converges as in the definite case.
pub fn conjugate_gradient<F, P>(
    apply: F,
    b: &[f64],
    tol_rel: f64,
    max_iter: usize,
    project: Option<P>,
) -> (Vec<f64>, SolveStats)
where
    F: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    if let Some(p) = &project {
        p(&mut r);
    }
    let norm_b = norm2(&r).max(f64::MIN_POSITIVE);
    let mut p_dir = r.clone();
    let mut rs = dot(&r, &r);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iter {
        if rs.sqrt() <= tol_rel * norm_b {
            break;
        }
        apply(&p_dir, &mut ap);
        let denom = dot(&p_dir, &ap);
        if denom <= 0.0 || !denom.is_finite() {
            break; // lost positivity: return best iterate
        }
        let alpha = rs / denom;
        axpy(alpha, &p_dir, &mut x);
        axpy(-alpha, &ap, &mut r);
        if let Some(p) = &project {
            p(&mut r);
        }
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        for i in 0..n {
            p_dir[i] = r[i] + beta * p_dir[i];
        }
        rs = rs_new;
        iterations += 1;
    }
    // true residual
    apply(&x, &mut ap);
    let mut res = 0.0;
    for i in 0..n {
        let d = b[i] - ap[i];
        res += d * d;
    }
    let mut res = res.sqrt();
    if let Some(p) = &project {
        // measure in the constraint-compatible subspace
        let mut rr: Vec<f64> = (0..n).map(|i| b[i] - ap[i]).collect();
        p(&mut rr);
        res = norm2(&rr);
    }
    let rel = res / norm_b;
    let stats = SolveStats {
        iterations,
        rel_residual: rel,
        converged: rel <= tol_rel * 10.0,
    };
    (x, stats)
}

/// MINRES (Paige-Saunders) for symmetric, possibly indefinite systems.
/// Handles the saddle-point systems of the Green solver.
pub fn minres<F>(apply: F, b: &[f64], tol_rel: f64, max_iter: usize) -> (Vec<f64>, SolveStats)
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        return (
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                rel_residual: 0.0,
                converged: true,
            },
        );
    }

    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut beta = norm_b;
    let beta1 = beta;
    let mut oldb = 0.0;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut iterations = 0;

    for k in 1..=max_iter {
        iterations = k;
        let v: Vec<f64> = r2.iter().map(|&t| t / beta).collect();
        apply(&v, &mut y);
        if k >= 2 {
            let c = beta / oldb;
            for i in 0..n {
                y[i] -= c * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        for i in 0..n {
            y[i] -= c * r2[i];
        }
        r1.copy_from_slice(&r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm2(&r2);

        // plane rotations
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::MIN_POSITIVE);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = w2.clone();
        w2 = w.clone();
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        if phibar <= 0.1 * tol_rel * beta1 {
            break;
        }
    }

    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut res = 0.0;
    for i in 0..n {
        let d = b[i] - ax[i];
        res += d * d;
    }
    let rel = res.sqrt() / norm_b;
    let stats = SolveStats {
        iterations,
        rel_residual: rel,
        converged: rel <= tol_rel,
    };
    (x, stats)
}
