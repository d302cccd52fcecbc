//! Discrete Dirichlet energy, volume measure, Gaussian curvature and the
//! curvature-orthogonal function space.
//!
//! Per mesh we assemble
//!   L  — cotangent stiffness, positive semidefinite, u·Lu ≈ ∫ |∇u|² dv,
//!   M  — barycentric lumped mass, 1·M1 = total area,
//!   d  — angle defects, d_i ≈ ∫ K φ_i dv (the curvature moment),
//! with the exact pairing Σ d_i = 2πχ (discrete Gauss-Bonnet). The moment
//! uses the raw defects rather than K_i M_ii recombined so that pairing
//! against constants is exact; K_i = d_i / M_ii is for pointwise display.
//!
//! Negative cotangent weights from obtuse triangles are kept as-is: they
//! preserve symmetry and the energy identity.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use thiserror::Error;

use crate::linalg::{dot, CsrMatrix};
use crate::mesh::{triangle_area, TriangleMesh};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("vector length {got} does not match vertex count {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite cotangent weight in face {face}")]
    NonFiniteCotangent { face: usize },
    #[error("non-finite input value at index {index}")]
    NonFiniteInput { index: usize },
    #[error("tilde projection undefined: Euler characteristic is zero")]
    TildeUndefined,
    #[error("negative radicand {radicand:.3e} in the alpha-norm: alpha >= constrained eigenvalue or constraint violated")]
    NegativeRadicand { radicand: f64 },
    #[error("alpha = {alpha} is not below the cached constrained eigenvalue {lambda}")]
    AlphaNotBelowLambda { alpha: f64, lambda: f64 },
}

/// The discrete (Σ, g): stiffness, mass, curvature moments.
#[derive(Debug)]
pub struct Operators {
    stiffness: CsrMatrix,
    mass: Vec<f64>,
    defects: Vec<f64>,
    curvature: Vec<f64>,
    chi: i64,
    volume: f64,
    lambda_cache: OnceLock<f64>,
}

/// A field certified to lie in the discrete curvature-orthogonal subspace,
/// with its alpha-norm.
#[derive(Debug, Clone)]
pub struct ConstrainedField {
    pub values: Vec<f64>,
    pub alpha: f64,
    pub norm: f64,
    pub moment: f64,
}

impl Operators {
    /// Assemble from a validated mesh. Cotangent weights come from the law
    /// of cosines on edge lengths; assembly order is the fixed face order,
    /// so results are bit-reproducible.
    pub fn build(mesh: &TriangleMesh) -> Result<Self, OperatorError> {
        let n = mesh.vertex_count();
        let mut triplets = Vec::with_capacity(mesh.faces().len() * 12);
        let mut mass = vec![0.0; n];
        let mut angle_sums = vec![0.0; n];
        for (f, face) in mesh.faces().iter().enumerate() {
            let [i, j, k] = *face;
            let lij = mesh.edge_length(i, j);
            let ljk = mesh.edge_length(j, k);
            let lki = mesh.edge_length(k, i);
            let area = triangle_area(lij, ljk, lki);
            // angle at each corner from the law of cosines
            let corners = [
                (i, lij, lki, ljk), // angle at i between edges ij, ik
                (j, ljk, lij, lki),
                (k, lki, ljk, lij),
            ];
            let mut angles = [0.0; 3];
            for (c, &(v, la, lb, lopp)) in corners.iter().enumerate() {
                let cosv = ((la * la + lb * lb - lopp * lopp) / (2.0 * la * lb)).clamp(-1.0, 1.0);
                let angle = cosv.acos();
                angles[c] = angle;
                angle_sums[v] += angle;
                mass[v] += area / 3.0;
            }
            // half-cotangent of the angle opposite each edge
            let edges = [(j, k, angles[0]), (k, i, angles[1]), (i, j, angles[2])];
            for &(a, b, angle) in &edges {
                let w = 0.5 * angle.cos() / angle.sin();
                if !w.is_finite() {
                    return Err(OperatorError::NonFiniteCotangent { face: f });
                }
                triplets.push((a, a, w));
                triplets.push((b, b, w));
                triplets.push((a, b, -w));
                triplets.push((b, a, -w));
            }
        }
        let stiffness = CsrMatrix::from_triplets(n, triplets);
        let defects: Vec<f64> = angle_sums.iter().map(|&s| 2.0 * PI - s).collect();
        let curvature: Vec<f64> = defects
            .iter()
            .zip(mass.iter())
            .map(|(&d, &m)| d / m)
            .collect();
        let volume = mass.iter().sum();
        Ok(Self {
            stiffness,
            mass,
            defects,
            curvature,
            chi: mesh.euler_characteristic(),
            volume,
            lambda_cache: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Diagonal of the lumped mass matrix.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Angle defects d, the curvature moments.
    pub fn defects(&self) -> &[f64] {
        &self.defects
    }

    /// Pointwise curvature K_i = d_i / M_ii.
    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn chi(&self) -> i64 {
        self.chi
    }

    /// Total area Σ M_ii.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// M·1, the constraint vector of the mean-zero eigenvalue problem.
    pub fn mass_vector(&self) -> Vec<f64> {
        self.mass.clone()
    }

    fn check_dim(&self, u: &[f64]) -> Result<(), OperatorError> {
        if u.len() != self.n() {
            return Err(OperatorError::DimensionMismatch {
                expected: self.n(),
                got: u.len(),
            });
        }
        Ok(())
    }

    fn check_finite(&self, u: &[f64]) -> Result<(), OperatorError> {
        for (i, &x) in u.iter().enumerate() {
            if !x.is_finite() {
                return Err(OperatorError::NonFiniteInput { index: i });
            }
        }
        Ok(())
    }

    /// u · L u, the discrete Dirichlet energy.
    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64, OperatorError> {
        self.check_dim(u)?;
        self.check_finite(u)?;
        Ok(self.stiffness.bilinear(u, u))
    }

    /// Σ M_ii u_i v_i.
    pub fn mass_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.n());
        let mut acc = 0.0;
        for i in 0..u.len() {
            acc += self.mass[i] * u[i] * v[i];
        }
        acc
    }

    /// d · u, the curvature-weighted moment.
    pub fn curvature_moment(&self, u: &[f64]) -> Result<f64, OperatorError> {
        self.check_dim(u)?;
        Ok(dot(&self.defects, u))
    }

    /// (L - alpha M) u.
    pub fn shifted_stiffness_apply(&self, alpha: f64, u: &[f64], out: &mut [f64]) {
        self.stiffness.mul_vec(u, out);
        if alpha != 0.0 {
            for i in 0..u.len() {
                out[i] -= alpha * self.mass[i] * u[i];
            }
        }
    }

    /// ‖u‖_{1,α} = sqrt(u·Lu - α u·Mu). Strict alpha check when the
    /// constrained eigenvalue has been computed; otherwise the negative
    /// radicand is the only guard.
    pub fn alpha_norm(&self, u: &[f64], alpha: f64) -> Result<f64, OperatorError> {
        self.check_dim(u)?;
        self.check_finite(u)?;
        if let Some(&lambda) = self.lambda_cache.get() {
            if alpha >= lambda {
                return Err(OperatorError::AlphaNotBelowLambda { alpha, lambda });
            }
        }
        let energy = self.stiffness.bilinear(u, u);
        let mass_sq = self.mass_inner(u, u);
        let radicand = energy - alpha * mass_sq;
        let scale = energy.abs() + alpha.abs() * mass_sq;
        if radicand < -1e-14 * scale.max(1.0) {
            return Err(OperatorError::NegativeRadicand { radicand });
        }
        Ok(radicand.max(0.0).sqrt())
    }

    /// Project onto the curvature-orthogonal subspace by subtracting the
    /// defect-weighted mean along constants: u - (d·u / 2πχ) 1. Idempotent.
    pub fn project_curvature_orthogonal(
        &self,
        u: &[f64],
        alpha: f64,
    ) -> Result<ConstrainedField, OperatorError> {
        self.check_dim(u)?;
        self.check_finite(u)?;
        if self.chi == 0 {
            return Err(OperatorError::TildeUndefined);
        }
        let tilde = dot(&self.defects, u) / (2.0 * PI * self.chi as f64);
        let values: Vec<f64> = u.iter().map(|&x| x - tilde).collect();
        let moment = dot(&self.defects, &values);
        let norm = self.alpha_norm(&values, alpha)?;
        Ok(ConstrainedField {
            values,
            alpha,
            norm,
            moment,
        })
    }

    /// Set by the spectrum module once the curvature-zero eigenvalue is
    /// known; turns the advisory alpha check into a strict one.
    pub fn cache_constrained_eigenvalue(&self, lambda: f64) {
        let _ = self.lambda_cache.set(lambda);
    }

    pub fn cached_constrained_eigenvalue(&self) -> Option<f64> {
        self.lambda_cache.get().copied()
    }

    /// Stiffness in MatrixMarket coordinate format (general pattern,
    /// 17 significant digits) for external cross-checks.
    pub fn write_stiffness_matrix_market(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n(), self.n(), self.stiffness.nnz())?;
        for (r, c, v) in self.stiffness.entries() {
            writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }

    /// One value per line, 17 significant digits.
    pub fn write_vector(values: &[f64], mut w: impl Write) -> std::io::Result<()> {
        for &v in values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }
}

impl ConstrainedField {
    /// Certify an existing vector without projecting: moment must already
    /// be negligible against ‖d‖‖u‖.
    pub fn certify(ops: &Operators, values: Vec<f64>, alpha: f64) -> Result<Self, OperatorError> {
        let moment = ops.curvature_moment(&values)?;
        let norm = ops.alpha_norm(&values, alpha)?;
        Ok(Self {
            values,
            alpha,
            norm,
            moment,
        })
    }

    /// |d·u| ≤ tol ‖d‖ ‖u‖ with tol = 1e-10.
    pub fn membership_ok(&self, ops: &Operators) -> bool {
        let scale = crate::linalg::norm2(ops.defects()) * crate::linalg::norm2(&self.values);
        self.moment.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE)
    }
}
