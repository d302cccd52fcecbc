//! Explicit test-field machinery: the log-cutoff (Moser) family, the
//! entire-plane bubble profile, and the unit-disc concentration experiment
//! against the πe bound.
//!
//! The disc experiment is one-dimensional radial on purpose: the
//! concentration bound is radial after symmetrization, and the 1-D version
//! isolates quadrature error from meshing error.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geodesic;
use crate::mesh::TriangleMesh;
use crate::operators::Operators;
use crate::FOUR_PI;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("eps = {eps} outside (0, 1)")]
    EpsOutOfRange { eps: f64 },
    #[error("profile must vanish at the boundary (last value {value:.3e})")]
    BoundaryNotZero { value: f64 },
    #[error("profile energy {energy:.3e} cannot be normalized")]
    EnergyDegenerate { energy: f64 },
    #[error("profile grid must be strictly increasing and end at 1")]
    BadGrid,
    #[error("cutoff parameter {cutoff} must be positive")]
    BadCutoff { cutoff: f64 },
}

/// A radial function on the unit disc, sampled on an increasing grid and
/// interpreted as piecewise linear.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub boundary_zero: bool,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, ProbeError> {
        if grid.len() != values.len()
            || grid.len() < 2
            || grid.windows(2).any(|w| w[1] <= w[0])
            || (grid.last().copied().unwrap() - 1.0).abs() > 1e-12
        {
            return Err(ProbeError::BadGrid);
        }
        let boundary_zero = values.last().copied().unwrap() == 0.0;
        Ok(Self {
            grid,
            values,
            boundary_zero,
        })
    }

    /// 2π ∫ v'(r)² r dr for the piecewise-linear interpolant (equal to the
    /// trapezoid rule applied to the elementwise slopes).
    pub fn dirichlet_energy(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.len() - 1 {
            let dr = self.grid[i + 1] - self.grid[i];
            let dv = self.values[i + 1] - self.values[i];
            let slope = dv / dr;
            acc += slope * slope * PI * (self.grid[i + 1].powi(2) - self.grid[i].powi(2));
        }
        acc
    }

    /// Rescale to unit Dirichlet energy.
    pub fn renormalized(&self) -> Result<Self, ProbeError> {
        let energy = self.dirichlet_energy();
        if !(energy.is_finite() && energy > 0.0) {
            return Err(ProbeError::EnergyDegenerate { energy });
        }
        let s = energy.sqrt();
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v / s).collect(),
            boundary_zero: self.boundary_zero,
        })
    }

    /// 2π ∫ (e^{4π v²} - 1) r dr by the trapezoid rule on the grid; the
    /// stub [0, r_0] uses the constant value v(r_0).
    pub fn disc_integral(&self) -> f64 {
        let f = |r: f64, v: f64| 2.0 * PI * r * ((FOUR_PI * v * v).exp() - 1.0);
        let mut acc = 0.0;
        let r0 = self.grid[0];
        if r0 > 0.0 {
            acc += ((FOUR_PI * self.values[0] * self.values[0]).exp() - 1.0) * PI * r0 * r0;
        }
        for i in 0..self.grid.len() - 1 {
            let fa = f(self.grid[i], self.values[i]);
            let fb = f(self.grid[i + 1], self.values[i + 1]);
            acc += 0.5 * (fa + fb) * (self.grid[i + 1] - self.grid[i]);
        }
        acc
    }
}

/// The entire-plane bubble profile -(1/4π) log(1 + π r²); its squared
/// exponential e^{8πφ} integrates to exactly 1 over the plane.
pub fn bubble_profile(r: f64) -> f64 {
    -(PI * r * r).ln_1p() / FOUR_PI
}

#[derive(Debug, Clone, Copy)]
pub struct BubbleMass {
    /// 2π ∫_0^{r_max} e^{8πφ} r dr by trapezoid on a geometric grid.
    pub integral: f64,
    /// Exact mass of the tail (r_max, ∞): 1 / (1 + π r_max²).
    pub tail_bound: f64,
}

/// Quadrature check of the bubble normalization over [0, r_max].
pub fn bubble_mass(r_max: f64, points: usize) -> BubbleMass {
    let grid = geometric_grid(1e-6 * r_max.min(1.0), r_max, points);
    let f = |r: f64| {
        let w = 1.0 + PI * r * r;
        2.0 * PI * r / (w * w)
    };
    let mut acc = 0.0;
    // [0, r_min] stub: integrand ~ 2πr, exact π r_min² to leading order
    acc += PI * grid[0] * grid[0] / (1.0 + PI * grid[0] * grid[0]);
    for w in grid.windows(2) {
        acc += 0.5 * (f(w[0]) + f(w[1])) * (w[1] - w[0]);
    }
    BubbleMass {
        integral: acc,
        tail_bound: 1.0 / (1.0 + PI * r_max * r_max),
    }
}

/// Geometric grid from `lo` to `hi` inclusive with `points` samples.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|k| lo * (ratio * k as f64).exp()).collect();
    *g.last_mut().unwrap() = hi;
    g
}

/// Default radial sample count; the integrands vary over log scales.
pub const RADIAL_POINTS: usize = 10_000;

/// Classic log-cutoff profile on the unit disc: the cap sqrt(log(1/eps)/2π)
/// on r ≤ eps, log(1/r)/sqrt(2π log(1/eps)) outside. Unit Dirichlet energy
/// in the continuum.
pub fn moser_profile(eps: f64, points: usize) -> Result<RadialProfile, ProbeError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ProbeError::EpsOutOfRange { eps });
    }
    let big_l = (1.0 / eps).ln();
    let cap = (big_l / (2.0 * PI)).sqrt();
    let scale = (2.0 * PI * big_l).sqrt();
    let mut grid = vec![0.0];
    grid.extend(geometric_grid(eps * 1e-3, 1.0, points));
    grid.push(eps);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values: Vec<f64> = grid
        .iter()
        .map(|&r| {
            if r <= eps {
                cap
            } else {
                (1.0 / r).ln() / scale
            }
        })
        .collect();
    RadialProfile::new(grid, values)
}

/// Bubble core truncated at radius `cutoff`·eps, matched continuously to
/// the log tail -log(r)/(2πc), with the boost constant chosen so the
/// continuum Dirichlet energy is exactly 1. As cutoff → ∞ the boost tends
/// to 1/(4π) and the disc integral of the family tends to πe; a fixed
/// finite cutoff keeps the limit strictly below πe.
pub fn truncated_bubble_profile(
    eps: f64,
    cutoff: f64,
    points: usize,
) -> Result<RadialProfile, ProbeError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ProbeError::EpsOutOfRange { eps });
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(ProbeError::BadCutoff { cutoff });
    }
    let r_glue = cutoff * eps;
    if r_glue >= 1.0 {
        return Err(ProbeError::EpsOutOfRange { eps });
    }
    let w0 = 1.0 + PI * cutoff * cutoff;
    let boost = (1.0 - 1.0 / w0) / FOUR_PI;
    let c_sq = -(r_glue).ln() / (2.0 * PI) + w0.ln() / FOUR_PI - boost;
    if c_sq <= 0.0 {
        return Err(ProbeError::EpsOutOfRange { eps });
    }
    let c = c_sq.sqrt();
    let mut grid = vec![0.0];
    grid.extend(geometric_grid(eps * 1e-4, 1.0, points));
    grid.push(r_glue);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values: Vec<f64> = grid
        .iter()
        .map(|&r| {
            if r <= r_glue {
                c + (bubble_profile(r / eps) + boost) / c
            } else {
                -r.ln() / (2.0 * PI * c)
            }
        })
        .collect();
    RadialProfile::new(grid, values)
}

#[derive(Debug, Clone, Copy)]
pub struct CcSample {
    pub eps: f64,
    /// Energy of the profile before internal renormalization.
    pub energy: f64,
    /// 2π ∫ (e^{4π v²} - 1) r dr at unit energy.
    pub disc_integral: f64,
}

/// Evaluate a concentrating family on the unit disc. Profiles are
/// renormalized to unit Dirichlet energy; for families whose gradient mass
/// concentrates at the origin the values must not exceed πe in the limit.
pub fn carleson_chang_experiment(
    family: impl Fn(f64) -> Result<RadialProfile, ProbeError>,
    eps_list: &[f64],
) -> Result<Vec<CcSample>, ProbeError> {
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let profile = family(eps)?;
        if !profile.boundary_zero {
            return Err(ProbeError::BoundaryNotZero {
                value: *profile.values.last().unwrap(),
            });
        }
        let energy = profile.dirichlet_energy();
        let unit = profile.renormalized()?;
        out.push(CcSample {
            eps,
            energy,
            disc_integral: unit.disc_integral(),
        });
    }
    Ok(out)
}

/// The log-cutoff field on a mesh: value sqrt(log(1/eps)/2π) inside
/// geodesic radius eps², the log ramp on eps² < r < eps, zero outside.
/// Radii are Dijkstra distances with one-ring smoothing; zones snap to
/// vertex sets.
#[derive(Debug, Clone)]
pub struct MoserField {
    pub values: Vec<f64>,
    /// Discrete gradient norm sqrt(u·Lu); 1 + O(eps) when the zones are
    /// resolved.
    pub grad_norm: f64,
    pub cap_value: f64,
    pub core_vertices: usize,
    pub annulus_vertices: usize,
    /// eps² above the resolvability proxy 2 h / diam.
    pub core_resolved: bool,
}

pub fn moser_field(
    mesh: &TriangleMesh,
    ops: &Operators,
    pole: usize,
    eps: f64,
) -> Result<MoserField, ProbeError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ProbeError::EpsOutOfRange { eps });
    }
    let r = geodesic::smoothed_radii(mesh, pole, 1);
    let diameter = r.iter().copied().fold(0.0, f64::max);
    let big_l = (1.0 / eps).ln();
    let cap = (big_l / (2.0 * PI)).sqrt();
    let scale = (2.0 * PI * big_l).sqrt();
    let eps_sq = eps * eps;
    let mut values = vec![0.0; r.len()];
    let mut core_vertices = 0;
    let mut annulus_vertices = 0;
    for (i, &ri) in r.iter().enumerate() {
        if ri <= eps_sq {
            values[i] = cap;
            core_vertices += 1;
        } else if ri < eps {
            values[i] = (eps / ri).ln() / scale;
            annulus_vertices += 1;
        }
    }
    let grad_norm = ops
        .dirichlet_energy(&values)
        .expect("field built on the same mesh")
        .sqrt();
    Ok(MoserField {
        values,
        grad_norm,
        cap_value: cap,
        core_vertices,
        annulus_vertices,
        core_resolved: eps_sq > 2.0 * mesh.mean_edge_length() / diameter.max(f64::MIN_POSITIVE),
    })
}
