//! Cross-checks of the fast paths against dense reference implementations
//! and analytic refinement targets.

use std::f64::consts::PI;

use tmlab_core::linalg::dot;
use tmlab_core::mesh::{gen_flat_torus, gen_icosphere};
use tmlab_core::reference;
use tmlab_core::rng::SplitMix64;
use tmlab_core::{green, spectrum, tm, Operators};

#[test]
fn sparse_energy_matches_dense_assembly() {
    // u·Lu through CSR equals the dense-assembly oracle on small meshes
    let meshes = [gen_icosphere(2, 1.0).unwrap(), gen_flat_torus(9, 9, 1.3, 0.8).unwrap()];
    let mut rng = SplitMix64::new(101);
    for mesh in &meshes {
        assert!(mesh.vertex_count() <= 200);
        let ops = Operators::build(mesh).unwrap();
        let dense = reference::dense_stiffness(mesh);
        for _ in 0..10 {
            let u: Vec<f64> = (0..ops.n()).map(|_| rng.next_signed()).collect();
            let fast = ops.dirichlet_energy(&u).unwrap();
            let lu = reference::dense_mul(&dense, &u);
            let slow = dot(&u, &lu);
            assert!(
                (fast - slow).abs() <= 1e-12 * slow.abs().max(1.0),
                "sparse {fast} vs dense {slow}"
            );
        }
    }
}

#[test]
fn alpha_norm_matches_dense_evaluation() {
    // alpha = -1: norm² = u·Lu + u·Mu against the dense route
    let mesh = gen_icosphere(2, 1.0).unwrap();
    let ops = Operators::build(&mesh).unwrap();
    let dense = reference::dense_stiffness(&mesh);
    let mass = reference::dense_mass(&mesh);
    let mut rng = SplitMix64::new(103);
    let raw: Vec<f64> = (0..ops.n()).map(|_| rng.next_signed()).collect();
    let field = ops.project_curvature_orthogonal(&raw, -1.0).unwrap();
    let u = &field.values;
    let lu = reference::dense_mul(&dense, u);
    let dense_sq = dot(u, &lu) + (0..u.len()).map(|i| mass[i] * u[i] * u[i]).sum::<f64>();
    assert!(
        (field.norm * field.norm - dense_sq).abs() <= 1e-12 * dense_sq,
        "{} vs {dense_sq}",
        field.norm * field.norm
    );
}

#[test]
fn gauss_bonnet_exactness_against_defect_oracle() {
    for (mesh, chi) in [
        (gen_icosphere(3, 1.0).unwrap(), 2.0),
        (gen_flat_torus(12, 7, 2.0, 1.0).unwrap(), 0.0),
    ] {
        let ops = Operators::build(&mesh).unwrap();
        let oracle = reference::dense_defects(&mesh);
        for (a, b) in ops.defects().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = ops.defects().iter().sum();
        assert!((total - 2.0 * PI * chi).abs() <= 1e-9 * (2.0 * PI * chi).abs().max(1.0));
    }
}

#[test]
fn torus_mean_zero_eigenvalue_converges_to_four_pi_squared() {
    // first nonzero eigenvalue of the unit flat torus is 4π² (multiplicity 4)
    let exact = 4.0 * PI * PI;
    let ops = Operators::build(&gen_flat_torus(64, 64, 1.0, 1.0).unwrap()).unwrap();
    let r = spectrum::mean_zero_eigenvalue(&ops).unwrap();
    let rel = (r.value - exact).abs() / exact;
    assert!(rel < 0.02, "n=64 torus eigenvalue {} (rel {rel})", r.value);
}

#[test]
fn anisotropic_torus_eigenvalue() {
    // first nonzero eigenvalue of the a x b flat torus is min(4π²/a², 4π²/b²)
    let ops = Operators::build(&gen_flat_torus(48, 12, 2.0, 0.5).unwrap()).unwrap();
    let r = spectrum::mean_zero_eigenvalue(&ops).unwrap();
    let exact = PI * PI; // 4π²/a² with a = 2
    let rel = (r.value - exact).abs() / exact;
    assert!(rel < 0.01, "eigenvalue {} (rel {rel})", r.value);
}

#[test]
fn torus_eigenvalue_matches_dense_oracle() {
    let mesh = gen_flat_torus(14, 14, 1.0, 1.0).unwrap(); // 196 vertices
    let ops = Operators::build(&mesh).unwrap();
    let fast = spectrum::mean_zero_eigenvalue(&ops).unwrap();
    let dense = reference::dense_stiffness(&mesh);
    let mass = reference::dense_mass(&mesh);
    let oracle = reference::dense_constrained_min_eigen(&dense, &mass, &mass);
    assert!(
        (fast.value - oracle).abs() <= 1e-8 * oracle,
        "sparse {} vs dense {oracle}",
        fast.value
    );
}

#[test]
fn sin_field_dirichlet_energy_on_refining_tori() {
    // ∫ |∇ sin(2πx)|² = 2π² on the unit flat torus
    let exact = 2.0 * PI * PI;
    let mut prev_err = f64::INFINITY;
    for n in [16usize, 32, 48] {
        let mesh = gen_flat_torus(n, n, 1.0, 1.0).unwrap();
        let ops = Operators::build(&mesh).unwrap();
        let u: Vec<f64> = (0..ops.n())
            .map(|i| (2.0 * PI * ((i % n) as f64) / n as f64).sin())
            .collect();
        let e = ops.dirichlet_energy(&u).unwrap();
        let err = (e - exact).abs() / exact;
        assert!(err < prev_err, "no refinement at n = {n}");
        if n >= 32 {
            assert!(err < 0.02, "n = {n}: rel error {err}");
        }
        prev_err = err;
    }
}

#[test]
fn euler_lagrange_residual_matches_dense_route() {
    // assemble the stationarity system densely and compare the residual
    let mesh = gen_icosphere(2, 1.0).unwrap(); // 162 vertices
    let ops = Operators::build(&mesh).unwrap();
    let dense_l = reference::dense_stiffness(&mesh);
    let mass = reference::dense_mass(&mesh);
    let (beta, alpha) = (2.0 * PI, -0.3);
    let mut rng = SplitMix64::new(107);
    let raw: Vec<f64> = (0..ops.n()).map(|_| rng.next_signed()).collect();
    let projected = ops.project_curvature_orthogonal(&raw, alpha).unwrap();
    let u: Vec<f64> = projected.values.iter().map(|&x| x / projected.norm).collect();

    let fast = tm::euler_lagrange_residual(&ops, &u, beta, alpha).unwrap();

    let n = u.len();
    let lu = reference::dense_mul(&dense_l, &u);
    let shifted: Vec<f64> = (0..n).map(|i| lu[i] - alpha * mass[i] * u[i]).collect();
    let s = dot(&u, &shifted);
    let mut lambda = 0.0;
    let mut first = 0.0;
    let mut mass_mean = 0.0;
    for i in 0..n {
        let e = (beta * u[i] * u[i]).exp();
        lambda += mass[i] * u[i] * u[i] * e;
        first += mass[i] * u[i] * e;
        mass_mean += mass[i] * u[i];
    }
    let defects = reference::dense_defects(&mesh);
    let chi_term = 2.0 * PI * 2.0;
    let mu = ((s / lambda) * first + alpha * mass_mean) / chi_term;
    let mut resid = 0.0;
    for i in 0..n {
        let e = (beta * u[i] * u[i]).exp();
        let r = shifted[i] - (s / lambda) * mass[i] * u[i] * e + mu * defects[i];
        resid += r * r;
    }
    let resid = resid.sqrt();
    assert!(
        (fast.residual - resid).abs() <= 1e-10 * resid.max(1.0),
        "sparse {} vs dense {resid}",
        fast.residual
    );
    assert!((fast.lambda - lambda).abs() <= 1e-12 * lambda);
    assert!((fast.mu - mu).abs() <= 1e-12 * mu.abs().max(1e-12));
}

#[test]
fn green_solution_satisfies_dense_equation() {
    let mesh = gen_icosphere(2, 1.0).unwrap();
    let ops = Operators::build(&mesh).unwrap();
    let alpha = -0.4;
    let g = green::solve_green(&ops, 5, alpha).unwrap();
    let dense_l = reference::dense_stiffness(&mesh);
    let mass = reference::dense_mass(&mesh);
    let defects = reference::dense_defects(&mesh);
    let n = ops.n();
    let lg = reference::dense_mul(&dense_l, &g.values);
    let mut worst = 0.0f64;
    for i in 0..n {
        let lhs = lg[i] - alpha * mass[i] * g.values[i] + g.curvature_coeff * defects[i];
        let rhs = if i == 5 { 1.0 } else { 0.0 };
        worst = worst.max((lhs - rhs).abs());
    }
    assert!(worst < 1e-9, "dense equation residual {worst}");
    assert!(dot(&defects, &g.values).abs() < 1e-9);
}

#[test]
fn double_torus_operators_are_consistent() {
    let mesh = reference::gen_double_torus();
    let ops = Operators::build(&mesh).unwrap();
    assert_eq!(ops.chi(), -2);
    let total: f64 = ops.defects().iter().sum();
    let target = 2.0 * PI * -2.0;
    assert!(
        (total - target).abs() <= 1e-9 * target.abs(),
        "Gauss-Bonnet on genus 2: {total}"
    );
    let eig = spectrum::curvature_zero_eigenvalue(&ops).unwrap();
    assert!(eig.value > 1e-6, "constrained eigenvalue {}", eig.value);
}
