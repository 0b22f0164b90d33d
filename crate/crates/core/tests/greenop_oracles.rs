use mraqc::greenop::{self, apply, SeparatedKernel};
use mraqc::mra::{FunctionTree, MraConfig};
use statrs::function::erf::erf;
use std::f64::consts::PI;

/// Normalized Gaussian charge `(α/π)^{3/2} e^{-α r²}` at the origin.
fn charge(alpha: f64, cfg: &MraConfig) -> FunctionTree {
    let n = (alpha / PI).powf(1.5);
    FunctionTree::project(move |x: &[f64]| n * (-alpha * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), cfg, 3).unwrap()
}

/// Spherically averaged Helmholtz convolution of a radial density by
/// composite Simpson quadrature in `s`, split at the kink `s = r`.
fn radial_bsh(rho: impl Fn(f64) -> f64, kappa: f64, r: f64, s_max: f64) -> f64 {
    let integrand = |s: f64| rho(s) * s * ((-kappa * (r - s).abs()).exp() - (-kappa * (r + s)).exp());
    let simpson = |a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut acc = integrand(a) + integrand(b);
        for i in 1..n {
            acc += integrand(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    (simpson(0.0, r, 2000) + simpson(r, s_max, 20000)) / (2.0 * kappa * r)
}

#[test]
fn poisson_of_a_gaussian_charge_is_the_error_function_potential() {
    for &(thresh, tol) in &[(1e-4, 5e-4), (1e-6, 1e-5)] {
        let cfg = MraConfig::new(7, thresh, 20.0);
        for &alpha in &[1.0, 4.0] {
            let rho = charge(alpha, &cfg);
            let v = greenop::coulomb_potential(&rho).unwrap();
            for &r in &[0.5, 1.0, 2.0, 5.0] {
                let exact = erf(alpha.sqrt() * r) / r;
                let got = v.evaluate(&[0.3 * r, -0.4 * r, (0.75f64).sqrt() * r]).unwrap();
                assert!((got - exact).abs() < tol, "thresh={thresh} α={alpha} r={r}: {got} vs {exact}");
            }
        }
    }
}

#[test]
fn bsh_of_a_gaussian_charge_matches_radial_quadrature() {
    let cfg = MraConfig::new(7, 1e-5, 20.0);
    let alpha = 2.0;
    let rho = charge(alpha, &cfg);
    let n = (alpha / PI).powf(1.5);
    for &kappa in &[0.5, 1.5] {
        let op = greenop::bsh_operator(kappa, cfg.half_width, cfg.thresh).unwrap();
        let v = apply(&op, &rho).unwrap();
        for &r in &[0.3, 1.0, 2.5] {
            let exact = radial_bsh(|s| n * (-alpha * s * s).exp(), kappa, r, 12.0);
            let got = v.evaluate(&[0.0, r, 0.0]).unwrap();
            assert!((got - exact).abs() < 5e-5, "κ={kappa} r={r}: {got} vs {exact}");
        }
    }
}

#[test]
fn convolution_is_linear() {
    let cfg = MraConfig::new(6, 1e-5, 10.0);
    let f = FunctionTree::project(|x: &[f64]| (-(x[0] - 0.5).powi(2) - x[1] * x[1] - x[2] * x[2]).exp(), &cfg, 3).unwrap();
    let g = FunctionTree::project(|x: &[f64]| x[2] * (-2.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), &cfg, 3).unwrap();
    let op = greenop::bsh_operator(0.8, cfg.half_width, cfg.thresh).unwrap();
    let combo = FunctionTree::add(&f, &g, 2.0, -3.0).unwrap();
    let lhs = apply(&op, &combo).unwrap();
    let rhs = FunctionTree::add(&apply(&op, &f).unwrap(), &apply(&op, &g).unwrap(), 2.0, -3.0).unwrap();
    let diff = FunctionTree::add(&lhs, &rhs, 1.0, -1.0).unwrap().norm2();
    assert!(diff < 10.0 * cfg.thresh * rhs.norm2(), "‖Δ‖ = {diff}");
}

#[test]
fn kernel_shorter_than_the_domain_is_rejected() {
    let cfg = MraConfig::new(5, 1e-4, 10.0);
    let rho = charge(1.0, &cfg);
    let short = SeparatedKernel::build(0.0, 1e-5, 1e-4, 5.0).unwrap();
    assert!(matches!(apply(&short, &rho), Err(greenop::GreenError::DomainCoverage { .. })));
}
