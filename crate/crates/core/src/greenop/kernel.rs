use super::GreenError;
use std::f64::consts::PI;

/// Largest number of Gaussian terms a kernel may use.
pub const MAX_TERMS: usize = 600;
/// Finest quadrature subdivision tried: the step in `s = ln t` is `ln 2 / m`.
const MAX_SUBDIVISION: u32 = 12;
/// Number of log-spaced radii used to certify a kernel.
pub const CHECK_SAMPLES: usize = 400;

/// One term `c · exp(-a r²)` of a separated kernel.
///
/// Exponents lie on the global grid `a = exp(2 j ln2 / m)`, so operator
/// blocks can be shared between kernels with different decay constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub coeff: f64,
    pub exponent: f64,
    pub(crate) grid_index: i64,
}

/// Sum-of-Gaussians approximation `Σ c_j exp(-a_j r²) ≈ scale · e^{-κr}/(4πr)`
/// on `[r_lo, r_hi]`.
#[derive(Debug, Clone)]
pub struct SeparatedKernel {
    kappa: f64,
    scale: f64,
    terms: Vec<GaussianTerm>,
    r_lo: f64,
    r_hi: f64,
    eps: f64,
    subdivision: u32,
    achieved: f64,
}

impl SeparatedKernel {
    /// Discretizes `e^{-κr}/r = (2/√π) ∫ exp(-r²t² - κ²/(4t²)) dt` with the
    /// trapezoidal rule in `s = ln t`, refining the step until the sampled
    /// error is at most `eps`.
    ///
    /// The error is measured relative to `max(K(r), K₀(r_hi))`, where `K₀` is
    /// the Coulomb kernel: purely relative for `κ = 0`, and absolute at the
    /// Coulomb floor where a Helmholtz kernel has decayed below it.
    pub fn build(kappa: f64, eps: f64, r_lo: f64, r_hi: f64) -> Result<Self, GreenError> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(GreenError::InvalidKernel(format!("decay constant must be non-negative, got {kappa}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(GreenError::InvalidKernel(format!("accuracy must lie in (0, 1), got {eps}")));
        }
        if !(r_lo > 0.0 && r_hi > r_lo) || !r_hi.is_finite() {
            return Err(GreenError::InvalidKernel(format!("invalid range [{r_lo}, {r_hi}]")));
        }
        let mut best_err = f64::INFINITY;
        for m in 1..=MAX_SUBDIVISION {
            let kern = Self::with_subdivision(kappa, eps, r_lo, r_hi, m);
            if kern.terms.len() > MAX_TERMS {
                break;
            }
            let err = kern.max_sampled_error(CHECK_SAMPLES);
            best_err = best_err.min(err);
            if err <= eps {
                return Ok(Self { achieved: err, ..kern });
            }
        }
        Err(GreenError::AccuracyNotReached {
            requested: eps,
            achieved: best_err,
        })
    }

    /// Kernel on a fixed quadrature grid with step `ln 2 / m` (not certified).
    pub fn with_subdivision(kappa: f64, eps: f64, r_lo: f64, r_hi: f64, m: u32) -> Self {
        let hs = std::f64::consts::LN_2 / m as f64;
        let log_eps = (1.0 / eps).ln();
        // beyond s_hi every term has decayed at r_lo
        let s_hi = 0.5 * ((log_eps + 6.0) / (r_lo * r_lo)).ln();
        // below s_lo the remaining tail ∫ e^s ds is negligible at r_hi
        let mut s_lo = (0.01 * eps * PI.sqrt() / (2.0 * r_hi)).ln();
        if kappa > 0.0 {
            // Helmholtz damping exp(-κ² e^{-2s}/4) cuts the lower tail
            let s_damp = (kappa / (2.0 * (log_eps + 6.0).sqrt())).ln();
            s_lo = s_lo.max(s_damp);
        }
        let j_lo = (s_lo / hs).floor() as i64;
        let j_hi = (s_hi / hs).ceil() as i64;
        let pref = 2.0 / PI.sqrt() * hs / (4.0 * PI);
        let terms = (j_lo..=j_hi)
            .filter_map(|j| {
                let s = j as f64 * hs;
                let coeff = pref * (s - kappa * kappa * (-2.0 * s).exp() / 4.0).exp();
                (coeff > 0.0 && coeff.is_finite()).then(|| GaussianTerm {
                    coeff,
                    exponent: (2.0 * s).exp(),
                    grid_index: j,
                })
            })
            .collect();
        Self {
            kappa,
            scale: 1.0,
            terms,
            r_lo,
            r_hi,
            eps,
            subdivision: m,
            achieved: f64::NAN,
        }
    }

    /// Kernel of `V = ∫ ρ(r')/|r - r'| dr'` (Poisson kernel including `4π`).
    pub fn coulomb(eps: f64, r_lo: f64, r_hi: f64) -> Result<Self, GreenError> {
        Ok(Self::build(0.0, eps, r_lo, r_hi)?.scaled(4.0 * PI))
    }

    /// Multiplies every coefficient (and the target kernel) by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        for t in &mut self.terms {
            t.coeff *= factor;
        }
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r_lo, self.r_hi)
    }

    pub fn accuracy(&self) -> f64 {
        self.eps
    }

    /// Maximum sampled error measured when the kernel was certified.
    pub fn achieved_error(&self) -> f64 {
        self.achieved
    }

    pub(crate) fn subdivision(&self) -> u32 {
        self.subdivision
    }

    /// The separated approximation at radius `r`.
    pub fn value(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.terms.iter().map(|t| t.coeff * (-t.exponent * r2).exp()).sum()
    }

    /// The exact kernel `scale · e^{-κr}/(4πr)`.
    pub fn exact(&self, r: f64) -> f64 {
        self.scale * (-self.kappa * r).exp() / (4.0 * PI * r)
    }

    /// Error at `r` in the measure used for certification.
    pub fn error_at(&self, r: f64) -> f64 {
        let exact = self.exact(r);
        let floor = self.scale / (4.0 * PI * self.r_hi);
        (self.value(r) - exact).abs() / exact.max(floor)
    }

    /// Largest error over `n` log-spaced radii in `[r_lo, r_hi]`.
    pub fn max_sampled_error(&self, n: usize) -> f64 {
        let (a, b) = (self.r_lo.ln(), self.r_hi.ln());
        (0..n)
            .map(|i| {
                let r = (a + (b - a) * i as f64 / (n - 1) as f64).exp();
                self.error_at(r)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_kernel_is_accurate_on_the_range() {
        let k = SeparatedKernel::build(0.0, 1e-6, 1e-4, 100.0).unwrap();
        assert!(k.max_sampled_error(1000) <= 1e-6);
        assert!(k.terms().iter().all(|t| t.coeff > 0.0 && t.exponent > 0.0));
    }

    #[test]
    fn helmholtz_value_at_unit_radius() {
        let k = SeparatedKernel::build(1.0, 1e-6, 1e-4, 100.0).unwrap();
        let exact = (-1.0f64).exp() / (4.0 * PI);
        assert!(((k.value(1.0) - exact) / exact).abs() <= 1e-6);
    }

    #[test]
    fn wider_range_needs_at_least_as_many_terms() {
        for &kappa in &[0.0, 0.7] {
            let a = SeparatedKernel::build(kappa, 1e-5, 1e-3, 50.0).unwrap();
            let b = SeparatedKernel::build(kappa, 1e-5, 1e-3, 100.0).unwrap();
            assert!(b.num_terms() >= a.num_terms());
        }
    }

    #[test]
    fn finer_grids_are_more_accurate() {
        let errs: Vec<f64> = (1..=4)
            .map(|m| SeparatedKernel::with_subdivision(0.0, 1e-8, 1e-4, 100.0, m).max_sampled_error(300))
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0], "{errs:?}");
        }
    }

    #[test]
    fn unreachable_accuracy_is_reported() {
        // below the rounding floor (~7e-16) of a several-hundred-term sum
        let err = SeparatedKernel::build(0.0, 1e-16, 1e-8, 1e4).unwrap_err();
        match err {
            GreenError::AccuracyNotReached { requested, achieved } => assert!(achieved > requested),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
