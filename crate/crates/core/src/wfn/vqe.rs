//! Energy evaluation, analytic gradients and the VQE driver.

use super::sector::SectorOperator;
use super::{expectation, Circuit, QubitState, ShiftRule, WfnError};
use crate::secondq::PauliPolynomial;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

/// Step of the central finite-difference fallback (error `O(h²)`).
pub const FD_STEP: f64 = 1e-5;

/// Anything with a real expectation value on a statevector.
pub trait Observable {
    fn expect(&self, psi: &QubitState) -> Result<f64, WfnError>;
}

impl Observable for PauliPolynomial {
    fn expect(&self, psi: &QubitState) -> Result<f64, WfnError> {
        expectation(self, psi)
    }
}

impl Observable for SectorOperator {
    /// Components outside the sector are ignored; the caller guarantees
    /// the state conserves particle number and `S_z`.
    fn expect(&self, psi: &QubitState) -> Result<f64, WfnError> {
        let v = self.basis.project(psi);
        let m = &self.matrix;
        let d = v.len();
        let mut acc = 0.0;
        for j in 0..d {
            if v[j].norm_sqr() == 0.0 {
                continue;
            }
            for i in 0..d {
                let h = m[(i, j)];
                if h != 0.0 {
                    acc += h * (v[i].conj() * v[j]).re;
                }
            }
        }
        Ok(acc)
    }
}

pub fn energy<O: Observable + ?Sized>(h: &O, c: &Circuit, theta: &[f64]) -> Result<f64, WfnError> {
    h.expect(&c.prepare(theta)?)
}

/// `∂E/∂θ_j`, summing over every gate that carries parameter `j`.
pub fn gradient<O: Observable + ?Sized>(h: &O, c: &Circuit, theta: &[f64]) -> Result<Vec<f64>, WfnError> {
    let mut grad = vec![0.0; c.n_params];
    let e = |shift: (usize, f64)| -> Result<f64, WfnError> { h.expect(&c.prepare_shifted(theta, Some(shift))?) };
    for (gi, gate) in c.gates.iter().enumerate() {
        let d = match gate.rule {
            ShiftRule::TwoTerm => 0.5 * (e((gi, FRAC_PI_2))? - e((gi, -FRAC_PI_2))?),
            ShiftRule::FourTerm => {
                // exact for the frequencies {1/2, 1} of a {−1, 0, 1} spectrum
                let r1 = (SQRT_2 + 2.0) / 8.0;
                let r2 = (SQRT_2 - 2.0) / 8.0;
                let s = 3.0 * FRAC_PI_2;
                r1 * (e((gi, FRAC_PI_2))? - e((gi, -FRAC_PI_2))?) + r2 * (e((gi, s))? - e((gi, -s))?)
            }
            ShiftRule::FiniteDifference => (e((gi, FD_STEP))? - e((gi, -FD_STEP))?) / (2.0 * FD_STEP),
        };
        grad[gate.param] += d;
    }
    Ok(grad)
}

/// Central finite-difference gradient over whole parameters (reference path).
pub fn finite_difference_gradient<O: Observable + ?Sized>(
    h: &O,
    c: &Circuit,
    theta: &[f64],
    step: f64,
) -> Result<Vec<f64>, WfnError> {
    let mut out = Vec::with_capacity(theta.len());
    let mut t = theta.to_vec();
    for j in 0..theta.len() {
        t[j] = theta[j] + step;
        let ep = energy(h, c, &t)?;
        t[j] = theta[j] - step;
        let em = energy(h, c, &t)?;
        t[j] = theta[j];
        out.push((ep - em) / (2.0 * step));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// stop when successive energies differ by at most this (and the gradient is small)
    pub energy_tol: f64,
    pub gradient_tol: f64,
    /// initial amplitude range `[−init_range, init_range]`
    pub init_range: f64,
    /// extra starting point tried before the random restarts
    pub warm_start: Option<Vec<f64>>,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            seed: 0,
            max_iterations: 500,
            energy_tol: 1e-9,
            gradient_tol: 1e-7,
            init_range: 0.1,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    pub theta: Vec<f64>,
    pub energy: f64,
    /// final energy of each start (warm start first when present); `NaN` for excluded starts
    pub restart_energies: Vec<f64>,
    /// energies of the accepted iterates of the best start
    pub trajectory: Vec<f64>,
    pub seed: u64,
}

/// Best-of-restarts quasi-Newton (BFGS) minimization of `⟨ψ(θ)|H|ψ(θ)⟩`.
pub fn vqe<O: Observable + ?Sized>(h: &O, c: &Circuit, opts: &VqeOptions) -> Result<VqeResult, WfnError> {
    if opts.restarts == 0 && opts.warm_start.is_none() {
        return Err(WfnError::InvalidCircuit("at least one restart is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = Vec::new();
    if let Some(w) = &opts.warm_start {
        if w.len() != c.n_params {
            return Err(WfnError::Dimension(format!("warm start has {} parameters, circuit {}", w.len(), c.n_params)));
        }
        starts.push(w.clone());
    }
    for _ in 0..opts.restarts {
        starts.push((0..c.n_params).map(|_| rng.gen_range(-opts.init_range..=opts.init_range)).collect());
    }
    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    let mut restart_energies = Vec::with_capacity(starts.len());
    for (r, x0) in starts.into_iter().enumerate() {
        match bfgs(h, c, x0, opts) {
            Ok((x, e, traj)) => {
                restart_energies.push(e);
                if best.as_ref().map_or(true, |b| e < b.1) {
                    best = Some((x, e, traj));
                }
            }
            Err(err) => {
                log::warn!("VQE start {r} excluded: {err}");
                restart_energies.push(f64::NAN);
            }
        }
    }
    let (theta, energy, trajectory) =
        best.ok_or_else(|| WfnError::NotConverged("every VQE start diverged".into()))?;
    Ok(VqeResult {
        theta,
        energy,
        restart_energies,
        trajectory,
        seed: opts.seed,
    })
}

fn bfgs<O: Observable + ?Sized>(
    h: &O,
    c: &Circuit,
    x0: Vec<f64>,
    opts: &VqeOptions,
) -> Result<(Vec<f64>, f64, Vec<f64>), WfnError> {
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut f = energy(h, c, x.as_slice())?;
    let mut g = DVector::from_vec(gradient(h, c, x.as_slice())?);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut traj = vec![f];
    if n == 0 {
        return Ok((vec![], f, traj));
    }
    for _ in 0..opts.max_iterations {
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(WfnError::NotConverged("non-finite energy or gradient".into()));
        }
        if g.norm() <= opts.gradient_tol {
            break;
        }
        let mut d = -(&hinv * &g);
        if d.dot(&g) >= 0.0 {
            // lost descent direction: reset the curvature model
            hinv = DMatrix::identity(n, n);
            d = -g.clone();
        }
        // Armijo backtracking
        let slope = d.dot(&g);
        let mut alpha = 1.0;
        let (mut x_new, mut f_new) = (x.clone(), f);
        let mut accepted = false;
        for _ in 0..40 {
            x_new = &x + &d * alpha;
            f_new = energy(h, c, x_new.as_slice())?;
            if f_new <= f + 1e-4 * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        let g_new = DVector::from_vec(gradient(h, c, x_new.as_slice())?);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - &s * y.transpose() * rho;
            hinv = &a * &hinv * a.transpose() + &s * s.transpose() * rho;
        }
        let df = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        traj.push(f);
        if df.abs() <= opts.energy_tol && g.norm() <= 1e-4 {
            break;
        }
    }
    Ok((x.as_slice().to_vec(), f, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secondq::{Pauli, PauliString};
    use num_complex::Complex64;

    fn z0() -> PauliPolynomial {
        PauliPolynomial::term(PauliString::single(0, Pauli::Z), Complex64::new(1.0, 0.0))
    }

    fn y_rotation() -> Circuit {
        let mut c = Circuit::new(1, 0);
        let y = PauliPolynomial::term(PauliString::single(0, Pauli::Y), Complex64::new(1.0, 0.0));
        c.push_parameter(vec![(y, ShiftRule::TwoTerm, "RY".into())]).unwrap();
        c
    }

    #[test]
    fn cosine_toy_gradient() {
        let (h, c) = (z0(), y_rotation());
        assert!(gradient(&h, &c, &[0.0]).unwrap()[0].abs() < 1e-10);
        assert!((gradient(&h, &c, &[FRAC_PI_2]).unwrap()[0] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn identity_observable_has_zero_gradient() {
        let c = y_rotation();
        let id = PauliPolynomial::identity();
        assert_eq!(gradient(&id, &c, &[0.4]).unwrap(), vec![0.0]);
    }

    #[test]
    fn toy_minimum_is_minus_one() {
        let r = vqe(&z0(), &y_rotation(), &VqeOptions::default()).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let opts = VqeOptions {
            restarts: 3,
            seed: 42,
            ..Default::default()
        };
        let a = vqe(&z0(), &y_rotation(), &opts).unwrap();
        let b = vqe(&z0(), &y_rotation(), &opts).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.theta, b.theta);
    }
}
