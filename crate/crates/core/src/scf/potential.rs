use super::molecule::{distance, Molecule};
use super::ScfError;
use crate::mra::{FunctionTree, MraConfig};
use statrs::function::erf::erf;

/// Smoothing error constant of the charge-smoothing profile: the
/// electron–nucleus energy error per atom is about `0.00435 Z⁵ s³`.
const SMOOTHING_ERROR_CONSTANT: f64 = 0.00435;
pub const MIN_SMOOTHING_LENGTH: f64 = 1e-4;

/// Smoothing length giving an energy error of roughly `eps / 10` for nucleus `z`.
pub fn smoothing_length(z: u32, eps: f64) -> f64 {
    let s = (eps / (10.0 * SMOOTHING_ERROR_CONSTANT * (z as f64).powi(5))).cbrt();
    s.max(MIN_SMOOTHING_LENGTH)
}

/// Smoothed `1/r` profile `u(r) = erf(r)/r + (e^{-r²} + 16 e^{-4r²}) / (3√π)`.
pub fn smoothed_coulomb(r: f64) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let erf_over_r = if r < 1e-3 {
        let r2 = r * r;
        2.0 / sqrt_pi * (1.0 - r2 / 3.0 + r2 * r2 / 10.0)
    } else {
        erf(r) / r
    };
    erf_over_r + ((-r * r).exp() + 16.0 * (-4.0 * r * r).exp()) / (3.0 * sqrt_pi)
}

/// Nuclear attraction with per-atom smoothing, projected on a 3D tree.
#[derive(Debug, Clone)]
pub struct SmoothedNuclearPotential {
    molecule: Molecule,
    smoothing: Vec<f64>,
    tree: FunctionTree,
}

impl SmoothedNuclearPotential {
    pub fn new(mol: &Molecule, cfg: &MraConfig) -> Result<Self, ScfError> {
        mol.check_in_box(cfg.half_width)?;
        let smoothing: Vec<f64> = mol.atoms.iter().map(|a| smoothing_length(a.z, cfg.thresh)).collect();
        let centres: Vec<[f64; 3]> = mol.atoms.iter().map(|a| a.position).collect();
        let finest = smoothing.iter().cloned().fold(f64::INFINITY, f64::min);
        let atoms = mol.atoms.clone();
        let s2 = smoothing.clone();
        let tree = FunctionTree::project_refined(
            move |x| potential_value(&atoms, &s2, [x[0], x[1], x[2]]),
            cfg,
            3,
            &centres,
            finest,
        )?;
        Ok(Self {
            molecule: mol.clone(),
            smoothing,
            tree,
        })
    }

    pub fn tree(&self) -> &FunctionTree {
        &self.tree
    }

    pub fn smoothing_lengths(&self) -> &[f64] {
        &self.smoothing
    }

    pub fn molecule(&self) -> &Molecule {
        &self.molecule
    }

    /// Exact value of the smoothed potential (not the projection).
    pub fn value(&self, r: [f64; 3]) -> f64 {
        potential_value(&self.molecule.atoms, &self.smoothing, r)
    }
}

fn potential_value(atoms: &[super::Atom], smoothing: &[f64], r: [f64; 3]) -> f64 {
    atoms
        .iter()
        .zip(smoothing)
        .map(|(a, &s)| -(a.z as f64) * smoothed_coulomb(distance(&r, &a.position) / s) / s)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_is_coulombic() {
        for r in [0.5, 1.0, 5.0, 30.0] {
            assert!((smoothed_coulomb(r / 1e-2) / 1e-2 - 1.0 / r).abs() * r < 1e-12);
        }
        let s = smoothing_length(1, 1e-4);
        let r = 10.0 * s;
        assert!(((smoothed_coulomb(r / s) / s) * r - 1.0).abs() < 1e-6);
    }

    #[test]
    fn profile_is_continuous_at_the_series_switch() {
        let a = smoothed_coulomb(1e-3 - 1e-12);
        let b = smoothed_coulomb(1e-3 + 1e-12);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn smoothing_shrinks_with_charge_and_threshold() {
        assert!(smoothing_length(2, 1e-4) < smoothing_length(1, 1e-4));
        assert!(smoothing_length(1, 1e-6) < smoothing_length(1, 1e-4));
        assert_eq!(smoothing_length(10, 1e-12), MIN_SMOOTHING_LENGTH);
    }
}
