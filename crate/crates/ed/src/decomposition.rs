//! Reduced density matrix of the leading block and its charge decomposition.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::fock::FockVector;
use crate::{OracleError, Result};

/// Eigenvalues below this are dropped from entropies and logarithms.
const EIGEN_CUTOFF: f64 = 1e-15;

/// Entanglement of sites `1..=ℓ` with the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub entropy: f64,
    pub number_entropy: f64,
    pub configurational_entropy: f64,
    /// Relative entropy between `ρ_A` and its block-diagonal part.
    pub asymmetry: f64,
    /// Probability of each block charge `0..=ℓ`.
    pub charge_distribution: Vec<f64>,
    /// Frobenius norm of `[ρ_A, Q_A]`.
    pub commutator_norm: f64,
}

fn xlogx_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|&p| p > EIGEN_CUTOFF).map(|p| -p * p.ln()).sum()
}

fn reduced_density_matrix(psi: &FockVector, ell: usize) -> DMatrix<Complex64> {
    let da = 1usize << ell;
    let db = 1usize << (psi.sites() - ell);
    // Sites of A come first in the ordering, so no string crosses the cut.
    let m = DMatrix::from_fn(da, db, |a, b| psi.amplitudes()[a | (b << ell)]);
    &m * m.adjoint()
}

/// `S_A`, `S_num`, `S_conf` and `ΔS_A` of the leading `ℓ` sites.
///
/// `ΔS_A` is evaluated as `Tr ρ log ρ − Tr ρ log ρ_sym`, independently of the
/// other three.
pub fn entropy_decomposition(psi: &FockVector, ell: usize) -> Result<Decomposition> {
    if ell == 0 || ell >= psi.sites() {
        return Err(OracleError::InvalidInput(format!("block length must be in 1..{}, got {ell}", psi.sites())));
    }
    let rho = reduced_density_matrix(psi, ell);
    let da = rho.nrows();
    let charge = |a: usize| a.count_ones() as usize;

    let eig = SymmetricEigen::new(rho.clone());
    let entropy = xlogx_sum(eig.eigenvalues.iter().copied());

    let mut charge_distribution = vec![0.0; ell + 1];
    let mut configurational_entropy = 0.0;
    // Tr ρ log ρ_sym, block by block.
    let mut cross = 0.0;
    for q in 0..=ell {
        let idx: Vec<usize> = (0..da).filter(|&a| charge(a) == q).collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| rho[(idx[i], idx[j])]);
        let p: f64 = block.diagonal().iter().map(|z| z.re).sum();
        charge_distribution[q] = p;
        if p <= EIGEN_CUTOFF {
            continue;
        }
        let be = SymmetricEigen::new(block.clone());
        configurational_entropy += p * xlogx_sum(be.eigenvalues.iter().map(|&mu| mu / p));
        for (j, &mu) in be.eigenvalues.iter().enumerate() {
            if mu > EIGEN_CUTOFF {
                let v = be.eigenvectors.column(j);
                let weight = (v.adjoint() * &block * v)[(0, 0)].re;
                cross += weight * mu.ln();
            }
        }
    }
    let number_entropy = xlogx_sum(charge_distribution.iter().copied());
    let asymmetry = -entropy - cross;

    let q_diag =
        DMatrix::from_fn(
            da,
            da,
            |a, b| if a == b { Complex64::new(charge(a) as f64, 0.0) } else { Complex64::new(0.0, 0.0) },
        );
    let commutator_norm = (&rho * &q_diag - &q_diag * &rho).norm();

    Ok(Decomposition {
        entropy,
        number_entropy,
        configurational_entropy,
        asymmetry,
        charge_distribution,
        commutator_norm,
    })
}
