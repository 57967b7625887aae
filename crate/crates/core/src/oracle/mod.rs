//! Brute-force exact diagonalization of the spin Hamiltonian.
//!
//! Independent of the free-fermion formulas: the Hamiltonian is assembled in
//! the `σ^z` basis, split into its two parity blocks (the parity `Π σ^z` is
//! diagonal there) and each block is diagonalized densely.

pub mod linalg;

use crate::error::{Error, Result};
use crate::numerics::log_add_exp;
use crate::spectrum::ChainSpec;
use linalg::{nuclear_norm, DenseMatrix, SymmetricEigen};

pub use linalg::DenseMatrix as DenseHermitian;

pub const DEFAULT_SITE_CAP: usize = 12;

/// Normalized Gibbs weights below this are dropped from fidelity products.
const WEIGHT_CUTOFF: f64 = 1e-30;

fn check_cap(chain: &ChainSpec, cap: usize) -> Result<()> {
    if chain.n_sites() > cap {
        return Err(Error::Resource {
            n_sites: chain.n_sites(),
            cap,
        });
    }
    Ok(())
}

/// Parity `Π σ^z` of a basis state; bit set means spin down.
pub fn basis_parity(state: usize) -> i32 {
    if state.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `⟨t|H|s⟩` contributions from state `s`, as `(t, amplitude)` pairs.
fn hamiltonian_column(chain: &ChainSpec, s: usize, mut emit: impl FnMut(usize, f64)) {
    let n = chain.n_sites();
    let gamma = chain.anisotropy();
    let mut diag = 0.0;
    for i in 0..n {
        diag -= chain.field() * if s >> i & 1 == 0 { 1.0 } else { -1.0 };
    }
    emit(s, diag);
    for i in 0..n {
        let j = (i + 1) % n;
        // XX flips both spins with amplitude 1; YY does the same with −1 for
        // parallel spins and +1 for antiparallel ones.
        let parallel = (s >> i & 1) == (s >> j & 1);
        let amp = if parallel { -gamma } else { -1.0 };
        if amp != 0.0 {
            emit(s ^ (1 << i) ^ (1 << j), amp);
        }
    }
}

/// Full `2^N × 2^N` Hamiltonian with periodic boundaries.
pub fn build_hamiltonian(chain: &ChainSpec) -> Result<DenseHermitian> {
    build_hamiltonian_with_cap(chain, DEFAULT_SITE_CAP)
}

pub fn build_hamiltonian_with_cap(chain: &ChainSpec, cap: usize) -> Result<DenseHermitian> {
    check_cap(chain, cap)?;
    let dim = 1usize << chain.n_sites();
    let mut h = DenseMatrix::zeros(dim, dim);
    for s in 0..dim {
        hamiltonian_column(chain, s, |t, amp| h[(t, s)] += amp);
    }
    Ok(h)
}

/// One parity block: basis states, eigenvalues and eigenvectors in that basis.
#[derive(Debug, Clone)]
pub struct ParityBlock {
    pub parity: i32,
    pub states: Vec<usize>,
    pub eigen: SymmetricEigen,
}

impl ParityBlock {
    fn new(chain: &ChainSpec, parity: i32) -> Result<Self> {
        let dim = 1usize << chain.n_sites();
        let states: Vec<usize> = (0..dim).filter(|&s| basis_parity(s) == parity).collect();
        let mut index = vec![usize::MAX; dim];
        for (i, &s) in states.iter().enumerate() {
            index[s] = i;
        }
        let m = states.len();
        let mut h = DenseMatrix::zeros(m, m);
        for (col, &s) in states.iter().enumerate() {
            let mut leak = None;
            hamiltonian_column(chain, s, |t, amp| {
                let row = index[t];
                if row == usize::MAX {
                    leak = Some(t);
                } else {
                    h[(row, col)] += amp;
                }
            });
            if let Some(t) = leak {
                return Err(Error::ParityClassification(format!(
                    "Hamiltonian couples basis states {s} and {t} of different parity"
                )));
            }
        }
        Ok(Self {
            parity,
            states,
            eigen: SymmetricEigen::new(&h)?,
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigen.values[0]
    }

    pub fn ground_state(&self) -> &[f64] {
        self.eigen.vectors.row(0)
    }
}

/// Observables of a thermal state resolved by parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorObservables {
    /// `ln Tr[P₊ e^{−βH}]`.
    pub ln_z_plus: f64,
    /// `ln Tr[P₋ e^{−βH}]`.
    pub ln_z_minus: f64,
    pub e0_plus: f64,
    pub e0_minus: f64,
    /// Second-lowest even-parity level.
    pub e1_plus: f64,
    /// `β² (⟨H²⟩ − ⟨H⟩²)`.
    pub cv: f64,
}

/// Diagonalized chain, both parity blocks.
#[derive(Debug, Clone)]
pub struct ExactDiagonalization {
    pub chain: ChainSpec,
    pub even: ParityBlock,
    pub odd: ParityBlock,
}

impl ExactDiagonalization {
    pub fn new(chain: &ChainSpec) -> Result<Self> {
        Self::with_cap(chain, DEFAULT_SITE_CAP)
    }

    pub fn with_cap(chain: &ChainSpec, cap: usize) -> Result<Self> {
        check_cap(chain, cap)?;
        Ok(Self {
            chain: *chain,
            even: ParityBlock::new(chain, 1)?,
            odd: ParityBlock::new(chain, -1)?,
        })
    }

    pub fn blocks(&self) -> [&ParityBlock; 2] {
        [&self.even, &self.odd]
    }

    pub fn min_energy(&self) -> f64 {
        self.even.ground_energy().min(self.odd.ground_energy())
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .blocks()
            .iter()
            .flat_map(|b| b.eigen.values.iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    fn ln_block_trace(&self, block: &ParityBlock, beta: f64) -> f64 {
        let e_min = self.min_energy();
        let s: f64 = block
            .eigen
            .values
            .iter()
            .map(|&e| (-beta * (e - e_min)).exp())
            .sum();
        s.ln() - beta * e_min
    }

    /// `ln Tr e^{−βH}`.
    pub fn ln_z(&self, beta: f64) -> f64 {
        log_add_exp(
            self.ln_block_trace(&self.even, beta),
            self.ln_block_trace(&self.odd, beta),
        )
    }

    /// `β² Var(H)` under the Gibbs distribution.
    pub fn specific_heat(&self, beta: f64) -> f64 {
        let e_min = self.min_energy();
        let levels = self.eigenvalues();
        let weights: Vec<f64> = levels
            .iter()
            .map(|&e| (-beta * (e - e_min)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let mean: f64 = levels.iter().zip(&weights).map(|(e, w)| e * w).sum::<f64>() / z;
        let var: f64 = levels
            .iter()
            .zip(&weights)
            .map(|(e, w)| (e - mean).powi(2) * w)
            .sum::<f64>()
            / z;
        beta * beta * var
    }

    pub fn sector_observables(&self, beta: f64) -> SectorObservables {
        SectorObservables {
            ln_z_plus: self.ln_block_trace(&self.even, beta),
            ln_z_minus: self.ln_block_trace(&self.odd, beta),
            e0_plus: self.even.eigen.values[0],
            e0_minus: self.odd.eigen.values[0],
            e1_plus: self.even.eigen.values.get(1).copied().unwrap_or(f64::NAN),
            cv: self.specific_heat(beta),
        }
    }

    /// Normalized Gibbs weights per block, indexed like the eigenvalues.
    fn gibbs_weights(&self, beta: f64) -> [Vec<f64>; 2] {
        let e_min = self.min_energy();
        let w = |b: &ParityBlock| -> Vec<f64> {
            b.eigen
                .values
                .iter()
                .map(|&e| (-beta * (e - e_min)).exp())
                .collect()
        };
        let (we, wo) = (w(&self.even), w(&self.odd));
        let z: f64 = we.iter().sum::<f64>() + wo.iter().sum::<f64>();
        [
            we.into_iter().map(|x| x / z).collect(),
            wo.into_iter().map(|x| x / z).collect(),
        ]
    }

    /// Ground-state overlap `|⟨ψ₀(self)|ψ₀(other)⟩|` within one parity sector.
    pub fn ground_overlap(&self, other: &Self, parity: i32) -> Result<f64> {
        if self.chain.n_sites() != other.chain.n_sites() {
            return Err(Error::DimensionMismatch {
                left: self.chain.n_sites(),
                right: other.chain.n_sites(),
            });
        }
        let (a, b) = if parity > 0 {
            (&self.even, &other.even)
        } else {
            (&self.odd, &other.odd)
        };
        let dot: f64 = a
            .ground_state()
            .iter()
            .zip(b.ground_state())
            .map(|(x, y)| x * y)
            .sum();
        Ok(dot.abs())
    }
}

/// Uhlmann fidelity `Tr sqrt(sqrt(ρ) σ sqrt(ρ))` of two Gibbs states.
///
/// Uses `F = ‖sqrt(Λ_a) V_aᵀ V_b sqrt(Λ_b)‖_*`, the nuclear norm of the
/// weighted eigenvector overlap, evaluated block by block since both states
/// commute with the parity.
pub fn gibbs_and_fidelity(
    a: &ExactDiagonalization,
    beta_a: f64,
    b: &ExactDiagonalization,
    beta_b: f64,
) -> Result<f64> {
    if a.chain.n_sites() != b.chain.n_sites() {
        return Err(Error::DimensionMismatch {
            left: a.chain.n_sites(),
            right: b.chain.n_sites(),
        });
    }
    let wa = a.gibbs_weights(beta_a);
    let wb = b.gibbs_weights(beta_b);
    let mut total = 0.0;
    for (idx, (ba, bb)) in [(&a.even, &b.even), (&a.odd, &b.odd)]
        .into_iter()
        .enumerate()
    {
        let keep_a: Vec<usize> = (0..wa[idx].len())
            .filter(|&i| wa[idx][i] >= WEIGHT_CUTOFF)
            .collect();
        let keep_b: Vec<usize> = (0..wb[idx].len())
            .filter(|&j| wb[idx][j] >= WEIGHT_CUTOFF)
            .collect();
        if keep_a.is_empty() || keep_b.is_empty() {
            continue;
        }
        let va = &ba.eigen.vectors;
        let vb = &bb.eigen.vectors;
        let k = DenseMatrix::from_fn(keep_a.len(), keep_b.len(), |r, c| {
            let (i, j) = (keep_a[r], keep_b[c]);
            let dot: f64 = va.row(i).iter().zip(vb.row(j)).map(|(x, y)| x * y).sum();
            wa[idx][i].sqrt() * dot * wb[idx][j].sqrt()
        });
        total += nuclear_norm(&k)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{ln_z, z_parts};
    use crate::spectrum::{ground_energies, mode, symmetry_breaking_gap};
    use std::f64::consts::PI;

    fn ed(n: usize, gamma: f64, g: f64) -> ExactDiagonalization {
        ExactDiagonalization::new(&ChainSpec::new(n, gamma, g).unwrap()).unwrap()
    }

    #[test]
    fn two_site_spectrum() {
        // The single bond is counted twice under periodic closure: H = −2σˣσˣ.
        let c = ChainSpec::ising(2, 0.0).unwrap();
        let h = build_hamiltonian(&c).unwrap();
        let eig = SymmetricEigen::new(&h).unwrap();
        let expected = [-2.0, -2.0, 2.0, 2.0];
        for (x, y) in eig.values.iter().zip(expected) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric_and_commutes_with_parity() {
        for (n, gamma, g) in [(4, 1.0, 0.7), (6, 0.5, 1.3), (8, 0.0, -0.4)] {
            let h = build_hamiltonian(&ChainSpec::new(n, gamma, g).unwrap()).unwrap();
            assert!(h.max_asymmetry() <= 1e-13);
            for s in 0..h.rows() {
                for t in 0..h.cols() {
                    if h[(s, t)] != 0.0 {
                        assert_eq!(basis_parity(s), basis_parity(t));
                    }
                }
            }
        }
    }

    #[test]
    fn full_and_block_spectra_agree() {
        let c = ChainSpec::new(6, 0.5, 0.8).unwrap();
        let full = SymmetricEigen::new(&build_hamiltonian(&c).unwrap())
            .unwrap()
            .values;
        let blocks = ExactDiagonalization::new(&c).unwrap().eigenvalues();
        for (x, y) in full.iter().zip(&blocks) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let c = ChainSpec::ising(14, 1.0).unwrap();
        assert!(matches!(
            ExactDiagonalization::new(&c),
            Err(Error::Resource {
                n_sites: 14,
                cap: 12
            })
        ));
        assert!(build_hamiltonian_with_cap(&ChainSpec::ising(6, 1.0).unwrap(), 4).is_err());
    }

    #[test]
    fn sector_ground_energies_match_formulas() {
        for (n, g) in [(8, 1.0), (6, 2.0), (8, 0.5), (6, 0.3)] {
            let c = ChainSpec::ising(n, g).unwrap();
            let o = ExactDiagonalization::new(&c)
                .unwrap()
                .sector_observables(1.0);
            let (ep, em) = ground_energies(&c);
            assert!((o.e0_plus - ep).abs() < 1e-10 * ep.abs());
            assert!((o.e0_minus - em).abs() < 1e-10 * em.abs());
            let gap = symmetry_breaking_gap(&c).unwrap();
            assert!((o.e0_minus - o.e0_plus - gap).abs() < 1e-10);
        }
    }

    #[test]
    fn critical_gaps_at_eight_sites() {
        let c = ChainSpec::ising(8, 1.0).unwrap();
        let o = ExactDiagonalization::new(&c)
            .unwrap()
            .sector_observables(1.0);
        assert!((o.e0_minus - o.e0_plus - 2.0 * (PI / 32.0).tan()).abs() < 1e-10);
        // Lowest even excitation: two quasiparticles of energy 2ε at k = π/8.
        let eps = mode(&c, PI / 8.0).unwrap().energy;
        assert!((o.e1_plus - o.e0_plus - 4.0 * eps).abs() < 1e-10);
        assert!((4.0 * eps - 8.0 * (PI / 16.0).sin()).abs() < 1e-14);
    }

    #[test]
    fn partition_and_sector_traces() {
        for (n, gamma, g, beta) in [(6, 1.0, 1.0, 2.0), (6, 1.0, 0.5, 5.0), (8, 0.5, 1.5, 0.5)] {
            let c = ChainSpec::new(n, gamma, g).unwrap();
            let e = ExactDiagonalization::new(&c).unwrap();
            let p = c.at(beta).unwrap();
            assert!((e.ln_z(beta) - ln_z(&p)).abs() < 1e-10);
            let (zp, zm) = z_parts(&p).sector_traces();
            let o = e.sector_observables(beta);
            assert!((o.ln_z_plus - zp.ln()).abs() < 1e-10);
            assert!((o.ln_z_minus - zm.ln()).abs() < 1e-10);
            assert!((log_add_exp(o.ln_z_plus, o.ln_z_minus) - e.ln_z(beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_fidelity_basics() {
        let a = ed(6, 1.0, 1.0);
        let b = ed(6, 1.0, 1.1);
        assert!((gibbs_and_fidelity(&a, 3.0, &a, 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((gibbs_and_fidelity(&a, 0.0, &b, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let fab = gibbs_and_fidelity(&a, 10.0, &b, 10.0).unwrap();
        let fba = gibbs_and_fidelity(&b, 10.0, &a, 10.0).unwrap();
        assert!((fab - fba).abs() < 1e-13 && fab < 1.0);
    }

    #[test]
    fn specific_heat_vanishes_at_infinite_temperature() {
        assert_eq!(ed(6, 1.0, 1.0).specific_heat(0.0), 0.0);
    }
}
