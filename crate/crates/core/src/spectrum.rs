//! Single-particle spectrum of the periodic XY chain in a transverse field.
//!
//! After the Jordan-Wigner and Fourier transforms the chain splits into
//! independent `(k, -k)` pairs. The even-parity sector uses the half-integer
//! grid `k = (2j-1)π/N`, the odd-parity sector the integer grid `k = 2jπ/N`
//! plus the two unpaired modes at `0` and `π`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Static chain definition: `N` sites, anisotropy `γ` and transverse field `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    n_sites: usize,
    anisotropy: f64,
    field: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, anisotropy: f64, field: f64) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(Error::InvalidChain(format!(
                "number of sites must be even and >= 2, got {n_sites}"
            )));
        }
        if !(0.0..=1.0).contains(&anisotropy) {
            return Err(Error::InvalidChain(format!(
                "anisotropy must lie in [0, 1], got {anisotropy}"
            )));
        }
        if !field.is_finite() {
            return Err(Error::InvalidChain(format!(
                "field must be finite, got {field}"
            )));
        }
        Ok(Self {
            n_sites,
            anisotropy,
            field,
        })
    }

    /// Transverse-field Ising chain (`γ = 1`).
    pub fn ising(n_sites: usize, field: f64) -> Result<Self> {
        Self::new(n_sites, 1.0, field)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn is_ising(&self) -> bool {
        self.anisotropy == 1.0
    }

    /// Same chain with a different field.
    pub fn with_field(&self, field: f64) -> Result<Self> {
        Self::new(self.n_sites, self.anisotropy, field)
    }

    pub fn at(&self, beta: f64) -> Result<GibbsPoint> {
        GibbsPoint::new(*self, beta)
    }

    pub(crate) fn require_ising(&self) -> Result<()> {
        if self.is_ising() {
            Ok(())
        } else {
            Err(Error::UnsupportedRegime(
                "only defined for the Ising chain (anisotropy = 1)",
            ))
        }
    }
}

/// A thermal state label: a chain at inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsPoint {
    pub chain: ChainSpec,
    beta: f64,
}

impl GibbsPoint {
    pub fn new(chain: ChainSpec, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self { chain, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.chain, beta)
    }

    pub fn with_field(&self, field: f64) -> Result<Self> {
        Self::new(self.chain.with_field(field)?, self.beta)
    }
}

/// One Bogoliubov mode of the pair `(k, -k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub momentum: f64,
    /// `ε_k = sqrt((g - cos k)² + (γ sin k)²)`.
    pub energy: f64,
    /// Bogoliubov angle `ϑ_k` with `(sin ϑ, cos ϑ) = (γ sin k, g - cos k) / ε_k`.
    pub angle: f64,
}

/// Half-integer momenta `(2j-1)π/N`, `j = 1..=N/2`, of the even-parity sector.
pub fn positive_momenta(chain: &ChainSpec) -> Vec<f64> {
    let n = chain.n_sites;
    (1..=n / 2)
        .map(|j| (2 * j - 1) as f64 * PI / n as f64)
        .collect()
}

/// Integer momenta `2jπ/N`, `j = 1..N/2`, of the odd-parity sector, without `0` and `π`.
pub fn negative_momenta(chain: &ChainSpec) -> Vec<f64> {
    let n = chain.n_sites;
    (1..n / 2).map(|j| (2 * j) as f64 * PI / n as f64).collect()
}

pub(crate) fn mode_energy(anisotropy: f64, field: f64, k: f64) -> f64 {
    (field - k.cos()).hypot(anisotropy * k.sin())
}

pub fn mode(chain: &ChainSpec, k: f64) -> Result<Mode> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::MomentumOutOfRange(k));
    }
    let x = chain.field - k.cos();
    let y = chain.anisotropy * k.sin();
    let energy = x.hypot(y);
    if energy == 0.0 {
        return Err(Error::DegenerateMode {
            momentum: k,
            anisotropy: chain.anisotropy,
            field: chain.field,
        });
    }
    // y >= 0 for k in (0, π), so the angle lands in [0, π].
    Ok(Mode {
        momentum: k,
        energy,
        angle: y.atan2(x),
    })
}

/// Modes on the even-parity grid.
pub fn positive_modes(chain: &ChainSpec) -> Result<Vec<Mode>> {
    positive_momenta(chain)
        .into_iter()
        .map(|k| mode(chain, k))
        .collect()
}

/// Modes on the odd-parity grid (excluding `0` and `π`).
pub fn negative_modes(chain: &ChainSpec) -> Result<Vec<Mode>> {
    negative_momenta(chain)
        .into_iter()
        .map(|k| mode(chain, k))
        .collect()
}

/// Signed energies `(ε_0, ε_π) = (g - 1, g + 1)` of the unpaired odd-sector modes.
pub fn special_mode_energies(chain: &ChainSpec) -> (f64, f64) {
    (chain.field - 1.0, chain.field + 1.0)
}

/// Sector ground energies `(E₀⁺, E₀⁻)`.
pub fn ground_energies(chain: &ChainSpec) -> (f64, f64) {
    let (g, gamma) = (chain.field, chain.anisotropy);
    let even: f64 = positive_momenta(chain)
        .into_iter()
        .map(|k| mode_energy(gamma, g, k))
        .sum();
    let odd: f64 = negative_momenta(chain)
        .into_iter()
        .map(|k| mode_energy(gamma, g, k))
        .sum();
    (-2.0 * even, -2.0 * odd - 2.0)
}

/// `Δ(g) = E₀⁻ - E₀⁺` for the Ising chain.
///
/// Evaluated as an alternating sum over `k = mπ/N`, `m = 1..N-1`, which keeps
/// the result accurate when the gap is much smaller than the ground energies.
pub fn symmetry_breaking_gap(chain: &ChainSpec) -> Result<f64> {
    chain.require_ising()?;
    Ok(odd_even_energy_difference(chain))
}

pub(crate) fn odd_even_energy_difference(chain: &ChainSpec) -> f64 {
    let n = chain.n_sites;
    let alternating: f64 = (1..n)
        .map(|m| {
            let e = mode_energy(chain.anisotropy, chain.field, m as f64 * PI / n as f64);
            if m % 2 == 1 {
                e
            } else {
                -e
            }
        })
        .sum();
    2.0 * alternating - 2.0
}

/// `sqrt(g² - 2g cos(π/N) + 1)`, the energy of the lowest even-grid mode.
pub fn dynamical_gap(chain: &ChainSpec) -> Result<f64> {
    chain.require_ising()?;
    let g = chain.field;
    let c = (PI / chain.n_sites as f64).cos();
    Ok((g * g - 2.0 * g * c + 1.0).max(0.0).sqrt())
}
