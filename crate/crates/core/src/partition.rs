//! Exact, positive-parity and two-level partition functions.
//!
//! `Z = ½ (Z_F⁺ + Z_B⁺ + Z_F⁻ − Z_B⁻)` where the `F` parts are products of
//! `2 cosh(βε)` and the `B` parts products of `2 sinh(βε)` over the two
//! momentum grids. Internally `Z` is evaluated as
//! `½ Z_F⁺ · (1 + t⁺ + r (1 − t⁻))` with `t⁺ = Z_B⁺/Z_F⁺`, `t⁻ = Z_B⁻/Z_F⁻`
//! and `r = Z_F⁻/Z_F⁺`; every term in the bracket is non-negative, so no
//! cancellation occurs at any temperature.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::{ln_2cosh, ln_abs_2sinh, ln_abs_tanh, log_add_exp, SignedLog};
use crate::spectrum::{
    mode_energy, negative_momenta, odd_even_energy_difference, positive_momenta,
    special_mode_energies, symmetry_breaking_gap, ChainSpec, GibbsPoint,
};

/// The four parity/statistics components of the partition function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZParts {
    pub z_f_plus: SignedLog,
    pub z_b_plus: SignedLog,
    pub z_f_minus: SignedLog,
    pub z_b_minus: SignedLog,
}

impl ZParts {
    /// `½ (Z_F⁺ + Z_B⁺ + Z_F⁻ − Z_B⁻)` by direct signed-log summation.
    ///
    /// The flag reports cancellation in the odd-sector difference. Prefer
    /// [`z_full`], which avoids the subtraction altogether.
    pub fn combine(&self) -> Result<(SignedLog, bool)> {
        let half = SignedLog::from_ln(-LN_2);
        let (odd, cancelled) = self.z_f_minus.add_checked(-self.z_b_minus);
        let (total, c2) = SignedLog::sum_checked([self.z_f_plus, self.z_b_plus, odd]);
        if total.sign() <= 0 {
            return Err(Error::Inconsistency(format!(
                "partition function combined to a non-positive value (sign {})",
                total.sign()
            )));
        }
        Ok((half * total, cancelled || c2))
    }

    /// Sector traces `(Tr P₊e^{−βH}, Tr P₋e^{−βH})` from the raw components.
    ///
    /// The odd trace is a difference and loses relative accuracy when that
    /// sector is exponentially suppressed; [`sector_traces`] does not.
    pub fn sector_traces(&self) -> (SignedLog, SignedLog) {
        let half = SignedLog::from_ln(-LN_2);
        (
            half * (self.z_f_plus + self.z_b_plus),
            half * (self.z_f_minus - self.z_b_minus),
        )
    }
}

/// Log-domain building blocks shared by the partition and fidelity code.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ThermalTerms {
    /// `β W⁺` with `W⁺ = 2 Σ_{k⁺} ε = −E₀⁺`.
    pub beta_w_plus: f64,
    /// `2 Σ_{k⁺} ln(1 + e^{−2βε})`, so that `ln Z_F⁺ = βW⁺ + C⁺`.
    pub c_plus: f64,
    /// `ln Z_F⁻ − ln Z_F⁺`.
    pub ln_r: f64,
    /// `ln(Z_B⁺/Z_F⁺) = 2 Σ_{k⁺} ln tanh(βε)`.
    pub ln_t_plus: f64,
    /// `Z_B⁻/Z_F⁻`, signed through the boundary modes.
    pub t_minus: SignedLog,
}

impl ThermalTerms {
    pub fn new(chain: &ChainSpec, beta: f64) -> Self {
        let (g, gamma) = (chain.field(), chain.anisotropy());
        let mut beta_w_plus = 0.0;
        let mut c_plus = 0.0;
        let mut ln_t_plus = 0.0;
        for k in positive_momenta(chain) {
            let x = beta * mode_energy(gamma, g, k);
            beta_w_plus += 2.0 * x;
            c_plus += 2.0 * (-2.0 * x).exp().ln_1p();
            ln_t_plus += 2.0 * ln_abs_tanh(x);
        }

        let (e0, epi) = special_mode_energies(chain);
        let (x0, xpi) = (beta * e0, beta * epi);
        let mut c_minus = (-2.0 * x0.abs()).exp().ln_1p() + (-2.0 * xpi.abs()).exp().ln_1p();
        let mut ln_t_minus = ln_abs_tanh(x0) + ln_abs_tanh(xpi);
        for k in negative_momenta(chain) {
            let x = beta * mode_energy(gamma, g, k);
            c_minus += 2.0 * (-2.0 * x).exp().ln_1p();
            ln_t_minus += 2.0 * ln_abs_tanh(x);
        }
        // W⁻ − W⁺ = |ε₀| + |ε_π| − 2 − (E₀⁻ − E₀⁺), with the bracket summed accurately.
        let w_diff = e0.abs() + epi.abs() - 2.0 - odd_even_energy_difference(chain);
        let sign = (sgn(x0) * sgn(xpi)) as i8;

        Self {
            beta_w_plus,
            c_plus,
            ln_r: beta * w_diff + c_minus - c_plus,
            ln_t_plus,
            t_minus: SignedLog::new(sign, ln_t_minus),
        }
    }

    /// `ln(1 + t⁺ + r (1 − t⁻))`.
    pub fn ln_d(&self) -> f64 {
        let odd = self.ln_r + ln_one_minus(self.t_minus);
        log_add_exp(log_add_exp(0.0, self.ln_t_plus), odd)
    }

    /// `ln Z + βE₀⁺`.
    pub fn ln_z_shifted(&self) -> f64 {
        -LN_2 + self.c_plus + self.ln_d()
    }
}

pub(crate) fn sgn(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `ln(1 − t)` for `|t| < 1`.
pub(crate) fn ln_one_minus(t: SignedLog) -> f64 {
    match t.sign() {
        0 => 0.0,
        1 => (-t.log_magnitude().exp_m1()).ln(),
        _ => t.log_magnitude().exp().ln_1p(),
    }
}

pub fn z_parts(point: &GibbsPoint) -> ZParts {
    let chain = &point.chain;
    let beta = point.beta();
    let (g, gamma) = (chain.field(), chain.anisotropy());

    let mut lf_plus = 0.0;
    let mut lb_plus = 0.0;
    for k in positive_momenta(chain) {
        let x = beta * mode_energy(gamma, g, k);
        lf_plus += 2.0 * ln_2cosh(x);
        lb_plus += 2.0 * ln_abs_2sinh(x);
    }
    let (e0, epi) = special_mode_energies(chain);
    let mut lf_minus = ln_2cosh(beta * e0) + ln_2cosh(beta * epi);
    let mut lb_minus = ln_abs_2sinh(beta * e0) + ln_abs_2sinh(beta * epi);
    for k in negative_momenta(chain) {
        let x = beta * mode_energy(gamma, g, k);
        lf_minus += 2.0 * ln_2cosh(x);
        lb_minus += 2.0 * ln_abs_2sinh(x);
    }
    let sign_b_minus = (sgn(beta * e0) * sgn(beta * epi)) as i8;
    ZParts {
        z_f_plus: SignedLog::from_ln(lf_plus),
        z_b_plus: SignedLog::new(1, lb_plus),
        z_f_minus: SignedLog::from_ln(lf_minus),
        z_b_minus: SignedLog::new(sign_b_minus, lb_minus),
    }
}

/// Sector traces `(Tr P₊e^{−βH}, Tr P₋e^{−βH})` without the odd-sector subtraction.
pub fn sector_traces(point: &GibbsPoint) -> (SignedLog, SignedLog) {
    let t = ThermalTerms::new(&point.chain, point.beta());
    let half_f_plus = -LN_2 + t.beta_w_plus + t.c_plus;
    (
        SignedLog::from_ln(half_f_plus + log_add_exp(0.0, t.ln_t_plus)),
        SignedLog::from_ln(half_f_plus + t.ln_r + ln_one_minus(t.t_minus)),
    )
}

/// Full partition function `Tr e^{−βH}`.
pub fn z_full(point: &GibbsPoint) -> Result<SignedLog> {
    let ln_z = ln_z(point);
    if !ln_z.is_finite() {
        return Err(Error::Inconsistency(format!(
            "log partition function is not finite ({ln_z})"
        )));
    }
    Ok(SignedLog::from_ln(ln_z))
}

/// `ln Tr e^{−βH}`.
pub fn ln_z(point: &GibbsPoint) -> f64 {
    if point.beta() == 0.0 {
        return point.chain.n_sites() as f64 * LN_2;
    }
    let t = ThermalTerms::new(&point.chain, point.beta());
    t.beta_w_plus + t.ln_z_shifted()
}

/// `ln Z + βE₀⁺`, smooth in β without the large linear term.
pub fn ln_z_shifted(point: &GibbsPoint) -> f64 {
    let beta = point.beta();
    if beta == 0.0 {
        return point.chain.n_sites() as f64 * LN_2;
    }
    ThermalTerms::new(&point.chain, beta).ln_z_shifted()
}

/// First and second β-derivatives of `ln(1 + e^{−2βε})` and `ln|tanh βε|`.
#[derive(Debug, Clone, Copy, Default)]
struct ModeSlopes {
    c1: f64,
    c2: f64,
    tau1: f64,
    tau2: f64,
}

impl ModeSlopes {
    fn add(&mut self, beta: f64, energy: f64, weight: f64) {
        let e = energy.abs();
        let x = beta * e;
        self.c1 += weight * -2.0 * e / ((2.0 * x).exp() + 1.0);
        self.c2 += weight * e * e / x.cosh().powi(2);
        if e > 0.0 {
            let s = (2.0 * x).sinh();
            self.tau1 += weight * 2.0 * e / s;
            self.tau2 += weight * -4.0 * e * e / ((2.0 * x).tanh() * s);
        }
    }
}

/// `∂² ln Z / ∂β² = ⟨H²⟩ − ⟨H⟩²`, evaluated from term-wise derivatives.
///
/// Avoids the finite-difference roundoff that dominates when the variance is
/// small compared with `ln Z`.
pub fn ln_z_curvature(point: &GibbsPoint) -> f64 {
    let chain = &point.chain;
    let beta = point.beta();
    let (g, gamma) = (chain.field(), chain.anisotropy());
    let terms = ThermalTerms::new(chain, beta);

    let mut plus = ModeSlopes::default();
    for k in positive_momenta(chain) {
        plus.add(beta, mode_energy(gamma, g, k), 2.0);
    }
    let mut minus = ModeSlopes::default();
    let (e0, epi) = special_mode_energies(chain);
    minus.add(beta, e0, 1.0);
    minus.add(beta, epi, 1.0);
    for k in negative_momenta(chain) {
        minus.add(beta, mode_energy(gamma, g, k), 2.0);
    }
    let w_diff = e0.abs() + epi.abs() - 2.0 - odd_even_energy_difference(chain);

    // D = 1 + t⁺ + r (1 − t⁻) as a mixture of three log-terms with slopes L′, L″.
    let ln_d = terms.ln_d();
    let mut parts: Vec<(f64, f64, f64)> = vec![((-ln_d).exp(), 0.0, 0.0)];
    let w_t = (terms.ln_t_plus - ln_d).exp();
    if w_t > 0.0 {
        parts.push((w_t, plus.tau1, plus.tau2));
    }
    let ln_one_minus_t = ln_one_minus(terms.t_minus);
    let w_odd = (terms.ln_r + ln_one_minus_t - ln_d).exp();
    if w_odd > 0.0 {
        let r1 = w_diff + minus.c1 - plus.c1;
        let r2 = minus.c2 - plus.c2;
        // ln(1 − u) with u = t⁻: first −qL′, second −q(L″ + L′²) − q²L′², q = u/(1 − u).
        let (m1, m2) = (minus.tau1, minus.tau2);
        let (b1, b2) = if terms.t_minus.is_zero() {
            (r1, r2)
        } else {
            let q = f64::from(terms.t_minus.sign())
                * (terms.t_minus.log_magnitude() - ln_one_minus_t).exp();
            (r1 - q * m1, r2 - q * (m2 + m1 * m1) - q * q * m1 * m1)
        };
        parts.push((w_odd, b1, b2));
    }
    let mean: f64 = parts.iter().map(|(w, l1, _)| w * l1).sum();
    let spread: f64 = parts
        .iter()
        .map(|(w, l1, l2)| w * (l2 + (l1 - mean).powi(2)))
        .sum();
    plus.c2 + spread
}

/// Positive-fermionic part `Z_F⁺ = Π_{K⁺} 2 cosh(βε)`.
pub fn z_ppa(point: &GibbsPoint) -> SignedLog {
    SignedLog::from_ln(ln_z_ppa_shifted(point) - point.beta() * ground_even(&point.chain))
}

/// `ln Z_F⁺ + βE₀⁺`.
pub fn ln_z_ppa_shifted(point: &GibbsPoint) -> f64 {
    let beta = point.beta();
    let chain = &point.chain;
    positive_momenta(chain)
        .into_iter()
        .map(|k| {
            let x = beta * mode_energy(chain.anisotropy(), chain.field(), k);
            2.0 * (-2.0 * x).exp().ln_1p()
        })
        .sum()
}

fn ground_even(chain: &ChainSpec) -> f64 {
    -2.0 * positive_momenta(chain)
        .into_iter()
        .map(|k| mode_energy(chain.anisotropy(), chain.field(), k))
        .sum::<f64>()
}

/// Two-level truncation `e^{−βE₀⁺} + e^{−βE₀⁻}`.
pub fn z_tla(point: &GibbsPoint) -> Result<SignedLog> {
    let shifted = ln_z_tla_shifted(point)?;
    Ok(SignedLog::from_ln(
        shifted - point.beta() * ground_even(&point.chain),
    ))
}

/// `ln Z_TLA + βE₀⁺ = ln(1 + e^{−βΔ})`.
pub fn ln_z_tla_shifted(point: &GibbsPoint) -> Result<f64> {
    let gap = symmetry_breaking_gap(&point.chain)?;
    Ok(log_add_exp(0.0, -point.beta() * gap))
}
