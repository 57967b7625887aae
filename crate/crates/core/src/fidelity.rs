//! Uhlmann fidelity between Gibbs states of the XY chain.
//!
//! Each `(k, −k)` pair contributes a 4×4 block whose fidelity factorizes into
//! `s_k ± 2` with `s_k = sqrt(u_k² + v_k²)`. The products are accumulated as
//! per-mode log ratios against `2 cosh(βε)` normalizers, so nothing overflows
//! and the small `s_k − 2` products survive next to the dominant `s_k + 2` ones.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::{ln_abs_tanh, log_add_exp, SignedLog, CANCELLATION_THRESHOLD};
use crate::partition::{ln_z, ln_z_ppa_shifted, ln_z_shifted, ln_z_tla_shifted, sgn, ThermalTerms};
use crate::response::{chi_ground, Parity};
use crate::spectrum::{
    mode, negative_momenta, positive_momenta, special_mode_energies, symmetry_breaking_gap,
    ChainSpec, GibbsPoint,
};

/// Overlap coefficients of a single momentum pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePairOverlap {
    pub u: f64,
    pub v: f64,
    /// `ln sqrt(u² + v²)`, finite even when `u` and `v` overflow.
    pub ln_norm: f64,
}

/// Fidelity with its parity-resolved numerator and normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub value: f64,
    /// `ln F`, accurate even where `value` rounds to 1.
    pub log_value: f64,
    pub positive_part: SignedLog,
    pub negative_part: SignedLog,
    /// `sqrt(Z_a Z_b)`.
    pub normalization: SignedLog,
    pub cancellation_flag: bool,
}

/// Quasiparticle energy used inside `u_k`, `v_k`.
///
/// `Quasiparticle` (`E_k = 2ε_k`) is the correct choice; `Bare` exists only
/// as a negative control for verification runs.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyConvention {
    #[default]
    Quasiparticle,
    Bare,
}

impl EnergyConvention {
    fn scale(self) -> f64 {
        match self {
            Self::Quasiparticle => 1.0,
            Self::Bare => 0.5,
        }
    }
}

fn check_same_size(a: &GibbsPoint, b: &GibbsPoint) -> Result<()> {
    let (na, nb) = (a.chain.n_sites(), b.chain.n_sites());
    if na != nb {
        return Err(Error::DimensionMismatch {
            left: na,
            right: nb,
        });
    }
    Ok(())
}

pub fn mode_overlap(k: f64, a: &GibbsPoint, b: &GibbsPoint) -> Result<ModePairOverlap> {
    check_same_size(a, b)?;
    let ma = mode(&a.chain, k)?;
    let mb = mode(&b.chain, k)?;
    let (xa, xb) = (a.beta() * ma.energy, b.beta() * mb.energy);
    let d = 0.5 * (ma.angle - mb.angle);
    let terms = ModeTerms::new(xa, xb, d.sin().powi(2), EnergyConvention::Quasiparticle);
    Ok(ModePairOverlap {
        u: 2.0 * (xa + xb).cosh() * d.cos(),
        v: 2.0 * (xa - xb).cosh() * d.sin(),
        ln_norm: LN_2 + terms.ln_half_s,
    })
}

/// Per-mode log factors normalized by `2cosh(X_a) 2cosh(X_b)`, `X = βε`.
struct ModeTerms {
    ln_half_s: f64,
    /// `ln(s + 2) − ln 2cosh X_a − ln 2cosh X_b`.
    q_plus: f64,
    /// `ln(s − 2) − ln 2cosh X_a − ln 2cosh X_b`.
    q_minus: f64,
}

impl ModeTerms {
    fn new(xa: f64, xb: f64, sin2d: f64, convention: EnergyConvention) -> Self {
        let (ya, yb) = (convention.scale() * xa, convention.scale() * xb);
        let y = ya + yb;
        let lin = match convention {
            EnergyConvention::Quasiparticle => 0.0,
            EnergyConvention::Bare => y - xa - xb,
        };
        let e2y = (-2.0 * y).exp();
        let fa = -(-4.0 * ya).exp_m1();
        let fb = -(-4.0 * yb).exp_m1();
        let phi = fa * fb / (1.0 + e2y).powi(2);
        let half_log_root = 0.5 * (-sin2d * phi).ln_1p();
        let ln_half_s = y + e2y.ln_1p() - LN_2 + half_log_root;
        let two_over_s = (-ln_half_s).exp();
        // ln(s + 2) − y
        let ln_sp2 = e2y.ln_1p() + half_log_root + two_over_s.ln_1p();
        let norm = (-2.0 * xa).exp().ln_1p() + (-2.0 * xb).exp().ln_1p();
        let q_plus = lin + ln_sp2 - norm;

        let q_minus = if y == 0.0 {
            f64::NEG_INFINITY
        } else {
            let om = -(-2.0 * y).exp_m1();
            let psi = (fa * fb / (om * om)).min(1.0);
            let reduction = sin2d * psi;
            if reduction >= 1.0 {
                f64::NEG_INFINITY
            } else {
                // ln(s² − 4) − 2y − (ln(s + 2) − y) = ln(s − 2) − y
                lin + 2.0 * om.ln() + (-reduction).ln_1p() - ln_sp2 - norm
            }
        };
        Self {
            ln_half_s,
            q_plus,
            q_minus,
        }
    }
}

/// Sums of `q_plus` and `q_minus` over a momentum grid.
fn grid_sums(
    momenta: &[f64],
    a: &GibbsPoint,
    b: &GibbsPoint,
    convention: EnergyConvention,
) -> Result<(f64, f64)> {
    let mut plus = 0.0;
    let mut minus = 0.0;
    for &k in momenta {
        let ma = mode(&a.chain, k)?;
        let mb = mode(&b.chain, k)?;
        let d = 0.5 * (ma.angle - mb.angle);
        let t = ModeTerms::new(
            a.beta() * ma.energy,
            b.beta() * mb.energy,
            d.sin().powi(2),
            convention,
        );
        plus += t.q_plus;
        minus += t.q_minus;
    }
    Ok((plus, minus))
}

/// Boundary mode at `0` or `π`: `ln(2cosh A) − ½ ln 2cosh X_a − ½ ln 2cosh X_b`
/// with `A = (X_a + X_b)/2`, plus `ln|tanh A|` and `sgn A`.
fn boundary_terms(xa: f64, xb: f64) -> (f64, f64, i32) {
    let (ha, hb) = (0.5 * xa, 0.5 * xb);
    let a = ha + hb;
    let abs_part = if ha * hb >= 0.0 {
        0.0
    } else {
        a.abs() - ha.abs() - hb.abs()
    };
    let ln_c = abs_part + (-2.0 * a.abs()).exp().ln_1p()
        - 0.5 * (-2.0 * xa.abs()).exp().ln_1p()
        - 0.5 * (-2.0 * xb.abs()).exp().ln_1p();
    (ln_c, ln_abs_tanh(a), sgn(a))
}

/// Exact Uhlmann fidelity `F(ρ_a, ρ_b)` of two Gibbs states.
pub fn fidelity_exact(a: &GibbsPoint, b: &GibbsPoint) -> Result<FidelityReport> {
    fidelity_exact_with_convention(a, b, EnergyConvention::Quasiparticle)
}

#[doc(hidden)]
pub fn fidelity_exact_with_convention(
    a: &GibbsPoint,
    b: &GibbsPoint,
    convention: EnergyConvention,
) -> Result<FidelityReport> {
    check_same_size(a, b)?;
    let (ln_za, ln_zb) = (ln_z(a), ln_z(b));
    let ln_norm = 0.5 * (ln_za + ln_zb);

    if a.beta() == 0.0 && b.beta() == 0.0 {
        let half = SignedLog::from_ln(ln_norm - LN_2);
        return Ok(FidelityReport {
            value: 1.0,
            log_value: 0.0,
            positive_part: half,
            negative_part: half,
            normalization: SignedLog::from_ln(ln_norm),
            cancellation_flag: false,
        });
    }

    let (lp_plus, lm_plus) = grid_sums(&positive_momenta(&a.chain), a, b, convention)?;
    let (lp_minus, lm_minus) = grid_sums(&negative_momenta(&a.chain), a, b, convention)?;

    let (e0a, epia) = special_mode_energies(&a.chain);
    let (e0b, epib) = special_mode_energies(&b.chain);
    let (c0, tanh0, s0) = boundary_terms(a.beta() * e0a, b.beta() * e0b);
    let (cpi, tanhpi, spi) = boundary_terms(a.beta() * epia, b.beta() * epib);

    let ta = ThermalTerms::new(&a.chain, a.beta());
    let tb = ThermalTerms::new(&b.chain, b.beta());
    let shift = 0.5 * (ta.ln_r + tb.ln_r);

    // Odd sector: c̃ p⁻ (1 − ρ) with ρ = (s̃ m⁻)/(c̃ p⁻).
    let rho = SignedLog::new((s0 * spi) as i8, tanh0 + tanhpi + lm_minus - lp_minus);
    let one_minus_rho = crate::partition::ln_one_minus(rho);
    let cancellation_flag =
        rho.sign() > 0 && -(rho.log_magnitude().exp_m1()) < CANCELLATION_THRESHOLD;
    let ln_odd = shift + c0 + cpi + lp_minus + one_minus_rho;
    let ln_even = log_add_exp(lp_plus, lm_plus);
    let ln_numerator = log_add_exp(ln_even, ln_odd);
    let log_value = ln_numerator - 0.5 * (ta.ln_d() + tb.ln_d());

    if !log_value.is_finite() {
        return Err(Error::Inconsistency(format!(
            "fidelity numerator is not positive (ln F = {log_value})"
        )));
    }

    // Absolute parts: both are scaled by ½ sqrt(Z_F⁺_a Z_F⁺_b).
    let ln_scale = -LN_2 + 0.5 * (ta.beta_w_plus + ta.c_plus + tb.beta_w_plus + tb.c_plus);
    Ok(FidelityReport {
        value: log_value.exp(),
        log_value,
        positive_part: SignedLog::from_ln(ln_scale + ln_even),
        negative_part: SignedLog::from_ln(ln_scale + ln_odd),
        normalization: SignedLog::from_ln(ln_norm),
        cancellation_flag,
    })
}

/// Positive-parity approximation: `Π_{k⁺}(s_k + 2) / sqrt(Z_F⁺_a Z_F⁺_b)`.
pub fn fidelity_ppa(a: &GibbsPoint, b: &GibbsPoint) -> Result<f64> {
    Ok(ln_fidelity_ppa(a, b)?.exp())
}

pub fn ln_fidelity_ppa(a: &GibbsPoint, b: &GibbsPoint) -> Result<f64> {
    check_same_size(a, b)?;
    let (plus, _) = grid_sums(
        &positive_momenta(&a.chain),
        a,
        b,
        EnergyConvention::Quasiparticle,
    )?;
    Ok(plus)
}

fn commuting_ln<F>(beta_a: f64, beta_b: f64, chain: &ChainSpec, ln_z_shift: F) -> Result<f64>
where
    F: Fn(&GibbsPoint) -> Result<f64>,
{
    let mid = chain.at(0.5 * (beta_a + beta_b))?;
    let pa = chain.at(beta_a)?;
    let pb = chain.at(beta_b)?;
    // The βE₀⁺ shifts cancel exactly between the three terms.
    Ok(ln_z_shift(&mid)? - 0.5 * (ln_z_shift(&pa)? + ln_z_shift(&pb)?))
}

/// Fidelity of two Gibbs states of the same Hamiltonian at `β_a`, `β_b`:
/// `Z((β_a+β_b)/2) / sqrt(Z(β_a) Z(β_b))`.
pub fn fidelity_commuting(beta_a: f64, beta_b: f64, chain: &ChainSpec) -> Result<f64> {
    Ok(ln_fidelity_commuting(beta_a, beta_b, chain)?.exp())
}

pub fn ln_fidelity_commuting(beta_a: f64, beta_b: f64, chain: &ChainSpec) -> Result<f64> {
    commuting_ln(beta_a, beta_b, chain, |p| Ok(ln_z_shifted(p)))
}

/// Commuting-state fidelity with `Z` replaced by `Z_F⁺`.
pub fn ln_fidelity_commuting_ppa(beta_a: f64, beta_b: f64, chain: &ChainSpec) -> Result<f64> {
    commuting_ln(beta_a, beta_b, chain, |p| Ok(ln_z_ppa_shifted(p)))
}

/// Two-level fidelity between `(β, g)` and `(β, g + δ)` for the Ising chain.
///
/// Ground-state overlaps enter through `F₀± ≈ 1 − δ² χ₀±(g)/2`, so the result is
/// meaningful for small `δ` only.
pub fn fidelity_tla_field(beta: f64, chain: &ChainSpec, delta: f64) -> Result<f64> {
    chain.require_ising()?;
    let shifted = chain.with_field(chain.field() + delta)?;
    let gap_a = symmetry_breaking_gap(chain)?;
    let gap_b = symmetry_breaking_gap(&shifted)?;
    let abs_chain = chain.with_field(chain.field().abs())?;
    let chi_even = chi_ground(&abs_chain, Parity::Even)?;
    let chi_odd = chi_ground(&abs_chain, Parity::Odd)?;
    // w± = (1 + e^{∓βΔ})^{−1/2}
    let w = |gap: f64, s: f64| (-0.5 * log_add_exp(0.0, -s * beta * gap)).exp();
    let even = w(gap_a, 1.0) * w(gap_b, 1.0) * (1.0 - 0.5 * delta * delta * chi_even);
    let odd = w(gap_a, -1.0) * w(gap_b, -1.0) * (1.0 - 0.5 * delta * delta * chi_odd);
    Ok(even + odd)
}

/// Two-level fidelity between `(β, g)` and `(β + δ, g)`:
/// `Z_TLA(β + δ/2) / sqrt(Z_TLA(β) Z_TLA(β + δ))`.
pub fn fidelity_tla_thermal(beta: f64, delta: f64, chain: &ChainSpec) -> Result<f64> {
    Ok(ln_fidelity_tla_thermal(beta, delta, chain)?.exp())
}

pub fn ln_fidelity_tla_thermal(beta: f64, delta: f64, chain: &ChainSpec) -> Result<f64> {
    chain.require_ising()?;
    commuting_ln(beta, beta + delta, chain, ln_z_tla_shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn point(n: usize, gamma: f64, g: f64, beta: f64) -> GibbsPoint {
        ChainSpec::new(n, gamma, g).unwrap().at(beta).unwrap()
    }

    /// Direct product formula in plain floating point; valid for small N·β.
    fn naive(a: &GibbsPoint, b: &GibbsPoint) -> f64 {
        let s = |k: f64| {
            let ma = mode(&a.chain, k).unwrap();
            let mb = mode(&b.chain, k).unwrap();
            let d = 0.5 * (ma.angle - mb.angle);
            let u = 2.0 * (a.beta() * ma.energy + b.beta() * mb.energy).cosh() * d.cos();
            let v = 2.0 * (a.beta() * ma.energy - b.beta() * mb.energy).cosh() * d.sin();
            u.hypot(v)
        };
        let kp = positive_momenta(&a.chain);
        let km = negative_momenta(&a.chain);
        let f_plus = 0.5
            * (kp.iter().map(|&k| s(k) + 2.0).product::<f64>()
                + kp.iter().map(|&k| s(k) - 2.0).product::<f64>());
        let (e0a, epia) = special_mode_energies(&a.chain);
        let (e0b, epib) = special_mode_energies(&b.chain);
        let a0 = 0.5 * (a.beta() * e0a + b.beta() * e0b);
        let api = 0.5 * (a.beta() * epia + b.beta() * epib);
        let f_minus = 0.5
            * (4.0 * a0.cosh() * api.cosh() * km.iter().map(|&k| s(k) + 2.0).product::<f64>()
                - 4.0 * a0.sinh() * api.sinh() * km.iter().map(|&k| s(k) - 2.0).product::<f64>());
        (f_plus + f_minus) / (0.5 * (ln_z(a) + ln_z(b))).exp()
    }

    #[test]
    fn matches_naive_products() {
        for (a, b) in [
            (point(6, 1.0, 1.0, 2.0), point(6, 1.0, 1.2, 2.0)),
            (point(6, 0.5, 0.6, 0.5), point(6, 0.5, 1.4, 2.0)),
            (point(8, 1.0, 0.6, 2.0), point(8, 0.5, 1.4, 1.0)),
            (point(10, 1.0, -0.7, 1.5), point(10, 1.0, 0.4, 0.3)),
            (point(4, 0.0, 0.3, 1.0), point(4, 1.0, 2.0, 0.0)),
        ] {
            let f = fidelity_exact(&a, &b).unwrap();
            let n = naive(&a, &b);
            assert!((f.value - n).abs() < 1e-13, "{} vs {}", f.value, n);
            let sum = (f.positive_part + f.negative_part) / f.normalization;
            assert!((sum.to_f64() - f.value).abs() < 1e-13);
        }
    }

    #[test]
    fn overlap_examples() {
        let a = point(6, 1.0, 1.0, 3.0);
        let o = mode_overlap(PI / 6.0, &a, &a).unwrap();
        let e = mode(&a.chain, PI / 6.0).unwrap().energy;
        assert!((o.u - 2.0 * (2.0 * 3.0 * e).cosh()).abs() < 1e-12 && o.v == 0.0);
        assert!((o.ln_norm - o.u.ln()).abs() < 1e-14);

        let a = point(6, 1.0, 1.0, 0.0);
        let b = point(6, 1.0, 1.7, 0.0);
        let o = mode_overlap(PI / 6.0, &a, &b).unwrap();
        assert!((o.u * o.u + o.v * o.v - 4.0).abs() < 1e-14);
        assert!(o.u >= 0.0);

        let c = point(8, 1.0, 1.0, 1.0);
        assert!(matches!(
            mode_overlap(PI / 6.0, &a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn self_fidelity_is_one() {
        for n in [2, 6, 50, 200] {
            for g in [0.5, 1.0, 2.0] {
                for beta in [0.0, 1.0, 10.0, 100.0] {
                    let p = point(n, 1.0, g, beta);
                    let f = fidelity_exact(&p, &p).unwrap();
                    assert!((f.value - 1.0).abs() < 1e-10, "{n} {g} {beta}: {}", f.value);
                    assert!((fidelity_ppa(&p, &p).unwrap() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bare_convention_breaks_self_fidelity() {
        let p = point(8, 1.0, 1.0, 3.0);
        let f = fidelity_exact_with_convention(&p, &p, EnergyConvention::Bare).unwrap();
        assert!((f.value - 1.0).abs() > 1e-3);
    }

    #[test]
    fn infinite_temperature_gives_one() {
        let a = point(20, 1.0, 0.3, 0.0);
        let b = point(20, 0.4, 1.9, 0.0);
        assert_eq!(fidelity_exact(&a, &b).unwrap().value, 1.0);
    }

    #[test]
    fn commuting_cases() {
        let c = ChainSpec::ising(6, 1.0).unwrap();
        assert_eq!(fidelity_commuting(3.0, 3.0, &c).unwrap(), 1.0);
        let exact = fidelity_exact(&c.at(2.0).unwrap(), &c.at(5.0).unwrap())
            .unwrap()
            .value;
        assert!((fidelity_commuting(2.0, 5.0, &c).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn tla_field_limits() {
        let c = ChainSpec::ising(50, 1.0).unwrap();
        assert!((fidelity_tla_field(10.0, &c, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let delta = 1e-3;
        let f_cold = fidelity_tla_field(1e7, &c, delta).unwrap();
        let f0_even = 1.0 - 0.5 * delta * delta * 76.5625;
        assert!((f_cold - f0_even).abs() < 1e-9);
        let f_hot = fidelity_tla_field(0.0, &c, delta).unwrap();
        let f0_odd = 1.0 - 0.5 * delta * delta * 24.5;
        assert!((f_hot - 0.5 * (f0_even + f0_odd)).abs() < 1e-12);
        assert!(fidelity_tla_field(1.0, &ChainSpec::new(50, 0.5, 1.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn tla_thermal_self_fidelity() {
        let c = ChainSpec::ising(50, 1.0).unwrap();
        assert_eq!(fidelity_tla_thermal(40.0, 0.0, &c).unwrap(), 1.0);
        // Deep in the ferromagnet the gap underflows to zero.
        let deep = ChainSpec::ising(200, 0.05).unwrap();
        assert!((fidelity_tla_thermal(1.0, 0.5, &deep).unwrap() - 1.0).abs() < 1e-15);
    }

    fn arb_pair() -> impl Strategy<Value = (GibbsPoint, GibbsPoint)> {
        (
            1usize..=100,
            0.0f64..=1.0,
            -2.0f64..2.0,
            -2.0f64..2.0,
            0.0f64..50.0,
            0.0f64..50.0,
            0.0f64..=1.0,
        )
            .prop_map(|(half, gamma, ga, gb, ba, bb, gamma_b)| {
                let n = 2 * half;
                (
                    ChainSpec::new(n, gamma, ga).unwrap().at(ba).unwrap(),
                    ChainSpec::new(n, gamma_b, gb).unwrap().at(bb).unwrap(),
                )
            })
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded((a, b) in arb_pair()) {
            let fab = fidelity_exact(&a, &b).unwrap();
            let fba = fidelity_exact(&b, &a).unwrap();
            prop_assert!((fab.value - fba.value).abs() <= 1e-12);
            prop_assert!(fab.value > 0.0 || fab.log_value.is_finite());
            prop_assert!(fab.value <= 1.0 + 1e-10);
            prop_assert!(fidelity_ppa(&a, &b).unwrap() <= 1.0 + 1e-10);
        }

        #[test]
        fn self_fidelity((a, _b) in arb_pair()) {
            prop_assert!((fidelity_exact(&a, &a).unwrap().value - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn commuting_agrees(half in 1usize..=100, gamma in 0.0f64..=1.0, g in -2.0f64..2.0,
                            ba in 0.0f64..60.0, bb in 0.0f64..60.0) {
            let c = ChainSpec::new(2 * half, gamma, g).unwrap();
            let exact = fidelity_exact(&c.at(ba).unwrap(), &c.at(bb).unwrap()).unwrap().value;
            prop_assert!((exact - fidelity_commuting(ba, bb, &c).unwrap()).abs() <= 1e-10);
        }
    }
}
