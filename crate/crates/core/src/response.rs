//! Fidelity susceptibilities, specific heat and peak location.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fidelity::{
    fidelity_exact, fidelity_tla_field, ln_fidelity_commuting, ln_fidelity_commuting_ppa,
    ln_fidelity_ppa, ln_fidelity_tla_thermal,
};
use crate::numerics::{golden_max, try_second_derivative, StencilSpec};
use crate::partition::ln_z_curvature;
use crate::spectrum::{ChainSpec, GibbsPoint};

/// Backend used to evaluate a response function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Ppa,
    Tla,
    GroundEven,
    GroundOdd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Ppa => "ppa",
            Self::Tla => "tla",
            Self::GroundEven => "ground_even",
            Self::GroundOdd => "ground_odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityResult {
    pub value: f64,
    pub method: Method,
    /// Stencil step; zero for closed forms.
    pub step_used: f64,
    pub point: GibbsPoint,
}

/// Field susceptibility `χ = −∂²F(β,g | β,g+δ)/∂δ²` at `δ = 0`.
pub fn chi_field(
    point: &GibbsPoint,
    method: Method,
    spec: StencilSpec,
) -> Result<SusceptibilityResult> {
    let chain = point.chain;
    let g = chain.field();
    let beta = point.beta();
    let shifted = |delta: f64| point.with_field(g + delta);
    let (value, step_used) = match method {
        Method::Exact => {
            // Differentiate F − 1 = expm1(ln F) so that rounding of F near 1 does not enter.
            let d = try_second_derivative(
                |delta| Ok(fidelity_exact(point, &shifted(delta)?)?.log_value.exp_m1()),
                0.0,
                spec,
            )?;
            (-d, spec.step())
        }
        Method::Ppa => {
            let d = try_second_derivative(
                |delta| Ok(ln_fidelity_ppa(point, &shifted(delta)?)?.exp_m1()),
                0.0,
                spec,
            )?;
            (-d, spec.step())
        }
        Method::Tla => {
            let d = try_second_derivative(
                |delta| Ok(fidelity_tla_field(beta, &chain, delta)? - 1.0),
                0.0,
                spec,
            )?;
            (-d, spec.step())
        }
        Method::GroundEven => (chi_ground(&chain, Parity::Even)?, 0.0),
        Method::GroundOdd => (chi_ground(&chain, Parity::Odd)?, 0.0),
    };
    Ok(SusceptibilityResult {
        value,
        method,
        step_used,
        point: *point,
    })
}

/// Closed-form ground-state susceptibility of the even or odd sector (Ising, `g > 0`).
///
/// Written in `ℓ = ln g` and `x = Nℓ` with the `1/x²` poles of the two terms
/// cancelled analytically, so it is accurate through the critical point.
pub fn chi_ground(chain: &ChainSpec, parity: Parity) -> Result<f64> {
    chain.require_ising()?;
    let g = chain.field();
    if g <= 0.0 {
        return Err(Error::Domain(format!(
            "ground-state susceptibility needs g > 0, got {g}; it is even in g"
        )));
    }
    let n = chain.n_sites() as f64;
    let l = (g - 1.0).ln_1p();
    let x = n * l;
    let pref = 1.0 / (16.0 * g * g);
    let value = match parity {
        Parity::Even => {
            let th = (0.5 * x).tanh();
            let ratio = if l == 0.0 {
                0.25 * n
            } else {
                th / (2.0 * l).exp_m1()
            };
            let sech2 = 1.0 - th * th;
            pref * (0.25 * n * n * sech2 + n * (ratio - 0.5 * (1.0 - th)))
        }
        Parity::Odd => {
            let hx = coth_reduced(0.5 * x);
            let hl = coth_reduced(l);
            let bracket = 2.0 / n * hl + 0.5 * n * hx + 0.5 * x * l * hx * hl - 1.0;
            pref * (n * n * (1.0 / 12.0 - csch2_remainder(x)) + 0.5 * n * bracket)
        }
    };
    Ok(value)
}

/// `(coth y - 1/y) / y`, even in `y`.
fn coth_reduced(y: f64) -> f64 {
    let a = y.abs();
    if a < 0.2 {
        let y2 = y * y;
        let c = [
            1.0 / 3.0,
            -1.0 / 45.0,
            2.0 / 945.0,
            -1.0 / 4725.0,
            2.0 / 93555.0,
            -1382.0 / 638512875.0,
            4.0 / 18243225.0,
        ];
        c.iter().rev().fold(0.0, |acc, &k| acc * y2 + k)
    } else {
        (1.0 / a.tanh() - 1.0 / a) / a
    }
}

/// `1/(4 sinh²(x/2)) - 1/x² + 1/12`, even in `x`.
fn csch2_remainder(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        let x2 = x * x;
        let c = [
            1.0 / 240.0,
            -1.0 / 6048.0,
            1.0 / 172800.0,
            -1.0 / 5322240.0,
            691.0 / 118879488000.0,
            -1.0 / 5748019200.0,
        ];
        x2 * c.iter().rev().fold(0.0, |acc, &k| acc * x2 + k)
    } else {
        let s = (0.5 * a).sinh();
        0.25 / (s * s) - 1.0 / (a * a) + 1.0 / 12.0
    }
}

/// `R(β)` correction of the two-level susceptibility at `g = 1`.
pub fn tla_correction(beta: f64, n_sites: usize) -> f64 {
    let n = n_sites as f64;
    let x = beta * PI / (4.0 * n);
    let sech = 1.0 / x.cosh();
    x * x * sech * sech / 16.0 * (16.0 * n * n / (PI * PI) + 8.0 * n / PI + 1.0)
}

/// Closed-form two-level susceptibility at the critical field.
pub fn chi_tla(beta: f64, chain: &ChainSpec) -> Result<f64> {
    chain.require_ising()?;
    if chain.field() != 1.0 {
        return Err(Error::UnsupportedRegime(
            "closed-form two-level susceptibility is defined at g = 1 only",
        ));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let n = chain.n_sites() as f64;
    let chi_even = chi_ground(chain, Parity::Even)?;
    let chi_odd = chi_ground(chain, Parity::Odd)?;
    let a = beta * PI / (2.0 * n);
    // 1/(1 + e^{−a}) and 1/(1 + e^{a}) without overflow.
    let w_even = 1.0 / (1.0 + (-a).exp());
    let w_odd = (-a).exp() / (1.0 + (-a).exp());
    Ok(chi_even * w_even + chi_odd * w_odd + tla_correction(beta, chain.n_sites()))
}

fn check_beta_step(beta: f64, spec: StencilSpec) -> Result<()> {
    if beta - 2.0 * spec.step() <= 0.0 {
        return Err(Error::StepDomain {
            beta,
            step: spec.step(),
        });
    }
    Ok(())
}

/// Thermal susceptibility `ξ = −∂² ln F(β − δ/2 | β + δ/2)/∂δ²` at `δ = 0`.
pub fn xi_thermal(point: &GibbsPoint, method: Method, spec: StencilSpec) -> Result<f64> {
    let beta = point.beta();
    check_beta_step(beta, spec)?;
    let chain = point.chain;
    let ln_f = |delta: f64| -> Result<f64> {
        let (lo, hi) = (beta - 0.5 * delta, beta + 0.5 * delta);
        match method {
            Method::Exact => ln_fidelity_commuting(lo, hi, &chain),
            Method::Ppa => ln_fidelity_commuting_ppa(lo, hi, &chain),
            Method::Tla => ln_fidelity_tla_thermal(lo, delta, &chain),
            Method::GroundEven | Method::GroundOdd => Err(Error::UnsupportedRegime(
                "thermal susceptibility has no ground-state variant",
            )),
        }
    };
    Ok(-try_second_derivative(ln_f, 0.0, spec)?)
}

/// `ξ` from `−∂²F/∂δ²` instead of the logarithm; equal to leading order.
pub fn xi_thermal_direct(point: &GibbsPoint, spec: StencilSpec) -> Result<f64> {
    let beta = point.beta();
    check_beta_step(beta, spec)?;
    let chain = point.chain;
    let f = |delta: f64| {
        ln_fidelity_commuting(beta - 0.5 * delta, beta + 0.5 * delta, &chain).map(f64::exp_m1)
    };
    Ok(-try_second_derivative(f, 0.0, spec)?)
}

/// Exact `ξ = ¼ ∂² ln Z/∂β²`, the δ → 0 limit of the commuting-state fidelity.
pub fn xi_thermal_closed_form(point: &GibbsPoint) -> f64 {
    0.25 * ln_z_curvature(point)
}

/// Specific heat `C_v = 4β² ξ`.
///
/// The exact method uses [`xi_thermal_closed_form`]; the others the stencil
/// with the default β step.
pub fn cv(point: &GibbsPoint, method: Method) -> Result<f64> {
    let beta = point.beta();
    match method {
        Method::Exact => Ok(4.0 * beta * beta * xi_thermal_closed_form(point)),
        _ => cv_with_step(point, method, StencilSpec::beta_default(beta)),
    }
}

pub fn cv_with_step(point: &GibbsPoint, method: Method, spec: StencilSpec) -> Result<f64> {
    let beta = point.beta();
    Ok(4.0 * beta * beta * xi_thermal(point, method, spec)?)
}

/// Two-level specific heat at `g = 1`, `x² sech² x` with `x = βΔ/2`.
pub fn cv_tla_closed_form(beta: f64, chain: &ChainSpec) -> Result<f64> {
    let gap = crate::spectrum::symmetry_breaking_gap(chain)?;
    let x = 0.5 * beta * gap;
    let sech = 1.0 / x.cosh();
    Ok(x * x * sech * sech)
}

/// Result of a one-dimensional maximum search in β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakScan {
    pub beta_star: f64,
    pub chi_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_points: usize,
    /// The coarse maximum sat on an end of the grid.
    pub on_boundary: bool,
}

pub const PEAK_GRID_POINTS: usize = 64;
pub const PEAK_REL_TOL: f64 = 1e-4;

/// Maximum of `f` on a logarithmic grid over `[lo, hi]`, refined by golden section.
pub fn locate_peak<F>(mut f: F, lo: f64, hi: f64) -> Result<PeakScan>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid scan interval [{lo}, {hi}]")));
    }
    let m = PEAK_GRID_POINTS;
    let ratio = (hi / lo).ln() / (m - 1) as f64;
    let mut grid: Vec<f64> = (0..m).map(|i| lo * (ratio * i as f64).exp()).collect();
    grid[m - 1] = hi;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &b) in grid.iter().enumerate() {
        let v = f(b)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let i = best.0;
    let on_boundary = i == 0 || i == m - 1;
    let (a, b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(m - 1)]);
    let (beta_star, chi_max) = if on_boundary {
        (grid[i], best.1)
    } else {
        let (x, fx) = golden_max(&mut f, a, b, PEAK_REL_TOL)?;
        if fx >= best.1 {
            (x, fx)
        } else {
            (grid[i], best.1)
        }
    };
    Ok(PeakScan {
        beta_star,
        chi_max,
        beta_min: lo,
        beta_max: hi,
        grid_points: m,
        on_boundary,
    })
}

/// Maximum over β of `χ(β, g)` for the chosen method.
pub fn peak_scan(chain: &ChainSpec, beta_range: (f64, f64), method: Method) -> Result<PeakScan> {
    chain.require_ising()?;
    let spec = StencilSpec::field_default();
    locate_peak(
        |beta| {
            if method == Method::Tla && chain.field() == 1.0 {
                chi_tla(beta, chain)
            } else {
                Ok(chi_field(&chain.at(beta)?, method, spec)?.value)
            }
        },
        beta_range.0,
        beta_range.1,
    )
}

/// Relative change of `χ` when the stencil step is halved.
pub fn stencil_sensitivity(point: &GibbsPoint, method: Method, spec: StencilSpec) -> Result<f64> {
    let a = chi_field(point, method, spec)?.value;
    let b = chi_field(point, method, spec.halved())?.value;
    Ok((a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
}
