//! Formula-versus-oracle verification over small chains.

use std::fmt::Write as _;

use rayon::prelude::*;
use xychain::fidelity::{fidelity_exact_with_convention, EnergyConvention};
use xychain::numerics::try_second_derivative;
use xychain::oracle::{gibbs_and_fidelity, ExactDiagonalization, DEFAULT_SITE_CAP};
use xychain::{chi_field, cv, ln_z, sector_traces, ChainSpec, Method, Result, StencilSpec};

use crate::error::{CliError, CliResult};

pub const VERIFY_GAMMAS: [f64; 2] = [0.5, 1.0];
pub const VERIFY_FIELDS: [f64; 3] = [0.6, 1.0, 1.4];
pub const VERIFY_BETAS: [f64; 3] = [0.5, 2.0, 10.0];
/// Field step of the χ comparison; both sides use the same stencil, so only
/// rounding of the oracle fidelity enters, which a larger step suppresses.
pub const VERIFY_CHI_STEP: f64 = 1e-2;

pub const CHECK_NAMES: [&str; 6] = [
    "partition function |Z/Z_oracle - 1|",
    "sector traces |ln Tr P e^-bH - oracle|",
    "fidelity |F - F_oracle|",
    "self-fidelity |F(a,a) - 1|",
    "specific heat |C_v/C_v_oracle - 1|",
    "chi_field |chi/chi_oracle - 1|",
];

/// Largest residual of one check and where it occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub worst_case: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub sizes: Vec<usize>,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.max_residual.is_finite() && c.max_residual <= self.tolerance)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", crate::output::version_line());
        let _ = writeln!(
            s,
            "# verify N = {:?}, gamma = {VERIFY_GAMMAS:?}, g = {VERIFY_FIELDS:?}, beta = {VERIFY_BETAS:?}, tolerance = {:e}",
            self.sizes, self.tolerance
        );
        for c in &self.checks {
            let ok = c.max_residual.is_finite() && c.max_residual <= self.tolerance;
            let _ = writeln!(
                s,
                "{} {:<42} max {:.3e}  at {}",
                if ok { "PASS" } else { "FAIL" },
                c.name,
                c.max_residual,
                c.worst_case
            );
        }
        let _ = writeln!(
            s,
            "{}",
            if self.passed() {
                "verify: all checks passed"
            } else {
                "verify: FAILED"
            }
        );
        s
    }
}

#[derive(Debug, Clone)]
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: "-".to_string(),
        }
    }

    fn update(&mut self, value: f64, at: impl FnOnce() -> String) {
        // NaN counts as the worst possible residual and is never replaced.
        let worse = value.is_nan() || value > self.value;
        if worse && !self.value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }

    fn merge(mut self, other: Self) -> Self {
        let at = other.at.clone();
        self.update(other.value, || at);
        self
    }
}

fn chi_formula(
    chain: &ChainSpec,
    beta: f64,
    spec: StencilSpec,
    convention: EnergyConvention,
) -> Result<f64> {
    let point = chain.at(beta)?;
    if convention == EnergyConvention::Quasiparticle {
        return Ok(chi_field(&point, Method::Exact, spec)?.value);
    }
    let d2 = try_second_derivative(
        |delta| {
            let other = chain.with_field(chain.field() + delta)?.at(beta)?;
            Ok(fidelity_exact_with_convention(&point, &other, convention)?
                .log_value
                .exp_m1())
        },
        0.0,
        spec,
    )?;
    Ok(-d2)
}

fn verify_case(n: usize, gamma: f64, convention: EnergyConvention) -> Result<Vec<Worst>> {
    let mut w = vec![Worst::new(); CHECK_NAMES.len()];
    let h = VERIFY_CHI_STEP;
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let chains: Vec<ChainSpec> = VERIFY_FIELDS
        .iter()
        .map(|&g| ChainSpec::new(n, gamma, g))
        .collect::<Result<_>>()?;
    let eds: Vec<ExactDiagonalization> = chains
        .iter()
        .map(ExactDiagonalization::new)
        .collect::<Result<_>>()?;
    let states: Vec<(usize, f64)> = (0..chains.len())
        .flat_map(|i| VERIFY_BETAS.map(|b| (i, b)))
        .collect();
    let label = |i: usize, b: f64| format!("N={n} gamma={gamma} g={} beta={b}", VERIFY_FIELDS[i]);

    for &(i, beta) in &states {
        let p = chains[i].at(beta)?;
        w[0].update((ln_z(&p) - eds[i].ln_z(beta)).exp_m1().abs(), || {
            label(i, beta)
        });
        let (zp, zm) = sector_traces(&p);
        let o = eds[i].sector_observables(beta);
        let trace = (zp.ln() - o.ln_z_plus)
            .abs()
            .max((zm.ln() - o.ln_z_minus).abs());
        w[1].update(trace, || label(i, beta));
        let self_f = fidelity_exact_with_convention(&p, &p, convention)?.value;
        w[3].update((self_f - 1.0).abs(), || label(i, beta));
        let c = cv(&p, Method::Exact)?;
        let c_o = o.cv;
        w[4].update((c / c_o - 1.0).abs(), || label(i, beta));
    }
    for &(i, ba) in &states {
        let pa = chains[i].at(ba)?;
        for &(j, bb) in &states {
            let pb = chains[j].at(bb)?;
            let f = fidelity_exact_with_convention(&pa, &pb, convention)?.value;
            let f_o = gibbs_and_fidelity(&eds[i], ba, &eds[j], bb)?;
            w[2].update((f - f_o).abs(), || {
                format!("{} vs {}", label(i, ba), label(j, bb))
            });
        }
    }
    let spec = StencilSpec::new(h)?;
    for (i, chain) in chains.iter().enumerate() {
        let shifted: Vec<ExactDiagonalization> = offsets
            .iter()
            .map(|k| ExactDiagonalization::new(&chain.with_field(chain.field() + k * h)?))
            .collect::<Result<_>>()?;
        for beta in VERIFY_BETAS {
            let mut k = 0;
            let d2 = try_second_derivative(
                |_| {
                    let v = gibbs_and_fidelity(&shifted[2], beta, &shifted[k], beta)? - 1.0;
                    k += 1;
                    Ok(v)
                },
                0.0,
                spec,
            )?;
            let chi_o = -d2;
            let chi = chi_formula(chain, beta, spec, convention)?;
            w[5].update((chi / chi_o - 1.0).abs(), || label(i, beta));
        }
    }
    Ok(w)
}

/// Runs all checks for `N ∈ {6, 8, …, max_n}`.
pub fn verify(
    max_n: usize,
    tolerance: f64,
    convention: EnergyConvention,
) -> CliResult<VerifyReport> {
    if !(6..=DEFAULT_SITE_CAP).contains(&max_n) {
        return Err(CliError::usage(
            "max-n",
            format!("{max_n} is outside [6, {DEFAULT_SITE_CAP}]"),
        ));
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::usage(
            "tol",
            format!("{tolerance} must be finite and > 0"),
        ));
    }
    let sizes: Vec<usize> = (6..=max_n).step_by(2).collect();
    let cases: Vec<(usize, f64)> = sizes
        .iter()
        .flat_map(|&n| VERIFY_GAMMAS.map(|g| (n, g)))
        .collect();
    let per_case: Vec<Vec<Worst>> = cases
        .par_iter()
        .map(|&(n, gamma)| verify_case(n, gamma, convention))
        .collect::<Result<_>>()?;
    let merged = per_case
        .into_iter()
        .fold(vec![Worst::new(); CHECK_NAMES.len()], |acc, v| {
            acc.into_iter().zip(v).map(|(a, b)| a.merge(b)).collect()
        });
    Ok(VerifyReport {
        sizes,
        tolerance,
        checks: CHECK_NAMES
            .iter()
            .zip(merged)
            .map(|(name, w)| CheckResult {
                name,
                max_residual: w.value,
                worst_case: w.at,
            })
            .collect(),
    })
}
