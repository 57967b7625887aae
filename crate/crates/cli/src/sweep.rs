//! Grid evaluation: one record per (N, γ, g, β, method), in that order.

use rayon::prelude::*;
use xychain::fidelity::{fidelity_tla_thermal, ln_fidelity_ppa};
use xychain::numerics::try_second_derivative;
use xychain::oracle::{gibbs_and_fidelity, ExactDiagonalization};
use xychain::response::{cv_with_step, xi_thermal, xi_thermal_closed_form};
use xychain::{
    chi_field, chi_ground, chi_tla, cv, fidelity_exact, fidelity_tla_field, ln_z, z_ppa, z_tla,
    ChainSpec, Error, GibbsPoint, Method, Parity, Result, StencilSpec,
};

use crate::config::{MethodName, Quantity, SweepConfig};
use crate::error::{CliError, CliResult};

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub gamma: f64,
    pub g: f64,
    pub beta: f64,
    pub method: MethodName,
    pub quantity: Quantity,
    /// `(value, step)`, or the error message of a failed evaluation.
    pub result: std::result::Result<(f64, f64), String>,
}

/// Reference state of a fidelity row.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub g: Option<f64>,
    pub beta: Option<f64>,
}

fn field_spec(step: Option<f64>) -> Result<StencilSpec> {
    step.map_or(Ok(StencilSpec::field_default()), StencilSpec::new)
}

fn beta_spec(step: Option<f64>, beta: f64) -> Result<StencilSpec> {
    step.map_or(Ok(StencilSpec::beta_default(beta)), StencilSpec::new)
}

fn core_method(method: MethodName) -> Option<Method> {
    match method {
        MethodName::Exact => Some(Method::Exact),
        MethodName::Ppa => Some(Method::Ppa),
        MethodName::Tla => Some(Method::Tla),
        MethodName::Ground | MethodName::Oracle => None,
    }
}

fn unsupported(what: &'static str) -> Error {
    Error::UnsupportedRegime(what)
}

/// `χ` from the five-point stencil applied to oracle fidelities.
pub fn oracle_chi_field(point: &GibbsPoint, spec: StencilSpec) -> Result<f64> {
    let chain = point.chain;
    let beta = point.beta();
    let base = ExactDiagonalization::new(&chain)?;
    let d2 = try_second_derivative(
        |delta| {
            let other = ExactDiagonalization::new(&chain.with_field(chain.field() + delta)?)?;
            Ok(gibbs_and_fidelity(&base, beta, &other, beta)? - 1.0)
        },
        0.0,
        spec,
    )?;
    Ok(-d2)
}

fn oracle_xi_thermal(point: &GibbsPoint, step: Option<f64>) -> Result<(f64, f64)> {
    let beta = point.beta();
    let ed = ExactDiagonalization::new(&point.chain)?;
    match step {
        None => {
            if beta <= 0.0 {
                return Err(Error::InvalidBeta(beta));
            }
            Ok((ed.specific_heat(beta) / (4.0 * beta * beta), 0.0))
        }
        Some(h) => {
            let spec = StencilSpec::new(h)?;
            if beta - 2.0 * h <= 0.0 {
                return Err(Error::StepDomain { beta, step: h });
            }
            let d2 = try_second_derivative(
                |d| Ok(gibbs_and_fidelity(&ed, beta - 0.5 * d, &ed, beta + 0.5 * d)?.ln()),
                0.0,
                spec,
            )?;
            Ok((-d2, h))
        }
    }
}

/// Evaluates one quantity with one backend; returns `(value, step used)`.
pub fn evaluate(
    quantity: Quantity,
    method: MethodName,
    point: &GibbsPoint,
    step: Option<f64>,
    reference: Reference,
) -> Result<(f64, f64)> {
    let chain = point.chain;
    let beta = point.beta();
    match quantity {
        Quantity::Fidelity => {
            let ref_beta = reference.beta.unwrap_or(beta);
            let ref_g = reference.g.unwrap_or(chain.field());
            let rho = chain.with_field(ref_g)?.at(ref_beta)?;
            let value = match method {
                MethodName::Exact => fidelity_exact(&rho, point)?.value,
                MethodName::Ppa => ln_fidelity_ppa(&rho, point)?.exp(),
                MethodName::Tla => {
                    if ref_beta == beta {
                        fidelity_tla_field(beta, &rho.chain, chain.field() - ref_g)?
                    } else if ref_g == chain.field() {
                        fidelity_tla_thermal(ref_beta, beta - ref_beta, &chain)?
                    } else {
                        return Err(unsupported(
                            "two-level fidelity needs equal fields or equal temperatures",
                        ));
                    }
                }
                MethodName::Ground => return Err(unsupported("the ground method has no fidelity")),
                MethodName::Oracle => gibbs_and_fidelity(
                    &ExactDiagonalization::new(&rho.chain)?,
                    ref_beta,
                    &ExactDiagonalization::new(&chain)?,
                    beta,
                )?,
            };
            Ok((value, 0.0))
        }
        Quantity::ChiField => match method {
            MethodName::Ground => {
                let abs = chain.with_field(chain.field().abs())?;
                Ok((chi_ground(&abs, Parity::Even)?, 0.0))
            }
            MethodName::Oracle => {
                let spec = field_spec(step)?;
                Ok((oracle_chi_field(point, spec)?, spec.step()))
            }
            MethodName::Tla if step.is_none() && chain.field() == 1.0 => {
                Ok((chi_tla(beta, &chain)?, 0.0))
            }
            m => {
                let r = chi_field(
                    point,
                    core_method(m).unwrap_or(Method::Exact),
                    field_spec(step)?,
                )?;
                Ok((r.value, r.step_used))
            }
        },
        Quantity::XiThermal => match method {
            MethodName::Ground => Err(unsupported(
                "the ground method has no thermal susceptibility",
            )),
            MethodName::Oracle => oracle_xi_thermal(point, step),
            MethodName::Exact if step.is_none() => Ok((xi_thermal_closed_form(point), 0.0)),
            m => {
                let spec = beta_spec(step, beta)?;
                let value = xi_thermal(point, core_method(m).unwrap_or(Method::Exact), spec)?;
                Ok((value, spec.step()))
            }
        },
        Quantity::Cv => match method {
            MethodName::Ground => Err(unsupported("the ground method has no specific heat")),
            MethodName::Oracle => Ok((ExactDiagonalization::new(&chain)?.specific_heat(beta), 0.0)),
            MethodName::Exact if step.is_none() => Ok((cv(point, Method::Exact)?, 0.0)),
            m => {
                let spec = beta_spec(step, beta)?;
                let value = cv_with_step(point, core_method(m).unwrap_or(Method::Exact), spec)?;
                Ok((value, spec.step()))
            }
        },
        Quantity::Z => {
            let value = match method {
                MethodName::Exact => ln_z(point),
                MethodName::Ppa => z_ppa(point).ln(),
                MethodName::Tla => z_tla(point)?.ln(),
                MethodName::Ground => {
                    return Err(unsupported("the ground method has no partition function"))
                }
                MethodName::Oracle => ExactDiagonalization::new(&chain)?.ln_z(beta),
            };
            Ok((value, 0.0))
        }
    }
}

/// Grid points in output order.
pub fn grid_points(config: &SweepConfig) -> Vec<(usize, f64, f64, f64, MethodName)> {
    let mut out = Vec::with_capacity(config.row_count());
    for &n in &config.n {
        for &gamma in &config.gamma {
            for &g in &config.g {
                for &beta in &config.beta {
                    for &m in &config.methods {
                        out.push((n, gamma, g, beta, m));
                    }
                }
            }
        }
    }
    out
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::usage("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Evaluates every grid point; failures are kept per row.
pub fn run_sweep(config: &SweepConfig) -> CliResult<Vec<Row>> {
    let reference = Reference {
        g: config.ref_g,
        beta: config.ref_beta,
    };
    let points = grid_points(config);
    with_workers(config.workers, || {
        points
            .par_iter()
            .map(|&(n, gamma, g, beta, method)| {
                let result = ChainSpec::new(n, gamma, g)
                    .and_then(|c| c.at(beta))
                    .and_then(|p| evaluate(config.quantity, method, &p, config.step, reference))
                    .map_err(|e| e.to_string());
                Row {
                    n,
                    gamma,
                    g,
                    beta,
                    method,
                    quantity: config.quantity,
                    result,
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(n: usize, g: f64, beta: f64) -> GibbsPoint {
        ChainSpec::ising(n, g).unwrap().at(beta).unwrap()
    }

    #[test]
    fn fidelity_reference_defaults_to_the_row() {
        let p = point(20, 1.0, 5.0);
        let (f, _) = evaluate(
            Quantity::Fidelity,
            MethodName::Exact,
            &p,
            None,
            Reference::default(),
        )
        .unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let r = Reference {
            g: Some(1.1),
            beta: None,
        };
        let (f, step) = evaluate(Quantity::Fidelity, MethodName::Exact, &p, None, r).unwrap();
        assert!(f < 1.0 && step == 0.0);
    }

    #[test]
    fn tla_fidelity_needs_one_shared_parameter() {
        let p = point(20, 1.0, 5.0);
        let r = Reference {
            g: Some(1.01),
            beta: Some(4.0),
        };
        assert!(evaluate(Quantity::Fidelity, MethodName::Tla, &p, None, r).is_err());
        let r = Reference {
            g: None,
            beta: Some(4.9),
        };
        let (f, _) = evaluate(Quantity::Fidelity, MethodName::Tla, &p, None, r).unwrap();
        assert!(f > 0.99 && f <= 1.0);
    }

    #[test]
    fn closed_forms_report_zero_step() {
        let p = point(50, 1.0, 10.0);
        let (v, h) = evaluate(
            Quantity::ChiField,
            MethodName::Ground,
            &p,
            None,
            Reference::default(),
        )
        .unwrap();
        assert_eq!((v, h), (76.5625, 0.0));
        let (_, h) = evaluate(
            Quantity::ChiField,
            MethodName::Tla,
            &p,
            None,
            Reference::default(),
        )
        .unwrap();
        assert_eq!(h, 0.0);
        let (_, h) = evaluate(
            Quantity::ChiField,
            MethodName::Tla,
            &p,
            Some(1e-3),
            Reference::default(),
        )
        .unwrap();
        assert_eq!(h, 1e-3);
        let (_, h) = evaluate(
            Quantity::ChiField,
            MethodName::Exact,
            &p,
            None,
            Reference::default(),
        )
        .unwrap();
        assert_eq!(h, 1e-3);
    }

    #[test]
    fn oracle_agrees_with_formulas() {
        let p = ChainSpec::new(6, 0.5, 0.8).unwrap().at(2.0).unwrap();
        let r = Reference {
            g: Some(1.0),
            beta: Some(3.0),
        };
        for q in [
            Quantity::Fidelity,
            Quantity::Cv,
            Quantity::Z,
            Quantity::XiThermal,
        ] {
            let (a, _) = evaluate(q, MethodName::Exact, &p, None, r).unwrap();
            let (b, _) = evaluate(q, MethodName::Oracle, &p, None, r).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{q}: {a} vs {b}");
        }
        let spec = StencilSpec::new(1e-2).unwrap();
        let a = chi_field(&p, Method::Exact, spec).unwrap().value;
        let b = oracle_chi_field(&p, spec).unwrap();
        assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
    }

    #[test]
    fn unsupported_combinations_are_errors() {
        let p = point(6, 1.0, 2.0);
        for q in [
            Quantity::Fidelity,
            Quantity::XiThermal,
            Quantity::Cv,
            Quantity::Z,
        ] {
            assert!(evaluate(q, MethodName::Ground, &p, None, Reference::default()).is_err());
        }
    }
}
