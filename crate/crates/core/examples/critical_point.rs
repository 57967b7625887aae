//! Exact and positive-parity results for a 50-site Ising chain at `g = 1`.
//!
//! Run with `cargo run -p xychain --example critical_point`.

use xychain::{
    chi_field, chi_ground, cv, fidelity_exact, fidelity_ppa, peak_scan, ChainSpec, Method, Parity,
    StencilSpec,
};

fn main() -> xychain::Result<()> {
    let chain = ChainSpec::ising(50, 1.0)?;
    let spec = StencilSpec::field_default();

    println!(
        "{:>8} {:>14} {:>14} {:>12}",
        "beta", "chi exact", "chi ppa", "C_v exact"
    );
    for beta in [1.0, 10.0, 30.0, 100.0, 1000.0] {
        let p = chain.at(beta)?;
        println!(
            "{beta:>8} {:>14.6} {:>14.6} {:>12.6}",
            chi_field(&p, Method::Exact, spec)?.value,
            chi_field(&p, Method::Ppa, spec)?.value,
            cv(&p, Method::Exact)?
        );
    }
    println!(
        "ground-state limit chi_0+ = {}",
        chi_ground(&chain, Parity::Even)?
    );

    let peak = peak_scan(&chain, (1.0, 1000.0), Method::Exact)?;
    println!(
        "chi peak {:.6} at beta = {:.4}",
        peak.chi_max, peak.beta_star
    );

    let rho = chain.at(75.0)?;
    let sigma = rho.with_field(1.05)?;
    println!(
        "F(g=1, g=1.05; beta=75): exact {:.10}, ppa {:.10}",
        fidelity_exact(&rho, &sigma)?.value,
        fidelity_ppa(&rho, &sigma)?
    );
    Ok(())
}
