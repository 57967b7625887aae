//! Data tables and gnuplot sidecars for the published figures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use xychain::oracle::{gibbs_and_fidelity, ExactDiagonalization};
use xychain::{
    chi_field, chi_ground, chi_tla, cv, fidelity_exact, fidelity_ppa, ChainSpec, Method, Parity,
    Result, StencilSpec,
};

use crate::error::{CliError, CliResult};
use crate::grid::Range;
use crate::output::{fmt_float, version_line};
use crate::verify::VERIFY_CHI_STEP;

/// Chain length of the figures that fix a single size.
pub const FIGURE_SITES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub const ALL: [Self; 8] = [
        Self::Fig1a,
        Self::Fig1b,
        Self::Fig1c,
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1a => "fig1a",
            Self::Fig1b => "fig1b",
            Self::Fig1c => "fig1c",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
        }
    }
}

/// A wide table: the first column is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub figure: Figure,
    pub description: String,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub log_x: bool,
    pub log_y: bool,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", version_line());
        let _ = writeln!(s, "# {}: {}", self.figure.name(), self.description);
        for note in &self.notes {
            let _ = writeln!(s, "# {note}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// gnuplot script that plots every column against the first.
    pub fn to_gnuplot(&self, data_file: &str) -> String {
        let name = self.figure.name();
        let mut s = String::new();
        let _ = writeln!(s, "# {}: {}", name, self.description);
        let _ = writeln!(s, "# usage: gnuplot {name}.gp");
        s.push_str("set terminal pngcairo size 900,600\n");
        let _ = writeln!(s, "set output '{name}.png'");
        s.push_str("set datafile separator ','\n");
        s.push_str("set datafile commentschars '#'\n");
        s.push_str("set key autotitle columnhead\n");
        let _ = writeln!(s, "set xlabel '{}'", self.columns[0]);
        if self.log_x {
            s.push_str("set logscale x\n");
        }
        if self.log_y {
            s.push_str("set logscale y\n");
        }
        let plots: Vec<String> = (2..=self.columns.len())
            .map(|i| format!("'{data_file}' using 1:{i} with lines"))
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
        s
    }
}

fn range(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    let spacing = if log {
        crate::grid::Spacing::Log
    } else {
        crate::grid::Spacing::Linear
    };
    Range {
        start,
        stop,
        count,
        spacing,
    }
    .values()
}

fn tabulate<F>(xs: &[f64], row: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    xs.par_iter()
        .map(|&x| {
            let mut r = vec![x];
            r.extend(row(x)?);
            Ok(r)
        })
        .collect()
}

fn field_fidelity(beta: f64, panel: Figure) -> Result<Table> {
    let reference = ChainSpec::ising(FIGURE_SITES, 1.0)?.at(beta)?;
    let gs = range(0.8, 1.2, 201, false);
    let rows = tabulate(&gs, |g| {
        let other = ChainSpec::ising(FIGURE_SITES, g)?.at(beta)?;
        Ok(vec![
            fidelity_exact(&reference, &other)?.value,
            fidelity_ppa(&reference, &other)?,
        ])
    })?;
    Ok(Table {
        figure: panel,
        description: "F(rho(beta, g=1), sigma(beta, g)) versus g".into(),
        notes: vec![format!("N = {FIGURE_SITES}, gamma = 1, beta = {beta}")],
        columns: vec!["g".into(), "F_exact".into(), "F_ppa".into()],
        rows,
        log_x: false,
        log_y: false,
    })
}

fn fig1c() -> Result<Table> {
    let chain = ChainSpec::ising(FIGURE_SITES, 1.0)?;
    let reference = chain.at(75.0)?;
    let betas = range(1.0, 1e4, 201, true);
    let rows = tabulate(&betas, |beta| {
        let other = chain.at(beta)?;
        Ok(vec![
            fidelity_exact(&reference, &other)?.value,
            fidelity_ppa(&reference, &other)?,
        ])
    })?;
    Ok(Table {
        figure: Figure::Fig1c,
        description: "F(rho(75, 1), sigma(beta, 1)) versus beta".into(),
        notes: vec![format!("N = {FIGURE_SITES}, gamma = 1, g = 1")],
        columns: vec!["beta".into(), "F_exact".into(), "F_ppa".into()],
        rows,
        log_x: true,
        log_y: false,
    })
}

fn fig2() -> Result<Table> {
    let betas = [2.0, 10.0, 75.0];
    let spec = StencilSpec::field_default();
    let gs = range(0.9, 1.1, 201, false);
    let rows = tabulate(&gs, |g| {
        let chain = ChainSpec::ising(FIGURE_SITES, g)?;
        let mut r = Vec::new();
        for beta in betas {
            let p = chain.at(beta)?;
            r.push(chi_field(&p, Method::Exact, spec)?.value);
            r.push(chi_field(&p, Method::Ppa, spec)?.value);
        }
        Ok(r)
    })?;
    let mut columns = vec!["g".to_string()];
    for beta in betas {
        columns.push(format!("chi_exact_beta{beta}"));
        columns.push(format!("chi_ppa_beta{beta}"));
    }
    Ok(Table {
        figure: Figure::Fig2,
        description: "fidelity susceptibility versus g".into(),
        notes: vec![
            format!("N = {FIGURE_SITES}, gamma = 1, beta = {betas:?}"),
            format!("field stencil step {:e}", spec.step()),
        ],
        columns,
        rows,
        log_x: false,
        log_y: false,
    })
}

fn fig3() -> Result<Table> {
    let chain = ChainSpec::ising(FIGURE_SITES, 1.0)?;
    let ground = chi_ground(&chain, Parity::Even)?;
    let spec = StencilSpec::field_default();
    let betas = range(0.1, 1e4, 201, true);
    let rows = tabulate(&betas, |beta| {
        let p = chain.at(beta)?;
        Ok(vec![
            chi_field(&p, Method::Exact, spec)?.value,
            chi_field(&p, Method::Ppa, spec)?.value,
            ground,
        ])
    })?;
    Ok(Table {
        figure: Figure::Fig3,
        description: "fidelity susceptibility at g = 1 versus beta".into(),
        notes: vec![
            format!("N = {FIGURE_SITES}, gamma = 1, g = 1"),
            format!("field stencil step {:e}", spec.step()),
        ],
        columns: vec![
            "beta".into(),
            "chi_exact".into(),
            "chi_ppa".into(),
            "chi_ground_even".into(),
        ],
        rows,
        log_x: true,
        log_y: true,
    })
}

fn fig4() -> Result<Table> {
    let chain = ChainSpec::ising(FIGURE_SITES, 1.0)?;
    let spec = StencilSpec::field_default();
    let betas = range(0.1, 1e4, 201, true);
    let rows = tabulate(&betas, |beta| {
        let exact = chi_field(&chain.at(beta)?, Method::Exact, spec)?.value;
        let tla = chi_tla(beta, &chain)?;
        Ok(vec![exact, tla, (tla - exact).abs() / exact])
    })?;
    let table = Table {
        figure: Figure::Fig4,
        description: "exact and two-level fidelity susceptibility at g = 1".into(),
        notes: vec![format!("N = {FIGURE_SITES}, gamma = 1, g = 1")],
        columns: vec![
            "beta".into(),
            "chi_exact".into(),
            "chi_tla".into(),
            "rel_error".into(),
        ],
        rows,
        log_x: true,
        log_y: true,
    };
    let (peak, err) = peak_window_error(&table);
    let mut table = table;
    table.notes.push(format!(
        "max relative error within a factor 2 of the exact peak at beta = {}: {err:.3e}",
        fmt_float(peak)
    ));
    Ok(table)
}

/// Largest TLA relative error for `β` within a factor two of the exact peak.
pub fn peak_window_error(fig4: &Table) -> (f64, f64) {
    let peak = fig4
        .rows
        .iter()
        .max_by(|a, b| a[1].total_cmp(&b[1]))
        .map_or(f64::NAN, |r| r[0]);
    let err = fig4
        .rows
        .iter()
        .filter(|r| r[0] >= 0.5 * peak && r[0] <= 2.0 * peak)
        .map(|r| r[3])
        .fold(0.0, f64::max);
    (peak, err)
}

fn fig5() -> Result<Table> {
    let sizes = [50, 100];
    let betas = range(0.1, 1e4, 201, true);
    let rows = tabulate(&betas, |beta| {
        let mut r = Vec::new();
        for n in sizes {
            let p = ChainSpec::ising(n, 1.0)?.at(beta)?;
            for m in [Method::Exact, Method::Ppa, Method::Tla] {
                r.push(cv(&p, m)?);
            }
        }
        Ok(r)
    })?;
    let mut columns = vec!["beta".to_string()];
    for n in sizes {
        for m in ["exact", "ppa", "tla"] {
            columns.push(format!("cv_{m}_N{n}"));
        }
    }
    Ok(Table {
        figure: Figure::Fig5,
        description: "specific heat at g = 1 versus beta".into(),
        notes: vec![format!("N = {sizes:?}, gamma = 1, g = 1")],
        columns,
        rows,
        log_x: true,
        log_y: true,
    })
}

/// Oracle `χ` at `g0 + i·h`, `i < points`; the diagonalizations on the
/// lattice are shared between neighbouring stencils.
fn oracle_chi_on_lattice(n: usize, beta: f64, g0: f64, h: f64, points: usize) -> Result<Vec<f64>> {
    let lattice: Vec<ExactDiagonalization> = (0..points + 4)
        .into_par_iter()
        .map(|i| ExactDiagonalization::new(&ChainSpec::ising(n, g0 + (i as f64 - 2.0) * h)?))
        .collect::<Result<_>>()?;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let centre = &lattice[i + 2];
            let f = |k: usize| gibbs_and_fidelity(centre, beta, &lattice[k], beta).map(|x| x - 1.0);
            let d2 = (-f(i)? + 16.0 * f(i + 1)? - 30.0 * f(i + 2)? + 16.0 * f(i + 3)? - f(i + 4)?)
                / (12.0 * h * h);
            Ok(-d2)
        })
        .collect()
}

fn fig6() -> Result<Table> {
    let sizes = [6, 8, 10];
    let beta = 10.0;
    let h = VERIFY_CHI_STEP;
    let spec = StencilSpec::new(h)?;
    // g = 0.4, 0.44, ..., 1.6: every fourth site of the stencil lattice.
    let (g0, stride, count) = (0.4, 4, 31);
    let lattice_points = (count - 1) * stride + 1;
    let gs: Vec<f64> = (0..count).map(|i| g0 + (i * stride) as f64 * h).collect();
    let mut oracle = Vec::new();
    for n in sizes {
        let all = oracle_chi_on_lattice(n, beta, g0, h, lattice_points)?;
        oracle.push(all.into_iter().step_by(stride).collect::<Vec<f64>>());
    }
    let rows = gs
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let mut r = vec![g];
            for (s, &n) in sizes.iter().enumerate() {
                let p = ChainSpec::ising(n, g)?.at(beta)?;
                r.push(chi_field(&p, Method::Exact, spec)?.value);
                r.push(oracle[s][i]);
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["g".to_string()];
    for n in sizes {
        columns.push(format!("chi_exact_N{n}"));
        columns.push(format!("chi_oracle_N{n}"));
    }
    Ok(Table {
        figure: Figure::Fig6,
        description: "fidelity susceptibility versus g, formula and exact diagonalization".into(),
        notes: vec![
            format!("N = {sizes:?}, gamma = 1, beta = {beta}"),
            format!("field stencil step {:e} for both columns", spec.step()),
        ],
        columns,
        rows,
        log_x: false,
        log_y: false,
    })
}

pub fn figure_table(figure: Figure) -> Result<Table> {
    match figure {
        Figure::Fig1a => field_fidelity(2.0, Figure::Fig1a),
        Figure::Fig1b => field_fidelity(75.0, Figure::Fig1b),
        Figure::Fig1c => fig1c(),
        Figure::Fig2 => fig2(),
        Figure::Fig3 => fig3(),
        Figure::Fig4 => fig4(),
        Figure::Fig5 => fig5(),
        Figure::Fig6 => fig6(),
    }
}

/// Writes `<name>.csv` and `<name>.gp` into `dir`, returning both paths.
pub fn reproduce(figure: Figure, dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let table = figure_table(figure)?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let data = dir.join(format!("{}.csv", figure.name()));
    let script = dir.join(format!("{}.gp", figure.name()));
    fs::write(&data, table.to_csv()).map_err(|e| CliError::io(data.display().to_string(), e))?;
    let data_name = format!("{}.csv", figure.name());
    fs::write(&script, table.to_gnuplot(&data_name))
        .map_err(|e| CliError::io(script.display().to_string(), e))?;
    Ok((data, script))
}
