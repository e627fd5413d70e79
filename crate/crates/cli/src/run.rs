//! Command dispatch: library calls in, tables and plots out.

use std::io::Write as _;
use std::path::Path;

use aptqfi_core::hamiltonian::DEFAULT_EP_TOL;
use aptqfi_core::lindblad::{default_cutoffs, default_t_end, fidelity_with_coherent, mean_fields_at};
use aptqfi_core::{
    analytic_sensitivity, build_hamiltonian, qfi_report, spectrum, steady_state, sweep_bound, EvolveOptions,
    FockDensityMatrix, GammaConvention, Phase, SystemParams,
};

use crate::config::{Command, Format, RunConfig};
use crate::error::{status_tag, CliError};
use crate::plot::{LogLogPlot, Series};
use crate::table::{Cell, Column, Table};

/// Everything a run produces, before it is written anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub table: Table,
    /// SVG document, present for sweeps.
    pub plot: Option<String>,
}

impl Artifacts {
    pub fn encode(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => self.table.to_json(),
        }
    }
}

/// Computes the artifacts for `config` without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<Artifacts, CliError> {
    config.validate()?;
    let table = match config.command {
        Command::Spectrum => spectrum_table(config)?,
        Command::Steady => steady_table(config)?,
        Command::Sensitivity => sensitivity_table(config)?,
        Command::Qfi => qfi_table(config)?,
        Command::Sweep => return sweep(config),
        Command::Evolve => evolve_table(config)?,
    };
    Ok(Artifacts { table, plot: None })
}

/// Computes and writes the table (file or stdout) and the optional plot.
pub fn run(config: &RunConfig) -> Result<Artifacts, CliError> {
    let artifacts = execute(config)?;
    let text = artifacts.encode(config.output.format);
    match &config.output.path {
        Some(path) => write_file(path, &text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    if let (Some(path), Some(svg)) = (&config.output.plot, &artifacts.plot) {
        write_file(path, svg)?;
    }
    Ok(artifacts)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn phase_tag(phase: Phase) -> &'static str {
    match phase {
        Phase::Unbroken => "unbroken",
        Phase::Broken => "broken",
        Phase::ExceptionalPoint => "exceptional_point",
    }
}

/// One row at `params`, or one row per grid value of the scanned parameter
/// with a leading parameter column and a trailing status column. Failures
/// abort a single-point run but only blank their row in a scan.
fn scan<F>(config: &RunConfig, columns: Vec<Column>, row: F) -> Result<Table, CliError>
where
    F: Fn(&SystemParams) -> aptqfi_core::Result<Vec<Cell>>,
{
    let width = columns.len();
    let (Some(grid), Some(par)) = (config.grid, config.parameter) else {
        let mut table = Table::new(config.command.name(), columns);
        table.push(row(&config.params)?);
        return Ok(table);
    };
    let mut all = vec![Column::real(par.symbol(), "Gamma")];
    all.extend(columns);
    all.push(Column::text("status"));
    let mut table = Table::new(config.command.name(), all);
    for value in grid.points() {
        let p = par.with_value(&config.params, value, GammaConvention::default());
        let mut cells = vec![Cell::Real(value)];
        match p.validate().and_then(|_| row(&p)) {
            Ok(values) => {
                cells.extend(values);
                cells.push(Cell::Text("ok".into()));
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(Cell::Missing, width));
                cells.push(Cell::Text(status_tag(&e).into()));
            }
        }
        table.push(cells);
    }
    Ok(table)
}

fn spectrum_table(config: &RunConfig) -> Result<Table, CliError> {
    let columns = vec![
        Column::complex("lambda_plus", "Gamma"),
        Column::complex("lambda_minus", "Gamma"),
        Column::real("splitting", "Gamma"),
        Column::text("phase"),
    ];
    scan(config, columns, |p| {
        let info = spectrum(&build_hamiltonian(p), DEFAULT_EP_TOL);
        Ok(vec![
            Cell::Complex(info.eigenvalues[0]),
            Cell::Complex(info.eigenvalues[1]),
            Cell::Real(info.splitting),
            Cell::Text(phase_tag(info.phase).into()),
        ])
    })
}

fn steady_table(config: &RunConfig) -> Result<Table, CliError> {
    let columns = vec![Column::complex("alpha0", "1"), Column::complex("beta0", "1")];
    scan(config, columns, |p| {
        let x = steady_state(p)?;
        Ok(vec![Cell::Complex(x.alpha0), Cell::Complex(x.beta0)])
    })
}

fn sensitivity_table(config: &RunConfig) -> Result<Table, CliError> {
    let par = config.require_parameter()?;
    let columns = vec![Column::complex("d_alpha", "1/Gamma"), Column::complex("d_beta", "1/Gamma")];
    scan(config, columns, |p| {
        let s = analytic_sensitivity(p, par)?;
        Ok(vec![Cell::Complex(s.d_alpha), Cell::Complex(s.d_beta)])
    })
}

fn bound_name(symbol: &str) -> String {
    format!("delta_{symbol}_bound")
}

fn qfi_table(config: &RunConfig) -> Result<Table, CliError> {
    let par = config.require_parameter()?;
    let columns = vec![
        Column::real("F_Q", "1/Gamma^2"),
        Column::real(bound_name(par.symbol()), "Gamma"),
        Column::real("abs_d_alpha", "1/Gamma"),
        Column::real("abs_d_beta", "1/Gamma"),
    ];
    scan(config, columns, |p| {
        let r = qfi_report(p, par)?;
        Ok(vec![
            Cell::Real(r.fisher_info),
            Cell::Real(r.cr_bound),
            Cell::Real(r.d_alpha_mag),
            Cell::Real(r.d_beta_mag),
        ])
    })
}

fn sweep(config: &RunConfig) -> Result<Artifacts, CliError> {
    let par = config.require_parameter()?;
    let grid = config.grid.ok_or_else(|| CliError::config("grid", "required by 'sweep'"))?;
    let xi = config.xi.clone().unwrap_or_default();
    let rows = sweep_bound(&config.params, par, &xi, &grid.points())?;

    let sym = par.symbol();
    let mut table = Table::new(
        config.command.name(),
        vec![
            Column::real("xi", "1"),
            Column::real(sym, "Gamma"),
            Column::real("F_Q", "1/Gamma^2"),
            Column::real(bound_name(sym), "Gamma"),
            Column::text("status"),
        ],
    );
    let mut series: Vec<Series> = Vec::new();
    for row in &rows {
        let (f, b, status) = match &row.outcome {
            Ok(r) => (Cell::Real(r.fisher_info), Cell::Real(r.cr_bound), "ok"),
            Err(e) => (Cell::Missing, Cell::Missing, status_tag(e)),
        };
        table.push(vec![Cell::Real(row.xi), Cell::Real(row.epsilon), f, b, Cell::Text(status.into())]);

        let label = format!("xi = {:e}", row.xi);
        if series.last().is_none_or(|s| s.label != label) {
            series.push(Series { label, points: Vec::new() });
        }
        let y = row.cr_bound().unwrap_or(f64::NAN);
        series.last_mut().expect("pushed above").points.push((row.epsilon.abs(), y));
    }
    let plot = LogLogPlot {
        title: format!("Cramér-Rao bound on {sym}"),
        x_label: format!("|{sym}| [Gamma]"),
        y_label: format!("{} [Gamma]", bound_name(sym)),
        series,
    };
    Ok(Artifacts { table, plot: Some(plot.render()) })
}

fn evolve_table(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.params;
    let sim = config.sim.unwrap_or_default();
    let cutoffs = match sim.cutoffs {
        Some(c) => c,
        None => default_cutoffs(&params)?,
    };
    let t_end = match sim.t_end {
        Some(t) => t,
        None => {
            let t = default_t_end(&params);
            if !t.is_finite() {
                return Err(CliError::config("sim.t_end", "required: these parameters do not relax"));
            }
            t
        }
    };
    let last = (sim.samples - 1) as f64;
    let times: Vec<f64> = (0..sim.samples)
        .map(|k| if k == sim.samples - 1 { t_end } else { t_end * k as f64 / last })
        .collect();
    let opts = EvolveOptions {
        tol: sim.tol,
        ..EvolveOptions::default()
    };
    let states = aptqfi_core::evolve_sampled(&FockDensityMatrix::vacuum(cutoffs), &params, &times, opts, |_, _| Ok(()))?;
    let steady = steady_state(&params).ok();

    let mut table = Table::new(
        config.command.name(),
        vec![
            Column::real("t", "1/Gamma"),
            Column::complex("a", "1"),
            Column::complex("b", "1"),
            Column::complex("a_ode", "1"),
            Column::complex("b_ode", "1"),
            Column::real("trace_error", "1"),
            Column::real("boundary_population", "1"),
            Column::real("infidelity_steady", "1"),
        ],
    );
    for (&t, rho) in times.iter().zip(&states) {
        let (a, b) = rho.mean_fields();
        let (a_ode, b_ode) = mean_fields_at(&params, t);
        let infidelity = match steady {
            Some(x) => Cell::Real(1.0 - fidelity_with_coherent(rho, x.alpha0, x.beta0)?),
            None => Cell::Missing,
        };
        table.push(vec![
            Cell::Real(t),
            Cell::Complex(a),
            Cell::Complex(b),
            Cell::Complex(a_ode),
            Cell::Complex(b_ode),
            Cell::Real((rho.trace().re - 1.0).abs()),
            Cell::Real(rho.boundary_population()),
            infidelity,
        ]);
    }
    Ok(table)
}
