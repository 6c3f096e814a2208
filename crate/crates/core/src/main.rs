use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use sbp_lab::advection::Form;
use sbp_lab::experiments::{
    cfl_csv, cfl_max, conservation_error, convergence_error, eigen_csv, run_burgers,
    scheme_spectrum, sci, sweep, table_csv, AdvectionSetup, CflRow, EigenScenario, TableRow,
};
use sbp_lab::flux::FluxKind;
use sbp_lab::grid::SpeedMode;
use sbp_lab::reference::eoc;
use sbp_lab::sbp::NodeFamily;
use sbp_lab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sbp-lab",
    version,
    about = "Summation-by-parts advection and Burgers experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// L2 errors for a = 1 + cosh x, u0 = sin(pi x) at T = 0.5.
    Convergence {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Sweep p = 2..=10 at each N instead of using --p.
        #[arg(long)]
        p_sweep: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mass errors for a = cos(pi x / 2), u0 = 1 + cos(pi x) / 2 at T = 0.5.
    Conservation {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sorted spectrum of the linear semidiscrete operator.
    Eigenvalues {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Polynomial degree; defaults to the scenario's.
        #[arg(long)]
        p: Option<usize>,
        /// Number of elements; defaults to the scenario's.
        #[arg(long = "N")]
        n: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Largest stable c = dt (2p + 1) N for the convergence problem.
    Cfl {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Burgers' equation with the Godunov flux, u0 = sin(pi x) on [0, 2] at T = 0.3.
    Burgers {
        #[arg(long, value_enum, default_value = "lobatto")]
        nodes: NodesArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "split")]
    form: FormArg,
    /// `central`, `upwind`, or an explicit flux name such as `split-central`.
    #[arg(long, default_value = "central")]
    flux: String,
    #[arg(long, value_enum, default_value = "lobatto")]
    nodes: NodesArg,
    /// How the speed is discretised; by default Gauss split forms interpolate from Lobatto nodes.
    #[arg(long, value_enum)]
    speed_disc: Option<SpeedArg>,
}

#[derive(Args)]
struct GridArgs {
    /// Polynomial degrees, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    p: Vec<usize>,
    /// Element counts, comma separated.
    #[arg(long = "N", value_delimiter = ',', default_value = "16,32,64")]
    n: Vec<usize>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Split,
    SplitSimplified,
    Unsplit,
    NonconsGeneral,
    NonconsSimplified,
}

#[derive(Clone, Copy, ValueEnum)]
enum NodesArg {
    Lobatto,
    Gauss,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeedArg {
    Direct,
    Lobatto,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    NonperiodicCosh,
    PeriodicSin,
    Manzanero,
}

impl From<NodesArg> for NodeFamily {
    fn from(n: NodesArg) -> Self {
        match n {
            NodesArg::Lobatto => NodeFamily::Lobatto,
            NodesArg::Gauss => NodeFamily::Gauss,
        }
    }
}

impl From<ScenarioArg> for EigenScenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::NonperiodicCosh => EigenScenario::NonperiodicCosh,
            ScenarioArg::PeriodicSin => EigenScenario::PeriodicSin,
            ScenarioArg::Manzanero => EigenScenario::Manzanero,
        }
    }
}

const FLUXES: [FluxKind; 8] = [
    FluxKind::EdgeCentral,
    FluxKind::SplitCentral,
    FluxKind::UnsplitCentral,
    FluxKind::EdgeUpwind,
    FluxKind::SplitUpwind,
    FluxKind::UnsplitUpwind,
    FluxKind::ModifiedCentral,
    FluxKind::ModifiedUpwind,
];

impl SchemeArgs {
    fn setup(
        &self,
        speed_default: impl Fn(Form, NodeFamily) -> SpeedMode,
    ) -> Result<AdvectionSetup> {
        let form = match self.form {
            FormArg::Split => Form::SplitGeneral,
            FormArg::SplitSimplified => Form::SplitSimplified,
            FormArg::Unsplit => Form::Unsplit,
            FormArg::NonconsGeneral => Form::NonconsGeneral,
            FormArg::NonconsSimplified => Form::NonconsSimplified,
        };
        let flux = match self.flux.as_str() {
            "central" => form.matching_central(),
            "upwind" => form.matching_upwind(),
            name => *FLUXES
                .iter()
                .find(|f| f.name() == name)
                .ok_or_else(|| Error::Configuration(format!("unknown flux `{name}`")))?,
        };
        let family = NodeFamily::from(self.nodes);
        let speed_mode = match self.speed_disc {
            Some(SpeedArg::Direct) => SpeedMode::DirectOnNodes,
            Some(SpeedArg::Lobatto) => SpeedMode::ViaLobattoInterpolation,
            None => speed_default(form, family),
        };
        Ok(AdvectionSetup {
            form,
            flux,
            family,
            speed_mode,
        })
    }
}

fn default_speed_mode(form: Form, family: NodeFamily) -> SpeedMode {
    EigenScenario::NonperiodicCosh.default_speed_mode(form, family)
}

impl GridArgs {
    fn check(&self) -> Result<()> {
        if self.p.is_empty() || self.n.is_empty() {
            return Err(Error::Configuration(
                "--p and --N need at least one value".into(),
            ));
        }
        Ok(())
    }
}

fn emit(output: &OutputArgs, csv: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| Error::Configuration(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Convergence {
            scheme,
            grid,
            p_sweep,
            output,
        } => {
            grid.check()?;
            let setup = scheme.setup(default_speed_mode)?;
            let rows = if p_sweep {
                let ps: Vec<usize> = (2..=10).collect();
                let mut rows = Vec::new();
                for &n in &grid.n {
                    rows.extend(sweep(&ps, &[n], |p, n| convergence_error(setup, p, n))?);
                }
                rows
            } else {
                sweep(&grid.p, &grid.n, |p, n| convergence_error(setup, p, n))?
            };
            emit(&output, &table_csv(&rows))
        }
        Command::Conservation {
            scheme,
            grid,
            output,
        } => {
            grid.check()?;
            let setup = scheme.setup(default_speed_mode)?;
            let rows = sweep(&grid.p, &grid.n, |p, n| conservation_error(setup, p, n))?;
            emit(&output, &table_csv(&rows))
        }
        Command::Eigenvalues {
            scenario,
            scheme,
            p,
            n,
            output,
        } => {
            let scenario = EigenScenario::from(scenario);
            let setup = scheme.setup(|form, family| scenario.default_speed_mode(form, family))?;
            let (p_default, n_default) = scenario.default_resolution();
            let built = scenario.scheme(setup, p.unwrap_or(p_default), n.unwrap_or(n_default))?;
            let summary = scheme_spectrum(&built, 0.0)?;
            eprintln!(
                "spectral abscissa {} (relative to ||L||_F: {})",
                sci(summary.abscissa),
                sci(summary.abscissa / summary.frobenius_norm)
            );
            emit(&output, &eigen_csv(&summary.eigenvalues))
        }
        Command::Cfl {
            scheme,
            grid,
            output,
        } => {
            grid.check()?;
            let setup = scheme.setup(default_speed_mode)?;
            let pairs: Vec<(usize, usize)> = grid
                .p
                .iter()
                .flat_map(|&p| grid.n.iter().map(move |&n| (p, n)))
                .collect();
            let rows = pairs
                .par_iter()
                .map(|&(p, n)| {
                    Ok(CflRow {
                        p,
                        n,
                        flux: setup.flux,
                        form: setup.form,
                        c_max: cfl_max(setup, p, n)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&output, &cfl_csv(&rows))
        }
        Command::Burgers {
            nodes,
            grid,
            output,
        } => {
            grid.check()?;
            let family = NodeFamily::from(nodes);
            let pairs: Vec<(usize, usize)> = grid
                .p
                .iter()
                .flat_map(|&p| grid.n.iter().map(move |&n| (p, n)))
                .collect();
            let runs = pairs
                .par_iter()
                .map(|&(p, n)| run_burgers(family, p, n))
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::with_capacity(runs.len());
            for (chunk, chunk_runs) in pairs.chunks(grid.n.len()).zip(runs.chunks(grid.n.len())) {
                let errors: Vec<f64> = chunk_runs.iter().map(|r| r.error).collect();
                let orders = if errors.len() >= 2 {
                    eoc(&errors, &grid.n)?
                } else {
                    Vec::new()
                };
                for (k, (&(p, n), &error)) in chunk.iter().zip(&errors).enumerate() {
                    rows.push(TableRow {
                        p,
                        n,
                        error,
                        eoc: if k == 0 { None } else { orders[k - 1] },
                    });
                }
            }
            let drift = runs.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
            eprintln!("max relative mass drift {}", sci(drift));
            emit(&output, &table_csv(&rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
