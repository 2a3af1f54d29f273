use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use induced_coherence::cli::{
    cmd_esf, cmd_oracle, cmd_simulate, cmd_verify, cmd_visibility, load_config, render_oracle_table,
    render_verify_summary, DEFAULT_ROWS,
};
use induced_coherence::sim::Mode;

#[derive(Parser)]
#[command(name = "icfs", version, about = "Induced-coherence knife-edge entanglement certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a phase-scanned frame stack.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit every pixel of a stack and write the visibility CSV.
    Visibility {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the edge-spread function of a visibility CSV.
    Esf {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ROWS)]
        rows: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combine far-field and near-field edge reports into EPR/MGVT verdicts.
    Verify {
        ff_report: PathBuf,
        nf_report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every closed form against quadrature.
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        check: String,
        /// Override every check tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn run(cli: Cli) -> induced_coherence::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, mode, seed, out } => {
            let cfg = load_config(config.as_deref())?;
            let s = cmd_simulate(&cfg, mode, seed, &out)?;
            eprintln!(
                "wrote {} frames of {}x{} to {} ({} saturated counts)",
                s.frames,
                s.width,
                s.height,
                out.display(),
                s.saturated
            );
        }
        Command::Visibility { input, out } => {
            let map = cmd_visibility(&input, &out)?;
            eprintln!("{} of {} pixels valid", map.valid_count(), map.fits.len());
        }
        Command::Esf { input, rows, out } => {
            let r = cmd_esf(&input, rows, &out)?;
            eprintln!(
                "D = {:.4e} ± {:.2e} m, x0 = {:.4e} m, V_max = {:.4}",
                r.d_m, r.d_sigma_m, r.x0_m, r.v_max
            );
        }
        Command::Verify {
            ff_report,
            nf_report,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let report = cmd_verify(&ff_report, &nf_report, &cfg, out.as_deref())?;
            if out.is_none() {
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            eprint!("{}", render_verify_summary(&report));
        }
        Command::Oracle { config, check, tol } => {
            let cfg = load_config(config.as_deref())?;
            let results = cmd_oracle(&cfg, &check, tol)?;
            print!("{}", render_oracle_table(&results));
            if results.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
