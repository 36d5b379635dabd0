use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlact_harness::{
    run_census, run_decoherence_sweep, run_extension_verify, run_iso_curve, run_protocol_verify, Experiment,
    ExperimentConfig, HarnessError, Report,
};

/// Nonlocality-activation experiments.
#[derive(Debug, Parser)]
#[command(name = "nlact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n_states: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    /// ad | pd | pd-verbatim | d
    #[arg(long, global = true)]
    channel: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    d: Option<String>,
    /// Also write every (t, classification) of a sweep.
    #[arg(long, global = true)]
    per_step: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify Hilbert-Schmidt random two-qubit states.
    Census,
    /// Decohere random pure states and track activation.
    Sweep,
    /// Check the protocol identities; exits 1 on any failed residual.
    Verify,
    /// Isotropic-state curves on a 201-point grid.
    IsoCurve,
    /// Check the symmetric-extension marginals.
    Extension,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let experiment = match self.command {
            Command::Census => Experiment::Census,
            Command::Sweep => Experiment::DecoherenceSweep,
            Command::Verify => Experiment::ProtocolVerify,
            Command::IsoCurve => Experiment::IsoCurve,
            Command::Extension => Experiment::ExtensionVerify,
        };
        let mut cfg = ExperimentConfig::new(experiment);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("n-states", &self.n_states),
            ("steps", &self.steps),
            ("channel", &self.channel),
            ("seed", &self.seed),
            ("format", &self.format),
            ("threads", &self.threads),
            ("k", &self.k),
            ("p", &self.p),
            ("d", &self.d),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if self.per_step {
            cfg.record_steps = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<(Report, bool), HarnessError> {
    let cfg = cli.config()?;
    Ok(match cfg.experiment {
        Experiment::Census => (run_census(&cfg)?.report(), true),
        Experiment::DecoherenceSweep => (run_decoherence_sweep(&cfg)?.report(), true),
        Experiment::IsoCurve => (run_iso_curve(&cfg)?.report(), true),
        Experiment::ProtocolVerify => {
            let r = run_protocol_verify(&cfg)?;
            for c in r.failures() {
                eprintln!("FAILED {}: residual {:e} > {:e}", c.name, c.residual, c.tolerance);
            }
            (r.report(), r.all_passed())
        }
        Experiment::ExtensionVerify => {
            let r = run_extension_verify(&cfg)?;
            for c in r.failures() {
                eprintln!("FAILED {}: residual {:e} > {:e}", c.name, c.residual, c.tolerance);
            }
            (r.report(), r.all_passed())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, ok)) => {
            print!("{}", report.summary_text());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
