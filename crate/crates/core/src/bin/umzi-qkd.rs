//! Command-line front end: `umzi-qkd <eval|sweep|maxdist|optimize> [--config PATH] [--key value ...]`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use umzi_qkd::cli::{parse_config, run, CliError, Overrides};

#[derive(Parser, Debug)]
#[command(name = "umzi-qkd", version, about = "Secret-key rate of phase-coding BB84 with a lossy long-arm phase modulator")]
struct Args {
    /// eval, sweep, maxdist or optimize
    command: Option<String>,

    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, value_name = "MU")]
    mu: Option<String>,
    #[arg(long, value_name = "NU")]
    nu: Option<String>,
    #[arg(long = "alpha_db_per_km", alias = "alpha-db-per-km", value_name = "DB_PER_KM")]
    alpha_db_per_km: Option<String>,
    #[arg(long = "eta_bob", alias = "eta-bob", value_name = "PROB")]
    eta_bob: Option<String>,
    #[arg(long, value_name = "PROB")]
    y0: Option<String>,
    #[arg(long = "e_det", alias = "e-det", value_name = "PROB")]
    e_det: Option<String>,
    #[arg(long, value_name = "PROB")]
    e0: Option<String>,
    #[arg(long = "f_ec", alias = "f-ec", value_name = "F")]
    f_ec: Option<String>,
    #[arg(long = "q_sift", alias = "q-sift", value_name = "Q")]
    q_sift: Option<String>,
    #[arg(long = "d_min_km", alias = "d-min-km", value_name = "KM")]
    d_min_km: Option<String>,
    #[arg(long = "d_max_km", alias = "d-max-km", value_name = "KM")]
    d_max_km: Option<String>,
    #[arg(long = "step_km", alias = "step-km", value_name = "KM")]
    step_km: Option<String>,
    /// Comma-separated: ideal, virtual, naive, compensated.
    #[arg(long, value_name = "LIST")]
    scenarios: Option<String>,
    /// CSV destination for `sweep`; standard output when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
}

impl Args {
    fn overrides(&self) -> Overrides {
        let flags = [
            ("mu", &self.mu),
            ("nu", &self.nu),
            ("alpha_db_per_km", &self.alpha_db_per_km),
            ("eta_bob", &self.eta_bob),
            ("y0", &self.y0),
            ("e_det", &self.e_det),
            ("e0", &self.e0),
            ("f_ec", &self.f_ec),
            ("q_sift", &self.q_sift),
            ("d_min_km", &self.d_min_km),
            ("d_max_km", &self.d_max_km),
            ("step_km", &self.step_km),
            ("scenarios", &self.scenarios),
            ("output", &self.output),
        ];
        Overrides {
            command: self.command.clone(),
            values: flags
                .into_iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
                .collect(),
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let contents = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(5);
            }
        },
        None => String::new(),
    };

    let result = parse_config(&contents, &args.overrides())
        .map_err(CliError::from)
        .and_then(|cfg| run(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
