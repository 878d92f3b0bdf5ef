use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ppc_shape_cli::commands::{
    self, run_conditioning, run_ellipse, run_estimate, run_evaluate, run_simulate,
};

/// Shape sensing for continuum robots from sparse orientation sensors.
#[derive(Parser)]
#[command(name = "ppc-shape", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a motion scenario: ground-truth trace plus sensor streams.
    Simulate {
        /// Robot configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Scenario kind: swing, free_oscillation, tip_interaction,
        /// body_interaction or circular_3d.
        #[arg(long)]
        scenario: String,
        /// Noise seed; identical seeds give bit-identical streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for truth.csv, sensors.jsonl (and imu.jsonl).
        #[arg(long)]
        out: PathBuf,
        /// Also synthesize raw inertial streams.
        #[arg(long)]
        imu: bool,
    },
    /// Estimate the shape trace from recorded sensor streams.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding sensors.jsonl (or imu.jsonl with --raw-imu).
        #[arg(long)]
        sensors: PathBuf,
        /// Output trace CSV.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSONL file for per-frame diagnostic warnings.
        #[arg(long)]
        warnings: Option<PathBuf>,
        /// Feed raw inertial records through the attitude filter front end.
        #[arg(long)]
        raw_imu: bool,
    },
    /// Compare an estimated trace against ground truth.
    Evaluate {
        #[arg(long)]
        estimated: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Output report (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Optional per-frame error CSV for plotting.
        #[arg(long)]
        frame_csv: Option<PathBuf>,
        /// Seconds to skip at the start (filter warm-up).
        #[arg(long, default_value_t = 0.0)]
        skip_initial: f64,
        /// Scenario label copied into the report.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Position uncertainty ellipse at one state and location.
    Ellipse {
        #[arg(long)]
        config: PathBuf,
        /// State file (JSON): {"segment": 0, "theta": [...], ...}.
        #[arg(long)]
        state: PathBuf,
        /// Arc coordinate in [0, 1].
        #[arg(long)]
        s: f64,
        /// Confidence level in (0, 1).
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Compare the numerical conditioning of sensor arrangements.
    Conditioning {
        /// Semicolon-separated placements, e.g. "0.357,0.714,1.0;0.5,1.0".
        #[arg(long)]
        placements: String,
    },
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    match cli.command {
        Command::Simulate {
            config,
            scenario,
            seed,
            out,
            imu,
        } => {
            let summary = run_simulate(&config, &scenario, seed, &out, imu)?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Estimate {
            config,
            sensors,
            out,
            warnings,
            raw_imu,
        } => {
            let summary = run_estimate(&config, &sensors, &out, warnings.as_deref(), raw_imu)?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Evaluate {
            estimated,
            truth,
            out,
            frame_csv,
            skip_initial,
            scenario,
        } => {
            let report = run_evaluate(
                &estimated,
                &truth,
                &out,
                frame_csv.as_deref(),
                skip_initial,
                scenario,
            )?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::Ellipse {
            config,
            state,
            s,
            confidence,
        } => {
            let out = run_ellipse(&config, &state, s, confidence)?;
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::Conditioning { placements } => {
            for row in run_conditioning(&placements)? {
                println!("{}", serde_json::to_string(&row).unwrap());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
