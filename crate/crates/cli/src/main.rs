use std::process::ExitCode;

use clap::Parser;
use fpplab_cli::plot::{emit_plot_data, write_plot_data};
use fpplab_cli::runner::{read_rows, run_and_write, sidecar_path, Sidecar};
use fpplab_cli::{parse_config, Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let code = match cli.command {
        Command::Run(args) => match parse_config(&args).map_err(Into::into).and_then(|cfg| run_and_write(&cfg)) {
            Ok(out) => {
                if !out.complete {
                    eprintln!("warning: wall-clock budget reached; rows are partial");
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Plot(args) => {
            let kappa = args.kappa.unwrap_or_else(|| {
                std::fs::read_to_string(sidecar_path(&args.input))
                    .ok()
                    .and_then(|t| serde_json::from_str::<Sidecar>(&t).ok())
                    .map_or(0.1, |s| s.config.kappa)
            });
            let result = read_rows(&args.input)
                .map_err(|e| (e.exit_code(), e.to_string()))
                .and_then(|rows| emit_plot_data(&rows, args.x, &args.y, kappa).map_err(|e| (2, e.to_string())))
                .and_then(|pts| write_plot_data(&args.out, args.x, &args.y, &pts).map_err(|e| (3, e.to_string())));
            match result {
                Ok(()) => 0,
                Err((code, msg)) => {
                    eprintln!("error: {msg}");
                    code
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
