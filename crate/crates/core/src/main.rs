use std::process::ExitCode;

use clap::Parser;

use causal_order::cli::{dump_matrices, emit, exit_code, headline_summary, run, OutputFormat, RunConfig, Scenario};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    if config.dump_matrices {
        match dump_matrices(&config.dump_dir) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: could not dump matrices: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let report = run(&config);
    let mut text = emit(&report, config.output);
    if config.scenario == Scenario::All {
        if config.output == OutputFormat::Text {
            text.push('\n');
            text.push_str(&headline_summary(&report));
        } else {
            eprint!("{}", headline_summary(&report));
        }
    }
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: could not write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(exit_code(&report) as u8)
}
