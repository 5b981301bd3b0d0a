use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use edgecolor_cli::cli::{Cli, Sub};
use edgecolor_cli::{execute, rerun, RunManifest, EXIT_BAD_INPUT, EXIT_OK, EXIT_VIOLATION};

fn run(cli: Cli) -> Result<RunManifest> {
    let manifest = match (&cli.command, cli.config()?) {
        (Sub::Rerun { manifest }, _) => {
            let (original, fresh) = rerun(manifest, cli.out.clone())?;
            say(format_args!(
                "replayed {} seed(s) of {}",
                original.results.len(),
                manifest.display()
            ));
            fresh
        }
        (_, Some(cfg)) => execute(&cfg)?,
        (_, None) => unreachable!("every subcommand but rerun has a config"),
    };
    let path = manifest.write()?;
    for r in &manifest.results {
        say(format_args!("seed {}: {}", r.seed, r.summary_line()));
    }
    say(format_args!("manifest: {}", path.display()));
    Ok(manifest)
}

/// Progress on stdout; a closed pipe is not an error.
fn say(args: std::fmt::Arguments) {
    let _ = writeln!(std::io::stdout(), "{args}");
}

trait SummaryLine {
    fn summary_line(&self) -> String;
}

impl SummaryLine for edgecolor_cli::SeedResult {
    fn summary_line(&self) -> String {
        let Some(obj) = self.summary.as_object() else {
            return self.summary.to_string();
        };
        obj.iter()
            .filter(|(_, v)| !v.is_object() && !v.is_array())
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(m) if m.violations.is_empty() => ExitCode::from(EXIT_OK),
        Ok(m) => {
            for v in &m.violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}
