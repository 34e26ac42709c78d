use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use ddsketch_eval::{run, violations, RunConfig};

fn main() -> anyhow::Result<ExitCode> {
    let cfg = RunConfig::parse();
    let report = run(&cfg)?;

    match &cfg.output {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = BufWriter::new(file);
            report.write_csv(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            report.write_csv(stdout.lock())?;
        }
    }

    if cfg.check {
        let bad = violations(&report, cfg.alpha);
        if !bad.is_empty() {
            for line in &bad {
                eprintln!("violation: {line}");
            }
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}
