pub mod args;
mod commands;
mod run_manifest;

use std::process::ExitCode;

use trajsign::Error;

use args::{Cli, Command};
pub use run_manifest::RunManifest;

/// Process exit code for a failed command.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}

pub fn run(cli: Cli, argv: Vec<String>) -> trajsign::Result<ExitCode> {
    if let Some(n) = cli.threads {
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {n} threads: {e}")))?;
        #[cfg(not(feature = "parallel"))]
        log::warn!("built without the parallel feature; --threads {n} ignored");
    }
    if let Command::Replay(a) = &cli.command {
        let recorded = run_manifest::recorded_argv(&a.artifact)?;
        let replayed = <Cli as clap::Parser>::try_parse_from(
            std::iter::once("trajsign".to_string()).chain(recorded.iter().cloned()),
        )
        .map_err(|e| Error::InvalidConfig(format!("recorded command line does not parse: {e}")))?;
        if matches!(replayed.command, Command::Replay(_)) {
            return Err(Error::InvalidConfig(
                "a replay cannot replay another replay".into(),
            ));
        }
        eprintln!("replaying: trajsign {}", recorded.join(" "));
        return run(replayed, recorded);
    }
    let mut manifest = RunManifest::new(&cli, argv);
    commands::dispatch(&cli, &mut manifest)
}
