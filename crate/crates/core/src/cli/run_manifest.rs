use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use trajsign::{Error, Result, VERSION};

use super::args::Cli;

const RUN_PREFIX: &str = "run ";

/// Provenance of one invocation. Everything except the duration is
/// embedded in each artifact; the duration goes to a `run.json` sidecar
/// so artifacts stay byte-reproducible.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u128>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn new(cli: &Cli, argv: Vec<String>) -> Self {
        Self {
            tool: format!("trajsign {VERSION}"),
            command: cli.command.name().to_string(),
            argv,
            seeds: Vec::new(),
            config: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_ms: None,
            started: Some(Instant::now()),
        }
    }

    /// Comment lines for artifact headers, without the `# ` prefix.
    pub fn header(&self) -> Vec<String> {
        let mut value = serde_json::to_value(self).expect("manifest serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("duration_ms");
        }
        vec![
            format!("{} {}", self.tool, self.command),
            format!("{RUN_PREFIX}{value}"),
        ]
    }

    /// Writes the full manifest, duration included, to `path`.
    pub fn finish(&mut self, path: &Path) -> Result<()> {
        let elapsed = self.started.map(|s| s.elapsed()).unwrap_or_default();
        self.duration_ms = Some(elapsed.as_millis());
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n")?;
        log::info!("{} finished in {:.2}s", self.command, elapsed.as_secs_f64());
        Ok(())
    }
}

/// `text` with every header line prefixed by `# `.
pub fn with_header(header: &[String], text: &str) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(text);
    out
}

/// The argument vector recorded in an artifact's header.
pub fn recorded_argv(artifact: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(artifact).map_err(Error::at(artifact))?;
    let (line_no, json) = text
        .lines()
        .enumerate()
        .find_map(|(i, l)| {
            l.strip_prefix("# ")
                .and_then(|l| l.strip_prefix(RUN_PREFIX))
                .map(|j| (i + 1, j))
        })
        .ok_or_else(|| Error::Parse {
            path: artifact.to_path_buf(),
            line: 0,
            message: "no run header found".into(),
        })?;
    let value: serde_json::Value = serde_json::from_str(json).map_err(|e| Error::Parse {
        path: artifact.to_path_buf(),
        line: line_no,
        message: e.to_string(),
    })?;
    value["argv"]
        .as_array()
        .and_then(|a| {
            a.iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
        })
        .ok_or_else(|| Error::Parse {
            path: artifact.to_path_buf(),
            line: line_no,
            message: "run header has no argv".into(),
        })
}
