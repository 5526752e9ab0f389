//! CSV with a `#` header block, plus the JSON sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{Sidecar, SweepSpec};
use super::sweep::Table;
use super::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn render_csv(spec: &SweepSpec, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# qmux {VERSION}\n"));
    out.push_str(&format!("# target: {}\n", spec.target.name()));
    out.push_str(&format!("# seed: {}\n", spec.seed));
    out.push_str(&format!("# config_sha256: {}\n", spec.hash()));
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| c.render()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("writing {}: {e}", path.display()))
}

pub fn write_outputs(
    csv: &str,
    spec: &SweepSpec,
    out: Option<&Path>,
    threads: usize,
    wall_time_s: f64,
) -> Result<(), CliError> {
    let Some(path) = out else {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        return lock
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Io(format!("writing stdout: {e}")));
    };
    std::fs::write(path, csv).map_err(|e| io_err(path, e))?;
    let side = Sidecar {
        tool_version: VERSION.to_owned(),
        config_sha256: spec.hash(),
        spec: spec.clone(),
        threads,
        wall_time_s,
    };
    let side_path = sidecar_path(path);
    let json = serde_json::to_string_pretty(&side).expect("sidecar serializes");
    std::fs::write(&side_path, json + "\n").map_err(|e| io_err(&side_path, e))
}
