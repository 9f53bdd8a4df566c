//! Reads a run directory back: checks the manifest hashes and summarizes
//! the per-run `summary.json` files and any policy comparison.

use std::fmt::Write as _;
use std::path::Path;

use crate::artifacts::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot read manifest in {dir}: {source}")]
    Manifest {
        dir: String,
        source: std::io::Error,
    },
    #[error("{count} file(s) differ from the manifest: {files}")]
    Tampered { count: usize, files: String },
}

pub fn report(dir: &Path) -> Result<String, ReportError> {
    let manifest = Manifest::read(dir).map_err(|source| ReportError::Manifest {
        dir: dir.display().to_string(),
        source,
    })?;
    let bad = manifest.verify(dir);
    if !bad.is_empty() {
        return Err(ReportError::Tampered {
            count: bad.len(),
            files: bad.join(", "),
        });
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} (seed {}), status {}, {} files verified",
        manifest.tool,
        manifest.command,
        manifest.master_seed,
        manifest.status,
        manifest.files.len()
    );
    for file in manifest.files.iter().filter(|f| f.path.ends_with("summary.json")) {
        let Some(value) = read_json(dir, &file.path) else { continue };
        let run = file.path.trim_end_matches("/summary.json");
        let mut line = format!("{run}: {}", value["metric"].as_str().unwrap_or("?"));
        if let Some(e) = value.get("ensemble") {
            let _ = write!(line, ", ensemble best {} at w = {}", num(&e["best_loss"]), e["best_weights"]);
        }
        if let Some(b) = value.get("bandit").and_then(|b| b.as_object()) {
            for (policy, v) in b {
                let _ = write!(
                    line,
                    ", {policy} {} -> {} (D = {})",
                    num(&v["initial_metric"]),
                    num(&v["final_metric"]),
                    num(&v["final_d"])
                );
            }
        }
        let _ = writeln!(out, "{line}");
    }
    if let Some(serde_json::Value::Array(comparisons)) = read_json(dir, "compare.json") {
        for c in comparisons {
            let _ = writeln!(
                out,
                "compare K={}: thompson wins {}/{} (rate {}), mean final {} vs random {}",
                c["k"],
                c["wins"],
                c["repetitions"],
                num(&c["win_rate"]),
                num(&c["thompson_final_mean"]),
                num(&c["random_final_mean"])
            );
        }
    }
    if let Some(e) = read_json(dir, "error.json") {
        let _ = writeln!(out, "error: {}", e["error"].as_str().unwrap_or("?"));
    }
    Ok(out)
}

fn read_json(dir: &Path, rel: &str) -> Option<serde_json::Value> {
    serde_json::from_str(&std::fs::read_to_string(dir.join(rel)).ok()?).ok()
}

fn num(v: &serde_json::Value) -> String {
    v.as_f64().map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}
