//! Deterministic CSV/JSON emission. CSV carries the documented fixed
//! columns with 12 significant digits; JSON mirrors the fields and adds
//! tolerance metadata and achieved quadrature errors.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::{OutputFormat, Resolved};

#[derive(Debug, Serialize)]
pub struct TransmittanceRow {
    pub d: f64,
    pub p_l: f64,
    pub p_r: f64,
    pub achieved_error: f64,
}

#[derive(Debug, Serialize)]
pub struct MetricsRow {
    pub d_signal: f64,
    pub d_ancilla: f64,
    pub p_suc: f64,
    pub eqnd: f64,
    pub p1r: f64,
    pub achieved_error_2ph: f64,
    pub achieved_error_1ph: f64,
}

#[derive(Debug, Serialize)]
pub struct ShapeRow {
    pub delta: f64,
    pub amplitude: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleRow {
    pub d: f64,
    pub kappa_over_g: f64,
    pub p_r_full: f64,
    pub p_r_effective: f64,
    pub rel_deviation: f64,
    pub norm_drift: f64,
}

/// 12 significant digits, `.` decimal separator.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.11e}")
    }
}

pub enum Artifact {
    Transmittance(Vec<TransmittanceRow>),
    Metrics(Vec<MetricsRow>),
    Shape { rows: Vec<ShapeRow>, decay_rate: Option<f64>, aleph: f64 },
    Oracle(Vec<OracleRow>),
}

impl Artifact {
    fn csv(&self) -> String {
        let mut out = String::new();
        match self {
            Artifact::Transmittance(rows) => {
                out.push_str("d,p_L,p_R\n");
                for r in rows {
                    out.push_str(&format!("{},{},{}\n", sig12(r.d), sig12(r.p_l), sig12(r.p_r)));
                }
            }
            Artifact::Metrics(rows) => {
                out.push_str("d_signal,d_ancilla,p_suc,eqnd,p1R\n");
                for r in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        sig12(r.d_signal),
                        sig12(r.d_ancilla),
                        sig12(r.p_suc),
                        sig12(r.eqnd),
                        sig12(r.p1r)
                    ));
                }
            }
            Artifact::Shape { rows, .. } => {
                out.push_str("delta,amplitude\n");
                for r in rows {
                    out.push_str(&format!("{},{}\n", sig12(r.delta), sig12(r.amplitude)));
                }
            }
            Artifact::Oracle(rows) => {
                out.push_str("d,kappa_over_g,p_R_full,p_R_effective,rel_deviation,norm_drift\n");
                for r in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        sig12(r.d),
                        sig12(r.kappa_over_g),
                        sig12(r.p_r_full),
                        sig12(r.p_r_effective),
                        sig12(r.rel_deviation),
                        sig12(r.norm_drift)
                    ));
                }
            }
        }
        out
    }

    fn json(&self, command: &str, resolved: &Resolved) -> String {
        let tolerances = json!({
            "tol_1d": resolved.tol_1d,
            "tol_2d": resolved.tol_2d,
            "tol_root": resolved.tol_root,
        });
        let value = match self {
            Artifact::Transmittance(rows) => json!({
                "command": command,
                "tolerances": tolerances,
                "rows": rows,
            }),
            Artifact::Metrics(rows) => json!({
                "command": command,
                "tolerances": tolerances,
                "rows": rows,
            }),
            Artifact::Shape { rows, decay_rate, aleph } => json!({
                "command": command,
                "tolerances": tolerances,
                "decay_rate_fit": decay_rate,
                "aleph": aleph,
                "rows": rows,
            }),
            Artifact::Oracle(rows) => json!({
                "command": command,
                "tolerances": tolerances,
                "rows": rows,
            }),
        };
        let mut s = serde_json::to_string_pretty(&value).expect("serializable artifact");
        s.push('\n');
        s
    }

    pub fn render(&self, command: &str, resolved: &Resolved) -> String {
        match resolved.format {
            OutputFormat::Csv => self.csv(),
            OutputFormat::Json => self.json(command, resolved),
        }
    }
}

/// Write the data artifact and route the human summary: with `--out` the
/// data goes to the file and the summary to stdout; otherwise the data owns
/// stdout and the summary moves to stderr.
pub fn emit(resolved: &Resolved, data: &str, summary: &str) -> Result<(), String> {
    match &resolved.out {
        Some(path) => {
            write_file(path, data).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            print!("{data}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn write_file(path: &Path, data: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(data.as_bytes())
}
