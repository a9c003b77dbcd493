//! CSV and manifest writers. Snapshot rows carry 17 significant digits so the
//! files round-trip f64 exactly and repeated runs are byte-identical.

use backstep2d::{Grid, NodeClass, NormSeries, RunOutput, Snapshot};
use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub fn write_snapshot(path: &Path, grid: &Grid, snap: &Snapshot) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,y,v")?;
    let n = grid.n();
    for i in 0..n {
        for j in 0..n {
            if grid.class(i, j) != NodeClass::Exterior {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    grid.x(i),
                    grid.y(j),
                    snap.field.get(i, j)
                )?;
            }
        }
    }
    w.flush()
}

pub fn write_norms(path: &Path, series: &NormSeries) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,l2_norm")?;
    for (t, norm) in series.times().iter().zip(series.norms()) {
        writeln!(w, "{t:.16e},{norm:.16e}")?;
    }
    w.flush()
}

/// Kernel table as a matrix: row j lists K(y_j, ξ_k) for k ≤ j, cells above
/// the diagonal left empty.
pub fn write_kernel_table(path: &Path, kt: &backstep2d::KernelTable) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let n = kt.n();
    write!(w, "j")?;
    for k in 0..n {
        write!(w, ",{k}")?;
    }
    writeln!(w)?;
    for j in 0..n {
        write!(w, "{j}")?;
        for k in 0..n {
            if k <= j {
                write!(w, ",{:.16e}", kt.get(j, k))?;
            } else {
                write!(w, ",")?;
            }
        }
        writeln!(w)?;
    }
    w.flush()
}

#[derive(Serialize)]
pub struct FitSummary {
    pub rate: f64,
    pub r_squared: f64,
    pub floor_hit: bool,
}

#[derive(Serialize)]
pub struct RunSummaryJson {
    pub initial_norm: f64,
    pub final_norm: f64,
    pub steps_taken: usize,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_decay: Option<FitSummary>,
}

impl RunSummaryJson {
    pub fn from_run(out: &RunOutput) -> Self {
        Self {
            initial_norm: out.summary.initial_norm,
            final_norm: out.summary.final_norm,
            steps_taken: out.summary.steps_taken,
            outcome: match out.outcome {
                backstep2d::RunOutcome::Completed => "completed".into(),
                backstep2d::RunOutcome::Diverged { step } => format!("diverged at step {step}"),
            },
            fitted_decay: out.summary.decay.map(|fit| FitSummary {
                rate: fit.rate,
                r_squared: fit.r_squared,
                floor_hit: fit.floor_hit,
            }),
        }
    }
}

#[derive(Serialize)]
pub struct Manifest<S: Serialize> {
    pub version: String,
    pub duration_seconds: f64,
    pub config: crate::config::FileConfig,
    pub outputs: Vec<PathBuf>,
    pub summary: S,
}

pub fn write_manifest<S: Serialize>(path: &Path, manifest: &Manifest<S>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, text + "\n")
}
