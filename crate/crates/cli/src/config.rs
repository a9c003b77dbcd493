//! TOML scenario configs. Unknown keys are hard errors so a typo in `lambda`
//! or `dt` cannot silently fall back to a default.

use backstep2d::{stable_dt, BoundaryGraph, InitialCondition, Segment, SimConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub domain: DomainSection,
    pub pde: PdeSection,
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// "piano" (default) or "square".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Explicit boundary pieces `[x_end, y_start, y_end]`; mutually exclusive
    /// with `preset`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub lambda: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub n: usize,
    /// Omit to use the CFL-safe default 0.9 · h²/(4 + |λ|h²).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_final: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_initial_condition")]
    pub initial_condition: String,
    #[serde(default = "default_true")]
    pub control: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            snapshot_every: default_snapshot_every(),
        }
    }
}

fn default_initial_condition() -> String {
    "bump".into()
}

fn default_true() -> bool {
    true
}

fn default_snapshot_every() -> usize {
    100
}

pub fn load(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

impl FileConfig {
    pub fn boundary_graph(&self) -> Result<BoundaryGraph, String> {
        match (&self.domain.preset, &self.domain.segments) {
            (Some(_), Some(_)) => {
                Err("[domain] sets both `preset` and `segments`; pick one".into())
            }
            (None, Some(segments)) => {
                let pieces = segments
                    .iter()
                    .map(|&[x_end, y_start, y_end]| Segment {
                        x_end,
                        y_start,
                        y_end,
                    })
                    .collect();
                BoundaryGraph::new(pieces).map_err(|e| e.to_string())
            }
            (preset, None) => match preset.as_deref().unwrap_or("piano") {
                "piano" => Ok(backstep2d::piano_default()),
                "square" => BoundaryGraph::constant(1.0).map_err(|e| e.to_string()),
                other => Err(format!(
                    "unknown domain preset {other:?}; expected \"piano\" or \"square\""
                )),
            },
        }
    }

    /// Applies flag overrides and fills defaults; the result echoed into the
    /// manifest pins every value (including the resolved dt), so re-running
    /// the echo reproduces this run exactly.
    pub fn resolve(&self, lambda: Option<f64>, n: Option<usize>) -> Result<Resolved, String> {
        let mut file = self.clone();
        if let Some(lambda) = lambda {
            file.pde.lambda = lambda;
        }
        if let Some(n) = n {
            file.numerics.n = n;
        }
        let graph = file.boundary_graph()?;
        if file.numerics.n < 3 {
            return Err(format!("[numerics] n = {} is too coarse", file.numerics.n));
        }
        let h = 1.0 / (file.numerics.n - 1) as f64;
        let dt = file
            .numerics
            .dt
            .unwrap_or_else(|| stable_dt(file.pde.lambda, h));
        file.numerics.dt = Some(dt);
        let initial_condition =
            InitialCondition::from_name(&file.numerics.initial_condition, file.numerics.seed)
                .map_err(|e| e.to_string())?;
        let sim = SimConfig {
            lambda: file.pde.lambda,
            n: file.numerics.n,
            dt,
            t_final: file.numerics.t_final,
            control_enabled: file.numerics.control,
            initial_condition,
            snapshot_every: file.output.snapshot_every,
        };
        Ok(Resolved { file, graph, sim })
    }
}

/// A validated scenario: the echo-ready config, the boundary, and the
/// simulator settings derived from it.
pub struct Resolved {
    pub file: FileConfig,
    pub graph: BoundaryGraph,
    pub sim: SimConfig,
}
