//! Declarative run configuration (TOML) and the synthetic-pattern spec
//! file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use stpp_core::error::{Error, Result};
use stpp_core::geometry::{Point, StudyWindow, TimeResolution, TimeWindow};
use stpp_core::intensity::IntensityVariant;
use stpp_core::secondorder::Normalization;
use stpp_core::synth::GeneratorSpec;

/// Top-level analysis configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub input: Option<InputConfig>,
    pub window: Option<WindowConfig>,
    pub time_window: Option<TimeWindowConfig>,
    #[serde(default)]
    pub grids: GridsConfig,
    pub intensity: Option<IntensityConfig>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub hist: HistConfig,
    pub stratify: Option<StratifyConfig>,
    #[serde(default)]
    pub spacetime: SpacetimeConfig,
    #[serde(default)]
    pub csr: CsrConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    pub delimiter: Option<String>,
    pub x: String,
    pub y: String,
    pub time: Option<String>,
    #[serde(default)]
    pub time_kind: TimeKind,
    /// Epoch date for `time_kind = "iso-date"`; offsets are whole days.
    pub epoch: Option<String>,
    pub label: Option<String>,
    pub case_value: Option<String>,
    pub control_value: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeKind {
    /// Numeric offsets in the time window's resolution unit.
    #[default]
    Offset,
    /// ISO `YYYY-MM-DD` dates, converted to day offsets from `epoch`.
    IsoDate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "shape")]
pub enum WindowConfig {
    Rectangle {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl WindowConfig {
    pub fn build(&self) -> Result<StudyWindow> {
        match self {
            WindowConfig::Rectangle {
                x_min,
                y_min,
                x_max,
                y_max,
            } => StudyWindow::rectangle(*x_min, *y_min, *x_max, *y_max),
            WindowConfig::Polygon { vertices } => StudyWindow::polygon(
                vertices.iter().map(|v| Point::new(v[0], v[1])).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindowConfig {
    /// Window length `T`; omitted for ISO-date inputs it is derived from
    /// the data (last day + 1).
    pub t_max: Option<f64>,
    pub resolution: TimeResolution,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    pub s_count: Option<usize>,
    pub s_max: Option<f64>,
    pub t_count: Option<usize>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityConfig {
    pub bandwidth: f64,
    pub grid: Option<usize>,
    pub variant: Option<IntensityVariant>,
    pub ratio_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub normalization: Normalization,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            normalization: Normalization::Unbiased,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// Monte Carlo test size: observed statistic ranked among m values.
    pub m: Option<usize>,
    /// Permutations behind the frozen variance grid.
    pub variance_permutations: Option<usize>,
    /// Replicates for envelope bands.
    pub envelope_replicates: Option<usize>,
    /// Two-sided pointwise envelope level.
    pub level: Option<f64>,
}

impl McConfig {
    pub fn m(&self) -> usize {
        self.m.unwrap_or(1000)
    }

    pub fn variance_permutations(&self) -> usize {
        self.variance_permutations.unwrap_or(100)
    }

    pub fn envelope_replicates(&self) -> usize {
        self.envelope_replicates.unwrap_or(199)
    }

    pub fn level(&self) -> f64 {
        self.level.unwrap_or(0.95)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistConfig {
    pub bin: Option<TimeResolution>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratifyConfig {
    pub by: StratifyBy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StratifyBy {
    Year,
    Month,
    Week,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassSelect {
    #[default]
    All,
    Case,
    Control,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeConfig {
    /// Which labeled class feeds the space-time pipelines when a label
    /// column is mapped. Defaults to cases.
    pub class: Option<ClassSelect>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsrConfig {
    /// Which class feeds the CSR L-function pipeline.
    #[serde(default)]
    pub class: ClassSelect,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    /// Shrink trial counts for a smoke run.
    #[serde(default)]
    pub quick: bool,
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<(AnalysisConfig, Vec<u8>)> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
        let cfg: AnalysisConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        Ok((cfg, bytes))
    }

    pub fn input(&self) -> Result<&InputConfig> {
        self.input
            .as_ref()
            .ok_or_else(|| Error::Config("this pipeline needs an [input] section".into()))
    }

    pub fn window(&self) -> Result<StudyWindow> {
        self.window
            .as_ref()
            .ok_or_else(|| Error::Config("missing [window] section".into()))?
            .build()
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is mandatory for Monte Carlo pipelines".into()))
    }

    pub fn delimiter(&self) -> Result<Option<u8>> {
        match self.input.as_ref().and_then(|i| i.delimiter.as_deref()) {
            None => Ok(None),
            Some(",") => Ok(Some(b',')),
            Some("\\t") | Some("\t") => Ok(Some(b'\t')),
            Some(other) => Err(Error::Config(format!(
                "unsupported delimiter {other:?}; use \",\" or \"\\t\""
            ))),
        }
    }
}

/// Spec file for the `synth` subcommand.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpecFile {
    pub seed: u64,
    pub window: WindowConfig,
    pub time_window: Option<TimeWindowConfig>,
    pub generator: GeneratorSpec,
    /// Label values used when the generator produces marks.
    pub case_value: Option<String>,
    pub control_value: Option<String>,
}

impl SynthSpecFile {
    pub fn load(path: &Path) -> Result<SynthSpecFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read spec {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("spec parse error: {e}")))
    }

    pub fn time_window(&self) -> Result<Option<TimeWindow>> {
        match &self.time_window {
            None => Ok(None),
            Some(tw) => {
                let t_max = tw.t_max.ok_or_else(|| {
                    Error::Config("synth time_window needs an explicit t_max".into())
                })?;
                Ok(Some(TimeWindow::new(t_max, tw.resolution)?))
            }
        }
    }
}
