//! JSON run configuration. Unknown keys are rejected everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use pdext::kernel::{Analytic, DomainSet, LocalKernel, SampledTable};
use pdext::measure::{cauchy, Measure};
use pdext::Real;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub points: PointsSpec,
    #[serde(default)]
    pub extend: ExtendSpec,
    #[serde(default)]
    pub unique: UniqueSpec,
    #[serde(default)]
    pub bochner: BochnerSpec,
    #[serde(default)]
    pub gp: GpSpec,
    #[serde(default)]
    pub scatter: ScatterSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub intervals: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    Exponential(Rate),
    Triangle(Width),
    Gaussian(Scale),
    Sinc(NoParams),
    Constant(Value),
    Power(PowerParams),
    TruncatedTriangle(Cutoff),
    PolyaExponential(Knot),
    /// `z,re,im` table; relative paths resolve against the config file.
    Sampled(TableParams),
}

macro_rules! params {
    ($name:ident { $($field:ident),* }) => {
        #[derive(Debug, Clone, Deserialize, Serialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(pub $field: f64,)*
        }
    };
}

params!(Rate { rate });
params!(Width { width });
params!(Scale { scale });
params!(Value { value });
params!(Cutoff { cutoff });
params!(Knot { r });
params!(NoParams {});

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    pub exponent: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TableParams {
    pub path: PathBuf,
    #[serde(default = "default_symmetry_tolerance")]
    pub tolerance: f64,
}

fn default_symmetry_tolerance() -> f64 {
    1e-12
}

/// Evaluation points in `Ω`: a uniform interior grid plus a seeded random
/// batch, or an explicit list.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointsSpec {
    pub grid: usize,
    pub random: usize,
    pub margin: f64,
    pub explicit: Option<Vec<f64>>,
}

impl Default for PointsSpec {
    fn default() -> Self {
        PointsSpec {
            grid: 32,
            random: 32,
            margin: 0.01,
            explicit: None,
        }
    }
}

/// Where a measure comes from.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Cauchy density truncated to `[−radius, radius]`; the tail mass becomes
    /// the truncation budget.
    Cauchy { radius: f64, step: f64 },
    /// `position,weight` or `t,value` rows.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtendSpec {
    /// Polya: support of the continuation; defaults to the tangent zero.
    pub cutoff: Option<f64>,
    pub polya_panels: usize,
    pub measure: Option<MeasureSpec>,
    /// Added to any truncation budget the measure carries.
    pub truncation_budget: f64,
    /// Interior grid size whose pairwise differences sample `Ω − Ω`.
    pub restriction_points: usize,
    pub output: Option<OutputGrid>,
    pub zero_pad_steps: usize,
    pub zero_pad_sizes: Vec<usize>,
    pub zero_pad_random_sets: usize,
}

impl Default for ExtendSpec {
    fn default() -> Self {
        ExtendSpec {
            cutoff: None,
            polya_panels: 4096,
            measure: None,
            truncation_budget: 0.0,
            restriction_points: 24,
            output: None,
            zero_pad_steps: 256,
            zero_pad_sizes: vec![8, 16, 32, 64],
            zero_pad_random_sets: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F64,
    Quad,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniqueSpec {
    pub anchor_counts: Vec<usize>,
    pub margin: f64,
    pub divergence_ratio: f64,
    pub precision: Precision,
}

impl Default for UniqueSpec {
    fn default() -> Self {
        UniqueSpec {
            anchor_counts: vec![8, 16, 32, 64],
            margin: 0.01,
            divergence_ratio: 10.0,
            precision: Precision::Quad,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BochnerSpec {
    pub measure: Option<MeasureSpec>,
    pub budget: f64,
    pub restriction_points: usize,
}

impl Default for BochnerSpec {
    fn default() -> Self {
        BochnerSpec {
            measure: None,
            budget: 0.0,
            restriction_points: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    /// Covariance `F(s − t)`.
    Stationary,
    /// Increments with variogram `G`, pinned at the first grid point.
    Increment,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpSpec {
    pub process: Process,
    pub grid: GridSpec,
    pub paths: usize,
    pub jitter: Option<f64>,
}

impl Default for GpSpec {
    fn default() -> Self {
        GpSpec {
            process: Process::Stationary,
            grid: GridSpec {
                start: 0.0,
                step: 0.1,
                count: 16,
            },
            paths: 1000,
            jitter: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterSpec {
    /// Probe points `a` (probes are `γ_a` in `L²(dμ)`); empty means the
    /// points at 0.2, 0.5 and 0.8 of the hull of `Ω`.
    pub probes: Vec<f64>,
    pub translations: Vec<f64>,
    /// Defaults to the probe points.
    pub gamma_points: Option<Vec<f64>>,
    pub multiplier_stride: usize,
    pub min_relative_weight: f64,
    pub mu_budget: f64,
    pub nu_budget: f64,
    pub margin: f64,
}

impl Default for ScatterSpec {
    fn default() -> Self {
        ScatterSpec {
            probes: vec![],
            translations: vec![0.1, 0.5, 1.0],
            gamma_points: None,
            multiplier_stride: 64,
            min_relative_weight: 1e-12,
            mu_budget: 0.0,
            nu_budget: 0.0,
            margin: 0.01,
        }
    }
}

/// A parsed configuration and the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config = parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn domain<T: Real>(&self) -> Result<DomainSet<T>, Failure> {
        let iv = self
            .config
            .domain
            .intervals
            .iter()
            .map(|[a, b]| (T::lit(*a), T::lit(*b)))
            .collect();
        Ok(DomainSet::new(iv)?)
    }

    pub fn kernel<T: Real>(&self) -> Result<LocalKernel<T>, Failure> {
        let domain = self.domain()?;
        let l = T::lit;
        let profile = match &self.config.kernel {
            KernelSpec::Exponential(p) => Analytic::Exponential { rate: l(p.rate) },
            KernelSpec::Triangle(p) => Analytic::Triangle { width: l(p.width) },
            KernelSpec::Gaussian(p) => Analytic::Gaussian { scale: l(p.scale) },
            KernelSpec::Sinc(_) => Analytic::Sinc,
            KernelSpec::Constant(p) => Analytic::Constant { value: l(p.value) },
            KernelSpec::Power(p) => Analytic::Power {
                exponent: l(p.exponent),
                offset: l(p.offset),
            },
            KernelSpec::TruncatedTriangle(p) => Analytic::TruncatedTriangle { cutoff: l(p.cutoff) },
            KernelSpec::PolyaExponential(p) => Analytic::PolyaExponential { r: l(p.r) },
            KernelSpec::Sampled(p) => {
                let path = self.resolve(&p.path);
                let file = fs::File::open(&path).map_err(|e| {
                    Failure::Usage(format!("cannot read kernel table {}: {e}", path.display()))
                })?;
                let loaded = SampledTable::read_csv(file, l(p.tolerance))?;
                return Ok(LocalKernel::sampled(domain, loaded.table)?);
            }
        };
        Ok(LocalKernel::analytic(domain, profile)?)
    }

    /// A measure and the truncation budget it carries.
    pub fn measure(&self, spec: &MeasureSpec) -> Result<(Measure<f64>, f64), Failure> {
        match spec {
            MeasureSpec::Cauchy { radius, step } => {
                let t = cauchy(*radius, *step)?;
                Ok((t.measure, t.tail_mass))
            }
            MeasureSpec::Csv { path } => Ok((read_measure(&self.resolve(path))?, 0.0)),
        }
    }
}

pub fn read_measure(path: &Path) -> Result<Measure<f64>, Failure> {
    let file = fs::File::open(path)
        .map_err(|e| Failure::Usage(format!("cannot read measure {}: {e}", path.display())))?;
    Measure::read_csv(file).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Parses a configuration, naming the offending key and position on error.
pub fn parse(text: &str) -> Result<Config, String> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: Config = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            inner.to_string()
        } else {
            format!("at `{path}`: {inner}")
        }
    })?;
    de.end().map_err(|e| e.to_string())?;
    Ok(config)
}
