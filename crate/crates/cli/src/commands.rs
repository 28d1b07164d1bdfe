use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use pdext::extend::{
    boundary_tangent, compact_support_flag, from_measure, polya_extension, validate_extension,
    zero_pad, ExtensionCandidate, ExtensionCheck, PolyaOptions, SupportReport, Tangent,
    ZeroPadDiagnosis, ZeroPadOptions, ZeroPadVerdict,
};
use pdext::gauss::{
    covariance_report, increment_covariance, sample_stationary, sample_stationary_increment,
    stationary_covariance, CovarianceReport,
};
use pdext::kernel::{
    check_conditionally_negative, check_positive_definite, gram_matrix, hermitian_symmetry_check,
    DomainSet, LocalKernel,
};
use pdext::linalg::hermitian_eigenvalues;
use pdext::measure::PolyaQuadrature;
use pdext::represent::{embed_gamma, scattering_operator, ScatterOptions, ScatterReport};
use pdext::rkhs::{def_space_dimension, AnchorSet, DefReport, DefSchedule, MembershipFlag};
use pdext::spectral::{
    exponential_gram, lambda_set, max_offdiag, parseval_defect, ExponentialFamily,
    GriddedFunction, LambdaPattern,
};
use pdext::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{read_measure, Config, Loaded, Precision, Process};
use crate::{to_json, Cli, Command, Failure, Method, Outcome, Property};

pub(crate) fn name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Gram => "gram",
        Command::Extend { .. } => "extend",
        Command::Unique { .. } => "unique",
        Command::Bochner { .. } => "bochner",
        Command::Gp { .. } => "gp",
        Command::Scatter { .. } => "scatter",
        Command::Spectral { .. } => "spectral",
    }
}

/// Everything a report needs to be reproduced: global flags, the command's
/// own arguments and the configuration with defaults filled in.
#[derive(Serialize)]
struct Resolved<'a, A> {
    seed: u64,
    tol: Option<f64>,
    args: A,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a Config>,
}

#[derive(Serialize)]
struct Report<'a, A, R> {
    command: &'static str,
    resolved: Resolved<'a, A>,
    #[serde(flatten)]
    result: R,
}

#[derive(Serialize)]
struct NoArgs {}

fn report<A: Serialize, R: Serialize>(
    cli: &Cli,
    config: Option<&Config>,
    args: A,
    result: R,
) -> Vec<u8> {
    to_json(&Report {
        command: name(&cli.command),
        resolved: Resolved {
            seed: cli.seed,
            tol: cli.tol,
            args,
            config,
        },
        result,
    })
}

fn load(cli: &Cli) -> Result<Loaded, Failure> {
    match &cli.config {
        Some(p) => Loaded::read(p),
        None => Err(Failure::Usage(format!(
            "`{}` needs --config",
            name(&cli.command)
        ))),
    }
}

pub(crate) fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Check { property } => check(cli, *property),
        Command::Gram => gram(cli),
        Command::Extend {
            method,
            measure,
            measure_out,
        } => extend(cli, *method, measure.as_deref(), measure_out.as_deref()),
        Command::Unique { precision } => unique(cli, *precision),
        Command::Bochner { measure } => bochner(cli, measure.as_deref()),
        Command::Gp { paths } => gp(cli, *paths),
        Command::Scatter { mu, nu, anchors } => scatter(cli, mu, nu, *anchors),
        Command::Spectral {
            omega,
            lambda_pattern,
            range,
            panels,
        } => spectral(cli, omega, *lambda_pattern, *range, *panels),
    }
}

fn plain(report: Vec<u8>, pass: bool) -> Outcome {
    Outcome {
        report,
        pass,
        out_used: false,
    }
}

/// Interior grid plus a seeded uniform batch, sorted.
fn sample_points(loaded: &Loaded, domain: &DomainSet<f64>, seed: u64) -> Result<Vec<f64>, Failure> {
    let spec = &loaded.config.points;
    if let Some(pts) = &spec.explicit {
        if let Some(x) = pts.iter().find(|&&x| !domain.contains(x)) {
            return Err(Failure::Usage(format!("explicit point {x} is outside the domain")));
        }
        return Ok(pts.clone());
    }
    let mut pts = if spec.grid > 0 {
        domain.interior_grid(spec.grid, spec.margin)?
    } else {
        vec![]
    };
    let parts: Vec<(f64, f64)> = domain
        .intervals()
        .iter()
        .map(|&(a, b)| {
            let pad = spec.margin * (b - a);
            (a + pad, b - pad)
        })
        .collect();
    let total: f64 = parts.iter().map(|(a, b)| b - a).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..spec.random {
        let mut u = rng.random_range(0.0..total);
        let mut x = parts[parts.len() - 1].1;
        for &(a, b) in &parts {
            if u < b - a {
                x = a + u;
                break;
            }
            u -= b - a;
        }
        pts.push(x);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

fn differences(points: &[f64]) -> Vec<f64> {
    let mut zs: Vec<f64> = points
        .iter()
        .flat_map(|&x| points.iter().map(move |&y| x - y))
        .collect();
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    zs
}

#[derive(Serialize)]
struct CheckArgs {
    property: Property,
}

#[derive(Serialize)]
struct CheckResult {
    pass: bool,
    /// Smallest Gram eigenvalue (pd) or largest eigenvalue on the
    /// zero-sum subspace (cnd).
    min_eig: Option<f64>,
    max_projected_eig: Option<f64>,
    value_at_zero: Option<f64>,
    tolerance: f64,
    /// `max |F(−z) − conj F(z)|` over the sampled differences.
    symmetry_defect: f64,
    /// `|F(z)| > F(0) + tol` somewhere; only meaningful for `pd`.
    bound_violated: Option<bool>,
    points: Vec<f64>,
}

fn check(cli: &Cli, property: Property) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let f: LocalKernel<f64> = loaded.kernel()?;
    let points = sample_points(&loaded, f.domain(), cli.seed)?;
    let tol = cli.tol.unwrap_or_else(|| f.default_tolerance());
    let symmetry = hermitian_symmetry_check(&f, &differences(&points), tol)?;
    let result = match property {
        Property::Pd => {
            let v = check_positive_definite(&f, &points, tol)?;
            CheckResult {
                pass: v.pass,
                min_eig: Some(v.value),
                max_projected_eig: None,
                value_at_zero: None,
                tolerance: v.tolerance,
                symmetry_defect: symmetry.max_defect,
                bound_violated: Some(symmetry.bound_violated),
                points,
            }
        }
        Property::Cnd => {
            let v = check_conditionally_negative(&f, &points, tol)?;
            CheckResult {
                pass: v.pass,
                min_eig: None,
                max_projected_eig: Some(v.max_projected_eigenvalue),
                value_at_zero: Some(v.value_at_zero),
                tolerance: v.tolerance,
                symmetry_defect: symmetry.max_defect,
                bound_violated: None,
                points,
            }
        }
    };
    let pass = result.pass;
    Ok(plain(
        report(cli, Some(&loaded.config), CheckArgs { property }, result),
        pass,
    ))
}

#[derive(Serialize)]
struct GramResult {
    points: Vec<f64>,
    /// Rows of `[re, im]` entries.
    matrix: Vec<Vec<[f64; 2]>>,
    eigenvalues: Vec<f64>,
}

fn gram(cli: &Cli) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let f: LocalKernel<f64> = loaded.kernel()?;
    let points = sample_points(&loaded, f.domain(), cli.seed)?;
    let k = gram_matrix(&f, &points)?;
    let eigenvalues = hermitian_eigenvalues(&k);
    let matrix = k
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    Ok(plain(
        report(
            cli,
            Some(&loaded.config),
            NoArgs {},
            GramResult {
                points,
                matrix,
                eigenvalues,
            },
        ),
        true,
    ))
}

#[derive(Serialize)]
struct ExtendArgs {
    method: Method,
    measure: Option<PathBuf>,
    measure_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ExtendResult {
    provenance: String,
    restriction: ExtensionCheck<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tangent: Option<Tangent<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<SupportReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(flatten)]
    diagnosis: Option<ZeroPadDiagnosis<f64>>,
    candidate_csv: Option<PathBuf>,
}

fn restriction_samples(f: &LocalKernel<f64>, n: usize) -> Result<Vec<f64>, Failure> {
    Ok(differences(&f.domain().interior_grid(n, 0.01)?))
}

fn write_candidate(
    c: &ExtensionCandidate<f64>,
    loaded: &Loaded,
    domain: &DomainSet<f64>,
    out: &Path,
) -> Result<(), Failure> {
    let ts: Vec<f64> = match &loaded.config.extend.output {
        Some(g) if g.count >= 2 => {
            let h = (g.stop - g.start) / (g.count - 1) as f64;
            (0..g.count).map(|k| g.start + h * k as f64).collect()
        }
        Some(g) => vec![g.start; g.count],
        None => {
            let d = 2.0 * domain.diameter();
            (0..=400).map(|k| -d + d * k as f64 / 200.0).collect()
        }
    };
    let file = File::create(out)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", out.display())))?;
    c.write_csv(&ts, BufWriter::new(file))?;
    Ok(())
}

fn extend(
    cli: &Cli,
    method: Method,
    measure: Option<&Path>,
    measure_out: Option<&Path>,
) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let spec = &loaded.config.extend;
    let f: LocalKernel<f64> = loaded.kernel()?;
    let samples = restriction_samples(&f, spec.restriction_points)?;
    let mut tangent = None;
    let mut diagnosis = None;
    let candidate = match method {
        Method::Measure => {
            let (mu, budget) = match (measure, &spec.measure) {
                (Some(p), _) => (read_measure(p)?, 0.0),
                (None, Some(m)) => loaded.measure(m)?,
                (None, None) => {
                    return Err(Failure::Usage(
                        "`extend --method measure` needs --measure or extend.measure".into(),
                    ))
                }
            };
            from_measure(mu).with_truncation_budget(budget + spec.truncation_budget)
        }
        Method::Polya => {
            let t = boundary_tangent(&f)?;
            tangent = Some(t);
            let opts = PolyaOptions {
                quadrature: PolyaQuadrature {
                    intervals: spec.polya_panels,
                    ..PolyaQuadrature::default()
                },
                ..PolyaOptions::default()
            };
            polya_extension(&f, spec.cutoff.unwrap_or(t.zero_at), opts)?
        }
        Method::ZeroPad => {
            let opts = ZeroPadOptions {
                seed: cli.seed,
                steps: spec.zero_pad_steps,
                sizes: spec.zero_pad_sizes.clone(),
                random_sets: spec.zero_pad_random_sets,
                tolerance: cli.tol.unwrap_or(1e-10),
            };
            let (c, d) = zero_pad(&f, &opts)?;
            diagnosis = Some(d);
            c
        }
    };
    let restriction = validate_extension(&candidate, &f, &samples)?;
    let support = match candidate.backing_measure() {
        Some(_) => Some(compact_support_flag(&candidate)?),
        None => None,
    };
    if let Some(out) = &cli.out {
        write_candidate(&candidate, &loaded, f.domain(), out)?;
    }
    match (measure_out, candidate.backing_measure()) {
        (Some(path), Some(m)) => {
            let file = File::create(path)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            m.write_csv(BufWriter::new(file))?;
        }
        (Some(_), None) => {
            return Err(Failure::Usage("this candidate has no backing measure to write".into()))
        }
        _ => {}
    }
    let witness = diagnosis
        .as_ref()
        .is_some_and(|d| d.verdict == ZeroPadVerdict::WitnessFound);
    let pass = restriction.valid && !witness;
    let result = ExtendResult {
        provenance: serde_json::to_value(candidate.provenance())
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        restriction,
        tangent,
        support,
        diagnosis,
        candidate_csv: cli.out.clone(),
    };
    let args = ExtendArgs {
        method,
        measure: measure.map(Path::to_path_buf),
        measure_out: measure_out.map(Path::to_path_buf),
    };
    Ok(Outcome {
        report: report(cli, Some(&loaded.config), args, result),
        pass,
        out_used: cli.out.is_some(),
    })
}

#[derive(Serialize)]
struct UniqueArgs {
    precision: Precision,
}

#[derive(Serialize)]
struct MembershipOut {
    anchors: usize,
    q_value: f64,
    range_residual: f64,
    condition: f64,
    flag: MembershipFlag,
}

#[derive(Serialize)]
struct BasisOut {
    function: String,
    steps: Vec<MembershipOut>,
    growth: f64,
    member: bool,
}

#[derive(Serialize)]
struct UniqueResult {
    verdict: &'static str,
    def_dim: usize,
    basis: Vec<BasisOut>,
}

fn def_report<T: Real>(loaded: &Loaded, schedule: &DefSchedule) -> Result<UniqueResult, Failure> {
    let f: LocalKernel<T> = loaded.kernel()?;
    let r: DefReport<T> = def_space_dimension(&f, schedule)?;
    Ok(UniqueResult {
        verdict: if r.dim == 0 { "unique" } else { "non-unique" },
        def_dim: r.dim,
        basis: r
            .basis
            .into_iter()
            .map(|b| BasisOut {
                function: b.function,
                steps: b
                    .steps
                    .into_iter()
                    .map(|m| MembershipOut {
                        anchors: m.anchors,
                        q_value: m.q_value.as_f64(),
                        range_residual: m.range_residual.as_f64(),
                        condition: m.condition.as_f64(),
                        flag: m.flag,
                    })
                    .collect(),
                growth: b.growth.as_f64(),
                member: b.member,
            })
            .collect(),
    })
}

fn unique(cli: &Cli, precision: Option<Precision>) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let spec = &loaded.config.unique;
    let precision = precision.unwrap_or(spec.precision);
    let schedule = DefSchedule {
        anchor_counts: spec.anchor_counts.clone(),
        margin: spec.margin,
        divergence_ratio: spec.divergence_ratio,
    };
    let result = match precision {
        Precision::F64 => def_report::<f64>(&loaded, &schedule)?,
        Precision::Quad => def_report::<pdext::quad::Scalar>(&loaded, &schedule)?,
    };
    Ok(plain(
        report(cli, Some(&loaded.config), UniqueArgs { precision }, result),
        true,
    ))
}

#[derive(Serialize)]
struct BochnerArgs {
    measure: Option<PathBuf>,
}

#[derive(Serialize)]
struct BochnerResult {
    total_mass: f64,
    /// `|μ(ℝ) − F(0)|`.
    mass_defect: f64,
    restriction: ExtensionCheck<f64>,
    samples: usize,
}

fn bochner(cli: &Cli, measure: Option<&Path>) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let spec = &loaded.config.bochner;
    let f: LocalKernel<f64> = loaded.kernel()?;
    let (mu, budget) = match (measure, &spec.measure) {
        (Some(p), _) => (read_measure(p)?, 0.0),
        (None, Some(m)) => loaded.measure(m)?,
        (None, None) => {
            return Err(Failure::Usage(
                "`bochner` needs --measure or bochner.measure".into(),
            ))
        }
    };
    let total_mass = mu.total_mass();
    let samples = restriction_samples(&f, spec.restriction_points)?;
    let candidate = from_measure(mu).with_truncation_budget(budget + spec.budget);
    let restriction = validate_extension(&candidate, &f, &samples)?;
    let pass = restriction.valid;
    let result = BochnerResult {
        total_mass,
        mass_defect: (total_mass - f.at_zero()).abs(),
        restriction,
        samples: samples.len(),
    };
    let args = BochnerArgs {
        measure: measure.map(Path::to_path_buf),
    };
    Ok(plain(report(cli, Some(&loaded.config), args, result), pass))
}

#[derive(Serialize)]
struct GpArgs {
    paths: usize,
}

#[derive(Serialize)]
struct GpResult {
    process: Process,
    grid: Vec<f64>,
    covariance: CovarianceReport<f64>,
    paths_csv: Option<PathBuf>,
}

fn gp(cli: &Cli, paths: Option<usize>) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let spec = &loaded.config.gp;
    let f: LocalKernel<f64> = loaded.kernel()?;
    let n = paths.unwrap_or(spec.paths);
    let grid: Vec<f64> = (0..spec.grid.count)
        .map(|k| spec.grid.start + spec.grid.step * k as f64)
        .collect();
    let (sample, model) = match spec.process {
        Process::Stationary => (
            sample_stationary(&f, &grid, n, cli.seed, spec.jitter)?,
            stationary_covariance(&f, &grid)?,
        ),
        Process::Increment => (
            sample_stationary_increment(&f, &grid, n, cli.seed)?,
            increment_covariance(&f, &grid)?,
        ),
    };
    let covariance = covariance_report(&sample, &model)?;
    if let Some(out) = &cli.out {
        let file = File::create(out)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", out.display())))?;
        sample.write_csv(BufWriter::new(file))?;
    }
    let result = GpResult {
        process: spec.process,
        grid,
        covariance,
        paths_csv: cli.out.clone(),
    };
    Ok(Outcome {
        report: report(cli, Some(&loaded.config), GpArgs { paths: n }, result),
        pass: true,
        out_used: cli.out.is_some(),
    })
}

#[derive(Serialize)]
struct ScatterArgs<'a> {
    mu: &'a Path,
    nu: &'a Path,
    anchors: usize,
}

#[derive(Serialize)]
struct ScatterResult {
    probes: Vec<f64>,
    #[serde(flatten)]
    report: ScatterReport<f64>,
}

fn scatter(cli: &Cli, mu: &Path, nu: &Path, anchors: usize) -> Result<Outcome, Failure> {
    let loaded = load(cli)?;
    let spec = &loaded.config.scatter;
    let f: LocalKernel<f64> = loaded.kernel()?;
    let mu_m = read_measure(mu)?;
    let nu_m = read_measure(nu)?;
    let set = AnchorSet::uniform(f.domain(), anchors, spec.margin)?;
    let probes_at = if spec.probes.is_empty() {
        let (lo, hi) = (f.domain().intervals()[0].0, f.domain().diameter());
        vec![lo + 0.2 * hi, lo + 0.5 * hi, lo + 0.8 * hi]
    } else {
        spec.probes.clone()
    };
    let probes: Vec<_> = probes_at.iter().map(|&a| embed_gamma(a, &mu_m)).collect();
    let opts = ScatterOptions {
        translations: spec.translations.clone(),
        gamma_points: spec.gamma_points.clone().unwrap_or_else(|| probes_at.clone()),
        multiplier_stride: spec.multiplier_stride,
        min_relative_weight: spec.min_relative_weight,
        mu_budget: spec.mu_budget,
        nu_budget: spec.nu_budget,
    };
    let r = scattering_operator(&f, &mu_m, &nu_m, &set, &probes, &opts)?;
    let result = ScatterResult {
        probes: probes_at,
        report: r,
    };
    let args = ScatterArgs { mu, nu, anchors };
    Ok(plain(report(cli, Some(&loaded.config), args, result), true))
}

#[derive(Serialize)]
struct SpectralArgs<'a> {
    omega: &'a str,
    lambda_pattern: LambdaPattern,
    range: f64,
    panels: usize,
}

#[derive(Serialize)]
struct ParsevalProbe {
    function: &'static str,
    norm_sq: f64,
    defect: f64,
}

#[derive(Serialize)]
struct SpectralResult {
    intervals: Vec<[f64; 2]>,
    lambdas: usize,
    max_offdiag: f64,
    orthonormal: bool,
    tolerance: f64,
    parseval_defects: Vec<ParsevalProbe>,
}

fn parse_omega(s: &str) -> Result<DomainSet<f64>, Failure> {
    let bad = || Failure::Usage(format!("--omega expects `a,b;c,d`, got {s:?}"));
    let intervals = s
        .split(';')
        .map(|part| {
            let (a, b) = part.split_once(',').ok_or_else(bad)?;
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(DomainSet::new(intervals)?)
}

fn spectral(
    cli: &Cli,
    omega: &str,
    pattern: LambdaPattern,
    range: f64,
    panels: usize,
) -> Result<Outcome, Failure> {
    let domain = parse_omega(omega)?;
    let fam = ExponentialFamily::new(domain.clone(), lambda_set(pattern, range))?;
    let max_off = max_offdiag(&exponential_gram(&fam));
    let tolerance = cli.tol.unwrap_or(1e-12);
    let centre = domain.intervals()[0].0 + domain.diameter() / 2.0;
    let probes: [(&'static str, Box<dyn Fn(f64) -> Complex<f64>>); 3] = [
        ("indicator", Box::new(|_| Complex::new(1.0, 0.0))),
        ("ramp", Box::new(move |x| Complex::new(x - centre, 0.0))),
        (
            "gaussian",
            Box::new(move |x| Complex::new((-(x - centre).powi(2)).exp(), 0.0)),
        ),
    ];
    let parseval_defects = probes
        .iter()
        .map(|(name, g)| {
            let f = GriddedFunction::sample(&domain, panels, g)?;
            Ok(ParsevalProbe {
                function: name,
                norm_sq: f.norm_sq(),
                defect: parseval_defect(&fam, &f),
            })
        })
        .collect::<Result<Vec<_>, pdext::Error>>()?;
    let result = SpectralResult {
        intervals: domain.intervals().iter().map(|&(a, b)| [a, b]).collect(),
        lambdas: fam.lambdas().len(),
        max_offdiag: max_off,
        orthonormal: max_off <= tolerance,
        tolerance,
        parseval_defects,
    };
    let pass = result.orthonormal;
    let args = SpectralArgs {
        omega,
        lambda_pattern: pattern,
        range,
        panels,
    };
    Ok(plain(report(cli, None, args, result), pass))
}
