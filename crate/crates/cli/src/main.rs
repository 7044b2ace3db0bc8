use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fls_outlier::io::{
    emit_results, manifest_path, parse_config_file, read_correspondences, summaries_json,
    write_rdist, write_results, write_timing, Format, RunManifest, RunSpec, TimingSummary,
};
use fls_outlier::sim::{
    r_distribution_study, run_experiment, timing_benchmark, trial_rng, ExperimentGrid, Group,
    ResultsTable, ScenarioConfig,
};
use fls_outlier::{reject_outliers, Case, RejectOptions, SonarConfig};

/// Outlier rejection for 2D forward-looking sonar correspondences, and the
/// simulations that evaluate it.
#[derive(Debug, Parser)]
#[command(name = "fls-reject", version, about)]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "FLS_THREADS", default_value_t = 8)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// General-case experiment grid (pairwise test, exact clique).
    General(ExperimentArgs),
    /// Coplanar-case experiment grid (four-point test, hyperclique heuristic).
    Coplanar(CoplanarArgs),
    /// Compare the elevation-marginalized range with its Gaussian surrogate.
    Rdist(RdistArgs),
    /// Time the test and clique phases over problem sizes.
    Bench(BenchArgs),
    /// Read a correspondence file and print the ids of the estimated inliers.
    Reject(RejectArgs),
    /// Re-run what a manifest describes.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Result file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; guessed from the --out extension when absent.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Manifest file; defaults to `<out>.manifest.json`, or stderr without --out.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl OutputArgs {
    fn format(&self) -> Format {
        match (self.format, &self.out) {
            (Some(FormatArg::Csv), _) => Format::Csv,
            (Some(FormatArg::Json), _) => Format::Json,
            (None, Some(p)) => Format::from_path(p),
            (None, None) => Format::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// TOML scenario file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated outlier ratios in [0, 1).
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated groups; defaults to the config's group.
    #[arg(long, value_delimiter = ',')]
    group: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CoplanarArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Significance level of the chi-squared gate.
    #[arg(long)]
    p_value: Option<f64>,
    /// Shorthand for --group no_approx.
    #[arg(long, conflicts_with = "group")]
    no_r_approx: bool,
    /// Shorthand for --group with_in_range.
    #[arg(long, conflicts_with_all = ["group", "no_r_approx"])]
    with_in_range: bool,
}

#[derive(Debug, Args)]
struct RdistArgs {
    /// True range (m).
    #[arg(long, default_value_t = 2.2)]
    r: f64,
    /// Range noise (m).
    #[arg(long, default_value_t = 0.005)]
    sigma_r: f64,
    /// Elevation half aperture (degrees).
    #[arg(long = "phi-max-deg", alias = "phi-max", default_value_t = 7.0)]
    phi_max_deg: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CaseArg {
    General,
    Coplanar,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::General => Case::General,
            CaseArg::Coplanar => Case::Coplanar,
        }
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "general")]
    case: CaseArg,
    /// Comma-separated correspondence counts.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.8)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct RejectArgs {
    /// Correspondence file: `id wx wy wz r theta` per line, theta in radians.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "general")]
    case: CaseArg,
    #[arg(long, default_value_t = 65.0)]
    theta_max_deg: f64,
    #[arg(long, default_value_t = 7.0)]
    phi_max_deg: f64,
    #[arg(long, default_value_t = 0.005)]
    sigma_r: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_theta_deg: f64,
    /// Defaults to 3 * sigma_r.
    #[arg(long)]
    beta_r: Option<f64>,
    /// Defaults to 3 * sigma_theta_deg.
    #[arg(long)]
    beta_theta_deg: Option<f64>,
    #[arg(long, default_value_t = fls_outlier::coplanarity::DEFAULT_P_VALUE)]
    p_value: f64,
    #[arg(long)]
    no_r_approx: bool,
    #[arg(long)]
    with_in_range: bool,
    /// Where to write the ids; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest_in: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads == 0 {
        bail!("--threads must be positive");
    }
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global();
    match cli.command {
        Command::General(a) => {
            let grid = experiment_grid(Case::General, &a, |_| Ok(()), Vec::new())?;
            experiment(grid, cli.threads, &a.output)
        }
        Command::Coplanar(a) => {
            let preset = if a.no_r_approx {
                vec![Group::NoApprox]
            } else if a.with_in_range {
                vec![Group::WithInRange]
            } else {
                Vec::new()
            };
            let p_value = a.p_value;
            let grid = experiment_grid(
                Case::Coplanar,
                &a.common,
                |cfg| {
                    if let Some(p) = p_value {
                        cfg.p_value = p;
                    }
                    Ok(())
                },
                preset,
            )?;
            experiment(grid, cli.threads, &a.common.output)
        }
        Command::Rdist(a) => {
            let spec = RunSpec::RDist {
                r: a.r,
                sigma_r: a.sigma_r,
                phi_max: a.phi_max_deg.to_radians(),
                samples: a.samples,
            };
            execute(spec, a.seed, cli.threads, &a.output)
        }
        Command::Bench(a) => {
            let spec = RunSpec::Bench {
                case: a.case.into(),
                sizes: a.sizes.clone(),
                outlier_ratio: a.ratio,
                trials: a.trials,
            };
            execute(spec, a.seed, cli.threads, &a.output)
        }
        Command::Reject(a) => {
            let sonar = SonarConfig {
                theta_max: a.theta_max_deg.to_radians(),
                phi_max: a.phi_max_deg.to_radians(),
                sigma_r: a.sigma_r,
                sigma_theta: a.sigma_theta_deg.to_radians(),
                beta_r: a.beta_r.unwrap_or(3.0 * a.sigma_r),
                beta_theta: a
                    .beta_theta_deg
                    .unwrap_or(3.0 * a.sigma_theta_deg)
                    .to_radians(),
                ..SonarConfig::default()
            };
            sonar.validate()?;
            let options = RejectOptions {
                case: a.case.into(),
                sonar,
                use_r_approx: !a.no_r_approx,
                p_value: a.p_value,
                with_in_range: a.with_in_range,
            };
            let output = OutputArgs {
                out: a.out,
                format: None,
                manifest: a.manifest,
            };
            let spec = RunSpec::Reject {
                options,
                input: a.input.to_string_lossy().into_owned(),
            };
            execute(spec, 0, cli.threads, &output)
        }
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest_in)?;
            execute(m.spec, m.master_seed, cli.threads, &a.output)
        }
    }
}

fn experiment_grid(
    case: Case,
    a: &ExperimentArgs,
    extra: impl FnOnce(&mut ScenarioConfig) -> Result<()>,
    preset_groups: Vec<Group>,
) -> Result<ExperimentGrid> {
    let mut base = match &a.config {
        Some(path) => parse_config_file(path)?,
        None => ScenarioConfig::new(case),
    };
    if base.case != case {
        bail!(
            "config {} describes the {} case",
            a.config.as_deref().unwrap_or(Path::new("")).display(),
            base.case.name()
        );
    }
    if let Some(t) = a.trials {
        base.trials = t;
    }
    if let Some(s) = a.seed {
        base.seed = s;
    }
    if let Some(n) = a.n_points {
        base.n_points = n;
    }
    extra(&mut base)?;
    let groups = if !preset_groups.is_empty() {
        preset_groups
    } else if a.group.is_empty() {
        vec![base.group]
    } else {
        a.group
            .iter()
            .map(|g| Group::parse(g))
            .collect::<Result<Vec<_>, _>>()?
    };
    let ratios = if a.ratios.is_empty() {
        vec![base.outlier_ratio]
    } else {
        a.ratios.clone()
    };
    for &g in &groups {
        for &r in &ratios {
            ScenarioConfig {
                group: g,
                outlier_ratio: r,
                ..base.clone()
            }
            .validate()?;
        }
    }
    if base.trials == 0 {
        bail!("--trials must be positive");
    }
    Ok(ExperimentGrid {
        base,
        groups,
        ratios,
    })
}

fn experiment(grid: ExperimentGrid, threads: usize, output: &OutputArgs) -> Result<()> {
    let seed = grid.base.seed;
    execute(RunSpec::Experiment { grid }, seed, threads, output)
}

/// Runs `spec`, writes its results and the manifest.
fn execute(spec: RunSpec, seed: u64, threads: usize, output: &OutputArgs) -> Result<()> {
    let format = output.format();
    let start = Instant::now();
    let mut timing = TimingSummary::default();
    let mut summary: Option<String> = None;
    let body: Vec<u8> = match &spec {
        RunSpec::Experiment { grid } => {
            let table: ResultsTable = run_experiment(grid, threads)?;
            timing = TimingSummary::from_table(&table, 0.0);
            summary = Some(summaries_json(&table));
            let mut buf = Vec::new();
            match &output.out {
                Some(out) => emit_results(&table, format, out)?,
                None => write_results(&table, format, &mut buf)?,
            }
            buf
        }
        RunSpec::RDist {
            r,
            sigma_r,
            phi_max,
            samples,
        } => {
            let study =
                r_distribution_study(*r, *sigma_r, *phi_max, *samples, &mut trial_rng(seed, 0))?;
            eprintln!("tv_distance = {:.6}", study.tv_distance);
            let mut buf = Vec::new();
            write_rdist(&study, format, &mut buf)?;
            buf
        }
        RunSpec::Bench {
            case,
            sizes,
            outlier_ratio,
            trials,
        } => {
            let rows = timing_benchmark(*case, sizes, *outlier_ratio, *trials, seed)?;
            let k = rows.len().max(1) as f64;
            timing.mean_test_ms = rows.iter().map(|r| r.mean_test_ms).sum::<f64>() / k;
            timing.mean_clique_ms = rows.iter().map(|r| r.mean_clique_ms).sum::<f64>() / k;
            timing.mean_total_ms = rows.iter().map(|r| r.mean_total_ms).sum::<f64>() / k;
            let mut buf = Vec::new();
            write_timing(&rows, format, &mut buf)?;
            buf
        }
        RunSpec::Reject { options, input } => {
            let corrs = read_correspondences(Path::new(input))?;
            let rej = reject_outliers(&corrs, options)?;
            timing.mean_test_ms = rej.test_time.as_secs_f64() * 1e3;
            timing.mean_clique_ms = rej.clique_time.as_secs_f64() * 1e3;
            timing.mean_total_ms = rej.total_time.as_secs_f64() * 1e3;
            eprintln!(
                "kept {} of {} correspondences{}",
                rej.inliers.len(),
                corrs.len(),
                if rej.certified { "" } else { " (heuristic)" }
            );
            let mut s = String::new();
            for &i in &rej.inliers {
                s.push_str(&format!("{}\n", corrs[i].id));
            }
            s.into_bytes()
        }
    };
    timing.wall_ms = start.elapsed().as_secs_f64() * 1e3;

    match &output.out {
        Some(out) => {
            if !matches!(spec, RunSpec::Experiment { .. }) {
                fs::write(out, &body).with_context(|| format!("writing {}", out.display()))?;
            }
            if let Some(s) = &summary {
                let mut p = out.as_os_str().to_owned();
                p.push(".summary.json");
                fs::write(&p, s)
                    .with_context(|| format!("writing {}", PathBuf::from(&p).display()))?;
            }
        }
        None => io::stdout()
            .write_all(&body)
            .context("writing results to stdout")?,
    }

    let manifest = RunManifest::new(spec, seed, threads, timing);
    match (&output.manifest, &output.out) {
        (Some(p), _) => manifest.write(p)?,
        (None, Some(out)) => manifest.write(&manifest_path(out))?,
        (None, None) => eprintln!("{}", serde_json::to_string(&manifest)?),
    }
    Ok(())
}
