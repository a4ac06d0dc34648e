//! Command-line interface.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use distnull_core::dist::{dist_test_t, replication_probability, DistributionalNull};
use distnull_core::joint::{rule_of_thumb, Criteria, JointCriterion, QRange, THUMB_FACTOR};
use distnull_core::point::{point_test_t, power_replication_estimate, PowerQuantile};
use distnull_core::special::t_quantile;
use distnull_core::variance_ratio::{
    histogram, summarize, IngestOptions, MultiSiteDataset, VarianceDenominator,
};
use distnull_core::{DegreesOfFreedom, ExperimentDesign, ExperimentSummary};

use crate::config::{ConfigFile, Settings};
use crate::data::{read_records, write_cell_csv, write_histogram_csv};
use crate::error::{CliError, EXIT_OK};
use crate::groups::{load_groups, per_measure_groups};
use crate::mc::{simulate_fpr, simulate_replication, DrawMode, ReplicationVariant, SimConfig, Tail};
use crate::report::{
    DistSection, ExcludedCellOut, GroupRowOut, IntervalSection, OutputFormat, PointSection, QestReport,
    RangeReport, ReplicateReport, Report, SimRow, SimulateReport, TestReport, ThumbReport, ThumbSection,
    SCHEMA_VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "distnull", version, about = "Significance and replication tests under distributional null hypotheses")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// Output format [default: human, or the config file's `format`]
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// TOML file with default settings
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for simulations [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point-form and distributional significance tests of one result
    Test(TestArgs),
    /// Probability that an exact repeat is significant in the same direction
    Replicate(ReplicateArgs),
    /// Range of q over which a result meets both significance and replication criteria
    Range(RangeArgs),
    /// Estimate variance ratios q from multi-site data
    Qest(QestArgs),
    /// Monte Carlo checks of the test and replication formulas
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Rule-of-thumb lower bound on the joint criterion
    Thumb(ThumbArgs),
}

fn parse_design(s: &str) -> Result<ExperimentDesign, String> {
    s.parse().map_err(|e: distnull_core::summary::UnknownDesign| e.to_string())
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TestArgs {
    /// one-sample, paired or two-sample [default: one-sample]
    #[arg(long, value_parser = parse_design)]
    pub design: Option<ExperimentDesign>,
    /// Per-group sample size
    #[arg(long)]
    pub n: u64,
    /// Sample mean (first group for two-sample, mean difference for paired)
    #[arg(long, conflicts_with = "t")]
    pub mean: Option<f64>,
    /// Sample standard deviation matching --mean
    #[arg(long, requires = "mean")]
    pub sd: Option<f64>,
    /// Second group's mean (two-sample)
    #[arg(long, requires = "mean")]
    pub mean2: Option<f64>,
    /// Second group's standard deviation (two-sample)
    #[arg(long, requires = "mean2")]
    pub sd2: Option<f64>,
    /// Second group's size; must equal --n
    #[arg(long)]
    pub n2: Option<u64>,
    /// Precomputed t statistic
    #[arg(long)]
    pub t: Option<f64>,
    /// Degrees of freedom [default: from --design and --n]
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Variance ratio of the distributional null
    #[arg(long)]
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerQuantileArg {
    LowerAlpha,
    UpperCritical,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ReplicateArgs {
    /// First experiment's t statistic
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub n: u64,
    /// Degrees of freedom [default: from --design and --n]
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_parser = parse_design)]
    pub design: Option<ExperimentDesign>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub q: f64,
    /// Quantile used by the power-based comparison estimate
    #[arg(long, value_enum, default_value = "lower-alpha")]
    pub power_quantile: PowerQuantileArg,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RangeArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub n: u64,
    /// Degrees of freedom [default: from --design and --n]
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_parser = parse_design)]
    pub design: Option<ExperimentDesign>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Replication level [default: 0.5]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Largest q searched [default: 1000]
    #[arg(long)]
    pub q_ceiling: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QestArgs {
    /// CSV with columns site,measure,value
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// TOML group file [default: one group per measure]
    #[arg(long, value_name = "PATH")]
    pub groups: Option<PathBuf>,
    /// Only use these sites (comma-separated)
    #[arg(long, value_delimiter = ',')]
    pub sites: Vec<String>,
    /// Only use sites whose identifier starts with this prefix
    #[arg(long)]
    pub site_prefix: Option<String>,
    /// Minimum observations for a (measure, site) cell
    #[arg(long, default_value_t = 2)]
    pub min_cell_n: usize,
    /// Divide variances by n instead of n - 1
    #[arg(long)]
    pub population_variance: bool,
    /// Write per-cell ratios to this CSV file
    #[arg(long, value_name = "PATH")]
    pub cells_out: Option<PathBuf>,
    /// Write a histogram of cell ratios to this CSV file
    #[arg(long, value_name = "PATH")]
    pub histogram_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub bin_width: f64,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Rejection rates of the distributional test
    Fpr(FprArgs),
    /// Replication rates against the closed-form probability
    Replication(ReplicationArgs),
}

#[derive(Debug, Args)]
pub struct SimShared {
    #[arg(long, value_parser = parse_design, default_value = "one-sample")]
    pub design: ExperimentDesign,
    /// Per-group sample sizes (comma-separated)
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Trials per scenario [default: 100000]
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Simulate every observation instead of sufficient statistics
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FprArgs {
    #[command(flatten)]
    pub shared: SimShared,
    /// Variance ratios of the generating model (comma-separated)
    #[arg(long, value_delimiter = ',', required = true)]
    pub q_true: Vec<f64>,
    /// Variance ratio assumed by the test [default: equal to --q-true]
    #[arg(long)]
    pub q_test: Option<f64>,
    /// Count significance in either direction
    #[arg(long)]
    pub both_tails: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    SharedSd,
    IndependentS2,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ReplicationArgs {
    #[command(flatten)]
    pub shared: SimShared,
    /// First-experiment t statistics (comma-separated)
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    /// Variance ratios (comma-separated)
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<f64>,
    #[arg(long, value_enum, default_value = "shared-sd")]
    pub variant: VariantArg,
}

#[derive(Debug, Args)]
pub struct ThumbArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nu: f64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return e.exit_code();
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut s = Settings::from_config(&file);
    if let Some(f) = cli.format {
        s.format = f;
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    Ok(s)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let s = settings(cli)?;
    let text = match &cli.command {
        Command::Test(a) => cmd_test(a, &s)?.render(s.format)?,
        Command::Replicate(a) => cmd_replicate(a, &s)?.render(s.format)?,
        Command::Range(a) => cmd_range(a, &s)?.render(s.format)?,
        Command::Qest(a) => {
            let report = cmd_qest(a)?;
            if s.format != OutputFormat::Human {
                for r in &report.rejected_rows {
                    writeln!(err, "warning: rejected line {}: {}", r.line, r.reason)?;
                }
                for w in &report.warnings {
                    writeln!(err, "warning: {w}")?;
                }
            }
            report.render(s.format)?
        }
        Command::Simulate(c) => cmd_simulate(c, &s)?.render(s.format)?,
        Command::Thumb(a) => cmd_thumb(a, &s)?.render(s.format)?,
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn resolve_nu(nu: Option<f64>, design: Option<ExperimentDesign>, n: u64) -> Result<DegreesOfFreedom, CliError> {
    match nu {
        Some(v) => Ok(DegreesOfFreedom::new(v)?),
        None => Ok(design.unwrap_or(ExperimentDesign::OneSample).degrees_of_freedom(n)?),
    }
}

pub fn cmd_test(a: &TestArgs, s: &Settings) -> Result<TestReport, CliError> {
    let alpha = a.alpha.unwrap_or(s.alpha);
    let null = DistributionalNull::new(a.q)?;
    let (t, nu, design) = match (a.t, a.mean) {
        (Some(t), None) => {
            if a.sd.is_some() || a.mean2.is_some() {
                return Err(CliError::Usage("--t cannot be combined with summary statistics".into()));
            }
            (t, resolve_nu(a.nu, a.design, a.n)?, a.design)
        }
        (None, Some(mean)) => {
            let sd = a.sd.ok_or_else(|| CliError::Usage("--mean requires --sd".into()))?;
            let design = a.design.unwrap_or(ExperimentDesign::OneSample);
            let summary = match design {
                ExperimentDesign::TwoSampleEqualN => {
                    let (Some(mean2), Some(sd2)) = (a.mean2, a.sd2) else {
                        return Err(CliError::Usage("two-sample input needs --mean2 and --sd2".into()));
                    };
                    ExperimentSummary::two_sample(a.n, mean, sd, a.n2.unwrap_or(a.n), mean2, sd2)?
                }
                _ => {
                    if a.mean2.is_some() || a.n2.is_some() {
                        return Err(CliError::Usage(format!("--mean2/--n2 do not apply to the {design} design")));
                    }
                    ExperimentSummary::new(design, a.n, mean, sd)?
                }
            };
            let (t, nu) = summary.t_statistic();
            if a.nu.is_some_and(|v| v != nu.get()) {
                return Err(CliError::Usage(format!("--nu conflicts with the {design} design's nu = {nu}")));
            }
            (t, nu, Some(design))
        }
        _ => return Err(CliError::Usage("supply either --t or --mean with --sd".into())),
    };
    let p = point_test_t(t, nu, a.n, alpha)?;
    let d = dist_test_t(t, nu, a.n, alpha, null)?;
    Ok(TestReport {
        schema_version: SCHEMA_VERSION,
        command: "test".into(),
        design: design.map(|d| d.as_str().to_string()),
        t_stat: t,
        nu: nu.get(),
        n: a.n,
        alpha,
        q: a.q,
        point: PointSection { p_value: p.p_value, z_crit: p.z_crit, t_crit: p.t_crit, significant: p.significant },
        distributional: DistSection {
            p_value: d.p_value,
            z_crit: d.z_crit,
            t_crit: d.t_crit,
            asymptotic_bound_z: d.asymptotic_bound_z,
            significant: d.significant,
        },
    })
}

pub fn cmd_replicate(a: &ReplicateArgs, s: &Settings) -> Result<ReplicateReport, CliError> {
    let alpha = a.alpha.unwrap_or(s.alpha);
    let nu = resolve_nu(a.nu, a.design, a.n)?;
    let null = DistributionalNull::new(a.q)?;
    let (quantile, label) = match a.power_quantile {
        PowerQuantileArg::LowerAlpha => (PowerQuantile::LowerAlpha, "lower-alpha"),
        PowerQuantileArg::UpperCritical => (PowerQuantile::UpperCritical, "upper-critical"),
    };
    Ok(ReplicateReport {
        schema_version: SCHEMA_VERSION,
        command: "replicate".into(),
        t1: a.t,
        nu: nu.get(),
        n: a.n,
        alpha,
        q: a.q,
        replication_probability: replication_probability(a.t, alpha, nu, a.n, null)?,
        power_estimate: power_replication_estimate(a.t, alpha, nu, quantile)?,
        power_quantile: label.into(),
    })
}

pub fn cmd_range(a: &RangeArgs, s: &Settings) -> Result<RangeReport, CliError> {
    let alpha = a.alpha.unwrap_or(s.alpha);
    let beta = a.beta.unwrap_or(s.beta);
    let q_ceiling = a.q_ceiling.unwrap_or(s.q_ceiling);
    let nu = resolve_nu(a.nu, a.design, a.n)?;
    let criterion = JointCriterion::new(Criteria::new(alpha, beta)?, nu, a.n)?;
    let thumb = rule_of_thumb(alpha, nu)?;
    let (status, r_min, q_at_min, interval) = match criterion.q_interval(a.t, q_ceiling)? {
        QRange::Interval(iv) => (
            "interval",
            iv.r_min,
            iv.q_at_min,
            Some(IntervalSection {
                q1: iv.q1,
                q2: iv.q2,
                gamma: iv.gamma,
                q1_censored: iv.q1_censored,
                q2_censored: iv.q2_censored,
            }),
        ),
        QRange::NoSolution { r_min, q_at_min } => ("no-solution", r_min, q_at_min, None),
    };
    Ok(RangeReport {
        schema_version: SCHEMA_VERSION,
        command: "range".into(),
        status: status.into(),
        t1: a.t,
        nu: nu.get(),
        n: a.n,
        alpha,
        beta,
        q_ceiling,
        r_min,
        q_at_min,
        interval,
        rule_of_thumb: ThumbSection { t_bound: thumb.t_bound, p_threshold: thumb.p_threshold },
    })
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

fn create(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

pub fn cmd_qest(a: &QestArgs) -> Result<QestReport, CliError> {
    if !(a.bin_width.is_finite() && a.bin_width > 0.0) {
        return Err(CliError::Usage("--bin-width must be positive".into()));
    }
    let parsed = read_records(open(&a.data)?)?;
    let options = IngestOptions {
        min_cell_n: a.min_cell_n,
        denominator: if a.population_variance { VarianceDenominator::Population } else { VarianceDenominator::Unbiased },
    };
    let dataset = MultiSiteDataset::from_records(parsed.records, options)?;
    let groups = match &a.groups {
        Some(p) => load_groups(p)?,
        None => per_measure_groups(dataset.measures()),
    };

    let allowed: BTreeSet<&str> = a.sites.iter().map(String::as_str).collect();
    let filter = |site: &str| {
        (allowed.is_empty() || allowed.contains(site))
            && a.site_prefix.as_deref().is_none_or(|p| site.starts_with(p))
    };
    let filtering = !allowed.is_empty() || a.site_prefix.is_some();
    let site_filter: Option<&dyn Fn(&str) -> bool> = if filtering { Some(&filter) } else { None };

    let summary = summarize(&dataset, &groups, site_filter)?;
    let table = dataset.cells(site_filter);
    if let Some(p) = &a.cells_out {
        write_cell_csv(create(p)?, &table)?;
    }
    if let Some(p) = &a.histogram_out {
        let qs: Vec<f64> = table.cells.iter().map(|c| c.q).collect();
        write_histogram_csv(create(p)?, &histogram(&qs, a.bin_width))?;
    }

    Ok(QestReport {
        schema_version: SCHEMA_VERSION,
        command: "qest".into(),
        records: dataset.record_count(),
        cells: table.cells.len(),
        rejected_rows: parsed.rejected,
        excluded_cells: dataset
            .excluded_cells()
            .iter()
            .map(|c| ExcludedCellOut { measure: c.measure.clone(), site: c.site.clone(), count: c.count })
            .collect(),
        groups: summary
            .rows
            .iter()
            .map(|r| GroupRowOut {
                group: r.group.clone(),
                set: r.set_label.clone(),
                datapoints: r.datapoints,
                mean_q: r.mean_q,
                q025: r.q_lo,
                q975: r.q_hi,
            })
            .collect(),
        warnings: summary.warnings.iter().map(ToString::to_string).collect(),
    })
}

fn base_config(shared: &SimShared, s: &Settings, q_true: f64) -> SimConfig {
    SimConfig::new(shared.design, 2, q_true)
        .with_sigma(shared.sigma)
        .with_trials(shared.trials.unwrap_or(s.trials))
        .with_seed(s.seed)
        .with_draw(if shared.raw { DrawMode::Raw } else { DrawMode::Sufficient })
}

pub fn cmd_simulate(c: &SimulateCommand, s: &Settings) -> Result<SimulateReport, CliError> {
    let mut rows = Vec::new();
    let kind = match c {
        SimulateCommand::Fpr(a) => {
            let alpha = a.shared.alpha.unwrap_or(s.alpha);
            let tail = if a.both_tails { Tail::Both } else { Tail::Upper };
            for &q_true in &a.q_true {
                let q_test = a.q_test.unwrap_or(q_true);
                for &n in &a.shared.n {
                    let cfg = base_config(&a.shared, s, q_true).with_n(n).with_tail(tail);
                    let r = simulate_fpr(&cfg, alpha, q_test)?;
                    let expected = (q_test == q_true).then_some(match tail {
                        Tail::Upper => alpha,
                        Tail::Both => 2.0 * alpha,
                    });
                    rows.push(SimRow {
                        design: cfg.design.as_str().into(),
                        n,
                        q_true,
                        q_test: Some(q_test),
                        t1: None,
                        variant: None,
                        tail: Some(tail),
                        draw: cfg.draw,
                        sigma: cfg.sigma,
                        alpha,
                        expected,
                        rate: r.rate,
                        mc_se: r.mc_se,
                        trials: r.trials,
                        hits: r.hits,
                        wrong_sign: None,
                    });
                }
            }
            "fpr"
        }
        SimulateCommand::Replication(a) => {
            let alpha = a.shared.alpha.unwrap_or(s.alpha);
            let variant = match a.variant {
                VariantArg::SharedSd => ReplicationVariant::SharedSd,
                VariantArg::IndependentS2 => ReplicationVariant::IndependentS2,
            };
            for &q in &a.q {
                for &n in &a.shared.n {
                    for &t1 in &a.t {
                        let cfg = base_config(&a.shared, s, q).with_n(n);
                        let r = simulate_replication(t1, &cfg, alpha, variant)?;
                        rows.push(SimRow {
                            design: cfg.design.as_str().into(),
                            n,
                            q_true: q,
                            q_test: None,
                            t1: Some(t1),
                            variant: Some(variant),
                            tail: None,
                            draw: cfg.draw,
                            sigma: cfg.sigma,
                            alpha,
                            expected: Some(r.expected),
                            rate: r.calibration.rate,
                            mc_se: r.calibration.mc_se,
                            trials: r.calibration.trials,
                            hits: r.calibration.hits,
                            wrong_sign: Some(r.wrong_sign),
                        });
                    }
                }
            }
            "replication"
        }
    };
    Ok(SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate".into(),
        kind: kind.into(),
        seed: s.seed,
        rows,
    })
}

pub fn cmd_thumb(a: &ThumbArgs, s: &Settings) -> Result<ThumbReport, CliError> {
    let alpha = a.alpha.unwrap_or(s.alpha);
    let nu = DegreesOfFreedom::new(a.nu)?;
    let r = rule_of_thumb(alpha, nu)?;
    Ok(ThumbReport {
        schema_version: SCHEMA_VERSION,
        command: "thumb".into(),
        alpha,
        nu: a.nu,
        upper_quantile: t_quantile(1.0 - alpha, nu)?,
        ratio: THUMB_FACTOR,
        t_bound: r.t_bound,
        p_threshold: r.p_threshold,
    })
}
