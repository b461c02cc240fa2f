//! `zetalab`: deterministic command-line reporting over the zetalab
//! library: pointwise zeta records, tower geometry reports, transformed
//! Gram matrices, and convergence reports for the limit functionals.
//!
//! Exit codes: 0 success, 2 domain error, 3 resource/domain exhaustion,
//! 4 usage error.

// Guards written as `!(x > 0.0)` intentionally classify NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use config::{ConfigSources, FlagOverrides, OutputFormat, RunConfig};
use zetalab::fourier::{standard_modes, FourierError, TransformSpec, WeightKind, ZetaTransform};
use zetalab::functional::{
    self, tau_grid_for_w_targets, ConvergenceReport, FermatRational, FermatVerdict,
    FunctionalError, F2Kind, DEFAULT_W_TARGETS,
};
use zetalab::ladder::{Ladder, LadderError};
use zetalab::zeta::{self, ZetaError, EM_PRACTICAL_CEILING};
use zetalab::FourierMode;

#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Resource(String),
    Usage(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Usage(_) => 4,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Domain(m) => format!("domain error: {m}"),
            CliError::Resource(m) => format!("resource error: {m}"),
            CliError::Usage(m) => format!("usage error: {m}"),
            CliError::Io(e) => format!("io error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<ZetaError> for CliError {
    fn from(e: ZetaError) -> Self {
        match e {
            ZetaError::InvalidPolicy(_) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<LadderError> for CliError {
    fn from(e: LadderError) -> Self {
        match e {
            LadderError::AboveDomain { .. } => CliError::Resource(e.to_string()),
            LadderError::Quad(zetalab::quad::QuadError::MemoryBudget { .. }) => {
                CliError::Resource(e.to_string())
            }
            LadderError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            LadderError::Io(io) => CliError::Io(io),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<FourierError> for CliError {
    fn from(e: FourierError) -> Self {
        match e {
            FourierError::Ladder(l) => l.into(),
            FourierError::BadMode(_) | FourierError::BadSpec(_) | FourierError::TooManyModes(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<FunctionalError> for CliError {
    fn from(e: FunctionalError) -> Self {
        match e {
            FunctionalError::Ladder(l) => l.into(),
            FunctionalError::Fourier(f) => f.into(),
            FunctionalError::Overflow(_) => CliError::Resource(e.to_string()),
            FunctionalError::BadArgument(_)
            | FunctionalError::ShortGrid { .. }
            | FunctionalError::DegenerateGrid => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "zetalab", version, about = "Critical-line zeta laboratory", disable_help_subcommand = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Config file of `key = value` lines, merged under explicit flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ladder cache file: loaded when compatible, written after builds.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    domain_hi: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    c0: Option<f64>,
    #[arg(long, global = true)]
    newton_tol: Option<f64>,
    #[arg(long, global = true)]
    max_newton_iters: Option<u32>,
    #[arg(long, global = true)]
    rs_terms: Option<u32>,
    #[arg(long, global = true)]
    em_crossover: Option<f64>,
    #[arg(long, global = true)]
    em_terms: Option<u32>,
    #[arg(long, global = true)]
    target_rel_err: Option<f64>,
    /// Cumulative-table nodes per unit mean zero-spacing.
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// Worker threads (0 = library default); env ZETALAB_WORKERS overrides
    /// the config file.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise record {t, Z, theta, abs2}.
    Zeta {
        #[arg(long, conflicts_with = "batch")]
        t: Option<f64>,
        /// File of heights, one per line; emits CSV rows in input order.
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Reverse tower with gap and increment reports.
    Ladder {
        #[arg(long)]
        t_base: f64,
        #[arg(long)]
        k: u32,
    },
    /// Gram matrix of the transformed system (CSV or JSON).
    Ortho {
        #[arg(long)]
        t_base: f64,
        #[arg(long, default_value_t = 0.5)]
        l: f64,
        #[arg(long)]
        k: u32,
        /// Highest mode index M; modes are unit, cos1, sin1, ..., cosM, sinM.
        #[arg(long, default_value_t = 3)]
        modes: u32,
        /// Divide each weight factor by omega_hat (exact normalization).
        #[arg(long, default_value_t = false)]
        omega_normalized: bool,
    },
    /// Convergence reports for the limit functionals.
    Functional {
        /// One of: t1, t2, f1, f2, lnpow, quotient.
        #[arg(long)]
        which: String,
        /// Grid of T (or tau) values, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Substituted-height targets for t1/t2 when no grid is given.
        #[arg(long, value_delimiter = ',')]
        w_targets: Option<Vec<f64>>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        l: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Mode label for t1/t2: unit, cosN, or sinN.
        #[arg(long, default_value = "cos1")]
        mode: String,
        /// Fermat tuple x,y,z,n; required for t2, optional for f1/f2 (where
        /// it substitutes l and reports the away-from-reference verdict).
        #[arg(long)]
        fermat: Option<String>,
        /// cos2 or sin2, for f2.
        #[arg(long, default_value = "cos2")]
        kind: String,
        /// Frequency convention for the Fermat form of f2:
        /// self-consistent or as-printed.
        #[arg(long, default_value = "self-consistent")]
        convention: String,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version print normally; everything else is a usage error.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zetalab: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => config::parse_config_file(p)?,
        None => Default::default(),
    };
    let flags = FlagOverrides {
        domain_hi: cli.global.domain_hi,
        gamma: cli.global.gamma,
        c0: cli.global.c0,
        newton_tol: cli.global.newton_tol,
        max_newton_iters: cli.global.max_newton_iters,
        rs_correction_terms: cli.global.rs_terms,
        em_crossover: cli.global.em_crossover,
        em_terms: cli.global.em_terms,
        target_rel_err: cli.global.target_rel_err,
        resolution: cli.global.resolution,
        workers: cli.global.workers,
        format: cli.global.format,
    };
    let rc = ConfigSources { file, flags }.resolve()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(rc.workers)
        .build()
        .map_err(|e| CliError::Resource(e.to_string()))?;
    let out = cli.global.out.clone();
    let cache = cli.global.cache.clone();
    pool.install(|| dispatch(cli.command, &rc, out, cache))
}

fn dispatch(
    cmd: Command,
    rc: &RunConfig,
    out: Option<PathBuf>,
    cache: Option<PathBuf>,
) -> Result<(), CliError> {
    let text = match cmd {
        Command::Zeta { t, batch } => cmd_zeta(rc, t, batch)?,
        Command::Ladder { t_base, k } => cmd_ladder(rc, &cache, t_base, k)?,
        Command::Ortho {
            t_base,
            l,
            k,
            modes,
            omega_normalized,
        } => cmd_ortho(rc, &cache, t_base, l, k, modes, omega_normalized)?,
        Command::Functional {
            which,
            grid,
            w_targets,
            x,
            l,
            k,
            m,
            mode,
            fermat,
            kind,
            convention,
            sigma,
        } => cmd_functional(
            rc, &cache, &which, grid, w_targets, x, l, k, m, &mode, fermat, &kind, &convention,
            sigma,
        )?,
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn config_comment(rc: &RunConfig) -> String {
    let json = serde_json::to_string(rc).expect("config serializes");
    format!("# run_config = {json}\n# schema_version = {}\n", rc.schema_version)
}

fn get_ladder(rc: &RunConfig, cache: &Option<PathBuf>) -> Result<Ladder, CliError> {
    if let Some(path) = cache {
        if path.exists() {
            let lad = Ladder::load_cache(path)?;
            if lad.config() == &rc.ladder_config() && lad.policy() == &rc.policy() {
                return Ok(lad);
            }
            eprintln!(
                "zetalab: cache {} does not match the requested config; rebuilding",
                path.display()
            );
        }
    }
    let lad = Ladder::build(rc.ladder_config(), rc.policy(), rc.resolution)?;
    if let Some(path) = cache {
        lad.save_cache(path)?;
    }
    Ok(lad)
}

// ---------------------------------------------------------------------------
// zeta
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct ZetaRecord {
    t: f64,
    z: f64,
    theta: f64,
    abs2: f64,
}

fn zeta_record(rc: &RunConfig, t: f64) -> Result<ZetaRecord, CliError> {
    let pol = rc.policy();
    if t > EM_PRACTICAL_CEILING {
        eprintln!(
            "zetalab: warning: t = {t:.3e} beyond the Euler-Maclaurin practical ceiling {EM_PRACTICAL_CEILING:.1e}"
        );
    }
    if !pol.meets_target_at(t) {
        eprintln!(
            "zetalab: warning: requested target_rel_err {:.1e} unachievable at t = {t:.6e} with {} Riemann-Siegel terms (bound {:.1e})",
            pol.target_rel_err,
            pol.rs_correction_terms,
            pol.rs_error_bound(t)
        );
    }
    let z = zeta::hardy_z(t, &pol)?;
    Ok(ZetaRecord {
        t,
        z,
        theta: zeta::theta(t, &pol)?,
        abs2: zeta::abs2_critical(t, &pol)?,
    })
}

fn cmd_zeta(rc: &RunConfig, t: Option<f64>, batch: Option<PathBuf>) -> Result<String, CliError> {
    match (t, batch) {
        (Some(t), None) => {
            let rec = zeta_record(rc, t)?;
            match rc.format {
                OutputFormat::Json => {
                    #[derive(serde::Serialize)]
                    struct Doc<'a> {
                        schema_version: u32,
                        run_config: &'a RunConfig,
                        #[serde(flatten)]
                        record: ZetaRecord,
                    }
                    Ok(format!(
                        "{}\n",
                        serde_json::to_string_pretty(&Doc {
                            schema_version: rc.schema_version,
                            run_config: rc,
                            record: rec,
                        })
                        .expect("serializes")
                    ))
                }
                OutputFormat::Csv => Ok(format!(
                    "{}t,z,theta,abs2\n{},{},{},{}\n",
                    config_comment(rc),
                    fmt17(rec.t),
                    fmt17(rec.z),
                    fmt17(rec.theta),
                    fmt17(rec.abs2)
                )),
            }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)?;
            let mut body = String::from("t,z,theta,abs2\n");
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let t: f64 = line
                    .parse()
                    .map_err(|e| CliError::Usage(format!("batch line {line:?}: {e}")))?;
                let rec = zeta_record(rc, t)?;
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt17(rec.t),
                    fmt17(rec.z),
                    fmt17(rec.theta),
                    fmt17(rec.abs2)
                ));
            }
            Ok(format!("{}{}", config_comment(rc), body))
        }
        _ => Err(CliError::Usage("zeta needs exactly one of --t or --batch".into())),
    }
}

// ---------------------------------------------------------------------------
// ladder
// ---------------------------------------------------------------------------

fn cmd_ladder(
    rc: &RunConfig,
    cache: &Option<PathBuf>,
    t_base: f64,
    k: u32,
) -> Result<String, CliError> {
    let lad = get_ladder(rc, cache)?;
    let tower = lad.reverse_tower(t_base, k)?;
    let gap = if k >= 2 {
        Some(lad.gap_report(&tower)?)
    } else {
        None
    };
    let increments = if k >= 1 {
        Some(lad.increment_report(&tower)?)
    } else {
        None
    };
    #[derive(serde::Serialize)]
    struct Doc<'a> {
        schema_version: u32,
        run_config: &'a RunConfig,
        tower: zetalab::ReverseTower,
        gap_report: Option<zetalab::ladder::GapReport>,
        increment_report: Option<zetalab::ladder::IncrementReport>,
    }
    Ok(format!(
        "{}\n",
        serde_json::to_string_pretty(&Doc {
            schema_version: rc.schema_version,
            run_config: rc,
            tower,
            gap_report: gap,
            increment_report: increments,
        })
        .expect("serializes")
    ))
}

// ---------------------------------------------------------------------------
// ortho
// ---------------------------------------------------------------------------

fn cmd_ortho(
    rc: &RunConfig,
    cache: &Option<PathBuf>,
    t_base: f64,
    l: f64,
    k: u32,
    m_max: u32,
    omega_normalized: bool,
) -> Result<String, CliError> {
    let lad = get_ladder(rc, cache)?;
    let modes = standard_modes(m_max, l)?;
    let spec = TransformSpec::new(t_base, k, l);
    let weight = if omega_normalized {
        WeightKind::OmegaNormalized
    } else {
        WeightKind::Raw
    };
    let tr = ZetaTransform::new(&lad, spec, weight)?;
    let gram = tr.gram(&modes)?;
    match rc.format {
        OutputFormat::Csv => {
            let mut out = config_comment(rc);
            out.push_str("mode");
            for m in &modes {
                out.push(',');
                out.push_str(&m.label());
            }
            out.push('\n');
            for (i, row) in gram.iter().enumerate() {
                out.push_str(&modes[i].label());
                for v in row {
                    out.push(',');
                    out.push_str(&fmt17(*v));
                }
                out.push('\n');
            }
            Ok(out)
        }
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct Doc<'a> {
                schema_version: u32,
                run_config: &'a RunConfig,
                spec: TransformSpec,
                modes: Vec<String>,
                gram: Vec<Vec<f64>>,
            }
            Ok(format!(
                "{}\n",
                serde_json::to_string_pretty(&Doc {
                    schema_version: rc.schema_version,
                    run_config: rc,
                    spec,
                    modes: modes.iter().map(|m| m.label()).collect(),
                    gram,
                })
                .expect("serializes")
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// functional
// ---------------------------------------------------------------------------

fn parse_mode(label: &str, l: f64) -> Result<FourierMode, CliError> {
    let mk = |r: Result<FourierMode, FourierError>| r.map_err(CliError::from);
    if label == "unit" {
        return mk(FourierMode::unit(l));
    }
    if let Some(m) = label.strip_prefix("cos") {
        let m: u32 = m
            .parse()
            .map_err(|_| CliError::Usage(format!("bad mode label {label:?}")))?;
        return mk(FourierMode::cosine(m, l));
    }
    if let Some(m) = label.strip_prefix("sin") {
        let m: u32 = m
            .parse()
            .map_err(|_| CliError::Usage(format!("bad mode label {label:?}")))?;
        return mk(FourierMode::sine(m, l));
    }
    Err(CliError::Usage(format!(
        "bad mode label {label:?} (expected unit, cosN, sinN)"
    )))
}

fn parse_fermat(raw: &str) -> Result<FermatRational, CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "fermat tuple must be x,y,z,n: got {raw:?}"
        )));
    }
    // x, y, z are arbitrary-precision; only the exponent is bounded.
    let big = |s: &str| -> Result<num::BigUint, CliError> {
        s.parse::<num::BigUint>()
            .map_err(|e| CliError::Usage(format!("fermat tuple {raw:?}: {e}")))
    };
    let n: u32 = parts[3]
        .parse()
        .map_err(|e| CliError::Usage(format!("fermat exponent {:?}: {e}", parts[3])))?;
    FermatRational::from_big(big(parts[0])?, big(parts[1])?, big(parts[2])?, n)
        .map_err(CliError::from)
}

#[derive(serde::Serialize)]
struct FunctionalDoc<'a> {
    schema_version: u32,
    run_config: &'a RunConfig,
    which: String,
    report: ConvergenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    fermat: Option<FermatRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<FermatVerdict>,
}

fn render_report(rc: &RunConfig, doc: FunctionalDoc) -> String {
    match rc.format {
        OutputFormat::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).expect("serializes")
        ),
        OutputFormat::Csv => {
            let mut out = config_comment(rc);
            out.push_str(&format!("# which = {}\n", doc.which));
            if let Some(v) = &doc.verdict {
                out.push_str(&format!(
                    "# verdict = {}\n",
                    serde_json::to_string(v).expect("serializes")
                ));
            }
            out.push_str(&format!(
                "# extrapolated_limit = {}\n# margin = {}\n# trend_ok = {}\n",
                fmt17(doc.report.extrapolated_limit),
                fmt17(doc.report.margin),
                doc.report.trend_ok
            ));
            out.push_str(&doc.report.to_csv());
            out
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_functional(
    rc: &RunConfig,
    cache: &Option<PathBuf>,
    which: &str,
    grid: Option<Vec<f64>>,
    w_targets: Option<Vec<f64>>,
    x: Option<f64>,
    l: f64,
    k: u32,
    m: u32,
    mode_label: &str,
    fermat: Option<String>,
    kind: &str,
    convention: &str,
    sigma: f64,
) -> Result<String, CliError> {
    let lad = get_ladder(rc, cache)?;
    let t_grid = grid
        .clone()
        .unwrap_or_else(|| vec![1e3, 5e3, 2e4].into_iter().filter(|t| *t < rc.domain_hi).collect());

    match which {
        "t1" | "T1" => {
            let mode = parse_mode(mode_label, l)?;
            let x = x.ok_or_else(|| CliError::Usage("t1 needs --x".into()))?;
            let taus = match grid {
                Some(g) => g,
                None => {
                    let w = w_targets.unwrap_or_else(|| DEFAULT_W_TARGETS.to_vec());
                    tau_grid_for_w_targets(x, k, mode.norm(), &w)?
                }
            };
            let report = functional::theorem1(&lad, x, l, k, &mode, &taus)?;
            Ok(render_report(
                rc,
                FunctionalDoc {
                    schema_version: rc.schema_version,
                    run_config: rc,
                    which: "t1".into(),
                    report,
                    fermat: None,
                    verdict: None,
                },
            ))
        }
        "t2" | "T2" => {
            let raw = fermat.ok_or_else(|| CliError::Usage("t2 needs --fermat x,y,z,n".into()))?;
            let fr = parse_fermat(&raw)?;
            let mode = parse_mode(mode_label, l)?;
            let taus = match grid {
                Some(g) => g,
                None => {
                    let w = w_targets.unwrap_or_else(|| DEFAULT_W_TARGETS.to_vec());
                    tau_grid_for_w_targets(fr.real_value(), k, mode.norm(), &w)?
                }
            };
            let (report, verdict) =
                functional::fermat_zeta_condition(&lad, &fr, l, k, &mode, &taus)?;
            Ok(render_report(
                rc,
                FunctionalDoc {
                    schema_version: rc.schema_version,
                    run_config: rc,
                    which: "t2".into(),
                    report,
                    fermat: Some(fr),
                    verdict: Some(verdict),
                },
            ))
        }
        "f1" | "F1" => {
            let (report, fr, verdict) = match fermat {
                None => (functional::functional_f1(&lad, l, k, &t_grid)?, None, None),
                Some(raw) => {
                    let fr = parse_fermat(&raw)?;
                    let (report, verdict) = functional::fermat_f1(&lad, &fr, k, &t_grid)?;
                    (report, Some(fr), Some(verdict))
                }
            };
            Ok(render_report(
                rc,
                FunctionalDoc {
                    schema_version: rc.schema_version,
                    run_config: rc,
                    which: "f1".into(),
                    report,
                    fermat: fr,
                    verdict,
                },
            ))
        }
        "f2" | "F2" => {
            let kind = match kind {
                "cos2" => F2Kind::Cos2,
                "sin2" => F2Kind::Sin2,
                other => {
                    return Err(CliError::Usage(format!(
                        "bad --kind {other:?} (expected cos2 or sin2)"
                    )))
                }
            };
            let (report, fr, verdict) = match fermat {
                None => (
                    functional::functional_f2(&lad, l, k, m, &t_grid, kind)?,
                    None,
                    None,
                ),
                Some(raw) => {
                    let fr = parse_fermat(&raw)?;
                    let conv = match convention {
                        "self-consistent" => functional::FrequencyConvention::SelfConsistent,
                        "as-printed" => functional::FrequencyConvention::AsPrinted,
                        other => {
                            return Err(CliError::Usage(format!(
                                "bad --convention {other:?} (expected self-consistent or as-printed)"
                            )))
                        }
                    };
                    let (report, verdict) =
                        functional::fermat_f2(&lad, &fr, k, m, &t_grid, conv)?;
                    (report, Some(fr), Some(verdict))
                }
            };
            Ok(render_report(
                rc,
                FunctionalDoc {
                    schema_version: rc.schema_version,
                    run_config: rc,
                    which: "f2".into(),
                    report,
                    fermat: fr,
                    verdict,
                },
            ))
        }
        "lnpow" => {
            let mut out = config_comment(rc);
            out.push_str("t,ratio_k,ratio_root\n");
            for &t in &t_grid {
                let est = functional::ln_power_estimator(&lad, t, k)?;
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt17(t),
                    fmt17(est.ratio_k),
                    fmt17(est.ratio_root)
                ));
            }
            Ok(out)
        }
        "quotient" => {
            let mut out = config_comment(rc);
            out.push_str("t,quotient\n");
            for &t in &t_grid {
                let q = functional::sigma_quotient(&lad, sigma, t)?;
                out.push_str(&format!("{},{}\n", fmt17(t), fmt17(q)));
            }
            Ok(out)
        }
        other => Err(CliError::Usage(format!(
            "unknown functional {other:?} (expected t1, t2, f1, f2, lnpow, quotient)"
        ))),
    }
}
