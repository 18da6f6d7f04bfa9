use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use gausep::config::{Resolved, RunConfig};
use gausep::dynamics;
use gausep::fock::{self, DensityMatrix, FockConfig, FockGenerator};
use gausep::generator::build_generator;
use gausep::locc::{self, Synthesis};
use gausep::par::Execution;
use gausep::separability::{self, BoundKind, ThresholdVerdict};
use gausep::sweep::{self, SweepRow, SweepSpec};
use gausep::symplectic;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

const TROTTER_FLOOR: f64 = 1e-12;

/// Gaussian separability thresholds, evolutions, LOCC checks and sweeps.
///
/// Exit codes: 0 satisfied, 1 error, 2 bound violated or check failed, 3 protocol infeasible.
#[derive(Parser, Debug)]
#[command(name = "gausep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the separability bounds of a model or physical scenario.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here instead of only printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Margin tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evolve the covariance matrix and write a CSV time series.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// PPT tolerance for the physicality flag.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Synthesize an LOCC protocol for the model and check it against the target generator.
    LoccVerify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Add Fock-space channel residuals (1+1-mode models only).
        #[arg(long)]
        oracle: bool,
        /// Generator-match tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate observables over a parameter grid and write one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep specification; defaults to the `sweep` field of the config.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 1 runs sequentially, 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GAUSEP_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Threshold { config, out, tol } => cmd_threshold(&config, out.as_deref(), tol),
        Command::Evolve {
            config,
            out,
            t,
            steps,
            tol,
        } => cmd_evolve(&config, out.as_deref(), t, steps, tol),
        Command::LoccVerify {
            config,
            out,
            t,
            dt,
            oracle,
            tol,
        } => cmd_locc_verify(&config, out.as_deref(), t, dt, oracle, tol),
        Command::Sweep {
            config,
            sweep,
            out,
            jobs,
        } => cmd_sweep(&config, sweep.as_deref(), &out, jobs),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_config(path: &Path) -> Result<(RunConfig, Resolved)> {
    let cfg = RunConfig::from_value(read_json(path)?).with_context(|| format!("invalid config {}", path.display()))?;
    let resolved = cfg.resolve().with_context(|| format!("invalid config {}", path.display()))?;
    Ok((cfg, resolved))
}

fn emit_report(report: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    println!("{text}");
    if let Some(p) = out {
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn verdict_json(v: &ThresholdVerdict) -> Value {
    json!({
        "bound": v.bound_kind,
        "margin": v.margin,
        "satisfied": v.satisfied,
        "necessary_and_sufficient": v.necessary_and_sufficient,
    })
}

fn cmd_threshold(config: &Path, out: Option<&Path>, tol: Option<f64>) -> Result<u8> {
    let (cfg, r) = load_config(config)?;
    let primary = match tol {
        Some(tol) => separability::threshold_tol(&r.model, tol),
        None => r.threshold(),
    };
    let mut verdicts = vec![verdict_json(&primary)];
    if primary.bound_kind == BoundKind::Rank1 {
        if let Ok(general) = r.model.general_embedding() {
            let (k, sa, sb) = r.model.rates();
            let tol = tol.unwrap_or(separability::TOL_MARGIN) * k.max(sa).max(sb).min(1.0);
            verdicts.push(verdict_json(&separability::threshold_tol(&general, tol)));
        }
    }
    let (q_a, q_b, _) = r.model.noise_blocks();
    let whitened = locc::whiten_coupling(&q_a, &q_b, &r.model.coupling_block());
    let mut report = json!({
        "verdicts": verdicts,
        "whitened_max_singular_value": whitened.max_singular_value(),
        "whitened_range_residual": whitened.range_residual,
        "satisfied": primary.satisfied,
    });
    if let Some(sc) = &cfg.scenario {
        let v = sc.verdict()?;
        report["si"] = json!({
            "lhs": v.lhs,
            "rhs": v.rhs,
            "margin": v.margin,
            "entanglement_possible": v.entanglement_possible,
        });
    }
    emit_report(&report, out)?;
    Ok(if primary.satisfied { EXIT_OK } else { EXIT_VIOLATED })
}

fn csv_writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn cmd_evolve(config: &Path, out: Option<&Path>, t: Option<f64>, steps: Option<usize>, tol: Option<f64>) -> Result<u8> {
    let (mut cfg, r) = load_config(config)?;
    if t.is_some() {
        cfg.t = t;
    }
    let t = cfg.require_t()?;
    let steps = steps.or(cfg.steps).unwrap_or(100).max(1);
    let tol = tol.unwrap_or(separability::TOL_PPT);
    let gen = build_generator(&r.model)?;
    let series = dynamics::evolve_series(&gen, &r.v0, t, steps)?;
    let mut w = csv_writer(out)?;
    w.write_record(["t", "nu_tilde_minus", "log_negativity", "physical"])?;
    for (k, v) in series.iter().enumerate() {
        let ppt = separability::ppt_multimode_tol(v, tol)?;
        let ln = separability::log_negativity(v)?;
        let physical = symplectic::is_physical(v, tol);
        let tk = t * k as f64 / steps as f64;
        w.write_record([fmt(tk), fmt(ppt.min_sympl_eig), fmt(ln), (physical as u8).to_string()])?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

/// Local error of one Kraus-level protocol step against the semigroup of its effective generator.
fn oracle_residual(protocol: &locc::LoccProtocol, eff: &gausep::generator::GkslGenerator, dt: f64) -> Result<f64> {
    let cfg = FockConfig {
        max_step: dt / 20.0,
        ..FockConfig::default()
    };
    let rho0 = DensityMatrix::vacuum(protocol.layout, cfg.cutoff);
    let kraus = fock::kraus_protocol_step(protocol, &rho0, dt)?;
    let gen = FockGenerator::from_gaussian(eff, cfg.cutoff)?;
    let run = fock::lindblad_integrate(&gen, &rho0, dt, &cfg)?;
    if !run.trusted {
        log::warn!("Fock truncation leakage {:e} above limit", run.max_leakage);
    }
    Ok(fock::trace_distance(&kraus.rho, &run.rho))
}

fn cmd_locc_verify(
    config: &Path,
    out: Option<&Path>,
    t: Option<f64>,
    dt: Option<f64>,
    oracle: bool,
    tol: Option<f64>,
) -> Result<u8> {
    let (mut cfg, r) = load_config(config)?;
    if t.is_some() {
        cfg.t = t;
    }
    if dt.is_some() {
        cfg.dt = dt;
    }
    let t = cfg.t.unwrap_or(1.0);
    let dt = cfg.dt.unwrap_or(t / 16.0);
    if !(t > 0.0 && dt > 0.0 && dt <= t) {
        bail!("need 0 < dt <= t, got dt = {dt}, t = {t}");
    }
    let tol = tol.unwrap_or(1e-10);
    let protocol = match locc::synthesize(&r.model, cfg.branch)? {
        Synthesis::Feasible(p) => p,
        Synthesis::Infeasible { reason, margin } => {
            emit_report(&json!({ "feasible": false, "reason": reason, "margin": margin }), out)?;
            return Ok(EXIT_INFEASIBLE);
        }
    };
    let target = build_generator(&r.model)?;
    let eff = locc::effective_generator(&protocol)?;
    let residual = eff.generator.distance(&target);
    let n = ((t / dt).round() as usize).max(1);
    let trotter_error = locc::trotter_error(&protocol, &target, &r.v0, t, n)?;
    // Commuting pieces compose exactly and leave no error to measure an order from.
    let order = if trotter_error > TROTTER_FLOOR * gausep::linalg::max_abs(&r.v0.matrix).max(1.0) {
        Some(locc::trotter_order(&protocol, &target, &r.v0, t, n)?)
    } else {
        None
    };
    let mut report = json!({
        "feasible": true,
        "channels": protocol.channels.len(),
        "generator_residual": residual,
        "generator_match": residual <= tol,
        "trotter_steps": n,
        "trotter_error": trotter_error,
        "trotter_order": order,
    });
    if oracle {
        if r.model.layout.modes() != 2 {
            log::warn!("Fock oracle supports two modes only; skipped");
            report["oracle"] = Value::Null;
        } else {
            let e1 = oracle_residual(&protocol, &eff.generator, dt)?;
            let e2 = oracle_residual(&protocol, &eff.generator, dt / 2.0)?;
            report["oracle"] = json!({
                "cutoff": FockConfig::default().cutoff,
                "residual_dt": e1,
                "residual_half_dt": e2,
                "ratio": e1 / e2,
            });
        }
    }
    emit_report(&report, out)?;
    Ok(if residual <= tol { EXIT_OK } else { EXIT_VIOLATED })
}

/// Progress record kept next to a sweep CSV until the sweep completes.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Checkpoint {
    fingerprint: String,
    rows_done: usize,
}

fn checkpoint_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".ckpt");
    out.with_file_name(name)
}

/// Rows already on disk that belong to the same sweep, or `None` for a fresh start.
fn resume_rows(out: &Path, ckpt: &Path, fingerprint: &str) -> Result<Option<Vec<csv::StringRecord>>> {
    if !ckpt.exists() || !out.exists() {
        return Ok(None);
    }
    let c: Checkpoint = match serde_json::from_str(&fs::read_to_string(ckpt)?) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("ignoring unreadable checkpoint {}: {e}", ckpt.display());
            return Ok(None);
        }
    };
    if c.fingerprint != fingerprint {
        log::warn!("checkpoint belongs to a different sweep; starting over");
        return Ok(None);
    }
    let mut rdr = csv::Reader::from_path(out)?;
    let rows: Vec<csv::StringRecord> = rdr.records().take(c.rows_done).collect::<std::result::Result<_, _>>()?;
    if rows.len() < c.rows_done {
        log::warn!("output shorter than checkpoint; starting over");
        return Ok(None);
    }
    Ok(Some(rows))
}

fn row_record(row: &SweepRow) -> Vec<String> {
    let mut rec = vec![row.index.to_string()];
    rec.extend(row.coords.iter().map(|&x| fmt(x)));
    rec.extend(row.values.iter().map(|&x| fmt(x)));
    rec.push(row.error.clone().unwrap_or_default());
    rec
}

fn cmd_sweep(config: &Path, sweep_path: Option<&Path>, out: &Path, jobs: usize) -> Result<u8> {
    let mut base = read_json(config)?;
    let spec: SweepSpec = match sweep_path {
        Some(p) => serde_json::from_value(read_json(p)?).with_context(|| format!("invalid sweep {}", p.display()))?,
        None => {
            let v = base
                .get("sweep")
                .cloned()
                .context("config has no `sweep` field and no --sweep file was given")?;
            serde_json::from_value(v).context("invalid `sweep` field")?
        }
    };
    spec.validate()?;
    if let Value::Object(map) = &mut base {
        map.remove("sweep");
    }
    // Surface config errors once instead of on every row.
    RunConfig::from_value(base.clone()).context("invalid config")?;

    let fingerprint = serde_json::to_string(&json!({ "config": base, "sweep": spec }))?;
    let ckpt = checkpoint_path(out);
    let header = spec.header();
    let done_rows = resume_rows(out, &ckpt, &fingerprint)?;
    let start = done_rows.as_ref().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    w.write_record(&header)?;
    for rec in done_rows.iter().flatten() {
        w.write_record(rec)?;
    }
    if start > 0 {
        log::info!("resuming sweep at row {start}");
    }

    let exec = Execution::from_jobs(jobs);
    let chunk = 16 * jobs.max(1);
    let total = spec.len();
    let mut failed = 0;
    let mut next = start;
    while next < total {
        let end = (next + chunk).min(total);
        for row in sweep::run_sweep_range(&base, &spec, exec, next..end)? {
            failed += row.error.is_some() as usize;
            w.write_record(row_record(&row))?;
        }
        w.flush()?;
        next = end;
        let c = Checkpoint {
            fingerprint: fingerprint.clone(),
            rows_done: next,
        };
        fs::write(&ckpt, serde_json::to_string(&c)?)?;
    }
    drop(w);
    fs::remove_file(&ckpt).ok();
    if failed > 0 {
        log::warn!("{failed} of {total} points failed");
    }
    Ok(EXIT_OK)
}
