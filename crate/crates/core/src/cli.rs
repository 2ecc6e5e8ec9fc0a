//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for a config or argument problem, 3 when an
//! experiment or trace fails at run time.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{Config, ConfigError};
use crate::controller::{
    emit_waveform, parse_binary_stream, parse_text_script, replay, script::looks_like_text, write_event_log,
    write_waveform_csv,
};
use crate::experiments::feedback::{condition_power, write_feedback_csv};
use crate::experiments::result::VERSION;
use crate::experiments::{
    run_experiment, run_with_thermal_feedback, ControlPath, ExperimentKind, ExperimentResult, ExperimentSpec,
    FeedbackCondition, Setup,
};
use crate::thermal::{scale_noise, thermal_state};

#[derive(Debug, Parser)]
#[command(name = "cryospin", version, about = "Cryo-CMOS controller and spin-qubit co-simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// JSON config; the built-in default when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of every experiment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if needed.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for grid points.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Shots per grid point for every experiment.
    #[arg(long, global = true)]
    pub shots_override: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Rabi chevron over drive frequency and pulse length.
    Rabi,
    /// Ramsey free induction decay.
    Ramsey,
    /// Hahn echo decay.
    Hahn,
    /// CPMG decays and the noise spectrum they imply.
    CpmgPsd,
    /// Single-qubit randomized benchmarking.
    Rb,
    /// Exchange oscillations without decoupling.
    Cz,
    /// Exchange oscillations with an echo pulse on both spins.
    Dcz,
    /// Chevron under a global drive, Stark-shifted into resonance.
    GlobalRabi,
    /// Line centre against exchange-gate level.
    StarkCal,
    /// Power sweep of fridge and electron temperatures.
    ThermalSweep {
        /// Also rerun the feedback experiments under each controller condition.
        #[arg(long)]
        feedback: bool,
    },
    /// Replay a command stream and dump the emitted waveform and event log.
    ControllerTrace {
        #[arg(long)]
        script: PathBuf,
        /// End of the trace, seconds; twice the last input time by default.
        #[arg(long)]
        horizon: Option<f64>,
        /// Sample spacing; by default only segment boundaries are written.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Check the config against the schema and print its hash.
    ValidateConfig,
}

impl Cmd {
    fn experiment_kind(&self) -> Option<ExperimentKind> {
        use ExperimentKind::*;
        Some(match self {
            Cmd::Rabi => RabiChevron,
            Cmd::Ramsey => Ramsey,
            Cmd::Hahn => Hahn,
            Cmd::CpmgPsd => CpmgPsd,
            Cmd::Rb => Rb1q,
            Cmd::Cz => CzFid,
            Cmd::Dcz => Dcz,
            Cmd::GlobalRabi => GlobalRabi,
            Cmd::StarkCal => StarkCal,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn rt<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| rt(format!("{}: {e}", path.display())))
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(rt)?;
    let mut buf = Vec::new();
    let outcome = pool.install(|| dispatch(cli, &cfg, &mut buf));
    stdout.write_all(&buf).map_err(rt)?;
    outcome
}

fn dispatch<W: Write>(cli: &Cli, cfg: &Config, stdout: &mut W) -> Result<(), CliError> {
    if let Cmd::ValidateConfig = cli.command {
        writeln!(stdout, "ok config_hash={}", cfg.hash()).map_err(rt)?;
        return Ok(());
    }
    fs::create_dir_all(&cli.out).map_err(|e| rt(format!("{}: {e}", cli.out.display())))?;
    if let Some(kind) = cli.command.experiment_kind() {
        let spec = prepared_spec(cli, cfg, kind.command())?;
        let setup = setup_for(cfg, &spec)?;
        let res = run_experiment(&spec, &setup).map_err(rt)?;
        write_result(&cli.out, kind.command(), &res)?;
        summarize(stdout, kind.command(), &res).map_err(rt)?;
        return Ok(());
    }
    match &cli.command {
        Cmd::ThermalSweep { feedback } => thermal_sweep(cli, cfg, *feedback, stdout),
        Cmd::ControllerTrace { script, horizon, dt } => controller_trace(cli, cfg, script, *horizon, *dt, stdout),
        _ => unreachable!("experiment and validate commands handled above"),
    }
}

/// Spec from the config with the command-line seed and shot overrides.
fn prepared_spec(cli: &Cli, cfg: &Config, key: &str) -> Result<ExperimentSpec, CliError> {
    let mut spec = cfg.experiment(key)?.clone();
    spec.seed = Some(cli.seed.unwrap_or_else(|| spec.effective_seed(&cfg.noise)));
    if let Some(n) = cli.shots_override {
        spec.shots = n;
    }
    spec.validate().map_err(|e| ConfigError::Schema {
        key: format!("experiments.{key}"),
        message: e.to_string(),
    })?;
    Ok(spec)
}

/// RT runs see an unpowered controller; CRYO_CMOS runs see the configured
/// oscillator plus one locked, armed cell.
pub fn setup_for(cfg: &Config, spec: &ExperimentSpec) -> Result<Setup, CliError> {
    let power = match spec.control_path {
        ControlPath::Rt => 0.0,
        ControlPath::CryoCmos => {
            let cond = FeedbackCondition {
                armed_cells: 1,
                ..FeedbackCondition::idle("cryo_cmos")
            };
            condition_power(&cfg.controller, &cond).map_err(rt)?.0
        }
    };
    let ts = thermal_state(&cfg.thermal, power);
    Ok(Setup {
        spin: cfg.spin,
        noise: scale_noise(&cfg.noise, ts.t_e, cfg.thermal.t_ref),
        controller: cfg.controller.clone(),
        thermal: Some(ts),
        config_hash: cfg.hash(),
    })
}

fn write_result(dir: &Path, stem: &str, res: &ExperimentResult) -> Result<(), CliError> {
    let mut w = create(dir, &format!("{stem}.csv"))?;
    res.write_csv(&mut w).and_then(|_| w.flush()).map_err(rt)?;
    let mut w = create(dir, &format!("{stem}.json"))?;
    res.write_json(&mut w).and_then(|_| w.flush()).map_err(rt)?;
    if !res.psd.is_empty() {
        let mut w = create(dir, &format!("{stem}_psd.csv"))?;
        res.write_psd_csv(&mut w).and_then(|_| w.flush()).map_err(rt)?;
    }
    Ok(())
}

fn summarize<W: Write>(out: &mut W, name: &str, res: &ExperimentResult) -> std::io::Result<()> {
    writeln!(
        out,
        "{name}: {} points, seed {}, config {}",
        res.p_blocked.len(),
        res.metadata.seed,
        &res.metadata.config_hash[..res.metadata.config_hash.len().min(12)]
    )?;
    for (k, v) in &res.fit {
        let bound = if v.lower_bound { " (lower bound)" } else { "" };
        writeln!(out, "  {k} = {:.6e} ± {:.2e}{bound}", v.value, v.stderr)?;
    }
    for w in &res.warnings {
        writeln!(out, "  warning: {w}")?;
    }
    Ok(())
}

fn thermal_sweep<W: Write>(cli: &Cli, cfg: &Config, feedback: bool, stdout: &mut W) -> Result<(), CliError> {
    let hash = cfg.hash();
    let seed = cli.seed.unwrap_or(cfg.noise.rng_seed);
    let mut w = create(&cli.out, "thermal_sweep.csv")?;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "# cryospin {VERSION}")?;
        writeln!(w, "# config_hash={hash}")?;
        writeln!(w, "# seed={seed}")?;
        writeln!(w, "power_w,t_mxc_k,t_e_k")?;
        for p in cfg.thermal_sweep.powers() {
            let ts = thermal_state(&cfg.thermal, p);
            writeln!(w, "{:e},{:e},{:e}", p, ts.t_mxc, ts.t_e)?;
        }
        w.flush()
    };
    body().map_err(rt)?;
    writeln!(stdout, "thermal-sweep: {} points", cfg.thermal_sweep.points).map_err(rt)?;
    if !feedback {
        return Ok(());
    }
    let fb = &cfg.thermal_sweep.feedback;
    let mut inner = Vec::new();
    for key in &fb.experiments {
        inner.push((key.clone(), prepared_spec(cli, cfg, key)?));
    }
    let base = Setup {
        config_hash: hash.clone(),
        controller: cfg.controller.clone(),
        ..Setup::new(cfg.spin, cfg.noise)
    };
    let rows = run_with_thermal_feedback(fb, &inner, &base, &cfg.thermal).map_err(rt)?;
    let mut w = create(&cli.out, "feedback.csv")?;
    write_feedback_csv(&mut w, &rows, &hash, seed)
        .and_then(|_| w.flush())
        .map_err(rt)?;
    for r in &rows {
        writeln!(
            stdout,
            "  {}: P = {:.3e} W, T_e = {:.4} K, white scale {:.4}",
            r.condition.name, r.thermal.p_total, r.thermal.t_e, r.white_scale
        )
        .map_err(rt)?;
        for (key, res) in &r.results {
            for q in ["T", "F"] {
                if let Some(v) = res.fit.get(q) {
                    writeln!(stdout, "    {key}.{q} = {:.6e} ± {:.2e}", v.value, v.stderr).map_err(rt)?;
                }
            }
        }
    }
    Ok(())
}

fn controller_trace<W: Write>(
    cli: &Cli,
    cfg: &Config,
    script: &Path,
    horizon: Option<f64>,
    dt: Option<f64>,
    stdout: &mut W,
) -> Result<(), CliError> {
    let bytes = fs::read(script).map_err(|e| rt(format!("{}: {e}", script.display())))?;
    let inputs = if looks_like_text(&bytes) {
        parse_text_script(&String::from_utf8_lossy(&bytes))
    } else {
        parse_binary_stream(&bytes, cfg.controller.spi_frame_period)
    }
    .map_err(|e| rt(format!("{}: {e}", script.display())))?;
    let last = inputs.last().map_or(0.0, |i| i.t);
    let horizon = horizon.unwrap_or(if last > 0.0 { 2.0 * last } else { 1e-6 });
    let dt = dt.unwrap_or(horizon);
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(rt("horizon and dt must be positive"));
    }
    let state = replay(&cfg.controller, &inputs).map_err(rt)?;
    let traces = emit_waveform(&state, &cfg.controller.gate_cells(), horizon, dt);
    let hash = cfg.hash();
    let seed = cli.seed.unwrap_or(cfg.noise.rng_seed);
    let comments = vec![
        format!("cryospin {VERSION}"),
        format!("config_hash={hash}"),
        format!("seed={seed}"),
    ];
    let mut w = create(&cli.out, "waveform.csv")?;
    write_waveform_csv(&mut w, &traces, &comments)
        .and_then(|_| w.flush())
        .map_err(rt)?;
    let meta = serde_json::json!({ "version": VERSION, "config_hash": hash, "seed": seed });
    let mut w = create(&cli.out, "events.jsonl")?;
    write_event_log(&mut w, &state.event_log, Some(&meta))
        .and_then(|_| w.flush())
        .map_err(rt)?;
    for t in &traces {
        writeln!(stdout, "{}: {} segments", t.gate, t.segments.len()).map_err(rt)?;
    }
    writeln!(stdout, "{} events", state.event_log.len()).map_err(rt)?;
    Ok(())
}
