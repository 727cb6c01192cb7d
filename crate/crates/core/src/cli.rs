//! Command-line front end: argument parsing, dispatch and file output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bsm::{qpc_probs, BsmModel};
use crate::config::{parse_grid_spec, Command, RunConfig};
use crate::error::{Error, Result};
use crate::gsm::{
    emit_efficiency_table, gsm_efficiency, gsm_erasure_probs, table_to_csv, table_to_text, GsmSpec,
};
use crate::presets::Preset;
use crate::report::{
    csv_preamble, csv_rows, curves_csv, curves_svg, photons_svg, round6, write_file,
    ThresholdSummary, VERSION,
};
use crate::threshold::{
    estimate_crossing, estimate_threshold, params_key, sweep_with_progress, CurvePoint,
    SweepConfig, ThresholdRun,
};
use crate::verify::{
    verify_check_operator, verify_gsm_reconstruction, Corruption, VerificationReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "gsm-threshold",
    version,
    about = "Loss thresholds of fusion-based quantum computing with encoded GHZ-state measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandArg>,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CommandArg {
    /// GSM efficiency tables or a single efficiency value.
    Efficiency,
    /// Estimate the loss threshold of one scheme.
    Threshold,
    /// Check stabilizer identities of the measurement layouts.
    Verify,
    /// Sweep a loss grid, or estimate every threshold of a preset family.
    Sweep,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Efficiency => Command::Efficiency,
            CommandArg::Threshold => Command::Threshold,
            CommandArg::Verify => Command::Verify,
            CommandArg::Sweep => Command::Sweep,
        }
    }
}

/// Flags that override values from the config file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML file with run settings.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    /// Output directory (default: $GSM_THRESHOLD_OUT or ./results).
    #[arg(long = "out", global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    /// minimal or cyclic.
    #[arg(long = "arch", global = true)]
    pub architecture: Option<String>,
    /// static or active.
    #[arg(long, global = true)]
    pub protocol: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Feed-forward depth of the active protocol.
    #[arg(long, global = true)]
    pub j: Option<u32>,
    /// hadamard or shor.
    #[arg(long, global = true)]
    pub convention: Option<String>,
    /// GSM arity.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Single loss rate for `efficiency`.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// I, II, III or IV.
    #[arg(long, global = true)]
    pub table: Option<String>,
    /// Efficiency below which table entries are blank.
    #[arg(long, global = true)]
    pub floor: Option<f64>,
    /// Comma-separated code distances.
    #[arg(long, global = true, value_delimiter = ',')]
    pub distances: Option<Vec<u32>>,
    /// Loss grid as lo:hi:points.
    #[arg(long, global = true, value_name = "LO:HI:N")]
    pub eta_grid: Option<String>,
    /// Centre of the threshold grid; skips the pre-scan.
    #[arg(long, global = true)]
    pub eta_center: Option<f64>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Relative half-width of the threshold grid.
    #[arg(long, global = true)]
    pub grid_span: Option<f64>,
    /// Monte-Carlo samples per grid point.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// independent or per-bsm.
    #[arg(long, global = true)]
    pub correlation: Option<String>,
    #[arg(long, global = true)]
    pub hub_rotation: Option<u8>,
    /// Bootstrap resamples for the threshold interval.
    #[arg(long, global = true)]
    pub bootstrap: Option<usize>,
    /// cyclic-static, cyclic-active, minimal-static or minimal-active.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Semicolon-separated subset of preset keys, e.g. "3,2;4,3".
    #[arg(long, global = true, value_delimiter = ';')]
    pub params: Option<Vec<String>>,
    /// Corrupt one resource stabilizer in `verify` to exercise failure.
    #[arg(long, global = true)]
    pub corrupt: bool,
}

impl Overrides {
    /// Layers the flags over `base`.
    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            };
            ($field:ident, some) => {
                if let Some(v) = self.$field.clone() {
                    cfg.$field = Some(v);
                }
            };
            ($field:ident, parse) => {
                if let Some(v) = &self.$field {
                    cfg.$field = v.parse()?;
                }
            };
            ($field:ident, parse_some) => {
                if let Some(v) = &self.$field {
                    cfg.$field = Some(v.parse()?);
                }
            };
        }
        set!(output_dir);
        set!(architecture, parse);
        set!(protocol, parse);
        set!(n);
        set!(m);
        set!(j);
        set!(convention, parse_some);
        set!(k);
        set!(eta, some);
        set!(table, parse_some);
        set!(floor);
        set!(distances);
        set!(eta_center, some);
        set!(grid_points);
        set!(grid_span);
        set!(samples);
        set!(seed);
        set!(workers);
        set!(correlation, parse);
        set!(hub_rotation);
        set!(bootstrap);
        set!(preset, parse_some);
        set!(params);
        if let Some(spec) = &self.eta_grid {
            cfg.eta_grid = Some(parse_grid_spec(spec)?);
        }
        if self.corrupt {
            cfg.corrupt = true;
        }
        Ok(cfg)
    }
}

/// Builds the effective configuration: defaults, then the config file,
/// then flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let base = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = cli.overrides.apply(base)?;
    if let Some(c) = cli.command {
        cfg.command = Some(c.into());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (including the program name), runs, and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = resolve(cli)?;
    if cli.overrides.print_config {
        return emit(stdout, &cfg.to_toml());
    }
    let command = cfg.command.ok_or_else(|| {
        Error::validation(
            "command",
            "no subcommand given and none set in the config file",
        )
    })?;
    let start = Instant::now();
    eprintln!(
        "gsm-threshold {VERSION} {command} seed={} workers={}",
        cfg.seed, cfg.workers
    );
    let result = match command {
        Command::Efficiency => run_efficiency(&cfg, stdout),
        Command::Threshold => run_threshold(&cfg, stdout),
        Command::Verify => run_verify(&cfg, stdout),
        Command::Sweep => run_sweep(&cfg, stdout),
    };
    eprintln!("finished in {:.1}s", start.elapsed().as_secs_f64());
    result
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

#[derive(Serialize)]
struct SingleEfficiency {
    architecture: String,
    protocol: String,
    convention: String,
    n: u32,
    m: u32,
    j: u32,
    k: u32,
    eta: f64,
    p_xx: f64,
    p_zz: f64,
    p_joint: f64,
    p_erase_x: f64,
    p_erase_zz: f64,
    efficiency: f64,
}

fn run_efficiency(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    if let Some(table) = cfg.table {
        let mut request = table.request(cfg.floor);
        if let Some(c) = cfg.convention {
            request.convention = c;
        }
        request.arity = cfg.k;
        let rows = emit_efficiency_table(&request)?;
        let csv = table_to_csv(&rows, request.protocol == crate::bsm::Protocol::Active);
        let stem = cfg.output_dir.join(format!("efficiency_table_{table}"));
        write_file(&stem.with_extension("csv"), &csv)?;
        write_file(
            &stem.with_extension("txt"),
            &table_to_text(&rows, &request.etas),
        )?;
        eprintln!("wrote {}.csv", stem.display());
        return emit(stdout, &csv);
    }
    let eta = cfg.eta.ok_or_else(|| {
        Error::validation(
            "eta",
            "give --table for a full table or --eta for a single value",
        )
    })?;
    let bsm = BsmModel::new(cfg.protocol, cfg.n, cfg.m, cfg.j, cfg.convention(), eta)?;
    let spec = GsmSpec::new(cfg.architecture, cfg.k, bsm)?;
    let probs = qpc_probs(&bsm)?;
    let erasure = gsm_erasure_probs(&spec)?;
    let out = SingleEfficiency {
        architecture: cfg.architecture.to_string(),
        protocol: cfg.protocol.to_string(),
        convention: cfg.convention().to_string(),
        n: cfg.n,
        m: cfg.m,
        j: cfg.j,
        k: cfg.k,
        eta,
        p_xx: round6(probs.p_xx),
        p_zz: round6(probs.p_zz),
        p_joint: round6(probs.p_joint),
        p_erase_x: round6(erasure.p_erase_x),
        p_erase_zz: round6(erasure.p_erase_zz),
        efficiency: round6(gsm_efficiency(&spec)?),
    };
    emit(
        stdout,
        &(serde_json::to_string_pretty(&out).expect("plain data") + "\n"),
    )
}

fn run_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let arch = cfg.architecture;
    let mut reports: Vec<VerificationReport> = Vec::new();
    for k in 2..=cfg.k.max(2) {
        reports.push(verify_gsm_reconstruction(arch, k)?);
    }
    let corruption = cfg.corrupt.then_some(Corruption::FlipResourceStabilizer);
    reports.push(verify_check_operator(arch, corruption)?);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_text());
    }
    let path = cfg.output_dir.join(format!("verify_{arch}.json"));
    write_file(
        &path,
        &(serde_json::to_string_pretty(&reports).expect("plain data") + "\n"),
    )?;
    emit(stdout, &text)?;
    let failed: usize = reports
        .iter()
        .map(|r| r.checks.iter().filter(|c| !c.passed).count())
        .sum();
    if failed > 0 {
        return Err(Error::Runtime(format!(
            "{failed} stabilizer check(s) failed"
        )));
    }
    Ok(())
}

fn progress(label: String) -> impl Fn(u32, &CurvePoint) + Sync {
    move |d, p| {
        eprintln!(
            "  {label} d={d} eta={:.5} ler={:.5} [{:.5}, {:.5}]",
            p.eta, p.rate, p.ci_low, p.ci_high
        )
    }
}

fn file_stem(config: &SweepConfig) -> String {
    format!(
        "{}_{}_{}",
        config.architecture,
        config.protocol,
        params_key(config.protocol, config.n, config.m, config.j).replace(',', "-")
    )
}

fn describe(run: &ThresholdRun) -> String {
    let e = &run.estimate;
    let reference = crate::presets::reference_threshold(
        run.config.architecture,
        run.config.protocol,
        run.config.n,
        run.config.m,
        run.config.j,
    )
    .map(|r| format!(" reference {r:.4}"))
    .unwrap_or_default();
    format!(
        "{}: eta_c = {:.4} +/- {:.4} (95% CI {:.4}..{:.4}){reference}\n",
        run.config.label(),
        e.eta_c,
        e.std_err,
        e.ci_low,
        e.ci_high
    )
}

fn write_run(cfg: &RunConfig, run: &ThresholdRun) -> Result<()> {
    let stem = cfg
        .output_dir
        .join(format!("threshold_{}", file_stem(&run.config)));
    write_file(
        &stem.with_extension("csv"),
        &curves_csv(&run.config, &run.curves),
    )?;
    write_file(
        &stem.with_extension("json"),
        &(ThresholdSummary::from_runs(std::slice::from_ref(run)).to_json() + "\n"),
    )?;
    write_file(
        &stem.with_extension("svg"),
        &curves_svg(&run.config.label(), &run.curves, Some(run.estimate.eta_c)),
    )?;
    eprintln!("wrote {}.{{csv,json,svg}}", stem.display());
    Ok(())
}

fn threshold_run(cfg: &RunConfig, config: &SweepConfig) -> Result<ThresholdRun> {
    let options = cfg.threshold_options();
    match &cfg.eta_grid {
        // Explicit grid: one pass, no re-centring.
        Some(grid) => {
            let mut run_cfg = config.clone();
            run_cfg.etas = grid.clone();
            let curves = sweep_with_progress(&run_cfg, progress(run_cfg.label()))?;
            match estimate_crossing(&curves, &options.crossing) {
                Ok(estimate) => Ok(ThresholdRun {
                    config: run_cfg,
                    centre: 0.5 * (grid[0] + grid[grid.len() - 1]),
                    centre_source: crate::threshold::CentreSource::Configured,
                    passes: 1,
                    curves,
                    estimate,
                }),
                Err(e) => {
                    let path = cfg
                        .output_dir
                        .join(format!("threshold_{}.csv", file_stem(&run_cfg)));
                    write_file(&path, &curves_csv(&run_cfg, &curves))?;
                    Err(e)
                }
            }
        }
        None => estimate_threshold(config, &options),
    }
}

fn run_threshold(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let config = cfg.sweep_config();
    let run = threshold_run(cfg, &config)?;
    write_run(cfg, &run)?;
    emit(stdout, &describe(&run))
}

fn run_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    match cfg.preset {
        Some(preset) => run_preset(cfg, preset, stdout),
        None => {
            if cfg.eta_grid.is_none() {
                return Err(Error::validation(
                    "eta_grid",
                    "sweep needs --eta-grid or --preset",
                ));
            }
            let config = cfg.sweep_config();
            let curves = sweep_with_progress(&config, progress(config.label()))?;
            let stem = cfg.output_dir.join(format!("sweep_{}", file_stem(&config)));
            let csv = curves_csv(&config, &curves);
            write_file(&stem.with_extension("csv"), &csv)?;
            let crossing = estimate_crossing(&curves, &cfg.threshold_options().crossing).ok();
            write_file(
                &stem.with_extension("svg"),
                &curves_svg(&config.label(), &curves, crossing.as_ref().map(|c| c.eta_c)),
            )?;
            eprintln!("wrote {}.{{csv,svg}}", stem.display());
            emit(stdout, &csv)
        }
    }
}

fn run_preset(cfg: &RunConfig, preset: Preset, stdout: &mut dyn Write) -> Result<()> {
    let mut entries = preset.entries();
    if !cfg.params.is_empty() {
        for key in &cfg.params {
            if !entries.iter().any(|e| &e.key() == key) {
                return Err(Error::validation(
                    "params",
                    format!("{key:?} is not part of preset {preset}"),
                ));
            }
        }
        entries.retain(|e| cfg.params.contains(&e.key()));
    }
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut csv = csv_preamble();
    for entry in &entries {
        let mut config = cfg.sweep_config();
        config.architecture = entry.architecture;
        config.protocol = entry.protocol;
        config.n = entry.n;
        config.m = entry.m;
        config.j = entry.j;
        config.convention = cfg
            .convention
            .unwrap_or(entry.architecture.default_convention());
        match threshold_run(cfg, &config) {
            Ok(run) => {
                emit(stdout, &describe(&run))?;
                csv.push_str(&csv_rows(&run.config, &run.curves));
                let svg = cfg
                    .output_dir
                    .join(format!("threshold_{}.svg", file_stem(&run.config)));
                write_file(
                    &svg,
                    &curves_svg(&run.config.label(), &run.curves, Some(run.estimate.eta_c)),
                )?;
                runs.push(run);
            }
            Err(e @ (Error::NoCrossing | Error::DegenerateCrossing)) => {
                eprintln!("  {}: {e}", config.label());
                failures.push(config.label());
            }
            Err(e) => return Err(e),
        }
    }
    let summary = ThresholdSummary::from_runs(&runs);
    let stem = cfg.output_dir.join(format!("sweep_{preset}"));
    write_file(&stem.with_extension("csv"), &csv)?;
    write_file(&stem.with_extension("json"), &(summary.to_json() + "\n"))?;
    write_file(
        &cfg.output_dir.join(format!("photons_{preset}.svg")),
        &photons_svg(&format!("{preset} thresholds"), &summary),
    )?;
    eprintln!("wrote {}.{{csv,json}}", stem.display());
    if !failures.is_empty() {
        return Err(Error::Runtime(format!(
            "no threshold found for {}",
            failures.join(", ")
        )));
    }
    Ok(())
}
