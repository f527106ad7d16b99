//! Command-line front end. [`run`] parses arguments, runs one study and
//! writes its CSV tables, SVG plots, `summary.json` and `manifest.json`.
//!
//! Exit status: 0 on success, 1 when a computation fails, 2 for usage or
//! configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::axial::{
    analyze_wells, splitting_voltages, AxialBasis, RampResult, RampSpec, SplitSolver, CALIBRATION_TOL_EV,
    CALIBRATION_TOL_V, PROMINENCE_EV, TRANSITION_TOL_V,
};
use crate::field::DcAssignment;
use crate::layout::{make_split, parse_layout, ElectrodeLayout};
use crate::optimize::{
    candidates_csv, optimize_split, search_asymmetric, sweep_symmetric, AsymmetricSearchConfig, SplitConfig,
    SymmetricSweepConfig, CONTOUR_TOL_UM,
};
use crate::oracle::run_all;
use crate::pseudo::{
    evaluate, narrower_rf_side, IonSpecies, RfDrive, TrapMetrics, TrapPotential, DEPTH_RAYS, GRADIENT_TOL,
};
use crate::svg::{Plot, Series};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "surftrap", version, about = "Surface Paul trap design studies")]
pub struct Cli {
    /// Worker threads for grid studies (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RF amplitude, V.
    #[arg(long)]
    pub vrf: Option<f64>,
    /// RF frequency, MHz.
    #[arg(long)]
    pub frf: Option<f64>,
    /// Ion mass, u.
    #[arg(long)]
    pub ion_mass: Option<f64>,
    /// Start the minimum search at this height above the centre, µm.
    #[arg(long)]
    pub seed_height: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial metrics of one layout.
    Metrics {
        #[arg(long)]
        layout: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Symmetric five-wire width sweep.
    SweepSymmetric {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Post-selected asymmetric five-wire search.
    SearchAsymmetric {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Axial profiles along a separation-voltage ramp.
    Axial {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Splitting-segment length optimization.
    OptimizeSplit {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Field-core oracle checks.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_input(path: &Path, what: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {what} `{}`: {e}", path.display())))
}

fn load_layout(path: &Path) -> CliResult<ElectrodeLayout> {
    let text = read_input(path, "layout file")?;
    parse_layout(&text).map_err(|e| usage(format!("bad layout file `{}`: {e}", path.display())))
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = read_input(p, "config file")?;
            serde_json::from_str(&text).map_err(|e| usage(format!("bad config file `{}`: {e}", p.display())))
        }
    }
}

fn check_drive(v: f64, f: f64) -> CliResult<()> {
    RfDrive::new(v, f).validate().map_err(Failure::from)
}

fn ion_from(opts: &Overrides, base: IonSpecies) -> CliResult<IonSpecies> {
    IonSpecies::new(opts.ion_mass.unwrap_or(base.mass_amu), base.charge).map_err(Failure::from)
}

#[derive(Debug, Serialize)]
struct Tolerances {
    gradient_ev_per_um: f64,
    depth_rays: usize,
    prominence_ev: f64,
    transition_v: f64,
    calibration_v: f64,
    calibration_ev: f64,
    contour_um: f64,
}

fn tolerances() -> Tolerances {
    Tolerances {
        gradient_ev_per_um: GRADIENT_TOL,
        depth_rays: DEPTH_RAYS,
        prominence_ev: PROMINENCE_EV,
        transition_v: TRANSITION_TOL_V,
        calibration_v: CALIBRATION_TOL_V,
        calibration_ev: CALIBRATION_TOL_EV,
        contour_um: CONTOUR_TOL_UM,
    }
}

const DEPTH_NOTE: &str = "depth is the lowest saddle of the pseudopotential on the basin rim in the x-y plane";
const WELL_NOTE: &str = "well depth is the lower of the central barrier and the outer bounding maximum, minus the well minimum";

/// Collects output files and writes the manifest last.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create output directory `{}`: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write `{}`: {e}", path.display()),
        })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        self.write(name, &(text + "\n"))
    }

    fn summary<C: Serialize>(&mut self, command: &str, config: &C, result: Value) -> CliResult<()> {
        let config = serde_json::to_value(config).map_err(Error::from)?;
        let canonical = serde_json::to_string(&config).map_err(Error::from)?;
        let hash = Sha256::digest(canonical.as_bytes());
        let hash: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        self.write_json(
            "summary.json",
            &json!({
                "tool": "surftrap",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "config_sha256": hash,
                "config": config,
                "tolerances": tolerances(),
                "result": result,
            }),
        )
    }

    fn finish(mut self, status: &str, error: Option<&str>) -> CliResult<()> {
        let mut files = self.files.clone();
        files.push("manifest.json".into());
        let manifest = json!({ "status": status, "error": error, "files": files });
        self.write_json("manifest.json", &manifest)
    }
}

/// Runs `body` against an output directory; if it fails the files written so
/// far are kept and the manifest marks the run partial.
fn with_outputs(dir: &Path, body: impl FnOnce(&mut Outputs) -> CliResult<()>) -> CliResult<()> {
    let mut out = Outputs::new(dir)?;
    match body(&mut out) {
        Ok(()) => out.finish("complete", None),
        Err(f) => {
            let _ = out.finish("partial", Some(&f.message));
            Err(f)
        }
    }
}

fn out_dir(opts: &Overrides, default: &str) -> PathBuf {
    opts.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

#[derive(Debug, Serialize)]
struct MetricsReport {
    #[serde(flatten)]
    metrics: TrapMetrics,
    narrower_rf_side: &'static str,
    shifted_toward_narrower_rf: Option<bool>,
    depth_definition: &'static str,
}

fn metrics_report(layout: &ElectrodeLayout, m: TrapMetrics) -> MetricsReport {
    let side = narrower_rf_side(layout);
    MetricsReport {
        metrics: m,
        narrower_rf_side: match side {
            -1 => "-x",
            1 => "+x",
            _ => "none",
        },
        shifted_toward_narrower_rf: (side != 0).then(|| m.x0_um * side as f64 > 0.0),
        depth_definition: DEPTH_NOTE,
    }
}

fn cmd_metrics(layout_path: &Path, opts: &Overrides) -> CliResult<()> {
    let v = opts.vrf.unwrap_or(100.0);
    let f = opts.frf.unwrap_or(22.0);
    check_drive(v, f)?;
    let ion = ion_from(opts, IonSpecies::yb171())?;
    let layout = load_layout(layout_path)?;
    let drive = RfDrive::new(v, f);
    let seed = match opts.seed_height {
        Some(h) if !(h > 0.0) => return Err(usage(format!("--seed-height must be > 0 (got {h})"))),
        Some(h) => Some(crate::field::FieldPoint { x: 0.0, y: h, z: 0.0 }),
        None => None,
    };
    let trap = TrapPotential::new(&layout, &drive, &ion)?;
    let m = evaluate(&trap, &layout, seed)?;
    let report = metrics_report(&layout, m);
    let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(dir) = &opts.out {
        let config = json!({ "layout": serde_json::to_value(&layout).map_err(Error::from)?, "drive": drive, "ion": ion, "seed_height_um": opts.seed_height });
        with_outputs(dir, |out| {
            out.write_json("metrics.json", &report)?;
            out.summary("metrics", &config, serde_json::to_value(&report).map_err(Error::from)?)
        })?;
    }
    Ok(())
}

fn cmd_sweep(config: Option<&Path>, opts: &Overrides) -> CliResult<()> {
    let mut cfg: SymmetricSweepConfig = load_config(config)?;
    if let Some(v) = opts.vrf {
        cfg.settings.v_rf = v;
    }
    if let Some(f) = opts.frf {
        cfg.f_rf_mhz = vec![f];
    }
    cfg.settings.ion = ion_from(opts, cfg.settings.ion)?;
    for &f in &cfg.f_rf_mhz {
        check_drive(cfg.settings.v_rf, f)?;
    }
    let sweep = sweep_symmetric(&cfg)?;
    with_outputs(&out_dir(opts, "out/sweep-symmetric"), |out| {
        out.write("sweep_symmetric.csv", &candidates_csv(&sweep.rows)?)?;
        out.write("fig3_height.csv", &sweep.heights_csv()?)?;
        out.write("fig4_fixed_q.csv", &sweep.contour_csv()?)?;
        out.write("fig5_depth_vs_h.csv", &sweep.depth_csv()?)?;

        let wcs: Vec<f64> = cfg.grid.w_c.values();
        let stride = wcs.len().div_ceil(6).max(1);
        let mut fig3 = Plot::new("Ion height", "w_r [um]", "h [um]");
        for &wc in wcs.iter().step_by(stride) {
            let pts = sweep.heights.iter().filter(|p| p.w_c_um == wc).map(|p| (p.w_r_um, p.h_um)).collect();
            fig3 = fig3.with(Series::line(format!("w_c = {wc}"), pts));
        }
        out.write("fig3_height.svg", &fig3.to_svg())?;
        let mut fig4 = Plot::new(format!("Fixed q = {}", cfg.criteria.q_target), "w_c [um]", "w_r [um]");
        let mut fig5 = Plot::new("Depth against height", "h [um]", "depth [eV]");
        for &f in &cfg.f_rf_mhz {
            let c = sweep.contour.iter().filter(|p| p.f_rf_mhz == f).map(|p| (p.w_c_um, p.w_r_um)).collect();
            fig4 = fig4.with(Series::dots(format!("{f} MHz"), c));
            let d = sweep.depth_vs_h.iter().filter(|p| p.f_rf_mhz == f).map(|p| (p.h_um, p.depth_ev)).collect();
            fig5 = fig5.with(Series::dots(format!("{f} MHz"), d));
        }
        out.write("fig4_fixed_q.svg", &fig4.to_svg())?;
        out.write("fig5_depth_vs_h.svg", &fig5.to_svg())?;

        let best: Vec<Value> = cfg
            .f_rf_mhz
            .iter()
            .map(|&f| json!({ "f_rf_MHz": f, "candidate": sweep.best_height(f) }))
            .collect();
        let result = json!({
            "rows": sweep.rows.len(),
            "failed_points": sweep.rows.iter().filter(|c| c.failure.is_some()).count(),
            "passing": sweep.rows.iter().filter(|c| c.passes).count(),
            "best_height": best,
            "notes": [DEPTH_NOTE],
        });
        out.summary("sweep-symmetric", &cfg, result)
    })
}

fn cmd_search(config: Option<&Path>, opts: &Overrides) -> CliResult<()> {
    let mut cfg: AsymmetricSearchConfig = load_config(config)?;
    if let Some(v) = opts.vrf {
        cfg.settings.v_rf = v;
    }
    if let Some(f) = opts.frf {
        cfg.f_rf_mhz = f;
    }
    cfg.settings.ion = ion_from(opts, cfg.settings.ion)?;
    check_drive(cfg.settings.v_rf, cfg.f_rf_mhz)?;
    let search = search_asymmetric(&cfg)?;
    with_outputs(&out_dir(opts, "out/search-asymmetric"), |out| {
        out.write("search_asymmetric.csv", &candidates_csv(&search.rows)?)?;
        let ranked: Vec<_> = search.ranked.iter().map(|&i| search.rows[i].clone()).collect();
        out.write("ranked.csv", &candidates_csv(&ranked)?)?;
        let mut plot = Plot::new("Passing candidates", "h [um]", "depth [eV]");
        let all = search
            .rows
            .iter()
            .filter_map(|c| c.metrics.filter(|m| cfg.criteria.q_ok(m)).map(|m| (m.h_um, m.depth_ev)))
            .collect();
        let pass = ranked.iter().filter_map(|c| c.metrics.map(|m| (m.h_um, m.depth_ev))).collect();
        plot = plot.with(Series::dots("q window", all)).with(Series::dots("all criteria", pass));
        out.write("depth_vs_h.svg", &plot.to_svg())?;
        let result = json!({
            "rows": search.rows.len(),
            "failed_points": search.rows.iter().filter(|c| c.failure.is_some()).count(),
            "passing": search.ranked.len(),
            "winner": search.best(),
            "empty": search.best().is_none(),
            "notes": [DEPTH_NOTE],
        });
        out.summary("search-asymmetric", &cfg, result)
    })
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AxialConfig {
    /// Static voltages besides the ramped electrodes. Defaults to the
    /// splitting sequence when the layout has its segments.
    pub base_volts: Option<DcAssignment>,
    pub ramp: RampSpec,
    pub z_range_um: [f64; 2],
    pub samples: usize,
    pub target_depth_ev: Option<f64>,
    pub v_rf: f64,
    pub f_rf_mhz: f64,
    pub ion: IonSpecies,
}

impl Default for AxialConfig {
    fn default() -> Self {
        Self {
            base_volts: None,
            ramp: RampSpec::default(),
            z_range_um: [-crate::axial::DEFAULT_HALF_WINDOW, crate::axial::DEFAULT_HALF_WINDOW],
            samples: crate::axial::DEFAULT_SAMPLES,
            target_depth_ev: Some(0.05),
            v_rf: 100.0,
            f_rf_mhz: 22.0,
            ion: IonSpecies::yb171(),
        }
    }
}

#[derive(Debug, Serialize)]
struct RampRow {
    #[serde(rename = "u_V")]
    u_v: f64,
    topology: String,
    wells: usize,
    l_um: Option<f64>,
    #[serde(rename = "well_depth_eV")]
    well_depth_ev: f64,
    #[serde(rename = "barrier_eV")]
    barrier_ev: Option<f64>,
    #[serde(rename = "barrier_slope_eV_per_um")]
    barrier_slope: Option<f64>,
}

fn ramp_csv(r: &RampResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &r.steps {
        let m = &s.metrics;
        w.serialize(RampRow {
            u_v: s.u_v,
            topology: serde_json::to_value(m.topology)?.as_str().unwrap_or_default().to_string(),
            wells: m.minima_z_um.len(),
            l_um: m.l_um,
            well_depth_ev: m.min_well_depth(),
            barrier_ev: m.barrier_height_ev,
            barrier_slope: m.barrier_max_slope_ev_per_um,
        })
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidSpec(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cmd_axial(layout_path: &Path, config: Option<&Path>, opts: &Overrides) -> CliResult<()> {
    let mut cfg: AxialConfig = load_config(config)?;
    if let Some(v) = opts.vrf {
        cfg.v_rf = v;
    }
    if let Some(f) = opts.frf {
        cfg.f_rf_mhz = f;
    }
    cfg.ion = ion_from(opts, cfg.ion)?;
    check_drive(cfg.v_rf, cfg.f_rf_mhz)?;
    cfg.ramp.validate()?;
    let layout = load_layout(layout_path)?;
    let base = match &cfg.base_volts {
        Some(v) => v.clone(),
        None => {
            let split = splitting_voltages(0.0);
            if split.iter().all(|(n, _)| layout.get(n).is_some()) {
                split
            } else {
                DcAssignment::new()
            }
        }
    };
    let drive = RfDrive::new(cfg.v_rf, cfg.f_rf_mhz);
    let basis = AxialBasis::new(&layout, &drive, &cfg.ion, (cfg.z_range_um[0], cfg.z_range_um[1]), cfg.samples)?;
    let solver = SplitSolver::new(basis, base.clone(), cfg.ramp.electrodes.clone())?;
    let ramp = solver.ramp(&cfg.ramp)?;
    let calibration = cfg.target_depth_ev.map(|t| match solver.calibrate(t, cfg.ramp.u_start.min(cfg.ramp.u_end), cfg.ramp.u_start.max(cfg.ramp.u_end)) {
        Ok((u, m)) => json!({ "target_depth_eV": t, "u_V": u, "metrics": m }),
        Err(e) => json!({ "target_depth_eV": t, "error": e.to_string() }),
    });
    let effective = json!({ "layout": serde_json::to_value(&layout).map_err(Error::from)?, "axial": cfg, "base_volts": base });
    with_outputs(&out_dir(opts, "out/axial"), |out| {
        out.write("ramp.csv", &ramp_csv(&ramp)?)?;
        out.write_json("ramp.json", &ramp)?;
        let mut plot = Plot::new("Axial potential", "z [um]", "energy [eV]");
        for (i, step) in ramp.steps.iter().enumerate() {
            let p = solver.profile(step.u_v)?;
            out.write(&format!("axial_step_{i:02}.csv"), &p.to_csv())?;
            let pts = p.z_um.iter().zip(&p.energy_ev).map(|(&z, &e)| (z, e)).collect();
            plot = plot.with(Series::line(format!("u = {} V", step.u_v), pts));
        }
        out.write("fig8_axial.svg", &plot.to_svg())?;
        let result = json!({
            "x0_um": solver.basis.x0_um,
            "h_um": solver.basis.h_um,
            "transitions": ramp.transitions,
            "transition_u_V": ramp.transition_u_v,
            "calibration": calibration,
            "notes": [WELL_NOTE],
        });
        out.summary("axial", &effective, result)
    })
}

fn cmd_split(config: Option<&Path>, opts: &Overrides) -> CliResult<()> {
    let mut cfg: SplitConfig = load_config(config)?;
    if let Some(v) = opts.vrf {
        cfg.v_rf = v;
    }
    if let Some(f) = opts.frf {
        cfg.f_rf_mhz = f;
    }
    cfg.ion = ion_from(opts, cfg.ion)?;
    check_drive(cfg.v_rf, cfg.f_rf_mhz)?;
    let result = optimize_split(&cfg)?;
    with_outputs(&out_dir(opts, "out/optimize-split"), |out| {
        out.write("optimize_split.csv", &result.to_csv()?)?;
        let winner = result.best().cloned();
        if let Some(best) = &winner {
            let layout = make_split(&best.spec)?;
            let drive = RfDrive::new(cfg.v_rf, cfg.f_rf_mhz);
            let basis = AxialBasis::new(
                &layout,
                &drive,
                &cfg.ion,
                (-crate::axial::DEFAULT_HALF_WINDOW, crate::axial::DEFAULT_HALF_WINDOW),
                crate::axial::DEFAULT_SAMPLES,
            )?;
            let p = basis.profile(&splitting_voltages(best.u_v.expect("winner is calibrated")))?;
            debug_assert_eq!(analyze_wells(&p)?.l_um, best.l_um());
            out.write("best_profile.csv", &p.to_csv())?;
            let pts = p.z_um.iter().zip(&p.energy_ev).map(|(&z, &e)| (z, e)).collect();
            let plot = Plot::new("Calibrated double well", "z [um]", "energy [eV]").with(Series::line(
                format!("r = {}/{}/{}", best.spec.r0, best.spec.r1, best.spec.r2),
                pts,
            ));
            out.write("best_profile.svg", &plot.to_svg())?;
        }
        let summary = json!({
            "rows": result.rows.len(),
            "failed_points": result.rows.iter().filter(|c| c.failure.is_some()).count(),
            "winner": winner.as_ref().map(|w| json!({
                "r0_um": w.spec.r0,
                "r1_um": w.spec.r1,
                "r2_um": w.spec.r2,
                "u_V": w.u_v,
                "l_um": w.l_um(),
                "l_at_u_max_um": w.l_at_u_max_um,
                "metrics": w.metrics,
            })),
            "empty": winner.is_none(),
            "notes": [WELL_NOTE],
        });
        out.summary("optimize-split", &cfg, summary)
    })
}

fn cmd_validate(seed: u64, out: Option<&Path>) -> CliResult<()> {
    let checks = run_all(seed)?;
    println!("{:<12} {:>6} {:>12} {:>10} {:>8}", "check", "result", "worst", "limit", "samples");
    for c in &checks {
        println!(
            "{:<12} {:>6} {:>12.3e} {:>10.1e} {:>8}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.worst,
            c.limit,
            c.samples
        );
    }
    if let Some(dir) = out {
        with_outputs(dir, |o| {
            o.write_json("validate.json", &checks)?;
            o.summary("validate", &json!({ "seed": seed }), serde_json::to_value(&checks).map_err(Error::from)?)
        })?;
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: "oracle checks failed".into(),
        })
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Metrics { layout, opts } => cmd_metrics(layout, opts),
        Command::SweepSymmetric { config, opts } => cmd_sweep(config.as_deref(), opts),
        Command::SearchAsymmetric { config, opts } => cmd_search(config.as_deref(), opts),
        Command::Axial { layout, config, opts } => cmd_axial(layout, config.as_deref(), opts),
        Command::OptimizeSplit { config, opts } => cmd_split(config.as_deref(), opts),
        Command::Validate { seed, out } => cmd_validate(*seed, out.as_deref()),
    }
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
