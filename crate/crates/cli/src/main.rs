//! `pinchtape` command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or violated bound, 2 usage or
//! parse error, 3 I/O error.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pinchtape::export::{
    configurations_svg, read_moment_csv, workspace_svg, write_grid_csv, write_log_csv, write_moment_csv,
};
use pinchtape::model::{cable_lengths, forward_kinematics, theta_from_cables};
use pinchtape::planner::ik_enumerate;
use pinchtape::simulator::{builtin_scenario, run_scenario, Scenario, BUILTIN_NAMES};
use pinchtape::stiffness::{
    calibrate_unpinched, flattened_moment, moment_angle_curve, peak_ratio, pinched_joint_moment, unpinched_pair_moment,
    FlattenedSection, DEFAULT_PEAK_ANGLE_DEG,
};
use pinchtape::units::{format_sig, parse_angle, AngleUnit};
use pinchtape::workspace::{compute_grid, feasible_theta_interval, ik_at_theta, Bounds};
use pinchtape::{CablePair, JointState, ManipulatorParams, PinchJointModel, TrajectoryLog, UnpinchedPairModel};

#[derive(Debug, Parser)]
#[command(name = "pinchtape", version, about = "Pinched bistable-tape manipulator toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Manipulator parameters (JSON); defaults to the reference build
    #[arg(long, global = true, env = "PINCHTAPE_PARAMS")]
    params: Option<PathBuf>,
    /// Directory for written artifacts
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Unit for angles given without a suffix and for printed angles
    #[arg(long, global = true, default_value_t = AngleUnit::Deg)]
    unit: AngleUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tip pose of a joint configuration
    #[command(allow_negative_numbers = true)]
    Fk { l1: f64, l2: f64, theta: String },
    /// Link lengths reaching a point
    #[command(allow_negative_numbers = true)]
    Ik {
        x: f64,
        y: f64,
        /// Bend angle; defaults to the smallest feasible one
        #[arg(long)]
        theta: Option<String>,
        /// List this many configurations spread over the feasible angles
        #[arg(long, conflicts_with = "theta")]
        count: Option<usize>,
    },
    /// Steering cable lengths of a joint configuration
    #[command(allow_negative_numbers = true)]
    Cables {
        l1: f64,
        l2: f64,
        theta: String,
        /// Cable offset from the tape midline, m
        #[arg(long)]
        d: Option<f64>,
    },
    /// Bend angle implied by two cable lengths
    #[command(name = "theta-from-cables", allow_negative_numbers = true)]
    ThetaFromCables {
        c_l: f64,
        c_r: f64,
        #[arg(long)]
        d: Option<f64>,
    },
    /// Reachability grid and minimum end-effector angle map
    #[command(allow_negative_numbers = true)]
    Workspace {
        #[arg(long, default_value_t = -2.0)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[arg(long, default_value_t = 0.0)]
        y_min: f64,
        #[arg(long, default_value_t = 2.0)]
        y_max: f64,
        /// Cell size, m
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
        /// Contour levels of the minimum angle
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
        levels: Vec<String>,
    },
    /// Bending moments of the flattened section and the tape pair
    #[command(allow_negative_numbers = true)]
    Stiffness {
        /// Curvature of the flattened section, 1/m
        #[arg(long)]
        kappa: Option<f64>,
        /// Joint angle at which to evaluate both pair models
        #[arg(long)]
        theta: Option<String>,
        /// Write sampled moment-angle curves
        #[arg(long)]
        curves: bool,
        /// Fit the unpinched model to a theta_rad,moment_Nm CSV
        #[arg(long)]
        calibrate: Option<PathBuf>,
    },
    /// Run a scenario file
    Simulate { scenario: PathBuf },
    /// Run a built-in demonstration; lists them when no name is given
    Demo { name: Option<String> },
}

#[derive(Debug)]
enum Failure {
    Check(String),
    Usage(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

struct Ctx {
    params: ManipulatorParams,
    out: PathBuf,
    format: Format,
    unit: AngleUnit,
}

impl Ctx {
    fn angle(&self, text: &str) -> Result<f64, Failure> {
        parse_angle(text, self.unit).map_err(|e| usage(format!("angle '{text}': {e}")))
    }

    fn show_angle(&self, rad: f64) -> String {
        format!("{} {}", format_sig(self.unit.from_radians(rad)), self.unit.suffix())
    }

    fn offset(&self, d: Option<f64>) -> f64 {
        d.unwrap_or(self.params.cable_offset)
    }

    fn artifact(&self, name: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))
            .map_err(Failure::Io)?;
        Ok(self.out.join(name))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, Failure> {
        let path = self.artifact(name)?;
        fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io)?;
        Ok(path)
    }

    fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(BufWriter<fs::File>) -> Result<(), pinchtape::export::ExportError>,
    ) -> Result<PathBuf, Failure> {
        let path = self.artifact(name)?;
        let file = fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(Failure::Io)?;
        f(BufWriter::new(file))
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io)?;
        Ok(path)
    }
}

fn load_params(path: Option<&Path>) -> Result<ManipulatorParams, Failure> {
    let Some(path) = path else {
        return Ok(ManipulatorParams::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Io)?;
    ManipulatorParams::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn print_joint(s: &JointState, ctx: &Ctx) {
    println!("l1 = {} m", format_sig(s.l1));
    println!("l2 = {} m", format_sig(s.l2));
    println!("theta = {}", ctx.show_angle(s.theta));
}

fn cmd_fk(ctx: &Ctx, l1: f64, l2: f64, theta: &str) -> Outcome {
    let s = JointState::new(l1, l2, ctx.angle(theta)?);
    match forward_kinematics(&s, &ctx.params) {
        Ok(p) => {
            println!("x = {} m", format_sig(p.x));
            println!("y = {} m", format_sig(p.y));
            println!("phi = {}", ctx.show_angle(p.phi));
            Ok(())
        }
        Err(e) => Err(Failure::Check(e.to_string())),
    }
}

fn cmd_ik(ctx: &Ctx, x: f64, y: f64, theta: Option<&str>, count: Option<usize>) -> Outcome {
    let p = &ctx.params;
    if let Some(n) = count {
        let states = ik_enumerate(x, y, p, n);
        if states.is_empty() {
            return Err(Failure::Check(format!("({x}, {y}) is not reachable")));
        }
        println!("theta,l1_m,l2_m");
        for s in states {
            println!(
                "{},{},{}",
                format_sig(ctx.unit.from_radians(s.theta)),
                format_sig(s.l1),
                format_sig(s.l2)
            );
        }
        return Ok(());
    }
    let intervals = feasible_theta_interval(x, y, p);
    let Some(interval) = intervals.first() else {
        return Err(Failure::Check(format!("({x}, {y}) is not reachable")));
    };
    let theta = match theta {
        Some(t) => ctx.angle(t)?,
        None => interval.closest_to_zero(),
    };
    match ik_at_theta(x, y, theta, p) {
        Some(s) => {
            print_joint(&s, ctx);
            println!(
                "feasible theta = [{}, {}]",
                ctx.show_angle(interval.lo),
                ctx.show_angle(interval.hi)
            );
            Ok(())
        }
        None => Err(Failure::Check(format!(
            "no admissible configuration reaches ({x}, {y}) at {}; feasible theta = [{}, {}]",
            ctx.show_angle(theta),
            ctx.show_angle(interval.lo),
            ctx.show_angle(interval.hi)
        ))),
    }
}

fn cmd_cables(ctx: &Ctx, l1: f64, l2: f64, theta: &str, d: Option<f64>) -> Outcome {
    let c = cable_lengths(&JointState::new(l1, l2, ctx.angle(theta)?), ctx.offset(d));
    println!("cL = {} m", format_sig(c.c_l));
    println!("cR = {} m", format_sig(c.c_r));
    Ok(())
}

fn cmd_theta_from_cables(ctx: &Ctx, c_l: f64, c_r: f64, d: Option<f64>) -> Outcome {
    let theta =
        theta_from_cables(&CablePair::new(c_l, c_r), ctx.offset(d)).map_err(|e| Failure::Check(e.to_string()))?;
    println!("theta = {}", ctx.show_angle(theta));
    Ok(())
}

fn cmd_workspace(ctx: &Ctx, bounds: Bounds, resolution: f64, levels: &[String]) -> Outcome {
    let levels = levels.iter().map(|l| ctx.angle(l)).collect::<Result<Vec<_>, _>>()?;
    let grid = compute_grid(&ctx.params, bounds, resolution).map_err(usage)?;
    if grid.is_empty() {
        eprintln!("warning: bounds enclose no cells; writing empty outputs");
    }
    if ctx.format.csv() {
        let path = ctx.write_with("workspace.csv", |w| write_grid_csv(&grid, w))?;
        println!("wrote {}", path.display());
    }
    if ctx.format.svg() {
        let path = ctx.write_text("workspace.svg", &workspace_svg(&grid, ctx.params.theta_limit, &levels))?;
        println!("wrote {}", path.display());
    }
    println!("cells = {} x {}", grid.nx, grid.ny);
    println!("reachable fraction = {}", format_sig(grid.reachable_fraction()));
    Ok(())
}

fn cmd_stiffness(
    ctx: &Ctx,
    kappa: Option<f64>,
    theta: Option<&str>,
    curves: bool,
    calibrate: Option<&Path>,
) -> Outcome {
    let tape = &ctx.params.tape;
    let section = FlattenedSection::from_tape(tape);
    let pinched = PinchJointModel::measured_default(tape);
    let unpinched = UnpinchedPairModel::default();
    let mut shown = false;
    if let Some(k) = kappa {
        println!("M = {} N*m", format_sig(flattened_moment(&section, k)));
        shown = true;
    }
    if let Some(t) = theta {
        let t = ctx.angle(t)?;
        println!("pinched = {} N*m", format_sig(pinched_joint_moment(&pinched, t)));
        println!("unpinched = {} N*m", format_sig(unpinched_pair_moment(&unpinched, t)));
        shown = true;
    }
    if curves {
        let limit = ctx.params.theta_limit;
        let p = moment_angle_curve(&pinched, -limit, limit, 221).map_err(usage)?;
        let u = moment_angle_curve(&unpinched, -limit, limit, 221).map_err(usage)?;
        for (name, samples) in [("moment_pinched.csv", p), ("moment_unpinched.csv", u)] {
            let path = ctx.write_with(name, |w| write_moment_csv(&samples, w))?;
            println!("wrote {}", path.display());
        }
        shown = true;
    }
    if let Some(path) = calibrate {
        let file = fs::File::open(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Io)?;
        let samples = read_moment_csv(file).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let fit = calibrate_unpinched(&samples).map_err(|e| Failure::Check(e.to_string()))?;
        let m = fit.model;
        println!("peak_moment = {} N*m", format_sig(m.peak_moment));
        println!("peak_angle = {}", ctx.show_angle(m.peak_angle));
        println!("propagation_moment = {} N*m", format_sig(m.propagation_moment));
        println!("decay_rate = {} 1/rad", format_sig(m.decay_rate));
        println!("residual_norm = {} N*m", format_sig(fit.residual_norm));
        shown = true;
    }
    if !shown {
        let ratio = peak_ratio(&pinched, &unpinched, DEFAULT_PEAK_ANGLE_DEG.to_radians()).map_err(usage)?;
        println!("second_moment = {} m^4", format_sig(section.second_moment));
        println!("rigidity = {} N*m^2", format_sig(section.rigidity()));
        println!("bend_region_length = {} m", format_sig(pinched.bend_region_length));
        println!(
            "torsional_stiffness = {} N*m/rad",
            format_sig(pinched.torsional_stiffness())
        );
        println!("unpinched_peak = {} N*m", format_sig(unpinched.max_moment()));
        println!("peak_ratio = {}", format_sig(ratio));
    }
    Ok(())
}

/// Up to `n` rows spread evenly over the log, endpoints included.
fn sample_states(log: &TrajectoryLog, n: usize) -> Vec<JointState> {
    let rows = &log.rows;
    if rows.len() <= n {
        return rows.iter().map(|r| r.state.joint).collect();
    }
    (0..n)
        .map(|k| rows[k * (rows.len() - 1) / (n - 1)].state.joint)
        .collect()
}

fn run_and_report(ctx: &Ctx, scenario: &Scenario, stem: &str) -> Outcome {
    let log = run_scenario(scenario).map_err(|e| Failure::Check(e.to_string()))?;
    if ctx.format.csv() {
        let path = ctx.write_with(&format!("{stem}.csv"), |w| write_log_csv(&log, w))?;
        println!("wrote {}", path.display());
    }
    if ctx.format.svg() {
        let path = ctx.write_text(&format!("{stem}.svg"), &configurations_svg(&sample_states(&log, 8)))?;
        println!("wrote {}", path.display());
    }
    for c in &log.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} (worst {})", c.check, format_sig(c.worst));
    }
    let violations = log.rows.iter().filter(|r| !r.violations.is_empty()).count();
    println!("rows = {}, rows with violations = {violations}", log.rows.len());
    if log.all_passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "scenario '{}' failed its checks",
            scenario.name
        )))
    }
}

fn cmd_simulate(ctx: &Ctx, path: &Path) -> Outcome {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Io)?;
    let scenario = Scenario::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let stem = if scenario.name.is_empty() {
        path.file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario")
            .to_string()
    } else {
        scenario.name.clone()
    };
    run_and_report(ctx, &scenario, &stem)
}

fn cmd_demo(ctx: &Ctx, name: Option<&str>) -> Outcome {
    let Some(name) = name else {
        for n in BUILTIN_NAMES {
            println!("{n}");
        }
        return Ok(());
    };
    let Some(scenario) = builtin_scenario(name) else {
        return Err(usage(format!(
            "unknown demo '{name}'; available: {}",
            BUILTIN_NAMES.join(", ")
        )));
    };
    println!("{}: {}", scenario.name, scenario.description);
    run_and_report(ctx, &scenario, name)
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx {
        params: load_params(cli.global.params.as_deref())?,
        out: cli.global.out,
        format: cli.global.format,
        unit: cli.global.unit,
    };
    match cli.command {
        Command::Fk { l1, l2, theta } => cmd_fk(&ctx, l1, l2, &theta),
        Command::Ik { x, y, theta, count } => cmd_ik(&ctx, x, y, theta.as_deref(), count),
        Command::Cables { l1, l2, theta, d } => cmd_cables(&ctx, l1, l2, &theta, d),
        Command::ThetaFromCables { c_l, c_r, d } => cmd_theta_from_cables(&ctx, c_l, c_r, d),
        Command::Workspace {
            x_min,
            x_max,
            y_min,
            y_max,
            resolution,
            levels,
        } => cmd_workspace(&ctx, Bounds::new(x_min, x_max, y_min, y_max), resolution, &levels),
        Command::Stiffness {
            kappa,
            theta,
            curves,
            calibrate,
        } => cmd_stiffness(&ctx, kappa, theta.as_deref(), curves, calibrate.as_deref()),
        Command::Simulate { scenario } => cmd_simulate(&ctx, &scenario),
        Command::Demo { name } => cmd_demo(&ctx, name.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli);
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check(m) | Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Io(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
