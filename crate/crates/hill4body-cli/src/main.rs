//! Command-line front end: configuration ingestion, subcommand dispatch,
//! CSV/JSON emission, and the parameter sweeps behind the survey plots.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hill4body::central_config;
use hill4body::equilibria::{
    approx_z_distance, eigensolver_cross_check, find_equilibrium, krein_limit_check,
    stability_spectrum, Axis,
};
use hill4body::params::normalize_system;
use hill4body::propagate::{integrate, Dynamics, IntegrateOptions, Sampling};
use hill4body::{EllipsoidShape, Frame, PhaseState, PhysicalInputs, SystemParams, TriangleConfig};

use table::{Cell, Table};

/// km^3 kg^-1 s^-2
const GRAVITATIONAL_CONSTANT: f64 = 6.67430e-20;
/// Observed distance of the moonlet from the tertiary, for the marker row.
const MOONLET_DISTANCE_KM: f64 = 957.5;

#[derive(Debug, Parser)]
#[command(
    name = "hill4body",
    about = "Hill four-body problem with an oblate tertiary: harmonic tables, \
             central configurations, equilibria, stability spectra, sweeps, \
             and trajectory propagation",
    version
)]
struct Cli {
    /// Key-value configuration file (defaults to the Sun-Jupiter-Hektor
    /// system). Keys: m1_kg, m2_kg, m3_kg, d12_km, radius_km, c20,
    /// spin_hours.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output path (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    All,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    #[value(name = "4bp")]
    FourBody,
    Hill,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spherical-harmonic coefficient table of a triaxial ellipsoid.
    Harmonics(HarmonicsArgs),
    /// Central-configuration vertices and constraint residuals.
    CentralConfig,
    /// Locations of the axis equilibria (Hill units and km).
    Equilibria(EquilibriaArgs),
    /// Full stability report per axis equilibrium.
    Stability(EquilibriaArgs),
    /// Order-of-magnitude comparison of the accelerations on the moonlet.
    Forces(ForcesArgs),
    /// Vertical-equilibrium distance as the zonal coefficient varies.
    SweepZ(SweepZArgs),
    /// Complex-quadruple eigenvalue parts along the vertical family.
    SweepKrein(SweepKreinArgs),
    /// Propagate a trajectory and emit t,x,y,z,vx,vy,vz,H.
    Integrate(IntegrateArgs),
}

#[derive(Debug, Args)]
struct HarmonicsArgs {
    /// Largest semi-axis, km.
    #[arg(long, default_value_t = 208.0)]
    a: f64,
    /// Middle semi-axis, km.
    #[arg(long, default_value_t = 65.5)]
    b: f64,
    /// Smallest semi-axis, km.
    #[arg(long, default_value_t = 60.0)]
    c: f64,
    /// Reference (volume-equivalent) radius, km.
    #[arg(long, default_value_t = 92.0)]
    reference_radius: f64,
    /// Maximum even degree.
    #[arg(long, default_value_t = 6)]
    max_degree: u32,
}

#[derive(Debug, Args)]
struct EquilibriaArgs {
    #[arg(long, value_enum, default_value_t = AxisArg::All)]
    axis: AxisArg,
}

#[derive(Debug, Args)]
struct ForcesArgs {
    /// Smallest distance from the tertiary, km (>= 100).
    #[arg(long, default_value_t = 100.0)]
    r_min: f64,
    /// Largest distance, km (<= 1e6).
    #[arg(long, default_value_t = 1.0e6)]
    r_max: f64,
    #[arg(long, default_value_t = 64)]
    count: usize,
    /// Additionally emit differential (tidal) third-body accelerations.
    #[arg(long)]
    tidal: bool,
}

#[derive(Debug, Args)]
struct SweepZArgs {
    /// Most oblate zonal coefficient.
    #[arg(long, default_value_t = -0.95, allow_hyphen_values = true)]
    c20_min: f64,
    /// Least oblate zonal coefficient.
    #[arg(long, default_value_t = -0.001, allow_hyphen_values = true)]
    c20_max: f64,
    #[arg(long, default_value_t = 96)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    spacing: Spacing,
}

#[derive(Debug, Args)]
struct SweepKreinArgs {
    /// Smallest vertical-equilibrium radius (Hill units).
    #[arg(long, default_value_t = 0.000892354498497342)]
    rz_min: f64,
    /// Largest radius.
    #[arg(long, default_value_t = 0.01)]
    rz_max: f64,
    #[arg(long, default_value_t = 128)]
    count: usize,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Hill)]
    model: ModelArg,
    /// Initial state "x,y,z,vx,vy,vz" (velocity form, model frame).
    #[arg(long, allow_hyphen_values = true)]
    state: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    t1: f64,
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Sample at N uniform times instead of solver steps.
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(table) => match emit(&cli, &table) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl From<hill4body::Error> for CliError {
    fn from(e: hill4body::Error) -> Self {
        match e {
            hill4body::Error::Config(_)
            | hill4body::Error::InvalidPhysicalInput(_)
            | hill4body::Error::ProlateUnsupported { .. }
            | hill4body::Error::InvalidShape(_)
            | hill4body::Error::OddDegree(_)
            | hill4body::Error::InvalidTolerance(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn load_inputs(cli: &Cli) -> Result<PhysicalInputs, CliError> {
    match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(PhysicalInputs::from_config_text(&text)?)
        }
        None => Ok(PhysicalInputs::hektor()),
    }
}

fn emit(cli: &Cli, table: &Table) -> std::io::Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    match cli.format {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Json => table.write_json(&mut buf)?,
    }
    match &cli.out {
        Some(path) => fs::write(path, &buf),
        None => std::io::stdout().write_all(&buf),
    }
}

/// Maps grid points on up to HILL4BODY_THREADS worker threads (default:
/// available parallelism). Output order follows grid order regardless of
/// completion order.
fn parallel_map<T, U, F>(items: Vec<T>, f: F) -> Result<Vec<U>, CliError>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Result<U, CliError> + Sync,
{
    let n = items.len();
    let threads = std::env::var("HILL4BODY_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|t| t.get())
                .unwrap_or(1)
        })
        .min(n.max(1));
    if threads <= 1 {
        return items.into_iter().map(f).collect();
    }
    let queue: Mutex<Vec<(usize, T)>> = Mutex::new(items.into_iter().enumerate().rev().collect());
    let slots: Vec<Mutex<Option<Result<U, CliError>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let next = queue.lock().expect("queue lock").pop();
                match next {
                    Some((i, item)) => {
                        let result = f(item);
                        *slots[i].lock().expect("slot lock") = Some(result);
                    }
                    None => break,
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot lock").expect("slot filled"))
        .collect()
}

fn run(cli: &Cli) -> Result<Table, CliError> {
    match &cli.command {
        Command::Harmonics(args) => cmd_harmonics(args),
        Command::CentralConfig => cmd_central_config(cli),
        Command::Equilibria(args) => cmd_equilibria(cli, args),
        Command::Stability(args) => cmd_stability(cli, args),
        Command::Forces(args) => cmd_forces(cli, args),
        Command::SweepZ(args) => cmd_sweep_z(cli, args),
        Command::SweepKrein(args) => cmd_sweep_krein(cli, args),
        Command::Integrate(args) => cmd_integrate(cli, args),
    }
}

fn system(cli: &Cli) -> Result<(PhysicalInputs, SystemParams, TriangleConfig), CliError> {
    let inputs = load_inputs(cli)?;
    let params = normalize_system(&inputs)?;
    let triangle = TriangleConfig::solve(params.m2, params.m3, params.big_c)?;
    Ok((inputs, params, triangle))
}

fn cmd_harmonics(args: &HarmonicsArgs) -> Result<Table, CliError> {
    let shape = EllipsoidShape::new(args.a, args.b, args.c, args.reference_radius)?;
    let set = hill4body::harmonics::ellipsoid_coefficients(&shape, args.max_degree)?;
    let mut table = Table::new(vec!["n", "m", "C_nm"]);
    for (n, m, value) in set.entries() {
        table.push_row(vec![Cell::Int(n as i64), Cell::Int(m as i64), value.into()]);
    }
    Ok(table)
}

fn cmd_central_config(cli: &Cli) -> Result<Table, CliError> {
    let (_, params, triangle) = system(cli)?;
    let constraint =
        central_config::constraint_residual(params.m2, params.m3, triangle.v, &triangle.vertices);
    let stationarity = triangle
        .stationarity_residuals(params.big_c)
        .into_iter()
        .fold(0.0_f64, |acc, r| acc.max(r.abs()));
    let mut table = Table::new(vec![
        "body",
        "x",
        "y",
        "max_constraint_residual",
        "max_stationarity_residual",
    ]);
    for (name, vtx) in ["primary", "secondary", "tertiary"]
        .iter()
        .zip(triangle.vertices.iter())
    {
        table.push_row(vec![
            (*name).into(),
            vtx.x.into(),
            vtx.y.into(),
            constraint.into(),
            stationarity.into(),
        ]);
    }
    Ok(table)
}

fn requested_axes(axis: AxisArg, c: f64) -> Vec<Axis> {
    match axis {
        AxisArg::X => vec![Axis::X],
        AxisArg::Y => vec![Axis::Y],
        AxisArg::Z => vec![Axis::Z],
        AxisArg::All => {
            if c < 0.0 {
                vec![Axis::X, Axis::Y, Axis::Z]
            } else {
                vec![Axis::X, Axis::Y]
            }
        }
    }
}

fn cmd_equilibria(cli: &Cli, args: &EquilibriaArgs) -> Result<Table, CliError> {
    let (_, params, _) = system(cli)?;
    let mut table = Table::new(vec!["axis", "r_star", "x", "y", "z", "r_km"]);
    for axis in requested_axes(args.axis, params.little_c) {
        let p = find_equilibrium(axis, params.lambda1, params.lambda2, params.little_c)?;
        table.push_row(vec![
            axis.name().into(),
            p.r_star.into(),
            p.location.x.into(),
            p.location.y.into(),
            p.location.z.into(),
            params.hill_to_km(p.r_star).into(),
        ]);
    }
    Ok(table)
}

fn cmd_stability(cli: &Cli, args: &EquilibriaArgs) -> Result<Table, CliError> {
    let (_, params, _) = system(cli)?;
    let mut columns: Vec<String> = [
        "axis", "r_star", "x", "y", "z", "Oxx", "Oyy", "Ozz", "A", "B", "D",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 1..=6 {
        columns.push(format!("re{i}"));
    }
    for i in 1..=6 {
        columns.push(format!("im{i}"));
    }
    columns.push("class".to_string());
    let mut table = Table::new(columns);
    for axis in requested_axes(args.axis, params.little_c) {
        let p = find_equilibrium(axis, params.lambda1, params.lambda2, params.little_c)?;
        let r = stability_spectrum(&p, params.lambda1, params.lambda2, params.little_c)?;
        // safety net: factored roots vs dense 6x6 eigensolve
        let disc = eigensolver_cross_check(&r, params.lambda1, params.lambda2, params.little_c)?;
        if disc > 1e-6 {
            return Err(CliError::Numerical(format!(
                "eigensolver cross-check failed on the {} axis: discrepancy {disc:e}",
                axis.name()
            )));
        }
        let mut row: Vec<Cell> = vec![
            axis.name().into(),
            r.r_star.into(),
            r.location.x.into(),
            r.location.y.into(),
            r.location.z.into(),
            r.hessian_diag[0].into(),
            r.hessian_diag[1].into(),
            r.hessian_diag[2].into(),
            r.quartic.a.into(),
            r.quartic.b.into(),
            r.quartic.d.into(),
        ];
        for e in &r.eigenvalues {
            row.push(e.re.into());
        }
        for e in &r.eigenvalues {
            row.push(e.im.into());
        }
        row.push(r.class.name().into());
        table.push_row(row);
    }
    Ok(table)
}

fn cmd_forces(cli: &Cli, args: &ForcesArgs) -> Result<Table, CliError> {
    if args.count < 2 {
        return Err(CliError::Config("force grid needs count >= 2".into()));
    }
    if !(args.r_min >= 100.0 && args.r_max <= 1.0e6 && args.r_min < args.r_max) {
        return Err(CliError::Config(
            "force grid must satisfy 100 <= r_min < r_max <= 1e6 km".into(),
        ));
    }
    let inputs = load_inputs(cli)?;
    let gm_tertiary = GRAVITATIONAL_CONSTANT * inputs.mass_tertiary_kg;
    let gm_primary = GRAVITATIONAL_CONSTANT * inputs.mass_primary_kg;
    let gm_secondary = GRAVITATIONAL_CONSTANT * inputs.mass_secondary_kg;
    // both distant bodies sit one configuration long side away from the
    // tertiary
    let d_third = inputs.distance_primary_secondary_km;
    let mut columns = vec![
        "r_km".to_string(),
        "log10_monopole".to_string(),
        "log10_sun".to_string(),
        "log10_jupiter".to_string(),
        "log10_j2".to_string(),
    ];
    if args.tidal {
        columns.push("log10_tidal_sun".to_string());
        columns.push("log10_tidal_jupiter".to_string());
    }
    columns.push("moonlet_marker".to_string());
    let mut table = Table::new(columns);
    let log_lo = args.r_min.ln();
    let log_hi = args.r_max.ln();
    let mut grid: Vec<f64> = (0..args.count)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (args.count - 1) as f64).exp())
        .collect();
    if args.r_min <= MOONLET_DISTANCE_KM && MOONLET_DISTANCE_KM <= args.r_max {
        grid.push(MOONLET_DISTANCE_KM);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    for r in grid {
        let monopole = gm_tertiary / (r * r);
        let sun = gm_primary / (d_third * d_third);
        let jupiter = gm_secondary / (d_third * d_third);
        let j2 =
            1.5 * gm_tertiary * inputs.equivalent_radius_km.powi(2) * inputs.c20.abs() / r.powi(4);
        let mut row: Vec<Cell> = vec![
            r.into(),
            monopole.log10().into(),
            sun.log10().into(),
            jupiter.log10().into(),
            j2.log10().into(),
        ];
        if args.tidal {
            row.push((2.0 * gm_primary * r / d_third.powi(3)).log10().into());
            row.push((2.0 * gm_secondary * r / d_third.powi(3)).log10().into());
        }
        row.push(Cell::Int(i64::from(r == MOONLET_DISTANCE_KM)));
        table.push_row(row);
    }
    Ok(table)
}

fn cmd_sweep_z(cli: &Cli, args: &SweepZArgs) -> Result<Table, CliError> {
    if args.count < 2 {
        return Err(CliError::Config("sweep needs count >= 2".into()));
    }
    if !(args.c20_min > -1.0
        && args.c20_min < 0.0
        && args.c20_max < 0.0
        && args.c20_min != args.c20_max)
    {
        return Err(CliError::Config(
            "zonal sweep range must lie in (-1, 0) with distinct endpoints".into(),
        ));
    }
    let (inputs, params, _) = system(cli)?;
    let grid: Vec<f64> = match args.spacing {
        Spacing::Linear => (0..args.count)
            .map(|i| {
                args.c20_min + (args.c20_max - args.c20_min) * i as f64 / (args.count - 1) as f64
            })
            .collect(),
        Spacing::Log => {
            let lo = (-args.c20_min).ln();
            let hi = (-args.c20_max).ln();
            (0..args.count)
                .map(|i| -((lo + (hi - lo) * i as f64 / (args.count - 1) as f64).exp()))
                .collect()
        }
    };
    let rows = parallel_map(grid, |c20| {
        // rescaled oblateness for this zonal coefficient, same body size
        let c = params.rho3 * params.rho3 * c20 / 2.0;
        let point = find_equilibrium(Axis::Z, params.lambda1, params.lambda2, c)?;
        let r_km = params.hill_to_km(point.r_star);
        let r_hat_km = approx_z_distance(inputs.equivalent_radius_km, c20);
        Ok(vec![
            Cell::from(c20),
            c.into(),
            point.r_star.into(),
            r_km.into(),
            r_hat_km.into(),
        ])
    })?;
    let mut table = Table::new(vec!["c20", "c", "r_z_hill", "r_z_km", "r_hat_z_km"]);
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

fn cmd_sweep_krein(cli: &Cli, args: &SweepKreinArgs) -> Result<Table, CliError> {
    if args.count < 2 {
        return Err(CliError::Config("sweep needs count >= 2".into()));
    }
    if !(args.rz_min > 0.0 && args.rz_max > args.rz_min) {
        return Err(CliError::Config("need 0 < rz_min < rz_max".into()));
    }
    let (_, params, _) = system(cli)?;
    let grid: Vec<f64> = (0..args.count)
        .map(|i| args.rz_min + (args.rz_max - args.rz_min) * i as f64 / (args.count - 1) as f64)
        .collect();
    let rows = parallel_map(grid, |r_z| {
        let samples = krein_limit_check(&[r_z], params.mu, params.v)?;
        let s = samples[0];
        Ok(vec![
            Cell::from(s.r_z),
            s.c.into(),
            s.a.into(),
            s.b_abs.into(),
            s.b_abs_minus_one.into(),
        ])
    })?;
    let mut table = Table::new(vec!["r_z", "c", "a", "abs_b", "abs_b_minus_one"]);
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

fn cmd_integrate(cli: &Cli, args: &IntegrateArgs) -> Result<Table, CliError> {
    let (_, params, triangle) = system(cli)?;
    let parts: Vec<f64> = args
        .state
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad --state: {e}")))?;
    if parts.len() != 6 {
        return Err(CliError::Config(format!(
            "--state needs 6 components, got {}",
            parts.len()
        )));
    }
    let dynamics = match args.model {
        ModelArg::FourBody => Dynamics::four_body(&params, &triangle),
        ModelArg::Hill => Dynamics::hill(params.lambda1, params.lambda2, params.little_c),
    };
    let frame = match args.model {
        ModelArg::FourBody => Frame::Synodic4bp,
        ModelArg::Hill => Frame::HillRotated,
    };
    let initial = PhaseState::velocity_state(
        frame,
        hill4body::nalgebra::Vector3::new(parts[0], parts[1], parts[2]),
        hill4body::nalgebra::Vector3::new(parts[3], parts[4], parts[5]),
    );
    let sampling = match args.samples {
        Some(n) => Sampling::Uniform(n),
        None => Sampling::SolverSteps,
    };
    let options = IntegrateOptions {
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        sampling,
        min_distance: 1e-9,
    };
    let traj = integrate(&initial, (args.t0, args.t1), &dynamics, &options)?;
    let mut table = Table::new(vec!["t", "x", "y", "z", "vx", "vy", "vz", "H"]);
    for ((t, state), energy) in traj
        .times
        .iter()
        .zip(traj.states.iter())
        .zip(traj.energies.iter())
    {
        table.push_row(vec![
            (*t).into(),
            state.position.x.into(),
            state.position.y.into(),
            state.position.z.into(),
            state.velocity.x.into(),
            state.velocity.y.into(),
            state.velocity.z.into(),
            (*energy).into(),
        ]);
    }
    Ok(table)
}
