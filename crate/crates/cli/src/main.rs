use anyhow::{bail, Context, Result};
use bbm_core::data::{bt_gamma, phi_bt, phi_periodic, phi_sharp};
use bbm_core::picard::{i2_closed_form, i2_duhamel, Trajectory};
use bbm_core::solver::{evolve, invariant_h1, invariant_mean, residual_ivp1};
use bbm_core::{FrequencyGrid, SolverConfig, SpectralField};
use bbm_lab::config::{parse_list, Experiment, ExperimentConfig, ModeSpec, PartialConfig};
use bbm_lab::experiments::{self, theta_scan};
use bbm_lab::report::{self, emit_outputs};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

/// Pseudospectral laboratory for the BBM equation: counterexample data
/// families, the quadratic Picard iterate by two routes, full nonlinear
/// evolution, and the norm-inflation sweeps built from them.
#[derive(Parser)]
#[command(name = "bbm-lab", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the resonance function over a rectangular (xi, xi1) lattice
    ThetaScan(ThetaScanArgs),
    /// Emit a data family's spectrum, physical samples and norm summary
    Data(DataArgs),
    /// Compute the second Picard iterate by one or both routes
    I2(I2Args),
    /// Integrate the equation and stream conservation diagnostics
    Evolve(EvolveArgs),
    /// Sweep: data norms stay O(1) in L2 while every H^s, s < 0, decays
    DataNorms(SweepArgs),
    /// Sweep: the second iterate's H^s norm does not decay in N
    I2Inflation(SweepArgs),
    /// Sweep: the quadratic term approximates the flow to O(eps^3)
    SeriesApprox(SweepArgs),
    /// Sweep: the flow map stays bounded below while the data vanishes
    Discontinuity(SweepArgs),
    /// Bundled integrator convergence and conservation checks
    SolverValidate(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; individual flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated band centers, e.g. 16,32,64,128
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated Sobolev indices, e.g. -0.5,-1
    #[arg(long, allow_hyphen_values = true)]
    s_list: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    half_modes: Option<usize>,
    #[arg(long)]
    delta_xi: Option<f64>,
    /// line_approx | periodic
    #[arg(long)]
    mode: Option<ModeSpec>,
    /// Time-quadrature panel count (even)
    #[arg(long)]
    q: Option<usize>,
    /// Inner-lattice refinement of the closed-form iterate
    #[arg(long)]
    refine: Option<usize>,
    /// Integrator step target
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl SweepArgs {
    fn resolve(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let file = self
            .config
            .as_deref()
            .map(PartialConfig::from_file)
            .transpose()?;
        let flags = PartialConfig {
            experiment: None,
            n_list: self.n_list.as_deref().map(parse_list).transpose()?,
            s_list: self.s_list.as_deref().map(parse_list).transpose()?,
            t: self.t,
            eps: self.eps,
            grid: bbm_lab::config::PartialGrid {
                half_modes: self.half_modes,
                delta_xi: self.delta_xi,
                mode: self.mode,
            },
            quadrature: bbm_lab::config::PartialQuadrature {
                q: self.q,
                refine: self.refine,
            },
            solver: bbm_lab::config::PartialSolver { dt: self.dt },
            output_dir: self.output_dir.clone(),
        };
        ExperimentConfig::resolve(experiment, file, flags)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    half_modes: Option<usize>,
    #[arg(long)]
    delta_xi: Option<f64>,
    /// line_approx | periodic
    #[arg(long)]
    mode: Option<ModeSpec>,
}

impl GridArgs {
    /// Grid large enough for one datum at center `n` and its quadratic image.
    fn build(&self, n: f64, family: Family) -> Result<FrequencyGrid> {
        let mode = self.mode.unwrap_or(match family {
            Family::Periodic => ModeSpec::Periodic,
            _ => ModeSpec::LineApprox,
        });
        let delta_xi = self.delta_xi.unwrap_or(match mode {
            ModeSpec::Periodic => 1.0,
            ModeSpec::LineApprox => 1.0 / 16.0,
        });
        let half = self
            .half_modes
            .unwrap_or(((2.0 * n + 4.0) / delta_xi).ceil() as usize);
        FrequencyGrid::new(half, delta_xi, mode.to_core()).map_err(Into::into)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Family {
    Sharp,
    Bt,
    Periodic,
}

impl Family {
    fn as_str(&self) -> &'static str {
        match self {
            Family::Sharp => "sharp",
            Family::Bt => "bt_scaled",
            Family::Periodic => "periodic",
        }
    }
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, value_enum, default_value = "sharp")]
    family: Family,
    #[arg(long)]
    n: f64,
    /// Sobolev index for the reported norm (and the bt amplitude)
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    s: f64,
    /// Band-width exponent of the bt family, gamma = N^-sigma
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Band half-width of the periodic family
    #[arg(long, default_value_t = 1)]
    width: i64,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct I2Args {
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value_t = 256)]
    q: usize,
    #[arg(long, default_value_t = 1)]
    refine: usize,
    #[arg(long, value_parser = ["duhamel", "closed", "both"], default_value = "both")]
    method: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Columnar spectrum dump of the computed iterate
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long, value_enum, default_value = "sharp")]
    family: Family,
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    s: f64,
    /// Diagnostics cadence in steps
    #[arg(long, default_value_t = 100)]
    check_every: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Columnar spectrum dump of the final state
    #[arg(long)]
    dump_final: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaScanArgs {
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    xi_min: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    xi_max: f64,
    #[arg(long, default_value_t = 101)]
    xi_steps: usize,
    #[arg(long, allow_hyphen_values = true)]
    xi1_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    xi1_max: f64,
    #[arg(long, default_value_t = 201)]
    xi1_steps: usize,
    #[arg(long, default_value = "theta.csv")]
    output: PathBuf,
}

fn build_family(
    family: Family,
    n: f64,
    s: f64,
    sigma: f64,
    width: i64,
    grid: &FrequencyGrid,
) -> Result<SpectralField> {
    Ok(match family {
        Family::Sharp => phi_sharp(n, grid)?,
        Family::Bt => phi_bt(n, s, sigma, grid)?,
        Family::Periodic => phi_periodic(n as i64, width, grid)?,
    })
}

fn cmd_data(args: &DataArgs) -> Result<()> {
    let grid = args.grid.build(args.n, args.family)?;
    let field = build_family(args.family, args.n, args.s, args.sigma, args.width, &grid)?;

    std::fs::create_dir_all(&args.output_dir)?;
    let spec_path = args.output_dir.join("spectrum.txt");
    let mut buf = Vec::new();
    field.write_columnar(&mut buf)?;
    std::fs::write(&spec_path, buf)?;

    let phys_path = args.output_dir.join("physical.txt");
    let mut text = String::from("# x re im\n");
    for (x, v) in field.physical_samples() {
        text.push_str(&format!("{x:.16e} {:.16e} {:.16e}\n", v.re, v.im));
    }
    std::fs::write(&phys_path, text)?;

    let mut summary = serde_json::json!({
        "family": args.family.as_str(),
        "N": args.n,
        "s": args.s,
        "l2": field.l2_norm(),
        "hs": field.hs_norm(args.s),
    });
    if args.family == Family::Bt {
        summary["gamma"] = bt_gamma(args.n, args.sigma).into();
    }
    println!("{summary}");
    Ok(())
}

fn cmd_i2(args: &I2Args) -> Result<()> {
    let grid = args.grid.build(args.n, Family::Sharp)?;
    let data = match grid.mode() {
        bbm_core::GridMode::LineApprox => phi_sharp(args.n, &grid)?,
        bbm_core::GridMode::Periodic => phi_periodic(args.n as i64, 1, &grid)?,
    };
    let (field, discrepancy) = match args.method.as_str() {
        "duhamel" => (i2_duhamel(&data, args.t, args.q)?, None),
        "closed" => (i2_closed_form(&data, args.t, args.refine)?, None),
        _ => {
            let by_time = i2_duhamel(&data, args.t, args.q)?;
            let closed = i2_closed_form(&data, args.t, args.refine)?;
            let gap = by_time.sub(&closed)?.l2_norm() / closed.l2_norm().max(f64::MIN_POSITIVE);
            (by_time, Some(gap))
        }
    };
    if let Some(path) = &args.dump {
        let mut buf = Vec::new();
        field.write_columnar(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    println!(
        "{}",
        serde_json::json!({
            "N": args.n,
            "t": args.t,
            "s": args.s,
            "hs_norm_I2": field.hs_norm(args.s),
            "method_discrepancy": discrepancy,
        })
    );
    Ok(())
}

fn cmd_evolve(args: &EvolveArgs) -> Result<()> {
    let grid = args.grid.build(args.n, args.family)?;
    let data = build_family(args.family, args.n, args.s, 0.1, 1, &grid)?;
    let u0 = data.scale(Complex64::new(args.eps, 0.0));
    let solver = SolverConfig::for_interval(args.dt, args.t)?;
    let traj = evolve(&u0, &solver)?;

    let m0 = invariant_mean(traj.field(0));
    let h0 = invariant_h1(traj.field(0));
    let steps = traj.steps();
    let cadence = args.check_every.max(1);
    for q in (0..=steps).step_by(cadence) {
        let f = traj.field(q);
        let window_residual = if q >= 2 && q + 2 <= steps {
            let window = traj.fields()[q - 2..=q + 2].to_vec();
            Some(residual_ivp1(&Trajectory::from_fields(traj.dt(), window)?)?)
        } else {
            None
        };
        println!(
            "{}",
            serde_json::json!({
                "t": q as f64 * traj.dt(),
                "l2": f.l2_norm(),
                "hs": f.hs_norm(args.s),
                "mean_drift": invariant_mean(f) - m0,
                "h1_drift": if h0 > 0.0 { (invariant_h1(f) - h0) / h0 } else { 0.0 },
                "residual": window_residual,
            })
        );
    }
    if let Some(path) = &args.dump_final {
        let mut buf = Vec::new();
        traj.final_field().write_columnar(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok(())
}

fn cmd_theta_scan(args: &ThetaScanArgs) -> Result<()> {
    if args.xi1_max <= args.xi1_min {
        bail!("xi1 range must be increasing");
    }
    let rows = theta_scan(
        (args.xi_min, args.xi_max, args.xi_steps),
        (args.xi1_min, args.xi1_max, args.xi1_steps),
    )?;
    report::write_theta_csv(&args.output, &rows)?;
    eprintln!("wrote {} rows to {}", rows.len(), args.output.display());
    Ok(())
}

fn run_sweep(experiment: Experiment, args: &SweepArgs) -> Result<ExitCode> {
    let cfg = args.resolve(experiment)?;
    let outcome = experiments::run(&cfg).context("experiment failed")?;
    let files = emit_outputs(&outcome, &cfg)?;
    for check in &outcome.checks {
        eprintln!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    eprintln!(
        "{} rows -> {} ({} checks)",
        outcome.rows.len(),
        files.csv.display(),
        outcome.checks.len()
    );
    if outcome.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let first = outcome.first_failure().unwrap();
        eprintln!("predicate failed: {} ({})", first.name, first.detail);
        Ok(ExitCode::from(1))
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Command::ThetaScan(a) => cmd_theta_scan(a).map(|_| ExitCode::SUCCESS),
        Command::Data(a) => cmd_data(a).map(|_| ExitCode::SUCCESS),
        Command::I2(a) => cmd_i2(a).map(|_| ExitCode::SUCCESS),
        Command::Evolve(a) => cmd_evolve(a).map(|_| ExitCode::SUCCESS),
        Command::DataNorms(a) => run_sweep(Experiment::DataNorms, a),
        Command::I2Inflation(a) => run_sweep(Experiment::I2Inflation, a),
        Command::SeriesApprox(a) => run_sweep(Experiment::SeriesApprox, a),
        Command::Discontinuity(a) => run_sweep(Experiment::Discontinuity, a),
        Command::SolverValidate(a) => run_sweep(Experiment::SolverValidate, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
