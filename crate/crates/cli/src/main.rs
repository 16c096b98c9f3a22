//! `vecfilt`: batch front end for the color vector-filtering toolkit.
//!
//! Subcommands cover the full experiment loop: corrupt an image with seeded
//! noise, filter it (exact or approximated kernels), score the result,
//! benchmark exact against approximate, fit fresh minimax coefficients, and
//! certify coefficient tables.
//!
//! Exit codes: 0 on success, 1 on usage or validation failure, 2 when a
//! coefficient certification fails.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use vecfilt_core::fastmath::{KernelCheck, KernelTable, EXP_CUTOFF};
use vecfilt_core::filters::{ExpVariant, FilterFamily, FilterSpec, KernelMode, run_filter};
use vecfilt_core::imagecore::{load_ppm, save_ppm, Border, PpmFormat, RgbImage};
use vecfilt_core::metrics::QualityReport;
use vecfilt_core::minimax::{
    remez_fit_detailed, write_table, write_table_string, Approx, TableRecord, DEFAULT_MAX_ITERS,
    DEFAULT_TOL, MIN_CERTIFY_GRID,
};
use vecfilt_core::noise::{corrupt, ImpulseKind, NoiseModel, NoiseSpec};

#[derive(Parser)]
#[command(
    name = "vecfilt",
    version,
    about = "Vector order-statistics filtering for color PPM images"
)]
struct Cli {
    /// Worker threads for the filtering engine (default: all cores).
    /// Outputs are bit-identical regardless of the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt an image with seeded impulsive or mixed noise
    Noise {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Pixel corruption probability (correlated and mixed models)
        #[arg(long)]
        phi: f64,
        /// Per-channel probabilities as `a,b,c`
        #[arg(long, value_parser = parse_triple, default_value = "0.25,0.25,0.25")]
        phi_k: [f64; 3],
        /// Gaussian sigma for the mixed model
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = ImpulseArg::Uniform)]
        impulse: ImpulseArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write ASCII (P3) instead of binary (P6)
        #[arg(long)]
        ascii: bool,
    },
    /// Run one vector filter over an image
    Filter {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Window side length (odd, at least 3)
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// AMNF bandwidth exponent
        #[arg(long, default_value_t = 0.33)]
        kappa: f64,
        /// Exponential fit used by approximate AMNF
        #[arg(long, value_enum, default_value_t = VariantArg::Rational)]
        exp_variant: VariantArg,
        #[arg(long, value_enum, default_value_t = BorderArg::Replicate)]
        border: BorderArg,
        #[arg(long)]
        ascii: bool,
    },
    /// Score a restored image against a reference
    Eval {
        reference: PathBuf,
        test: PathBuf,
    },
    /// Corrupt, filter exact and approximate, and time both
    Bench {
        input: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = 0.33)]
        kappa: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::Rational)]
        exp_variant: VariantArg,
        #[arg(long, value_enum, default_value_t = ModelArg::Correlated)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.1)]
        phi: f64,
        #[arg(long, value_parser = parse_triple, default_value = "0.25,0.25,0.25")]
        phi_k: [f64; 3],
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = ImpulseArg::Uniform)]
        impulse: ImpulseArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit a minimax polynomial to one of the filter kernels
    Fit {
        #[arg(long, value_enum)]
        function: FitFunction,
        /// Polynomial degree (default: the degree the built-in table uses)
        #[arg(long)]
        degree: Option<usize>,
        /// Fit interval as `a,b` (default: the function's native interval)
        #[arg(long, value_parser = parse_interval)]
        interval: Option<(f64, f64)>,
        /// Equioscillation tolerance
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Coefficient table destination (default: standard output)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify coefficient tables against the exact kernels
    VerifyCoeffs {
        #[arg(long, default_value_t = 1_000_000)]
        grid_points: usize,
        /// External coefficient table (default: the built-in one)
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Uncorrelated,
    Correlated,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImpulseArg {
    Uniform,
    Saltpepper,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bvdf,
    Amnfe,
    Amnfg,
    Evmf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Rational,
    Poly2,
    Poly3,
    Poly4,
}

#[derive(Clone, Copy, ValueEnum)]
enum BorderArg {
    Replicate,
    Skip,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitFunction {
    /// arccos(z) on [0, 0.5]
    Arccos,
    /// 2 arcsin(t / sqrt(2)) on [0, 1/sqrt(2)]
    Arcsin2,
    /// exp(-z) on [0, 10]
    Expneg,
}

impl From<ModelArg> for NoiseModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Uncorrelated => NoiseModel::UncorrelatedImpulsive,
            ModelArg::Correlated => NoiseModel::CorrelatedImpulsive,
            ModelArg::Mixed => NoiseModel::Mixed,
        }
    }
}

impl From<ImpulseArg> for ImpulseKind {
    fn from(i: ImpulseArg) -> Self {
        match i {
            ImpulseArg::Uniform => ImpulseKind::Uniform,
            ImpulseArg::Saltpepper => ImpulseKind::SaltPepper,
        }
    }
}

impl From<FamilyArg> for FilterFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bvdf => FilterFamily::Bvdf,
            FamilyArg::Amnfe => FilterFamily::Amnfe,
            FamilyArg::Amnfg => FilterFamily::Amnfg,
            FamilyArg::Evmf => FilterFamily::Evmf,
        }
    }
}

impl From<VariantArg> for ExpVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Rational => ExpVariant::Rational,
            VariantArg::Poly2 => ExpVariant::Poly2,
            VariantArg::Poly3 => ExpVariant::Poly3,
            VariantArg::Poly4 => ExpVariant::Poly4,
        }
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| format!("bad number {part:?}: {e}"))?;
    }
    Ok(out)
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got {s:?}"));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("bad number {:?}: {e}", parts[0]))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("bad number {:?}: {e}", parts[1]))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("interval must satisfy a < b, got {a},{b}"));
    }
    Ok((a, b))
}

/// A command failure carrying its exit code: 1 for usage/validation, 2 for
/// certification failures.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn certification(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

macro_rules! usage {
    ($($arg:tt)*) => { Failure::usage(format!($($arg)*)) };
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version are not failures
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure thread pool: {err}");
            return 1;
        }
    }

    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Noise {
            input,
            output,
            model,
            phi,
            phi_k,
            sigma,
            impulse,
            seed,
            ascii,
        } => cmd_noise(
            &input, &output, model, phi, phi_k, sigma, impulse, seed, ascii,
        ),
        Command::Filter {
            input,
            output,
            family,
            mode,
            window,
            kappa,
            exp_variant,
            border,
            ascii,
        } => cmd_filter(
            &input,
            &output,
            family,
            mode,
            window,
            kappa,
            exp_variant,
            border,
            ascii,
        ),
        Command::Eval { reference, test } => cmd_eval(&reference, &test),
        Command::Bench {
            input,
            family,
            runs,
            window,
            kappa,
            exp_variant,
            model,
            phi,
            phi_k,
            sigma,
            impulse,
            seed,
        } => cmd_bench(
            &input,
            family,
            runs,
            window,
            kappa,
            exp_variant,
            model,
            phi,
            phi_k,
            sigma,
            impulse,
            seed,
        ),
        Command::Fit {
            function,
            degree,
            interval,
            tol,
            max_iters,
            out,
        } => cmd_fit(function, degree, interval, tol, max_iters, out.as_deref()),
        Command::VerifyCoeffs { grid_points, table } => {
            cmd_verify_coeffs(grid_points, table.as_deref())
        }
    }
}

fn load(path: &std::path::Path) -> Result<RgbImage, Failure> {
    load_ppm(path).map_err(|e| usage!("cannot read {}: {e}", path.display()))
}

fn save(img: &RgbImage, path: &std::path::Path, ascii: bool) -> Result<(), Failure> {
    let format = if ascii {
        PpmFormat::Ascii
    } else {
        PpmFormat::Binary
    };
    save_ppm(img, path, format).map_err(|e| usage!("cannot write {}: {e}", path.display()))
}

fn build_noise_spec(
    model: ModelArg,
    phi: f64,
    phi_k: [f64; 3],
    sigma: f64,
    impulse: ImpulseArg,
    seed: u64,
) -> Result<NoiseSpec, Failure> {
    let spec = NoiseSpec {
        model: model.into(),
        phi,
        phi_k,
        gaussian_sigma: sigma,
        impulse: impulse.into(),
        seed,
    };
    spec.validate().map_err(|e| match e {
        vecfilt_core::noise::NoiseError::BadPhi(v) => {
            usage!("phi out of range: must lie in [0, 1], got {v}")
        }
        other => usage!("{other}"),
    })?;
    Ok(spec)
}

#[allow(clippy::too_many_arguments)]
fn cmd_noise(
    input: &std::path::Path,
    output: &std::path::Path,
    model: ModelArg,
    phi: f64,
    phi_k: [f64; 3],
    sigma: f64,
    impulse: ImpulseArg,
    seed: u64,
    ascii: bool,
) -> Result<(), Failure> {
    let spec = build_noise_spec(model, phi, phi_k, sigma, impulse, seed)?;
    let img = load(input)?;
    let noisy = corrupt(&img, &spec).map_err(|e| usage!("{e}"))?;

    let altered = noisy
        .pixels()
        .iter()
        .zip(img.pixels())
        .filter(|(a, b)| a != b)
        .count();
    let fraction = altered as f64 / img.pixels().len() as f64;

    save(&noisy, output, ascii)?;
    println!("seed={seed} corrupted_fraction={fraction:.6}");
    Ok(())
}

fn build_filter_spec(
    family: FamilyArg,
    mode: ModeArg,
    window: usize,
    kappa: f64,
    exp_variant: VariantArg,
    border: BorderArg,
) -> Result<FilterSpec, Failure> {
    if window % 2 == 0 {
        return Err(usage!("window must be odd, got {window}"));
    }
    if window < 3 {
        return Err(usage!("window must be at least 3, got {window}"));
    }
    if !(kappa > 0.0) {
        return Err(usage!("kappa must be positive, got {kappa}"));
    }
    let mut spec = FilterSpec::new(
        family.into(),
        match mode {
            ModeArg::Exact => KernelMode::Exact,
            ModeArg::Approx => KernelMode::Approx,
        },
        window,
    );
    spec.kappa = kappa;
    spec.exp_variant = exp_variant.into();
    spec.border = match border {
        BorderArg::Replicate => Border::Replicate,
        BorderArg::Skip => Border::Skip,
    };
    Ok(spec)
}

#[allow(clippy::too_many_arguments)]
fn cmd_filter(
    input: &std::path::Path,
    output: &std::path::Path,
    family: FamilyArg,
    mode: ModeArg,
    window: usize,
    kappa: f64,
    exp_variant: VariantArg,
    border: BorderArg,
    ascii: bool,
) -> Result<(), Failure> {
    let spec = build_filter_spec(family, mode, window, kappa, exp_variant, border)?;
    let img = load(input)?;
    let (filtered, elapsed) = run_filter(&img, &spec).map_err(|e| usage!("{e}"))?;
    save(&filtered, output, ascii)?;
    println!("time={elapsed:.6}");
    Ok(())
}

fn cmd_eval(reference: &std::path::Path, test: &std::path::Path) -> Result<(), Failure> {
    let reference_img = load(reference)?;
    let test_img = load(test)?;
    let start = Instant::now();
    let report = QualityReport::measure(&reference_img, &test_img, std::time::Duration::ZERO)
        .map_err(|e| usage!("{e}"))?;
    let report = QualityReport {
        elapsed: start.elapsed(),
        ..report
    };
    println!("{report}");
    Ok(())
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn stdev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

fn delta_percent(exact: f64, approx: f64) -> f64 {
    if exact == 0.0 {
        if approx == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * (exact - approx) / exact
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    input: &std::path::Path,
    family: FamilyArg,
    runs: usize,
    window: usize,
    kappa: f64,
    exp_variant: VariantArg,
    model: ModelArg,
    phi: f64,
    phi_k: [f64; 3],
    sigma: f64,
    impulse: ImpulseArg,
    seed: u64,
) -> Result<(), Failure> {
    if runs == 0 {
        return Err(usage!("runs must be at least 1"));
    }
    let noise_spec = build_noise_spec(model, phi, phi_k, sigma, impulse, seed)?;
    let exact_spec = build_filter_spec(
        family,
        ModeArg::Exact,
        window,
        kappa,
        exp_variant,
        BorderArg::Replicate,
    )?;
    let approx_spec = FilterSpec {
        mode: KernelMode::Approx,
        ..exact_spec
    };

    let clean = load(input)?;
    // both modes consume the identical corrupted image
    let noisy = corrupt(&clean, &noise_spec).map_err(|e| usage!("{e}"))?;

    let time_one = |spec: &FilterSpec| -> Result<(RgbImage, Vec<f64>), Failure> {
        let mut times = Vec::with_capacity(runs);
        let mut out = None;
        for _ in 0..runs {
            let (img, secs) = run_filter(&noisy, spec).map_err(|e| usage!("{e}"))?;
            times.push(secs);
            out = Some(img);
        }
        times.sort_by(f64::total_cmp);
        Ok((out.expect("runs >= 1"), times))
    };

    let (exact_out, exact_times) = time_one(&exact_spec)?;
    let (approx_out, approx_times) = time_one(&approx_spec)?;

    let exact_quality =
        QualityReport::measure(&clean, &exact_out, std::time::Duration::ZERO)
            .map_err(|e| usage!("{e}"))?;
    let approx_quality =
        QualityReport::measure(&clean, &approx_out, std::time::Duration::ZERO)
            .map_err(|e| usage!("{e}"))?;

    let exact_median = median(&exact_times);
    let approx_median = median(&approx_times);
    let speedup = 100.0 * (exact_median / approx_median - 1.0);

    let family_name = match family {
        FamilyArg::Bvdf => "bvdf",
        FamilyArg::Amnfe => "amnfe",
        FamilyArg::Amnfg => "amnfg",
        FamilyArg::Evmf => "evmf",
    };
    println!(
        "filter={family_name} window={window} runs={runs} seed={seed} phi={phi} threads={}",
        rayon::current_num_threads()
    );
    println!(
        "exact_time median={:.6} stdev={:.6}",
        exact_median,
        stdev(&exact_times)
    );
    println!(
        "approx_time median={:.6} stdev={:.6}",
        approx_median,
        stdev(&approx_times)
    );
    println!("speedup_percent={speedup:.3}");
    println!(
        "quality_delta_percent mae={:.6} mse={:.6} ncd={:.6}",
        delta_percent(exact_quality.mae, approx_quality.mae),
        delta_percent(exact_quality.mse, approx_quality.mse),
        delta_percent(exact_quality.ncd, approx_quality.ncd),
    );
    Ok(())
}

fn cmd_fit(
    function: FitFunction,
    degree: Option<usize>,
    interval: Option<(f64, f64)>,
    tol: f64,
    max_iters: usize,
    out: Option<&std::path::Path>,
) -> Result<(), Failure> {
    let (name_base, default_degree, default_interval): (&str, usize, (f64, f64)) = match function {
        FitFunction::Arccos => ("ARCCOS", 4, (0.0, 0.5)),
        FitFunction::Arcsin2 => ("ARCSIN2", 4, (0.0, std::f64::consts::FRAC_1_SQRT_2)),
        FitFunction::Expneg => ("EXPNEG_POLY", 3, (0.0, EXP_CUTOFF)),
    };
    let degree = degree.unwrap_or(default_degree);
    let interval = interval.unwrap_or(default_interval);
    let name = match function {
        FitFunction::Expneg => format!("{name_base}{degree}"),
        _ => name_base.to_string(),
    };

    let target = |z: f64| match function {
        FitFunction::Arccos => z.acos(),
        FitFunction::Arcsin2 => 2.0 * (z * std::f64::consts::FRAC_1_SQRT_2).asin(),
        FitFunction::Expneg => (-z).exp(),
    };

    let result = remez_fit_detailed(target, degree, interval, tol, max_iters)
        .map_err(|e| usage!("fit failed: {e}"))?;

    println!(
        "name={name} degree={degree} interval={},{} iterations={}",
        interval.0, interval.1, result.iterations
    );
    println!("eps={:.6e}", result.approx.eps());

    let record = TableRecord::poly(&name, result.approx);
    match out {
        Some(path) => {
            write_table(&[record], path).map_err(|e| usage!("cannot write table: {e}"))?;
            println!("table written to {}", path.display());
        }
        None => print!("{}", write_table_string(&[record])),
    }
    Ok(())
}

/// Collapses the three EXPNEG_POLY checks into one display row carrying the
/// worst measured/stored ratio, yielding one row per certified kernel:
/// ARCCOS, ARCSIN2, EXPNEG_POLY, EXPNEG_RAT, ENT_RAT.
fn group_checks(checks: Vec<KernelCheck>) -> Vec<(String, KernelCheck, bool)> {
    let mut rows = Vec::new();
    let mut worst_poly: Option<KernelCheck> = None;
    let mut poly_all_pass = true;
    for check in checks {
        if check.name.starts_with("EXPNEG_POLY") {
            poly_all_pass &= check.passed();
            let worse = match &worst_poly {
                Some(w) => check.measured / check.stored > w.measured / w.stored,
                None => true,
            };
            if worse {
                worst_poly = Some(check);
            }
        } else {
            let pass = check.passed();
            rows.push((check.name.clone(), check, pass));
        }
    }
    if let Some(w) = worst_poly {
        // keep table order: polys sit between ARCSIN2 and EXPNEG_RAT
        rows.insert(2, ("EXPNEG_POLY".into(), w, poly_all_pass));
    }
    rows
}

fn cmd_verify_coeffs(
    grid_points: usize,
    table: Option<&std::path::Path>,
) -> Result<(), Failure> {
    if grid_points < MIN_CERTIFY_GRID {
        return Err(usage!(
            "grid too coarse: need at least {MIN_CERTIFY_GRID} points, got {grid_points}"
        ));
    }
    let kernel_table = match table {
        Some(path) => {
            KernelTable::load(path).map_err(|e| usage!("cannot load {}: {e}", path.display()))?
        }
        None => KernelTable::builtin().clone(),
    };

    let checks = kernel_table
        .verify(grid_points)
        .map_err(|e| usage!("certification could not run: {e}"))?;

    let mut failures = 0usize;
    for (name, check, passed) in group_checks(checks) {
        println!(
            "{name} eps_measured={:.6e} eps_stored={:.6e} ratio={:.3} {}",
            check.measured,
            check.stored,
            check.measured / check.stored,
            if passed { "PASS" } else { "FAIL" }
        );
        failures += usize::from(!passed);
    }

    if failures > 0 {
        return Err(Failure::certification(format!(
            "{failures} kernel table row(s) exceeded 1.2x the stored error bound"
        )));
    }
    Ok(())
}
