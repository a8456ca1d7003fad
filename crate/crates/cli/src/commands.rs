use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use log::info;

use holee_core::airy::{ai_prime_zeros, ai_zeros, airy_eval};
use holee_core::calibration::{
    calibrate, cubic_baseline, reconstruct_drift, residual_yield, rmse, CalibrationResult, EmpiricalCurve,
    SearchConfig, XI1_ABS,
};
use holee_core::data::{parse_date, read_table_file};
use holee_core::drift::DriftCurve;
use holee_core::oracle::{
    mc_price, pde_price, pde_price_robin, semi_line_extent, McConfig, OracleModel, PdeGrid,
};
use holee_core::pricing::{ModelKind, PricingConfig, PricingModel, YieldPoint};
use holee_core::spectral::{
    build_interval_spectrum, build_interval_spectrum_matching, build_robin_spectrum, build_semi_spectrum, IntervalSpectrum, ModelParams,
    RobinSpectrum, SemiSpectrum,
};
use holee_core::spline::SplineKind;

use crate::cli::{
    AiryArgs, CalibrateArgs, Cli, Command, InputArgs, ModelArgs, ModelChoice, OracleArgs, OracleMethod, PriceArgs,
    ResidualArgs, SpectrumArgs, SplineChoice,
};
use crate::format::{param, pct, sig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] holee_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `#`-prefixed report lines, then the CSV rows.
fn emit(out: &mut dyn Write, report: &[String], header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    for line in report {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut out = open_output(cli.output.as_deref())?;
    match &cli.command {
        Command::Airy(a) => airy(a, &mut *out),
        Command::Spectrum(a) => spectrum(a, &mut *out),
        Command::Price(a) => price(a, &mut *out),
        Command::Calibrate(a) => calibrate_cmd(a, &mut *out),
        Command::Residual(a) => residual(a, &mut *out),
        Command::Oracle(a) => oracle(a, &mut *out),
        Command::Baseline(a) => baseline(a, &mut *out),
    }?;
    out.flush()?;
    Ok(())
}

fn airy(a: &AiryArgs, out: &mut dyn Write) -> CliResult<()> {
    if let Some(n) = a.zeros {
        info!("airy zeros: n = {n}");
        let xi = ai_prime_zeros(n)?;
        let zeta = ai_zeros(n)?;
        let rows = (0..n).map(|i| vec![(i + 1).to_string(), param(xi[i]), param(zeta[i])]).collect::<Vec<_>>();
        return emit(out, &[], &["n", "xi", "zeta"], &rows);
    }
    if a.y.is_empty() {
        return Err(CliError::Usage("give --y points or --zeros N".into()));
    }
    info!("airy: y = {:?}", a.y);
    let rows = a
        .y
        .iter()
        .map(|&y| {
            let v = airy_eval(y)?;
            Ok(vec![param(y), param(v.ai), param(v.ai_prime), param(v.bi), param(v.bi_prime)])
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(out, &[], &["y", "ai", "ai_prime", "bi", "bi_prime"], &rows)
}

fn model_params(m: &ModelArgs) -> CliResult<ModelParams> {
    Ok(match (m.beta, m.sigma) {
        (Some(b), None) => ModelParams::from_beta(b)?,
        (None, Some(s)) => ModelParams::new(s)?,
        _ => return Err(CliError::Usage("exactly one of --beta or --sigma is required".into())),
    })
}

enum Built {
    Semi(SemiSpectrum, DriftCurve),
    Interval(IntervalSpectrum, DriftCurve),
    Robin(RobinSpectrum),
}

impl Built {
    fn pricing(&self) -> PricingModel<'_> {
        match self {
            Built::Semi(s, d) => PricingModel::Semi(s, d),
            Built::Interval(s, d) => PricingModel::Interval(s, d),
            Built::Robin(r) => PricingModel::Robin(r),
        }
    }
}

fn drift_of(m: &ModelArgs) -> DriftCurve {
    if m.nu == 0.0 {
        DriftCurve::constant(m.r0)
    } else {
        DriftCurve::linear(m.r0, m.nu)
    }
}

fn box_width(m: &ModelArgs, p: &ModelParams) -> CliResult<f64> {
    let l = match (m.l, m.alpha_l) {
        (Some(l), _) => l,
        (None, Some(al)) => al / p.alpha,
        (None, None) => return Err(CliError::Usage("--L or --alpha-l is required for the interval model".into())),
    };
    if !(l > 0.0 && l.is_finite()) {
        return Err(CliError::Usage(format!("box width must be positive and finite, got L = {l}")));
    }
    Ok(l)
}

/// A comma list of year fractions, or the path of a CSV with a maturity column.
fn parse_maturities(arg: &str) -> CliResult<Vec<f64>> {
    let path = Path::new(arg);
    let values = if path.is_file() {
        read_table_file(path, None)?.maturities
    } else {
        arg.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("--maturities: '{t}' is neither a number nor a file")))
            })
            .collect::<CliResult<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(CliError::Usage("--maturities is empty".into()));
    }
    if let Some(m) = values.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(CliError::Usage(format!("maturities must be positive, got {m}")));
    }
    Ok(values)
}

/// With `first_n` the interval spectrum holds exactly `n_levels` levels;
/// otherwise it holds every level up to the matching half-line resolution.
fn build(m: &ModelArgs, n_levels: usize, first_n: bool) -> CliResult<Built> {
    if !(m.r0.is_finite() && m.nu.is_finite()) {
        return Err(CliError::Usage("--r0 and --nu must be finite".into()));
    }
    let p = model_params(m)?;
    info!(
        "model {:?}: sigma = {}, beta = {}, r0 = {}, nu = {}, L = {:?}, alpha_l = {:?}, r_star = {:?}, n_levels = {n_levels}",
        m.model,
        param(p.sigma),
        param(p.beta),
        param(m.r0),
        param(m.nu),
        m.l,
        m.alpha_l,
        m.r_star
    );
    Ok(match m.model {
        ModelChoice::Semi => Built::Semi(build_semi_spectrum(p.sigma, n_levels)?, drift_of(m)),
        ModelChoice::Interval => {
            let l = box_width(m, &p)?;
            let spectrum = if first_n {
                build_interval_spectrum(p.sigma, l, n_levels)?
            } else {
                build_interval_spectrum_matching(p.sigma, l, n_levels)?
            };
            Built::Interval(spectrum, drift_of(m))
        }
        ModelChoice::Robin => {
            Built::Robin(build_robin_spectrum(p.sigma, m.nu, m.r_star.unwrap_or(m.r0), n_levels)?)
        }
    })
}

fn pricing_config(model: ModelChoice, n_levels: usize) -> PricingConfig {
    let model = match model {
        ModelChoice::Semi => ModelKind::Semi,
        ModelChoice::Interval => ModelKind::Interval,
        ModelChoice::Robin => ModelKind::Robin,
    };
    PricingConfig { n_levels, model, ..Default::default() }
}

fn level_count(n_levels: usize, maturities: &[f64]) -> usize {
    use holee_core::pricing::{SHORT_MATURITY, SHORT_MATURITY_LEVELS};
    if maturities.iter().any(|&m| m < SHORT_MATURITY) {
        n_levels.max(SHORT_MATURITY_LEVELS)
    } else {
        n_levels
    }
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let built = build(&a.model, a.n, true)?;
    let r0 = a.model.r0;
    let row = |n: usize, e: f64, big_e: f64, chi: f64, coef: f64| {
        vec![n.to_string(), param(e), param(big_e), pct(chi), param(coef)]
    };
    let rows: Vec<Vec<String>> = match &built {
        Built::Semi(s, _) => {
            s.levels.iter().enumerate().map(|(i, l)| row(i + 1, l.e, s.energy(i + 1), r0 + s.energy(i + 1), l.c)).collect()
        }
        Built::Interval(s, _) => {
            s.levels.iter().enumerate().map(|(i, l)| row(i + 1, l.e, s.energy(i + 1), r0 + s.energy(i + 1), l.b)).collect()
        }
        Built::Robin(r) => r
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| row(i + 1, l.e, r.params.beta * l.e, l.lambda, l.d))
            .collect(),
    };
    emit(out, &[], &["n", "e_n", "E_n", "chi_n_pct", "coef"], &rows)
}

fn price(a: &PriceArgs, out: &mut dyn Write) -> CliResult<()> {
    let maturities = parse_maturities(&a.maturities)?;
    let n_levels = level_count(a.levels.n_levels, &maturities);
    let built = build(&a.model, n_levels, false)?;
    let cfg = pricing_config(a.model.model, n_levels);
    info!("price: z = {}, maturities = {:?}", param(a.z), maturities);
    let model = built.pricing();
    let mut rows = Vec::new();
    for &m in &maturities {
        let p = model.price(a.z, 0.0, m, &cfg)?;
        rows.push(vec![
            sig(m, 10),
            param(p.price),
            pct(p.yield_for(m)),
            p.terms_used.to_string(),
            sig(p.tail_bound, 3),
            p.converged.to_string(),
        ]);
    }
    emit(out, &[], &["maturity", "price", "yield_pct", "terms", "tail_bound", "converged"], &rows)
}

fn load_curve(a: &InputArgs) -> CliResult<EmpiricalCurve> {
    let valuation = a.valuation_date.as_deref().map(parse_date).transpose()?;
    if !(a.min_maturity >= 0.0) {
        return Err(CliError::Usage(format!("--min-maturity must be non-negative, got {}", a.min_maturity)));
    }
    let table = read_table_file(&a.input, valuation)?;
    let label = a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let curve = EmpiricalCurve::from_table_percent(&table, "yield_pct", table.valuation_date, label)?
        .filtered(a.min_maturity);
    info!(
        "input {}: {} points, valuation date {:?}, min maturity {}",
        a.input.display(),
        curve.points.len(),
        table.valuation_date,
        a.min_maturity
    );
    Ok(curve)
}

fn spline_kind(s: SplineChoice) -> SplineKind {
    match s {
        SplineChoice::Cubic => SplineKind::ClampedNotAKnot,
        SplineChoice::Pchip => SplineKind::Pchip,
    }
}

fn fit_rows(curve: &EmpiricalCurve, model: &[YieldPoint]) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .zip(model)
        .map(|(e, m)| {
            vec![
                sig(e.maturity, 10),
                pct(e.yield_value),
                pct(m.yield_value),
                pct(e.yield_value - m.yield_value),
            ]
        })
        .collect()
}

fn write_drift(path: &Path, residuals: &[YieldPoint], chi_t: f64, kind: SplineKind) -> CliResult<()> {
    let drift = reconstruct_drift(residuals, 0.0, chi_t, kind)?;
    let end = drift.end();
    let mut s: Vec<f64> = (0..).map(|k| k as f64 * 0.25).take_while(|&s| s < end).collect();
    s.extend_from_slice(drift.knots());
    s.sort_by(f64::total_cmp);
    s.dedup();
    let rows: Vec<Vec<String>> =
        s.iter().map(|&s| vec![sig(s, 10), param(drift.chi(s)), param(drift.nu(s))]).collect();
    let mut out = open_output(Some(path))?;
    emit(&mut *out, &[], &["s", "chi", "nu"], &rows)?;
    out.flush()?;
    Ok(())
}

fn calibration_report(curve: &EmpiricalCurve, fit: &CalibrationResult) -> Vec<String> {
    vec![
        format!("curve: {} ({} points)", curve.label, curve.points.len()),
        format!("z = {}", param(fit.z)),
        format!("beta = {}", param(fit.beta)),
        format!("r0 = {}", param(fit.r0)),
        format!("sigma = {}", param(fit.sigma)),
        format!("chi_1 = r0 + beta|xi_1| = {}", param(fit.r0 + fit.beta * XI1_ABS)),
        format!("RMSE = {}", sig(fit.rmse, 6)),
        format!(
            "converged = {}, restarts = {}, evaluations = {}",
            fit.converged, fit.n_restarts_used, fit.evaluations
        ),
    ]
}

fn calibrate_cmd(a: &CalibrateArgs, out: &mut dyn Write) -> CliResult<()> {
    let curve = load_curve(&a.input)?;
    let cfg = PricingConfig { n_levels: a.levels.n_levels, ..Default::default() };
    let search = SearchConfig { r_min: a.rmin, ..Default::default() };
    info!("calibrate: r_min = {}, n_levels = {}, starts = {}", a.rmin, cfg.n_levels, search.starts.len());
    let fit = calibrate(&curve, &cfg, &search)?;
    let mut report = calibration_report(&curve, &fit);
    if let Ok((_, cubic)) = cubic_baseline(&curve) {
        report.push(format!("cubic baseline RMSE = {}", sig(cubic, 6)));
    }
    if let Some(path) = &a.drift_output {
        write_drift(path, &fit.residual_yields, fit.r0, spline_kind(a.spline))?;
    }
    emit(
        out,
        &report,
        &["maturity", "empirical_pct", "model_pct", "residual_pct"],
        &fit_rows(&curve, &fit.model_yields),
    )
}

fn residual(a: &ResidualArgs, out: &mut dyn Write) -> CliResult<()> {
    let curve = load_curve(&a.input)?;
    let cfg = PricingConfig { n_levels: a.levels.n_levels, ..Default::default() };
    let p = ModelParams::from_beta(a.beta)?;
    info!("residual: z = {}, beta = {}, r0 = {}", param(a.z), param(a.beta), param(a.r0));
    let given = CalibrationResult {
        z: a.z,
        beta: a.beta,
        r0: a.r0,
        sigma: p.sigma,
        rmse: f64::NAN,
        model_yields: vec![],
        residual_yields: vec![],
        converged: true,
        n_restarts_used: 0,
        start_objectives: vec![],
        evaluations: 0,
    };
    let res = residual_yield(&curve, &given, &cfg)?;
    let model: Vec<YieldPoint> = curve
        .points
        .iter()
        .zip(&res)
        .map(|(e, r)| YieldPoint { maturity: e.maturity, yield_value: e.yield_value - r.yield_value })
        .collect();
    let report = vec![format!("RMSE = {}", sig(rmse(&curve.points, &model)?, 6))];
    if let Some(path) = &a.drift_output {
        write_drift(path, &res, a.r0, spline_kind(a.spline))?;
    }
    let rows: Vec<Vec<String>> = fit_rows(&curve, &model)
        .into_iter()
        .zip(&res)
        .map(|(mut row, r)| {
            row.push(param(r.yield_value * r.maturity));
            row
        })
        .collect();
    emit(out, &report, &["maturity", "empirical_pct", "model_pct", "residual_pct", "eta"], &rows)
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.method == OracleMethod::Mc && a.model.model == ModelChoice::Robin {
        return Err(CliError::Usage("the Monte Carlo oracle covers the semi and interval models".into()));
    }
    let maturities = parse_maturities(&a.maturities)?;
    let n_levels = level_count(a.levels.n_levels, &maturities);
    let built = build(&a.model, n_levels, false)?;
    let cfg = pricing_config(a.model.model, n_levels);
    let p = model_params(&a.model)?;
    info!(
        "oracle {:?}: z = {}, n_x = {}, n_t = {}, n_paths = {}, steps/year = {}, seed = {}, antithetic = {}",
        a.method,
        param(a.z),
        a.n_x,
        a.n_t,
        a.n_paths,
        a.steps_per_year,
        a.seed,
        a.antithetic
    );
    let drift = drift_of(&a.model);
    let geometry = match a.model.model {
        ModelChoice::Interval => Some(OracleModel::Interval { l: box_width(&a.model, &p)? }),
        ModelChoice::Semi => Some(OracleModel::Semi),
        ModelChoice::Robin => None,
    };
    let mut rows = Vec::new();
    for &m in &maturities {
        let spectral = built.pricing().price(a.z, 0.0, m, &cfg)?.price;
        let (value, std_error) = match (a.method, geometry) {
            (OracleMethod::Pde, Some(g)) => {
                let x_max = match g {
                    OracleModel::Semi => semi_line_extent((a.z - a.model.r0) / p.sigma, m),
                    OracleModel::Interval { l } => l,
                };
                let grid = PdeGrid::new(x_max, a.n_x, a.n_t);
                (pde_price(a.z, 0.0, m, p.sigma, &drift, &grid, g)?, None)
            }
            (OracleMethod::Pde, None) => {
                let r_star = a.model.r_star.unwrap_or(a.model.r0);
                (pde_price_robin(a.z, m, p.sigma, a.model.nu, r_star, a.n_x, a.n_t)?, None)
            }
            (OracleMethod::Mc, Some(g)) => {
                let mc = McConfig {
                    n_paths: a.n_paths,
                    steps_per_year: a.steps_per_year,
                    seed: a.seed,
                    antithetic: a.antithetic,
                };
                let e = mc_price(a.z, 0.0, m, p.sigma, &drift, &mc, g)?;
                (e.price, Some(e.std_error))
            }
            (OracleMethod::Mc, None) => unreachable!("rejected above"),
        };
        rows.push(vec![
            format!("{:?}", a.method).to_lowercase(),
            sig(m, 10),
            param(value),
            param(spectral),
            sig((value - spectral).abs(), 3),
            sig((value / spectral - 1.0).abs(), 3),
            std_error.map(|s| sig(s, 3)).unwrap_or_default(),
        ]);
    }
    emit(out, &[], &["method", "maturity", "oracle", "spectral", "abs_gap", "rel_gap", "std_error"], &rows)
}

fn baseline(a: &InputArgs, out: &mut dyn Write) -> CliResult<()> {
    let curve = load_curve(a)?;
    let (fitted, e) = cubic_baseline(&curve)?;
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .zip(&fitted)
        .map(|(p, f)| vec![sig(p.maturity, 10), pct(p.yield_value), pct(f.yield_value)])
        .collect();
    emit(out, &[format!("RMSE = {}", sig(e, 6))], &["maturity", "empirical_pct", "cubic_pct"], &rows)
}
