use std::fs;
use std::io::Write;
use std::path::Path;

use gwm::diagnostics::log_range;
use gwm::engine::{cov_tail_leading, covariance_with, local_props, variogram_small_lag, variogram_with, ModelParams, SmallLagCase};
use gwm::fieldsim::{Grid, Simulator};
use gwm::inference::{
    correlation_table_with, default_starts, deseasonalize, empirical_variogram, fit, model_psd, parse_single_column,
    parse_wind, periodogram, welch_psd, Family, FitConfig, ShapeParams, Station, VelocitySeries, WelchConfig,
    WindQuery,
};
use gwm::{GwmError, QuadConfig, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::{Command, InputArgs, InputFormat, LagArgs, ModelArgs, PsdMethod, QuadArgs, SimFormat};

pub const SCHEMA_VERSION: u32 = 1;

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Eval { model, lags, quad, out } => eval(&model, &lags, &quad, out.as_deref()),
        Command::Simulate {
            model,
            grid,
            spacing,
            seed,
            format,
            out,
            quad,
        } => simulate(&model, &grid, &spacing, seed, format, out.as_deref(), &quad),
        Command::Props { model, out } => props(&model, out.as_deref()),
        Command::Psd {
            input,
            method,
            block_len,
            overlap,
            out,
        } => psd(&input, method, block_len, overlap, out.as_deref()),
        Command::Variogram { input, max_lag, out } => variogram_cmd(&input, max_lag, out.as_deref()),
        Command::Fit {
            input,
            family,
            starts,
            max_lag,
            out,
            quad,
        } => fit_cmd(&input, family.into(), starts.as_deref(), max_lag, out.as_deref(), &quad),
        Command::Ingest { input, out } => ingest(&input, out.as_deref()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn params(m: &ModelArgs) -> Result<ModelParams> {
    ModelParams::new(m.alpha, m.gamma, m.lambda, m.dim)
}

fn quad_config(q: &QuadArgs) -> Result<QuadConfig> {
    let mut c = QuadConfig::default();
    if let Some(t) = q.rel_tol {
        c.rel_tol = t;
    }
    if let Some(s) = q.max_subdivisions {
        c.max_subdivisions = s;
    }
    c.validate()?;
    Ok(c)
}

fn lag_list(l: &LagArgs) -> Result<Vec<f64>> {
    let rs = match (&l.r, &l.r_range) {
        (Some(r), _) => r.clone(),
        (None, Some(spec)) => {
            let parts: Vec<&str> = spec.split(':').collect();
            let bad = || GwmError::InvalidParameter(format!("--r-range wants lo:hi:count, got {spec:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            let count: usize = parts[2].parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi > lo) || count < 2 {
                return Err(bad());
            }
            log_range(lo, hi, count)
        }
        (None, None) => unreachable!("clap requires one of --r, --r-range"),
    };
    if let Some(r) = rs.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(GwmError::InvalidParameter(format!("lags must be finite and >= 0, got {r}")));
    }
    Ok(rs)
}

fn cell(v: Result<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn eval(m: &ModelArgs, lags: &LagArgs, q: &QuadArgs, out: Option<&Path>) -> Result<()> {
    let p = params(m)?;
    let cfg = quad_config(q)?;
    let mut s = String::from("r,covariance,variogram,tail_asymptote,small_lag_asymptote\n");
    for r in lag_list(lags)? {
        let c = covariance_with(&p, r, &cfg)?;
        let v = variogram_with(&p, r, &cfg)?;
        let tail = if r > 0.0 { cell(cov_tail_leading(&p, r)) } else { String::new() };
        let small = if r > 0.0 { cell(variogram_small_lag(&p, r)) } else { String::new() };
        s.push_str(&format!("{r},{c},{v},{tail},{small}\n"));
    }
    emit(out, &s)
}

fn per_axis<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>> {
    spec.split('x')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| GwmError::InvalidParameter(format!("bad {what} {spec:?}")))
        })
        .collect()
}

fn grid(sizes: &str, spacing: &str) -> Result<Grid> {
    let n: Vec<usize> = per_axis(sizes, "grid")?;
    let mut h: Vec<f64> = per_axis(spacing, "spacing")?;
    if h.len() == 1 && n.len() == 2 {
        h.push(h[0]);
    }
    match (&n[..], &h[..]) {
        ([a], [s]) => Grid::line(*a, *s),
        ([a, b], [s, t]) => Grid::plane([*a, *b], [*s, *t]),
        _ => Err(GwmError::InvalidParameter(format!(
            "grid {sizes:?} and spacing {spacing:?} must have 1 or 2 matching axes"
        ))),
    }
}

fn simulate(
    m: &ModelArgs,
    sizes: &str,
    spacing: &str,
    seed: u64,
    format: SimFormat,
    out: Option<&Path>,
    q: &QuadArgs,
) -> Result<()> {
    let p = params(m)?;
    let g = grid(sizes, spacing)?;
    if g.dims() != p.n as usize {
        return Err(GwmError::InvalidParameter(format!(
            "grid has {} axes but --dim is {}",
            g.dims(),
            p.n
        )));
    }
    let sample = Simulator::with_config(&p, &g, &quad_config(q)?)?.sample(seed);
    match (format, out) {
        (SimFormat::Raw, Some(path)) => sample.write_raw(path),
        (SimFormat::Raw, None) => Err(GwmError::InvalidParameter("--format raw needs --out".into())),
        (SimFormat::Csv, Some(path)) => sample.write_csv(std::io::BufWriter::new(fs::File::create(path)?)),
        (SimFormat::Csv, None) => sample.write_csv(std::io::BufWriter::new(std::io::stdout().lock())),
    }
}

fn props(m: &ModelArgs, out: Option<&Path>) -> Result<()> {
    let p = params(m)?;
    let lp = local_props(&p)?;
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "params": p,
        "small_lag_case": SmallLagCase::of(&p)?,
        "props": lp,
    });
    emit(out, &json_text(&v))
}

fn years(spec: &str) -> Result<(i32, i32)> {
    let bad = || GwmError::InvalidParameter(format!("--years wants e.g. 1973-1978, got {spec:?}"));
    let (a, b) = spec.split_once('-').ok_or_else(bad)?;
    let year = |t: &str| -> Result<i32> {
        let y: i32 = t.trim().parse().map_err(|_| bad())?;
        Ok(if (0..100).contains(&y) { 1900 + y } else { y })
    };
    let (a, b) = (year(a)?, year(b)?);
    if b < a {
        return Err(bad());
    }
    Ok((a, b))
}

/// The centered or deseasonalized series named by the input flags.
fn load(input: &InputArgs) -> Result<VelocitySeries> {
    let text = fs::read_to_string(&input.input)?;
    match input.format {
        InputFormat::Series => Ok(VelocitySeries::centered(parse_single_column(&text)?)),
        InputFormat::Csv => Ok(VelocitySeries::centered(value_column(&text)?)),
        InputFormat::Wind => {
            let q = WindQuery {
                station: input.station.parse::<Station>()?,
                years: years(&input.years)?,
            };
            Ok(deseasonalize(&parse_wind(&text, &q)?)?.0)
        }
    }
}

fn value_column(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| GwmError::InsufficientData("empty CSV".into()))?;
    let col = header
        .split(',')
        .position(|h| h.trim() == "value")
        .ok_or_else(|| GwmError::Parse {
            line: 1,
            msg: "no `value` column in header".into(),
        })?;
    lines
        .map(|(i, l)| {
            l.split(',')
                .nth(col)
                .and_then(|t| t.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| GwmError::Parse {
                    line: i + 1,
                    msg: format!("bad value in {l:?}"),
                })
        })
        .collect()
}

fn psd(input: &InputArgs, method: PsdMethod, block_len: usize, overlap: f64, out: Option<&Path>) -> Result<()> {
    let y = load(input)?;
    let est = match method {
        PsdMethod::Welch => welch_psd(&y.values, &WelchConfig { block_len, overlap })?.psd,
        PsdMethod::Periodogram => periodogram(&y.values)?,
    };
    let mut s = String::from("omega,psd\n");
    for (w, v) in est.freqs.iter().zip(&est.values) {
        s.push_str(&format!("{w},{v}\n"));
    }
    emit(out, &s)
}

fn variogram_cmd(input: &InputArgs, max_lag: usize, out: Option<&Path>) -> Result<()> {
    let y = load(input)?;
    let v = empirical_variogram(&y.values, max_lag)?;
    let var = y.variance();
    let mut s = String::from("lag,variogram,variance\n");
    for (h, g) in v.iter().enumerate() {
        s.push_str(&format!("{},{g},{var}\n", h + 1));
    }
    emit(out, &s)
}

fn parse_starts(spec: &str) -> Result<Vec<ShapeParams>> {
    spec.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v: Vec<f64> = t
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| GwmError::InvalidParameter(format!("bad start {t:?}")))?;
            match v[..] {
                [a, g, l] => ShapeParams::new(a, g, l),
                _ => Err(GwmError::InvalidParameter(format!("start {t:?} needs alpha,gamma,ell"))),
            }
        })
        .collect()
}

fn fit_cmd(
    input: &InputArgs,
    family: Family,
    starts: Option<&str>,
    max_lag: usize,
    out: Option<&Path>,
    q: &QuadArgs,
) -> Result<()> {
    let y = load(input)?;
    let starts = match starts {
        Some(s) => parse_starts(s)?,
        None => default_starts(family),
    };
    if family == Family::Wm {
        if let Some(s) = starts.iter().find(|s| s.alpha != 1.0) {
            return Err(GwmError::InvalidParameter(format!("WM starts need alpha = 1, got {}", s.alpha)));
        }
    }
    let cfg = FitConfig {
        quad: quad_config(q)?,
        ..FitConfig::default()
    };
    let r = fit(&y, family, &starts, &cfg)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "n": y.len(),
        "sample_variance": y.variance(),
        "fit": r,
    });
    let Some(dir) = out else {
        return emit(None, &json_text(&report));
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join("fit.json"), json_text(&report))?;

    let welch = welch_psd(&y.values, &WelchConfig::default())?.psd;
    let mut s = String::from("omega,empirical,model\n");
    for (w, v) in welch.freqs.iter().zip(&welch.values) {
        s.push_str(&format!("{w},{v},{}\n", model_psd(&r.params, *w)));
    }
    fs::write(dir.join("psd.csv"), s)?;

    let emp = empirical_variogram(&y.values, max_lag)?;
    let rho = correlation_table_with(&r.params.shape(), max_lag + 1, &cfg.quad)?;
    let mut s = String::from("lag,empirical,model\n");
    for (h, g) in emp.iter().enumerate() {
        let model = 2.0 * r.params.s2 * (1.0 - rho.values[h + 1]);
        s.push_str(&format!("{},{g},{model}\n", h + 1));
    }
    fs::write(dir.join("variogram.csv"), s)?;
    Ok(())
}

fn ingest(input: &InputArgs, out: Option<&Path>) -> Result<()> {
    let bytes = fs::read(&input.input)?;
    let sha = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect::<String>();
    let text = String::from_utf8(bytes).map_err(|e| GwmError::Parse {
        line: 0,
        msg: format!("not UTF-8: {e}"),
    })?;
    let q = WindQuery {
        station: input.station.parse::<Station>()?,
        years: years(&input.years)?,
    };
    let daily = parse_wind(&text, &q)?;
    let data_rows = text
        .lines()
        .filter(|l| l.split_whitespace().next().is_some_and(|t| t.parse::<u32>().is_ok()))
        .count();
    let (y, _) = deseasonalize(&daily)?;
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "path": input.input.display().to_string(),
        "sha256": sha,
        "data_rows": data_rows,
        "station": input.station.to_ascii_uppercase(),
        "years": [q.years.0, q.years.1],
        "days": daily.len(),
        "velocity_variance": y.variance(),
    });
    emit(out, &json_text(&v))
}
