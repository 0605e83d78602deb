//! Batch front end: JSON run configuration, single/pair/sweep execution,
//! CSV and gnuplot output.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Deserialize;

use crate::berry::{analytic_gamma, analyze_loop, wilson_loop_phase, Band};
use crate::bloch::{make_cone_loop, solid_angle, Orientation};
use crate::error::{Error, Result};
use crate::evolution::{default_n_steps, HamiltonianSchedule, STEPS_PER_SEGMENT};
use crate::pairproto::{run_pair_protocol, BellSign, PairBasis, PairProtocol};

pub const CSV_HEADER: &str = "theta_deg,omega_sr,gamma_wilson,gamma_dynamics,gamma_analytic,\
fidelity_eq4,overlap_initial,energy_residual_max,norm_drift,status";

const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Pair,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    ThetaDeg,
    Length,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Sweep {
    /// Evenly spaced values with both endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| match i {
                0 => self.from,
                i if i == last => self.to,
                i => self.from + (self.to - self.from) * i as f64 / last as f64,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum BasisConfig {
    Bell,
    Generalized { alpha: f64, beta_mix: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
enum SignConfig {
    #[serde(rename = "+", alias = "plus")]
    Plus,
    #[serde(rename = "-", alias = "minus")]
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BandConfig {
    Minus,
    Plus,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Mode,
    theta_deg: Option<f64>,
    kappa: Option<f64>,
    length: Option<f64>,
    n_steps: Option<usize>,
    n_samples: Option<usize>,
    band: Option<BandConfig>,
    bell_sign: Option<SignConfig>,
    counter_rotate_a: Option<bool>,
    basis: Option<BasisConfig>,
    sweep: Option<Sweep>,
    output_path: Option<String>,
}

/// Validated run configuration with defaults applied.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Required unless sweeping over `theta_deg`.
    pub theta_deg: Option<f64>,
    pub kappa: f64,
    pub length: f64,
    pub n_samples: usize,
    pub n_steps: usize,
    pub band: Band,
    pub bell_sign: BellSign,
    pub counter_rotate_a: bool,
    pub basis: PairBasis<f64>,
    pub sweep: Option<Sweep>,
    pub output_path: Option<String>,
}

impl RunConfig {
    /// `(theta_deg, length)` for every run, in grid order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match (self.mode, self.sweep) {
            (Mode::Sweep, Some(sw)) => sw
                .grid()
                .into_iter()
                .map(|v| match sw.param {
                    SweepParam::ThetaDeg => (v, self.length),
                    SweepParam::Length => (self.theta_deg.unwrap_or(0.0), v),
                })
                .collect(),
            _ => vec![(self.theta_deg.unwrap_or(0.0), self.length)],
        }
    }
}

fn json_error(err: serde_path_to_error::Error<serde_json::Error>) -> Error {
    Error::config(err.path().to_string(), err.inner().to_string())
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, "must be finite"))
    }
}

fn check_theta(key: &str, v: f64) -> Result<()> {
    check_finite(key, v)?;
    if !(0.0..=90.0).contains(&v) {
        return Err(Error::config(key, format!("{v} outside [0, 90] degrees")));
    }
    Ok(())
}

fn check_positive(key: &str, v: f64) -> Result<()> {
    check_finite(key, v)?;
    if v <= 0.0 {
        return Err(Error::config(key, format!("{v} must be positive")));
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(json_error)?;

    let kappa = raw.kappa.unwrap_or(1.0);
    check_positive("kappa", kappa)?;
    let length = raw.length.unwrap_or(400.0 * PI);
    check_positive("length", length)?;
    let n_samples = raw.n_samples.unwrap_or(DEFAULT_SAMPLES);
    if n_samples < crate::bloch::MIN_SEGMENTS {
        return Err(Error::config(
            "n_samples",
            format!("need at least {} loop samples", crate::bloch::MIN_SEGMENTS),
        ));
    }
    let n_steps = raw.n_steps.unwrap_or_else(|| default_n_steps(n_samples));
    if n_steps < STEPS_PER_SEGMENT * n_samples {
        return Err(Error::config(
            "n_steps",
            format!("need at least {STEPS_PER_SEGMENT} steps per loop segment"),
        ));
    }
    if let Some(t) = raw.theta_deg {
        check_theta("theta_deg", t)?;
    }

    let theta_needed = match (raw.mode, &raw.sweep) {
        (Mode::Sweep, None) => return Err(Error::config("sweep", "required in sweep mode")),
        (Mode::Sweep, Some(sw)) => sw.param == SweepParam::Length,
        (_, Some(_)) => return Err(Error::config("sweep", "only valid in sweep mode")),
        (_, None) => true,
    };
    if theta_needed && raw.theta_deg.is_none() {
        return Err(Error::config("theta_deg", "missing required key"));
    }
    if let Some(sw) = &raw.sweep {
        if sw.count < 2 {
            return Err(Error::config("sweep.count", "a sweep needs at least 2 points"));
        }
        match sw.param {
            SweepParam::ThetaDeg => {
                check_theta("sweep.from", sw.from)?;
                check_theta("sweep.to", sw.to)?;
            }
            SweepParam::Length => {
                check_positive("sweep.from", sw.from)?;
                check_positive("sweep.to", sw.to)?;
            }
        }
    }
    let basis = match raw.basis.unwrap_or(BasisConfig::Bell) {
        BasisConfig::Bell => PairBasis::Bell,
        BasisConfig::Generalized { alpha, beta_mix } => {
            check_finite("basis.generalized.alpha", alpha)?;
            check_finite("basis.generalized.beta_mix", beta_mix)?;
            PairBasis::Generalized { alpha, beta_mix }
        }
    };

    Ok(RunConfig {
        mode: raw.mode,
        theta_deg: raw.theta_deg,
        kappa,
        length,
        n_samples,
        n_steps,
        band: match raw.band {
            Some(BandConfig::Plus) => Band::Plus,
            _ => Band::Minus,
        },
        bell_sign: match raw.bell_sign {
            Some(SignConfig::Minus) => BellSign::Minus,
            _ => BellSign::Plus,
        },
        counter_rotate_a: raw.counter_rotate_a.unwrap_or(false),
        basis,
        sweep: raw.sweep,
        output_path: raw.output_path,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    NumericalFailure,
    NotAdiabatic,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NumericalFailure => "numerical_failure",
            Status::NotAdiabatic => "not_adiabatic",
        }
    }
}

/// One CSV row. Quantities a mode does not compute are NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunRecord {
    pub theta_deg: f64,
    pub length: f64,
    pub omega_sr: f64,
    pub gamma_wilson: f64,
    pub gamma_dynamics: f64,
    pub gamma_analytic: f64,
    pub fidelity_eq4: f64,
    pub overlap_initial: f64,
    /// `|⟨partner|final⟩|`; summary only.
    pub overlap_partner: f64,
    pub energy_residual_max: f64,
    pub norm_drift: f64,
    pub status: Status,
}

impl RunRecord {
    fn empty(theta_deg: f64, length: f64) -> Self {
        RunRecord {
            theta_deg,
            length,
            omega_sr: f64::NAN,
            gamma_wilson: f64::NAN,
            gamma_dynamics: f64::NAN,
            gamma_analytic: f64::NAN,
            fidelity_eq4: f64::NAN,
            overlap_initial: f64::NAN,
            overlap_partner: f64::NAN,
            energy_residual_max: f64::NAN,
            norm_drift: f64::NAN,
            status: Status::Ok,
        }
    }

    fn numeric_fields(&self) -> [f64; 9] {
        [
            self.theta_deg,
            self.omega_sr,
            self.gamma_wilson,
            self.gamma_dynamics,
            self.gamma_analytic,
            self.fidelity_eq4,
            self.overlap_initial,
            self.energy_residual_max,
            self.norm_drift,
        ]
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn format_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        for v in r.numeric_fields() {
            out.push_str(&format_g(v));
            out.push(',');
        }
        out.push_str(r.status.as_str());
        out.push('\n');
    }
    out
}

/// Whitespace-separated columns in CSV order; `#` comment header.
pub fn emit_plot_data(records: &[RunRecord]) -> String {
    let mut out = String::from("# ");
    out.push_str(&CSV_HEADER.replace(',', " "));
    out.push('\n');
    for r in records {
        for v in r.numeric_fields() {
            out.push_str(&format_g(v));
            out.push(' ');
        }
        out.push_str(r.status.as_str());
        out.push('\n');
    }
    out
}

fn status_of(err: &Error) -> Result<Status> {
    match err {
        Error::NumericalFailure { .. } => Ok(Status::NumericalFailure),
        Error::NotAdiabatic { .. } | Error::ProtocolViolation { .. } | Error::LoopTooCoarse { .. } => {
            Ok(Status::NotAdiabatic)
        }
        other => Err(other.clone()),
    }
}

fn worse(a: Status, b: Status) -> Status {
    match (a, b) {
        (Status::NumericalFailure, _) | (_, Status::NumericalFailure) => Status::NumericalFailure,
        (Status::NotAdiabatic, _) | (_, Status::NotAdiabatic) => Status::NotAdiabatic,
        _ => Status::Ok,
    }
}

fn fill_single(cfg: &RunConfig, rec: &mut RunRecord) -> Result<()> {
    let theta = rec.theta_deg.to_radians();
    let lp = make_cone_loop(theta, cfg.n_samples, Orientation::Positive)?;
    let omega = solid_angle(&lp)?.omega;
    rec.omega_sr = omega;
    rec.gamma_analytic = analytic_gamma(omega, cfg.band);
    match wilson_loop_phase(&lp, cfg.band) {
        Ok(g) => rec.gamma_wilson = g,
        Err(e) => {
            rec.status = worse(rec.status, status_of(&e)?);
            return Ok(());
        }
    }
    let schedule = HamiltonianSchedule::new(lp, cfg.kappa, rec.length)?;
    match analyze_loop(&schedule, cfg.band, cfg.n_steps) {
        Ok(r) => {
            rec.gamma_dynamics = r.gamma_dynamics;
            rec.norm_drift = r.norm_drift;
        }
        Err(e) => rec.status = worse(rec.status, status_of(&e)?),
    }
    Ok(())
}

fn fill_pair(cfg: &RunConfig, rec: &mut RunRecord) -> Result<()> {
    let protocol = PairProtocol {
        theta: rec.theta_deg.to_radians(),
        kappa: cfg.kappa,
        length: rec.length,
        n_samples: cfg.n_samples,
        n_steps: Some(cfg.n_steps),
        bell_sign: cfg.bell_sign,
        counter_rotate_a: cfg.counter_rotate_a,
        basis: cfg.basis,
    };
    if rec.omega_sr.is_nan() {
        let lp = make_cone_loop(protocol.theta, cfg.n_samples, Orientation::Positive)?;
        let omega = solid_angle(&lp)?.omega;
        rec.omega_sr = omega;
        rec.gamma_analytic = analytic_gamma(omega, Band::Minus);
        if let Ok(g) = wilson_loop_phase(&lp, Band::Minus) {
            rec.gamma_wilson = g;
        }
    }
    match run_pair_protocol(&protocol) {
        Ok(r) => {
            rec.fidelity_eq4 = r.fidelity_eq4;
            rec.overlap_initial = r.overlap_initial;
            rec.overlap_partner = r.overlap_partner;
            rec.energy_residual_max = r.energy_residual_max;
            rec.norm_drift = if rec.norm_drift.is_nan() {
                r.norm_drift
            } else {
                rec.norm_drift.max(r.norm_drift)
            };
        }
        Err(e) => rec.status = worse(rec.status, status_of(&e)?),
    }
    Ok(())
}

/// Computes the record for one grid point. Single mode runs the band
/// analysis, pair mode the pair protocol, sweeps both.
pub fn run_point(cfg: &RunConfig, theta_deg: f64, length: f64) -> Result<RunRecord> {
    let mut rec = RunRecord::empty(theta_deg, length);
    if matches!(cfg.mode, Mode::Single | Mode::Sweep) {
        fill_single(cfg, &mut rec)?;
    }
    if matches!(cfg.mode, Mode::Pair | Mode::Sweep) {
        fill_pair(cfg, &mut rec)?;
    }
    Ok(rec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub records: Vec<RunRecord>,
    pub exit_code: i32,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Runs every grid point concurrently; records come back in grid order.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let records = cfg
        .points()
        .into_par_iter()
        .map(|(t, l)| run_point(cfg, t, l))
        .collect::<Result<Vec<_>>>()?;
    let exit_code = if records.iter().any(|r| r.status == Status::NumericalFailure) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    Ok(Outcome { records, exit_code })
}

/// Human-readable report of a finished run.
pub fn summary(cfg: &RunConfig, outcome: &Outcome) -> String {
    let mut out = String::new();
    let mode = match cfg.mode {
        Mode::Single => "single",
        Mode::Pair => "pair",
        Mode::Sweep => "sweep",
    };
    let _ = writeln!(out, "mode {mode}: {} run(s), kappa = {}", outcome.records.len(), cfg.kappa);
    for r in &outcome.records {
        let _ = writeln!(
            out,
            "theta = {} deg, L = {}: status {}",
            format_g(r.theta_deg),
            format_g(r.length),
            r.status.as_str()
        );
        let mut line = |name: &str, v: f64| {
            if !v.is_nan() {
                let _ = writeln!(out, "  {name:<22} {:.6}", v);
            }
        };
        line("omega (sr)", r.omega_sr);
        line("gamma wilson", r.gamma_wilson);
        line("gamma dynamics", r.gamma_dynamics);
        line("gamma analytic", r.gamma_analytic);
        line("fidelity", r.fidelity_eq4);
        line("|<input|out>|", r.overlap_initial);
        line("|<partner|out>|", r.overlap_partner);
        line("energy residual max", r.energy_residual_max);
        if !r.norm_drift.is_nan() {
            let _ = writeln!(out, "  {:<22} {:.3e}", "norm drift", r.norm_drift);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_g_matches_printf() {
        assert_eq!(format_g(0.0), "0");
        assert_eq!(format_g(1.0), "1");
        assert_eq!(format_g(PI), "3.14159265359");
        assert_eq!(format_g(-PI / 2.0), "-1.57079632679");
        assert_eq!(format_g(1256.6370614359172), "1256.63706144");
        assert_eq!(format_g(1e-5), "1e-05");
        assert_eq!(format_g(1.5e-7), "1.5e-07");
        assert_eq!(format_g(0.0001), "0.0001");
        assert_eq!(format_g(123456789012.0), "123456789012");
        assert_eq!(format_g(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_g(0.1 + 0.2), "0.3");
        assert_eq!(format_g(f64::NAN), "nan");
        assert_eq!(format_g(99.99999999999999), "100");
    }

    #[test]
    fn single_defaults() {
        let c = parse_config(r#"{"mode":"single","theta_deg":60}"#).unwrap();
        assert_eq!(c.kappa, 1.0);
        assert_eq!(c.length, 400.0 * PI);
        assert_eq!(c.n_steps, 200_000);
        assert_eq!(c.band, Band::Minus);
        assert_eq!(c.points(), vec![(60.0, 400.0 * PI)]);
    }

    fn config_key(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Configuration { key, .. }) => key,
            other => panic!("expected configuration error, got {other:?}"),
        }
    }

    #[test]
    fn missing_theta_named() {
        assert_eq!(config_key(r#"{"mode":"pair"}"#), "theta_deg");
    }

    #[test]
    fn unknown_keys_named() {
        assert_eq!(config_key(r#"{"mode":"pair","theta_deg":1,"colour":2}"#), "colour");
        assert_eq!(
            config_key(r#"{"mode":"sweep","sweep":{"param":"theta_deg","from":1,"to":2,"count":2,"x":1}}"#),
            "sweep.x"
        );
    }

    #[test]
    fn invalid_values_named() {
        assert_eq!(config_key(r#"{"mode":"single","theta_deg":95}"#), "theta_deg");
        assert_eq!(config_key(r#"{"mode":"single","theta_deg":"a"}"#), "theta_deg");
        assert_eq!(config_key(r#"{"mode":"single","theta_deg":10,"kappa":-1}"#), "kappa");
        assert_eq!(
            config_key(r#"{"mode":"sweep","sweep":{"param":"theta_deg","from":1,"to":2,"count":1}}"#),
            "sweep.count"
        );
        assert_eq!(
            config_key(r#"{"mode":"single","theta_deg":10,"n_samples":1000,"n_steps":5000}"#),
            "n_steps"
        );
        assert_eq!(config_key(r#"{"mode":"sweep","theta_deg":10}"#), "sweep");
        assert_eq!(config_key(r#"{"mode":"fast"}"#), "mode");
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(matches!(parse_config("{"), Err(Error::Configuration { .. })));
    }

    #[test]
    fn sweep_plans_grid() {
        let c = parse_config(
            r#"{"mode":"sweep","sweep":{"param":"theta_deg","from":10,"to":80,"count":8}}"#,
        )
        .unwrap();
        let pts = c.points();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0].0, 10.0);
        assert_eq!(pts[7].0, 80.0);
        assert_eq!(pts[3].0, 40.0);
    }

    #[test]
    fn basis_and_sign_parse() {
        let c = parse_config(
            r#"{"mode":"pair","theta_deg":60,"bell_sign":"-","basis":{"generalized":{"alpha":0.3,"beta_mix":0.5}}}"#,
        )
        .unwrap();
        assert_eq!(c.bell_sign, BellSign::Minus);
        assert_eq!(c.basis, PairBasis::Generalized { alpha: 0.3, beta_mix: 0.5 });
        let c = parse_config(r#"{"mode":"pair","theta_deg":60,"basis":"bell","bell_sign":"plus"}"#).unwrap();
        assert_eq!(c.basis, PairBasis::Bell);
        assert_eq!(c.bell_sign, BellSign::Plus);
    }

    fn record(status: Status) -> RunRecord {
        RunRecord {
            status,
            gamma_wilson: 0.5,
            ..RunRecord::empty(30.0, 1.0)
        }
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&[record(Status::Ok)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 10);
        assert_eq!(row[0], "30");
        assert_eq!(row[2], "0.5");
        assert_eq!(row[9], "ok");
    }

    #[test]
    fn plot_data_keeps_failed_rows() {
        let recs: Vec<_> = [Status::Ok, Status::NotAdiabatic].map(record).to_vec();
        let dat = emit_plot_data(&recs);
        let lines: Vec<_> = dat.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with('#'));
        assert!(lines[2].ends_with("not_adiabatic"));
        assert_eq!(lines[1].split_whitespace().nth(2), Some("0.5"));
    }
}
