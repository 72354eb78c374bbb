//! Configuration parsing, run modes and CSV output for the `optocorr` binary.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tempfile::NamedTempFile;
use toml::Value;

use crate::error::{Error, Result};
use crate::gaussian::PairLabel;
use crate::model::{
    cooperativity, steady_state, temperature_for_occupancy, thermal_occupancy, Cavity,
    CavityParams, ModelParams, PhysicalParams,
};
use crate::sweep::{
    evaluate_point, figure_preset_with, FigurePreset, run_sweep, CorrelationReport, CouplingRule, PresetOptions,
    Scale, SweepSpec, SweepVar,
};

pub const CSV_HEADER: [&str; 10] = [
    "swept_var", "value", "eta_mo1", "eta_mo2", "eta_o1o2", "disc_mo1", "disc_mo2", "disc_o1o2",
    "stable", "residual",
];

/// Keys whose values are angular rates and accept the `2pi*<Hz>` shorthand.
const RATE_KEYS: [&str; 6] = ["kappa1", "kappa2", "gamma", "omega_m", "omega_c1", "omega_c2"];

const MODEL_KEYS: [&str; 10] =
    ["kappa1", "kappa2", "gamma", "C1", "C2", "C2_ratio", "r", "nth", "T", "omega_m"];
const SWEEP_KEYS: [&str; 6] = ["var", "lo", "hi", "points", "scale", "label"];
const PRESET_KEYS: [&str; 6] = ["preset", "curves", "points", "scale", "lo", "hi"];
const PHYSICAL_KEYS: [&str; 16] = [
    "wavelength1", "wavelength2", "power1", "power2", "length1", "length2", "kappa1", "kappa2",
    "omega_c1", "omega_c2", "omega_m", "gamma", "mass", "T", "r", "expected_C1",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Point,
    Sweep,
    Preset,
    PhysicalConvert,
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(RunMode::Point),
            "sweep" => Ok(RunMode::Sweep),
            "preset" => Ok(RunMode::Preset),
            "physical-convert" => Ok(RunMode::PhysicalConvert),
            _ => Err(Error::Parse(format!(
                "unknown mode `{s}` (expected point, sweep, preset or physical-convert)"
            ))),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Point => "point",
            RunMode::Sweep => "sweep",
            RunMode::Preset => "preset",
            RunMode::PhysicalConvert => "physical-convert",
        })
    }
}

/// Command-line values. Parameter overrides are kept as text so they go
/// through the same unit handling as file values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    pub c1: Option<String>,
    pub r: Option<String>,
    pub nth: Option<String>,
    pub temperature: Option<String>,
    pub kappa1: Option<String>,
    pub kappa2: Option<String>,
    pub gamma: Option<String>,
    pub points: Option<usize>,
    pub scale: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunInput {
    Point { params: ModelParams, omega_m: Option<f64> },
    Sweep(SweepSpec),
    Preset { name: String, options: PresetOptions },
    Physical { params: PhysicalParams, expected_c1: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub input: RunInput,
    pub out: Option<PathBuf>,
}

/// Parses a TOML document (or nothing) plus command-line overrides.
pub fn parse_config(text: Option<&str>, overrides: &Overrides) -> Result<RunConfig> {
    let mut table: BTreeMap<String, Value> = match text {
        Some(t) => toml::from_str::<toml::Table>(t)
            .map_err(|e| Error::Parse(e.to_string().trim_end().replace('\n', " ")))?
            .into_iter()
            .collect(),
        None => BTreeMap::new(),
    };

    let mut set = |key: &str, v: &Option<String>, clears: Option<&str>| {
        if let Some(v) = v {
            table.insert(key.to_string(), Value::String(v.clone()));
            if let Some(other) = clears {
                table.remove(other);
            }
        }
    };
    set("mode", &overrides.mode, None);
    set("preset", &overrides.preset, None);
    set("C1", &overrides.c1, None);
    set("r", &overrides.r, None);
    set("nth", &overrides.nth, Some("T"));
    set("T", &overrides.temperature, Some("nth"));
    set("kappa1", &overrides.kappa1, None);
    set("kappa2", &overrides.kappa2, None);
    set("gamma", &overrides.gamma, None);
    set("scale", &overrides.scale, None);
    if let Some(p) = overrides.points {
        table.insert("points".into(), Value::Integer(p as i64));
    }
    if let Some(out) = &overrides.out {
        table.insert("out".into(), Value::String(out.display().to_string()));
    }

    let mut doc = Doc { table };
    let mode: RunMode = match doc.take("mode") {
        Some(v) => as_string("mode", &v)?.parse()?,
        None if doc.table.contains_key("preset") => RunMode::Preset,
        None => return Err(Error::MissingKey("mode".into())),
    };
    let out = doc.take("out").map(|v| as_string("out", &v).map(PathBuf::from)).transpose()?;

    let input = match mode {
        RunMode::Point => {
            doc.check_keys(&MODEL_KEYS)?;
            let (params, omega_m, _) = doc.model(None)?;
            RunInput::Point { params, omega_m }
        }
        RunMode::Sweep => {
            doc.check_keys(&[&MODEL_KEYS[..], &SWEEP_KEYS[..]].concat())?;
            RunInput::Sweep(doc.sweep()?)
        }
        RunMode::Preset => {
            let name = as_string("preset", &doc.require("preset")?)?;
            let curve_key = name.parse::<FigurePreset>()?.axes().1.tag();
            let single = doc.opt_number(curve_key)?;
            doc.check_keys(&PRESET_KEYS)?;
            let curves = doc.take("curves").map(|v| number_list("curves", &v)).transpose()?;
            let options = PresetOptions {
                curves: single.map(|v| vec![v]).or(curves),
                points: doc.opt_count("points")?,
                scale: doc.opt_scale()?,
                range: match (doc.opt_number("lo")?, doc.opt_number("hi")?) {
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    (None, None) => None,
                    (Some(_), None) => return Err(Error::MissingKey("hi".into())),
                    (None, Some(_)) => return Err(Error::MissingKey("lo".into())),
                },
            };
            RunInput::Preset { name, options }
        }
        RunMode::PhysicalConvert => {
            doc.check_keys(&PHYSICAL_KEYS)?;
            let (params, expected_c1) = doc.physical()?;
            RunInput::Physical { params, expected_c1 }
        }
    };
    Ok(RunConfig { mode, input, out })
}

struct Doc {
    table: BTreeMap<String, Value>,
}

impl Doc {
    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<Value> {
        self.take(key).ok_or_else(|| Error::MissingKey(key.into()))
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        as_number(key, &v)
    }

    fn opt_number(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| as_number(key, &v)).transpose()
    }

    fn opt_count(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|v| match v {
                Value::Integer(i) if i >= 0 => Ok(i as usize),
                Value::String(s) => s.trim().parse().map_err(|_| unit_err(key, "expected a whole number")),
                _ => Err(unit_err(key, "expected a whole number")),
            })
            .transpose()
    }

    fn opt_scale(&mut self) -> Result<Option<Scale>> {
        self.take("scale").map(|v| as_string("scale", &v)?.parse()).transpose()
    }

    /// Occupancy from `nth`, or from `T` and `omega_m`.
    fn occupancy(&mut self, omega_m: Option<f64>) -> Result<f64> {
        match (self.opt_number("nth")?, self.opt_number("T")?) {
            (Some(_), Some(_)) => {
                Err(Error::InvalidParams("give either nth or T, not both".into()))
            }
            (Some(n), None) => Ok(n),
            (None, Some(t)) => {
                let w = omega_m.ok_or_else(|| Error::MissingKey("omega_m".into()))?;
                Ok(thermal_occupancy(t, w))
            }
            (None, None) => Err(Error::MissingKey("nth".into())),
        }
    }

    /// Model parameters, leaving out the field named by `swept`, with
    /// `omega_m` and the `C₂` rule.
    fn model(&mut self, swept: Option<SweepVar>) -> Result<(ModelParams, Option<f64>, CouplingRule)> {
        let omega_m = self.opt_number("omega_m")?;
        let kappa1 = self.number("kappa1")?;
        let kappa2 = self.number("kappa2")?;
        let gamma = self.number("gamma")?;
        let c1 = if swept == Some(SweepVar::Coop1) { 0.0 } else { self.number("C1")? };
        let r = if swept == Some(SweepVar::Squeeze) { 0.0 } else { self.number("r")? };
        let n_th = if swept == Some(SweepVar::Temperature) {
            for key in ["nth", "T"] {
                if self.table.contains_key(key) {
                    return Err(Error::InvalidSpec(format!("`{key}` conflicts with a T sweep")));
                }
            }
            0.0
        } else {
            self.occupancy(omega_m)?
        };
        let c2 = self.opt_number("C2")?;
        let ratio = self.opt_number("C2_ratio")?;
        if c2.is_some() && ratio.is_some() {
            return Err(Error::InvalidParams("give either C2 or C2_ratio, not both".into()));
        }
        let rule = match c2 {
            Some(_) => CouplingRule::Independent,
            None => CouplingRule::Ratio(ratio.unwrap_or(2.0)),
        };
        let c2 = match rule {
            CouplingRule::Ratio(k) => k * c1,
            CouplingRule::Independent => c2.unwrap_or_default(),
        };
        let mp = ModelParams::new([kappa1, kappa2], gamma, [c1, c2], n_th, r)?;
        Ok((mp, omega_m, rule))
    }

    fn sweep(&mut self) -> Result<SweepSpec> {
        let var: SweepVar = as_string("var", &self.require("var")?)?.parse()?;
        let (base, omega_m, coupling) = self.model(Some(var))?;
        let lo = self.number("lo")?;
        let hi = self.number("hi")?;
        let points = self.opt_count("points")?.unwrap_or(400);
        let scale = self.opt_scale()?.unwrap_or(match var {
            SweepVar::Squeeze => Scale::Linear,
            _ => Scale::Log,
        });
        let label = match self.take("label") {
            Some(v) => as_string("label", &v)?,
            None => format!("sweep_{var}"),
        };
        let spec = SweepSpec {
            label,
            var,
            lo,
            hi,
            points,
            scale,
            base,
            omega_m,
            pairs: PairLabel::STANDARD.to_vec(),
            coupling,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn physical(&mut self) -> Result<(PhysicalParams, Option<f64>)> {
        let mut cavity = |j: u8| -> Result<CavityParams> {
            Ok(CavityParams {
                wavelength: self.number(&format!("wavelength{j}"))?,
                power: self.number(&format!("power{j}"))?,
                length: self.number(&format!("length{j}"))?,
                kappa: self.number(&format!("kappa{j}"))?,
                omega_c: self.number(&format!("omega_c{j}"))?,
            })
        };
        let cavities = [cavity(1)?, cavity(2)?];
        let p = PhysicalParams {
            cavities,
            omega_m: self.number("omega_m")?,
            gamma_m: self.number("gamma")?,
            mass: self.number("mass")?,
            temperature: self.number("T")?,
            squeeze: self.number("r")?,
        };
        let expected = self.opt_number("expected_C1")?;
        p.validate()?;
        Ok((p, expected))
    }
}

fn unit_err(key: &str, reason: &str) -> Error {
    Error::Unit { key: key.into(), reason: reason.into() }
}

fn as_string(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        _ => Err(Error::Parse(format!("`{key}` must be a string"))),
    }
}

fn number_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().map(|x| as_number(key, x)).collect(),
        Value::String(s) => s.split(',').map(|x| parse_number(key, x)).collect(),
        _ => Err(unit_err(key, "expected a list of numbers")),
    }
}

/// Numeric value with units handled: rate keys accept `2pi*<Hz>`.
pub fn as_number(key: &str, v: &Value) -> Result<f64> {
    let x = match v {
        Value::Integer(i) => *i as f64,
        Value::Float(f) => *f,
        Value::String(s) => parse_number(key, s)?,
        _ => return Err(unit_err(key, "expected a number")),
    };
    if !x.is_finite() {
        return Err(unit_err(key, "value is not finite"));
    }
    Ok(x)
}

fn parse_number(key: &str, s: &str) -> Result<f64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let hz = ["2pi*", "2*pi*"].iter().find_map(|p| compact.strip_prefix(p));
    match hz {
        Some(_) if !RATE_KEYS.contains(&key) => {
            Err(unit_err(key, "the 2pi* shorthand is only accepted for angular rates"))
        }
        Some(rest) => rest
            .parse::<f64>()
            .map(|f| 2.0 * std::f64::consts::PI * f)
            .map_err(|_| unit_err(key, &format!("cannot read `{s}` as 2pi*<Hz>"))),
        None => compact
            .parse::<f64>()
            .map_err(|_| unit_err(key, &format!("cannot read `{s}` as a number"))),
    }
}

/// Executes a parsed configuration. Reports go to `stdout`; CSV files to disk.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.input {
        RunInput::Point { params, omega_m } => {
            let rep = evaluate_point(params, &PairLabel::STANDARD)?;
            write_point(stdout, params, *omega_m, &rep)?;
        }
        RunInput::Sweep(spec) => {
            let path = cfg.out.clone().ok_or_else(|| Error::MissingKey("out".into()))?;
            let reports = run_sweep(spec)?;
            write_csv(&path, spec, &reports)?;
            summarize(stdout, &path, &reports)?;
        }
        RunInput::Preset { name, options } => {
            let specs = figure_preset_with(name, options)?;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir)?;
            for spec in &specs {
                let path = dir.join(format!("{}.csv", spec.label));
                let reports = run_sweep(spec)?;
                write_csv(&path, spec, &reports)?;
                summarize(stdout, &path, &reports)?;
            }
        }
        RunInput::Physical { params, expected_c1 } => write_physical(stdout, params, *expected_c1)?,
    }
    Ok(())
}

fn write_point(
    out: &mut dyn Write,
    mp: &ModelParams,
    omega_m: Option<f64>,
    rep: &CorrelationReport,
) -> Result<()> {
    writeln!(out, "kappa1 = {:e} rad/s", mp.kappa[0])?;
    writeln!(out, "kappa2 = {:e} rad/s", mp.kappa[1])?;
    writeln!(out, "gamma = {:e} rad/s", mp.gamma_m)?;
    writeln!(out, "C1 = {}", mp.coop[0])?;
    writeln!(out, "C2 = {}", mp.coop[1])?;
    writeln!(out, "nth = {:e}", mp.n_th)?;
    if let Some(w) = omega_m {
        writeln!(out, "T = {:e} K", temperature_for_occupancy(mp.n_th, w))?;
    }
    writeln!(out, "r = {}", mp.squeeze())?;
    writeln!(out, "stable = {}", rep.stable)?;
    writeln!(out, "stability_margin = {:e} rad/s", rep.stability_margin)?;
    writeln!(out, "residual = {:e}", rep.residual)?;
    writeln!(out, "pair,eta_minus,entangled,discord")?;
    for p in &rep.pairs {
        writeln!(out, "{},{:.16e},{},{:.16e}", p.pair.tag(), p.eta_minus, p.entangled, p.discord)?;
    }
    Ok(())
}

fn summarize(out: &mut dyn Write, path: &Path, reports: &[CorrelationReport]) -> Result<()> {
    let flagged = reports.iter().filter(|r| !r.status.is_ok()).count();
    writeln!(out, "wrote {} ({} points, {} flagged)", path.display(), reports.len(), flagged)?;
    Ok(())
}

fn write_physical(out: &mut dyn Write, p: &PhysicalParams, expected_c1: Option<f64>) -> Result<()> {
    let mp = p.to_model()?;
    for j in Cavity::BOTH {
        let idx = if j == Cavity::One { 1 } else { 2 };
        let coop = cooperativity(p, j);
        let ss = steady_state(p, j);
        let mut as_hz = p.clone();
        for c in &mut as_hz.cavities {
            c.omega_c *= 2.0 * std::f64::consts::PI;
        }
        writeln!(out, "omega_L{idx} = {:e} rad/s", coop.laser_frequency)?;
        writeln!(out, "g{idx} = {:e} rad/s", coop.single_photon_coupling)?;
        writeln!(out, "ncav{idx} = {:e}", coop.n_cav)?;
        writeln!(out, "a{idx}s = {:e} {:+e}i", ss.a_s.re, ss.a_s.im)?;
        writeln!(out, "phi{idx} = {:e} rad", ss.phase)?;
        writeln!(out, "bare_detuning{idx} = {:e} rad/s", ss.bare_detuning)?;
        writeln!(out, "C{idx} = {:e}", coop.value)?;
        writeln!(out, "C{idx} (omega_c{idx} read as Hz) = {:e}", cooperativity(&as_hz, j).value)?;
    }
    let b = steady_state(p, Cavity::One).b_s;
    writeln!(out, "b_s = {:e} {:+e}i", b.re, b.im)?;
    writeln!(out, "nth = {:e}", mp.n_th)?;
    writeln!(out, "N = {:e}", mp.n_sq)?;
    writeln!(out, "M = {:e}", mp.m_sq)?;
    if let Some(expected) = expected_c1 {
        let ratio = mp.coop[0] / expected;
        if (ratio - 1.0).abs() > 1e-3 {
            writeln!(
                out,
                "note: computed C1 = {:e} differs from expected C1 = {expected} by a factor {ratio:.4}",
                mp.coop[0]
            )?;
        }
    }
    Ok(())
}

fn provenance(spec: &SweepSpec) -> Vec<(String, String)> {
    let b = &spec.base;
    let mut kv = vec![
        ("label".to_string(), spec.label.clone()),
        ("swept_var".into(), spec.var.tag().into()),
        ("lo".into(), format!("{:.16e}", spec.lo)),
        ("hi".into(), format!("{:.16e}", spec.hi)),
        ("points".into(), spec.points.to_string()),
        ("scale".into(), spec.scale.to_string()),
        ("kappa1_rad_per_s".into(), format!("{:.16e}", b.kappa[0])),
        ("kappa2_rad_per_s".into(), format!("{:.16e}", b.kappa[1])),
        ("gamma_rad_per_s".into(), format!("{:.16e}", b.gamma_m)),
    ];
    if spec.var != SweepVar::Coop1 {
        kv.push(("C1".into(), format!("{:.16e}", b.coop[0])));
    }
    kv.push(match spec.coupling {
        CouplingRule::Ratio(k) => ("C2_ratio".into(), format!("{k:.16e}")),
        CouplingRule::Independent => ("C2".into(), format!("{:.16e}", b.coop[1])),
    });
    if spec.var != SweepVar::Squeeze {
        kv.push(("r".into(), format!("{:.16e}", b.squeeze())));
        kv.push(("N".into(), format!("{:.16e}", b.n_sq)));
        kv.push(("M".into(), format!("{:.16e}", b.m_sq)));
    }
    if spec.var != SweepVar::Temperature {
        kv.push(("nth".into(), format!("{:.16e}", b.n_th)));
        if let Some(w) = spec.omega_m {
            kv.push(("T_display_K".into(), format!("{:.16e}", temperature_for_occupancy(b.n_th, w))));
        }
    }
    if let Some(w) = spec.omega_m {
        kv.push(("omega_m_rad_per_s".into(), format!("{w:.16e}")));
    }
    kv.push(("discord_unit".into(), "nats".into()));
    kv.push(("measured_mode".into(), "second mode of each pair".into()));
    kv
}

fn csv_row(spec: &SweepSpec, r: &CorrelationReport) -> Vec<String> {
    let f = |x: f64| format!("{x:.16e}");
    let mut row = vec![spec.var.tag().to_string(), f(r.value)];
    row.extend(PairLabel::STANDARD.iter().map(|&p| f(r.eta(p))));
    row.extend(PairLabel::STANDARD.iter().map(|&p| f(r.discord(p))));
    row.push(r.stable.to_string());
    row.push(f(r.residual));
    row
}

/// Writes one sweep to `path` through a temporary file in the same directory,
/// so the final path never holds a partial file.
pub fn write_csv(path: &Path, spec: &SweepSpec, reports: &[CorrelationReport]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    writeln!(tmp, "# optocorr {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in provenance(spec) {
        writeln!(tmp, "# {k} = {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(tmp.as_file_mut());
        w.write_record(CSV_HEADER)?;
        for r in reports {
            w.write_record(csv_row(spec, r))?;
        }
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// One data row of a sweep CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub swept_var: String,
    pub value: f64,
    /// `(mo1, mo2, o1o2)`.
    pub eta: [f64; 3],
    pub discord: [f64; 3],
    pub stable: bool,
    pub residual: f64,
}

/// Reads a sweep CSV written by [`write_csv`], skipping `#` lines.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("{}: unexpected header {header:?}", path.display())));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(CsvRow {
                swept_var: rec[0].to_string(),
                value: num(&rec[1])?,
                eta: [num(&rec[2])?, num(&rec[3])?, num(&rec[4])?],
                discord: [num(&rec[5])?, num(&rec[6])?, num(&rec[7])?],
                stable: rec[8]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad flag `{}`", &rec[8])))?,
                residual: num(&rec[9])?,
            })
        })
        .collect()
}

/// Error line printed on failure, e.g. `error kind=UnitError code=51: ...`.
pub fn error_line(e: &Error) -> String {
    format!("error kind={} code={}: {e}", e.kind(), e.exit_code())
}
