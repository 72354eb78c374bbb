//! Parameter sweeps over `T`, `r` or `C₁`, threshold searches, and the
//! figure presets.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_discord, pair_invariants, simon_eta_minus, Cov6, PairLabel};
use crate::model::{thermal_occupancy, ModelParams};
use crate::solver::{reduce_pair, relative_residual, solve_lyapunov, LyapunovProblem};

/// Largest Lyapunov residual accepted on a grid point.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Relative tolerance of [`find_threshold`] in the swept variable.
pub const THRESHOLD_REL_TOL: f64 = 1e-4;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepVar {
    /// Bath temperature, K.
    Temperature,
    /// Squeezing parameter.
    Squeeze,
    /// Cooperativity of cavity 1.
    Coop1,
}

impl SweepVar {
    pub fn tag(self) -> &'static str {
        match self {
            SweepVar::Temperature => "T",
            SweepVar::Squeeze => "r",
            SweepVar::Coop1 => "C1",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(SweepVar::Temperature),
            "r" => Ok(SweepVar::Squeeze),
            "C1" => Ok(SweepVar::Coop1),
            _ => Err(Error::InvalidSpec(format!("unknown sweep variable `{s}` (expected T, r or C1)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" | "logarithmic" => Ok(Scale::Log),
            _ => Err(Error::InvalidSpec(format!("unknown scale `{s}` (expected linear or log)"))),
        }
    }
}

impl Scale {
    fn forward(self, x: f64) -> f64 {
        match self {
            Scale::Linear => x,
            Scale::Log => x.ln(),
        }
    }

    fn inverse(self, u: f64) -> f64 {
        match self {
            Scale::Linear => u,
            Scale::Log => u.exp(),
        }
    }
}

/// How `C₂` follows `C₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingRule {
    /// `C₂ = ratio · C₁`.
    Ratio(f64),
    /// `C₂` taken from the base parameters.
    Independent,
}

impl Default for CouplingRule {
    fn default() -> Self {
        CouplingRule::Ratio(2.0)
    }
}

/// One curve: a one-dimensional grid in `var` around fixed parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub label: String,
    pub var: SweepVar,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub scale: Scale,
    /// Fixed parameters. The swept field is overwritten per point.
    pub base: ModelParams,
    /// Mechanical frequency in rad/s, needed to convert temperatures.
    pub omega_m: Option<f64>,
    pub pairs: Vec<PairLabel>,
    pub coupling: CouplingRule,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(format!("{}: {msg}", self.label)));
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return bad(format!("range must satisfy lo < hi, got [{}, {}]", self.lo, self.hi));
        }
        if self.points < 2 {
            return bad(format!("need at least 2 points, got {}", self.points));
        }
        if self.scale == Scale::Log && self.lo <= 0.0 {
            return bad("log scale needs a positive lower bound".into());
        }
        if self.lo < 0.0 {
            return bad(format!("{} cannot be negative", self.var));
        }
        if self.var == SweepVar::Temperature && !self.omega_m.is_some_and(|w| w > 0.0 && w.is_finite()) {
            return bad("temperature sweeps need a positive omega_m".into());
        }
        if self.pairs.is_empty() {
            return bad("no pairs selected".into());
        }
        if let CouplingRule::Ratio(k) = self.coupling {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("coupling ratio must be non-negative, got {k}"));
            }
        }
        self.base.validate()
    }

    /// Grid values in sweep order. Both end points are exact.
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.scale.forward(self.lo), self.scale.forward(self.hi));
        let last = self.points - 1;
        (0..self.points)
            .map(|i| match i {
                0 => self.lo,
                i if i == last => self.hi,
                i => self.scale.inverse(a + (b - a) * i as f64 / last as f64),
            })
            .collect()
    }

    /// Model parameters at swept value `x`.
    pub fn params_at(&self, x: f64) -> Result<ModelParams> {
        let mut mp = self.base;
        match self.var {
            SweepVar::Temperature => {
                let w = self.omega_m.ok_or_else(|| Error::InvalidSpec("omega_m missing".into()))?;
                mp.n_th = thermal_occupancy(x, w);
            }
            SweepVar::Squeeze => mp = mp.with_squeeze(x)?,
            SweepVar::Coop1 => mp.coop[0] = x,
        }
        if let CouplingRule::Ratio(k) = self.coupling {
            mp.coop[1] = k * mp.coop[0];
        }
        mp.validate()?;
        Ok(mp)
    }
}

/// Correlations of one pair at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCorrelation {
    pub pair: PairLabel,
    pub eta_minus: f64,
    pub entangled: bool,
    /// Gaussian discord in nats, measuring the second mode of the pair.
    pub discord: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointStatus {
    Ok,
    Unstable,
    ResidualExceeded,
    Failed(String),
}

impl PointStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, PointStatus::Ok)
    }
}

/// Everything computed at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub value: f64,
    pub params: Option<ModelParams>,
    pub pairs: Vec<PairCorrelation>,
    pub stable: bool,
    /// Minus the spectral abscissa of the drift, rad/s.
    pub stability_margin: f64,
    pub residual: f64,
    pub covariance: Option<Cov6>,
    pub status: PointStatus,
}

impl CorrelationReport {
    pub fn pair(&self, label: PairLabel) -> Option<&PairCorrelation> {
        self.pairs.iter().find(|p| p.pair == label)
    }

    pub fn eta(&self, label: PairLabel) -> f64 {
        self.pair(label).map_or(f64::NAN, |p| p.eta_minus)
    }

    pub fn discord(&self, label: PairLabel) -> f64 {
        self.pair(label).map_or(f64::NAN, |p| p.discord)
    }

    fn failed(value: f64, params: Option<ModelParams>, status: PointStatus) -> Self {
        Self {
            value,
            params,
            pairs: Vec::new(),
            stable: false,
            stability_margin: f64::NAN,
            residual: f64::NAN,
            covariance: None,
            status,
        }
    }
}

/// Full pipeline at one parameter point.
pub fn evaluate_point(mp: &ModelParams, pairs: &[PairLabel]) -> Result<CorrelationReport> {
    let problem = LyapunovProblem::from_model(mp)?;
    let cov = solve_lyapunov(&problem)?;
    let residual = relative_residual(&problem, cov.matrix());
    let pairs = pairs
        .iter()
        .map(|&label| {
            let pcm = reduce_pair(&cov, label);
            let eta_minus = simon_eta_minus(&pair_invariants(&pcm))?;
            Ok(PairCorrelation {
                pair: label,
                eta_minus,
                entangled: eta_minus < 0.5,
                discord: gaussian_discord(&pcm)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let status = if residual <= RESIDUAL_LIMIT {
        PointStatus::Ok
    } else {
        log::error!("Lyapunov residual {residual:e} above {RESIDUAL_LIMIT:e}");
        PointStatus::ResidualExceeded
    };
    Ok(CorrelationReport {
        value: f64::NAN,
        params: Some(*mp),
        pairs,
        stable: true,
        stability_margin: problem.stability().margin(),
        residual,
        covariance: Some(cov),
        status,
    })
}

fn evaluate_at(spec: &SweepSpec, x: f64) -> CorrelationReport {
    let mp = match spec.params_at(x) {
        Ok(mp) => mp,
        Err(e) => return CorrelationReport::failed(x, None, PointStatus::Failed(e.to_string())),
    };
    match evaluate_point(&mp, &spec.pairs) {
        Ok(mut rep) => {
            rep.value = x;
            rep
        }
        Err(Error::UnstableDrift { max_real_part }) => {
            log::warn!("{}: {} = {x:e} is unstable", spec.label, spec.var);
            let mut rep = CorrelationReport::failed(x, Some(mp), PointStatus::Unstable);
            rep.stability_margin = -max_real_part;
            rep
        }
        Err(e) => {
            log::warn!("{}: {} = {x:e} failed: {e}", spec.label, spec.var);
            CorrelationReport::failed(x, Some(mp), PointStatus::Failed(e.to_string()))
        }
    }
}

/// One report per grid point, in grid order. Failing points are flagged
/// and the sweep carries on.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CorrelationReport>> {
    spec.validate()?;
    Ok(spec.grid().into_par_iter().map(|x| evaluate_at(spec, x)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdTarget {
    /// First grid interval where η⁻ crosses 1/2.
    EtaCrossing,
    EtaMinimum,
    DiscordMaximum,
    DiscordMinimum,
}

impl ThresholdTarget {
    /// Objective that the extremum search maximizes, or the crossing function.
    fn objective(self, rep: &CorrelationReport, pair: PairLabel) -> f64 {
        match self {
            ThresholdTarget::EtaCrossing => rep.eta(pair) - 0.5,
            ThresholdTarget::EtaMinimum => -rep.eta(pair),
            ThresholdTarget::DiscordMaximum => rep.discord(pair),
            ThresholdTarget::DiscordMinimum => -rep.discord(pair),
        }
    }
}

/// Locates a crossing or interior extremum on the grid of `spec` and refines
/// it to [`THRESHOLD_REL_TOL`] by bisection or golden-section search.
pub fn find_threshold(spec: &SweepSpec, pair: PairLabel, target: ThresholdTarget) -> Result<f64> {
    let mut spec = spec.clone();
    if !spec.pairs.contains(&pair) {
        spec.pairs = vec![pair];
    }
    let reports = run_sweep(&spec)?;
    let values: Vec<f64> = reports.iter().map(|r| target.objective(r, pair)).collect();
    let grid = spec.grid();
    let eval = |x: f64| {
        let rep = evaluate_at(&spec, x);
        if rep.status.is_ok() {
            Ok(target.objective(&rep, pair))
        } else {
            Err(Error::NotBracketed(format!("{} = {x:e} could not be evaluated: {:?}", spec.var, rep.status)))
        }
    };

    if target == ThresholdTarget::EtaCrossing {
        let i = values
            .windows(2)
            .position(|w| w[0].is_finite() && w[1].is_finite() && (w[0] < 0.0) != (w[1] < 0.0))
            .ok_or_else(|| {
                Error::NotBracketed(format!("η⁻ of {pair} does not cross 1/2 on {}", spec.label))
            })?;
        let (mut a, mut b) = (spec.scale.forward(grid[i]), spec.scale.forward(grid[i + 1]));
        let below_at_a = values[i] < 0.0;
        loop {
            let (xa, xb) = (spec.scale.inverse(a), spec.scale.inverse(b));
            if (xb - xa).abs() <= THRESHOLD_REL_TOL * xa.abs().max(xb.abs()) {
                return Ok(spec.scale.inverse(0.5 * (a + b)));
            }
            let m = 0.5 * (a + b);
            if (eval(spec.scale.inverse(m))? < 0.0) == below_at_a {
                a = m;
            } else {
                b = m;
            }
        }
    }

    let (i, _) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::NotBracketed(format!("no valid points on {}", spec.label)))?;
    if i == 0 || i + 1 == values.len() {
        return Err(Error::NotBracketed(format!(
            "{target:?} of {pair} sits on the edge of {} ({} = {:e})",
            spec.label, spec.var, grid[i]
        )));
    }
    golden_section(
        |u| eval(spec.scale.inverse(u)),
        spec.scale.forward(grid[i - 1]),
        spec.scale.forward(grid[i + 1]),
        |a, b| {
            let (xa, xb) = (spec.scale.inverse(a), spec.scale.inverse(b));
            (xb - xa).abs() <= THRESHOLD_REL_TOL * xa.abs().max(xb.abs())
        },
    )
    .map(|u| spec.scale.inverse(u))
}

fn golden_section(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    done: impl Fn(f64, f64) -> bool,
) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while !done(a, b) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Figure presets. Entanglement figures 2–4 and discord figures 5–7 share
/// their grids pairwise (2/5, 3/6, 4/7).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigurePreset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 6] = [
        FigurePreset::Fig2,
        FigurePreset::Fig3,
        FigurePreset::Fig4,
        FigurePreset::Fig5,
        FigurePreset::Fig6,
        FigurePreset::Fig7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig2 => "fig2",
            FigurePreset::Fig3 => "fig3",
            FigurePreset::Fig4 => "fig4",
            FigurePreset::Fig5 => "fig5",
            FigurePreset::Fig6 => "fig6",
            FigurePreset::Fig7 => "fig7",
        }
    }

    /// Swept variable and curve variable.
    pub fn axes(self) -> (SweepVar, SweepVar) {
        match self {
            FigurePreset::Fig2 | FigurePreset::Fig5 => (SweepVar::Temperature, SweepVar::Squeeze),
            FigurePreset::Fig3 | FigurePreset::Fig6 => (SweepVar::Squeeze, SweepVar::Coop1),
            FigurePreset::Fig4 | FigurePreset::Fig7 => (SweepVar::Coop1, SweepVar::Squeeze),
        }
    }

    /// Curve values drawn by default.
    pub fn default_curves(self) -> Vec<f64> {
        match self.axes().1 {
            SweepVar::Coop1 => vec![25.0, 50.0, 100.0],
            _ => vec![0.0, 0.1, 0.3, 0.5, 1.0],
        }
    }
}

impl fmt::Display for FigurePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Overrides applied on top of a preset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PresetOptions {
    pub curves: Option<Vec<f64>>,
    pub points: Option<usize>,
    pub scale: Option<Scale>,
    pub range: Option<(f64, f64)>,
}

/// Mechanical frequency shared by all presets, rad/s.
pub const PRESET_OMEGA_M: f64 = TWO_PI * 947e3;
/// Cavity decay shared by all presets, rad/s.
pub const PRESET_KAPPA: f64 = TWO_PI * 215e3;

/// Sweep specs of one figure, one per legend curve.
pub fn figure_preset(name: &str) -> Result<Vec<SweepSpec>> {
    figure_preset_with(name, &PresetOptions::default())
}

pub fn figure_preset_with(name: &str, opts: &PresetOptions) -> Result<Vec<SweepSpec>> {
    let preset: FigurePreset = name.parse()?;
    let (var, curve_var) = preset.axes();
    let (gamma_m, n_th, c1, range, scale) = match preset {
        FigurePreset::Fig2 | FigurePreset::Fig5 => (TWO_PI * 1500.0, 0.0, 35.0, (5e-6, 0.1), Scale::Log),
        FigurePreset::Fig3 | FigurePreset::Fig6 => (TWO_PI * 140.0, 1e-3, 25.0, (0.0, 4.5), Scale::Linear),
        FigurePreset::Fig4 | FigurePreset::Fig7 => (TWO_PI * 140.0, 1e-2, 35.0, (0.1, 1e6), Scale::Log),
    };
    let curves = opts.curves.clone().unwrap_or_else(|| preset.default_curves());
    if curves.is_empty() {
        return Err(Error::InvalidSpec(format!("{preset}: empty curve list")));
    }
    let (lo, hi) = opts.range.unwrap_or(range);
    curves
        .iter()
        .map(|&v| {
            let base = ModelParams::new([PRESET_KAPPA; 2], gamma_m, [c1, 2.0 * c1], n_th, 0.0)?;
            let base = match curve_var {
                SweepVar::Squeeze => base.with_squeeze(v)?,
                SweepVar::Coop1 => ModelParams { coop: [v, 2.0 * v], ..base },
                SweepVar::Temperature => unreachable!("no preset draws curves in T"),
            };
            let spec = SweepSpec {
                label: format!("{preset}_{}_{}", curve_var.tag(), v),
                var,
                lo,
                hi,
                points: opts.points.unwrap_or(400),
                scale: opts.scale.unwrap_or(scale),
                base,
                omega_m: Some(PRESET_OMEGA_M),
                pairs: PairLabel::STANDARD.to_vec(),
                coupling: CouplingRule::default(),
            };
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}
