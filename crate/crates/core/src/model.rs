//! Linearised red-sideband model: lab parameters, cooperativities, and the
//! drift and diffusion matrices of the quadrature fluctuations.
//!
//! All rates and frequencies are angular (rad/s).

use nalgebra::Matrix6;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Cavity index, 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cavity {
    One,
    Two,
}

impl Cavity {
    pub const BOTH: [Cavity; 2] = [Cavity::One, Cavity::Two];

    fn index(self) -> usize {
        match self {
            Cavity::One => 0,
            Cavity::Two => 1,
        }
    }

    /// `(-1)^{j+1}`: radiation pressure pushes the shared mirror in
    /// opposite directions from the two sides.
    fn sign(self) -> f64 {
        match self {
            Cavity::One => 1.0,
            Cavity::Two => -1.0,
        }
    }
}

/// Per-cavity lab parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityParams {
    /// Laser wavelength, m.
    pub wavelength: f64,
    /// Input power, W.
    pub power: f64,
    /// Cavity length, m.
    pub length: f64,
    /// Energy decay rate, rad/s.
    pub kappa: f64,
    /// Cavity resonance, rad/s.
    pub omega_c: f64,
}

impl CavityParams {
    pub fn laser_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.wavelength
    }
}

/// Lab-frame description of the double cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    pub cavities: [CavityParams; 2],
    /// Mechanical frequency, rad/s.
    pub omega_m: f64,
    /// Mechanical damping, rad/s.
    pub gamma_m: f64,
    /// Effective mirror mass, kg.
    pub mass: f64,
    /// Mirror bath temperature, K.
    pub temperature: f64,
    /// Two-mode squeezing parameter.
    pub squeeze: f64,
}

/// Cooperativity quoted in the literature for [`PhysicalParams::reference_lab`].
///
/// Direct evaluation of the closed form does not reproduce it; the
/// physical-convert report prints both.
pub const REFERENCE_LAB_COOP1: f64 = 35.0;

impl PhysicalParams {
    /// Reference lab parameter set: 1064 nm lasers, 10 mW and 20 mW drives,
    /// 25 mm cavities, κ = 2π·215 kHz, ω_μ = 2π·947 kHz, 145 ng mirror,
    /// γ_μ = 2π·1.5 kHz, ω_c = 3.5e15 (read as rad/s).
    pub fn reference_lab() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let cavity = |power| CavityParams {
            wavelength: 1064e-9,
            power,
            length: 25e-3,
            kappa: two_pi * 215e3,
            omega_c: 3.5e15,
        };
        Self {
            cavities: [cavity(10e-3), cavity(20e-3)],
            omega_m: two_pi * 947e3,
            gamma_m: two_pi * 1.5e3,
            mass: 145e-12,
            temperature: 0.0,
            squeeze: 0.0,
        }
    }

    pub fn cavity(&self, j: Cavity) -> &CavityParams {
        &self.cavities[j.index()]
    }

    pub fn validate(&self) -> Result<()> {
        for (j, c) in self.cavities.iter().enumerate() {
            let j = j + 1;
            positive(&format!("wavelength{j}"), c.wavelength)?;
            positive(&format!("power{j}"), c.power)?;
            positive(&format!("length{j}"), c.length)?;
            positive(&format!("kappa{j}"), c.kappa)?;
            positive(&format!("omega_c{j}"), c.omega_c)?;
        }
        positive("omega_m", self.omega_m)?;
        positive("gamma", self.gamma_m)?;
        positive("mass", self.mass)?;
        non_negative("T", self.temperature)?;
        non_negative("r", self.squeeze)?;
        Ok(())
    }

    /// Single-photon coupling `g_j = (ω_c/l) √(ħ / m ω_μ)`, rad/s.
    pub fn single_photon_coupling(&self, j: Cavity) -> f64 {
        let c = self.cavity(j);
        c.omega_c / c.length * (HBAR / (self.mass * self.omega_m)).sqrt()
    }

    /// Drive strength `ε_j = √(2 κ P / ħ ω_L)`, s^-1/2 scaled to rad/s units.
    pub fn drive_rate(&self, j: Cavity) -> f64 {
        let c = self.cavity(j);
        (2.0 * c.kappa * c.power / (HBAR * c.laser_frequency())).sqrt()
    }

    /// Converts to the reduced parameters of the correlation pipeline.
    pub fn to_model(&self) -> Result<ModelParams> {
        self.validate()?;
        let c1 = cooperativity(self, Cavity::One).value;
        let c2 = cooperativity(self, Cavity::Two).value;
        ModelParams::new(
            [self.cavities[0].kappa, self.cavities[1].kappa],
            self.gamma_m,
            [c1, c2],
            thermal_occupancy(self.temperature, self.omega_m),
            self.squeeze,
        )
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{key} must be positive and finite, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{key} must be non-negative and finite, got {v}")))
    }
}

/// Reduced parameter set that fixes the drift and diffusion matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub kappa: [f64; 2],
    pub gamma_m: f64,
    pub coop: [f64; 2],
    pub n_th: f64,
    /// Squeezed-input occupancy `sinh²r`.
    pub n_sq: f64,
    /// Squeezed-input correlation `sinh r cosh r`.
    pub m_sq: f64,
}

impl ModelParams {
    pub fn new(kappa: [f64; 2], gamma_m: f64, coop: [f64; 2], n_th: f64, squeeze: f64) -> Result<Self> {
        non_negative("r", squeeze)?;
        let (n_sq, m_sq) = squeeze_moments(squeeze);
        let mp = Self { kappa, gamma_m, coop, n_th, n_sq, m_sq };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        positive("kappa1", self.kappa[0])?;
        positive("kappa2", self.kappa[1])?;
        positive("gamma", self.gamma_m)?;
        non_negative("C1", self.coop[0])?;
        non_negative("C2", self.coop[1])?;
        non_negative("nth", self.n_th)?;
        non_negative("N", self.n_sq)?;
        let expected = self.n_sq * (self.n_sq + 1.0);
        let m2 = self.m_sq * self.m_sq;
        if !(self.m_sq >= 0.0) || (m2 - expected).abs() > 1e-12 * expected.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParams(format!(
                "squeezed moments must satisfy M² = N(N+1); got N = {}, M = {}",
                self.n_sq, self.m_sq
            )));
        }
        Ok(())
    }

    /// Squeezing parameter recovered from `N`.
    pub fn squeeze(&self) -> f64 {
        self.n_sq.sqrt().asinh()
    }

    pub fn with_squeeze(mut self, r: f64) -> Result<Self> {
        non_negative("r", r)?;
        (self.n_sq, self.m_sq) = squeeze_moments(r);
        Ok(self)
    }

    /// Effective coupling `G_j = ½ √(γ_μ κ_j C_j)`, rad/s.
    pub fn effective_coupling(&self, j: Cavity) -> f64 {
        let i = j.index();
        0.5 * (self.gamma_m * self.kappa[i] * self.coop[i]).sqrt()
    }

    /// Largest of the three damping rates.
    pub fn max_rate(&self) -> f64 {
        self.kappa[0].max(self.kappa[1]).max(self.gamma_m)
    }

    pub fn min_rate(&self) -> f64 {
        self.kappa[0].min(self.kappa[1]).min(self.gamma_m)
    }
}

/// Bose occupancy of the mirror bath. Zero at `T = 0`.
pub fn thermal_occupancy(temperature: f64, omega_m: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega_m / (K_B * temperature)).exp_m1()
}

/// Temperature whose Bose occupancy at `omega_m` equals `n_th`.
pub fn temperature_for_occupancy(n_th: f64, omega_m: f64) -> f64 {
    if n_th <= 0.0 {
        return 0.0;
    }
    HBAR * omega_m / (K_B * (1.0 / n_th).ln_1p())
}

/// `(N, M) = (sinh²r, sinh r cosh r)`.
pub fn squeeze_moments(r: f64) -> (f64, f64) {
    let s = r.sinh();
    (s * s, s * r.cosh())
}

/// Cooperativity of one cavity together with the quantities it is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CooperativityReport {
    pub value: f64,
    pub single_photon_coupling: f64,
    pub n_cav: f64,
    pub laser_frequency: f64,
}

/// `C_j = 8 ω_c² P / (γ m ω_μ ω_L l² [(κ/2)² + ω_μ²])` at the red sideband.
pub fn cooperativity(p: &PhysicalParams, j: Cavity) -> CooperativityReport {
    let c = p.cavity(j);
    let omega_l = c.laser_frequency();
    let lorentz = (c.kappa / 2.0).powi(2) + p.omega_m.powi(2);
    let value = 8.0 * c.omega_c.powi(2) * c.power
        / (p.gamma_m * p.mass * p.omega_m * omega_l * c.length.powi(2) * lorentz);
    let eps = p.drive_rate(j);
    CooperativityReport {
        value,
        single_photon_coupling: p.single_photon_coupling(j),
        n_cav: eps * eps / lorentz,
        laser_frequency: omega_l,
    }
}

/// Classical steady state of one cavity at the red sideband.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyState {
    /// Intracavity amplitude `a_js`, purely negative imaginary.
    pub a_s: Complex64,
    /// Mirror amplitude `b_s` (shared by both cavities).
    pub b_s: Complex64,
    pub n_cav: f64,
    /// Input laser phase, rad.
    pub phase: f64,
    /// Bare detuning `Δ_j` that yields `Δ'_j = -ω_μ`, rad/s.
    pub bare_detuning: f64,
}

fn cavity_amplitude(p: &PhysicalParams, j: Cavity) -> (Complex64, f64) {
    let c = p.cavity(j);
    let eff_detuning = -p.omega_m;
    let phase = (-2.0 * eff_detuning / c.kappa).atan();
    let eps = if c.power > 0.0 { p.drive_rate(j) } else { 0.0 };
    let i = Complex64::i();
    let a = -2.0 * i * Complex64::from_polar(1.0, phase) * eps
        / Complex64::new(c.kappa, -2.0 * eff_detuning);
    (a, phase)
}

/// Steady-state amplitudes with the effective detuning fixed to `-ω_μ`.
pub fn steady_state(p: &PhysicalParams, j: Cavity) -> SteadyState {
    let i = Complex64::i();
    let pressure: f64 = Cavity::BOTH
        .iter()
        .map(|&k| k.sign() * p.single_photon_coupling(k) * cavity_amplitude(p, k).0.norm_sqr())
        .sum();
    let b_s = 2.0 * i / Complex64::new(p.gamma_m, 2.0 * p.omega_m) * pressure;
    let (a_s, phase) = cavity_amplitude(p, j);
    let shift = j.sign() * p.single_photon_coupling(j) * 2.0 * b_s.re;
    SteadyState {
        a_s,
        b_s,
        n_cav: a_s.norm_sqr(),
        phase,
        bare_detuning: -p.omega_m - shift,
    }
}

/// Drift matrix of `(X₁, Y₁, X₂, Y₂, q, p)`.
pub fn build_drift(mp: &ModelParams) -> Matrix6<f64> {
    let [k1, k2] = mp.kappa;
    let g = mp.gamma_m;
    let c1 = (g * k1 * mp.coop[0]).sqrt();
    let c2 = (g * k2 * mp.coop[1]).sqrt();
    #[rustfmt::skip]
    let a = Matrix6::new(
        -k1, 0.0, 0.0, 0.0,  c1, 0.0,
        0.0, -k1, 0.0, 0.0, 0.0,  c1,
        0.0, 0.0, -k2, 0.0, -c2, 0.0,
        0.0, 0.0, 0.0, -k2, 0.0, -c2,
        -c1, 0.0,  c2, 0.0,  -g, 0.0,
        0.0, -c1, 0.0,  c2, 0.0,  -g,
    );
    a * 0.5
}

/// Diffusion matrix of the squeezed optical inputs and thermal mirror bath.
pub fn build_diffusion(mp: &ModelParams) -> Matrix6<f64> {
    let [k1, k2] = mp.kappa;
    let opt = mp.n_sq + 0.5;
    let mech = mp.gamma_m * (mp.n_th + 0.5);
    let cross = (k1 * k2).sqrt() * mp.m_sq;
    let mut d = Matrix6::from_diagonal(&nalgebra::Vector6::new(
        k1 * opt,
        k1 * opt,
        k2 * opt,
        k2 * opt,
        mech,
        mech,
    ));
    d[(0, 2)] = cross;
    d[(2, 0)] = cross;
    d[(1, 3)] = -cross;
    d[(3, 1)] = -cross;
    d
}

/// Result of [`is_stable`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Largest real part among the eigenvalues of the drift.
    pub max_real_part: f64,
    /// Rate scale used for the threshold: twice the largest diagonal entry magnitude.
    pub rate_scale: f64,
    /// `A + Aᵀ` negative definite, which implies stability.
    pub dissipative: bool,
}

impl StabilityVerdict {
    /// Distance of the spectral abscissa below the stability threshold.
    pub fn margin(&self) -> f64 {
        -self.max_real_part
    }
}

/// Stability of `A`: every eigenvalue must have real part below
/// `-1e-9 × rate_scale`. For model drifts `rate_scale = max(κ₁, κ₂, γ_μ)`.
pub fn is_stable(a: &Matrix6<f64>) -> StabilityVerdict {
    let rate_scale = 2.0 * (0..6).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let max_real_part = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let sym = a + a.transpose();
    let dissipative = sym
        .symmetric_eigenvalues()
        .iter()
        .all(|&l| l < 0.0);
    StabilityVerdict {
        stable: max_real_part < -1e-9 * rate_scale,
        max_real_part,
        rate_scale,
        dissipative,
    }
}
