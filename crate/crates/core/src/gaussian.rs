//! Two-mode Gaussian covariance analysis.
//!
//! Quadrature covariances use the convention where the vacuum variance is
//! 1/2, so a pair is entangled iff the smallest partially transposed
//! symplectic eigenvalue drops below 1/2, and the von Neumann entropy of a
//! mode with symplectic eigenvalue `x` is `f(x) = (x+1/2)ln(x+1/2) - (x-1/2)ln(x-1/2)`.
//!
//! The closed forms for the symplectic eigenvalues are evaluated with a
//! discriminant obtained from a traceless matrix square (see
//! [`pair_invariants`]) instead of `Δ² - 4 det V`, and with the small root
//! rationalised as `2λ / (Δ + √gap)`. Both are algebraically identical to
//! the textbook expressions but keep full precision near degenerate spectra
//! (vacuum, pure states) and for strongly squeezed states.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix6};

use crate::error::{Error, Result};

/// Variance of a vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Relative tolerance used when clamping round-off inside square roots.
pub const SQRT_CLAMP_REL: f64 = 1e-12;

/// Negative discord values above `-DISCORD_CLAMP` are treated as zero.
pub const DISCORD_CLAMP: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;
const PHYSICAL_TOL: f64 = 1e-9;
const PRODUCT_LIMIT_REL: f64 = 1e-14;
const ROUNDOFF: f64 = 16.0 * f64::EPSILON;

/// One of the three modes, in the fixed order (X₁, Y₁, X₂, Y₂, q, p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    O1,
    O2,
    Mech,
}

impl Mode {
    /// Row of the position-like quadrature of this mode in a [`Cov6`].
    pub fn offset(self) -> usize {
        match self {
            Mode::O1 => 0,
            Mode::O2 => 2,
            Mode::Mech => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Mode::O1 => "o1",
            Mode::O2 => "o2",
            Mode::Mech => "m",
        }
    }
}

/// Ordered mode pair. The second mode is the one measured in the discord.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairLabel {
    first: Mode,
    second: Mode,
}

impl PairLabel {
    pub const MECH_O1: PairLabel = PairLabel { first: Mode::Mech, second: Mode::O1 };
    pub const MECH_O2: PairLabel = PairLabel { first: Mode::Mech, second: Mode::O2 };
    pub const O1_O2: PairLabel = PairLabel { first: Mode::O1, second: Mode::O2 };

    /// The three pairs reported by the harness, in CSV column order.
    pub const STANDARD: [PairLabel; 3] = [Self::MECH_O1, Self::MECH_O2, Self::O1_O2];

    pub fn new(first: Mode, second: Mode) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidParams(format!(
                "pair needs two distinct modes, got {} twice",
                first.tag()
            )));
        }
        Ok(Self { first, second })
    }

    pub fn first(self) -> Mode {
        self.first
    }

    pub fn second(self) -> Mode {
        self.second
    }

    pub fn reversed(self) -> Self {
        Self { first: self.second, second: self.first }
    }

    pub fn tag(self) -> String {
        format!("{}{}", self.first.tag(), self.second.tag())
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for PairLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mode = |t: &str| match t {
            "o1" => Some(Mode::O1),
            "o2" => Some(Mode::O2),
            "m" => Some(Mode::Mech),
            _ => None,
        };
        let s = s.trim();
        for split in 1..s.len() {
            if let (Some(a), Some(b)) = (mode(&s[..split]), mode(&s[split..])) {
                return PairLabel::new(a, b);
            }
        }
        Err(Error::InvalidParams(format!("unknown mode pair `{s}`")))
    }
}

/// Steady-state covariance matrix of the three modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Cov6(Matrix6<f64>);

impl Cov6 {
    /// Wraps a matrix after checking it is symmetric to 1e-12 relative.
    ///
    /// Positivity and the uncertainty principle are not enforced here; use
    /// [`check_physical`] for a full diagnosis.
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        let residual = symmetry_residual(&m);
        if !(residual <= SYMMETRY_TOL) {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(Self(m))
    }

    pub fn vacuum() -> Self {
        Self(Matrix6::identity() * VACUUM_VARIANCE)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix6<f64> {
        self.0
    }

    /// 2×2 block between two modes (rows of `row`, columns of `col`).
    pub fn block(&self, row: Mode, col: Mode) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(row.offset(), col.offset()).into_owned()
    }
}

fn symmetry_residual<const N: usize>(m: &nalgebra::SMatrix<f64, N, N>) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).norm() / norm
}

/// Reduced two-mode covariance `[[A, C], [Cᵀ, B]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCM {
    pub block_a: Matrix2<f64>,
    pub block_b: Matrix2<f64>,
    pub cross: Matrix2<f64>,
    pub label: PairLabel,
}

impl PairCM {
    /// Builds a pair matrix, rejecting asymmetric local blocks or an
    /// assembled matrix that is not positive definite.
    pub fn new(
        block_a: Matrix2<f64>,
        block_b: Matrix2<f64>,
        cross: Matrix2<f64>,
        label: PairLabel,
    ) -> Result<Self> {
        for block in [&block_a, &block_b] {
            let residual = symmetry_residual(block);
            if !(residual <= SYMMETRY_TOL) {
                return Err(Error::NotSymmetric { residual });
            }
        }
        let pcm = Self { block_a, block_b, cross, label };
        if pcm.assembled().cholesky().is_none() {
            return Err(Error::NonPhysicalInput(format!(
                "pair {label} covariance is not positive definite"
            )));
        }
        Ok(pcm)
    }

    pub fn assembled(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.block_a);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.cross);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.cross.transpose());
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.block_b);
        m
    }

    /// Same state with the two modes exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            block_a: self.block_b,
            block_b: self.block_a,
            cross: self.cross.transpose(),
            label: self.label.reversed(),
        }
    }
}

/// Determinant invariants of a two-mode covariance matrix.
///
/// `gap_pt` and `gap_tilde` hold `delta_pt² - 4 lam` and
/// `delta_tilde² - 4 lam`; [`pair_invariants`] fills them from a
/// cancellation-free expression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairInvariants {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub lam: f64,
    pub delta_pt: f64,
    pub delta_tilde: f64,
    pub gap_pt: f64,
    pub gap_tilde: f64,
}

impl PairInvariants {
    /// Invariants from the four determinants alone. The discriminants are
    /// evaluated directly, so precision degrades near degenerate spectra.
    pub fn from_determinants(alpha: f64, beta: f64, theta: f64, lam: f64) -> Self {
        let delta_pt = alpha + beta - 2.0 * theta;
        let delta_tilde = alpha + beta + 2.0 * theta;
        Self {
            alpha,
            beta,
            theta,
            lam,
            delta_pt,
            delta_tilde,
            gap_pt: delta_pt * delta_pt - 4.0 * lam,
            gap_tilde: delta_tilde * delta_tilde - 4.0 * lam,
        }
    }
}

fn omega4() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

// For a two-mode covariance V with symplectic eigenvalues ν±, -(ΩV)² has
// spectrum {ν₊², ν₊², ν₋², ν₋²}. Removing its mean leaves eigenvalues
// ±(ν₊² - ν₋²)/2, so tr(S²) = (ν₊² - ν₋²)² with no large-term cancellation.
fn spectral_gap(v: &Matrix4<f64>) -> f64 {
    let w = omega4() * v;
    let neg_sq = -(w * w);
    let shift = neg_sq.trace() / 4.0;
    let s = neg_sq - Matrix4::identity() * shift;
    (s * s).trace()
}

/// Determinant invariants of a pair, with stable discriminants.
pub fn pair_invariants(pcm: &PairCM) -> PairInvariants {
    let alpha = pcm.block_a.determinant();
    let beta = pcm.block_b.determinant();
    let theta = pcm.cross.determinant();
    let v = pcm.assembled();
    let lam = v.determinant();

    // Partial transposition flips the sign of the second mode's momentum.
    let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    let v_pt = flip * v * flip;

    PairInvariants {
        gap_pt: spectral_gap(&v_pt),
        gap_tilde: spectral_gap(&v),
        ..PairInvariants::from_determinants(alpha, beta, theta, lam)
    }
}

fn checked_gap(gap: f64, delta: f64, what: &str) -> Result<f64> {
    let tol = SQRT_CLAMP_REL * (delta * delta).max(1.0);
    if gap < -tol || gap.is_nan() {
        return Err(Error::NonPhysicalInput(format!(
            "{what} discriminant is negative ({gap:e})"
        )));
    }
    Ok(gap.max(0.0).sqrt())
}

fn symplectic_pair(delta: f64, gap: f64, lam: f64, what: &str) -> Result<(f64, f64)> {
    let root = checked_gap(gap, delta, what)?;
    let big = delta + root;
    if !(lam > 0.0) || !(big > 0.0) {
        return Err(Error::NonPhysicalInput(format!(
            "{what}: det V = {lam:e}, Δ = {delta:e}"
        )));
    }
    let plus_sq = big / 2.0;
    let minus_sq = (2.0 * lam / big).min(plus_sq);
    Ok((plus_sq.sqrt(), minus_sq.sqrt()))
}

/// Smallest symplectic eigenvalue of the partially transposed pair.
///
/// The pair is entangled iff the result is below 1/2.
pub fn simon_eta_minus(inv: &PairInvariants) -> Result<f64> {
    symplectic_pair(inv.delta_pt, inv.gap_pt, inv.lam, "partial transpose").map(|(_, m)| m)
}

/// Symplectic eigenvalues `(ν₊, ν₋)` of the pair, `ν₊ ≥ ν₋`.
pub fn nu_symplectic(inv: &PairInvariants) -> Result<(f64, f64)> {
    symplectic_pair(inv.delta_tilde, inv.gap_tilde, inv.lam, "symplectic spectrum")
}

/// Entropy of a single mode with symplectic eigenvalue `x`, in nats.
pub fn entropy_f(x: f64) -> Result<f64> {
    if !(x >= VACUUM_VARIANCE - PHYSICAL_TOL) {
        return Err(Error::Domain { x });
    }
    let down = (x - 0.5).max(0.0);
    let tail = if down > 0.0 { down * down.ln() } else { 0.0 };
    Ok((down + 1.0) * down.ln_1p() - tail)
}

/// Which expression produced the conditional determinant ε.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsilonBranch {
    /// Cross block negligible: ε equals det A.
    ProductLimit,
    /// `d < 0`, or `d` within round-off of zero where this form is better conditioned.
    NonPositiveDiscriminant,
    /// `d > 0`, or `d` within round-off of zero where this form is better conditioned.
    PositiveDiscriminant,
}

/// A value that was pushed to its physical bound during a discord evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Clamp {
    pub quantity: &'static str,
    pub raw: f64,
}

/// Full record of one discord evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscordBreakdown {
    pub value: f64,
    pub invariants: PairInvariants,
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub discriminant: f64,
    pub epsilon: f64,
    pub branch: EpsilonBranch,
    pub clamps: Vec<Clamp>,
}

fn clamp_radicand(value: f64, noise: f64, clamps: &mut Vec<Clamp>) -> Result<f64> {
    if value >= noise {
        return Ok(value);
    }
    if value < -noise {
        return Err(Error::NonPhysicalInput(format!(
            "conditional-entropy radicand is negative ({value:e})"
        )));
    }
    if value != 0.0 {
        clamps.push(Clamp { quantity: "epsilon radicand", raw: value });
    }
    Ok(0.0)
}

/// Gaussian quantum discord of `pcm`, measuring its second mode, in nats.
pub fn gaussian_discord(pcm: &PairCM) -> Result<f64> {
    discord_breakdown(pcm).map(|b| b.value)
}

/// Like [`gaussian_discord`] but returns every intermediate quantity and
/// each round-off clamp that was applied.
pub fn discord_breakdown(pcm: &PairCM) -> Result<DiscordBreakdown> {
    let inv = pair_invariants(pcm);
    let PairInvariants { alpha, beta, theta, lam, .. } = inv;
    if beta < 0.25 - PHYSICAL_TOL {
        return Err(Error::DegenerateMeasuredMode { beta });
    }
    let (nu_plus, nu_minus) = nu_symplectic(&inv)?;
    let mut clamps = Vec::new();

    let theta2 = theta * theta;
    let ab = alpha * beta;
    let dev = lam - ab;
    let coupling_term = (0.25 + beta) * theta2 * (alpha + 4.0 * lam);
    let discriminant = dev * dev - coupling_term;
    let d_noise = SQRT_CLAMP_REL * (dev * dev).max(coupling_term);

    // Round-off carried by the 2×2 and 4×4 determinants.
    let e2 = pcm.assembled().amax().powi(2);
    let (n2, n4) = (ROUNDOFF * e2, ROUNDOFF * e2 * e2);

    let x = 0.25 - beta;
    let y = alpha - 4.0 * lam;
    let inner = theta2 + x * y;
    let inner_noise = (2.0 * theta.abs() + y.abs()) * n2 + x.abs() * (n2 + 4.0 * n4);
    let p = ab - theta2 + lam;
    let q = theta2 * theta2 + dev * dev - 2.0 * theta2 * (ab + lam);
    let q_noise = 4.0 * theta.abs() * (theta2 + ab + lam) * n2
        + 2.0 * (dev.abs() + theta2) * (n4 + (alpha + beta) * n2);

    let (epsilon, branch) = if pcm.cross.norm_squared() < PRODUCT_LIMIT_REL * ab.sqrt() {
        (alpha, EpsilonBranch::ProductLimit)
    } else {
        let non_positive = if discriminant < -d_noise {
            true
        } else if discriminant > d_noise {
            false
        } else {
            // Both forms agree at d = 0; take the one less sensitive to round-off.
            clamps.push(Clamp { quantity: "discriminant", raw: discriminant });
            inner_noise.sqrt() * p < q_noise.sqrt() * theta.abs()
        };
        if non_positive {
            let inner = clamp_radicand(inner, inner_noise, &mut clamps)?;
            if x.abs() <= PHYSICAL_TOL {
                return Err(Error::NonPhysicalInput(format!(
                    "measured mode is pure (det B = {beta}) but correlated (det C = {theta:e})"
                )));
            }
            // (|θ| + √inner)² / 4x² is the textbook numerator expanded.
            let root = (theta.abs() + inner.sqrt()) / (2.0 * x.abs());
            (root * root, EpsilonBranch::NonPositiveDiscriminant)
        } else {
            let q = clamp_radicand(q, q_noise.max(SQRT_CLAMP_REL * p * p), &mut clamps)?;
            // (p - √q)/(2β) rationalised with (p - √q)(p + √q) = 4αβλ.
            let denom = p + q.sqrt();
            if !(denom > 0.0) {
                return Err(Error::NonPhysicalInput(format!(
                    "conditional determinant denominator is {denom:e}"
                )));
            }
            (2.0 * alpha * lam / denom, EpsilonBranch::PositiveDiscriminant)
        }
    };

    let raw = entropy_f(beta.sqrt())? - entropy_f(nu_plus)? - entropy_f(nu_minus)?
        + entropy_f(epsilon.sqrt())?;
    let value = if raw < 0.0 {
        if raw < -DISCORD_CLAMP {
            return Err(Error::NonPhysicalInput(format!("discord is negative ({raw:e})")));
        }
        clamps.push(Clamp { quantity: "discord", raw });
        0.0
    } else {
        raw
    };
    for c in &clamps {
        log::debug!("pair {}: clamped {} from {:e}", pcm.label, c.quantity, c.raw);
    }

    Ok(DiscordBreakdown {
        value,
        invariants: inv,
        nu_plus,
        nu_minus,
        discriminant,
        epsilon,
        branch,
        clamps,
    })
}

/// Symplectic spectrum (ascending) of a `2n × 2n` covariance matrix with
/// the ordering (x₁, p₁, x₂, p₂, …). Returns `None` unless `v` is positive
/// definite.
pub fn symplectic_spectrum(v: &DMatrix<f64>) -> Option<Vec<f64>> {
    let dim = v.nrows();
    if !dim.is_multiple_of(2) || dim != v.ncols() {
        return None;
    }
    let sym = (v + v.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let root_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * root_diag * eig.eigenvectors.transpose();

    let mut omega = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    // K = V^{1/2} Ω V^{1/2} is antisymmetric with singular values ν_k (each twice).
    let k = &root * omega * &root;
    let gram = k.transpose() * k;
    let mut sq: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    sq.sort_by(f64::total_cmp);
    Some(
        sq.chunks(2)
            .map(|c| ((c[0] + c[1]) / 2.0).max(0.0).sqrt())
            .collect(),
    )
}

/// Outcome of [`check_physical`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalityReport {
    pub symmetry_residual: f64,
    pub min_eigenvalue: f64,
    pub symplectic_eigenvalues: Option<Vec<f64>>,
    pub passes: bool,
}

impl PhysicalityReport {
    pub fn min_symplectic_eigenvalue(&self) -> Option<f64> {
        self.symplectic_eigenvalues.as_ref().and_then(|s| s.first().copied())
    }
}

/// Checks symmetry, positivity and the uncertainty principle
/// (all symplectic eigenvalues at least 1/2).
pub fn check_physical(cm: &Cov6) -> PhysicalityReport {
    let m = cm.matrix();
    let symmetry_residual = symmetry_residual(m);
    let min_eigenvalue = ((m + m.transpose()) * 0.5)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let dynamic = DMatrix::from_column_slice(6, 6, m.as_slice());
    let symplectic_eigenvalues = symplectic_spectrum(&dynamic);
    let passes = symmetry_residual <= SYMMETRY_TOL
        && min_eigenvalue > 0.0
        && symplectic_eigenvalues
            .as_ref()
            .is_some_and(|s| s.iter().all(|&nu| nu >= VACUUM_VARIANCE - PHYSICAL_TOL));
    PhysicalityReport { symmetry_residual, min_eigenvalue, symplectic_eigenvalues, passes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag2(a: f64, b: f64) -> Matrix2<f64> {
        Matrix2::new(a, 0.0, 0.0, b)
    }

    fn vacuum_pair() -> PairCM {
        PairCM::new(diag2(0.5, 0.5), diag2(0.5, 0.5), Matrix2::zeros(), PairLabel::O1_O2).unwrap()
    }

    fn tmsv(r: f64) -> PairCM {
        let n = r.sinh().powi(2);
        let m = r.sinh() * r.cosh();
        let local = diag2(n + 0.5, n + 0.5);
        PairCM::new(local, local, diag2(m, -m), PairLabel::O1_O2).unwrap()
    }

    #[test]
    fn vacuum_invariants() {
        let inv = pair_invariants(&vacuum_pair());
        assert_eq!(inv.alpha, 0.25);
        assert_eq!(inv.beta, 0.25);
        assert_eq!(inv.theta, 0.0);
        assert_relative_eq!(inv.lam, 1.0 / 16.0, epsilon = 1e-16);
        assert_eq!(inv.delta_pt, 0.5);
        assert_eq!(inv.delta_tilde, 0.5);
        assert_eq!(simon_eta_minus(&inv).unwrap(), 0.5);
        assert_eq!(nu_symplectic(&inv).unwrap(), (0.5, 0.5));
        assert_eq!(gaussian_discord(&vacuum_pair()).unwrap(), 0.0);
    }

    #[test]
    fn block_diagonal_gives_product_determinant() {
        let pcm =
            PairCM::new(diag2(1.3, 0.9), diag2(2.0, 0.7), Matrix2::zeros(), PairLabel::MECH_O1)
                .unwrap();
        let inv = pair_invariants(&pcm);
        assert_eq!(inv.theta, 0.0);
        assert_relative_eq!(inv.lam, inv.alpha * inv.beta, max_relative = 1e-14);
    }

    #[test]
    fn thermal_product_spectrum() {
        let (n1, n2) = (0.7, 2.4);
        let pcm = PairCM::new(
            diag2(n1 + 0.5, n1 + 0.5),
            diag2(n2 + 0.5, n2 + 0.5),
            Matrix2::zeros(),
            PairLabel::MECH_O2,
        )
        .unwrap();
        let (plus, minus) = nu_symplectic(&pair_invariants(&pcm)).unwrap();
        assert_relative_eq!(plus, n2 + 0.5, max_relative = 1e-14);
        assert_relative_eq!(minus, n1 + 0.5, max_relative = 1e-14);
        assert_eq!(gaussian_discord(&pcm).unwrap(), 0.0);
        assert!(simon_eta_minus(&pair_invariants(&pcm)).unwrap() >= 0.5);
    }

    #[test]
    fn squeezed_vacuum_eta_and_purity() {
        for r in [0.25, 1.0, 2.0] {
            let inv = pair_invariants(&tmsv(r));
            let eta = simon_eta_minus(&inv).unwrap();
            assert_relative_eq!(eta, (-2.0 * r).exp() / 2.0, max_relative = 1e-9);
            let (plus, minus) = nu_symplectic(&inv).unwrap();
            assert!((plus - 0.5).abs() < 1e-12 && (minus - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_f(0.5).unwrap(), 0.0);
        assert_relative_eq!(entropy_f(1.5).unwrap(), 4f64.ln(), max_relative = 1e-15);
        assert_eq!(entropy_f(0.5 - 1e-12).unwrap(), 0.0);
        assert!(matches!(entropy_f(0.49), Err(Error::Domain { .. })));
        assert!(matches!(entropy_f(f64::NAN), Err(Error::Domain { .. })));
    }

    #[test]
    fn corrupted_invariants_are_rejected() {
        // λ > Δ²/4 cannot come from a real covariance matrix.
        let inv = PairInvariants::from_determinants(0.25, 0.25, 0.0, 1.0);
        assert!(matches!(simon_eta_minus(&inv), Err(Error::NonPhysicalInput(_))));
        assert!(matches!(nu_symplectic(&inv), Err(Error::NonPhysicalInput(_))));
    }

    #[test]
    fn pure_state_sits_on_branch_boundary() {
        let b = discord_breakdown(&tmsv(1.0)).unwrap();
        assert_eq!(b.branch, EpsilonBranch::NonPositiveDiscriminant);
        assert_relative_eq!(b.epsilon, 0.25, max_relative = 1e-12);
        let n = 1f64.sinh().powi(2);
        assert_relative_eq!(b.value, entropy_f(n + 0.5).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn sub_quarter_measured_mode_is_degenerate() {
        // Positive definite but below the uncertainty bound on the measured mode.
        let pcm =
            PairCM::new(diag2(0.5, 0.5), diag2(0.2, 0.2), Matrix2::zeros(), PairLabel::O1_O2)
                .unwrap();
        assert!(matches!(
            gaussian_discord(&pcm),
            Err(Error::DegenerateMeasuredMode { .. })
        ));
    }

    #[test]
    fn pair_cm_rejects_indefinite() {
        let err = PairCM::new(diag2(0.5, 0.5), diag2(0.5, 0.5), diag2(0.9, 0.0), PairLabel::O1_O2);
        assert!(matches!(err, Err(Error::NonPhysicalInput(_))));
        let err = PairCM::new(
            Matrix2::new(0.5, 0.1, 0.0, 0.5),
            diag2(0.5, 0.5),
            Matrix2::zeros(),
            PairLabel::O1_O2,
        );
        assert!(matches!(err, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn pair_label_parsing() {
        assert_eq!("mo1".parse::<PairLabel>().unwrap(), PairLabel::MECH_O1);
        assert_eq!("o1o2".parse::<PairLabel>().unwrap(), PairLabel::O1_O2);
        assert_eq!("o2m".parse::<PairLabel>().unwrap(), PairLabel::MECH_O2.reversed());
        assert!("mm".parse::<PairLabel>().is_err());
        assert!("x1".parse::<PairLabel>().is_err());
        assert_eq!(PairLabel::MECH_O2.tag(), "mo2");
    }

    #[test]
    fn physicality_checks() {
        let ok = check_physical(&Cov6::vacuum());
        assert!(ok.passes);
        assert_relative_eq!(ok.min_symplectic_eigenvalue().unwrap(), 0.5, max_relative = 1e-14);

        let bad = check_physical(&Cov6::new(Matrix6::identity() * 0.25).unwrap());
        assert!(!bad.passes);
        assert_relative_eq!(bad.min_symplectic_eigenvalue().unwrap(), 0.25, max_relative = 1e-14);

        let mut m = Matrix6::identity() * 0.5;
        m[(0, 0)] = -1.0;
        let neg = check_physical(&Cov6::new(m).unwrap());
        assert!(!neg.passes);
        assert!(neg.symplectic_eigenvalues.is_none());
    }

    #[test]
    fn cov6_rejects_asymmetry() {
        let mut m = Matrix6::identity();
        m[(0, 1)] = 1e-6;
        assert!(matches!(Cov6::new(m), Err(Error::NotSymmetric { .. })));
    }
}
