//! Steady-state covariance from the Lyapunov equation `A V + V Aᵀ = -D`.
//!
//! [`solve_lyapunov`] is the production path. [`integrate_covariance`]
//! evaluates `∫₀^∞ e^{As} D e^{Aᵀs} ds` by quadrature and exists to check it.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, SMatrix};

use crate::error::{Error, Result};
use crate::gaussian::{Cov6, PairCM, PairLabel};
use crate::model::{build_diffusion, build_drift, is_stable, ModelParams, StabilityVerdict};

/// Asymmetry of the raw solution above which a warning is logged.
const ASYMMETRY_WARN: f64 = 1e-10;

/// Drift and diffusion of a stable linear system.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovProblem {
    drift: Matrix6<f64>,
    diffusion: Matrix6<f64>,
    stability: StabilityVerdict,
}

impl LyapunovProblem {
    pub fn new(drift: Matrix6<f64>, diffusion: Matrix6<f64>) -> Result<Self> {
        let stability = is_stable(&drift);
        if !stability.stable {
            return Err(Error::UnstableDrift { max_real_part: stability.max_real_part });
        }
        Ok(Self { drift, diffusion, stability })
    }

    pub fn from_model(mp: &ModelParams) -> Result<Self> {
        Self::new(build_drift(mp), build_diffusion(mp))
    }

    pub fn drift(&self) -> &Matrix6<f64> {
        &self.drift
    }

    pub fn diffusion(&self) -> &Matrix6<f64> {
        &self.diffusion
    }

    pub fn stability(&self) -> &StabilityVerdict {
        &self.stability
    }
}

/// `‖A V + V Aᵀ + D‖_F / ‖D‖_F`. Falls back to the absolute residual when `D = 0`.
pub fn relative_residual(p: &LyapunovProblem, v: &Matrix6<f64>) -> f64 {
    let r = p.drift * v + v * p.drift.transpose() + p.diffusion;
    let d = p.diffusion.norm();
    if d == 0.0 {
        r.norm()
    } else {
        r.norm() / d
    }
}

fn kronecker_solve<const N: usize>(
    a: &SMatrix<f64, N, N>,
    d: &SMatrix<f64, N, N>,
) -> Result<SMatrix<f64, N, N>> {
    let a = DMatrix::from_column_slice(N, N, a.as_slice());
    let id = DMatrix::<f64>::identity(N, N);
    // Column-major vec: vec(AV) = (I⊗A) vec V, vec(VAᵀ) = (A⊗I) vec V.
    let system = id.kronecker(&a) + a.kronecker(&id);
    let rhs = -DVector::from_column_slice(d.as_slice());
    let x = system.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let v = SMatrix::<f64, N, N>::from_column_slice(x.as_slice());
    let norm = v.norm();
    if norm > 0.0 {
        let asym = (v - v.transpose()).norm() / norm;
        if asym > ASYMMETRY_WARN {
            log::warn!("Lyapunov solution asymmetric before symmetrization: {asym:e}");
        }
    }
    Ok((v + v.transpose()) * 0.5)
}

/// Dense solve of the 36×36 vectorized system, followed by symmetrization.
pub fn solve_lyapunov(p: &LyapunovProblem) -> Result<Cov6> {
    Cov6::new(kronecker_solve(&p.drift, &p.diffusion)?)
}

/// Quadratures `(X₁, X₂, q)` and `(Y₁, Y₂, p)`.
pub const QUADRATURE_GROUPS: [[usize; 3]; 2] = [[0, 2, 4], [1, 3, 5]];

/// Solves the two 3×3 problems of the quadrature groups separately.
///
/// Only valid when drift and diffusion have no entries between the groups,
/// which holds for every model drift; otherwise returns `InvalidParams`.
pub fn solve_lyapunov_split(p: &LyapunovProblem) -> Result<Cov6> {
    for &i in &QUADRATURE_GROUPS[0] {
        for &j in &QUADRATURE_GROUPS[1] {
            let entries = [p.drift[(i, j)], p.drift[(j, i)], p.diffusion[(i, j)], p.diffusion[(j, i)]];
            if entries.iter().any(|&x| x != 0.0) {
                return Err(Error::InvalidParams(
                    "system does not decouple into quadrature groups".into(),
                ));
            }
        }
    }
    let mut v = Matrix6::zeros();
    for group in QUADRATURE_GROUPS {
        let pick = |m: &Matrix6<f64>| Matrix3::from_fn(|r, c| m[(group[r], group[c])]);
        let sub = kronecker_solve(&pick(&p.drift), &pick(&p.diffusion))?;
        for r in 0..3 {
            for c in 0..3 {
                v[(group[r], group[c])] = sub[(r, c)];
            }
        }
    }
    Cov6::new(v)
}

/// Settings of the quadrature oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Upper limit in units of the slowest decay time. Must be at least 20.
    pub horizon: f64,
    /// Absolute tolerance per matrix entry.
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { horizon: 30.0, tolerance: 1e-8, max_depth: 40 }
    }
}

/// Decay time of `‖e^{As} D e^{Aᵀs}‖`: `1 / (2|μ|)` with `μ` the largest
/// eigenvalue of the symmetric part of `A`, or the spectral abscissa when
/// that part is not negative definite.
pub fn slowest_decay_time(a: &Matrix6<f64>) -> f64 {
    let mu = ((a + a.transpose()) * 0.5)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let rate = if mu < 0.0 { -mu } else { -is_stable(a).max_real_part };
    1.0 / (2.0 * rate)
}

struct Segment {
    a: f64,
    b: f64,
    fa: Matrix6<f64>,
    fm: Matrix6<f64>,
    fb: Matrix6<f64>,
    whole: Matrix6<f64>,
    tol: f64,
    depth: u32,
}

/// `∫₀^{horizon·τ} e^{As} D e^{Aᵀs} ds` by adaptive Simpson refinement.
///
/// The interval is cut into panels that double in width from the fastest
/// decay time up, so that each panel sees a smooth integrand.
pub fn integrate_covariance(p: &LyapunovProblem, opts: &QuadratureOptions) -> Result<Cov6> {
    if !(opts.horizon >= 20.0) {
        return Err(Error::InvalidParams(format!(
            "quadrature horizon must be at least 20, got {}",
            opts.horizon
        )));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidParams("quadrature tolerance must be positive".into()));
    }
    let a = p.drift;
    let d = p.diffusion;
    let integrand = |s: f64| {
        let f = (a * s).exp();
        f * d * f.transpose()
    };

    let end = opts.horizon * slowest_decay_time(&a);
    let fastest = (0..6).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let first = if fastest > 0.0 { (0.5 / fastest).min(end) } else { end };
    let mut edges = vec![0.0];
    let mut width = first;
    while *edges.last().unwrap() < end {
        let next = (edges.last().unwrap() + width).min(end);
        edges.push(next);
        width *= 2.0;
    }
    let panel_tol = opts.tolerance / (edges.len() - 1) as f64;

    let mut total = Matrix6::zeros();
    let mut worst = 0.0f64;
    let mut stack = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (fa, fm, fb) = (integrand(lo), integrand(0.5 * (lo + hi)), integrand(hi));
        let whole = simpson(lo, hi, &fa, &fm, &fb);
        stack.push(Segment { a: lo, b: hi, fa, fm, fb, whole, tol: panel_tol, depth: 0 });
        while let Some(seg) = stack.pop() {
            let m = 0.5 * (seg.a + seg.b);
            let flm = integrand(0.5 * (seg.a + m));
            let frm = integrand(0.5 * (m + seg.b));
            let left = simpson(seg.a, m, &seg.fa, &flm, &seg.fm);
            let right = simpson(m, seg.b, &seg.fm, &frm, &seg.fb);
            let diff = (left + right - seg.whole).abs().max();
            if diff <= 15.0 * seg.tol || seg.depth >= opts.max_depth {
                if diff > 15.0 * seg.tol {
                    worst = worst.max(diff / 15.0);
                }
                total += left + right + (left + right - seg.whole) / 15.0;
            } else {
                let tol = 0.5 * seg.tol;
                let depth = seg.depth + 1;
                stack.push(Segment { a: seg.a, b: m, fa: seg.fa, fm: flm, fb: seg.fm, whole: left, tol, depth });
                stack.push(Segment { a: m, b: seg.b, fa: seg.fm, fm: frm, fb: seg.fb, whole: right, tol, depth });
            }
        }
    }
    if worst > 0.0 {
        return Err(Error::ToleranceNotMet { tolerance: opts.tolerance, estimate: worst });
    }
    Cov6::new((total + total.transpose()) * 0.5)
}

fn simpson(a: f64, b: f64, fa: &Matrix6<f64>, fm: &Matrix6<f64>, fb: &Matrix6<f64>) -> Matrix6<f64> {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Pair covariance `[[B_first, C], [Cᵀ, B_second]]` read out of `cm`.
pub fn reduce_pair(cm: &Cov6, pair: PairLabel) -> PairCM {
    PairCM {
        block_a: cm.block(pair.first(), pair.first()),
        block_b: cm.block(pair.second(), pair.second()),
        cross: cm.block(pair.first(), pair.second()),
        label: pair,
    }
}
