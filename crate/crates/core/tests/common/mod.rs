#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use optocorr::gaussian::{PairCM, PairLabel};
use optocorr::model::ModelParams;
use rand::Rng;
use std::f64::consts::PI;

/// Log-uniform sample on `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random model point spanning the regimes of the figures and beyond.
pub fn random_model<R: Rng>(rng: &mut R) -> ModelParams {
    let two_pi = 2.0 * PI;
    let kappa = [
        two_pi * log_uniform(rng, 1e4, 1e6),
        two_pi * log_uniform(rng, 1e4, 1e6),
    ];
    let gamma = two_pi * log_uniform(rng, 10.0, 1e4);
    let c1 = if rng.random_bool(0.1) { 0.0 } else { log_uniform(rng, 1e-2, 1e4) };
    let c2 = c1 * rng.random_range(0.0..4.0);
    let n_th = log_uniform(rng, 1e-4, 1e3);
    let r = rng.random_range(0.0..2.5);
    ModelParams::new(kappa, gamma, [c1, c2], n_th, r).unwrap()
}

fn rot(phi: f64) -> Matrix2<f64> {
    Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos())
}

fn sq(s: f64) -> Matrix2<f64> {
    Matrix2::new((-s).exp(), 0.0, 0.0, s.exp())
}

fn local(phi1: f64, s1: f64, phi2: f64, s2: f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(rot(phi1) * sq(s1)));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(rot(phi2) * sq(s2)));
    m
}

/// `S diag(ν₁,ν₁,ν₂,ν₂) Sᵀ` with `S` a product of local, beam-splitter and
/// two-mode squeezing symplectic maps. Parameters: `[ν₁, ν₂, φ₁, s₁, φ₂, s₂,
/// θ_bs, r_tms, φ₃, s₃]`.
pub fn two_mode_state(p: &[f64; 10]) -> Matrix4<f64> {
    let [nu1, nu2, phi1, s1, phi2, s2, bs, r, phi3, s3] = *p;
    let (c, s) = (bs.cos(), bs.sin());
    let i2 = Matrix2::identity();
    let mut beam = Matrix4::zeros();
    beam.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i2 * c));
    beam.fixed_view_mut::<2, 2>(0, 2).copy_from(&(i2 * s));
    beam.fixed_view_mut::<2, 2>(2, 0).copy_from(&(i2 * -s));
    beam.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i2 * c));
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let mut tms = Matrix4::zeros();
    tms.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i2 * r.cosh()));
    tms.fixed_view_mut::<2, 2>(0, 2).copy_from(&(z * r.sinh()));
    tms.fixed_view_mut::<2, 2>(2, 0).copy_from(&(z * r.sinh()));
    tms.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i2 * r.cosh()));
    let symp = local(phi1, s1, phi2, s2) * beam * tms * local(phi3, s3, 0.0, 0.0);
    let thermal = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    let v = symp * thermal * symp.transpose();
    (v + v.transpose()) * 0.5
}

pub fn to_pair(v: &Matrix4<f64>) -> PairCM {
    PairCM::new(
        v.fixed_view::<2, 2>(0, 0).into_owned(),
        v.fixed_view::<2, 2>(2, 2).into_owned(),
        v.fixed_view::<2, 2>(0, 2).into_owned(),
        PairLabel::O1_O2,
    )
    .unwrap()
}

/// `inf det(A - C (B + σ)⁻¹ Cᵀ)` over pure single-mode seeds `σ` measured on
/// the second mode, by grid search and pattern refinement over (φ, s).
/// Homodyne detection is the `s → ∞` edge and is included explicitly.
pub fn conditional_det_oracle(pcm: &PairCM) -> f64 {
    let (a, b, c) = (pcm.block_a, pcm.block_b, pcm.cross);
    // Work in the eigenframe of σ so that (B + σ)⁻¹ has no cancellation.
    let det_after = |phi: f64, s: f64| {
        let r = rot(phi);
        let m = r.transpose() * b * r + Matrix2::new(0.5 * (-2.0 * s).exp(), 0.0, 0.0, 0.5 * (2.0 * s).exp());
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let inv = Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det;
        let cr = c * r;
        (a - cr * inv * cr.transpose()).determinant()
    };
    let homodyne = |phi: f64| {
        let u = rot(phi) * nalgebra::Vector2::new(1.0, 0.0);
        let proj = u * u.transpose() / (u.transpose() * b * u)[(0, 0)];
        (a - c * proj * c.transpose()).determinant()
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..96 {
        let phi = PI * i as f64 / 96.0;
        for j in 0..=48 {
            let s = 12.0 * j as f64 / 48.0;
            let v = det_after(phi, s);
            if v < best.0 {
                best = (v, phi, s);
            }
        }
    }
    let (mut v, mut phi, mut s) = best;
    let (mut dphi, mut ds) = (PI / 96.0, 0.25);
    while dphi > 1e-12 {
        let mut moved = false;
        for (p, q) in [(phi + dphi, s), (phi - dphi, s), (phi, s + ds), (phi, (s - ds).max(0.0))] {
            let w = det_after(p, q);
            if w < v {
                (v, phi, s, moved) = (w, p, q, true);
            }
        }
        if !moved {
            dphi *= 0.5;
            ds *= 0.5;
        }
    }
    let mut hom = f64::INFINITY;
    let mut hphi = 0.0;
    for i in 0..192 {
        let p = PI * i as f64 / 192.0;
        let w = homodyne(p);
        if w < hom {
            (hom, hphi) = (w, p);
        }
    }
    let mut step = PI / 192.0;
    while step > 1e-12 {
        let (l, r) = (homodyne(hphi - step), homodyne(hphi + step));
        if l < hom {
            (hom, hphi) = (l, hphi - step);
        } else if r < hom {
            (hom, hphi) = (r, hphi + step);
        } else {
            step *= 0.5;
        }
    }
    v.min(hom)
}
