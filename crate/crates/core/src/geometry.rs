//! Fubini–Study background on the Riemann sphere in S¹-reduced coordinates.
//!
//! Every potential is a function of `u = log|z|²`. The background potential is
//! `F⁰(u) = log(1 + e^u)`, so that `dd^c = i∂∂̄` and the metric density along the
//! `u` axis is `F⁰_uu = e^u / (1 + e^u)²`. The divisor consists of the two
//! torus-fixed points `z = 0` (`u → −∞`) and `z = ∞` (`u → +∞`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stencil;

/// Logistic function `e^u / (1 + e^u)`, evaluated without overflow.
pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Background potential `log(1 + e^u)`.
pub fn fs_potential(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// First derivative of the background potential (the moment map), `σ(u)`.
pub fn fs_slope(u: f64) -> f64 {
    logistic(u)
}

/// Background density `F⁰_uu = e^u / (1 + e^u)²`.
pub fn fs_density(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// One of the two torus-fixed points carrying the divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorPoint {
    /// `z = 0`, reached as `u → −∞`.
    Zero,
    /// `z = ∞`, reached as `u → +∞`.
    Infinity,
}

impl DivisorPoint {
    pub fn other(self) -> Self {
        match self {
            DivisorPoint::Zero => DivisorPoint::Infinity,
            DivisorPoint::Infinity => DivisorPoint::Zero,
        }
    }
}

/// `|s|²_h` of the degree-one section vanishing at `which`, for the
/// Fubini–Study hermitian metric.
pub fn section_norm_sq(u: f64, which: DivisorPoint) -> f64 {
    match which {
        DivisorPoint::Zero => logistic(u),
        DivisorPoint::Infinity => logistic(-u),
    }
}

/// Uniform `u` grid together with the background curvature constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundGeometry {
    pub u_min: f64,
    pub u_max: f64,
    pub n_u: usize,
    /// Scalar curvature of the background (constant for Fubini–Study).
    pub scalar_curvature: f64,
    /// Lower-bound constant `B` for the bisectional curvature, `−B ≤ inf R`.
    pub bisectional_lower: f64,
}

impl BackgroundGeometry {
    /// Symmetric grid on `[−u_max, u_max]`.
    pub fn new(u_max: f64, n_u: usize) -> Result<Self> {
        Self::with_range(-u_max, u_max, n_u)
    }

    pub fn with_range(u_min: f64, u_max: f64, n_u: usize) -> Result<Self> {
        if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max) {
            return Err(Error::Invalid(format!("bad u range [{u_min}, {u_max}]")));
        }
        if n_u < 5 {
            return Err(Error::Invalid(format!("n_u = {n_u} is too small (need ≥ 5)")));
        }
        Ok(Self {
            u_min,
            u_max,
            n_u,
            scalar_curvature: measured_scalar_curvature(),
            // The Fubini–Study bisectional curvature is positive.
            bisectional_lower: 0.0,
        })
    }

    pub fn h(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_u - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.n_u {
            self.u_max
        } else {
            self.u_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_u).map(|i| self.u(i)).collect()
    }

    pub fn potential(&self, u: f64) -> f64 {
        fs_potential(u)
    }

    pub fn density(&self, u: f64) -> f64 {
        fs_density(u)
    }

    /// Same range, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n_u: 2 * (self.n_u - 1) + 1,
            ..self.clone()
        }
    }

    /// Widen the range by `du` on both sides while keeping the spacing.
    pub fn extended(&self, du: f64) -> Result<Self> {
        let h = self.h();
        let extra = (du / h).round() as usize;
        if ((extra as f64) * h - du).abs() > 1e-9 * du.abs().max(1.0) {
            return Err(Error::Invalid(format!(
                "extension {du} is not a multiple of the spacing {h}"
            )));
        }
        Ok(Self {
            u_min: self.u_min - du,
            u_max: self.u_max + du,
            n_u: self.n_u + 2 * extra,
            ..self.clone()
        })
    }

    /// Discrete metric `F⁰_uu + D²φ` of `F = F⁰ + φ` at every node.
    pub fn discrete_metric(&self, phi: &[f64]) -> Vec<f64> {
        let h = self.h();
        (0..self.n_u)
            .map(|i| self.density(self.u(i)) + stencil::apply_second(|k| phi[k], i, self.n_u, h))
            .collect()
    }
}

/// `S = −(log F⁰_uu)_uu / F⁰_uu`, sampled by central differences and averaged.
fn measured_scalar_curvature() -> f64 {
    let h = 1e-3;
    let samples = [-3.0, -1.5, -0.5, 0.0, 0.7, 2.0, 3.5];
    let total: f64 = samples
        .iter()
        .map(|&u| {
            let l = |x: f64| fs_density(x).ln();
            let second = (l(u + h) - 2.0 * l(u) + l(u - h)) / (h * h);
            -second / fs_density(u)
        })
        .sum();
    total / samples.len() as f64
}

/// Cone angles and coefficient of the model conical potential
/// `φ_β = c (|s₀|^{2β₀} + |s_∞|^{2β_∞})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorData {
    pub beta_zero: f64,
    pub beta_infinity: f64,
    pub c: f64,
}

impl DivisorData {
    pub fn new(beta_zero: f64, beta_infinity: f64, c: f64) -> Result<Self> {
        for beta in [beta_zero, beta_infinity] {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Invalid(format!("cone angle {beta} outside (0, 1]")));
            }
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Invalid(format!("conical coefficient {c} must be ≥ 0")));
        }
        Ok(Self {
            beta_zero,
            beta_infinity,
            c,
        })
    }

    /// Same angle at both points.
    pub fn symmetric(beta: f64, c: f64) -> Result<Self> {
        Self::new(beta, beta, c)
    }

    pub fn beta(&self, which: DivisorPoint) -> f64 {
        match which {
            DivisorPoint::Zero => self.beta_zero,
            DivisorPoint::Infinity => self.beta_infinity,
        }
    }

    /// Exchange the roles of the two points.
    pub fn swapped(&self) -> Self {
        Self {
            beta_zero: self.beta_infinity,
            beta_infinity: self.beta_zero,
            c: self.c,
        }
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }
}

/// The model conical potential at `u`.
pub fn conical_potential(div: &DivisorData, u: f64) -> f64 {
    div.c
        * (section_norm_sq(u, DivisorPoint::Zero).powf(div.beta_zero)
            + section_norm_sq(u, DivisorPoint::Infinity).powf(div.beta_infinity))
}

/// Boundary-data approximation `c Σ (|s_j|² + 1/k)^{β_j}`, smooth for every `k ≥ 1`.
pub fn smoothed_boundary(div: &DivisorData, k: u64, u: f64) -> f64 {
    let d = 1.0 / k.max(1) as f64;
    div.c
        * ((section_norm_sq(u, DivisorPoint::Zero) + d).powf(div.beta_zero)
            + (section_norm_sq(u, DivisorPoint::Infinity) + d).powf(div.beta_infinity))
}

/// `d/du` of [`smoothed_boundary`]; `k = u64::MAX` gives the unsmoothed slope.
pub fn smoothed_boundary_slope(div: &DivisorData, k: u64, u: f64) -> f64 {
    let d = if k == u64::MAX { 0.0 } else { 1.0 / k.max(1) as f64 };
    let s0 = section_norm_sq(u, DivisorPoint::Zero);
    let s1 = section_norm_sq(u, DivisorPoint::Infinity);
    let dens = fs_density(u);
    // d|s₀|²/du = F⁰_uu, d|s_∞|²/du = −F⁰_uu
    div.c
        * dens
        * (div.beta_zero * (s0 + d).powf(div.beta_zero - 1.0)
            - div.beta_infinity * (s1 + d).powf(div.beta_infinity - 1.0))
}

/// Samples the conical potential on the grid and checks that the discrete
/// metric of `F⁰ + φ_β` stays positive.
pub fn conical_profile(div: &DivisorData, geo: &BackgroundGeometry) -> Result<Vec<f64>> {
    let phi: Vec<f64> = geo.nodes().iter().map(|&u| conical_potential(div, u)).collect();
    let metric = geo.discrete_metric(&phi);
    if let Some((i, &value)) = metric
        .iter()
        .enumerate()
        .find(|(_, m)| !(**m > 0.0))
    {
        return Err(Error::PositivityLoss {
            i,
            j: 0,
            what: "F_uu",
            value,
        });
    }
    Ok(phi)
}

/// Largest conical coefficient keeping the discrete metric positive on `geo`,
/// found by bisection. Returns infinity when every coefficient is admissible
/// (e.g. `β = 1`, where the perturbation is constant).
pub fn c_max(beta_zero: f64, beta_infinity: f64, geo: &BackgroundGeometry) -> Result<f64> {
    let positive = |c: f64| -> Result<bool> {
        let div = DivisorData::new(beta_zero, beta_infinity, c)?;
        Ok(conical_profile(&div, geo).is_ok())
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while positive(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(lo)
}
