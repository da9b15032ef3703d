//! Admissible weight functions `ξ`, their regularizations `ζ_η = ξ + η`, and a
//! grid auditor that certifies the constant `C₁` in `(log ζ_η)_uu ≥ −C₁ F⁰_uu`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{fs_density, fs_potential, logistic, BackgroundGeometry, DivisorPoint};

/// Weight values sampled on a uniform `u` grid, linearly interpolated and held
/// constant outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWeight {
    pub u_min: f64,
    pub u_max: f64,
    pub values: Vec<f64>,
}

impl SampledWeight {
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let h = (self.u_max - self.u_min) / (n - 1) as f64;
        let x = ((u - self.u_min) / h).clamp(0.0, (n - 1) as f64);
        let k = (x.floor() as usize).min(n - 2);
        let a = x - k as f64;
        (1.0 - a) * self.values[k] + a * self.values[k + 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CustomWeight {
    Constant(f64),
    Sampled(SampledWeight),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `|s|²_h` of the section vanishing at one point.
    SectionPower(DivisorPoint),
    /// `d^exponent`, `d` the capped ω-distance to the nearest divisor point.
    DistancePower { exponent: f64, cap: f64 },
    /// Product of bare component weights.
    Product(Vec<WeightSpec>),
    /// `Σ_j |z^{m_j}|² / (1 + |z|²)^{max m}`: the hermitian norm of monomials,
    /// whose common zero locus is the analytic set.
    AnalyticSet { exponents: Vec<u32> },
    Custom(CustomWeight),
}

/// A weight together with the exponent `p`, the regularization `η` and the
/// certified lower-bound constant `C₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub p: f64,
    pub eta: f64,
    pub c1: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, p: f64, eta: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Invalid(format!("weight exponent p = {p} must be > 0")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Invalid(format!("regularization η = {eta} must be ≥ 0")));
        }
        if let WeightKind::Custom(CustomWeight::Constant(v)) = kind {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!("constant weight {v} must be > 0")));
            }
        }
        if let WeightKind::Product(parts) = &kind {
            if parts.is_empty() {
                return Err(Error::Invalid("empty product weight".into()));
            }
        }
        Ok(Self {
            kind,
            p,
            eta,
            c1: 0.0,
        })
    }

    pub fn section(point: DivisorPoint, p: f64, eta: f64) -> Result<Self> {
        Self::new(WeightKind::SectionPower(point), p, eta)
    }

    /// `|s₀|²_h |s_∞|²_h`, the weight of the whole two-point divisor.
    pub fn both_sections(p: f64, eta: f64) -> Result<Self> {
        let parts = vec![
            Self::section(DivisorPoint::Zero, p, 0.0)?,
            Self::section(DivisorPoint::Infinity, p, 0.0)?,
        ];
        Self::new(WeightKind::Product(parts), p, eta)
    }

    pub fn constant(value: f64, p: f64) -> Result<Self> {
        Self::new(WeightKind::Custom(CustomWeight::Constant(value)), p, 0.0)
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let mut w = Self::new(self.kind.clone(), self.p, eta)?;
        w.c1 = self.c1;
        Ok(w)
    }

    /// Runs the admissibility audit and stores the result in `c1`
    /// (components of a product are certified as well).
    pub fn certify(mut self, geo: &BackgroundGeometry) -> Result<Self> {
        if let WeightKind::Product(parts) = &mut self.kind {
            for part in parts.iter_mut() {
                *part = part.clone().certify(geo)?;
            }
        }
        self.c1 = admissibility_audit(&self, geo)?;
        Ok(self)
    }

    /// Sum of the certified component constants of a product (or `c1` itself).
    pub fn component_c1_sum(&self) -> f64 {
        match &self.kind {
            WeightKind::Product(parts) => parts.iter().map(|w| w.c1).sum(),
            _ => self.c1,
        }
    }

    /// The bare weight `ξ(u)` (no `η`).
    pub fn bare(&self, u: f64) -> f64 {
        match &self.kind {
            WeightKind::SectionPower(point) => crate::geometry::section_norm_sq(u, *point),
            WeightKind::DistancePower { exponent, cap } => capped_distance(u, *cap).powf(*exponent),
            WeightKind::Product(parts) => parts.iter().map(|w| w.bare(u)).product(),
            WeightKind::AnalyticSet { exponents } => analytic_set_log(exponents, u).0.exp(),
            WeightKind::Custom(CustomWeight::Constant(v)) => *v,
            WeightKind::Custom(CustomWeight::Sampled(s)) => s.eval(u),
        }
    }

    /// `((log ξ)', (log ξ)'')` in closed form where one is available.
    pub fn bare_log_jet(&self, u: f64) -> Option<(f64, f64)> {
        let s = logistic(u);
        let dens = fs_density(u);
        match &self.kind {
            WeightKind::SectionPower(DivisorPoint::Zero) => Some((logistic(-u), -dens)),
            WeightKind::SectionPower(DivisorPoint::Infinity) => Some((-s, -dens)),
            WeightKind::Product(parts) => parts.iter().try_fold((0.0, 0.0), |acc, w| {
                w.bare_log_jet(u).map(|(a, b)| (acc.0 + a, acc.1 + b))
            }),
            WeightKind::AnalyticSet { exponents } => {
                let (_, mean, var) = analytic_set_log(exponents, u);
                let d = exponents.iter().copied().max().unwrap_or(0) as f64;
                Some((mean - d * s, var - d * dens))
            }
            WeightKind::Custom(CustomWeight::Constant(_)) => Some((0.0, 0.0)),
            _ => None,
        }
    }

    /// `(ζ, (log ζ)'')` with `ζ = ξ + η`, from the closed-form jet when possible.
    pub fn log_second_derivative(&self, u: f64) -> (f64, f64) {
        let xi = self.bare(u);
        let zeta = xi + self.eta;
        match self.bare_log_jet(u) {
            Some((l1, l2)) => {
                let d1 = xi * l1 / zeta;
                let d2 = xi * (l2 + l1 * l1) / zeta;
                (zeta, d2 - d1 * d1)
            }
            None => {
                let h = 1e-4;
                let l = |x: f64| (self.bare(x) + self.eta).ln();
                (zeta, (l(u + h) - 2.0 * l(u) + l(u - h)) / (h * h))
            }
        }
    }
}

/// `(log ξ, mean exponent, exponent variance)` for the analytic-set weight,
/// evaluated with log-sum-exp.
fn analytic_set_log(exponents: &[u32], u: f64) -> (f64, f64, f64) {
    let d = exponents.iter().copied().max().unwrap_or(0) as f64;
    let top = exponents
        .iter()
        .map(|&m| m as f64 * u)
        .fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<(f64, f64)> = exponents
        .iter()
        .map(|&m| (m as f64, (m as f64 * u - top).exp()))
        .collect();
    let total: f64 = ws.iter().map(|(_, w)| w).sum();
    let mean = ws.iter().map(|(m, w)| m * w).sum::<f64>() / total;
    let second = ws.iter().map(|(m, w)| m * m * w).sum::<f64>() / total;
    (top + total.ln() - d * fs_potential(u), mean, second - mean * mean)
}

/// `ζ_η(u) = ξ(u) + η`. Callers apply the power `p`.
pub fn weight_value(w: &WeightSpec, u: f64) -> f64 {
    w.bare(u) + w.eta
}

/// ω-arclength from the point `z = 0` along a meridian, `∫_{−∞}^u √F⁰_vv dv`.
pub fn meridian_coordinate(u: f64) -> f64 {
    2.0 * (0.5 * u).exp().atan()
}

/// ω-distance to the nearest divisor point. The meridian has length `π`.
pub fn distance_to_divisor(u: f64) -> f64 {
    let from_zero = meridian_coordinate(u);
    from_zero.min(PI - from_zero)
}

/// Smooth stand-in for the distance to the divisor, `s(π − s)/π`. It lies
/// between `d/2` and `d`, but has no kink at the equator, so its log is
/// uniformly quasi-concave relative to the background metric.
pub fn smooth_distance(u: f64) -> f64 {
    let s = meridian_coordinate(u);
    s * (std::f64::consts::PI - s) / std::f64::consts::PI
}

/// [`smooth_distance`] smoothly saturated at `cap`.
pub fn capped_distance(u: f64, cap: f64) -> f64 {
    cap * (smooth_distance(u) / cap).tanh()
}

/// Options for [`admissibility_audit_with`].
#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    /// `ζ` values at or below this count as degenerate.
    pub tolerance: f64,
    /// Skip nodes within this ω-distance of the divisor.
    pub exclusion_radius: Option<f64>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-14,
            exclusion_radius: None,
        }
    }
}

/// Smallest `C ≥ 0` with `D²(log ζ_η) ≥ −C F⁰_uu` at every interior grid node.
pub fn admissibility_audit(w: &WeightSpec, geo: &BackgroundGeometry) -> Result<f64> {
    admissibility_audit_with(w, geo, AuditOptions::default())
}

pub fn admissibility_audit_with(
    w: &WeightSpec,
    geo: &BackgroundGeometry,
    opts: AuditOptions,
) -> Result<f64> {
    let h = geo.h();
    let logs: Vec<f64> = geo
        .nodes()
        .iter()
        .map(|&u| weight_value(w, u).max(f64::MIN_POSITIVE).ln())
        .collect();
    let mut worst: f64 = 0.0;
    for i in 1..geo.n_u - 1 {
        let u = geo.u(i);
        if let Some(r) = opts.exclusion_radius {
            if distance_to_divisor(u) < r {
                continue;
            }
        }
        for k in [i - 1, i, i + 1] {
            let z = weight_value(w, geo.u(k));
            if !(z > opts.tolerance) {
                return Err(Error::DegenerateWeight {
                    u: geo.u(k),
                    value: z,
                });
            }
        }
        let second = (logs[i + 1] - 2.0 * logs[i] + logs[i - 1]) / (h * h);
        worst = worst.max(-second / fs_density(u));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::section_norm_sq;
    use approx::assert_relative_eq;

    fn geo() -> BackgroundGeometry {
        BackgroundGeometry::new(16.0, 129).unwrap()
    }

    #[test]
    fn values() {
        let w = WeightSpec::section(DivisorPoint::Zero, 1.0, 0.01).unwrap();
        assert_relative_eq!(weight_value(&w, 0.0), 0.51, epsilon = 1e-15);
        let prod = WeightSpec::both_sections(1.0, 0.0).unwrap();
        assert_relative_eq!(weight_value(&prod, 0.0), 0.25, epsilon = 1e-15);
        let w0 = WeightSpec::section(DivisorPoint::Zero, 1.0, 0.0).unwrap();
        assert_eq!(weight_value(&w0, 1.3), section_norm_sq(1.3, DivisorPoint::Zero));
    }

    #[test]
    fn analytic_set_matches_section_norm() {
        let w = WeightSpec::new(WeightKind::AnalyticSet { exponents: vec![1] }, 1.0, 0.0).unwrap();
        for u in [-7.5, 0.0, 4.25] {
            assert_relative_eq!(
                w.bare(u),
                section_norm_sq(u, DivisorPoint::Zero),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn audit_constants() {
        let g = geo();
        let s = WeightSpec::section(DivisorPoint::Zero, 1.0, 0.0).unwrap();
        let c = admissibility_audit(&s, &g).unwrap();
        assert!((c - 1.0).abs() < 0.01, "{c}");
        let one = WeightSpec::constant(1.0, 1.0).unwrap();
        assert_eq!(admissibility_audit(&one, &g).unwrap(), 0.0);
        let prod = WeightSpec::both_sections(1.0, 0.0).unwrap().certify(&g).unwrap();
        assert!((prod.c1 - 2.0).abs() < 0.02, "{}", prod.c1);
        assert!(prod.c1 <= prod.component_c1_sum() + 1e-9);
    }

    #[test]
    fn degenerate_weight_detected() {
        let g = BackgroundGeometry::new(40.0, 81).unwrap();
        let mut opts = AuditOptions::default();
        opts.tolerance = 1e-12;
        let s = WeightSpec::section(DivisorPoint::Zero, 1.0, 0.0).unwrap();
        assert!(matches!(
            admissibility_audit_with(&s, &g, opts),
            Err(Error::DegenerateWeight { .. })
        ));
        opts.exclusion_radius = Some(1e-3);
        assert!(admissibility_audit_with(&s, &g, opts).is_ok());
        let s = s.with_eta(1e-6).unwrap();
        assert!(admissibility_audit_with(&s, &g, AuditOptions { tolerance: 1e-12, exclusion_radius: None }).is_ok());
    }

    #[test]
    fn audit_stable_under_refinement() {
        let g = geo();
        for w in [
            WeightSpec::section(DivisorPoint::Infinity, 0.5, 1e-3).unwrap(),
            WeightSpec::both_sections(0.75, 1e-4).unwrap(),
            WeightSpec::new(WeightKind::AnalyticSet { exponents: vec![1, 3] }, 1.0, 1e-2).unwrap(),
            WeightSpec::new(WeightKind::DistancePower { exponent: 2.0, cap: 1.0 }, 1.0, 1e-3).unwrap(),
        ] {
            let a = admissibility_audit(&w, &g).unwrap();
            let b = admissibility_audit(&w, &g.refined()).unwrap();
            assert!(a.is_finite());
            assert!((a - b).abs() <= 0.05 * a.max(b).max(1e-12), "{:?} {a} {b}", w.kind);
        }
    }

    #[test]
    fn audit_monotone_in_eta() {
        let g = geo();
        let mut last = f64::INFINITY;
        for eta in [0.0, 1e-6, 1e-4, 1e-2, 1.0] {
            let w = WeightSpec::both_sections(1.0, eta).unwrap();
            let c = admissibility_audit(&w, &g).unwrap();
            assert!(c <= last + 1e-12);
            last = c;
        }
    }

    #[test]
    fn distance_quadrature_oracle() {
        // ∫_{-∞}^{u} √F⁰_vv dv by composite Simpson on a long interval.
        let quad = |u: f64| {
            let a = -60.0;
            let n = 200_000;
            let h = (u - a) / n as f64;
            let f = |v: f64| fs_density(v).sqrt();
            let mut s = f(a) + f(u);
            for k in 1..n {
                s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        assert!((quad(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!((distance_to_divisor(0.0) - quad(0.0)).abs() < 1e-9);
        for u in [-10.0, -3.0, -0.5] {
            assert!((distance_to_divisor(u) - quad(u)).abs() < 1e-9);
        }
        assert!(distance_to_divisor(-60.0) < 1e-12);
        for u in [-20.0, -3.0, 0.0, 0.7, 9.0] {
            let (d, e) = (distance_to_divisor(u), smooth_distance(u));
            assert!(e <= d + 1e-15 && e >= 0.5 * d - 1e-15);
        }
    }

    #[test]
    fn distance_is_comparable_to_section_norm() {
        let beta = 0.5;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut u = -16.0;
        while u <= -4.0 {
            let r = distance_to_divisor(u).powf(2.0 * beta) / section_norm_sq(u, DivisorPoint::Zero).powf(beta);
            lo = lo.min(r);
            hi = hi.max(r);
            u += 0.125;
        }
        assert!(lo > 0.5 && hi < 4.0, "{lo} {hi}");
    }

    #[test]
    fn closed_form_jet_matches_differences() {
        let w = WeightSpec::new(WeightKind::AnalyticSet { exponents: vec![0, 2] }, 1.0, 0.3).unwrap();
        let h = 1e-4;
        for u in [-3.0, 0.1, 2.0] {
            let l = |x: f64| weight_value(&w, x).ln();
            let fd = (l(u + h) - 2.0 * l(u) + l(u - h)) / (h * h);
            let (_, an) = w.log_second_derivative(u);
            assert!((fd - an).abs() < 1e-5, "{fd} {an}");
        }
    }
}
