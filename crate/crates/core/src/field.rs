//! Potentials on the `(u, t)` rectangle and the discrete operators acting on them.
//!
//! With `F = F⁰ + φ`, the space-time complex Hessian reduces to the real
//! Hessian of `F` in `(u, t)`. The metric ratio `n + Δφ` is `F_uu / F⁰_uu`, the
//! geodesic operator is `𝒢 = F_tt − F_tu² / F_uu`, and the regularized equation
//! reads `(F_tt F_uu − F_tu²) / F⁰_uu = ε e^f ζ_η^{−p}`.
//!
//! `F⁰_uu` enters in closed form; only `φ` is differenced.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::{fs_density, fs_slope, BackgroundGeometry};
use crate::stencil;
use crate::weights::{weight_value, WeightSpec};

/// Potential values `φ(u_i, t_j)` with `t_j = j / (n_t − 1)`. Columns `j = 0`
/// and `j = n_t − 1` are the boundary slices.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub geo: BackgroundGeometry,
    pub n_t: usize,
    pub values: Array2<f64>,
}

/// First and second partial derivatives of a field at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partials {
    pub u: f64,
    pub t: f64,
    pub uu: f64,
    pub tt: f64,
    pub tu: f64,
}

/// Hessian entries of `F = F⁰ + φ` at one node, plus the background density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub f_uu: f64,
    pub f_tt: f64,
    pub f_tu: f64,
    pub f0_uu: f64,
}

impl Metric {
    pub fn det(&self) -> f64 {
        self.f_tt * self.f_uu - self.f_tu * self.f_tu
    }

    /// `𝒢 = F_tt − F_tu² / F_uu`.
    pub fn geodesic(&self) -> f64 {
        self.f_tt - self.f_tu * self.f_tu / self.f_uu
    }

    /// `n + Δφ` for `n = 1`.
    pub fn ratio(&self) -> f64 {
        self.f_uu / self.f0_uu
    }
}

/// Right-hand side `ε e^f ζ_η^{−p}` of the regularized equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub eps: f64,
    pub weight: WeightSpec,
    /// Sampled `f`, same shape as the grid; `None` means `f ≡ 0`.
    pub f: Option<Array2<f64>>,
}

impl Rhs {
    pub fn new(eps: f64, weight: WeightSpec) -> Self {
        Self { eps, weight, f: None }
    }

    pub fn with_f(mut self, f: Array2<f64>) -> Self {
        self.f = Some(f);
        self
    }

    pub fn f_at(&self, i: usize, j: usize) -> f64 {
        self.f.as_ref().map_or(0.0, |f| f[[i, j]])
    }

    /// `log(ε e^f ζ^{−p})` at node `(i, j)`.
    pub fn log_value(&self, geo: &BackgroundGeometry, i: usize, j: usize) -> f64 {
        self.eps.ln() + self.f_at(i, j) - self.weight.p * weight_value(&self.weight, geo.u(i)).ln()
    }

    pub fn value(&self, geo: &BackgroundGeometry, i: usize, j: usize) -> f64 {
        self.log_value(geo, i, j).exp()
    }
}

/// Which algebraic form of the Monge–Ampère residual to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualForm {
    /// `𝒢 · F_uu / F⁰_uu − rhs`.
    Product,
    /// `(F_tt F_uu − F_tu²) / F⁰_uu − rhs`.
    Determinant,
}

impl PotentialGrid {
    pub fn zeros(geo: BackgroundGeometry, n_t: usize) -> Result<Self> {
        if n_t < 3 {
            return Err(Error::Invalid(format!("n_t = {n_t} is too small (need ≥ 3)")));
        }
        let values = Array2::zeros((geo.n_u, n_t));
        Ok(Self { geo, n_t, values })
    }

    pub fn from_fn(geo: BackgroundGeometry, n_t: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(geo, n_t)?;
        for i in 0..g.n_u() {
            let u = g.geo.u(i);
            for j in 0..n_t {
                g.values[[i, j]] = f(u, g.t(j));
            }
        }
        Ok(g)
    }

    pub fn n_u(&self) -> usize {
        self.geo.n_u
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 / (self.n_t - 1) as f64
    }

    pub fn h_t(&self) -> f64 {
        1.0 / (self.n_t - 1) as f64
    }

    pub fn boundary0(&self) -> Vec<f64> {
        self.values.column(0).to_vec()
    }

    pub fn boundary1(&self) -> Vec<f64> {
        self.values.column(self.n_t - 1).to_vec()
    }

    /// Nodes where the equation is imposed: strictly inside in both directions.
    pub fn is_equation_node(&self, i: usize, j: usize) -> bool {
        i > 0 && i + 1 < self.n_u() && j > 0 && j + 1 < self.n_t
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_t == other.n_t && self.geo.n_u == other.geo.n_u && self.geo.u_min == other.geo.u_min && self.geo.u_max == other.geo.u_max
    }

    /// Sets the lateral columns from the pole asymptotics `φ ≈ g(t) + a(t) e^{∓u}`:
    /// `φ₀ = (1 + e^{−h}) φ₁ − e^{−h} φ₂` and symmetrically at the other end.
    /// Boundary slices are left untouched.
    pub fn apply_pole_closure(&mut self) {
        let r = (-self.geo.h()).exp();
        let n = self.n_u();
        for j in 1..self.n_t - 1 {
            self.values[[0, j]] = (1.0 + r) * self.values[[1, j]] - r * self.values[[2, j]];
            self.values[[n - 1, j]] = (1.0 + r) * self.values[[n - 2, j]] - r * self.values[[n - 3, j]];
        }
    }

    /// Finite-difference partials of an arbitrary field sampled on this grid.
    pub fn partials_of(&self, field: &Array2<f64>, i: usize, j: usize) -> Partials {
        let (nu, nt) = (self.n_u(), self.n_t);
        let (hu, ht) = (self.geo.h(), self.h_t());
        let fu = stencil::apply_first(|k| field[[k, j]], i, nu, hu);
        let ft = stencil::apply_first(|k| field[[i, k]], j, nt, ht);
        let fuu = stencil::apply_second(|k| field[[k, j]], i, nu, hu);
        let ftt = stencil::apply_second(|k| field[[i, k]], j, nt, ht);
        let (ou, wu) = stencil::first(i, nu, hu);
        let (ot, wt) = stencil::first(j, nt, ht);
        let mut ftu = 0.0;
        for (a, ca) in wu.iter().enumerate() {
            if *ca == 0.0 {
                continue;
            }
            let ii = (i as isize + ou + a as isize) as usize;
            for (b, cb) in wt.iter().enumerate() {
                if *cb == 0.0 {
                    continue;
                }
                let jj = (j as isize + ot + b as isize) as usize;
                ftu += ca * cb * field[[ii, jj]];
            }
        }
        Partials {
            u: fu,
            t: ft,
            uu: fuu,
            tt: ftt,
            tu: ftu,
        }
    }

    pub fn metric(&self, i: usize, j: usize) -> Metric {
        let p = partials(self, i, j);
        let f0_uu = fs_density(self.geo.u(i));
        Metric {
            f_uu: f0_uu + p.uu,
            f_tt: p.tt,
            f_tu: p.tu,
            f0_uu,
        }
    }

    /// First equation node violating `F_uu > 0` or `det > 0`, if any.
    pub fn admissibility_violation(&self) -> Option<Error> {
        for i in 1..self.n_u() - 1 {
            for j in 1..self.n_t - 1 {
                let m = self.metric(i, j);
                if !(m.f_uu > 0.0) {
                    return Some(Error::PositivityLoss { i, j, what: "F_uu", value: m.f_uu });
                }
                let det = m.det();
                if !(det > 0.0) {
                    return Some(Error::PositivityLoss { i, j, what: "det Hess F", value: det });
                }
            }
        }
        None
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility_violation().is_none()
    }

    /// `|∂_u φ| / √F⁰_uu`, the ω-length of the space gradient.
    pub fn gradient_norm(&self, i: usize, j: usize) -> f64 {
        partials(self, i, j).u.abs() / fs_density(self.geo.u(i)).sqrt()
    }

    /// `F_u = F⁰_u + φ_u`, the moment coordinate.
    pub fn moment(&self, i: usize, j: usize) -> f64 {
        fs_slope(self.geo.u(i)) + partials(self, i, j).u
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::GridMismatch(format!(
                "{}×{} vs {}×{}",
                self.n_u(),
                self.n_t,
                other.n_u(),
                other.n_t
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// CSV with header `u,t,phi`, `u` outer, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 72);
        out.push_str("u,t,phi\n");
        for i in 0..self.n_u() {
            let u = self.geo.u(i);
            for j in 0..self.n_t {
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", u, self.t(j), self.values[[i, j]]);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "u,t,phi" => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header `u,t,phi`".into(),
                })
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("expected 3 columns, found {}", parts.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (k, p) in parts.iter().enumerate() {
                vals[k] = p.trim().parse().map_err(|e| Error::Parse {
                    line: n + 1,
                    message: format!("bad number `{p}`: {e}"),
                })?;
            }
            rows.push(vals);
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 2, message: "no data rows".into() });
        }
        let u0 = rows[0][0];
        let n_t = rows.iter().take_while(|r| r[0] == u0).count();
        if n_t < 3 || rows.len() % n_t != 0 {
            return Err(Error::Parse {
                line: 2,
                message: format!("{} rows do not form a u-major grid", rows.len()),
            });
        }
        let n_u = rows.len() / n_t;
        let geo = BackgroundGeometry::with_range(u0, rows[rows.len() - 1][0], n_u)?;
        let mut g = Self::zeros(geo, n_t)?;
        for (k, r) in rows.iter().enumerate() {
            let (i, j) = (k / n_t, k % n_t);
            if (r[0] - g.geo.u(i)).abs() > 1e-9 * (1.0 + r[0].abs()) || (r[1] - g.t(j)).abs() > 1e-12 {
                return Err(Error::Parse {
                    line: k + 2,
                    message: format!("node ({}, {}) is off the uniform grid", r[0], r[1]),
                });
            }
            g.values[[i, j]] = r[2];
        }
        Ok(g)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Partials of `φ` at `(i, j)`: central differences inside, one-sided
/// second-order stencils on the edges.
pub fn partials(grid: &PotentialGrid, i: usize, j: usize) -> Partials {
    grid.partials_of(&grid.values, i, j)
}

/// Reduced geodesic operator `F_tt − F_tu² / F_uu`.
pub fn geodesic_operator(grid: &PotentialGrid, i: usize, j: usize) -> Result<f64> {
    let m = grid.metric(i, j);
    if !(m.f_uu > 0.0) {
        return Err(Error::PositivityLoss { i, j, what: "F_uu", value: m.f_uu });
    }
    Ok(m.geodesic())
}

/// `n + Δφ = F_uu / F⁰_uu`.
pub fn laplacian_ratio(grid: &PotentialGrid, i: usize, j: usize) -> f64 {
    grid.metric(i, j).ratio()
}

/// Pointwise Monge–Ampère residual on equation nodes (zero elsewhere).
pub fn ma_residual(grid: &PotentialGrid, rhs: &Rhs, form: ResidualForm) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((grid.n_u(), grid.n_t));
    for i in 1..grid.n_u() - 1 {
        for j in 1..grid.n_t - 1 {
            let m = grid.metric(i, j);
            if !(m.f_uu > 0.0) {
                return Err(Error::PositivityLoss { i, j, what: "F_uu", value: m.f_uu });
            }
            let lhs = match form {
                ResidualForm::Product => m.geodesic() * m.ratio(),
                ResidualForm::Determinant => m.det() / m.f0_uu,
            };
            out[[i, j]] = lhs - rhs.value(&grid.geo, i, j);
        }
    }
    Ok(out)
}

/// `log(F_tt F_uu − F_tu²) − log F⁰_uu − log ε − f + p log ζ_η` on equation nodes.
pub fn log_residual(grid: &PotentialGrid, rhs: &Rhs) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((grid.n_u(), grid.n_t));
    for i in 1..grid.n_u() - 1 {
        for j in 1..grid.n_t - 1 {
            out[[i, j]] = log_residual_at(grid, rhs, i, j)?;
        }
    }
    Ok(out)
}

pub(crate) fn log_residual_at(grid: &PotentialGrid, rhs: &Rhs, i: usize, j: usize) -> Result<f64> {
    let m = grid.metric(i, j);
    let det = m.det();
    if !(det > 0.0) {
        return Err(Error::PositivityLoss { i, j, what: "det Hess F", value: det });
    }
    Ok(det.ln() - m.f0_uu.ln() - rhs.log_value(&grid.geo, i, j))
}

/// Linearization `𝔇ψ = (F_tt ψ_uu + F_uu ψ_tt − 2 F_tu ψ_tu) / (𝒢 F_uu)` of the
/// log residual at `(i, j)`, using the same stencils as the residual.
pub fn linearized_apply(grid: &PotentialGrid, psi: &Array2<f64>, i: usize, j: usize) -> Result<f64> {
    let m = grid.metric(i, j);
    if !(m.f_uu > 0.0) {
        return Err(Error::PositivityLoss { i, j, what: "F_uu", value: m.f_uu });
    }
    let g = m.geodesic();
    if !(g > 0.0) {
        return Err(Error::PositivityLoss { i, j, what: "geodesic operator", value: g });
    }
    let d = grid.partials_of(psi, i, j);
    Ok((m.f_tt * d.uu + m.f_uu * d.tt - 2.0 * m.f_tu * d.tu) / (g * m.f_uu))
}

/// Closed form of `𝔇φ` in the reduced setting,
/// `2 − 1/r − F_tu² F⁰_uu / (𝒢 F_uu²)` with `r = F_uu / F⁰_uu`.
pub fn lin_phi_reduced(grid: &PotentialGrid, i: usize, j: usize) -> Result<f64> {
    let m = grid.metric(i, j);
    let g = geodesic_operator(grid, i, j)?;
    Ok(2.0 - 1.0 / m.ratio() - m.f_tu * m.f_tu * m.f0_uu / (g * m.f_uu * m.f_uu))
}

/// Relative gap in the n = 1 AM–GM step `1/r + 1/𝒢 ≥ (r + 𝒢)/(r 𝒢)`, which
/// is an equality in one complex dimension.
pub fn amgm_gap(grid: &PotentialGrid, i: usize, j: usize) -> Result<f64> {
    let r = grid.metric(i, j).ratio();
    let g = geodesic_operator(grid, i, j)?;
    let lhs = 1.0 / r + 1.0 / g;
    let rhs = (r + g) / (r * g);
    Ok((lhs - rhs).abs() / rhs.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DivisorPoint;

    fn geo() -> BackgroundGeometry {
        BackgroundGeometry::new(6.0, 25).unwrap()
    }

    #[test]
    fn exact_on_quadratics() {
        let g = PotentialGrid::from_fn(geo(), 9, |u, t| u * t).unwrap();
        for i in 0..g.n_u() {
            for j in 0..g.n_t {
                let p = partials(&g, i, j);
                assert!((p.tu - 1.0).abs() < 1e-12);
                assert!(p.uu.abs() < 1e-11 && p.tt.abs() < 1e-11);
            }
        }
        let g = PotentialGrid::from_fn(geo(), 9, |u, _| u * u).unwrap();
        for i in 0..g.n_u() {
            for j in 0..g.n_t {
                assert!((partials(&g, i, j).uu - 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn second_order_convergence_on_sine() {
        let err = |n: usize| {
            let geo = BackgroundGeometry::new(3.0, n).unwrap();
            let g = PotentialGrid::from_fn(geo, 3, |u, _| u.sin()).unwrap();
            (1..g.n_u() - 1)
                .map(|i| (partials(&g, i, 1).uu + g.geo.u(i).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(33) / err(65);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn geodesic_operator_cases() {
        let flat = PotentialGrid::from_fn(geo(), 9, |_, t| 2.0 * t).unwrap();
        assert!(geodesic_operator(&flat, 5, 4).unwrap().abs() < 1e-12);
        let quad = PotentialGrid::from_fn(geo(), 9, |_, t| t * t).unwrap();
        assert!((geodesic_operator(&quad, 5, 4).unwrap() - 2.0).abs() < 1e-10);
        let m = Metric { f_uu: 1.0, f_tt: 2.0, f_tu: 1.0, f0_uu: 1.0 };
        assert_eq!(m.geodesic(), 1.0);
        let bad = PotentialGrid::from_fn(geo(), 9, |u, _| -u * u).unwrap();
        assert!(matches!(geodesic_operator(&bad, 5, 4), Err(Error::PositivityLoss { .. })));
    }

    #[test]
    fn flat_potential_has_unit_ratio() {
        let g = PotentialGrid::zeros(geo(), 9).unwrap();
        for i in 0..g.n_u() {
            assert_eq!(laplacian_ratio(&g, i, 3), 1.0);
        }
    }

    #[test]
    fn constant_path_solves_unregularized_equation() {
        let g = PotentialGrid::zeros(geo(), 9).unwrap();
        let w = WeightSpec::constant(1.0, 1.0).unwrap();
        let r = ma_residual(&g, &Rhs::new(0.0, w), ResidualForm::Determinant).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn log_residual_scaling() {
        let g = PotentialGrid::from_fn(geo(), 9, |u, t| t * t + 0.1 * crate::geometry::logistic(u) * t).unwrap();
        let w = WeightSpec::section(DivisorPoint::Zero, 0.5, 0.01).unwrap();
        let a = log_residual(&g, &Rhs::new(1e-2, w.clone())).unwrap();
        let b = log_residual(&g, &Rhs::new(2e-2, w)).unwrap();
        for i in 1..g.n_u() - 1 {
            for j in 1..g.n_t - 1 {
                assert!((b[[i, j]] - a[[i, j]] + 2f64.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linearization_of_t_squared() {
        let g = PotentialGrid::from_fn(geo(), 9, |u, t| 1.5 * t * t + 0.1 * crate::geometry::logistic(u) * t).unwrap();
        let psi = PotentialGrid::from_fn(geo(), 9, |_, t| t * t).unwrap().values;
        for i in 1..g.n_u() - 1 {
            for j in 1..g.n_t - 1 {
                let d = linearized_apply(&g, &psi, i, j).unwrap();
                let gop = geodesic_operator(&g, i, j).unwrap();
                assert!((d - 2.0 / gop).abs() < 1e-9 * (1.0 + d.abs()));
            }
        }
    }

    #[test]
    fn lin_phi_and_amgm() {
        let g = PotentialGrid::from_fn(geo(), 9, |u, t| 1.5 * t * t + 0.1 * crate::geometry::logistic(u) * t).unwrap();
        for i in 1..g.n_u() - 1 {
            for j in 1..g.n_t - 1 {
                let direct = linearized_apply(&g, &g.values, i, j).unwrap();
                let closed = lin_phi_reduced(&g, i, j).unwrap();
                assert!((direct - closed).abs() < 1e-9 * (1.0 + direct.abs()));
                assert!(amgm_gap(&g, i, j).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = PotentialGrid::from_fn(geo(), 5, |u, t| (u * 1.1).sin() * t + 1.0 / 3.0).unwrap();
        let back = PotentialGrid::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back.values, g.values);
        assert_eq!(back.geo.n_u, g.geo.n_u);
        assert!(PotentialGrid::from_csv("x,y\n1,2").is_err());
    }
}
