//! Damped Newton for the regularized geodesic equation, the (ε, η, k)
//! continuity family, and the C⁰ barriers.
//!
//! Unknowns are the equation nodes `1 ≤ i ≤ n_u − 2`, `1 ≤ j ≤ n_t − 2`,
//! numbered `(i − 1)(n_t − 2) + (j − 1)`. The lateral columns are slaved to
//! their neighbours by the pole closure, and the `t = 0, 1` slices are data.

use ndarray::Array2;
use serde::Serialize;

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::field::{log_residual_at, PotentialGrid, Rhs};
use crate::geometry::{
    fs_density, logistic, section_norm_sq, smoothed_boundary, smoothed_boundary_slope, BackgroundGeometry,
    DivisorData, DivisorPoint,
};
use crate::weights::WeightSpec;

// ---------------------------------------------------------------------------
// Schedule

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub eps: f64,
    pub eta: f64,
    pub smoothing_k: u64,
}

/// Decreasing regularization parameters, with `η = ε^{1/p}` and `k = round(1/ε)` by default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    pub p: f64,
}

impl Schedule {
    pub fn new(eps_list: &[f64], p: f64) -> Result<Self> {
        let entries = eps_list
            .iter()
            .map(|&eps| ScheduleEntry {
                eps,
                eta: eps.powf(1.0 / p),
                smoothing_k: default_smoothing(eps),
            })
            .collect();
        Self::with_entries(entries, p)
    }

    /// `count` values from `start` to `end`, geometrically spaced.
    pub fn geometric(start: f64, end: f64, count: usize, p: f64) -> Result<Self> {
        if count == 0 || !(start > 0.0 && end > 0.0) {
            return Err(Error::Invalid("geometric schedule needs count ≥ 1 and positive ends".into()));
        }
        let list: Vec<f64> = if count == 1 {
            vec![start]
        } else {
            let r = (end / start).ln() / (count - 1) as f64;
            (0..count).map(|m| start * (r * m as f64).exp()).collect()
        };
        Self::new(&list, p)
    }

    pub fn with_entries(entries: Vec<ScheduleEntry>, p: f64) -> Result<Self> {
        let s = Self { entries, p };
        let problems = s.violations();
        if problems.is_empty() {
            Ok(s)
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.p > 0.0) {
            out.push(format!("weight exponent p = {} must be > 0", self.p));
        }
        if self.entries.is_empty() {
            out.push("schedule is empty".into());
        }
        for (m, e) in self.entries.iter().enumerate() {
            if !(e.eps > 0.0) || !(e.eta > 0.0) {
                out.push(format!("entry {m}: eps and eta must be > 0"));
            }
        }
        for (m, w) in self.entries.windows(2).enumerate() {
            if !(w[1].eps < w[0].eps) {
                out.push(format!("eps not strictly decreasing at entry {}", m + 1));
            }
            if w[1].smoothing_k < w[0].smoothing_k {
                out.push(format!("smoothing_k decreases at entry {}", m + 1));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn default_smoothing(eps: f64) -> u64 {
    (1.0 / eps).round().max(1.0) as u64
}

// ---------------------------------------------------------------------------
// Boundary data

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundaryProfile {
    Flat,
    /// Smoothed conical potential `c Σ (|s_j|² + 1/k)^{β_j}`.
    Conical(DivisorData),
    /// `a · 4|s₀|²|s_∞|²`, u-convex for `−1/4 < a < 1/2`.
    Bump { amplitude: f64 },
}

/// A boundary slice: profile plus a constant shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySpec {
    pub profile: BoundaryProfile,
    pub shift: f64,
}

impl BoundarySpec {
    pub fn flat() -> Self {
        Self { profile: BoundaryProfile::Flat, shift: 0.0 }
    }

    pub fn conical(div: DivisorData) -> Self {
        Self { profile: BoundaryProfile::Conical(div), shift: 0.0 }
    }

    pub fn bump(amplitude: f64) -> Self {
        Self { profile: BoundaryProfile::Bump { amplitude }, shift: 0.0 }
    }

    pub fn shifted(mut self, shift: f64) -> Self {
        self.shift += shift;
        self
    }

    /// `φ(u)` with smoothing level `k` (ignored by non-conical profiles).
    pub fn value(&self, k: u64, u: f64) -> f64 {
        self.shift
            + match self.profile {
                BoundaryProfile::Flat => 0.0,
                BoundaryProfile::Conical(div) => smoothed_boundary(&div, k, u),
                BoundaryProfile::Bump { amplitude } => 4.0 * amplitude * section_norm_sq(u, DivisorPoint::Zero) * section_norm_sq(u, DivisorPoint::Infinity),
            }
    }

    pub fn slope(&self, k: u64, u: f64) -> f64 {
        match self.profile {
            BoundaryProfile::Flat => 0.0,
            BoundaryProfile::Conical(div) => smoothed_boundary_slope(&div, k, u),
            BoundaryProfile::Bump { amplitude } => {
                let g = fs_density(u);
                4.0 * amplitude * g * (1.0 - 2.0 * logistic(u))
            }
        }
    }

    /// `φ''(u)` in closed form.
    pub fn curvature(&self, k: u64, u: f64) -> f64 {
        match self.profile {
            BoundaryProfile::Flat => 0.0,
            BoundaryProfile::Conical(div) => {
                let d = 1.0 / k.max(1) as f64;
                let g = fs_density(u);
                let tilt = 1.0 - 2.0 * logistic(u);
                let (b0, b1) = (div.beta_zero, div.beta_infinity);
                let x0 = section_norm_sq(u, DivisorPoint::Zero) + d;
                let x1 = section_norm_sq(u, DivisorPoint::Infinity) + d;
                div.c
                    * (g * tilt * b0 * x0.powf(b0 - 1.0) + g * g * b0 * (b0 - 1.0) * x0.powf(b0 - 2.0)
                        - g * tilt * b1 * x1.powf(b1 - 1.0)
                        + g * g * b1 * (b1 - 1.0) * x1.powf(b1 - 2.0))
            }
            BoundaryProfile::Bump { amplitude } => {
                let g = fs_density(u);
                4.0 * amplitude * g * (1.0 - 6.0 * g)
            }
        }
    }

    pub fn sample(&self, geo: &BackgroundGeometry, k: u64) -> Vec<f64> {
        geo.nodes().iter().map(|&u| self.value(k, u)).collect()
    }
}

// ---------------------------------------------------------------------------
// Starting points and barriers

fn check_slice(geo: &BackgroundGeometry, slice: &[f64], t: f64) -> Result<()> {
    if slice.len() != geo.n_u {
        return Err(Error::GridMismatch(format!("slice of length {} on {} nodes", slice.len(), geo.n_u)));
    }
    for (i, m) in geo.discrete_metric(slice).into_iter().enumerate() {
        if !(m > 0.0) {
            return Err(Error::BadBoundary { t, i, value: m });
        }
    }
    Ok(())
}

fn interpolant(geo: &BackgroundGeometry, n_t: usize, b0: &[f64], b1: &[f64], m: f64) -> Result<PotentialGrid> {
    check_slice(geo, b0, 0.0)?;
    check_slice(geo, b1, 1.0)?;
    let mut g = PotentialGrid::zeros(geo.clone(), n_t)?;
    for i in 0..geo.n_u {
        for j in 0..n_t {
            let t = g.t(j);
            g.values[[i, j]] = (1.0 - t) * b0[i] + t * b1[i] + m * (t * t - t);
        }
    }
    g.apply_pole_closure();
    Ok(g)
}

/// Smallest `M` for which `(1−t)φ₀ + tφ₁ + M(t² − t)` has `det Hess F / F⁰_uu ≥ rhs`
/// at every equation node; `rhs = None` gives the positivity threshold
/// `max F_tu² / (2 F_uu)`.
pub fn admissibility_threshold(
    geo: &BackgroundGeometry,
    n_t: usize,
    b0: &[f64],
    b1: &[f64],
    rhs: Option<&Rhs>,
) -> Result<f64> {
    let g = interpolant(geo, n_t, b0, b1, 0.0)?;
    let mut worst: f64 = 0.0;
    for i in 1..g.n_u() - 1 {
        for j in 1..n_t - 1 {
            let m = g.metric(i, j);
            if !(m.f_uu > 0.0) {
                return Err(Error::PositivityLoss { i, j, what: "F_uu", value: m.f_uu });
            }
            let target = rhs.map_or(0.0, |r| r.value(geo, i, j)) * m.f0_uu;
            worst = worst.max((m.f_tu * m.f_tu + target - m.f_tt * m.f_uu) / (2.0 * m.f_uu));
        }
    }
    Ok(worst)
}

/// Convexified interpolation `(1−t)φ₀ + tφ₁ + M(t² − t)`, lateral closure applied.
pub fn initial_guess(geo: &BackgroundGeometry, n_t: usize, b0: &[f64], b1: &[f64], m: f64) -> Result<PotentialGrid> {
    interpolant(geo, n_t, b0, b1, m)
}

/// Initial guess with `M` at twice the threshold for `rhs`, so the start is
/// admissible and already over-solves the equation.
pub fn cold_start(geo: &BackgroundGeometry, n_t: usize, b0: &[f64], b1: &[f64], rhs: &Rhs) -> Result<PotentialGrid> {
    let m = admissibility_threshold(geo, n_t, b0, b1, Some(rhs))?;
    initial_guess(geo, n_t, b0, b1, 2.0 * m.max(1e-12))
}

/// Ω-psh extension `(1−t)φ₀ + tφ₁ + A t(t−1)`.
///
/// `A` is raised to the threshold of [`admissibility_threshold`]; passing the
/// right-hand side makes the result a subsolution of the regularized problem
/// rather than only of the degenerate one.
pub fn subsolution(
    geo: &BackgroundGeometry,
    n_t: usize,
    b0: &[f64],
    b1: &[f64],
    a: f64,
    rhs: Option<&Rhs>,
) -> Result<PotentialGrid> {
    let need = admissibility_threshold(geo, n_t, b0, b1, rhs)?;
    initial_guess(geo, n_t, b0, b1, a.max(need))
}

/// Solution of `h_uu / F⁰_uu + h_tt = −(n + 1)` with the boundary slices as
/// Dirichlet data; for zero data `h = t(1 − t)`.
pub fn supersolution(geo: &BackgroundGeometry, n_t: usize, b0: &[f64], b1: &[f64]) -> Result<PotentialGrid> {
    let mut h = interpolant_unchecked(geo, n_t, b0, b1)?;
    let layout = Layout::new(geo.n_u, n_t, geo.h());
    let (hu, ht) = (geo.h(), h.h_t());
    let mut mat = BandMatrix::zeros(layout.unknowns(), layout.band(), layout.band());
    let mut rhs = vec![0.0; layout.unknowns()];
    for i in 1..geo.n_u - 1 {
        let g = fs_density(geo.u(i));
        for j in 1..n_t - 1 {
            let row = layout.index(i, j);
            rhs[row] = -2.0;
            let cu = 1.0 / (g * hu * hu);
            let ct = 1.0 / (ht * ht);
            for (a, b, c) in [
                (i - 1, j, cu),
                (i + 1, j, cu),
                (i, j - 1, ct),
                (i, j + 1, ct),
                (i, j, -2.0 * cu - 2.0 * ct),
            ] {
                layout.fold(&mut mat, Some(&mut rhs), &h.values, row, a, b, c);
            }
        }
    }
    mat.equilibrate_rows(&mut rhs);
    mat.solve(&mut rhs)?;
    layout.scatter(&mut h.values, &rhs, |_, x| x);
    h.apply_pole_closure();
    Ok(h)
}

fn interpolant_unchecked(geo: &BackgroundGeometry, n_t: usize, b0: &[f64], b1: &[f64]) -> Result<PotentialGrid> {
    if b0.len() != geo.n_u || b1.len() != geo.n_u {
        return Err(Error::GridMismatch("boundary slice length".into()));
    }
    let mut g = PotentialGrid::zeros(geo.clone(), n_t)?;
    for i in 0..geo.n_u {
        for j in 0..n_t {
            let t = g.t(j);
            g.values[[i, j]] = (1.0 - t) * b0[i] + t * b1[i];
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    /// `max (sub − φ)`; ≤ tol when the lower barrier holds.
    pub below_sub: f64,
    /// `max (φ − super)`; ≤ tol when the upper barrier holds.
    pub above_super: f64,
    /// Node of the largest violation.
    pub worst_node: (usize, usize),
    pub tol: f64,
    pub pass: bool,
}

pub fn sandwich_check(phi: &PotentialGrid, sub: &PotentialGrid, sup: &PotentialGrid, tol: f64) -> Result<SandwichReport> {
    if !phi.same_shape(sub) || !phi.same_shape(sup) {
        return Err(Error::GridMismatch("sandwich grids differ in shape".into()));
    }
    let mut below = f64::NEG_INFINITY;
    let mut above = f64::NEG_INFINITY;
    let mut worst = (0, 0);
    let mut worst_v = f64::NEG_INFINITY;
    for ((idx, &p), (&s, &h)) in phi.values.indexed_iter().zip(sub.values.iter().zip(sup.values.iter())) {
        let (lo, hi) = (s - p, p - h);
        below = below.max(lo);
        above = above.max(hi);
        if lo.max(hi) > worst_v {
            worst_v = lo.max(hi);
            worst = idx;
        }
    }
    Ok(SandwichReport {
        below_sub: below,
        above_super: above,
        worst_node: worst,
        tol,
        pass: below <= tol && above <= tol,
    })
}

// ---------------------------------------------------------------------------
// Unknown layout shared by the Newton and Poisson systems

struct Layout {
    n_u: usize,
    n_t: usize,
    r: f64,
}

impl Layout {
    fn new(n_u: usize, n_t: usize, h: f64) -> Self {
        Self { n_u, n_t, r: (-h).exp() }
    }

    fn unknowns(&self) -> usize {
        (self.n_u - 2) * (self.n_t - 2)
    }

    fn band(&self) -> usize {
        self.n_t - 1
    }

    fn index(&self, i: usize, j: usize) -> usize {
        (i - 1) * (self.n_t - 2) + (j - 1)
    }

    /// Adds `c · x(a, b)` to equation `row`, resolving lateral nodes through
    /// the closure and moving known slice values to the right-hand side.
    #[allow(clippy::too_many_arguments)]
    fn fold(&self, mat: &mut BandMatrix, rhs: Option<&mut [f64]>, known: &Array2<f64>, row: usize, a: usize, b: usize, c: f64) {
        if b == 0 || b + 1 == self.n_t {
            if let Some(rhs) = rhs {
                rhs[row] -= c * known[[a, b]];
            }
            return;
        }
        let n = self.n_u;
        if a == 0 {
            mat.add(row, self.index(1, b), (1.0 + self.r) * c);
            mat.add(row, self.index(2, b), -self.r * c);
        } else if a + 1 == n {
            mat.add(row, self.index(n - 2, b), (1.0 + self.r) * c);
            mat.add(row, self.index(n - 3, b), -self.r * c);
        } else {
            mat.add(row, self.index(a, b), c);
        }
    }

    fn scatter(&self, values: &mut Array2<f64>, x: &[f64], combine: impl Fn(f64, f64) -> f64) {
        for i in 1..self.n_u - 1 {
            for j in 1..self.n_t - 1 {
                let v = &mut values[[i, j]];
                *v = combine(*v, x[self.index(i, j)]);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Newton

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor tried before giving up.
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 60, min_step: 2f64.powi(-20) }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub grid: PotentialGrid,
    pub iterations: usize,
    /// `max |log_residual|` at the returned iterate.
    pub final_residual: f64,
    pub damping_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub admissible: bool,
    /// Largest [`roundoff_floor`] over the grid at the returned iterate.
    pub roundoff_floor: f64,
}

/// Residual on the unknowns, or the first admissibility failure.
fn residual_vector(grid: &PotentialGrid, rhs: &Rhs, layout: &Layout) -> Result<Vec<f64>> {
    if let Some(e) = grid.admissibility_violation() {
        return Err(e);
    }
    let mut out = vec![0.0; layout.unknowns()];
    for i in 1..grid.n_u() - 1 {
        for j in 1..grid.n_t - 1 {
            out[layout.index(i, j)] = log_residual_at(grid, rhs, i, j)?;
        }
    }
    Ok(out)
}

/// Size of the log residual that cannot be resolved in double precision at
/// each equation node: the response of the discrete residual to half-ulp
/// perturbations of the stencil values, plus the rounding of the determinant.
/// Near the poles `F⁰_uu` is tiny and this floor can approach `1e−8`.
pub fn roundoff_floor(grid: &PotentialGrid) -> Array2<f64> {
    let (hu, ht) = (grid.geo.h(), grid.h_t());
    let unit = 0.5 * f64::EPSILON;
    let mut out = Array2::zeros((grid.n_u(), grid.n_t));
    for i in 1..grid.n_u() - 1 {
        for j in 1..grid.n_t - 1 {
            let m = grid.metric(i, j);
            let det = m.det();
            let scale = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .fold(0.0f64, |acc, (a, b)| acc.max(grid.values[[a, b]].abs()));
            let response = (4.0 * m.f_tt.abs() / (hu * hu) + 4.0 * m.f_uu.abs() / (ht * ht)
                + 2.0 * m.f_tu.abs() / (hu * ht))
                / det.abs();
            let det_rounding = 4.0 * (m.f_tt * m.f_uu).abs().max(m.f_tu * m.f_tu) / det.abs();
            out[[i, j]] = unit * (response * scale + det_rounding);
        }
    }
    out
}

/// Multiple of [`roundoff_floor`] tolerated on top of `tol`.
const FLOOR_FACTOR: f64 = 4.0;

fn within_tolerance(grid: &PotentialGrid, res: &[f64], layout: &Layout, tol: f64) -> bool {
    if max_abs(res) <= tol {
        return true;
    }
    let floor = roundoff_floor(grid);
    (1..grid.n_u() - 1).all(|i| {
        (1..grid.n_t - 1).all(|j| res[layout.index(i, j)].abs() <= tol + FLOOR_FACTOR * floor[[i, j]])
    })
}

fn jacobian(grid: &PotentialGrid, layout: &Layout) -> BandMatrix {
    let (hu, ht) = (grid.geo.h(), grid.h_t());
    let (cuu, ctt, ctu) = (1.0 / (hu * hu), 1.0 / (ht * ht), 1.0 / (4.0 * hu * ht));
    let mut mat = BandMatrix::zeros(layout.unknowns(), layout.band(), layout.band());
    let empty = Array2::zeros((0, 0));
    for i in 1..grid.n_u() - 1 {
        for j in 1..grid.n_t - 1 {
            let m = grid.metric(i, j);
            let det = m.det();
            let row = layout.index(i, j);
            let a_uu = m.f_tt / det;
            let a_tt = m.f_uu / det;
            let a_tu = -2.0 * m.f_tu / det;
            let entries = [
                (i - 1, j, a_uu * cuu),
                (i + 1, j, a_uu * cuu),
                (i, j - 1, a_tt * ctt),
                (i, j + 1, a_tt * ctt),
                (i, j, -2.0 * (a_uu * cuu + a_tt * ctt)),
                (i + 1, j + 1, a_tu * ctu),
                (i - 1, j - 1, a_tu * ctu),
                (i + 1, j - 1, -a_tu * ctu),
                (i - 1, j + 1, -a_tu * ctu),
            ];
            for (a, b, c) in entries {
                layout.fold(&mut mat, None, &empty, row, a, b, c);
            }
        }
    }
    mat
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on the log residual. Every accepted iterate is admissible and
/// lowers the l² residual; the step is halved until both hold.
///
/// Stops when `max |R| ≤ tol`. If the line search stalls first, the iterate is
/// still accepted when every node is within `tol` plus a small multiple of its
/// [`roundoff_floor`]; the outcome reports both numbers.
pub fn newton_solve(start: &PotentialGrid, rhs: &Rhs, opts: &NewtonOptions) -> Result<SolveOutcome> {
    if !(rhs.eps > 0.0) {
        return Err(Error::Invalid(format!("eps = {} must be > 0", rhs.eps)));
    }
    let layout = Layout::new(start.n_u(), start.n_t, start.geo.h());
    let mut grid = start.clone();
    grid.apply_pole_closure();
    let mut res = residual_vector(&grid, rhs, &layout)?;
    let mut damping = Vec::new();
    let mut history = vec![max_abs(&res)];
    let mut iterations = 0;
    while max_abs(&res) > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { max_iter: opts.max_iter, residual: max_abs(&res) });
        }
        let mut mat = jacobian(&grid, &layout);
        let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
        mat.equilibrate_rows(&mut step);
        mat.solve(&mut step)?;

        let base = norm2(&res);
        let mut alpha = 1.0;
        let mut last_err = None;
        let accepted = loop {
            let mut trial = grid.clone();
            layout.scatter(&mut trial.values, &step, |v, d| v + alpha * d);
            trial.apply_pole_closure();
            match residual_vector(&trial, rhs, &layout) {
                Ok(r) if norm2(&r) <= (1.0 - 1e-4 * alpha) * base => break Some((trial, r)),
                Ok(r) => {
                    last_err = Some(Error::NoConvergence { max_iter: iterations + 1, residual: max_abs(&r) });
                }
                Err(e) => last_err = Some(e),
            }
            alpha *= 0.5;
            if alpha < opts.min_step {
                break None;
            }
        };
        match accepted {
            Some((g, r)) => {
                grid = g;
                res = r;
                damping.push(alpha);
                history.push(max_abs(&res));
                iterations += 1;
            }
            None if within_tolerance(&grid, &res, &layout, opts.tol) => break,
            None => {
                return Err(match last_err {
                    Some(e @ Error::PositivityLoss { .. }) => e,
                    _ => Error::NoConvergence { max_iter: iterations, residual: max_abs(&res) },
                });
            }
        }
    }
    Ok(SolveOutcome {
        admissible: grid.is_admissible(),
        roundoff_floor: roundoff_floor(&grid).iter().fold(0.0, |a, v| a.max(*v)),
        final_residual: max_abs(&res),
        grid,
        iterations,
        damping_history: damping,
        residual_history: history,
    })
}

// ---------------------------------------------------------------------------
// Continuity family

/// Everything needed to run the schedule except the schedule itself.
#[derive(Debug, Clone)]
pub struct ContinuityProblem {
    pub geo: BackgroundGeometry,
    pub n_t: usize,
    pub boundary0: BoundarySpec,
    pub boundary1: BoundarySpec,
    /// Weight template; `η` is replaced per entry and `C₁` re-certified.
    pub weight: WeightSpec,
    pub f: Option<Array2<f64>>,
    pub newton: NewtonOptions,
}

impl ContinuityProblem {
    pub fn slices(&self, k: u64) -> (Vec<f64>, Vec<f64>) {
        (self.boundary0.sample(&self.geo, k), self.boundary1.sample(&self.geo, k))
    }

    pub fn rhs(&self, entry: &ScheduleEntry) -> Result<Rhs> {
        let w = self.weight.with_eta(entry.eta)?.certify(&self.geo)?;
        let r = Rhs::new(entry.eps, w);
        Ok(match &self.f {
            Some(f) => r.with_f(f.clone()),
            None => r,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EntryResult {
    pub entry: ScheduleEntry,
    pub rhs: Rhs,
    pub outcome: SolveOutcome,
    pub warm_started: bool,
}

#[derive(Debug)]
pub struct ContinuityRun {
    pub results: Vec<EntryResult>,
    /// The error that stopped the run early, tagged with its entry.
    pub failure: Option<Error>,
}

impl ContinuityRun {
    pub fn outcomes(&self) -> impl Iterator<Item = &SolveOutcome> {
        self.results.iter().map(|r| &r.outcome)
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// One JSON object per line: `{entry, eps, eta, iters, residual}`.
    pub fn convergence_log(&self) -> String {
        self.results
            .iter()
            .enumerate()
            .map(|(m, r)| {
                serde_json::json!({
                    "entry": m,
                    "eps": r.entry.eps,
                    "eta": r.entry.eta,
                    "iters": r.outcome.iterations,
                    "residual": r.outcome.final_residual,
                })
                .to_string()
                    + "\n"
            })
            .collect()
    }
}

/// Solves one schedule entry from a cold start.
pub fn solve_entry(problem: &ContinuityProblem, entry: &ScheduleEntry) -> Result<EntryResult> {
    let rhs = problem.rhs(entry)?;
    let (b0, b1) = problem.slices(entry.smoothing_k);
    let start = cold_start(&problem.geo, problem.n_t, &b0, &b1, &rhs)?;
    let outcome = newton_solve(&start, &rhs, &problem.newton)?;
    Ok(EntryResult { entry: *entry, rhs, outcome, warm_started: false })
}

/// Warm start: the previous solution with its slices replaced by the new ones,
/// the change spread linearly in `t`, then convexified by the smallest
/// `M(t² − t)` that gives `det Hess F / F⁰_uu ≥ rhs / 2` again.
fn warm_start(prev: &PotentialGrid, b0: &[f64], b1: &[f64], rhs: &Rhs) -> Result<PotentialGrid> {
    let mut g = prev.clone();
    let (p0, p1) = (prev.boundary0(), prev.boundary1());
    for i in 0..g.n_u() {
        for j in 0..g.n_t {
            let t = g.t(j);
            g.values[[i, j]] += (1.0 - t) * (b0[i] - p0[i]) + t * (b1[i] - p1[i]);
        }
    }
    g.apply_pole_closure();
    let mut need: f64 = 0.0;
    for i in 1..g.n_u() - 1 {
        for j in 1..g.n_t - 1 {
            let m = g.metric(i, j);
            if !(m.f_uu > 0.0) {
                return Err(Error::PositivityLoss { i, j, what: "F_uu", value: m.f_uu });
            }
            let target = 0.5 * rhs.value(&g.geo, i, j) * m.f0_uu;
            need = need.max((m.f_tu * m.f_tu + target - m.f_tt * m.f_uu) / (2.0 * m.f_uu));
        }
    }
    if need > 0.0 {
        for i in 0..g.n_u() {
            for j in 0..g.n_t {
                let t = g.t(j);
                g.values[[i, j]] += need * (t * t - t);
            }
        }
    }
    Ok(g)
}

/// Parameters along the homotopy from one schedule entry to the next:
/// `ε` and `η` geometric in `λ`, boundary slices blended linearly (a convex
/// combination of u-admissible slices is u-admissible).
struct Waypoint {
    entry: ScheduleEntry,
    b0: Vec<f64>,
    b1: Vec<f64>,
}

fn blend(problem: &ContinuityProblem, from: &ScheduleEntry, to: &ScheduleEntry, lam: f64) -> Waypoint {
    let geo_mix = |a: f64, b: f64| (a.ln() * (1.0 - lam) + b.ln() * lam).exp();
    let (a0, a1) = problem.slices(from.smoothing_k);
    let (c0, c1) = problem.slices(to.smoothing_k);
    let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (1.0 - lam) * p + lam * q).collect();
    Waypoint {
        entry: if lam < 1.0 {
            ScheduleEntry { eps: geo_mix(from.eps, to.eps), eta: geo_mix(from.eta, to.eta), smoothing_k: from.smoothing_k }
        } else {
            *to
        },
        b0: if lam < 1.0 { mix(&a0, &c0) } else { c0 },
        b1: if lam < 1.0 { mix(&a1, &c1) } else { c1 },
    }
}

/// Smallest homotopy step tried before an entry is declared failed.
const MIN_HOMOTOPY_STEP: f64 = 1.0 / 256.0;
const HOMOTOPY_MAX_ITER: usize = 25;

/// Moves a solution at `from` to one at `to`: a direct warm start first, then
/// smaller homotopy steps whenever Newton fails. Returns the outcome at `to`
/// with iterations summed over the sub-steps.
fn advance(problem: &ContinuityProblem, prev: &EntryResult, to: &ScheduleEntry) -> Result<EntryResult> {
    let from = prev.entry;
    let mut grid = prev.outcome.grid.clone();
    let (mut done, mut step) = (0.0f64, 1.0f64);
    let mut total = 0;
    // a sub-step that needs many damped iterations is cheaper to halve
    let opts = NewtonOptions { max_iter: problem.newton.max_iter.min(HOMOTOPY_MAX_ITER), ..problem.newton };
    loop {
        let lam = (done + step).min(1.0);
        let wp = blend(problem, &from, to, lam);
        let rhs = problem.rhs(&wp.entry)?;
        let attempt = warm_start(&grid, &wp.b0, &wp.b1, &rhs).and_then(|start| newton_solve(&start, &rhs, &opts));
        match attempt {
            Ok(mut outcome) => {
                total += outcome.iterations;
                done = lam;
                if done >= 1.0 {
                    outcome.iterations = total;
                    return Ok(EntryResult { entry: *to, rhs, outcome, warm_started: true });
                }
                grid = outcome.grid;
                step *= 2.0;
            }
            Err(e) => {
                step *= 0.5;
                if step < MIN_HOMOTOPY_STEP {
                    return Err(e);
                }
            }
        }
    }
}

/// Solves the schedule in order, each entry continued from the previous one;
/// the first entry (and any entry whose continuation fails) starts cold.
pub fn continuity_run(problem: &ContinuityProblem, sched: &Schedule) -> ContinuityRun {
    let mut results: Vec<EntryResult> = Vec::new();
    for (m, entry) in sched.entries.iter().enumerate() {
        let attempt = match results.last() {
            Some(prev) => advance(problem, prev, entry).or_else(|warm| solve_entry(problem, entry).map_err(|_| warm)),
            None => solve_entry(problem, entry),
        };
        match attempt {
            Ok(r) => results.push(r),
            Err(e) => {
                return ContinuityRun { results, failure: Some(Error::Entry { entry: m, source: Box::new(e) }) };
            }
        }
    }
    ContinuityRun { results, failure: None }
}
