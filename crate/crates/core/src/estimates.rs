//! The estimate auditor: monitored suprema, the maximum-principle audit,
//! Hölder seminorms, identity checks and the Legendre-transform oracle for the
//! ε → 0 limit.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{geodesic_operator, linearized_apply, partials, PotentialGrid, Rhs};
use crate::geometry::{fs_density, fs_potential, logistic, section_norm_sq, BackgroundGeometry, DivisorPoint};
use crate::solver::BoundarySpec;
use crate::weights::{meridian_coordinate, weight_value, WeightSpec};

/// Complex dimension of the sphere.
const N: f64 = 1.0;

fn interior_rows(grid: &PotentialGrid) -> std::ops::Range<usize> {
    1..grid.n_u() - 1
}

// ---------------------------------------------------------------------------
// Weighted Laplacian and the maximum principle

/// `ζ_η^p (n + Δφ) = ζ_η^p F_uu / F⁰_uu` at `(i, j)`.
pub fn weighted_laplacian(grid: &PotentialGrid, w: &WeightSpec, i: usize, j: usize) -> f64 {
    weight_value(w, grid.geo.u(i)).powf(w.p) * grid.metric(i, j).ratio()
}

/// `(max over 0 < t < 1, max over t ∈ {0, 1})` of the weighted Laplacian,
/// both over the rows where the equation is imposed.
pub fn weighted_laplacian_sup(grid: &PotentialGrid, w: &WeightSpec) -> (f64, f64) {
    let mut interior = f64::NEG_INFINITY;
    let mut boundary = f64::NEG_INFINITY;
    for i in interior_rows(grid) {
        for j in 0..grid.n_t {
            let v = weighted_laplacian(grid, w, i, j);
            if j == 0 || j + 1 == grid.n_t {
                boundary = boundary.max(v);
            } else {
                interior = interior.max(v);
            }
        }
    }
    (interior, boundary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MpBranch {
    /// Interior maximum of `Q` does not exceed its boundary maximum.
    BoundaryMax,
    /// Interior maximum exceeds the boundary one, but `w` there obeys the interior bound.
    InteriorBound,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpAudit {
    pub interior_max: f64,
    pub boundary_max: f64,
    /// `C = B + p C₁ + 1`.
    pub constant_c: f64,
    /// `max ε e^f ((n + 1) C)^n` over the interior.
    pub interior_bound: f64,
    pub tol: f64,
    pub argmax: (usize, usize),
    pub w_at_argmax: f64,
    pub branch: MpBranch,
    pub pass: bool,
}

/// Audits `Q = log(ζ_η^p (n + Δφ)) − Cφ + t²`.
///
/// The tolerance is `1e−6 (1 + max|Q|) + discretization`, the second term
/// supplied by the caller (for instance from one grid refinement).
pub fn max_principle_audit(grid: &PotentialGrid, rhs: &Rhs, discretization: f64) -> MpAudit {
    let w = &rhs.weight;
    let c = grid.geo.bisectional_lower + w.p * w.c1 + 1.0;
    let bound_at = |i: usize, j: usize| rhs.eps * rhs.f_at(i, j).exp() * ((N + 1.0) * c).powf(N);
    let mut q = Array2::from_elem((grid.n_u(), grid.n_t), f64::NAN);
    let mut broken = None;
    for i in interior_rows(grid) {
        for j in 0..grid.n_t {
            let wv = weighted_laplacian(grid, w, i, j);
            if !(wv > 0.0 && wv.is_finite()) {
                broken.get_or_insert((i, j, wv));
            }
            let t = grid.t(j);
            q[[i, j]] = wv.ln() - c * grid.values[[i, j]] + t * t;
        }
    }
    let mut interior_max = f64::NEG_INFINITY;
    let mut boundary_max = f64::NEG_INFINITY;
    let mut argmax = (1, 1);
    let mut scale: f64 = 0.0;
    let mut interior_bound: f64 = 0.0;
    for i in interior_rows(grid) {
        for j in 0..grid.n_t {
            let v = q[[i, j]];
            if v.is_finite() {
                scale = scale.max(v.abs());
            }
            if j == 0 || j + 1 == grid.n_t {
                boundary_max = boundary_max.max(v);
            } else {
                interior_bound = interior_bound.max(bound_at(i, j));
                if v > interior_max || v.is_nan() && !interior_max.is_nan() {
                    interior_max = v;
                    argmax = (i, j);
                }
            }
        }
    }
    let tol = 1e-6 * (1.0 + scale) + discretization;
    let w_at_argmax = weighted_laplacian(grid, w, argmax.0, argmax.1);
    let branch = if broken.is_some() || !interior_max.is_finite() {
        MpBranch::Failed
    } else if interior_max <= boundary_max + tol {
        MpBranch::BoundaryMax
    } else {
        // every interior node within `tol` of the maximum counts as a maximizer
        let ok = interior_rows(grid).all(|i| {
            (1..grid.n_t - 1).all(|j| {
                q[[i, j]] < interior_max - tol || weighted_laplacian(grid, w, i, j) <= bound_at(i, j) * (1.0 + tol)
            })
        });
        if ok {
            MpBranch::InteriorBound
        } else {
            MpBranch::Failed
        }
    };
    MpAudit {
        interior_max,
        boundary_max,
        constant_c: c,
        interior_bound,
        tol,
        argmax,
        w_at_argmax,
        pass: branch != MpBranch::Failed,
        branch,
    }
}

// ---------------------------------------------------------------------------
// Gradients

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientSup {
    /// `max |∇φ|_ω (|s|²_h)^{(2 − 2β − μ)/2}`.
    pub weighted: f64,
    /// `max |∇φ|_ω`.
    pub unweighted: f64,
    pub mu: f64,
}

/// Weighted and plain sup of the space gradient; `|s|²_h` is the norm of the
/// section cutting out both divisor points.
pub fn weighted_gradient_sup(grid: &PotentialGrid, beta: f64, mu: f64) -> Result<GradientSup> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Invalid(format!("μ = {mu} must lie in [0, 1)")));
    }
    let expo = (2.0 - 2.0 * beta - mu) / 2.0;
    let mut weighted: f64 = 0.0;
    let mut unweighted: f64 = 0.0;
    for i in 0..grid.n_u() {
        let u = grid.geo.u(i);
        let s2 = section_norm_sq(u, DivisorPoint::Zero) * section_norm_sq(u, DivisorPoint::Infinity);
        let factor = s2.powf(expo);
        for j in 0..grid.n_t {
            let g = grid.gradient_norm(i, j);
            unweighted = unweighted.max(g);
            weighted = weighted.max(g * factor);
        }
    }
    Ok(GradientSup { weighted, unweighted, mu })
}

/// `max |φ_t|`, one-sided at `t = 0, 1`.
pub fn time_derivative_sup(grid: &PotentialGrid) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..grid.n_u() {
        for j in 0..grid.n_t {
            best = best.max(partials(grid, i, j).t.abs());
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Hölder seminorm

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderOptions {
    /// Above this many pairs the node set is thinned in `u`, keeping the
    /// extreme rows and both sides of the equator.
    pub max_pairs: f64,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self { max_pairs: 1e9 }
    }
}

pub fn holder_seminorm(grid: &PotentialGrid, delta: f64, slice: Option<usize>) -> Result<f64> {
    holder_seminorm_with(grid, delta, slice, HolderOptions::default())
}

/// `max |φ(a) − φ(b)| / d(a, b)^δ` over node pairs, `d² = (s_a − s_b)² + (t_a − t_b)²`
/// with `s` the ω-arclength along a meridian.
///
/// The search is exact over the selected nodes; pairs that cannot beat the
/// running maximum (given the oscillation of `φ`) are skipped.
pub fn holder_seminorm_with(grid: &PotentialGrid, delta: f64, slice: Option<usize>, opts: HolderOptions) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Invalid(format!("δ = {delta} must lie in (0, 1]")));
    }
    let cols: Vec<usize> = match slice {
        Some(j) if j < grid.n_t => vec![j],
        Some(j) => return Err(Error::Invalid(format!("slice {j} outside the grid"))),
        None => (0..grid.n_t).collect(),
    };
    let rows = holder_rows(grid.n_u(), cols.len(), opts.max_pairs, |i| grid.geo.u(i));
    let s: Vec<f64> = rows.iter().map(|&i| meridian_coordinate(grid.geo.u(i))).collect();
    let t: Vec<f64> = cols.iter().map(|&j| grid.t(j)).collect();
    let v: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| grid.values[[i, j]]).collect()).collect();
    let (lo, hi) = v.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));

    let quotient = |a: (usize, usize), b: (usize, usize)| {
        let ds = s[a.0] - s[b.0];
        let dt = t[a.1] - t[b.1];
        let d2 = ds * ds + dt * dt;
        (v[a.0][a.1] - v[b.0][b.1]).abs() / d2.powf(0.5 * delta)
    };
    // seed with neighbours so the pruning bites early
    let mut best: f64 = 0.0;
    for a in 0..rows.len() {
        for b in 0..t.len() {
            if a + 1 < rows.len() {
                best = best.max(quotient((a, b), (a + 1, b)));
            }
            if b + 1 < t.len() {
                best = best.max(quotient((a, b), (a, b + 1)));
            }
        }
    }
    let reach = |span: f64, best: f64| if best > 0.0 { (span / best).powf(2.0 / delta) } else { f64::INFINITY };
    for a in 0..rows.len() {
        for b in 0..t.len() {
            let x = v[a][b];
            let span = (hi - x).max(x - lo);
            let mut r2 = reach(span, best);
            for a2 in a..rows.len() {
                let ds = s[a2] - s[a];
                if ds * ds >= r2 {
                    break;
                }
                let start = if a2 == a { b + 1 } else { 0 };
                for b2 in start..t.len() {
                    let dt = t[b2] - t[b];
                    let d2 = ds * ds + dt * dt;
                    if d2 >= r2 {
                        continue;
                    }
                    let diff = (x - v[a2][b2]).abs();
                    if diff <= best * 1e-300_f64.max(0.0) {
                        continue;
                    }
                    let q = diff / d2.powf(0.5 * delta);
                    if q > best {
                        best = q;
                        r2 = reach(span, best);
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Row subset for the Hölder search: every row when affordable, otherwise a
/// stride chosen so the pair count fits, always keeping the first and last
/// rows and the rows nearest the equator on both sides.
fn holder_rows(n_u: usize, n_cols: usize, max_pairs: f64, u: impl Fn(usize) -> f64) -> Vec<usize> {
    let pairs = |rows: usize| {
        let n = (rows * n_cols) as f64;
        n * (n - 1.0) / 2.0
    };
    let mut stride = 1;
    while pairs(n_u.div_ceil(stride) + 4) > max_pairs && stride < n_u {
        stride += 1;
    }
    if stride == 1 {
        return (0..n_u).collect();
    }
    let mut rows: Vec<usize> = (0..n_u).step_by(stride).collect();
    let neg = (0..n_u).filter(|&i| u(i) < 0.0).max();
    let pos = (0..n_u).find(|&i| u(i) > 0.0);
    rows.extend([Some(n_u - 1), neg, pos].into_iter().flatten());
    rows.sort_unstable();
    rows.dedup();
    rows
}

// ---------------------------------------------------------------------------
// Legendre oracle

/// `F_k = F⁰ + b` for one boundary slice, with its first two derivatives.
struct Slice<'a> {
    spec: &'a BoundarySpec,
    k: u64,
}

impl Slice<'_> {
    fn value(&self, u: f64) -> f64 {
        fs_potential(u) + self.spec.value(self.k, u)
    }
    fn slope(&self, u: f64) -> f64 {
        logistic(u) + self.spec.slope(self.k, u)
    }
    fn curvature(&self, u: f64) -> f64 {
        fs_density(u) + self.spec.curvature(self.k, u)
    }
}

/// Safeguarded Newton–bisection for an increasing `f` on `[lo, hi]`.
fn increasing_root(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64, target: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        let r = fx - target;
        if r == 0.0 || (dfx > 0.0 && (r / dfx).abs() <= 1e-16 * (1.0 + x.abs())) {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return x;
        }
        let newton = x - r / dfx;
        x = if dfx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    x
}

/// Inverse of the slope map of one slice, seeded from a bracket table.
struct SlopeInverse<'a> {
    slice: Slice<'a>,
    table: Vec<(f64, f64)>,
}

impl<'a> SlopeInverse<'a> {
    fn new(slice: Slice<'a>, span: f64, n_x: usize) -> Self {
        let n = n_x.max(3);
        let table = (0..n)
            .map(|m| {
                let u = -span + 2.0 * span * m as f64 / (n - 1) as f64;
                (u, slice.slope(u))
            })
            .collect();
        Self { slice, table }
    }

    /// `u` with `F'(u) = y`, and `du/dy = 1/F''(u)`.
    fn solve(&self, y: f64) -> (f64, f64) {
        let pos = self.table.partition_point(|&(_, s)| s < y);
        let (mut lo, mut hi) = match pos {
            0 => (self.table[0].0 - 1.0, self.table[0].0),
            p if p == self.table.len() => (self.table[p - 1].0, self.table[p - 1].0 + 1.0),
            p => (self.table[p - 1].0, self.table[p].0),
        };
        while self.slice.slope(lo) > y {
            lo -= 2.0 * (hi - lo);
        }
        while self.slice.slope(hi) < y {
            hi += 2.0 * (hi - lo);
        }
        let u = increasing_root(|x| (self.slice.slope(x), self.slice.curvature(x)), lo, hi, y);
        (u, 1.0 / self.slice.curvature(u))
    }
}

/// Exact ε = 0 geodesic between two S¹-invariant slices: the Legendre duals
/// `G_k` are interpolated linearly in `t` and transformed back.
///
/// At each node the dual point `y` solves `(1−t) u₀(y) + t u₁(y) = u`, and then
/// `F_t(u) = (1−t) F₀(u₀) + t F₁(u₁)`. `n_x` sets the size of the bracket
/// table used to seed the inner root solves.
pub fn legendre_oracle(
    b0: &BoundarySpec,
    b1: &BoundarySpec,
    k: u64,
    geo: &BackgroundGeometry,
    n_t: usize,
    n_x: usize,
) -> Result<PotentialGrid> {
    let span = geo.u_max.abs().max(geo.u_min.abs()) + 40.0;
    for spec in [b0, b1] {
        let sl = Slice { spec, k };
        for m in 0..=4000 {
            let u = -span + 2.0 * span * m as f64 / 4000.0;
            let c = sl.curvature(u);
            if !(c > 0.0) {
                return Err(Error::NonConvexBoundary { u, value: c });
            }
        }
    }
    let inv0 = SlopeInverse::new(Slice { spec: b0, k }, span, n_x);
    let inv1 = SlopeInverse::new(Slice { spec: b1, k }, span, n_x);
    let mut grid = PotentialGrid::zeros(geo.clone(), n_t)?;
    for i in 0..geo.n_u {
        let u = geo.u(i);
        for j in 0..n_t {
            let t = grid.t(j);
            let mixed = |v: f64| {
                let y = logistic(v);
                let (u0, d0) = inv0.solve(y);
                let (u1, d1) = inv1.solve(y);
                let dy = y * (1.0 - y);
                ((1.0 - t) * u0 + t * u1, ((1.0 - t) * d0 + t * d1) * dy)
            };
            let (mut lo, mut hi) = (u - 8.0, u + 8.0);
            while mixed(lo).0 > u {
                lo -= 2.0 * (hi - lo);
            }
            while mixed(hi).0 < u {
                hi += 2.0 * (hi - lo);
            }
            let v = increasing_root(mixed, lo, hi, u);
            let y = logistic(v);
            let (u0, _) = inv0.solve(y);
            let (u1, _) = inv1.solve(y);
            let f = (1.0 - t) * inv0.slice.value(u0) + t * inv1.slice.value(u1);
            grid.values[[i, j]] = f - fs_potential(u);
        }
    }
    Ok(grid)
}

/// `sup |φ_ε − φ_oracle|` for each solved grid.
pub fn oracle_comparison<'a>(grids: impl IntoIterator<Item = &'a PotentialGrid>, oracle: &PotentialGrid) -> Result<Vec<f64>> {
    grids.into_iter().map(|g| g.max_abs_diff(oracle)).collect()
}

// ---------------------------------------------------------------------------
// Identity checks

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernCheck {
    /// `min [(log ζ)'' − (ξ/ζ)(log ξ)''] / F⁰_uu`.
    pub first_margin: f64,
    /// `min [(ξ/ζ)(log ξ)'' + C₁ F⁰_uu] / F⁰_uu`.
    pub second_margin: f64,
    /// The constant used: the sup of `−(log ξ)'' / F⁰_uu` over the grid.
    pub c1: f64,
}

impl ChernCheck {
    pub fn worst(&self) -> f64 {
        self.first_margin.min(self.second_margin)
    }
}

/// Checks `(log ζ_η)'' ≥ (ξ/ζ_η)(log ξ)'' ≥ −C₁ F⁰_uu` from the closed-form jets.
pub fn chern_bound_check(w: &WeightSpec, geo: &BackgroundGeometry) -> Result<ChernCheck> {
    let mut c1: f64 = 0.0;
    let mut jets = Vec::with_capacity(geo.n_u);
    for u in geo.nodes() {
        let (_, l2) = w
            .bare_log_jet(u)
            .ok_or_else(|| Error::Invalid("weight has no closed-form log jet".into()))?;
        let dens = fs_density(u);
        c1 = c1.max(-l2 / dens);
        jets.push((u, l2, dens));
    }
    let mut first = f64::INFINITY;
    let mut second = f64::INFINITY;
    for (u, l2, dens) in jets {
        let xi = w.bare(u);
        let zeta = xi + w.eta;
        let (_, lhs) = w.log_second_derivative(u);
        let mid = xi / zeta * l2;
        first = first.min((lhs - mid) / dens);
        second = second.min((mid + c1 * dens) / dens);
    }
    Ok(ChernCheck { first_margin: first, second_margin: second, c1 })
}

/// `max |𝔇 log ψ − (𝔇ψ/ψ − |∂ψ|²_φ/ψ² − 𝒜(ψ))|` over equation nodes, with
/// `|∂ψ|²_φ = ψ_u²/F_uu` and `𝒜(ψ) = (ψ_t − F_tu ψ_u / F_uu)² / (ψ² 𝒢)`.
pub fn linlog_identity_check(grid: &PotentialGrid, psi: &Array2<f64>) -> Result<f64> {
    if psi.dim() != grid.values.dim() {
        return Err(Error::GridMismatch("ψ must share the grid shape".into()));
    }
    if let Some(v) = psi.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Invalid(format!("ψ must be positive (found {v})")));
    }
    let log_psi = psi.mapv(f64::ln);
    let mut worst: f64 = 0.0;
    for i in interior_rows(grid) {
        for j in 1..grid.n_t - 1 {
            let m = grid.metric(i, j);
            let g = geodesic_operator(grid, i, j)?;
            let lhs = linearized_apply(grid, &log_psi, i, j)?;
            let d = grid.partials_of(psi, i, j);
            let p = psi[[i, j]];
            let grad = d.u * d.u / m.f_uu;
            let twist = (d.t - m.f_tu * d.u / m.f_uu).powi(2) / (p * p * g);
            let rhs = linearized_apply(grid, psi, i, j)? / p - grad / (p * p) - twist;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// The field `n + Δφ = F_uu / F⁰_uu` at every node.
pub fn laplacian_ratio_field(grid: &PotentialGrid) -> Array2<f64> {
    Array2::from_shape_fn((grid.n_u(), grid.n_t), |(i, j)| grid.metric(i, j).ratio())
}

// ---------------------------------------------------------------------------
// Report

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub eps: f64,
    pub eta: f64,
    pub sup_dt_phi: f64,
    pub sup_weighted_lap: f64,
    pub boundary_weighted_lap: f64,
    pub sup_weighted_grad: f64,
    pub sup_weighted_grad_mu: f64,
    pub sup_unweighted_grad: f64,
    /// Keys are the exponents δ printed with `{}`.
    pub holder_seminorm: BTreeMap<String, f64>,
    pub mp_interior_max: f64,
    pub mp_boundary_max: f64,
    #[serde(rename = "mp_constant_C")]
    pub mp_constant_c: f64,
    pub mp_interior_bound: f64,
    pub mp_branch: MpBranch,
    pub truncation_drift: Option<f64>,
    pub verdicts: BTreeMap<String, String>,
    pub config: serde_json::Value,
}

/// What to audit on one solved grid.
#[derive(Debug, Clone)]
pub struct AuditRequest<'a> {
    pub grid: &'a PotentialGrid,
    pub rhs: &'a Rhs,
    pub eta: f64,
    pub beta: f64,
    pub mu: f64,
    pub deltas: &'a [f64],
    pub mp_discretization: f64,
    pub truncation_drift: Option<f64>,
    pub config: serde_json::Value,
}

fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

pub fn build_report(req: &AuditRequest<'_>) -> Result<EstimateReport> {
    let grid = req.grid;
    let (interior, boundary) = weighted_laplacian_sup(grid, &req.rhs.weight);
    let mp = max_principle_audit(grid, req.rhs, req.mp_discretization);
    let grad = weighted_gradient_sup(grid, req.beta, req.mu)?;
    let mut holder = BTreeMap::new();
    for &d in req.deltas {
        holder.insert(format!("{d}"), holder_seminorm(grid, d, None)?);
    }
    let mut verdicts = BTreeMap::new();
    verdicts.insert("admissible".to_string(), verdict(grid.is_admissible()));
    verdicts.insert("max_principle".to_string(), verdict(mp.pass));
    verdicts.insert(
        "weighted_laplacian_bound".to_string(),
        verdict(interior <= 1.1 * boundary + mp.interior_bound),
    );
    let finite = [interior, boundary, grad.weighted, mp.interior_max].iter().all(|v| v.is_finite());
    verdicts.insert("finite_suprema".to_string(), verdict(finite));
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        eps: req.rhs.eps,
        eta: req.eta,
        sup_dt_phi: time_derivative_sup(grid),
        sup_weighted_lap: interior,
        boundary_weighted_lap: boundary,
        sup_weighted_grad: grad.weighted,
        sup_weighted_grad_mu: grad.mu,
        sup_unweighted_grad: grad.unweighted,
        holder_seminorm: holder,
        mp_interior_max: mp.interior_max,
        mp_boundary_max: mp.boundary_max,
        mp_constant_c: mp.constant_c,
        mp_interior_bound: mp.interior_bound,
        mp_branch: mp.branch,
        truncation_drift: req.truncation_drift,
        verdicts,
        config: req.config.clone(),
    })
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v == "pass")
    }

    /// The monitored suprema, by name.
    pub fn suprema(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("sup_dt_phi".into(), self.sup_dt_phi);
        m.insert("sup_weighted_lap".into(), self.sup_weighted_lap);
        m.insert("boundary_weighted_lap".into(), self.boundary_weighted_lap);
        m.insert("sup_weighted_grad".into(), self.sup_weighted_grad);
        m.insert("sup_unweighted_grad".into(), self.sup_unweighted_grad);
        for (d, v) in &self.holder_seminorm {
            m.insert(format!("holder_seminorm[{d}]"), *v);
        }
        m
    }
}

/// Largest relative change of any monitored supremum between two reports,
/// with the name of the quantity attaining it.
pub fn supremum_drift(a: &EstimateReport, b: &EstimateReport) -> (f64, String) {
    let sb = b.suprema();
    a.suprema()
        .into_iter()
        .filter_map(|(k, va)| sb.get(&k).map(|vb| ((va - vb).abs() / va.abs().max(vb.abs()).max(f64::MIN_POSITIVE), k)))
        .fold((0.0, String::new()), |acc, x| if x.0 > acc.0 { x } else { acc })
}
