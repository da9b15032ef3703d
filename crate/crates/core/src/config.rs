//! Run configuration: flat `key = value` text with dotted section prefixes.
//!
//! ```text
//! # conical geodesic, β = 3/4
//! grid.u_max = 16
//! grid.n_u = 129
//! grid.n_t = 65
//! divisor.beta = 0.75
//! divisor.c_fraction = 0.5
//! weight.kind = divisor
//! schedule.eps_list = 1e-1, 1e-2, 1e-3, 1e-4
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PotentialGrid;
use crate::geometry::{c_max, BackgroundGeometry, DivisorData, DivisorPoint};
use crate::solver::{BoundarySpec, ContinuityProblem, NewtonOptions, Schedule};
use crate::weights::{WeightKind, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    Zero,
    Conical,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    /// `|s₀|²_h |s_∞|²_h`.
    Divisor,
    SectionZero,
    SectionInfinity,
    Unit,
    Distance { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub u_max: f64,
    pub n_u: usize,
    pub n_t: usize,
    pub beta: f64,
    /// Resolved conical coefficient.
    pub c: f64,
    pub weight: WeightChoice,
    pub p: f64,
    pub eps_list: Vec<f64>,
    pub boundary0: BoundaryChoice,
    pub boundary1: BoundaryChoice,
    /// Constant added to the `t = 1` slice.
    pub t1_shift: f64,
    pub bump_amplitude: f64,
    pub f_field: Option<PathBuf>,
    pub tol: f64,
    pub max_iter: usize,
    pub holder_deltas: Vec<f64>,
    pub gradient_mu: f64,
    pub oracle_n_x: usize,
    /// Stored grids for `audit`, one per schedule entry.
    pub audit_grids: Vec<PathBuf>,
    /// Repeat sweeps with `u_max + 2` and report the change of every supremum.
    pub truncation_drift: bool,
}

const KEYS: &[&str] = &[
    "grid.u_max",
    "grid.n_u",
    "grid.n_t",
    "divisor.beta",
    "divisor.c",
    "divisor.c_fraction",
    "weight.kind",
    "weight.p",
    "weight.exponent",
    "schedule.eps_list",
    "schedule.eps_start",
    "schedule.eps_end",
    "schedule.count",
    "boundary.t0",
    "boundary.t1",
    "boundary.t1_shift",
    "boundary.bump",
    "f_field",
    "tol",
    "max_iter",
    "audit.holder_deltas",
    "audit.mu",
    "audit.grids",
    "audit.truncation_drift",
    "oracle.n_x",
];

/// Raw `key → (line, value)` pairs.
fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, got `{body}`") })?;
        let key = k.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse { line, message: format!("unknown key `{key}`") });
        }
        if out.insert(key.clone(), (line, v.trim().to_string())).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    Ok(out)
}

struct Fields {
    raw: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn text(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(|(_, v)| v.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line: *line, message: format!("`{key}`: cannot parse `{v}`") }),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse { line: *line, message: format!("`{key}`: cannot parse `{}`", s.trim()) })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.raw.get(key).map_or(0, |(l, _)| *l)
    }
}

fn boundary_choice(f: &Fields, key: &str, default: BoundaryChoice) -> Result<BoundaryChoice> {
    match f.text(key) {
        None => Ok(default),
        Some("zero") => Ok(BoundaryChoice::Zero),
        Some("conical") => Ok(BoundaryChoice::Conical),
        Some("bump") => Ok(BoundaryChoice::Bump),
        Some(v) => Err(Error::Parse { line: f.line(key), message: format!("`{key}`: expected zero|conical|bump, got `{v}`") }),
    }
}

/// Reads and validates a configuration file; relative paths inside it are
/// resolved against the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig> {
    let f = Fields { raw: tokenize(text)? };
    let u_max = f.parse("grid.u_max")?.unwrap_or(16.0);
    let n_u = f.parse("grid.n_u")?.unwrap_or(129);
    let n_t = f.parse("grid.n_t")?.unwrap_or(65);
    let beta: f64 = f.parse("divisor.beta")?.unwrap_or(0.75);
    let p = f.parse("weight.p")?.unwrap_or(beta.max(1.0 - beta));
    let weight = match f.text("weight.kind").unwrap_or("divisor") {
        "divisor" => WeightChoice::Divisor,
        "section_zero" => WeightChoice::SectionZero,
        "section_infinity" => WeightChoice::SectionInfinity,
        "unit" => WeightChoice::Unit,
        "distance" => WeightChoice::Distance { exponent: f.parse("weight.exponent")?.unwrap_or(1.0) },
        v => {
            return Err(Error::Parse {
                line: f.line("weight.kind"),
                message: format!("`weight.kind`: expected divisor|section_zero|section_infinity|unit|distance, got `{v}`"),
            })
        }
    };
    let eps_list = match f.list("schedule.eps_list")? {
        Some(l) => l,
        None => {
            let start: f64 = f.parse("schedule.eps_start")?.unwrap_or(1e-1);
            let end: f64 = f.parse("schedule.eps_end")?.unwrap_or(1e-4);
            let count: usize = f.parse("schedule.count")?.unwrap_or(4);
            if count < 2 || !(start > 0.0 && end > 0.0) {
                vec![start]
            } else {
                // interpolate decimal exponents so decades come out exact
                let (a, b) = (start.log10(), end.log10());
                (0..count).map(|m| 10f64.powf(a + (b - a) * m as f64 / (count - 1) as f64)).collect()
            }
        }
    };
    let boundary0 = boundary_choice(&f, "boundary.t0", BoundaryChoice::Zero)?;
    let boundary1 = boundary_choice(&f, "boundary.t1", BoundaryChoice::Conical)?;

    let mut problems = Vec::new();
    if !(n_u >= 9 && n_u % 2 == 1) {
        problems.push(format!("grid.n_u = {n_u} must be odd and ≥ 9"));
    }
    if !(n_t >= 9 && n_t % 2 == 1) {
        problems.push(format!("grid.n_t = {n_t} must be odd and ≥ 9"));
    }
    if !(u_max > 0.0) {
        problems.push(format!("grid.u_max = {u_max} must be > 0"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        problems.push(format!("divisor.beta = {beta} must lie in (0, 1]"));
    }
    if !(p > 0.0) {
        problems.push(format!("weight.p = {p} must be > 0"));
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        problems.push("schedule eps values must be > 0".into());
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        problems.push("schedule eps_list must be strictly decreasing".into());
    }

    let c = if problems.is_empty() {
        resolve_c(&f, beta, u_max, n_u, &mut problems)?
    } else {
        0.0
    };
    let tol = f.parse("tol")?.unwrap_or(1e-8);
    if !(tol > 0.0) {
        problems.push(format!("tol = {tol} must be > 0"));
    }
    let max_iter = f.parse("max_iter")?.unwrap_or(60);
    if max_iter == 0 {
        problems.push("max_iter must be ≥ 1".into());
    }
    let holder_deltas = f.list("audit.holder_deltas")?.unwrap_or_else(|| vec![0.45]);
    if holder_deltas.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
        problems.push("audit.holder_deltas must lie in (0, 1]".into());
    }
    let gradient_mu = f.parse("audit.mu")?.unwrap_or(0.9);
    if !(0.0..1.0).contains(&gradient_mu) {
        problems.push(format!("audit.mu = {gradient_mu} must lie in [0, 1)"));
    }
    let bump_amplitude: f64 = f.parse("boundary.bump")?.unwrap_or(0.3);
    if (boundary0 == BoundaryChoice::Bump || boundary1 == BoundaryChoice::Bump) && !(bump_amplitude > -0.25 && bump_amplitude < 0.5) {
        problems.push(format!("boundary.bump = {bump_amplitude} breaks convexity (need −1/4 < a < 1/2)"));
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let paths = |v: &str| -> Vec<PathBuf> {
        v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| base.join(s)).collect()
    };
    Ok(RunConfig {
        u_max,
        n_u,
        n_t,
        beta,
        c,
        weight,
        p,
        eps_list,
        boundary0,
        boundary1,
        t1_shift: f.parse("boundary.t1_shift")?.unwrap_or(0.0),
        bump_amplitude,
        f_field: f.text("f_field").map(|v| base.join(v)),
        tol,
        max_iter,
        holder_deltas,
        gradient_mu,
        oracle_n_x: f.parse("oracle.n_x")?.unwrap_or(256),
        audit_grids: f.text("audit.grids").map(paths).unwrap_or_default(),
        truncation_drift: f.parse("audit.truncation_drift")?.unwrap_or(false),
    })
}

/// `divisor.c` if given (checked against the admissible maximum), else
/// `divisor.c_fraction · c_max` with fraction 0.5 by default.
fn resolve_c(f: &Fields, beta: f64, u_max: f64, n_u: usize, problems: &mut Vec<String>) -> Result<f64> {
    let geo = BackgroundGeometry::new(u_max, n_u)?;
    let cmax = c_max(beta, beta, &geo)?;
    match (f.parse::<f64>("divisor.c")?, f.parse::<f64>("divisor.c_fraction")?) {
        (Some(_), Some(_)) => {
            problems.push("give only one of divisor.c and divisor.c_fraction".into());
            Ok(0.0)
        }
        (Some(c), None) => {
            if !(c >= 0.0 && c < cmax) {
                problems.push(format!("divisor.c = {c} outside [0, c_max = {cmax:.4})"));
            }
            Ok(c)
        }
        (None, frac) => {
            let frac = frac.unwrap_or(0.5);
            if !(0.0..1.0).contains(&frac) {
                problems.push(format!("divisor.c_fraction = {frac} must lie in [0, 1)"));
            }
            Ok(if cmax.is_finite() { frac * cmax } else { frac })
        }
    }
}

impl RunConfig {
    pub fn geometry(&self) -> Result<BackgroundGeometry> {
        BackgroundGeometry::new(self.u_max, self.n_u)
    }

    /// The same run with both grid spacings halved `k` times.
    pub fn refined(&self, k: u32) -> Self {
        let mut c = self.clone();
        for _ in 0..k {
            c.n_u = 2 * (c.n_u - 1) + 1;
            c.n_t = 2 * (c.n_t - 1) + 1;
        }
        c
    }

    /// The same run with `u_max` widened by `du` at fixed spacing.
    pub fn extended(&self, du: f64) -> Result<Self> {
        let geo = self.geometry()?.extended(du)?;
        Ok(Self { u_max: geo.u_max, n_u: geo.n_u, ..self.clone() })
    }

    pub fn divisor(&self) -> Result<DivisorData> {
        DivisorData::symmetric(self.beta, self.c)
    }

    pub fn weight_spec(&self) -> Result<WeightSpec> {
        match self.weight {
            WeightChoice::Divisor => WeightSpec::both_sections(self.p, 0.0),
            WeightChoice::SectionZero => WeightSpec::section(DivisorPoint::Zero, self.p, 0.0),
            WeightChoice::SectionInfinity => WeightSpec::section(DivisorPoint::Infinity, self.p, 0.0),
            WeightChoice::Unit => WeightSpec::constant(1.0, self.p),
            WeightChoice::Distance { exponent } => {
                WeightSpec::new(WeightKind::DistancePower { exponent, cap: std::f64::consts::FRAC_PI_2 }, self.p, 0.0)
            }
        }
    }

    fn boundary(&self, choice: BoundaryChoice) -> Result<BoundarySpec> {
        Ok(match choice {
            BoundaryChoice::Zero => BoundarySpec::flat(),
            BoundaryChoice::Conical => BoundarySpec::conical(self.divisor()?),
            BoundaryChoice::Bump => BoundarySpec::bump(self.bump_amplitude),
        })
    }

    pub fn boundaries(&self) -> Result<(BoundarySpec, BoundarySpec)> {
        Ok((self.boundary(self.boundary0)?, self.boundary(self.boundary1)?.shifted(self.t1_shift)))
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Schedule::new(&self.eps_list, self.p)
    }

    pub fn problem(&self) -> Result<ContinuityProblem> {
        let geo = self.geometry()?;
        let f = match &self.f_field {
            Some(path) => {
                let g = PotentialGrid::read_csv(path)?;
                if g.values.dim() != (self.n_u, self.n_t) {
                    return Err(Error::GridMismatch(format!(
                        "f_field {} has shape {:?}, expected ({}, {})",
                        path.display(),
                        g.values.dim(),
                        self.n_u,
                        self.n_t
                    )));
                }
                Some(g.values)
            }
            None => None,
        };
        let (boundary0, boundary1) = self.boundaries()?;
        Ok(ContinuityProblem {
            geo,
            n_t: self.n_t,
            boundary0,
            boundary1,
            weight: self.weight_spec()?,
            f,
            newton: NewtonOptions { tol: self.tol, max_iter: self.max_iter, ..NewtonOptions::default() },
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("/tmp"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse("divisor.beta = 0.75\nweight.p = 0.75\n").unwrap();
        assert_eq!((c.n_u, c.n_t, c.tol), (129, 65, 1e-8));
        assert_eq!(c.eps_list.len(), 4);
        assert_eq!(c.eps_list, vec![1e-1, 1e-2, 1e-3, 1e-4]);
        assert!(c.c > 0.0 && c.f_field.is_none());
        let s = c.schedule().unwrap();
        assert!((s.entries[1].eta - 1e-2f64.powf(4.0 / 3.0)).abs() < 1e-15);
        c.problem().unwrap();
    }

    #[test]
    fn negative_controls() {
        match parse("schedule.eps_list = 1e-3, 1e-2\n") {
            Err(Error::Validation(v)) => assert!(v.iter().any(|m| m.contains("decreasing"))),
            other => panic!("{other:?}"),
        }
        match parse("# comment\n\ngrid.colour = red\n") {
            Err(Error::Parse { line: 3, message }) => assert!(message.contains("grid.colour")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("grid.n_u = 128\n"), Err(Error::Validation(_))));
        assert!(matches!(parse("grid.n_u = many\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("tol = 1\ntol = 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("divisor.c = 100\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn refinement_and_extension() {
        let c = parse("grid.n_u = 65\ngrid.n_t = 33\ngrid.u_max = 8\n").unwrap();
        let r = c.refined(1);
        assert_eq!((r.n_u, r.n_t), (129, 65));
        let e = c.extended(2.0).unwrap();
        assert_eq!((e.u_max, e.n_u), (10.0, 81));
        assert_eq!(e.c, c.c);
    }

    #[test]
    fn boundaries_and_paths() {
        let c = parse("boundary.t0 = zero\nboundary.t1 = bump\nboundary.t1_shift = 3\naudit.grids = a.csv, b.csv\n").unwrap();
        let (b0, b1) = c.boundaries().unwrap();
        assert_eq!(b0, BoundarySpec::flat());
        assert_eq!(b1, BoundarySpec::bump(0.3).shifted(3.0));
        assert_eq!(c.audit_grids, vec![PathBuf::from("/tmp/a.csv"), PathBuf::from("/tmp/b.csv")]);
        assert!(parse("boundary.t0 = sphere\n").is_err());
    }
}
