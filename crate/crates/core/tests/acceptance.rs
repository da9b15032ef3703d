//! Acceptance run: one pass/fail line per criterion.
//!
//! `cargo test --release --test acceptance`. Criteria listed in `KNOWN_RED`
//! are expected to fail with the default boundary smoothing; they are printed
//! as failures but do not fail the process. Anything else failing does.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use conic_geodesic::analysis::lemma_suite;
use conic_geodesic::config::{parse_config_str, RunConfig};
use conic_geodesic::estimates::{linlog_identity_check, max_principle_audit, supremum_drift, EstimateReport};
use conic_geodesic::experiment::{oracle_distances, sweep};
use conic_geodesic::field::{
    amgm_gap, geodesic_operator, linearized_apply, log_residual, ma_residual, PotentialGrid, ResidualForm,
};
use conic_geodesic::geometry::{logistic, BackgroundGeometry};
use conic_geodesic::solver::{solve_entry, subsolution, supersolution, sandwich_check, ContinuityRun};
use ndarray::Array2;

const KNOWN_RED: &[&str] = &["7b", "8a", "8b"];
const BETAS: [f64; 3] = [0.25, 0.5, 0.75];

struct Sweep {
    cfg: RunConfig,
    run: ContinuityRun,
    reports: Vec<EstimateReport>,
}

impl Sweep {
    fn new(cfg: RunConfig) -> Self {
        let t = Instant::now();
        let (run, reports) = sweep(&cfg).expect("sweep");
        eprintln!(
            "  [sweep beta={} grid {}x{} u_max={} in {:.1}s]",
            cfg.beta,
            cfg.n_u,
            cfg.n_t,
            cfg.u_max,
            t.elapsed().as_secs_f64()
        );
        Self { cfg, run, reports }
    }

    fn completed(&self) -> bool {
        self.run.completed() && self.reports.len() == self.cfg.eps_list.len()
    }

    fn series(&self, f: impl Fn(&EstimateReport) -> f64) -> Vec<f64> {
        self.reports.iter().map(f).collect()
    }
}

fn base_config(beta: f64) -> RunConfig {
    let text = format!("divisor.beta = {beta}\naudit.holder_deltas = 0.45, 0.55\naudit.mu = 0.9\n");
    parse_config_str(&text, Path::new(".")).expect("config")
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

struct Ledger {
    lines: Vec<(String, bool, String)>,
}

impl Ledger {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        let note = match (pass, KNOWN_RED.contains(&id)) {
            (false, true) => "  (known red)",
            (true, true) => "  (known red now passes)",
            _ => "",
        };
        println!("criterion {id:<3} {}  {detail}{note}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id.to_string(), pass, detail));
    }
}

fn criterion_1(l: &mut Ledger) {
    let mut cfg = base_config(0.75);
    cfg.eps_list = vec![1e-3];
    let problem = cfg.problem().unwrap();
    let entry = cfg.schedule().unwrap().entries[0];
    match solve_entry(&problem, &entry) {
        Ok(r) => {
            let o = &r.outcome;
            let pass = o.final_residual <= 1e-8 && o.iterations <= 40 && o.admissible;
            l.record(
                "1",
                pass,
                format!(
                    "cold solve eps=1e-3 eta={:.2e}: {} iterations, max|log residual| = {:.2e}, admissible = {}",
                    entry.eta, o.iterations, o.final_residual, o.admissible
                ),
            );
            criterion_9(l, &o.grid, &r.rhs);
        }
        Err(e) => l.record("1", false, format!("solve failed: {e}")),
    }
}

fn criterion_2(l: &mut Ledger) {
    let text = "boundary.t0 = zero\nboundary.t1 = zero\nboundary.t1_shift = 3\nweight.kind = unit\n";
    let s = Sweep::new(parse_config_str(text, Path::new(".")).unwrap());
    let exact: Vec<f64> = s
        .run
        .results
        .iter()
        .map(|r| {
            let g = &r.outcome.grid;
            let e = PotentialGrid::from_fn(g.geo.clone(), g.n_t, |_, t| 3.0 * t).unwrap();
            g.max_abs_diff(&e).unwrap()
        })
        .collect();
    let pass = s.completed() && strictly_decreasing(&exact) && *exact.last().unwrap() <= 1e-2;
    l.record("2a", pass, format!("sup|phi - 3t| along eps = {}", fmt_e(&exact)));

    // The oracle is the continuum geodesic: at 129×65 the O(h²) gap (~2e-4)
    // hides the ε = 1e-4 entry, so this one runs a refinement up.
    let text = "boundary.t0 = zero\nboundary.t1 = bump\nboundary.bump = 0.3\nweight.kind = unit\n";
    let s = Sweep::new(parse_config_str(text, Path::new(".")).unwrap().refined(1));
    let d: Vec<f64> = oracle_distances(&s.cfg, &s.run).unwrap().into_iter().map(|d| d.unwrap_or(f64::NAN)).collect();
    let pass = s.completed() && strictly_decreasing(&d) && *d.last().unwrap() <= 2e-2;
    l.record("2b", pass, format!("sup|phi - Legendre oracle| at 257x129 along eps = {}", fmt_e(&d)));
}

fn fmt_e(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn criteria_3_to_6(l: &mut Ledger, base: &BTreeMap<&'static str, Sweep>) {
    // 3
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in base {
        let w = s.series(|r| r.sup_weighted_lap);
        let bound = s.reports.iter().all(|r| r.verdicts["weighted_laplacian_bound"] == "pass");
        let ratio = spread(&w);
        pass &= s.completed() && bound && ratio <= 2.0;
        detail.push(format!("beta={name}: sup w {} max/min {ratio:.3} bound {}", fmt(&w), bound));
    }
    l.record("3", pass, detail.join("; "));

    // 4
    let mut pass = true;
    let mut count = 0;
    for s in base.values() {
        for r in &s.reports {
            pass &= r.verdicts["max_principle"] == "pass";
            count += 1;
        }
    }
    let s = &base["0.75"];
    let last = s.run.results.last().unwrap();
    let mut bad = last.outcome.grid.clone();
    let (i, j) = (bad.n_u() / 2, bad.n_t / 2);
    bad.values[[i, j]] += 1.0;
    let control = max_principle_audit(&bad, &last.rhs, 0.0);
    pass &= !control.pass;
    l.record(
        "4",
        pass,
        format!("{count} converged instances audited; corrupted control branch {:?} pass = {}", control.branch, control.pass),
    );

    // 5
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for s in base.values() {
        let problem = s.cfg.problem().unwrap();
        for r in &s.run.results {
            let (b0, b1) = problem.slices(r.entry.smoothing_k);
            let sub = subsolution(&problem.geo, s.cfg.n_t, &b0, &b1, 0.0, Some(&r.rhs)).unwrap();
            let sup = supersolution(&problem.geo, s.cfg.n_t, &b0, &b1).unwrap();
            let sw = sandwich_check(&r.outcome.grid, &sub, &sup, 1e-6).unwrap();
            pass &= sw.pass;
            worst = worst.max(sw.below_sub.max(sw.above_super));
        }
    }
    l.record("5", pass, format!("largest barrier violation {worst:.2e} (tolerance 1e-6)"));

    // 6
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in base {
        let dt = s.series(|r| r.sup_dt_phi);
        pass &= spread(&dt) < 2.0;
        detail.push(format!("beta={name}: {} max/min {:.3}", fmt(&dt), spread(&dt)));
    }
    l.record("6", pass, detail.join("; "));
}

fn final_ratio(a: &Sweep, b: &Sweep, f: impl Fn(&EstimateReport) -> f64) -> f64 {
    let x = f(a.reports.last().unwrap());
    let y = f(b.reports.last().unwrap());
    y.max(x) / y.min(x)
}

fn criteria_7_8(l: &mut Ledger, base: &BTreeMap<&'static str, Sweep>) {
    let coarse = &base["0.25"];
    let fine = Sweep::new(base_config(0.25).refined(1));
    let h = |d: &'static str| move |r: &EstimateReport| r.holder_seminorm[d];

    let sched = spread(&coarse.series(h("0.45")));
    let refine = final_ratio(coarse, &fine, h("0.45"));
    l.record(
        "7a",
        fine.completed() && sched <= 1.5 && refine <= 1.5,
        format!(
            "beta=0.25 delta=0.45: schedule {} (max/min {sched:.3}), refined {} (ratio {refine:.3})",
            fmt(&coarse.series(h("0.45"))),
            fmt(&fine.series(h("0.45")))
        ),
    );
    let sched = spread(&coarse.series(h("0.55")));
    let refine = final_ratio(coarse, &fine, h("0.55"));
    l.record(
        "7b",
        sched > 1.5 || refine > 1.5,
        format!(
            "beta=0.25 delta=0.55 must grow: schedule {} (max/min {sched:.3}), refined ratio {refine:.3}",
            fmt(&coarse.series(h("0.55")))
        ),
    );

    let ugrad = |r: &EstimateReport| r.sup_unweighted_grad;
    let u_sched = spread(&coarse.series(ugrad)).max(spread(&fine.series(ugrad)));
    let u_refine = final_ratio(coarse, &fine, ugrad);
    let u_detail = format!(
        "beta=0.25 unweighted: schedule {} refined {} (max/min {u_sched:.3}, refinement {u_refine:.3})",
        fmt(&coarse.series(ugrad)),
        fmt(&fine.series(ugrad))
    );
    drop(fine);

    let coarse = &base["0.75"];
    let fine = Sweep::new(base_config(0.75).refined(1));
    let wgrad = |r: &EstimateReport| r.sup_weighted_grad;
    let sched = spread(&coarse.series(wgrad)).max(spread(&fine.series(wgrad)));
    let refine = final_ratio(coarse, &fine, wgrad);
    l.record(
        "8a",
        fine.completed() && sched <= 1.5 && refine <= 1.5,
        format!(
            "beta=0.75 mu=0.9 weighted: schedule {} refined {} (max/min {sched:.3}, refinement {refine:.3})",
            fmt(&coarse.series(wgrad)),
            fmt(&fine.series(wgrad))
        ),
    );
    l.record("8b", u_sched <= 1.5 && u_refine <= 1.5, u_detail);
}

fn criterion_9(l: &mut Ledger, grid: &PotentialGrid, rhs: &conic_geodesic::Rhs) {
    let (n_u, n_t) = grid.values.dim();
    let psi = PotentialGrid::from_fn(grid.geo.clone(), n_t, |u, t| (t * (1.0 - t) + 0.1) * (-u * u / 4.0).exp()).unwrap().values;
    let base = log_residual(grid, rhs).unwrap();
    let lin = Array2::from_shape_fn((n_u, n_t), |(i, j)| {
        if i == 0 || j == 0 || i == n_u - 1 || j == n_t - 1 {
            0.0
        } else {
            linearized_apply(grid, &psi, i, j).unwrap()
        }
    });
    let fd_err = |h: f64| {
        let mut g = grid.clone();
        g.values = &g.values + &(&psi * h);
        let r = log_residual(&g, rhs).unwrap();
        ((&r - &base) / h - &lin).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let (e1, e2) = (fd_err(1e-5), fd_err(1e-6));
    let order = (e1 / e2).log10();
    let fd_pass = order >= 0.9;

    let prod = ma_residual(grid, rhs, ResidualForm::Product).unwrap();
    let det = ma_residual(grid, rhs, ResidualForm::Determinant).unwrap();
    let ident = (&prod - &det).iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let t2 = PotentialGrid::from_fn(grid.geo.clone(), n_t, |_, t| t * t).unwrap().values;
    let mut lin_t2: f64 = 0.0;
    let mut amgm: f64 = 0.0;
    for i in 1..n_u - 1 {
        for j in 1..n_t - 1 {
            let d = linearized_apply(grid, &t2, i, j).unwrap();
            let g = geodesic_operator(grid, i, j).unwrap();
            lin_t2 = lin_t2.max((d - 2.0 / g).abs() / (2.0 / g));
            amgm = amgm.max(amgm_gap(grid, i, j).unwrap());
        }
    }

    let linlog = |n_u: usize, n_t: usize| {
        let g = PotentialGrid::from_fn(BackgroundGeometry::new(16.0, n_u).unwrap(), n_t, |u, t| {
            1.5 * t * t + 0.1 * logistic(u) * t
        })
        .unwrap();
        let psi = PotentialGrid::from_fn(g.geo.clone(), n_t, |u, t| t.exp() * (1.0 + 0.5 * logistic(u))).unwrap().values;
        linlog_identity_check(&g, &psi).unwrap()
    };
    let (ll1, ll2) = (linlog(65, 33), linlog(129, 65));

    let pass = fd_pass && ident <= 1e-12 && lin_t2 <= 1e-9 && ll2 < 0.5 * ll1 && amgm <= 1e-12;
    l.record(
        "9",
        pass,
        format!(
            "FD order {order:.3} ({e1:.2e} -> {e2:.2e}); product vs determinant {ident:.2e}; \
             lin t^2 rel {lin_t2:.2e}; lin-log {ll1:.2e} -> {ll2:.2e}; AM-GM gap {amgm:.2e}"
        ),
    );
}

fn criterion_10(l: &mut Ledger) {
    match lemma_suite() {
        Ok(checks) => {
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            l.record("10", failed.is_empty(), format!("{} lemma checks, failed: {failed:?}", checks.len()));
        }
        Err(e) => l.record("10", false, format!("lemma suite error: {e}")),
    }
}

fn criterion_11(l: &mut Ledger, base: &BTreeMap<&'static str, Sweep>) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, s) in base {
        let wide = Sweep::new(s.cfg.extended(2.0).unwrap());
        let mut worst = (0.0, String::new());
        for (a, b) in s.reports.iter().zip(&wide.reports) {
            let d = supremum_drift(a, b);
            if d.0 >= worst.0 {
                worst = d;
            }
        }
        pass &= wide.completed() && worst.0 < 0.05;
        detail.push(format!("beta={name}: worst relative drift {:.2e} ({})", worst.0, if worst.1.is_empty() { "none" } else { &worst.1 }));
    }
    l.record("11", pass, detail.join("; "));
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let t = Instant::now();
    let mut l = Ledger { lines: Vec::new() };
    criterion_1(&mut l);
    criterion_2(&mut l);
    let names = ["0.25", "0.5", "0.75"];
    let base: BTreeMap<&'static str, Sweep> =
        names.iter().zip(BETAS).map(|(n, b)| (*n, Sweep::new(base_config(b)))).collect();
    criteria_3_to_6(&mut l, &base);
    criteria_7_8(&mut l, &base);
    criterion_10(&mut l);
    criterion_11(&mut l, &base);

    let unexpected: Vec<&str> =
        l.lines.iter().filter(|(id, pass, _)| !pass && !KNOWN_RED.contains(&id.as_str())).map(|(id, _, _)| id.as_str()).collect();
    println!("acceptance finished in {:.0}s; unexpected failures: {unexpected:?}", t.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
