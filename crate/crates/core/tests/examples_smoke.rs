//! Every runnable example also runs as a test.

macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(conical_geometry, "conical_geometry.rs");
example!(weight_audit, "weight_audit.rs");
example!(single_solve, "single_solve.rs");
example!(continuity_sweep, "continuity_sweep.rs");
example!(estimate_audit, "estimate_audit.rs");
example!(legendre_oracle, "legendre_oracle.rs");
example!(lemma_oracles, "lemma_oracles.rs");

#[test]
fn conical_geometry_runs() {
    conical_geometry::run_example().unwrap();
}

#[test]
fn weight_audit_runs() {
    weight_audit::run_example().unwrap();
}

#[test]
fn single_solve_runs() {
    single_solve::run_example().unwrap();
}

#[test]
fn continuity_sweep_runs() {
    continuity_sweep::run_example().unwrap();
}

#[test]
fn estimate_audit_runs() {
    estimate_audit::run_example().unwrap();
}

#[test]
fn legendre_oracle_runs() {
    legendre_oracle::run_example().unwrap();
}

#[test]
fn lemma_oracles_runs() {
    lemma_oracles::run_example().unwrap();
}
