//! End-to-end method runs on the shipped fixtures.

mod common;

use common::*;
use sqdopt_core::drivers::SweepFixture;
use sqdopt_core::*;

fn spec(name: &str, method: Method, frozen: usize) -> RunSpec {
    RunSpec { frozen: (0..frozen).collect(), ..RunSpec::new(fixture_path(name), method) }
}

#[test]
fn fci_has_zero_error() {
    for (name, f) in [("h2_0.7414", 0), ("h6_0.9", 2), ("h2o", 2)] {
        let r = run_method(&spec(name, Method::Fci, f)).unwrap();
        assert_eq!(r.percent_error, Some(0.0));
        let key = if f == 0 { "e_fci_full" } else { "e_fci_frozen" };
        assert!((r.e_final - reference(name, key)).abs() < 1e-8, "{name}");
    }
}

#[test]
fn sqd_methods_are_variational() {
    for method in [Method::Sqdz, Method::Sqdopt] {
        let mut s = spec("h6_0.9", method, 2);
        s.optimizer.max_iter = 40;
        s.shots = 2000;
        let r = run_method(&s).unwrap();
        assert!(r.e_final >= r.e_fci.unwrap() - 1e-9);
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), r.timings.n_evaluations);
        assert!(trace.len() <= 40);
        let n_bases = if method == Method::Sqdz { 1 } else { 5 };
        assert!(trace.records.iter().all(|rec| rec.components.len() == n_bases));
        assert_eq!(r.bases.len(), n_bases);
    }
}

#[test]
fn runs_are_reproducible() {
    let mut s = spec("h6_0.9", Method::Sqdopt, 2);
    s.optimizer.max_iter = 20;
    s.shots = 1000;
    let a = run_method(&s).unwrap();
    let b = run_method(&s).unwrap();
    assert_eq!(a.e_final, b.e_final);
    assert_eq!(a.parameters, b.parameters);
    let costs = |r: &RunResult| r.trace.as_ref().unwrap().records.iter().map(|x| x.cost).collect::<Vec<_>>();
    assert_eq!(costs(&a), costs(&b));
}

#[test]
fn final_energy_uses_the_full_hamiltonian() {
    let mut s = spec("h6_0.9", Method::PartialVqe, 2);
    s.optimizer.max_iter = 30;
    let r = run_method(&s).unwrap();
    let h = load("h6_0.9", 2);
    let mask = s.ansatz.jastrow_mask(8).unwrap();
    let p = LucjParameters::from_vector(4, 1, mask, &r.parameters).unwrap();
    let direct = prepare_lucj(&p, 1, 1).unwrap().expectation(&jw_map(&h)).unwrap();
    assert!((r.e_final - direct).abs() < 1e-12);
}

#[test]
fn h2o_three_basis_sqdopt_beats_hf() {
    let mut s = spec("h2o", Method::Sqdopt, 2);
    s.k = 3;
    let r = run_method(&s).unwrap();
    let hf_error = 100.0 * (r.e_hf - r.e_fci.unwrap()) / r.e_fci.unwrap().abs();
    let err = r.percent_error.unwrap();
    println!("H2O k=3 SQDOpt error {err:.4}% vs HF {hf_error:.4}%");
    assert!(err < hf_error, "{err} >= {hf_error}");
}

#[test]
fn h6_sqdopt_minus_vqe_at_equilibrium() {
    let fixtures = vec![SweepFixture {
        label: "h6_0.9".into(),
        bond_length: 0.9,
        fcidump: fixture_path("h6_0.9"),
        fci_reference: Some(reference("h6_0.9", "e_fci_frozen")),
    }];
    let rows = bond_sweep(&spec("h6_0.9", Method::Hf, 2), &fixtures, &[Method::Vqe, Method::Sqdopt]);
    let gap = rows.iter().find(|r| r.method == Method::Sqdopt).and_then(|r| r.sqdopt_minus_vqe).unwrap();
    println!("H6 SQDOpt - VQE: {gap:+.4} pp");
    assert!((gap - -0.0431).abs() <= 0.1, "{gap}");
}

#[test]
fn sweep_records_failures_per_row() {
    let fixtures = vec![
        SweepFixture { label: "missing".into(), bond_length: 1.0, fcidump: "does/not/exist.fcidump".into(), fci_reference: None },
        SweepFixture { label: "h2".into(), bond_length: 0.7414, fcidump: fixture_path("h2_0.7414"), fci_reference: None },
    ];
    let rows = bond_sweep(&RunSpec::new("unused", Method::Hf), &fixtures, &[Method::Hf]);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].failure.as_deref().unwrap().contains("does/not/exist.fcidump"));
    assert!(rows[1].failure.is_none() && rows[1].energy.is_some());
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = spec("h6_0.9", Method::Sqdopt, 2);
    s.k = 0;
    assert!(matches!(run_method(&s), Err(Error::InvalidArgument(_))));
    let s = spec("h6_0.9", Method::Hf, 9);
    assert!(run_method(&s).is_err());
}
