//! Operator-level integration: generated extended operators against the
//! printed tables, Dirac reduction against the two-field structures, the
//! recursion chain, and the operator↔Hamiltonian-field cross-check.

use laxtower::verify::{self, VerifyConfig};

fn assert_rows_pass(rows: &[verify::CheckRow]) {
    for r in rows {
        assert!(
            r.pass,
            "{} [{}] defect {:.6e} vs tol {:.1e} ({})",
            r.check_id, r.params, r.defect, r.tol, r.anchor
        );
    }
}

#[test]
fn extended_operators_match_printed_tables() {
    let cfg = VerifyConfig::default();
    let rows = verify::suite_extended_operators(&cfg).unwrap();
    println!("{}", verify::rows_to_text(&rows));
    assert_rows_pass(&rows);
}

#[test]
fn dirac_reductions_reproduce_the_structures() {
    let cfg = VerifyConfig {
        probes: 12,
        ..Default::default()
    };
    let rows = verify::suite_reduce(&cfg).unwrap();
    println!("{}", verify::rows_to_text(&rows));
    assert_rows_pass(&rows);
}

#[test]
fn recursion_chain_climbs_the_structures() {
    let cfg = VerifyConfig {
        probes: 8,
        ..Default::default()
    };
    let rows = verify::suite_recursion(&cfg).unwrap();
    println!("{}", verify::rows_to_text(&rows));
    assert_rows_pass(&rows);
}

#[test]
fn operator_route_equals_hamiltonian_route() {
    let cfg = VerifyConfig::default();
    let rows = verify::suite_operator_flows(&cfg).unwrap();
    println!("{}", verify::rows_to_text(&rows));
    assert_rows_pass(&rows);
}
