mod common;

use common::{channel_checks, spot_value_checks, Check};

fn assert_all(checks: &[Check]) {
    for c in checks {
        assert!(c.ok, "{}: {}", c.name, c.detail);
    }
}

#[test]
fn rayleigh_outage_matches_closed_form() {
    assert_all(&channel_checks());
}

#[test]
fn path_loss_and_antenna_spot_values() {
    assert_all(&spot_value_checks());
}
