//! Shared fixtures for the criterion benches.

use qmlab_core::{BallState, Direction};

/// States exercised by the single-machine benches.
pub fn fixture_states() -> Vec<(&'static str, BallState)> {
    vec![
        ("center", BallState::CENTER),
        ("half_z", BallState::new(0.0, 0.0, 0.5).expect("inside ball")),
        (
            "surface_pi3",
            BallState::surface(Direction::from_angles(std::f64::consts::FRAC_PI_3, 0.0).expect("finite angles")),
        ),
    ]
}
