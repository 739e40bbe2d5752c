//! Acceptance checks for `conflict-dyn` live in `tests/acceptance.rs`.
