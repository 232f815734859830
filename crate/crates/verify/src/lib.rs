//! Acceptance suite for limitlab. Everything lives in `tests/acceptance.rs`;
//! run it with `cargo test -p limitlab-verify --test acceptance`.
