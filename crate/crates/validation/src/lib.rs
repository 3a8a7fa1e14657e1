//! Hosts the `acceptance` test target; run it with
//! `cargo test -p stabilis-validation --test acceptance`.
