//! Holds the `acceptance` test target. It is a separate package so it runs
//! after the unit and integration tests of the other crates.
