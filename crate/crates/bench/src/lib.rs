//! Shared setup for the criterion benchmarks.

use qjacobi_core::mvlqj::Family;

/// The all-rational desk-scale family used by every benchmark.
pub fn benchmark_family() -> Family {
    Family::p1()
}
