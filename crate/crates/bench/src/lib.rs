//! Fixtures shared by the benchmarks.

use abelcount_core::{FiniteAbelianGroup, FrobenianFunction};

pub fn problem(group: &str, function: &str) -> (FiniteAbelianGroup, FrobenianFunction) {
    let group = group.parse().expect("group spec");
    let function = FrobenianFunction::builtin(&function.parse().expect("function spec")).expect("builtin function");
    (group, function)
}
