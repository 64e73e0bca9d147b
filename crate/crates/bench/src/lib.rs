//! Shared benchmark inputs.

use waring_core::ProblemSpec;

/// Specs spanning small to mid-sized Terracini matrices.
pub fn certify_cases() -> Vec<(&'static str, ProblemSpec)> {
    [
        ("n2_d33", vec![3, 3]),
        ("n2_d444", vec![4, 4, 4]),
        ("n2_d3333", vec![3, 3, 3, 3]),
        ("n2_d448", vec![4, 4, 8]),
    ]
    .into_iter()
    .map(|(name, d)| (name, ProblemSpec::new(2, d).expect("valid spec")))
    .collect()
}
