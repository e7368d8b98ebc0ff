//! Built-in group definitions. The `.group` files under `catalog/` are
//! embedded at compile time and parsed like user files.

use crate::algebra::Subspace;
use crate::group::CarnotGroup;
use crate::scenario::Scenario;
use crate::splitting::Splitting;

const FILES: &[(&str, &str)] = &[
    ("euclidean2", include_str!("../catalog/euclidean2.group")),
    ("euclidean3", include_str!("../catalog/euclidean3.group")),
    ("heisenberg1", include_str!("../catalog/heisenberg1.group")),
    ("heisenberg2", include_str!("../catalog/heisenberg2.group")),
    ("engel", include_str!("../catalog/engel.group")),
    ("free23", include_str!("../catalog/free23.group")),
];

pub fn names() -> Vec<&'static str> {
    FILES.iter().map(|(n, _)| *n).collect()
}

/// Source text of a catalog entry.
pub fn by_name(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parse and build a catalog group. Panics on unknown names; the catalog is
/// covered by tests.
pub fn group(name: &str) -> CarnotGroup {
    let text = by_name(name).unwrap_or_else(|| panic!("no catalog group `{name}`"));
    let sc = Scenario::parse(text, name).expect("catalog file parses");
    sc.build_group_inline().expect("catalog group is valid")
}

pub fn all() -> Vec<CarnotGroup> {
    names().into_iter().map(group).collect()
}

/// `ℍⁿ` for `n = 1, 2`.
pub fn heisenberg(n: usize) -> CarnotGroup {
    group(&format!("heisenberg{n}"))
}

/// `ℝⁿ` for `n = 2, 3`.
pub fn euclidean(n: usize) -> CarnotGroup {
    group(&format!("euclidean{n}"))
}

pub fn engel() -> CarnotGroup {
    group("engel")
}

pub fn free23() -> CarnotGroup {
    group("free23")
}

/// Coordinate splittings `(W, L)` with `L` an ideal, one or more per
/// catalog group. Indices are 1-based.
pub fn normal_splitting_indices() -> Vec<(&'static str, Vec<usize>, Vec<usize>)> {
    vec![
        ("euclidean2", vec![1], vec![2]),
        ("euclidean3", vec![1, 2], vec![3]),
        ("heisenberg1", vec![1], vec![2, 3]),
        ("heisenberg2", vec![1, 2], vec![3, 4, 5]),
        ("heisenberg2", vec![1], vec![2, 3, 4, 5]),
        ("engel", vec![1], vec![2, 3, 4]),
        ("engel", vec![2], vec![1, 3, 4]),
        ("free23", vec![1, 2, 4], vec![3, 5, 6]),
    ]
}

pub fn normal_splittings() -> Vec<Splitting> {
    normal_splitting_indices()
        .into_iter()
        .map(|(name, w, l)| {
            let g = group(name);
            let a = g.algebra();
            Splitting::new(
                &g,
                Subspace::coordinate(a, &w).expect("indices"),
                Subspace::coordinate(a, &l).expect("indices"),
            )
            .expect("catalog splitting is valid")
        })
        .collect()
}
