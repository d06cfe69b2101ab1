#![allow(dead_code)]

use agspace::enumerate::{enumerate_models, ModelClass, SearchSpec};
use agspace::CayleyTable;

pub fn e1() -> CayleyTable {
    include_str!("../data/example_order12.tbl").parse().unwrap()
}

/// Isomorphism-class representatives of `class` for every order in `orders`.
pub fn models(class: ModelClass, orders: std::ops::RangeInclusive<usize>) -> Vec<CayleyTable> {
    orders
        .flat_map(|n| {
            enumerate_models(&SearchSpec::new(n, class).up_to_iso(true))
                .unwrap()
                .models
        })
        .collect()
}
