//! IEEE/PEGASE test cases shipped with the crate (from MATPOWER, BSD licensed;
//! see `data/LICENSE-MATPOWER`).

use crate::{parse_case, Network, Result};

pub const CASE30: &str = include_str!("../data/case30.m");
pub const CASE39: &str = include_str!("../data/case39.m");
pub const CASE118: &str = include_str!("../data/case118.m");
pub const CASE2383WP: &str = include_str!("../data/case2383wp.m");
pub const CASE3120SP: &str = include_str!("../data/case3120sp.m");

pub const BUNDLED: [&str; 5] = ["case30", "case39", "case118", "case2383wp", "case3120sp"];

/// Case text by name (`case30`, `case39`, `case118`, `case2383wp`, `case3120sp`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "case30" => Some(CASE30),
        "case39" => Some(CASE39),
        "case118" => Some(CASE118),
        "case2383wp" => Some(CASE2383WP),
        "case3120sp" => Some(CASE3120SP),
        _ => None,
    }
}

pub fn load_bundled(name: &str) -> Option<Result<Network>> {
    bundled(name).map(parse_case)
}
