#![allow(dead_code)]

use milnor_core::germ::{parse_germ, MapGerm};

fn germ(vars: &[&str], comps: &[&str]) -> MapGerm {
    let q = |v: &[&str]| v.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ");
    parse_germ(&format!(
        "source_dim = {}\nvariables = [{}]\ncomponents = [{}]\n",
        vars.len(),
        q(vars),
        q(comps)
    ))
    .unwrap()
}

pub fn linear_3_2() -> MapGerm {
    germ(&["x", "y", "z"], &["x", "y"])
}

pub fn linear_4_3() -> MapGerm {
    germ(&["a", "b", "c", "d"], &["a", "b", "c"])
}

/// Real form of `(z, w) -> z w`.
pub fn zw() -> MapGerm {
    germ(&["a", "b", "c", "d"], &["a*c - b*d", "a*d + b*c"])
}

pub fn nontame() -> MapGerm {
    germ(&["x", "y", "z"], &["x", "y^2"])
}

pub fn diagonal() -> MapGerm {
    germ(&["x", "y", "z"], &["x", "x"])
}

/// `V(f_1) = {0}`.
pub fn definite() -> MapGerm {
    germ(&["x", "y", "z"], &["x^2 + y^2 + z^2", "y"])
}

pub fn isolated_odd() -> MapGerm {
    germ(&["x", "y", "z"], &["x", "y*(x^2 + y^2 + z^2)"])
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
