//! Fixtures shared by the benchmarks in `benches/`.

use milnor_core::germ::parse_germ;
use milnor_core::MapGerm;

pub fn germ(variables: &[&str], components: &[&str]) -> MapGerm {
    let quote = |v: &[&str]| v.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ");
    parse_germ(&format!(
        "source_dim = {}\nvariables = [{}]\ncomponents = [{}]\n",
        variables.len(),
        quote(variables),
        quote(components)
    ))
    .expect("fixture germ parses")
}

pub fn linear_3_2() -> MapGerm {
    germ(&["x", "y", "z"], &["x", "y"])
}

pub fn zw() -> MapGerm {
    germ(&["a", "b", "c", "d"], &["a*c - b*d", "a*d + b*c"])
}

pub fn ramified() -> MapGerm {
    germ(
        &["x", "y", "z"],
        &["x^2 - (x^2*y + y^3 + y*z^2)^2", "2*x*(x^2*y + y^3 + y*z^2)"],
    )
}

/// `n` evenly spaced points on the unit circle.
pub fn circle(n: usize) -> Vec<f64> {
    (0..n)
        .flat_map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// `n` points on the unit two-sphere along a Fibonacci spiral.
pub fn fibonacci_sphere(n: usize) -> Vec<f64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .flat_map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}
