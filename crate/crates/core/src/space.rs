//! Symbolic Euler characteristics of spaces built from spheres, disks and
//! named atoms.
//!
//! Evaluation uses only multiplicativity under products and additivity
//! (inclusion–exclusion) under unions and gluings. Nothing here certifies
//! that a gluing is a manifold.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Symbol carried by the Milnor fibre atom `F` in [`boundary_decomposition`].
pub const CHI_F: &str = "chi_F";
/// Symbol carried by the Milnor boundary atom `bF`.
pub const CHI_BF: &str = "chi_bF";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("hypothesis M>K≥2 violated (M={m}, K={k})")]
    Hypothesis { m: i64, k: i64 },
    #[error("stage I={i} out of range {lo}..={hi}")]
    StageRange { i: i64, lo: i64, hi: i64 },
}

type Monomial = Vec<(String, u32)>;

/// Integer polynomial in named indeterminates.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ChiValue {
    terms: BTreeMap<Monomial, i64>,
}

impl ChiValue {
    pub fn constant(c: i64) -> Self {
        let mut v = Self::default();
        if c != 0 {
            v.terms.insert(Vec::new(), c);
        }
        v
    }

    pub fn symbol(name: &str) -> Self {
        let mut v = Self::default();
        v.terms.insert(vec![(name.to_string(), 1)], 1);
        v
    }

    /// Integer value if no indeterminates remain.
    pub fn as_integer(&self) -> Option<i64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn coefficient(&self, symbol: &str) -> i64 {
        self.terms
            .get(&vec![(symbol.to_string(), 1)])
            .copied()
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().map(|(s, _)| s.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Replaces `symbol` by the integer `value`.
    pub fn substitute(&self, symbol: &str, value: i64) -> Self {
        let mut out = Self::default();
        for (mono, &c) in &self.terms {
            let mut coeff = c;
            let mut rest = Vec::with_capacity(mono.len());
            for (s, e) in mono {
                if s == symbol {
                    coeff *= value.pow(*e);
                } else {
                    rest.push((s.clone(), *e));
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    pub fn substitute_all(&self, values: &[(&str, i64)]) -> Self {
        values
            .iter()
            .fold(self.clone(), |acc, (s, v)| acc.substitute(s, *v))
    }

    fn add_term(&mut self, mono: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(mono.clone()).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(&mono);
        }
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut merged: BTreeMap<String, u32> = BTreeMap::new();
    for (s, e) in a.iter().chain(b) {
        *merged.entry(s.clone()).or_insert(0) += e;
    }
    merged.into_iter().collect()
}

impl Add for &ChiValue {
    type Output = ChiValue;
    fn add(self, rhs: &ChiValue) -> ChiValue {
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &ChiValue {
    type Output = ChiValue;
    fn sub(self, rhs: &ChiValue) -> ChiValue {
        self + &(-rhs)
    }
}

impl Neg for &ChiValue {
    type Output = ChiValue;
    fn neg(self) -> ChiValue {
        ChiValue {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &ChiValue {
    type Output = ChiValue;
    fn mul(self, rhs: &ChiValue) -> ChiValue {
        let mut out = ChiValue::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(mul_monomials(ma, mb), ca * cb);
            }
        }
        out
    }
}

impl From<i64> for ChiValue {
    fn from(c: i64) -> Self {
        ChiValue::constant(c)
    }
}

impl fmt::Display for ChiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Symbolic terms first, constant last.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| (m.is_empty(), (*m).clone()));
        for (i, (mono, &c)) in terms.into_iter().enumerate() {
            let mag = c.abs();
            match (i, c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            let parts: Vec<String> = mono
                .iter()
                .map(|(s, e)| if *e == 1 { s.clone() } else { format!("{s}^{e}") })
                .collect();
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ChiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChiValue({self})")
    }
}

/// Euler characteristic attached to an atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomChi {
    Known(i64),
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceExpr {
    Empty,
    Point,
    /// `S^n`, `n >= -1`; `S^-1` is empty.
    Sphere(i32),
    /// `D^n`, `n >= 0`.
    Disk(u32),
    Atom { name: String, chi: AtomChi },
    Product(Vec<SpaceExpr>),
    DisjointUnion(Vec<SpaceExpr>),
    /// `a ∪ b` glued along `along`.
    Glue {
        a: Box<SpaceExpr>,
        b: Box<SpaceExpr>,
        along: Box<SpaceExpr>,
    },
    /// Two copies of `fiber` glued along `boundary`.
    Double {
        fiber: Box<SpaceExpr>,
        boundary: Box<SpaceExpr>,
    },
}

impl SpaceExpr {
    pub fn sphere(n: i32) -> Self {
        assert!(n >= -1, "spheres have dimension >= -1");
        SpaceExpr::Sphere(n)
    }

    pub fn disk(n: u32) -> Self {
        SpaceExpr::Disk(n)
    }

    pub fn atom(name: &str, symbol: &str) -> Self {
        SpaceExpr::Atom {
            name: name.to_string(),
            chi: AtomChi::Symbol(symbol.to_string()),
        }
    }

    pub fn known(name: &str, chi: i64) -> Self {
        SpaceExpr::Atom {
            name: name.to_string(),
            chi: AtomChi::Known(chi),
        }
    }

    pub fn product(parts: Vec<SpaceExpr>) -> Self {
        SpaceExpr::Product(parts)
    }

    pub fn union(parts: Vec<SpaceExpr>) -> Self {
        SpaceExpr::DisjointUnion(parts)
    }

    pub fn glue(a: SpaceExpr, b: SpaceExpr, along: SpaceExpr) -> Self {
        SpaceExpr::Glue {
            a: Box::new(a),
            b: Box::new(b),
            along: Box::new(along),
        }
    }

    pub fn double(fiber: SpaceExpr, boundary: SpaceExpr) -> Self {
        SpaceExpr::Double {
            fiber: Box::new(fiber),
            boundary: Box::new(boundary),
        }
    }

    pub fn chi(&self) -> ChiValue {
        chi(self)
    }
}

/// Euler characteristic of a space expression.
pub fn chi(expr: &SpaceExpr) -> ChiValue {
    match expr {
        SpaceExpr::Empty => ChiValue::constant(0),
        SpaceExpr::Point => ChiValue::constant(1),
        SpaceExpr::Sphere(n) => ChiValue::constant(sphere_chi(*n)),
        SpaceExpr::Disk(_) => ChiValue::constant(1),
        SpaceExpr::Atom { chi, .. } => match chi {
            AtomChi::Known(c) => ChiValue::constant(*c),
            AtomChi::Symbol(s) => ChiValue::symbol(s),
        },
        SpaceExpr::Product(parts) => parts
            .iter()
            .fold(ChiValue::constant(1), |acc, p| &acc * &chi(p)),
        SpaceExpr::DisjointUnion(parts) => parts
            .iter()
            .fold(ChiValue::constant(0), |acc, p| &acc + &chi(p)),
        SpaceExpr::Glue { a, b, along } => &(&chi(a) + &chi(b)) - &chi(along),
        SpaceExpr::Double { fiber, boundary } => {
            &(&chi(fiber) * &ChiValue::constant(2)) - &chi(boundary)
        }
    }
}

/// `χ(S^n)`, with `χ(S^-1) = χ(∅) = 0`.
pub fn sphere_chi(n: i32) -> i64 {
    if n < 0 {
        0
    } else if n % 2 == 0 {
        2
    } else {
        0
    }
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, head: &str, parts: &[SpaceExpr]) -> fmt::Result {
            write!(f, "{head}(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        }
        match self {
            SpaceExpr::Empty => write!(f, "empty"),
            SpaceExpr::Point => write!(f, "pt"),
            SpaceExpr::Sphere(n) => write!(f, "S{n}"),
            SpaceExpr::Disk(n) => write!(f, "D{n}"),
            SpaceExpr::Atom { name, .. } => write!(f, "{name}"),
            SpaceExpr::Product(parts) => list(f, "prod", parts),
            SpaceExpr::DisjointUnion(parts) => list(f, "union", parts),
            SpaceExpr::Glue { a, b, along } => write!(f, "glue({a}, {b}; {along})"),
            SpaceExpr::Double { fiber, boundary } => write!(f, "double({fiber}; {boundary})"),
        }
    }
}

fn check_hypothesis(m: i64, k: i64) -> Result<(), SpaceError> {
    if m > k && k >= 2 {
        Ok(())
    } else {
        Err(SpaceError::Hypothesis { m, k })
    }
}

fn check_stage(i: i64, lo: i64, hi: i64) -> Result<(), SpaceError> {
    if (lo..=hi).contains(&i) {
        Ok(())
    } else {
        Err(SpaceError::StageRange { i, lo, hi })
    }
}

/// `∂F_I ≈ (∂F_f × D^{K-I}) ∪ (F_f × S^{K-I-1})`, glued along
/// `∂F_f × S^{K-I-1}`. At `I = K` this degenerates to `∂F_f × D^0`.
pub fn boundary_decomposition(m: i64, k: i64, i: i64) -> Result<SpaceExpr, SpaceError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k)?;
    let codim = k - i;
    let bf = || SpaceExpr::atom("bF", CHI_BF);
    let fib = || SpaceExpr::atom("F", CHI_F);
    Ok(SpaceExpr::glue(
        SpaceExpr::product(vec![bf(), SpaceExpr::disk(codim as u32)]),
        SpaceExpr::product(vec![fib(), SpaceExpr::sphere((codim - 1) as i32)]),
        SpaceExpr::product(vec![bf(), SpaceExpr::sphere((codim - 1) as i32)]),
    ))
}

/// Symbol names for the stage-`j` atoms used below.
pub fn stage_symbols(j: i64) -> (String, String) {
    (format!("chi_F{j}"), format!("chi_bF{j}"))
}

/// `∂F_I ≈ (∂F_{I+1} × [-1,1]) ∪ (F_{I+1} × {-1,1})`: the double of `F_{I+1}`.
pub fn double_decomposition(k: i64, i: i64) -> Result<SpaceExpr, SpaceError> {
    if k < 2 {
        return Err(SpaceError::StageRange { i, lo: 1, hi: k - 1 });
    }
    check_stage(i, 1, k - 1)?;
    let j = i + 1;
    let (sf, sbf) = stage_symbols(j);
    let fib = || SpaceExpr::atom(&format!("F{j}"), &sf);
    let bf = || SpaceExpr::atom(&format!("bF{j}"), &sbf);
    Ok(SpaceExpr::glue(
        SpaceExpr::product(vec![bf(), SpaceExpr::disk(1)]),
        SpaceExpr::product(vec![fib(), SpaceExpr::sphere(0)]),
        SpaceExpr::product(vec![bf(), SpaceExpr::sphere(0)]),
    ))
}

/// Symbol for `χ(L_j)`.
pub fn link_symbol(j: i64) -> String {
    format!("chi_L{j}")
}

/// `S^{M-1} ≈ T_η(f_I) ∪ N_η(f_I)` glued along `∂T_η(f_I)`, with
/// `T_η ≈ F_I × S^{I-1}`, `∂T_η ≈ ∂F_I × S^{I-1}` and `N_η ≃ L_I`.
pub fn tube_sphere_decomposition(m: i64, k: i64, i: i64) -> Result<SpaceExpr, SpaceError> {
    check_hypothesis(m, k)?;
    check_stage(i, 1, k)?;
    let (sf, sbf) = stage_symbols(i);
    let s = || SpaceExpr::sphere((i - 1) as i32);
    Ok(SpaceExpr::glue(
        SpaceExpr::product(vec![SpaceExpr::atom(&format!("F{i}"), &sf), s()]),
        SpaceExpr::atom(&format!("L{i}"), &link_symbol(i)),
        SpaceExpr::product(vec![SpaceExpr::atom(&format!("bF{i}"), &sbf), s()]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_values() {
        assert_eq!(chi(&SpaceExpr::sphere(0)).as_integer(), Some(2));
        assert_eq!(chi(&SpaceExpr::sphere(-1)).as_integer(), Some(0));
        assert_eq!(chi(&SpaceExpr::sphere(1)).as_integer(), Some(0));
        assert_eq!(chi(&SpaceExpr::sphere(4)).as_integer(), Some(2));
        assert_eq!(chi(&SpaceExpr::Empty).as_integer(), Some(0));
        assert_eq!(chi(&SpaceExpr::Point).as_integer(), Some(1));
        assert_eq!(chi(&SpaceExpr::disk(3)).as_integer(), Some(1));
    }

    #[test]
    fn symbolic_double() {
        let d = SpaceExpr::double(
            SpaceExpr::atom("F", CHI_F),
            SpaceExpr::atom("bF", CHI_BF),
        );
        let v = chi(&d);
        assert_eq!(v.coefficient(CHI_F), 2);
        assert_eq!(v.coefficient(CHI_BF), -1);
        assert_eq!(v.to_string(), "2*chi_F - chi_bF");
        assert_eq!(d.to_string(), "double(F; bF)");
    }

    #[test]
    fn boundary_decomposition_examples() {
        let e = boundary_decomposition(3, 2, 1).unwrap();
        assert_eq!(e.to_string(), "glue(prod(bF,D1), prod(F,S0); prod(bF,S0))");
        // χ∂F + 2χF − 2χ∂F
        let v = chi(&e);
        assert_eq!(v.coefficient(CHI_F), 2);
        assert_eq!(v.coefficient(CHI_BF), -1);

        let e = boundary_decomposition(5, 3, 1).unwrap();
        assert_eq!(e.to_string(), "glue(prod(bF,D2), prod(F,S1); prod(bF,S1))");
        assert_eq!(chi(&e), ChiValue::symbol(CHI_BF));

        let e = boundary_decomposition(5, 3, 2).unwrap();
        assert_eq!(e.to_string(), "glue(prod(bF,D1), prod(F,S0); prod(bF,S0))");

        // I = K: just the Milnor boundary.
        assert_eq!(
            chi(&boundary_decomposition(4, 2, 2).unwrap()),
            ChiValue::symbol(CHI_BF)
        );
        assert!(boundary_decomposition(2, 2, 1).is_err());
        assert!(boundary_decomposition(4, 2, 3).is_err());
        assert!(boundary_decomposition(4, 2, 0).is_err());
    }

    #[test]
    fn double_decomposition_examples() {
        for k in 2..6 {
            for i in 1..k {
                let v = chi(&double_decomposition(k, i).unwrap());
                let (sf, sbf) = stage_symbols(i + 1);
                assert_eq!(v.coefficient(&sf), 2);
                assert_eq!(v.coefficient(&sbf), -1);
                assert_eq!(v.substitute(&sbf, 0).coefficient(&sf), 2);
                assert_eq!(
                    v.substitute_all(&[(&sf, 1), (&sbf, 2)]).as_integer(),
                    Some(0)
                );
            }
            assert!(double_decomposition(k, k).is_err());
            assert!(double_decomposition(k, 0).is_err());
        }
    }

    #[test]
    fn tube_sphere_symbolic_form() {
        let v = chi(&tube_sphere_decomposition(5, 3, 1).unwrap());
        // χF1·2 + χL1 − χ∂F1·2
        assert_eq!(v.coefficient("chi_F1"), 2);
        assert_eq!(v.coefficient("chi_L1"), 1);
        assert_eq!(v.coefficient("chi_bF1"), -2);
        let v = chi(&tube_sphere_decomposition(5, 3, 2).unwrap());
        assert_eq!(v.symbols(), vec!["chi_L2".to_string()]);
        assert!(tube_sphere_decomposition(3, 3, 1).is_err());
    }

    #[test]
    fn ladder_identities() {
        for n in 0..20 {
            assert_eq!(sphere_chi(n) + sphere_chi(n + 1), 2);
            let two_disks = SpaceExpr::glue(
                SpaceExpr::disk(n as u32),
                SpaceExpr::disk(n as u32),
                SpaceExpr::sphere(n - 1),
            );
            assert_eq!(chi(&two_disks), chi(&SpaceExpr::sphere(n)));
        }
    }

    #[test]
    fn substitution_of_products() {
        let e = SpaceExpr::product(vec![
            SpaceExpr::atom("F", CHI_F),
            SpaceExpr::atom("F", CHI_F),
        ]);
        let v = chi(&e);
        assert_eq!(v.degree(), 2);
        assert_eq!(v.substitute(CHI_F, -3).as_integer(), Some(9));
    }
}
