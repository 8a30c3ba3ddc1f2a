//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms live in a `BTreeMap` keyed by exponent vector, so the representation
//! is canonical: no repeated monomials and no zero coefficients. Numerical
//! work goes through [`CompiledPoly`], a flattened binary64 copy.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; num_vars], c);
        }
        p
    }

    /// The coordinate function `x_index`.
    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable index out of range");
        let mut e = vec![0; num_vars];
        e[index] = 1;
        let mut p = Self::zero(num_vars);
        p.terms.insert(e, BigRational::one());
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// repeated monomials and dropping zero coefficients.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (BigRational, Exponents)>,
    {
        let mut p = Self::zero(num_vars);
        for (c, e) in terms {
            assert_eq!(e.len(), num_vars, "exponent vector has wrong length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&vec![0; self.num_vars])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Returns the constant value if this polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        Self {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e.clone(), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.num_vars, BigRational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact partial derivative with respect to variable `index`.
    pub fn derivative(&self, index: usize) -> Self {
        assert!(index < self.num_vars);
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            let k = e[index];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[index] = k - 1;
            out.add_term(e2, c * BigRational::from_integer(BigInt::from(k)));
        }
        out
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.num_vars);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }

    /// Formats the polynomial using the given variable names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, names }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.num_vars).map(|i| format!("x{i}")).collect();
        let shown = self.display_with(&names).to_string();
        write!(f, "{shown}")
    }
}

struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        // Highest total degree first reads more naturally.
        let mut terms: Vec<_> = self.poly.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = e.iter().all(|&k| k == 0);
            let mut first = true;
            if is_const || !mag.is_one() {
                write!(f, "{mag}")?;
                first = false;
            }
            for (name, &k) in self.names.iter().zip(e) {
                if k == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                if k == 1 {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut acc: BTreeMap<Exponents, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial {
            num_vars: self.num_vars,
            terms: acc,
        }
    }
}

/// Binary64 copy of a polynomial laid out for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    num_vars: usize,
    coeffs: Vec<f64>,
    // row-major, `num_vars` exponents per term
    exps: Vec<u32>,
    max_exp: u32,
}

impl CompiledPoly {
    fn new(p: &Polynomial) -> Self {
        let mut coeffs = Vec::with_capacity(p.terms.len());
        let mut exps = Vec::with_capacity(p.terms.len() * p.num_vars);
        let mut max_exp = 0;
        for (e, c) in &p.terms {
            coeffs.push(c.to_f64().unwrap_or(f64::NAN));
            exps.extend_from_slice(e);
            max_exp = max_exp.max(e.iter().copied().max().unwrap_or(0));
        }
        Self {
            num_vars: p.num_vars,
            coeffs,
            exps,
            max_exp,
        }
    }

    pub fn max_exponent(&self) -> u32 {
        self.max_exp
    }

    /// Evaluates against a power table where `powers[j * stride + k] = x_j^k`.
    #[inline]
    pub fn eval_with_powers(&self, powers: &[f64], stride: usize) -> f64 {
        let n = self.num_vars;
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[t * n..(t + 1) * n];
            let mut m = c;
            for (j, &k) in e.iter().enumerate() {
                if k != 0 {
                    m *= powers[j * stride + k as usize];
                }
            }
            acc += m;
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let table = PowerTable::new(x, self.max_exp);
        self.eval_with_powers(&table.values, table.stride)
    }
}

/// `x_j^k` for every coordinate `j` and `0 <= k <= max_exp`.
#[derive(Debug, Clone)]
pub struct PowerTable {
    pub values: Vec<f64>,
    pub stride: usize,
}

impl PowerTable {
    pub fn new(x: &[f64], max_exp: u32) -> Self {
        let stride = max_exp as usize + 1;
        let mut values = vec![1.0; x.len() * stride];
        for (j, &xj) in x.iter().enumerate() {
            let row = &mut values[j * stride..(j + 1) * stride];
            for k in 1..stride {
                row[k] = row[k - 1] * xj;
            }
        }
        Self { values, stride }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let x = Polynomial::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.num_terms(), 0);
    }

    #[test]
    fn derivative_of_monomial() {
        // 3/2 x^3 y -> d/dx = 9/2 x^2 y
        let p = Polynomial::from_terms(2, [(q(3, 2), vec![3, 1])]);
        let dp = p.derivative(0);
        assert_eq!(dp, Polynomial::from_terms(2, [(q(9, 2), vec![2, 1])]));
        assert!(p.derivative(1).derivative(1).is_zero());
    }

    #[test]
    fn power_matches_repeated_product() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let s = &x + &y;
        let cube = &(&s * &s) * &s;
        assert_eq!(s.pow(3), cube);
        assert_eq!(cube.num_terms(), 4);
    }

    #[test]
    fn compiled_eval_matches_rational_eval() {
        let p = Polynomial::from_terms(
            3,
            [
                (q(1, 1), vec![2, 0, 1]),
                (q(-7, 3), vec![0, 3, 0]),
                (q(5, 4), vec![1, 1, 1]),
            ],
        );
        let xr = [q(1, 2), q(-3, 4), q(2, 5)];
        let xf: Vec<f64> = xr.iter().map(|v| v.to_f64().unwrap()).collect();
        let exact = p.eval_rational(&xr).to_f64().unwrap();
        assert!((p.compile().eval(&xf) - exact).abs() < 1e-15);
    }

    #[test]
    fn display_is_readable() {
        let names = vec!["x".to_string(), "y".to_string()];
        let p = Polynomial::from_terms(2, [(q(1, 1), vec![1, 1]), (q(-3, 2), vec![0, 0])]);
        assert_eq!(p.display_with(&names).to_string(), "x*y - 3/2");
    }
}
