//! Polynomial map-germs `f: (R^M, 0) -> (R^K, 0)` and their stage maps.
//!
//! Coefficients are exact rationals; evaluation and Jacobians run in binary64
//! through compiled copies built once at construction. The Jacobian entries
//! are compiled from exact symbolic partial derivatives.

mod parse;
mod polynomial;
pub mod rank;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{line_col, parse_germ, parse_polynomial, ExprError};
pub use polynomial::{CompiledPoly, Exponents, Polynomial, PowerTable};
pub use rank::{numerical_rank, rank_profile, singular_values, RankProfile, RankTolerance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("M>K≥2 violated: source dimension {source_dim}, target dimension {target_dim}")]
    Dimension { source_dim: usize, target_dim: usize },
    #[error("component {component} has a nonzero constant term (line {line}, column {column}); germs must vanish at the origin")]
    ConstantTerm {
        component: usize,
        line: usize,
        column: usize,
    },
    #[error("expected {expected} variables, found {found}")]
    VariableCount { expected: usize, found: usize },
    #[error("component {component} is a polynomial in {found} variables, expected {expected}")]
    ComponentArity {
        component: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("stage {stage} out of range 1..={target_dim}")]
    StageOutOfRange { stage: usize, target_dim: usize },
}

/// Declared (not verified) properties of a germ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermFlags {
    #[serde(default)]
    pub isolated_critical_point: bool,
    #[serde(default)]
    pub isolated_critical_value: bool,
}

/// A polynomial map `R^M -> R^k` with no dimension constraints; `k` may be 0.
///
/// This is the type the samplers work with: stage maps `f_I` and `f_{K-I}`
/// are `PolyMap`s even when they have a single component.
#[derive(Debug, Clone)]
pub struct PolyMap {
    source_dim: usize,
    components: Vec<Polynomial>,
    values: Vec<CompiledPoly>,
    // jac[i][j] = d f_i / d x_j
    jac: Vec<Vec<CompiledPoly>>,
    max_exp: u32,
}

impl PolyMap {
    pub fn new(source_dim: usize, components: Vec<Polynomial>) -> Result<Self, GermError> {
        for (i, p) in components.iter().enumerate() {
            if p.num_vars() != source_dim {
                return Err(GermError::ComponentArity {
                    component: i + 1,
                    expected: source_dim,
                    found: p.num_vars(),
                });
            }
        }
        let values: Vec<CompiledPoly> = components.iter().map(Polynomial::compile).collect();
        let jac: Vec<Vec<CompiledPoly>> = components
            .iter()
            .map(|p| (0..source_dim).map(|j| p.derivative(j).compile()).collect())
            .collect();
        let max_exp = values
            .iter()
            .map(CompiledPoly::max_exponent)
            .max()
            .unwrap_or(0);
        Ok(Self {
            source_dim,
            components,
            values,
            jac,
            max_exp,
        })
    }

    pub fn empty(source_dim: usize) -> Self {
        Self::new(source_dim, Vec::new()).expect("empty map is always valid")
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn check(&self, x: &[f64]) -> Result<(), GermError> {
        if x.len() != self.source_dim {
            return Err(GermError::DimensionMismatch {
                expected: self.source_dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `out[i] = f_i(x)`, without dimension checks.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let table = PowerTable::new(x, self.max_exp);
        for (o, p) in out.iter_mut().zip(&self.values) {
            *o = p.eval_with_powers(&table.values, table.stride);
        }
    }

    /// Row-major `k x M` Jacobian into `out`, without dimension checks.
    pub fn jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        let table = PowerTable::new(x, self.max_exp);
        let m = self.source_dim;
        for (i, row) in self.jac.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                out[i * m + j] = p.eval_with_powers(&table.values, table.stride);
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, GermError> {
        self.check(x)?;
        let mut out = vec![0.0; self.target_dim()];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, GermError> {
        self.check(x)?;
        let mut buf = vec![0.0; self.target_dim() * self.source_dim];
        self.jacobian_into(x, &mut buf);
        Ok(DMatrix::from_row_slice(self.target_dim(), self.source_dim, &buf))
    }

    /// Sub-map made of components `range` (0-based, half open).
    pub fn slice(&self, range: std::ops::Range<usize>) -> PolyMap {
        PolyMap::new(self.source_dim, self.components[range].to_vec())
            .expect("slicing preserves arity")
    }
}

/// A germ `f: (R^M, 0) -> (R^K, 0)` with `M > K >= 2`.
#[derive(Debug, Clone)]
pub struct MapGerm {
    pub name: Option<String>,
    pub description: Option<String>,
    pub flags: GermFlags,
    variables: Vec<String>,
    map: PolyMap,
}

impl MapGerm {
    pub fn new(
        source_dim: usize,
        components: Vec<Polynomial>,
        flags: GermFlags,
    ) -> Result<Self, GermError> {
        let variables = (1..=source_dim).map(|i| format!("x{i}")).collect();
        Self::with_variables(source_dim, components, flags, variables)
    }

    pub fn with_variables(
        source_dim: usize,
        components: Vec<Polynomial>,
        flags: GermFlags,
        variables: Vec<String>,
    ) -> Result<Self, GermError> {
        let k = components.len();
        if !(source_dim > k && k >= 2) {
            return Err(GermError::Dimension {
                source_dim,
                target_dim: k,
            });
        }
        if variables.len() != source_dim {
            return Err(GermError::VariableCount {
                expected: source_dim,
                found: variables.len(),
            });
        }
        for (i, p) in components.iter().enumerate() {
            if p.num_vars() == source_dim && !p.constant_term().is_zero() {
                return Err(GermError::ConstantTerm {
                    component: i + 1,
                    line: 0,
                    column: 0,
                });
            }
        }
        let map = PolyMap::new(source_dim, components)?;
        Ok(Self {
            name: None,
            description: None,
            flags,
            variables,
            map,
        })
    }

    pub fn source_dim(&self) -> usize {
        self.map.source_dim()
    }

    pub fn target_dim(&self) -> usize {
        self.map.target_dim()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn components(&self) -> &[Polynomial] {
        self.map.components()
    }

    pub fn as_map(&self) -> &PolyMap {
        &self.map
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, GermError> {
        self.map.evaluate(x)
    }

    /// `K x M` Jacobian `df(x)`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, GermError> {
        self.map.jacobian(x)
    }

    /// Splits `f` into `f_I = Π_I ∘ f` and `f_{K-I} = Π_{K-I} ∘ f`.
    pub fn stage(&self, stage: usize) -> Result<StageMaps, GermError> {
        let k = self.target_dim();
        if stage < 1 || stage > k {
            return Err(GermError::StageOutOfRange {
                stage,
                target_dim: k,
            });
        }
        Ok(StageMaps {
            stage,
            f_i: self.map.slice(0..stage),
            f_rest: self.map.slice(stage..k),
        })
    }

    /// Text form of the components, one polynomial per line.
    pub fn describe(&self) -> Vec<String> {
        self.components()
            .iter()
            .map(|p| p.display_with(&self.variables).to_string())
            .collect()
    }
}

/// The two projections of `f` at stage `I`. At `I = K` the second map is
/// empty (the convention `f_0 ≡ 0`).
#[derive(Debug, Clone)]
pub struct StageMaps {
    pub stage: usize,
    pub f_i: PolyMap,
    pub f_rest: PolyMap,
}
