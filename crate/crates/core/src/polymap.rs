//! Vector-valued polynomial maps with exact Jacobians.
//!
//! Every smooth map in the solvers (constraint functions, coordinate charts,
//! residual maps) is a [`PolyMap`]. A map with `output_dim = 0` stands for an
//! absent constraint block.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected input of dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("monomial {monomial} of output {output} has {found} exponents, expected {expected}")]
    ExponentLength {
        output: usize,
        monomial: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite coefficient in output {output}")]
    NonFiniteCoefficient { output: usize },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
}

/// `coeff · x₁^e₁ ⋯ xₙ^eₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: f64, exponents: Vec<u32>) -> Self {
        Monomial { coeff, exponents }
    }

    pub fn constant(coeff: f64, input_dim: usize) -> Self {
        Monomial::new(coeff, vec![0; input_dim])
    }

    /// `coeff · x_var^power`.
    pub fn power(coeff: f64, input_dim: usize, var: usize, power: u32) -> Self {
        let mut exponents = vec![0; input_dim];
        exponents[var] = power;
        Monomial::new(coeff, exponents)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .fold(self.coeff, |acc, (&e, &xi)| acc * int_pow(xi, e))
    }

    /// Partial derivative with respect to `var`.
    fn partial(&self, x: &[f64], var: usize) -> f64 {
        let e = self.exponents[var];
        if e == 0 {
            return 0.0;
        }
        self.exponents
            .iter()
            .zip(x)
            .enumerate()
            .fold(self.coeff * f64::from(e), |acc, (i, (&ei, &xi))| {
                if i == var {
                    acc * int_pow(xi, ei - 1)
                } else {
                    acc * int_pow(xi, ei)
                }
            })
    }
}

fn int_pow(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        _ => x.powi(e as i32),
    }
}

/// A polynomial map `R^input_dim → R^output_dim`, one monomial list per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolyMap", into = "RawPolyMap")]
pub struct PolyMap {
    input_dim: usize,
    outputs: Vec<Vec<Monomial>>,
}

#[derive(Serialize, Deserialize)]
struct RawPolyMap {
    input_dim: usize,
    outputs: Vec<Vec<Monomial>>,
}

impl TryFrom<RawPolyMap> for PolyMap {
    type Error = PolyError;

    fn try_from(raw: RawPolyMap) -> Result<Self, PolyError> {
        PolyMap::new(raw.input_dim, raw.outputs)
    }
}

impl From<PolyMap> for RawPolyMap {
    fn from(m: PolyMap) -> Self {
        RawPolyMap {
            input_dim: m.input_dim,
            outputs: m.outputs,
        }
    }
}

impl PolyMap {
    pub fn new(input_dim: usize, outputs: Vec<Vec<Monomial>>) -> Result<Self, PolyError> {
        for (o, comp) in outputs.iter().enumerate() {
            for (k, mono) in comp.iter().enumerate() {
                if mono.exponents.len() != input_dim {
                    return Err(PolyError::ExponentLength {
                        output: o,
                        monomial: k,
                        expected: input_dim,
                        found: mono.exponents.len(),
                    });
                }
                if !mono.coeff.is_finite() {
                    return Err(PolyError::NonFiniteCoefficient { output: o });
                }
            }
        }
        Ok(PolyMap { input_dim, outputs })
    }

    /// The map with no outputs.
    pub fn empty(input_dim: usize) -> Self {
        PolyMap {
            input_dim,
            outputs: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        PolyMap {
            input_dim: dim,
            outputs: (0..dim)
                .map(|i| vec![Monomial::power(1.0, dim, i, 1)])
                .collect(),
        }
    }

    pub fn constant(values: &[f64], input_dim: usize) -> Self {
        PolyMap {
            input_dim,
            outputs: values
                .iter()
                .map(|&c| vec![Monomial::constant(c, input_dim)])
                .collect(),
        }
    }

    /// `x ↦ A x + b`.
    pub fn affine(a: &Matrix, b: &Vector) -> Result<Self, PolyError> {
        if b.len() != a.rows() {
            return Err(PolyError::DimensionMismatch {
                expected: a.rows(),
                found: b.len(),
            });
        }
        let n = a.cols();
        let outputs = (0..a.rows())
            .map(|i| {
                let mut comp: Vec<Monomial> = (0..n)
                    .filter(|&j| a[(i, j)] != 0.0)
                    .map(|j| Monomial::power(a[(i, j)], n, j, 1))
                    .collect();
                if b[i] != 0.0 {
                    comp.push(Monomial::constant(b[i], n));
                }
                comp
            })
            .collect();
        PolyMap::new(n, outputs)
    }

    /// Concatenates the outputs of maps sharing an input dimension.
    pub fn stack(maps: &[&PolyMap]) -> Result<Self, PolyError> {
        let input_dim = maps.first().map_or(0, |m| m.input_dim);
        let mut outputs = Vec::new();
        for m in maps {
            if m.input_dim != input_dim {
                return Err(PolyError::DimensionMismatch {
                    expected: input_dim,
                    found: m.input_dim,
                });
            }
            outputs.extend(m.outputs.iter().cloned());
        }
        Ok(PolyMap { input_dim, outputs })
    }

    /// Keeps the listed output components, in order.
    pub fn select_outputs(&self, indices: &[usize]) -> PolyMap {
        PolyMap {
            input_dim: self.input_dim,
            outputs: indices.iter().map(|&i| self.outputs[i].clone()).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[Vec<Monomial>] {
        &self.outputs
    }

    /// Largest total degree over all monomials (0 for an empty map).
    pub fn degree(&self) -> u32 {
        self.outputs
            .iter()
            .flatten()
            .map(|m| m.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn check_input(&self, x: &Vector) -> Result<(), PolyError> {
        if x.len() == self.input_dim {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            })
        }
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector, PolyError> {
        self.check_input(x)?;
        Ok(Vector::from_vec(
            self.outputs
                .iter()
                .map(|comp| comp.iter().map(|m| m.eval(x)).sum())
                .collect(),
        ))
    }

    /// Analytic Jacobian, `output_dim × input_dim`.
    pub fn jacobian(&self, x: &Vector) -> Result<Matrix, PolyError> {
        self.check_input(x)?;
        let mut jac = Matrix::zeros(self.output_dim(), self.input_dim);
        for (i, comp) in self.outputs.iter().enumerate() {
            for j in 0..self.input_dim {
                jac[(i, j)] = comp.iter().map(|m| m.partial(x, j)).sum();
            }
        }
        Ok(jac)
    }

    /// Max entrywise gap between the analytic Jacobian and central differences.
    pub fn check_jacobian(&self, x: &Vector, h: f64) -> Result<f64, PolyError> {
        if h.is_nan() || h <= 0.0 {
            return Err(PolyError::BadStep(h));
        }
        let jac = self.jacobian(x)?;
        let mut worst = 0.0f64;
        for j in 0..self.input_dim {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[j] += h;
            minus[j] -= h;
            let fp = self.eval(&plus)?;
            let fm = self.eval(&minus)?;
            for i in 0..self.output_dim() {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                worst = worst.max((fd - jac[(i, j)]).abs());
            }
        }
        Ok(worst)
    }
}
