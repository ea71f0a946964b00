//! Noncommutative polynomials in `ρ(a)` and `t(x)`, evaluated on a Fock truncation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{creation, left_action, AElement, Correspondence, TruncatedFockSpace, XElement};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, random::random_complex, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symbol {
    /// `ρ(a_i)`, indexing the polynomial's coefficient table.
    Rho(usize),
    /// `t(x_j)`, indexing the polynomial's correspondence table.
    T(usize),
}

/// `Σ c · s₁ s₂ … s_k`; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorPoly {
    pub a_table: Vec<AElement>,
    pub x_table: Vec<XElement>,
    pub terms: Vec<(Complex64, Vec<Symbol>)>,
}

impl TensorPoly {
    pub fn new(a_table: Vec<AElement>, x_table: Vec<XElement>) -> Self {
        Self {
            a_table,
            x_table,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, c: Complex64, word: Vec<Symbol>) -> Self {
        self.terms.push((c, word));
        self
    }

    /// `ρ(a)`.
    pub fn rho(a: AElement) -> Self {
        Self::new(vec![a], Vec::new()).with_term(Complex64::new(1.0, 0.0), vec![Symbol::Rho(0)])
    }

    /// `t(x)`.
    pub fn t(x: XElement) -> Self {
        Self::new(Vec::new(), vec![x]).with_term(Complex64::new(1.0, 0.0), vec![Symbol::T(0)])
    }

    /// Largest number of `t` symbols in a word.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, w)| w.iter().filter(|s| matches!(s, Symbol::T(_))).count())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self, corr: &Correspondence) -> Result<()> {
        for (_, word) in &self.terms {
            for s in word {
                match *s {
                    Symbol::Rho(i) => {
                        let a = self.a_table.get(i).ok_or_else(|| {
                            Error::BadSymbol(format!("ρ index {i} with {} coefficients", self.a_table.len()))
                        })?;
                        corr.check_a(a).map_err(|e| Error::BadSymbol(format!("ρ({i}): {e}")))?;
                    }
                    Symbol::T(j) => {
                        let x = self.x_table.get(j).ok_or_else(|| {
                            Error::BadSymbol(format!("t index {j} with {} elements", self.x_table.len()))
                        })?;
                        corr.check_x(x).map_err(|e| Error::BadSymbol(format!("t({j}): {e}")))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Matrix of each table entry on `f`.
pub(crate) fn symbol_matrices(
    f: &TruncatedFockSpace,
    poly: &TensorPoly,
) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
    poly.validate(f.correspondence())?;
    let rho = poly
        .a_table
        .iter()
        .map(|a| left_action(f, a))
        .collect::<Result<Vec<_>>>()?;
    let t = poly
        .x_table
        .iter()
        .map(|x| creation(f, x))
        .collect::<Result<Vec<_>>>()?;
    Ok((rho, t))
}

/// Realization of `poly` on the truncation.
pub fn eval_tensor_poly(f: &TruncatedFockSpace, poly: &TensorPoly) -> Result<ComplexMatrix> {
    let (rho, t) = symbol_matrices(f, poly)?;
    let n = f.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (c, word) in &poly.terms {
        let mut m = ComplexMatrix::identity(n);
        for s in word {
            m = match *s {
                Symbol::Rho(i) => &m * &rho[i],
                Symbol::T(j) => &m * &t[j],
            };
        }
        out += &m.scale(*c);
    }
    Ok(out)
}

/// `‖poly‖` at each cutoff; truncation-monotone lower bounds for the tensor-algebra norm.
pub fn toeplitz_norm_estimate(corr: &Correspondence, poly: &TensorPoly, cutoffs: &[usize]) -> Result<Vec<f64>> {
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("cutoffs must be strictly increasing".into()));
    }
    cutoffs
        .iter()
        .map(|&n| {
            let f = TruncatedFockSpace::new(corr.clone(), n)?;
            Ok(operator_norm(&eval_tensor_poly(&f, poly)?))
        })
        .collect()
}

/// Seeded polynomial with `terms` words of `t`-degree at most `degree`, each word
/// prefixed by a random `ρ` so that the coefficient algebra participates.
pub fn random_tensor_poly<R: Rng + ?Sized>(
    corr: &Correspondence,
    degree: usize,
    terms: usize,
    rng: &mut R,
) -> TensorPoly {
    let alg = corr.coefficients();
    let a_count = 2;
    let x_count = 2.max(degree);
    let a_table = (0..a_count).map(|_| alg.random_element(rng)).collect();
    let x_table = (0..x_count).map(|_| corr.random_x(rng)).collect();
    let mut poly = TensorPoly::new(a_table, x_table);
    for k in 0..terms {
        let len = if degree == 0 { 0 } else { k % (degree + 1) };
        let mut word = vec![Symbol::Rho(rng.random_range(0..a_count))];
        for _ in 0..len {
            word.push(Symbol::T(rng.random_range(0..x_count)));
        }
        poly = poly.with_term(random_complex(rng), word);
    }
    poly
}
