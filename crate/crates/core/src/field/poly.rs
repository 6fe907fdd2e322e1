use std::fmt;

use super::PrimeField;

/// Univariate polynomial with integer coefficients, lowest degree first.
///
/// Trailing zeros are never stored, so the zero polynomial has an empty
/// coefficient vector and `degree() == None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(degree: usize, c: i64) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(1, 1)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Integer degree; `None` stands for the zero polynomial (degree -inf).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficients reduced modulo `p`, trailing zeros removed.
    pub fn reduce(&self, field: &PrimeField) -> Vec<u64> {
        let mut out: Vec<u64> = self.coeffs.iter().map(|&c| field.from_i64(c)).collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }

    pub fn degree_mod(&self, field: &PrimeField) -> Option<usize> {
        self.reduce(field).len().checked_sub(1)
    }

    pub fn is_constant_mod(&self, field: &PrimeField) -> bool {
        self.degree_mod(field).is_none_or(|d| d == 0)
    }

    /// `pi_p(f(x))` by Horner's rule on reduced coefficients.
    pub fn eval(&self, field: &PrimeField, x: u64) -> u64 {
        let x = field.reduce(x);
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field.add(field.mul(acc, x), field.from_i64(c)))
    }

    /// Values of the polynomial on every residue, indexed by the residue.
    pub fn value_table(&self, field: &PrimeField) -> Vec<u64> {
        (0..field.p()).map(|x| self.eval(field, x)).collect()
    }

    pub fn checked_add(&self, other: &IntPoly) -> Option<IntPoly> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).checked_add(other.coeff(i))?);
        }
        Some(IntPoly::new(out))
    }

    pub fn checked_mul(&self, other: &IntPoly) -> Option<IntPoly> {
        if self.is_zero() || other.is_zero() {
            return Some(IntPoly::zero());
        }
        let mut out = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].checked_add(a.checked_mul(b)?)?;
            }
        }
        Some(IntPoly::new(out))
    }

    pub fn checked_scale(&self, c: i64) -> Option<IntPoly> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| a.checked_mul(c))
            .collect::<Option<Vec<_>>>()?;
        Some(IntPoly::new(coeffs))
    }

    pub fn checked_pow(&self, e: u32) -> Option<IntPoly> {
        let mut acc = IntPoly::constant(1);
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Some(acc)
    }

    /// Finds `(u, v)` with `f = u x^k + v` coefficient-wise modulo `p`.
    ///
    /// This is a formal test: `x^p` and `x` are different polynomials here
    /// even though they agree as functions on `F_p`.
    pub fn affine_dependence(&self, k: u32, field: &PrimeField) -> Option<(u64, u64)> {
        assert!(k >= 1, "k must be positive");
        let reduced = self.reduce(field);
        let k = k as usize;
        let other_terms_vanish = reduced
            .iter()
            .enumerate()
            .all(|(i, &c)| i == 0 || i == k || c == 0);
        other_terms_vanish.then(|| {
            let at = |i: usize| reduced.get(i).copied().unwrap_or(0);
            (at(k), at(0))
        })
    }

    /// Renders with the given variable name, e.g. `3*y^2 - y + 1`.
    pub fn display_in(&self, var: char) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            let body = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            match (mag, body.is_empty()) {
                (_, true) => out.push_str(&mag.to_string()),
                (1, false) => out.push_str(&body),
                (_, false) => out.push_str(&format!("{mag}*{body}")),
            }
        }
        out
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in('x'))
    }
}

/// Module-level convenience mirroring the field operation.
pub fn is_affinely_dependent(f: &IntPoly, k: u32, field: &PrimeField) -> Option<(u64, u64)> {
    f.affine_dependence(k, field)
}
