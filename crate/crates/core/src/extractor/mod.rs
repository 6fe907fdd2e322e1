//! Three-variable maps `a(z) x y + b(z) x^2 g(y) + h(y, z)`: value
//! histograms, their exponential sums, sign sums and entropy scans.

mod dft;
mod moments;

pub use dft::{exp_sums_fast, exp_sums_naive, max_relative_error, SpectrumResult};
pub use moments::{
    mu_census, mu_census_brute, mu_t_second_moment, nu_census, nu_second_moment_brute,
    MomentCensus, MuTMoment, NuCensus, Point,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{Budget, MAX_TRIPLES};
use crate::error::{Error, Result};
use crate::expander::{least_squares_slope, set_size_for};
use crate::field::{derive_seed, sample_subset, FpSet, IntPoly, MapSpec, PrimeField, Term};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractorSpec {
    pub a: IntPoly,
    pub b: IntPoly,
    pub g: IntPoly,
    /// Two-variable map in `(y, z)`.
    pub h: MapSpec,
}

impl ExtractorSpec {
    pub fn new(a: IntPoly, b: IntPoly, g: IntPoly, h: MapSpec) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::InvalidSpec("a and b must be nonzero".into()));
        }
        if g.degree().unwrap_or(0) < 2 {
            return Err(Error::InvalidSpec("g must have degree at least 2".into()));
        }
        h.ensure_arity(2)?;
        Ok(ExtractorSpec { a, b, g, h })
    }

    /// `z x y + z x^2 y^2`.
    pub fn reference() -> Self {
        ExtractorSpec {
            a: IntPoly::x(),
            b: IntPoly::x(),
            g: IntPoly::monomial(2, 1),
            h: MapSpec::new(2, Vec::new()).expect("empty sum is valid"),
        }
    }

    pub fn map(&self) -> MapSpec {
        let main = MapSpec::new(
            3,
            vec![
                Term::monomial(1, &[1, 1, 0]).with_poly(2, self.a.clone()),
                Term::monomial(1, &[2, 0, 0])
                    .with_poly(1, self.g.clone())
                    .with_poly(2, self.b.clone()),
            ],
        )
        .expect("well-formed terms");
        let h = self.h.embed(3, &[1, 2]).expect("h has arity 2");
        main.plus(&h).expect("same arity")
    }
}

fn shared_field<'a>(sets: &[&'a FpSet]) -> Result<&'a PrimeField> {
    for s in &sets[1..] {
        sets[0].ensure_same_field(s)?;
    }
    Ok(sets[0].field())
}

/// `c(w) = #{(x, y, z) in A x B x C : F(x, y, z) = w}`.
pub fn value_histogram(
    spec: &MapSpec,
    a: &FpSet,
    b: &FpSet,
    c: &FpSet,
    budget: Budget,
) -> Result<Vec<u64>> {
    spec.ensure_arity(3)?;
    let field = shared_field(&[a, b, c])?;
    let cost = a.len() as u128 * b.len() as u128 * c.len() as u128;
    budget.check("histogram triples", cost, MAX_TRIPLES)?;
    let p = field.p() as usize;
    let xs = a.to_vec();
    let ys = b.to_vec();
    let hist = c
        .to_vec()
        .into_par_iter()
        .fold(
            || vec![0u64; p],
            |mut h, z| {
                for &x in &xs {
                    for &y in &ys {
                        h[spec.eval_unchecked(field, &[x, y, z]) as usize] += 1;
                    }
                }
                h
            },
        )
        .reduce(
            || vec![0u64; p],
            |mut acc, h| {
                acc.iter_mut().zip(h).for_each(|(x, y)| *x += y);
                acc
            },
        );
    Ok(hist)
}

/// Exponential sums of `spec` over `A x B x C`, through the fast transform.
pub fn exp_sums_all(hist: &[u64], field: &PrimeField) -> SpectrumResult {
    exp_sums_fast(hist, field)
}

/// `sgn sin(2 pi w / p)`: `+1` on `[1, (p-1)/2]`, `-1` above, `0` at zero.
pub fn sgn_sin(w: u64, p: u64) -> i64 {
    if w == 0 {
        0
    } else if w <= (p - 1) / 2 {
        1
    } else {
        -1
    }
}

/// `sum sgn sin(2 pi F / p)` over `A x B x C`, evaluated term by term.
pub fn sgn_sin_sum(spec: &MapSpec, a: &FpSet, b: &FpSet, c: &FpSet) -> Result<i64> {
    spec.ensure_arity(3)?;
    let field = shared_field(&[a, b, c])?;
    if field.p() == 2 {
        return Err(Error::InvalidSpec("sign sums need an odd prime".into()));
    }
    let p = field.p();
    let ys = b.to_vec();
    let zs = c.to_vec();
    Ok(a
        .to_vec()
        .into_par_iter()
        .map(|x| {
            let mut s = 0i64;
            for &y in &ys {
                for &z in &zs {
                    s += sgn_sin(spec.eval_unchecked(field, &[x, y, z]), p);
                }
            }
            s
        })
        .sum())
}

/// The same sum from a value histogram.
pub fn sgn_sin_from_histogram(hist: &[u64]) -> i64 {
    let p = hist.len() as u64;
    let half = ((p - 1) / 2) as usize;
    let pos: u64 = hist[1..=half].iter().sum();
    let neg: u64 = hist[half + 1..].iter().sum();
    pos as i64 - neg as i64
}

/// `#{z in C : a(z) b(z) = 0}`.
pub fn c0_size(spec: &ExtractorSpec, c: &FpSet) -> usize {
    let f = c.field();
    c.iter()
        .filter(|&z| f.mul(spec.a.eval(f, z), spec.b.eval(f, z)) == 0)
        .count()
}

/// `alpha / 8 (2 + gamma / 2 - 1 / alpha)`
pub fn epsilon_formula(alpha: f64, gamma: f64) -> f64 {
    alpha / 8.0 * (2.0 + gamma / 2.0 - 1.0 / alpha)
}

/// `p^(((22 - gamma / 2) alpha + 1) / 8)`
pub fn theorem_bound(alpha: f64, gamma: f64, p: f64) -> f64 {
    p.powf(((22.0 - gamma / 2.0) * alpha + 1.0) / 8.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub alpha: f64,
    pub p: u64,
    pub trial: u64,
    pub set_size: u64,
    /// `max_{r != 0} |S_r| / (|A||B||C|)`
    pub spectral_bias: f64,
    /// `|sgn sin sum| / (|A||B||C|)`
    pub sign_bias: f64,
    pub c0_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyFit {
    pub alpha: f64,
    /// Minus the slope of `ln(median spectral bias)` against `ln p`.
    pub epsilon_hat: Option<f64>,
    /// The same fit on the sign bias; primes with zero median are skipped.
    pub epsilon_hat_sign: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyScan {
    pub rows: Vec<EntropyRow>,
    pub fits: Vec<EntropyFit>,
}

/// Random sets of size `floor(p^alpha)` for every `(alpha, p, trial)`; the
/// sets depend only on `(seed, p, trial)` and the size.
pub fn entropy_scan(
    spec: &ExtractorSpec,
    alphas: &[f64],
    primes: &[u64],
    trials: u64,
    seed: u64,
    budget: Budget,
) -> Result<EntropyScan> {
    if trials == 0 {
        return Err(Error::InvalidSpec("trials must be at least 1".into()));
    }
    let map = spec.map();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidSpec(format!("alpha {alpha} outside (0, 1]")));
        }
        let mut fit_spec = (Vec::new(), Vec::new());
        let mut fit_sign = (Vec::new(), Vec::new());
        for &p in primes {
            let field = PrimeField::new(p)?;
            if p == 2 {
                return Err(Error::InvalidSpec("sign sums need an odd prime".into()));
            }
            let m = set_size_for(p, alpha);
            if m == 0 {
                return Err(Error::InvalidSpec(format!("empty sets at p = {p}")));
            }
            let mut batch = Vec::new();
            for trial in 0..trials {
                let draw = |stream| sample_subset(&field, m, derive_seed(seed, &[p, trial, stream]));
                let (a, b, c) = (draw(0)?, draw(1)?, draw(2)?);
                let hist = value_histogram(&map, &a, &b, &c, budget)?;
                let total = (m as f64).powi(3);
                let spectrum = exp_sums_fast(&hist, &field);
                let top = spectrum.max_nontrivial.map_or(0.0, |(_, v)| v);
                batch.push(EntropyRow {
                    alpha,
                    p,
                    trial,
                    set_size: m,
                    spectral_bias: (top / total).min(1.0),
                    sign_bias: sgn_sin_from_histogram(&hist).unsigned_abs() as f64 / total,
                    c0_size: c0_size(spec, &c),
                });
            }
            let med = |f: fn(&EntropyRow) -> f64| {
                crate::expander::median(&batch.iter().map(f).collect::<Vec<_>>())
            };
            let ms = med(|r| r.spectral_bias);
            if ms > 0.0 {
                fit_spec.0.push((p as f64).ln());
                fit_spec.1.push(ms.ln());
            }
            let mg = med(|r| r.sign_bias);
            if mg > 0.0 {
                fit_sign.0.push((p as f64).ln());
                fit_sign.1.push(mg.ln());
            }
            rows.extend(batch);
        }
        fits.push(EntropyFit {
            alpha,
            epsilon_hat: least_squares_slope(&fit_spec.0, &fit_spec.1).map(|s| -s),
            epsilon_hat_sign: least_squares_slope(&fit_sign.0, &fit_sign.1).map(|s| -s),
        });
    }
    Ok(EntropyScan { rows, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_map_spec;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn reference_map_renders() {
        let m = ExtractorSpec::reference().map();
        let f = field(7);
        // z x y + z x^2 y^2 at (1, 2, 3) = 6 + 12 = 18 = 4 mod 7
        assert_eq!(m.eval(&f, &[1, 2, 3]).unwrap(), 4);
    }

    #[test]
    fn histogram_examples() {
        let f = field(7);
        let one = FpSet::singleton(&f, 2);
        let m = ExtractorSpec::reference().map();
        let h = value_histogram(&m, &one, &one, &one, Budget::ENFORCED).unwrap();
        assert_eq!(h.iter().sum::<u64>(), 1);
        let full = FpSet::full(&f);
        let sum = parse_map_spec("x + y + z", Some(3)).unwrap();
        let h = value_histogram(&sum, &full, &full, &full, Budget::ENFORCED).unwrap();
        assert!(h.iter().all(|&c| c == 49));
        let two = FpSet::from_elements(&f, [1, 2]);
        let h = value_histogram(&m, &two, &two, &two, Budget::ENFORCED).unwrap();
        assert_eq!(h.iter().sum::<u64>(), 8);
    }

    #[test]
    fn histogram_budget() {
        let f = field(1009);
        let big = FpSet::full(&f);
        let m = ExtractorSpec::reference().map();
        assert!(matches!(
            value_histogram(&m, &big, &big, &big, Budget::ENFORCED),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sign_sums() {
        let f = field(11);
        let full = FpSet::full(&f);
        let one = FpSet::singleton(&f, 3);
        let x = parse_map_spec("x", Some(3)).unwrap();
        assert_eq!(sgn_sin_sum(&x, &full, &one, &one).unwrap(), 0);
        let zero = MapSpec::new(3, Vec::new()).unwrap();
        assert_eq!(sgn_sin_sum(&zero, &full, &full, &one).unwrap(), 0);
        let m = ExtractorSpec::reference().map();
        let a = FpSet::from_elements(&f, [1, 4, 5]);
        let direct = sgn_sin_sum(&m, &a, &full, &a).unwrap();
        let hist = value_histogram(&m, &a, &full, &a, Budget::ENFORCED).unwrap();
        assert_eq!(direct, sgn_sin_from_histogram(&hist));
    }

    #[test]
    fn formulas() {
        assert_eq!(epsilon_formula(0.5, 0.0), 0.0);
        let v = theorem_bound(0.5, 0.1, 1e4);
        let expected = 10f64.powf(4.0 * ((22.0 - 0.05) / 2.0 + 1.0) / 8.0);
        assert!((v - expected).abs() / expected < 1e-9);
        assert!(epsilon_formula(0.6, 0.2) > epsilon_formula(0.6, 0.1));
    }

    #[test]
    fn c0_counts_roots() {
        let f = field(7);
        let spec = ExtractorSpec::reference();
        assert_eq!(c0_size(&spec, &FpSet::full(&f)), 1);
    }

    #[test]
    fn scan_is_normalized_and_reproducible() {
        let spec = ExtractorSpec::reference();
        let s = entropy_scan(&spec, &[0.5, 0.7], &[101, 211], 2, 5, Budget::ENFORCED).unwrap();
        assert_eq!(s.rows.len(), 8);
        for r in &s.rows {
            assert!((0.0..=1.0).contains(&r.spectral_bias));
            assert!((0.0..=1.0).contains(&r.sign_bias));
        }
        assert_eq!(s, entropy_scan(&spec, &[0.5, 0.7], &[101, 211], 2, 5, Budget::ENFORCED).unwrap());
    }
}
