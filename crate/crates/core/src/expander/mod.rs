//! Images, representation counts and collision energy of two-variable maps,
//! the line census behind the expansion bound, and exponent fitting.

mod witness;

pub use witness::{
    bourgain_counterexample, bourgain_family, non_expander_witness, product_form_counterexample,
    BourgainSets, ProductFormSets, WitnessSets,
};

use std::collections::HashSet;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{derive_seed, sample_subset, FpSet, IntPoly, MapSpec, PrimeField};
use crate::incidence::expander_line;

/// `F(x, y) = f(x) + x^k g(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpanderSpec {
    pub f: IntPoly,
    pub k: u32,
    pub g: IntPoly,
}

impl ExpanderSpec {
    pub fn new(f: IntPoly, k: u32, g: IntPoly) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSpec("k must be positive".into()));
        }
        Ok(ExpanderSpec { f, k, g })
    }

    pub fn map(&self) -> MapSpec {
        MapSpec::expander_family(&self.f, self.k, &self.g)
    }

    /// Fails when `f = u x^k + v` modulo `p`.
    pub fn check_prime(&self, field: &PrimeField) -> Result<()> {
        match self.f.affine_dependence(self.k, field) {
            Some(_) => Err(Error::BadPrime {
                p: field.p(),
                k: self.k,
            }),
            None => Ok(()),
        }
    }
}

fn check_inputs(spec: &MapSpec, a: &FpSet, b: &FpSet) -> Result<()> {
    spec.ensure_arity(2)?;
    a.ensure_same_field(b)
}

/// `{F(a, b) : a in A, b in B}`.
pub fn image_set(spec: &MapSpec, a: &FpSet, b: &FpSet) -> Result<FpSet> {
    check_inputs(spec, a, b)?;
    let field = a.field();
    let mut out = FpSet::empty(field);
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            out.insert(spec.eval_unchecked(field, &[x, y]));
        }
    }
    Ok(out)
}

/// `r(z) = #{(a, b) in A x B : F(a, b) = z}`, indexed by `z`.
pub fn representation_counts(spec: &MapSpec, a: &FpSet, b: &FpSet) -> Result<Vec<u64>> {
    check_inputs(spec, a, b)?;
    let field = a.field();
    let mut r = vec![0u64; field.p() as usize];
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            r[spec.eval_unchecked(field, &[x, y]) as usize] += 1;
        }
    }
    Ok(r)
}

/// `sum_z r(z)^2`, the number of collisions `F(x1, y1) = F(x2, y2)`.
pub fn collision_energy(spec: &MapSpec, a: &FpSet, b: &FpSet) -> Result<u128> {
    Ok(energy_of(&representation_counts(spec, a, b)?))
}

/// Collision count by enumerating all quadruples `(x1, x2, y1, y2)`.
pub fn collision_energy_brute(spec: &MapSpec, a: &FpSet, b: &FpSet) -> Result<u128> {
    check_inputs(spec, a, b)?;
    let f = a.field();
    let (xs, ys) = (a.to_vec(), b.to_vec());
    let mut n = 0;
    for &x1 in &xs {
        for &x2 in &xs {
            for &y1 in &ys {
                let v = spec.eval_unchecked(f, &[x1, y1]);
                for &y2 in &ys {
                    n += (v == spec.eval_unchecked(f, &[x2, y2])) as u128;
                }
            }
        }
    }
    Ok(n)
}

fn energy_of(r: &[u64]) -> u128 {
    r.iter().map(|&c| c as u128 * c as u128).sum()
}

/// `ceil(|A|^2 |B|^2 / E)`, a lower bound for the image size.
pub fn cs_lower_bound(size_a: u64, size_b: u64, energy: u128) -> Result<u64> {
    if energy == 0 {
        return Err(Error::ZeroEnergy);
    }
    let n = size_a as u128 * size_b as u128;
    Ok((n * n).div_ceil(energy) as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCensus {
    /// `#{(a, b) in A^2 : b^(k d!) != a^(k d!)}`
    pub x_set_size: u64,
    /// Distinct lines among `l_{x1,x2}`, `(x1, x2) != (0, 0)`.
    pub distinct_lines: u64,
    /// `x_set_size / (k max(k, d))`
    pub census_bound: f64,
    pub census_holds: bool,
    /// `|A|^2 / (2k max(k, d))`, the large-`p` constant.
    pub large_p_bound: f64,
    pub large_p_holds: bool,
}

pub fn x_set_and_line_census(spec: &ExpanderSpec, a: &FpSet) -> Result<LineCensus> {
    let field = a.field();
    spec.check_prime(field)?;
    let d = spec.f.degree_mod(field).unwrap_or(0) as u64;
    let k = spec.k as u64;
    let e = field.factorial_exponent(k, d);
    let elems = a.to_vec();
    let powers: Vec<u64> = elems.iter().map(|&x| field.factorial_power(x, e)).collect();
    let mut x_set_size = 0u64;
    for &pa in &powers {
        x_set_size += powers.iter().filter(|&&pb| pb != pa).count() as u64;
    }
    let mut lines = HashSet::new();
    for &x1 in &elems {
        for &x2 in &elems {
            if let Some(l) = expander_line(field, spec, x1, x2) {
                lines.insert(l);
            }
        }
    }
    let distinct_lines = lines.len() as u64;
    let denom = (k * k.max(d)) as f64;
    let n = elems.len() as f64;
    let census_bound = x_set_size as f64 / denom;
    let large_p_bound = n * n / (2.0 * denom);
    Ok(LineCensus {
        x_set_size,
        distinct_lines,
        census_bound,
        census_holds: distinct_lines as f64 >= census_bound,
        large_p_bound,
        large_p_holds: distinct_lines as f64 >= large_p_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSample {
    pub p: u64,
    pub alpha: f64,
    pub trial: u64,
    pub size_a: u64,
    pub size_b: u64,
    pub image_size: u64,
    pub energy: u128,
    pub cs_lower_bound: u64,
    /// `|C| / |A|`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeSummary {
    pub p: u64,
    pub set_size: u64,
    /// Median over trials of `ln |C|`.
    pub median_ln_image: f64,
    /// Median over trials of `log_p |C|`.
    pub median_log_p_image: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub samples: Vec<ExpansionSample>,
    pub per_prime: Vec<PrimeSummary>,
    /// Least-squares slope of median `ln |C|` against `ln |A|`; `None` with
    /// fewer than two distinct set sizes.
    pub kappa_hat: Option<f64>,
    pub fit_points: usize,
}

/// `floor(p^alpha)`, nudged so exact powers are not lost to rounding.
pub fn set_size_for(p: u64, alpha: f64) -> u64 {
    ((p as f64).powf(alpha) + 1e-9).floor().clamp(0.0, p as f64) as u64
}

/// Seeds of the two random sets for one `(p, trial)`. Shared by every map so
/// comparisons between maps run on identical sets.
pub fn trial_seeds(seed: u64, p: u64, trial: u64) -> (u64, u64) {
    (derive_seed(seed, &[p, trial, 0]), derive_seed(seed, &[p, trial, 1]))
}

/// Random-set expansion of `spec`: `|A| = |B| = floor(p^alpha)` for every
/// prime and trial, followed by a log-log fit across primes.
pub fn expansion_report(
    spec: &MapSpec,
    alpha: f64,
    primes: &[u64],
    trials: u64,
    seed: u64,
) -> Result<ExpansionReport> {
    spec.ensure_arity(2)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidSpec(format!("alpha {alpha} outside (0, 1]")));
    }
    if trials == 0 {
        return Err(Error::InvalidSpec("trials must be at least 1".into()));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec("primes must be strictly ascending".into()));
    }
    let mut samples = Vec::new();
    let mut per_prime = Vec::new();
    for &p in primes {
        let field = PrimeField::new(p)?;
        let m = set_size_for(p, alpha);
        if m == 0 {
            return Err(Error::InvalidSpec(format!("empty sets at p = {p}")));
        }
        let rows: Vec<ExpansionSample> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let (sa, sb) = trial_seeds(seed, p, trial);
                let a = sample_subset(&field, m, sa)?;
                let b = sample_subset(&field, m, sb)?;
                let r = representation_counts(spec, &a, &b)?;
                let image_size = r.iter().filter(|&&c| c > 0).count() as u64;
                let energy = energy_of(&r);
                Ok(ExpansionSample {
                    p,
                    alpha,
                    trial,
                    size_a: m,
                    size_b: m,
                    image_size,
                    energy,
                    cs_lower_bound: cs_lower_bound(m, m, energy)?,
                    ratio: image_size as f64 / m as f64,
                })
            })
            .collect::<Result<_>>()?;
        let ln_images: Vec<f64> = rows.iter().map(|s| (s.image_size as f64).ln()).collect();
        let med = median(&ln_images);
        per_prime.push(PrimeSummary {
            p,
            set_size: m,
            median_ln_image: med,
            median_log_p_image: med / (p as f64).ln(),
        });
        samples.extend(rows);
    }
    let xs: Vec<f64> = per_prime.iter().map(|s| (s.set_size as f64).ln()).collect();
    let ys: Vec<f64> = per_prime.iter().map(|s| s.median_ln_image).collect();
    Ok(ExpansionReport {
        samples,
        kappa_hat: least_squares_slope(&xs, &ys),
        fit_points: per_prime.len(),
        per_prime,
    })
}

/// Like [`expansion_report`] for an `f(x) + x^k g(y)` family, dropping the
/// primes where `f` is affinely dependent on `x^k`.
pub fn expansion_report_for(
    spec: &ExpanderSpec,
    alpha: f64,
    primes: &[u64],
    trials: u64,
    seed: u64,
) -> Result<ExpansionReport> {
    let mut good = Vec::with_capacity(primes.len());
    for &p in primes {
        match spec.check_prime(&PrimeField::new(p)?) {
            Ok(()) => good.push(p),
            Err(e) => warn!("skipping p = {p}: {e}"),
        }
    }
    expansion_report(&spec.map(), alpha, &good, trials, seed)
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Slope of the least-squares line through `(xs, ys)`; `None` when the `x`
/// values do not vary.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}
