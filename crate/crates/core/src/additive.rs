//! Counting solutions of `a + b = F(c, d)`, the multiplication table,
//! Weil sums, interval preimages and the well-spacing sum.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{Budget, MAX_MULT_TABLE, MAX_QUADRUPLES};
use crate::error::{Error, Result};
use crate::expander::representation_counts;
use crate::extractor::{exp_sums_fast, value_histogram};
use crate::field::{derive_seed, rng_from_seed, sample_subset_with, FpSet, IntPoly, MapSpec, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationCount {
    pub n: u128,
    /// `|A||B||C||D|`; the expected count is `product / p`.
    pub product: u128,
    pub p: u64,
    /// `|N p - product|`, the deviation scaled by `p` so it stays exact.
    pub scaled_deviation: u128,
}

impl EquationCount {
    fn new(n: u128, product: u128, p: u64) -> Self {
        let np = n * p as u128;
        EquationCount {
            n,
            product,
            p,
            scaled_deviation: np.abs_diff(product),
        }
    }

    pub fn expected(&self) -> f64 {
        self.product as f64 / self.p as f64
    }

    /// `|N - |A||B||C||D| / p|`
    pub fn deviation(&self) -> f64 {
        self.scaled_deviation as f64 / self.p as f64
    }
}

fn four_sizes(sets: [&FpSet; 4]) -> Result<u128> {
    for s in &sets[1..] {
        sets[0].ensure_same_field(s)?;
    }
    Ok(sets.iter().map(|s| s.len() as u128).product())
}

/// `s(w) = #{(a, b) in A x B : a + b = w}`.
fn sum_counts(a: &FpSet, b: &FpSet) -> Vec<u64> {
    let field = a.field();
    let mut s = vec![0u64; field.p() as usize];
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            s[field.add(x, y) as usize] += 1;
        }
    }
    s
}

fn correlate(s: &[u64], m: &[u64]) -> u128 {
    s.iter().zip(m).map(|(&x, &y)| x as u128 * y as u128).sum()
}

/// `#{(a, b, c, d) : a + b = c d}`, as `sum_w s(w) m(w)` with `s` the sum
/// counts of `A + B` and `m` the product counts of `C D`.
pub fn sarkozy_count(a: &FpSet, b: &FpSet, c: &FpSet, d: &FpSet) -> Result<EquationCount> {
    general_equation_count(a, b, &MapSpec::product(), c, d)
}

/// The same count by enumerating all quadruples.
pub fn sarkozy_count_brute(a: &FpSet, b: &FpSet, c: &FpSet, d: &FpSet) -> Result<EquationCount> {
    let product = four_sizes([a, b, c, d])?;
    let field = a.field();
    let mut n = 0u128;
    for x in a.iter() {
        for y in b.iter() {
            let lhs = field.add(x, y);
            for z in c.iter() {
                for w in d.iter() {
                    n += (lhs == field.mul(z, w)) as u128;
                }
            }
        }
    }
    Ok(EquationCount::new(n, product, field.p()))
}

/// `#{(a, b, c, d) : a + b = F(c, d)}`.
pub fn general_equation_count(
    a: &FpSet,
    b: &FpSet,
    spec: &MapSpec,
    c: &FpSet,
    d: &FpSet,
) -> Result<EquationCount> {
    let product = four_sizes([a, b, c, d])?;
    let m = representation_counts(spec, c, d)?;
    let n = correlate(&sum_counts(a, b), &m);
    Ok(EquationCount::new(n, product, a.field().p()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityInstance {
    pub trial: u64,
    pub sizes: [u64; 4],
    pub n: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub p: u64,
    pub trials: u64,
    /// Trials whose size constraints could not be met.
    pub vacuous: u64,
    pub tested: u64,
    pub min_count: Option<u128>,
    pub violations: Vec<SolvabilityInstance>,
}

/// Random search for `a + b = F(c, d)` without solutions among instances
/// with `|C|, |D| < sqrt p` and `|A||B| > p^(2 - delta')`.
pub fn essential_check(
    spec: &MapSpec,
    field: &PrimeField,
    trials: u64,
    seed: u64,
    delta_prime: f64,
) -> Result<SolvabilityReport> {
    spec.ensure_arity(2)?;
    let p = field.p();
    let below_sqrt = ((p as f64).sqrt() - 1e-9).ceil() as u64 - 1;
    let threshold = (p as f64).powf(2.0 - delta_prime);
    let min_b_for = |sa: u64| (threshold / sa as f64 + 1e-9).floor() as u64 + 1;
    let feasible: Vec<u64> = (1..=p).filter(|&sa| min_b_for(sa) <= p).collect();
    let results: Vec<Option<SolvabilityInstance>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            if below_sqrt == 0 || feasible.is_empty() {
                return Ok(None);
            }
            let mut rng = rng_from_seed(derive_seed(seed, &[p, trial]));
            let sa = feasible[rng.gen_range(0..feasible.len() as u64) as usize];
            let sb = rng.gen_range(min_b_for(sa).max(1)..=p);
            let sc = rng.gen_range(1..=below_sqrt);
            let sd = rng.gen_range(1..=below_sqrt);
            let a = sample_subset_with(field, sa, &mut rng)?;
            let b = sample_subset_with(field, sb, &mut rng)?;
            let c = sample_subset_with(field, sc, &mut rng)?;
            let d = sample_subset_with(field, sd, &mut rng)?;
            let n = general_equation_count(&a, &b, spec, &c, &d)?.n;
            Ok(Some(SolvabilityInstance {
                trial,
                sizes: [sa, sb, sc, sd],
                n,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(p, trials, results))
}

fn summarize(p: u64, trials: u64, results: Vec<Option<SolvabilityInstance>>) -> SolvabilityReport {
    let done: Vec<SolvabilityInstance> = results.into_iter().flatten().collect();
    SolvabilityReport {
        p,
        trials,
        vacuous: trials - done.len() as u64,
        tested: done.len() as u64,
        min_count: done.iter().map(|i| i.n).min(),
        violations: done.into_iter().filter(|i| i.n == 0).collect(),
    }
}

/// Random search for `a + b = c d` without solutions among instances with
/// `|A||B||C||D| > p^3`; sizes are drawn uniformly and rejected until the
/// product clears the threshold.
pub fn sarkozy_sweep(field: &PrimeField, trials: u64, seed: u64) -> Result<SolvabilityReport> {
    let p = field.p();
    let cube = (p as u128).pow(3);
    let results: Vec<Option<SolvabilityInstance>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_from_seed(derive_seed(seed, &[p, trial]));
            let sizes = loop {
                let s: [u64; 4] = std::array::from_fn(|_| rng.gen_range(1..=p));
                if s.iter().map(|&x| x as u128).product::<u128>() > cube {
                    break s;
                }
            };
            let sets: Vec<FpSet> = sizes
                .iter()
                .map(|&m| sample_subset_with(field, m, &mut rng))
                .collect::<Result<_>>()?;
            let n = sarkozy_count(&sets[0], &sets[1], &sets[2], &sets[3])?.n;
            Ok(Some(SolvabilityInstance { trial, sizes, n }))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(p, trials, results))
}

/// `1 - (1 + ln ln 2) / ln 2`
pub fn tenenbaum_delta() -> f64 {
    let ln2 = std::f64::consts::LN_2;
    1.0 - (1.0 + ln2.ln()) / ln2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultTable {
    pub n: u64,
    /// Number of distinct products `ab`, `1 <= a, b <= n`.
    pub m: u64,
    /// `M / n^2`
    pub ratio: f64,
    pub tenenbaum_delta: f64,
}

pub fn mult_table(n: u64) -> Result<MultTable> {
    mult_table_with(n, Budget::ENFORCED)
}

const SEGMENT: u64 = 1 << 22;

/// Segmented sieve over `[1, n^2]`: each segment marks the products
/// `a b` with `a <= b <= n` that fall inside it.
pub fn mult_table_with(n: u64, budget: Budget) -> Result<MultTable> {
    if n == 0 {
        return Err(Error::InvalidSpec("n must be at least 1".into()));
    }
    budget.check("multiplication table", n as u128, MAX_MULT_TABLE as u128)?;
    let top = n as u128 * n as u128 + 1;
    let segments = top.div_ceil(SEGMENT as u128) as u64;
    let m = (0..segments)
        .into_par_iter()
        .map(|seg| {
            let lo = seg * SEGMENT;
            let hi = ((seg + 1) as u128 * SEGMENT as u128).min(top) as u64;
            let mut marks = fixedbitset::FixedBitSet::with_capacity((hi - lo) as usize);
            // a <= b <= n and a b < hi force lo / n <= a <= sqrt(hi)
            let a_lo = (lo / n).max(1);
            let mut a = a_lo;
            while a <= n && a * a < hi {
                let b_lo = a.max(lo.div_ceil(a));
                let b_hi = n.min((hi - 1) / a);
                for b in b_lo..=b_hi {
                    marks.insert((a * b - lo) as usize);
                }
                a += 1;
            }
            marks.count_ones(..) as u64
        })
        .sum();
    Ok(MultTable {
        n,
        m,
        ratio: m as f64 / (n as f64 * n as f64),
        tenenbaum_delta: tenenbaum_delta(),
    })
}

/// `M(n)` by collecting every product in a hash set.
pub fn mult_table_direct(n: u64) -> u64 {
    let mut seen = std::collections::HashSet::new();
    for a in 1..=n {
        for b in a..=n {
            seen.insert(a * b);
        }
    }
    seen.len() as u64
}

/// `sum_x e(h f(x) / p)`.
pub fn weil_sum(f: &IntPoly, h: u64, field: &PrimeField) -> Result<Complex64> {
    if f.is_constant_mod(field) {
        return Err(Error::DegenerateF);
    }
    let p = field.p();
    let h = field.reduce(h);
    let mut counts = vec![0u64; p as usize];
    for v in f.value_table(field) {
        counts[field.mul(h, v) as usize] += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| Complex64::from_polar(c as f64, std::f64::consts::TAU * w as f64 / p as f64))
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilRow {
    pub p: u64,
    pub deg_f: u64,
    pub h: u64,
    pub abs_s: f64,
    /// `(k - 1) sqrt p`; `None` where the bound does not apply.
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub holds: bool,
}

/// `|S_f(h)| <= (deg f - 1) sqrt p` for `h != 0` and `1 <= deg f < p`,
/// with an absolute tolerance of `1e-9 p` for rounding.
pub fn weil_check(f: &IntPoly, h: u64, field: &PrimeField) -> Result<WeilRow> {
    let s = weil_sum(f, h, field)?;
    let p = field.p();
    let k = f.degree_mod(field).unwrap_or(0) as u64;
    let h = field.reduce(h);
    let abs_s = s.norm();
    let bound = (h != 0 && k >= 1 && k < p).then(|| (k - 1) as f64 * (p as f64).sqrt());
    let slack = bound.map(|b| b - abs_s);
    Ok(WeilRow {
        p,
        deg_f: k,
        h,
        abs_s,
        bound,
        slack,
        holds: slack.map_or(true, |s| s >= -1e-9 * p as f64),
    })
}

/// Twenty fixed polynomials of degree 2 to 5.
pub fn standard_weil_pool() -> Vec<IntPoly> {
    [
        &[0, 0, 1][..],
        &[1, 1, 1],
        &[3, 0, 2],
        &[0, 5, -1],
        &[7, -3, 4],
        &[0, 0, 0, 1],
        &[1, 0, 0, 1],
        &[0, 1, 1, 1],
        &[2, -1, 0, 3],
        &[5, 4, 3, 2],
        &[0, 0, 0, 0, 1],
        &[1, 0, 1, 0, 1],
        &[0, 2, 0, 0, -1],
        &[3, 1, 4, 1, 5],
        &[-2, 0, 0, 7, 1],
        &[0, 0, 0, 0, 0, 1],
        &[1, 1, 0, 0, 0, 1],
        &[0, 3, 0, 2, 0, 1],
        &[2, 7, 1, 8, 2, 8],
        &[-1, 0, 5, 0, 0, 3],
    ]
    .iter()
    .map(|c| IntPoly::new(c.to_vec()))
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalPreimage {
    pub count: u64,
    /// `L - (k - 1) sqrt p`
    pub stated_bound: f64,
    /// `L - k sqrt p`
    pub proved_bound: f64,
    pub stated_holds: bool,
    pub proved_holds: bool,
    /// Both bounds are nonpositive, so neither says anything.
    pub vacuous: bool,
}

/// `#{x : f(x) in (u - L, u + L)}`, the open interval being the `2L - 1`
/// residues `u - L + 1, ..., u + L - 1`.
pub fn interval_preimage_count(
    f: &IntPoly,
    u: u64,
    l: u64,
    field: &PrimeField,
) -> Result<IntervalPreimage> {
    let p = field.p();
    if l == 0 || 2 * l as u128 >= p as u128 {
        return Err(Error::IntervalTooLong {
            length: l,
            limit: format!("1 <= L < p/2 = {}", p as f64 / 2.0),
        });
    }
    let k = f.degree_mod(field).unwrap_or(0);
    if k == 0 {
        return Err(Error::DegenerateF);
    }
    let start = field.sub(u, l - 1);
    let count = f
        .value_table(field)
        .into_iter()
        .filter(|&v| field.sub(v, start) < 2 * l - 1)
        .count() as u64;
    let sqrt_p = (p as f64).sqrt();
    let stated_bound = l as f64 - (k as f64 - 1.0) * sqrt_p;
    let proved_bound = l as f64 - k as f64 * sqrt_p;
    Ok(IntervalPreimage {
        count,
        stated_holds: count as f64 >= stated_bound,
        proved_holds: count as f64 >= proved_bound,
        vacuous: stated_bound <= 0.0,
        stated_bound,
        proved_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellSpaced {
    /// `F(A, B, C)` meets `[u + 1, u + L]`.
    pub nonempty: bool,
    /// `sum_w c(w) K(w - u)` with `K` the autoconvolution of `1_[1, L/2]`.
    pub t: u128,
    /// The same sum through the exponential sums.
    pub t_fourier: f64,
    /// `S_0 |J|^2 / p`
    pub main_term: f64,
    /// `max_{r != 0} |S_r| |J|`
    pub error_bound: f64,
}

/// Decides whether the image meets `[u + 1, u + L]` and evaluates the
/// smoothed count whose positivity implies it.
pub fn well_spaced_check(
    spec: &MapSpec,
    a: &FpSet,
    b: &FpSet,
    c: &FpSet,
    u: u64,
    l: u64,
    budget: Budget,
) -> Result<WellSpaced> {
    let field = a.field();
    let p = field.p();
    if l == 0 || l > p {
        return Err(Error::IntervalTooLong {
            length: l,
            limit: format!("1 <= L <= p = {p}"),
        });
    }
    let u = field.reduce(u);
    let hist = value_histogram(spec, a, b, c, budget)?;
    let nonempty = (1..=l).any(|i| hist[field.add(u, i) as usize] > 0);

    let half = l / 2;
    let mut kernel = vec![0u64; p as usize];
    for j1 in 1..=half {
        for j2 in 1..=half {
            kernel[field.add(j1, j2) as usize] += 1;
        }
    }
    let t = hist
        .iter()
        .enumerate()
        .map(|(w, &cw)| cw as u128 * kernel[field.sub(w as u64, u) as usize] as u128)
        .sum();

    let mut j = vec![0u64; p as usize];
    for i in 1..=half {
        j[field.reduce(i) as usize] += 1;
    }
    let s = exp_sums_fast(&hist, field);
    let jhat = exp_sums_fast(&j, field);
    let t_fourier = (0..p as usize)
        .map(|r| {
            let phase = Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * field.mul(r as u64, u) as f64 / p as f64,
            );
            (jhat.s[r] * jhat.s[r] * s.s[r].conj() * phase).re
        })
        .sum::<f64>()
        / p as f64;
    let top = s.max_nontrivial.map_or(0.0, |(_, v)| v);
    Ok(WellSpaced {
        nonempty,
        t,
        t_fourier,
        main_term: s.s[0].re * (half * half) as f64 / p as f64,
        error_bound: top * half as f64,
    })
}

/// Solution count of `a + b = c d` over four sets, guarded by the quadruple
/// budget for the brute path.
pub fn sarkozy_count_checked(
    a: &FpSet,
    b: &FpSet,
    c: &FpSet,
    d: &FpSet,
    budget: Budget,
) -> Result<(EquationCount, Option<EquationCount>)> {
    let fast = sarkozy_count(a, b, c, d)?;
    let brute = match budget.check("sarkozy quadruples", fast.product, MAX_QUADRUPLES) {
        Ok(()) => Some(sarkozy_count_brute(a, b, c, d)?),
        Err(_) => None,
    };
    Ok((fast, brute))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_map_spec, sample_subset};
    use std::collections::HashSet;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn sarkozy_examples() {
        let f = field(3);
        let zero = FpSet::singleton(&f, 0);
        let full = FpSet::full(&f);
        assert_eq!(sarkozy_count(&zero, &zero, &full, &full).unwrap().n, 5);
        for p in [5u64, 7, 11] {
            let f = field(p);
            let full = FpSet::full(&f);
            let c = sarkozy_count(&full, &full, &full, &full).unwrap();
            assert_eq!(c.n, (p as u128).pow(3));
            assert_eq!(c.scaled_deviation, 0);
        }
    }

    #[test]
    fn full_sumset_gives_exact_expectation() {
        let f = field(13);
        let full = FpSet::full(&f);
        let c = sample_subset(&f, 4, 1).unwrap();
        let d = sample_subset(&f, 5, 2).unwrap();
        let spec = parse_map_spec("x*y + x^2*y^2", Some(2)).unwrap();
        let r = general_equation_count(&full, &full, &spec, &c, &d).unwrap();
        assert_eq!(r.n, 13 * 20);
        assert_eq!(r.deviation(), 0.0);
    }

    #[test]
    fn brute_matches_convolution_random() {
        for seed in 0..50u64 {
            let f = field(7);
            let s = |m, t| sample_subset(&f, m, derive_seed(seed, &[t])).unwrap();
            let (a, b, c, d) = (s(3, 0), s(4, 1), s(2, 2), s(5, 3));
            assert_eq!(
                sarkozy_count(&a, &b, &c, &d).unwrap(),
                sarkozy_count_brute(&a, &b, &c, &d).unwrap()
            );
            let xy = parse_map_spec("x*y", Some(2)).unwrap();
            assert_eq!(
                general_equation_count(&a, &b, &xy, &c, &d).unwrap(),
                sarkozy_count(&a, &b, &c, &d).unwrap()
            );
        }
    }

    #[test]
    fn essential_default_is_vacuous() {
        let f = field(31);
        let r = essential_check(&MapSpec::product(), &f, 20, 3, 0.0).unwrap();
        assert_eq!(r.vacuous, 20);
        let r = essential_check(&MapSpec::product(), &f, 20, 3, 0.2).unwrap();
        assert_eq!(r.tested, 20);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn sweep_finds_no_unsolvable_instance() {
        let r = sarkozy_sweep(&field(31), 50, 8).unwrap();
        assert_eq!(r.tested, 50);
        assert!(r.violations.is_empty());
    }

    fn mult_oracle(n: u64) -> u64 {
        let mut seen = HashSet::new();
        for a in 1..=n {
            for b in 1..=n {
                seen.insert(a * b);
            }
        }
        seen.len() as u64
    }

    #[test]
    fn mult_table_small() {
        assert_eq!(mult_table(1).unwrap().m, 1);
        assert_eq!(mult_table(3).unwrap().m, 6);
        for n in [2u64, 10, 64, 100] {
            assert_eq!(mult_table(n).unwrap().m, mult_oracle(n));
        }
        assert!((tenenbaum_delta() - 0.086071).abs() < 1e-5);
        assert!(mult_table(100_001).is_err());
    }

    #[test]
    fn mult_table_crosses_segments() {
        // n^2 spans several sieve segments
        let n = 4500;
        assert_eq!(mult_table(n).unwrap().m, mult_oracle(n));
    }

    #[test]
    fn weil_examples() {
        let f = field(5);
        let s = weil_sum(&IntPoly::monomial(2, 1), 1, &f).unwrap();
        assert!((s.norm() - 5f64.sqrt()).abs() < 1e-9);
        let f = field(101);
        assert!(weil_sum(&IntPoly::x(), 3, &f).unwrap().norm() < 1e-9);
        let z = weil_sum(&IntPoly::x(), 0, &f).unwrap();
        assert!((z.re - 101.0).abs() < 1e-9);
        assert_eq!(weil_sum(&IntPoly::new(vec![4, 101]), 1, &f), Err(Error::DegenerateF));
    }

    #[test]
    fn weil_pool_shape() {
        let pool = standard_weil_pool();
        assert_eq!(pool.len(), 20);
        assert!(pool.iter().all(|f| (2..=5).contains(&f.degree().unwrap())));
        let f = field(11);
        for poly in &pool {
            for h in 1..11 {
                assert!(weil_check(poly, h, &f).unwrap().holds);
            }
        }
    }

    #[test]
    fn interval_examples() {
        let f = field(11);
        let r = interval_preimage_count(&IntPoly::monomial(2, 1), 2, 3, &f).unwrap();
        assert_eq!(r.count, 7);
        let f = field(101);
        for (u, l) in [(0, 1), (50, 20), (99, 50)] {
            let r = interval_preimage_count(&IntPoly::x(), u, l, &f).unwrap();
            assert_eq!(r.count, 2 * l - 1);
        }
        assert!(interval_preimage_count(&IntPoly::x(), 0, 51, &f).is_err());
    }

    #[test]
    fn well_spaced_singletons() {
        let f = field(13);
        let spec = parse_map_spec("x + y + z", Some(3)).unwrap();
        let one = |x| FpSet::singleton(&f, x);
        for u in 0..13 {
            for l in 1..=13 {
                let r = well_spaced_check(&spec, &one(2), &one(3), &one(4), u, l, Budget::ENFORCED).unwrap();
                let hit = (1..=l).any(|i| (u + i) % 13 == 9);
                assert_eq!(r.nonempty, hit);
                assert!(r.t == 0 || r.nonempty);
                assert!((r.t as f64 - r.t_fourier).abs() < 1e-6);
            }
        }
        let full = FpSet::full(&f);
        let r = well_spaced_check(&spec, &full, &one(0), &one(0), 5, 13, Budget::ENFORCED).unwrap();
        assert!(r.nonempty);
    }
}
