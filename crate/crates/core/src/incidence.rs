//! Point/hyperplane incidences in `F_p^d`.
//!
//! Hyperplanes are `a . x = c` with `a != 0`, normalized so that the first
//! nonzero entry of `a` is 1; two planes are equal exactly when their
//! normalized forms are. Lines are the case `d = 2`, vertical lines included.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::ExpanderSpec;
use crate::field::{FpSet, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    field: PrimeField,
    d: usize,
    points: Vec<Vec<u64>>,
}

impl PointSet {
    /// Deduplicates the points and reduces coordinates modulo `p`.
    pub fn new<I>(field: &PrimeField, d: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u64>>,
    {
        if d < 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: d });
        }
        let mut out = Vec::new();
        for pt in points {
            if pt.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: pt.len(),
                });
            }
            out.push(pt.into_iter().map(|c| field.reduce(c)).collect::<Vec<_>>());
        }
        out.sort_unstable();
        out.dedup();
        Ok(PointSet {
            field: field.clone(),
            d,
            points: out,
        })
    }

    /// All `p^d` points.
    pub fn full_grid(field: &PrimeField, d: usize) -> Result<Self> {
        let p = field.p();
        let total = (p as u128).pow(d as u32);
        let pts = (0..total).map(|mut idx| {
            let mut pt = vec![0u64; d];
            for c in pt.iter_mut().rev() {
                *c = (idx % p as u128) as u64;
                idx /= p as u128;
            }
            pt
        });
        PointSet::new(field, d, pts)
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperplane {
    normal: Vec<u64>,
    offset: u64,
}

impl Hyperplane {
    /// The plane `normal . x = offset`, brought to normal form.
    pub fn new(field: &PrimeField, normal: &[u64], offset: u64) -> Result<Self> {
        let lead = normal
            .iter()
            .map(|&a| field.reduce(a))
            .find(|&a| a != 0)
            .ok_or(Error::ZeroNormal)?;
        // lead is a nonzero residue, so it is invertible
        let scale = field.inv(lead).ok_or(Error::ZeroNormal)?;
        Ok(Hyperplane {
            normal: normal.iter().map(|&a| field.mul(a, scale)).collect(),
            offset: field.mul(offset, scale),
        })
    }

    /// Line `y = m x + b` in the `(x, y)` plane.
    pub fn slope_intercept(field: &PrimeField, m: u64, b: u64) -> Self {
        // normal (-m, 1) always has a nonzero entry
        Hyperplane::new(field, &[field.neg(m), 1], b).expect("nonzero normal")
    }

    /// Vertical line `x = c`.
    pub fn vertical(field: &PrimeField, c: u64) -> Self {
        Hyperplane::new(field, &[1, 0], c).expect("nonzero normal")
    }

    pub fn normal(&self) -> &[u64] {
        &self.normal
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, field: &PrimeField, point: &[u64]) -> bool {
        dot(field, &self.normal, point) == self.offset
    }

    pub fn renormalized(&self, field: &PrimeField) -> Result<Self> {
        Hyperplane::new(field, &self.normal, self.offset)
    }
}

fn dot(field: &PrimeField, a: &[u64], x: &[u64]) -> u64 {
    a.iter()
        .zip(x)
        .fold(0, |acc, (&ai, &xi)| field.add(acc, field.mul(ai, xi)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperplaneSet {
    field: PrimeField,
    d: usize,
    planes: Vec<Hyperplane>,
}

impl HyperplaneSet {
    pub fn new<I>(field: &PrimeField, d: usize, planes: I) -> Result<Self>
    where
        I: IntoIterator<Item = Hyperplane>,
    {
        let mut out: Vec<Hyperplane> = Vec::new();
        for h in planes {
            if h.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: h.dim(),
                });
            }
            out.push(h);
        }
        out.sort_unstable();
        out.dedup();
        Ok(HyperplaneSet {
            field: field.clone(),
            d,
            planes: out,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn planes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

/// Exact incidence count with the terms of the Vinh bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceResult {
    pub count: u64,
    pub points: usize,
    pub planes: usize,
    /// `|P||H| / p`
    pub vinh_main: f64,
    /// `p^((d-1)/2) sqrt(|P||H|)`
    pub vinh_error: f64,
    /// `vinh_main + vinh_error - count`
    pub slack: f64,
}

fn check_compatible(points: &PointSet, planes: &HyperplaneSet) -> Result<()> {
    points.field.ensure_same(&planes.field)?;
    if points.d != planes.d {
        return Err(Error::DimensionMismatch {
            expected: points.d,
            got: planes.d,
        });
    }
    Ok(())
}

/// Counts incidences by grouping planes by normal direction: each point is
/// tested against one offset lookup per direction instead of per plane.
pub fn incidence_count(points: &PointSet, planes: &HyperplaneSet) -> Result<IncidenceResult> {
    check_compatible(points, planes)?;
    let field = &points.field;
    let mut by_normal: HashMap<&[u64], HashSet<u64>> = HashMap::new();
    for h in &planes.planes {
        by_normal.entry(&h.normal).or_default().insert(h.offset);
    }
    let groups: Vec<(&[u64], HashSet<u64>)> = by_normal.into_iter().collect();
    let count = points
        .points
        .par_iter()
        .map(|pt| {
            groups
                .iter()
                .filter(|(normal, offsets)| offsets.contains(&dot(field, normal, pt)))
                .count() as u64
        })
        .sum();
    Ok(vinh_terms(field, points.d, points.len(), planes.len(), count))
}

/// Reference count: every (point, plane) pair is tested.
pub fn incidence_count_brute(points: &PointSet, planes: &HyperplaneSet) -> Result<u64> {
    check_compatible(points, planes)?;
    let field = &points.field;
    Ok(points
        .points
        .iter()
        .map(|pt| planes.planes.iter().filter(|h| h.contains(field, pt)).count() as u64)
        .sum())
}

fn vinh_terms(field: &PrimeField, d: usize, np: usize, nh: usize, count: u64) -> IncidenceResult {
    let p = field.p() as f64;
    let prod = np as f64 * nh as f64;
    let vinh_main = prod / p;
    let vinh_error = p.powf((d as f64 - 1.0) / 2.0) * prod.sqrt();
    IncidenceResult {
        count,
        points: np,
        planes: nh,
        vinh_main,
        vinh_error,
        slack: vinh_main + vinh_error - count as f64,
    }
}

/// Relative slack allowed when comparing an exact count with the floating
/// bound.
const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VinhCheck {
    pub result: IncidenceResult,
    /// `N <= |P||H|/p + p^((d-1)/2) sqrt(|P||H|)`
    pub holds: bool,
    /// `|N - |P||H|/p| <= p^((d-1)/2) sqrt(|P||H|)`
    pub two_sided_holds: bool,
    pub slack: f64,
    /// `N / (main + error)`, or 0 for empty instances.
    pub ratio: f64,
}

/// Empirical check of the Vinh incidence bound with the `1 + o(1)` factor
/// replaced by 1.
pub fn vinh_check(points: &PointSet, planes: &HyperplaneSet) -> Result<VinhCheck> {
    let result = incidence_count(points, planes)?;
    let n = result.count as f64;
    let bound = result.vinh_main + result.vinh_error;
    let tol = BOUND_TOLERANCE * bound.max(1.0);
    Ok(VinhCheck {
        holds: n <= bound + tol,
        two_sided_holds: (n - result.vinh_main).abs() <= result.vinh_error + tol,
        slack: result.slack,
        ratio: if bound > 0.0 { n / bound } else { 0.0 },
        result,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BktReport {
    pub count: u64,
    /// `log_p N`; `None` when there are no incidences.
    pub log_p_count: Option<f64>,
    /// `(3/2) beta`, the trivial-exponent reference.
    pub reference_exponent: f64,
    /// `log_p(|P||L|)`; `None` when either side is empty.
    pub counting_exponent: Option<f64>,
}

/// Observed incidence exponent for points and lines, `|L| < p^beta`.
pub fn bkt_exponent_report(
    points: &PointSet,
    lines: &HyperplaneSet,
    beta: f64,
) -> Result<BktReport> {
    if lines.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: lines.dim(),
        });
    }
    let p = points.field.p() as f64;
    let limit = p.powf(beta);
    if lines.len() as f64 >= limit {
        return Err(Error::BetaViolated {
            lines: lines.len(),
            limit,
        });
    }
    let res = incidence_count(points, lines)?;
    let log_p = |v: f64| v.ln() / p.ln();
    let prod = points.len() as f64 * lines.len() as f64;
    Ok(BktReport {
        count: res.count,
        log_p_count: (res.count > 0).then(|| log_p(res.count as f64)),
        reference_exponent: 1.5 * beta,
        counting_exponent: (prod > 0.0).then(|| log_p(prod)),
    })
}

/// Which proof's line family to build from pairs of `A`.
#[derive(Clone, Debug, PartialEq)]
pub enum LineFamily {
    /// `x1^k y1 - x2^k y2 = f(x2) - f(x1)` in the `(y1, y2)` plane, one line
    /// per pair `(x1, x2) != (0, 0)`.
    Expander(ExpanderSpec),
    /// `xi2' = 2 s xi1 - s^2 + x1^2 - x2^2 + t^2` with `s = x1 - x2 + t`,
    /// one line per pair with `x1 != x2`.
    Moment { t: u64 },
}

/// The collision line of the pair `(x1, x2)`; `None` for `x1 = x2 = 0`.
pub fn expander_line(field: &PrimeField, spec: &ExpanderSpec, x1: u64, x2: u64) -> Option<Hyperplane> {
    let k = spec.k as u64;
    let a1 = field.pow(x1, k);
    let a2 = field.neg(field.pow(x2, k));
    let c = field.sub(spec.f.eval(field, x2), spec.f.eval(field, x1));
    Hyperplane::new(field, &[a1, a2], c).ok()
}

/// The moment-system line of the pair `(x1, x2)` for a fixed `t`.
pub fn moment_line(field: &PrimeField, x1: u64, x2: u64, t: u64) -> Hyperplane {
    let s = field.add(field.sub(x1, x2), t);
    let sq = |v| field.mul(v, v);
    let rhs = field.add(
        field.sub(field.sub(sq(x1), sq(x2)), sq(s)),
        sq(t),
    );
    // -2s xi1 + xi2' = rhs; the xi2' coefficient keeps the normal nonzero
    Hyperplane::new(field, &[field.neg(field.mul(2, s)), 1], rhs).expect("nonzero normal")
}

/// Moment lines paired with the `(x1, x2)` that produced them.
pub fn moment_lines_with_pairs(a: &FpSet, t: u64) -> Vec<((u64, u64), Hyperplane)> {
    let field = a.field();
    let elems = a.to_vec();
    let mut out = Vec::with_capacity(elems.len() * elems.len().saturating_sub(1));
    for &x1 in &elems {
        for &x2 in &elems {
            if x1 != x2 {
                out.push(((x1, x2), moment_line(field, x1, x2, t)));
            }
        }
    }
    out
}

/// The deduplicated line family used in the corresponding proof.
pub fn lines_from_expander_pairs(a: &FpSet, mode: &LineFamily) -> Result<HyperplaneSet> {
    let field = a.field();
    match mode {
        LineFamily::Expander(spec) => {
            spec.check_prime(field)?;
            let elems = a.to_vec();
            let lines = elems.iter().flat_map(|&x1| {
                elems
                    .iter()
                    .filter_map(move |&x2| expander_line(field, spec, x1, x2))
            });
            HyperplaneSet::new(field, 2, lines)
        }
        LineFamily::Moment { t } => HyperplaneSet::new(
            field,
            2,
            moment_lines_with_pairs(a, *t).into_iter().map(|(_, l)| l),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::IntPoly;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn all_slope_lines(f: &PrimeField) -> HyperplaneSet {
        let p = f.p();
        let lines = (0..p).flat_map(|m| (0..p).map(move |b| (m, b)));
        HyperplaneSet::new(f, 2, lines.map(|(m, b)| Hyperplane::slope_intercept(f, m, b))).unwrap()
    }

    #[test]
    fn diagonal_points_on_one_line() {
        let f = field(3);
        let pts = PointSet::new(&f, 2, [vec![0, 0], vec![1, 1], vec![2, 2]]).unwrap();
        let lines = HyperplaneSet::new(&f, 2, [Hyperplane::slope_intercept(&f, 1, 0)]).unwrap();
        assert_eq!(incidence_count(&pts, &lines).unwrap().count, 3);
    }

    #[test]
    fn full_grid_p5() {
        let f = field(5);
        let pts = PointSet::full_grid(&f, 2).unwrap();
        let lines = all_slope_lines(&f);
        assert_eq!(pts.len(), 25);
        assert_eq!(lines.len(), 25);
        let res = incidence_count(&pts, &lines).unwrap();
        assert_eq!(res.count, 125);
        assert_eq!(incidence_count_brute(&pts, &lines).unwrap(), 125);
        let check = vinh_check(&pts, &lines).unwrap();
        assert!(check.holds);
        assert!((res.vinh_main + res.vinh_error - 180.9017).abs() < 1e-3);
        let bkt = bkt_exponent_report(&pts, &lines, 2.1).unwrap();
        assert!((bkt.log_p_count.unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(
            bkt_exponent_report(&pts, &lines, 2.0),
            Err(Error::BetaViolated { .. })
        ));
    }

    #[test]
    fn empty_instances() {
        let f = field(7);
        let pts = PointSet::new(&f, 2, Vec::<Vec<u64>>::new()).unwrap();
        let lines = HyperplaneSet::new(&f, 2, Vec::new()).unwrap();
        let check = vinh_check(&pts, &lines).unwrap();
        assert_eq!(check.result.count, 0);
        assert!(check.holds && check.two_sided_holds);
        assert_eq!(check.slack, 0.0);
        let some = all_slope_lines(&f);
        assert_eq!(incidence_count(&pts, &some).unwrap().count, 0);
    }

    #[test]
    fn single_point_single_line() {
        let f = field(7);
        let pts = PointSet::new(&f, 2, [vec![2, 3]]).unwrap();
        let lines = HyperplaneSet::new(&f, 2, [Hyperplane::vertical(&f, 2)]).unwrap();
        let bkt = bkt_exponent_report(&pts, &lines, 0.5).unwrap();
        assert_eq!(bkt.count, 1);
        assert_eq!(bkt.log_p_count, Some(0.0));
    }

    #[test]
    fn normalization_is_unique() {
        let f = field(11);
        let a = Hyperplane::new(&f, &[0, 3, 6], 9).unwrap();
        let b = Hyperplane::new(&f, &[0, 1, 2], 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.normal(), &[0, 1, 2]);
        assert_eq!(a.renormalized(&f).unwrap(), a);
        assert_eq!(Hyperplane::new(&f, &[0, 11], 1), Err(Error::ZeroNormal));
    }

    #[test]
    fn mismatched_inputs() {
        let pts = PointSet::new(&field(7), 3, [vec![1, 2, 3]]).unwrap();
        let lines = HyperplaneSet::new(&field(7), 2, []).unwrap();
        assert!(matches!(
            incidence_count(&pts, &lines),
            Err(Error::DimensionMismatch { .. })
        ));
        let other = HyperplaneSet::new(&field(11), 3, []).unwrap();
        assert!(matches!(
            incidence_count(&pts, &other),
            Err(Error::FieldMismatch { .. })
        ));
        assert!(PointSet::new(&field(7), 2, [vec![1]]).is_err());
    }

    #[test]
    fn moment_family_sizes() {
        let f = field(101);
        for n in 0..=8u64 {
            let a = FpSet::from_elements(&f, (0..n).map(|i| 3 * i + 1));
            let lines = lines_from_expander_pairs(&a, &LineFamily::Moment { t: 1 }).unwrap();
            assert_eq!(lines.len() as u64, n * n.saturating_sub(1));
        }
    }

    #[test]
    fn moment_line_passes_through_its_solutions() {
        let f = field(13);
        let (x1, x2, t, x4) = (3, 7, 5, 11);
        let xi1 = f.sub(f.add(f.sub(x1, x2), t), x4);
        let sq = |v| f.mul(v, v);
        let xi2 = f.sub(f.add(f.sub(sq(x1), sq(x2)), sq(t)), sq(x4));
        let xi2p = f.add(xi2, sq(xi1));
        assert!(moment_line(&f, x1, x2, t).contains(&f, &[xi1, xi2p]));
    }

    #[test]
    fn expander_family_excludes_origin_pair() {
        let f = field(101);
        let spec = ExpanderSpec::new(IntPoly::monomial(3, 1), 1, IntPoly::x()).unwrap();
        assert!(expander_line(&f, &spec, 0, 0).is_none());
        let a = FpSet::from_elements(&f, [0]);
        let lines = lines_from_expander_pairs(&a, &LineFamily::Expander(spec)).unwrap();
        assert!(lines.is_empty());
    }
}
