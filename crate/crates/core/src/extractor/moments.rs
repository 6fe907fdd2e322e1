//! The two difference systems bounding the fourth moment of the sums.
//!
//! `nu(eta)` counts `(y1, y2) in B^2` with `eta = (y1 - y2, g(y1) - g(y2))`;
//! `mu(xi)` counts `(x1, x2, x3, x4) in A^4` with
//! `xi = (x1 - x2 + x3 - x4, x1^2 - x2^2 + x3^2 - x4^2)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, MAX_QUADRUPLES};
use crate::error::{Error, Result};
use crate::field::{FpSet, IntPoly, PrimeField};
use crate::incidence::moment_lines_with_pairs;

pub type Point = (u64, u64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuCensus {
    pub nu: BTreeMap<Point, u64>,
    /// `sum_eta nu(eta)^2`
    pub second_moment: u128,
    /// `deg(g) |B|^2`
    pub bound: u128,
    pub bound_holds: bool,
}

pub fn nu_census(g: &IntPoly, b: &FpSet) -> Result<NuCensus> {
    let field = b.field();
    let deg = g.degree_mod(field).unwrap_or(0);
    if deg <= 1 {
        return Err(Error::DegenerateG { degree: deg as i64 });
    }
    let elems = b.to_vec();
    let gv: Vec<u64> = elems.iter().map(|&y| g.eval(field, y)).collect();
    let mut nu = BTreeMap::new();
    for (i, &y1) in elems.iter().enumerate() {
        for (j, &y2) in elems.iter().enumerate() {
            *nu.entry((field.sub(y1, y2), field.sub(gv[i], gv[j]))).or_insert(0) += 1;
        }
    }
    let second_moment = sum_squares(nu.values());
    let n = elems.len() as u128;
    let bound = deg as u128 * n * n;
    Ok(NuCensus {
        nu,
        second_moment,
        bound,
        bound_holds: second_moment <= bound,
    })
}

/// Solutions of `y1 - y2 = y1' - y2'`, `g(y1) - g(y2) = g(y1') - g(y2')`
/// in `B^4`, by enumeration.
pub fn nu_second_moment_brute(g: &IntPoly, b: &FpSet) -> u128 {
    let field = b.field();
    let elems = b.to_vec();
    let gv: Vec<u64> = elems.iter().map(|&y| g.eval(field, y)).collect();
    let mut n = 0u128;
    for i1 in 0..elems.len() {
        for i2 in 0..elems.len() {
            for j1 in 0..elems.len() {
                for j2 in 0..elems.len() {
                    let same_diff = field.sub(elems[i1], elems[i2]) == field.sub(elems[j1], elems[j2]);
                    let same_g = field.sub(gv[i1], gv[i2]) == field.sub(gv[j1], gv[j2]);
                    n += (same_diff && same_g) as u128;
                }
            }
        }
    }
    n
}

fn sum_squares<'a>(values: impl Iterator<Item = &'a u64>) -> u128 {
    values.map(|&v| v as u128 * v as u128).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCensus {
    pub mu: BTreeMap<Point, u64>,
    /// Solutions with `x1 = x2`.
    pub mu1: BTreeMap<Point, u64>,
    /// Solutions with `x1 != x2`.
    pub mu2: BTreeMap<Point, u64>,
    pub mu_second_moment: u128,
    pub mu1_second_moment: u128,
    pub mu2_second_moment: u128,
    /// `#{(x3, x4, z3, z4) : x3 - x4 = z3 - z4, x3^2 - x4^2 = z3^2 - z4^2}`
    pub n: u128,
    /// `N <= 2 |A|^2`
    pub n_bound_holds: bool,
}

fn difference_pairs(field: &PrimeField, elems: &[u64]) -> HashMap<Point, u64> {
    let sq: Vec<u64> = elems.iter().map(|&x| field.mul(x, x)).collect();
    let mut d = HashMap::new();
    for (i, &x1) in elems.iter().enumerate() {
        for (j, &x2) in elems.iter().enumerate() {
            *d.entry((field.sub(x1, x2), field.sub(sq[i], sq[j]))).or_insert(0u64) += 1;
        }
    }
    d
}

/// Exact `mu`, `mu1` and `mu2`. `mu` is the self-convolution of the pair
/// count `D(u) = #{(x1, x2) : (x1 - x2, x1^2 - x2^2) = u}`; pairs with
/// `x1 = x2` all land on the origin, so `mu1 = |A| D`.
pub fn mu_census(a: &FpSet, budget: Budget) -> Result<MomentCensus> {
    let n_a = a.len() as u128;
    budget.check("mu census quadruples", n_a.pow(4), MAX_QUADRUPLES)?;
    let field = a.field();
    let d = difference_pairs(field, &a.to_vec());
    let entries: Vec<(Point, u64)> = d.iter().map(|(&k, &v)| (k, v)).collect();
    let mut mu = BTreeMap::new();
    for &((u1, u2), c1) in &entries {
        for &((v1, v2), c2) in &entries {
            *mu.entry((field.add(u1, v1), field.add(u2, v2))).or_insert(0) += c1 * c2;
        }
    }
    let mu1: BTreeMap<Point, u64> = d.iter().map(|(&k, &v)| (k, v * a.len() as u64)).collect();
    let mu2: BTreeMap<Point, u64> = mu
        .iter()
        .filter_map(|(k, &v)| {
            let rest = v - mu1.get(k).copied().unwrap_or(0);
            (rest > 0).then_some((*k, rest))
        })
        .collect();
    let n = sum_squares(d.values());
    Ok(MomentCensus {
        mu_second_moment: sum_squares(mu.values()),
        mu1_second_moment: sum_squares(mu1.values()),
        mu2_second_moment: sum_squares(mu2.values()),
        n_bound_holds: n <= 2 * n_a * n_a,
        n,
        mu,
        mu1,
        mu2,
    })
}

/// `(mu, mu1)` by enumerating `A^4`.
pub fn mu_census_brute(a: &FpSet, budget: Budget) -> Result<(BTreeMap<Point, u64>, BTreeMap<Point, u64>)> {
    budget.check("mu census quadruples", (a.len() as u128).pow(4), MAX_QUADRUPLES)?;
    let field = a.field();
    let elems = a.to_vec();
    let sq = |v| field.mul(v, v);
    let mut mu = BTreeMap::new();
    let mut mu1 = BTreeMap::new();
    for &x1 in &elems {
        for &x2 in &elems {
            for &x3 in &elems {
                for &x4 in &elems {
                    let xi1 = field.sub(field.add(field.sub(x1, x2), x3), x4);
                    let xi2 = field.sub(field.add(field.sub(sq(x1), sq(x2)), sq(x3)), sq(x4));
                    *mu.entry((xi1, xi2)).or_insert(0) += 1;
                    if x1 == x2 {
                        *mu1.entry((xi1, xi2)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    Ok((mu, mu1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuTMoment {
    /// `sum_xi mu(xi, t)^2` by direct enumeration.
    pub direct: u128,
    /// `sum_k (2k - 1) c_k` from point multiplicities on the line family.
    pub via_incidences: u128,
    /// `c_k` for `k = 1, 2, ...` up to the largest nonempty level.
    pub level_sizes: Vec<u64>,
    /// `C_k` is empty for every `k > 2|A|`.
    pub levels_bounded: bool,
}

/// Second moment of `mu(xi, t)`, which counts solutions `(x1, x2, t, x4)`
/// with `x1 != x2`, computed twice.
pub fn mu_t_second_moment(a: &FpSet, t: u64) -> Result<MuTMoment> {
    let field = a.field();
    let t = field.reduce(t);
    if !a.contains(t) {
        return Err(Error::InvalidSpec(format!("t = {t} is not in A")));
    }
    let elems = a.to_vec();

    let mut direct_counts: HashMap<Point, u64> = HashMap::new();
    for &x1 in &elems {
        for &x2 in &elems {
            if x1 == x2 {
                continue;
            }
            for &x4 in &elems {
                let xi1 = field.sub(field.add(field.sub(x1, x2), t), x4);
                let sq = |v| field.mul(v, v);
                let xi2 = field.sub(field.add(field.sub(sq(x1), sq(x2)), sq(t)), sq(x4));
                *direct_counts.entry((xi1, xi2)).or_insert(0) += 1;
            }
        }
    }
    let direct = sum_squares(direct_counts.values());

    // each line l_{x1,x2} meets the admissible points (xi1, xi2') where
    // x4 = x1 - x2 + t - xi1 lies in A
    let mut multiplicity: HashMap<Point, u64> = HashMap::new();
    for ((x1, x2), line) in moment_lines_with_pairs(a, t) {
        let s = field.add(field.sub(x1, x2), t);
        let (n0, n1) = (line.normal()[0], line.normal()[1]);
        // the xi2' coefficient is nonzero before normalization, so after it too
        let n1_inv = field.inv(n1).expect("line is not vertical");
        for &x4 in &elems {
            let xi1 = field.sub(s, x4);
            let xi2p = field.mul(field.sub(line.offset(), field.mul(n0, xi1)), n1_inv);
            *multiplicity.entry((xi1, xi2p)).or_insert(0) += 1;
        }
    }
    let top = multiplicity.values().copied().max().unwrap_or(0);
    let mut level_sizes = vec![0u64; top as usize];
    for &m in multiplicity.values() {
        for c in &mut level_sizes[..m as usize] {
            *c += 1;
        }
    }
    let via_incidences = level_sizes
        .iter()
        .enumerate()
        .map(|(i, &c)| (2 * (i as u128 + 1) - 1) * c as u128)
        .sum();
    Ok(MuTMoment {
        direct,
        via_incidences,
        levels_bounded: top as usize <= 2 * elems.len(),
        level_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn nu_worked_example() {
        let f = field(7);
        let b = FpSet::from_elements(&f, [0, 1, 2]);
        let c = nu_census(&IntPoly::monomial(2, 1), &b).unwrap();
        assert_eq!(c.second_moment, 15);
        assert_eq!(c.bound, 18);
        assert_eq!(c.nu.values().sum::<u64>(), 9);
        let one = nu_census(&IntPoly::monomial(2, 1), &FpSet::singleton(&f, 3)).unwrap();
        assert_eq!(one.second_moment, 1);
        assert_eq!(
            nu_census(&IntPoly::new(vec![1, 1, 7]), &b),
            Err(Error::DegenerateG { degree: 1 })
        );
    }

    #[test]
    fn mu_small() {
        let f = field(7);
        let one = mu_census(&FpSet::singleton(&f, 4), Budget::ENFORCED).unwrap();
        assert_eq!(one.mu.len(), 1);
        assert_eq!(one.mu.get(&(0, 0)), Some(&1));
        let c = mu_census(&FpSet::from_elements(&f, [0, 1]), Budget::ENFORCED).unwrap();
        assert_eq!(c.mu.values().sum::<u64>(), 16);
        assert_eq!(c.mu1_second_moment, 4 * c.n);
        assert!(c.n_bound_holds);
    }

    #[test]
    fn mu_budget() {
        let f = field(1009);
        let a = FpSet::from_elements(&f, 0..200);
        assert!(matches!(
            mu_census(&a, Budget::ENFORCED),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn mu_t_routes_agree() {
        let f = field(11);
        let a = FpSet::from_elements(&f, [0, 1, 2]);
        let m = mu_t_second_moment(&a, 0).unwrap();
        assert_eq!(m.direct, m.via_incidences);
        assert!(m.levels_bounded);
        let single = mu_t_second_moment(&FpSet::singleton(&f, 5), 5).unwrap();
        assert_eq!(single.direct, 0);
        assert_eq!(single.via_incidences, 0);
        assert!(mu_t_second_moment(&a, 5).is_err());
    }
}
