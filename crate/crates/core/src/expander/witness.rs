//! Explicit set pairs on which particular maps fail to expand.

use crate::error::{Error, Result};
use crate::field::{gcd, FpSet, IntPoly, MapSpec, PrimeField};

use super::image_set;

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSets {
    pub a: FpSet,
    pub b: FpSet,
    /// Interval width `ceil(p^alpha)`.
    pub width: u64,
    pub shift_a: u64,
    pub shift_b: u64,
    /// `|f(F_p) ∩ (shift_a + [0, width))|`
    pub hits_a: u64,
    pub hits_b: u64,
}

/// Start of the cyclic window `[s, s + w)` holding the most points of `values`;
/// ties go to the smallest start.
fn best_window(field: &PrimeField, values: &FpSet, w: u64) -> (u64, u64) {
    let p = field.p();
    let ind: Vec<u64> = (0..p).map(|x| values.contains(x) as u64).collect();
    let mut count: u64 = (0..w).map(|i| ind[i as usize]).sum();
    let mut best = (0, count);
    for s in 1..p {
        count = count + ind[((s + w - 1) % p) as usize] - ind[(s - 1) as usize];
        if count > best.1 {
            best = (s, count);
        }
    }
    best
}

/// Preimages of the best-populated windows of width `ceil(p^alpha)` in the
/// value sets of `f` and `g`. `f(A) + g(B)` then sits inside one window of
/// width `2 ceil(p^alpha) - 1`.
pub fn non_expander_witness(
    f: &IntPoly,
    g: &IntPoly,
    field: &PrimeField,
    alpha: f64,
) -> Result<WitnessSets> {
    if f.is_constant_mod(field) || g.is_constant_mod(field) {
        return Err(Error::DegenerateMap("f and g must be nonconstant mod p".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidSpec(format!("alpha {alpha} outside (0, 1]")));
    }
    let p = field.p();
    let width = ((p as f64).powf(alpha) - 1e-9).ceil().clamp(1.0, p as f64) as u64;
    let fv = f.value_table(field);
    let gv = g.value_table(field);
    let (shift_a, hits_a) = best_window(field, &FpSet::from_elements(field, fv.iter().copied()), width);
    let (shift_b, hits_b) = best_window(field, &FpSet::from_elements(field, gv.iter().copied()), width);
    let in_window = |v: u64, s: u64| field.sub(v, s) < width;
    let a = FpSet::from_elements(field, (0..p).filter(|&x| in_window(fv[x as usize], shift_a)));
    let b = FpSet::from_elements(field, (0..p).filter(|&y| in_window(gv[y as usize], shift_b)));
    Ok(WitnessSets {
        a,
        b,
        width,
        shift_a,
        shift_b,
        hits_a,
        hits_b,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BourgainSets {
    pub a: FpSet,
    pub b: FpSet,
    /// The selected coset representative.
    pub shift: u64,
    /// `a^-1`
    pub shift_inverse: u64,
    /// Index `gcd(k, p - 1)` of the `k`-th powers.
    pub index: u64,
    pub size_a: usize,
    pub size_b: usize,
    pub image_size: usize,
    /// Every value lies in `a'^2 {st : s, t in [1, 2L]}`.
    pub contained: bool,
}

/// The construction for `x^2k + u x^k + x^k y`: with `a` chosen so that
/// `[1, L]` meets the coset `a H` of the `k`-th powers `H` the most,
/// `A = {x != 0 : a x^k in [1, L]}` and `B = {y : a (y + u) in [1, L]}`.
pub fn bourgain_counterexample(k: u32, u: i64, field: &PrimeField, l: u64) -> Result<BourgainSets> {
    if k < 2 {
        return Err(Error::InvalidSpec("k must be at least 2".into()));
    }
    let p = field.p();
    if l == 0 || 4 * (l as u128) * (l as u128) >= p as u128 {
        return Err(Error::IntervalTooLong {
            length: l,
            limit: format!("sqrt({p})/2"),
        });
    }
    let index = gcd(k as u64, p - 1);
    // t^((p-1)/index) labels the coset of t
    let label = |t: u64| field.pow(t, (p - 1) / index);
    let mut tally: Vec<(u64, u64, u64)> = Vec::new(); // (label, count, smallest member)
    for t in 1..=l {
        let lab = label(t);
        match tally.iter_mut().find(|e| e.0 == lab) {
            Some(e) => e.1 += 1,
            None => tally.push((lab, 1, t)),
        }
    }
    let best = tally
        .iter()
        .max_by(|x, y| x.1.cmp(&y.1).then(y.2.cmp(&x.2)))
        .expect("L >= 1");
    let shift = best.2;
    let shift_inverse = field.inv(shift).expect("nonzero");
    let in_range = |v: u64| (1..=l).contains(&v);
    let a = FpSet::from_elements(
        field,
        (1..p).filter(|&x| in_range(field.mul(shift, field.pow(x, k as u64)))),
    );
    let uu = field.from_i64(u);
    let b = FpSet::from_elements(field, (0..p).filter(|&y| in_range(field.mul(shift, field.add(y, uu)))));
    let spec = bourgain_family(k, u);
    let image = image_set(&spec, &a, &b)?;
    let scale = field.mul(shift_inverse, shift_inverse);
    let products = FpSet::from_elements(
        field,
        (1..=2 * l).flat_map(|s| (1..=2 * l).map(move |t| s * t)).map(|st| field.mul(scale, st % p)),
    );
    Ok(BourgainSets {
        size_a: a.len(),
        size_b: b.len(),
        image_size: image.len(),
        contained: image.is_subset(&products),
        a,
        b,
        shift,
        shift_inverse,
        index,
    })
}

/// `x^2k + u x^k + x^k y`.
pub fn bourgain_family(k: u32, u: i64) -> MapSpec {
    let g = IntPoly::new(vec![u, 1]);
    let f = IntPoly::monomial(2 * k as usize, 1);
    MapSpec::expander_family(&f, k, &g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductFormSets {
    pub a: FpSet,
    pub b: FpSet,
    /// `ceil(deg f sqrt p)`
    pub l: u64,
    /// `L - k sqrt p`, what the preimage lemma proves.
    pub proved_bound: f64,
    /// Sizes are asserted only when `proved_bound >= sqrt p`.
    pub size_claim_applies: bool,
    pub image_size: usize,
    /// Every value lies in `{st : s, t in (0, 4L)}`.
    pub contained: bool,
}

/// The construction for `f(x) (f(x) + g(y))`: preimages of the residues
/// `1, ..., 2L - 1` under `f` and `g`.
pub fn product_form_counterexample(
    f: &IntPoly,
    g: &IntPoly,
    field: &PrimeField,
) -> Result<ProductFormSets> {
    let deg = f.degree_mod(field).unwrap_or(0);
    if deg == 0 || g.is_constant_mod(field) {
        return Err(Error::DegenerateMap("f and g must be nonconstant mod p".into()));
    }
    let p = field.p();
    let sqrt_p = (p as f64).sqrt();
    let l = (deg as f64 * sqrt_p - 1e-9).ceil() as u64;
    let top = (2 * l - 1).min(p - 1);
    let in_range = |v: u64| (1..=top).contains(&v);
    let fv = f.value_table(field);
    let gv = g.value_table(field);
    let a = FpSet::from_elements(field, (0..p).filter(|&x| in_range(fv[x as usize])));
    let b = FpSet::from_elements(field, (0..p).filter(|&y| in_range(gv[y as usize])));
    let mut image = FpSet::empty(field);
    for x in a.iter() {
        let fx = fv[x as usize];
        for y in b.iter() {
            image.insert(field.mul(fx, field.add(fx, gv[y as usize])));
        }
    }
    let side = (4 * l).min(p);
    let products = FpSet::from_elements(
        field,
        (1..side).flat_map(|s| (1..side).map(move |t| (s as u128 * t as u128 % p as u128) as u64)),
    );
    let proved_bound = l as f64 - deg as f64 * sqrt_p;
    Ok(ProductFormSets {
        image_size: image.len(),
        contained: image.is_subset(&products),
        proved_bound,
        size_claim_applies: proved_bound >= sqrt_p,
        a,
        b,
        l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::additive::mult_table;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn identity_witness_is_interval() {
        let f = field(101);
        let w = non_expander_witness(&IntPoly::x(), &IntPoly::x(), &f, 0.5).unwrap();
        assert_eq!(w.width, 11);
        assert_eq!(w.a.len(), 11);
        assert_eq!(w.a.to_vec(), (0..11).collect::<Vec<_>>());
        let img = image_set(&MapSpec::additive(), &w.a, &w.b).unwrap();
        assert!(img.len() <= 21);
    }

    #[test]
    fn square_witness_size() {
        let f = field(101);
        let sq = IntPoly::monomial(2, 1);
        let w = non_expander_witness(&sq, &IntPoly::x(), &f, 0.5).unwrap();
        assert!(w.a.len() as f64 >= w.width as f64 / 2.0);
        assert!(w.a.len() as f64 >= w.width as f64 / 4.0);
        let spec = MapSpec::separable_sum(&sq, &IntPoly::x());
        assert!(image_set(&spec, &w.a, &w.b).unwrap().len() as u64 <= 2 * w.width + 1);
    }

    #[test]
    fn witness_rejects_constants() {
        let f = field(7);
        let c = IntPoly::new(vec![3, 7]);
        assert!(matches!(
            non_expander_witness(&c, &IntPoly::x(), &f, 0.5),
            Err(Error::DegenerateMap(_))
        ));
    }

    #[test]
    fn bourgain_small_examples() {
        let f = field(101);
        let s = bourgain_counterexample(2, 0, &f, 4).unwrap();
        assert_eq!(s.size_b, 4);
        assert!(s.size_a >= 4);
        assert!(s.contained);
        assert!(s.image_size as u64 <= mult_table(8).unwrap().m);

        let f13 = field(13);
        let s = bourgain_counterexample(2, 0, &f13, 1).unwrap();
        // the only candidate is 1, so A = {x : x^2 = 1}
        assert_eq!(s.shift, 1);
        assert_eq!(s.a.to_vec(), vec![1, 12]);
        assert!(matches!(
            bourgain_counterexample(2, 0, &f13, 2),
            Err(Error::IntervalTooLong { .. })
        ));
    }

    #[test]
    fn bourgain_sweep() {
        for p in [101u64, 499, 1009] {
            let f = field(p);
            for k in 2..=4 {
                for u in [-3i64, 0, 5] {
                    let lmax = (((p as f64).sqrt() / 2.0).ceil() as u64).saturating_sub(1);
                    for l in 1..=lmax {
                        let s = bourgain_counterexample(k, u, &f, l).unwrap();
                        assert_eq!(s.size_b as u64, l);
                        assert!(s.size_a as u64 >= l);
                        assert!(s.contained);
                        assert!(s.image_size as u64 <= mult_table(2 * l).unwrap().m);
                    }
                }
            }
        }
    }

    #[test]
    fn product_form_identity() {
        let f = field(101);
        let s = product_form_counterexample(&IntPoly::x(), &IntPoly::x(), &f).unwrap();
        assert_eq!(s.l, 11);
        assert_eq!(s.a.len() as u64, 2 * s.l - 1);
        assert_eq!(s.a, s.b);
        assert!(s.contained);
        assert!(!s.size_claim_applies);
    }
}
