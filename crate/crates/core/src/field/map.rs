use std::fmt;

use super::{IntPoly, PrimeField};
use crate::error::{Error, Result};

/// Variable names in positional order.
pub const VARIABLES: [char; 3] = ['x', 'y', 'z'];

/// Integer linear form `constant + sum coeffs[i] * v_i`, used as the exponent
/// of the field generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenExponent {
    pub constant: i64,
    pub coeffs: Vec<i64>,
}

/// One summand `c * prod v_i^e_i * prod P_i(v_i) * g^(L(v))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: i64,
    pub powers: Vec<u32>,
    pub poly_factors: Vec<Option<IntPoly>>,
    pub gen_exponent: Option<GenExponent>,
}

impl Term {
    pub fn constant(arity: usize, c: i64) -> Self {
        Term {
            coeff: c,
            powers: vec![0; arity],
            poly_factors: vec![None; arity],
            gen_exponent: None,
        }
    }

    pub fn monomial(c: i64, powers: &[u32]) -> Self {
        Term {
            powers: powers.to_vec(),
            ..Term::constant(powers.len(), c)
        }
    }

    pub fn with_poly(mut self, var: usize, poly: IntPoly) -> Self {
        self.poly_factors[var] = Some(poly);
        self
    }

    pub fn with_generator(mut self, constant: i64, coeffs: &[i64]) -> Self {
        self.gen_exponent = Some(GenExponent {
            constant,
            coeffs: coeffs.to_vec(),
        });
        self
    }

    fn eval(&self, field: &PrimeField, point: &[u64]) -> u64 {
        let mut acc = field.from_i64(self.coeff);
        if acc == 0 {
            return 0;
        }
        for (i, &x) in point.iter().enumerate() {
            if self.powers[i] > 0 {
                acc = field.mul(acc, field.pow(x, self.powers[i] as u64));
            }
            if let Some(poly) = &self.poly_factors[i] {
                acc = field.mul(acc, poly.eval(field, x));
            }
        }
        if let Some(gen) = &self.gen_exponent {
            let order = field.group_order() as i128;
            let mut e = gen.constant as i128;
            for (c, &x) in gen.coeffs.iter().zip(point) {
                e = (e + *c as i128 * x as i128).rem_euclid(order);
            }
            acc = field.mul(acc, field.pow(field.generator(), e as u64));
        }
        acc
    }

    fn render(&self) -> String {
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in self.powers.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(VARIABLES[i].to_string()),
                _ => factors.push(format!("{}^{e}", VARIABLES[i])),
            }
        }
        for (i, poly) in self.poly_factors.iter().enumerate() {
            if let Some(poly) = poly {
                factors.push(format!("({})", poly.display_in(VARIABLES[i])));
            }
        }
        if let Some(gen) = &self.gen_exponent {
            factors.push(render_gen(gen));
        }
        let mag = self.coeff.unsigned_abs();
        let mut body = factors.join("*");
        if body.is_empty() {
            body = mag.to_string();
        } else if mag != 1 {
            body = format!("{mag}*{body}");
        }
        body
    }
}

fn render_gen(gen: &GenExponent) -> String {
    let mut parts: Vec<(i64, String)> = Vec::new();
    for (i, &c) in gen.coeffs.iter().enumerate() {
        if c != 0 {
            let name = VARIABLES[i].to_string();
            let mag = c.unsigned_abs();
            parts.push((c, if mag == 1 { name } else { format!("{mag}*{name}") }));
        }
    }
    if gen.constant != 0 {
        parts.push((gen.constant, gen.constant.unsigned_abs().to_string()));
    }
    if parts.is_empty() {
        return "g^0".to_string();
    }
    let mut s = String::new();
    for (i, (c, body)) in parts.iter().enumerate() {
        if i == 0 {
            if *c < 0 {
                s.push('-');
            }
        } else {
            s.push_str(if *c < 0 { " - " } else { " + " });
        }
        s.push_str(body);
    }
    if parts.len() == 1 && parts[0].0 > 0 && !parts[0].1.contains('*') {
        format!("g^{s}")
    } else {
        format!("g^({s})")
    }
}

/// Symbolic map `F_p^arity -> F_p` given as a sum of structured terms.
///
/// Evaluation is `pi_p` of the integer value for purely polynomial maps.
/// Generator factors `g^(L(v))` use the smallest primitive root of the field
/// and the least nonnegative representatives of the arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapSpec {
    arity: usize,
    terms: Vec<Term>,
}

impl MapSpec {
    pub fn new(arity: usize, terms: Vec<Term>) -> Result<Self> {
        if !(1..=3).contains(&arity) {
            return Err(Error::InvalidSpec(format!("arity {arity} outside 1..=3")));
        }
        for t in &terms {
            let gen_ok = t.gen_exponent.as_ref().is_none_or(|g| g.coeffs.len() == arity);
            if t.powers.len() != arity || t.poly_factors.len() != arity || !gen_ok {
                return Err(Error::InvalidSpec(
                    "term shape does not match the map arity".into(),
                ));
            }
        }
        Ok(MapSpec { arity, terms })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn uses_generator(&self) -> bool {
        self.terms.iter().any(|t| t.gen_exponent.is_some())
    }

    pub fn eval(&self, field: &PrimeField, point: &[u64]) -> Result<u64> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(field, point))
    }

    /// Evaluation without the arity check, for inner loops whose callers
    /// already validated the shape.
    #[inline]
    pub fn eval_unchecked(&self, field: &PrimeField, point: &[u64]) -> u64 {
        self.terms
            .iter()
            .fold(0, |acc, t| field.add(acc, t.eval(field, point)))
    }

    pub fn ensure_arity(&self, arity: usize) -> Result<()> {
        if self.arity == arity {
            Ok(())
        } else {
            Err(Error::ArityMismatch {
                expected: arity,
                got: self.arity,
            })
        }
    }

    /// Embeds this map into a larger variable space; variable `i` becomes
    /// variable `positions[i]` of the result.
    pub fn embed(&self, arity: usize, positions: &[usize]) -> Result<MapSpec> {
        if positions.len() != self.arity || positions.iter().any(|&p| p >= arity) {
            return Err(Error::InvalidSpec("bad variable embedding".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut out = Term::constant(arity, t.coeff);
                for (i, &pos) in positions.iter().enumerate() {
                    out.powers[pos] = t.powers[i];
                    out.poly_factors[pos] = t.poly_factors[i].clone();
                }
                out.gen_exponent = t.gen_exponent.as_ref().map(|g| {
                    let mut coeffs = vec![0; arity];
                    for (i, &pos) in positions.iter().enumerate() {
                        coeffs[pos] = g.coeffs[i];
                    }
                    GenExponent {
                        constant: g.constant,
                        coeffs,
                    }
                });
                out
            })
            .collect();
        MapSpec::new(arity, terms)
    }

    pub fn uses_variable(&self, var: usize) -> bool {
        self.terms.iter().any(|t| {
            t.powers.get(var).is_some_and(|&e| e > 0)
                || t.poly_factors.get(var).is_some_and(|f| f.is_some())
                || t
                    .gen_exponent
                    .as_ref()
                    .is_some_and(|g| g.coeffs.get(var).is_some_and(|&c| c != 0))
        })
    }

    /// Inverse of [`MapSpec::embed`]: keeps variables `positions` (in that
    /// order) and fails if any other variable occurs.
    pub fn project(&self, positions: &[usize]) -> Result<MapSpec> {
        if let Some(v) = (0..self.arity).find(|v| !positions.contains(v) && self.uses_variable(*v)) {
            return Err(Error::InvalidSpec(format!(
                "map depends on {}, which is not allowed here",
                VARIABLES[v]
            )));
        }
        if positions.iter().any(|&p| p >= self.arity) {
            return Err(Error::InvalidSpec("bad variable projection".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut out = Term::constant(positions.len(), t.coeff);
                for (i, &pos) in positions.iter().enumerate() {
                    out.powers[i] = t.powers[pos];
                    out.poly_factors[i] = t.poly_factors[pos].clone();
                }
                out.gen_exponent = t.gen_exponent.as_ref().map(|g| GenExponent {
                    constant: g.constant,
                    coeffs: positions.iter().map(|&pos| g.coeffs[pos]).collect(),
                });
                out
            })
            .collect();
        MapSpec::new(positions.len(), terms)
    }

    pub fn plus(&self, other: &MapSpec) -> Result<MapSpec> {
        other.ensure_arity(self.arity)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MapSpec::new(self.arity, terms)
    }

    /// `sum c * v^e` for a univariate polynomial placed on variable `var`.
    pub fn from_poly(arity: usize, var: usize, poly: &IntPoly) -> Result<MapSpec> {
        let terms = poly
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(e, &c)| {
                let mut powers = vec![0; arity];
                powers[var] = e as u32;
                Term::monomial(c, &powers)
            })
            .collect();
        MapSpec::new(arity, terms)
    }

    /// `x + y`.
    pub fn additive() -> MapSpec {
        MapSpec {
            arity: 2,
            terms: vec![Term::monomial(1, &[1, 0]), Term::monomial(1, &[0, 1])],
        }
    }

    /// `x^2 + x*y`.
    pub fn bourgain() -> MapSpec {
        MapSpec {
            arity: 2,
            terms: vec![Term::monomial(1, &[2, 0]), Term::monomial(1, &[1, 1])],
        }
    }

    /// `x*y`.
    pub fn product() -> MapSpec {
        MapSpec {
            arity: 2,
            terms: vec![Term::monomial(1, &[1, 1])],
        }
    }

    /// `f(x) + x^k * g(y)`.
    pub fn expander_family(f: &IntPoly, k: u32, g: &IntPoly) -> MapSpec {
        MapSpec {
            arity: 2,
            terms: vec![
                Term::constant(2, 1).with_poly(0, f.clone()),
                Term::monomial(1, &[k, 0]).with_poly(1, g.clone()),
            ],
        }
    }

    /// `f(x) + g(y)`.
    pub fn separable_sum(f: &IntPoly, g: &IntPoly) -> MapSpec {
        MapSpec {
            arity: 2,
            terms: vec![
                Term::constant(2, 1).with_poly(0, f.clone()),
                Term::constant(2, 1).with_poly(1, g.clone()),
            ],
        }
    }

    /// `x^(1+u) y + x^(2-u) h(y)` for `u` in `{0, 1}`.
    pub fn shifted_poly_family(u: u32, h: &IntPoly) -> Result<MapSpec> {
        if u > 1 {
            return Err(Error::InvalidSpec("u must be 0 or 1".into()));
        }
        Ok(MapSpec {
            arity: 2,
            terms: vec![
                Term::monomial(1, &[1 + u, 1]),
                Term::monomial(1, &[2 - u, 0]).with_poly(1, h.clone()),
            ],
        })
    }

    /// `x^(1+u) y + x^(2-u) g^y` for `u` in `{0, 1}`.
    pub fn shifted_generator_family(u: u32) -> Result<MapSpec> {
        if u > 1 {
            return Err(Error::InvalidSpec("u must be 0 or 1".into()));
        }
        Ok(MapSpec {
            arity: 2,
            terms: vec![
                Term::monomial(1, &[1 + u, 1]),
                Term::monomial(1, &[2 - u, 0]).with_generator(0, &[0, 1]),
            ],
        })
    }

    /// The four two-variable extractor candidates
    /// `xy + x^2 h(y)`, `x h(y) + x^2 y`, `xy + x^2 g^y`, `x g^y + x^2 y`.
    pub fn extractor_candidates(h: &IntPoly) -> Vec<(&'static str, MapSpec)> {
        let t = |c, p: &[u32]| Term::monomial(c, p);
        let mk = |terms| MapSpec { arity: 2, terms };
        vec![
            (
                "xy+x^2h(y)",
                mk(vec![t(1, &[1, 1]), t(1, &[2, 0]).with_poly(1, h.clone())]),
            ),
            (
                "xh(y)+x^2y",
                mk(vec![t(1, &[1, 0]).with_poly(1, h.clone()), t(1, &[2, 1])]),
            ),
            (
                "xy+x^2g^y",
                mk(vec![t(1, &[1, 1]), t(1, &[2, 0]).with_generator(0, &[0, 1])]),
            ),
            (
                "xg^y+x^2y",
                mk(vec![t(1, &[1, 0]).with_generator(0, &[0, 1]), t(1, &[2, 1])]),
            ),
        ]
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            match (i, t.coeff < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            f.write_str(&t.render())?;
        }
        Ok(())
    }
}
