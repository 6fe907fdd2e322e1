//! Text syntax for integer polynomials and map specifications.
//!
//! ```text
//! map    := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := INT | VAR ['^' INT] | 'g' '^' gexp | '(' poly ')' ['^' INT]
//! gexp   := VAR | INT | '(' linear ')'
//! poly   := univariate sum of products of powers of INT, VAR, '(' poly ')'
//! ```
//!
//! Map variables are `x`, `y`, `z`; `g` is the smallest primitive root of the
//! field. A parenthesized factor must be univariate and becomes that
//! variable's polynomial factor. Whitespace is ignored.

use super::map::{GenExponent, Term, VARIABLES};
use super::{IntPoly, MapSpec};
use crate::error::{Error, Result};

const MAX_POLY_DEGREE: usize = 1024;
const MAX_VAR_POWER: u64 = 1 << 20;
const MAX_INPUT: usize = 1 << 16;

/// Parses a univariate integer polynomial such as `x^3 - 2*x + 1` or
/// `(y + 1)^2`. Any single lowercase letter other than `g` names the
/// variable; `var`, when given, forces it.
pub fn parse_int_poly(text: &str, var: Option<char>) -> Result<IntPoly> {
    let mut p = Parser::new(text)?;
    let mut seen = var;
    let poly = p.poly_sum(&mut seen)?;
    p.expect_end()?;
    Ok(poly)
}

/// Parses a map specification. The arity is the given one, or inferred from
/// the highest variable used (at least 1).
pub fn parse_map_spec(text: &str, arity: Option<usize>) -> Result<MapSpec> {
    let mut p = Parser::new(text)?;
    let raw = p.map_sum()?;
    p.expect_end()?;
    let used = raw.iter().map(|t| t.max_var).max().flatten();
    let needed = used.map_or(1, |v| v + 1);
    let arity = match arity {
        Some(a) if a < needed => {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("map uses {} but arity is {a}", VARIABLES[needed - 1]),
            })
        }
        Some(a) => a,
        None => needed,
    };
    if !(1..=3).contains(&arity) {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("arity {arity} outside 1..=3"),
        });
    }
    let terms = raw
        .into_iter()
        .filter(|t| t.coeff != 0)
        .map(|t| t.into_term(arity))
        .collect();
    MapSpec::new(arity, terms)
}

struct RawTerm {
    coeff: i64,
    powers: [u32; 3],
    polys: [Option<IntPoly>; 3],
    gen: Option<(i64, [i64; 3])>,
    max_var: Option<usize>,
}

impl RawTerm {
    fn into_term(self, arity: usize) -> Term {
        Term {
            coeff: self.coeff,
            powers: self.powers[..arity].to_vec(),
            poly_factors: self.polys[..arity].to_vec(),
            gen_exponent: self.gen.map(|(c, v)| GenExponent {
                constant: c,
                coeffs: v[..arity].to_vec(),
            }),
        }
    }

    fn touch(&mut self, var: usize) {
        self.max_var = Some(self.max_var.map_or(var, |m| m.max(var)));
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn var_index(c: u8) -> Option<usize> {
    VARIABLES.iter().position(|&v| v as u8 == c)
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self> {
        if text.len() > MAX_INPUT {
            return Err(Error::Parse {
                pos: 0,
                msg: "input too long".into(),
            });
        }
        Ok(Parser {
            src: text.as_bytes(),
            pos: 0,
        })
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        // digits are ASCII, so the slice is valid UTF-8
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        digits.parse::<u64>().or_else(|_| {
            self.pos = start;
            self.err("integer literal out of range")
        })
    }

    fn exponent(&mut self, limit: u64) -> Result<u64> {
        if !self.eat(b'^') {
            return Ok(1);
        }
        let e = self.integer()?;
        if e > limit {
            return self.err(format!("exponent {e} exceeds {limit}"));
        }
        Ok(e)
    }

    fn sign(&mut self) -> Option<bool> {
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                Some(false)
            }
            Some(b'-') => {
                self.pos += 1;
                Some(true)
            }
            _ => None,
        }
    }

    // ---- univariate polynomials ----

    fn poly_sum(&mut self, var: &mut Option<char>) -> Result<IntPoly> {
        let mut negate = self.sign().unwrap_or(false);
        let mut acc = IntPoly::zero();
        loop {
            let mut term = self.poly_product(var)?;
            if negate {
                term = self.checked(term.checked_scale(-1))?;
            }
            acc = self.checked(acc.checked_add(&term))?;
            match self.sign() {
                Some(neg) => negate = neg,
                None => return Ok(acc),
            }
        }
    }

    fn poly_product(&mut self, var: &mut Option<char>) -> Result<IntPoly> {
        let mut acc = self.poly_power(var)?;
        while self.eat(b'*') {
            let rhs = self.poly_power(var)?;
            acc = self.checked(acc.checked_mul(&rhs))?;
        }
        Ok(acc)
    }

    fn poly_power(&mut self, var: &mut Option<char>) -> Result<IntPoly> {
        let base = self.poly_atom(var)?;
        let e = self.exponent(MAX_POLY_DEGREE as u64)?;
        if base.degree().unwrap_or(0) * e as usize > MAX_POLY_DEGREE {
            return self.err("polynomial degree too large");
        }
        self.checked(base.checked_pow(e as u32))
    }

    fn poly_atom(&mut self, var: &mut Option<char>) -> Result<IntPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly_sum(var)?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                match i64::try_from(v) {
                    Ok(v) => Ok(IntPoly::constant(v)),
                    Err(_) => self.err("coefficient out of range"),
                }
            }
            Some(c) if c.is_ascii_lowercase() && c != b'g' => {
                let c = c as char;
                match *var {
                    Some(v) if v != c => {
                        return self.err(format!("polynomial mixes variables '{v}' and '{c}'"))
                    }
                    _ => *var = Some(c),
                }
                self.pos += 1;
                Ok(IntPoly::x())
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn checked<T>(&self, v: Option<T>) -> Result<T> {
        match v {
            Some(v) => Ok(v),
            None => self.err("integer overflow"),
        }
    }

    // ---- maps ----

    fn map_sum(&mut self) -> Result<Vec<RawTerm>> {
        let mut negate = self.sign().unwrap_or(false);
        let mut terms = Vec::new();
        loop {
            terms.push(self.map_term(negate)?);
            match self.sign() {
                Some(neg) => negate = neg,
                None => return Ok(terms),
            }
        }
    }

    fn map_term(&mut self, negate: bool) -> Result<RawTerm> {
        let mut term = RawTerm {
            coeff: 1,
            powers: [0; 3],
            polys: [None, None, None],
            gen: None,
            max_var: None,
        };
        // magnitude is tracked in i128 so that i64::MIN survives a round trip
        let mut coeff: i128 = 1;
        loop {
            self.map_factor(&mut term, &mut coeff)?;
            if !self.eat(b'*') {
                break;
            }
        }
        if negate {
            coeff = -coeff;
        }
        term.coeff = match i64::try_from(coeff) {
            Ok(c) => c,
            Err(_) => return self.err("coefficient out of range"),
        };
        Ok(term)
    }

    fn scale(&self, coeff: &mut i128, by: i128) -> Result<()> {
        *coeff = self.checked(coeff.checked_mul(by))?;
        if coeff.unsigned_abs() > 1u128 << 63 {
            return self.err("coefficient out of range");
        }
        Ok(())
    }

    fn map_factor(&mut self, term: &mut RawTerm, coeff: &mut i128) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                self.scale(coeff, v as i128)
            }
            Some(b'g') => {
                self.pos += 1;
                self.expect(b'^')?;
                let (c, v) = self.gen_exponent(term)?;
                let (c0, v0) = term.gen.unwrap_or((0, [0; 3]));
                let mut sum = [0i64; 3];
                for i in 0..3 {
                    sum[i] = self.checked(v0[i].checked_add(v[i]))?;
                }
                term.gen = Some((self.checked(c0.checked_add(c))?, sum));
                Ok(())
            }
            Some(b'(') => {
                self.pos += 1;
                let mut var = None;
                let poly = self.poly_sum(&mut var)?;
                self.expect(b')')?;
                let e = self.exponent(MAX_POLY_DEGREE as u64)?;
                if poly.degree().unwrap_or(0) * e as usize > MAX_POLY_DEGREE {
                    return self.err("polynomial degree too large");
                }
                let poly = self.checked(poly.checked_pow(e as u32))?;
                match poly.degree() {
                    None => self.scale(coeff, 0),
                    Some(0) => self.scale(coeff, poly.coeff(0) as i128),
                    Some(_) => {
                        let Some(v) = var.and_then(|c| var_index(c as u8)) else {
                            return self.err("polynomial factor must use x, y or z");
                        };
                        term.touch(v);
                        let merged = match term.polys[v].take() {
                            Some(prev) => self.checked(prev.checked_mul(&poly))?,
                            None => poly,
                        };
                        if merged.degree().unwrap_or(0) > MAX_POLY_DEGREE {
                            return self.err("polynomial degree too large");
                        }
                        term.polys[v] = Some(merged);
                        Ok(())
                    }
                }
            }
            Some(c) => match var_index(c) {
                Some(v) => {
                    self.pos += 1;
                    let e = self.exponent(MAX_VAR_POWER)?;
                    let total = term.powers[v] as u64 + e;
                    if total > MAX_VAR_POWER {
                        return self.err("variable power too large");
                    }
                    term.powers[v] = total as u32;
                    if e > 0 {
                        term.touch(v);
                    }
                    Ok(())
                }
                None => self.err(format!("unexpected '{}'", c as char)),
            },
            None => self.err("unexpected end of input"),
        }
    }

    fn gen_exponent(&mut self, term: &mut RawTerm) -> Result<(i64, [i64; 3])> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let out = self.linear(term)?;
                self.expect(b')')?;
                Ok(out)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                match i64::try_from(v) {
                    Ok(v) => Ok((v, [0; 3])),
                    Err(_) => self.err("exponent out of range"),
                }
            }
            Some(c) => match var_index(c) {
                Some(v) => {
                    self.pos += 1;
                    term.touch(v);
                    let mut coeffs = [0; 3];
                    coeffs[v] = 1;
                    Ok((0, coeffs))
                }
                None => self.err("expected generator exponent"),
            },
            None => self.err("unexpected end of input"),
        }
    }

    fn linear(&mut self, term: &mut RawTerm) -> Result<(i64, [i64; 3])> {
        let mut constant: i64 = 0;
        let mut coeffs = [0i64; 3];
        let mut negate = self.sign().unwrap_or(false);
        loop {
            let mut c: i64 = 1;
            let mut var = None;
            if matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                let v = self.integer()?;
                c = match i64::try_from(v) {
                    Ok(v) => v,
                    Err(_) => return self.err("coefficient out of range"),
                };
                if self.eat(b'*') {
                    var = Some(self.linear_var()?);
                }
            } else {
                var = Some(self.linear_var()?);
            }
            if negate {
                c = -c;
            }
            match var {
                Some(v) => {
                    term.touch(v);
                    coeffs[v] = self.checked(coeffs[v].checked_add(c))?;
                }
                None => constant = self.checked(constant.checked_add(c))?,
            }
            match self.sign() {
                Some(neg) => negate = neg,
                None => return Ok((constant, coeffs)),
            }
        }
    }

    fn linear_var(&mut self) -> Result<usize> {
        match self.peek().and_then(var_index) {
            Some(v) => {
                self.pos += 1;
                Ok(v)
            }
            None => self.err("expected x, y or z"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use proptest::prelude::*;

    #[test]
    fn parses_polynomials() {
        assert_eq!(
            parse_int_poly("x^3 - 2*x + 1", None).unwrap(),
            IntPoly::new(vec![1, -2, 0, 1])
        );
        assert_eq!(
            parse_int_poly("(y+1)^2", None).unwrap(),
            IntPoly::new(vec![1, 2, 1])
        );
        assert_eq!(parse_int_poly("-7", None).unwrap(), IntPoly::constant(-7));
        assert!(parse_int_poly("x*y", None).is_err());
        assert!(parse_int_poly("y^2", Some('x')).is_err());
        assert!(parse_int_poly("x^", None).is_err());
        assert!(parse_int_poly("99999999999999999999", None).is_err());
        assert!(parse_int_poly("(x+1)^2000", None).is_err());
    }

    #[test]
    fn parses_maps() {
        let f = PrimeField::new(7).unwrap();
        let spec = parse_map_spec("x^2 + x*y", None).unwrap();
        assert_eq!(spec, MapSpec::bourgain());
        let spec = parse_map_spec("x*y + x^2*g^y", None).unwrap();
        assert_eq!(spec.eval(&f, &[1, 2]).unwrap(), 4);
        let spec = parse_map_spec("z*x*y + z*x^2*y^2", None).unwrap();
        assert_eq!(spec.arity(), 3);
        let spec = parse_map_spec("x", Some(3)).unwrap();
        assert_eq!(spec.arity(), 3);
        assert!(parse_map_spec("z", Some(2)).is_err());
        assert!(parse_map_spec("(x + y)", None).is_err());
        assert!(parse_map_spec("w", None).is_err());
        assert_eq!(parse_map_spec("0", None).unwrap().terms().len(), 0);
    }

    #[test]
    fn structured_factors() {
        let f = PrimeField::new(11).unwrap();
        let spec = parse_map_spec("3*x*(y^2+1)*(y-1) - g^(x+2*y-1)", None).unwrap();
        let t = &spec.terms()[0];
        assert_eq!(t.coeff, 3);
        assert_eq!(t.poly_factors[1], Some(IntPoly::new(vec![-1, 1, -1, 1])));
        for (x, y) in [(0, 0), (3, 4), (10, 10)] {
            let g = f.generator();
            let e = (x as i64 + 2 * y as i64 - 1).rem_euclid(10) as u64;
            let want = f.sub(
                f.mul(3 * x, f.mul(y * y + 1, f.from_i64(y as i64 - 1))),
                f.pow(g, e),
            );
            assert_eq!(spec.eval(&f, &[x, y]).unwrap(), want);
        }
    }

    #[test]
    fn extreme_coefficient_round_trips() {
        let spec = parse_map_spec("-9223372036854775808*x", None).unwrap();
        assert_eq!(spec.terms()[0].coeff, i64::MIN);
        assert_eq!(parse_map_spec(&spec.to_string(), None).unwrap(), spec);
        assert!(parse_map_spec("9223372036854775808*x", None).is_err());
    }

    fn arb_map_text() -> impl Strategy<Value = String> {
        let factor = prop_oneof![
            (1u32..20).prop_map(|c| c.to_string()),
            (0usize..3, 1u32..5).prop_map(|(v, e)| format!("{}^{e}", VARIABLES[v])),
            (0usize..3).prop_map(|v| VARIABLES[v].to_string()),
            (0usize..3, -3i64..4).prop_map(|(v, c)| {
                let sign = if c < 0 { '-' } else { '+' };
                format!("({}^2 {sign} {})", VARIABLES[v], c.abs())
            }),
            (0usize..3, 0i64..3).prop_map(|(v, c)| format!("g^({}+{c})", VARIABLES[v])),
        ];
        let term = prop::collection::vec(factor, 1..4).prop_map(|fs| fs.join("*"));
        (prop::collection::vec((any::<bool>(), term), 1..5)).prop_map(|ts| {
            ts.into_iter()
                .map(|(neg, t)| format!("{}{t}", if neg { " - " } else { " + " }))
                .collect::<String>()
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(text in arb_map_text()) {
            let spec = parse_map_spec(&text, None).unwrap();
            let again = parse_map_spec(&spec.to_string(), Some(spec.arity())).unwrap();
            prop_assert_eq!(again, spec);
        }

        #[test]
        fn never_panics_on_noise(text in "[-+*^()xyzg0-9 ]{0,40}") {
            let _ = parse_map_spec(&text, None);
            let _ = parse_int_poly(&text, None);
        }
    }
}
