//! Text grammar for polynomials in problem and artifact files.
//!
//! Canonical form, as produced by the printer: terms in ascending graded-lex
//! order, joined by ` + ` / ` - `, each term `c*x1^a*u1^b*v1^c` with unit
//! coefficients and unit exponents omitted (`x1*x2`, not `1*x1^1*x2^1`).
//! Coefficients print in shortest-round-trip form, so parse(print(p))
//! reproduces `p` bit-exactly.
//!
//! The parser is more liberal than the printer: the `*` between factors may
//! be replaced by whitespace, factors may appear in any order, and multiple
//! numeric factors multiply together.

use std::fmt;

use thiserror::Error;

use super::{Monomial, Polynomial, Universe};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unknown variable `{0}` for universe {1}")]
    UnknownVariable(String, String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("invalid exponent `{0}`")]
    InvalidExponent(String),
    #[error("unexpected character `{0}` at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("empty term at byte {0}")]
    EmptyTerm(usize),
}

pub(super) fn write_polynomial(p: &Polynomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let u = p.universe();
    for (k, (m, c)) in p.terms().enumerate() {
        let mag = c.abs();
        if k == 0 {
            if c < 0.0 {
                write!(f, "-")?;
            }
        } else if c < 0.0 {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mut wrote_factor = false;
        if mag != 1.0 || m.is_one() {
            write!(f, "{mag}")?;
            wrote_factor = true;
        }
        for (slot, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if wrote_factor {
                write!(f, "*")?;
            }
            write!(f, "{}", u.var_name(slot))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
            wrote_factor = true;
        }
    }
    Ok(())
}

/// Parse a polynomial over the given universe. See the module docs for the
/// accepted grammar.
pub fn parse_polynomial(input: &str, universe: &Universe) -> Result<Polynomial, ParseError> {
    let mut out = Polynomial::zero(universe);
    let bytes = input.as_bytes();
    let mut pos = 0usize;
    let len = bytes.len();

    let skip_ws = |pos: &mut usize| {
        while *pos < len && (bytes[*pos] as char).is_whitespace() {
            *pos += 1;
        }
    };

    skip_ws(&mut pos);
    if pos == len {
        return Ok(out); // empty input is the zero polynomial
    }

    while pos < len {
        // sign
        let mut sign = 1.0;
        loop {
            skip_ws(&mut pos);
            match bytes.get(pos).map(|&b| b as char) {
                Some('+') => pos += 1,
                Some('-') => {
                    sign = -sign;
                    pos += 1;
                }
                _ => break,
            }
        }
        skip_ws(&mut pos);
        if pos == len {
            return Err(ParseError::EmptyTerm(pos));
        }

        // factors until the next top-level +/- or end of input
        let mut coeff = sign;
        let mut exps = vec![0u32; universe.total()];
        let mut saw_factor = false;
        loop {
            skip_ws(&mut pos);
            match bytes.get(pos).map(|&b| b as char) {
                None | Some('+') | Some('-') => break,
                Some('*') => {
                    pos += 1;
                    continue;
                }
                Some(c) if c.is_ascii_digit() || c == '.' => {
                    let start = pos;
                    pos += 1;
                    while pos < len {
                        let ch = bytes[pos] as char;
                        if ch.is_ascii_digit() || ch == '.' {
                            pos += 1;
                        } else if ch == 'e' || ch == 'E' {
                            pos += 1;
                            if matches!(bytes.get(pos).map(|&b| b as char), Some('+') | Some('-')) {
                                pos += 1;
                            }
                        } else {
                            break;
                        }
                    }
                    let text = &input[start..pos];
                    let v: f64 = text
                        .parse()
                        .map_err(|_| ParseError::InvalidNumber(text.to_string()))?;
                    coeff *= v;
                    saw_factor = true;
                }
                Some(c) if c == 'x' || c == 'u' || c == 'v' => {
                    let start = pos;
                    pos += 1;
                    while pos < len && (bytes[pos] as char).is_ascii_digit() {
                        pos += 1;
                    }
                    let name = &input[start..pos];
                    let slot = universe.slot_of(name).ok_or_else(|| {
                        ParseError::UnknownVariable(name.to_string(), universe.to_string())
                    })?;
                    let mut e = 1u32;
                    skip_ws(&mut pos);
                    if bytes.get(pos) == Some(&b'^') {
                        pos += 1;
                        skip_ws(&mut pos);
                        let estart = pos;
                        while pos < len && (bytes[pos] as char).is_ascii_digit() {
                            pos += 1;
                        }
                        let etext = &input[estart..pos];
                        e = etext
                            .parse()
                            .map_err(|_| ParseError::InvalidExponent(etext.to_string()))?;
                    }
                    exps[slot] += e;
                    saw_factor = true;
                }
                Some(c) => return Err(ParseError::UnexpectedChar(c, pos)),
            }
        }
        if !saw_factor {
            return Err(ParseError::EmptyTerm(pos));
        }
        out.add_term(Monomial::from_exponents(exps), coeff);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Universe {
        Universe::new(2, 1, 2)
    }

    #[test]
    fn parse_planar_entry() {
        let uni = u();
        let p = parse_polynomial("1 - 16*x1*x2", &uni).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.eval(&[0.25, 0.25, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(format!("{p}"), "1 - 16*x1*x2");
    }

    #[test]
    fn parse_liberal_forms() {
        let uni = u();
        let a = parse_polynomial("2 x1 x2 + u1^2", &uni).unwrap();
        let b = parse_polynomial("2*x1*x2 + u1^2", &uni).unwrap();
        assert_eq!(a, b);
        let c = parse_polynomial("-x1 + 3*2*v2", &uni).unwrap();
        assert_eq!(format!("{c}"), "-x1 + 6*v2");
    }

    #[test]
    fn unknown_variable_rejected() {
        let uni = Universe::new(1, 0, 0);
        assert!(matches!(
            parse_polynomial("x2", &uni),
            Err(ParseError::UnknownVariable(_, _))
        ));
    }

    #[test]
    fn zero_prints_as_zero() {
        let uni = u();
        let p = parse_polynomial("x1 - x1", &uni).unwrap();
        assert!(p.is_zero());
        assert_eq!(format!("{p}"), "0");
        assert_eq!(parse_polynomial("0", &uni).unwrap(), p);
    }

    #[test]
    fn scientific_coefficients_round_trip() {
        let uni = u();
        let p = parse_polynomial("1.5e-3*x1^2 - 2.25e2", &uni).unwrap();
        let printed = format!("{p}");
        let q = parse_polynomial(&printed, &uni).unwrap();
        assert_eq!(p, q);
    }
}
