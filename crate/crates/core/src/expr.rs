//! A small expression language for maps and points.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | primary)*     juxtaposition multiplies
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' ['-'] integer)?
//! primary := number ['i'] | 'z' | 'i' | '(' expr ')'
//! ```
//!
//! Numbers are integers or decimals with an optional exponent and are read
//! exactly. Points are `inf` or constant expressions; point lists are
//! separated by `;`.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational_map::RationalMap;
use crate::scalar::{parse_rational, Scalar};
use crate::sphere::SpherePoint;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(String),
    Z,
    I,
    Op(char),
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push(Token::Num(chars[start..i].iter().collect()));
            }
            'z' | 'Z' => {
                out.push(Token::Z);
                i += 1;
            }
            'i' | 'I' => {
                out.push(Token::I);
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Token::Op(c));
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            _ => return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}"))),
        }
    }
    Ok(out)
}

/// `num / den` without reduction.
#[derive(Debug, Clone)]
struct Fraction<S> {
    num: Polynomial<S>,
    den: Polynomial<S>,
}

impl<S: Scalar> Fraction<S> {
    fn constant(c: S) -> Self {
        Fraction {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    fn add(&self, o: &Self, sign: i64) -> Self {
        let rhs = (&o.num * &self.den).scale(&S::from_i64(sign));
        Fraction {
            num: &(&self.num * &o.den) + &rhs,
            den: &self.den * &o.den,
        }
    }

    fn mul(&self, o: &Self) -> Self {
        Fraction {
            num: &self.num * &o.num,
            den: &self.den * &o.den,
        }
    }

    fn div(&self, o: &Self) -> Result<Self> {
        if o.num.is_zero() {
            return Err(Error::Parse("division by zero".into()));
        }
        Ok(Fraction {
            num: &self.num * &o.den,
            den: &self.den * &o.num,
        })
    }
}

struct Parser<'a, S> {
    tokens: &'a [Token],
    pos: usize,
    src: &'a str,
    _s: std::marker::PhantomData<S>,
}

impl<S: Scalar> Parser<'_, S> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error(&self, what: &str) -> Error {
        Error::Parse(format!(
            "{what} at token {} of {:?}",
            self.pos + 1,
            self.src
        ))
    }

    fn expr(&mut self) -> Result<Fraction<S>> {
        let mut acc = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add(&rhs, if c == '+' { 1 } else { -1 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Fraction<S>> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Token::Op('/')) => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?)?;
                }
                Some(Token::Num(_) | Token::Z | Token::I | Token::Open) => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Fraction<S>> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Fraction::constant(S::zero()).add(&v, -1))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Fraction<S>> {
        let base = self.primary()?;
        if self.peek() != Some(&Token::Op('^')) {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(&Token::Op('-')) {
            self.pos += 1;
            true
        } else {
            false
        };
        let Some(Token::Num(n)) = self.peek().cloned() else {
            return Err(self.error("expected an integer exponent"));
        };
        self.pos += 1;
        let e: u32 = n
            .parse()
            .map_err(|_| self.error("exponent must be a small nonnegative integer"))?;
        if e as usize > crate::MAX_DEGREE {
            return Err(Error::DegreeTooLarge(e as usize));
        }
        let raised = Fraction {
            num: base.num.pow(e),
            den: base.den.pow(e),
        };
        if negative {
            Fraction::constant(S::one()).div(&raised)
        } else {
            Ok(raised)
        }
    }

    fn primary(&mut self) -> Result<Fraction<S>> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Token::Num(n) => {
                let r = parse_rational(&n)?;
                if self.peek() == Some(&Token::I) {
                    self.pos += 1;
                    Ok(Fraction::constant(S::from_parts(&BigRational::zero(), &r)))
                } else {
                    Ok(Fraction::constant(S::from_parts(&r, &BigRational::zero())))
                }
            }
            Token::Z => Ok(Fraction {
                num: Polynomial::z(),
                den: Polynomial::one(),
            }),
            Token::I => Ok(Fraction::constant(S::from_parts(
                &BigRational::zero(),
                &BigRational::from_integer(1.into()),
            ))),
            Token::Open => {
                let v = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a number, z, i or '('"))
            }
        }
    }
}

fn parse_fraction<S: Scalar>(s: &str) -> Result<Fraction<S>> {
    let tokens = tokenize(s)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        src: s,
        _s: std::marker::PhantomData,
    };
    let v = p.expr()?;
    if p.pos != tokens.len() {
        return Err(p.error("trailing input"));
    }
    Ok(v)
}

/// Parses a rational expression in `z`, e.g. `(z-1)^3*(z+3)/z`.
pub fn parse_map<S: Scalar>(s: &str) -> Result<RationalMap<S>> {
    let f = parse_fraction::<S>(s)?;
    RationalMap::new(f.num, f.den)
}

/// `inf` or a constant expression.
pub fn parse_point<S: Scalar>(s: &str) -> Result<SpherePoint<S>> {
    let t = s.trim();
    if matches!(t, "inf" | "∞" | "infinity") {
        return Ok(SpherePoint::Infinity);
    }
    let f = parse_fraction::<S>(t)?;
    if f.num.degree().unwrap_or(0) > 0 || f.den.degree().unwrap_or(0) > 0 {
        return Err(Error::Parse(format!("point {t:?} depends on z")));
    }
    let num = f.num.coeffs().first().cloned().unwrap_or_else(S::zero);
    let den = f.den.coeffs()[0].clone();
    SpherePoint::finite(num / den)
}

/// Points separated by `;`.
pub fn parse_points<S: Scalar>(s: &str) -> Result<Vec<SpherePoint<S>>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_point)
        .collect()
}
