//! Polynomials with exact rational coefficients in variables `w1…wm`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{format_rational, parse_rational, Coeff, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("polynomial `{text}`: {message}")]
pub struct PolyParseError {
    pub text: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    powers: Vec<u32>,
    coeff: Coeff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Monomial>,
}

type Terms = BTreeMap<Vec<u32>, Rational>;

impl Polynomial {
    fn from_terms(nvars: usize, terms: Terms) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(powers, c)| Monomial { powers, coeff: Coeff::new(c) })
            .collect();
        Polynomial { nvars, terms }
    }

    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::from_terms(nvars, BTreeMap::from([(vec![0; nvars], c)]))
    }

    /// `Σ_i coeffs[i] · w_{i+1}`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut p = vec![0; n];
                p[i] = 1;
                (p, c.clone())
            })
            .collect();
        Self::from_terms(n, terms)
    }

    /// Parse with variables named `{prefix}1 … {prefix}{nvars}`.
    pub fn parse(text: &str, prefix: char, nvars: usize) -> Result<Self, PolyParseError> {
        let mut p = Parser { chars: text.chars().collect(), pos: 0, prefix, nvars, text };
        let terms = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self::from_terms(nvars, terms))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|m| m.powers.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        let mut total = S::zero();
        for m in &self.terms {
            let mut v = S::from_coeff(&m.coeff);
            for (x, &p) in vars.iter().zip(&m.powers) {
                for _ in 0..p {
                    v = v * x.clone();
                }
            }
            total = total + v;
        }
        total
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|m| {
                let mut s = format_rational(&m.coeff.exact);
                for (i, &p) in m.powers.iter().enumerate() {
                    match p {
                        0 => {}
                        1 => s.push_str(&format!("*w{}", i + 1)),
                        _ => s.push_str(&format!("*w{}^{p}", i + 1)),
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    prefix: char,
    nvars: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> PolyParseError {
        PolyParseError { text: self.text.to_string(), message: format!("{message} at offset {}", self.pos) }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Terms, PolyParseError> {
        let mut acc = Terms::new();
        let mut sign = Rational::one();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                sign = -sign;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        loop {
            let t = self.term()?;
            add_into(&mut acc, &t, &sign);
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    sign = Rational::one();
                }
                Some('-') => {
                    self.pos += 1;
                    sign = -Rational::one();
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Terms, PolyParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = mul_terms(&acc, &f, self.nvars);
                }
                Some('/') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    let c = constant_value(&f, self.nvars).ok_or_else(|| self.error("division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(self.error("division by zero"));
                    }
                    let inv = Rational::one() / c;
                    for v in acc.values_mut() {
                        *v = &*v * &inv;
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Terms, PolyParseError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let exp: u32 = self.chars[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| self.error("expected a nonnegative integer exponent"))?;
            let mut acc = BTreeMap::from([(vec![0; self.nvars], Rational::one())]);
            for _ in 0..exp {
                acc = mul_terms(&acc, &base, self.nvars);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Terms, PolyParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('-') => {
                self.pos += 1;
                let mut a = self.factor()?;
                for v in a.values_mut() {
                    *v = -v.clone();
                }
                Ok(a)
            }
            Some(c) if c == self.prefix => {
                self.pos += 1;
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let idx: usize = self.chars[start..self.pos]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| self.error("expected a variable index"))?;
                if idx == 0 || idx > self.nvars {
                    return Err(self.error(&format!("variable {}{idx} out of range 1..={}", self.prefix, self.nvars)));
                }
                let mut p = vec![0; self.nvars];
                p[idx - 1] = 1;
                Ok(BTreeMap::from([(p, Rational::one())]))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while let Some(&c) = self.chars.get(self.pos) {
                    let exp_sign = (c == '-' || c == '+')
                        && self.pos > start
                        && matches!(self.chars[self.pos - 1], 'e' | 'E');
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                let v = parse_rational(&lit).map_err(|_| self.error(&format!("bad number `{lit}`")))?;
                Ok(BTreeMap::from([(vec![0; self.nvars], v)]))
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

fn add_into(acc: &mut Terms, t: &Terms, sign: &Rational) {
    for (p, c) in t {
        let e = acc.entry(p.clone()).or_insert_with(Rational::zero);
        *e = &*e + c * sign;
    }
}

fn mul_terms(a: &Terms, b: &Terms, nvars: usize) -> Terms {
    let mut out = Terms::new();
    for (pa, ca) in a {
        for (pb, cb) in b {
            let p: Vec<u32> = (0..nvars).map(|i| pa[i] + pb[i]).collect();
            let e = out.entry(p).or_insert_with(Rational::zero);
            *e = &*e + ca * cb;
        }
    }
    out
}

fn constant_value(t: &Terms, nvars: usize) -> Option<Rational> {
    let zero = vec![0; nvars];
    if t.keys().all(|p| *p == zero) {
        Some(t.get(&zero).cloned().unwrap_or_else(Rational::zero))
    } else {
        None
    }
}
