//! Ordinals below ω^ω in Cantor Normal Form.
//!
//! An [`Ordinal`] is a finite sum `ω^e1·c1 + … + ω^ek·ck` with strictly
//! descending natural exponents and positive coefficients. Both exponents and
//! coefficients are arbitrary-precision naturals, so shapes such as `ω·k` for
//! huge `k` never overflow. Naturals are the ordinals whose only term has
//! exponent zero; zero is the empty sum.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// One `ω^exponent · coefficient` summand of a CNF.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: BigUint,
    pub coefficient: BigUint,
}

impl Term {
    fn new(exponent: BigUint, coefficient: BigUint) -> Self {
        Term {
            exponent,
            coefficient,
        }
    }

    fn finite(coefficient: BigUint) -> Self {
        Term::new(BigUint::zero(), coefficient)
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("left subtraction {minuend} - {subtrahend} is undefined (subtrahend is larger)")]
    LeftSubtraction {
        minuend: Ordinal,
        subtrahend: Ordinal,
    },
    #[error("right subtraction {minuend} -R {subtrahend} has no solution")]
    RightSubtraction {
        minuend: Ordinal,
        subtrahend: Ordinal,
    },
    #[error("division of {0} by zero")]
    DivisionByZero(Ordinal),
    #[error("not in Cantor normal form: {0}")]
    NotCanonical(String),
    #[error("cannot parse ordinal `{0}`")]
    Parse(String),
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from(1u32)
    }

    /// The first limit ordinal, ω.
    pub fn omega() -> Self {
        Ordinal::omega_pow(BigUint::one())
    }

    /// `ω^exponent`.
    pub fn omega_pow(exponent: impl Into<BigUint>) -> Self {
        Ordinal {
            terms: vec![Term::new(exponent.into(), BigUint::one())],
        }
    }

    pub fn natural(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        if n.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term::finite(n)],
            }
        }
    }

    /// Builds an ordinal from `(exponent, coefficient)` pairs, rejecting
    /// anything that is not already in Cantor normal form.
    pub fn from_terms<I, E, C>(terms: I) -> Result<Self, OrdinalError>
    where
        I: IntoIterator<Item = (E, C)>,
        E: Into<BigUint>,
        C: Into<BigUint>,
    {
        let ord = Ordinal {
            terms: terms
                .into_iter()
                .map(|(e, c)| Term::new(e.into(), c.into()))
                .collect(),
        };
        ord.validate()?;
        Ok(ord)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Checks the CNF invariants: strictly descending exponents, positive
    /// coefficients.
    pub fn validate(&self) -> Result<(), OrdinalError> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.coefficient.is_zero() {
                return Err(OrdinalError::NotCanonical(format!(
                    "term {i} has a zero coefficient"
                )));
            }
            if i > 0 && self.terms[i - 1].exponent <= t.exponent {
                return Err(OrdinalError::NotCanonical(format!(
                    "exponents not strictly descending at term {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff the ordinal is finite, i.e. below ω.
    pub fn is_natural(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_zero())
    }

    /// True iff the ordinal is positive and not a successor.
    pub fn is_limit(&self) -> bool {
        match self.terms.last() {
            Some(t) => !t.exponent.is_zero(),
            None => false,
        }
    }

    pub fn as_natural(&self) -> Option<BigUint> {
        match self.terms.as_slice() {
            [] => Some(BigUint::zero()),
            [t] if t.exponent.is_zero() => Some(t.coefficient.clone()),
            _ => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_natural().and_then(|n| n.to_u64())
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.as_natural().and_then(|n| n.to_usize())
    }

    /// Splits `self` as `λ + k` with `λ` zero or a limit and `k` finite.
    pub fn limit_part(&self) -> (Ordinal, BigUint) {
        match self.terms.last() {
            Some(t) if t.exponent.is_zero() => {
                let lambda = Ordinal {
                    terms: self.terms[..self.terms.len() - 1].to_vec(),
                };
                (lambda, t.coefficient.clone())
            }
            _ => (self.clone(), BigUint::zero()),
        }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// Ordinal sum. Terms of `self` below the leading exponent of `rhs` are
    /// absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let mut merged = false;
        for t in &self.terms {
            match t.exponent.cmp(&lead.exponent) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => {
                    terms.push(Term::new(
                        t.exponent.clone(),
                        &t.coefficient + &lead.coefficient,
                    ));
                    merged = true;
                    break;
                }
                Ordering::Less => break,
            }
        }
        if !merged {
            terms.push(lead.clone());
        }
        terms.extend(rhs.terms[1..].iter().cloned());
        Ordinal { terms }
    }

    /// Left subtraction: the unique `ξ` with `rhs + ξ = self`.
    pub fn sub_left(&self, rhs: &Ordinal) -> Result<Ordinal, OrdinalError> {
        let undefined = || OrdinalError::LeftSubtraction {
            minuend: self.clone(),
            subtrahend: rhs.clone(),
        };
        for (i, a) in self.terms.iter().enumerate() {
            let Some(b) = rhs.terms.get(i) else {
                // rhs is a proper prefix of self
                return Ok(Ordinal {
                    terms: self.terms[i..].to_vec(),
                });
            };
            match a.exponent.cmp(&b.exponent) {
                Ordering::Greater => {
                    return Ok(Ordinal {
                        terms: self.terms[i..].to_vec(),
                    })
                }
                Ordering::Less => return Err(undefined()),
                Ordering::Equal => match a.coefficient.cmp(&b.coefficient) {
                    Ordering::Greater => {
                        let mut terms = Vec::with_capacity(self.terms.len() - i);
                        terms.push(Term::new(
                            a.exponent.clone(),
                            &a.coefficient - &b.coefficient,
                        ));
                        terms.extend(self.terms[i + 1..].iter().cloned());
                        return Ok(Ordinal { terms });
                    }
                    Ordering::Less => return Err(undefined()),
                    Ordering::Equal => {}
                },
            }
        }
        if rhs.terms.len() > self.terms.len() {
            Err(undefined())
        } else {
            Ok(Ordinal::zero())
        }
    }

    /// Right subtraction: the least `ξ` with `ξ + rhs = self`, if any.
    pub fn sub_right(&self, rhs: &Ordinal) -> Result<Ordinal, OrdinalError> {
        let Some(lead) = rhs.terms.first() else {
            return Ok(self.clone());
        };
        let undefined = || OrdinalError::RightSubtraction {
            minuend: self.clone(),
            subtrahend: rhs.clone(),
        };
        // ξ + rhs keeps ξ's terms above rhs's leading exponent, merges the
        // coefficient at that exponent and then continues with rhs's tail.
        let pos = self
            .terms
            .iter()
            .position(|t| t.exponent == lead.exponent)
            .ok_or_else(undefined)?;
        let at = &self.terms[pos];
        if at.coefficient < lead.coefficient || self.terms[pos + 1..] != rhs.terms[1..] {
            return Err(undefined());
        }
        let mut terms = self.terms[..pos].to_vec();
        let rest = &at.coefficient - &lead.coefficient;
        if !rest.is_zero() {
            terms.push(Term::new(at.exponent.clone(), rest));
        }
        Ok(Ordinal { terms })
    }

    /// Ordinal product.
    pub fn mul(&self, rhs: &Ordinal) -> Ordinal {
        let Some(a_lead) = self.terms.first() else {
            return Ordinal::zero();
        };
        let mut acc = Ordinal::zero();
        for t in &rhs.terms {
            let part = if t.exponent.is_zero() {
                // self · c = ω^a1·(x1·c) + rest of self
                let mut terms = Vec::with_capacity(self.terms.len());
                terms.push(Term::new(
                    a_lead.exponent.clone(),
                    &a_lead.coefficient * &t.coefficient,
                ));
                terms.extend(self.terms[1..].iter().cloned());
                Ordinal { terms }
            } else {
                // self · ω^e = ω^(a1 + e)
                Ordinal {
                    terms: vec![Term::new(
                        &a_lead.exponent + &t.exponent,
                        t.coefficient.clone(),
                    )],
                }
            };
            acc = acc.add(&part);
        }
        acc
    }

    /// Left division with remainder: the unique `(q, r)` with
    /// `self = divisor·q + r` and `r < divisor`.
    pub fn div_rem(&self, divisor: &Ordinal) -> Result<(Ordinal, Ordinal), OrdinalError> {
        let Some(d_lead) = divisor.terms.first() else {
            return Err(OrdinalError::DivisionByZero(self.clone()));
        };
        let mut quotient = Ordinal::zero();
        let mut rem = self.clone();
        while let Some(r_lead) = rem.terms.first() {
            if r_lead.exponent < d_lead.exponent {
                break;
            }
            let shift = &r_lead.exponent - &d_lead.exponent;
            let step = if shift.is_zero() {
                let mut c = &r_lead.coefficient / &d_lead.coefficient;
                if c.is_zero() {
                    break;
                }
                if divisor.mul(&Ordinal::natural(c.clone())) > rem {
                    c -= 1u32;
                }
                if c.is_zero() {
                    break;
                }
                Ordinal::natural(c)
            } else {
                Ordinal {
                    terms: vec![Term::new(shift, r_lead.coefficient.clone())],
                }
            };
            let consumed = divisor.mul(&step);
            rem = rem
                .sub_left(&consumed)
                .expect("quotient step never exceeds the remainder");
            quotient = quotient.add(&step);
            if step.is_natural() {
                break;
            }
        }
        debug_assert!(rem < *divisor);
        debug_assert_eq!(&divisor.mul(&quotient).add(&rem), self);
        Ok((quotient, rem))
    }

    pub fn div(&self, divisor: &Ordinal) -> Result<Ordinal, OrdinalError> {
        self.div_rem(divisor).map(|(q, _)| q)
    }

    pub fn rem(&self, divisor: &Ordinal) -> Result<Ordinal, OrdinalError> {
        self.div_rem(divisor).map(|(_, r)| r)
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a
                .exponent
                .cmp(&b.exponent)
                .then_with(|| a.coefficient.cmp(&b.coefficient));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u32> for Ordinal {
    fn from(n: u32) -> Self {
        Ordinal::natural(n)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::natural(n)
    }
}

impl From<usize> for Ordinal {
    fn from(n: usize) -> Self {
        Ordinal::natural(n as u64)
    }
}

impl From<BigUint> for Ordinal {
    fn from(n: BigUint) -> Self {
        Ordinal::natural(n)
    }
}

impl Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl Mul for &Ordinal {
    type Output = Ordinal;
    fn mul(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::mul(self, rhs)
    }
}

impl fmt::Display for Ordinal {
    /// `w^2*3 + w*2 + 5`; `^1`, `*1` and zero terms are omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            f.write_str("w")?;
            if !t.exponent.is_one() {
                write!(f, "^{}", t.exponent)?;
            }
            if !t.coefficient.is_one() {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    /// Accepts sums of monomials `w^e*c`, `w*c`, `w^e`, `w` and naturals
    /// (`ω` is accepted for `w`). Summands are combined with ordinal
    /// addition, so `2 + w` parses as `w`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || OrdinalError::Parse(s.to_string());
        let mut acc = Ordinal::zero();
        for mono in s.split('+') {
            let mono: String = mono.chars().filter(|c| !c.is_whitespace()).collect();
            if mono.is_empty() {
                return Err(err());
            }
            let parse_nat = |t: &str| -> Result<BigUint, OrdinalError> {
                if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(err());
                }
                t.parse::<BigUint>().map_err(|_| err())
            };
            let term = if let Some(rest) = mono.strip_prefix('w').or_else(|| mono.strip_prefix('ω'))
            {
                let (exp, coeff) = match rest.split_once('*') {
                    Some((e, c)) => (e, Some(c)),
                    None => (rest, None),
                };
                let exponent = match exp.strip_prefix('^') {
                    Some(e) => parse_nat(e)?,
                    None if exp.is_empty() => BigUint::one(),
                    None => return Err(err()),
                };
                let coefficient = match coeff {
                    Some(c) => parse_nat(c)?,
                    None => BigUint::one(),
                };
                if coefficient.is_zero() {
                    Ordinal::zero()
                } else {
                    Ordinal {
                        terms: vec![Term::new(exponent, coefficient)],
                    }
                }
            } else {
                Ordinal::natural(parse_nat(&mono)?)
            };
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}
