//! Ordinals below `w^w` in Cantor normal form, and counts extended with `w`.
//!
//! An [`Ordinal`] is a finite sum `w^e1*c1 + ... + w^ek*ck` with strictly
//! decreasing exponents and nonzero coefficients, stored leading term first.
//! This is exactly the index domain needed by the height filtration of a
//! finitely described group: lengths stay below `w*2` in practice, but the
//! arithmetic is exact for the whole `w^w` segment.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// One term `w^exponent * coefficient` of a Cantor normal form.
///
/// Field order matters: the derived ordering compares exponents first, which
/// together with the lexicographic `Vec` ordering on [`Ordinal`] realizes the
/// ordinal order (a proper prefix denotes a strictly smaller ordinal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinalTerm {
    pub exponent: u32,
    pub coefficient: u64,
}

/// An ordinal below `w^w` in Cantor normal form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ordinal {
    terms: Vec<OrdinalTerm>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![OrdinalTerm { exponent: 0, coefficient: n }] }
        }
    }

    pub fn omega() -> Self {
        Ordinal { terms: vec![OrdinalTerm { exponent: 1, coefficient: 1 }] }
    }

    /// Builds an ordinal from terms, which must have strictly decreasing
    /// exponents and nonzero coefficients.
    pub fn new(terms: Vec<OrdinalTerm>) -> Result<Self, Error> {
        for pair in terms.windows(2) {
            if pair[0].exponent <= pair[1].exponent {
                return Err(Error::invalid("ordinal", "exponents must strictly decrease"));
            }
        }
        if terms.iter().any(|t| t.coefficient == 0) {
            return Err(Error::invalid("ordinal", "zero coefficient"));
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[OrdinalTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for nonzero ordinals with no constant term.
    pub fn is_limit(&self) -> bool {
        !self.terms.is_empty() && self.terms.last().unwrap().exponent > 0
    }

    pub fn is_finite(&self) -> bool {
        self.terms.len() <= 1 && self.terms.first().map_or(true, |t| t.exponent == 0)
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent == 0 => Some(t.coefficient),
            _ => None,
        }
    }

    /// Splits into the limit part and the finite constant: `a = limit + n`.
    pub fn split_const(&self) -> (Ordinal, u64) {
        match self.terms.last() {
            Some(t) if t.exponent == 0 => {
                let limit = Ordinal { terms: self.terms[..self.terms.len() - 1].to_vec() };
                (limit, t.coefficient)
            }
            _ => (self.clone(), 0),
        }
    }

    /// Ordinal addition: trailing terms of `self` below the leading exponent
    /// of `rhs` are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<OrdinalTerm> = self
            .terms
            .iter()
            .copied()
            .take_while(|t| t.exponent > lead.exponent)
            .collect();
        let kept = terms.len();
        let merged = if self.terms.get(kept).map_or(false, |t| t.exponent == lead.exponent) {
            self.terms[kept].coefficient + lead.coefficient
        } else {
            lead.coefficient
        };
        terms.push(OrdinalTerm { exponent: lead.exponent, coefficient: merged });
        terms.extend_from_slice(&rhs.terms[1..]);
        Ordinal { terms }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::from_nat(1))
    }

    /// Predecessor of a successor ordinal; `None` for zero and limits.
    pub fn pred(&self) -> Option<Ordinal> {
        let (limit, n) = self.split_const();
        if n == 0 {
            None
        } else {
            Some(limit.add(&Ordinal::from_nat(n - 1)))
        }
    }

    pub fn cmp_ord(&self, rhs: &Ordinal) -> Ordering {
        self.cmp(rhs)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match (t.exponent, t.coefficient) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    /// Accepts sums of terms `w^e*c`, `w^e`, `w*c`, `w`, and naturals, with
    /// strictly decreasing exponents. Redundant `^1`/`*1` are tolerated; the
    /// printer never emits them.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::parse("ordinal", "empty string"));
        }
        if s == "0" {
            return Ok(Ordinal::zero());
        }
        let mut terms = Vec::new();
        for part in s.split('+') {
            let part = part.trim();
            terms.push(parse_term(part)?);
        }
        // A trailing "+0" such as "w+0" is not a valid normal form.
        Ordinal::new(terms)
    }
}

fn parse_term(part: &str) -> Result<OrdinalTerm, Error> {
    if part.is_empty() {
        return Err(Error::parse("ordinal", "empty term"));
    }
    if let Some(rest) = part.strip_prefix('w') {
        let (exponent, rest) = if let Some(r) = rest.strip_prefix('^') {
            let end = r.find('*').unwrap_or(r.len());
            let e: u32 = r[..end]
                .parse()
                .map_err(|_| Error::parse("ordinal", format!("bad exponent in {part:?}")))?;
            (e, &r[end..])
        } else {
            (1, rest)
        };
        if exponent == 0 {
            return Err(Error::parse("ordinal", "w^0 is not a normal form"));
        }
        let coefficient = if let Some(c) = rest.strip_prefix('*') {
            c.parse::<u64>()
                .map_err(|_| Error::parse("ordinal", format!("bad coefficient in {part:?}")))?
        } else if rest.is_empty() {
            1
        } else {
            return Err(Error::parse("ordinal", format!("trailing input in {part:?}")));
        };
        if coefficient == 0 {
            return Err(Error::parse("ordinal", "zero coefficient"));
        }
        Ok(OrdinalTerm { exponent, coefficient })
    } else {
        let n: u64 = part
            .parse()
            .map_err(|_| Error::parse("ordinal", format!("bad natural {part:?}")))?;
        if n == 0 {
            return Err(Error::parse("ordinal", "zero term inside a sum"));
        }
        Ok(OrdinalTerm { exponent: 0, coefficient: n })
    }
}

/// A count that is either a natural number or `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedCount {
    Finite(u64),
    Omega,
}

impl ExtendedCount {
    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedCount::Finite(0))
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self {
            ExtendedCount::Finite(n) => Some(*n),
            ExtendedCount::Omega => None,
        }
    }

    pub fn add(&self, rhs: &ExtendedCount) -> ExtendedCount {
        match (self, rhs) {
            (ExtendedCount::Finite(a), ExtendedCount::Finite(b)) => ExtendedCount::Finite(a + b),
            _ => ExtendedCount::Omega,
        }
    }
}

impl From<u64> for ExtendedCount {
    fn from(n: u64) -> Self {
        ExtendedCount::Finite(n)
    }
}

impl fmt::Display for ExtendedCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedCount::Finite(n) => write!(f, "{n}"),
            ExtendedCount::Omega => write!(f, "w"),
        }
    }
}

impl FromStr for ExtendedCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "w" {
            Ok(ExtendedCount::Omega)
        } else {
            s.parse::<u64>()
                .map(ExtendedCount::Finite)
                .map_err(|_| Error::parse("count", format!("expected natural or w, got {s:?}")))
        }
    }
}
