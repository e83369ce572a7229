//! Finitely described abelian p-groups and their elements.
//!
//! A group is a direct sum of finite cyclic p-power summands together with a
//! divisible part of finite rank, each divisible summand being the p-power
//! torsion group `{ c / p^e } mod 1`. Elements are exact: residues for the
//! cyclic coordinates, fully reduced p-power fractions for the divisible
//! coordinates. All arithmetic is integer arithmetic; nothing is floated.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::ordinal::{ExtendedCount, Ordinal};
use crate::table::ElementTableGroup;

/// A fully reduced fraction `num / p^den_exp` taken mod 1.
///
/// Invariants: `num == 0` implies `den_exp == 0`; otherwise `num < p^den_exp`
/// and `p` does not divide `num`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PruferCoord {
    pub num: u64,
    pub den_exp: u32,
}

impl PruferCoord {
    pub const ZERO: PruferCoord = PruferCoord { num: 0, den_exp: 0 };

    /// Reduces `num / p^den_exp` to canonical form.
    fn reduced(p: u64, mut num: u64, mut den_exp: u32) -> PruferCoord {
        let m = pow_u64(p, den_exp);
        num %= m;
        while num != 0 && num % p == 0 {
            num /= p;
            den_exp -= 1;
        }
        if num == 0 {
            den_exp = 0;
        }
        PruferCoord { num, den_exp }
    }
}

/// An element of an [`ExplicitPGroup`]: one residue per cyclic summand and
/// one reduced fraction per divisible summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub cyclic: Vec<u64>,
    pub prufer: Vec<PruferCoord>,
}

impl GroupElement {
    pub fn is_zero(&self) -> bool {
        self.cyclic.iter().all(|&x| x == 0) && self.prufer.iter().all(|c| c.num == 0)
    }
}

/// An abelian p-group given by its cyclic summand exponents (descending) and
/// the rank of its divisible part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExplicitPGroup {
    p: u64,
    exps: Vec<u32>,
    div_rank: u32,
}

impl ExplicitPGroup {
    /// Builds a group description. Exponents are sorted descending (the
    /// canonical form); sorting an already canonical list is a no-op.
    /// The cyclic part must have fewer than 2^64 elements.
    pub fn new(p: u64, mut exps: Vec<u32>, div_rank: u32) -> Result<Self, Error> {
        if !is_prime(p) {
            return Err(Error::invalid("group", format!("p={p} is not prime")));
        }
        if exps.iter().any(|&k| k == 0) {
            return Err(Error::invalid("group", "cyclic exponents must be >= 1"));
        }
        let total: u32 = exps.iter().sum();
        if (total as f64) * (p as f64).log2() > 63.0 {
            return Err(Error::invalid("group", "cyclic part too large to enumerate"));
        }
        exps.sort_unstable_by(|a, b| b.cmp(a));
        Ok(ExplicitPGroup { p, exps, div_rank })
    }

    pub fn trivial(p: u64) -> Self {
        ExplicitPGroup::new(p, Vec::new(), 0).expect("trivial group")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn div_rank(&self) -> u32 {
        self.div_rank
    }

    pub fn is_finite(&self) -> bool {
        self.div_rank == 0
    }

    /// Group order: `p^(sum of exponents)` when finite, `w` otherwise.
    pub fn size(&self) -> ExtendedCount {
        if self.div_rank > 0 {
            ExtendedCount::Omega
        } else {
            ExtendedCount::Finite(self.finite_size())
        }
    }

    fn finite_size(&self) -> u64 {
        pow_u64(self.p, self.exps.iter().sum())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            cyclic: vec![0; self.exps.len()],
            prufer: vec![PruferCoord::ZERO; self.div_rank as usize],
        }
    }

    pub fn validate_element(&self, x: &GroupElement) -> Result<(), Error> {
        if x.cyclic.len() != self.exps.len() || x.prufer.len() != self.div_rank as usize {
            return Err(Error::ElementMismatch(format!(
                "expected {} cyclic and {} divisible coordinates",
                self.exps.len(),
                self.div_rank
            )));
        }
        for (i, (&xi, &k)) in x.cyclic.iter().zip(&self.exps).enumerate() {
            if xi >= pow_u64(self.p, k) {
                return Err(Error::ElementMismatch(format!("cyclic coordinate {i} out of range")));
            }
        }
        for (i, c) in x.prufer.iter().enumerate() {
            let ok = if c.num == 0 {
                c.den_exp == 0
            } else {
                c.num < pow_u64(self.p, c.den_exp) && c.num % self.p != 0
            };
            if !ok {
                return Err(Error::ElementMismatch(format!("divisible coordinate {i} not reduced")));
            }
        }
        Ok(())
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, Error> {
        self.validate_element(x)?;
        self.validate_element(y)?;
        let cyclic = x
            .cyclic
            .iter()
            .zip(&y.cyclic)
            .zip(&self.exps)
            .map(|((&a, &b), &k)| {
                let m = pow_u64(self.p, k);
                ((a as u128 + b as u128) % m as u128) as u64
            })
            .collect();
        let prufer = x
            .prufer
            .iter()
            .zip(&y.prufer)
            .map(|(a, b)| {
                let e = a.den_exp.max(b.den_exp);
                let m = pow_u64(self.p, e) as u128;
                let an = a.num as u128 * pow_u64(self.p, e - a.den_exp) as u128;
                let bn = b.num as u128 * pow_u64(self.p, e - b.den_exp) as u128;
                PruferCoord::reduced(self.p, ((an + bn) % m) as u64, e)
            })
            .collect();
        Ok(GroupElement { cyclic, prufer })
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement, Error> {
        self.validate_element(x)?;
        let cyclic = x
            .cyclic
            .iter()
            .zip(&self.exps)
            .map(|(&a, &k)| {
                let m = pow_u64(self.p, k);
                (m - a) % m
            })
            .collect();
        let prufer = x
            .prufer
            .iter()
            .map(|c| {
                if c.num == 0 {
                    PruferCoord::ZERO
                } else {
                    // p^e - num stays coprime to p, so this is already reduced.
                    PruferCoord { num: pow_u64(self.p, c.den_exp) - c.num, den_exp: c.den_exp }
                }
            })
            .collect();
        Ok(GroupElement { cyclic, prufer })
    }

    pub fn scalar_mul(&self, k: u64, x: &GroupElement) -> Result<GroupElement, Error> {
        self.validate_element(x)?;
        let cyclic = x
            .cyclic
            .iter()
            .zip(&self.exps)
            .map(|(&a, &e)| {
                let m = pow_u64(self.p, e) as u128;
                ((k as u128 * a as u128) % m) as u64
            })
            .collect();
        let prufer = x
            .prufer
            .iter()
            .map(|c| {
                let m = pow_u64(self.p, c.den_exp) as u128;
                PruferCoord::reduced(self.p, ((k as u128 * c.num as u128) % m) as u64, c.den_exp)
            })
            .collect();
        Ok(GroupElement { cyclic, prufer })
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, Error> {
        let ny = self.neg(y)?;
        self.add(x, &ny)
    }

    /// Exponent of the element order: the least `n` with `p^n * x = 0`.
    pub fn elem_order(&self, x: &GroupElement) -> Result<u32, Error> {
        self.validate_element(x)?;
        let mut n = 0;
        for (&xi, &k) in x.cyclic.iter().zip(&self.exps) {
            if xi != 0 {
                n = n.max(k - padic_valuation(self.p, xi).min(k));
            }
        }
        for c in &x.prufer {
            n = n.max(c.den_exp);
        }
        Ok(n)
    }

    /// Membership in the height subgroup indexed by `alpha`.
    ///
    /// For finite `alpha = n` this is the closed form: coordinate `i` must be
    /// divisible by `p^min(n, k_i)`. The filtration stabilizes at the (finite)
    /// length, so for every infinite `alpha` membership means membership in
    /// the divisible part.
    pub fn in_pn_subgroup(&self, alpha: &Ordinal, x: &GroupElement) -> Result<bool, Error> {
        self.validate_element(x)?;
        match alpha.as_finite() {
            Some(n) => Ok(x.cyclic.iter().zip(&self.exps).all(|(&xi, &k)| {
                let m = pow_u64(self.p, n.min(k as u64) as u32);
                xi % m == 0
            })),
            None => Ok(x.cyclic.iter().all(|&xi| xi == 0)),
        }
    }

    /// All solutions `y` of `p*y = x`, in canonical order (the coordinatewise
    /// quotient first). The set is empty iff some cyclic coordinate of `x` is
    /// not divisible by `p`; otherwise it has exactly `p^(#coordinates)`
    /// members.
    pub fn p_preimages(&self, x: &GroupElement) -> Result<Vec<GroupElement>, Error> {
        self.validate_element(x)?;
        let p = self.p;
        let mut coord_choices: Vec<Vec<u64>> = Vec::with_capacity(x.cyclic.len());
        for (&xi, &k) in x.cyclic.iter().zip(&self.exps) {
            if xi % p != 0 {
                return Ok(Vec::new());
            }
            let m = pow_u64(p, k);
            let step = pow_u64(p, k - 1);
            let base = xi / p;
            coord_choices.push((0..p).map(|t| (base + t * step) % m).collect());
        }
        let mut prufer_choices: Vec<Vec<PruferCoord>> = Vec::with_capacity(x.prufer.len());
        for c in &x.prufer {
            let e = c.den_exp + 1;
            let m = pow_u64(p, e);
            let step = pow_u64(p, e - 1);
            prufer_choices.push(
                (0..p).map(|t| PruferCoord::reduced(p, (c.num + t * step) % m, e)).collect(),
            );
        }
        // Odometer over the per-coordinate choices, first coordinate fastest,
        // so the canonical quotient (all t = 0) comes first.
        let total = pow_u64(p, (x.cyclic.len() + x.prufer.len()) as u32);
        let mut out = Vec::with_capacity(total as usize);
        let ncyc = coord_choices.len();
        for idx in 0..total {
            let mut rem = idx;
            let mut cyclic = Vec::with_capacity(ncyc);
            for choices in &coord_choices {
                cyclic.push(choices[(rem % p) as usize]);
                rem /= p;
            }
            let mut prufer = Vec::with_capacity(prufer_choices.len());
            for choices in &prufer_choices {
                prufer.push(choices[(rem % p) as usize]);
                rem /= p;
            }
            out.push(GroupElement { cyclic, prufer });
        }
        Ok(out)
    }

    /// The socle: all elements of order dividing `p`. Finite even when the
    /// group is infinite.
    pub fn socle(&self) -> Vec<GroupElement> {
        let p = self.p;
        let cyclic_choices: Vec<Vec<u64>> = self
            .exps
            .iter()
            .map(|&k| {
                let step = pow_u64(p, k - 1);
                (0..p).map(|t| t * step).collect()
            })
            .collect();
        let frac_choices: Vec<PruferCoord> = std::iter::once(PruferCoord::ZERO)
            .chain((1..p).map(|c| PruferCoord { num: c, den_exp: 1 }))
            .collect();
        let dims = self.exps.len() + self.div_rank as usize;
        let total = pow_u64(p, dims as u32);
        let mut out = Vec::with_capacity(total as usize);
        for idx in 0..total {
            let mut rem = idx;
            let mut cyclic = Vec::with_capacity(self.exps.len());
            for choices in &cyclic_choices {
                cyclic.push(choices[(rem % p) as usize]);
                rem /= p;
            }
            let mut prufer = Vec::with_capacity(self.div_rank as usize);
            for _ in 0..self.div_rank {
                prufer.push(frac_choices[(rem % p) as usize]);
                rem /= p;
            }
            out.push(GroupElement { cyclic, prufer });
        }
        out
    }

    /// Enumerates the elements whose divisible coordinates have denominator
    /// exponent at most `denom_bound`. Order: cyclic coordinates run as
    /// little-endian digits (first coordinate fastest), then each divisible
    /// coordinate runs through its fractions ordered by denominator then
    /// numerator.
    pub fn enumerate(&self, denom_bound: u32) -> Vec<GroupElement> {
        let p = self.p;
        let fracs = self.fractions_up_to(denom_bound);
        let cyc_sizes: Vec<u64> = self.exps.iter().map(|&k| pow_u64(p, k)).collect();
        let mut total: u128 = 1;
        for &s in &cyc_sizes {
            total *= s as u128;
        }
        total *= (fracs.len() as u128).pow(self.div_rank);
        let mut out = Vec::with_capacity(total as usize);
        let mut counters = vec![0u64; self.exps.len() + self.div_rank as usize];
        loop {
            let cyclic: Vec<u64> = counters[..self.exps.len()].to_vec();
            let prufer: Vec<PruferCoord> = counters[self.exps.len()..]
                .iter()
                .map(|&i| fracs[i as usize])
                .collect();
            out.push(GroupElement { cyclic, prufer });
            // Odometer step.
            let mut pos = 0;
            loop {
                if pos == counters.len() {
                    return out;
                }
                let limit = if pos < self.exps.len() {
                    cyc_sizes[pos]
                } else {
                    fracs.len() as u64
                };
                counters[pos] += 1;
                if counters[pos] < limit {
                    break;
                }
                counters[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Reduced fractions with denominator exponent at most `bound`, ordered
    /// by denominator then numerator.
    fn fractions_up_to(&self, bound: u32) -> Vec<PruferCoord> {
        let mut out = vec![PruferCoord::ZERO];
        for e in 1..=bound {
            let m = pow_u64(self.p, e);
            for num in 1..m {
                if num % self.p != 0 {
                    out.push(PruferCoord { num, den_exp: e });
                }
            }
        }
        out
    }

    /// Direct sum: exponent multisets merge, divisible ranks add.
    pub fn direct_sum(&self, other: &ExplicitPGroup) -> Result<ExplicitPGroup, Error> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p, right: other.p });
        }
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&other.exps);
        ExplicitPGroup::new(self.p, exps, self.div_rank + other.div_rank)
    }

    /// Realizes a finite group as a Cayley table over its enumeration order.
    pub fn to_element_table(&self) -> Result<ElementTableGroup, Error> {
        if !self.is_finite() {
            return Err(Error::InfiniteGroup("to_element_table"));
        }
        let elements = self.enumerate(0);
        let index: HashMap<&GroupElement, usize> =
            elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let n = elements.len();
        let mut table = vec![0u32; n * n];
        for (i, x) in elements.iter().enumerate() {
            for (j, y) in elements.iter().enumerate().skip(i) {
                let s = self.add(x, y).expect("enumerated elements are valid");
                let k = index[&s] as u32;
                table[i * n + j] = k;
                table[j * n + i] = k;
            }
        }
        let zero = index[&self.zero()];
        ElementTableGroup::new(n, zero, table)
    }

    pub fn format_element(&self, x: &GroupElement) -> String {
        let cyc = x.cyclic.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let pru = x
            .prufer
            .iter()
            .map(|c| {
                if c.num == 0 {
                    "0".to_string()
                } else {
                    format!("{}/{}", c.num, pow_u64(self.p, c.den_exp))
                }
            })
            .collect::<Vec<_>>()
            .join(",");
        format!("cyclic=({cyc}); prufer=({pru})")
    }

    pub fn parse_element(&self, s: &str) -> Result<GroupElement, Error> {
        let s = s.trim();
        let (cyc_part, pru_part) = s
            .split_once("; ")
            .ok_or_else(|| Error::parse("element", "expected 'cyclic=(..); prufer=(..)'"))?;
        let cyc_body = cyc_part
            .strip_prefix("cyclic=(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::parse("element", "bad cyclic part"))?;
        let pru_body = pru_part
            .strip_prefix("prufer=(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::parse("element", "bad prufer part"))?;
        let cyclic: Vec<u64> = split_csv(cyc_body)
            .iter()
            .map(|t| t.parse::<u64>().map_err(|_| Error::parse("element", format!("bad residue {t:?}"))))
            .collect::<Result<_, _>>()?;
        let mut prufer = Vec::new();
        for t in split_csv(pru_body) {
            if t == "0" {
                prufer.push(PruferCoord::ZERO);
                continue;
            }
            let (num, den) = t
                .split_once('/')
                .ok_or_else(|| Error::parse("element", format!("bad fraction {t:?}")))?;
            let num: u64 =
                num.parse().map_err(|_| Error::parse("element", format!("bad numerator {num:?}")))?;
            let den: u64 =
                den.parse().map_err(|_| Error::parse("element", format!("bad denominator {den:?}")))?;
            let mut den_exp = 0;
            let mut d = den;
            while d > 1 && d % self.p == 0 {
                d /= self.p;
                den_exp += 1;
            }
            if d != 1 || den == 0 {
                return Err(Error::parse("element", format!("denominator {den} is not a power of p")));
            }
            if num == 0 || num >= den || num % self.p == 0 {
                return Err(Error::parse("element", format!("fraction {t:?} is not reduced")));
            }
            prufer.push(PruferCoord { num, den_exp });
        }
        let x = GroupElement { cyclic, prufer };
        self.validate_element(&x)?;
        Ok(x)
    }
}

impl fmt::Display for ExplicitPGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps = self.exps.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "p={}; cyclic=[{exps}]; divisible={}", self.p, self.div_rank)
    }
}

impl FromStr for ExplicitPGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut p = None;
        let mut exps = None;
        let mut div = None;
        for part in s.trim().split("; ") {
            if let Some(v) = part.strip_prefix("p=") {
                p = Some(v.parse::<u64>().map_err(|_| Error::parse("group", "bad p"))?);
            } else if let Some(v) = part.strip_prefix("cyclic=") {
                let body = v
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| Error::parse("group", "cyclic part must be [..]"))?;
                let ks: Vec<u32> = split_csv(body)
                    .iter()
                    .map(|t| t.parse::<u32>().map_err(|_| Error::parse("group", format!("bad exponent {t:?}"))))
                    .collect::<Result<_, _>>()?;
                exps = Some(ks);
            } else if let Some(v) = part.strip_prefix("divisible=") {
                div = Some(v.parse::<u32>().map_err(|_| Error::parse("group", "bad divisible rank"))?);
            } else {
                return Err(Error::parse("group", format!("unknown field {part:?}")));
            }
        }
        match (p, exps, div) {
            (Some(p), Some(exps), Some(div)) => ExplicitPGroup::new(p, exps, div),
            _ => Err(Error::parse("group", "expected p=, cyclic=, divisible= fields")),
        }
    }
}

fn split_csv(body: &str) -> Vec<&str> {
    if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(',').map(str::trim).collect()
    }
}

pub(crate) fn pow_u64(base: u64, exp: u32) -> u64 {
    (base as u128).pow(exp).try_into().expect("power fits in u64 by construction limits")
}

pub(crate) fn padic_valuation(p: u64, mut x: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
