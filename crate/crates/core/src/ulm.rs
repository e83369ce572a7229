//! Ulm profiles: the complete isomorphism invariant for the groups handled
//! here, together with independent brute-force oracles.
//!
//! A profile records, per ordinal index, the dimension of the layer
//! `(p^a G)[p] / (p^(a+1) G)[p]`, plus the rank of the divisible part. Two
//! explicit groups are isomorphic exactly when their profiles agree, and the
//! module ships a table-level backtracking isomorphism search to certify that
//! equivalence at desk scale.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::ordinal::{ExtendedCount, Ordinal};
use crate::pgroup::{is_prime, ExplicitPGroup};
use crate::table::ElementTableGroup;

/// Finitely supported map from ordinal indices to layer dimensions, plus the
/// divisible rank. Profiles compare by `(p, invariants, div_rank)`; the
/// declared length is bookkeeping (it bounds the support) and is ignored by
/// equality, so symbolic profiles of transfinite length compare by their
/// recorded data alone.
#[derive(Debug, Clone)]
pub struct UlmProfile {
    p: u64,
    invariants: BTreeMap<Ordinal, ExtendedCount>,
    div_rank: ExtendedCount,
    declared_length: Ordinal,
}

impl PartialEq for UlmProfile {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.invariants == other.invariants && self.div_rank == other.div_rank
    }
}

impl Eq for UlmProfile {}

impl UlmProfile {
    pub fn new(
        p: u64,
        invariants: BTreeMap<Ordinal, ExtendedCount>,
        div_rank: ExtendedCount,
        declared_length: Ordinal,
    ) -> Result<Self, Error> {
        if !is_prime(p) {
            return Err(Error::invalid("profile", format!("p={p} is not prime")));
        }
        for (alpha, count) in &invariants {
            if count.is_zero() {
                return Err(Error::invalid("profile", format!("zero entry at {alpha}")));
            }
            if *alpha >= declared_length {
                return Err(Error::invalid(
                    "profile",
                    format!("support point {alpha} not below declared length {declared_length}"),
                ));
            }
        }
        Ok(UlmProfile { p, invariants, div_rank, declared_length })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn invariant_at(&self, alpha: &Ordinal) -> ExtendedCount {
        self.invariants.get(alpha).copied().unwrap_or(ExtendedCount::Finite(0))
    }

    pub fn support(&self) -> impl Iterator<Item = (&Ordinal, &ExtendedCount)> {
        self.invariants.iter()
    }

    pub fn div_rank(&self) -> ExtendedCount {
        self.div_rank
    }

    pub fn declared_length(&self) -> &Ordinal {
        &self.declared_length
    }

    /// Pointwise sum; mirrors the profile of a direct sum.
    pub fn sum(&self, other: &UlmProfile) -> Result<UlmProfile, Error> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p, right: other.p });
        }
        let mut invariants = self.invariants.clone();
        for (alpha, count) in &other.invariants {
            let slot = invariants.entry(alpha.clone()).or_insert(ExtendedCount::Finite(0));
            *slot = slot.add(count);
        }
        let declared_length = self.declared_length.clone().max(other.declared_length.clone());
        UlmProfile::new(self.p, invariants, self.div_rank.add(&other.div_rank), declared_length)
    }
}

impl fmt::Display for UlmProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .invariants
            .iter()
            .map(|(a, c)| format!("{a}:{c}"))
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "p={}; u={{{body}}}; div={}; len={}", self.p, self.div_rank, self.declared_length)
    }
}

impl FromStr for UlmProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut p = None;
        let mut inv = None;
        let mut div = None;
        let mut len = None;
        for part in s.trim().split("; ") {
            if let Some(v) = part.strip_prefix("p=") {
                p = Some(v.parse::<u64>().map_err(|_| Error::parse("profile", "bad p"))?);
            } else if let Some(v) = part.strip_prefix("u=") {
                let body = v
                    .strip_prefix('{')
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or_else(|| Error::parse("profile", "u part must be {..}"))?;
                let mut map = BTreeMap::new();
                if !body.trim().is_empty() {
                    for entry in body.split(',') {
                        let (a, c) = entry
                            .split_once(':')
                            .ok_or_else(|| Error::parse("profile", format!("bad entry {entry:?}")))?;
                        map.insert(a.trim().parse::<Ordinal>()?, c.trim().parse::<ExtendedCount>()?);
                    }
                }
                inv = Some(map);
            } else if let Some(v) = part.strip_prefix("div=") {
                div = Some(v.parse::<ExtendedCount>()?);
            } else if let Some(v) = part.strip_prefix("len=") {
                len = Some(v.parse::<Ordinal>()?);
            } else {
                return Err(Error::parse("profile", format!("unknown field {part:?}")));
            }
        }
        match (p, inv, div, len) {
            (Some(p), Some(inv), Some(div), Some(len)) => UlmProfile::new(p, inv, div, len),
            _ => Err(Error::parse("profile", "expected p=, u=, div=, len= fields")),
        }
    }
}

/// Closed-form layer dimension of an explicit group at finite index `n`:
/// the number of cyclic summands of exponent exactly `n + 1`. Divisible
/// summands contribute the same dimension to every layer, hence nothing to
/// the difference.
pub fn ulm_invariant(g: &ExplicitPGroup, n: u64) -> u64 {
    g.exps().iter().filter(|&&k| k as u64 == n + 1).count() as u64
}

/// Layer dimension indexed by an arbitrary ordinal. Explicit groups have
/// finite length, so every infinite index lies beyond the support.
pub fn ulm_invariant_at(g: &ExplicitPGroup, alpha: &Ordinal) -> u64 {
    match alpha.as_finite() {
        Some(n) => ulm_invariant(g, n),
        None => 0,
    }
}

/// Exhaustive oracle for [`ulm_invariant`] on finite groups: build the
/// filtration by repeated multiplication-by-p images, intersect with the
/// p-torsion layer, and count. Shares no code with the closed form beyond
/// element arithmetic.
pub fn ulm_invariant_oracle(g: &ExplicitPGroup, n: u64) -> Result<u64, Error> {
    if !g.is_finite() {
        return Err(Error::InfiniteGroup("ulm_invariant_oracle"));
    }
    let mut level: BTreeSet<_> = g.enumerate(0).into_iter().collect();
    for _ in 0..n {
        level = level.iter().map(|x| g.scalar_mul(g.p(), x).expect("valid element")).collect();
    }
    let next: BTreeSet<_> =
        level.iter().map(|x| g.scalar_mul(g.p(), x).expect("valid element")).collect();
    let count_torsion = |set: &BTreeSet<crate::pgroup::GroupElement>| {
        set.iter()
            .filter(|x| g.scalar_mul(g.p(), x).expect("valid element").is_zero())
            .count() as u64
    };
    let a = count_torsion(&level);
    let b = count_torsion(&next);
    debug_assert_eq!(a % b, 0);
    Ok(log_p_exact(g.p(), a / b).expect("socle layer sizes are p-powers"))
}

/// Least filtration index after which nothing changes; for explicit groups
/// this is the largest cyclic exponent.
pub fn length(g: &ExplicitPGroup) -> Ordinal {
    Ordinal::from_nat(g.exps().first().copied().unwrap_or(0) as u64)
}

pub fn profile_of(g: &ExplicitPGroup) -> UlmProfile {
    let mut invariants: BTreeMap<Ordinal, ExtendedCount> = BTreeMap::new();
    for &k in g.exps() {
        let key = Ordinal::from_nat(k as u64 - 1);
        let slot = invariants.entry(key).or_insert(ExtendedCount::Finite(0));
        *slot = slot.add(&ExtendedCount::Finite(1));
    }
    UlmProfile::new(g.p(), invariants, ExtendedCount::Finite(g.div_rank() as u64), length(g))
        .expect("profiles of explicit groups are well formed")
}

/// Isomorphism via the complete invariant: profiles agree.
pub fn iso_by_ulm(g: &ExplicitPGroup, h: &ExplicitPGroup) -> Result<bool, Error> {
    if g.p() != h.p() {
        return Err(Error::PrimeMismatch { left: g.p(), right: h.p() });
    }
    Ok(profile_of(g) == profile_of(h))
}

/// Invariant shift performed by the p-th-root extension plus `m` new order-p
/// summands: the output has value `m` at index 0 and the old value at
/// `1 + alpha` for every old index `alpha`. The divisible rank is untouched.
pub fn shift_profile(u: &UlmProfile, m: &ExtendedCount) -> UlmProfile {
    let one = Ordinal::from_nat(1);
    let mut invariants: BTreeMap<Ordinal, ExtendedCount> = BTreeMap::new();
    if !m.is_zero() {
        invariants.insert(Ordinal::zero(), *m);
    }
    for (alpha, count) in u.support() {
        let shifted = one.add(alpha);
        let slot = invariants.entry(shifted).or_insert(ExtendedCount::Finite(0));
        *slot = slot.add(count);
    }
    let declared_length = if !u.invariants.is_empty() {
        one.add(&u.declared_length)
    } else if !m.is_zero() {
        Ordinal::from_nat(1)
    } else {
        Ordinal::zero()
    };
    UlmProfile::new(u.p, invariants, u.div_rank, declared_length)
        .expect("shift preserves well-formedness")
}

/// Per-index layer dimensions of a finite table group, by socle counting:
/// walk the filtration `S_(j+1) = p * S_j` and measure `|S_j ∩ socle|`.
pub fn table_ulm_counts(t: &ElementTableGroup, p: u64) -> Result<Vec<u64>, Error> {
    if !is_prime(p) {
        return Err(Error::invalid("table_ulm_counts", format!("p={p} is not prime")));
    }
    let socle = t.socle_set(p);
    let mut level: BTreeSet<usize> = (0..t.len()).collect();
    let mut socle_sizes = Vec::new();
    loop {
        let in_socle = level.intersection(&socle).count() as u64;
        socle_sizes.push(in_socle);
        if level.len() == 1 {
            break;
        }
        let next = t.mult_p_image(p, &level);
        if next.len() == level.len() {
            return Err(Error::BadTable(
                "multiplication by p stalled; not a p-group for this prime".into(),
            ));
        }
        level = next;
    }
    let mut counts = Vec::new();
    for w in socle_sizes.windows(2) {
        if w[0] % w[1] != 0 {
            return Err(Error::BadTable("socle layer sizes are not nested p-powers".into()));
        }
        counts.push(
            log_p_exact(p, w[0] / w[1])
                .ok_or_else(|| Error::BadTable("socle layer ratio is not a p-power".into()))?,
        );
    }
    Ok(counts)
}

/// Profile of a finite table group for the given prime.
pub fn table_profile(t: &ElementTableGroup, p: u64) -> Result<UlmProfile, Error> {
    let counts = table_ulm_counts(t, p)?;
    let mut invariants = BTreeMap::new();
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            invariants.insert(Ordinal::from_nat(j as u64), ExtendedCount::Finite(c));
        }
    }
    let len = Ordinal::from_nat(counts.len() as u64);
    UlmProfile::new(p, invariants, ExtendedCount::Finite(0), len)
}

/// Backtracking isomorphism search between finite table groups. Candidate
/// images are pruned by element order statistics; the map is grown one
/// generator at a time with the induced subgroup homomorphism checked for
/// consistency and injectivity at every step. Deterministic: generators and
/// candidates are scanned in index order, largest element order first.
pub fn brute_force_group_iso(
    t1: &ElementTableGroup,
    t2: &ElementTableGroup,
) -> Option<Vec<usize>> {
    if t1.len() != t2.len() {
        return None;
    }
    let smallest_prime = |t: &ElementTableGroup| {
        (2u64..).find(|&q| (t.len() as u64) % q == 0 || t.len() == 1).unwrap_or(2)
    };
    // Order statistics use the smallest prime divisor of the common size;
    // for the p-groups handled here that is the right prime, and for equal
    // sizes both tables get the same one, keeping the pruning sound.
    let q = smallest_prime(t1).max(2);
    let orders1: Vec<u32> = (0..t1.len()).map(|x| t1.elem_order_exp(q, x)).collect();
    let orders2: Vec<u32> = (0..t2.len()).map(|x| t2.elem_order_exp(q, x)).collect();
    let mut multiset1 = orders1.clone();
    let mut multiset2 = orders2.clone();
    multiset1.sort_unstable();
    multiset2.sort_unstable();
    if multiset1 != multiset2 {
        return None;
    }

    // Greedy generator peeling, largest order first.
    let mut order_sorted: Vec<usize> = (0..t1.len()).collect();
    order_sorted.sort_by_key(|&x| std::cmp::Reverse(orders1[x]));
    let mut generators = Vec::new();
    let mut span: BTreeSet<usize> = BTreeSet::from([t1.zero()]);
    for &g in &order_sorted {
        if !span.contains(&g) {
            generators.push(g);
            // The span is a subgroup, so adjoining g means taking the union
            // of the cosets span + t*g; walking each orbit covers them all.
            let mut new_span = BTreeSet::new();
            for &s in &span {
                let mut cur = s;
                loop {
                    new_span.insert(cur);
                    cur = t1.add(cur, g);
                    if cur == s {
                        break;
                    }
                }
            }
            span = new_span;
        }
    }

    let mut assignment: HashMap<usize, usize> = HashMap::from([(t1.zero(), t2.zero())]);
    if extend_iso(t1, t2, &orders1, &orders2, &generators, 0, &mut assignment) {
        Some((0..t1.len()).map(|x| assignment[&x]).collect())
    } else {
        None
    }
}

fn extend_iso(
    t1: &ElementTableGroup,
    t2: &ElementTableGroup,
    orders1: &[u32],
    orders2: &[u32],
    generators: &[usize],
    depth: usize,
    assignment: &mut HashMap<usize, usize>,
) -> bool {
    if depth == generators.len() {
        return assignment.len() == t1.len();
    }
    let g = generators[depth];
    for c in 0..t2.len() {
        if orders2[c] != orders1[g] {
            continue;
        }
        // Extend the homomorphism from the current subgroup S to <S, g> by
        // mapping s + t*g to h(s) + t*c, rejecting conflicts and collisions.
        let mut extended = assignment.clone();
        let mut image: BTreeSet<usize> = assignment.values().copied().collect();
        let mut ok = image.len() == assignment.len();
        if ok {
            'outer: for (&s, &hs) in assignment.iter() {
                let mut lhs = s;
                let mut rhs = hs;
                loop {
                    lhs = t1.add(lhs, g);
                    rhs = t2.add(rhs, c);
                    if lhs == s {
                        if rhs != hs {
                            ok = false;
                        }
                        break;
                    }
                    match extended.get(&lhs) {
                        Some(&prev) if prev != rhs => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            if !image.insert(rhs) {
                                ok = false;
                                break;
                            }
                            extended.insert(lhs, rhs);
                        }
                    }
                    if !ok {
                        break 'outer;
                    }
                }
                if !ok {
                    break;
                }
            }
        }
        if ok && extend_iso(t1, t2, orders1, orders2, generators, depth + 1, &mut extended) {
            *assignment = extended;
            return true;
        }
    }
    false
}

pub(crate) fn log_p_exact(p: u64, mut n: u64) -> Option<u64> {
    let mut e = 0;
    while n > 1 {
        if n % p != 0 {
            return None;
        }
        n /= p;
        e += 1;
    }
    Some(e)
}
