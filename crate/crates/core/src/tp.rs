//! Finite relational structures in the annotated-addition language, the
//! eight axiom schemas that carve out models, and the translations between
//! such models and explicit groups.
//!
//! A structure carries unary relations `R_l` ("the element has order
//! exponent l") and ternary relations `P[l,m->n]` ("x + y = z, where x, y, z
//! have order exponents l, m, n"). The language only provides `P[l,m->n]`
//! for `n <= max(l, m)`; structures reject other keys outright. Nothing else
//! is assumed — in particular the checker verifies, rather than assumes,
//! that the distinguished point is labeled as the identity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::pgroup::ExplicitPGroup;
use crate::table::ElementTableGroup;

/// A finite structure in the annotated language: domain `{0, .., n-1}`, a
/// distinguished point, unary labels, and annotated addition triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpStructure {
    p: u64,
    n: usize,
    zero: usize,
    r: BTreeMap<u32, BTreeSet<usize>>,
    pt: BTreeMap<(u32, u32, u32), BTreeSet<(usize, usize, usize)>>,
}

impl LpStructure {
    pub fn new(p: u64, n: usize, zero: usize) -> Result<Self, Error> {
        if !crate::pgroup::is_prime(p) {
            return Err(Error::invalid("structure", format!("p={p} is not prime")));
        }
        if n == 0 {
            return Err(Error::invalid("structure", "domain must be nonempty"));
        }
        if zero >= n {
            return Err(Error::invalid("structure", "distinguished point outside the domain"));
        }
        Ok(LpStructure { p, n, zero, r: BTreeMap::new(), pt: BTreeMap::new() })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn add_r(&mut self, label: u32, x: usize) -> Result<(), Error> {
        if x >= self.n {
            return Err(Error::invalid("structure", format!("R{label} member {x} outside domain")));
        }
        self.r.entry(label).or_default().insert(x);
        Ok(())
    }

    pub fn remove_r(&mut self, label: u32, x: usize) {
        if let Some(set) = self.r.get_mut(&label) {
            set.remove(&x);
            if set.is_empty() {
                self.r.remove(&label);
            }
        }
    }

    pub fn add_p(
        &mut self,
        l: u32,
        m: u32,
        n: u32,
        triple: (usize, usize, usize),
    ) -> Result<(), Error> {
        if n > l.max(m) {
            return Err(Error::invalid(
                "structure",
                format!("the language has no P[{l},{m}->{n}]: annotation exceeds max({l},{m})"),
            ));
        }
        if triple.0 >= self.n || triple.1 >= self.n || triple.2 >= self.n {
            return Err(Error::invalid("structure", "triple coordinate outside domain"));
        }
        self.pt.entry((l, m, n)).or_default().insert(triple);
        Ok(())
    }

    pub fn remove_p(&mut self, l: u32, m: u32, n: u32, triple: (usize, usize, usize)) {
        if let Some(set) = self.pt.get_mut(&(l, m, n)) {
            set.remove(&triple);
            if set.is_empty() {
                self.pt.remove(&(l, m, n));
            }
        }
    }

    pub fn r_set(&self, label: u32) -> Option<&BTreeSet<usize>> {
        self.r.get(&label)
    }

    pub fn has_r(&self, label: u32, x: usize) -> bool {
        self.r.get(&label).is_some_and(|s| s.contains(&x))
    }

    pub fn p_set(&self, l: u32, m: u32, n: u32) -> Option<&BTreeSet<(usize, usize, usize)>> {
        self.pt.get(&(l, m, n))
    }

    pub fn has_p(&self, l: u32, m: u32, n: u32, t: (usize, usize, usize)) -> bool {
        self.pt.get(&(l, m, n)).is_some_and(|s| s.contains(&t))
    }

    pub fn r_labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.r.keys().copied()
    }

    pub fn p_keys(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.pt.keys().copied()
    }

    /// Labels of `x`: every `l` with `x` in `R_l`.
    pub fn labels_of(&self, x: usize) -> Vec<u32> {
        self.r.iter().filter(|(_, s)| s.contains(&x)).map(|(&l, _)| l).collect()
    }

    /// Largest index mentioned by any nonempty relation; instances above
    /// `this + 1` are vacuous for every schema.
    pub fn max_used_index(&self) -> u32 {
        let from_r = self.r.iter().filter(|(_, s)| !s.is_empty()).map(|(&l, _)| l);
        let from_p = self
            .pt
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(&(l, m, n), _)| l.max(m).max(n));
        from_r.chain(from_p).max().unwrap_or(0)
    }
}

impl fmt::Display for LpStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}; N={}; zero={}", self.p, self.n, self.zero)?;
        for (l, set) in &self.r {
            if set.is_empty() {
                continue;
            }
            let body: Vec<String> = set.iter().map(|x| x.to_string()).collect();
            write!(f, "\nR{} = {{{}}}", l, body.join(","))?;
        }
        for (&(l, m, n), set) in &self.pt {
            if set.is_empty() {
                continue;
            }
            let body: Vec<String> =
                set.iter().map(|(a, b, c)| format!("({a},{b},{c})")).collect();
            write!(f, "\nP[{},{}->{}] = {{{}}}", l, m, n, body.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for LpStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::parse("structure", "empty input"))?;
        let mut p = None;
        let mut n = None;
        let mut zero = None;
        for part in header.split(';').map(str::trim) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::parse("structure", format!("bad header field {part:?}")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::parse("structure", format!("bad header value {part:?}")))?;
            match key.trim() {
                "p" => p = Some(value as u64),
                "N" => n = Some(value),
                "zero" => zero = Some(value),
                other => {
                    return Err(Error::parse("structure", format!("unknown header key {other:?}")))
                }
            }
        }
        let (p, n, zero) = match (p, n, zero) {
            (Some(p), Some(n), Some(zero)) => (p, n, zero),
            _ => return Err(Error::parse("structure", "header needs p, N, and zero")),
        };
        let mut out = LpStructure::new(p, n, zero)?;
        for line in lines {
            let (head, body) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("structure", format!("bad line {line:?}")))?;
            let head = head.trim();
            let body = body.trim();
            let body = body
                .strip_prefix('{')
                .and_then(|b| b.strip_suffix('}'))
                .ok_or_else(|| Error::parse("structure", format!("bad set body {body:?}")))?
                .trim();
            if let Some(label) = head.strip_prefix('R') {
                let label: u32 = label
                    .parse()
                    .map_err(|_| Error::parse("structure", format!("bad relation name {head:?}")))?;
                if !body.is_empty() {
                    for item in body.split(',') {
                        let x: usize = item.trim().parse().map_err(|_| {
                            Error::parse("structure", format!("bad member {item:?}"))
                        })?;
                        out.add_r(label, x)?;
                    }
                }
            } else if let Some(key) = head.strip_prefix('P') {
                let key = key
                    .trim()
                    .strip_prefix('[')
                    .and_then(|k| k.strip_suffix(']'))
                    .ok_or_else(|| Error::parse("structure", format!("bad key {head:?}")))?;
                let (lm, ann) = key
                    .split_once("->")
                    .ok_or_else(|| Error::parse("structure", format!("bad key {head:?}")))?;
                let (l, m) = lm
                    .split_once(',')
                    .ok_or_else(|| Error::parse("structure", format!("bad key {head:?}")))?;
                let l: u32 =
                    l.trim().parse().map_err(|_| Error::parse("structure", "bad label"))?;
                let m: u32 =
                    m.trim().parse().map_err(|_| Error::parse("structure", "bad label"))?;
                let ann: u32 =
                    ann.trim().parse().map_err(|_| Error::parse("structure", "bad label"))?;
                if !body.is_empty() {
                    for item in split_triples(body)? {
                        out.add_p(l, m, ann, item)?;
                    }
                }
            } else {
                return Err(Error::parse("structure", format!("unknown line {line:?}")));
            }
        }
        Ok(out)
    }
}

fn split_triples(body: &str) -> Result<Vec<(usize, usize, usize)>, Error> {
    let mut out = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let rest2 = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse("structure", format!("bad triple list near {rest:?}")))?;
        let (inner, tail) = rest2
            .split_once(')')
            .ok_or_else(|| Error::parse("structure", "unclosed triple"))?;
        let coords: Vec<&str> = inner.split(',').map(str::trim).collect();
        if coords.len() != 3 {
            return Err(Error::parse("structure", format!("triple ({inner}) needs 3 coordinates")));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse("structure", format!("bad coordinate {s:?}")))
        };
        out.push((parse(coords[0])?, parse(coords[1])?, parse(coords[2])?));
        rest = tail.trim().strip_prefix(',').unwrap_or(tail).trim();
    }
    Ok(out)
}

/// One of the eight axiom schemas, numbered 1 through 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxiomId(u8);

impl AxiomId {
    pub fn new(i: u8) -> Result<Self, Error> {
        if (1..=8).contains(&i) {
            Ok(AxiomId(i))
        } else {
            Err(Error::invalid("axiom id", format!("{i} is not in 1..=8")))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> [AxiomId; 8] {
        [1, 2, 3, 4, 5, 6, 7, 8].map(AxiomId)
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.strip_prefix('A')
            .and_then(|i| i.parse::<u8>().ok())
            .ok_or_else(|| Error::parse("axiom id", format!("expected A1..A8, got {s:?}")))
            .and_then(AxiomId::new)
    }
}

/// Check result for one schema: empty `failures` means it passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaResult {
    pub axiom: AxiomId,
    pub failures: Vec<String>,
}

impl SchemaResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Full report of an axiom check: the index bound that was used and one
/// result per schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub bound: u32,
    pub results: Vec<SchemaResult>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(SchemaResult::passed)
    }

    pub fn failing_set(&self) -> BTreeSet<AxiomId> {
        self.results.iter().filter(|r| !r.passed()).map(|r| r.axiom).collect()
    }

    pub fn result(&self, axiom: AxiomId) -> &SchemaResult {
        &self.results[(axiom.index() - 1) as usize]
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bound: indices<={}", self.bound)?;
        for r in &self.results {
            if r.passed() {
                write!(f, "\n{}: PASS", r.axiom)?;
            } else {
                write!(f, "\n{}: FAIL ({} instances)", r.axiom, r.failures.len())?;
                for w in r.failures.iter().take(5) {
                    write!(f, "\n  witness: {w}")?;
                }
            }
        }
        Ok(())
    }
}

/// Checks all eight schemas with the default bound: instances whose indices
/// exceed the largest used index plus one are vacuous, so nothing above that
/// is inspected.
pub fn check_axioms(m: &LpStructure) -> AxiomReport {
    check_axioms_with_margin(m, 0)
}

/// Same check with `extra` more index headroom; results are invariant under
/// the margin because the added instances only quantify over empty labels.
pub fn check_axioms_with_margin(m: &LpStructure, extra: u32) -> AxiomReport {
    let bound = m.max_used_index() + 1 + extra;
    let index = PairIndex::build(m);
    let results = vec![
        SchemaResult { axiom: AxiomId(1), failures: check_a1(m) },
        SchemaResult { axiom: AxiomId(2), failures: check_a2(m, bound) },
        SchemaResult { axiom: AxiomId(3), failures: check_a3(m) },
        SchemaResult { axiom: AxiomId(4), failures: check_a4(m, bound, &index) },
        SchemaResult { axiom: AxiomId(5), failures: check_a5(m, bound) },
        SchemaResult { axiom: AxiomId(6), failures: check_a6(m, bound) },
        SchemaResult { axiom: AxiomId(7), failures: check_a7(m, bound, &index) },
        SchemaResult { axiom: AxiomId(8), failures: check_a8(m) },
    ];
    AxiomReport { bound, results }
}

/// Lookup from `(l, m, x, y)` to every annotated result `(n, z)` recorded
/// for that pair under those labels.
struct PairIndex {
    map: HashMap<(u32, u32, usize, usize), Vec<(u32, usize)>>,
}

impl PairIndex {
    fn build(m: &LpStructure) -> Self {
        let mut map: HashMap<(u32, u32, usize, usize), Vec<(u32, usize)>> = HashMap::new();
        for (&(l, mm, n), set) in &m.pt {
            for &(x, y, z) in set {
                map.entry((l, mm, x, y)).or_default().push((n, z));
            }
        }
        PairIndex { map }
    }

    fn results(&self, l: u32, m: u32, x: usize, y: usize) -> &[(u32, usize)] {
        self.map.get(&(l, m, x, y)).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Schema 1: every recorded triple has correctly labeled coordinates.
fn check_a1(m: &LpStructure) -> Vec<String> {
    let mut failures = Vec::new();
    for (&(l, mm, n), set) in &m.pt {
        for &(x, y, z) in set {
            if !m.has_r(l, x) {
                failures.push(format!("P[{l},{mm}->{n}] triple ({x},{y},{z}): {x} not in R{l}"));
            }
            if !m.has_r(mm, y) {
                failures.push(format!("P[{l},{mm}->{n}] triple ({x},{y},{z}): {y} not in R{mm}"));
            }
            if !m.has_r(n, z) {
                failures.push(format!("P[{l},{mm}->{n}] triple ({x},{y},{z}): {z} not in R{n}"));
            }
        }
    }
    failures
}

/// Schema 2: labels mean what they say. `R_0` holds exactly at the
/// distinguished point, and for n >= 1 membership in `R_n` is equivalent to
/// the existence of the (p-1)-step self-addition chain that steps down to
/// annotation n-1 at the last step.
fn check_a2(m: &LpStructure, bound: u32) -> Vec<String> {
    let mut failures = Vec::new();
    for x in 0..m.n {
        let in_r0 = m.has_r(0, x);
        if in_r0 && x != m.zero {
            failures.push(format!("n=0: {x} in R0 but is not the distinguished point"));
        }
        if !in_r0 && x == m.zero {
            failures.push(format!("n=0: distinguished point {x} missing from R0"));
        }
    }
    for n in 1..=bound {
        for x in 0..m.n {
            let labeled = m.has_r(n, x);
            let chained = a2_chain_exists(m, n, x);
            if labeled && !chained {
                failures.push(format!("n={n}: {x} in R{n} but has no self-addition chain"));
            }
            if !labeled && chained {
                failures.push(format!("n={n}: {x} has a self-addition chain but is not in R{n}"));
            }
        }
    }
    failures
}

/// The chain for membership in `R_n` (n >= 1): x_1 = x, then p-1 conjuncts
/// P[n,n->e_j](x, x_j, x_{j+1}) with e_j = n except at the final step, where
/// e = n-1. For p = 2 this is the single conjunct P[n,n->n-1](x, x, x_2).
fn a2_chain_exists(m: &LpStructure, n: u32, x: usize) -> bool {
    fn step(m: &LpStructure, n: u32, x: usize, current: usize, remaining: u32) -> bool {
        let e = if remaining == 1 { n - 1 } else { n };
        let Some(set) = m.p_set(n, n, e) else {
            return false;
        };
        for &(a, b, z) in set {
            if a == x && b == current {
                if remaining == 1 || step(m, n, x, z, remaining - 1) {
                    return true;
                }
            }
        }
        false
    }
    step(m, n, x, x, (m.p - 1) as u32)
}

/// Schema 3: addition is single-valued — for fixed argument labels, a pair
/// has at most one result across all annotations.
fn check_a3(m: &LpStructure) -> Vec<String> {
    let mut failures = Vec::new();
    let mut seen: BTreeMap<(u32, u32, usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for (&(l, mm, _), set) in &m.pt {
        for &(x, y, z) in set {
            seen.entry((l, mm, x, y)).or_default().insert(z);
        }
    }
    for ((l, mm, x, y), zs) in seen {
        if zs.len() > 1 {
            let list: Vec<String> = zs.iter().map(|z| z.to_string()).collect();
            failures.push(format!(
                "labels ({l},{mm}): pair ({x},{y}) has multiple results {{{}}}",
                list.join(",")
            ));
        }
    }
    failures
}

/// Schema 4: addition is total on labeled elements — every labeled pair has
/// a result under some annotation within the language.
fn check_a4(m: &LpStructure, bound: u32, index: &PairIndex) -> Vec<String> {
    let mut failures = Vec::new();
    for l in 0..=bound {
        let Some(xs) = m.r_set(l) else { continue };
        for mm in 0..=bound {
            let Some(ys) = m.r_set(mm) else { continue };
            for &x in xs {
                for &y in ys {
                    if index.results(l, mm, x, y).is_empty() {
                        failures.push(format!("l={l},m={mm}: no sum for (x={x},y={y})"));
                    }
                }
            }
        }
    }
    failures
}

/// Schema 5: the distinguished point is a two-sided identity on labeled
/// elements, with the result keeping the element's own label.
fn check_a5(m: &LpStructure, bound: u32) -> Vec<String> {
    let mut failures = Vec::new();
    for l in 0..=bound {
        let Some(xs) = m.r_set(l) else { continue };
        for &x in xs {
            if !m.has_p(0, l, l, (m.zero, x, x)) {
                failures.push(format!("l={l}: P[0,{l}->{l}] lacks ({},{x},{x})", m.zero));
            }
            if !m.has_p(l, 0, l, (x, m.zero, x)) {
                failures.push(format!("l={l}: P[{l},0->{l}] lacks ({x},{},{x})", m.zero));
            }
        }
    }
    failures
}

/// Schema 6: every labeled element has a two-sided inverse under annotation
/// zero.
fn check_a6(m: &LpStructure, bound: u32) -> Vec<String> {
    let mut failures = Vec::new();
    for l in 0..=bound {
        let Some(xs) = m.r_set(l) else { continue };
        for &x in xs {
            let found = (0..m.n).any(|y| {
                m.has_p(l, l, 0, (x, y, m.zero)) && m.has_p(l, l, 0, (y, x, m.zero))
            });
            if !found {
                failures.push(format!("l={l}: x={x} has no inverse"));
            }
        }
    }
    failures
}

/// Schema 7: associativity. For labeled x, y, z there are intermediate
/// results u = x+y, v = y+z and a common final result w reachable both ways,
/// with annotations r, s, t ranging over the language (t within both
/// max(r,n) and max(l,s)).
fn check_a7(m: &LpStructure, bound: u32, index: &PairIndex) -> Vec<String> {
    let mut failures = Vec::new();
    for l in 0..=bound {
        let Some(xs) = m.r_set(l) else { continue };
        for mm in 0..=bound {
            let Some(ys) = m.r_set(mm) else { continue };
            for n in 0..=bound {
                let Some(zs) = m.r_set(n) else { continue };
                for &x in xs {
                    for &y in ys {
                        for &z in zs {
                            if !a7_square_exists(m, index, (l, mm, n), (x, y, z)) {
                                failures.push(format!(
                                    "l={l},m={mm},n={n}: ({x},{y},{z}) has no associativity square"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    failures
}

fn a7_square_exists(
    m: &LpStructure,
    index: &PairIndex,
    (l, mm, n): (u32, u32, u32),
    (x, y, z): (usize, usize, usize),
) -> bool {
    for &(r, u) in index.results(l, mm, x, y) {
        for &(s, v) in index.results(mm, n, y, z) {
            for &(t, w) in index.results(r, n, u, z) {
                if t <= l.max(s) && m.has_p(l, s, t, (x, v, w)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Schema 8: commutativity — each recorded triple of labeled elements has
/// its mirror under the swapped labels.
fn check_a8(m: &LpStructure) -> Vec<String> {
    let mut failures = Vec::new();
    for (&(l, mm, n), set) in &m.pt {
        for &(x, y, z) in set {
            if m.has_r(l, x) && m.has_r(mm, y) && !m.has_p(mm, l, n, (y, x, z)) {
                failures.push(format!(
                    "P[{l},{mm}->{n}] has ({x},{y},{z}) but P[{mm},{l}->{n}] lacks ({y},{x},{z})"
                ));
            }
        }
    }
    failures
}

/// Canonical structure of a finite explicit group with `free` extra
/// unlabeled points. Group elements take indices 0..|G| in enumeration
/// order (zero first); free points follow.
pub fn encode(g: &ExplicitPGroup, free: u64) -> Result<LpStructure, Error> {
    if g.div_rank() > 0 {
        return Err(Error::InfiniteGroup("only finite groups can be encoded"));
    }
    let elems = g.enumerate(0);
    let size = elems.len();
    let n = size + free as usize;
    let mut indices: BTreeMap<_, usize> = BTreeMap::new();
    for (i, e) in elems.iter().enumerate() {
        indices.insert(e.clone(), i);
    }
    let zero = indices[&g.zero()];
    let mut out = LpStructure::new(g.p(), n, zero)?;
    let orders = elems.iter().map(|e| g.elem_order(e)).collect::<Result<Vec<u32>, _>>()?;
    for (i, &o) in orders.iter().enumerate() {
        out.add_r(o, i)?;
    }
    for (i, x) in elems.iter().enumerate() {
        for (j, y) in elems.iter().enumerate() {
            let sum = g.add(x, y)?;
            let k = indices[&sum];
            out.add_p(orders[i], orders[j], orders[k], (i, j, k))?;
        }
    }
    Ok(out)
}

/// Reads a model back into a group table plus its count of unlabeled points.
/// Structures that fail the axiom check are refused as non-models. Any
/// failure *after* the check passes — ambiguous labels, a partial or
/// ill-formed table, an order that is not a power of p — is a defect in the
/// checker itself and is reported as such.
pub fn decode(m: &LpStructure) -> Result<(ElementTableGroup, u64), Error> {
    let report = check_axioms(m);
    if !report.passed() {
        let failing: Vec<String> =
            report.failing_set().iter().map(|a| a.to_string()).collect();
        return Err(Error::NotAModel(format!("axiom check failed: {}", failing.join(", "))));
    }
    let mut labeled: Vec<usize> = Vec::new();
    let mut label_of: BTreeMap<usize, u32> = BTreeMap::new();
    for x in 0..m.n {
        let labels = m.labels_of(x);
        match labels.len() {
            0 => {}
            1 => {
                label_of.insert(x, labels[0]);
                labeled.push(x);
            }
            _ => {
                return Err(Error::DecodeDefect(format!(
                    "element {x} carries several labels {labels:?} in a structure that passed the check"
                )))
            }
        }
    }
    let free = (m.n - labeled.len()) as u64;
    let position: BTreeMap<usize, usize> =
        labeled.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let zero_pos = *position.get(&m.zero).ok_or_else(|| {
        Error::DecodeDefect("distinguished point unlabeled in a structure that passed the check".into())
    })?;
    let size = labeled.len();
    let index = PairIndex::build(m);
    let mut add = vec![0u32; size * size];
    for (i, &x) in labeled.iter().enumerate() {
        for (j, &y) in labeled.iter().enumerate() {
            let results = index.results(label_of[&x], label_of[&y], x, y);
            let zs: BTreeSet<usize> = results.iter().map(|&(_, z)| z).collect();
            if zs.len() != 1 {
                return Err(Error::DecodeDefect(format!(
                    "pair ({x},{y}) has {} results in a structure that passed the check",
                    zs.len()
                )));
            }
            let z = *zs.iter().next().unwrap();
            let k = *position.get(&z).ok_or_else(|| {
                Error::DecodeDefect(format!("sum {z} of labeled elements is unlabeled"))
            })?;
            add[i * size + j] = k as u32;
        }
    }
    let table = ElementTableGroup::new(size, zero_pos, add)
        .map_err(|e| Error::DecodeDefect(format!("decoded table is not a group: {e}")))?;
    // A model's group must be a p-group; anything else slipped past the check.
    classify(&table, m.p)
        .map_err(|e| Error::DecodeDefect(format!("decoded group is not a {}-group: {e}", m.p)))?;
    Ok((table, free))
}

/// Shape recovery: reads the layer counts along the repeated
/// multiplication-by-p filtration of the table (by socle counting) and
/// rebuilds the explicit group with one exponent-(j+1) summand per unit of
/// the layer count at j.
pub fn classify(t: &ElementTableGroup, p: u64) -> Result<ExplicitPGroup, Error> {
    let counts = crate::ulm::table_ulm_counts(t, p)?;
    let mut exps: Vec<u32> = Vec::new();
    for j in (0..counts.len()).rev() {
        for _ in 0..counts[j] {
            exps.push(j as u32 + 1);
        }
    }
    ExplicitPGroup::new(p, exps, 0)
}

/// Isomorphism search between structures: a bijection fixing the
/// distinguished points and carrying every relation exactly onto its
/// counterpart. Returns the mapping (as a vector over the first domain) or
/// None.
pub fn structure_iso(a: &LpStructure, b: &LpStructure) -> Option<Vec<usize>> {
    if a.p != b.p || a.n != b.n {
        return None;
    }
    if a.r.len() != b.r.len() || a.pt.len() != b.pt.len() {
        return None;
    }
    for (l, set) in &a.r {
        if b.r.get(l).map(BTreeSet::len) != Some(set.len()) {
            return None;
        }
    }
    for (key, set) in &a.pt {
        if b.pt.get(key).map(BTreeSet::len) != Some(set.len()) {
            return None;
        }
    }
    let sig_a = signatures(a);
    let sig_b = signatures(b);
    let mut map: Vec<Option<usize>> = vec![None; a.n];
    let mut used = vec![false; b.n];
    map[a.zero] = Some(b.zero);
    used[b.zero] = true;
    if sig_a[a.zero] != sig_b[b.zero] {
        return None;
    }
    // Assign most-constrained (rarest signature) elements first.
    let mut order: Vec<usize> = (0..a.n).filter(|&x| x != a.zero).collect();
    let mut freq: HashMap<&Signature, usize> = HashMap::new();
    for s in &sig_b {
        *freq.entry(s).or_default() += 1;
    }
    order.sort_by_key(|&x| (freq.get(&sig_a[x]).copied().unwrap_or(0), x));
    if iso_dfs(a, b, &sig_a, &sig_b, &order, 0, &mut map, &mut used) {
        Some(map.into_iter().map(|m| m.expect("complete assignment")).collect())
    } else {
        None
    }
}

type Signature = (Vec<u32>, Vec<((u32, u32, u32), [usize; 3])>);

/// Per-element invariant: its labels, plus how often it appears in each
/// coordinate role of each annotated relation.
fn signatures(m: &LpStructure) -> Vec<Signature> {
    let mut counts: Vec<BTreeMap<(u32, u32, u32), [usize; 3]>> = vec![BTreeMap::new(); m.n];
    for (&key, set) in &m.pt {
        for &(x, y, z) in set {
            counts[x].entry(key).or_default()[0] += 1;
            counts[y].entry(key).or_default()[1] += 1;
            counts[z].entry(key).or_default()[2] += 1;
        }
    }
    (0..m.n)
        .map(|x| (m.labels_of(x), counts[x].iter().map(|(&k, &v)| (k, v)).collect()))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn iso_dfs(
    a: &LpStructure,
    b: &LpStructure,
    sig_a: &[Signature],
    sig_b: &[Signature],
    order: &[usize],
    depth: usize,
    map: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
) -> bool {
    if depth == order.len() {
        return relations_match(a, b, map);
    }
    let x = order[depth];
    for y in 0..b.n {
        if used[y] || sig_b[y] != sig_a[x] {
            continue;
        }
        map[x] = Some(y);
        used[y] = true;
        if triples_consistent_so_far(a, b, map, x)
            && iso_dfs(a, b, sig_a, sig_b, order, depth + 1, map, used)
        {
            return true;
        }
        map[x] = None;
        used[y] = false;
    }
    false
}

/// Incremental pruning: every fully-mapped triple that involves the newest
/// assignment must already land inside the counterpart relation.
fn triples_consistent_so_far(
    a: &LpStructure,
    b: &LpStructure,
    map: &[Option<usize>],
    newest: usize,
) -> bool {
    for (&(l, m, n), set) in &a.pt {
        for &(x, y, z) in set {
            if x != newest && y != newest && z != newest {
                continue;
            }
            if let (Some(bx), Some(by), Some(bz)) = (map[x], map[y], map[z]) {
                if !b.has_p(l, m, n, (bx, by, bz)) {
                    return false;
                }
            }
        }
    }
    true
}

fn relations_match(a: &LpStructure, b: &LpStructure, map: &[Option<usize>]) -> bool {
    for (l, set) in &a.r {
        for &x in set {
            if !b.has_r(*l, map[x].unwrap()) {
                return false;
            }
        }
    }
    for (&(l, m, n), set) in &a.pt {
        for &(x, y, z) in set {
            if !b.has_p(l, m, n, (map[x].unwrap(), map[y].unwrap(), map[z].unwrap())) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> ExplicitPGroup {
        s.parse().expect("test group")
    }

    fn z2() -> ExplicitPGroup {
        g("p=2; cyclic=[1]; divisible=0")
    }

    #[test]
    fn encode_trivial_group() {
        let m = encode(&g("p=2; cyclic=[]; divisible=0"), 0).unwrap();
        assert_eq!(m.domain_size(), 1);
        assert_eq!(m.zero(), 0);
        assert_eq!(m.r_set(0), Some(&BTreeSet::from([0])));
        assert_eq!(m.p_set(0, 0, 0), Some(&BTreeSet::from([(0, 0, 0)])));
        assert!(check_axioms(&m).passed());
    }

    #[test]
    fn encode_order_two_with_free_point() {
        let m = encode(&z2(), 1).unwrap();
        assert_eq!(
            m.to_string(),
            "p=2; N=3; zero=0\n\
             R0 = {0}\n\
             R1 = {1}\n\
             P[0,0->0] = {(0,0,0)}\n\
             P[0,1->1] = {(0,1,1)}\n\
             P[1,0->1] = {(1,0,1)}\n\
             P[1,1->0] = {(1,1,0)}"
        );
        assert!(check_axioms(&m).passed());
    }

    #[test]
    fn structure_text_round_trips() {
        for (grp, free) in [
            (z2(), 1u64),
            (g("p=2; cyclic=[2,1]; divisible=0"), 2),
            (g("p=3; cyclic=[1,1]; divisible=0"), 0),
        ] {
            let m = encode(&grp, free).unwrap();
            let back: LpStructure = m.to_string().parse().unwrap();
            assert_eq!(m, back);
        }
    }

    #[test]
    fn structure_rejects_bad_input() {
        assert!(LpStructure::new(4, 3, 0).is_err(), "composite p");
        assert!(LpStructure::new(2, 0, 0).is_err(), "empty domain");
        assert!(LpStructure::new(2, 3, 3).is_err(), "zero outside domain");
        let mut m = LpStructure::new(2, 3, 0).unwrap();
        assert!(m.add_p(1, 1, 2, (0, 0, 0)).is_err(), "annotation above max(l,m)");
        assert!(m.add_p(1, 1, 0, (0, 0, 3)).is_err(), "coordinate outside domain");
        assert!("p=2; N=3".parse::<LpStructure>().is_err(), "missing zero");
        assert!("p=2; N=3; zero=0\nQ1 = {0}".parse::<LpStructure>().is_err());
        assert!("p=2; N=2; zero=0\nP[1,1->2] = {(0,0,0)}".parse::<LpStructure>().is_err());
    }

    #[test]
    fn canonical_structures_pass_all_schemas() {
        for spec in [
            "p=2; cyclic=[2,1]; divisible=0",
            "p=2; cyclic=[3]; divisible=0",
            "p=3; cyclic=[2]; divisible=0",
            "p=3; cyclic=[1,1]; divisible=0",
        ] {
            for free in [0u64, 2] {
                let m = encode(&g(spec), free).unwrap();
                let report = check_axioms(&m);
                assert!(report.passed(), "{spec} free={free}:\n{report}");
            }
        }
    }

    #[test]
    fn removing_a_sum_breaks_totality_with_the_expected_witness() {
        let mut m = encode(&z2(), 0).unwrap();
        m.remove_p(1, 1, 0, (1, 1, 0));
        let report = check_axioms(&m);
        assert!(!report.passed());
        let a4 = report.result(AxiomId::new(4).unwrap());
        assert!(!a4.passed());
        assert_eq!(a4.failures, vec!["l=1,m=1: no sum for (x=1,y=1)".to_string()]);
    }

    #[test]
    fn labeling_a_free_point_breaks_label_meaning() {
        let mut m = encode(&z2(), 1).unwrap();
        m.add_r(1, 2).unwrap();
        let report = check_axioms(&m);
        let a2 = report.result(AxiomId::new(2).unwrap());
        assert!(!a2.passed());
        assert!(
            a2.failures.iter().any(|w| w.contains("2 in R1 but has no self-addition chain")),
            "{:?}",
            a2.failures
        );
    }

    #[test]
    fn unlabeled_distinguished_point_is_caught() {
        let m = LpStructure::new(2, 1, 0).unwrap();
        let report = check_axioms(&m);
        let a2 = report.result(AxiomId::new(2).unwrap());
        assert!(!a2.passed());
        assert!(a2.failures[0].contains("missing from R0"));
    }

    #[test]
    fn report_is_invariant_under_extra_index_margin() {
        let mut structures = vec![
            encode(&g("p=2; cyclic=[2,1]; divisible=0"), 1).unwrap(),
            encode(&g("p=3; cyclic=[1]; divisible=0"), 0).unwrap(),
        ];
        let mut broken = encode(&z2(), 0).unwrap();
        broken.remove_p(1, 1, 0, (1, 1, 0));
        structures.push(broken);
        for m in structures {
            let base = check_axioms(&m);
            let wide = check_axioms_with_margin(&m, 3);
            assert_eq!(wide.bound, base.bound + 3);
            for (r1, r2) in base.results.iter().zip(wide.results.iter()) {
                assert_eq!(r1, r2, "margin changed the outcome on\n{m}");
            }
        }
    }

    #[test]
    fn axiom_report_text_is_stable() {
        let mut m = encode(&z2(), 0).unwrap();
        m.remove_p(1, 1, 0, (1, 1, 0));
        let report = check_axioms(&m);
        let text = report.to_string();
        assert!(text.starts_with("bound: indices<=2\nA1: PASS\n"), "{text}");
        assert!(text.contains("A4: FAIL (1 instances)\n  witness: l=1,m=1: no sum for (x=1,y=1)"));
    }

    #[test]
    fn decode_inverts_encode() {
        for (spec, free) in [
            ("p=2; cyclic=[]; divisible=0", 0u64),
            ("p=2; cyclic=[1]; divisible=0", 1),
            ("p=2; cyclic=[2,1]; divisible=0", 2),
            ("p=3; cyclic=[1,1]; divisible=0", 1),
        ] {
            let grp = g(spec);
            let m = encode(&grp, free).unwrap();
            let (table, recovered_free) = decode(&m).unwrap();
            assert_eq!(recovered_free, free);
            let reference = grp.to_element_table().unwrap();
            assert_eq!(table, reference, "decoded table differs for {spec}");
        }
    }

    #[test]
    fn decode_refuses_non_models() {
        let mut m = encode(&z2(), 0).unwrap();
        m.remove_p(1, 1, 0, (1, 1, 0));
        match decode(&m) {
            Err(Error::NotAModel(msg)) => assert!(msg.contains("A4"), "{msg}"),
            other => panic!("expected a non-model refusal, got {other:?}"),
        }
    }

    #[test]
    fn encode_refuses_infinite_groups() {
        let grp = g("p=2; cyclic=[1]; divisible=1");
        assert!(matches!(encode(&grp, 0), Err(Error::InfiniteGroup(_))));
    }

    #[test]
    fn classify_recovers_shapes() {
        for spec in [
            "p=2; cyclic=[]; divisible=0",
            "p=2; cyclic=[2,1]; divisible=0",
            "p=2; cyclic=[3,1,1]; divisible=0",
            "p=3; cyclic=[2,2]; divisible=0",
        ] {
            let grp = g(spec);
            let table = grp.to_element_table().unwrap();
            assert_eq!(classify(&table, grp.p()).unwrap(), grp);
        }
    }

    #[test]
    fn socle_route_agrees_with_kernel_route() {
        for p in [2u64, 3] {
            for exps in crate::corpus::exponent_multisets(3, 3) {
                let grp = ExplicitPGroup::new(p, exps, 0).unwrap();
                if grp.size().as_finite().unwrap() > 81 {
                    continue;
                }
                let table = grp.to_element_table().unwrap();
                assert_eq!(
                    classify(&table, p).unwrap(),
                    table.classify_by_kernels(p).unwrap(),
                    "routes disagree on {grp}"
                );
            }
        }
    }

    #[test]
    fn classify_rejects_wrong_prime() {
        let grp = g("p=3; cyclic=[1]; divisible=0");
        let table = grp.to_element_table().unwrap();
        assert!(classify(&table, 2).is_err());
    }

    /// A bijection that carries the distinguished point, every labeling
    /// set, and every labeled sum set exactly onto the target's.
    fn is_structure_map(a: &LpStructure, b: &LpStructure, map: &[usize]) -> bool {
        let mut seen = vec![false; b.domain_size()];
        for &y in map {
            if y >= b.domain_size() || seen[y] {
                return false;
            }
            seen[y] = true;
        }
        if map.len() != a.domain_size() || map[a.zero()] != b.zero() {
            return false;
        }
        let a_labels: Vec<u32> = a.r_labels().collect();
        if a_labels != b.r_labels().collect::<Vec<u32>>() {
            return false;
        }
        for l in a_labels {
            let image: BTreeSet<usize> = a.r_set(l).unwrap().iter().map(|&x| map[x]).collect();
            if Some(&image) != b.r_set(l) {
                return false;
            }
        }
        let a_keys: Vec<(u32, u32, u32)> = a.p_keys().collect();
        if a_keys != b.p_keys().collect::<Vec<(u32, u32, u32)>>() {
            return false;
        }
        for (l, m, n) in a_keys {
            let image: BTreeSet<(usize, usize, usize)> = a
                .p_set(l, m, n)
                .unwrap()
                .iter()
                .map(|&(x, y, z)| (map[x], map[y], map[z]))
                .collect();
            if Some(&image) != b.p_set(l, m, n) {
                return false;
            }
        }
        true
    }

    #[test]
    fn structure_iso_finds_scrambles_and_rejects_different_shapes() {
        let a = encode(&g("p=2; cyclic=[2,1]; divisible=0"), 1).unwrap();
        // Reverse the domain by hand: x -> N-1-x.
        let n = a.domain_size();
        let mut b = LpStructure::new(a.p(), n, n - 1 - a.zero()).unwrap();
        for l in a.r_labels().collect::<Vec<_>>() {
            for &x in a.r_set(l).unwrap() {
                b.add_r(l, n - 1 - x).unwrap();
            }
        }
        for key in a.p_keys().collect::<Vec<_>>() {
            for &(x, y, z) in a.p_set(key.0, key.1, key.2).unwrap() {
                b.add_p(key.0, key.1, key.2, (n - 1 - x, n - 1 - y, n - 1 - z)).unwrap();
            }
        }
        // Many isomorphisms exist (the reversal composed with any
        // automorphism), so verify the one returned rather than pinning it.
        let map = structure_iso(&a, &b).expect("reversed copy is isomorphic");
        assert!(is_structure_map(&a, &b, &map));

        let c = encode(&g("p=2; cyclic=[1,1,1]; divisible=0"), 1).unwrap();
        assert!(structure_iso(&a, &c).is_none(), "different shapes, same domain size");
        let d = encode(&g("p=2; cyclic=[2,1]; divisible=0"), 0).unwrap();
        assert!(structure_iso(&a, &d).is_none(), "different domain sizes");
    }

    #[test]
    fn structure_iso_respects_relations_not_just_counts() {
        // Two structures with identical relation sizes but incompatible
        // wiring: a 4-cycle table vs the rectangle table.
        let z4 = encode(&g("p=2; cyclic=[2]; divisible=0"), 0).unwrap();
        let klein = encode(&g("p=2; cyclic=[1,1]; divisible=0"), 0).unwrap();
        assert!(structure_iso(&z4, &klein).is_none());
    }

    #[test]
    fn axiom_id_text() {
        assert_eq!(AxiomId::new(4).unwrap().to_string(), "A4");
        assert_eq!("A7".parse::<AxiomId>().unwrap(), AxiomId::new(7).unwrap());
        assert!("A9".parse::<AxiomId>().is_err());
        assert!(AxiomId::new(0).is_err());
    }
}
