//! Deterministic test corpora: enumerations of small group shapes, seeded
//! sampling, structure scrambling, and a library of mutated structures each
//! of which violates a known, minimal set of axiom schemas.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::pgroup::ExplicitPGroup;
use crate::tp::{encode, AxiomId, LpStructure};

/// Every descending exponent multiset with at most `max_summands` entries
/// drawn from `1..=max_exp`, the empty shape included, in a fixed order
/// (shorter first, then lexicographically descending).
pub fn exponent_multisets(max_summands: u32, max_exp: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..max_summands {
        let mut next = Vec::new();
        for shape in &layer {
            let cap = shape.last().copied().unwrap_or(max_exp);
            for e in (1..=cap).rev() {
                let mut grown = shape.clone();
                grown.push(e);
                next.push(grown);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Bounds describing a deterministic corpus of groups and structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSpec {
    pub primes: Vec<u64>,
    pub max_summands: u32,
    pub max_exp: u32,
    pub max_div_rank: u32,
    pub max_free: u64,
    pub seed: u64,
    pub samples: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            primes: vec![2, 3],
            max_summands: 3,
            max_exp: 3,
            max_div_rank: 2,
            max_free: 3,
            seed: 0,
            samples: 32,
        }
    }
}

impl CorpusSpec {
    /// No primes means no groups: every derived corpus is empty.
    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// All group shapes within the bounds, divisible parts included.
    pub fn groups(&self) -> Vec<ExplicitPGroup> {
        let mut out = Vec::new();
        for &p in &self.primes {
            for exps in exponent_multisets(self.max_summands, self.max_exp) {
                for d in 0..=self.max_div_rank {
                    out.push(
                        ExplicitPGroup::new(p, exps.clone(), d)
                            .expect("in-bounds shapes are valid"),
                    );
                }
            }
        }
        out
    }

    /// The finite members, capped by group order.
    pub fn finite_groups(&self, max_size: u64) -> Vec<ExplicitPGroup> {
        self.groups()
            .into_iter()
            .filter(|g| g.size().as_finite().is_some_and(|s| s <= max_size))
            .collect()
    }
}

/// Relabels a structure along a seeded random permutation of its domain; the
/// result is isomorphic to the input by construction.
pub fn scramble_structure(m: &LpStructure, rng: &mut ChaCha8Rng) -> LpStructure {
    let n = m.domain_size();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    apply_permutation(m, &perm)
}

/// Pushes the structure forward along `perm` (old index -> new index).
pub fn apply_permutation(m: &LpStructure, perm: &[usize]) -> LpStructure {
    let mut out = LpStructure::new(m.p(), m.domain_size(), perm[m.zero()])
        .expect("permutation preserves validity");
    for l in m.r_labels().collect::<Vec<_>>() {
        for &x in m.r_set(l).expect("listed label") {
            out.add_r(l, perm[x]).expect("in-domain");
        }
    }
    for (l, mm, n) in m.p_keys().collect::<Vec<_>>() {
        for &(x, y, z) in m.p_set(l, mm, n).expect("listed key") {
            out.add_p(l, mm, n, (perm[x], perm[y], perm[z])).expect("in-domain");
        }
    }
    out
}

/// A deliberately damaged structure together with the exact set of schemas
/// its damage violates.
#[derive(Debug, Clone)]
pub struct MutationFixture {
    pub name: &'static str,
    /// The schema the mutation is aimed at.
    pub target: AxiomId,
    /// Every schema the mutated structure fails — the smallest set any
    /// structure failing the target can fail.
    pub expected_failures: BTreeSet<AxiomId>,
    /// Why the expected set is larger than the target alone, when it is.
    pub note: Option<&'static str>,
    pub structure: LpStructure,
}

impl MutationFixture {
    pub fn is_isolated(&self) -> bool {
        self.expected_failures.len() == 1
    }
}

fn axiom(i: u8) -> AxiomId {
    AxiomId::new(i).expect("fixture axiom ids are in range")
}

/// Builds a structure from per-element label sets and a total binary
/// operation, recording `(x, y, op(x,y))` under every label combination the
/// language admits.
fn closure_structure(
    p: u64,
    n: usize,
    zero: usize,
    labels: &[Vec<u32>],
    op: impl Fn(usize, usize) -> usize,
) -> Result<LpStructure, Error> {
    let mut m = LpStructure::new(p, n, zero)?;
    for (x, ls) in labels.iter().enumerate() {
        for &l in ls {
            m.add_r(l, x)?;
        }
    }
    for x in 0..n {
        for y in 0..n {
            let z = op(x, y);
            for &l in &labels[x] {
                for &mm in &labels[y] {
                    for &ann in &labels[z] {
                        if ann <= l.max(mm) {
                            m.add_p(l, mm, ann, (x, y, z))?;
                        }
                    }
                }
            }
        }
    }
    Ok(m)
}

fn z2() -> ExplicitPGroup {
    ExplicitPGroup::new(2, vec![1], 0).expect("order-2 group")
}

fn z4() -> ExplicitPGroup {
    ExplicitPGroup::new(2, vec![2], 0).expect("order-4 group")
}

/// Aimed at schema 1: a spurious triple whose first coordinate carries the
/// wrong label. The triple is not chain-shaped, never consulted by the
/// label-driven schemas, and its mirror check is vacuous.
fn fixture_a1() -> MutationFixture {
    let mut m = encode(&z2(), 0).expect("finite");
    m.add_p(1, 1, 1, (0, 1, 1)).expect("valid key");
    MutationFixture {
        name: "mislabeled-triple",
        target: axiom(1),
        expected_failures: BTreeSet::from([axiom(1)]),
        note: None,
        structure: m,
    }
}

/// Aimed at schema 2: the nonzero point additionally joins `R0`, and the
/// relation triples are closed under every label combination so that
/// totality, identity, inverse, and associativity instances over the
/// enlarged labels all still hold. Only the "R0 holds exactly at the
/// distinguished point" clause is violated.
fn fixture_a2() -> MutationFixture {
    let labels = vec![vec![0], vec![0, 1]];
    let m = closure_structure(2, 2, 0, &labels, |x, y| x ^ y).expect("well formed");
    MutationFixture {
        name: "identity-label-leak",
        target: axiom(2),
        expected_failures: BTreeSet::from([axiom(2)]),
        note: None,
        structure: m,
    }
}

/// Aimed at schema 3: a second, conflicting result for one pair, annotated
/// consistently so every other schema still passes.
fn fixture_a3() -> MutationFixture {
    let mut m = encode(&z4(), 0).expect("finite");
    m.add_p(2, 2, 0, (1, 1, 0)).expect("valid key");
    MutationFixture {
        name: "double-valued-sum",
        target: axiom(3),
        expected_failures: BTreeSet::from([axiom(3)]),
        note: None,
        structure: m,
    }
}

/// Aimed at schema 4: one pair loses its sum (in both orders, keeping the
/// mirror schema intact). A totality gap at (x, y) is also an associativity
/// gap at (x, y, z) for any labeled z, because the square's first conjunct
/// quantifies over the same missing results — so the associativity schema
/// necessarily fails alongside totality.
fn fixture_a4() -> MutationFixture {
    let mut m = encode(&z4(), 0).expect("finite");
    m.remove_p(2, 1, 2, (1, 2, 3));
    m.remove_p(1, 2, 2, (2, 1, 3));
    MutationFixture {
        name: "missing-sum",
        target: axiom(4),
        expected_failures: BTreeSet::from([axiom(4), axiom(7)]),
        note: Some(
            "a totality gap cannot occur alone: the associativity square over the gapped \
             pair has no first edge, so schema 7 fails at the same elements",
        ),
        structure: m,
    }
}

/// Aimed at schema 5: the identity sums 0+g and g+0 are rewired to the
/// wrong (but consistently labeled) result 0. The decoded operation is the
/// constant-zero map on those pairs, which stays total, single-valued,
/// commutative, and associative-square-satisfiable.
fn fixture_a5() -> MutationFixture {
    let mut m = encode(&z2(), 0).expect("finite");
    m.remove_p(0, 1, 1, (0, 1, 1));
    m.remove_p(1, 0, 1, (1, 0, 1));
    m.add_p(0, 1, 0, (0, 1, 0)).expect("valid key");
    m.add_p(1, 0, 0, (1, 0, 0)).expect("valid key");
    MutationFixture {
        name: "broken-identity",
        target: axiom(5),
        expected_failures: BTreeSet::from([axiom(5)]),
        note: None,
        structure: m,
    }
}

/// Aimed at schema 6: a four-point structure whose operation gives every
/// element except `a` an inverse. Since the remaining schemas of any
/// inverse-free structure cannot all hold (they jointly force a group, and
/// finite torsion monoids with cancellation have inverses), the operation
/// here is non-associative at one triple, and schema 7 fails with it.
fn fixture_a6() -> MutationFixture {
    // Elements 0, a=1, s=2, b=3; labels R2={a}, R1={s,b}.
    // a+a=s, a+s=b, a+b=s, s+s=0, s+b=0, b+b=0; no pair sums a with
    // anything to 0.
    let labels = vec![vec![0], vec![2], vec![1], vec![1]];
    let op = |x: usize, y: usize| -> usize {
        match (x.min(y), x.max(y)) {
            (0, t) => t,
            (1, 1) => 2,
            (1, 2) => 3,
            (1, 3) => 2,
            _ => 0,
        }
    };
    let m = closure_structure(2, 4, 0, &labels, op).expect("well formed");
    MutationFixture {
        name: "missing-inverse",
        target: axiom(6),
        expected_failures: BTreeSet::from([axiom(6), axiom(7)]),
        note: Some(
            "an inverse gap cannot occur alone: the other schemas derive inverses for every \
             labeled element, so any structure failing schema 6 also fails schema 7",
        ),
        structure: m,
    }
}

/// Aimed at schema 7: a commutative, total, single-valued operation on four
/// points that simply fails to be associative at (a, b, c).
fn fixture_a7() -> MutationFixture {
    let labels = vec![vec![0], vec![1], vec![1], vec![1]];
    let op = |x: usize, y: usize| -> usize {
        match (x.min(y), x.max(y)) {
            (0, t) => t,
            (1, 2) => 3,
            (1, 3) => 2,
            (2, 3) => 3,
            _ => 0, // diagonal
        }
    };
    let m = closure_structure(2, 4, 0, &labels, op).expect("well formed");
    MutationFixture {
        name: "non-associative-magma",
        target: axiom(7),
        expected_failures: BTreeSet::from([axiom(7)]),
        note: None,
        structure: m,
    }
}

/// Aimed at schema 8: the quaternion unit group, whose multiplication is
/// total, single-valued, associative, unital, inverse-complete, and
/// annotation-consistent — but not commutative.
fn fixture_a8() -> MutationFixture {
    // Indices: 1 -> 0, -1 -> 1, i -> 2, -i -> 3, j -> 4, -j -> 5, k -> 6,
    // -k -> 7. Encoded as (axis, sign) with axis 0 for the scalars.
    let to_index = |axis: usize, neg: bool| -> usize {
        if axis == 0 {
            neg as usize
        } else {
            2 * axis + neg as usize
        }
    };
    let from_index = |x: usize| -> (usize, bool) {
        if x < 2 {
            (0, x == 1)
        } else {
            (x / 2, x % 2 == 1)
        }
    };
    let op = move |x: usize, y: usize| -> usize {
        let (ax, nx) = from_index(x);
        let (ay, ny) = from_index(y);
        let (axis, extra_neg) = match (ax, ay) {
            (0, a) | (a, 0) => (a, false),
            (a, b) if a == b => (0, true), // i*i = j*j = k*k = -1
            (a, b) => {
                // Cyclic: i*j=k, j*k=i, k*i=j; reversed order negates.
                let forward = (a % 3) + 1 == b || (a, b) == (3, 1);
                let axis = 6 - a - b;
                (axis, !forward)
            }
        };
        to_index(axis, nx ^ ny ^ extra_neg)
    };
    let labels: Vec<Vec<u32>> =
        (0..8).map(|x| vec![if x == 0 { 0 } else if x == 1 { 1 } else { 2 }]).collect();
    let m = closure_structure(2, 8, 0, &labels, op).expect("well formed");
    MutationFixture {
        name: "quaternion-table",
        target: axiom(8),
        expected_failures: BTreeSet::from([axiom(8)]),
        note: None,
        structure: m,
    }
}

/// One fixture per schema, in schema order.
pub fn mutation_fixtures() -> Vec<MutationFixture> {
    vec![
        fixture_a1(),
        fixture_a2(),
        fixture_a3(),
        fixture_a4(),
        fixture_a5(),
        fixture_a6(),
        fixture_a7(),
        fixture_a8(),
    ]
}
