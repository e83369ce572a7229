//! Evaluation of the rank-bounded group formulas over explicit groups: the
//! height formulas `psi[a]` (membership in the filtration subgroup at stage
//! `a`), the layer-dimension formulas `phi[a,>=n]` / `phi[a,=n]`, and the
//! divisible-rank sentence batteries `divrank[=n]` / `divrank[inf]`.
//!
//! Evaluation is literal where finitely possible: `psi` chases p-th-root
//! witnesses through the actual preimage sets, and `phi` searches socle
//! tuples against the independence clauses. Infinite conjunctions and
//! quantifiers over infinite domains are truncated at documented bounds, and
//! every bounded evaluation reports the bound it used.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::ordinal::{ExtendedCount, Ordinal};
use crate::pgroup::{ExplicitPGroup, GroupElement, PruferCoord};

/// Truncation point for the infinite-conjunction batteries.
pub const DEFAULT_OMEGA_CAP: u64 = 8;

/// Identifier of a formula in one of the supported families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaId {
    /// `psi[a]`: one free variable; defines the filtration subgroup at `a`.
    Psi(Ordinal),
    /// `phi[a,>=n]`: the layer at `a` has dimension at least `n`.
    PhiGeq(Ordinal, u64),
    /// `phi[a,=n]` / `phi[a,=w]`: the layer at `a` has dimension exactly `n`.
    PhiExact(Ordinal, ExtendedCount),
    /// `divrank[=n]`: the divisible part has rank exactly `n`.
    DivRankExact(u64),
    /// `divrank[inf]`: arbitrarily large independent divisible families.
    DivRankInfinite,
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaId::Psi(a) => write!(f, "psi[{a}]"),
            FormulaId::PhiGeq(a, n) => write!(f, "phi[{a},>={n}]"),
            FormulaId::PhiExact(a, n) => write!(f, "phi[{a},={n}]"),
            FormulaId::DivRankExact(n) => write!(f, "divrank[={n}]"),
            FormulaId::DivRankInfinite => write!(f, "divrank[inf]"),
        }
    }
}

impl FromStr for FormulaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let body = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|t| t.strip_prefix('['))
                .and_then(|t| t.strip_suffix(']'))
        };
        if let Some(b) = body("psi") {
            return Ok(FormulaId::Psi(b.parse()?));
        }
        if let Some(b) = body("phi") {
            let (a, rest) = b
                .split_once(',')
                .ok_or_else(|| Error::parse("formula", "phi needs two parameters"))?;
            let alpha: Ordinal = a.parse()?;
            if let Some(n) = rest.strip_prefix(">=") {
                let n = n.parse::<u64>().map_err(|_| Error::parse("formula", "bad phi count"))?;
                return Ok(FormulaId::PhiGeq(alpha, n));
            }
            if let Some(n) = rest.strip_prefix('=') {
                return Ok(FormulaId::PhiExact(alpha, n.parse()?));
            }
            return Err(Error::parse("formula", "phi second parameter needs >= or ="));
        }
        if let Some(b) = body("divrank") {
            if b == "inf" {
                return Ok(FormulaId::DivRankInfinite);
            }
            if let Some(n) = b.strip_prefix('=') {
                let n = n.parse::<u64>().map_err(|_| Error::parse("formula", "bad divrank"))?;
                return Ok(FormulaId::DivRankExact(n));
            }
            return Err(Error::parse("formula", "divrank needs =n or inf"));
        }
        Err(Error::parse("formula", format!("unrecognized formula {s:?}")))
    }
}

/// Outcome of one bounded evaluation, with every bound made explicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub formula: FormulaId,
    pub group: String,
    /// Denominator-exponent bound on quantifier domains, when one applies.
    pub bound: Option<u32>,
    /// Truncation cap for infinite conjunctions, when one applies.
    pub cap: Option<u64>,
    pub verdict: bool,
    pub witness: Option<String>,
    /// True when an infinite conjunction was cut off at `cap`.
    pub truncated: bool,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "formula: {}", self.formula)?;
        writeln!(f, "group: {}", self.group)?;
        if let Some(b) = self.bound {
            writeln!(f, "bound: denom<={b}")?;
        }
        if let Some(c) = self.cap {
            writeln!(f, "cap: {c}")?;
        }
        write!(f, "verdict: {}", self.verdict)?;
        if let Some(w) = &self.witness {
            write!(f, "\nwitness: {w}")?;
        }
        if self.truncated {
            write!(f, "\nnote: infinite conjunction truncated at the stated cap")?;
        } else if self.bound.is_some() {
            write!(f, "\nnote: universal quantifiers sampled up to the stated bound")?;
        }
        Ok(())
    }
}

/// Literal evaluation of the height formula at `alpha` on `x`: stage 0 is
/// trivially true, successor stages search the finite p-th-root preimage set,
/// and limit stages use stabilization — on explicit groups the filtration is
/// constant from the length onward, so any stage at or beyond the length
/// evaluates at the length. The search factors over the cyclic/divisible
/// product: root chains in the divisible coordinates are constructed
/// directly (they always exist), while the cyclic factor is chased through
/// its literal preimage sets with memoization.
pub fn eval_psi(g: &ExplicitPGroup, alpha: &Ordinal, x: &GroupElement) -> Result<bool, Error> {
    g.validate_element(x)?;
    let level = stage_level(g, alpha);
    // Divisible factor: construct the root chain coordinate by coordinate.
    // Each step replaces num/p^e by num/p^(e+1), a literal p-th root.
    let mut div_coords: Vec<PruferCoord> = x.prufer.clone();
    for _ in 0..level {
        div_coords = div_coords
            .iter()
            .map(|c| {
                if c.num == 0 {
                    PruferCoord::ZERO
                } else {
                    PruferCoord { num: c.num, den_exp: c.den_exp + 1 }
                }
            })
            .collect();
    }
    // Cyclic factor: literal chain search in the torsion shadow, on packed
    // coordinate indices so a node costs arithmetic instead of allocation.
    let shadow = PackedShadow::of(g);
    Ok(shadow.chain_search(level, shadow.pack(&x.cyclic)))
}

/// The effective chain depth for a stage: finite stages cap at the group
/// length (the filtration stabilizes there), and limit stages evaluate by
/// stabilization at the same point.
fn stage_level(g: &ExplicitPGroup, alpha: &Ordinal) -> u64 {
    let len = g.exps().first().copied().unwrap_or(0) as u64;
    match alpha.as_finite() {
        Some(n) => n.min(len),
        None => len,
    }
}

/// The torsion shadow of an explicit group with its cyclic coordinate vectors
/// packed into mixed-radix indices (coordinate `i` is a digit of radix
/// `p^exps[i]`; the construction bound keeps the product inside a `u64`).
struct PackedShadow {
    p: u64,
    /// Radix of each coordinate.
    radices: Vec<u64>,
    /// Packed-index weight of each coordinate: `strides[i] = Π_{j<i} radices[j]`.
    strides: Vec<u64>,
}

impl PackedShadow {
    fn of(g: &ExplicitPGroup) -> PackedShadow {
        let p = g.p();
        let mut radices = Vec::with_capacity(g.exps().len());
        let mut strides = Vec::with_capacity(g.exps().len());
        let mut stride = 1u64;
        for &k in g.exps() {
            let r = (0..k).fold(1u64, |a, _| a * p);
            radices.push(r);
            strides.push(stride);
            stride *= r;
        }
        PackedShadow { p, radices, strides }
    }

    fn size(&self) -> u64 {
        self.radices.iter().product()
    }

    fn pack(&self, coords: &[u64]) -> u64 {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Multiplication by p on a packed index.
    fn mult_p(&self, x: u64) -> u64 {
        let mut out = 0;
        let mut rem = x;
        for (&r, &s) in self.radices.iter().zip(&self.strides) {
            let digit = rem % r;
            rem /= r;
            out += (digit * self.p % r) * s;
        }
        out
    }

    /// Literal p-th-root chain search of depth `n` starting at `x`: the
    /// preimage set of `x` is empty unless every digit is a multiple of `p`,
    /// and otherwise consists of the per-coordinate roots
    /// `x_i/p + t_i·(r_i/p)` for `t_i < p`, visited exhaustively.
    fn chain_search(&self, n: u64, x: u64) -> bool {
        if n == 0 {
            return true;
        }
        let mut base = 0;
        let mut rem = x;
        for (&r, &s) in self.radices.iter().zip(&self.strides) {
            let digit = rem % r;
            rem /= r;
            if digit % self.p != 0 {
                return false;
            }
            base += (digit / self.p) * s;
        }
        self.root_combos(n, 0, base)
    }

    /// Walks the per-coordinate root choices of one preimage step, then
    /// recurses into the next chain level for each completed preimage.
    fn root_combos(&self, n: u64, coord: usize, partial: u64) -> bool {
        if coord == self.radices.len() {
            return self.chain_search(n - 1, partial);
        }
        let step = (self.radices[coord] / self.p) * self.strides[coord];
        (0..self.p).any(|t| self.root_combos(n, coord + 1, partial + t * step))
    }

    /// The packed index set of the filtration cut at the given depth,
    /// computed by iterated forward images (`S_0` is everything,
    /// `S_{k+1} = p·S_k`). Only sensible for shadows small enough to list;
    /// the result is sorted for binary-search membership.
    fn level_cut(&self, level: u64) -> Vec<u64> {
        let mut cur: Vec<u64> = (0..self.size()).collect();
        for _ in 0..level {
            cur = self.image(&cur);
        }
        cur
    }

    /// Forward image of a sorted packed-index set under multiplication by p.
    fn image(&self, cut: &[u64]) -> Vec<u64> {
        let mut next: Vec<u64> = cut.iter().map(|&x| self.mult_p(x)).collect();
        next.sort_unstable();
        next.dedup();
        next
    }
}

/// The layer at `alpha` has dimension at least `n`: searches socle tuples
/// satisfying the height clause at `alpha` whose nonzero combinations all
/// avoid the height clause at `alpha + 1`.
pub fn eval_phi_geq(g: &ExplicitPGroup, alpha: &Ordinal, n: u64) -> Result<bool, Error> {
    Ok(phi_geq_witness(g, alpha, n)?.is_some())
}

/// Witness-returning variant; `Some(tuple)` contains one satisfying tuple
/// (empty for n = 0).
pub fn phi_geq_witness(
    g: &ExplicitPGroup,
    alpha: &Ordinal,
    n: u64,
) -> Result<Option<Vec<GroupElement>>, Error> {
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let socle = g.socle();
    // Classify the socle against the filtration cuts at `alpha` and
    // `alpha + 1` in one pass over shared cut sets (per-element chain
    // searches when the shadow is too large to list). Divisible coordinates
    // never obstruct a root chain, so membership is decided by the cyclic
    // part, exactly as in `eval_psi`.
    let shadow = PackedShadow::of(g);
    let lo_level = stage_level(g, alpha);
    let hi_level = stage_level(g, &alpha.succ());
    let mut upper: BTreeSet<GroupElement> = BTreeSet::new();
    let mut lower: BTreeSet<GroupElement> = BTreeSet::new();
    if shadow.size() <= 1 << 16 {
        let lo_cut = shadow.level_cut(lo_level);
        let mut hi_cut = lo_cut.clone();
        for _ in lo_level..hi_level {
            hi_cut = shadow.image(&hi_cut);
        }
        for s in socle {
            let idx = shadow.pack(&s.cyclic);
            if hi_cut.binary_search(&idx).is_ok() {
                upper.insert(s);
            } else if lo_cut.binary_search(&idx).is_ok() {
                lower.insert(s);
            }
        }
    } else {
        for s in socle {
            let idx = shadow.pack(&s.cyclic);
            if shadow.chain_search(hi_level, idx) {
                upper.insert(s);
            } else if shadow.chain_search(lo_level, idx) {
                lower.insert(s);
            }
        }
    }
    if (n as usize) > lower.len() {
        return Ok(None);
    }
    // Every clause in the matrix is invariant under translating any x_i by a
    // member of `upper` (the socle elements satisfying the height clause at
    // alpha + 1): the height clauses define subgroups, and the combination
    // sums shift by an `upper` element. A satisfying tuple therefore exists
    // iff one exists among canonical coset representatives modulo `upper`,
    // with all representatives distinct.
    let mut reps: Vec<GroupElement> = Vec::new();
    let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
    for c in &lower {
        let key = coset_min(g, c, &upper);
        if seen.insert(key.clone()) {
            reps.push(key);
        }
    }
    reps.sort();
    let mut chosen: Vec<GroupElement> = Vec::new();
    if phi_dfs(g, &reps, &upper, n as usize, 0, &mut chosen) {
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

fn coset_min(g: &ExplicitPGroup, x: &GroupElement, sub: &BTreeSet<GroupElement>) -> GroupElement {
    let mut best = x.clone();
    for w in sub {
        let cand = g.add(x, w).expect("socle arithmetic");
        if cand < best {
            best = cand;
        }
    }
    best
}

fn phi_dfs(
    g: &ExplicitPGroup,
    reps: &[GroupElement],
    upper: &BTreeSet<GroupElement>,
    n: usize,
    start: usize,
    chosen: &mut Vec<GroupElement>,
) -> bool {
    if chosen.len() == n {
        return true;
    }
    for i in start..reps.len() {
        chosen.push(reps[i].clone());
        if combos_avoid_upper(g, chosen, upper) && phi_dfs(g, reps, upper, n, i + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Checks the combination clauses that involve the most recent tuple member:
/// no combination with a nonzero last coefficient may land in `upper`.
/// Earlier combinations were checked at earlier depths.
fn combos_avoid_upper(
    g: &ExplicitPGroup,
    tuple: &[GroupElement],
    upper: &BTreeSet<GroupElement>,
) -> bool {
    let p = g.p();
    let j = tuple.len();
    let prefix = j - 1;
    let mut coeffs = vec![0u64; prefix];
    loop {
        let mut partial = g.zero();
        for (c, x) in coeffs.iter().zip(tuple.iter()) {
            let term = g.scalar_mul(*c, x).expect("socle arithmetic");
            partial = g.add(&partial, &term).expect("socle arithmetic");
        }
        for c_last in 1..p {
            let term = g.scalar_mul(c_last, &tuple[j - 1]).expect("socle arithmetic");
            let total = g.add(&partial, &term).expect("socle arithmetic");
            if upper.contains(&total) {
                return false;
            }
        }
        // Odometer over the prefix coefficients.
        let mut i = 0;
        loop {
            if i == prefix {
                return true;
            }
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// The layer at `alpha` has dimension exactly `n`. The `w` case is the
/// infinite conjunction of all the `>=` formulas; explicit groups refute it
/// at a finite stage, found by scanning upward.
pub fn eval_phi_exact(g: &ExplicitPGroup, alpha: &Ordinal, n: &ExtendedCount) -> Result<bool, Error> {
    match n {
        ExtendedCount::Finite(n) => {
            Ok(eval_phi_geq(g, alpha, *n)? && !eval_phi_geq(g, alpha, n + 1)?)
        }
        ExtendedCount::Omega => {
            // Layer dimensions of explicit groups are bounded by the socle
            // rank, so the conjunction fails by that stage at the latest.
            let hard_stop = (g.exps().len() + g.div_rank() as usize + 1) as u64;
            for m in 1..=hard_stop {
                if !eval_phi_geq(g, alpha, m)? {
                    return Ok(false);
                }
            }
            unreachable!("layer dimension exceeded the socle rank");
        }
    }
}

/// Divisible-rank sentences. For finite `n`, evaluates the exact-rank
/// sentence: some n-tuple from the divisible socle is independent under all
/// fractional-coefficient combinations, and spans every divisible element.
/// For `n = w`, evaluates the unbounded battery: independent m-tuples exist
/// for every m up to `cap` (spanning is not asserted), with the truncation
/// recorded. Scalar terms `c/p^k * x` are read existentially: any divisible
/// `w` with `p^k * w = c * x`; the `c = 0` term denotes zero.
///
/// Witness equations over explicit groups are decided exactly by denominator
/// comparison, so the bound `E` only samples the universal quantifier over
/// `y`; `E >= 1` already sees every socle direction, making the verdict
/// exact for explicit groups.
pub fn eval_divisible_sentence(
    g: &ExplicitPGroup,
    n: &ExtendedCount,
    denom_bound: u32,
) -> Result<EvalReport, Error> {
    eval_divisible_with_cap(g, n, denom_bound, DEFAULT_OMEGA_CAP)
}

pub fn eval_divisible_with_cap(
    g: &ExplicitPGroup,
    n: &ExtendedCount,
    denom_bound: u32,
    cap: u64,
) -> Result<EvalReport, Error> {
    if denom_bound < 1 {
        return Err(Error::invalid("eval_divisible_sentence", "denominator bound must be >= 1"));
    }
    let candidates = divisible_socle(g);
    match n {
        ExtendedCount::Finite(n) => {
            let (verdict, witness) = finite_battery(g, *n, &candidates, denom_bound)?;
            Ok(EvalReport {
                formula: FormulaId::DivRankExact(*n),
                group: g.to_string(),
                bound: Some(denom_bound),
                cap: None,
                verdict,
                witness,
                truncated: false,
            })
        }
        ExtendedCount::Omega => {
            let mut chosen: Vec<GroupElement> = Vec::new();
            let verdict =
                independent_tuple_dfs(g, &candidates, denom_bound, cap as usize, 0, &mut chosen);
            let witness = if verdict { Some(format_tuple(g, &chosen)) } else { None };
            Ok(EvalReport {
                formula: FormulaId::DivRankInfinite,
                group: g.to_string(),
                bound: Some(denom_bound),
                cap: Some(cap),
                verdict,
                witness,
                truncated: true,
            })
        }
    }
}

/// Nonzero socle elements of the divisible part.
fn divisible_socle(g: &ExplicitPGroup) -> Vec<GroupElement> {
    g.socle()
        .into_iter()
        .filter(|s| !s.is_zero() && s.cyclic.iter().all(|&c| c == 0))
        .collect()
}

fn finite_battery(
    g: &ExplicitPGroup,
    n: u64,
    candidates: &[GroupElement],
    e: u32,
) -> Result<(bool, Option<String>), Error> {
    let n = n as usize;
    let targets = divisible_elements_up_to(g, e);
    if n == 0 {
        // Empty tuple: combinations denote zero, so spanning says every
        // sampled divisible element is zero.
        return Ok((targets.iter().all(|y| y.is_zero()), None));
    }
    if n > candidates.len() {
        return Ok((false, None));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    loop {
        let tuple: Vec<GroupElement> = indices.iter().map(|&i| candidates[i].clone()).collect();
        if tuple_independent(g, &tuple, e) && tuple_spans(g, &tuple, &targets, e) {
            return Ok((true, Some(format_tuple(g, &tuple))));
        }
        // Next combination in lexicographic order: advance the rightmost
        // index that still has room for the indices after it.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok((false, None));
            }
            i -= 1;
            if indices[i] + (n - i) < candidates.len() {
                indices[i] += 1;
                for j in i + 1..n {
                    indices[j] = indices[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn independent_tuple_dfs(
    g: &ExplicitPGroup,
    candidates: &[GroupElement],
    e: u32,
    target: usize,
    start: usize,
    chosen: &mut Vec<GroupElement>,
) -> bool {
    if chosen.len() == target {
        return true;
    }
    for i in start..candidates.len() {
        chosen.push(candidates[i].clone());
        if tuple_independent(g, chosen, e)
            && independent_tuple_dfs(g, candidates, e, target, i + 1, chosen)
        {
            return true;
        }
        chosen.pop();
    }
    false
}

/// No combination with coefficients `c_i < p` (not all zero) and exponents
/// `k_i <= E` contains zero. The combination is the set-sum of the value
/// sets of the terms `c_i/p^(k_i) * x_i`; zero lies in it iff the sum of the
/// canonical term values has denominator exponent at most max k_i over the
/// nonzero coefficients.
fn tuple_independent(g: &ExplicitPGroup, tuple: &[GroupElement], e: u32) -> bool {
    let p = g.p();
    let n = tuple.len();
    let mut c = vec![0u64; n];
    'combo: loop {
        // Advance the coefficient odometer, skipping the all-zero vector.
        let mut i = 0;
        loop {
            if i == n {
                return true;
            }
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
            i += 1;
        }
        let mut k = vec![0u32; n];
        loop {
            let mut sum = g.zero();
            let mut max_k = 0;
            for i in 0..n {
                if c[i] != 0 {
                    let term = canonical_fraction(g, c[i], k[i], &tuple[i]);
                    sum = g.add(&sum, &term).expect("divisible arithmetic");
                    max_k = max_k.max(k[i]);
                }
            }
            if den_exp(&sum) <= max_k {
                return false;
            }
            // Advance the exponent odometer.
            let mut i = 0;
            loop {
                if i == n {
                    continue 'combo;
                }
                k[i] += 1;
                if k[i] <= e {
                    break;
                }
                k[i] = 0;
                i += 1;
            }
        }
    }
}

/// Every sampled divisible element is a combination value for some
/// coefficients and exponents within the bound.
fn tuple_spans(g: &ExplicitPGroup, tuple: &[GroupElement], targets: &[GroupElement], e: u32) -> bool {
    targets.iter().all(|y| spans_one(g, tuple, y, e))
}

fn spans_one(g: &ExplicitPGroup, tuple: &[GroupElement], y: &GroupElement, e: u32) -> bool {
    let p = g.p();
    let n = tuple.len();
    let mut c = vec![0u64; n];
    loop {
        let nonzero: Vec<usize> = (0..n).filter(|&i| c[i] != 0).collect();
        if nonzero.is_empty() {
            if y.is_zero() {
                return true;
            }
        } else {
            let mut k = vec![0u32; n];
            loop {
                let mut sum = g.zero();
                let mut max_k = 0;
                for &i in &nonzero {
                    let term = canonical_fraction(g, c[i], k[i], &tuple[i]);
                    sum = g.add(&sum, &term).expect("divisible arithmetic");
                    max_k = max_k.max(k[i]);
                }
                let diff = g.sub(y, &sum).expect("divisible arithmetic");
                if den_exp(&diff) <= max_k {
                    return true;
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    k[i] += 1;
                    if k[i] <= e {
                        break;
                    }
                    k[i] = 0;
                    i += 1;
                }
                if k.iter().all(|&ki| ki == 0) {
                    break;
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
            i += 1;
        }
    }
}

/// Canonical value of the term `c/p^k * x` for a divisible `x` and `c != 0`:
/// divide each coordinate's reduced fraction by p^k. Any other value differs
/// by a kernel element, which the membership formulas account for.
fn canonical_fraction(g: &ExplicitPGroup, c: u64, k: u32, x: &GroupElement) -> GroupElement {
    let scaled = g.scalar_mul(c, x).expect("divisible arithmetic");
    let prufer = scaled
        .prufer
        .iter()
        .map(|co| {
            if co.num == 0 {
                PruferCoord::ZERO
            } else {
                PruferCoord { num: co.num, den_exp: co.den_exp + k }
            }
        })
        .collect();
    GroupElement { cyclic: scaled.cyclic, prufer }
}

fn den_exp(x: &GroupElement) -> u32 {
    x.prufer.iter().map(|c| c.den_exp).max().unwrap_or(0)
}

/// All divisible elements with denominator exponent at most `e` (the sampled
/// range of the universal quantifier).
fn divisible_elements_up_to(g: &ExplicitPGroup, e: u32) -> Vec<GroupElement> {
    let shadow = ExplicitPGroup::new(g.p(), Vec::new(), g.div_rank())
        .expect("divisible shadow group is well formed");
    shadow
        .enumerate(e)
        .into_iter()
        .map(|x| GroupElement { cyclic: vec![0; g.exps().len()], prufer: x.prufer })
        .collect()
}

fn format_tuple(g: &ExplicitPGroup, tuple: &[GroupElement]) -> String {
    tuple
        .iter()
        .enumerate()
        .map(|(i, x)| format!("x{}={}", i + 1, g.format_element(x)))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Report builders: uniform structured output for each family.
pub fn report_psi(g: &ExplicitPGroup, alpha: &Ordinal, x: &GroupElement) -> Result<EvalReport, Error> {
    let verdict = eval_psi(g, alpha, x)?;
    Ok(EvalReport {
        formula: FormulaId::Psi(alpha.clone()),
        group: g.to_string(),
        bound: None,
        cap: None,
        verdict,
        witness: Some(format!("x={}", g.format_element(x))),
        truncated: false,
    })
}

pub fn report_phi_geq(g: &ExplicitPGroup, alpha: &Ordinal, n: u64) -> Result<EvalReport, Error> {
    let witness = phi_geq_witness(g, alpha, n)?;
    Ok(EvalReport {
        formula: FormulaId::PhiGeq(alpha.clone(), n),
        group: g.to_string(),
        bound: None,
        cap: None,
        verdict: witness.is_some(),
        witness: witness.filter(|w| !w.is_empty()).map(|w| format_tuple(g, &w)),
        truncated: false,
    })
}

pub fn report_phi_exact(
    g: &ExplicitPGroup,
    alpha: &Ordinal,
    n: &ExtendedCount,
) -> Result<EvalReport, Error> {
    let verdict = eval_phi_exact(g, alpha, n)?;
    Ok(EvalReport {
        formula: FormulaId::PhiExact(alpha.clone(), *n),
        group: g.to_string(),
        bound: None,
        cap: None,
        verdict,
        witness: None,
        truncated: false,
    })
}
