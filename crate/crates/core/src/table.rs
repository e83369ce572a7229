//! Finite abelian groups presented as Cayley tables.
//!
//! A table is validated on construction: identity, commutativity,
//! associativity, and inverses are all checked exactly. Associativity uses
//! Light's test — associativity over a generating set implies associativity
//! everywhere — which costs O(g * n^2) for g greedy generators instead of
//! O(n^3) over all triples.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::pgroup::{is_prime, ExplicitPGroup};

/// A finite abelian group as an `n x n` addition table over indices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementTableGroup {
    n: usize,
    zero: usize,
    add: Vec<u32>,
}

impl ElementTableGroup {
    /// Validates and wraps an addition table given in row-major order.
    pub fn new(n: usize, zero: usize, add: Vec<u32>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::BadTable("empty carrier".into()));
        }
        if zero >= n {
            return Err(Error::BadTable(format!("zero index {zero} out of range")));
        }
        if add.len() != n * n {
            return Err(Error::BadTable(format!(
                "table has {} entries, expected {}",
                add.len(),
                n * n
            )));
        }
        if let Some(&bad) = add.iter().find(|&&v| v as usize >= n) {
            return Err(Error::BadTable(format!("entry {bad} out of range")));
        }
        let t = ElementTableGroup { n, zero, add };
        for x in 0..n {
            if t.add(zero, x) != x {
                return Err(Error::BadTable(format!("0 + {x} = {}, not {x}", t.add(zero, x))));
            }
            if t.add(x, zero) != x {
                return Err(Error::BadTable(format!("{x} + 0 = {}, not {x}", t.add(x, zero))));
            }
        }
        for x in 0..n {
            for y in (x + 1)..n {
                if t.add(x, y) != t.add(y, x) {
                    return Err(Error::BadTable(format!("{x} + {y} != {y} + {x}")));
                }
            }
        }
        t.check_associativity()?;
        for x in 0..n {
            if !(0..n).any(|y| t.add(x, y) == zero) {
                return Err(Error::BadTable(format!("{x} has no inverse")));
            }
        }
        Ok(t)
    }

    /// Light's associativity test. Picks generators greedily: repeatedly take
    /// the least element outside the current closure and close under the
    /// candidate operation. With an identity present, checking
    /// `x + (a + y) = (x + a) + y` for every generator `a` certifies full
    /// associativity.
    fn check_associativity(&self) -> Result<(), Error> {
        let n = self.n;
        let mut generators = Vec::new();
        let mut closed = vec![false; n];
        closed[self.zero] = true;
        let mut frontier = vec![self.zero];
        loop {
            let Some(g) = (0..n).find(|&i| !closed[i]) else { break };
            generators.push(g);
            closed[g] = true;
            frontier.push(g);
            while let Some(x) = frontier.pop() {
                for y in 0..n {
                    if closed[y] {
                        let s = self.add(x, y);
                        if !closed[s] {
                            closed[s] = true;
                            frontier.push(s);
                        }
                        let s = self.add(y, x);
                        if !closed[s] {
                            closed[s] = true;
                            frontier.push(s);
                        }
                    }
                }
            }
        }
        for &a in &generators {
            for x in 0..n {
                let xa = self.add(x, a);
                for y in 0..n {
                    if self.add(x, self.add(a, y)) != self.add(xa, y) {
                        return Err(Error::BadTable(format!(
                            "({x} + {a}) + {y} != {x} + ({a} + {y})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.n + y] as usize
    }

    pub fn neg(&self, x: usize) -> usize {
        (0..self.n).find(|&y| self.add(x, y) == self.zero).expect("validated group has inverses")
    }

    pub fn scalar_mul(&self, k: u64, x: usize) -> usize {
        let mut acc = self.zero;
        for _ in 0..k {
            acc = self.add(acc, x);
        }
        acc
    }

    /// Exponent of the element order: least `e` with `p^e * x = 0`.
    pub fn elem_order_exp(&self, p: u64, x: usize) -> u32 {
        let mut cur = x;
        let mut e = 0;
        while cur != self.zero {
            cur = self.scalar_mul(p, cur);
            e += 1;
            debug_assert!(e as usize <= self.n + 1, "runaway order");
        }
        e
    }

    /// Image of a subset under multiplication by `p`.
    pub fn mult_p_image(&self, p: u64, subset: &BTreeSet<usize>) -> BTreeSet<usize> {
        subset.iter().map(|&x| self.scalar_mul(p, x)).collect()
    }

    /// Indices of elements killed by `p`.
    pub fn socle_set(&self, p: u64) -> BTreeSet<usize> {
        (0..self.n).filter(|&x| self.scalar_mul(p, x) == self.zero).collect()
    }

    /// Direct sum on index pairs `(i, j) -> i * other.len() + j`.
    pub fn direct_sum(&self, other: &ElementTableGroup) -> ElementTableGroup {
        let n = self.n * other.n;
        let mut add = vec![0u32; n * n];
        for a1 in 0..self.n {
            for b1 in 0..other.n {
                let x = a1 * other.n + b1;
                for a2 in 0..self.n {
                    for b2 in 0..other.n {
                        let y = a2 * other.n + b2;
                        add[x * n + y] = (self.add(a1, a2) * other.n + other.add(b1, b2)) as u32;
                    }
                }
            }
        }
        ElementTableGroup { n, zero: self.zero * other.n + other.zero, add }
    }

    /// Kernel-size route to the cyclic decomposition of a p-group table: the
    /// count of elements killed by `p^j` determines, layer by layer, how many
    /// summands have each exponent. Serves as an independent cross-check for
    /// the socle-dimension route used by the decoding pipeline.
    pub fn classify_by_kernels(&self, p: u64) -> Result<ExplicitPGroup, Error> {
        if !is_prime(p) {
            return Err(Error::invalid("classify", format!("p={p} is not prime")));
        }
        let total = self.n as u64;
        let mut acc = 1u64;
        while acc < total {
            acc *= p;
        }
        if acc != total {
            return Err(Error::BadTable(format!("order {total} is not a power of {p}")));
        }
        // killed[j] = log_p #{x : p^j x = 0}; the j-th increment counts
        // summands of exponent >= j.
        let mut killed_log = vec![0u32];
        let mut kernel_prev = 1u64;
        let mut cur: Vec<usize> = (0..self.n).collect();
        loop {
            cur = cur.iter().map(|&x| self.scalar_mul(p, x)).collect();
            let image: BTreeSet<usize> = cur.iter().copied().collect();
            let kernel = total / image.len() as u64;
            let mut lg = 0;
            let mut a = 1u64;
            while a < kernel {
                a *= p;
                lg += 1;
            }
            if a != kernel {
                return Err(Error::BadTable("kernel size is not a p-power".into()));
            }
            killed_log.push(lg);
            if kernel == kernel_prev || image.len() == 1 {
                if image.len() != 1 {
                    return Err(Error::BadTable("multiplication by p stalled before reaching 0".into()));
                }
                break;
            }
            kernel_prev = kernel;
        }
        let mut exps = Vec::new();
        for j in 1..killed_log.len() {
            let ge_j = killed_log[j] - killed_log[j - 1];
            let ge_j1 = if j + 1 < killed_log.len() { killed_log[j + 1] - killed_log[j] } else { 0 };
            for _ in 0..(ge_j - ge_j1) {
                exps.push(j as u32);
            }
        }
        let grp = ExplicitPGroup::new(p, exps, 0)?;
        debug_assert_eq!(grp.size().as_finite(), Some(total));
        Ok(grp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_table(n: usize) -> ElementTableGroup {
        let mut add = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                add[i * n + j] = ((i + j) % n) as u32;
            }
        }
        ElementTableGroup::new(n, 0, add).unwrap()
    }

    #[test]
    fn accepts_cyclic_groups() {
        for n in 1..=9 {
            let t = cyclic_table(n);
            assert_eq!(t.len(), n);
            assert_eq!(t.neg(1 % n), (n - 1) % n);
        }
    }

    #[test]
    fn rejects_bad_identity() {
        let add = vec![0, 0, 0, 0];
        let err = ElementTableGroup::new(2, 0, add).unwrap_err();
        assert!(err.to_string().contains("not"), "{err}");
    }

    #[test]
    fn rejects_noncommutative() {
        // The 2x2 "first projection" beyond the identity row/column.
        let add = vec![0, 1, 2, 1, 1, 2, 2, 2, 1];
        assert!(ElementTableGroup::new(3, 0, add).is_err());
    }

    #[test]
    fn rejects_nonassociative_via_lights_test() {
        // Commutative, identity at 0, but (1+1)+2 = 1+2 = 0 while
        // 1+(1+2) = 1+0 = 1.
        let add = vec![0, 1, 2, 1, 1, 0, 2, 0, 1];
        let err = ElementTableGroup::new(3, 0, add).unwrap_err();
        assert!(err.to_string().contains("+"), "{err}");
    }

    #[test]
    fn rejects_missing_inverse() {
        // max(x, y): associative, commutative, identity 0, but 1 has no inverse.
        let add = vec![0, 1, 1, 1];
        let err = ElementTableGroup::new(2, 0, add).unwrap_err();
        assert!(err.to_string().contains("inverse"), "{err}");
    }

    #[test]
    fn order_and_socle() {
        let z8 = cyclic_table(8);
        assert_eq!(z8.elem_order_exp(2, 0), 0);
        assert_eq!(z8.elem_order_exp(2, 4), 1);
        assert_eq!(z8.elem_order_exp(2, 1), 3);
        assert_eq!(z8.socle_set(2), BTreeSet::from([0, 4]));
    }

    #[test]
    fn direct_sum_table() {
        let z2 = cyclic_table(2);
        let z4 = cyclic_table(4);
        let t = z4.direct_sum(&z2);
        assert_eq!(t.len(), 8);
        assert_eq!(t.classify_by_kernels(2).unwrap().to_string(), "p=2; cyclic=[2,1]; divisible=0");
    }

    #[test]
    fn kernel_route_round_trips_explicit_shapes() {
        for p in [2u64, 3] {
            for exps in crate::corpus::exponent_multisets(3, 3) {
                let grp = ExplicitPGroup::new(p, exps, 0).unwrap();
                if grp.size().as_finite().unwrap() > 81 {
                    continue;
                }
                let table = grp.to_element_table().unwrap();
                assert_eq!(table.classify_by_kernels(p).unwrap(), grp, "kernel route failed for {grp}");
            }
        }
    }

    #[test]
    fn kernel_route_rejects_wrong_prime() {
        let z4 = cyclic_table(4);
        assert!(z4.classify_by_kernels(3).is_err());
        let z6 = cyclic_table(6);
        assert!(z6.classify_by_kernels(2).is_err());
        assert!(z6.classify_by_kernels(3).is_err());
    }
}
