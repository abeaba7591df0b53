//! Collection from the left and the constructed group value.
//!
//! Multiplication pushes the right operand's syllables into the left
//! operand's normal form one generator at a time. Pushing g_j past the tail
//! (generators of index > j) conjugates the tail; overflowing the relative
//! order r_j substitutes the power word. Both rewrites only involve
//! generators of strictly larger index, so the recursion terminates.
//!
//! Groups small enough get permutation tables for right multiplication by
//! g_j^(2^t), which makes index-based arithmetic a handful of array reads.

use std::sync::Arc;

use super::{size_guard_bits, Element, PcError, PcPresentation, Word};

/// Orders up to this get permutation tables at construction.
const TABLE_LIMIT: u64 = 1 << 17;

struct FastTables {
    /// gen_step[j][t][x] = index of x * g_j^(2^t)
    gen_step: Vec<Vec<Vec<u32>>>,
    inv: Vec<u32>,
}

pub struct Group {
    pres: PcPresentation,
    order: u64,
    strides: Vec<u64>,
    tables: Option<FastTables>,
}

impl Group {
    /// Validate the presentation, enforce the size guard, and precompute the
    /// arithmetic tables. The result is immutable and safe to share.
    pub fn from_presentation(pres: PcPresentation) -> Result<Arc<Group>, PcError> {
        pres.validate()?;
        let guard = size_guard_bits();
        let mut big: u128 = 1;
        for &r in pres.orders() {
            big *= r as u128;
        }
        if big > 1u128 << guard {
            let needed = 128 - (big - 1).leading_zeros();
            return Err(PcError::SizeGuard { needed, guard });
        }
        let order = big as u64;
        let g = pres.num_gens();
        let mut strides = vec![1u64; g];
        for j in (0..g.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * pres.orders()[j + 1];
        }
        let mut group = Group {
            pres,
            order,
            strides,
            tables: None,
        };
        if order <= TABLE_LIMIT {
            group.build_tables();
        }
        Ok(Arc::new(group))
    }

    pub fn presentation(&self) -> &PcPresentation {
        &self.pres
    }

    pub fn prime(&self) -> u64 {
        self.pres.prime()
    }

    pub fn num_gens(&self) -> usize {
        self.pres.num_gens()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// log_p of the group order.
    pub fn log_order(&self) -> u32 {
        let mut o = self.order;
        let mut s = 0;
        while o > 1 {
            o /= self.prime();
            s += 1;
        }
        s
    }

    pub fn identity(&self) -> Element {
        Element(vec![0; self.num_gens()])
    }

    pub fn generator(&self, i: usize) -> Result<Element, PcError> {
        if i >= self.num_gens() {
            return Err(PcError::GeneratorOutOfRange(i + 1, self.num_gens()));
        }
        let mut v = vec![0; self.num_gens()];
        v[i] = 1;
        Ok(Element(v))
    }

    pub fn generators(&self) -> Vec<Element> {
        (0..self.num_gens()).map(|i| self.generator(i).unwrap()).collect()
    }

    pub fn element(&self, exps: Vec<u64>) -> Result<Element, PcError> {
        if exps.len() != self.num_gens() {
            return Err(PcError::InvalidPresentation(format!(
                "exponent vector length {} does not match {} generators",
                exps.len(),
                self.num_gens()
            )));
        }
        for (i, &e) in exps.iter().enumerate() {
            if e >= self.pres.orders()[i] {
                return Err(PcError::InvalidPresentation(format!(
                    "exponent {} of g{} exceeds relative order {}",
                    e,
                    i + 1,
                    self.pres.orders()[i]
                )));
            }
        }
        Ok(Element(exps))
    }

    // ---- index <-> exponent vector ----

    pub fn index_of(&self, e: &Element) -> u32 {
        self.encode(&e.0)
    }

    pub fn element_at(&self, idx: u32) -> Element {
        Element(self.decode(idx))
    }

    fn encode(&self, v: &[u64]) -> u32 {
        let mut idx = 0u64;
        for (j, &e) in v.iter().enumerate() {
            idx += e * self.strides[j];
        }
        idx as u32
    }

    fn decode(&self, idx: u32) -> Vec<u64> {
        (0..self.num_gens())
            .map(|j| (idx as u64 / self.strides[j]) % self.pres.orders()[j])
            .collect()
    }

    /// All normal forms in lexicographic order of the exponent vectors.
    pub fn enumerate(&self) -> Vec<Element> {
        (0..self.order as u32).map(|i| self.element_at(i)).collect()
    }

    // ---- collection ----

    fn word_to_vec(&self, w: &Word) -> Vec<u64> {
        let mut v = vec![0u64; self.num_gens()];
        for &(gen, e) in &w.0 {
            v[gen] = e;
        }
        v
    }

    fn mul_vec(&self, u: &[u64], v: &[u64]) -> Vec<u64> {
        let mut acc = u.to_vec();
        for (j, &e) in v.iter().enumerate() {
            if e != 0 {
                self.push_gen_pow(&mut acc, j, e);
            }
        }
        acc
    }

    /// acc <- acc * g_j^k for 0 < k < r_j.
    fn push_gen_pow(&self, acc: &mut [u64], j: usize, k: u64) {
        let g = self.num_gens();
        let r = self.pres.orders()[j];
        debug_assert!(k > 0 && k < r);
        // Move g_j^k left past the tail, conjugating it.
        let tail = if acc[j + 1..].iter().any(|&e| e != 0) {
            let mut t = vec![0u64; g];
            t[j + 1..].copy_from_slice(&acc[j + 1..]);
            for _ in 0..k {
                t = self.conj_by_gen(&t, j);
            }
            Some(t)
        } else {
            None
        };
        let tot = acc[j] + k;
        let rem = tot % r;
        let power = if tot >= r {
            Some(self.word_to_vec(self.pres.power_word(j)))
        } else {
            None
        };
        let suffix = match (power, tail) {
            (None, None) => None,
            (Some(p), None) => Some(p),
            (None, Some(t)) => Some(t),
            (Some(p), Some(t)) => Some(self.mul_vec(&p, &t)),
        };
        acc[j] = rem;
        match suffix {
            Some(s) => acc[j + 1..].copy_from_slice(&s[j + 1..]),
            None => acc[j + 1..].fill(0),
        }
    }

    /// Conjugate t (supported on generators > j) by g_j.
    fn conj_by_gen(&self, t: &[u64], j: usize) -> Vec<u64> {
        let mut acc: Option<Vec<u64>> = None;
        for (k, &e) in t.iter().enumerate().skip(j + 1) {
            if e != 0 {
                let ck = self.word_to_vec(self.pres.conjugate_word(j, k));
                let p = self.pow_vec(&ck, e);
                acc = Some(match acc {
                    None => p,
                    Some(a) => self.mul_vec(&a, &p),
                });
            }
        }
        acc.unwrap_or_else(|| vec![0; self.num_gens()])
    }

    fn pow_vec(&self, x: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = vec![0u64; self.num_gens()];
        let mut base = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_vec(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_vec(&base, &base);
            }
        }
        acc
    }

    // ---- element level API ----

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        if self.tables.is_some() {
            return self.element_at(self.mul_idx(self.index_of(a), self.index_of(b)));
        }
        Element(self.mul_vec(&a.0, &b.0))
    }

    pub fn inv(&self, a: &Element) -> Element {
        self.element_at(self.inv_idx(self.index_of(a)))
    }

    /// a^e for any integer e; exponents reduce modulo the group order.
    pub fn pow(&self, a: &Element, e: i64) -> Element {
        let m = e.rem_euclid(self.order as i64) as u64;
        self.element_at(self.pow_idx(self.index_of(a), m))
    }

    /// y^-1 x y
    pub fn conjugate(&self, x: &Element, y: &Element) -> Element {
        self.element_at(self.conj_idx(self.index_of(x), self.index_of(y)))
    }

    /// x^-1 y^-1 x y
    pub fn commutator(&self, x: &Element, y: &Element) -> Element {
        self.element_at(self.comm_idx(self.index_of(x), self.index_of(y)))
    }

    /// Normal form of an arbitrary word in generators and inverses.
    pub fn collect(&self, word: &[(usize, i64)]) -> Result<Element, PcError> {
        let mut acc = vec![0u64; self.num_gens()];
        for &(gen, e) in word {
            if gen >= self.num_gens() {
                return Err(PcError::GeneratorOutOfRange(gen + 1, self.num_gens()));
            }
            let mut gv = vec![0u64; self.num_gens()];
            gv[gen] = 1;
            let p = self.pow_vec(&gv, e.rem_euclid(self.order as i64) as u64);
            acc = self.mul_vec(&acc, &p);
        }
        Ok(Element(acc))
    }

    /// The order of an element is the least power of p annihilating it.
    pub fn element_order(&self, a: &Element) -> u64 {
        let p = self.prime();
        let x = self.index_of(a);
        let mut k = 1u64;
        while self.pow_idx(x, k) != 0 {
            k *= p;
        }
        k
    }

    // ---- index level API ----

    pub fn mul_idx(&self, x: u32, y: u32) -> u32 {
        match &self.tables {
            Some(t) => {
                let mut x = x;
                for j in 0..self.num_gens() {
                    let mut e = (y as u64 / self.strides[j]) % self.pres.orders()[j];
                    let mut t_bit = 0;
                    while e > 0 {
                        if e & 1 == 1 {
                            x = t.gen_step[j][t_bit][x as usize];
                        }
                        e >>= 1;
                        t_bit += 1;
                    }
                }
                x
            }
            None => self.encode(&self.mul_vec(&self.decode(x), &self.decode(y))),
        }
    }

    pub fn inv_idx(&self, x: u32) -> u32 {
        match &self.tables {
            Some(t) => t.inv[x as usize],
            None => self.pow_idx(x, self.order - 1),
        }
    }

    pub fn pow_idx(&self, x: u32, mut e: u64) -> u32 {
        let mut acc = 0u32; // identity has index 0
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_idx(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_idx(base, base);
            }
        }
        acc
    }

    pub fn conj_idx(&self, x: u32, y: u32) -> u32 {
        self.mul_idx(self.mul_idx(self.inv_idx(y), x), y)
    }

    pub fn comm_idx(&self, x: u32, y: u32) -> u32 {
        let xy = self.mul_idx(x, y);
        let yx = self.mul_idx(y, x);
        self.mul_idx(self.inv_idx(yx), xy)
    }

    fn build_tables(&mut self) {
        let n = self.order as usize;
        let g = self.num_gens();
        let mut gen_step: Vec<Vec<Vec<u32>>> = Vec::with_capacity(g);
        for j in 0..g {
            let r = self.pres.orders()[j];
            let bits = (64 - (r - 1).leading_zeros()) as usize;
            let mut steps: Vec<Vec<u32>> = Vec::with_capacity(bits);
            let mut step0 = vec![0u32; n];
            for (x, slot) in step0.iter_mut().enumerate() {
                let mut v = self.decode(x as u32);
                self.push_gen_pow(&mut v, j, 1);
                *slot = self.encode(&v);
            }
            steps.push(step0);
            for t in 1..bits {
                let prev = &steps[t - 1];
                let next = (0..n).map(|x| prev[prev[x] as usize]).collect();
                steps.push(next);
            }
            gen_step.push(steps);
        }
        self.tables = Some(FastTables {
            gen_step,
            inv: Vec::new(),
        });
        // With the step tables installed, mul_idx is available to fill the
        // inverse table.
        let inv: Vec<u32> = (0..n as u32).map(|x| self.pow_idx(x, self.order - 1)).collect();
        if let Some(t) = &mut self.tables {
            t.inv = inv;
        }
    }

    /// True when exhaustive closure from the generators yields exactly
    /// prod(r_i) distinct normal forms and collection is associative on all
    /// generator triples.
    pub fn consistency_check(&self) -> bool {
        let n = self.order as usize;
        let gens: Vec<u32> = (0..self.num_gens())
            .map(|j| self.index_of(&self.generator(j).unwrap()))
            .collect();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut count = 1usize;
        let mut stack = vec![0u32];
        while let Some(x) = stack.pop() {
            for &gj in &gens {
                let y = self.mul_idx(x, gj);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        if count != n {
            return false;
        }
        for &a in &gens {
            for &b in &gens {
                for &c in &gens {
                    if self.mul_idx(self.mul_idx(a, b), c) != self.mul_idx(a, self.mul_idx(b, c)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::super::{PcPresentation, Word};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Presentation of the two-generator family member (m, n): generators
    /// (rho, sigma, tau), rho^2 = sigma^(2^n), sigma and tau inverted by rho.
    pub fn family_presentation(m: u32, n: u32) -> PcPresentation {
        let so = 1u64 << (n + 1);
        let to = 1u64 << (m + 1);
        let mut p = PcPresentation::new(2, vec![2, so, to]);
        p.set_power(0, Word::single(1, 1 << n));
        p.set_conjugate(0, 1, Word::single(1, so - 1));
        p.set_conjugate(0, 2, Word::single(2, to - 1));
        p
    }

    fn build(m: u32, n: u32) -> Arc<Group> {
        Group::from_presentation(family_presentation(m, n)).unwrap()
    }

    #[test]
    fn orders_and_enumeration() {
        assert_eq!(build(1, 1).order(), 32);
        assert_eq!(build(2, 2).order(), 128);
        let g = build(1, 1);
        let all = g.enumerate();
        assert_eq!(all.len(), 32);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted, "enumeration is lexicographic");
        let trivial = Group::from_presentation(PcPresentation::new(2, vec![])).unwrap();
        assert_eq!(trivial.enumerate().len(), 1);
    }

    #[test]
    fn collection_examples() {
        let g = build(1, 1);
        assert!(g.collect(&[]).unwrap().is_identity());
        // sigma * sigma just stacks the exponent
        let ss = g.collect(&[(1, 1), (1, 1)]).unwrap();
        assert_eq!(ss.exponents(), &[0, 2, 0]);
        // rho * rho fires the power relation rho^2 = sigma^2
        let rr = g.collect(&[(0, 1), (0, 1)]).unwrap();
        assert_eq!(rr.exponents(), &[0, 2, 0]);
        // sigma^rho = sigma^-1
        let s = g.generator(1).unwrap();
        let r = g.generator(0).unwrap();
        assert_eq!(g.conjugate(&s, &r), g.pow(&s, -1));
        assert!(g.collect(&[(7, 1)]).is_err());
    }

    #[test]
    fn group_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let g = build(m, n);
            let o = g.order() as u32;
            for _ in 0..1000 {
                let (x, y, z) = (
                    rng.gen_range(0..o),
                    rng.gen_range(0..o),
                    rng.gen_range(0..o),
                );
                assert_eq!(
                    g.mul_idx(g.mul_idx(x, y), z),
                    g.mul_idx(x, g.mul_idx(y, z))
                );
                assert_eq!(g.mul_idx(x, g.inv_idx(x)), 0);
                assert_eq!(g.mul_idx(g.inv_idx(x), x), 0);
                assert_eq!(g.mul_idx(x, 0), x);
                assert_eq!(g.mul_idx(0, x), x);
            }
        }
    }

    #[test]
    fn collect_is_invariant_under_rewriting() {
        // Rewriting a word with the relations themselves (power relation
        // substitution, conjugate relation swaps), splitting syllables, or
        // inserting y * y^-1 pairs never changes the collected normal form.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = build(2, 1);
        let orders = g.presentation().orders().to_vec();
        for _ in 0..300 {
            let word: Vec<(usize, i64)> = (0..rng.gen_range(0..8))
                .map(|_| (rng.gen_range(0..3), rng.gen_range(-20..20)))
                .collect();
            let base = g.collect(&word).unwrap();
            let mut rewritten: Vec<(usize, i64)> = Vec::new();
            for &(gen, e) in &word {
                match rng.gen_range(0..5) {
                    0 => rewritten.push((gen, e)),
                    1 => {
                        let split = rng.gen_range(-5..5);
                        rewritten.push((gen, split));
                        rewritten.push((gen, e - split));
                    }
                    2 => {
                        let other = rng.gen_range(0..3);
                        let k = rng.gen_range(1..6);
                        rewritten.push((other, k));
                        rewritten.push((other, -k));
                        rewritten.push((gen, e));
                    }
                    3 => {
                        // g^e = g^(e - r) * (g^r), with g^r the power word
                        rewritten.push((gen, e - orders[gen] as i64));
                        for &(pg, pe) in &g.presentation().power_word(gen).0 {
                            rewritten.push((pg, pe as i64));
                        }
                    }
                    _ => {
                        // insert g_k * g_j * (g_j * g_k^(g_j))^-1, which the
                        // conjugate relation makes the identity
                        let j = rng.gen_range(0..2usize);
                        let k = rng.gen_range(j + 1..3);
                        rewritten.push((k, 1));
                        rewritten.push((j, 1));
                        let mut rhs = vec![(j, 1i64)];
                        for &(cg, ce) in &g.presentation().conjugate_word(j, k).0 {
                            rhs.push((cg, ce as i64));
                        }
                        for &(rg, re) in rhs.iter().rev() {
                            rewritten.push((rg, -re));
                        }
                        rewritten.push((gen, e));
                    }
                }
            }
            assert_eq!(g.collect(&rewritten).unwrap(), base, "word {:?}", word);
        }
    }

    #[test]
    fn consistency_of_the_family() {
        for (m, n) in [(1, 1), (1, 2), (2, 1), (3, 2), (4, 4)] {
            assert!(build(m, n).consistency_check(), "(m,n)=({},{})", m, n);
        }
        let trivial = Group::from_presentation(PcPresentation::new(3, vec![])).unwrap();
        assert!(trivial.consistency_check());
    }

    #[test]
    fn collapsing_presentation_fails_consistency() {
        // a^2 = 1, b^2 = 1, b^a = 1: the relation kills b, so only 2 of the
        // 4 candidate normal forms survive and collection is not associative.
        let mut p = PcPresentation::new(2, vec![2, 2]);
        p.set_conjugate(0, 1, Word::identity());
        let g = Group::from_presentation(p).unwrap();
        assert!(!g.consistency_check());
    }

    #[test]
    fn commuting_corruption_is_consistent_but_a_different_group() {
        // Replacing sigma^rho = sigma^-1 by sigma^rho = sigma still yields a
        // consistent presentation of order 32, but the group changes: its
        // derived subgroup shrinks from order 4 to order 2.
        let mut p = family_presentation(1, 1);
        p.set_conjugate(0, 1, Word::single(1, 1));
        let g = Group::from_presentation(p).unwrap();
        assert!(g.consistency_check());
        assert_eq!(g.order(), 32);
        let derived = crate::pcgroup::Subgroup::whole(&g).derived_subgroup();
        assert_eq!(derived.order(), 2);
        let real = build(1, 1);
        let derived = crate::pcgroup::Subgroup::whole(&real).derived_subgroup();
        assert_eq!(derived.order(), 4);
    }

    #[test]
    fn size_guard_rejects_huge_presentations() {
        let p = PcPresentation::new(2, vec![1 << 12, 1 << 12]);
        match Group::from_presentation(p) {
            Err(PcError::SizeGuard { needed: 24, guard }) => assert_eq!(guard, 20),
            other => panic!("expected size guard error, got {:?}", other.map(|g| g.order())),
        }
    }

    #[test]
    fn table_and_collection_multiplication_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = build(2, 2);
        assert!(g.tables.is_some());
        for _ in 0..2000 {
            let x = rng.gen_range(0..g.order() as u32);
            let y = rng.gen_range(0..g.order() as u32);
            let direct = g.encode(&g.mul_vec(&g.decode(x), &g.decode(y)));
            assert_eq!(g.mul_idx(x, y), direct);
        }
    }

    #[test]
    fn groups_above_the_table_limit_use_collection_directly() {
        // order 2^18 exceeds TABLE_LIMIT but stays inside the size guard
        let g = Group::from_presentation(family_presentation(8, 7)).unwrap();
        assert!(g.tables.is_none());
        assert_eq!(g.order(), 1 << 18);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let x = rng.gen_range(0..g.order() as u32);
            let y = rng.gen_range(0..g.order() as u32);
            let z = rng.gen_range(0..g.order() as u32);
            assert_eq!(
                g.mul_idx(g.mul_idx(x, y), z),
                g.mul_idx(x, g.mul_idx(y, z))
            );
            assert_eq!(g.mul_idx(x, g.inv_idx(x)), 0);
        }
        // rho still squares to sigma^(2^n) on the slow path
        let rr = g.collect(&[(0, 1), (0, 1)]).unwrap();
        assert_eq!(rr.exponents(), &[0, 1 << 7, 0]);
    }

    #[test]
    fn element_orders() {
        let g = build(2, 1);
        assert_eq!(g.element_order(&g.identity()), 1);
        assert_eq!(g.element_order(&g.generator(2).unwrap()), 8); // tau, order 2^(m+1)
        assert_eq!(g.element_order(&g.generator(1).unwrap()), 4); // sigma, order 2^(n+1)
        assert_eq!(g.element_order(&g.generator(0).unwrap()), 4); // rho^2 = sigma^2 != 1
    }
}
