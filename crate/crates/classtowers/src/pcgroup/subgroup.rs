//! Subgroups with full element sets, quotients by normal subgroups, abelian
//! invariants, and the lower central series.
//!
//! Element sets are kept explicitly (the size guard keeps groups small), so
//! closures are computed by saturation. Abelian invariants are available
//! through two independent routes: order counting in the quotient, and Smith
//! normal form of a collected relation matrix; tests hold them against each
//! other.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{Element, Group};
use crate::snf::smith_diagonal;

/// Logarithmic abelian type invariants: exponents base p, weakly descending.
/// (2,1) stands for Z_{p^2} x Z_p, (1,1,1) for elementary of rank 3.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbelianInvariants(pub Vec<u32>);

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, ")")
    }
}

/// Subgroup of a constructed group, carrying generators and the sorted set
/// of member element indices.
#[derive(Clone)]
pub struct Subgroup {
    group: Arc<Group>,
    gens: Vec<Element>,
    elems: Vec<u32>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup(order {})", self.order())
    }
}

fn closure_indices(group: &Arc<Group>, gen_idx: &[u32]) -> Vec<u32> {
    let mut present = vec![false; group.order() as usize];
    present[0] = true;
    let mut stack = vec![0u32];
    while let Some(x) = stack.pop() {
        for &g in gen_idx {
            let y = group.mul_idx(x, g);
            if !present[y as usize] {
                present[y as usize] = true;
                stack.push(y);
            }
        }
    }
    present
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| if p { Some(i as u32) } else { None })
        .collect()
}

impl Subgroup {
    pub fn generated(group: &Arc<Group>, gens: &[Element]) -> Subgroup {
        let gen_idx: Vec<u32> = gens.iter().map(|e| group.index_of(e)).collect();
        let elems = closure_indices(group, &gen_idx);
        Subgroup {
            group: group.clone(),
            gens: gens.to_vec(),
            elems,
        }
    }

    fn generated_idx(group: &Arc<Group>, gen_idx: &[u32]) -> Subgroup {
        let elems = closure_indices(group, gen_idx);
        Subgroup {
            group: group.clone(),
            gens: gen_idx.iter().map(|&i| group.element_at(i)).collect(),
            elems,
        }
    }

    pub fn whole(group: &Arc<Group>) -> Subgroup {
        Subgroup {
            group: group.clone(),
            gens: group.generators(),
            elems: (0..group.order() as u32).collect(),
        }
    }

    pub fn trivial(group: &Arc<Group>) -> Subgroup {
        Subgroup {
            group: group.clone(),
            gens: Vec::new(),
            elems: vec![0],
        }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn order(&self) -> u64 {
        self.elems.len() as u64
    }

    pub fn generators(&self) -> &[Element] {
        &self.gens
    }

    pub fn element_indices(&self) -> &[u32] {
        &self.elems
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.elems.iter().map(move |&i| self.group.element_at(i))
    }

    pub fn contains_idx(&self, x: u32) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.contains_idx(self.group.index_of(e))
    }

    pub fn is_contained_in(&self, other: &Subgroup) -> bool {
        self.elems.iter().all(|&x| other.contains_idx(x))
    }

    pub fn index_in_group(&self) -> u64 {
        self.group.order() / self.order()
    }

    pub fn index_in(&self, parent: &Subgroup) -> u64 {
        parent.order() / self.order()
    }

    pub fn is_normal_in(&self, other: &Subgroup) -> bool {
        other.gens.iter().all(|g| {
            let gi = self.group.index_of(g);
            self.elems
                .iter()
                .all(|&x| self.contains_idx(self.group.conj_idx(x, gi)))
        })
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().enumerate().all(|(i, a)| {
            self.gens[i + 1..]
                .iter()
                .all(|b| self.group.commutator(a, b).is_identity())
        })
    }

    /// Commutator subgroup [H, H]: generated by the commutators of the
    /// generators, closed into a normal subgroup of H by saturation.
    pub fn derived_subgroup(&self) -> Subgroup {
        let g = &self.group;
        let gen_idx: Vec<u32> = self.gens.iter().map(|e| g.index_of(e)).collect();
        let mut seeds: Vec<u32> = Vec::new();
        for &a in &gen_idx {
            for &b in &gen_idx {
                let c = g.comm_idx(a, b);
                if c != 0 && !seeds.contains(&c) {
                    seeds.push(c);
                }
            }
        }
        loop {
            let sub = Subgroup::generated_idx(g, &seeds);
            let mut grew = false;
            for &x in &sub.elems {
                for &h in &gen_idx {
                    let c = g.conj_idx(x, h);
                    if !sub.contains_idx(c) {
                        seeds.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                return sub;
            }
        }
    }

    /// Invariants of H/H' by order counting in the quotient.
    pub fn abelian_invariants(&self) -> AbelianInvariants {
        let derived = self.derived_subgroup();
        let q = Quotient::new(self, &derived);
        q.abelian_invariants()
    }

    /// Invariants of H/H' through a relation matrix in Smith normal form;
    /// independent of the order-counting route.
    pub fn abelian_invariants_snf(&self) -> AbelianInvariants {
        let derived = self.derived_subgroup();
        let q = Quotient::new(self, &derived);
        let p = self.group.prime();
        let mut gens: Vec<u32> = Vec::new();
        for e in &self.gens {
            let c = q.coset_of_idx(self.group.index_of(e));
            if c != 0 && !gens.contains(&c) {
                gens.push(c);
            }
        }
        let k = gens.len();
        if k == 0 {
            return AbelianInvariants(Vec::new());
        }
        // For each generator, the least power lying in the span of the later
        // ones, with the expression recorded; gives a triangular relation
        // lattice basis of determinant |Q|.
        let mut span: HashMap<u32, Vec<i64>> = HashMap::new();
        span.insert(0, vec![0i64; k]);
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for i in (0..k).rev() {
            let mut c = 1u64;
            let mut acc = gens[i];
            while !span.contains_key(&acc) {
                acc = q.mul(acc, gens[i]);
                c += 1;
            }
            let expr = span[&acc].clone();
            let mut row = vec![0i64; k];
            row[i] = c as i64;
            for (j, item) in expr.iter().enumerate().skip(i + 1) {
                row[j] = -item;
            }
            rows.push(row);
            let old: Vec<(u32, Vec<i64>)> = span.iter().map(|(a, b)| (*a, b.clone())).collect();
            let mut power = 0u32;
            for s in 1..c {
                power = q.mul(power, gens[i]);
                for (y, e) in &old {
                    let z = q.mul(power, *y);
                    let mut e2 = e.clone();
                    e2[i] = s as i64;
                    span.insert(z, e2);
                }
            }
        }
        debug_assert_eq!(span.len() as u64, q.order());
        let diag = smith_diagonal(&rows);
        let mut invs: Vec<u32> = Vec::new();
        for d in diag {
            debug_assert!(d > 0, "relation lattice has full rank");
            let mut d = d as u64;
            let mut e = 0u32;
            while d > 1 {
                debug_assert_eq!(d % p, 0);
                d /= p;
                e += 1;
            }
            if e > 0 {
                invs.push(e);
            }
        }
        invs.sort_unstable_by(|a, b| b.cmp(a));
        AbelianInvariants(invs)
    }
}

/// Quotient H/N of a subgroup by a normal subgroup, with canonical coset
/// representatives (least element index per coset).
pub struct Quotient {
    group: Arc<Group>,
    reps: Vec<u32>,
    coset_lookup: HashMap<u32, u32>,
}

impl Quotient {
    pub fn new(h: &Subgroup, n: &Subgroup) -> Quotient {
        debug_assert!(n.is_contained_in(h), "N must be a subgroup of H");
        debug_assert!(n.is_normal_in(h), "N must be normal in H");
        let group = h.group().clone();
        let mut coset_lookup = HashMap::with_capacity(h.elems.len());
        let mut reps = Vec::new();
        for &x in h.element_indices() {
            if coset_lookup.contains_key(&x) {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            for &nn in n.element_indices() {
                coset_lookup.insert(group.mul_idx(nn, x), id);
            }
        }
        debug_assert_eq!(reps[0], 0, "identity coset comes first");
        Quotient {
            group,
            reps,
            coset_lookup,
        }
    }

    pub fn order(&self) -> u64 {
        self.reps.len() as u64
    }

    pub fn prime(&self) -> u64 {
        self.group.prime()
    }

    pub fn identity(&self) -> u32 {
        0
    }

    /// Canonical representative (least element index) of a coset.
    pub fn rep(&self, coset: u32) -> u32 {
        self.reps[coset as usize]
    }

    pub fn rep_element(&self, coset: u32) -> Element {
        self.group.element_at(self.reps[coset as usize])
    }

    pub fn coset_of_idx(&self, x: u32) -> u32 {
        *self
            .coset_lookup
            .get(&x)
            .expect("element lies outside the quotient's parent subgroup")
    }

    pub fn coset_of(&self, e: &Element) -> u32 {
        self.coset_of_idx(self.group.index_of(e))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.coset_of_idx(
            self.group
                .mul_idx(self.reps[a as usize], self.reps[b as usize]),
        )
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.coset_of_idx(self.group.inv_idx(self.reps[a as usize]))
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 0u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    /// Invariants of an abelian quotient: the p^j-torsion counts determine
    /// the exponent partition as a conjugate partition.
    pub fn abelian_invariants(&self) -> AbelianInvariants {
        let p = self.prime();
        let mut conj: Vec<u32> = Vec::new();
        let mut s_prev = 0u32;
        let mut pj = 1u64;
        loop {
            pj *= p;
            let count = (0..self.order() as u32)
                .filter(|&c| self.pow(c, pj) == 0)
                .count() as u64;
            let mut s = 0u32;
            let mut c = count;
            while c > 1 {
                debug_assert_eq!(c % p, 0);
                c /= p;
                s += 1;
            }
            if s == s_prev {
                break;
            }
            conj.push(s - s_prev);
            s_prev = s;
        }
        let rank = conj.first().copied().unwrap_or(0);
        AbelianInvariants(
            (1..=rank)
                .map(|i| conj.iter().filter(|&&c| c >= i).count() as u32)
                .collect(),
        )
    }
}

/// Lower central series G = gamma_1 > gamma_2 > ... > 1, with the nilpotency
/// class (length - 1) and the coclass log_p|G| - class.
pub fn lower_central_series(group: &Arc<Group>) -> (Vec<Subgroup>, u32, u32) {
    let gens = group.generators();
    let gen_idx: Vec<u32> = gens.iter().map(|e| group.index_of(e)).collect();
    let mut series = vec![Subgroup::whole(group)];
    loop {
        let current = series.last().unwrap();
        if current.order() == 1 {
            break;
        }
        // gamma_{k+1} = [gamma_k, G]: normal closure of the commutators of
        // gamma_k's generators with the group generators.
        let mut seeds: Vec<u32> = Vec::new();
        for x in current.generators() {
            let xi = group.index_of(x);
            for &gj in &gen_idx {
                let c = group.comm_idx(xi, gj);
                if c != 0 && !seeds.contains(&c) {
                    seeds.push(c);
                }
            }
        }
        let next = loop {
            let sub = Subgroup::generated_idx(group, &seeds);
            let mut grew = false;
            for &x in sub.element_indices() {
                for &gj in &gen_idx {
                    let c = group.conj_idx(x, gj);
                    if !sub.contains_idx(c) {
                        seeds.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                break sub;
            }
        };
        assert!(
            next.order() < current.order(),
            "lower central series must strictly descend in a p-group"
        );
        series.push(next);
    }
    let class = (series.len() - 1) as u32;
    let coclass = group.log_order() - class;
    (series, class, coclass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::towers;

    #[test]
    fn derived_subgroup_of_the_family() {
        let g = towers::build_group(1, 1).unwrap();
        let d = Subgroup::whole(&g).derived_subgroup();
        assert_eq!(d.order(), 4);
        assert_eq!(d.abelian_invariants(), AbelianInvariants(vec![1, 1]));

        let g = towers::build_group(2, 1).unwrap();
        let d = Subgroup::whole(&g).derived_subgroup();
        assert_eq!(d.abelian_invariants(), AbelianInvariants(vec![2, 1]));

        // derived subgroup of an abelian subgroup is trivial
        let sigma = g.generator(1).unwrap();
        let tau = g.generator(2).unwrap();
        let a = Subgroup::generated(&g, &[sigma, tau]);
        assert!(a.is_abelian());
        assert_eq!(a.derived_subgroup().order(), 1);
    }

    #[test]
    fn abelianization_of_the_whole_group() {
        for (m, n) in [(1, 1), (1, 2), (2, 2)] {
            let g = towers::build_group(m, n).unwrap();
            let w = Subgroup::whole(&g);
            assert_eq!(w.abelian_invariants(), AbelianInvariants(vec![1, 1, 1]));
        }
    }

    #[test]
    fn cyclic_subgroup_invariants() {
        let g = towers::build_group(2, 1).unwrap();
        let tau = g.generator(2).unwrap();
        let c = Subgroup::generated(&g, &[tau]);
        assert_eq!(c.order(), 8);
        assert_eq!(c.abelian_invariants(), AbelianInvariants(vec![3]));
    }

    #[test]
    fn snf_route_agrees_with_order_counting() {
        for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)] {
            let g = towers::build_group(m, n).unwrap();
            let whole = Subgroup::whole(&g);
            let mut subs = vec![whole.clone(), whole.derived_subgroup()];
            // a few generated subgroups for spread
            subs.push(Subgroup::generated(
                &g,
                &[g.generator(0).unwrap(), g.generator(2).unwrap()],
            ));
            subs.push(Subgroup::generated(
                &g,
                &[g.generator(1).unwrap(), g.generator(2).unwrap()],
            ));
            for s in subs {
                assert_eq!(
                    s.abelian_invariants(),
                    s.abelian_invariants_snf(),
                    "disagreement for (m,n)=({},{}) at order {}",
                    m,
                    n,
                    s.order()
                );
            }
        }
    }

    #[test]
    fn lagrange_for_generated_subgroups() {
        let g = towers::build_group(2, 2).unwrap();
        for gens in [
            vec![g.generator(0).unwrap()],
            vec![g.generator(1).unwrap()],
            vec![g.generator(0).unwrap(), g.generator(1).unwrap()],
            vec![g.generator(2).unwrap()],
        ] {
            let s = Subgroup::generated(&g, &gens);
            assert_eq!(g.order() % s.order(), 0);
        }
    }

    #[test]
    fn lower_central_series_of_the_family() {
        let g = towers::build_group(1, 1).unwrap();
        let (series, class, coclass) = lower_central_series(&g);
        assert_eq!(class, 2);
        assert_eq!(coclass, 3);
        assert_eq!(series.len(), 3); // G > G' > 1
        assert_eq!(series[1].order(), 4);
        assert_eq!(series[2].order(), 1);
    }

    #[test]
    fn abelian_group_has_class_one() {
        let mut p = crate::pcgroup::PcPresentation::new(2, vec![4, 2]);
        p.set_power(0, crate::pcgroup::Word::identity());
        let g = crate::pcgroup::Group::from_presentation(p).unwrap();
        let (_, class, coclass) = lower_central_series(&g);
        assert_eq!(class, 1);
        assert_eq!(coclass, 2);
    }
}
