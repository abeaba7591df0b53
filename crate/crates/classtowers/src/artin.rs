//! Layers of subgroups between G and its derived subgroup, Artin transfer
//! homomorphisms, and the multi-layered Artin pattern.
//!
//! For |G/G'| = p^v there are v+1 layers Lyr_n = {G' <= H <= G : (G:H) = p^n}.
//! The transfer T_{G,H} sends g to the product of r_i g r_{g(i)}^(-1) over a
//! right transversal {r_i} of H, read modulo H'; the induced map on G/G' is
//! independent of the transversal. Per layer, the transfer target type lists
//! the abelian invariants of H/H', the transfer kernel type the kernels of
//! the induced maps.
//!
//! Subgroups of G/G' are ordered canonically by their sorted coset sets,
//! which amounts to ordering by the lexicographically least exponent vectors
//! of the coset representatives. Kernel codes refer to positions in the
//! canonical first layer; only multisets and cycle structure are comparable
//! with orderings taken from other sources.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::pcgroup::{AbelianInvariants, Element, Group, Quotient, Subgroup};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArtinError {
    #[error("layer index {n} out of range 0..={v}")]
    LayerOutOfRange { n: u32, v: u32 },
    #[error("subgroup does not contain the derived subgroup")]
    NotIntermediate,
    #[error("abelianization of order {0} is too large for layer enumeration")]
    QuotientTooLarge(u64),
    #[error("the subgroup lattice of the abelianization exceeds {0} members")]
    LatticeTooLarge(usize),
    #[error("transversal has {got} members, the subgroup has index {index}")]
    BadTransversal { got: usize, index: u64 },
}

/// One layer: the subgroups H with G' <= H <= G of index p^n, in canonical
/// order, together with their images in G/G' as sorted coset-id sets.
pub struct Layer {
    pub index: u32,
    pub subgroups: Vec<Subgroup>,
    pub quotient_images: Vec<Vec<u32>>,
}

/// Kernel of an induced transfer map on G/G', encoded against the canonical
/// first layer: 0 for the total kernel, a 1-based position when the kernel
/// is a first-layer member, the trivial marker for the identity kernel, and
/// otherwise the explicit list of coset representative exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KernelCode {
    Total,
    Trivial,
    AtLayer1(u32),
    Explicit(Vec<Vec<u64>>),
}

impl fmt::Display for KernelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelCode::Total => write!(f, "0"),
            KernelCode::Trivial => write!(f, "id"),
            KernelCode::AtLayer1(k) => write!(f, "{}", k),
            KernelCode::Explicit(vs) => {
                write!(f, "{{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "(")?;
                    for (j, e) in v.iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", e)?;
                    }
                    write!(f, ")")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Ordered multi-layered TTT and TKT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtinPattern {
    pub prime: u64,
    pub ttt: Vec<Vec<AbelianInvariants>>,
    pub tkt: Vec<Vec<KernelCode>>,
}

impl fmt::Display for ArtinPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in 0..self.ttt.len() {
            write!(f, "tau{} = [", n)?;
            for (i, inv) in self.ttt[n].iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", inv)?;
            }
            write!(f, "]; kappa{} = (", n)?;
            for (i, code) in self.tkt[n].iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", code)?;
            }
            writeln!(f, ")")?;
        }
        Ok(())
    }
}

const LAYER_QUOTIENT_LIMIT: u64 = 4096;

/// Shared context: G, G', G/G', and the subgroup lattice of G/G'.
struct Context {
    group: Arc<Group>,
    derived: Subgroup,
    quotient: Quotient,
    v: u32,
    /// all subgroups of G/G' as sorted coset-id sets, canonically ordered
    lattice: Vec<Vec<u32>>,
}

impl Context {
    fn new(group: &Arc<Group>) -> Result<Context, ArtinError> {
        let whole = Subgroup::whole(group);
        let derived = whole.derived_subgroup();
        let quotient = Quotient::new(&whole, &derived);
        let qo = quotient.order();
        if qo > LAYER_QUOTIENT_LIMIT {
            return Err(ArtinError::QuotientTooLarge(qo));
        }
        let p = group.prime();
        let mut v = 0;
        let mut t = qo;
        while t > 1 {
            t /= p;
            v += 1;
        }
        let lattice = subgroup_lattice(&quotient)?;
        Ok(Context {
            group: group.clone(),
            derived,
            quotient,
            v,
            lattice,
        })
    }

    fn layer_sets(&self, n: u32) -> Result<Vec<Vec<u32>>, ArtinError> {
        if n > self.v {
            return Err(ArtinError::LayerOutOfRange { n, v: self.v });
        }
        let p = self.group.prime();
        let target = self.quotient.order() / p.pow(n);
        Ok(self
            .lattice
            .iter()
            .filter(|s| s.len() as u64 == target)
            .cloned()
            .collect())
    }

    /// Preimage in G of a subgroup of G/G', generated by the coset
    /// representatives together with G'.
    fn preimage(&self, cosets: &[u32]) -> Subgroup {
        let mut gens: Vec<Element> = cosets
            .iter()
            .map(|&c| self.quotient.rep_element(c))
            .collect();
        gens.extend_from_slice(self.derived.generators());
        Subgroup::generated(&self.group, &gens)
    }

    fn layer(&self, n: u32) -> Result<Layer, ArtinError> {
        let sets = self.layer_sets(n)?;
        let subgroups = sets.iter().map(|s| self.preimage(s)).collect();
        Ok(Layer {
            index: n,
            subgroups,
            quotient_images: sets,
        })
    }
}

/// Closure of a coset-id seed set into a subgroup of the quotient.
fn close_cosets(q: &Quotient, seed: &[u32]) -> Vec<u32> {
    let mut present = vec![false; q.order() as usize];
    present[0] = true;
    let mut stack = vec![0u32];
    while let Some(x) = stack.pop() {
        for &s in seed {
            let y = q.mul(x, s);
            if !present[y as usize] {
                present[y as usize] = true;
                stack.push(y);
            }
        }
    }
    (0..q.order() as u32)
        .filter(|&c| present[c as usize])
        .collect()
}

const LATTICE_CAP: usize = 100_000;

/// Every subgroup of the (small, abelian) quotient, canonically ordered by
/// the sorted coset-id sets.
fn subgroup_lattice(q: &Quotient) -> Result<Vec<Vec<u32>>, ArtinError> {
    let trivial = vec![0u32];
    let mut found: HashSet<Vec<u32>> = HashSet::new();
    found.insert(trivial.clone());
    let mut work = vec![trivial];
    while let Some(s) = work.pop() {
        for x in 1..q.order() as u32 {
            if s.binary_search(&x).is_ok() {
                continue;
            }
            let mut seed = s.clone();
            seed.push(x);
            let bigger = close_cosets(q, &seed);
            if found.insert(bigger.clone()) {
                if found.len() > LATTICE_CAP {
                    return Err(ArtinError::LatticeTooLarge(LATTICE_CAP));
                }
                work.push(bigger);
            }
        }
    }
    let mut all: Vec<Vec<u32>> = found.into_iter().collect();
    all.sort();
    Ok(all)
}

/// The complete layer Lyr_n(G) in canonical order.
pub fn layer_subgroups(group: &Arc<Group>, n: u32) -> Result<Layer, ArtinError> {
    Context::new(group)?.layer(n)
}

/// An Artin transfer, recorded as the induced map on G/G': for each coset
/// of G/G' (by canonical id) the image coset of H/H'.
pub struct Transfer {
    pub images: Vec<u32>,
    pub domain_order: u64,
    pub codomain_order: u64,
}

impl Transfer {
    /// |ker| * |im| = |G/G'|
    pub fn kernel_cosets(&self) -> Vec<u32> {
        (0..self.domain_order as u32)
            .filter(|&c| self.images[c as usize] == 0)
            .collect()
    }

    pub fn image_size(&self) -> u64 {
        let mut distinct: Vec<u32> = self.images.clone();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.len() as u64
    }
}

fn default_transversal(group: &Arc<Group>, h: &Subgroup) -> Vec<u32> {
    let mut covered = vec![false; group.order() as usize];
    let mut reps = Vec::with_capacity((group.order() / h.order()) as usize);
    for x in 0..group.order() as u32 {
        if covered[x as usize] {
            continue;
        }
        reps.push(x);
        for &hh in h.element_indices() {
            covered[group.mul_idx(hh, x) as usize] = true;
        }
    }
    reps
}

fn transfer_images(
    group: &Arc<Group>,
    h: &Subgroup,
    q_g: &Quotient,
    q_h: &Quotient,
    transversal: &[u32],
) -> Result<Vec<u32>, ArtinError> {
    let index = group.order() / h.order();
    if transversal.len() as u64 != index {
        return Err(ArtinError::BadTransversal {
            got: transversal.len(),
            index,
        });
    }
    // Right cosets Hr must be pairwise distinct.
    for (i, &ri) in transversal.iter().enumerate() {
        for &rj in &transversal[i + 1..] {
            if h.contains_idx(group.mul_idx(ri, group.inv_idx(rj))) {
                return Err(ArtinError::BadTransversal {
                    got: transversal.len(),
                    index,
                });
            }
        }
    }
    let inv_reps: Vec<u32> = transversal.iter().map(|&r| group.inv_idx(r)).collect();
    let images = (0..q_g.order() as u32)
        .map(|c| {
            let x = q_g.rep(c);
            let mut prod = 0u32;
            for &ri in transversal {
                let y = group.mul_idx(ri, x);
                let j = (0..transversal.len())
                    .find(|&j| h.contains_idx(group.mul_idx(y, inv_reps[j])))
                    .expect("transversal covers every coset");
                prod = group.mul_idx(prod, group.mul_idx(y, inv_reps[j]));
            }
            q_h.coset_of_idx(prod)
        })
        .collect();
    Ok(images)
}

fn check_intermediate(derived: &Subgroup, h: &Subgroup) -> Result<(), ArtinError> {
    if !derived.is_contained_in(h) {
        return Err(ArtinError::NotIntermediate);
    }
    Ok(())
}

/// Induced transfer map from G/G' to H/H' for G' <= H <= G.
pub fn transfer(group: &Arc<Group>, h: &Subgroup) -> Result<Transfer, ArtinError> {
    let t = default_transversal(group, h);
    transfer_with_transversal(group, h, &t)
}

/// Same, over a caller-chosen right transversal of H in G (indices).
pub fn transfer_with_transversal(
    group: &Arc<Group>,
    h: &Subgroup,
    transversal: &[u32],
) -> Result<Transfer, ArtinError> {
    let whole = Subgroup::whole(group);
    let derived = whole.derived_subgroup();
    check_intermediate(&derived, h)?;
    let q_g = Quotient::new(&whole, &derived);
    let h_derived = h.derived_subgroup();
    let q_h = Quotient::new(h, &h_derived);
    let images = transfer_images(group, h, &q_g, &q_h, transversal)?;
    Ok(Transfer {
        images,
        domain_order: q_g.order(),
        codomain_order: q_h.order(),
    })
}

fn encode_kernel(
    kernel: &[u32],
    q_order: u64,
    prime: u64,
    lyr1: &[Vec<u32>],
    q: &Quotient,
) -> KernelCode {
    if kernel.len() as u64 == q_order {
        return KernelCode::Total;
    }
    if kernel.len() == 1 {
        return KernelCode::Trivial;
    }
    if q_order == kernel.len() as u64 * prime {
        if let Some(pos) = lyr1.iter().position(|s| s.as_slice() == kernel) {
            return KernelCode::AtLayer1(pos as u32 + 1);
        }
    }
    KernelCode::Explicit(
        kernel
            .iter()
            .map(|&c| q.rep_element(c).exponents().to_vec())
            .collect(),
    )
}

/// Kernel of the induced transfer to H, encoded against the canonical first
/// layer.
pub fn transfer_kernel(group: &Arc<Group>, h: &Subgroup) -> Result<KernelCode, ArtinError> {
    let ctx = Context::new(group)?;
    check_intermediate(&ctx.derived, h)?;
    let lyr1 = ctx.layer_sets(1.min(ctx.v))?;
    let h_derived = h.derived_subgroup();
    let q_h = Quotient::new(h, &h_derived);
    let t = default_transversal(group, h);
    let images = transfer_images(group, h, &ctx.quotient, &q_h, &t)?;
    let kernel: Vec<u32> = (0..ctx.quotient.order() as u32)
        .filter(|&c| images[c as usize] == 0)
        .collect();
    Ok(encode_kernel(
        &kernel,
        ctx.quotient.order(),
        group.prime(),
        &lyr1,
        &ctx.quotient,
    ))
}

/// The full Artin pattern: per layer, the abelian invariants of H/H' and the
/// encoded transfer kernels, in canonical layer order.
pub fn artin_pattern(group: &Arc<Group>) -> Result<ArtinPattern, ArtinError> {
    let ctx = Context::new(group)?;
    let lyr1 = if ctx.v >= 1 { ctx.layer_sets(1)? } else { Vec::new() };
    let mut ttt = Vec::with_capacity(ctx.v as usize + 1);
    let mut tkt = Vec::with_capacity(ctx.v as usize + 1);
    for n in 0..=ctx.v {
        let sets = ctx.layer_sets(n)?;
        let mut taus = Vec::with_capacity(sets.len());
        let mut kappas = Vec::with_capacity(sets.len());
        for s in &sets {
            let h = ctx.preimage(s);
            let h_derived = h.derived_subgroup();
            let q_h = Quotient::new(&h, &h_derived);
            taus.push(q_h.abelian_invariants());
            let t = default_transversal(&ctx.group, &h);
            let images = transfer_images(&ctx.group, &h, &ctx.quotient, &q_h, &t)
                .expect("default transversal is valid");
            let kernel: Vec<u32> = (0..ctx.quotient.order() as u32)
                .filter(|&c| images[c as usize] == 0)
                .collect();
            kappas.push(encode_kernel(
                &kernel,
                ctx.quotient.order(),
                ctx.group.prime(),
                &lyr1,
                &ctx.quotient,
            ));
        }
        ttt.push(taus);
        tkt.push(kappas);
    }
    Ok(ArtinPattern {
        prime: group.prime(),
        ttt,
        tkt,
    })
}

/// Fixed points and 2-cycles of a first-layer TKT; `None` unless every code
/// points into the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleStructure {
    pub fixed_points: u32,
    pub two_cycles: u32,
    pub is_permutation: bool,
}

pub fn cycle_structure(codes: &[KernelCode]) -> Option<CycleStructure> {
    let mut targets = Vec::with_capacity(codes.len());
    for c in codes {
        match c {
            KernelCode::AtLayer1(k) if *k >= 1 && *k as usize <= codes.len() => {
                targets.push(*k as usize - 1)
            }
            _ => return None,
        }
    }
    let n = targets.len();
    let mut hit = vec![0u32; n];
    for &t in &targets {
        hit[t] += 1;
    }
    let is_permutation = hit.iter().all(|&h| h == 1);
    let fixed_points = (0..n).filter(|&i| targets[i] == i).count() as u32;
    let two_cycles = (0..n)
        .filter(|&i| targets[i] != i && targets[targets[i]] == i && i < targets[i])
        .count() as u32;
    Some(CycleStructure {
        fixed_points,
        two_cycles,
        is_permutation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcgroup::PcPresentation;
    use rand::{seq::SliceRandom, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn elementary(p: u64, rank: usize) -> Arc<Group> {
        Group::from_presentation(PcPresentation::new(p, vec![p; rank])).unwrap()
    }

    #[test]
    fn layer_counts_for_elementary_types() {
        // type (2,2,2): seven planes, seven lines, one bottom
        let g = elementary(2, 3);
        assert_eq!(layer_subgroups(&g, 0).unwrap().subgroups.len(), 1);
        assert_eq!(layer_subgroups(&g, 1).unwrap().subgroups.len(), 7);
        assert_eq!(layer_subgroups(&g, 2).unwrap().subgroups.len(), 7);
        assert_eq!(layer_subgroups(&g, 3).unwrap().subgroups.len(), 1);
        assert_eq!(
            layer_subgroups(&g, 4).err(),
            Some(ArtinError::LayerOutOfRange { n: 4, v: 3 })
        );
        // type (3,3): four lines
        let g = elementary(3, 2);
        assert_eq!(layer_subgroups(&g, 1).unwrap().subgroups.len(), 4);
    }

    #[test]
    fn transfer_to_the_whole_group_is_the_identity() {
        let g = crate::towers::build_group(1, 1).unwrap();
        let whole = Subgroup::whole(&g);
        let t = transfer(&g, &whole).unwrap();
        assert_eq!(t.images, (0..8).collect::<Vec<u32>>());
    }

    #[test]
    fn bottom_layer_kernel_is_total() {
        for (m, n) in [(1, 1), (2, 1), (1, 2)] {
            let g = crate::towers::build_group(m, n).unwrap();
            let derived = Subgroup::whole(&g).derived_subgroup();
            assert_eq!(transfer_kernel(&g, &derived).unwrap(), KernelCode::Total);
        }
    }

    #[test]
    fn transfer_is_a_homomorphism() {
        let g = crate::towers::build_group(2, 1).unwrap();
        let layer = layer_subgroups(&g, 1).unwrap();
        let whole = Subgroup::whole(&g);
        let derived = whole.derived_subgroup();
        let q = Quotient::new(&whole, &derived);
        for (h, _) in layer.subgroups.iter().zip(&layer.quotient_images) {
            let h_derived = h.derived_subgroup();
            let q_h = Quotient::new(h, &h_derived);
            let t = transfer(&g, h).unwrap();
            for a in 0..q.order() as u32 {
                for b in 0..q.order() as u32 {
                    assert_eq!(
                        t.images[q.mul(a, b) as usize],
                        q_h.mul(t.images[a as usize], t.images[b as usize])
                    );
                }
            }
        }
    }

    #[test]
    fn transfer_does_not_depend_on_the_transversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (m, n) in [(1, 1), (1, 2), (2, 1)] {
            let g = crate::towers::build_group(m, n).unwrap();
            for h in layer_subgroups(&g, 1).unwrap().subgroups.iter() {
                let base = transfer(&g, h).unwrap();
                let reps = default_transversal(&g, h);
                for _ in 0..10 {
                    let twisted: Vec<u32> = reps
                        .iter()
                        .map(|&r| {
                            let hh = *h.element_indices().choose(&mut rng).unwrap();
                            g.mul_idx(hh, r)
                        })
                        .collect();
                    let t = transfer_with_transversal(&g, h, &twisted).unwrap();
                    assert_eq!(t.images, base.images);
                }
            }
        }
    }

    #[test]
    fn rank_nullity_over_the_group() {
        let g = crate::towers::build_group(2, 2).unwrap();
        for n in 0..=3 {
            for h in layer_subgroups(&g, n).unwrap().subgroups.iter() {
                let t = transfer(&g, h).unwrap();
                assert_eq!(
                    t.kernel_cosets().len() as u64 * t.image_size(),
                    t.domain_order
                );
            }
        }
    }

    #[test]
    fn bad_transversals_are_rejected() {
        let g = crate::towers::build_group(1, 1).unwrap();
        let h = &layer_subgroups(&g, 1).unwrap().subgroups[0];
        assert!(matches!(
            transfer_with_transversal(&g, h, &[0]),
            Err(ArtinError::BadTransversal { .. })
        ));
        assert!(matches!(
            transfer_with_transversal(&g, h, &[0, 0]),
            Err(ArtinError::BadTransversal { .. })
        ));
    }

    #[test]
    fn pattern_serialization_is_stable() {
        let g = crate::towers::build_group(1, 1).unwrap();
        let a = artin_pattern(&g).unwrap().to_string();
        let b = artin_pattern(&g).unwrap().to_string();
        assert_eq!(a, b);
        assert!(a.starts_with("tau0 = [(1,1,1)]; kappa0 = (id)\n"));
        assert!(a.contains("kappa3 = (0)"));
    }

    #[test]
    fn kappa_of_intermediate_layers_is_total_for_the_family() {
        let g = crate::towers::build_group(1, 2).unwrap();
        let p = artin_pattern(&g).unwrap();
        assert_eq!(p.tkt[2], vec![KernelCode::Total; 7]);
        assert_eq!(p.tkt[3], vec![KernelCode::Total]);
    }

    #[test]
    fn first_layer_kernels_permute_for_the_family() {
        for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let g = crate::towers::build_group(m, n).unwrap();
            let p = artin_pattern(&g).unwrap();
            let cs = cycle_structure(&p.tkt[1]).expect("layer-1 kernels are planes");
            assert!(cs.is_permutation, "(m,n)=({},{})", m, n);
            if n == 1 {
                assert_eq!((cs.fixed_points, cs.two_cycles), (5, 1));
            } else {
                assert_eq!((cs.fixed_points, cs.two_cycles), (1, 3));
            }
        }
    }

    #[test]
    fn non_intermediate_subgroup_is_rejected() {
        let g = crate::towers::build_group(2, 1).unwrap();
        // <tau> does not contain G' (G' contains sigma^2)
        let h = Subgroup::generated(&g, &[g.generator(2).unwrap()]);
        assert_eq!(transfer(&g, &h).err(), Some(ArtinError::NotIntermediate));
    }
}
