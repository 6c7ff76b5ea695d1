use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockKind, Duplex};
use crate::scalars::{FMatrix, RatFunc};

/// An even isomorphism of (bi)module duplexes, as a matrix from the first basis to the second.
#[derive(Debug, Clone)]
pub struct DuplexIso {
    pub phi: FMatrix,
    /// Dimension of the space of even chain maps.
    pub hom_dim: usize,
}

fn left_vertex_of(d: &Duplex, t: usize) -> usize {
    let el = d.elems()[t];
    match d.blocks()[el.block].kind {
        BlockKind::LS(a) => a,
        _ => d.alg().left_vertex(el.l),
    }
}

fn right_vertex_of(d: &Duplex, t: usize) -> Option<usize> {
    let el = d.elems()[t];
    match d.blocks()[el.block].kind {
        BlockKind::BP(..) => Some(d.alg().right_vertex(el.r.unwrap())),
        BlockKind::BA => Some(d.alg().right_vertex(el.l)),
        _ => None,
    }
}

type Sparse = Vec<(usize, usize, RatFunc)>;

/// Even structure-preserving maps d1 -> d2 as a basis of sparse matrices, each given by
/// the image of one generator on one target coordinate, plus the linear constraints
/// that make non-free summands well defined.
fn hom_generators(d1: &Duplex, d2: &Duplex) -> (Vec<Sparse>, Vec<BTreeMap<usize, RatFunc>>) {
    let alg = d1.alg();
    let m = d1.conductor();
    let mut unknowns: Vec<Sparse> = Vec::new();
    let mut constraints: Vec<BTreeMap<usize, RatFunc>> = Vec::new();
    for (bk, blk) in d1.blocks().iter().enumerate() {
        for u in 0..blk.mult.len() {
            let par = d1.slice_parity(bk, u);
            let targets: Vec<usize> = (0..d2.dim())
                .filter(|&t| d2.parity(t) == par)
                .filter(|&t| match blk.kind {
                    BlockKind::LP(a) | BlockKind::LS(a) => left_vertex_of(d2, t) == a,
                    BlockKind::BP(a, b) => left_vertex_of(d2, t) == a && right_vertex_of(d2, t) == Some(b),
                    BlockKind::BA => Some(left_vertex_of(d2, t)) == right_vertex_of(d2, t),
                })
                .collect();
            let first = unknowns.len();
            let coords = d1.slice_coords(bk, u);
            for &t in &targets {
                let mut sp: Sparse = Vec::new();
                for &j in &coords {
                    let el = d1.elems()[j];
                    let img = match blk.kind {
                        BlockKind::LS(_) => vec![(t, RatFunc::one(m))],
                        BlockKind::BA => {
                            let s = if blk.twist == 1 && alg.parity(el.l) == 1 { -1 } else { 1 };
                            let v = d2.act_vec(Some(el.l), &[(t, RatFunc::from_int(m, s))], None);
                            v
                        }
                        _ => {
                            let s = if blk.twist == 1 && alg.parity(el.l) == 1 { -1 } else { 1 };
                            d2.act_vec(Some(el.l), &[(t, RatFunc::from_int(m, s))], el.r)
                        }
                    };
                    for (r, c) in img {
                        sp.push((r, j, c));
                    }
                }
                unknowns.push(sp);
            }
            match blk.kind {
                BlockKind::LS(a) => {
                    for x in 0..alg.dim() {
                        if x == alg.e(a) {
                            continue;
                        }
                        let mut rows: BTreeMap<usize, BTreeMap<usize, RatFunc>> = BTreeMap::new();
                        for (k, &t) in targets.iter().enumerate() {
                            for (r, c) in d2.act_vec(Some(x), &[(t, RatFunc::one(m))], None) {
                                rows.entry(r).or_default().insert(first + k, c);
                            }
                        }
                        constraints.extend(rows.into_values());
                    }
                }
                BlockKind::BA => {
                    for x in 0..alg.dim() {
                        let s = if blk.twist == 1 && alg.parity(x) == 1 { -1 } else { 1 };
                        let mut rows: BTreeMap<usize, BTreeMap<usize, RatFunc>> = BTreeMap::new();
                        for (k, &t) in targets.iter().enumerate() {
                            let l = d2.act_vec(Some(x), &[(t, RatFunc::from_int(m, s))], None);
                            let r = d2.act_vec(None, &[(t, RatFunc::from_int(m, -1))], Some(x));
                            for (row, c) in l.into_iter().chain(r) {
                                let e = rows.entry(row).or_default().entry(first + k).or_insert_with(|| RatFunc::zero(m));
                                *e = e.try_add(&c).unwrap();
                            }
                        }
                        constraints.extend(rows.into_values());
                    }
                }
                _ => {}
            }
        }
    }
    (unknowns, constraints)
}

fn sparse_rows(a: &FMatrix) -> Vec<Vec<(usize, RatFunc)>> {
    (0..a.rows())
        .map(|r| (0..a.cols()).filter(|&c| !a.get(r, c).is_zero()).map(|c| (c, a.get(r, c).clone())).collect())
        .collect()
}

fn sparse_cols(a: &FMatrix) -> Vec<Vec<(usize, RatFunc)>> {
    (0..a.cols())
        .map(|c| (0..a.rows()).filter(|&r| !a.get(r, c).is_zero()).map(|r| (r, a.get(r, c).clone())).collect())
        .collect()
}

/// Space of even maps d1 -> d2 commuting with the actions and the differentials.
pub fn chain_maps(d1: &Duplex, d2: &Duplex) -> Vec<FMatrix> {
    let m = d1.conductor();
    let (unknowns, mut constraints) = hom_generators(d1, d2);
    let r1 = sparse_rows(&d1.d);
    let c2 = sparse_cols(&d2.d);
    let mut eqs: BTreeMap<(usize, usize), BTreeMap<usize, RatFunc>> = BTreeMap::new();
    for (k, sp) in unknowns.iter().enumerate() {
        let mut acc: BTreeMap<(usize, usize), RatFunc> = BTreeMap::new();
        for (r, j, c) in sp {
            for (col, x) in &r1[*j] {
                let e = acc.entry((*r, *col)).or_insert_with(|| RatFunc::zero(m));
                *e = e.try_add(&c.try_mul(x).unwrap()).unwrap();
            }
            for (row, x) in &c2[*r] {
                let e = acc.entry((*row, *j)).or_insert_with(|| RatFunc::zero(m));
                *e = e.try_sub(&x.try_mul(c).unwrap()).unwrap();
            }
        }
        for (key, v) in acc {
            if !v.is_zero() {
                eqs.entry(key).or_default().insert(k, v);
            }
        }
    }
    constraints.extend(eqs.into_values());
    constraints.retain(|r| r.values().any(|x| !x.is_zero()));
    constraints.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    constraints.dedup();
    let nunk = unknowns.len();
    let sys = FMatrix::from_fn(m, constraints.len(), nunk, |r, c| {
        constraints[r].get(&c).cloned().unwrap_or_else(|| RatFunc::zero(m))
    });
    let ker = sys.kernel_basis();
    (0..ker.cols())
        .map(|kc| {
            let mut phi = FMatrix::zeros(m, d2.dim(), d1.dim());
            for (k, sp) in unknowns.iter().enumerate() {
                let coef = ker.get(k, kc);
                if coef.is_zero() {
                    continue;
                }
                for (r, j, c) in sp {
                    let v = phi.get(*r, *j).try_add(&coef.try_mul(c).unwrap()).unwrap();
                    phi.set(*r, *j, v);
                }
            }
            phi
        })
        .collect()
}

/// Whether phi intertwines differentials and actions.
pub fn is_chain_map(d1: &Duplex, d2: &Duplex, phi: &FMatrix) -> bool {
    if phi.try_mul(&d1.d).unwrap() != d2.d.try_mul(phi).unwrap() {
        return false;
    }
    let alg = d1.alg();
    for x in 0..alg.dim() {
        if phi.try_mul(&d1.left_matrix(x)).unwrap() != d2.left_matrix(x).try_mul(phi).unwrap() {
            return false;
        }
        if d1.is_bimodule() && phi.try_mul(&d1.right_matrix(x)).unwrap() != d2.right_matrix(x).try_mul(phi).unwrap() {
            return false;
        }
    }
    (0..phi.rows()).all(|r| (0..phi.cols()).all(|c| phi.get(r, c).is_zero() || d2.parity(r) == d1.parity(c)))
}

/// Searches the space of even chain maps for an invertible one.
pub fn find_duplex_iso(d1: &Duplex, d2: &Duplex) -> Option<DuplexIso> {
    if d1.dim() != d2.dim() || d1.is_bimodule() != d2.is_bimodule() || d1.c0 != d2.c0 || d1.c1 != d2.c1 {
        return None;
    }
    let m = d1.conductor();
    if d1.dim() == 0 {
        return Some(DuplexIso { phi: FMatrix::zeros(m, 0, 0), hom_dim: 0 });
    }
    let basis = chain_maps(d1, d2);
    let hom_dim = basis.len();
    if hom_dim == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut tries: Vec<Vec<i64>> = (0..hom_dim).map(|k| (0..hom_dim).map(|j| (j == k) as i64).collect()).collect();
    for _ in 0..8 {
        tries.push((0..hom_dim).map(|_| rng.gen_range(-50..=50)).collect());
    }
    for coef in tries {
        let mut phi = FMatrix::zeros(m, d2.dim(), d1.dim());
        for (b, &c) in basis.iter().zip(&coef) {
            if c != 0 {
                phi = phi.try_add(&b.scale(&RatFunc::from_int(m, c))).unwrap();
            }
        }
        if phi.rank() == d1.dim() {
            return Some(DuplexIso { phi, hom_dim });
        }
    }
    None
}
