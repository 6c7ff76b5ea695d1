//! Bimodule duplexes C_{a,x}, tensor products over A, and cancellation of projective pairs.

mod braid;
mod reflect;

use std::collections::HashMap;
use std::sync::Arc;

pub use braid::{braid_pattern, equal_up_to_block_order, verify_braid, BraidReport, PatternCheck};
pub use reflect::{
    big_matrix_check, reflect_direct, reflect_direct_lambda, reflect_tensor, reflect_tensor_with, BigMatrixReport, ReflectError,
    ReflectionData, TensorReflection,
};

use crate::algebra::ZigzagAlgebra;
use crate::duplex::{merge, Atom, Block, BlockKind, Duplex, DuplexError, Mult};
use crate::scalars::{FMatrix, RatFunc};

/// C_{a,x}: A in even degree and P_a (x) _aP in odd degree, with d = x m_a and Delta_a.
pub fn build_c(alg: &Arc<ZigzagAlgebra>, a: usize, x: &RatFunc) -> Result<Duplex, crate::quiver::QuiverError> {
    let g = alg.graph();
    g.loopless_vertex(a)?;
    let m = alg.conductor();
    let n = g.num_vertices();
    let blocks = vec![
        Block::new(BlockKind::BA, 0, vec![Mult::new(0, vec![Atom::Gen(0)])]),
        Block::new(BlockKind::BP(a, a), 1, vec![Mult::new(0, vec![Atom::Gen(1)])]),
    ];
    let mut c0 = vec![RatFunc::zero(m); n];
    let mut c1 = vec![RatFunc::zero(m); n];
    c0[a] = x.clone();
    c1[a] = x.clone();
    for h in g.out_edges(a) {
        c0[g.i(h)] = c0[g.i(h)].try_sub(x).unwrap();
    }
    let one = RatFunc::one(m);
    Ok(Duplex::from_generator_images(alg.clone(), blocks, true, c0, c1, |dx, blk, _, k| {
        if blk == 1 {
            return vec![(dx.generator(0, 0, a).unwrap(), x.clone())];
        }
        let mut out = Vec::new();
        if k == a {
            out.push((dx.index(1, alg.x(a), 0, Some(alg.e(a))).unwrap(), one.clone()));
            out.push((dx.index(1, alg.e(a), 0, Some(alg.x(a))).unwrap(), one.clone()));
        }
        for h in g.out_edges(a) {
            if g.i(h) == k {
                let idx = dx.index(1, alg.arrow(g.bar(h)), 0, Some(alg.arrow(h))).unwrap();
                out.push((idx, RatFunc::from_int(m, g.eps(h))));
            }
        }
        merge(out)
    })
    .expect("C blocks are consistent"))
}

/// The unit bimodule {A, d = 0} with the given curvature pair.
pub fn unit_bimodule(alg: &Arc<ZigzagAlgebra>, c0: Vec<RatFunc>, c1: Vec<RatFunc>) -> Duplex {
    let blocks = vec![Block::new(BlockKind::BA, 0, vec![Mult::new(0, vec![Atom::Gen(0)])])];
    let n = alg.dim();
    Duplex::new(alg.clone(), blocks, true, FMatrix::zeros(alg.conductor(), n, n), c0, c1).unwrap()
}

struct TensorLayout {
    out_block: HashMap<(usize, usize), usize>,
}

fn middle_basis(alg: &ZigzagAlgebra, kn: BlockKind, km: BlockKind) -> Vec<usize> {
    match (kn, km) {
        (BlockKind::BP(_, b), BlockKind::LP(c)) | (BlockKind::BP(_, b), BlockKind::BP(c, _)) => alg.hom_basis(b, c),
        _ => vec![],
    }
}

/// N (x)_A M for a bimodule duplex N and a module or bimodule duplex M.
pub fn tensor(nd: &Duplex, md: &Duplex) -> Result<Duplex, DuplexError> {
    if !nd.is_bimodule() {
        return Err(DuplexError::Other("left factor must be a bimodule duplex".into()));
    }
    let alg = nd.alg().clone();
    let m = alg.conductor();
    let nv = alg.num_vertices();
    let mid: Vec<RatFunc> = (0..nv).map(|b| nd.c1[b].try_add(&md.c0[b]).unwrap()).collect();
    let mut c0 = nd.c0.clone();
    let mut c1 = if md.is_bimodule() { md.c1.clone() } else { vec![RatFunc::zero(m); nv] };
    for b in 0..nv {
        let n_agree = nd.left_right_agree(b);
        let m_agree = md.is_bimodule() && md.left_right_agree(b);
        if !mid[b].is_zero() {
            if n_agree {
                c0[b] = c0[b].try_add(&mid[b]).unwrap();
            } else if m_agree {
                c1[b] = c1[b].try_add(&mid[b]).unwrap();
            } else {
                return Err(DuplexError::Curvature(b));
            }
        }
        if n_agree && m_agree && !c1[b].is_zero() {
            c0[b] = c0[b].try_add(&c1[b]).unwrap();
            c1[b] = RatFunc::zero(m);
        }
    }

    let mut blocks = Vec::new();
    let mut lay = TensorLayout { out_block: HashMap::new() };
    for (kb, kblk) in nd.blocks().iter().enumerate() {
        for (lb, lblk) in md.blocks().iter().enumerate() {
            let (kind, twist, mult) = match (kblk.kind, lblk.kind) {
                (BlockKind::BA, lk) => {
                    let mut mult = Vec::new();
                    for u in &kblk.mult {
                        for v in &lblk.mult {
                            mult.push(Mult::new(u.parity + v.parity, [u.tag.clone(), v.tag.clone()].concat()));
                        }
                    }
                    (lk, kblk.twist + lblk.twist, mult)
                }
                (BlockKind::BP(a, b), lk) => {
                    let mut mult = Vec::new();
                    let kind = match lk {
                        BlockKind::LS(c) => {
                            if c != b {
                                continue;
                            }
                            for u in &kblk.mult {
                                for v in &lblk.mult {
                                    let tag = [u.tag.clone(), vec![Atom::Hat(c)], v.tag.clone()].concat();
                                    mult.push(Mult::new(u.parity + lblk.twist + v.parity, tag));
                                }
                            }
                            BlockKind::LP(a)
                        }
                        BlockKind::BA => {
                            for u in &kblk.mult {
                                for v in &lblk.mult {
                                    mult.push(Mult::new(u.parity + lblk.twist + v.parity, [u.tag.clone(), v.tag.clone()].concat()));
                                }
                            }
                            BlockKind::BP(a, b)
                        }
                        BlockKind::LP(_) | BlockKind::BP(..) => {
                            let gs = middle_basis(&alg, kblk.kind, lk);
                            for u in &kblk.mult {
                                for &g in &gs {
                                    for v in &lblk.mult {
                                        let tag = [u.tag.clone(), vec![Atom::Alg(g)], v.tag.clone()].concat();
                                        mult.push(Mult::new(u.parity + alg.parity(g) + lblk.twist + v.parity, tag));
                                    }
                                }
                            }
                            match lk {
                                BlockKind::LP(_) => BlockKind::LP(a),
                                BlockKind::BP(_, d) => BlockKind::BP(a, d),
                                _ => unreachable!(),
                            }
                        }
                    };
                    (kind, kblk.twist, mult)
                }
                _ => return Err(DuplexError::Other("left factor has a module block".into())),
            };
            if mult.is_empty() {
                continue;
            }
            lay.out_block.insert((kb, lb), blocks.len());
            blocks.push(Block::new(kind, twist, mult));
        }
    }
    let n_out: usize = {
        let probe = Duplex::new(alg.clone(), blocks.clone(), md.is_bimodule(), FMatrix::zeros(m, 0, 0), vec![], vec![]);
        match probe {
            Err(DuplexError::Shape(_, _, n)) => n,
            Ok(_) => 0,
            Err(e) => return Err(e),
        }
    };
    let shell = Duplex::new(alg.clone(), blocks, md.is_bimodule(), FMatrix::zeros(m, n_out, n_out), c0, c1)?;

    let pair_map = |ni: usize, mi: usize| -> Option<(i64, usize)> {
        let ne = nd.elems()[ni];
        let me = md.elems()[mi];
        let kblk = &nd.blocks()[ne.block];
        let lblk = &md.blocks()[me.block];
        let ob = *lay.out_block.get(&(ne.block, me.block))?;
        let nl = lblk.mult.len();
        let tl = lblk.twist as i64;
        match kblk.kind {
            BlockKind::BA => {
                let u = ne.u * nl + me.u;
                match lblk.kind {
                    BlockKind::LS(c) => (ne.l == alg.e(c)).then(|| (1, shell.index(ob, me.l, u, None).unwrap())),
                    _ => {
                        let (s, k) = alg.mul_basis(ne.l, me.l)?;
                        let sg = if tl * alg.parity(ne.l) as i64 % 2 == 1 { -s } else { s };
                        Some((sg, shell.index(ob, k, u, me.r)?))
                    }
                }
            }
            BlockKind::BP(_, b) => {
                let q = ne.r.unwrap();
                let qsign = if tl * alg.parity(q) as i64 % 2 == 1 { -1 } else { 1 };
                match lblk.kind {
                    BlockKind::LS(_) => {
                        (q == alg.e(b)).then(|| (1, shell.index(ob, ne.l, ne.u * nl + me.u, None).unwrap()))
                    }
                    BlockKind::BA => {
                        let (s, k) = alg.mul_basis(q, me.l)?;
                        Some((qsign * s, shell.index(ob, ne.l, ne.u * nl + me.u, Some(k))?))
                    }
                    _ => {
                        let (s, g) = alg.mul_basis(q, me.l)?;
                        let gs = middle_basis(&alg, kblk.kind, lblk.kind);
                        let gp = gs.iter().position(|&x| x == g)?;
                        let u = (ne.u * gs.len() + gp) * nl + me.u;
                        Some((qsign * s, shell.index(ob, ne.l, u, me.r)?))
                    }
                }
            }
            _ => None,
        }
    };

    let preimage = |oi: usize| -> (usize, usize) {
        let oe = shell.elems()[oi];
        let (&(kb, lb), _) = lay.out_block.iter().find(|(_, &v)| v == oe.block).unwrap();
        let kblk = &nd.blocks()[kb];
        let lblk = &md.blocks()[lb];
        let nl = lblk.mult.len();
        match kblk.kind {
            BlockKind::BA => {
                let (u, v) = (oe.u / nl, oe.u % nl);
                let lv = match lblk.kind {
                    BlockKind::LS(c) => c,
                    _ => alg.left_vertex(oe.l),
                };
                (nd.index(kb, alg.e(lv), u, None).unwrap(), md.index(lb, oe.l, v, oe.r).unwrap())
            }
            BlockKind::BP(_, b) => {
                let eb = Some(alg.e(b));
                match lblk.kind {
                    BlockKind::LS(c) => {
                        let (u, v) = (oe.u / nl, oe.u % nl);
                        (nd.index(kb, oe.l, u, eb).unwrap(), md.index(lb, alg.e(c), v, None).unwrap())
                    }
                    BlockKind::BA => {
                        let (u, v) = (oe.u / nl, oe.u % nl);
                        (nd.index(kb, oe.l, u, eb).unwrap(), md.index(lb, oe.r.unwrap(), v, None).unwrap())
                    }
                    _ => {
                        let gs = middle_basis(&alg, kblk.kind, lblk.kind);
                        let v = oe.u % nl;
                        let rest = oe.u / nl;
                        let (u, gp) = (rest / gs.len(), rest % gs.len());
                        (nd.index(kb, oe.l, u, eb).unwrap(), md.index(lb, gs[gp], v, oe.r).unwrap())
                    }
                }
            }
            _ => unreachable!(),
        }
    };

    let ncols: Vec<Vec<(usize, RatFunc)>> = (0..nd.dim()).map(|j| nd.column(j)).collect();
    let mcols: Vec<Vec<(usize, RatFunc)>> = (0..md.dim()).map(|j| md.column(j)).collect();
    let mut d = FMatrix::zeros(m, n_out, n_out);
    for oi in 0..n_out {
        let (ni, mi) = preimage(oi);
        debug_assert_eq!(pair_map(ni, mi), Some((1, oi)));
        let mut terms: Vec<(usize, RatFunc)> = Vec::new();
        for (nk, c) in &ncols[ni] {
            if let Some((s, t)) = pair_map(*nk, mi) {
                terms.push((t, c.try_mul(&RatFunc::from_int(m, s)).unwrap()));
            }
        }
        let ns = if nd.parity(ni) == 1 { -1 } else { 1 };
        for (mk, c) in &mcols[mi] {
            if let Some((s, t)) = pair_map(ni, *mk) {
                terms.push((t, c.try_mul(&RatFunc::from_int(m, s * ns)).unwrap()));
            }
        }
        for (t, c) in merge(terms) {
            d.set(t, oi, c);
        }
    }
    Ok(shell.with_d(d))
}

/// A cancellable summand: one multiplicity vector of one projective block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slice {
    pub block: usize,
    pub u: usize,
}

/// Gaussian elimination of the acyclic pair P -> Q: requires d restricted to Q x P invertible.
/// The remaining coordinates keep their structure; d becomes d_OO - d_OP e^{-1} d_QO.
pub fn cancel(d: &Duplex, p: &[Slice], q: &[Slice]) -> Result<Duplex, DuplexError> {
    let m = d.conductor();
    let pc: Vec<usize> = p.iter().flat_map(|s| d.slice_coords(s.block, s.u)).collect();
    let qc: Vec<usize> = q.iter().flat_map(|s| d.slice_coords(s.block, s.u)).collect();
    if pc.len() != qc.len() {
        return Err(DuplexError::NotInvertible);
    }
    let e = d.d.select(&qc, &pc);
    let einv = e.inverse().map_err(|_| DuplexError::NotInvertible)?;
    let removed: std::collections::HashSet<usize> = pc.iter().chain(&qc).copied().collect();
    let oc: Vec<usize> = (0..d.dim()).filter(|i| !removed.contains(i)).collect();
    let d_op = d.d.select(&oc, &pc);
    let d_qo = d.d.select(&qc, &oc);
    let rows: Vec<usize> = (0..oc.len()).filter(|&r| (0..pc.len()).any(|k| !d_op.get(r, k).is_zero())).collect();
    let cols: Vec<usize> = (0..oc.len()).filter(|&c| (0..qc.len()).any(|k| !d_qo.get(k, c).is_zero())).collect();
    let mut nd = d.d.select(&oc, &oc);
    if !rows.is_empty() && !cols.is_empty() {
        let all_p: Vec<usize> = (0..pc.len()).collect();
        let all_q: Vec<usize> = (0..qc.len()).collect();
        let left = d_op.select(&rows, &all_p);
        let right = einv.try_mul(&d_qo.select(&all_q, &cols)).unwrap();
        let corr = left.try_mul(&right).unwrap();
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let x = corr.get(ri, ci);
                if !x.is_zero() {
                    let v = nd.get(r, c).try_sub(x).unwrap();
                    nd.set(r, c, v);
                }
            }
        }
    }
    let gone: std::collections::HashSet<Slice> = p.iter().chain(q).copied().collect();
    let blocks: Vec<Block> = d
        .blocks()
        .iter()
        .enumerate()
        .map(|(bi, b)| {
            let mult = b.mult.iter().enumerate().filter(|(u, _)| !gone.contains(&Slice { block: bi, u: *u })).map(|x| x.1.clone()).collect();
            Block { kind: b.kind, twist: b.twist, mult }
        })
        .collect();
    let _ = m;
    Duplex::new(d.alg().clone(), blocks, d.is_bimodule(), nd, d.c0.clone(), d.c1.clone())
}

/// Order in which the greedy reduction scans candidate summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Forward,
    Reverse,
    EvenFirst,
}

impl Schedule {
    pub const ALL: [Schedule; 3] = [Schedule::Forward, Schedule::Reverse, Schedule::EvenFirst];
}

/// Coefficient of d from the generator of slice s to the generator of slice t, if the induced
/// map between the free summands is invertible.
fn top_pivot(d: &Duplex, s: Slice, t: Slice) -> Option<usize> {
    let alg = d.alg();
    let verts: Vec<usize> = match d.blocks()[s.block].kind {
        BlockKind::BA => (0..alg.num_vertices()).collect(),
        _ => vec![0],
    };
    let mut deg = 0;
    for k in verts {
        let col = d.generator(s.block, s.u, k)?;
        let row = d.generator(t.block, t.u, k)?;
        let c = d.d.get(row, col);
        if c.is_zero() {
            return None;
        }
        deg = deg.max(c.total_degree());
    }
    Some(deg)
}

fn slices(d: &Duplex) -> Vec<Slice> {
    d.blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind.is_projective())
        .flat_map(|(bi, b)| (0..b.mult.len()).map(move |u| Slice { block: bi, u }))
        .collect()
}

/// Finds one cancellable pair along the schedule.
pub fn find_pair(d: &Duplex, sched: Schedule) -> Option<(Slice, Slice)> {
    let mut cand = slices(d);
    match sched {
        Schedule::Forward => {}
        Schedule::Reverse => cand.reverse(),
        Schedule::EvenFirst => cand.sort_by_key(|s| (d.slice_parity(s.block, s.u), *s)),
    }
    let all = slices(d);
    for &s in &cand {
        let kind = d.blocks()[s.block].kind;
        let par = d.slice_parity(s.block, s.u);
        let best = all
            .iter()
            .filter(|t| d.blocks()[t.block].kind == kind && d.slice_parity(t.block, t.u) != par)
            .filter_map(|&t| top_pivot(d, s, t).map(|deg| (deg, t)))
            .min();
        if let Some((_, t)) = best {
            return Some((s, t));
        }
    }
    None
}

/// Cancels pairs until none remain along the schedule.
pub fn reduce(d: &Duplex, sched: Schedule) -> Duplex {
    let mut cur = d.clone();
    while let Some((s, t)) = find_pair(&cur, sched) {
        cur = cancel(&cur, &[s], &[t]).expect("pivot is invertible");
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duplex::find_duplex_iso;
    use crate::quiver::Graph;
    use crate::scalars::parse_scalar;

    fn rf(s: &str) -> RatFunc {
        parse_scalar(s, 4).unwrap()
    }

    fn graphs() -> Vec<Graph> {
        vec![
            Graph::from_indices(2, &[(0, 1)]),
            Graph::from_indices(3, &[(0, 1), (1, 2)]),
            Graph::from_indices(2, &[(0, 1), (0, 1)]),
        ]
    }

    #[test]
    fn c_curvature_and_commutation() {
        for g in graphs() {
            let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
            for a in 0..g.num_vertices() {
                let c = build_c(&alg, a, &rf("t")).unwrap();
                assert!(c.check_parity());
                assert!(c.check_supercommutation());
                assert!(c.check_curvature());
                for b in 0..g.num_vertices() {
                    assert_eq!(c.left_right_agree(b), b != a);
                }
            }
        }
    }

    #[test]
    fn unit_tensor_is_identity() {
        let g = Graph::from_indices(2, &[(0, 1)]);
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let c = build_c(&alg, 0, &rf("t")).unwrap();
        let z = vec![RatFunc::zero(4); 2];
        let u = unit_bimodule(&alg, z.clone(), z);
        let t = tensor(&u, &c).unwrap();
        assert_eq!(t.dim(), c.dim());
        assert_eq!(t.d, c.d);
        assert_eq!((t.c0.clone(), t.c1.clone()), (c.c0.clone(), c.c1.clone()));
    }

    #[test]
    fn zero_scalar_gives_square_zero() {
        let g = Graph::from_indices(2, &[(0, 1)]);
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let c = build_c(&alg, 1, &RatFunc::zero(4)).unwrap();
        assert!(c.d_squared().is_zero());
    }

    #[test]
    fn middle_spaces() {
        let g = Graph::from_indices(3, &[(0, 1), (1, 2)]);
        let alg = ZigzagAlgebra::new(&g, 4);
        assert_eq!(alg.hom_basis(0, 2).len(), 0);
        assert_eq!(alg.hom_basis(0, 0).len(), 2);
        assert_eq!(alg.hom_basis(0, 1).len(), 1);
    }

    #[test]
    fn inverse_pair_reduces_to_unit() {
        for g in graphs() {
            let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
            let x = rf("t");
            let n = build_c(&alg, 0, &x.neg()).unwrap();
            let m = build_c(&alg, 0, &x).unwrap();
            let t = tensor(&n, &m).unwrap();
            assert!(t.check_supercommutation());
            assert!(t.check_curvature());
            let r = reduce(&t, Schedule::Forward);
            assert!(r.check_curvature());
            assert_eq!(r.dim(), alg.dim());
            let u = unit_bimodule(&alg, r.c0.clone(), r.c1.clone());
            assert!(find_duplex_iso(&r, &u).is_some());
        }
    }

    #[test]
    fn contractible_projective_pair() {
        let g = Graph::from_indices(2, &[(0, 1)]);
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let blocks = vec![
            Block::new(BlockKind::LP(1), 0, vec![Mult::new(0, vec![Atom::Gen(0)])]),
            Block::new(BlockKind::LP(1), 1, vec![Mult::new(0, vec![Atom::Gen(1)])]),
        ];
        let z = vec![RatFunc::zero(4); 2];
        let d = Duplex::from_generator_images(alg, blocks, false, z.clone(), z, |dx, b, u, _| {
            if b == 0 { vec![(dx.generator(1, u, 0).unwrap(), RatFunc::from_int(4, 3))] } else { vec![] }
        })
        .unwrap();
        assert_eq!(reduce(&d, Schedule::Forward).dim(), 0);
    }
}
