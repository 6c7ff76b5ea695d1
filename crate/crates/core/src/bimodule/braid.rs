use std::sync::Arc;

use super::{build_c, reduce, tensor, Schedule};
use crate::algebra::ZigzagAlgebra;
use crate::duplex::{find_duplex_iso, merge, Atom, Block, BlockKind, Duplex, DuplexError, Mult};
use crate::scalars::{FMatrix, RatFunc};

/// Comparison of a reduced triple product with the duplex written from the printed matrices.
#[derive(Debug, Clone)]
pub struct PatternCheck {
    /// The printed duplex squares to the curvature of the reduced product.
    pub curvature_ok: bool,
    /// An isomorphism from the reduced product onto the printed duplex exists.
    pub iso_ok: bool,
    /// Odd-to-even part of the conjugated differential equals the first matrix.
    pub first_ok: bool,
    /// Even-to-odd part of the conjugated differential equals the last matrix.
    pub last_ok: bool,
    /// Recorded change of basis, from the reduced product to the printed basis.
    pub basis_change: Option<FMatrix>,
}

impl PatternCheck {
    pub fn ok(&self) -> bool {
        self.curvature_ok && self.iso_ok && self.first_ok && self.last_ok
    }
}

#[derive(Debug, Clone)]
pub struct BraidReport {
    pub a: usize,
    pub b: usize,
    pub adjacent: bool,
    pub dims: (usize, usize),
    pub reduced_dims: (usize, usize),
    pub curvature_ok: bool,
    /// Reduced sides are isomorphic as bimodule duplexes.
    pub iso: bool,
    /// Unreduced sides agree up to a permutation of summands (non-adjacent case).
    pub equal_on_nose: Option<bool>,
    pub lhs_pattern: Option<PatternCheck>,
    pub rhs_pattern: Option<PatternCheck>,
}

impl BraidReport {
    pub fn ok(&self) -> bool {
        self.curvature_ok
            && self.iso
            && self.equal_on_nose.unwrap_or(true)
            && self.lhs_pattern.as_ref().map_or(true, |p| p.ok())
            && self.rhs_pattern.as_ref().map_or(true, |p| p.ok())
    }
}

fn gen(k: usize) -> Vec<Mult> {
    vec![Mult::new(0, vec![Atom::Gen(k)])]
}

/// The reduced form of C_{a,y} C_{b,x+y} C_{a,x} for an edge h from a to b, written from
/// the printed matrices, with the given curvature pair.
pub fn braid_pattern(
    alg: &Arc<ZigzagAlgebra>,
    h: usize,
    x: &RatFunc,
    y: &RatFunc,
    c0: Vec<RatFunc>,
    c1: Vec<RatFunc>,
) -> Result<Duplex, DuplexError> {
    let g = alg.graph();
    let (a, b, hb) = (g.o(h), g.i(h), g.bar(h));
    let m = alg.conductor();
    let eps = |e: usize| RatFunc::from_int(m, g.eps(e));
    let xy = x.try_add(y).unwrap();
    let (ah, ahb) = (alg.arrow(h), alg.arrow(hb));
    let tw = [1u8, 1, 0, 0];
    let blocks = vec![
        Block::new(BlockKind::BP(a, a), tw[0], vec![Mult::new(1 - tw[0], vec![Atom::Gen(1)])]),
        Block::new(BlockKind::BP(b, b), tw[1], vec![Mult::new(1 - tw[1], vec![Atom::Gen(1)])]),
        Block::new(BlockKind::BP(a, b), tw[2], vec![Mult::new(1 - tw[2], vec![Atom::Gen(1)])]),
        Block::new(BlockKind::BA, 0, gen(0)),
        Block::new(BlockKind::BP(b, a), tw[3], vec![Mult::new(1 - tw[3], vec![Atom::Gen(1)])]),
    ];
    let delta = |dx: &Duplex, v: usize, k: usize, s: &RatFunc, out: &mut Vec<(usize, RatFunc)>| {
        let blk = if v == a { 0 } else { 1 };
        if k == v {
            out.push((dx.index(blk, alg.x(v), 0, Some(alg.e(v))).unwrap(), s.clone()));
            out.push((dx.index(blk, alg.e(v), 0, Some(alg.x(v))).unwrap(), s.clone()));
        }
        for e in g.out_edges(v) {
            if g.i(e) == k {
                let c = s.try_mul(&eps(e)).unwrap();
                out.push((dx.index(blk, alg.arrow(g.bar(e)), 0, Some(alg.arrow(e))).unwrap(), c));
            }
        }
    };
    Duplex::from_generator_images(alg.clone(), blocks, true, c0, c1, |dx, blk, _, k| {
        let mut out = Vec::new();
        match blk {
            0 => {
                out.push((dx.index(2, alg.e(a), 0, Some(ahb)).unwrap(), eps(hb).try_mul(y).unwrap()));
                out.push((dx.generator(3, 0, a).unwrap(), RatFunc::one(m)));
                out.push((dx.index(4, ah, 0, Some(alg.e(a))).unwrap(), eps(h).try_mul(x).unwrap()));
            }
            1 => {
                out.push((dx.index(2, ahb, 0, Some(alg.e(b))).unwrap(), eps(h).try_mul(y).unwrap()));
                out.push((dx.generator(3, 0, b).unwrap(), RatFunc::from_int(m, -1)));
                out.push((dx.index(4, alg.e(b), 0, Some(ah)).unwrap(), eps(hb).try_mul(x).unwrap()));
            }
            2 => {
                out.push((dx.index(0, alg.e(a), 0, Some(ah)).unwrap(), RatFunc::one(m)));
                out.push((dx.index(1, ah, 0, Some(alg.e(b))).unwrap(), RatFunc::one(m)));
            }
            3 => {
                delta(dx, a, k, &xy, &mut out);
                delta(dx, b, k, &xy.neg(), &mut out);
            }
            _ => {
                out.push((dx.index(0, ahb, 0, Some(alg.e(a))).unwrap(), RatFunc::from_int(m, -1)));
                out.push((dx.index(1, alg.e(b), 0, Some(ahb)).unwrap(), RatFunc::from_int(m, -1)));
            }
        }
        merge(out)
    })
}

fn check_pattern(red: &Duplex, pat: Duplex) -> PatternCheck {
    let curvature_ok = pat.check_curvature() && pat.check_parity();
    let iso = find_duplex_iso(red, &pat);
    let Some(iso) = iso else {
        return PatternCheck { curvature_ok, iso_ok: false, first_ok: false, last_ok: false, basis_change: None };
    };
    let inv = iso.phi.inverse().expect("iso is invertible");
    let conj = iso.phi.try_mul(&red.d).unwrap().try_mul(&inv).unwrap();
    let n = pat.dim();
    let part = |src: u8| (0..n).all(|c| pat.parity(c) != src || (0..n).all(|r| conj.get(r, c) == pat.d.get(r, c)));
    PatternCheck { curvature_ok, iso_ok: true, first_ok: part(1), last_ok: part(0), basis_change: Some(iso.phi) }
}

/// Whether two duplexes agree after matching their blocks by kind and twist.
pub fn equal_up_to_block_order(d1: &Duplex, d2: &Duplex) -> bool {
    if d1.dim() != d2.dim() || d1.blocks().len() != d2.blocks().len() || d1.c0 != d2.c0 || d1.c1 != d2.c1 {
        return false;
    }
    let mut map = Vec::new();
    let mut used = vec![false; d2.blocks().len()];
    for b1 in d1.blocks() {
        let Some(k) = (0..d2.blocks().len()).find(|&k| {
            let b2 = &d2.blocks()[k];
            !used[k] && b2.kind == b1.kind && b2.twist == b1.twist && b2.mult.len() == b1.mult.len()
        }) else {
            return false;
        };
        used[k] = true;
        map.push(k);
    }
    let perm: Vec<usize> = d1.elems().iter().map(|e| d2.index(map[e.block], e.l, e.u, e.r).unwrap()).collect();
    let n = d1.dim();
    (0..n).all(|i| (0..n).all(|j| d1.d.get(i, j) == d2.d.get(perm[i], perm[j])))
}

fn product(alg: &Arc<ZigzagAlgebra>, seq: &[(usize, RatFunc)]) -> Result<Duplex, DuplexError> {
    let mut it = seq.iter().rev();
    let (v, s) = it.next().unwrap();
    let mut cur = build_c(alg, *v, s).map_err(|e| DuplexError::Other(e.to_string()))?;
    for (v, s) in it {
        let c = build_c(alg, *v, s).map_err(|e| DuplexError::Other(e.to_string()))?;
        cur = tensor(&c, &cur)?;
    }
    Ok(cur)
}

/// Braid relation for adjacent a, b, or commutation for non-adjacent ones, with parameters x, y.
pub fn verify_braid(alg: &Arc<ZigzagAlgebra>, a: usize, b: usize, x: &RatFunc, y: &RatFunc) -> Result<BraidReport, DuplexError> {
    let g = alg.graph();
    let edges: Vec<usize> = g.out_edges(a).into_iter().filter(|&h| g.i(h) == b).collect();
    if edges.len() > 1 {
        return Err(DuplexError::Other(format!("vertices {a} and {b} are joined by {} edges", edges.len())));
    }
    let xy = x.try_add(y).unwrap();
    let (lhs, rhs) = if edges.is_empty() {
        (product(alg, &[(a, x.clone()), (b, y.clone())])?, product(alg, &[(b, y.clone()), (a, x.clone())])?)
    } else {
        (
            product(alg, &[(a, y.clone()), (b, xy.clone()), (a, x.clone())])?,
            product(alg, &[(b, x.clone()), (a, xy.clone()), (b, y.clone())])?,
        )
    };
    let rl = reduce(&lhs, Schedule::Forward);
    let rr = reduce(&rhs, Schedule::Forward);
    let curvature_ok = [&lhs, &rhs, &rl, &rr].iter().all(|d| d.check_curvature());
    let iso = find_duplex_iso(&rl, &rr).is_some();
    let mut report = BraidReport {
        a,
        b,
        adjacent: !edges.is_empty(),
        dims: (lhs.dim(), rhs.dim()),
        reduced_dims: (rl.dim(), rr.dim()),
        curvature_ok,
        iso,
        equal_on_nose: None,
        lhs_pattern: None,
        rhs_pattern: None,
    };
    if let Some(&h) = edges.first() {
        let pl = braid_pattern(alg, h, x, y, rl.c0.clone(), rl.c1.clone())?;
        let pr = braid_pattern(alg, g.bar(h), y, x, rr.c0.clone(), rr.c1.clone())?;
        report.lhs_pattern = Some(check_pattern(&rl, pl));
        report.rhs_pattern = Some(check_pattern(&rr, pr));
    } else {
        report.equal_on_nose = Some(equal_up_to_block_order(&lhs, &rhs));
    }
    Ok(report)
}
