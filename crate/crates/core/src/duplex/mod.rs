//! Z/2-graded modules and bimodules over A(Q) with a differential squaring to a central element.
//!
//! A duplex is a list of blocks. Each block is a free factor (P_a, S_a, P_a (x) _bP or A)
//! tensored with a labelled multiplicity space. The algebra acts structurally; only the
//! differential is stored as a dense matrix acting on columns.

mod iso;
mod point;

use std::sync::Arc;

pub use iso::{chain_maps, find_duplex_iso, is_chain_map, DuplexIso};
pub use point::{
    assemble, check_complex_moment, check_real_moment, extract_point, framed_iso, stability_check,
    Convention, ExtractError, FramedPoint, PointError, Stability,
};

use crate::algebra::ZigzagAlgebra;
use crate::scalars::{FMatrix, RatFunc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    /// P_a as a left module.
    LP(usize),
    /// S_a as a left module.
    LS(usize),
    /// P_a (x) _bP as a bimodule.
    BP(usize, usize),
    /// A as a bimodule.
    BA,
}

impl BlockKind {
    pub fn is_bimodule(self) -> bool {
        matches!(self, BlockKind::BP(..) | BlockKind::BA)
    }

    pub fn is_projective(self) -> bool {
        !matches!(self, BlockKind::LS(_))
    }
}

/// Provenance label of one multiplicity vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    V(usize, usize),
    W(usize, usize),
    Alg(usize),
    Hat(usize),
    Gen(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mult {
    pub parity: u8,
    pub tag: Vec<Atom>,
}

impl Mult {
    pub fn new(parity: u8, tag: Vec<Atom>) -> Self {
        Mult { parity: parity % 2, tag }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    /// A shift [1]: the left action picks up (-1)^{|x|}.
    pub twist: u8,
    pub mult: Vec<Mult>,
}

impl Block {
    pub fn new(kind: BlockKind, twist: u8, mult: Vec<Mult>) -> Self {
        Block { kind, twist: twist % 2, mult }
    }
}

/// One basis vector: left factor l, multiplicity u, optional right factor r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Elem {
    pub block: usize,
    pub l: usize,
    pub u: usize,
    pub r: Option<usize>,
}

#[derive(Debug, Clone)]
struct Layout {
    lbasis: Vec<usize>,
    rbasis: Option<Vec<usize>>,
    lpos: Vec<Option<usize>>,
    rpos: Vec<Option<usize>>,
}

impl Layout {
    fn nr(&self) -> usize {
        self.rbasis.as_ref().map_or(1, |r| r.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DuplexError {
    #[error("mixing module and bimodule blocks")]
    MixedKinds,
    #[error("differential has shape {0}x{1}, expected {2}x{2}")]
    Shape(usize, usize, usize),
    #[error("curvature mismatch at vertex {0}")]
    Curvature(usize),
    #[error("cancellation block is not invertible")]
    NotInvertible,
    #[error("{0}")]
    Other(String),
}

/// A module or bimodule duplex with curvature d^2 = l(c0) + r(c1).
#[derive(Debug, Clone)]
pub struct Duplex {
    alg: Arc<ZigzagAlgebra>,
    blocks: Vec<Block>,
    layouts: Vec<Layout>,
    offsets: Vec<usize>,
    elems: Vec<Elem>,
    bimodule: bool,
    pub d: FMatrix,
    pub c0: Vec<RatFunc>,
    pub c1: Vec<RatFunc>,
}

impl Duplex {
    pub fn new(
        alg: Arc<ZigzagAlgebra>,
        blocks: Vec<Block>,
        bimodule: bool,
        d: FMatrix,
        c0: Vec<RatFunc>,
        c1: Vec<RatFunc>,
    ) -> Result<Self, DuplexError> {
        if blocks.iter().any(|b| b.kind.is_bimodule() != bimodule) {
            return Err(DuplexError::MixedKinds);
        }
        let blocks: Vec<Block> = blocks.into_iter().filter(|b| !b.mult.is_empty()).collect();
        let layouts: Vec<Layout> = blocks.iter().map(|b| layout(&alg, b.kind)).collect();
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut elems = Vec::new();
        offsets.push(0);
        for (k, (b, lay)) in blocks.iter().zip(&layouts).enumerate() {
            for &l in &lay.lbasis {
                for u in 0..b.mult.len() {
                    match &lay.rbasis {
                        None => elems.push(Elem { block: k, l, u, r: None }),
                        Some(rb) => {
                            for &r in rb {
                                elems.push(Elem { block: k, l, u, r: Some(r) });
                            }
                        }
                    }
                }
            }
            offsets.push(elems.len());
        }
        let n = elems.len();
        if d.rows() != n || d.cols() != n {
            return Err(DuplexError::Shape(d.rows(), d.cols(), n));
        }
        Ok(Duplex { alg, blocks, layouts, offsets, elems, bimodule, d, c0, c1 })
    }

    /// Builds d from the images of generators, extended by supercommutation with the
    /// left action and commutation with the right action. `image(block, u, k)` returns
    /// the image of (e, u, e); for A-blocks k names the idempotent e_k.
    pub fn from_generator_images(
        alg: Arc<ZigzagAlgebra>,
        blocks: Vec<Block>,
        bimodule: bool,
        c0: Vec<RatFunc>,
        c1: Vec<RatFunc>,
        mut image: impl FnMut(&Duplex, usize, usize, usize) -> Vec<(usize, RatFunc)>,
    ) -> Result<Self, DuplexError> {
        let m = alg.conductor();
        let probe = Duplex::new(alg.clone(), blocks.clone(), bimodule, FMatrix::zeros(m, 0, 0), vec![], vec![]);
        let n = match &probe {
            Err(DuplexError::Shape(_, _, n)) => *n,
            Err(e) => return Err(e.clone()),
            Ok(_) => 0,
        };
        let mut shell = Duplex::new(alg, blocks, bimodule, FMatrix::zeros(m, n, n), c0, c1)?;
        let mut d = FMatrix::zeros(m, n, n);
        let mut cache: std::collections::HashMap<(usize, usize, usize), Vec<(usize, RatFunc)>> = Default::default();
        for j in 0..n {
            let el = shell.elems[j];
            let blk = &shell.blocks[el.block];
            let (k, p) = match blk.kind {
                BlockKind::LS(a) => (a, None),
                BlockKind::BA => (shell.alg.right_vertex(el.l), Some(el.l)),
                _ => (0, Some(el.l)),
            };
            let key = (el.block, el.u, k);
            if !cache.contains_key(&key) {
                let img = image(&shell, el.block, el.u, k);
                cache.insert(key, img);
            }
            let img = &cache[&key];
            for (t, coef) in img {
                let out = match p {
                    None => Some((1, *t)),
                    Some(p) => {
                        let tk = blk.twist as i64;
                        let pd = shell.alg.parity(p) as i64;
                        shell.plain_act(Some(p), *t, el.r).map(|(s, idx)| {
                            let tl = shell.blocks[shell.elems[idx].block].twist as i64;
                            let sign = if ((tk + 1 + tl) * pd) % 2 == 0 { 1 } else { -1 };
                            (s * sign, idx)
                        })
                    }
                };
                if let Some((s, i)) = out {
                    let v = d.get(i, j).try_add(&coef.try_mul(&RatFunc::from_int(m, s)).unwrap()).unwrap();
                    d.set(i, j, v);
                }
            }
        }
        shell.d = d;
        Ok(shell)
    }

    pub fn alg(&self) -> &Arc<ZigzagAlgebra> {
        &self.alg
    }

    pub fn conductor(&self) -> u32 {
        self.alg.conductor()
    }

    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn is_bimodule(&self) -> bool {
        self.bimodule
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    pub fn index(&self, block: usize, l: usize, u: usize, r: Option<usize>) -> Option<usize> {
        let lay = &self.layouts[block];
        let lp = lay.lpos[l]?;
        let nu = self.blocks[block].mult.len();
        let rp = match (r, &lay.rbasis) {
            (None, None) => 0,
            (Some(r), Some(_)) => lay.rpos[r]?,
            _ => return None,
        };
        Some(self.offsets[block] + (lp * nu + u) * lay.nr() + rp)
    }

    /// Index of the generator (e, u, e) of a projective slice, or of the S basis vector.
    pub fn generator(&self, block: usize, u: usize, k: usize) -> Option<usize> {
        match self.blocks[block].kind {
            BlockKind::LP(a) | BlockKind::LS(a) => self.index(block, self.alg.e(a), u, None),
            BlockKind::BP(a, b) => self.index(block, self.alg.e(a), u, Some(self.alg.e(b))),
            BlockKind::BA => self.index(block, self.alg.e(k), u, None),
        }
    }

    /// All coordinates of the slice (block, u).
    pub fn slice_coords(&self, block: usize, u: usize) -> Vec<usize> {
        self.block_range(block).filter(|&i| self.elems[i].u == u).collect()
    }

    pub fn parity(&self, i: usize) -> u8 {
        let el = self.elems[i];
        let b = &self.blocks[el.block];
        let lpar = match b.kind {
            BlockKind::LS(_) => 0,
            _ => self.alg.parity(el.l),
        };
        let rpar = el.r.map_or(0, |r| self.alg.parity(r));
        (b.twist + lpar + b.mult[el.u].parity + rpar) % 2
    }

    /// Parity of the slice generator.
    pub fn slice_parity(&self, block: usize, u: usize) -> u8 {
        let b = &self.blocks[block];
        (b.twist + b.mult[u].parity) % 2
    }

    /// Untwisted product p * elem * q inside the same block.
    fn plain_act(&self, p: Option<usize>, i: usize, q: Option<usize>) -> Option<(i64, usize)> {
        let el = self.elems[i];
        let kind = self.blocks[el.block].kind;
        let mut sign = 1;
        let mut l = el.l;
        let mut r = el.r;
        if let Some(p) = p {
            match kind {
                BlockKind::LS(a) => {
                    if p != self.alg.e(a) {
                        return None;
                    }
                }
                _ => {
                    let (s, k) = self.alg.mul_basis(p, l)?;
                    sign *= s;
                    l = k;
                }
            }
        }
        if let Some(q) = q {
            match kind {
                BlockKind::BP(..) => {
                    let (s, k) = self.alg.mul_basis(r?, q)?;
                    sign *= s;
                    r = Some(k);
                }
                BlockKind::BA => {
                    let (s, k) = self.alg.mul_basis(l, q)?;
                    sign *= s;
                    l = k;
                }
                _ => return None,
            }
        }
        Some((sign, self.index(el.block, l, el.u, r)?))
    }

    /// Twisted left action of the basis element x on basis vector i.
    pub fn left_image(&self, x: usize, i: usize) -> Option<(i64, usize)> {
        let (s, k) = self.plain_act(Some(x), i, None)?;
        let tw = self.blocks[self.elems[i].block].twist as u8 * self.alg.parity(x);
        Some((if tw % 2 == 0 { s } else { -s }, k))
    }

    pub fn right_image(&self, y: usize, i: usize) -> Option<(i64, usize)> {
        if !self.bimodule {
            return None;
        }
        self.plain_act(None, i, Some(y))
    }

    /// Signed action p * v * q on a sparse vector, with the twisted left action.
    pub fn act_vec(&self, p: Option<usize>, v: &[(usize, RatFunc)], q: Option<usize>) -> Vec<(usize, RatFunc)> {
        let m = self.conductor();
        let mut out: Vec<(usize, RatFunc)> = Vec::new();
        for (i, c) in v {
            let mut cur = Some((1i64, *i));
            if let Some(q) = q {
                cur = cur.and_then(|(s, k)| self.right_image(q, k).map(|(t, l)| (s * t, l)));
            }
            if let Some(p) = p {
                cur = cur.and_then(|(s, k)| self.left_image(p, k).map(|(t, l)| (s * t, l)));
            }
            if let Some((s, k)) = cur {
                out.push((k, c.try_mul(&RatFunc::from_int(m, s)).unwrap()));
            }
        }
        merge(out)
    }

    pub fn column(&self, j: usize) -> Vec<(usize, RatFunc)> {
        (0..self.dim()).filter(|&i| !self.d.get(i, j).is_zero()).map(|i| (i, self.d.get(i, j).clone())).collect()
    }

    fn action_matrix(&self, x: usize, left: bool) -> FMatrix {
        let m = self.conductor();
        let n = self.dim();
        let mut a = FMatrix::zeros(m, n, n);
        for j in 0..n {
            let img = if left { self.left_image(x, j) } else { self.right_image(x, j) };
            if let Some((s, i)) = img {
                a.set(i, j, RatFunc::from_int(m, s));
            }
        }
        a
    }

    pub fn left_matrix(&self, x: usize) -> FMatrix {
        self.action_matrix(x, true)
    }

    pub fn right_matrix(&self, y: usize) -> FMatrix {
        self.action_matrix(y, false)
    }

    /// l(c0) + r(c1) as a matrix.
    pub fn curvature_operator(&self) -> FMatrix {
        let m = self.conductor();
        let n = self.dim();
        let mut out = FMatrix::zeros(m, n, n);
        for a in 0..self.alg.num_vertices() {
            let x = self.alg.x(a);
            for (c, left) in [(&self.c0, true), (&self.c1, false)] {
                let Some(ca) = c.get(a) else { continue };
                if ca.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let img = if left { self.left_image(x, j) } else { self.right_image(x, j) };
                    if let Some((s, i)) = img {
                        let v = out.get(i, j).try_add(&ca.try_mul(&RatFunc::from_int(m, s)).unwrap()).unwrap();
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn d_squared(&self) -> FMatrix {
        self.d.try_mul(&self.d).unwrap()
    }

    /// d^2 - l(c0) - r(c1).
    pub fn curvature_residual(&self) -> FMatrix {
        self.d_squared().try_sub(&self.curvature_operator()).unwrap()
    }

    pub fn check_curvature(&self) -> bool {
        self.curvature_residual().is_zero()
    }

    /// d maps even to odd and odd to even.
    pub fn check_parity(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.d.get(i, j).is_zero() || self.parity(i) != self.parity(j)))
    }

    /// d L_x = (-1)^{|x|} L_x d for all basis x, and d R_y = R_y d on bimodules.
    pub fn check_supercommutation(&self) -> bool {
        let m = self.conductor();
        let n = self.dim();
        for x in 0..self.alg.dim() {
            for left in [true, false] {
                if !left && !self.bimodule {
                    continue;
                }
                let sign = if left && self.alg.parity(x) == 1 { -1 } else { 1 };
                let act = |i: usize| if left { self.left_image(x, i) } else { self.right_image(x, i) };
                for j in 0..n {
                    let mut lhs: Vec<(usize, RatFunc)> = Vec::new();
                    if let Some((s, k)) = act(j) {
                        for (i, c) in self.column(k) {
                            lhs.push((i, c.try_mul(&RatFunc::from_int(m, s * sign)).unwrap()));
                        }
                    }
                    let mut rhs: Vec<(usize, RatFunc)> = Vec::new();
                    for (i, c) in self.column(j) {
                        if let Some((s, k)) = act(i) {
                            rhs.push((k, c.try_mul(&RatFunc::from_int(m, s)).unwrap()));
                        }
                    }
                    if merge(lhs) != merge(rhs) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether l(X_b) and r(X_b) coincide on every basis vector.
    pub fn left_right_agree(&self, b: usize) -> bool {
        let x = self.alg.x(b);
        (0..self.dim()).all(|i| self.left_image(x, i) == self.right_image(x, i))
    }

    /// Rewrites twisted blocks of kinds LP, LS and BP to untwisted ones by the basis change
    /// (l, u, r) -> (-1)^{|l|} (l, u, r); the multiplicity parity absorbs the shift.
    pub fn normalize_twists(&self) -> Duplex {
        let m = self.conductor();
        let n = self.dim();
        let mut sign = vec![1i64; n];
        let mut blocks = self.blocks.clone();
        for (k, b) in blocks.iter_mut().enumerate() {
            if b.twist == 0 || b.kind == BlockKind::BA {
                continue;
            }
            for i in self.block_range(k) {
                if !matches!(b.kind, BlockKind::LS(_)) && self.alg.parity(self.elems[i].l) == 1 {
                    sign[i] = -1;
                }
            }
            b.twist = 0;
            for mu in b.mult.iter_mut() {
                mu.parity = (mu.parity + 1) % 2;
            }
        }
        let d = FMatrix::from_fn(m, n, n, |i, j| {
            let v = self.d.get(i, j);
            if sign[i] * sign[j] == 1 { v.clone() } else { v.neg() }
        });
        Duplex::new(self.alg.clone(), blocks, self.bimodule, d, self.c0.clone(), self.c1.clone()).unwrap()
    }

    /// Replaces the differential, keeping blocks and curvature.
    pub fn with_d(&self, d: FMatrix) -> Duplex {
        let mut out = self.clone();
        out.d = d;
        out
    }

    /// Same underlying module, new block list of equal layout (used to relabel multiplicities).
    pub fn with_blocks(&self, blocks: Vec<Block>) -> Result<Duplex, DuplexError> {
        Duplex::new(self.alg.clone(), blocks, self.bimodule, self.d.clone(), self.c0.clone(), self.c1.clone())
    }

    /// Restriction of d to the given coordinates (rows, cols).
    pub fn d_block(&self, rows: &[usize], cols: &[usize]) -> FMatrix {
        self.d.select(rows, cols)
    }

    /// Human-readable coordinate label.
    pub fn elem_label(&self, i: usize) -> String {
        let el = self.elems[i];
        let b = &self.blocks[el.block];
        let l = match b.kind {
            BlockKind::LS(a) => format!("S{}", self.alg.graph().vertex_name(a)),
            _ => self.alg.label(el.l),
        };
        let r = el.r.map(|r| format!("|{}", self.alg.label(r))).unwrap_or_default();
        format!("{l}|{:?}{r}", b.mult[el.u].tag)
    }
}

fn layout(alg: &ZigzagAlgebra, kind: BlockKind) -> Layout {
    let d = alg.dim();
    let (lbasis, rbasis) = match kind {
        BlockKind::LP(a) => (alg.proj_basis(a), None),
        BlockKind::LS(a) => (vec![alg.e(a)], None),
        BlockKind::BP(a, b) => (alg.proj_basis(a), Some(alg.right_proj_basis(b))),
        BlockKind::BA => ((0..d).collect(), None),
    };
    let mut lpos = vec![None; d];
    for (k, &l) in lbasis.iter().enumerate() {
        lpos[l] = Some(k);
    }
    let mut rpos = vec![None; d];
    if let Some(rb) = &rbasis {
        for (k, &r) in rb.iter().enumerate() {
            rpos[r] = Some(k);
        }
    }
    Layout { lbasis, rbasis, lpos, rpos }
}

/// Sorts a sparse vector by index and sums duplicates, dropping zeros.
pub fn merge(mut v: Vec<(usize, RatFunc)>) -> Vec<(usize, RatFunc)> {
    v.sort_by_key(|x| x.0);
    let mut out: Vec<(usize, RatFunc)> = Vec::with_capacity(v.len());
    for (i, c) in v {
        match out.last_mut() {
            Some((j, acc)) if *j == i => *acc = acc.try_add(&c).unwrap(),
            _ => out.push((i, c)),
        }
    }
    out.retain(|x| !x.1.is_zero());
    out
}
