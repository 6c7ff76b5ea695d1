use std::sync::Arc;

use num_rational::BigRational;

use super::{Atom, Block, BlockKind, Duplex, Mult};
use crate::algebra::ZigzagAlgebra;
use crate::quiver::Graph;
use crate::scalars::{FMatrix, RatFunc};

/// Framed data (B, i, j). B is indexed by half-edge, B_h : V_{o(h)} -> V_{i(h)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedPoint {
    pub graph: Graph,
    pub m: u32,
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub b: Vec<FMatrix>,
    pub i: Vec<FMatrix>,
    pub j: Vec<FMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PointError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("conductor {0} has no square root of -1")]
    NoImaginaryUnit(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("duplex is not in canonical form: {0}")]
    NotCanonical(String),
    #[error("forced block mismatch at {0}")]
    ForcedBlockMismatch(String),
}

/// Sign convention for the quadratic term of the complex moment map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// sum over o(h)=a of eps(hbar) B_hbar B_h
    #[default]
    Centerm,
    /// sum over o(h)=a of eps(h) B_hbar B_h
    Mu,
}

impl FramedPoint {
    /// All maps zero.
    pub fn zero(graph: &Graph, m: u32, v: &[usize], w: &[usize]) -> Self {
        let b = graph.half_edges().map(|h| FMatrix::zeros(m, v[graph.i(h)], v[graph.o(h)])).collect();
        let i = (0..v.len()).map(|a| FMatrix::zeros(m, v[a], w[a])).collect();
        let j = (0..v.len()).map(|a| FMatrix::zeros(m, w[a], v[a])).collect();
        FramedPoint { graph: graph.clone(), m, v: v.to_vec(), w: w.to_vec(), b, i, j }
    }

    pub fn validate(&self) -> Result<(), PointError> {
        let g = &self.graph;
        let n = g.num_vertices();
        if self.v.len() != n || self.w.len() != n || self.i.len() != n || self.j.len() != n {
            return Err(PointError::Shape("vertex count".into()));
        }
        if self.b.len() != g.num_half_edges() {
            return Err(PointError::Shape("half-edge count".into()));
        }
        for h in g.half_edges() {
            let bh = &self.b[h];
            if (bh.rows(), bh.cols()) != (self.v[g.i(h)], self.v[g.o(h)]) {
                return Err(PointError::Shape(format!("B[{}]", g.half_edge_id(h))));
            }
        }
        for a in 0..n {
            if (self.i[a].rows(), self.i[a].cols()) != (self.v[a], self.w[a]) {
                return Err(PointError::Shape(format!("i[{}]", g.vertex_name(a))));
            }
            if (self.j[a].rows(), self.j[a].cols()) != (self.w[a], self.v[a]) {
                return Err(PointError::Shape(format!("j[{}]", g.vertex_name(a))));
            }
        }
        let all = self.b.iter().chain(&self.i).chain(&self.j);
        if all.into_iter().any(|x| x.conductor() != self.m) {
            return Err(PointError::Shape("conductor".into()));
        }
        Ok(())
    }

    /// Action of g = (g_a): B_h -> g_i B_h g_o^{-1}, i -> g i, j -> j g^{-1}.
    pub fn conjugate(&self, g: &[FMatrix]) -> Result<Self, crate::scalars::ScalarError> {
        let inv: Vec<FMatrix> = g.iter().map(|x| x.inverse()).collect::<Result<_, _>>()?;
        let gr = &self.graph;
        let mut out = self.clone();
        for h in gr.half_edges() {
            out.b[h] = g[gr.i(h)].try_mul(&self.b[h])?.try_mul(&inv[gr.o(h)])?;
        }
        for a in 0..self.v.len() {
            out.i[a] = g[a].try_mul(&self.i[a])?;
            out.j[a] = self.j[a].try_mul(&inv[a])?;
        }
        Ok(out)
    }
}

/// M = sum_a P_a (x) V_a + S_a[-1] (x) W_a with d built from (B, i, j).
pub fn assemble(alg: &Arc<ZigzagAlgebra>, p: &FramedPoint, c: &[RatFunc]) -> Duplex {
    let g = alg.graph();
    let n = g.num_vertices();
    let mut blocks = Vec::new();
    let mut lp = vec![None; n];
    let mut ls = vec![None; n];
    for a in 0..n {
        if p.v[a] > 0 {
            lp[a] = Some(blocks.len());
            blocks.push(Block::new(BlockKind::LP(a), 0, (0..p.v[a]).map(|r| Mult::new(0, vec![Atom::V(a, r)])).collect()));
        }
    }
    for a in 0..n {
        if p.w[a] > 0 {
            ls[a] = Some(blocks.len());
            blocks.push(Block::new(BlockKind::LS(a), 0, (0..p.w[a]).map(|r| Mult::new(1, vec![Atom::W(a, r)])).collect()));
        }
    }
    let zero = vec![RatFunc::zero(alg.conductor()); n];
    Duplex::from_generator_images(alg.clone(), blocks, false, c.to_vec(), zero, |dx, blk, u, _| {
        let mut out = Vec::new();
        match dx.blocks()[blk].kind {
            BlockKind::LP(a) => {
                for h in g.out_edges(a) {
                    let t = g.i(h);
                    for r in 0..p.v[t] {
                        let x = p.b[h].get(r, u);
                        if !x.is_zero() {
                            out.push((dx.index(lp[t].unwrap(), alg.arrow(h), r, None).unwrap(), x.clone()));
                        }
                    }
                }
                for s in 0..p.w[a] {
                    let x = p.j[a].get(s, u);
                    if !x.is_zero() {
                        out.push((dx.generator(ls[a].unwrap(), s, a).unwrap(), x.clone()));
                    }
                }
            }
            BlockKind::LS(a) => {
                for r in 0..p.v[a] {
                    let x = p.i[a].get(r, u);
                    if !x.is_zero() {
                        out.push((dx.index(lp[a].unwrap(), alg.x(a), r, None).unwrap(), x.clone()));
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    })
    .expect("assembled blocks are consistent")
}

/// Per-vertex residual of the complex moment map against c.
pub fn check_complex_moment(p: &FramedPoint, c: &[RatFunc], conv: Convention) -> Vec<FMatrix> {
    let g = &p.graph;
    let m = p.m;
    (0..g.num_vertices())
        .map(|a| {
            let mut r = p.i[a].try_mul(&p.j[a]).unwrap();
            for h in g.out_edges(a) {
                let e = match conv {
                    Convention::Centerm => g.eps(g.bar(h)),
                    Convention::Mu => g.eps(h),
                };
                let bb = p.b[g.bar(h)].try_mul(&p.b[h]).unwrap().scale(&RatFunc::from_int(m, e));
                r = r.try_add(&bb).unwrap();
            }
            r.try_sub(&FMatrix::identity(m, p.v[a]).scale(&c[a])).unwrap()
        })
        .collect()
}

fn adjoint_point(p: &FramedPoint) -> FramedPoint {
    let g = &p.graph;
    let mut q = p.clone();
    for h in g.half_edges() {
        let e = RatFunc::from_int(p.m, g.eps(g.bar(h)));
        q.b[h] = p.b[g.bar(h)].adjoint().scale(&e);
    }
    for a in 0..g.num_vertices() {
        q.i[a] = p.j[a].adjoint().neg();
        q.j[a] = p.i[a].adjoint();
    }
    q
}

/// Per-vertex residual (sqrt(-1)/2)(E_a - zeta_r,a Id), where E_a is the X_a-coefficient of
/// dd* + d*d on the generators e_a (x) V_a.
pub fn check_real_moment(alg: &Arc<ZigzagAlgebra>, p: &FramedPoint, zeta_r: &[BigRational]) -> Result<Vec<FMatrix>, PointError> {
    let m = p.m;
    let half_i = RatFunc::imag_unit(m)
        .ok_or(PointError::NoImaginaryUnit(m))?
        .try_div(&RatFunc::from_int(m, 2))
        .unwrap();
    let n = alg.num_vertices();
    let zero = vec![RatFunc::zero(m); n];
    let d = assemble(alg, p, &zero);
    let ds = assemble(alg, &adjoint_point(p), &zero);
    let anti = d.d.try_mul(&ds.d).unwrap().try_add(&ds.d.try_mul(&d.d).unwrap()).unwrap();
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let va = p.v[a];
        let blk = d.blocks().iter().position(|b| b.kind == BlockKind::LP(a));
        let mut e = FMatrix::zeros(m, va, va);
        if let Some(blk) = blk {
            for u in 0..va {
                let col = d.generator(blk, u, a).unwrap();
                for r in 0..va {
                    let row = d.index(blk, alg.x(a), r, None).unwrap();
                    e.set(r, u, anti.get(row, col).clone());
                }
            }
        }
        let z = RatFunc::from_rational(m, zeta_r[a].clone());
        let res = e.try_sub(&FMatrix::identity(m, va).scale(&z)).unwrap().scale(&half_i);
        out.push(res);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stability {
    pub stable: bool,
    /// Per-vertex basis of the largest B-invariant subspace inside ker j, as rows in reduced echelon form.
    pub witness: Vec<FMatrix>,
    pub iterations: usize,
}

/// Stability in the sense that no nonzero B-invariant subspace lies in ker j.
pub fn stability_check(p: &FramedPoint) -> Stability {
    let g = &p.graph;
    let m = p.m;
    let n = g.num_vertices();
    let mut s: Vec<FMatrix> = (0..n).map(|a| p.j[a].kernel_basis()).collect();
    let mut iterations = 0;
    loop {
        let before: Vec<usize> = s.iter().map(|x| x.cols()).collect();
        let proj: Vec<FMatrix> = s.iter().map(|x| x.cokernel_projection().unwrap().0).collect();
        let mut next = s.clone();
        for a in 0..n {
            if s[a].cols() == 0 {
                continue;
            }
            let mut cons = FMatrix::zeros(m, 0, s[a].cols());
            for h in g.out_edges(a) {
                let t = proj[g.i(h)].try_mul(&p.b[h]).unwrap().try_mul(&s[a]).unwrap();
                cons = cons.vstack(&t).unwrap();
            }
            next[a] = s[a].try_mul(&cons.kernel_basis()).unwrap();
        }
        s = next;
        let after: Vec<usize> = s.iter().map(|x| x.cols()).collect();
        if after == before {
            break;
        }
        iterations += 1;
    }
    let witness: Vec<FMatrix> = s.iter().map(|x| x.transpose().rref()).collect();
    let stable = witness.iter().all(|x| x.rows() == 0);
    Stability { stable, witness, iterations }
}

/// Reads (B, i, j) and the left curvature off a canonical module duplex.
pub fn extract_point(d: &Duplex) -> Result<(FramedPoint, Vec<RatFunc>), ExtractError> {
    if d.is_bimodule() {
        return Err(ExtractError::NotCanonical("bimodule duplex".into()));
    }
    let d = d.normalize_twists();
    let alg = d.alg().clone();
    let g = alg.graph().clone();
    let m = alg.conductor();
    let n = g.num_vertices();
    let mut vslots: Vec<Vec<(usize, usize)>> = vec![vec![]; n];
    let mut wslots: Vec<Vec<((usize, usize), usize, usize)>> = vec![vec![]; n];
    for (k, b) in d.blocks().iter().enumerate() {
        for (u, mu) in b.mult.iter().enumerate() {
            match b.kind {
                BlockKind::LP(a) => {
                    if mu.parity != 0 {
                        return Err(ExtractError::NotCanonical(format!("odd projective at vertex {a}")));
                    }
                    vslots[a].push((k, u));
                }
                BlockKind::LS(a) => {
                    if mu.parity != 1 {
                        return Err(ExtractError::NotCanonical(format!("even simple at vertex {a}")));
                    }
                    let key = mu
                        .tag
                        .iter()
                        .rev()
                        .find_map(|t| match t {
                            Atom::W(x, r) => Some((*x, *r)),
                            _ => None,
                        })
                        .unwrap_or((a, usize::MAX));
                    wslots[a].push((key, k, u));
                }
                _ => return Err(ExtractError::NotCanonical("bimodule block".into())),
            }
        }
    }
    for ws in wslots.iter_mut() {
        ws.sort();
    }
    let v: Vec<usize> = vslots.iter().map(|x| x.len()).collect();
    let w: Vec<usize> = wslots.iter().map(|x| x.len()).collect();
    let mut p = FramedPoint::zero(&g, m, &v, &w);
    for a in 0..n {
        for (u, &(blk, mu)) in vslots[a].iter().enumerate() {
            let col = d.generator(blk, mu, a).unwrap();
            for h in g.out_edges(a) {
                let t = g.i(h);
                for (r, &(tb, tm)) in vslots[t].iter().enumerate() {
                    let row = d.index(tb, alg.arrow(h), tm, None).unwrap();
                    p.b[h].set(r, u, d.d.get(row, col).clone());
                }
            }
            for (s, &(_, tb, tm)) in wslots[a].iter().enumerate() {
                let row = d.generator(tb, tm, a).unwrap();
                p.j[a].set(s, u, d.d.get(row, col).clone());
            }
        }
        for (s, &(_, blk, mu)) in wslots[a].iter().enumerate() {
            let col = d.generator(blk, mu, a).unwrap();
            for (r, &(tb, tm)) in vslots[a].iter().enumerate() {
                let row = d.index(tb, alg.x(a), tm, None).unwrap();
                p.i[a].set(r, s, d.d.get(row, col).clone());
            }
        }
    }
    let re = assemble(&alg, &p, &d.c0);
    let mut map = vec![0usize; re.dim()];
    for (k, el) in re.elems().iter().enumerate() {
        let (kind, u) = (re.blocks()[el.block].kind, el.u);
        let target = match kind {
            BlockKind::LP(a) => vslots[a][u],
            BlockKind::LS(a) => (wslots[a][u].1, wslots[a][u].2),
            _ => unreachable!(),
        };
        map[k] = d.index(target.0, el.l, target.1, None).unwrap();
    }
    if re.dim() != d.dim() {
        return Err(ExtractError::NotCanonical("dimension".into()));
    }
    for c in 0..re.dim() {
        for r in 0..re.dim() {
            if re.d.get(r, c) != d.d.get(map[r], map[c]) {
                return Err(ExtractError::ForcedBlockMismatch(format!("{} <- {}", d.elem_label(map[r]), d.elem_label(map[c]))));
            }
        }
    }
    Ok((p, d.c0.clone()))
}

/// Searches for invertible g_a with g.p1 = p2.
pub fn framed_iso(p1: &FramedPoint, p2: &FramedPoint) -> Option<Vec<FMatrix>> {
    let g = &p1.graph;
    let m = p1.m;
    if p1.v != p2.v || p1.w != p2.w || g != &p2.graph {
        return None;
    }
    let n = g.num_vertices();
    let mut off = vec![0usize; n + 1];
    for a in 0..n {
        off[a + 1] = off[a] + p1.v[a] * p1.v[a];
    }
    let nunk = off[n];
    let var = |a: usize, r: usize, c: usize| off[a] + r * p1.v[a] + c;
    let mut rows: Vec<Vec<RatFunc>> = Vec::new();
    let mut rhs: Vec<RatFunc> = Vec::new();
    let zero_row = || vec![RatFunc::zero(m); nunk];
    let add = |row: &mut Vec<RatFunc>, k: usize, x: &RatFunc| {
        row[k] = row[k].try_add(x).unwrap();
    };
    for h in g.half_edges() {
        let (o, t) = (g.o(h), g.i(h));
        for r in 0..p1.v[t] {
            for c in 0..p1.v[o] {
                let mut row = zero_row();
                for k in 0..p1.v[t] {
                    add(&mut row, var(t, r, k), p1.b[h].get(k, c));
                }
                for k in 0..p1.v[o] {
                    add(&mut row, var(o, k, c), &p2.b[h].get(r, k).neg());
                }
                rows.push(row);
                rhs.push(RatFunc::zero(m));
            }
        }
    }
    for a in 0..n {
        for r in 0..p1.v[a] {
            for c in 0..p1.w[a] {
                let mut row = zero_row();
                for k in 0..p1.v[a] {
                    add(&mut row, var(a, r, k), p1.i[a].get(k, c));
                }
                rows.push(row);
                rhs.push(p2.i[a].get(r, c).clone());
            }
        }
        for r in 0..p1.w[a] {
            for c in 0..p1.v[a] {
                let mut row = zero_row();
                for k in 0..p1.v[a] {
                    add(&mut row, var(a, k, c), p2.j[a].get(r, k));
                }
                rows.push(row);
                rhs.push(p1.j[a].get(r, c).clone());
            }
        }
    }
    let to_g = |x: &FMatrix| -> Vec<FMatrix> {
        (0..n).map(|a| FMatrix::from_fn(m, p1.v[a], p1.v[a], |r, c| x.get(var(a, r, c), 0).clone())).collect()
    };
    let invertible = |gs: &[FMatrix]| gs.iter().all(|x| x.rank() == x.rows());
    if nunk == 0 {
        return Some((0..n).map(|_| FMatrix::zeros(m, 0, 0)).collect());
    }
    let a = if rows.is_empty() { FMatrix::zeros(m, 0, nunk) } else { FMatrix::from_rows(m, rows).unwrap() };
    let b = FMatrix::from_fn(m, rhs.len(), 1, |r, _| rhs[r].clone());
    let sol = a.solve(&b).ok()?;
    let k = sol.kernel.cols();
    let point = |coef: &[i64]| -> FMatrix {
        let mut x = sol.particular.clone();
        for (j, &cj) in coef.iter().enumerate() {
            if cj != 0 {
                let col = sol.kernel.select(&(0..nunk).collect::<Vec<_>>(), &[j]).scale(&RatFunc::from_int(m, cj));
                x = x.try_add(&col).unwrap();
            }
        }
        x
    };
    let mut tries: Vec<Vec<i64>> = vec![vec![0; k]];
    if k > 0 {
        for s in 1..=32i64 {
            tries.push((0..k as i64).map(|j| ((s * (2 * j + 3) + j * j) % 7) - 3).collect());
        }
        let total: usize = p1.v.iter().sum();
        if k <= 2 {
            let side = total as i64 + 1;
            for x in 0..side {
                if k == 1 {
                    tries.push(vec![x]);
                } else {
                    tries.extend((0..side).map(|y| vec![x, y]));
                }
            }
        }
    }
    for coef in tries {
        let gs = to_g(&point(&coef));
        if invertible(&gs) {
            return Some(gs);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::parse_scalar;

    fn rf(s: &str) -> RatFunc {
        parse_scalar(s, 4).unwrap()
    }

    fn mat(rows: &[&[&str]]) -> FMatrix {
        FMatrix::from_rows(4, rows.iter().map(|r| r.iter().map(|x| rf(x)).collect()).collect()).unwrap()
    }

    fn one_loop() -> Graph {
        Graph::from_indices(1, &[(0, 0)])
    }

    fn a2() -> Graph {
        Graph::from_indices(2, &[(0, 1)])
    }

    #[test]
    fn one_loop_assemble_example() {
        let g = one_loop();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let mut p = FramedPoint::zero(&g, 4, &[1], &[1]);
        p.b[0] = mat(&[&["1"]]);
        p.i[0] = mat(&[&["2"]]);
        p.j[0] = mat(&[&["3"]]);
        let c = vec![rf("6")];
        let d = assemble(&alg, &p, &c);
        assert!(d.check_supercommutation());
        assert!(d.check_curvature());
        assert!(check_complex_moment(&p, &c, Convention::Centerm)[0].is_zero());
    }

    #[test]
    fn a2_curvature_iff_ij_equals_c() {
        let g = a2();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let mut p = FramedPoint::zero(&g, 4, &[1, 0], &[1, 0]);
        p.i[0] = mat(&[&["1"]]);
        p.j[0] = mat(&[&["t"]]);
        for (c, ok) in [("t", true), ("t+1", false)] {
            let cc = vec![rf(c), rf("0")];
            assert_eq!(assemble(&alg, &p, &cc).check_curvature(), ok);
            assert_eq!(check_complex_moment(&p, &cc, Convention::Centerm).iter().all(|r| r.is_zero()), ok);
        }
    }

    #[test]
    fn empty_v_gives_zero_differential() {
        let g = a2();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let p = FramedPoint::zero(&g, 4, &[0, 0], &[2, 1]);
        let d = assemble(&alg, &p, &[rf("t"), rf("t^2")]);
        assert!(d.d.is_zero());
        assert!(d.check_curvature());
        let (q, c) = extract_point(&d).unwrap();
        assert_eq!(q, p);
        assert_eq!(c, vec![rf("t"), rf("t^2")]);
    }

    #[test]
    fn residual_is_minus_identity() {
        let g = a2();
        let p = FramedPoint::zero(&g, 4, &[2, 1], &[0, 0]);
        let r = check_complex_moment(&p, &[rf("1"), rf("1")], Convention::Centerm);
        assert_eq!(r[0], FMatrix::identity(4, 2).neg());
        assert_eq!(r[1], FMatrix::identity(4, 1).neg());
    }

    #[test]
    fn real_moment_examples() {
        let g = one_loop();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let mut p = FramedPoint::zero(&g, 4, &[1], &[1]);
        p.i[0] = mat(&[&["1"]]);
        let one = BigRational::from_integer(1.into());
        assert!(check_real_moment(&alg, &p, &[one.clone()]).unwrap()[0].is_zero());
        let r = check_real_moment(&alg, &p, &[BigRational::from_integer(0.into())]).unwrap();
        assert_eq!(r[0], mat(&[&["1/2*i"]]));
        assert_eq!(r[0].adjoint(), r[0].neg());
    }

    #[test]
    fn real_moment_matches_block_formula() {
        let g = a2();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let mut p = FramedPoint::zero(&g, 4, &[1, 1], &[1, 1]);
        p.b[0] = mat(&[&["1+i"]]);
        p.b[1] = mat(&[&["2"]]);
        p.i[0] = mat(&[&["i"]]);
        p.j[1] = mat(&[&["3"]]);
        let z = BigRational::from_integer(0.into());
        let r = check_real_moment(&alg, &p, &[z.clone(), z]).unwrap();
        for a in 0..2 {
            let mut e = p.i[a].try_mul(&p.i[a].adjoint()).unwrap().try_sub(&p.j[a].adjoint().try_mul(&p.j[a]).unwrap()).unwrap();
            for h in g.out_edges(a) {
                let hb = g.bar(h);
                e = e.try_add(&p.b[hb].try_mul(&p.b[hb].adjoint()).unwrap()).unwrap();
                e = e.try_sub(&p.b[h].adjoint().try_mul(&p.b[h]).unwrap()).unwrap();
            }
            assert_eq!(r[a], e.scale(&rf("1/2*i")));
        }
    }

    #[test]
    fn stability_examples() {
        let g = one_loop();
        let p = FramedPoint::zero(&g, 4, &[1], &[0]);
        let s = stability_check(&p);
        assert!(!s.stable);
        assert_eq!(s.witness[0], mat(&[&["1"]]));
        let mut q = FramedPoint::zero(&g, 4, &[1], &[1]);
        q.j[0] = mat(&[&["1"]]);
        assert!(stability_check(&q).stable);
        let g = a2();
        let mut r = FramedPoint::zero(&g, 4, &[1, 1], &[1, 0]);
        r.j[0] = mat(&[&["1"]]);
        r.b[0] = mat(&[&["1"]]);
        let s = stability_check(&r);
        assert!(!s.stable);
        assert_eq!(s.witness[0].rows(), 0);
        assert_eq!(s.witness[1], mat(&[&["1"]]));
    }

    #[test]
    fn framed_iso_examples() {
        let g = one_loop();
        let mut p = FramedPoint::zero(&g, 4, &[1], &[1]);
        p.i[0] = mat(&[&["1"]]);
        p.j[0] = mat(&[&["t"]]);
        let id = framed_iso(&p, &p).unwrap();
        assert_eq!(id[0], FMatrix::identity(4, 1));
        let mut q = p.clone();
        q.i[0] = mat(&[&["-1"]]);
        assert!(framed_iso(&p, &q).is_none());
        let g = a2();
        let mut p = FramedPoint::zero(&g, 4, &[2, 1], &[1, 1]);
        p.b[0] = mat(&[&["1", "t"]]);
        p.b[1] = mat(&[&["2"], &["i"]]);
        p.i[0] = mat(&[&["1"], &["0"]]);
        p.j[0] = mat(&[&["0", "1"]]);
        p.j[1] = mat(&[&["t"]]);
        let g0 = vec![mat(&[&["1", "1"], &["0", "2"]]), mat(&[&["3"]])];
        let q = p.conjugate(&g0).unwrap();
        let found = framed_iso(&p, &q).unwrap();
        assert_eq!(p.conjugate(&found).unwrap(), q);
    }

    #[test]
    fn extract_round_trip() {
        let g = a2();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let mut p = FramedPoint::zero(&g, 4, &[2, 1], &[1, 1]);
        p.b[0] = mat(&[&["1", "t"]]);
        p.b[1] = mat(&[&["2"], &["i"]]);
        p.i[1] = mat(&[&["5"]]);
        p.j[0] = mat(&[&["0", "1"]]);
        let c = vec![rf("t"), rf("3")];
        let d = assemble(&alg, &p, &c);
        assert!(d.check_supercommutation());
        let (q, c2) = extract_point(&d).unwrap();
        assert_eq!(q, p);
        assert_eq!(c2, c);
    }

    mod props {
        use super::super::*;
        use crate::harness::{builtin_graph, generic_params, item_rng, perturb, random_gl, random_solution, BUILTIN_GRAPHS};
        use proptest::prelude::*;

        fn sample(seed: u64, gi: usize, tag: &str) -> (Arc<ZigzagAlgebra>, FramedPoint, Vec<RatFunc>, rand_chacha::ChaCha8Rng) {
            let g = builtin_graph(BUILTIN_GRAPHS[gi]).unwrap();
            let mut rng = item_rng(seed, tag);
            let c = generic_params(g.num_vertices(), 4, &mut rng);
            let p = random_solution(&g, 4, &c, 3, Convention::Centerm, &mut rng);
            (Arc::new(ZigzagAlgebra::new(&g, 4)), p, c, rng)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn assemble_supercommutes(seed in 0u64..10_000, gi in 0usize..BUILTIN_GRAPHS.len(), bad in any::<bool>()) {
                let (alg, p, c, mut rng) = sample(seed, gi, "super");
                let p = if bad { perturb(&p, &mut rng) } else { p };
                let d = assemble(&alg, &p, &c);
                prop_assert!(d.check_supercommutation());
                prop_assert!(d.check_parity());
            }

            #[test]
            fn stability_terminates_within_total_dimension(seed in 0u64..10_000, gi in 0usize..BUILTIN_GRAPHS.len(), kill in any::<bool>()) {
                let (_, mut p, _, _) = sample(seed, gi, "stab");
                if kill {
                    for a in 0..p.v.len() {
                        p.j[a] = FMatrix::zeros(4, p.w[a], p.v[a]);
                    }
                }
                let st = stability_check(&p);
                prop_assert!(st.iterations <= p.v.iter().sum::<usize>());
                if kill {
                    prop_assert_eq!(st.stable, p.v.iter().all(|&x| x == 0));
                }
            }

            #[test]
            fn framed_iso_is_an_equivalence(seed in 0u64..10_000, gi in 0usize..BUILTIN_GRAPHS.len()) {
                let (_, p, _, mut rng) = sample(seed, gi, "iso");
                let g1: Vec<FMatrix> = p.v.iter().map(|&k| random_gl(4, k, &mut rng)).collect();
                let g2: Vec<FMatrix> = p.v.iter().map(|&k| random_gl(4, k, &mut rng)).collect();
                let q = p.conjugate(&g1).unwrap();
                let r = q.conjugate(&g2).unwrap();
                let pp = framed_iso(&p, &p);
                prop_assert!(pp.is_some());
                let pq = framed_iso(&p, &q).unwrap();
                prop_assert_eq!(p.conjugate(&pq).unwrap(), q.clone());
                let qp = framed_iso(&q, &p).unwrap();
                prop_assert_eq!(q.conjugate(&qp).unwrap(), p.clone());
                let qr = framed_iso(&q, &r).unwrap();
                let pr: Vec<FMatrix> = qr.iter().zip(&pq).map(|(x, y)| x.try_mul(y).unwrap()).collect();
                prop_assert_eq!(p.conjugate(&pr).unwrap(), r.clone());
                prop_assert!(framed_iso(&p, &r).is_some());
            }
        }
    }
}
