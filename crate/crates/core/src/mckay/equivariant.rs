use std::sync::Arc;

use super::{lambda_mul, lambda_parity, psi, psi_elem, weight, McKayError, McKayGraph, SmashAlgebra, ONE, X, XY, Y};
use crate::algebra::ZigzagAlgebra;
use crate::bimodule::build_c;
use crate::duplex::{check_complex_moment, BlockKind, Convention, FramedPoint};
use crate::scalars::{FMatrix, RatFunc};

/// The derivation d on Lambda C^2 (x) V[1] + W built from a point, with its checks.
#[derive(Debug, Clone)]
pub struct EquivariantRecord {
    pub n: usize,
    /// The point in the eps(h) convention that d encodes.
    pub point: FramedPoint,
    pub zeta: Vec<RatFunc>,
    pub dim: usize,
    v_off: Vec<usize>,
    w_off: Vec<usize>,
    pub d: FMatrix,
    pub act_x: FMatrix,
    pub act_y: FMatrix,
    pub act_g: FMatrix,
    pub equivariant: bool,
    pub anticommutes: bool,
    pub parity_ok: bool,
    /// d^2 = sum_a zeta_a c_a.
    pub curvature_ok: bool,
    /// The input point satisfies the complex moment equation in its convention.
    pub moment_ok: bool,
    /// The C^2-level blocks read back as B.
    pub x_matches_b: bool,
    /// Global sign s with y_h = s eps(h) x_h, when some x_h is nonzero.
    pub y_sign: Option<i64>,
    pub y_relation_ok: bool,
}

impl EquivariantRecord {
    pub fn v_index(&self, a: usize, z: usize, r: usize) -> usize {
        self.v_off[a] + z * self.point.v[a] + r
    }

    pub fn w_index(&self, a: usize, s: usize) -> usize {
        self.w_off[a] + s
    }

    pub fn checks_ok(&self) -> bool {
        self.equivariant && self.anticommutes && self.parity_ok && self.x_matches_b && self.y_relation_ok
    }

    /// Left action of a general element of A_Gamma.
    pub fn action(&self, s: &SmashAlgebra, u: &[RatFunc]) -> FMatrix {
        let m = s.conductor();
        let n = s.n();
        let mut out = FMatrix::zeros(m, self.dim, self.dim);
        let mut gpow = FMatrix::identity(m, self.dim);
        let mut gp = Vec::with_capacity(n);
        for _ in 0..n {
            gp.push(gpow.clone());
            gpow = self.act_g.try_mul(&gpow).unwrap();
        }
        let lam = [FMatrix::identity(m, self.dim), self.act_x.clone(), self.act_y.clone(), self.act_x.try_mul(&self.act_y).unwrap()];
        for (k, c) in u.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = lam[k / n].try_mul(&gp[k % n]).unwrap().scale(c);
            out = out.try_add(&t).unwrap();
        }
        out
    }
}

/// Negates B on the listed direction of every edge, carrying the eps(hbar) moment equation to
/// the eps(h) one.
pub fn transport_centerm(p: &FramedPoint) -> FramedPoint {
    let mut q = p.clone();
    for h in p.graph.half_edges().step_by(2) {
        q.b[h] = p.b[h].neg();
    }
    q
}

fn check_shape(mk: &McKayGraph, p: &FramedPoint) -> Result<(), McKayError> {
    if p.m != mk.group.m {
        return Err(McKayError::Conductor { got: p.m, want: mk.group.m });
    }
    if p.graph != mk.graph {
        return Err(McKayError::Shape("graph differs from the McKay graph".into()));
    }
    p.validate().map_err(|e| McKayError::Shape(e.to_string()))
}

/// Builds d from (B, i, j) and checks equivariance, dz = -zd and d^2 = sum zeta_a c_a.
pub fn equivariant_assemble(
    mk: &McKayGraph,
    p: &FramedPoint,
    zeta: &[RatFunc],
    conv: Convention,
) -> Result<EquivariantRecord, McKayError> {
    check_shape(mk, p)?;
    let g = &mk.graph;
    let gd = &mk.group;
    let m = gd.m;
    let n = gd.n;
    if zeta.len() != n {
        return Err(McKayError::Shape(format!("{} parameters for {n} vertices", zeta.len())));
    }
    let moment_ok = check_complex_moment(p, zeta, conv).iter().all(|r| r.is_zero());
    let q = match conv {
        Convention::Centerm => transport_centerm(p),
        Convention::Mu => p.clone(),
    };
    let mut v_off = Vec::with_capacity(n);
    let mut acc = 0;
    for a in 0..n {
        v_off.push(acc);
        acc += 4 * q.v[a];
    }
    let mut w_off = Vec::with_capacity(n);
    for a in 0..n {
        w_off.push(acc);
        acc += q.w[a];
    }
    let dim = acc;
    let vi = |a: usize, z: usize, r: usize| v_off[a] + z * q.v[a] + r;
    let mut act = [FMatrix::zeros(m, dim, dim), FMatrix::zeros(m, dim, dim)];
    let mut act_g = FMatrix::zeros(m, dim, dim);
    let mut parity = vec![0u8; dim];
    for a in 0..n {
        for z in 0..4 {
            for r in 0..q.v[a] {
                let i = vi(a, z, r);
                parity[i] = (lambda_parity(z) + 1) % 2;
                act_g.set(i, i, gd.zeta(a as i64 + weight(z)));
                for (k, zz) in [X, Y].into_iter().enumerate() {
                    if let Some((s, t)) = lambda_mul(zz, z) {
                        act[k].set(vi(a, t, r), i, RatFunc::from_int(m, s));
                    }
                }
            }
        }
        for s in 0..q.w[a] {
            act_g.set(w_off[a] + s, w_off[a] + s, gd.zeta(a as i64));
        }
    }
    let [act_x, act_y] = act;
    let mut d = FMatrix::zeros(m, dim, dim);
    for a in 0..n {
        for r in 0..q.v[a] {
            let col = vi(a, ONE, r);
            for h in g.out_edges(a) {
                let b = g.i(h);
                let phi = &mk.phi[g.bar(h)];
                for t in 0..q.v[b] {
                    let bv = q.b[h].get(t, r);
                    if bv.is_zero() {
                        continue;
                    }
                    for (z, c) in [(X, &phi[0]), (Y, &phi[1])] {
                        let v = d.get(vi(b, z, t), col) + &(bv * c);
                        d.set(vi(b, z, t), col, v);
                    }
                }
            }
            for s in 0..q.w[a] {
                d.set(w_off[a] + s, col, q.j[a].get(s, r).clone());
            }
        }
        for s in 0..q.w[a] {
            for r in 0..q.v[a] {
                d.set(vi(a, XY, r), w_off[a] + s, q.i[a].get(r, s).clone());
            }
        }
    }
    let lam = [FMatrix::identity(m, dim), act_x.clone(), act_y.clone(), act_x.try_mul(&act_y).unwrap()];
    for a in 0..n {
        for r in 0..q.v[a] {
            let base: Vec<usize> = (0..dim).collect();
            let col = d.select(&base, &[vi(a, ONE, r)]);
            for z in [X, Y, XY] {
                let s = if lambda_parity(z) == 1 { -1 } else { 1 };
                let img = lam[z].try_mul(&col).unwrap().scale(&RatFunc::from_int(m, s));
                d.set_block(0, vi(a, z, r), &img);
            }
        }
    }
    let dg = d.try_mul(&act_g).unwrap();
    let equivariant = dg == act_g.try_mul(&d).unwrap();
    let anticommutes = [&act_x, &act_y]
        .iter()
        .all(|z| d.try_mul(z).unwrap() == z.try_mul(&d).unwrap().neg());
    let parity_ok = (0..dim).all(|i| (0..dim).all(|j| d.get(i, j).is_zero() || parity[i] != parity[j]));
    let mut rec = EquivariantRecord {
        n,
        point: q,
        zeta: zeta.to_vec(),
        dim,
        v_off,
        w_off,
        d,
        act_x,
        act_y,
        act_g,
        equivariant,
        anticommutes,
        parity_ok,
        curvature_ok: false,
        moment_ok,
        x_matches_b: false,
        y_sign: None,
        y_relation_ok: false,
    };
    let s = SmashAlgebra::new(gd);
    let mut target = FMatrix::zeros(m, dim, dim);
    for a in 0..n {
        if !zeta[a].is_zero() {
            target = target.try_add(&rec.action(&s, &s.central(a)).scale(&zeta[a])).unwrap();
        }
    }
    rec.curvature_ok = rec.d.try_mul(&rec.d).unwrap() == target;
    read_back(mk, &mut rec);
    Ok(rec)
}

/// Reads x_h from the C^2 (x) V components of d(1 (x) V) and y_h from d on the phi_h-line of
/// C^2 (x) V, with Lambda^2 C^2 identified with C by x^y -> 1.
fn read_back(mk: &McKayGraph, rec: &mut EquivariantRecord) {
    let g = &mk.graph;
    let m = mk.group.m;
    let mut x_ok = true;
    let mut sign: Option<i64> = None;
    let mut rel_ok = true;
    let mut pairs = Vec::new();
    for h in g.half_edges() {
        let (a, b) = (g.o(h), g.i(h));
        let (va, vb) = (rec.point.v[a], rec.point.v[b]);
        let rows = |z: usize| (0..vb).map(|t| rec.v_index(b, z, t)).collect::<Vec<_>>();
        let cols = |z: usize| (0..va).map(|r| rec.v_index(a, z, r)).collect::<Vec<_>>();
        let phi = &mk.phi[h];
        let eps = RatFunc::from_int(m, g.eps(h));
        let dx = rec.d.select(&rows(X), &cols(ONE));
        let dy = rec.d.select(&rows(Y), &cols(ONE));
        let xh = dy.scale(&phi[0]).try_sub(&dx.scale(&phi[1])).unwrap().scale(&eps);
        x_ok &= xh == rec.point.b[h];
        let yh = rec
            .d
            .select(&rows(XY), &cols(X))
            .scale(&phi[0])
            .try_add(&rec.d.select(&rows(XY), &cols(Y)).scale(&phi[1]))
            .unwrap();
        let ex = xh.scale(&eps);
        if sign.is_none() && !ex.is_zero() {
            sign = if yh == ex { Some(1) } else if yh == ex.neg() { Some(-1) } else { None };
            rel_ok &= sign.is_some();
        }
        pairs.push((yh, ex));
    }
    let s = RatFunc::from_int(m, sign.unwrap_or(1));
    rel_ok &= pairs.iter().all(|(yh, ex)| *yh == ex.scale(&s));
    rec.x_matches_b = x_ok;
    rec.y_sign = sign;
    rec.y_relation_ok = rel_ok;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantStability {
    pub stable: bool,
    /// Per-vertex basis of the largest V' with Lambda C^2 (x) V' d-stable, rows in reduced echelon form.
    pub witness: Vec<FMatrix>,
    pub iterations: usize,
    /// d maps Lambda C^2 (x) V' into itself for the final V'.
    pub witness_stable: bool,
}

/// Largest Gamma-submodule V' of V, vertex by vertex, with d(Lambda C^2 (x) V') inside Lambda C^2 (x) V'.
pub fn equivariant_stability(rec: &EquivariantRecord) -> EquivariantStability {
    let p = &rec.point;
    let n = p.v.len();
    let all: Vec<usize> = (0..rec.dim).collect();
    let w_rows: Vec<usize> = (0..n).flat_map(|a| (0..p.w[a]).map(move |s| (a, s))).map(|(a, s)| rec.w_index(a, s)).collect();
    let gens = |a: usize| (0..p.v[a]).map(|r| rec.v_index(a, ONE, r)).collect::<Vec<_>>();
    let mut s: Vec<FMatrix> = (0..n).map(|a| rec.d.select(&w_rows, &gens(a)).kernel_basis()).collect();
    let mut iterations = 0;
    loop {
        let before: Vec<usize> = s.iter().map(|x| x.cols()).collect();
        let proj: Vec<FMatrix> = s.iter().map(|x| x.cokernel_projection().unwrap().0).collect();
        let mut next = s.clone();
        for a in 0..n {
            if s[a].cols() == 0 {
                continue;
            }
            let img = rec.d.select(&all, &gens(a)).try_mul(&s[a]).unwrap();
            let mut cons = img.select(&w_rows, &(0..img.cols()).collect::<Vec<_>>());
            for b in 0..n {
                for z in 0..4 {
                    let rows: Vec<usize> = (0..p.v[b]).map(|t| rec.v_index(b, z, t)).collect();
                    let part = img.select(&rows, &(0..img.cols()).collect::<Vec<_>>());
                    cons = cons.vstack(&proj[b].try_mul(&part).unwrap()).unwrap();
                }
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
    let witness_stable = lambda_span_stable(rec, &s);
    let witness: Vec<FMatrix> = s.iter().map(|x| x.transpose().rref()).collect();
    let stable = witness.iter().all(|x| x.rows() == 0);
    EquivariantStability { stable, witness, iterations, witness_stable }
}

fn lambda_span_stable(rec: &EquivariantRecord, s: &[FMatrix]) -> bool {
    let p = &rec.point;
    let m = p.m;
    let mut span = FMatrix::zeros(m, rec.dim, 0);
    for (a, sa) in s.iter().enumerate() {
        for z in 0..4 {
            let mut e = FMatrix::zeros(m, rec.dim, sa.cols());
            for c in 0..sa.cols() {
                for r in 0..p.v[a] {
                    e.set(rec.v_index(a, z, r), c, sa.get(r, c).clone());
                }
            }
            span = span.hstack(&e).unwrap();
        }
    }
    let img = rec.d.try_mul(&span).unwrap();
    span.hstack(&img).unwrap().rank() == span.rank()
}

/// The Gamma-side bimodule duplex C_{a,x} on (A p_a (x) p_a A) + A_Gamma and its Morita match.
#[derive(Debug, Clone)]
pub struct EquivariantC {
    pub a: usize,
    pub x: RatFunc,
    pub tensor_dim: usize,
    pub dim: usize,
    pub d: FMatrix,
    pub parity_ok: bool,
    pub supercommutes: bool,
    /// d^2 = l(c0) + r(c1) with the curvature of the zigzag-side C_{a,x} carried over.
    pub curvature_ok: bool,
    /// Coordinates change from the twist-normalized zigzag C_{a,x} to the Gamma side.
    pub morita: Option<FMatrix>,
    pub actions_ok: bool,
    /// Mismatched (row block, column block) pairs of the transported differential.
    pub mismatches: Vec<(usize, usize)>,
}

impl EquivariantC {
    pub fn ok(&self) -> bool {
        self.parity_ok && self.supercommutes && self.curvature_ok && self.morita.is_some() && self.actions_ok && self.mismatches.is_empty()
    }
}

struct GammaBimodule<'a> {
    s: &'a SmashAlgebra,
    a: usize,
}

impl GammaBimodule<'_> {
    fn dim(&self) -> usize {
        16 + self.s.dim()
    }

    fn parity(&self, i: usize) -> u8 {
        if i < 16 {
            (lambda_parity(i / 4) + lambda_parity(i % 4) + 1) % 2
        } else {
            self.s.parity(i - 16)
        }
    }

    fn left(&self, u: &[RatFunc]) -> FMatrix {
        let s = self.s;
        let m = s.conductor();
        let mut out = FMatrix::zeros(m, self.dim(), self.dim());
        for zi in 0..4 {
            let c = s.proj_coords(&s.multiply(u, &s.left_proj_elem(zi, self.a)), self.a, true).expect("A p_a is a left ideal");
            for zj in 0..4 {
                for (k, ck) in c.iter().enumerate() {
                    out.set(k * 4 + zj, zi * 4 + zj, ck.clone());
                }
            }
        }
        out.set_block(16, 16, &s.left_matrix(u));
        out
    }

    fn right(&self, u: &[RatFunc]) -> FMatrix {
        let s = self.s;
        let m = s.conductor();
        let mut out = FMatrix::zeros(m, self.dim(), self.dim());
        for zj in 0..4 {
            let c = s.proj_coords(&s.multiply(&s.right_proj_elem(self.a, zj), u), self.a, false).expect("p_a A is a right ideal");
            for zi in 0..4 {
                for (k, ck) in c.iter().enumerate() {
                    out.set(zi * 4 + k, zi * 4 + zj, ck.clone());
                }
            }
        }
        out.set_block(16, 16, &s.right_matrix(u));
        out
    }
}

/// d(u (x) v) = (-1)^{|u|} x uv (x a scalar) on the tensor summand and d(r) = Delta r on A_Gamma, with
/// Delta = p_a (x) x^y p_a + x p_a (x) p_a y - y p_a (x) p_a x + x^y p_a (x) p_a.
pub fn build_equivariant_c(mk: &McKayGraph, a: usize, x: &RatFunc) -> Result<EquivariantC, McKayError> {
    let gd = &mk.group;
    let n = gd.n;
    if a >= n {
        return Err(McKayError::Vertex(a));
    }
    if x.conductor() != gd.m {
        return Err(McKayError::Conductor { got: x.conductor(), want: gd.m });
    }
    let m = gd.m;
    let s = SmashAlgebra::new(gd);
    let bm = GammaBimodule { s: &s, a };
    let dim = bm.dim();
    let mut d = FMatrix::zeros(m, dim, dim);
    for zi in 0..4 {
        for zj in 0..4 {
            let uv = s.multiply(&s.left_proj_elem(zi, a), &s.right_proj_elem(a, zj));
            let sign = if lambda_parity(zi) == 1 { -1 } else { 1 };
            let img = s.scale(&uv, &(x * &RatFunc::from_int(m, sign)));
            for (k, c) in img.iter().enumerate() {
                d.set(16 + k, zi * 4 + zj, c.clone());
            }
        }
    }
    let delta: [(usize, usize, i64); 4] = [(ONE, XY, 1), (X, Y, 1), (Y, X, -1), (XY, ONE, 1)];
    for k in 0..s.dim() {
        for &(zl, zr, sg) in &delta {
            let v = s.multiply(&s.right_proj_elem(a, zr), &s.basis_elem(k));
            let c = s.proj_coords(&v, a, false).expect("p_a A is a right ideal");
            for (k2, ck) in c.iter().enumerate() {
                let cur = d.get(zl * 4 + k2, 16 + k) + &(ck * &RatFunc::from_int(m, sg));
                d.set(zl * 4 + k2, 16 + k, cur);
            }
        }
    }
    let parity_ok = (0..dim).all(|i| (0..dim).all(|j| d.get(i, j).is_zero() || bm.parity(i) != bm.parity(j)));
    let gens = [s.monomial(X), s.monomial(Y), s.basis_elem(s.basis_index(ONE, 1))];
    let supercommutes = gens.iter().all(|u| {
        let sign = if u[s.basis_index(ONE, 1)].is_zero() { -1 } else { 1 };
        let (l, r) = (bm.left(u), bm.right(u));
        d.try_mul(&l).unwrap() == l.try_mul(&d).unwrap().scale(&RatFunc::from_int(m, sign))
            && d.try_mul(&r).unwrap() == r.try_mul(&d).unwrap()
    });

    let alg = Arc::new(ZigzagAlgebra::new(&mk.graph, m));
    let zc = build_c(&alg, a, x).map_err(|e| McKayError::Shape(e.to_string()))?.normalize_twists();
    let central = |c: &[RatFunc]| {
        let mut z = s.zero_elem();
        for (b, cb) in c.iter().enumerate() {
            z = s.add(&z, &s.scale(&s.central(b), cb));
        }
        z
    };
    let curv = bm.left(&central(&zc.c0)).try_add(&bm.right(&central(&zc.c1))).unwrap();
    let curvature_ok = d.try_mul(&d).unwrap() == curv;

    let mut psi_m = FMatrix::zeros(m, dim, zc.dim());
    let mut shape_ok = zc.dim() == dim;
    for (col, el) in zc.elems().iter().enumerate() {
        match zc.blocks()[el.block].kind {
            BlockKind::BA => {
                for (k, c) in psi(mk, &s, &alg, el.l).iter().enumerate() {
                    psi_m.set(16 + k, col, c.clone());
                }
            }
            BlockKind::BP(..) => {
                let l = s.proj_coords(&psi(mk, &s, &alg, el.l), a, true);
                let r = el.r.and_then(|r| s.proj_coords(&psi(mk, &s, &alg, r), a, false));
                let (Some(l), Some(r)) = (l, r) else {
                    shape_ok = false;
                    continue;
                };
                for zi in 0..4 {
                    for zj in 0..4 {
                        psi_m.set(zi * 4 + zj, col, &l[zi] * &r[zj]);
                    }
                }
            }
            _ => shape_ok = false,
        }
    }
    let inv = if shape_ok { psi_m.inverse().ok() } else { None };
    let mut mismatches = Vec::new();
    let mut actions_ok = false;
    if let Some(inv) = &inv {
        let conj = inv.try_mul(&d).unwrap().try_mul(&psi_m).unwrap();
        for bi in 0..zc.blocks().len() {
            for bj in 0..zc.blocks().len() {
                let rows: Vec<usize> = zc.block_range(bi).collect();
                let cols: Vec<usize> = zc.block_range(bj).collect();
                if conj.select(&rows, &cols) != zc.d.select(&rows, &cols) {
                    mismatches.push((bi, bj));
                }
            }
        }
        actions_ok = (0..alg.dim()).all(|u| {
            let img = psi_elem(mk, &s, &alg, &alg.basis_elem(u));
            psi_m.try_mul(&zc.left_matrix(u)).unwrap() == bm.left(&img).try_mul(&psi_m).unwrap()
                && psi_m.try_mul(&zc.right_matrix(u)).unwrap() == bm.right(&img).try_mul(&psi_m).unwrap()
        });
    }
    Ok(EquivariantC {
        a,
        x: x.clone(),
        tensor_dim: 16,
        dim,
        d,
        parity_ok,
        supercommutes,
        curvature_ok,
        morita: inv.map(|_| psi_m),
        actions_ok,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::super::mckay_graph;
    use super::*;
    use crate::duplex::stability_check;
    use crate::scalars::parse_scalar;

    fn mat(m: u32, rows: &[&[i64]]) -> FMatrix {
        FMatrix::from_int_rows(m, rows)
    }

    /// n=2, v=(1,1), w=(1,0): B on both edges and i_0 j_0 fixed so the centerm equation holds.
    fn sample_point(mk: &McKayGraph) -> (FramedPoint, Vec<RatFunc>) {
        let m = mk.group.m;
        let g = &mk.graph;
        let mut p = FramedPoint::zero(g, m, &[1, 1], &[1, 0]);
        let vals = [2, 3, 1, 5];
        for h in g.half_edges() {
            p.b[h] = mat(m, &[&[vals[h]]]);
        }
        p.i[0] = mat(m, &[&[1]]);
        p.j[0] = mat(m, &[&[7]]);
        let zero = vec![RatFunc::zero(m); 2];
        let res = check_complex_moment(&p, &zero, Convention::Centerm);
        let zeta: Vec<RatFunc> = res.iter().map(|r| r.get(0, 0).clone()).collect();
        (p, zeta)
    }

    #[test]
    fn zero_dimension_vector() {
        let mk = mckay_graph(2).unwrap();
        let p = FramedPoint::zero(&mk.graph, mk.group.m, &[0, 0], &[0, 0]);
        let zeta = vec![RatFunc::zero(mk.group.m); 2];
        let rec = equivariant_assemble(&mk, &p, &zeta, Convention::Centerm).unwrap();
        assert_eq!(rec.dim, 0);
        assert!(rec.checks_ok() && rec.curvature_ok);
        assert!(equivariant_stability(&rec).stable);
    }

    #[test]
    fn transported_point_has_curvature() {
        let mk = mckay_graph(2).unwrap();
        let (p, zeta) = sample_point(&mk);
        let rec = equivariant_assemble(&mk, &p, &zeta, Convention::Centerm).unwrap();
        assert!(rec.moment_ok);
        assert!(rec.checks_ok());
        assert!(rec.curvature_ok);
        assert_eq!(rec.y_sign, Some(-1));
        let mut bad = zeta.clone();
        bad[1] = &bad[1] + &RatFunc::one(mk.group.m);
        let rec = equivariant_assemble(&mk, &p, &bad, Convention::Centerm).unwrap();
        assert!(!rec.moment_ok && !rec.curvature_ok);
    }

    #[test]
    fn stability_agrees() {
        let mk = mckay_graph(2).unwrap();
        let (p, zeta) = sample_point(&mk);
        let rec = equivariant_assemble(&mk, &p, &zeta, Convention::Centerm).unwrap();
        let st = equivariant_stability(&rec);
        assert_eq!(st.stable, stability_check(&p).stable);
        let mut q = p.clone();
        q.j[0] = mat(mk.group.m, &[&[0]]);
        q.i[0] = mat(mk.group.m, &[&[0]]);
        let rec = equivariant_assemble(&mk, &q, &zeta, Convention::Mu).unwrap();
        let st = equivariant_stability(&rec);
        assert!(!st.stable && st.witness_stable);
        assert_eq!(st.witness, stability_check(&q).witness);
    }

    #[test]
    fn equivariant_c_matches_zigzag() {
        for n in [2, 4] {
            let mk = mckay_graph(n).unwrap();
            let x = parse_scalar("t", mk.group.m).unwrap();
            for a in 0..n {
                let c = build_equivariant_c(&mk, a, &x).unwrap();
                assert!(c.parity_ok && c.supercommutes, "n={n} a={a}");
                assert!(c.curvature_ok, "n={n} a={a}");
                assert!(c.morita.is_some() && c.actions_ok, "n={n} a={a}");
                assert!(c.mismatches.is_empty(), "n={n} a={a}: {:?}", c.mismatches);
            }
        }
    }

    mod props {
        use super::super::super::mckay_graph;
        use super::super::*;
        use crate::algebra::ZigzagAlgebra;
        use crate::duplex::stability_check;
        use crate::harness::{item_rng, orbit_point, perturb};
        use proptest::prelude::*;
        use std::sync::Arc;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn transported_curvature_iff_residual(seed in 0u64..10_000, n in 2usize..6, bad in any::<bool>()) {
                let mk = mckay_graph(n).unwrap();
                let alg = Arc::new(ZigzagAlgebra::new(&mk.graph, mk.group.m));
                let mut rng = item_rng(seed, "transport");
                let (p, c) = orbit_point(&alg, 2, 3, &mut rng);
                let p = if bad { perturb(&p, &mut rng) } else { p };
                let rec = equivariant_assemble(&mk, &p, &c, Convention::Centerm).unwrap();
                prop_assert!(rec.checks_ok());
                prop_assert_eq!(rec.curvature_ok, rec.moment_ok);
                let st = equivariant_stability(&rec);
                prop_assert_eq!(st.stable, stability_check(&p).stable);
            }
        }
    }
}
