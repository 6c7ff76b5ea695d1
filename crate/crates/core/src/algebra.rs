//! The graded Frobenius algebra A(Q): idempotents, arrows and one degree-2 loop per vertex.

use crate::quiver::{Graph, HalfEdge};
use crate::scalars::{FMatrix, RatFunc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisKind {
    Idem(usize),
    Arrow(HalfEdge),
    Loop(usize),
}

/// Structure constant: basis product is `sign * basis[idx]`, or zero.
pub type Product = Option<(i64, usize)>;

#[derive(Debug, Clone)]
pub struct ZigzagAlgebra {
    graph: Graph,
    m: u32,
    kinds: Vec<BasisKind>,
    table: Vec<Product>,
}

impl ZigzagAlgebra {
    pub fn new(graph: &Graph, m: u32) -> Self {
        let n = graph.num_vertices();
        let mut kinds: Vec<BasisKind> = (0..n).map(BasisKind::Idem).collect();
        kinds.extend(graph.half_edges().map(BasisKind::Arrow));
        kinds.extend((0..n).map(BasisKind::Loop));
        let mut alg = ZigzagAlgebra { graph: graph.clone(), m, kinds, table: vec![] };
        let d = alg.dim();
        alg.table = (0..d * d).map(|k| alg.compute(k / d, k % d)).collect();
        alg
    }

    fn compute(&self, x: usize, y: usize) -> Product {
        use BasisKind::*;
        let g = &self.graph;
        match (self.kinds[x], self.kinds[y]) {
            (Idem(a), _) => (self.left_vertex(y) == a).then_some((1, y)),
            (_, Idem(b)) => (self.right_vertex(x) == b).then_some((1, x)),
            (Arrow(h), Arrow(k)) if k == g.bar(h) => Some((g.eps(h), self.x(g.o(h)))),
            _ => None,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn e(&self, a: usize) -> usize {
        a
    }

    pub fn arrow(&self, h: HalfEdge) -> usize {
        self.num_vertices() + h
    }

    pub fn x(&self, a: usize) -> usize {
        self.num_vertices() + self.graph.num_half_edges() + a
    }

    pub fn kind(&self, idx: usize) -> BasisKind {
        self.kinds[idx]
    }

    pub fn degree(&self, idx: usize) -> u8 {
        match self.kinds[idx] {
            BasisKind::Idem(_) => 0,
            BasisKind::Arrow(_) => 1,
            BasisKind::Loop(_) => 2,
        }
    }

    pub fn parity(&self, idx: usize) -> u8 {
        self.degree(idx) % 2
    }

    /// Vertex a with e_a x = x.
    pub fn left_vertex(&self, idx: usize) -> usize {
        match self.kinds[idx] {
            BasisKind::Idem(a) | BasisKind::Loop(a) => a,
            BasisKind::Arrow(h) => self.graph.o(h),
        }
    }

    /// Vertex b with x e_b = x.
    pub fn right_vertex(&self, idx: usize) -> usize {
        match self.kinds[idx] {
            BasisKind::Idem(a) | BasisKind::Loop(a) => a,
            BasisKind::Arrow(h) => self.graph.i(h),
        }
    }

    pub fn label(&self, idx: usize) -> String {
        let g = &self.graph;
        match self.kinds[idx] {
            BasisKind::Idem(a) => format!("e{}", g.vertex_name(a)),
            BasisKind::Arrow(h) => format!("h{}", g.half_edge_id(h)),
            BasisKind::Loop(a) => format!("X{}", g.vertex_name(a)),
        }
    }

    pub fn mul_basis(&self, x: usize, y: usize) -> Product {
        self.table[x * self.dim() + y]
    }

    pub fn trace_basis(&self, x: usize) -> i64 {
        matches!(self.kinds[x], BasisKind::Loop(_)) as i64
    }

    pub fn zero_elem(&self) -> Vec<RatFunc> {
        vec![RatFunc::zero(self.m); self.dim()]
    }

    pub fn basis_elem(&self, idx: usize) -> Vec<RatFunc> {
        let mut v = self.zero_elem();
        v[idx] = RatFunc::one(self.m);
        v
    }

    pub fn unit(&self) -> Vec<RatFunc> {
        let mut v = self.zero_elem();
        for a in 0..self.num_vertices() {
            v[a] = RatFunc::one(self.m);
        }
        v
    }

    pub fn multiply(&self, x: &[RatFunc], y: &[RatFunc]) -> Vec<RatFunc> {
        let mut out = self.zero_elem();
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if let Some((s, k)) = self.mul_basis(i, j) {
                    let term = &(a * b) * &RatFunc::from_int(self.m, s);
                    out[k] = &out[k] + &term;
                }
            }
        }
        out
    }

    /// Gram matrix of tr(xy) and whether it is nondegenerate.
    pub fn frobenius_form(&self) -> (FMatrix, bool) {
        let d = self.dim();
        let g = FMatrix::from_fn(self.m, d, d, |x, y| {
            let v = self.mul_basis(x, y).map_or(0, |(s, k)| s * self.trace_basis(k));
            RatFunc::from_int(self.m, v)
        });
        let ok = g.rank() == d;
        (g, ok)
    }

    pub fn is_central(&self, z: &[RatFunc]) -> bool {
        (0..self.dim()).all(|b| {
            let e = self.basis_elem(b);
            self.multiply(z, &e) == self.multiply(&e, z)
        })
    }

    /// The element sum_a c_a X_a and a centrality verdict.
    pub fn central_action(&self, c: &[RatFunc]) -> (Vec<RatFunc>, bool) {
        let mut z = self.zero_elem();
        for (a, ca) in c.iter().enumerate() {
            z[self.x(a)] = ca.clone();
        }
        let ok = self.is_central(&z);
        (z, ok)
    }

    /// s_a on degree-two central elements: z + z_a (sum_{o(h)=a} X_{i(h)} - 2 X_a), z_a the X_a-coefficient.
    pub fn reflect_central(&self, z: &[RatFunc], a: usize) -> Vec<RatFunc> {
        let za = z[self.x(a)].clone();
        let mut out = z.to_vec();
        for h in self.graph.out_edges(a) {
            let k = self.x(self.graph.i(h));
            out[k] = out[k].try_add(&za).unwrap();
        }
        let k = self.x(a);
        out[k] = out[k].try_sub(&za.try_add(&za).unwrap()).unwrap();
        out
    }

    /// P_a = A e_a: basis elements whose right vertex is a.
    pub fn proj_basis(&self, a: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.right_vertex(k) == a).collect()
    }

    /// e_b A: basis elements whose left vertex is b.
    pub fn right_proj_basis(&self, b: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.left_vertex(k) == b).collect()
    }

    /// e_a A e_c.
    pub fn hom_basis(&self, a: usize, c: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.left_vertex(k) == a && self.right_vertex(k) == c).collect()
    }

    pub fn make_module(&self, label: ModuleLabel) -> ModuleData {
        let (basis, right) = match label {
            ModuleLabel::Proj(a) => (self.proj_basis(a), false),
            ModuleLabel::RightProj(a) => (self.right_proj_basis(a), true),
            ModuleLabel::Simple(a) => (vec![self.e(a)], false),
        };
        let pos = |k: usize| basis.iter().position(|&b| b == k);
        let action = (0..self.dim())
            .map(|x| {
                let mut mat = FMatrix::zeros(self.m, basis.len(), basis.len());
                for (col, &p) in basis.iter().enumerate() {
                    let prod = match label {
                        ModuleLabel::Simple(a) => (x == self.e(a)).then_some((1, p)),
                        _ if right => self.mul_basis(p, x),
                        _ => self.mul_basis(x, p),
                    };
                    if let Some((s, k)) = prod {
                        mat.set(pos(k).expect("closed under action"), col, RatFunc::from_int(self.m, s));
                    }
                }
                mat
            })
            .collect();
        let degrees = match label {
            ModuleLabel::Simple(_) => vec![0],
            _ => basis.iter().map(|&k| self.degree(k)).collect(),
        };
        ModuleData { label, basis, degrees, action }
    }

    /// Runs the structural invariant catalogue.
    pub fn verify(&self) -> Vec<(String, bool)> {
        let d = self.dim();
        let g = &self.graph;
        let mut out = Vec::new();
        out.push(("dimension".into(), d == 2 * (g.num_vertices() + g.num_edges())));
        let assoc = (0..d).all(|x| {
            (0..d).all(|y| {
                (0..d).all(|z| {
                    let left = self.mul_basis(x, y).and_then(|(s, k)| self.mul_basis(k, z).map(|(t, l)| (s * t, l)));
                    let right = self.mul_basis(y, z).and_then(|(s, k)| self.mul_basis(x, k).map(|(t, l)| (s * t, l)));
                    left == right
                })
            })
        });
        out.push(("associativity".into(), assoc));
        let pos: Vec<usize> = (0..d).filter(|&k| self.degree(k) > 0).collect();
        let length3 = pos.iter().all(|&x| {
            pos.iter().all(|&y| {
                pos.iter().all(|&z| {
                    self.mul_basis(x, y).and_then(|(_, k)| self.mul_basis(k, z)).is_none()
                })
            })
        });
        out.push(("length-three paths vanish".into(), length3));
        let unit = self.unit();
        let unit_ok = (0..d).all(|k| {
            let e = self.basis_elem(k);
            self.multiply(&unit, &e) == e && self.multiply(&e, &unit) == e
        });
        out.push(("unit".into(), unit_ok));
        let central = (0..g.num_vertices()).all(|a| self.is_central(&self.basis_elem(self.x(a))));
        out.push(("loops central".into(), central));
        let rel_ii = (0..g.num_vertices()).all(|a| {
            g.out_edges(a).iter().all(|&h| {
                let p = self.mul_basis(self.arrow(h), self.arrow(g.bar(h)));
                p.map(|(s, k)| (s * g.eps(h), k)) == Some((1, self.x(a)))
            })
        });
        out.push(("loop independent of arrow".into(), rel_ii));
        out.push(("trace".into(), (0..d).all(|k| self.trace_basis(k) == (self.degree(k) == 2) as i64)));
        out.push(("frobenius".into(), self.frobenius_form().1));
        out.push(("degree-two center".into(), self.degree_two_center_dim() == g.num_vertices()));
        let modules_ok = (0..g.num_vertices()).all(|a| {
            [ModuleLabel::Proj(a), ModuleLabel::Simple(a), ModuleLabel::RightProj(a)]
                .into_iter()
                .all(|l| self.make_module(l).respects(self))
        });
        out.push(("module actions".into(), modules_ok));
        out
    }

    /// Dimension of the space of central elements of degree 2.
    pub fn degree_two_center_dim(&self) -> usize {
        let d = self.dim();
        let deg2: Vec<usize> = (0..d).filter(|&k| self.degree(k) == 2).collect();
        let mut rows = Vec::new();
        for b in 0..d {
            for target in 0..d {
                let row: Vec<RatFunc> = deg2
                    .iter()
                    .map(|&z| {
                        let l = self.mul_basis(z, b).filter(|p| p.1 == target).map_or(0, |p| p.0);
                        let r = self.mul_basis(b, z).filter(|p| p.1 == target).map_or(0, |p| p.0);
                        RatFunc::from_int(self.m, l - r)
                    })
                    .collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return deg2.len();
        }
        FMatrix::from_rows(self.m, rows).unwrap().kernel_basis().cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleLabel {
    /// P_a = A e_a, left module.
    Proj(usize),
    /// S_a, one-dimensional, only e_a acts.
    Simple(usize),
    /// e_a A, right module.
    RightProj(usize),
}

#[derive(Debug, Clone)]
pub struct ModuleData {
    pub label: ModuleLabel,
    pub basis: Vec<usize>,
    pub degrees: Vec<u8>,
    /// One matrix per algebra basis element, acting on columns.
    pub action: Vec<FMatrix>,
}

impl ModuleData {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// rho(x)rho(y) = rho(xy) for left modules, rho(y)rho(x) = rho(xy) for right modules.
    pub fn respects(&self, alg: &ZigzagAlgebra) -> bool {
        let d = alg.dim();
        let right = matches!(self.label, ModuleLabel::RightProj(_));
        let n = self.dim();
        (0..d).all(|x| {
            (0..d).all(|y| {
                let lhs = if right {
                    self.action[y].try_mul(&self.action[x]).unwrap()
                } else {
                    self.action[x].try_mul(&self.action[y]).unwrap()
                };
                let rhs = match alg.mul_basis(x, y) {
                    Some((s, k)) => self.action[k].scale(&RatFunc::from_int(alg.conductor(), s)),
                    None => FMatrix::zeros(alg.conductor(), n, n),
                };
                lhs == rhs
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(n: usize, e: &[(usize, usize)]) -> ZigzagAlgebra {
        ZigzagAlgebra::new(&Graph::from_indices(n, e), 4)
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(alg(1, &[]).dim(), 2);
        assert_eq!(alg(1, &[(0, 0)]).dim(), 4);
        let a2 = alg(2, &[(0, 1)]);
        assert_eq!(a2.dim(), 6);
        let labels: Vec<String> = (0..6).map(|k| a2.label(k)).collect();
        assert_eq!(labels, ["e1", "e2", "h0+", "h0-", "X1", "X2"]);
    }

    #[test]
    fn loop_quiver_is_exterior() {
        let a = alg(1, &[(0, 0)]);
        let (h, hb) = (a.arrow(0), a.arrow(1));
        assert_eq!(a.mul_basis(h, h), None);
        let p = a.mul_basis(h, hb).unwrap();
        let q = a.mul_basis(hb, h).unwrap();
        assert_eq!(p.1, q.1);
        assert_eq!(p.0 + q.0, 0);
    }

    #[test]
    fn arrow_products() {
        let a = alg(2, &[(0, 1)]);
        let g = a.graph();
        assert_eq!(a.mul_basis(a.e(0), a.e(0)), Some((1, a.e(0))));
        assert_eq!(a.mul_basis(a.arrow(0), a.arrow(1)), Some((g.eps(0), a.x(0))));
        assert_eq!(a.mul_basis(a.arrow(1), a.arrow(0)), Some((g.eps(1), a.x(1))));
    }

    #[test]
    fn gram_matrices() {
        let (g, ok) = alg(1, &[]).frobenius_form();
        assert_eq!(g, FMatrix::from_int_rows(4, &[&[0, 1], &[1, 0]]));
        assert!(ok);
        let (g, ok) = alg(2, &[(0, 1)]).frobenius_form();
        assert_eq!(g.rank(), 6);
        assert!(ok);
    }

    #[test]
    fn central_elements() {
        let a = alg(2, &[(0, 1)]);
        let (z, ok) = a.central_action(&[RatFunc::zero(4), RatFunc::zero(4)]);
        assert!(ok && z.iter().all(|x| x.is_zero()));
        let (z, ok) = a.central_action(&[RatFunc::one(4), RatFunc::zero(4)]);
        assert!(ok);
        assert_eq!(z, a.basis_elem(a.x(0)));
        let l = alg(1, &[(0, 0)]);
        assert!(l.central_action(&[RatFunc::t(4)]).1);
    }

    #[test]
    fn module_dimensions() {
        let a = alg(2, &[(0, 1)]);
        assert_eq!(a.make_module(ModuleLabel::Proj(0)).dim(), 3);
        let s = a.make_module(ModuleLabel::Simple(1));
        assert_eq!(s.dim(), 1);
        for x in 0..a.dim() {
            if a.degree(x) > 0 {
                assert!(s.action[x].is_zero());
            }
        }
        assert_eq!(a.hom_basis(0, 0).len(), 2);
        let a3 = alg(3, &[(0, 1), (1, 2)]);
        assert!(a3.hom_basis(0, 2).is_empty());
    }

    #[test]
    fn invariants_on_graph_family() {
        let graphs: Vec<(usize, Vec<(usize, usize)>)> = vec![
            (1, vec![]),
            (1, vec![(0, 0)]),
            (2, vec![(0, 1)]),
            (3, vec![(0, 1), (1, 2)]),
            (2, vec![(0, 1), (0, 1)]),
            (4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]),
            (2, vec![(0, 1), (0, 1), (0, 1)]),
            (2, vec![(0, 0), (0, 1)]),
            (1, vec![(0, 0), (0, 0)]),
            (4, vec![(0, 1), (0, 2), (0, 3)]),
        ];
        for (n, e) in graphs {
            let a = alg(n, &e);
            for (name, ok) in a.verify() {
                assert!(ok, "{name} failed on {n} {e:?}");
            }
        }
    }

    mod props {
        use super::super::*;
        use crate::harness::{builtin_graph, generic_params, item_rng, BUILTIN_GRAPHS};
        use crate::quiver::weyl_reflect_zeta;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn central_action_matches_weyl(seed in 0u64..10_000, gi in 0usize..BUILTIN_GRAPHS.len()) {
                let g = builtin_graph(BUILTIN_GRAPHS[gi]).unwrap();
                let alg = ZigzagAlgebra::new(&g, 4);
                let c = generic_params(g.num_vertices(), 4, &mut item_rng(seed, "central"));
                let (z, central) = alg.central_action(&c);
                prop_assert!(central);
                for a in (0..g.num_vertices()).filter(|&a| !g.has_loop(a)) {
                    let s = alg.reflect_central(&z, a);
                    prop_assert!(alg.is_central(&s));
                    let coords: Vec<RatFunc> = (0..g.num_vertices()).map(|b| s[alg.x(b)].clone()).collect();
                    prop_assert_eq!(coords, weyl_reflect_zeta(&g, &c, a).unwrap());
                }
            }
        }
    }
}
