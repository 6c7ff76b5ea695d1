//! Cyclic McKay data: the smash product A_Gamma = Lambda C^2 # C[Z/n], its Morita comparison with
//! the zigzag algebra of the affine cycle, and equivariant derivations.
//!
//! Basis of A_Gamma: `z * n + j` stands for z g^j with z in {1, x, y, xy} (indices 0..4) and g the
//! generator acting on C^2 by diag(zeta_n, zeta_n^{-1}).

mod equivariant;

use std::collections::BTreeMap;

pub use equivariant::{
    build_equivariant_c, equivariant_assemble, equivariant_stability, transport_centerm, EquivariantC, EquivariantRecord,
    EquivariantStability,
};

use crate::algebra::{BasisKind, ZigzagAlgebra};
use crate::quiver::{Graph, HalfEdge};
use crate::scalars::{lcm, CycRat, FMatrix, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum McKayError {
    #[error("group order must be at least 2, got {0}")]
    Order(usize),
    #[error("vertex {0} out of range")]
    Vertex(usize),
    #[error("point shape does not match the McKay graph: {0}")]
    Shape(String),
    #[error("conductor {got} does not match the session conductor {want}")]
    Conductor { got: u32, want: u32 },
}

pub const ONE: usize = 0;
pub const X: usize = 1;
pub const Y: usize = 2;
pub const XY: usize = 3;

/// Weight of a Lambda C^2 monomial under g.
pub fn weight(z: usize) -> i64 {
    [0, 1, -1, 0][z]
}

pub fn lambda_parity(z: usize) -> u8 {
    (z.count_ones() % 2) as u8
}

/// Product of two monomials of Lambda C^2 as (sign, monomial).
pub fn lambda_mul(z1: usize, z2: usize) -> Option<(i64, usize)> {
    if z1 & z2 != 0 {
        return None;
    }
    let sign = if z1 & Y != 0 && z2 & X != 0 { -1 } else { 1 };
    Some((sign, z1 | z2))
}

/// Z/n inside SL(2) with its characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupData {
    pub n: usize,
    pub m: u32,
    /// The hypothesis that -1 lies in the group (n even).
    pub contains_minus_one: bool,
}

impl GroupData {
    pub fn new(n: usize) -> Result<Self, McKayError> {
        if n < 2 {
            return Err(McKayError::Order(n));
        }
        Ok(GroupData { n, m: lcm(4, n as u32), contains_minus_one: n % 2 == 0 })
    }

    /// zeta_n^k.
    pub fn zeta(&self, k: i64) -> RatFunc {
        let k = k.rem_euclid(self.n as i64);
        RatFunc::constant(CycRat::z_pow(self.m, k * (self.m as i64 / self.n as i64)))
    }

    /// chi_k(g^j).
    pub fn character(&self, k: usize, j: usize) -> RatFunc {
        self.zeta((k * j) as i64)
    }

    /// Character of the natural representation C^2 = rho_1 + rho_{n-1}.
    pub fn natural_character(&self, j: usize) -> RatFunc {
        &self.zeta(j as i64) + &self.zeta(-(j as i64))
    }

    /// T_ab = dim Hom(rho_a (x) rho, rho_b) by the character inner product.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let inv_n = RatFunc::constant(CycRat::from_ratio(self.m, 1, n as i64));
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut s = RatFunc::zero(self.m);
                        for j in 0..n {
                            let t = &(&self.character(a, j) * &self.natural_character(j)) * &self.character(b, j).conj();
                            s = &s + &t;
                        }
                        let s = &s * &inv_n;
                        let c = s.as_constant().and_then(|c| c.as_rational().cloned()).expect("character inner product is rational");
                        assert!(c.is_integer(), "character inner product is an integer");
                        c.to_integer().try_into().expect("nonnegative multiplicity")
                    })
                    .collect()
            })
            .collect()
    }

    /// Sum of squared irrep dimensions.
    pub fn irrep_dimension_sum(&self) -> usize {
        self.n
    }
}

/// The McKay graph with the intertwiners that define its orientation signs.
#[derive(Debug, Clone)]
pub struct McKayGraph {
    pub group: GroupData,
    pub graph: Graph,
    pub adjacency: Vec<Vec<usize>>,
    /// phi_h for the half-edge h from a to b: rho_b -> C^2 (x) rho_a, as (x, y) coefficients.
    pub phi: Vec<[RatFunc; 2]>,
    /// eps(h) from phi_h wedge phi_hbar.
    pub eps: Vec<i64>,
    /// eps(h) + eps(hbar) = 0 and the graph carries the same signs.
    pub eps_ok: bool,
    /// I+ membership when every edge joins I+ to I-.
    pub bipartition: Option<Vec<bool>>,
}

fn wedge(u: &[RatFunc; 2], v: &[RatFunc; 2]) -> RatFunc {
    &(&u[0] * &v[1]) - &(&u[1] * &v[0])
}

fn sign_of(r: &RatFunc, m: u32) -> Option<i64> {
    if *r == RatFunc::one(m) {
        Some(1)
    } else if *r == RatFunc::from_int(m, -1) {
        Some(-1)
    } else {
        None
    }
}

/// Hom_Gamma(rho_b, C^2 (x) rho_a) as columns of a 2 x T matrix.
fn intertwiners(gd: &GroupData, a: usize, b: usize) -> FMatrix {
    let m = gd.m;
    let mut eq = FMatrix::zeros(m, 2, 2);
    eq.set(0, 0, &gd.zeta(a as i64 + 1) - &gd.zeta(b as i64));
    eq.set(1, 1, &gd.zeta(a as i64 - 1) - &gd.zeta(b as i64));
    eq.kernel_basis()
}

pub fn mckay_graph(n: usize) -> Result<McKayGraph, McKayError> {
    let gd = GroupData::new(n)?;
    let m = gd.m;
    let adjacency = gd.adjacency();
    let names: Vec<String> = (0..n).map(|k| k.to_string()).collect();
    let mut edges = Vec::new();
    let mut phi = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let t = adjacency[a][b];
            if t == 0 {
                continue;
            }
            let fwd = intertwiners(&gd, a, b);
            let back = intertwiners(&gd, b, a);
            assert_eq!((fwd.cols(), back.cols()), (t, t), "intertwiner count matches characters");
            let col = |k: &FMatrix, c: usize| [k.get(0, c).clone(), k.get(1, c).clone()];
            let pairing = FMatrix::from_fn(m, t, t, |r, s| wedge(&col(&fwd, r), &col(&back, s)));
            let back = back.try_mul(&pairing.inverse().expect("pairing of intertwiners is perfect")).unwrap();
            for r in 0..t {
                edges.push((names[a].clone(), names[b].clone()));
                phi.push(col(&fwd, r));
                phi.push(col(&back, r));
            }
        }
    }
    let eps: Vec<i64> = (0..phi.len()).map(|h| sign_of(&wedge(&phi[h], &phi[h ^ 1]), m).unwrap_or(0)).collect();
    let orientation: BTreeMap<usize, i64> =
        (0..edges.len()).filter(|&k| eps[2 * k] != 0).map(|k| (k, eps[2 * k])).collect();
    let graph = Graph::new(names, edges, &orientation).expect("McKay graph is well formed");
    let eps_ok = graph.half_edges().all(|h| eps[h] != 0 && eps[h] + eps[h ^ 1] == 0 && graph.eps(h) == eps[h]);
    let bipartition = if n % 2 == 0 {
        let part: Vec<bool> = (0..n).map(|k| k % 2 == 0).collect();
        let crossing = graph.edges().iter().all(|&(s, t)| part[s] != part[t]);
        crossing.then_some(part)
    } else {
        None
    };
    Ok(McKayGraph { group: gd, graph, adjacency, phi, eps, eps_ok, bipartition })
}

/// A_Gamma with its multiplication table.
#[derive(Debug, Clone)]
pub struct SmashAlgebra {
    pub group: GroupData,
    table: Vec<Option<(RatFunc, usize)>>,
}

impl SmashAlgebra {
    pub fn new(gd: &GroupData) -> Self {
        let n = gd.n;
        let dim = 4 * n;
        let table = (0..dim * dim)
            .map(|k| {
                let (b1, b2) = (k / dim, k % dim);
                let (z1, j1, z2, j2) = (b1 / n, b1 % n, b2 / n, b2 % n);
                let (s, z) = lambda_mul(z1, z2)?;
                let c = &gd.zeta(j1 as i64 * weight(z2)) * &RatFunc::from_int(gd.m, s);
                Some((c, z * n + (j1 + j2) % n))
            })
            .collect();
        SmashAlgebra { group: gd.clone(), table }
    }

    pub fn n(&self) -> usize {
        self.group.n
    }

    pub fn conductor(&self) -> u32 {
        self.group.m
    }

    pub fn dim(&self) -> usize {
        4 * self.group.n
    }

    pub fn basis_index(&self, z: usize, j: usize) -> usize {
        z * self.n() + j % self.n()
    }

    pub fn parity(&self, b: usize) -> u8 {
        lambda_parity(b / self.n())
    }

    pub fn mul_basis(&self, b1: usize, b2: usize) -> Option<&(RatFunc, usize)> {
        self.table[b1 * self.dim() + b2].as_ref()
    }

    pub fn zero_elem(&self) -> Vec<RatFunc> {
        vec![RatFunc::zero(self.conductor()); self.dim()]
    }

    pub fn basis_elem(&self, b: usize) -> Vec<RatFunc> {
        let mut v = self.zero_elem();
        v[b] = RatFunc::one(self.conductor());
        v
    }

    pub fn monomial(&self, z: usize) -> Vec<RatFunc> {
        self.basis_elem(self.basis_index(z, 0))
    }

    pub fn unit(&self) -> Vec<RatFunc> {
        self.monomial(ONE)
    }

    pub fn multiply(&self, u: &[RatFunc], v: &[RatFunc]) -> Vec<RatFunc> {
        let mut out = self.zero_elem();
        for (i, a) in u.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in v.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if let Some((c, k)) = self.mul_basis(i, j) {
                    out[*k] = &out[*k] + &(&(a * b) * c);
                }
            }
        }
        out
    }

    pub fn add(&self, u: &[RatFunc], v: &[RatFunc]) -> Vec<RatFunc> {
        u.iter().zip(v).map(|(a, b)| a + b).collect()
    }

    pub fn scale(&self, u: &[RatFunc], s: &RatFunc) -> Vec<RatFunc> {
        u.iter().map(|a| a * s).collect()
    }

    /// p_a = (1/n) sum_j zeta^{-ja} g^j, projecting onto the rho_a-isotypic part.
    pub fn idempotent(&self, a: usize) -> Vec<RatFunc> {
        let n = self.n();
        let inv_n = RatFunc::constant(CycRat::from_ratio(self.conductor(), 1, n as i64));
        let mut v = self.zero_elem();
        for j in 0..n {
            v[self.basis_index(ONE, j)] = &self.group.zeta(-((j * a) as i64)) * &inv_n;
        }
        v
    }

    /// c_a = x^y p_a.
    pub fn central(&self, a: usize) -> Vec<RatFunc> {
        self.multiply(&self.monomial(XY), &self.idempotent(a))
    }

    /// z p_a, a basis vector of A p_a.
    pub fn left_proj_elem(&self, z: usize, a: usize) -> Vec<RatFunc> {
        self.multiply(&self.monomial(z), &self.idempotent(a))
    }

    /// p_a z, a basis vector of p_a A.
    pub fn right_proj_elem(&self, a: usize, z: usize) -> Vec<RatFunc> {
        self.multiply(&self.idempotent(a), &self.monomial(z))
    }

    /// Coordinates of u in the basis {z p_a} of A p_a, or in {p_a z} of p_a A; both
    /// bases have g^0-coefficient 1/n on z, so the same read-off applies. None if u lies outside.
    pub fn proj_coords(&self, u: &[RatFunc], a: usize, left: bool) -> Option<Vec<RatFunc>> {
        let nn = RatFunc::from_int(self.conductor(), self.n() as i64);
        let c: Vec<RatFunc> = (0..4).map(|z| &u[self.basis_index(z, 0)] * &nn).collect();
        let mut back = self.zero_elem();
        for z in 0..4 {
            let e = if left { self.left_proj_elem(z, a) } else { self.right_proj_elem(a, z) };
            back = self.add(&back, &self.scale(&e, &c[z]));
        }
        (back == u).then_some(c)
    }

    /// The trace picking the coefficient of x^y g^0.
    pub fn trace(&self, u: &[RatFunc]) -> RatFunc {
        u[self.basis_index(XY, 0)].clone()
    }

    /// Gram matrix of tr(uv) on the basis.
    pub fn trace_form(&self) -> FMatrix {
        let d = self.dim();
        FMatrix::from_fn(self.conductor(), d, d, |i, j| match self.mul_basis(i, j) {
            Some((c, k)) if *k == self.basis_index(XY, 0) => c.clone(),
            _ => RatFunc::zero(self.conductor()),
        })
    }

    pub fn is_central(&self, z: &[RatFunc]) -> bool {
        (0..self.dim()).all(|b| {
            let e = self.basis_elem(b);
            self.multiply(z, &e) == self.multiply(&e, z)
        })
    }

    pub fn left_matrix(&self, u: &[RatFunc]) -> FMatrix {
        let d = self.dim();
        let cols: Vec<Vec<RatFunc>> = (0..d).map(|b| self.multiply(u, &self.basis_elem(b))).collect();
        FMatrix::from_fn(self.conductor(), d, d, |i, j| cols[j][i].clone())
    }

    pub fn right_matrix(&self, u: &[RatFunc]) -> FMatrix {
        let d = self.dim();
        let cols: Vec<Vec<RatFunc>> = (0..d).map(|b| self.multiply(&self.basis_elem(b), u)).collect();
        FMatrix::from_fn(self.conductor(), d, d, |i, j| cols[j][i].clone())
    }

    /// Named structural checks.
    pub fn verify(&self) -> Vec<(String, bool)> {
        let n = self.n();
        let m = self.conductor();
        let d = self.dim();
        let mut out = Vec::new();
        let assoc = (0..d).all(|a| {
            (0..d).all(|b| {
                let ab = self.multiply(&self.basis_elem(a), &self.basis_elem(b));
                let bc: Vec<Vec<RatFunc>> = (0..d).map(|c| self.multiply(&self.basis_elem(b), &self.basis_elem(c))).collect();
                (0..d).all(|c| self.multiply(&ab, &self.basis_elem(c)) == self.multiply(&self.basis_elem(a), &bc[c]))
            })
        });
        out.push(("associative".to_string(), assoc));
        let p: Vec<Vec<RatFunc>> = (0..n).map(|a| self.idempotent(a)).collect();
        let orth = (0..n).all(|a| {
            (0..n).all(|b| {
                let pp = self.multiply(&p[a], &p[b]);
                if a == b { pp == p[a] } else { pp.iter().all(|c| c.is_zero()) }
            })
        });
        out.push(("orthogonal idempotents".to_string(), orth));
        let sum = p.iter().fold(self.zero_elem(), |acc, x| self.add(&acc, x));
        out.push(("idempotents sum to 1".to_string(), sum == self.unit()));
        out.push(("p_a central in C[Gamma]".to_string(), p.iter().all(|x| {
            (0..n).all(|j| {
                let g = self.basis_elem(self.basis_index(ONE, j));
                self.multiply(x, &g) == self.multiply(&g, x)
            })
        })));
        out.push(("c_a central".to_string(), (0..n).all(|a| self.is_central(&self.central(a)))));
        let gram = self.trace_form();
        out.push(("trace form nondegenerate".to_string(), gram.rank() == d));
        let graded = (0..d).all(|i| {
            (0..d).all(|j| {
                let s = if self.parity(i) * self.parity(j) == 1 { -1 } else { 1 };
                *gram.get(i, j) == gram.get(j, i) * &RatFunc::from_int(m, s)
            })
        });
        out.push(("trace form graded symmetric".to_string(), graded));
        out
    }

    /// Whether tr(uv) = tr(vu) on all basis pairs (fails on odd pairs).
    pub fn trace_form_symmetric(&self) -> bool {
        let g = self.trace_form();
        g == g.transpose()
    }
}

pub fn build_smash(n: usize) -> Result<SmashAlgebra, McKayError> {
    Ok(SmashAlgebra::new(&GroupData::new(n)?))
}

/// z-hat(phi) = phi_x x + phi_y y.
fn zhat(s: &SmashAlgebra, phi: &[RatFunc; 2]) -> Vec<RatFunc> {
    s.add(&s.scale(&s.monomial(X), &phi[0]), &s.scale(&s.monomial(Y), &phi[1]))
}

/// Image of a basis element of A(Q) for the McKay graph:
/// e_a -> p_a, h -> eps(h) p_{o(h)} zhat(phi_hbar) p_{i(h)}, X_a -> c_a.
pub fn psi(mk: &McKayGraph, s: &SmashAlgebra, alg: &ZigzagAlgebra, idx: usize) -> Vec<RatFunc> {
    let g = &mk.graph;
    let m = s.conductor();
    match alg.kind(idx) {
        BasisKind::Idem(a) => s.idempotent(a),
        BasisKind::Loop(a) => s.central(a),
        BasisKind::Arrow(h) => {
            let u = s.multiply(&s.idempotent(g.o(h)), &zhat(s, &mk.phi[g.bar(h)]));
            let u = s.multiply(&u, &s.idempotent(g.i(h)));
            s.scale(&u, &RatFunc::from_int(m, g.eps(h)))
        }
    }
}

/// psi applied to a general element.
pub fn psi_elem(mk: &McKayGraph, s: &SmashAlgebra, alg: &ZigzagAlgebra, u: &[RatFunc]) -> Vec<RatFunc> {
    let mut out = s.zero_elem();
    for (k, c) in u.iter().enumerate() {
        if !c.is_zero() {
            out = s.add(&out, &s.scale(&psi(mk, s, alg, k), c));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct MoritaReport {
    pub n: usize,
    pub algebra_dim: usize,
    /// Sum over (a, b) of dim Hom(p_b A, p_a A).
    pub end_dim: usize,
    pub idempotents: (usize, usize),
    /// hom_dims[a][b] = dim Hom(p_b A, p_a A).
    pub hom_dims: Vec<Vec<usize>>,
    /// Degree-one part of Hom(p_b A, p_a A).
    pub degree_one: Vec<Vec<usize>>,
    pub adjacency: Vec<Vec<usize>>,
    pub first_mismatch: Option<String>,
}

impl MoritaReport {
    pub fn ok(&self) -> bool {
        self.first_mismatch.is_none()
            && self.end_dim == self.algebra_dim
            && self.idempotents.0 == self.idempotents.1
            && self.degree_one == self.adjacency
    }
}

/// Matrix of right multiplication by u on p_a A in the basis {p_a z}.
fn right_action_on_proj(s: &SmashAlgebra, a: usize, u: &[RatFunc]) -> FMatrix {
    let cols: Vec<Vec<RatFunc>> = (0..4)
        .map(|z| s.proj_coords(&s.multiply(&s.right_proj_elem(a, z), u), a, false).expect("p_a A is a right ideal"))
        .collect();
    FMatrix::from_fn(s.conductor(), 4, 4, |i, j| cols[j][i].clone())
}

/// Matrix of left multiplication by u from p_b A to p_a A, if u lies in p_a A p_b.
fn left_hom_matrix(s: &SmashAlgebra, a: usize, b: usize, u: &[RatFunc]) -> Option<FMatrix> {
    let cols: Option<Vec<Vec<RatFunc>>> =
        (0..4).map(|z| s.proj_coords(&s.multiply(u, &s.right_proj_elem(b, z)), a, false)).collect();
    let cols = cols?;
    Some(FMatrix::from_fn(s.conductor(), 4, 4, |i, j| cols[j][i].clone()))
}

/// Hom_{A_Gamma}(p_b A, p_a A) as a kernel: columns are vectorized 4 x 4 matrices (index r + 4c).
/// With `degree` set, only homogeneous maps of that degree.
fn hom_space(s: &SmashAlgebra, a: usize, b: usize, degree: Option<usize>) -> FMatrix {
    let m = s.conductor();
    let gens = [s.monomial(X), s.monomial(Y), s.basis_elem(s.basis_index(ONE, 1))];
    let mut eqs = FMatrix::zeros(m, 0, 16);
    for u in &gens {
        let rb = right_action_on_proj(s, b, u);
        let ra = right_action_on_proj(s, a, u);
        let mut e = FMatrix::zeros(m, 16, 16);
        for i in 0..4 {
            for k in 0..4 {
                let row = i + 4 * k;
                for c in 0..4 {
                    let v = e.get(row, i + 4 * c) + rb.get(c, k);
                    e.set(row, i + 4 * c, v);
                    let v = e.get(row, c + 4 * k) - ra.get(i, c);
                    e.set(row, c + 4 * k, v);
                }
            }
        }
        eqs = eqs.vstack(&e).unwrap();
    }
    if let Some(k) = degree {
        let deg = |z: usize| z.count_ones() as usize;
        for r in 0..4 {
            for c in 0..4 {
                if deg(r) != deg(c) + k {
                    let mut e = FMatrix::zeros(m, 1, 16);
                    e.set(0, r + 4 * c, RatFunc::one(m));
                    eqs = eqs.vstack(&e).unwrap();
                }
            }
        }
    }
    eqs.kernel_basis()
}

fn vectorize(f: &FMatrix) -> FMatrix {
    FMatrix::from_fn(f.conductor(), 16, 1, |k, _| f.get(k % 4, k / 4).clone())
}

/// End_{A_Gamma}(sum_a p_a A) against A(Q) of the McKay graph, through psi.
pub fn morita_check(n: usize) -> Result<MoritaReport, McKayError> {
    let mk = mckay_graph(n)?;
    let s = SmashAlgebra::new(&mk.group);
    let alg = ZigzagAlgebra::new(&mk.graph, s.conductor());
    let g = &mk.graph;
    let m = s.conductor();
    let mut hom_dims = vec![vec![0; n]; n];
    let mut degree_one = vec![vec![0; n]; n];
    let mut spaces = vec![vec![FMatrix::zeros(m, 16, 0); n]; n];
    for a in 0..n {
        for b in 0..n {
            spaces[a][b] = hom_space(&s, a, b, None);
            hom_dims[a][b] = spaces[a][b].cols();
            degree_one[a][b] = hom_space(&s, a, b, Some(1)).cols();
        }
    }
    let end_dim = hom_dims.iter().flatten().sum();
    let mut first_mismatch = None;
    let mut homs: Vec<FMatrix> = Vec::with_capacity(alg.dim());
    for u in 0..alg.dim() {
        let (a, b) = (alg.left_vertex(u), alg.right_vertex(u));
        let img = psi(&mk, &s, &alg, u);
        let Some(f) = left_hom_matrix(&s, a, b, &img) else {
            first_mismatch.get_or_insert(format!("psi({}) is not in p_{a} A p_{b}", alg.label(u)));
            homs.push(FMatrix::zeros(m, 4, 4));
            continue;
        };
        let sp = &spaces[a][b];
        if sp.hstack(&vectorize(&f)).unwrap().rank() != sp.cols() {
            first_mismatch.get_or_insert(format!("psi({}) is not an A_Gamma-module map", alg.label(u)));
        }
        let deg = alg.degree(u) as usize;
        let homog = (0..4).all(|r| (0..4).all(|c| f.get(r, c).is_zero() || r.count_ones() as usize == c.count_ones() as usize + deg));
        if !homog {
            first_mismatch.get_or_insert(format!("psi({}) is not homogeneous of degree {deg}", alg.label(u)));
        }
        if let BasisKind::Idem(_) = alg.kind(u) {
            if f != FMatrix::identity(m, 4) {
                first_mismatch.get_or_insert(format!("psi({}) is not the identity endomorphism", alg.label(u)));
            }
        }
        homs.push(f);
    }
    for a in 0..n {
        for b in 0..n {
            let basis = alg.hom_basis(a, b);
            let mut span = FMatrix::zeros(m, 16, 0);
            for &u in &basis {
                span = span.hstack(&vectorize(&homs[u])).unwrap();
            }
            if span.rank() != hom_dims[a][b] || basis.len() != hom_dims[a][b] {
                first_mismatch.get_or_insert(format!("images of e_{a} A e_{b} do not span Hom(P_{b}, P_{a})"));
            }
        }
    }
    'outer: for u in 0..alg.dim() {
        for v in 0..alg.dim() {
            let expected = match alg.mul_basis(u, v) {
                Some((sg, k)) => Some(homs[k].scale(&RatFunc::from_int(m, sg))),
                None => None,
            };
            let composable = alg.right_vertex(u) == alg.left_vertex(v);
            let got = composable.then(|| homs[u].try_mul(&homs[v]).unwrap());
            let agree = match (&got, &expected) {
                (Some(x), Some(y)) => x == y,
                (Some(x), None) => x.is_zero(),
                (None, None) => true,
                (None, Some(y)) => y.is_zero(),
            };
            if !agree {
                first_mismatch
                    .get_or_insert(format!("structure constant {} * {} (half-edge eps {:?})", alg.label(u), alg.label(v), (0..g.num_half_edges()).map(|h| g.eps(h)).collect::<Vec<_>>()));
                break 'outer;
            }
        }
    }
    let idem = (0..alg.dim()).filter(|&u| matches!(alg.kind(u), BasisKind::Idem(_))).count();
    Ok(MoritaReport {
        n,
        algebra_dim: alg.dim(),
        end_dim,
        idempotents: (n, idem),
        hom_dims,
        degree_one,
        adjacency: mk.adjacency.clone(),
        first_mismatch,
    })
}

/// Half-edges from a to b of the McKay graph.
pub fn half_edges_between(g: &Graph, a: usize, b: usize) -> Vec<HalfEdge> {
    g.out_edges(a).into_iter().filter(|&h| g.i(h) == b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_n2_is_double_edge() {
        let mk = mckay_graph(2).unwrap();
        assert_eq!(mk.adjacency, vec![vec![0, 2], vec![2, 0]]);
        assert_eq!(mk.graph.num_edges(), 2);
        assert_eq!(mk.graph.edge_multiplicity(0, 1), 2);
        assert!(mk.eps_ok);
        assert!(mk.bipartition.is_some());
    }

    #[test]
    fn graph_n4_is_cycle() {
        let mk = mckay_graph(4).unwrap();
        assert_eq!(mk.graph.num_edges(), 4);
        for a in 0..4 {
            assert_eq!(mk.graph.out_edges(a).len(), 2);
            assert_eq!(mk.adjacency[a][(a + 1) % 4], 1);
        }
        assert!(mk.eps_ok);
        assert_eq!(mk.bipartition, Some(vec![true, false, true, false]));
    }

    #[test]
    fn odd_order_flags() {
        let mk = mckay_graph(3).unwrap();
        assert!(!mk.group.contains_minus_one);
        assert!(mk.bipartition.is_none());
        assert!(mk.eps_ok);
        assert!(mckay_graph(1).is_err());
    }

    #[test]
    fn smash_structure() {
        for n in [2, 3, 4] {
            let s = build_smash(n).unwrap();
            assert_eq!(s.dim(), 4 * n);
            for (name, ok) in s.verify() {
                assert!(ok, "n={n}: {name}");
            }
            assert!(!s.trace_form_symmetric());
        }
    }

    #[test]
    fn morita_small() {
        for n in [2, 3, 4] {
            let r = morita_check(n).unwrap();
            assert_eq!(r.end_dim, 4 * n);
            assert!(r.ok(), "n={n}: {:?}", r.first_mismatch);
        }
    }
}
