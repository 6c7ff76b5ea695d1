//! Graphs with oriented doubles, orientation signs, Borcherds matrices and Weyl group actions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalars::{FMatrix, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuiverError {
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),
    #[error("orientation refers to missing edge {0}")]
    BadOrientation(String),
    #[error("vertex {0:?} carries a loop")]
    Loop(String),
    #[error("unknown half-edge id {0:?}")]
    UnknownHalfEdge(String),
}

/// Half-edge index: 2k runs along edge k as listed, 2k+1 runs backwards.
pub type HalfEdge = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    eps: Vec<i64>,
}

impl Graph {
    /// `orientation` maps an edge index to the sign of its listed direction.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String)>,
        orientation: &BTreeMap<usize, i64>,
    ) -> Result<Self, QuiverError> {
        let mut seen = BTreeMap::new();
        for (k, v) in vertices.iter().enumerate() {
            if seen.insert(v.clone(), k).is_some() {
                return Err(QuiverError::DuplicateVertex(v.clone()));
            }
        }
        let idx = |s: &String| seen.get(s).copied().ok_or_else(|| QuiverError::UnknownVertex(s.clone()));
        let edges = edges
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, QuiverError>>()?;
        let mut eps = Vec::with_capacity(2 * edges.len());
        for (k, &(s, t)) in edges.iter().enumerate() {
            let fwd = if s == t { 1 } else if (s, t, k) < (t, s, k) { 1 } else { -1 };
            eps.push(fwd);
            eps.push(-fwd);
        }
        for (&k, &sign) in orientation {
            if k >= edges.len() || sign.abs() != 1 {
                return Err(QuiverError::BadOrientation(k.to_string()));
            }
            eps[2 * k] = sign;
            eps[2 * k + 1] = -sign;
        }
        Ok(Graph { vertices, edges, eps })
    }

    /// Convenience constructor from vertex count and index pairs; vertices are named "1".."n".
    pub fn from_indices(n: usize, edges: &[(usize, usize)]) -> Self {
        let names: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
        let e = edges.iter().map(|&(a, b)| (names[a].clone(), names[b].clone())).collect();
        Graph::new(names, e, &BTreeMap::new()).expect("valid indices")
    }

    pub fn with_orientation(&self, orientation: &BTreeMap<usize, i64>) -> Result<Self, QuiverError> {
        let e = self
            .edges
            .iter()
            .map(|&(a, b)| (self.vertices[a].clone(), self.vertices[b].clone()))
            .collect();
        Graph::new(self.vertices.clone(), e, orientation)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_half_edges(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_name(&self, a: usize) -> &str {
        &self.vertices[a]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize, QuiverError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| QuiverError::UnknownVertex(name.to_string()))
    }

    /// Source o(h).
    pub fn o(&self, h: HalfEdge) -> usize {
        let (s, t) = self.edges[h / 2];
        if h % 2 == 0 { s } else { t }
    }

    /// Target i(h).
    pub fn i(&self, h: HalfEdge) -> usize {
        let (s, t) = self.edges[h / 2];
        if h % 2 == 0 { t } else { s }
    }

    pub fn bar(&self, h: HalfEdge) -> HalfEdge {
        h ^ 1
    }

    pub fn eps(&self, h: HalfEdge) -> i64 {
        self.eps[h]
    }

    pub fn half_edges(&self) -> std::ops::Range<HalfEdge> {
        0..self.num_half_edges()
    }

    /// "k+" for the listed direction of edge k, "k-" for the reverse.
    pub fn half_edge_id(&self, h: HalfEdge) -> String {
        format!("{}{}", h / 2, if h % 2 == 0 { '+' } else { '-' })
    }

    pub fn half_edge_from_id(&self, id: &str) -> Result<HalfEdge, QuiverError> {
        let bad = || QuiverError::UnknownHalfEdge(id.to_string());
        let (num, dir) = id.split_at(id.len().checked_sub(1).ok_or_else(bad)?);
        let k: usize = num.parse().map_err(|_| bad())?;
        if k >= self.edges.len() {
            return Err(bad());
        }
        match dir {
            "+" => Ok(2 * k),
            "-" => Ok(2 * k + 1),
            _ => Err(bad()),
        }
    }

    /// Half-edges with o(h) = a, in index order.
    pub fn out_edges(&self, a: usize) -> Vec<HalfEdge> {
        self.half_edges().filter(|&h| self.o(h) == a).collect()
    }

    /// Half-edges with i(h) = a, in index order.
    pub fn in_edges(&self, a: usize) -> Vec<HalfEdge> {
        self.half_edges().filter(|&h| self.i(h) == a).collect()
    }

    pub fn has_loop(&self, a: usize) -> bool {
        self.edges.iter().any(|&(s, t)| s == a && t == a)
    }

    /// Number of edges joining a and b (loops counted once).
    pub fn edge_multiplicity(&self, a: usize, b: usize) -> usize {
        self.edges.iter().filter(|&&(s, t)| (s, t) == (a, b) || (t, s) == (a, b)).count()
    }

    pub fn loopless_vertex(&self, a: usize) -> Result<(), QuiverError> {
        if self.has_loop(a) {
            Err(QuiverError::Loop(self.vertices[a].clone()))
        } else {
            Ok(())
        }
    }

    pub fn borcherds(&self) -> BorcherdsMatrix {
        let n = self.num_vertices();
        let mut a = vec![vec![0i64; n]; n];
        for (r, row) in a.iter_mut().enumerate() {
            row[r] = 2;
        }
        for h in self.half_edges() {
            a[self.i(h)][self.o(h)] -= 1;
        }
        let loopless = (0..n).map(|v| !self.has_loop(v)).collect();
        BorcherdsMatrix { entries: a, loopless }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorcherdsMatrix {
    pub entries: Vec<Vec<i64>>,
    pub loopless: Vec<bool>,
}

impl BorcherdsMatrix {
    pub fn get(&self, a: usize, b: usize) -> i64 {
        self.entries[a][b]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.entries.len();
        (0..n).all(|a| (0..n).all(|b| self.entries[a][b] == self.entries[b][a]))
    }
}

/// Dimension vectors and parameters, indexed by vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub zeta_r: Vec<BigRational>,
    pub zeta_c: Vec<RatFunc>,
}

/// s_a on (v, w): v'_a = v_a + w_a - sum_b a_ab v_b, other entries unchanged.
pub fn weyl_reflect_dims(g: &Graph, v: &[i64], w: &[i64], a: usize) -> Result<Vec<i64>, QuiverError> {
    g.loopless_vertex(a)?;
    let cm = g.borcherds();
    let mut out = v.to_vec();
    out[a] = v[a] + w[a] - (0..v.len()).map(|b| cm.get(a, b) * v[b]).sum::<i64>();
    Ok(out)
}

/// Scalars that the Weyl action on parameters can act upon.
pub trait WeylScalar: Clone {
    fn sub_multiple(&self, k: i64, other: &Self) -> Self;
}

impl WeylScalar for RatFunc {
    fn sub_multiple(&self, k: i64, other: &Self) -> Self {
        let m = self.conductor();
        self.try_sub(&other.try_mul(&RatFunc::from_int(m, k)).unwrap()).unwrap()
    }
}

impl WeylScalar for BigRational {
    fn sub_multiple(&self, k: i64, other: &Self) -> Self {
        self - other * BigRational::from_integer(BigInt::from(k))
    }
}

impl WeylScalar for i64 {
    fn sub_multiple(&self, k: i64, other: &Self) -> Self {
        self - k * other
    }
}

/// s_a on parameters: zeta'_b = zeta_b - a_ab zeta_a.
pub fn weyl_reflect_zeta<T: WeylScalar>(g: &Graph, zeta: &[T], a: usize) -> Result<Vec<T>, QuiverError> {
    g.loopless_vertex(a)?;
    let cm = g.borcherds();
    Ok((0..zeta.len()).map(|b| zeta[b].sub_multiple(cm.get(a, b), &zeta[a])).collect())
}

/// Verdict of a genericity test with an integer relation when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genericity {
    pub generic: bool,
    pub certificate: Option<Vec<BigInt>>,
}

/// Rational coordinate rows of a family of field elements after clearing denominators:
/// one row per (t-degree, cyclotomic coordinate), one column per element.
fn rational_rows(zeta: &[RatFunc]) -> Vec<Vec<BigRational>> {
    if zeta.is_empty() {
        return vec![];
    }
    let mut common = zeta[0].den();
    for z in &zeta[1..] {
        let d = z.den();
        let g = common.gcd(&d);
        common = common.mul(&d.divrem(&g).0);
    }
    let polys: Vec<_> = zeta.iter().map(|z| z.num().mul(&common.divrem(&z.den()).0)).collect();
    let deg = polys.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
    let phi = crate::scalars::phi(zeta[0].conductor());
    let mut rows = Vec::new();
    for k in 0..deg {
        for c in 0..phi {
            rows.push(
                polys
                    .iter()
                    .map(|p| p.coeffs().get(k).map_or_else(BigRational::zero, |x| x.coeffs()[c].clone()))
                    .collect(),
            );
        }
    }
    rows
}

fn kernel_certificate(rows: Vec<Vec<BigRational>>, n: usize, m: u32) -> Genericity {
    if n == 0 {
        return Genericity { generic: true, certificate: None };
    }
    let mat = FMatrix::from_fn(m, rows.len(), n, |r, c| RatFunc::from_rational(m, rows[r][c].clone()));
    let ker = mat.kernel_basis();
    if ker.cols() == 0 {
        return Genericity { generic: true, certificate: None };
    }
    let vec: Vec<BigRational> = (0..n)
        .map(|r| ker.get(r, 0).as_constant().unwrap().as_rational().unwrap().clone())
        .collect();
    Genericity { generic: false, certificate: Some(integer_normalize(&vec)) }
}

/// Scales a rational vector to a primitive integer vector with positive first nonzero entry.
pub fn integer_normalize(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(BigInt::one(), |x| x.signum());
    let g = if g.is_zero() { BigInt::one() } else { g };
    ints.iter().map(|x| x / &g * &sign).collect()
}

/// True iff sum_a n_a zeta_a = 0 has only the zero rational solution.
pub fn is_generic_zeta_c(zeta: &[RatFunc], m: u32) -> Genericity {
    kernel_certificate(rational_rows(zeta), zeta.len(), m)
}

/// True iff no nonzero integer covector annihilates both zeta_r and zeta_c.
pub fn is_generic_pair(zeta_r: &[BigRational], zeta_c: &[RatFunc], m: u32) -> Genericity {
    let mut rows = rational_rows(zeta_c);
    rows.push(zeta_r.to_vec());
    kernel_certificate(rows, zeta_r.len().max(zeta_c.len()), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::parse_scalar;

    fn a2() -> Graph {
        Graph::from_indices(2, &[(0, 1)])
    }

    fn affine_a1() -> Graph {
        Graph::from_indices(2, &[(0, 1), (0, 1)])
    }

    fn rf(s: &str) -> RatFunc {
        parse_scalar(s, 4).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|x| BigInt::from(*x)).collect()
    }

    #[test]
    fn half_edge_structure() {
        let g = Graph::from_indices(3, &[(0, 1), (2, 1), (1, 1)]);
        for h in g.half_edges() {
            assert_eq!(g.o(g.bar(h)), g.i(h));
            assert_ne!(g.bar(h), h);
            assert_eq!(g.eps(h) + g.eps(g.bar(h)), 0);
        }
        assert_eq!(g.eps(0), 1);
        assert_eq!(g.eps(2), -1);
        assert_eq!(g.eps(4), 1);
        assert_eq!(g.half_edge_from_id("1-").unwrap(), 3);
        assert_eq!(g.half_edge_id(3), "1-");
    }

    #[test]
    fn orientation_override() {
        let mut o = BTreeMap::new();
        o.insert(0, -1);
        let g = a2().with_orientation(&o).unwrap();
        assert_eq!(g.eps(0), -1);
        o.insert(3, 1);
        assert!(a2().with_orientation(&o).is_err());
    }

    #[test]
    fn borcherds_examples() {
        assert_eq!(a2().borcherds().entries, vec![vec![2, -1], vec![-1, 2]]);
        let l = Graph::from_indices(1, &[(0, 0)]).borcherds();
        assert_eq!(l.entries, vec![vec![0]]);
        assert!(!l.loopless[0]);
        assert_eq!(affine_a1().borcherds().entries, vec![vec![2, -2], vec![-2, 2]]);
    }

    #[test]
    fn reflect_dims_examples() {
        assert_eq!(weyl_reflect_dims(&a2(), &[0, 0], &[1, 0], 0).unwrap(), vec![1, 0]);
        assert_eq!(weyl_reflect_dims(&a2(), &[0, 0], &[0, 0], 1).unwrap(), vec![0, 0]);
        assert_eq!(weyl_reflect_dims(&affine_a1(), &[1, 1], &[2, 0], 0).unwrap(), vec![3, 1]);
        let l = Graph::from_indices(1, &[(0, 0)]);
        assert!(matches!(weyl_reflect_dims(&l, &[0], &[0], 0), Err(QuiverError::Loop(_))));
    }

    #[test]
    fn reflect_zeta_examples() {
        let z = vec![rf("t"), rf("t^2")];
        let r = weyl_reflect_zeta(&a2(), &z, 0).unwrap();
        assert_eq!(r, vec![rf("-t"), rf("t^2+t")]);
        assert_eq!(weyl_reflect_zeta(&a2(), &r, 0).unwrap(), z);
        let zero = vec![RatFunc::zero(4); 2];
        assert_eq!(weyl_reflect_zeta(&a2(), &zero, 1).unwrap(), zero);
    }

    #[test]
    fn genericity_examples() {
        assert!(is_generic_zeta_c(&[rf("t"), rf("t^2")], 4).generic);
        let g = is_generic_zeta_c(&[rf("1"), rf("2")], 4);
        assert_eq!(g.certificate, Some(ints(&[2, -1])));
        let g = is_generic_zeta_c(&[rf("t"), rf("t")], 4);
        assert_eq!(g.certificate, Some(ints(&[1, -1])));
        assert!(!is_generic_zeta_c(&[rf("1/(t-1)"), rf("2/(t-1)"), rf("i")], 4).generic);
        assert!(is_generic_zeta_c(&[rf("1/(t-1)"), rf("i")], 4).generic);
    }

    #[test]
    fn generic_pair_examples() {
        let q = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert!(is_generic_pair(&[q(0), q(0)], &[rf("t"), rf("t^2")], 4).generic);
        let g = is_generic_pair(&[q(1), q(1)], &[rf("t"), rf("t")], 4);
        assert_eq!(g.certificate, Some(ints(&[1, -1])));
        let g = is_generic_pair(&[q(1), q(2)], &[rf("0"), rf("0")], 4);
        assert_eq!(g.certificate, Some(ints(&[2, -1])));
    }
}
