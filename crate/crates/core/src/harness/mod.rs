//! Point generation, Weyl orbits and the batch property suite.

mod report;
mod suite;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub use report::{CheckResult, Report};
pub use suite::{parse_suite_config, run_suite, OrbitSpec, SuiteConfig};

use crate::algebra::ZigzagAlgebra;
use crate::bimodule::{reflect_tensor, ReflectError};
use crate::duplex::{check_complex_moment, framed_iso, Convention, FramedPoint};
use crate::quiver::{is_generic_zeta_c, weyl_reflect_dims, weyl_reflect_zeta, Graph};
use crate::scalars::{FMatrix, RatFunc};

/// The point with V = 0: only the semisimple summand S[-1] (x) W survives and d = 0.
pub fn seed_point(g: &Graph, m: u32, w: &[usize]) -> FramedPoint {
    FramedPoint::zero(g, m, &vec![0; g.num_vertices()], w)
}

/// Deterministic generator for one suite item.
pub fn item_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let d = h.finalize();
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(d[..8].try_into().unwrap()))
}

/// zeta_a = k_a t^{e_a} with distinct exponents, hence linearly independent over Q.
pub fn generic_params(n: usize, m: u32, rng: &mut impl Rng) -> Vec<RatFunc> {
    let mut exps: Vec<i64> = (1..=n as i64).collect();
    exps.shuffle(rng);
    exps.iter()
        .map(|&e| {
            let k = [1, -1, 2, -2, 3][rng.gen_range(0..5)];
            RatFunc::t(m).pow(e).unwrap().try_mul(&RatFunc::from_int(m, k)).unwrap()
        })
        .collect()
}

fn small(m: u32, rng: &mut impl Rng) -> RatFunc {
    RatFunc::from_int(m, rng.gen_range(-2..=2))
}

pub fn random_matrix(m: u32, rows: usize, cols: usize, rng: &mut impl Rng) -> FMatrix {
    FMatrix::from_fn(m, rows, cols, |_, _| small(m, rng))
}

/// Random invertible integer matrix (unipotent times a signed permutation-free diagonal).
pub fn random_gl(m: u32, n: usize, rng: &mut impl Rng) -> FMatrix {
    loop {
        let g = random_matrix(m, n, n, rng);
        if g.rank() == n {
            return g;
        }
    }
}

/// A solution of the moment equation with parameter c: random B and a full-rank i, then j solved
/// from i j = c - sum eps B B. Dimensions v_a <= max_dim, w_a in {v_a, v_a + 1}.
pub fn random_solution(g: &Graph, m: u32, c: &[RatFunc], max_dim: usize, conv: Convention, rng: &mut impl Rng) -> FramedPoint {
    let n = g.num_vertices();
    let v: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=max_dim)).collect();
    let w: Vec<usize> = v.iter().map(|&k| k + rng.gen_range(0..=1)).collect();
    let mut p = FramedPoint::zero(g, m, &v, &w);
    for h in g.half_edges() {
        p.b[h] = random_matrix(m, v[g.i(h)], v[g.o(h)], rng);
    }
    for a in 0..n {
        let i = loop {
            let i = random_matrix(m, v[a], w[a], rng);
            if i.rank() == v[a] {
                break i;
            }
        };
        p.i[a] = i;
        p.j[a] = FMatrix::zeros(m, w[a], v[a]);
        let res = check_complex_moment(&p, c, conv);
        let rhs = res[a].neg();
        p.j[a] = p.i[a].solve(&rhs).expect("i has full row rank").particular;
    }
    p
}

/// Changes one entry of B, i or j by one, if any entry exists.
pub fn perturb(p: &FramedPoint, rng: &mut impl Rng) -> FramedPoint {
    let mut q = p.clone();
    let m = p.m;
    let mut slots: Vec<(u8, usize)> = Vec::new();
    for (k, x) in p.b.iter().enumerate() {
        if x.rows() * x.cols() > 0 {
            slots.push((0, k));
        }
    }
    for a in 0..p.v.len() {
        if p.i[a].rows() * p.i[a].cols() > 0 {
            slots.push((1, a));
            slots.push((2, a));
        }
    }
    let Some(&(kind, k)) = slots.choose(rng) else { return q };
    let mat = match kind {
        0 => &mut q.b[k],
        1 => &mut q.i[k],
        _ => &mut q.j[k],
    };
    let (r, c) = (rng.gen_range(0..mat.rows()), rng.gen_range(0..mat.cols()));
    let v = mat.get(r, c).try_add(&RatFunc::one(m)).unwrap();
    mat.set(r, c, v);
    q
}

/// One reflection step of an orbit with its verdicts.
#[derive(Debug, Clone)]
pub struct OrbitStep {
    pub vertex: usize,
    pub point: FramedPoint,
    pub c: Vec<RatFunc>,
    pub dims_ok: bool,
    pub param_ok: bool,
    pub moment_ok: bool,
    pub generic_ok: bool,
}

impl OrbitStep {
    pub fn ok(&self) -> bool {
        self.dims_ok && self.param_ok && self.moment_ok && self.generic_ok
    }
}

#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub initial: FramedPoint,
    pub c: Vec<RatFunc>,
    pub word: Vec<usize>,
    pub steps: Vec<OrbitStep>,
}

impl OrbitTrace {
    pub fn ok(&self) -> bool {
        self.steps.iter().all(|s| s.ok())
    }

    pub fn endpoint(&self) -> (&FramedPoint, &[RatFunc]) {
        match self.steps.last() {
            Some(s) => (&s.point, &s.c),
            None => (&self.initial, &self.c),
        }
    }
}

/// Applies reflect_tensor along the word (leftmost letter first) and checks every step.
pub fn orbit(alg: &Arc<ZigzagAlgebra>, p: &FramedPoint, c: &[RatFunc], word: &[usize]) -> Result<OrbitTrace, ReflectError> {
    let g = alg.graph();
    let m = alg.conductor();
    let mut cur = p.clone();
    let mut cc = c.to_vec();
    let mut steps = Vec::with_capacity(word.len());
    for &a in word {
        if g.has_loop(a) {
            return Err(ReflectError::Loop(a));
        }
        let r = reflect_tensor(alg, &cur, &cc, a)?;
        let vi: Vec<i64> = cur.v.iter().map(|&x| x as i64).collect();
        let wi: Vec<i64> = cur.w.iter().map(|&x| x as i64).collect();
        let want_v = weyl_reflect_dims(g, &vi, &wi, a).expect("loopless");
        let want_c = weyl_reflect_zeta(g, &cc, a).expect("loopless");
        let dims_ok = r.point.v.iter().map(|&x| x as i64).collect::<Vec<_>>() == want_v && r.point.w == cur.w;
        let param_ok = r.c == want_c;
        let moment_ok = check_complex_moment(&r.point, &r.c, Convention::Centerm).iter().all(|x| x.is_zero());
        let generic_ok = is_generic_zeta_c(&cc, m).generic == is_generic_zeta_c(&r.c, m).generic;
        steps.push(OrbitStep { vertex: a, point: r.point.clone(), c: r.c.clone(), dims_ok, param_ok, moment_ok, generic_ok });
        cur = r.point;
        cc = r.c;
    }
    Ok(OrbitTrace { initial: p.clone(), c: c.to_vec(), word: word.to_vec(), steps })
}

/// Random word over loopless vertices.
pub fn random_word(g: &Graph, len: usize, rng: &mut impl Rng) -> Vec<usize> {
    let verts: Vec<usize> = (0..g.num_vertices()).filter(|&a| !g.has_loop(a)).collect();
    if verts.is_empty() {
        return vec![];
    }
    (0..len).map(|_| *verts.choose(rng).unwrap()).collect()
}

/// Rewrites a word by `moves` random applications of s_a s_a = 1, commutation of non-adjacent
/// letters and the braid relation across single edges. Both words name the same element of W.
pub fn equal_in_w(g: &Graph, word: &[usize], moves: usize, rng: &mut impl Rng) -> Vec<usize> {
    let verts: Vec<usize> = (0..g.num_vertices()).filter(|&a| !g.has_loop(a)).collect();
    let mut w = word.to_vec();
    if verts.is_empty() {
        return w;
    }
    for _ in 0..moves {
        let mut options: Vec<(u8, usize)> = vec![(0, rng.gen_range(0..=w.len()))];
        for k in 0..w.len().saturating_sub(1) {
            let (a, b) = (w[k], w[k + 1]);
            if a == b {
                options.push((1, k));
            } else if g.edge_multiplicity(a, b) == 0 {
                options.push((2, k));
            }
        }
        for k in 0..w.len().saturating_sub(2) {
            let (a, b) = (w[k], w[k + 1]);
            if a != b && w[k + 2] == a && g.edge_multiplicity(a, b) == 1 {
                options.push((3, k));
            }
        }
        let &(kind, k) = options.choose(rng).unwrap();
        match kind {
            0 => {
                let a = *verts.choose(rng).unwrap();
                w.splice(k..k, [a, a]);
            }
            1 => {
                w.drain(k..k + 2);
            }
            2 => w.swap(k, k + 1),
            _ => {
                let (a, b) = (w[k], w[k + 1]);
                w.splice(k..k + 3, [b, a, b]);
            }
        }
    }
    w
}

/// Outcome of comparing two orbit endpoints.
#[derive(Debug, Clone)]
pub struct EndpointComparison {
    pub same_dims: bool,
    pub same_params: bool,
    pub iso: bool,
}

impl EndpointComparison {
    pub fn ok(&self) -> bool {
        self.same_dims && self.same_params && self.iso
    }
}

pub fn compare_endpoints(t1: &OrbitTrace, t2: &OrbitTrace) -> EndpointComparison {
    let (p1, c1) = t1.endpoint();
    let (p2, c2) = t2.endpoint();
    let same_dims = p1.v == p2.v && p1.w == p2.w;
    let same_params = c1 == c2;
    let iso = same_dims && framed_iso(p1, p2).is_some();
    EndpointComparison { same_dims, same_params, iso }
}

/// Built-in graphs by name, with vertices "1".."n".
pub fn builtin_graph(name: &str) -> Option<Graph> {
    let g = match name {
        "point" => Graph::from_indices(1, &[]),
        "loop" => Graph::from_indices(1, &[(0, 0)]),
        "A2" => Graph::from_indices(2, &[(0, 1)]),
        "A3" => Graph::from_indices(3, &[(0, 1), (1, 2)]),
        "A4" => Graph::from_indices(4, &[(0, 1), (1, 2), (2, 3)]),
        "D4" => Graph::from_indices(4, &[(0, 1), (0, 2), (0, 3)]),
        "affA1" => Graph::from_indices(2, &[(0, 1), (0, 1)]),
        "affA2" => Graph::from_indices(3, &[(0, 1), (1, 2), (0, 2)]),
        "affA3" => Graph::from_indices(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]),
        "kronecker3" => Graph::from_indices(2, &[(0, 1), (0, 1), (0, 1)]),
        "loopA2" => Graph::from_indices(2, &[(0, 0), (0, 1)]),
        _ => return None,
    };
    Some(g)
}

pub const BUILTIN_GRAPHS: [&str; 11] = ["point", "loop", "A2", "A3", "A4", "D4", "affA1", "affA2", "affA3", "kronecker3", "loopA2"];

/// Lowercase hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Seeds at v = 0 with random w and generic parameters, then takes `steps` reflections that keep
/// every entry of v within max_dim, preferring ones that enlarge v. Returns the point and its parameter.
pub fn orbit_point(
    alg: &Arc<ZigzagAlgebra>,
    max_dim: usize,
    steps: usize,
    rng: &mut impl Rng,
) -> (FramedPoint, Vec<RatFunc>) {
    let g = alg.graph();
    let m = alg.conductor();
    let n = g.num_vertices();
    let mut w: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    if w.iter().all(|&x| x == 0) {
        w[rng.gen_range(0..n)] = 1;
    }
    let mut p = seed_point(g, m, &w);
    let mut c = generic_params(n, m, rng);
    let verts: Vec<usize> = (0..n).filter(|&a| !g.has_loop(a)).collect();
    for _ in 0..steps {
        let vi: Vec<i64> = p.v.iter().map(|&x| x as i64).collect();
        let wi: Vec<i64> = p.w.iter().map(|&x| x as i64).collect();
        let mut grow = Vec::new();
        let mut any = Vec::new();
        for &a in &verts {
            let nv = weyl_reflect_dims(g, &vi, &wi, a).expect("loopless")[a];
            if nv >= 0 && nv as usize <= max_dim {
                any.push(a);
                if nv > vi[a] {
                    grow.push(a);
                }
            }
        }
        let pool = if !grow.is_empty() && rng.gen_bool(0.75) { &grow } else { &any };
        let Some(&a) = pool.choose(rng) else { break };
        if let Ok(r) = reflect_tensor(alg, &p, &c, a) {
            p = r.point;
            c = r.c;
        }
    }
    let gl: Vec<FMatrix> = p.v.iter().map(|&k| random_gl(m, k, rng)).collect();
    (p.conjugate(&gl).expect("invertible"), c)
}

/// Vertex-name lookup table for reports.
pub fn vertex_names(g: &Graph) -> BTreeMap<usize, String> {
    (0..g.num_vertices()).map(|a| (a, g.vertex_name(a).to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duplex::stability_check;
    use crate::scalars::parse_scalar;

    #[test]
    fn seed_examples() {
        let g = builtin_graph("A2").unwrap();
        let p = seed_point(&g, 4, &[1, 0]);
        let c = vec![parse_scalar("t", 4).unwrap(), parse_scalar("t^2", 4).unwrap()];
        assert!(check_complex_moment(&p, &c, Convention::Centerm).iter().all(|x| x.is_zero()));
        assert!(stability_check(&p).stable);
        let e = seed_point(&g, 4, &[0, 0]);
        assert_eq!(e.v, vec![0, 0]);
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let t = orbit(&alg, &p, &c, &[0]).unwrap();
        assert_eq!(t.endpoint().0.v, vec![1, 0]);
        assert!(t.ok());
    }

    #[test]
    fn involution_and_braid_words() {
        let g = builtin_graph("A2").unwrap();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let mut rng = item_rng(1, "involution");
        let (p, c) = orbit_point(&alg, 3, 3, &mut rng);
        let t0 = orbit(&alg, &p, &c, &[]).unwrap();
        let t1 = orbit(&alg, &p, &c, &[1, 1]).unwrap();
        assert!(t1.ok() && compare_endpoints(&t0, &t1).ok());
        let ta = orbit(&alg, &p, &c, &[0, 1, 0]).unwrap();
        let tb = orbit(&alg, &p, &c, &[1, 0, 1]).unwrap();
        assert!(compare_endpoints(&ta, &tb).ok());
    }

    #[test]
    fn zero_parameter_is_an_error() {
        let g = builtin_graph("A2").unwrap();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let p = seed_point(&g, 4, &[1, 0]);
        let c = vec![RatFunc::zero(4), parse_scalar("t", 4).unwrap()];
        assert!(matches!(orbit(&alg, &p, &c, &[0]), Err(ReflectError::ZeroParameter(0))));
    }

    #[test]
    fn random_solutions_solve() {
        for name in BUILTIN_GRAPHS {
            let g = builtin_graph(name).unwrap();
            let mut rng = item_rng(7, name);
            let c = generic_params(g.num_vertices(), 4, &mut rng);
            let p = random_solution(&g, 4, &c, 3, Convention::Centerm, &mut rng);
            assert!(check_complex_moment(&p, &c, Convention::Centerm).iter().all(|x| x.is_zero()), "{name}");
        }
    }

    #[test]
    fn rewritten_words_have_equal_reflections() {
        let g = builtin_graph("A3").unwrap();
        let mut rng = item_rng(3, "words");
        for _ in 0..20 {
            let w1 = random_word(&g, 4, &mut rng);
            let w2 = equal_in_w(&g, &w1, 3, &mut rng);
            let act = |w: &[usize]| {
                let mut z: Vec<i64> = vec![1, 10, 100];
                for &a in w.iter() {
                    z = weyl_reflect_zeta(&g, &z, a).unwrap();
                }
                z
            };
            assert_eq!(act(&w1), act(&w2), "{w1:?} {w2:?}");
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn orbits_keep_genericity_and_depend_on_w_only(seed in 0u64..10_000, gi in 0usize..4) {
                let g = builtin_graph(["A3", "D4", "affA2", "affA3"][gi]).unwrap();
                let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
                let mut rng = item_rng(seed, "orbit");
                let (p, c) = orbit_point(&alg, 2, 2, &mut rng);
                let w1 = random_word(&g, 3, &mut rng);
                let w2 = equal_in_w(&g, &w1, 2, &mut rng);
                let t1 = orbit(&alg, &p, &c, &w1).unwrap();
                let t2 = orbit(&alg, &p, &c, &w2).unwrap();
                prop_assert!(t1.steps.iter().all(|s| s.generic_ok && is_generic_zeta_c(&s.c, 4).generic));
                prop_assert!(t1.ok() && t2.ok());
                prop_assert!(compare_endpoints(&t1, &t2).ok());
            }
        }
    }
}
