use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    builtin_graph, compare_endpoints, equal_in_w, generic_params, item_rng, orbit, orbit_point, perturb,
    random_gl, random_solution, random_word, CheckResult, Report,
};
use crate::algebra::ZigzagAlgebra;
use crate::bimodule::{
    build_c, reduce, reflect_direct, reflect_tensor, reflect_tensor_with, tensor,
    unit_bimodule, verify_braid, Schedule,
};
use crate::duplex::{assemble, find_duplex_iso, check_complex_moment, extract_point, framed_iso, stability_check, Convention};
use crate::mckay::{build_equivariant_c, equivariant_assemble, equivariant_stability, mckay_graph, morita_check};
use crate::quiver::{is_generic_zeta_c, weyl_reflect_zeta, Graph};
use crate::scalars::{parse_scalar, RatFunc};

/// A user-specified orbit: built-in graph, framing, parameters as scalar literals, word of vertex names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub graph: String,
    pub w: Vec<usize>,
    pub c: Vec<String>,
    pub word: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub graphs: Vec<String>,
    pub conductor: u32,
    pub max_dim: usize,
    pub curvature_points: usize,
    pub reflect_points: usize,
    pub orbit_pairs: usize,
    pub word_len: usize,
    pub c_graphs: Vec<String>,
    pub invert_graphs: Vec<String>,
    pub braid: bool,
    pub mckay: Vec<usize>,
    pub morita: Vec<usize>,
    pub mckay_points: usize,
    pub orbits: Vec<OrbitSpec>,
    pub convention: Convention,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        SuiteConfig {
            graphs: s(&super::BUILTIN_GRAPHS),
            conductor: 4,
            max_dim: 3,
            curvature_points: 50,
            reflect_points: 20,
            orbit_pairs: 4,
            word_len: 4,
            c_graphs: s(&["A2", "affA1"]),
            invert_graphs: s(&["A2", "A3", "affA1"]),
            braid: true,
            mckay: vec![2, 3, 4, 5, 6],
            morita: vec![2, 4],
            mckay_points: 4,
            orbits: vec![],
            convention: Convention::Centerm,
        }
    }
}

#[derive(Clone)]
enum Item {
    Algebra(String),
    Curvature(String, usize),
    CIdentity(String, usize),
    Invert(String, usize),
    Reflect(String, usize),
    Orbit(String, usize),
    Braid(String, usize, usize),
    McKayGraph(usize),
    Morita(usize),
    McKayPoint(usize, usize),
    McKayC(usize, usize),
    UserOrbit(usize),
}

impl Item {
    fn id(&self) -> String {
        match self {
            Item::Algebra(g) => format!("algebra/{g}"),
            Item::Curvature(g, k) => format!("curvature/{g}/{k:03}"),
            Item::CIdentity(g, a) => format!("c-identity/{g}/{a}"),
            Item::Invert(g, a) => format!("invertibility/{g}/{a}"),
            Item::Reflect(g, k) => format!("reflect/{g}/{k:03}"),
            Item::Orbit(g, k) => format!("orbit/{g}/{k:03}"),
            Item::Braid(g, a, b) => format!("braid/{g}/{a}-{b}"),
            Item::McKayGraph(n) => format!("mckay/{n}/graph"),
            Item::Morita(n) => format!("mckay/{n}/morita"),
            Item::McKayPoint(n, k) => format!("mckay/{n}/point/{k:03}"),
            Item::McKayC(n, a) => format!("mckay/{n}/c/{a}"),
            Item::UserOrbit(k) => format!("user-orbit/{k:03}"),
        }
    }
}

fn loopless(g: &Graph) -> Vec<usize> {
    (0..g.num_vertices()).filter(|&a| !g.has_loop(a)).collect()
}

fn items(cfg: &SuiteConfig) -> Vec<Item> {
    let mut out = Vec::new();
    for name in &cfg.graphs {
        out.push(Item::Algebra(name.clone()));
        for k in 0..cfg.curvature_points {
            out.push(Item::Curvature(name.clone(), k));
        }
        let lv = builtin_graph(name).map(|g| loopless(&g)).unwrap_or_default();
        if !lv.is_empty() {
            for k in 0..cfg.reflect_points {
                out.push(Item::Reflect(name.clone(), k));
            }
            for k in 0..cfg.orbit_pairs {
                out.push(Item::Orbit(name.clone(), k));
            }
        }
    }
    for (list, c) in [(&cfg.c_graphs, true), (&cfg.invert_graphs, false)] {
        for name in list {
            let lv = builtin_graph(name).map(|g| loopless(&g)).unwrap_or_else(|| vec![0]);
            for a in lv {
                out.push(if c { Item::CIdentity(name.clone(), a) } else { Item::Invert(name.clone(), a) });
            }
        }
    }
    if cfg.braid {
        out.push(Item::Braid("A2".into(), 0, 1));
        out.push(Item::Braid("A3".into(), 0, 2));
    }
    for &n in &cfg.mckay {
        out.push(Item::McKayGraph(n));
        for k in 0..cfg.mckay_points {
            out.push(Item::McKayPoint(n, k));
        }
    }
    for &n in &cfg.morita {
        out.push(Item::Morita(n));
        for a in 0..n {
            out.push(Item::McKayC(n, a));
        }
    }
    for k in 0..cfg.orbits.len() {
        out.push(Item::UserOrbit(k));
    }
    out
}

fn graph_or_fail(id: &str, name: &str) -> Result<Graph, Vec<CheckResult>> {
    builtin_graph(name).ok_or_else(|| vec![CheckResult::new(id, false, format!("unknown graph {name}"))])
}

fn join(parts: &[(&str, bool)]) -> String {
    let bad: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0).collect();
    if bad.is_empty() {
        "ok".into()
    } else {
        format!("failed: {}", bad.join(", "))
    }
}

fn verdict(id: String, parts: &[(&str, bool)]) -> CheckResult {
    CheckResult::new(id, parts.iter().all(|p| p.1), join(parts))
}

fn run_item(cfg: &SuiteConfig, seed: u64, item: &Item) -> Vec<CheckResult> {
    let id = item.id();
    let m = cfg.conductor;
    let mut rng = item_rng(seed, &id);
    let res: Result<Vec<CheckResult>, Vec<CheckResult>> = (|| match item {
        Item::Algebra(name) => {
            let g = graph_or_fail(&id, name)?;
            let alg = ZigzagAlgebra::new(&g, m);
            let checks = alg.verify();
            let parts: Vec<(&str, bool)> = checks.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            let mut r = verdict(id.clone(), &parts);
            r.detail = format!("dim={} {}", alg.dim(), r.detail);
            Ok(vec![r])
        }
        Item::Curvature(name, k) => {
            let g = graph_or_fail(&id, name)?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let c = generic_params(g.num_vertices(), m, &mut rng);
            let sol = random_solution(&g, m, &c, cfg.max_dim, Convention::Centerm, &mut rng);
            let p = if k % 2 == 0 { sol } else { perturb(&sol, &mut rng) };
            let d = assemble(&alg, &p, &c);
            let curv = d.check_curvature();
            let zero = check_complex_moment(&p, &c, cfg.convention).iter().all(|x| x.is_zero());
            let round = extract_point(&d).map(|(q, c2)| q == p && c2 == c).unwrap_or(false);
            let gl = (0..g.num_vertices()).map(|a| random_gl(m, p.v[a], &mut rng)).collect::<Vec<_>>();
            let q = p.conjugate(&gl).expect("invertible");
            let iso = framed_iso(&p, &q).is_some();
            let mut r = verdict(
                id.clone(),
                &[
                    ("curvature iff residual", curv == zero),
                    ("supercommutation", d.check_supercommutation()),
                    ("extract round trip", round),
                    ("conjugate is isomorphic", iso),
                ],
            );
            r.detail = format!("v={:?} w={:?} curvature={curv} residual_zero={zero} {}", p.v, p.w, r.detail);
            Ok(vec![r])
        }
        Item::CIdentity(name, a) => {
            let g = graph_or_fail(&id, name)?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let x = RatFunc::t(m);
            let c = build_c(&alg, *a, &x).map_err(|e| vec![CheckResult::new(&id, false, e.to_string())])?;
            let lr = (0..g.num_vertices()).all(|b| c.left_right_agree(b) == (b != *a));
            Ok(vec![verdict(
                id.clone(),
                &[
                    ("parity", c.check_parity()),
                    ("curvature", c.check_curvature()),
                    ("supercommutation", c.check_supercommutation()),
                    ("X_b central off a", lr),
                ],
            )])
        }
        Item::Invert(name, a) => {
            let g = graph_or_fail(&id, name)?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let x = RatFunc::t(m);
            let err = |e: String| vec![CheckResult::new(&id, false, e)];
            let n = build_c(&alg, *a, &x.neg()).map_err(|e| err(e.to_string()))?;
            let mm = build_c(&alg, *a, &x).map_err(|e| err(e.to_string()))?;
            let t = tensor(&n, &mm).map_err(|e| err(e.to_string()))?;
            let r = reduce(&t, Schedule::Forward);
            let u = unit_bimodule(&alg, r.c0.clone(), r.c1.clone());
            let iso = r.dim() == alg.dim() && find_duplex_iso(&r, &u).is_some();
            let mut out = verdict(
                id.clone(),
                &[("tensor curvature", t.check_curvature()), ("reduced curvature", r.check_curvature()), ("iso to A", iso)],
            );
            out.detail = format!("dim {} -> {} {}", t.dim(), r.dim(), out.detail);
            Ok(vec![out])
        }
        Item::Reflect(name, _) => {
            let g = graph_or_fail(&id, name)?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let (p, c) = orbit_point(&alg, cfg.max_dim, 4, &mut rng);
            let lv = loopless(&g);
            let a = lv[rng.gen_range(0..lv.len())];
            let t = reflect_tensor(&alg, &p, &c, a).map_err(|e| vec![CheckResult::new(&id, false, e.to_string())])?;
            let dq = reflect_direct(&p, &c, a).map_err(|e| vec![CheckResult::new(&id, false, e.to_string())])?;
            let want_c = weyl_reflect_zeta(&g, &c, a).expect("loopless");
            let dims = t.point.v == dq.v && t.point.w == dq.w;
            let iso = dims && framed_iso(&t.point, &dq).is_some();
            let res = check_complex_moment(&t.point, &want_c, Convention::Centerm).iter().all(|x| x.is_zero())
                && check_complex_moment(&dq, &want_c, Convention::Centerm).iter().all(|x| x.is_zero());
            let mut confluent = true;
            for s in [Schedule::Reverse, Schedule::EvenFirst] {
                confluent &= match reflect_tensor_with(&alg, &p, &c, a, s) {
                    Ok((q, c2)) => c2 == want_c && q.v == t.point.v && framed_iso(&q, &t.point).is_some(),
                    Err(_) => false,
                };
            }
            let mut r = verdict(
                id.clone(),
                &[
                    ("same dims", dims),
                    ("parameter", t.c == want_c),
                    ("framed iso", iso),
                    ("residual", res),
                    ("schedules agree", confluent),
                    ("derived big matrix", t.big.derived_ok),
                ],
            );
            r.detail = format!("vertex={} v={:?} -> {:?} {}", g.vertex_name(a), p.v, t.point.v, r.detail);
            Ok(vec![r])
        }
        Item::Orbit(name, k) => {
            let g = graph_or_fail(&id, name)?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let (p, c) = orbit_point(&alg, cfg.max_dim, 3, &mut rng);
            let (w1, w2) = if k % 2 == 0 {
                let a = random_word(&g, 1, &mut rng);
                (vec![a[0], a[0]], vec![])
            } else {
                let w1 = random_word(&g, cfg.word_len, &mut rng);
                let w2 = equal_in_w(&g, &w1, 3, &mut rng);
                (w1, w2)
            };
            let fail = |e: String| vec![CheckResult::new(&id, false, e)];
            let t1 = orbit(&alg, &p, &c, &w1).map_err(|e| fail(e.to_string()))?;
            let t2 = orbit(&alg, &p, &c, &w2).map_err(|e| fail(e.to_string()))?;
            let cmp = compare_endpoints(&t1, &t2);
            let generic = is_generic_zeta_c(&c, m).generic;
            let mut r = verdict(
                id.clone(),
                &[
                    ("steps", t1.ok() && t2.ok()),
                    ("endpoint dims", cmp.same_dims),
                    ("endpoint parameters", cmp.same_params),
                    ("endpoint iso", cmp.iso),
                    ("generic", generic),
                ],
            );
            r.detail = format!("words {:?} {:?} {}", w1, w2, r.detail);
            Ok(vec![r])
        }
        Item::Braid(name, a, b) => {
            let g = graph_or_fail(&id, name)?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let x = parse_scalar("t", m).unwrap();
            let y = parse_scalar("t^2", m).unwrap();
            let rep = verify_braid(&alg, *a, *b, &x, &y).map_err(|e| vec![CheckResult::new(&id, false, e.to_string())])?;
            let mut r = CheckResult::new(&id, rep.ok(), "");
            r.detail = format!("dims={:?} reduced={:?} iso={}", rep.dims, rep.reduced_dims, rep.iso);
            Ok(vec![r])
        }
        Item::McKayGraph(n) => {
            let fail = |e: String| vec![CheckResult::new(&id, false, e)];
            let mk = mckay_graph(*n).map_err(|e| fail(e.to_string()))?;
            let cyc = (0..*n).all(|a| {
                let want = if *n == 2 { 2 } else { 1 };
                (0..*n).all(|b| {
                    let adj = (b + 1) % n == a || (a + 1) % n == b;
                    mk.adjacency[a][b] == if adj { want } else { 0 }
                })
            });
            let s = crate::mckay::build_smash(*n).map_err(|e| fail(e.to_string()))?;
            let checks = s.verify();
            let mut parts: Vec<(&str, bool)> = checks.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            parts.push(("affine cycle", cyc));
            parts.push(("dim 4n", s.dim() == 4 * n));
            parts.push(("eps", mk.eps_ok));
            let mut r = verdict(id.clone(), &parts);
            r.detail = format!("dim={} {}", s.dim(), r.detail);
            Ok(vec![r])
        }
        Item::Morita(n) => {
            let rep = morita_check(*n).map_err(|e| vec![CheckResult::new(&id, false, e.to_string())])?;
            let detail = match &rep.first_mismatch {
                Some(s) => format!("end_dim={} mismatch: {s}", rep.end_dim),
                None => format!("end_dim={} ok", rep.end_dim),
            };
            Ok(vec![CheckResult::new(&id, rep.ok(), detail)])
        }
        Item::McKayPoint(n, k) => {
            let fail = |e: String| vec![CheckResult::new(&id, false, e)];
            let mk = mckay_graph(*n).map_err(|e| fail(e.to_string()))?;
            let mm = mk.group.m;
            let alg = Arc::new(ZigzagAlgebra::new(&mk.graph, mm));
            let (mut p, mut c) = orbit_point(&alg, 2, 3, &mut rng);
            if k % 2 == 1 {
                if rng.gen_bool(0.5) {
                    p = perturb(&p, &mut rng);
                } else {
                    let a = rng.gen_range(0..*n);
                    c[a] = c[a].try_add(&RatFunc::one(mm)).unwrap();
                }
            }
            let rec = equivariant_assemble(&mk, &p, &c, Convention::Centerm).map_err(|e| fail(e.to_string()))?;
            let st = equivariant_stability(&rec);
            let ds = stability_check(&p);
            let mut r = verdict(
                id.clone(),
                &[
                    ("record checks", rec.checks_ok()),
                    ("curvature iff residual", rec.curvature_ok == rec.moment_ok),
                    ("stability agrees", st.stable == ds.stable && st.witness == ds.witness),
                ],
            );
            r.detail = format!("v={:?} curvature={} residual_zero={} {}", p.v, rec.curvature_ok, rec.moment_ok, r.detail);
            Ok(vec![r])
        }
        Item::McKayC(n, a) => {
            let fail = |e: String| vec![CheckResult::new(&id, false, e)];
            let mk = mckay_graph(*n).map_err(|e| fail(e.to_string()))?;
            let x = RatFunc::t(mk.group.m);
            let c = build_equivariant_c(&mk, *a, &x).map_err(|e| fail(e.to_string()))?;
            let mut r = CheckResult::new(&id, c.ok(), "ok");
            if !c.ok() {
                r.detail = format!("mismatched blocks {:?}", c.mismatches);
            }
            Ok(vec![r])
        }
        Item::UserOrbit(k) => {
            let orb = &cfg.orbits[*k];
            let g = graph_or_fail(&id, &orb.graph)?;
            let fail = |e: String| vec![CheckResult::new(&id, false, e)];
            if orb.w.len() != g.num_vertices() || orb.c.len() != g.num_vertices() {
                return Err(fail("w and c need one entry per vertex".into()));
            }
            let c = orb.c.iter().map(|s| parse_scalar(s, m)).collect::<Result<Vec<_>, _>>().map_err(|e| fail(e.to_string()))?;
            let word = orb.word.iter().map(|s| g.vertex_index(s)).collect::<Result<Vec<_>, _>>().map_err(|e| fail(e.to_string()))?;
            let alg = Arc::new(ZigzagAlgebra::new(&g, m));
            let p = super::seed_point(&g, m, &orb.w);
            let t = orbit(&alg, &p, &c, &word).map_err(|e| fail(format!("reflect error: {e}")))?;
            let (q, _) = t.endpoint();
            Ok(vec![CheckResult::new(&id, t.ok(), format!("v={:?}", q.v))])
        }
    })();
    match res {
        Ok(v) | Err(v) => v,
    }
}

/// Reads a suite configuration; absent keys take their defaults.
pub fn parse_suite_config(bytes: &[u8]) -> Result<SuiteConfig, serde_json::Error> {
    serde_json::from_slice(bytes)
}

/// Runs every configured item, in parallel, and returns the verdicts sorted by id.
pub fn run_suite(cfg: &SuiteConfig, seed: u64) -> Report {
    let list = items(cfg);
    let results: Vec<CheckResult> = list.par_iter().flat_map_iter(|it| run_item(cfg, seed, it)).collect();
    let mut rep = Report::new("suite", Some(seed));
    let cfg_json = serde_json::to_vec(cfg).expect("config serializes");
    rep.add_input("config", &cfg_json);
    for r in results {
        rep.push(r);
    }
    rep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SuiteConfig {
        SuiteConfig {
            graphs: vec!["A2".into(), "loop".into()],
            curvature_points: 4,
            reflect_points: 2,
            orbit_pairs: 2,
            c_graphs: vec!["A2".into()],
            invert_graphs: vec!["A2".into()],
            braid: false,
            mckay: vec![2],
            morita: vec![2],
            mckay_points: 2,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn tiny_suite_passes_and_is_deterministic() {
        let cfg = tiny();
        let r1 = run_suite(&cfg, 5);
        for c in r1.failures() {
            panic!("{} {}", c.id, c.detail);
        }
        let r2 = run_suite(&cfg, 5);
        assert_eq!(r1.to_json(), r2.to_json());
        let mut ids: Vec<_> = r1.checks.iter().map(|c| c.id.clone()).collect();
        ids.sort();
        assert_eq!(ids, r1.checks.iter().map(|c| c.id.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn convention_mismatch_is_reported() {
        let cfg = SuiteConfig { convention: Convention::Mu, graphs: vec!["A3".into()], curvature_points: 12, ..tiny() };
        let r = run_suite(&cfg, 5);
        assert!(!r.ok);
        assert!(r.failures().any(|c| c.id.starts_with("curvature/A3")));
    }

    #[test]
    fn zero_parameter_surfaces_error() {
        let orb = OrbitSpec { graph: "A2".into(), w: vec![1, 0], c: vec!["0".into(), "t".into()], word: vec!["1".into()] };
        let cfg = SuiteConfig { orbits: vec![orb], ..tiny() };
        let r = run_suite(&cfg, 5);
        let f: Vec<_> = r.failures().collect();
        assert_eq!(f.len(), 1);
        assert!(f[0].id.starts_with("user-orbit") && f[0].detail.contains("reflect error"));
    }
}
