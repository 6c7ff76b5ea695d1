use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use qv_core::algebra::ZigzagAlgebra;
use qv_core::bimodule::{build_c, reduce, reflect_direct, reflect_tensor, tensor, unit_bimodule, verify_braid, Schedule};
use qv_core::duplex::{assemble, check_complex_moment, find_duplex_iso, framed_iso, stability_check, Convention, FramedPoint};
use qv_core::harness::{
    builtin_graph, compare_endpoints, equal_in_w, generic_params, item_rng, orbit, orbit_point, perturb, random_solution,
    random_word, run_suite, SuiteConfig, BUILTIN_GRAPHS,
};
use qv_core::mckay::{
    build_equivariant_c, build_smash, equivariant_assemble, equivariant_stability, mckay_graph, morita_check,
};
use qv_core::quiver::{weyl_reflect_zeta, Graph};
use qv_core::scalars::{FMatrix, RatFunc};

const M: u32 = 4;

struct Outcome {
    ok: bool,
    note: String,
}

fn pass(note: impl Into<String>) -> Outcome {
    Outcome { ok: true, note: note.into() }
}

fn fail(note: impl Into<String>) -> Outcome {
    Outcome { ok: false, note: note.into() }
}

fn moment_zero(p: &FramedPoint, c: &[RatFunc]) -> bool {
    check_complex_moment(p, c, Convention::Centerm).iter().all(|x| x.is_zero())
}

fn loopless(g: &Graph) -> Vec<usize> {
    (0..g.num_vertices()).filter(|&a| !g.has_loop(a)).collect()
}

fn graph(name: &str) -> Graph {
    builtin_graph(name).unwrap()
}

fn c1_algebra() -> Outcome {
    let mut worst = Duration::ZERO;
    for name in BUILTIN_GRAPHS {
        let t = Instant::now();
        let g = graph(name);
        let alg = ZigzagAlgebra::new(&g, M);
        if alg.dim() != 2 * (g.num_vertices() + g.num_edges()) {
            return fail(format!("{name}: dim {}", alg.dim()));
        }
        for (check, ok) in alg.verify() {
            if !ok {
                return fail(format!("{name}: {check}"));
            }
        }
        worst = worst.max(t.elapsed());
    }
    if worst > Duration::from_secs(1) {
        return fail(format!("slowest graph {:.3}s > 1s", worst.as_secs_f64()));
    }
    pass(format!("{} graphs, slowest {:.3}s", BUILTIN_GRAPHS.len(), worst.as_secs_f64()))
}

fn c2_curvature() -> Outcome {
    let (mut yes, mut no) = (0, 0);
    for name in BUILTIN_GRAPHS {
        let g = graph(name);
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        for k in 0..50 {
            let mut rng = item_rng(2, &format!("{name}/{k}"));
            let c = generic_params(g.num_vertices(), M, &mut rng);
            let sol = random_solution(&g, M, &c, 3, Convention::Centerm, &mut rng);
            let p = if k % 2 == 0 { sol } else { perturb(&sol, &mut rng) };
            let curv = assemble(&alg, &p, &c).check_curvature();
            let zero = moment_zero(&p, &c);
            if curv != zero {
                return fail(format!("{name} point {k}: d^2 = c is {curv}, residual zero is {zero}"));
            }
            if zero { yes += 1 } else { no += 1 }
        }
    }
    pass(format!("{} points, {yes} solutions, {no} non-solutions", yes + no))
}

fn c3_c_identity() -> Outcome {
    for name in ["A2", "affA1"] {
        let g = graph(name);
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        for a in 0..g.num_vertices() {
            let c = build_c(&alg, a, &RatFunc::t(M)).unwrap();
            if !c.check_curvature() {
                return fail(format!("{name} a={a}: d^2"));
            }
            if !c.check_supercommutation() {
                return fail(format!("{name} a={a}: supercommutation"));
            }
            for b in 0..g.num_vertices() {
                if c.left_right_agree(b) != (b != a) {
                    return fail(format!("{name} a={a}: l(X_{b}) - r(X_{b})"));
                }
            }
        }
    }
    pass("A2, affA1, x = t")
}

fn c4_invertibility() -> Outcome {
    let mut n = 0;
    for name in ["A2", "A3", "affA1"] {
        let g = graph(name);
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        let x = RatFunc::t(M);
        for a in loopless(&g) {
            let t = tensor(&build_c(&alg, a, &x.neg()).unwrap(), &build_c(&alg, a, &x).unwrap()).unwrap();
            let r = reduce(&t, Schedule::Forward);
            let u = unit_bimodule(&alg, r.c0.clone(), r.c1.clone());
            if r.dim() != alg.dim() || find_duplex_iso(&r, &u).is_none() {
                return fail(format!("{name} a={a}: reduced dim {} vs {}", r.dim(), alg.dim()));
            }
            n += 1;
        }
    }
    pass(format!("{n} vertices"))
}

fn c5_braid() -> Outcome {
    let x = RatFunc::t(M);
    let y = RatFunc::t(M).pow(2).unwrap();
    let mut notes = Vec::new();
    for (name, a, b) in [("A2", 0, 1), ("A3", 0, 2)] {
        let g = graph(name);
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        match verify_braid(&alg, a, b, &x, &y) {
            Ok(r) if r.ok() => notes.push(format!("{name}: reduced {:?}", r.reduced_dims)),
            Ok(r) => return fail(format!("{name}: {r:?}")),
            Err(e) => return fail(format!("{name}: {e}")),
        }
    }
    pass(notes.join("; "))
}

fn c6_big_matrix() -> Outcome {
    let mut bad = std::collections::BTreeSet::new();
    let mut derived = true;
    let mut printed_square = true;
    let mut count = 0;
    for name in ["A2", "affA1"] {
        let g = graph(name);
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        for k in 0..6 {
            let mut rng = item_rng(6, &format!("{name}/{k}"));
            let (p, c) = orbit_point(&alg, 3, 3, &mut rng);
            let a = random_word(&g, 1, &mut rng)[0];
            let Ok(t) = reflect_tensor(&alg, &p, &c, a) else { return fail(format!("{name} point {k}: reflect failed")) };
            count += 1;
            derived &= t.big.derived_ok;
            printed_square &= t.big.printed_curvature_ok;
            bad.extend(t.big.printed_mismatches());
        }
    }
    if bad.is_empty() && derived {
        pass(format!("{count} points"))
    } else {
        fail(format!(
            "{count} points; derived table {}; printed pattern differs in blocks {:?}; printed table squares to curvature: {printed_square}",
            if derived { "matches" } else { "differs" },
            bad
        ))
    }
}

fn c7_cross_validation() -> Outcome {
    let mut n = 0;
    for name in BUILTIN_GRAPHS {
        let g = graph(name);
        let lv = loopless(&g);
        if lv.is_empty() {
            continue;
        }
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        for k in 0..20 {
            let mut rng = item_rng(7, &format!("{name}/{k}"));
            let (p, c) = orbit_point(&alg, 3, 4, &mut rng);
            let a = random_word(&g, 1, &mut rng)[0];
            let want = weyl_reflect_zeta(&g, &c, a).unwrap();
            let t = match reflect_tensor(&alg, &p, &c, a) {
                Ok(t) => t,
                Err(e) => return fail(format!("{name} point {k}: tensor {e}")),
            };
            let d = match reflect_direct(&p, &c, a) {
                Ok(d) => d,
                Err(e) => return fail(format!("{name} point {k}: direct {e}")),
            };
            if t.point.v != d.v || t.point.w != d.w || t.c != want {
                return fail(format!("{name} point {k}: dims or parameters differ"));
            }
            if !moment_zero(&t.point, &want) || !moment_zero(&d, &want) {
                return fail(format!("{name} point {k}: nonzero residual"));
            }
            if framed_iso(&t.point, &d).is_none() {
                return fail(format!("{name} point {k}: no framed isomorphism"));
            }
            n += 1;
        }
    }
    pass(format!("{n} points"))
}

fn c8_orbits() -> Outcome {
    let mut n = 0;
    for name in BUILTIN_GRAPHS {
        let g = graph(name);
        let lv = loopless(&g);
        if lv.is_empty() {
            continue;
        }
        let alg = Arc::new(ZigzagAlgebra::new(&g, M));
        let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = lv.iter().map(|&a| (vec![a, a], vec![])).collect();
        for &a in &lv {
            for &b in &lv {
                if a < b && g.edge_multiplicity(a, b) == 1 {
                    pairs.push((vec![a, b, a], vec![b, a, b]));
                }
            }
        }
        let mut rng = item_rng(8, name);
        for _ in 0..3 {
            let w1 = random_word(&g, 4, &mut rng);
            let w2 = equal_in_w(&g, &w1, 3, &mut rng);
            pairs.push((w1, w2));
        }
        for (k, (w1, w2)) in pairs.iter().enumerate() {
            let (p, c) = orbit_point(&alg, 2, 3, &mut rng);
            let t1 = orbit(&alg, &p, &c, w1);
            let t2 = orbit(&alg, &p, &c, w2);
            let (Ok(t1), Ok(t2)) = (t1, t2) else { return fail(format!("{name} pair {k}: reflect error")) };
            if !t1.ok() || !t2.ok() {
                return fail(format!("{name} {w1:?}/{w2:?}: a step failed its transport check"));
            }
            if !compare_endpoints(&t1, &t2).ok() {
                return fail(format!("{name} {w1:?} vs {w2:?}: endpoints not isomorphic"));
            }
            n += 1;
        }
    }
    pass(format!("{n} word pairs"))
}

fn c9_mckay() -> Outcome {
    for n in 2..=6 {
        let mk = match mckay_graph(n) {
            Ok(mk) => mk,
            Err(e) => return fail(format!("n={n}: {e}")),
        };
        let want = if n == 2 { 2 } else { 1 };
        for a in 0..n {
            for b in 0..n {
                let adj = (a + 1) % n == b || (b + 1) % n == a;
                if mk.adjacency[a][b] != if adj { want } else { 0 } {
                    return fail(format!("n={n}: not the affine cycle"));
                }
            }
        }
        let s = build_smash(n).unwrap();
        if s.dim() != 4 * n {
            return fail(format!("n={n}: dim {}", s.dim()));
        }
        let alg = Arc::new(ZigzagAlgebra::new(&mk.graph, mk.group.m));
        for k in 0..6 {
            let mut rng = item_rng(9, &format!("{n}/{k}"));
            let (mut p, c) = orbit_point(&alg, 2, 3, &mut rng);
            if k % 2 == 1 {
                p = perturb(&p, &mut rng);
            }
            let rec = equivariant_assemble(&mk, &p, &c, Convention::Centerm).unwrap();
            if !rec.checks_ok() || rec.curvature_ok != rec.moment_ok {
                return fail(format!("n={n} point {k}: curvature {} residual {}", rec.curvature_ok, rec.moment_ok));
            }
        }
    }
    for n in [2, 4] {
        let r = morita_check(n).unwrap();
        if !r.ok() {
            return fail(format!("morita n={n}: {:?}", r.first_mismatch));
        }
    }
    let mk = mckay_graph(2).unwrap();
    for a in 0..2 {
        let c = build_equivariant_c(&mk, a, &RatFunc::t(mk.group.m)).unwrap();
        if !c.ok() {
            return fail(format!("bimodule a={a}: blocks {:?}", c.mismatches));
        }
    }
    pass("n = 2..6 graphs and transported points; Morita n = 2, 4; bimodule n = 2")
}

fn mat(rows: &[&[i64]]) -> FMatrix {
    FMatrix::from_int_rows(M, rows)
}

fn c10_stability() -> Outcome {
    let mut agree = 0;
    for n in [2, 3, 4] {
        let mk = mckay_graph(n).unwrap();
        let alg = Arc::new(ZigzagAlgebra::new(&mk.graph, mk.group.m));
        for k in 0..6 {
            let mut rng = item_rng(10, &format!("{n}/{k}"));
            let (mut p, c) = orbit_point(&alg, 2, 3, &mut rng);
            if k % 2 == 1 {
                for a in 0..n {
                    p.j[a] = FMatrix::zeros(mk.group.m, p.w[a], p.v[a]);
                }
            }
            let rec = equivariant_assemble(&mk, &p, &c, Convention::Centerm).unwrap();
            let st = equivariant_stability(&rec);
            let ds = stability_check(&p);
            if st.stable != ds.stable || st.witness != ds.witness || !st.witness_stable {
                return fail(format!("n={n} point {k}: equivariant {} duplex {}", st.stable, ds.stable));
            }
            agree += 1;
        }
    }
    let one = graph("point");
    let p1 = FramedPoint::zero(&one, M, &[1], &[0]);
    let s1 = stability_check(&p1);
    if s1.stable || s1.witness[0].rank() != 1 {
        return fail("v=(1), w=(0) should be unstable with witness V");
    }
    let mut p2 = FramedPoint::zero(&one, M, &[1], &[1]);
    p2.j[0] = mat(&[&[1]]);
    if !stability_check(&p2).stable {
        return fail("v=(1), w=(1), j=1 should be stable");
    }
    let a2 = graph("A2");
    let mut p3 = FramedPoint::zero(&a2, M, &[1, 1], &[1, 0]);
    p3.j[0] = mat(&[&[1]]);
    let h = a2.half_edge_from_id("0+").unwrap();
    assert_eq!((a2.o(h), a2.i(h)), (0, 1));
    p3.b[h] = mat(&[&[1]]);
    let s3 = stability_check(&p3);
    if s3.stable || s3.witness[0].rank() != 0 || s3.witness[1].rank() != 1 {
        return fail("A2 example should be unstable with witness 0 + V_2");
    }
    pass(format!("{agree} transported points agree; 3 hand examples"))
}

/// The built `qv` next to the test's deps directory, when present.
fn qv_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let bin = dir.join(format!("qv{}", std::env::consts::EXE_SUFFIX));
    bin.is_file().then_some(bin)
}

fn c11_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("qv-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bin = qv_binary();
    let mut outs = Vec::new();
    let mut first = Duration::ZERO;
    for k in 0..2 {
        let out = dir.join(format!("report{k}.json"));
        let t = Instant::now();
        let mut cmd = match &bin {
            Some(b) => Command::new(b),
            None => {
                let mut c = Command::new(std::env::current_exe().unwrap());
                c.env(CHILD_ENV, "1");
                c
            }
        };
        let status = cmd
            .args(["suite", "--seed", "11", "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        if k == 0 {
            first = t.elapsed();
        }
        if !status.success() {
            return fail(format!("qv suite exited with {status}"));
        }
        outs.push(std::fs::read(&out).unwrap());
    }
    let _ = std::fs::remove_dir_all(&dir);
    if outs[0] != outs[1] {
        return fail("reports differ");
    }
    let how = if bin.is_some() { "qv suite" } else { "library suite entry (qv binary not built)" };
    pass(format!("{how}: {} bytes identical, one run {:.1}s", outs[0].len(), first.as_secs_f64()))
}

const CHILD_ENV: &str = "QV_ACCEPTANCE_SUITE_CHILD";

/// Child mode for criterion 11 without a built binary: `suite --seed N --out path` on the default config.
fn child_suite() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args[3].parse().unwrap();
    let rep = run_suite(&SuiteConfig::default(), seed);
    std::fs::write(&args[5], rep.to_json()).unwrap();
    if rep.ok { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

fn main() -> ExitCode {
    if std::env::var_os(CHILD_ENV).is_some() {
        return child_suite();
    }
    let criteria: [(&str, fn() -> Outcome, f64); 11] = [
        ("algebra suite", c1_algebra, BUILTIN_GRAPHS.len() as f64),
        ("curvature equivalence", c2_curvature, 10.0),
        ("C_{a,x} identity", c3_c_identity, 1.0),
        ("invertibility", c4_invertibility, 30.0),
        ("braid", c5_braid, 60.0),
        ("reflection regression (big matrix)", c6_big_matrix, 5.0),
        ("cross-validation", c7_cross_validation, 60.0),
        ("involution and orbit independence", c8_orbits, 120.0),
        ("McKay", c9_mckay, 120.0),
        ("stability", c10_stability, 5.0),
        ("determinism", c11_determinism, f64::INFINITY),
    ];
    let mut failed = 0;
    for (k, (name, f, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut out = f();
        let secs = t.elapsed().as_secs_f64();
        if secs > *limit {
            out.ok = false;
            out.note = format!("{} (over time limit)", out.note);
        }
        let lim = match k {
            0 => "1s per graph".to_string(),
            10 => "suite runtime".to_string(),
            _ => format!("{limit:.0}s"),
        };
        println!(
            "{} {:>2}. {name}: tolerance 0 (exact), {secs:.2}s / {lim}; {}",
            if out.ok { "PASS" } else { "FAIL" },
            k + 1,
            out.note
        );
        if !out.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
