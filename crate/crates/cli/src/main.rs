use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use qv_core::algebra::ZigzagAlgebra;
use qv_core::bimodule::{reflect_direct, reflect_tensor, verify_braid};
use qv_core::duplex::{assemble, check_complex_moment, check_real_moment, framed_iso, stability_check, Convention, FramedPoint};
use qv_core::harness::{orbit, parse_suite_config, run_suite, Report, SuiteConfig};
use qv_core::io::{self, IoError, PointFile};
use qv_core::mckay::{build_smash, equivariant_assemble, equivariant_stability, mckay_graph, morita_check};
use qv_core::quiver::{weyl_reflect_zeta, Graph};
use qv_core::scalars::{FMatrix, RatFunc};

#[derive(Parser)]
#[command(name = "qv", version, about = "Exact checks for zigzag-algebra duplexes and reflection functors")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the suite (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Conv::Centerm)]
    convention: Conv,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conv {
    Centerm,
    Mu,
}

impl From<Conv> for Convention {
    fn from(c: Conv) -> Self {
        match c {
            Conv::Centerm => Convention::Centerm,
            Conv::Mu => Convention::Mu,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Tensor,
    Direct,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the zigzag algebra of a quiver.
    Algebra {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Moment-map residuals, curvature and stability of a framed point.
    Check {
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        real: bool,
        #[arg(long)]
        stability: bool,
    },
    /// Reflect a point at a vertex; prints the reflected point.
    Reflect {
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Apply reflections along a word, leftmost letter first.
    Orbit {
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// Braid relation for C_a, C_b.
    VerifyBraid {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long, num_args = 2)]
        vertices: Vec<String>,
        /// Use x = t, y = t^2 instead of x = 2, y = 3.
        #[arg(long)]
        symbolic: bool,
    },
    /// McKay graph, smash product and Morita checks for Z/n.
    Mckay {
        #[arg(long)]
        cyclic: usize,
        #[arg(long)]
        morita: bool,
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Run the property suite.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum Fail {
    Input(String),
}

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        Fail::Input(e.to_string())
    }
}

fn read_bytes(p: &Path) -> Result<Vec<u8>, Fail> {
    std::fs::read(p).map_err(|e| Fail::Input(format!("cannot read {}: {e}", p.display())))
}

fn vertex(g: &Graph, name: &str) -> Result<usize, Fail> {
    g.vertex_index(name).map_err(|e| Fail::Input(e.to_string()))
}

fn zeta_c(pf: &PointFile) -> Result<Vec<RatFunc>, Fail> {
    pf.zeta_c.clone().ok_or_else(|| Fail::Input("point file has no zeta_c".into()))
}

fn show(x: &FMatrix) -> String {
    let rows: Vec<String> = (0..x.rows()).map(|r| format!("[{}]", x.row(r).iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

fn show_vec(v: &[RatFunc]) -> String {
    format!("({})", v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))
}

fn algebra(rep: &mut Report, quiver: &Path, verify: bool) -> Result<(), Fail> {
    rep.add_input("quiver", &read_bytes(quiver)?);
    let g = io::read_quiver(quiver)?;
    let alg = ZigzagAlgebra::new(&g, 4);
    println!("dim={}", alg.dim());
    let labels: Vec<String> = (0..alg.dim()).map(|k| alg.label(k)).collect();
    println!("basis: {}", labels.join(" "));
    rep.check("dim", alg.dim() == 2 * (g.num_vertices() + g.num_edges()), format!("dim={}", alg.dim()));
    if verify {
        for (name, ok) in alg.verify() {
            println!("{} {name}", if ok { "ok  " } else { "FAIL" });
            rep.check(format!("verify/{name}"), ok, "");
        }
    }
    Ok(())
}

fn check(rep: &mut Report, path: &Path, real: bool, stability: bool, conv: Convention) -> Result<(), Fail> {
    rep.add_input("point", &read_bytes(path)?);
    let pf = io::read_point(path)?;
    let p = &pf.point;
    let g = &p.graph;
    let alg = Arc::new(ZigzagAlgebra::new(g, p.m));
    println!("v={:?} w={:?}", p.v, p.w);
    if let Some(c) = &pf.zeta_c {
        let res = check_complex_moment(p, c, conv);
        for (a, r) in res.iter().enumerate() {
            let name = g.vertex_name(a);
            println!("complex residual {name}: {}", show(r));
            rep.check(format!("complex/{name}"), r.is_zero(), show(r));
        }
        let d = assemble(&alg, p, c);
        let curv = d.check_curvature();
        println!("d^2 = c: {curv}");
        rep.check("curvature", curv, "");
    } else if !real && !stability {
        return Err(Fail::Input("point file has no zeta_c".into()));
    }
    if real {
        let zr = pf.zeta_r.clone().ok_or_else(|| Fail::Input("--real needs zeta_r in the point file".into()))?;
        let res = check_real_moment(&alg, p, &zr).map_err(|e| Fail::Input(e.to_string()))?;
        for (a, r) in res.iter().enumerate() {
            let name = g.vertex_name(a);
            println!("real residual {name}: {}", show(r));
            rep.check(format!("real/{name}"), r.is_zero(), show(r));
        }
    }
    if stability {
        let st = stability_check(p);
        println!("stable: {}", st.stable);
        for (a, w) in st.witness.iter().enumerate() {
            if w.rows() > 0 {
                println!("witness {}: {}", g.vertex_name(a), show(w));
            }
        }
        let wit: Vec<String> = st.witness.iter().map(show).collect();
        rep.check("stability", st.stable, wit.join(" "));
    }
    Ok(())
}

fn reflect(rep: &mut Report, path: &Path, vname: &str, method: Method) -> Result<(), Fail> {
    rep.add_input("point", &read_bytes(path)?);
    let pf = io::read_point(path)?;
    let p = &pf.point;
    let c = zeta_c(&pf)?;
    let a = vertex(&p.graph, vname)?;
    let alg = Arc::new(ZigzagAlgebra::new(&p.graph, p.m));
    let want_c = weyl_reflect_zeta(&p.graph, &c, a).map_err(|e| Fail::Input(e.to_string()))?;
    let residual_ok = |q: &FramedPoint| check_complex_moment(q, &want_c, Convention::Centerm).iter().all(|x| x.is_zero());
    let mut out: Option<FramedPoint> = None;
    let mut tensor_pt = None;
    if method != Method::Direct {
        match reflect_tensor(&alg, p, &c, a) {
            Ok(t) => {
                rep.check("tensor/parameter", t.c == want_c, show_vec(&t.c));
                rep.check("tensor/residual", residual_ok(&t.point), "");
                tensor_pt = Some(t.point.clone());
                out = Some(t.point);
            }
            Err(e) => rep.check("tensor", false, e.to_string()),
        }
    }
    if method != Method::Tensor {
        match reflect_direct(p, &c, a) {
            Ok(q) => {
                rep.check("direct/residual", residual_ok(&q), "");
                if let Some(t) = &tensor_pt {
                    let dims = t.v == q.v && t.w == q.w;
                    rep.check("both/dims", dims, format!("{:?} {:?}", t.v, q.v));
                    rep.check("both/framed-iso", dims && framed_iso(t, &q).is_some(), "");
                }
                out.get_or_insert(q);
            }
            Err(e) => rep.check("direct", false, e.to_string()),
        }
    }
    for r in &rep.checks {
        eprintln!("{} {} {}", if r.ok { "ok  " } else { "FAIL" }, r.id, r.detail);
    }
    if let Some(q) = out {
        print!("{}", io::write_point(&PointFile { point: q, zeta_c: Some(want_c), zeta_r: None }));
    }
    Ok(())
}

fn orbit_cmd(rep: &mut Report, path: &Path, word: &str) -> Result<(), Fail> {
    rep.add_input("point", &read_bytes(path)?);
    let pf = io::read_point(path)?;
    let p = &pf.point;
    let c = zeta_c(&pf)?;
    let letters = word.split_whitespace().map(|s| vertex(&p.graph, s)).collect::<Result<Vec<_>, _>>()?;
    let alg = Arc::new(ZigzagAlgebra::new(&p.graph, p.m));
    match orbit(&alg, p, &c, &letters) {
        Ok(t) => {
            for (k, s) in t.steps.iter().enumerate() {
                let name = p.graph.vertex_name(s.vertex);
                println!("step {k} s_{name}: v={:?} c={}", s.point.v, show_vec(&s.c));
                rep.check(format!("step/{k:03}/dims"), s.dims_ok, format!("{:?}", s.point.v));
                rep.check(format!("step/{k:03}/parameter"), s.param_ok, show_vec(&s.c));
                rep.check(format!("step/{k:03}/residual"), s.moment_ok, "");
                rep.check(format!("step/{k:03}/genericity"), s.generic_ok, "");
            }
            println!("ok: {}", t.ok());
        }
        Err(e) => {
            println!("reflect error: {e}");
            rep.check("orbit", false, e.to_string());
        }
    }
    Ok(())
}

fn braid(rep: &mut Report, quiver: &Path, vs: &[String], symbolic: bool) -> Result<(), Fail> {
    rep.add_input("quiver", &read_bytes(quiver)?);
    let g = io::read_quiver(quiver)?;
    let (a, b) = (vertex(&g, &vs[0])?, vertex(&g, &vs[1])?);
    let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
    let (x, y) = if symbolic {
        (RatFunc::t(4), RatFunc::t(4).pow(2).unwrap())
    } else {
        (RatFunc::from_int(4, 2), RatFunc::from_int(4, 3))
    };
    match verify_braid(&alg, a, b, &x, &y) {
        Ok(r) => {
            println!("adjacent: {}", r.adjacent);
            println!("dims: {:?} reduced: {:?}", r.dims, r.reduced_dims);
            println!("curvature: {} iso: {}", r.curvature_ok, r.iso);
            if let Some(e) = r.equal_on_nose {
                println!("equal on the nose: {e}");
            }
            for (side, pat) in [("lhs", &r.lhs_pattern), ("rhs", &r.rhs_pattern)] {
                if let Some(pc) = pat {
                    println!("{side} pattern: curvature {} iso {} first {} last {}", pc.curvature_ok, pc.iso_ok, pc.first_ok, pc.last_ok);
                    rep.check(format!("pattern/{side}"), pc.ok(), "");
                }
            }
            rep.check("braid", r.ok(), format!("reduced {:?}", r.reduced_dims));
            println!("ok: {}", r.ok());
        }
        Err(e) => return Err(Fail::Input(e.to_string())),
    }
    Ok(())
}

fn mckay(rep: &mut Report, n: usize, morita: bool, point: Option<&Path>, conv: Convention) -> Result<(), Fail> {
    let mk = mckay_graph(n).map_err(|e| Fail::Input(e.to_string()))?;
    let g = &mk.graph;
    println!("group: Z/{n}, conductor {}", mk.group.m);
    let edges: Vec<String> = g.edges().iter().map(|&(a, b)| format!("{}-{}", g.vertex_name(a), g.vertex_name(b))).collect();
    println!("graph: vertices {} edges {}", g.num_vertices(), edges.join(" "));
    println!("quiver: {}", io::quiver_to_value(g));
    rep.check("graph/eps", mk.eps_ok, "");
    let s = build_smash(n).map_err(|e| Fail::Input(e.to_string()))?;
    println!("dim A_Gamma = {}", s.dim());
    rep.check("smash/dim", s.dim() == 4 * n, s.dim().to_string());
    for (name, ok) in s.verify() {
        println!("{} {name}", if ok { "ok  " } else { "FAIL" });
        rep.check(format!("smash/{name}"), ok, "");
    }
    if morita {
        let r = morita_check(n).map_err(|e| Fail::Input(e.to_string()))?;
        println!("morita: end dim {} vs {}, degree-one {:?}", r.end_dim, r.algebra_dim, r.degree_one);
        if let Some(mm) = &r.first_mismatch {
            println!("first mismatch: {mm}");
        }
        rep.check("morita", r.ok(), r.first_mismatch.clone().unwrap_or_default());
    }
    if let Some(path) = point {
        rep.add_input("point", &read_bytes(path)?);
        let pf = io::read_point(path)?;
        let c = zeta_c(&pf)?;
        let p = &pf.point;
        if p.graph != *g || p.m != mk.group.m {
            return Err(Fail::Input(format!("point must live on the McKay quiver {} with conductor {}", io::quiver_to_value(g), mk.group.m)));
        }
        let rec = equivariant_assemble(&mk, p, &c, conv).map_err(|e| Fail::Input(e.to_string()))?;
        println!("equivariant dim {}", rec.dim);
        println!("d^2 = sum zeta_a c_a: {}", rec.curvature_ok);
        println!("moment residual zero: {}", rec.moment_ok);
        rep.check("equivariant/structure", rec.checks_ok(), format!("y_sign={:?}", rec.y_sign));
        rep.check("equivariant/curvature-iff-residual", rec.curvature_ok == rec.moment_ok, "");
        rep.check("equivariant/curvature", rec.curvature_ok, "");
        let st = equivariant_stability(&rec);
        let ds = stability_check(p);
        println!("stable: {} (duplex {})", st.stable, ds.stable);
        rep.check("equivariant/stability-agrees", st.stable == ds.stable && st.witness == ds.witness, "");
    }
    Ok(())
}

fn suite(rep: &mut Report, config: Option<&Path>, seed: u64) -> Result<(), Fail> {
    let cfg: SuiteConfig = match config {
        None => SuiteConfig::default(),
        Some(p) => {
            let text = read_bytes(p)?;
            parse_suite_config(&text).map_err(|e| {
                Fail::Input(format!("{}: line {}, column {}: {e}", p.display(), e.line(), e.column()))
            })?
        }
    };
    *rep = run_suite(&cfg, seed);
    rep.command = "suite".into();
    let failed: Vec<_> = rep.failures().collect();
    println!("{} checks, {} failed", rep.checks.len(), failed.len());
    for f in failed {
        println!("FAIL {} {}", f.id, f.detail);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let conv: Convention = cli.convention.into();
    let name = match &cli.cmd {
        Cmd::Algebra { .. } => "algebra",
        Cmd::Check { .. } => "check",
        Cmd::Reflect { .. } => "reflect",
        Cmd::Orbit { .. } => "orbit",
        Cmd::VerifyBraid { .. } => "verify-braid",
        Cmd::Mckay { .. } => "mckay",
        Cmd::Suite { .. } => "suite",
    };
    let mut rep = Report::new(name, Some(cli.seed));
    let res = match &cli.cmd {
        Cmd::Algebra { quiver, verify } => algebra(&mut rep, quiver, *verify),
        Cmd::Check { point, real, stability } => check(&mut rep, point, *real, *stability, conv),
        Cmd::Reflect { point, vertex, method } => reflect(&mut rep, point, vertex, *method),
        Cmd::Orbit { point, word } => orbit_cmd(&mut rep, point, word),
        Cmd::VerifyBraid { quiver, vertices, symbolic } => braid(&mut rep, quiver, vertices, *symbolic),
        Cmd::Mckay { cyclic, morita, point } => mckay(&mut rep, *cyclic, *morita, point.as_deref(), conv),
        Cmd::Suite { config } => suite(&mut rep, config.as_deref(), cli.seed),
    };
    if let Err(Fail::Input(msg)) = res {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let rep = rep.finish();
    if let Some(out) = &cli.out {
        if let Err(e) = std::fs::write(out, rep.to_json()) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return ExitCode::from(2);
        }
    }
    if rep.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
