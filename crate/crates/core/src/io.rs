//! JSON files for quivers and framed points.
//!
//! Matrices are row-major arrays of scalar literals. Objects are keyed by vertex name
//! (v, w, zeta_c, zeta_r, i, j) or half-edge id such as "0+" (B).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::duplex::FramedPoint;
use crate::quiver::{Graph, QuiverError};
use crate::scalars::{parse_scalar, FMatrix, RatFunc, ScalarError, DEFAULT_CONDUCTOR};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{file}: JSON syntax error at line {line}, column {column}: {msg}")]
    Json { file: String, line: usize, column: usize, msg: String },
    #[error("{file}: {path}: scalar \"{src}\" invalid at character {pos}: {msg}")]
    Scalar { file: String, path: String, src: String, pos: usize, msg: String },
    #[error("{file}: {path}: {msg}")]
    Field { file: String, path: String, msg: String },
    #[error("{file}: {0}", file = .1)]
    Quiver(QuiverError, String),
    #[error("cannot read {0}: {1}")]
    Read(String, String),
}

/// Point file contents beyond the framed data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointFile {
    pub point: FramedPoint,
    pub zeta_c: Option<Vec<RatFunc>>,
    pub zeta_r: Option<Vec<BigRational>>,
}

struct Ctx<'a> {
    file: &'a str,
    m: u32,
}

impl Ctx<'_> {
    fn field(&self, path: &str, msg: impl Into<String>) -> IoError {
        IoError::Field { file: self.file.into(), path: path.into(), msg: msg.into() }
    }

    fn scalar(&self, path: &str, v: &Value) -> Result<RatFunc, IoError> {
        let s = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_i64() => n.to_string(),
            _ => return Err(self.field(path, "expected a scalar string")),
        };
        parse_scalar(&s, self.m).map_err(|e| match e {
            ScalarError::Parse { pos, msg } => IoError::Scalar { file: self.file.into(), path: path.into(), src: s.clone(), pos, msg },
            other => IoError::Scalar { file: self.file.into(), path: path.into(), src: s.clone(), pos: 0, msg: other.to_string() },
        })
    }

    fn matrix(&self, path: &str, v: &Value, rows: usize, cols: usize) -> Result<FMatrix, IoError> {
        let arr = v.as_array().ok_or_else(|| self.field(path, "expected an array of rows"))?;
        if arr.len() != rows {
            return Err(self.field(path, format!("expected {rows} rows, found {}", arr.len())));
        }
        let mut out = FMatrix::zeros(self.m, rows, cols);
        for (r, row) in arr.iter().enumerate() {
            let rp = format!("{path}[{r}]");
            let row = row.as_array().ok_or_else(|| self.field(&rp, "expected a row array"))?;
            if row.len() != cols {
                return Err(self.field(&rp, format!("expected {cols} entries, found {}", row.len())));
            }
            for (c, x) in row.iter().enumerate() {
                out.set(r, c, self.scalar(&format!("{rp}[{c}]"), x)?);
            }
        }
        Ok(out)
    }
}

fn parse_json(file: &str, text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json { file: file.into(), line: e.line(), column: e.column(), msg: e.to_string() })
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read(path.display().to_string(), e.to_string()))
}

fn object<'a>(ctx: &Ctx, v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| ctx.field(path, "expected an object"))
}

fn check_keys(ctx: &Ctx, obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), IoError> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(ctx.field(path, format!("unknown key \"{k}\"")));
        }
    }
    Ok(())
}

fn quiver_from_value(file: &str, v: &Value) -> Result<Graph, IoError> {
    let ctx = Ctx { file, m: DEFAULT_CONDUCTOR };
    let obj = object(&ctx, v, "$")?;
    check_keys(&ctx, obj, "$", &["vertices", "edges", "orientation"])?;
    let verts = obj
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| ctx.field("vertices", "expected an array of names"))?
        .iter()
        .enumerate()
        .map(|(k, x)| x.as_str().map(String::from).ok_or_else(|| ctx.field(&format!("vertices[{k}]"), "expected a string")))
        .collect::<Result<Vec<_>, _>>()?;
    let edges = match obj.get("edges") {
        None => vec![],
        Some(e) => e
            .as_array()
            .ok_or_else(|| ctx.field("edges", "expected an array of pairs"))?
            .iter()
            .enumerate()
            .map(|(k, x)| match x.as_array().map(|a| a.as_slice()) {
                Some([Value::String(a), Value::String(b)]) => Ok((a.clone(), b.clone())),
                _ => Err(ctx.field(&format!("edges[{k}]"), "expected [\"a\", \"b\"]")),
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let mut orient = BTreeMap::new();
    if let Some(o) = obj.get("orientation") {
        for (k, s) in object(&ctx, o, "orientation")? {
            let path = format!("orientation.{k}");
            let idx: usize = k.parse().map_err(|_| ctx.field(&path, "edge index must be an integer"))?;
            let sign = s.as_i64().ok_or_else(|| ctx.field(&path, "expected 1 or -1"))?;
            orient.insert(idx, sign);
        }
    }
    Graph::new(verts, edges, &orient).map_err(|e| IoError::Quiver(e, file.into()))
}

pub fn parse_quiver(file: &str, text: &str) -> Result<Graph, IoError> {
    quiver_from_value(file, &parse_json(file, text)?)
}

pub fn read_quiver(path: &Path) -> Result<Graph, IoError> {
    parse_quiver(&path.display().to_string(), &read(path)?)
}

pub fn quiver_to_value(g: &Graph) -> Value {
    let orient: Map<String, Value> = (0..g.num_edges()).map(|k| (k.to_string(), json!(g.eps(2 * k)))).collect();
    json!({
        "vertices": g.vertices(),
        "edges": g.edges().iter().map(|&(a, b)| json!([g.vertex_name(a), g.vertex_name(b)])).collect::<Vec<_>>(),
        "orientation": orient,
    })
}

pub fn write_quiver(g: &Graph) -> String {
    pretty(&quiver_to_value(g))
}

fn per_vertex<'a>(ctx: &Ctx, g: &Graph, obj: &'a Map<String, Value>, key: &str) -> Result<Option<Vec<&'a Value>>, IoError> {
    let Some(v) = obj.get(key) else { return Ok(None) };
    let o = object(ctx, v, key)?;
    for k in o.keys() {
        if g.vertex_index(k).is_err() {
            return Err(ctx.field(&format!("{key}.{k}"), "unknown vertex"));
        }
    }
    (0..g.num_vertices())
        .map(|a| {
            let name = g.vertex_name(a);
            o.get(name).ok_or_else(|| ctx.field(&format!("{key}.{name}"), "missing vertex"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn dims(ctx: &Ctx, g: &Graph, obj: &Map<String, Value>, key: &str) -> Result<Vec<usize>, IoError> {
    match per_vertex(ctx, g, obj, key)? {
        None => Ok(vec![0; g.num_vertices()]),
        Some(vals) => vals
            .iter()
            .enumerate()
            .map(|(a, x)| {
                x.as_u64().map(|n| n as usize).ok_or_else(|| ctx.field(&format!("{key}.{}", g.vertex_name(a)), "expected a nonnegative integer"))
            })
            .collect(),
    }
}

/// Parses a point file. A string-valued "quiver" is a path relative to `base`.
pub fn parse_point(file: &str, text: &str, base: Option<&Path>) -> Result<PointFile, IoError> {
    let v = parse_json(file, text)?;
    let ctx0 = Ctx { file, m: DEFAULT_CONDUCTOR };
    let obj = object(&ctx0, &v, "$")?;
    check_keys(&ctx0, obj, "$", &["quiver", "conductor", "v", "w", "zeta_c", "zeta_r", "B", "i", "j"])?;
    let m = match obj.get("conductor") {
        None => DEFAULT_CONDUCTOR,
        Some(c) => c.as_u64().filter(|&n| n >= 1).ok_or_else(|| ctx0.field("conductor", "expected a positive integer"))? as u32,
    };
    let ctx = Ctx { file, m };
    let g = match obj.get("quiver") {
        Some(Value::String(p)) => {
            let mut pb = PathBuf::from(p);
            if pb.is_relative() {
                if let Some(b) = base {
                    pb = b.join(pb);
                }
            }
            read_quiver(&pb)?
        }
        Some(q) => quiver_from_value(file, q)?,
        None => return Err(ctx.field("quiver", "missing")),
    };
    let vd = dims(&ctx, &g, obj, "v")?;
    let wd = dims(&ctx, &g, obj, "w")?;
    let mut p = FramedPoint::zero(&g, m, &vd, &wd);
    if let Some(bv) = obj.get("B") {
        let bo = object(&ctx, bv, "B")?;
        for (k, x) in bo {
            let h = g.half_edge_from_id(k).map_err(|_| ctx.field(&format!("B.{k}"), "unknown half-edge id"))?;
            p.b[h] = ctx.matrix(&format!("B.{k}"), x, vd[g.i(h)], vd[g.o(h)])?;
        }
    }
    for (key, rows, cols) in [("i", &vd, &wd), ("j", &wd, &vd)] {
        if let Some(vals) = per_vertex(&ctx, &g, obj, key)? {
            for (a, x) in vals.iter().enumerate() {
                let mat = ctx.matrix(&format!("{key}.{}", g.vertex_name(a)), x, rows[a], cols[a])?;
                if key == "i" {
                    p.i[a] = mat;
                } else {
                    p.j[a] = mat;
                }
            }
        }
    }
    let zeta_c = per_vertex(&ctx, &g, obj, "zeta_c")?
        .map(|vals| {
            vals.iter().enumerate().map(|(a, x)| ctx.scalar(&format!("zeta_c.{}", g.vertex_name(a)), x)).collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let zeta_r = per_vertex(&ctx, &g, obj, "zeta_r")?
        .map(|vals| {
            vals.iter()
                .enumerate()
                .map(|(a, x)| {
                    let path = format!("zeta_r.{}", g.vertex_name(a));
                    let s = ctx.scalar(&path, x)?;
                    s.as_constant()
                        .and_then(|c| c.as_rational().cloned())
                        .ok_or_else(|| ctx.field(&path, "real parameter must be rational"))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok(PointFile { point: p, zeta_c, zeta_r })
}

pub fn read_point(path: &Path) -> Result<PointFile, IoError> {
    parse_point(&path.display().to_string(), &read(path)?, path.parent())
}

pub fn matrix_to_value(x: &FMatrix) -> Value {
    Value::Array((0..x.rows()).map(|r| Value::Array(x.row(r).iter().map(|e| Value::String(e.to_string())).collect())).collect())
}

/// Canonical JSON for a point with the quiver inlined.
pub fn point_to_value(pf: &PointFile) -> Value {
    let p = &pf.point;
    let g = &p.graph;
    let by_vertex = |f: &dyn Fn(usize) -> Value| -> Value {
        Value::Object((0..g.num_vertices()).map(|a| (g.vertex_name(a).to_string(), f(a))).collect())
    };
    let mut obj = Map::new();
    obj.insert("quiver".into(), quiver_to_value(g));
    obj.insert("conductor".into(), json!(p.m));
    obj.insert("v".into(), by_vertex(&|a| json!(p.v[a])));
    obj.insert("w".into(), by_vertex(&|a| json!(p.w[a])));
    if let Some(z) = &pf.zeta_c {
        obj.insert("zeta_c".into(), by_vertex(&|a| json!(z[a].to_string())));
    }
    if let Some(z) = &pf.zeta_r {
        obj.insert("zeta_r".into(), by_vertex(&|a| json!(z[a].to_string())));
    }
    obj.insert(
        "B".into(),
        Value::Object(g.half_edges().map(|h| (g.half_edge_id(h), matrix_to_value(&p.b[h]))).collect()),
    );
    obj.insert("i".into(), by_vertex(&|a| matrix_to_value(&p.i[a])));
    obj.insert("j".into(), by_vertex(&|a| matrix_to_value(&p.j[a])));
    Value::Object(obj)
}

pub fn write_point(pf: &PointFile) -> String {
    pretty(&point_to_value(pf))
}

/// Indented JSON with arrays of scalars and matrices kept on one line.
pub fn pretty(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn flat(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(a) => a.iter().all(flat),
        _ => true,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Object(o) if !o.is_empty() => {
            out.push_str("{\n");
            for (k, (key, x)) in o.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if k + 1 < o.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        Value::Array(a) if !flat(v) => {
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad);
                write_value(x, indent + 1, out);
                out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duplex::{check_complex_moment, Convention};
    use crate::harness::{builtin_graph, generic_params, item_rng, random_solution, BUILTIN_GRAPHS};
    use proptest::prelude::*;

    const A2: &str = r#"{"vertices": ["1", "2"], "edges": [["1", "2"]]}"#;

    #[test]
    fn quiver_round_trip() {
        for name in BUILTIN_GRAPHS {
            let g = builtin_graph(name).unwrap();
            assert_eq!(parse_quiver("q", &write_quiver(&g)).unwrap(), g, "{name}");
        }
        let g = parse_quiver("a2", A2).unwrap();
        assert_eq!(g, builtin_graph("A2").unwrap());
    }

    #[test]
    fn point_from_text() {
        let text = r#"{"quiver": {"vertices": ["1", "2"], "edges": [["1", "2"]]},
            "v": {"1": 1, "2": 1}, "w": {"1": 1, "2": 0},
            "zeta_c": {"1": "t", "2": "t^2"},
            "B": {"0+": [["1"]], "0-": [["0"]]},
            "i": {"1": [["1"]], "2": [[]]}, "j": {"1": [["-t"]], "2": []}}"#;
        let pf = parse_point("p", text, None).unwrap();
        assert_eq!(pf.point.v, vec![1, 1]);
        let c = pf.zeta_c.clone().unwrap();
        let res = check_complex_moment(&pf.point, &c, Convention::Centerm);
        assert!(!res[0].is_zero());
        assert_eq!(parse_point("p", &write_point(&pf), None).unwrap(), pf);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_quiver("q", "{\"vertices\": [\"1\",\n ]}").unwrap_err();
        assert!(matches!(e, IoError::Json { line: 2, .. }), "{e}");
        let text = r#"{"quiver": {"vertices": ["1"]}, "v": {"1": 1}, "w": {"1": 1},
            "i": {"1": [["2*/t"]]}, "j": {"1": [["0"]]}}"#;
        let e = parse_point("p", text, None).unwrap_err();
        match e {
            IoError::Scalar { path, pos, .. } => {
                assert_eq!(path, "i.1[0][0]");
                assert_eq!(pos, 2);
            }
            other => panic!("{other}"),
        }
        let bad = r#"{"quiver": {"vertices": ["1"]}, "v": {"1": 2}, "i": {"1": [["1"]]}}"#;
        assert!(matches!(parse_point("p", bad, None), Err(IoError::Field { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn point_round_trip(seed in 0u64..1000, gi in 0usize..BUILTIN_GRAPHS.len()) {
            let g = builtin_graph(BUILTIN_GRAPHS[gi]).unwrap();
            let mut rng = item_rng(seed, "io");
            let c = generic_params(g.num_vertices(), 4, &mut rng);
            let p = random_solution(&g, 4, &c, 2, Convention::Centerm, &mut rng);
            let pf = PointFile { point: p, zeta_c: Some(c), zeta_r: None };
            let back = parse_point("p", &write_point(&pf), None).unwrap();
            prop_assert_eq!(back, pf);
        }
    }
}
