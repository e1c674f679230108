use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use plumbing_core::calculus::normalize;
use plumbing_core::correction::d_invariant;
use plumbing_core::graph::PlumbingGraph;
use plumbing_core::invariants::{det, gamma, is_negative_definite, is_weakly_negative_definite, order_h};
use plumbing_core::rational::{fmt_rat, parse_rat, Rat};
use plumbing_core::spinc::{canonical_spinc, canonical_vector, class_of, conjugate, enumerate_spinc, SpincClass};
use plumbing_core::splice::{h_shape_minimize, splice_diagram, HShape};
use plumbing_core::zhat::{conjecture_report, DeltaResult, DeltaValue, ZhatContext};

use crate::error::CliError;
use crate::spec::{parse_spec, GraphJson};
use crate::survey;

#[derive(Parser, Debug)]
#[command(name = "plumb", version, about = "Exact invariants of negative definite plumbed 3-manifolds")]
struct Cli {
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Graph JSON, a constructor such as `seifert(2; 3/1, 3/2, 3/2)`, a file
    /// containing either, or `-` for standard input.
    spec: String,
}

#[derive(Args, Debug)]
struct SpincArg {
    /// `canonical`, `all`, or a representative `b` in input vertex order,
    /// e.g. `1,1,0,-1`.
    #[arg(long, default_value = "canonical", allow_hyphen_values = true)]
    spinc: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Definiteness, weak definiteness, det M and |H|.
    Check(Input),
    /// γ, s, Tr M and the degree vector.
    Invariants(Input),
    /// All spin^c structures.
    Spinc(Input),
    /// Truncated Ẑ series.
    Zhat {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        spinc: SpincArg,
        /// Largest exponent to include (default: smallest exponent over the support + 10).
        #[arg(long, allow_hyphen_values = true)]
        level: Option<String>,
    },
    /// Minimal exponent Δ of Ẑ.
    Delta {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        spinc: SpincArg,
        /// Largest norm -l^2 searched before reporting no surviving shell.
        #[arg(long)]
        cap: Option<String>,
    },
    /// Correction term d.
    Dinv {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        spinc: SpincArg,
    },
    /// Splice diagram with edge weights.
    Splice(Input),
    /// Rounding estimate for the minimum of -l^2 on an H-shaped graph.
    HshapeMin(Input),
    /// Reduce a weakly negative definite graph to a negative definite one.
    Normalize {
        #[command(flatten)]
        input: Input,
        /// Write the move certificate to this file.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Compare min_b Δ_b with -γ/4 + 1/2.
    Conjecture {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        cap: Option<String>,
    },
    /// Batch table over a family of manifolds.
    Survey {
        /// brieskorn-pq1, brieskorn-pp1, brieskorn-23r or lens.
        #[arg(long)]
        family: String,
        /// Ranges such as `p=2..4,q=3..7`.
        #[arg(long)]
        params: String,
    },
}

/// Runs one command; output JSON goes to `out`, errors as JSON to `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", CliError::Usage(e.to_string().trim_end().to_string()).to_json());
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "{}", CliError::Usage(e.to_string()).to_json());
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(v) => {
            let _ = writeln!(out, "{v}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<Value, CliError> {
    match cmd {
        Command::Check(i) => check(&load(&i)?),
        Command::Invariants(i) => invariants(&load(&i)?),
        Command::Spinc(i) => spinc(&load(&i)?),
        Command::Zhat { input, spinc, level } => zhat(&load(&input)?, &spinc.spinc, level.as_deref()),
        Command::Delta { input, spinc, cap } => delta(&load(&input)?, &spinc.spinc, cap.as_deref()),
        Command::Dinv { input, spinc } => dinv(&load(&input)?, &spinc.spinc),
        Command::Splice(i) => splice(&load(&i)?),
        Command::HshapeMin(i) => hshape(&load(&i)?),
        Command::Normalize { input, output } => normalize_cmd(&load(&input)?, output),
        Command::Conjecture { input, cap } => conjecture(&load(&input)?, cap.as_deref()),
        Command::Survey { family, params } => survey::run(&family, &params),
    }
}

fn load(i: &Input) -> Result<PlumbingGraph, CliError> {
    let text = if i.spec == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(e.to_string()))?;
        s
    } else if std::path::Path::new(&i.spec).is_file() {
        std::fs::read_to_string(&i.spec).map_err(|e| CliError::Io(format!("{}: {e}", i.spec)))?
    } else {
        i.spec.clone()
    };
    parse_spec(&text)
}

pub(crate) fn r(x: &Rat) -> Value {
    Value::String(fmt_rat(x))
}

fn parse_rational(flag: &str, s: &str) -> Result<Rat, CliError> {
    parse_rat(s).ok_or_else(|| CliError::Usage(format!("--{flag}: {s:?} is not a rational number")))
}

/// Internal vertex order to input order.
fn to_input<T: Clone + Default>(g: &PlumbingGraph, v: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); v.len()];
    for (k, &i) in g.input_positions().iter().enumerate() {
        out[i] = v[k].clone();
    }
    out
}

fn from_input(g: &PlumbingGraph, v: &[i64]) -> Vec<i64> {
    g.input_positions().iter().map(|&i| v[i]).collect()
}

fn ids(g: &PlumbingGraph, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| g.id(v).to_string()).collect()
}

/// Representative in input order; the canonical class prints as `2u - δ`.
fn rep(g: &PlumbingGraph, c: &SpincClass) -> Value {
    if *c == canonical_spinc(g) {
        return json!(to_input(g, &canonical_vector(g)));
    }
    json!(to_input(g, c.representative()))
}

fn select_classes(g: &PlumbingGraph, sel: &str) -> Result<Vec<SpincClass>, CliError> {
    match sel.trim() {
        "canonical" | "can" => Ok(vec![canonical_spinc(g)]),
        "all" => Ok(enumerate_spinc(g)?),
        v => {
            let body = v.trim_start_matches('[').trim_end_matches(']');
            let b: Vec<i64> = body
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("--spinc: cannot read {v:?} as canonical, all or a vector")))?;
            if b.len() != g.s() {
                return Err(CliError::Validation(format!(
                    "--spinc vector has {} entries, the graph has {} vertices",
                    b.len(),
                    g.s()
                )));
            }
            Ok(vec![class_of(g, &from_input(g, &b))?])
        }
    }
}

fn check(g: &PlumbingGraph) -> Result<Value, CliError> {
    let d = det(g);
    let weak = if d == 0.into() { Value::Null } else { json!(is_weakly_negative_definite(g)?) };
    Ok(json!({
        "negative_definite": is_negative_definite(g),
        "weakly_negative_definite": weak,
        "det": d.to_string(),
        "order_h": order_h(g).to_string(),
    }))
}

fn invariants(g: &PlumbingGraph) -> Result<Value, CliError> {
    let nd = is_negative_definite(g);
    let gamma = if nd { r(&gamma(g)?) } else { Value::Null };
    Ok(json!({
        "s": g.s(),
        "trace": g.trace(),
        "degrees": to_input(g, &g.degrees()),
        "det": det(g).to_string(),
        "order_h": order_h(g).to_string(),
        "negative_definite": nd,
        "gamma": gamma,
    }))
}

fn spinc(g: &PlumbingGraph) -> Result<Value, CliError> {
    let classes = enumerate_spinc(g)?;
    let can = canonical_spinc(g);
    let list: Vec<Value> = classes
        .iter()
        .map(|c| {
            let conj = conjugate(g, c);
            json!({
                "representative": rep(g, c),
                "canonical": *c == can,
                "self_conjugate": conj == *c,
            })
        })
        .collect();
    Ok(json!({ "order_h": order_h(g).to_string(), "classes": list }))
}

fn zhat(g: &PlumbingGraph, sel: &str, level: Option<&str>) -> Result<Value, CliError> {
    let ctx = ZhatContext::new(g)?;
    let level = match level {
        Some(s) => parse_rational("level", s)?,
        None => ctx.exponent(&ctx.min_support_norm()?) + Rat::from_integer(10.into()),
    };
    let classes = select_classes(g, sel)?;
    let one = |c: &SpincClass| -> Result<Value, CliError> {
        let s = ctx.series(c, &level)?;
        let terms: Vec<Value> = s.terms.iter().map(|(e, k)| json!({ "exponent": r(e), "coefficient": r(k) })).collect();
        Ok(json!({ "spinc": rep(g, c), "level": r(&level), "terms": terms }))
    };
    if sel.trim() == "all" {
        let results = classes.iter().map(one).collect::<Result<Vec<_>, _>>()?;
        Ok(json!({ "level": r(&level), "results": results }))
    } else {
        one(&classes[0])
    }
}

fn delta_json(g: &PlumbingGraph, ctx: &ZhatContext, c: &SpincClass, d: &DeltaResult) -> Value {
    let (value, cap) = match &d.value {
        DeltaValue::Finite(x) => (r(x), Value::Null),
        DeltaValue::Infinite(cap) => (Value::Null, r(cap)),
    };
    let vectors: Vec<Value> = d.minimizing_vectors.iter().map(|v| json!(to_input(g, v))).collect();
    let cancelled: Vec<Value> = d
        .cancelled_shells
        .iter()
        .map(|s| json!({ "norm": r(&s.norm), "exponent": r(&ctx.exponent(&s.norm)), "vectors": s.vectors.len() }))
        .collect();
    json!({
        "delta": value,
        "spinc": rep(g, c),
        "coefficient": r(&d.coefficient),
        "minimizing_vectors": vectors,
        "cancelled_shells": cancelled,
        "no_surviving_shell_up_to_norm": cap,
    })
}

fn delta(g: &PlumbingGraph, sel: &str, cap: Option<&str>) -> Result<Value, CliError> {
    let ctx = ZhatContext::new(g)?;
    let cap = match cap {
        Some(s) => parse_rational("cap", s)?,
        None => ctx.default_cap()?,
    };
    if sel.trim() == "all" {
        let all = ctx.delta_all(&cap)?;
        let results: Vec<Value> = all.iter().map(|(c, d)| delta_json(g, &ctx, c, d)).collect();
        return Ok(json!({ "cap": r(&cap), "results": results }));
    }
    let c = &select_classes(g, sel)?[0];
    let d = ctx.delta(c, &cap)?;
    let mut v = delta_json(g, &ctx, c, &d);
    v["cap"] = r(&cap);
    Ok(v)
}

fn dinv_json(g: &PlumbingGraph, c: &SpincClass) -> Result<Value, CliError> {
    let d = d_invariant(g, c)?;
    let mut v = json!({ "d": r(&d.value) });
    if d.conjectural {
        v["conjectural"] = json!(true);
    }
    Ok(v)
}

fn dinv(g: &PlumbingGraph, sel: &str) -> Result<Value, CliError> {
    let classes = select_classes(g, sel)?;
    if sel.trim() == "all" {
        let results = classes
            .iter()
            .map(|c| {
                let mut v = dinv_json(g, c)?;
                v["spinc"] = rep(g, c);
                Ok(v)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        return Ok(json!({ "results": results }));
    }
    dinv_json(g, &classes[0])
}

fn splice(g: &PlumbingGraph) -> Result<Value, CliError> {
    let sd = splice_diagram(g)?;
    let edges: Vec<Value> = sd
        .edges
        .iter()
        .map(|e| json!({ "ends": [g.id(e.ends.0), g.id(e.ends.1)], "string": ids(g, &e.string) }))
        .collect();
    let weights: Vec<Value> = sd
        .weights
        .iter()
        .map(|((n, e), w)| json!({ "node": g.id(*n), "toward": g.id(*e), "weight": w.to_string() }))
        .collect();
    Ok(json!({
        "vertices": ids(g, &sd.vertices),
        "edges": edges,
        "weights": weights,
        "det": sd.det.to_string(),
        "degenerate": sd.degenerate,
    }))
}

fn hshape(g: &PlumbingGraph) -> Result<Value, CliError> {
    let h = HShape::from_graph(g)?;
    let m = h_shape_minimize(&h.weights);
    let exact = ZhatContext::new(g)?.min_support_norm()?;
    let w = &h.weights;
    Ok(json!({
        "weights": { "a": w.a, "a_prime": w.a_prime, "det": w.det, "c": r(&w.c) },
        "vertices": ids(g, &h.vertices),
        "minimum": r(&m.minimum),
        "minimizers": m.minimizers,
        "candidates": m.candidates.len(),
        "exact_minimum": r(&exact),
    }))
}

fn normalize_cmd(g: &PlumbingGraph, output: Option<PathBuf>) -> Result<Value, CliError> {
    let (out, trace) = normalize(g)?;
    let cert = trace.certificate();
    if let Some(path) = &output {
        std::fs::write(path, &cert).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(json!({
        "graph": GraphJson::from_graph(&out),
        "moves": trace.len(),
        "certificate": output.map(|p| p.display().to_string()),
        "certificate_lines": cert.lines().collect::<Vec<_>>(),
    }))
}

fn conjecture(g: &PlumbingGraph, cap: Option<&str>) -> Result<Value, CliError> {
    let ctx = ZhatContext::new(g)?;
    let cap = match cap {
        Some(s) => parse_rational("cap", s)?,
        None => ctx.default_cap()?,
    };
    let rep_ = conjecture_report(g, &cap)?;
    let classes: Vec<Value> = rep_.minimizing_classes.iter().map(|c| rep(g, c)).collect();
    Ok(json!({
        "holds": rep_.holds,
        "min_delta": rep_.min_delta.as_ref().map(r),
        "bound": r(&rep_.bound),
        "gamma": r(&rep_.gamma),
        "minimizing_classes": classes,
        "inconclusive": rep_.inconclusive,
        "cap": r(&cap),
    }))
}
