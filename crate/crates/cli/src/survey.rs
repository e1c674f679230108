//! Batch tables over standard families: Δ_can against the closed form and
//! against the correction term.

use std::collections::BTreeMap;

use num::Integer;
use rayon::prelude::*;
use serde_json::{json, Value};

use plumbing_core::correction::d_invariant;
use plumbing_core::invariants::{gamma, order_h};
use plumbing_core::rational::{rat, ri};
use plumbing_core::spinc::canonical_spinc;
use plumbing_core::zhat::{DeltaValue, ZhatContext};

use crate::app::r;
use crate::error::CliError;
use crate::spec::parse_spec;

pub const FAMILIES: [&str; 4] = ["brieskorn-pq1", "brieskorn-pp1", "brieskorn-23r", "lens"];

/// `p=2..4,q=3` into sorted inclusive value lists.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, Vec<i64>>, CliError> {
    let bad = |m: String| CliError::Usage(format!("--params: {m}"));
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, range) = part.split_once('=').ok_or_else(|| bad(format!("expected name=range in {part:?}")))?;
        let num = |s: &str| s.trim().parse::<i64>().map_err(|_| bad(format!("{s:?} is not an integer")));
        let (lo, hi) = match range.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
            None => {
                let v = num(range)?;
                (v, v)
            }
        };
        if lo > hi || hi - lo > 10_000 {
            return Err(bad(format!("empty or oversized range {range:?}")));
        }
        out.insert(name.trim().to_string(), (lo..=hi).collect());
    }
    Ok(out)
}

fn manifolds(family: &str, params: &BTreeMap<String, Vec<i64>>) -> Result<Vec<String>, CliError> {
    let get = |k: &str| {
        params
            .get(k)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("family {family} needs parameter {k}")))
    };
    let mut out = Vec::new();
    match family {
        "brieskorn-pq1" => {
            for p in get("p")? {
                for q in get("q")? {
                    if p >= 2 && q > p && p.gcd(&q) == 1 {
                        out.push(format!("brieskorn({p},{q},{})", p * q + 1));
                    }
                }
            }
        }
        "brieskorn-pp1" => {
            for p in get("p")?.into_iter().filter(|&p| p >= 2) {
                out.push(format!("brieskorn({p},{},{})", p + 1, p * (p + 1) - 1));
            }
        }
        "brieskorn-23r" => {
            for r in get("r")?.into_iter().filter(|&r| r >= 1) {
                out.push(format!("brieskorn(2,3,{})", 6 * r - 1));
            }
        }
        "lens" => {
            for p in get("p")?.into_iter().filter(|&p| p >= 2) {
                for r in (1..p).filter(|r| r.gcd(&p) == 1) {
                    out.push(format!("lens({p},{r})"));
                }
            }
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown family {family:?}; expected one of {}",
                FAMILIES.join(", ")
            )))
        }
    }
    Ok(out)
}

fn row(spec: &str) -> Result<Value, CliError> {
    let g = parse_spec(spec)?;
    let ctx = ZhatContext::new(&g)?;
    let can = canonical_spinc(&g);
    let gm = gamma(&g)?;
    let closed = -&gm / ri(4) + rat(1, 2);
    let delta = ctx.delta(&can, &ctx.default_cap()?)?;
    let d = d_invariant(&g, &can)?;
    let (delta_v, residual, gap) = match &delta.value {
        DeltaValue::Finite(x) => (r(x), r(&(x - &closed)), r(&(x - &d.value))),
        DeltaValue::Infinite(_) => (Value::Null, Value::Null, Value::Null),
    };
    Ok(json!({
        "manifold": spec,
        "s": g.s(),
        "order_h": order_h(&g).to_string(),
        "gamma": r(&gm),
        "delta_can": delta_v,
        "closed_form": r(&closed),
        "residual": residual,
        "d_can": r(&d.value),
        "delta_minus_d": gap,
    }))
}

pub fn run(family: &str, params: &str) -> Result<Value, CliError> {
    let list = manifolds(family, &parse_params(params)?)?;
    let rows = list.par_iter().map(|m| row(m)).collect::<Result<Vec<_>, _>>()?;
    Ok(json!({ "family": family, "rows": rows }))
}
