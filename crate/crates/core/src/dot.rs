//! Bundle diagrams in Graphviz DOT.
//!
//! The base graph has one vertex per measurement and an edge per
//! two-element context. Above each measurement sits its fibre, one vertex
//! `m:o` per outcome, and a fibre edge joins `a:x` to `b:y` exactly when
//! `(x, y)` is supported at the context `{a, b}`. Larger contexts have no
//! edges of their own; they are listed as comments.

use std::fmt::Write;

use crate::model::EmpiricalModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn export_bundle_dot(model: &EmpiricalModel) -> String {
    let scn = model.scenario();
    let k = scn.outcome_count();
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "graph bundle {{").unwrap();
    writeln!(w, "  node [shape=circle];").unwrap();
    writeln!(w, "  subgraph cluster_base {{").unwrap();
    writeln!(w, "    label=\"base\";").unwrap();
    for m in scn.measurements() {
        writeln!(w, "    {};", quote(m)).unwrap();
    }
    for ctx in scn.cover().iter().filter(|c| c.len() == 2) {
        writeln!(w, "    {} -- {};", quote(scn.measurement(ctx[0])), quote(scn.measurement(ctx[1]))).unwrap();
    }
    writeln!(w, "  }}").unwrap();
    writeln!(w, "  subgraph cluster_fibres {{").unwrap();
    writeln!(w, "    label=\"fibres\";").unwrap();
    for m in scn.measurements() {
        let vertices: Vec<String> = (0..k)
            .map(|o| quote(&format!("{m}:{}", scn.outcomes().label(o))))
            .collect();
        writeln!(w, "    {{ rank=same; {}; }}", vertices.join("; ")).unwrap();
    }
    writeln!(w, "  }}").unwrap();
    for (ci, ctx) in scn.cover().iter().enumerate() {
        if ctx.len() != 2 {
            writeln!(
                w,
                "  // context {} of size {} has {} supported sections (not drawn)",
                scn.format_context(ctx),
                ctx.len(),
                model.support(ci).len()
            )
            .unwrap();
            continue;
        }
        for s in model.support(ci) {
            let ends: Vec<String> = s
                .domain()
                .iter()
                .zip(s.values())
                .map(|(&m, &v)| quote(&format!("{}:{}", scn.measurement(m), scn.outcomes().label(v))))
                .collect();
            writeln!(w, "  {} -- {};", ends[0], ends[1]).unwrap();
        }
    }
    writeln!(w, "}}").unwrap();
    out
}

/// Number of fibre edges drawn.
pub fn fibre_edge_count(model: &EmpiricalModel) -> usize {
    let scn = model.scenario();
    scn.cover()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() == 2)
        .map(|(ci, _)| model.support(ci).len())
        .sum()
}
