//! Deterministic SVG scenes.

use std::fmt::Write;

use gibbs_geom_core::config::Configuration;
use gibbs_geom_core::facet::facets_of;

use crate::dto::{CellVerticesDto, DiagramDto};

fn f(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn header(out: &mut String, lo: [f64; 2], hi: [f64; 2]) {
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let stroke = 0.002 * w.max(h);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        f(lo[0]),
        f(-hi[1]),
        f(w),
        f(h),
        (800.0 * h / w).round()
    );
    let _ = writeln!(out, r#"<g transform="scale(1,-1)" fill="none" stroke="black" stroke-width="{}">"#, f(stroke));
}

/// Cells as closed paths, generators as circles of radius equal to the
/// weight, and `dashed` segments drawn dashed on top.
pub fn render_diagram(d: &DiagramDto, dashed: &[[[f64; 2]; 2]]) -> String {
    let (lo, hi) = (d.bbox[0], d.bbox[1]);
    let mut out = String::new();
    header(&mut out, lo, hi);
    for (i, c) in d.cells.iter().enumerate() {
        if let CellVerticesDto::Polygon(vs) = &c.vertices {
            let mut p = String::new();
            for (k, v) in vs.iter().enumerate() {
                let _ = write!(p, "{}{} {} ", if k == 0 { "M" } else { "L" }, f(v[0]), f(v[1]));
            }
            let _ = writeln!(out, r#"<path class="cell" data-index="{i}" d="{p}Z"/>"#);
        }
    }
    for g in &d.generators {
        let _ = writeln!(
            out,
            r#"<circle class="generator" cx="{}" cy="{}" r="{}" stroke="steelblue"/>"#,
            f(g.nucleus[0]),
            f(g.nucleus[1]),
            f(g.weight)
        );
    }
    for s in dashed {
        let _ = writeln!(
            out,
            r#"<line class="added" x1="{}" y1="{}" x2="{}" y2="{}" stroke="firebrick" stroke-dasharray="0.05,0.05"/>"#,
            f(s[0][0]),
            f(s[0][1]),
            f(s[1][0]),
            f(s[1][1])
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Planar facets as segments in the given view box.
pub fn render_facets(gamma: &Configuration, lo: [f64; 2], hi: [f64; 2]) -> anyhow::Result<String> {
    let mut out = String::new();
    header(&mut out, lo, hi);
    for fa in facets_of(gamma)? {
        if fa.dim != 2 {
            anyhow::bail!("only planar facets can be rendered");
        }
        let (a, b) = fa.endpoints();
        let _ = writeln!(
            out,
            r#"<line class="facet" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            f(a[0]),
            f(a[1]),
            f(b[0]),
            f(b[1])
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
