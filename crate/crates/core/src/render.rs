//! Schlegel diagrams as SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::Result;
use crate::pairing::GroupWord;
use crate::polytope::{face_centroid, layout_crossings, schlegel_layout, CombinatorialPolyhedron, Edge};

pub const SIZE: f64 = 1000.0;
const RADIUS: f64 = 440.0;

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// Edge class number per undirected edge.
    pub classes: Option<BTreeMap<Edge, usize>>,
    /// Pairing word per face id, drawn under the id.
    pub face_labels: Option<BTreeMap<String, GroupWord>>,
}

fn xy(p: [f64; 2]) -> (f64, f64) {
    (SIZE / 2.0 + RADIUS * p[0], SIZE / 2.0 - RADIUS * p[1])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Deterministic SVG of the Schlegel diagram with `outer` as the outer face.
pub fn render_svg(p: &CombinatorialPolyhedron, outer: &str, opts: &RenderOptions) -> Result<String> {
    let layout = schlegel_layout(p, outer)?;
    if !layout_crossings(p, &layout).is_empty() {
        return Err(crate::Error::Polyhedron("layout has crossing edges".into()));
    }
    let mut s = String::new();
    let w = |s: &mut String, line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    w(&mut s, r#"<?xml version="1.0" encoding="UTF-8"?>"#.into());
    w(
        &mut s,
        format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        ),
    );
    w(
        &mut s,
        format!("<title>{} (outer face {})</title>", escape(&p.name), escape(outer)),
    );
    w(&mut s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##.into());
    w(
        &mut s,
        r##"<g stroke="#222222" stroke-width="1.5" stroke-linecap="round">"##.into(),
    );
    for (u, v) in p.edges() {
        let (x1, y1) = xy(layout.positions[u]);
        let (x2, y2) = xy(layout.positions[v]);
        w(
            &mut s,
            format!(r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#),
        );
    }
    w(&mut s, "</g>".into());
    w(&mut s, r##"<g fill="#222222">"##.into());
    for pos in &layout.positions {
        let (x, y) = xy(*pos);
        w(&mut s, format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5"/>"#));
    }
    w(&mut s, "</g>".into());
    w(
        &mut s,
        r##"<g font-family="sans-serif" font-size="12" text-anchor="middle" fill="#1f3a93">"##.into(),
    );
    for f in &p.faces {
        let word = opts.face_labels.as_ref().and_then(|l| l.get(&f.id));
        let (x, y) = if f.id == outer {
            (SIZE / 2.0, SIZE - 12.0)
        } else {
            xy(face_centroid(&layout, &f.cycle))
        };
        w(
            &mut s,
            format!(r#"<text x="{x:.2}" y="{y:.2}">{}</text>"#, escape(&f.id)),
        );
        if let Some(word) = word {
            w(
                &mut s,
                format!(
                    r##"<text x="{x:.2}" y="{:.2}" font-size="9" fill="#555555">{}</text>"##,
                    y + 11.0,
                    escape(&word.to_string())
                ),
            );
        }
    }
    w(&mut s, "</g>".into());
    if let Some(classes) = &opts.classes {
        w(
            &mut s,
            r##"<g font-family="sans-serif" font-size="10" text-anchor="middle" fill="#b03a2e">"##.into(),
        );
        for ((u, v), c) in classes {
            let (x1, y1) = xy(layout.positions[*u]);
            let (x2, y2) = xy(layout.positions[*v]);
            let mut t = String::new();
            let _ = write!(
                t,
                r#"<text x="{:.2}" y="{:.2}">{c}</text>"#,
                (x1 + x2) / 2.0,
                (y1 + y2) / 2.0 - 2.0
            );
            w(&mut s, t);
        }
        w(&mut s, "</g>".into());
    }
    w(&mut s, "</svg>".into());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{build_catalog, edge_key};

    #[test]
    fn deterministic_and_labelled() {
        let p = build_catalog("truncated_icosahedron").unwrap();
        let a = render_svg(&p, "h19", &RenderOptions::default()).unwrap();
        let b = render_svg(&p, "h19", &RenderOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<line ").count(), 90);
        assert!(a.contains(r#"viewBox="0 0 1000 1000""#));
        assert!(a.contains(">p0</text>"));
        assert!(render_svg(&p, "zz", &RenderOptions::default()).is_err());
    }

    #[test]
    fn class_overlay() {
        let p = build_catalog("cube").unwrap();
        let classes = p.edges().into_iter().map(|(u, v)| (edge_key(u, v), 7)).collect();
        let svg = render_svg(
            &p,
            "x0",
            &RenderOptions {
                classes: Some(classes),
                face_labels: None,
            },
        )
        .unwrap();
        assert_eq!(svg.matches(">7</text>").count(), 12);
    }
}
