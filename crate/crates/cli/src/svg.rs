//! Deterministic SVG output for wall structures and mapped trees.
//!
//! The picture lives in the compactified skeleton: the boundary polygon is
//! the level set `norm = clip` of the fan, whose corners are `clip * u_i`.

use std::fmt::Write as _;

use tropcyl_core::tropical::{LegKind, VertexPos};
use tropcyl_core::{LatticeVector, MappedTree, ToricModel, WallStructure};

use crate::config::RenderConfig;

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame<'a> {
    cfg: &'a RenderConfig,
    polygon: Vec<(f64, f64)>,
}

impl<'a> Frame<'a> {
    fn new(model: &ToricModel, cfg: &'a RenderConfig) -> Self {
        let polygon = model
            .fan()
            .rays()
            .iter()
            .map(|u| (cfg.clip * u.x as f64, cfg.clip * u.y as f64))
            .collect();
        Self { cfg, polygon }
    }

    fn px(&self, (x, y): (f64, f64)) -> (String, String) {
        let cx = self.cfg.width as f64 / 2.0;
        let cy = self.cfg.height as f64 / 2.0;
        (num(cx + self.cfg.scale * x), num(cy - self.cfg.scale * y))
    }

    /// Largest `s > 0` with `p + s w` on the boundary polygon.
    fn exit(&self, p: (f64, f64), w: (f64, f64)) -> (f64, f64) {
        let n = self.polygon.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            let e = (b.0 - a.0, b.1 - a.1);
            let den = w.0 * e.1 - w.1 * e.0;
            if den.abs() < 1e-12 {
                continue;
            }
            let d = (a.0 - p.0, a.1 - p.1);
            let s = (d.0 * e.1 - d.1 * e.0) / den;
            let lambda = (d.0 * w.1 - d.1 * w.0) / den;
            if s > 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&lambda) && best.is_none_or(|b| s > b) {
                best = Some(s);
            }
        }
        let s = best.unwrap_or(self.cfg.clip);
        (p.0 + s * w.0, p.1 + s * w.1)
    }
}

fn header(out: &mut String, cfg: &RenderConfig) {
    let p = &cfg.palette;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = cfg.width,
        h = cfg.height
    );
    let _ = writeln!(
        out,
        "<style>\
.boundary{{fill:none;stroke:{b};stroke-width:1.5}} \
.wall{{stroke:{wall};stroke-width:1}} \
.initial{{stroke:{iw};stroke-width:3}} \
.spine{{fill:none;stroke:{spine};stroke-width:2.5}} \
.twig{{fill:none;stroke:{twig};stroke-width:2.5}} \
.mark{{fill:{mark}}} \
text{{font-family:monospace;font-size:11px;fill:{text}}}\
</style>",
        b = p.boundary,
        wall = p.wall,
        iw = p.initial_wall,
        spine = p.spine,
        twig = p.twig,
        mark = p.marked,
        text = p.text,
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="{}"/>"#,
        cfg.width, cfg.height, p.background
    );
}

fn boundary(out: &mut String, frame: &Frame) {
    let points: Vec<String> = frame
        .polygon
        .iter()
        .map(|&q| {
            let (x, y) = frame.px(q);
            format!("{x},{y}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polygon class="boundary" points="{}"/>"#,
        points.join(" ")
    );
}

fn walls_layer(out: &mut String, frame: &Frame, model: &ToricModel, walls: &WallStructure) {
    let (ox, oy) = frame.px((0.0, 0.0));
    for wall in walls.walls(model) {
        let d = wall.direction;
        let s = frame.cfg.clip / wall.norm as f64;
        let end = (s * d.x as f64, s * d.y as f64);
        let (x, y) = frame.px(end);
        let class = if wall.step == 0 {
            "wall initial"
        } else {
            "wall"
        };
        let _ = writeln!(
            out,
            r#"<line class="{class}" x1="{ox}" y1="{oy}" x2="{x}" y2="{y}" data-direction="{d}"/>"#
        );
        let (lx, ly) = frame.px((end.0 * 1.06, end.1 * 1.06));
        let _ = writeln!(
            out,
            r#"<text x="{lx}" y="{ly}" text-anchor="middle">{}</text>"#,
            wall.step
        );
    }
}

/// The wall structure alone, in the style of a wall diagram.
pub fn render_walls(model: &ToricModel, walls: &WallStructure, cfg: &RenderConfig) -> String {
    let frame = Frame::new(model, cfg);
    let mut out = String::new();
    header(&mut out, cfg);
    boundary(&mut out, &frame);
    walls_layer(&mut out, &frame, model, walls);
    out.push_str("</svg>\n");
    out
}

fn vf(v: LatticeVector) -> (f64, f64) {
    (v.x as f64, v.y as f64)
}

/// A mapped tree over the wall structure: spine edges in one path, twig
/// edges in another, degree labels on infinite edges, marked points as dots.
pub fn render_tree(
    model: &ToricModel,
    walls: &WallStructure,
    tree: &MappedTree,
    cfg: &RenderConfig,
) -> String {
    let frame = Frame::new(model, cfg);
    let mut out = String::new();
    header(&mut out, cfg);
    boundary(&mut out, &frame);
    walls_layer(&mut out, &frame, model, walls);

    let hull = tree.hull_edges();
    let mut spine_d = String::new();
    let mut twig_d = String::new();
    let mut labels = Vec::new();
    let mut ends: Vec<Option<(f64, f64)>> = vec![None; tree.vertices().len()];
    for (v, pos) in tree.vertices().iter().enumerate() {
        if let VertexPos::Finite(p) = pos {
            ends[v] = Some(p.to_f64());
        }
    }
    for (i, e) in tree.edges().iter().enumerate() {
        let a = ends[e.tail].expect("tails are finite");
        let b = match ends[e.head] {
            Some(b) => b,
            None => {
                let b = frame.exit(a, vf(e.weight));
                ends[e.head] = Some(b);
                labels.push((b, e.weight.index()));
                b
            }
        };
        let (x1, y1) = frame.px(a);
        let (x2, y2) = frame.px(b);
        let target = if hull.contains(&i) {
            &mut spine_d
        } else {
            &mut twig_d
        };
        let _ = write!(target, "M{x1} {y1} L{x2} {y2} ");
    }
    for (class, d) in [("spine", spine_d), ("twig", twig_d)] {
        if !d.is_empty() {
            let _ = writeln!(out, r#"<path class="{class}" d="{}"/>"#, d.trim_end());
        }
    }
    for (at, degree) in labels {
        let (x, y) = frame.px((at.0 * 1.04, at.1 * 1.04));
        let _ = writeln!(
            out,
            r#"<text class="degree" x="{x}" y="{y}" text-anchor="middle">{degree}</text>"#
        );
    }
    for leg in tree.legs() {
        if leg.kind == LegKind::Boundary {
            continue;
        }
        let Some(p) = ends[leg.vertex] else { continue };
        let (x, y) = frame.px(p);
        let _ = writeln!(out, r#"<circle class="mark" cx="{x}" cy="{y}" r="3"/>"#);
        let (lx, ly) = frame.px((p.0 + 0.15, p.1 + 0.15));
        let _ = writeln!(
            out,
            r#"<text x="{lx}" y="{ly}">{}</text>"#,
            escape(&leg.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use tropcyl_core::fixtures::{cubic, projective_plane};

    #[test]
    fn numbers_have_six_places_and_no_negative_zero() {
        assert_eq!(num(-0.0000001), "0.000000");
        assert_eq!(num(1.0 / 3.0), "0.333333");
        assert_eq!(num(-2.5), "-2.500000");
    }

    #[test]
    fn rays_exit_through_the_boundary_polygon() {
        let model = cubic();
        let cfg = RenderConfig::default();
        let frame = Frame::new(&model, &cfg);
        let (x, y) = frame.exit((0.0, 0.0), (1.0, 0.0));
        assert!((x - cfg.clip).abs() < 1e-9 && y.abs() < 1e-9);
        let (x, y) = frame.exit((1.0, 1.0), (0.0, 1.0));
        assert!((x + y - cfg.clip).abs() < 1e-9);
    }

    #[test]
    fn toric_models_draw_no_walls() {
        let model = projective_plane(&[0, 0, 0]).unwrap();
        let walls = tropcyl_core::generate_walls(&model, 2, 10);
        let svg = render_walls(&model, &walls, &RenderConfig::default());
        assert!(svg.contains("<polygon class=\"boundary\""));
        assert!(!svg.contains("<line"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
