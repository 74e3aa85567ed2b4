//! SVG rendering of a solution over its instance.

use std::fmt::Write;

use crate::geometry::Point2;
use crate::instance::Instance;
use crate::solution::{vertex_sequence, PointAssignment, Solution};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

/// Renders the depot, node disks (dashed, only when the radius is positive),
/// required edges (bold) and one colored polyline per route. Routes follow
/// `points` when given, else node centers.
pub fn plot_solution(solution: &Solution, points: Option<&PointAssignment>, instance: &Instance) -> String {
    let mut lo = instance.depot();
    let mut hi = instance.depot();
    let mut grow = |p: Point2, r: f64| {
        lo = Point2::new(lo.x.min(p.x - r), lo.y.min(p.y - r));
        hi = Point2::new(hi.x.max(p.x + r), hi.y.max(p.y + r));
    };
    for n in instance.nodes() {
        grow(n.center, n.radius);
    }
    for e in instance.edges() {
        grow(e.a, 0.0);
        grow(e.b, 0.0);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |p: Point2| (MARGIN + (p.x - lo.x) * scale, SIZE - MARGIN - (p.y - lo.y) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for n in instance.nodes() {
        let (x, y) = map(n.center);
        if n.radius > 0.0 {
            let _ = writeln!(
                svg,
                r##"<circle class="disk" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="#888" stroke-dasharray="4 3"/>"##,
                n.radius * scale
            );
        }
        let _ = writeln!(svg, r#"<circle class="node" cx="{x:.2}" cy="{y:.2}" r="2.5" fill="black"/>"#);
    }
    for e in instance.edges() {
        let ((x1, y1), (x2, y2)) = (map(e.a), map(e.b));
        let _ = writeln!(
            svg,
            r#"<line class="edge" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="black" stroke-width="3"/>"#
        );
    }

    for (ri, route) in solution.routes.iter().enumerate() {
        let pts: Vec<Point2> = match points.and_then(|p| p.routes.get(ri)) {
            Some(p) => p.clone(),
            None => match vertex_sequence(route, instance) {
                Ok(v) => v.iter().map(|d| d.center).collect(),
                Err(_) => continue,
            },
        };
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="route" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            coords.join(" "),
            PALETTE[ri % PALETTE.len()]
        );
    }

    let (dx, dy) = map(instance.depot());
    let _ = writeln!(
        svg,
        r#"<rect class="depot" x="{:.2}" y="{:.2}" width="10" height="10" fill="black"/>"#,
        dx - 5.0,
        dy - 5.0
    );
    svg.push_str("</svg>\n");
    svg
}
