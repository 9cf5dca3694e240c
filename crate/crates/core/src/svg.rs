//! SVG rendering of planar scenes and trajectories.

use std::fmt::Write as _;

use crate::flow::Trajectory;
use crate::geometry::Scene;

const OUTLINE_SAMPLES: usize = 720;

/// Scene outline, the reference circle and the straight pieces of each
/// trajectory. `comment` is embedded verbatim at the top of the document.
pub fn render(scene: &Scene, trajectories: &[Trajectory], comment: &str) -> String {
    let a = scene.ball_radius();
    let pad = 0.05 * a;
    let stroke = a / 400.0;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, "<!-- {} -->", comment.replace("--", "- -"));
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="800">"#,
        -a - pad,
        -a - pad,
        2.0 * (a + pad),
        2.0 * (a + pad)
    );
    // flip y so that the picture uses the scene's orientation
    let _ = writeln!(out, r#"<g transform="scale(1,-1)" fill="none" stroke-width="{stroke}">"#);
    let _ = writeln!(out, r#"<circle cx="0" cy="0" r="{a}" stroke="gray" stroke-dasharray="{} {}"/>"#, 4.0 * stroke, 4.0 * stroke);
    for (i, o) in scene.obstacles().iter().enumerate() {
        let pts = o.boundary_samples(OUTLINE_SAMPLES);
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if k == 0 { "M" } else { "L" }, p.x, p.y);
        }
        d.push('Z');
        let _ = writeln!(out, r#"<path id="obstacle-{i}" d="{d}" stroke="black" fill="lightgray"/>"#);
    }
    for (i, traj) in trajectories.iter().enumerate() {
        let pts = traj.polyline();
        for (k, w) in pts.windows(2).enumerate() {
            let _ = writeln!(
                out,
                r#"<polyline id="ray-{i}-{k}" points="{},{} {},{}" stroke="firebrick"/>"#,
                w[0].x, w[0].y, w[1].x, w[1].y
            );
        }
        for e in &traj.events {
            let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="navy" stroke="none"/>"#, e.x.x, e.x.y, 3.0 * stroke);
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
