//! Small deterministic SVG writers. Output depends only on the inputs, so
//! files can be compared byte for byte across runs.

use std::fmt::Write;

use besicovitch::geometry::Segment;
use besicovitch::pattern::SquareAddress;

const HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8"?>"#;
const PX: u32 = 512;

fn open(out: &mut String, view: &str) {
    writeln!(out, "{HEADER}").unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PX}" height="{PX}" viewBox="{view}">"#
    )
    .unwrap();
}

/// Exactly one `rect` per square (the frame is a `path`). The view box is `m^n` cells wide, so every
/// coordinate is an integer and `y` is flipped to point up.
pub fn squares(squares: &[SquareAddress], base: u32, level: u32) -> String {
    let cells = (base as u64).pow(level);
    let mut out = String::with_capacity(64 * squares.len() + 256);
    open(&mut out, &format!("0 0 {cells} {cells}"));
    writeln!(
        out,
        r#"<path d="M0 0H{cells}V{cells}H0Z" fill="none" stroke="gray" stroke-width="{}"/>"#,
        cells as f64 / PX as f64
    )
    .unwrap();
    writeln!(out, r#"<g fill="black">"#).unwrap();
    for sq in squares {
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="1" height="1"/>"#,
            sq.x_index(),
            cells - 1 - sq.y_index()
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Map from the unit square (y up) to pixel coordinates with a margin.
fn px(x: f64, y: f64) -> (f64, f64) {
    let margin = 16.0;
    let span = PX as f64 - 2.0 * margin;
    (margin + x * span, PX as f64 - margin - y * span)
}

/// Scatter of `(t, g(t))` with hollow markers at the one-sided limits
/// wherever they differ from the value.
pub fn step_plot(rows: &[(f64, f64, Option<f64>, Option<f64>)]) -> String {
    let mut out = String::new();
    open(&mut out, &format!("0 0 {PX} {PX}"));
    let (x0, y0) = px(0.0, 0.0);
    let (x1, y1) = px(1.0, 1.0);
    writeln!(
        out,
        r#"<rect x="{x0:.3}" y="{y1:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="gray"/>"#,
        x1 - x0,
        y0 - y1
    )
    .unwrap();
    for &(t, g, left, right) in rows {
        let (cx, cy) = px(t, g);
        writeln!(
            out,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="1.5" fill="black"/>"#
        )
        .unwrap();
        for limit in [left, right].into_iter().flatten() {
            if limit != g {
                let (lx, ly) = px(t, limit);
                writeln!(
                    out,
                    r#"<line x1="{cx:.3}" y1="{cy:.3}" x2="{lx:.3}" y2="{ly:.3}" stroke="lightgray"/>"#
                )
                .unwrap();
                writeln!(
                    out,
                    r#"<circle class="jump" cx="{lx:.3}" cy="{ly:.3}" r="2" fill="white" stroke="red"/>"#
                )
                .unwrap();
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Segments drawn in the window `[0, 1] x [0, 2]`.
pub fn segments(segments: &[Segment]) -> String {
    let mut out = String::new();
    open(&mut out, "-0.05 -2.05 1.1 2.1");
    writeln!(
        out,
        r#"<g stroke="black" stroke-width="0.002" transform="scale(1,-1)">"#
    )
    .unwrap();
    for s in segments {
        writeln!(
            out,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            s.p0[0], s.p0[1], s.p1[0], s.p1[1]
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use besicovitch::Pattern;

    #[test]
    fn one_rect_per_square() {
        let p = Pattern::standard();
        for n in 0..=3 {
            let sq = p.squares(n).unwrap();
            let svg = squares(&sq, 4, n);
            assert_eq!(svg.matches("<rect").count(), 4usize.pow(n));
            assert!(svg.ends_with("</svg>\n"));
        }
        let svg = squares(&p.squares(1).unwrap(), 4, 1);
        // bottom row, column 1 sits at the last pixel row
        assert!(svg.contains(r#"<rect x="1" y="3" width="1" height="1"/>"#));
    }

    #[test]
    fn jump_markers_only_where_limits_differ() {
        let svg = step_plot(&[
            (0.0, 0.5, None, Some(0.5)),
            (0.5, 0.1, Some(0.9), Some(0.1)),
        ]);
        assert_eq!(svg.matches(r#"class="jump""#).count(), 1);
        assert_eq!(
            svg,
            step_plot(&[
                (0.0, 0.5, None, Some(0.5)),
                (0.5, 0.1, Some(0.9), Some(0.1))
            ])
        );
    }
}
