//! Decision-space scatter plot as standalone SVG.

use std::fmt::Write as _;

use crate::selection::{DecisionPoint, Selection};

const WIDTH: f64 = 560.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Compactness on the horizontal axis, separability on the vertical one.
///
/// The view is `[0, 1] x [-1, 1]`, widened to fit any point outside it.
/// Non-dominated points are filled; the selected `k` is drawn as a star.
pub fn decision_svg(points: &[DecisionPoint], selection: &Selection) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, -1.0f64, 1.0f64);
    for p in points {
        x0 = x0.min(p.compactness);
        x1 = x1.max(p.compactness);
        y0 = y0.min(p.separability);
        y1 = y1.max(p.separability);
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    // frame and zero line
    writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    if y0 < 0.0 && y1 > 0.0 {
        writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##,
            sx(x0),
            sy(0.0),
            sx(x1),
            sy(0.0)
        )
        .unwrap();
    }
    for (v, x) in [(x0, sx(x0)), (x1, sx(x1))] {
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v}</text>"#,
            HEIGHT - MARGIN + 18.0
        )
        .unwrap();
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"#,
            MARGIN - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">compactness C_k</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">separability s_k</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();

    for p in points {
        let (x, y) = (sx(p.compactness), sy(p.separability));
        if p.k == selection.k {
            writeln!(
                s,
                r##"<polygon points="{}" fill="#d62728" stroke="black"/>"##,
                star(x, y, 9.0, 4.0)
            )
            .unwrap();
        } else if selection.front.contains(&p.k) {
            writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="#1f77b4" stroke="black"/>"##)
                .unwrap();
        } else {
            writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="#555555"/>"##)
                .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 8.0,
            y - 8.0,
            p.k
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn star(cx: f64, cy: f64, outer: f64, inner: f64) -> String {
    (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { outer } else { inner };
            let a = std::f64::consts::PI * (i as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{:.2},{:.2}", cx + r * a.cos(), cy + r * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}
