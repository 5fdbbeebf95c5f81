//! ROC plot as a standalone SVG document.
//!
//! Coordinates are printed with two fixed decimals so identical curves
//! produce identical bytes.

use std::fmt::Write as _;

use stressgrade::evaluation::ClassifierResult;

use crate::report::display_name;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

fn color(name: &str) -> &'static str {
    match name {
        "rf" => "#1b6ca8",
        "sgd" => "#e07b00",
        "svm" => "#2e8b3a",
        "knn" => "#c0392b",
        _ => "#555555",
    }
}

fn to_x(fpr: f64) -> f64 {
    LEFT + fpr * (WIDTH - LEFT - RIGHT)
}

fn to_y(tpr: f64) -> f64 {
    HEIGHT - BOTTOM - tpr * (HEIGHT - TOP - BOTTOM)
}

pub fn roc_svg(results: &[ClassifierResult]) -> String {
    let (x0, x1, y0, y1) = (to_x(0.0), to_x(1.0), to_y(0.0), to_y(1.0));
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="14">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    // axes and ticks
    writeln!(s, r#"<g stroke="black" stroke-width="1">"#).unwrap();
    writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#).unwrap();
    for t in 0..=5 {
        let v = t as f64 / 5.0;
        let (x, y) = (to_x(v), to_y(v));
        writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}"/>"#, y0 + 5.0).unwrap();
        writeln!(s, r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, x0 - 5.0).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    for t in 0..=5 {
        let v = t as f64 / 5.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
            to_x(v),
            y0 + 22.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            x0 - 10.0,
            to_y(v) + 5.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">False positive rate</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="20.00" y="{:.2}" text-anchor="middle" transform="rotate(-90 20.00 {:.2})">True positive rate</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();

    writeln!(
        s,
        r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#999999" stroke-dasharray="6 4"/>"##
    )
    .unwrap();

    for r in results {
        let name = r.spec.name();
        let points: Vec<String> = r
            .roc
            .iter()
            .map(|p| format!("{:.2},{:.2}", to_x(p.false_positive_rate), to_y(p.true_positive_rate)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            color(name),
            points.join(" ")
        )
        .unwrap();
    }

    // legend, bottom right of the plot area
    let row = 22.0;
    let lx = x1 - 110.0;
    let ly = y0 - 20.0 - row * results.len() as f64;
    for (i, r) in results.iter().enumerate() {
        let y = ly + row * (i as f64 + 0.5);
        writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="3"/>"#,
            lx + 28.0,
            color(r.spec.name())
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 36.0,
            y + 5.0,
            display_name(r.spec.name())
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
