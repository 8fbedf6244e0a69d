//! Minimal SVG learning-curve charts; the CSVs remain the source of truth.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

/// One chart with accuracy in `[0, 1]` on the y axis and epochs on the x axis.
pub fn accuracy_chart(title: &str, series: &[Series<'_>]) -> String {
    let epochs = series.iter().map(|s| s.values.len()).max().unwrap_or(1).max(2);
    let px = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (epochs - 1) as f64;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v.clamp(0.0, 1.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" x2="{}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{v:.1}</text>"##,
            WIDTH - MARGIN,
            MARGIN - 6.0,
            py(v) + 4.0,
            y = py(v),
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">epoch (1-{epochs})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    for (k, ser) in series.iter().enumerate() {
        let points: Vec<String> = ser
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.1},{:.1}", px(i), py(v)))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            ser.color,
            points.join(" ")
        );
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" x2="{x1}" y1="{ly}" y2="{ly}" stroke="{c}" stroke-width="1.5"{dash}/><text x="{tx}" y="{ty}">{}</text>"#,
            escape(ser.label),
            x0 = WIDTH - MARGIN - 130.0,
            x1 = WIDTH - MARGIN - 110.0,
            c = ser.color,
            tx = WIDTH - MARGIN - 104.0,
            ty = ly + 4.0,
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series() {
        let a = [0.1, 0.5, 0.7];
        let b = [0.2, 0.4, 0.6];
        let svg = accuracy_chart(
            "8-3 <cut>",
            &[
                Series { label: "train", values: &a, color: "red", dashed: true },
                Series { label: "val", values: &b, color: "blue", dashed: false },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("&lt;cut&gt;"));
    }
}
