//! Output formats: fixed-precision numbers, versioned JSON documents and
//! minimal SVG plots.

use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;

use crate::eigenfunctions::SampledField;
use crate::error::Result;

/// Version tag written into every JSON document.
pub const SCHEMA: &str = "poincare-bounds/1";

/// `x` with 17 significant digits, in fixed notation for moderate
/// magnitudes and scientific notation otherwise.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..16).contains(&mag) {
        let decimals = (16 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (_, Some(u), _) => write!(out, "{u}").unwrap(),
            (_, _, Some(f)) if f.is_finite() => out.push_str(&format_number(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(out, x);
            }
            out.push('}');
        }
    }
}

/// Serializes `data` as `{"schema": ..., "command": ..., "data": ...}` with
/// every floating-point number written to 17 significant digits.
pub fn json_document<T: Serialize>(command: &str, data: &T) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("schema".into(), Value::String(SCHEMA.into()));
    doc.insert("command".into(), Value::String(command.into()));
    doc.insert("data".into(), serde_json::to_value(data)?);
    let mut out = String::new();
    write_value(&mut out, &Value::Object(doc));
    out.push('\n');
    Ok(out)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Polylines of several series against a shared abscissa.
pub fn svg_lines(title: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let (x0, x1) = range(x.iter().copied());
    let (y0, y1) = range(series.iter().flat_map(|s| s.1.iter().copied()));
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<polyline points="{m},{t} {m},{b} {r},{b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for (v, anchor_y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN)] {
        writeln!(s, r#"<text x="{}" y="{anchor_y}" text-anchor="end">{v:.4}</text>"#, MARGIN - 4.0).unwrap();
    }
    for (v, anchor_x) in [(x0, MARGIN), (x1, WIDTH - MARGIN)] {
        writeln!(s, r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{v:.4}</text>"#, HEIGHT - MARGIN + 14.0).unwrap();
    }
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b)))
            .collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" ")).unwrap();
        let ly = MARGIN + 14.0 * k as f64;
        writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#, WIDTH - MARGIN - 150.0, escape(name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter plot of a sampled field, points colored from blue (-1) to red (+1).
pub fn svg_scatter(title: &str, field: &SampledField) -> String {
    let (x0, x1) = range(field.points.iter().map(|p| p.x));
    let (y0, y1) = range(field.points.iter().map(|p| p.y));
    let scale = ((WIDTH - 2.0 * MARGIN) / (x1 - x0)).min((HEIGHT - 2.0 * MARGIN) / (y1 - y0));
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    for p in &field.points {
        let t = ((p.value + 1.0) / 2.0).clamp(0.0, 1.0);
        let (r, b) = ((255.0 * t) as u8, (255.0 * (1.0 - t)) as u8);
        let cx = MARGIN + (p.x - x0) * scale;
        let cy = HEIGHT - MARGIN - (p.y - y0) * scale;
        writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="rgb({r},64,{b})"/>"#).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_number(0.5), "0.50000000000000000");
        assert_eq!(format_number(12.25), "12.250000000000000");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1e-9), "1.0000000000000001e-9");
        let x = 0.1 + 0.2;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_envelope() {
        #[derive(Serialize)]
        struct D {
            a: f64,
            n: u32,
            s: Option<f64>,
        }
        let doc = json_document("x", &D { a: 0.25, n: 3, s: None }).unwrap();
        assert_eq!(doc, "{\"command\":\"x\",\"data\":{\"a\":0.25000000000000000,\"n\":3,\"s\":null},\"schema\":\"poincare-bounds/1\"}\n");
        let parsed: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(parsed["schema"], SCHEMA);
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_lines("t", &[0.0, 1.0], &[("a".into(), vec![1.0, 2.0])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    }
}
