//! CSV tables and SVG overlays.

use std::fmt::Write as _;
use std::io;

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Shortest text that parses back to the same double.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(cell).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

struct Layer {
    points: Vec<[f64; 2]>,
    color: &'static str,
    label: String,
}

/// A static overlay of closed curves and marked points, y axis up.
#[derive(Default)]
pub struct Svg {
    layers: Vec<Layer>,
    marks: Vec<([f64; 2], &'static str)>,
}

impl Svg {
    pub fn curve(&mut self, label: &str, color: &'static str, points: Vec<[f64; 2]>) -> &mut Self {
        self.layers.push(Layer { points, color, label: label.into() });
        self
    }

    pub fn mark(&mut self, p: [f64; 2], color: &'static str) -> &mut Self {
        self.marks.push((p, color));
        self
    }

    pub fn render(&self) -> String {
        let all = self.layers.iter().flat_map(|l| l.points.iter()).chain(self.marks.iter().map(|(p, _)| p));
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in all {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            (lo, hi) = ([-1.0; 2], [1.0; 2]);
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let pad = 0.05 * span;
        let size = 600.0;
        let s = size / (span + 2.0 * pad);
        let map = |p: &[f64; 2]| ((p[0] - lo[0] + pad) * s, (hi[1] - p[1] + pad) * s);
        let width = (hi[0] - lo[0] + 2.0 * pad) * s;
        let height = (hi[1] - lo[1] + 2.0 * pad) * s;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.3} {height:.3}">"#
        );
        for (i, l) in self.layers.iter().enumerate() {
            let pts: Vec<String> = l.points.iter().map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            }).collect();
            let _ = writeln!(
                out,
                r#"  <polygon fill="none" stroke="{}" stroke-width="1.5" points="{}"><title>{}</title></polygon>"#,
                l.color,
                pts.join(" "),
                l.label
            );
            let _ = writeln!(
                out,
                r#"  <text x="8" y="{}" font-size="14" fill="{}">{}</text>"#,
                18 + 18 * i,
                l.color,
                l.label
            );
        }
        for (p, color) in &self.marks {
            let (x, y) = map(p);
            let _ = writeln!(out, r#"  <circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{color}"/>"#);
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 7.0, 1e22] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(cell(f64::INFINITY), "inf");
    }

    #[test]
    fn table_text() {
        let mut t = Table::new(["a", "b"]);
        t.push_numbers([1.0, 0.25]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1e0,2.5e-1\n");
    }

    #[test]
    fn svg_has_layers() {
        let mut svg = Svg::default();
        svg.curve("K", "black", vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).mark([0.2, 0.2], "red");
        let text = svg.render();
        assert!(text.starts_with("<svg") && text.contains("<polygon") && text.contains("<circle"));
    }
}
