//! Minimal text-emitted SVG bar charts.

use std::fmt::Write;

pub struct BarChart<'a> {
    pub title: &'a str,
    pub labels: &'a [String],
    pub values: &'a [f64],
    /// Dashed horizontal line, e.g. a critical value.
    pub reference: Option<(f64, &'a str)>,
}

const W: f64 = 720.0;
const H: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 80.0;

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' && c != '\r' => {}
            c => out.push(c),
        }
    }
    out
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    }
}

impl BarChart<'_> {
    pub fn render(&self) -> String {
        let n = self.values.len().max(1);
        let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
        let mut lo = self.values.iter().map(|&v| finite(v)).fold(0.0f64, f64::min);
        let mut hi = self.values.iter().map(|&v| finite(v)).fold(0.0f64, f64::max);
        if let Some((r, _)) = self.reference {
            lo = lo.min(finite(r));
            hi = hi.max(finite(r));
        }
        if hi - lo <= 0.0 {
            hi = lo + 1.0;
        }
        let plot_h = H - TOP - BOTTOM;
        let plot_w = W - LEFT - RIGHT;
        let y = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;
        let slot = plot_w / n as f64;
        let bar = (slot * 0.7).max(0.5);

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#,
            W / 2.0,
            escape(self.title)
        );
        // axes
        let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, TOP + plot_h);
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="black"/>"#,
            y(0.0),
            W - RIGHT
        );
        for t in 0..=4 {
            let v = lo + (hi - lo) * t as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
                LEFT - 4.0,
                y(v) + 3.0,
                fmt_num(v)
            );
        }
        let label_every = (n as f64 / 40.0).ceil().max(1.0) as usize;
        for (i, &v) in self.values.iter().enumerate() {
            let v = finite(v);
            let x = LEFT + slot * i as f64 + (slot - bar) / 2.0;
            let (top, h) = if v >= 0.0 { (y(v), y(0.0) - y(v)) } else { (y(0.0), y(v) - y(0.0)) };
            let fill = if v >= 0.0 { "#4477aa" } else { "#cc6677" };
            let label = self.labels.get(i).map(String::as_str).unwrap_or("");
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{top:.2}" width="{bar:.2}" height="{h:.2}" fill="{fill}"><title>{}: {}</title></rect>"#,
                escape(label),
                fmt_num(v)
            );
            if i % label_every == 0 {
                let lx = x + bar / 2.0;
                let ly = TOP + plot_h + 12.0;
                let _ = writeln!(
                    s,
                    r#"<text x="{lx:.2}" y="{ly:.2}" font-size="10" text-anchor="end" transform="rotate(-45 {lx:.2} {ly:.2})">{}</text>"#,
                    escape(label)
                );
            }
        }
        if let Some((r, name)) = self.reference {
            let ry = y(finite(r));
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{ry:.2}" x2="{}" y2="{ry:.2}" stroke="#ee3377" stroke-dasharray="6 4"/>"##,
                W - RIGHT
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="{:.2}" font-size="10" text-anchor="end" fill="#ee3377">{}</text>"##,
                W - RIGHT,
                ry - 4.0,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
