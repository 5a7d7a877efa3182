// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimal SVG 1.1 document builder. Coordinates are printed with three
//! decimals so output is stable across platforms.

use std::fmt::Write as _;

pub(crate) const WIDTH: f64 = 640.0;
pub(crate) const HEIGHT: f64 = 400.0;
pub(crate) const MARGIN: f64 = 48.0;

/// Fixed qualitative palette for series and cluster classes.
pub(crate) const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#7f7f7f", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
];

pub(crate) struct Svg {
    body: String,
    width: f64,
    height: f64,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Svg {
    pub(crate) fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    pub(crate) fn standard() -> Self {
        Self::new(WIDTH, HEIGHT)
    }

    pub(crate) fn raw(&mut self, element: &str) {
        self.body.push_str("  ");
        self.body.push_str(element);
        self.body.push('\n');
    }

    pub(crate) fn line(&mut self, a: (f64, f64), b: (f64, f64), style: &str) {
        let e = format!(
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {style}/>"#,
            a.0, a.1, b.0, b.1
        );
        self.raw(&e);
    }

    fn points(pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.3},{y:.3}");
        }
        s
    }

    pub(crate) fn polyline(&mut self, pts: &[(f64, f64)], style: &str) {
        let e = format!(
            r#"<polyline points="{}" fill="none" {style}/>"#,
            Self::points(pts)
        );
        self.raw(&e);
    }

    pub(crate) fn polygon(&mut self, pts: &[(f64, f64)], style: &str) {
        let e = format!(r#"<polygon points="{}" {style}/>"#, Self::points(pts));
        self.raw(&e);
    }

    pub(crate) fn circle(&mut self, c: (f64, f64), r: f64, style: &str) {
        let e = format!(
            r#"<circle cx="{:.3}" cy="{:.3}" r="{r:.3}" {style}/>"#,
            c.0, c.1
        );
        self.raw(&e);
    }

    pub(crate) fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        let e = format!(r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" {style}/>"#);
        self.raw(&e);
    }

    pub(crate) fn text(&mut self, at: (f64, f64), anchor: &str, text: &str) {
        let e = format!(
            r#"<text x="{:.3}" y="{:.3}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            at.0,
            at.1,
            escape(text)
        );
        self.raw(&e);
    }

    pub(crate) fn finish(self, title: &str) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n  \
             <title>{t}</title>\n  \
             <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            t = escape(title),
            body = self.body
        )
    }
}

/// Maps data-space `[x0, x1] × [y0, y1]` onto the plotting area (y up).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Frame {
    pub(crate) fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = if self.x1 > self.x0 {
            (x - self.x0) / (self.x1 - self.x0)
        } else {
            0.5
        };
        let sy = if self.y1 > self.y0 {
            (y - self.y0) / (self.y1 - self.y0)
        } else {
            0.5
        };
        (
            MARGIN + sx * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - sy * (HEIGHT - 2.0 * MARGIN),
        )
    }

    /// Axes box with min/max tick labels.
    pub(crate) fn draw_axes(&self, svg: &mut Svg, x_label: &str, y_label: &str) {
        let (l, b) = self.map(self.x0, self.y0);
        let (r, t) = self.map(self.x1, self.y1);
        svg.rect(
            l,
            t,
            r - l,
            b - t,
            r##"fill="none" stroke="#000000" stroke-width="1""##,
        );
        svg.text((l, b + 14.0), "middle", &format!("{}", self.x0));
        svg.text((r, b + 14.0), "middle", &format!("{}", self.x1));
        svg.text((l - 4.0, b + 4.0), "end", &format!("{}", self.y0));
        svg.text((l - 4.0, t + 4.0), "end", &format!("{}", self.y1));
        svg.text(((l + r) / 2.0, b + 30.0), "middle", x_label);
        svg.text((l - 4.0, t - 8.0), "start", y_label);
    }
}
