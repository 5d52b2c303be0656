//! Minimal SVG plotting: axes, polylines, filled spans and markers.
//! No external renderer; coordinates are mapped linearly into a fixed
//! canvas with margins.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub struct Canvas {
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
    x_label: String,
    y_label: String,
}

impl Canvas {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), x_label: &str, y_label: &str) -> Self {
        Canvas {
            x_range,
            y_range,
            body: String::new(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN
            - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, dashed: bool) {
        if pts.len() < 2 {
            return;
        }
        let mut points = String::new();
        for p in pts {
            let _ = write!(points, "{:.3},{:.3} ", self.sx(p[0]), self.sy(p[1]));
        }
        let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
            points.trim_end()
        );
    }

    /// Horizontal span filled at one grid row (used for pass-band shading).
    pub fn hspan(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, fill: &str) {
        let (sx0, sx1) = (self.sx(x0), self.sx(x1));
        let (sy0, sy1) = (self.sy(y1), self.sy(y0));
        let _ = writeln!(
            self.body,
            "<rect x=\"{sx0:.3}\" y=\"{sy0:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{fill}\"/>",
            sx1 - sx0,
            sy1 - sy0
        );
    }

    pub fn marker(&mut self, x: f64, y: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"{fill}\"/>",
            self.sx(x),
            self.sy(y)
        );
    }

    pub fn arrow(&mut self, from: [f64; 2], to: [f64; 2], stroke: &str) {
        let (x0, y0) = (self.sx(from[0]), self.sy(from[1]));
        let (x1, y1) = (self.sx(to[0]), self.sy(to[1]));
        let _ = writeln!(
            self.body,
            "<line x1=\"{x0:.3}\" y1=\"{y0:.3}\" x2=\"{x1:.3}\" y2=\"{y1:.3}\" stroke=\"{stroke}\" stroke-width=\"2\" marker-end=\"url(#ah)\"/>"
        );
    }

    pub fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(
            out,
            "<defs><marker id=\"ah\" markerWidth=\"10\" markerHeight=\"8\" refX=\"8\" refY=\"4\" orient=\"auto\"><path d=\"M0,0 L10,4 L0,8 z\"/></marker></defs>"
        );
        let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        out.push_str(&self.body);

        // frame and tick labels
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            "<rect x=\"{x0}\" y=\"{y0}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"none\" stroke=\"black\"/>",
            x1 - x0,
            y1 - y0
        );
        for j in 0..=4 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * j as f64 / 4.0;
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * j as f64 / 4.0;
            let px = x0 + (x1 - x0) * j as f64 / 4.0;
            let py = y1 - (y1 - y0) * j as f64 / 4.0;
            let _ = writeln!(
                out,
                "<text x=\"{px:.3}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"middle\">{fx:.3}</text>",
                y1 + 16.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.3}\" y=\"{py:.3}\" font-size=\"11\" text-anchor=\"end\">{fy:.3}</text>",
                x0 - 6.0
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            0.5 * WIDTH,
            HEIGHT - 12.0,
            xml_escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            "<text x=\"16\" y=\"{:.3}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.3})\">{}</text>",
            0.5 * HEIGHT,
            0.5 * HEIGHT,
            xml_escape(&self.y_label)
        );
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
