//! Minimal deterministic SVG plotting: fixed-precision coordinates, no
//! timestamps, elements emitted in call order.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    x: (f64, f64),
    y: (f64, f64),
    width: f64,
    height: f64,
    body: String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly five round tick values covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.3}", if v.abs() < 1e-12 { 0.0 } else { v });
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl Plot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |r: (f64, f64)| if r.1 > r.0 { r } else { (r.0 - 0.5, r.0 + 0.5) };
        Plot {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            x: pad(x),
            y: pad(y),
            width: WIDTH,
            height: HEIGHT,
            body: String::new(),
        }
    }

    /// Square plotting area, for phase-space figures.
    pub fn square(mut self) -> Self {
        self.height = self.width - LEFT - RIGHT + TOP + BOTTOM;
        self
    }

    fn sx(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - LEFT - RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        self.height - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - TOP - BOTTOM)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, self.sx(x), self.sy(y));
        }
        let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width:.2}\"{dash}/>"
        );
    }

    /// Disjoint line segments in one path.
    pub fn segments(&mut self, segs: &[[(f64, f64); 2]], stroke: &str, width: f64) {
        if segs.is_empty() {
            return;
        }
        let mut d = String::new();
        for s in segs {
            let _ = write!(
                d,
                "M{:.2},{:.2}L{:.2},{:.2}",
                self.sx(s[0].0),
                self.sy(s[0].1),
                self.sx(s[1].0),
                self.sy(s[1].1)
            );
        }
        let _ = writeln!(self.body, "<path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width:.2}\"/>");
    }

    pub fn marker(&mut self, x: f64, y: f64, radius_px: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius_px:.2}\" fill=\"{fill}\"/>",
            self.sx(x),
            self.sy(y)
        );
    }

    /// Circle with a radius in data units (x scale).
    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, stroke: &str, dash: Option<&str>) {
        let rp = r / (self.x.1 - self.x.0) * (self.width - LEFT - RIGHT);
        let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{rp:.2}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.50\"{dash}/>",
            self.sx(cx),
            self.sy(cy)
        );
    }

    pub fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &str) {
        let (a, b) = (self.sx(x0), self.sx(x1));
        let (c, d) = (self.sy(y1), self.sy(y0));
        let _ = writeln!(
            self.body,
            "<rect x=\"{a:.2}\" y=\"{c:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
            b - a,
            d - c
        );
    }

    pub fn vline(&mut self, x: f64, stroke: &str, label: &str) {
        let (px, top, bottom) = (self.sx(x), TOP, self.height - BOTTOM);
        let _ = writeln!(
            self.body,
            "<line x1=\"{px:.2}\" y1=\"{top:.2}\" x2=\"{px:.2}\" y2=\"{bottom:.2}\" stroke=\"{stroke}\" stroke-dasharray=\"4 3\"/>"
        );
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"{stroke}\">{}</text>",
            px + 4.0,
            top + 14.0,
            escape(label)
        );
    }

    /// Legend entries stacked in the top-right corner.
    pub fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (color, label)) in entries.iter().enumerate() {
            let y = TOP + 16.0 + 16.0 * i as f64;
            let x = self.width - RIGHT - 150.0;
            let _ = writeln!(
                self.body,
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"12.00\" height=\"4.00\" fill=\"{color}\"/>",
                y - 4.0
            );
            let _ = writeln!(
                self.body,
                "<text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"12\">{}</text>",
                x + 16.0,
                escape(label)
            );
        }
    }

    pub fn finish(self) -> String {
        let (w, h) = (self.width, self.height);
        let mut s = String::new();
        let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(s, "<defs><clipPath id=\"area\"><rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath></defs>", w - LEFT - RIGHT, h - TOP - BOTTOM);
        let _ = write!(s, "<g clip-path=\"url(#area)\">\n{}</g>\n", self.body);
        let _ = writeln!(
            s,
            "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
            w - LEFT - RIGHT,
            h - TOP - BOTTOM
        );
        for t in ticks(self.x.0, self.x.1) {
            let px = self.sx(t);
            let _ = writeln!(
                s,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                h - BOTTOM,
                h - BOTTOM + 5.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
                h - BOTTOM + 19.0,
                tick_label(t)
            );
        }
        for t in ticks(self.y.0, self.y.1) {
            let py = self.sy(t);
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{LEFT:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>",
                LEFT - 5.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>",
                LEFT - 8.0,
                py + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"24.00\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
            w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            (LEFT + w - RIGHT) / 2.0,
            h - 12.0,
            escape(&self.xlabel)
        );
        let _ = writeln!(
            s,
            "<text x=\"16.00\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16.00 {:.2})\">{}</text>",
            (TOP + h - BOTTOM) / 2.0,
            (TOP + h - BOTTOM) / 2.0,
            escape(&self.ylabel)
        );
        s.push_str("</svg>\n");
        s
    }
}

/// Diverging colour: white to red for t ∈ [0, 1], white to blue for
/// t ∈ [−1, 0].
pub fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let fade = |u: f64| (255.0 * (1.0 - u)).round() as u8;
    if t >= 0.0 {
        format!("#ff{:02x}{:02x}", fade(t), fade(t))
    } else {
        format!("#{:02x}{:02x}ff", fade(-t), fade(-t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_choice() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(tick_label(0.6000000000000001), "0.6");
        assert_eq!(ticks(-1.0, 1.0).len(), 5);
    }

    #[test]
    fn colours() {
        assert_eq!(diverging(0.0), "#ffffff");
        assert_eq!(diverging(1.0), "#ff0000");
        assert_eq!(diverging(-1.0), "#0000ff");
    }

    #[test]
    fn identical_input_identical_bytes() {
        let build = || {
            let mut p = Plot::new("S(λ) <test>", "λ", "S", (0.0, 2.0), (0.0, 1.0));
            p.polyline(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.7)], "black", 1.5, None);
            p.vline(1.0, "gray", "λc");
            p.finish()
        };
        let a = build();
        assert_eq!(a, build());
        assert!(a.contains("&lt;test&gt;"));
    }
}
