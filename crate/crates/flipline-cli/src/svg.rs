//! Minimal self-contained SVG line plots: axes with ticks, labelled curves,
//! vertical markers and arrows, provenance in <metadata>.

use std::fmt::Write;

const W: f64 = 760.0;
const H: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 64.0;

pub const PALETTE: [&str; 6] = ["#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555"];

#[derive(Debug, Clone)]
pub struct Series {
    pub id: String,
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
    /// draw markers instead of a line
    pub markers: bool,
}

#[derive(Debug, Clone)]
pub struct VLine {
    pub id: String,
    pub x: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct Arrow {
    pub id: String,
    pub x: f64,
    /// tip of the arrow
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub vlines: Vec<VLine>,
    pub arrows: Vec<Arrow>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub metadata: Vec<(String, String)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let m = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 6);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(x: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{x:.digits$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Range of finite values, widened by 4 % (and made nonempty).
fn auto_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

impl Plot {
    pub fn render(&self) -> String {
        let (x0, x1) = self.x_range.unwrap_or_else(|| {
            auto_range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).chain(self.vlines.iter().map(|v| v.x)))
        });
        let (y0, y1) = self.y_range.unwrap_or_else(|| auto_range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1))));
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="13">"#
        );
        let _ = writeln!(s, "<metadata>");
        for (k, v) in &self.metadata {
            let _ = writeln!(s, r#"  <entry key="{}" value="{}"/>"#, esc(k), esc(v));
        }
        let _ = writeln!(s, "</metadata>");
        let _ = writeln!(s, r#"<title>{}</title>"#, esc(&self.title));
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<clipPath id="frame"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>"#);

        // axes and ticks
        let _ = writeln!(s, r#"<g id="axes" stroke="black" fill="none">"#);
        let _ = writeln!(s, r#"  <rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/>"#);
        let xs = nice_step(x1 - x0, 6);
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(s, r#"  <line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, TOP + ph, TOP + ph - 6.0);
        }
        let ys = nice_step(y1 - y0, 6);
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(s, r#"  <line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, LEFT + 6.0);
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<g id="tick-labels" fill="black">"#);
        for t in ticks(x0, x1) {
            let _ = writeln!(s, r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(t), TOP + ph + 18.0, tick_label(t, xs));
        }
        for t in ticks(y0, y1) {
            let _ = writeln!(s, r#"  <text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, sy(t) + 4.0, tick_label(t, ys));
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<text id="title" x="{:.2}" y="26" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(s, r#"<text id="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 18.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text id="y-label" x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );

        for v in &self.vlines {
            let x = sx(v.x);
            let _ = writeln!(
                s,
                r##"<g id="marker-{}" class="marker"><line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#888888" stroke-dasharray="2,3"/><text x="{:.2}" y="{:.2}" font-size="11" fill="#444444">{}</text></g>"##,
                esc(&v.id),
                TOP + ph,
                x + 3.0,
                TOP + 14.0,
                esc(&v.label)
            );
        }

        let _ = writeln!(s, r#"<g id="curves" clip-path="url(#frame)">"#);
        for c in &self.series {
            if c.markers {
                let _ = writeln!(s, r#"  <g id="curve-{}" class="curve" data-label="{}" fill="{}">"#, esc(&c.id), esc(&c.label), c.color);
                for &(x, y) in c.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                    let _ = writeln!(s, r#"    <circle cx="{:.2}" cy="{:.2}" r="3"/>"#, sx(x), sy(y));
                }
                let _ = writeln!(s, "  </g>");
                continue;
            }
            let mut d = String::new();
            let mut pen_down = false;
            let mut prev_out = false;
            for &(x, y) in &c.points {
                if !(x.is_finite() && y.is_finite()) {
                    pen_down = false;
                    continue;
                }
                let out = y < y0 || y > y1;
                let yc = y.clamp(y0 - 0.02 * (y1 - y0), y1 + 0.02 * (y1 - y0));
                if out && prev_out {
                    pen_down = false;
                }
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(yc));
                pen_down = true;
                prev_out = out;
            }
            let dash = if c.dashed { r#" stroke-dasharray="8,5""# } else { "" };
            let _ = writeln!(
                s,
                r#"  <path id="curve-{}" class="curve" data-label="{}" d="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                esc(&c.id),
                esc(&c.label),
                d.trim_end(),
                c.color
            );
        }
        let _ = writeln!(s, "</g>");

        for a in &self.arrows {
            let (x, y) = (sx(a.x), sy(a.y));
            let tail = y - 46.0;
            let _ = writeln!(
                s,
                r#"<g id="arrow-{}" class="arrow" stroke="black" fill="black"><line x1="{x:.2}" y1="{tail:.2}" x2="{x:.2}" y2="{:.2}"/><path d="M{x:.2},{y:.2} L{:.2},{:.2} L{:.2},{:.2} Z"/><text x="{:.2}" y="{:.2}" stroke="none" font-size="11" text-anchor="middle">{}</text></g>"#,
                esc(&a.id),
                y - 8.0,
                x - 4.0,
                y - 9.0,
                x + 4.0,
                y - 9.0,
                x,
                tail - 4.0,
                esc(&a.label)
            );
        }

        // legend
        let _ = writeln!(s, r#"<g id="legend">"#);
        for (k, c) in self.series.iter().enumerate() {
            let y = TOP + 16.0 + 18.0 * k as f64;
            let x = LEFT + pw - 230.0;
            let dash = if c.dashed { r#" stroke-dasharray="8,5""# } else { "" };
            if c.markers {
                let _ = writeln!(s, r#"  <circle cx="{:.2}" cy="{y:.2}" r="3" fill="{}"/>"#, x + 14.0, c.color);
            } else {
                let _ = writeln!(s, r#"  <line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="1.8"{dash}/>"#, x + 28.0, c.color);
            }
            let _ = writeln!(s, r#"  <text x="{:.2}" y="{:.2}">{}</text>"#, x + 36.0, y + 4.0, esc(&c.label));
        }
        let _ = writeln!(s, "</g>");
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(tick_label(-0.0, 0.2), "0.0");
    }

    #[test]
    fn renders_curves_and_escapes() {
        let p = Plot {
            title: "a < b".into(),
            series: vec![Series {
                id: "c1".into(),
                label: "R′".into(),
                points: vec![(0.0, 0.0), (1.0, f64::NAN), (2.0, 1.0)],
                color: PALETTE[0],
                dashed: true,
                markers: false,
            }],
            metadata: vec![("config_hash".into(), "abc".into())],
            ..Default::default()
        };
        let svg = p.render();
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains(r#"id="curve-c1""#));
        assert!(svg.contains(r#"value="abc""#));
        let d = svg.split(r#"id="curve-c1""#).nth(1).unwrap().split(" d=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(d.matches('M').count(), 2, "{d}");
    }
}
