//! Self-contained SVG charts: actual-vs-predicted overlays and the
//! (unused capability, scale-up count) scatter. No external resources,
//! fonts, or scripts are referenced, so the files render anywhere.

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#111111"];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Human-oriented tick label: keeps byte-scale values readable.
fn tick_label(v: f64) -> String {
    let abs = v.abs();
    if abs >= 1e9 {
        format!("{:.2}G", v / 1e9)
    } else if abs >= 1e6 {
        format!("{:.2}M", v / 1e6)
    } else if abs >= 1e3 {
        format!("{:.1}k", v / 1e3)
    } else {
        format!("{v:.1}")
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-12);
        MARGIN_LEFT + (v - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(1e-12);
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"26\" font-family=\"sans-serif\" font-size=\"17\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str, out: &mut String) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    const TICKS: usize = 6;
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = frame.x_min + f * (frame.x_max - frame.x_min);
        let yv = frame.y_min + f * (frame.y_max - frame.y_min);
        let xp = frame.x(xv);
        let yp = frame.y(yv);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            fmt(xp),
            fmt(xp),
            y0 + 5.0,
            fmt(xp),
            y0 + 20.0,
            tick_label(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{x0}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            fmt(yp),
            fmt(yp),
            x0 - 9.0,
            fmt(yp + 4.0),
            tick_label(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>\n",
        (MARGIN_LEFT + x1) / 2.0,
        HEIGHT - 14.0,
        xml_escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        xml_escape(y_label)
    ));
}

/// Overlaid line chart; one polyline per named series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(&str, &[f64])]) -> String {
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let y_max = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let frame = Frame { x_min: 0.0, x_max: (n.max(2) - 1) as f64, y_min: 0.0, y_max: y_max * 1.05 };

    let mut out = svg_open(title);
    axes(&frame, x_label, y_label, &mut out);
    for (idx, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{},{}", fmt(frame.x(i as f64)), fmt(frame.y(v))))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_TOP + 16.0 * idx as f64;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            WIDTH - 200.0,
            WIDTH - 170.0,
            WIDTH - 164.0,
            ly + 4.0,
            xml_escape(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// One scatter point per (app, view): x = unused capability, y = scale-up
/// count. Color identifies the app, marker shape the view.
pub fn scatter_chart(title: &str, points: &[ScatterPoint]) -> String {
    let x_max = points.iter().map(|p| p.w).fold(0.0f64, f64::max).max(1e-12);
    let y_max = points.iter().map(|p| p.u as f64).fold(0.0f64, f64::max).max(1.0);
    let frame = Frame { x_min: 0.0, x_max: x_max * 1.1, y_min: 0.0, y_max: y_max * 1.15 };

    let mut apps: Vec<&str> = points.iter().map(|p| p.app_id.as_str()).collect();
    apps.sort_unstable();
    apps.dedup();

    let mut out = svg_open(title);
    axes(&frame, "unused capability (bytes)", "scale-up events", &mut out);
    for p in points {
        let color = PALETTE[apps.iter().position(|a| *a == p.app_id).unwrap_or(0) % PALETTE.len()];
        let x = frame.x(p.w);
        let y = frame.y(p.u as f64);
        marker(&p.view_marker, x, y, color, &mut out);
    }
    // legend: apps by color, views by shape
    for (idx, app) in apps.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 * idx as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            WIDTH - 200.0,
            ly - 10.0,
            PALETTE[idx % PALETTE.len()],
            WIDTH - 182.0,
            ly,
            xml_escape(app)
        ));
    }
    let mut shapes: Vec<&str> = points.iter().map(|p| p.view_marker.as_str()).collect();
    shapes.sort_unstable();
    shapes.dedup();
    for (idx, shape) in shapes.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 * (apps.len() + idx) as f64 + 10.0;
        marker(shape, WIDTH - 194.0, ly - 4.0, "#555555", &mut out);
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            WIDTH - 182.0,
            ly,
            xml_escape(shape)
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone)]
pub struct ScatterPoint {
    pub app_id: String,
    /// View name; also selects the marker shape.
    pub view_marker: String,
    pub w: f64,
    pub u: usize,
}

fn marker(shape: &str, x: f64, y: f64, color: &str, out: &mut String) {
    match shape {
        "vertical" => out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            fmt(x - 5.0),
            fmt(y - 5.0)
        )),
        "joint" => out.push_str(&format!(
            "<polygon points=\"{},{} {},{} {},{}\" fill=\"{color}\"/>\n",
            fmt(x),
            fmt(y - 6.0),
            fmt(x - 6.0),
            fmt(y + 5.0),
            fmt(x + 6.0),
            fmt(y + 5.0)
        )),
        _ => out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{color}\"/>\n",
            fmt(x),
            fmt(y)
        )),
    }
}
