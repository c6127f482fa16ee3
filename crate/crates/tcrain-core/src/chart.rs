//! Dependency-free SVG bar charts for the report outputs.

use crate::error::{Error, Result};
use crate::sigfig::format_sig;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 70.0;
const BAR_FILL: &str = "#3572a5";

/// Render one bar per `(label, value)` pair as an SVG 1.1 document.
///
/// Bar heights are linearly proportional to values (the maximum fills the
/// plot height); y ticks sit on at most ten round intervals. Output is
/// deterministic for identical input.
pub fn render_bar_chart_svg(
    series: &[(String, f64)],
    title: &str,
    y_label: &str,
) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidArgument(
            "chart needs at least one point".into(),
        ));
    }
    for (label, v) in series {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("bar '{label}' has value {v}")));
        }
        if *v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bar '{label}' is negative; charts are zero-based"
            )));
        }
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max = series.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let x_axis_y = MARGIN_TOP + plot_h;

    let mut svg = String::with_capacity(2048);
    svg.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    svg.push('\n');
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="18">{}</text>"#,
        WIDTH / 2.0,
        escape_xml(title)
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="22" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 22 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape_xml(y_label)
    ));
    svg.push('\n');

    // y ticks at round intervals
    if max > 0.0 {
        let step = nice_tick_step(max, 10);
        let mut tick = 0.0;
        while tick <= max * (1.0 + 1e-12) {
            let y = x_axis_y - tick / max * plot_h;
            svg.push_str(&format!(
                r##"<line x1="{MARGIN_LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd" stroke-width="1"/>"##,
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="12">{}</text>"#,
                MARGIN_LEFT - 8.0,
                y + 4.0,
                format_sig(tick, 6)
            ));
            svg.push('\n');
            tick += step;
        }
    } else {
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="12">0</text>"#,
            MARGIN_LEFT - 8.0,
            x_axis_y + 4.0
        ));
        svg.push('\n');
    }

    // bars and x labels
    let slot = plot_w / series.len() as f64;
    let bar_w = (slot * 0.7).min(80.0);
    for (i, (label, v)) in series.iter().enumerate() {
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let h = if max > 0.0 { v / max * plot_h } else { 0.0 };
        let y = x_axis_y - h;
        svg.push_str(&format!(
            r#"<rect x="{x}" y="{y}" width="{bar_w}" height="{h}" fill="{BAR_FILL}"/>"#
        ));
        svg.push('\n');
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            x + bar_w / 2.0,
            x_axis_y + 18.0,
            escape_xml(label)
        ));
        svg.push('\n');
    }

    // axes drawn last so they sit on top of the grid lines
    svg.push_str(&format!(
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{x_axis_y}" stroke="black" stroke-width="1.5"/>"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<line x1="{MARGIN_LEFT}" y1="{x_axis_y}" x2="{}" y2="{x_axis_y}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT + plot_w
    ));
    svg.push_str("\n</svg>\n");
    Ok(svg)
}

/// Largest of 1/2/5 * 10^k giving at most `max_ticks` intervals over `max`.
fn nice_tick_step(max: f64, max_ticks: usize) -> f64 {
    debug_assert!(max > 0.0);
    let raw = max / max_ticks as f64;
    let magnitude = 10f64.powf(raw.log10().floor());
    for mult in [1.0, 2.0, 5.0, 10.0] {
        let step = mult * magnitude;
        if max / step <= max_ticks as f64 {
            return step;
        }
    }
    10.0 * magnitude
}

pub(crate) fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
        pairs.iter().map(|(l, v)| (l.to_string(), *v)).collect()
    }

    #[test]
    fn single_bar_fills_the_plot_height() {
        let svg = render_bar_chart_svg(&series(&[("D1", 42.0)]), "t", "mm").unwrap();
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        assert!(svg.contains(&format!(r#"height="{plot_h}""#)), "{svg}");
    }

    #[test]
    fn zero_valued_bar_is_present_with_its_label() {
        let svg = render_bar_chart_svg(&series(&[("D1", 5.0), ("D2", 0.0)]), "t", "mm").unwrap();
        assert!(svg.contains(r#"height="0""#));
        assert!(svg.contains(">D2</text>"));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        assert!(render_bar_chart_svg(&series(&[("D1", f64::NAN)]), "t", "y").is_err());
        assert!(render_bar_chart_svg(&series(&[("D1", f64::INFINITY)]), "t", "y").is_err());
        assert!(render_bar_chart_svg(&[], "t", "y").is_err());
    }

    #[test]
    fn output_is_deterministic() {
        let s = series(&[("D1", 1.25), ("D2", 3.5), ("D3", 0.0)]);
        let a = render_bar_chart_svg(&s, "Daily rainfall", "mm").unwrap();
        let b = render_bar_chart_svg(&s, "Daily rainfall", "mm").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_are_xml_escaped() {
        let svg = render_bar_chart_svg(&series(&[("a<b>&\"c'", 1.0)]), "x & y", "mm").unwrap();
        assert!(svg.contains("a&lt;b&gt;&amp;&quot;c&apos;"));
        assert!(svg.contains("x &amp; y"));
        assert!(!svg.contains("a<b>"));
    }

    #[test]
    fn tick_steps_are_round_and_bounded() {
        for &(max, expect) in &[
            (9.0, 1.0),
            (10.0, 1.0),
            (11.0, 2.0),
            (47.0, 5.0),
            (99.0, 10.0),
            (0.35, 0.05),
        ] {
            let step = nice_tick_step(max, 10);
            assert!(
                (step - expect).abs() < 1e-12,
                "max {max}: {step} vs {expect}"
            );
            assert!(max / step <= 10.0 + 1e-9);
        }
    }
}
