//! Convergence plots as standalone SVG.
//!
//! The output is assembled purely from the input series with fixed
//! two-decimal coordinates, so a given input always produces the same
//! bytes. The y axis is logarithmic; values at or below a fixed floor are
//! clamped onto it and the plot says so.

use crate::error::{Error, Result};

/// Values this small sit on the axis floor instead of vanishing to
/// negative infinity on the log scale.
pub const LOG_FLOOR: f64 = 1e-16;

/// Which per-iteration summary of a trial group gets plotted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Median,
    Mean,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Median => "median",
            Statistic::Mean => "mean",
        }
    }
}

/// Plot appearance knobs.
#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub title: String,
    pub statistic: Statistic,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            statistic: Statistic::Median,
            width: 860,
            height: 520,
        }
    }
}

/// One curve: a label and its per-iteration values. Reference curves are
/// drawn dashed.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(usize, f64)>,
    pub dashed: bool,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Largest of 1, 2, 5 times a power of ten that stays at or below `raw`
/// rounded up to the next such value; used for x tick spacing.
fn nice_step(raw: f64) -> f64 {
    let pow = 10f64.powf(raw.log10().floor());
    let frac = raw / pow;
    let mult = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    pow * mult
}

/// Renders the series into one SVG document string.
pub fn svg_document(series: &[PlotSeries], opts: &PlotOptions) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidParameter(
            "a plot needs at least one series".into(),
        ));
    }
    if opts.width < 320 || opts.height < 220 {
        return Err(Error::InvalidParameter(format!(
            "plot must be at least 320 x 220, got {} x {}",
            opts.width, opts.height
        )));
    }
    let mut x_max = 1usize;
    let mut clamped = false;
    let mut log_lo = f64::INFINITY;
    let mut log_hi = f64::NEG_INFINITY;
    for s in series {
        if s.points.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "series '{}' has no points",
                s.label
            )));
        }
        for &(x, y) in &s.points {
            if y.is_nan() || y == f64::INFINITY {
                return Err(Error::NonFinite(format!(
                    "series '{}' has value {y} at iteration {x}",
                    s.label
                )));
            }
            x_max = x_max.max(x);
            let v = if y < LOG_FLOOR {
                clamped = true;
                LOG_FLOOR
            } else {
                y
            };
            log_lo = log_lo.min(v.log10());
            log_hi = log_hi.max(v.log10());
        }
    }
    let lo_dec = log_lo.floor() as i32;
    let mut hi_dec = log_hi.ceil() as i32;
    if hi_dec == lo_dec {
        hi_dec += 1;
    }

    let width = opts.width as f64;
    let height = opts.height as f64;
    let plot_w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + x / x_max as f64 * plot_w;
    let py = |y: f64| {
        let v = y.max(LOG_FLOOR).log10();
        MARGIN_TOP + (hi_dec as f64 - v) / (hi_dec - lo_dec) as f64 * plot_h
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"12\">\n",
        w = opts.width,
        h = opts.height
    ));
    out.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        opts.width, opts.height
    ));
    if !opts.title.is_empty() {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" \
             fill=\"#222222\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            xml_escape(&opts.title)
        ));
    }

    // Horizontal decade gridlines with their labels.
    let dec_step = (((hi_dec - lo_dec) as f64 / 10.0).ceil() as i32).max(1);
    let mut exp = lo_dec;
    while exp <= hi_dec {
        let y = py(10f64.powi(exp));
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#333333\">1e{exp}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        ));
        exp += dec_step;
    }

    // X ticks.
    let step = nice_step((x_max as f64 / 6.0).max(1.0));
    let mut tick = 0.0;
    while tick <= x_max as f64 {
        let x = px(tick);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#333333\" stroke-width=\"1\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#333333\">{}</text>\n",
            MARGIN_TOP + plot_h + 18.0,
            tick as usize
        ));
        tick += step;
    }

    // Axes.
    out.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" \
         stroke=\"#333333\" stroke-width=\"1\"/>\n",
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h
    ));
    out.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" \
         stroke=\"#333333\" stroke-width=\"1\"/>\n",
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        b = MARGIN_TOP + plot_h
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#333333\">iteration</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        height - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{mid:.2}\" text-anchor=\"middle\" fill=\"#333333\" \
         transform=\"rotate(-90 16 {mid:.2})\">error</text>\n",
        mid = MARGIN_TOP + plot_h / 2.0
    ));

    // Curves.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let dash = if s.dashed {
            " stroke-dasharray=\"6 3\""
        } else {
            ""
        };
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x as f64), py(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} \
             points=\"{}\"/>\n",
            coords.join(" ")
        ));
    }

    // Legend.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = MARGIN_TOP + 10.0 + 18.0 * idx as f64;
        let dash = if s.dashed {
            " stroke-dasharray=\"6 3\""
        } else {
            ""
        };
        out.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y:.2}\" x2=\"{x2:.2}\" y2=\"{y:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
            x1 = width - MARGIN_RIGHT + 10.0,
            x2 = width - MARGIN_RIGHT + 34.0,
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#333333\">{}</text>\n",
            width - MARGIN_RIGHT + 40.0,
            y + 4.0,
            xml_escape(&s.label)
        ));
    }

    if clamped {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#777777\">values at or \
             below 1e-16 are clamped to the axis floor</text>\n",
            MARGIN_LEFT,
            height - 2.0
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: &str, values: &[f64], dashed: bool) -> PlotSeries {
        PlotSeries {
            label: label.to_string(),
            points: values.iter().copied().enumerate().collect(),
            dashed,
        }
    }

    #[test]
    fn renders_one_polyline_per_series() {
        let s = [
            series("rk", &[1.0, 0.5, 0.25], false),
            series("rkjl", &[1.0, 0.25, 0.05], false),
            series("bound", &[1.0, 0.6, 0.36], true),
        ];
        let doc = svg_document(&s, &PlotOptions::default()).unwrap();
        assert_eq!(doc.matches("<polyline").count(), 3);
        // The dashed reference appears once as a curve, once in the legend.
        assert_eq!(doc.matches("stroke-dasharray").count(), 2);
        for label in ["rk", "rkjl", "bound"] {
            assert!(doc.contains(&format!(">{label}</text>")));
        }
        assert!(doc.contains(">iteration</text>"));
        assert!(doc.contains(">error</text>"));
    }

    #[test]
    fn output_is_deterministic() {
        let s = [series("rk", &[3.0, 1.0, 0.3, 0.1], false)];
        let opts = PlotOptions {
            title: "decay".into(),
            ..PlotOptions::default()
        };
        assert_eq!(
            svg_document(&s, &opts).unwrap(),
            svg_document(&s, &opts).unwrap()
        );
    }

    #[test]
    fn zero_values_trigger_the_clamp_note() {
        let s = [series("rk", &[1.0, 0.0], false)];
        let doc = svg_document(&s, &PlotOptions::default()).unwrap();
        assert!(doc.contains("clamped"));
        let fine = [series("rk", &[1.0, 0.5], false)];
        let doc = svg_document(&fine, &PlotOptions::default()).unwrap();
        assert!(!doc.contains("clamped"));
    }

    #[test]
    fn decade_labels_cover_the_data_range() {
        let s = [series("rk", &[1.0, 1e-3], false)];
        let doc = svg_document(&s, &PlotOptions::default()).unwrap();
        assert!(doc.contains(">1e0</text>"));
        assert!(doc.contains(">1e-3</text>"));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(svg_document(&[], &PlotOptions::default()).is_err());
        let empty = [PlotSeries {
            label: "rk".into(),
            points: vec![],
            dashed: false,
        }];
        assert!(svg_document(&empty, &PlotOptions::default()).is_err());
        let nan = [series("rk", &[f64::NAN], false)];
        assert!(svg_document(&nan, &PlotOptions::default()).is_err());
        let tiny = PlotOptions {
            width: 100,
            height: 100,
            ..PlotOptions::default()
        };
        assert!(svg_document(&[series("rk", &[1.0], false)], &tiny).is_err());
    }

    #[test]
    fn titles_are_escaped_and_shown() {
        let s = [series("rk", &[1.0, 0.5], false)];
        let opts = PlotOptions {
            title: "a < b".into(),
            ..PlotOptions::default()
        };
        let doc = svg_document(&s, &opts).unwrap();
        assert!(doc.contains("a &lt; b"));
    }
}
