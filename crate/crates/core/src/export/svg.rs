use thiserror::Error;

use super::decimal;
use super::xml::escape_text;
use crate::analyze::FrequencyTable;

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramOptions {
    pub title: String,
    /// Pixel height of the tallest bar.
    pub plot_height: f64,
    pub bar_width: f64,
    pub bar_gap: f64,
}

impl Default for HistogramOptions {
    fn default() -> Self {
        HistogramOptions {
            title: String::new(),
            plot_height: 300.0,
            bar_width: 40.0,
            bar_gap: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("cannot draw an empty table")]
    Empty,
    #[error("no row has a positive value")]
    NothingToDraw,
}

const MARGIN_TOP: f64 = 40.0;
const MARGIN_LEFT: f64 = 60.0;
const LABEL_SPACE: f64 = 120.0;

/// Bar chart with one `rect` per row, heights proportional to the
/// normalised value where present and to the count otherwise.
pub fn to_histogram_svg(table: &FrequencyTable, options: &HistogramOptions) -> Result<String, SvgError> {
    if table.rows.is_empty() {
        return Err(SvgError::Empty);
    }
    let values: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.normalized.unwrap_or(r.count as f64))
        .collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 || !max.is_finite() {
        return Err(SvgError::NothingToDraw);
    }
    let n = values.len() as f64;
    let width = MARGIN_LEFT + n * (options.bar_width + options.bar_gap) + options.bar_gap;
    let height = MARGIN_TOP + options.plot_height + LABEL_SPACE;
    let baseline = MARGIN_TOP + options.plot_height;
    let axis = if table.rows.iter().any(|r| r.normalized.is_some()) {
        "normalized count"
    } else {
        "count"
    };

    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        decimal(width),
        decimal(height),
        decimal(width),
        decimal(height)
    );
    out.push_str(&format!("<title>{}</title>\n", escape_text(&options.title)));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n",
        decimal(MARGIN_LEFT),
        escape_text(&options.title)
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>\n",
        decimal(MARGIN_TOP + options.plot_height / 2.0),
        decimal(MARGIN_TOP + options.plot_height / 2.0),
        axis
    ));
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{w}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = decimal(MARGIN_LEFT),
        b = decimal(baseline),
        w = decimal(width)
    ));
    for (i, (row, value)) in table.rows.iter().zip(&values).enumerate() {
        let h = value / max * options.plot_height;
        let x = MARGIN_LEFT + options.bar_gap + i as f64 * (options.bar_width + options.bar_gap);
        let label = escape_text(&FrequencyTable::label(row));
        out.push_str(&format!(
            "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"steelblue\"><title>{}: {}</title></rect>\n",
            decimal(x),
            decimal(baseline - h),
            decimal(options.bar_width),
            decimal(h),
            label,
            decimal(*value)
        ));
        let cx = x + options.bar_width / 2.0;
        let ly = baseline + 12.0;
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" transform=\"rotate(-45 {} {})\">{}</text>\n",
            decimal(cx),
            decimal(ly),
            decimal(cx),
            decimal(ly),
            label
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
