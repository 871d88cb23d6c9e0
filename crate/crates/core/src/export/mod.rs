//! Output artifacts: KML placemarks, Graphviz DOT networks, SVG histograms
//! and CSV tables.

mod csv;
mod dot;
mod kml;
mod svg;
mod xml;

pub use self::csv::{crosstab_csv, events_csv, frequency_csv, network_csv};
pub use dot::{dot_unescape, to_dot};
pub use kml::{to_kml, KmlExport, Unlocated};
pub use svg::{to_histogram_svg, HistogramOptions, SvgError};
pub use xml::{escape_text, is_xml_char};

/// Formats a number in plain decimal: `2.0`, `12.487339`, `0.0000001`.
pub(crate) fn decimal(x: f64) -> String {
    let short = format!("{x:?}");
    if short.contains('e') {
        format!("{x}")
    } else {
        short
    }
}
