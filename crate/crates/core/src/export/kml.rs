use indexmap::IndexMap;
use serde::Serialize;

use super::decimal;
use super::xml::escape_text;
use crate::enrich::Coordinates;
use crate::event::{CodedEvent, EventKey};
use crate::grammar::CategoryPath;
use crate::text::nfc_trim;

/// An event left out of the KML because its place is unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unlocated {
    pub key: EventKey,
    pub place: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmlExport {
    pub document: String,
    pub located: usize,
    pub unlocated: Vec<Unlocated>,
}

/// One KML 2.2 placemark per event whose place is in the gazetteer, in event
/// order. The placemark description is the event's source description.
pub fn to_kml(
    events: &[CodedEvent],
    gazetteer: &IndexMap<String, Coordinates>,
    place_path: &CategoryPath,
    date_path: &CategoryPath,
) -> KmlExport {
    let mut doc = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <kml xmlns=\"http://www.opengis.net/kml/2.2\">\n\
         <Document>\n\
         <name>diario</name>\n",
    );
    let mut located = 0;
    let mut unlocated = Vec::new();
    for e in events {
        let place = e.first_value(place_path);
        let Some((place, at)) = place.and_then(|p| gazetteer.get(&nfc_trim(p)).map(|c| (p, c))) else {
            unlocated.push(Unlocated {
                key: e.key(),
                place: place.map(str::to_string),
            });
            continue;
        };
        located += 1;
        doc.push_str("<Placemark>\n");
        doc.push_str(&format!("<name>{}</name>\n", escape_text(place)));
        if let Some(when) = e.first_value(date_path) {
            doc.push_str(&format!("<TimeStamp><when>{}</when></TimeStamp>\n", escape_text(when)));
        }
        doc.push_str(&format!("<description>{}</description>\n", escape_text(&e.description)));
        doc.push_str(&format!(
            "<ExtendedData><Data name=\"event\"><value>{}</value></Data></ExtendedData>\n",
            escape_text(&e.key().to_string())
        ));
        doc.push_str(&format!(
            "<Point><coordinates>{},{}</coordinates></Point>\n",
            decimal(at.lon),
            decimal(at.lat)
        ));
        doc.push_str("</Placemark>\n");
    }
    doc.push_str("</Document>\n</kml>\n");
    KmlExport {
        document: doc,
        located,
        unlocated,
    }
}
