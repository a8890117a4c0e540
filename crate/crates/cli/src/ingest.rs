//! Occurrence tables from CSV (plain `x,y` or GBIF columns) and GeoJSON point collections.

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use rhull::{Point, PointSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occurrence {
    pub id: Option<String>,
    pub x: f64,
    pub y: f64,
    pub date: Option<NaiveDate>,
    pub species: Option<String>,
}

/// A row that was skipped or altered. `line` is the CSV line, or the 1-based feature
/// number for GeoJSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Filters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_from: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_to: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<String>,
}

impl Filters {
    fn active(&self) -> bool {
        self.date_from.is_some() || self.date_to.is_some() || self.species.is_some()
    }

    fn check(&self, row: &Occurrence) -> Result<(), String> {
        if self.date_from.is_some() || self.date_to.is_some() {
            let Some(d) = row.date else {
                return Err("no date; excluded by date filter".into());
            };
            if self.date_from.is_some_and(|f| d < f) || self.date_to.is_some_and(|t| d > t) {
                return Err(format!("date {d} outside filter range"));
            }
        }
        if let Some(s) = &self.species {
            if row.species.as_deref().map(str::trim) != Some(s.trim()) {
                return Err("species does not match filter".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Geojson,
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("geojson") | Some("json") => Format::Geojson,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccurrenceTable {
    pub rows: Vec<Occurrence>,
    pub diagnostics: Vec<Diagnostic>,
    pub duplicates_removed: usize,
    pub filtered_out: usize,
}

impl OccurrenceTable {
    /// Planar points. With `equirect`, x is multiplied by `cos(mean latitude)`, which is
    /// returned as the scale factor.
    pub fn point_set(&self, equirect: bool) -> CliResult<(PointSet, f64)> {
        let scale = if equirect {
            let lat = self.rows.iter().map(|r| r.y).sum::<f64>() / self.rows.len() as f64;
            lat.to_radians().cos()
        } else {
            1.0
        };
        if !(scale > 0.0) {
            return Err(CliError::Usage("equirectangular scaling needs latitudes inside (-90, 90)".into()));
        }
        let pts = self.rows.iter().map(|r| Point::new(r.x * scale, r.y)).collect();
        Ok((PointSet::new(pts)?, scale))
    }

    fn finish(mut rows: Vec<(usize, Occurrence)>, mut diagnostics: Vec<Diagnostic>, filters: &Filters) -> CliResult<Self> {
        let mut filtered_out = 0;
        if filters.active() {
            rows.retain(|(line, row)| match filters.check(row) {
                Ok(()) => true,
                Err(message) => {
                    filtered_out += 1;
                    diagnostics.push(Diagnostic { line: *line, message });
                    false
                }
            });
        }
        let mut seen = HashSet::new();
        let mut duplicates_removed = 0;
        rows.retain(|(line, row)| {
            if seen.insert((row.x.to_bits(), row.y.to_bits())) {
                true
            } else {
                duplicates_removed += 1;
                diagnostics.push(Diagnostic {
                    line: *line,
                    message: format!("duplicate coordinate ({}, {}) dropped", row.x, row.y),
                });
                false
            }
        });
        if rows.is_empty() {
            return Err(CliError::EmptyAfterFilter);
        }
        diagnostics.sort_by_key(|d| d.line);
        Ok(OccurrenceTable {
            rows: rows.into_iter().map(|(_, r)| r).collect(),
            diagnostics,
            duplicates_removed,
            filtered_out,
        })
    }
}

pub fn ingest(path: &Path, format: Option<Format>, filters: &Filters) -> CliResult<OccurrenceTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Csv => parse_csv(&text, filters),
        Format::Geojson => parse_geojson(&text, filters),
    }
}

/// Dates such as `2016-05-03`, `2016-05-03T10:00:00`, `2016-05`, `2016`, or the start of
/// an interval `2016-05-01/2016-05-10`. Partial dates map to their first day.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim().split('/').next()?.trim();
    let head = s.get(..10).unwrap_or(s);
    if let Ok(d) = NaiveDate::parse_from_str(head, "%Y-%m-%d") {
        return Some(d);
    }
    let mut parts = s.splitn(3, '-');
    let year: i32 = parts.next()?.parse().ok()?;
    let month: u32 = match parts.next() {
        Some(m) => m.get(..2).unwrap_or(m).parse().ok()?,
        None => 1,
    };
    NaiveDate::from_ymd_opt(year, month, 1)
}

fn detect_delimiter(header: &str) -> u8 {
    [b',', b'\t', b';']
        .into_iter()
        .max_by_key(|&d| (header.bytes().filter(|&b| b == d).count(), d == b','))
        .unwrap_or(b',')
}

fn column(headers: &[String], names: &[&str]) -> Option<usize> {
    names
        .iter()
        .find_map(|n| headers.iter().position(|h| h == n))
}

pub fn parse_csv(text: &str, filters: &Filters) -> CliResult<OccurrenceTable> {
    let first = text.lines().next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(first))
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    let ix = column(&headers, &["x", "decimallongitude", "longitude", "lon"]);
    let iy = column(&headers, &["y", "decimallatitude", "latitude", "lat"]);
    let (Some(ix), Some(iy)) = (ix, iy) else {
        return Err(CliError::Parse {
            line: 1,
            message: "header needs x,y or decimalLongitude,decimalLatitude columns".into(),
        });
    };
    let idate = column(&headers, &["eventdate", "date"]);
    let ispecies = column(&headers, &["species"]);
    let iid = column(&headers, &["id", "gbifid", "occurrenceid"]);

    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).map(str::trim).filter(|s| !s.is_empty());
        let coord = |i: usize, name: &str| -> Result<f64, String> {
            let s = field(i).ok_or_else(|| format!("missing {name}"))?;
            let v: f64 = s.parse().map_err(|_| format!("unparseable {name} {s:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite {name}"))
            }
        };
        let (x, y) = match (coord(ix, "x"), coord(iy, "y")) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(m), _) | (_, Err(m)) => {
                diagnostics.push(Diagnostic { line, message: m });
                continue;
            }
        };
        let date = match idate.and_then(field) {
            Some(s) => {
                let d = parse_date(s);
                if d.is_none() {
                    diagnostics.push(Diagnostic {
                        line,
                        message: format!("unparseable date {s:?}"),
                    });
                }
                d
            }
            None => None,
        };
        rows.push((
            line,
            Occurrence {
                id: iid.and_then(field).map(str::to_string),
                x,
                y,
                date,
                species: ispecies.and_then(field).map(str::to_string),
            },
        ));
    }
    OccurrenceTable::finish(rows, diagnostics, filters)
}

pub fn parse_geojson(text: &str, filters: &Filters) -> CliResult<OccurrenceTable> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let features = match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc["features"].as_array().cloned().unwrap_or_default(),
        Some("Feature") => vec![doc.clone()],
        _ => {
            return Err(CliError::Parse {
                line: 1,
                message: "expected a GeoJSON Feature or FeatureCollection".into(),
            })
        }
    };
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (k, f) in features.iter().enumerate() {
        let line = k + 1;
        let geom = &f["geometry"];
        let coords = match geom.get("type").and_then(Value::as_str) {
            Some("Point") => geom["coordinates"].as_array(),
            other => {
                diagnostics.push(Diagnostic {
                    line,
                    message: format!("geometry {} is not a Point", other.unwrap_or("null")),
                });
                continue;
            }
        };
        let xy = coords.and_then(|c| Some((c.first()?.as_f64()?, c.get(1)?.as_f64()?)));
        let Some((x, y)) = xy.filter(|(x, y)| x.is_finite() && y.is_finite()) else {
            diagnostics.push(Diagnostic {
                line,
                message: "point coordinates missing or invalid".into(),
            });
            continue;
        };
        let props = &f["properties"];
        let text_prop = |names: &[&str]| {
            names.iter().find_map(|n| match &props[*n] {
                Value::String(s) => Some(s.clone()),
                Value::Number(v) => Some(v.to_string()),
                _ => None,
            })
        };
        let id = match &f["id"] {
            Value::String(s) => Some(s.clone()),
            Value::Number(v) => Some(v.to_string()),
            _ => text_prop(&["id", "gbifID"]),
        };
        rows.push((
            line,
            Occurrence {
                id,
                x,
                y,
                date: text_prop(&["eventDate", "date"]).and_then(|s| parse_date(&s)),
                species: text_prop(&["species"]),
            },
        ));
    }
    OccurrenceTable::finish(rows, diagnostics, filters)
}
