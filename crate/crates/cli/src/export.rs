//! GeoJSON and SVG output for hull regions.

use std::fmt::Write as _;

use rhull::geom::index::{point_in_polygon, polygon_area};
use rhull::geom::{BBox, Loop};
use rhull::{HullRegion, Point};
use serde_json::{json, Map, Value};

/// Canvas size of the SVG figure in pixels.
pub const CANVAS: f64 = 1000.0;

/// Flattened loop as a closed GeoJSON ring, undoing the x scaling.
fn ring(l: &Loop, tol: f64, x_scale: f64) -> Vec<Point> {
    l.flatten(tol)
        .into_iter()
        .map(|p| Point::new(p.x / x_scale, p.y))
        .collect()
}

fn ring_json(pts: &[Point]) -> Value {
    let mut coords: Vec<Value> = pts.iter().map(|p| json!([p.x, p.y])).collect();
    if let Some(first) = coords.first().cloned() {
        coords.push(first);
    }
    Value::Array(coords)
}

/// Polygons of one component: each outer ring followed by the holes it encloses.
pub fn component_polygons(region: &HullRegion, k: usize, tol: f64, x_scale: f64) -> Vec<Vec<Vec<Point>>> {
    let c = &region.components()[k];
    let outers: Vec<Vec<Point>> = c.outer.iter().map(|l| ring(l, tol, x_scale)).collect();
    let mut polys: Vec<Vec<Vec<Point>>> = outers.iter().map(|o| vec![o.clone()]).collect();
    for h in &c.holes {
        let hole = ring(h, tol, x_scale);
        let owner = (0..outers.len()).max_by(|&a, &b| {
            let inside = |o: &[Point]| hole.iter().filter(|&&p| point_in_polygon(o, p)).count();
            inside(&outers[a])
                .cmp(&inside(&outers[b]))
                .then(polygon_area(&outers[b]).total_cmp(&polygon_area(&outers[a])))
        });
        if let Some(o) = owner {
            polys[o].push(hole);
        }
    }
    polys
}

/// RFC 7946 FeatureCollection: a MultiPolygon feature per component with area, and a
/// Point feature per isolated sample. `properties` are copied onto every feature.
pub fn geojson(region: &HullRegion, properties: &Map<String, Value>, tol: f64, x_scale: f64) -> String {
    let pts = region.index().points().points();
    let mut features = Vec::new();
    for (k, c) in region.components().iter().enumerate() {
        let mut props = properties.clone();
        props.insert("component".into(), json!(k));
        props.insert("area".into(), json!(c.area / x_scale));
        let geometry = match c.isolated {
            Some(i) => json!({ "type": "Point", "coordinates": [pts[i].x / x_scale, pts[i].y] }),
            None => {
                let polys: Vec<Value> = component_polygons(region, k, tol, x_scale)
                    .iter()
                    .map(|rings| Value::Array(rings.iter().map(|r| ring_json(r)).collect()))
                    .collect();
                json!({ "type": "MultiPolygon", "coordinates": polys })
            }
        };
        features.push(json!({ "type": "Feature", "properties": props, "geometry": geometry }));
    }
    let doc = json!({ "type": "FeatureCollection", "features": features });
    let mut s = serde_json::to_string_pretty(&doc).expect("geojson serializes");
    s.push('\n');
    s
}

/// Total area of the MultiPolygon features of a GeoJSON document, holes subtracted.
pub fn multipolygon_area(doc: &Value) -> f64 {
    let ring_area = |r: &Value| {
        let pts: Vec<Point> = r
            .as_array()
            .map(|a| {
                a.iter()
                    .filter_map(|c| Some(Point::new(c[0].as_f64()?, c[1].as_f64()?)))
                    .collect()
            })
            .unwrap_or_default();
        polygon_area(&pts).abs()
    };
    let mut total = 0.0;
    for f in doc["features"].as_array().into_iter().flatten() {
        if f["geometry"]["type"] != "MultiPolygon" {
            continue;
        }
        for poly in f["geometry"]["coordinates"].as_array().into_iter().flatten() {
            for (k, r) in poly.as_array().into_iter().flatten().enumerate() {
                total += if k == 0 { ring_area(r) } else { -ring_area(r) };
            }
        }
    }
    total
}

/// SVG figure: region fill and outline, sample points, isolated points ringed.
pub fn svg(region: &HullRegion, tol: f64, x_scale: f64) -> String {
    let pts: Vec<Point> = region
        .index()
        .points()
        .iter()
        .map(|p| Point::new(p.x / x_scale, p.y))
        .collect();
    let rings: Vec<Vec<Point>> = (0..region.component_count())
        .flat_map(|k| component_polygons(region, k, tol, x_scale))
        .flatten()
        .collect();
    let mut bb = BBox::of_points(&pts).expect("non-empty sample");
    for &p in rings.iter().flatten() {
        bb.include(p);
    }
    let span = bb.width().max(bb.height()).max(f64::MIN_POSITIVE);
    let margin = 0.04 * CANVAS;
    let s = (CANVAS - 2.0 * margin) / span;
    let ox = margin + 0.5 * ((CANVAS - 2.0 * margin) - bb.width() * s);
    let oy = margin + 0.5 * ((CANVAS - 2.0 * margin) - bb.height() * s);
    let map = |p: Point| Point::new(ox + (p.x - bb.min.x) * s, CANVAS - oy - (p.y - bb.min.y) * s);
    let d: String = rings.iter().map(|r| path_data(r, &map)).collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if !d.is_empty() {
        let _ = writeln!(
            out,
            r##"<path d="{d}" fill="#9ecae1" fill-opacity="0.6" fill-rule="evenodd" stroke="#08519c" stroke-width="1.5"/>"##
        );
    }
    let _ = writeln!(out, r##"<g fill="#222222">"##);
    for &p in &pts {
        let q = map(p);
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, q.x, q.y);
    }
    let _ = writeln!(out, "</g>");
    if !region.isolated_points().is_empty() {
        let _ = writeln!(out, r##"<g fill="none" stroke="#cb181d" stroke-width="1.5">"##);
        for &i in region.isolated_points() {
            let q = map(pts[i]);
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="5"/>"#, q.x, q.y);
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

fn path_data(ring: &[Point], map: &dyn Fn(Point) -> Point) -> String {
    let mut d = String::new();
    for (k, &p) in ring.iter().enumerate() {
        let q = map(p);
        let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { 'M' } else { 'L' }, q.x, q.y);
    }
    if !ring.is_empty() {
        d.push_str("Z ");
    }
    d
}
