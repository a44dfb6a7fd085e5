//! Location resolution against a bundled offline gazetteer, plus
//! per-class geographic aggregation.
//!
//! The gazetteer covers ~500 major cities with approximate coordinates;
//! it exists so location analytics run with no network access. The
//! [`Geocoder`] trait leaves room for an external resolver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::Error;

/// A resolved user location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub user_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub resolved_name: String,
}

/// Resolves a free-text location string to coordinates.
pub trait Geocoder {
    fn resolve(&self, location: &str) -> Option<(f64, f64, String)>;
}

const CITIES_CSV: &str = include_str!("cities.csv");

/// Aliases normalized onto gazetteer entries.
const ALIASES: &[(&str, &str)] = &[
    ("nyc", "new york"),
    ("new york city", "new york"),
    ("la", "los angeles"),
    ("sf", "san francisco"),
    ("bombay", "mumbai"),
    ("calcutta", "kolkata"),
    ("madras", "chennai"),
    ("saigon", "ho chi minh city"),
    ("peking", "beijing"),
    ("washington dc", "washington"),
    ("washington d.c.", "washington"),
];

/// City-table lookup with comma-segment fallback: `"camden, london, uk"`
/// resolves via the first segment that names a known city.
pub struct OfflineGazetteer {
    cities: BTreeMap<String, (f64, f64)>,
}

impl Default for OfflineGazetteer {
    fn default() -> Self {
        Self::bundled()
    }
}

impl OfflineGazetteer {
    pub fn bundled() -> Self {
        let mut cities = BTreeMap::new();
        for line in CITIES_CSV.lines().skip(1) {
            let mut parts = line.split(',');
            let (name, lat, lon) = match (parts.next(), parts.next(), parts.next()) {
                (Some(n), Some(a), Some(o)) => (n, a, o),
                _ => continue,
            };
            if let (Ok(lat), Ok(lon)) = (lat.parse::<f64>(), lon.parse::<f64>()) {
                debug_assert!((-90.0..=90.0).contains(&lat));
                debug_assert!((-180.0..=180.0).contains(&lon));
                cities.insert(name.to_string(), (lat, lon));
            }
        }
        OfflineGazetteer { cities }
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }

    fn lookup(&self, normalized: &str) -> Option<(f64, f64, String)> {
        let canonical = ALIASES
            .iter()
            .find(|(alias, _)| *alias == normalized)
            .map(|(_, c)| *c)
            .unwrap_or(normalized);
        self.cities
            .get(canonical)
            .map(|&(lat, lon)| (lat, lon, canonical.to_string()))
    }
}

fn normalize(location: &str) -> String {
    location
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

impl Geocoder for OfflineGazetteer {
    fn resolve(&self, location: &str) -> Option<(f64, f64, String)> {
        let whole = normalize(location);
        if let Some(hit) = self.lookup(&whole) {
            return Some(hit);
        }
        for segment in location.split([',', ';', '/', '|']) {
            let seg = normalize(segment);
            if seg.is_empty() {
                continue;
            }
            if let Some(hit) = self.lookup(&seg) {
                return Some(hit);
            }
        }
        None
    }
}

/// Resolve every record with a nonempty location. Returns the resolved
/// points and the location strings that found no match; records with no
/// location are skipped entirely.
pub fn geocode_locations(
    corpus: &Corpus,
    geocoder: &dyn Geocoder,
) -> (Vec<GeoPoint>, Vec<String>) {
    let mut points = Vec::new();
    let mut unresolved = Vec::new();
    for record in corpus.records() {
        let location = match &record.location {
            Some(l) if !l.trim().is_empty() => l,
            _ => continue,
        };
        match geocoder.resolve(location) {
            Some((latitude, longitude, resolved_name)) => points.push(GeoPoint {
                user_id: record.user_id.clone(),
                latitude,
                longitude,
                resolved_name,
            }),
            None => unresolved.push(location.clone()),
        }
    }
    (points, unresolved)
}

/// One place's aggregate for a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoAggregate {
    pub resolved_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub user_count: usize,
    pub user_ids: Vec<String>,
}

/// Group a class's resolved points by place, sorted by descending user
/// count then name.
pub fn class_geo_distribution(
    points: &[GeoPoint],
    labels: &BTreeMap<String, String>,
    class: &str,
) -> Vec<GeoAggregate> {
    let mut by_place: BTreeMap<String, GeoAggregate> = BTreeMap::new();
    for point in points {
        if labels.get(&point.user_id).map(String::as_str) != Some(class) {
            continue;
        }
        let entry = by_place
            .entry(point.resolved_name.clone())
            .or_insert_with(|| GeoAggregate {
                resolved_name: point.resolved_name.clone(),
                latitude: point.latitude,
                longitude: point.longitude,
                user_count: 0,
                user_ids: Vec::new(),
            });
        entry.user_count += 1;
        entry.user_ids.push(point.user_id.clone());
    }
    let mut rows: Vec<GeoAggregate> = by_place.into_values().collect();
    rows.sort_by(|a, b| {
        b.user_count
            .cmp(&a.user_count)
            .then_with(|| a.resolved_name.cmp(&b.resolved_name))
    });
    rows
}

/// CSV rows with both user and tweet counts per place (radius data for
/// map plotting).
pub fn geo_distribution_csv(rows: &[GeoAggregate], corpus: &Corpus) -> String {
    let mut out = String::from("resolved_name,latitude,longitude,user_count,tweet_count\n");
    for row in rows {
        let tweet_count: usize = row
            .user_ids
            .iter()
            .filter_map(|id| corpus.get(id))
            .map(|r| r.activity_tweets.len())
            .sum();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.resolved_name, row.latitude, row.longitude, row.user_count, tweet_count
        ));
    }
    out
}

/// Unavailable external resolver placeholder: the bundled gazetteer is
/// the offline default; wiring a network client means implementing
/// [`Geocoder`] and passing it in.
pub struct UnavailableGeocoder;

impl Geocoder for UnavailableGeocoder {
    fn resolve(&self, _location: &str) -> Option<(f64, f64, String)> {
        None
    }
}

impl UnavailableGeocoder {
    pub fn error() -> Error {
        Error::GeocoderUnavailable("no external geocoding service configured".into())
    }
}
