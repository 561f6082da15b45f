//! Straight-line distance and compass bearing in the two coordinate systems
//! the pipeline supports: geodesic latitude/longitude and planar metres.

use crate::error::{PipelineError, Result};
use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Which interpretation a [`Coord`] carries. In planar mode the `lat` field
/// holds the y coordinate in metres and `lon` holds x; file formats keep the
/// same column names in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordMode {
    Geodesic,
    Planar,
}

impl std::fmt::Display for CoordMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoordMode::Geodesic => write!(f, "geodesic"),
            CoordMode::Planar => write!(f, "planar"),
        }
    }
}

impl std::str::FromStr for CoordMode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(CoordMode::Geodesic),
            "planar" => Ok(CoordMode::Planar),
            other => Err(PipelineError::Config(format!(
                "unknown coordinate mode {other:?}, expected geodesic or planar"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub lat: f64,
    pub lon: f64,
}

impl Coord {
    pub fn new(lat: f64, lon: f64) -> Self {
        Coord { lat, lon }
    }
}

/// Great-circle distance in metres on a spherical earth.
pub fn haversine_distance(a: Coord, b: Coord) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

pub fn planar_distance(a: Coord, b: Coord) -> f64 {
    let dx = b.lon - a.lon;
    let dy = b.lat - a.lat;
    (dx * dx + dy * dy).sqrt()
}

pub fn distance(mode: CoordMode, a: Coord, b: Coord) -> f64 {
    match mode {
        CoordMode::Geodesic => haversine_distance(a, b),
        CoordMode::Planar => planar_distance(a, b),
    }
}

/// Initial compass bearing from `a` to `b`, clockwise from north, in
/// `[0, 360)` degrees. Undefined for coincident points.
pub fn bearing(mode: CoordMode, a: Coord, b: Coord) -> Result<f64> {
    if a.lat == b.lat && a.lon == b.lon {
        return Err(PipelineError::Invalid(format!(
            "bearing undefined for coincident points ({}, {})",
            a.lat, a.lon
        )));
    }
    let theta = match mode {
        CoordMode::Geodesic => {
            let lat1 = a.lat.to_radians();
            let lat2 = b.lat.to_radians();
            let dlon = (b.lon - a.lon).to_radians();
            let y = dlon.sin() * lat2.cos();
            let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
            y.atan2(x).to_degrees()
        }
        CoordMode::Planar => {
            let dx = b.lon - a.lon;
            let dy = b.lat - a.lat;
            dx.atan2(dy).to_degrees()
        }
    };
    Ok(wrap_degrees(theta))
}

fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d < 0.0 {
        d += 360.0;
    }
    if d >= 360.0 {
        d = 0.0;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const METRE_PER_DEG: f64 = std::f64::consts::PI / 180.0 * EARTH_RADIUS_M;

    #[test]
    fn meridian_degree_is_about_111km() {
        let d = haversine_distance(Coord::new(0.0, 0.0), Coord::new(1.0, 0.0));
        assert!((d - METRE_PER_DEG).abs() < 1e-6, "got {d}");
        assert!((d - 111_195.0).abs() < 1.0);
    }

    #[test]
    fn equator_degree_matches_meridian_degree() {
        let d = haversine_distance(Coord::new(0.0, 0.0), Coord::new(0.0, 1.0));
        assert!((d - METRE_PER_DEG).abs() < 1e-6);
    }

    #[test]
    fn zero_distance_for_identical_points() {
        let p = Coord::new(48.85, 2.35);
        assert_eq!(haversine_distance(p, p), 0.0);
    }

    #[test]
    fn bearing_due_north_east_and_diagonal() {
        let o = Coord::new(0.0, 0.0);
        let north = bearing(CoordMode::Geodesic, o, Coord::new(1.0, 0.0)).unwrap();
        let east = bearing(CoordMode::Geodesic, o, Coord::new(0.0, 1.0)).unwrap();
        let diag = bearing(CoordMode::Geodesic, o, Coord::new(1.0, 1.0)).unwrap();
        assert_eq!(north, 0.0);
        assert!((east - 90.0).abs() < 1e-9);
        assert!((diag - 45.0).abs() < 0.2, "got {diag}");
    }

    #[test]
    fn bearing_of_coincident_points_is_an_error() {
        let p = Coord::new(10.0, 10.0);
        assert!(bearing(CoordMode::Geodesic, p, p).is_err());
        assert!(bearing(CoordMode::Planar, p, p).is_err());
    }

    #[test]
    fn planar_bearing_follows_compass_convention() {
        let o = Coord::new(0.0, 0.0);
        // +y is north, +x is east
        assert_eq!(bearing(CoordMode::Planar, o, Coord::new(1.0, 0.0)).unwrap(), 0.0);
        let e = bearing(CoordMode::Planar, o, Coord::new(0.0, 1.0)).unwrap();
        let s = bearing(CoordMode::Planar, o, Coord::new(-1.0, 0.0)).unwrap();
        let w = bearing(CoordMode::Planar, o, Coord::new(0.0, -1.0)).unwrap();
        assert!((e - 90.0).abs() < 1e-9);
        assert!((s - 180.0).abs() < 1e-9);
        assert!((w - 270.0).abs() < 1e-9);
    }

    #[test]
    fn planar_distance_is_euclidean() {
        let d = planar_distance(Coord::new(0.0, 0.0), Coord::new(3.0, 4.0));
        assert_eq!(d, 5.0);
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_nonnegative(
            lat1 in -80.0f64..80.0, lon1 in -179.0f64..179.0,
            lat2 in -80.0f64..80.0, lon2 in -179.0f64..179.0,
        ) {
            let a = Coord::new(lat1, lon1);
            let b = Coord::new(lat2, lon2);
            let ab = haversine_distance(a, b);
            let ba = haversine_distance(b, a);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-6);
        }

        #[test]
        fn bearing_stays_in_range(
            lat1 in -80.0f64..80.0, lon1 in -179.0f64..179.0,
            lat2 in -80.0f64..80.0, lon2 in -179.0f64..179.0,
        ) {
            let a = Coord::new(lat1, lon1);
            let b = Coord::new(lat2, lon2);
            prop_assume!(a != b);
            let th = bearing(CoordMode::Geodesic, a, b).unwrap();
            prop_assert!((0.0..360.0).contains(&th));
        }
    }
}
