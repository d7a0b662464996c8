//! Stadium geodesy on a spherical Earth.
//!
//! Distances use the haversine formula. Direction of travel is the bearing
//! on *arrival* at the destination, and its sine is used as a signed
//! east-west component (positive eastbound). The jet-lag term multiplies
//! that component by `ln(1 + km)` so zero-distance legs are well-defined.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Coordinates closer than this (in degrees, per axis) count as the same point.
pub const COINCIDENT_TOLERANCE_DEG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    latitude_deg: f64,
    longitude_deg: f64,
}

impl Coordinate {
    pub fn new(latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        if !latitude_deg.is_finite() || !longitude_deg.is_finite() {
            return Err(Error::InvalidCoordinate(format!(
                "non-finite ({latitude_deg}, {longitude_deg})"
            )));
        }
        if !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(Error::InvalidCoordinate(format!(
                "latitude {latitude_deg} outside [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&longitude_deg) {
            return Err(Error::InvalidCoordinate(format!(
                "longitude {longitude_deg} outside [-180, 180]"
            )));
        }
        Ok(Self {
            latitude_deg,
            longitude_deg,
        })
    }

    pub fn latitude_deg(&self) -> f64 {
        self.latitude_deg
    }

    pub fn longitude_deg(&self) -> f64 {
        self.longitude_deg
    }

    pub fn coincides_with(&self, other: &Coordinate) -> bool {
        (self.latitude_deg - other.latitude_deg).abs() <= COINCIDENT_TOLERANCE_DEG
            && (self.longitude_deg - other.longitude_deg).abs() <= COINCIDENT_TOLERANCE_DEG
    }
}

/// Haversine great-circle distance in kilometres.
pub fn great_circle_distance(a: &Coordinate, b: &Coordinate) -> f64 {
    if a.coincides_with(b) {
        return 0.0;
    }
    let phi1 = a.latitude_deg.to_radians();
    let phi2 = b.latitude_deg.to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (b.longitude_deg - a.longitude_deg).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

fn initial_bearing(a: &Coordinate, b: &Coordinate) -> f64 {
    let phi1 = a.latitude_deg.to_radians();
    let phi2 = b.latitude_deg.to_radians();
    let dlambda = (b.longitude_deg - a.longitude_deg).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    y.atan2(x).to_degrees()
}

/// Bearing on arrival at `b` when following the great circle from `a`,
/// clockwise from north, in `[0, 360)`.
pub fn final_bearing(a: &Coordinate, b: &Coordinate) -> Result<f64> {
    if a.coincides_with(b) {
        return Err(Error::UndefinedBearing);
    }
    // The arrival heading is the reverse of the departure heading of b -> a.
    let reversed = initial_bearing(b, a) + 180.0;
    let bearing = reversed.rem_euclid(360.0);
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    Ok(if bearing >= 360.0 { 0.0 } else { bearing })
}

/// Signed east-west share of a heading: `sin(bearing)`.
pub fn east_west_component(bearing_deg: f64) -> Result<f64> {
    if !bearing_deg.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite bearing {bearing_deg}")));
    }
    Ok(bearing_deg.to_radians().sin().clamp(-1.0, 1.0))
}

/// `ln(1 + km) * east_west`.
pub fn jetlag_interaction(distance_km: f64, east_west: f64) -> Result<f64> {
    if !(distance_km >= 0.0) || !distance_km.is_finite() {
        return Err(Error::InvalidInput(format!(
            "travel distance must be finite and non-negative, got {distance_km}"
        )));
    }
    if distance_km == 0.0 {
        return Ok(0.0);
    }
    Ok(distance_km.ln_1p() * east_west)
}

/// A stadium-to-stadium leg with its derived jet-lag quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelLeg {
    pub origin: Coordinate,
    pub destination: Coordinate,
    pub distance_km: f64,
    /// Absent for zero-length legs, where no heading exists.
    pub final_bearing_deg: Option<f64>,
    pub east_west: f64,
    pub jetlag: f64,
}

impl TravelLeg {
    pub fn between(origin: Coordinate, destination: Coordinate) -> Result<Self> {
        let distance_km = great_circle_distance(&origin, &destination);
        if distance_km == 0.0 {
            return Ok(Self {
                origin,
                destination,
                distance_km,
                final_bearing_deg: None,
                east_west: 0.0,
                jetlag: 0.0,
            });
        }
        let bearing = final_bearing(&origin, &destination)?;
        let east_west = east_west_component(bearing)?;
        Ok(Self {
            origin,
            destination,
            distance_km,
            final_bearing_deg: Some(bearing),
            east_west,
            jetlag: jetlag_interaction(distance_km, east_west)?,
        })
    }

    pub fn log_distance(&self) -> f64 {
        self.distance_km.ln_1p()
    }
}
