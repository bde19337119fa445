use super::NetworkError;
use serde::{Deserialize, Serialize};

/// Mean Earth radius of the spherical model, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Ratio of navigational to straight-line distance on rivers.
pub const RIVER_SINUOSITY: f64 = 1.8;

/// Latitude/longitude in decimal degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coords {
    pub lat: f64,
    pub lon: f64,
}

impl Coords {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn check(self) -> Result<Self, NetworkError> {
        let ok = self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon);
        if ok {
            Ok(self)
        } else {
            Err(NetworkError::InvalidCoords {
                lat: self.lat,
                lon: self.lon,
            })
        }
    }
}

/// Great-circle distance (haversine) in km.
pub fn geodesic_distance(a: Coords, b: Coords) -> Result<f64, NetworkError> {
    let a = a.check()?;
    let b = b.check()?;
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    // clamp guards asin against h drifting past 1 for antipodal points
    Ok(2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin())
}

/// Navigational distance along a river.
pub fn river_distance(a: Coords, b: Coords) -> Result<f64, NetworkError> {
    Ok(geodesic_distance(a, b)? * RIVER_SINUOSITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_points_are_zero() {
        let p = Coords::new(0.0, 0.0);
        assert_eq!(geodesic_distance(p, p).unwrap(), 0.0);
        assert_eq!(river_distance(p, p).unwrap(), 0.0);
    }

    #[test]
    fn half_great_circle() {
        // pi * R
        let d = geodesic_distance(Coords::new(0.0, 0.0), Coords::new(0.0, 180.0)).unwrap();
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-9);
        // the commonly quoted 20015.09 km is for R = 6371.0 km
        assert!((d - 20015.09).abs() < 0.05);
    }

    #[test]
    fn river_scales_geodesic() {
        let a = Coords::new(30.0, 114.0);
        let b = Coords::new(31.0, 115.0);
        let g = geodesic_distance(a, b).unwrap();
        assert!((river_distance(a, b).unwrap() - 1.8 * g).abs() < 1e-9);
    }

    #[test]
    fn invalid_coords_rejected() {
        assert!(geodesic_distance(Coords::new(91.0, 0.0), Coords::new(0.0, 0.0)).is_err());
        assert!(geodesic_distance(Coords::new(0.0, f64::NAN), Coords::new(0.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(
            la in -90.0f64..90.0, lo in -180.0f64..180.0,
            lb in -90.0f64..90.0, ob in -180.0f64..180.0,
        ) {
            let a = Coords::new(la, lo);
            let b = Coords::new(lb, ob);
            let ab = geodesic_distance(a, b).unwrap();
            let ba = geodesic_distance(b, a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        }

        #[test]
        fn river_distance_monotone(d1 in 0.0f64..10.0, d2 in 0.0f64..10.0) {
            let o = Coords::new(30.0, 110.0);
            let (near, far) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let rn = river_distance(o, Coords::new(30.0 + near, 110.0)).unwrap();
            let rf = river_distance(o, Coords::new(30.0 + far, 110.0)).unwrap();
            prop_assert!(rn <= rf);
        }
    }
}
