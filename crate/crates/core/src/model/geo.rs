use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius used by every distance computation in the crate.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid coordinate lat={lat} lon={lon}")]
    InvalidPoint { lat: f64, lon: f64 },
    #[error("invalid bounding box: min must be strictly south-west of max")]
    InvalidBox,
    #[error("grid dimensions must be positive (nx={nx}, ny={ny})")]
    InvalidGrid { nx: u32, ny: u32 },
    #[error("point ({lat}, {lon}) lies outside the grid bounding box")]
    OutOfBounds { lat: f64, lon: f64 },
    #[error("bearing is undefined between identical points")]
    UndefinedBearing,
}

/// WGS84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawPoint> for GeoPoint {
    type Error = GeoError;

    fn try_from(raw: RawPoint) -> Result<Self, Self::Error> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let valid = lat.is_finite()
            && lon.is_finite()
            && (-90.0..=90.0).contains(&lat)
            && (-180.0..=180.0).contains(&lon);
        if valid {
            Ok(Self { lat, lon })
        } else {
            Err(GeoError::InvalidPoint { lat, lon })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BoundingBox {
    pub min: GeoPoint,
    pub max: GeoPoint,
}

#[derive(Deserialize)]
struct RawBox {
    min: GeoPoint,
    max: GeoPoint,
}

impl TryFrom<RawBox> for BoundingBox {
    type Error = GeoError;

    fn try_from(raw: RawBox) -> Result<Self, Self::Error> {
        BoundingBox::new(raw.min, raw.max)
    }
}

impl BoundingBox {
    pub fn new(min: GeoPoint, max: GeoPoint) -> Result<Self, GeoError> {
        if min.lat < max.lat && min.lon < max.lon {
            Ok(Self { min, max })
        } else {
            Err(GeoError::InvalidBox)
        }
    }

    /// Closed containment: points on any edge are inside.
    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.min.lat && p.lat <= self.max.lat && p.lon >= self.min.lon && p.lon <= self.max.lon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub ix: u32,
    pub iy: u32,
}

/// Regular lat/lon grid over a bounding box. `ix` runs along longitude,
/// `iy` along latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    pub bbox: BoundingBox,
    pub nx: u32,
    pub ny: u32,
}

#[derive(Deserialize)]
struct RawGrid {
    bbox: BoundingBox,
    nx: u32,
    ny: u32,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = GeoError;

    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        GridSpec::new(raw.bbox, raw.nx, raw.ny)
    }
}

impl GridSpec {
    pub fn new(bbox: BoundingBox, nx: u32, ny: u32) -> Result<Self, GeoError> {
        if nx == 0 || ny == 0 {
            return Err(GeoError::InvalidGrid { nx, ny });
        }
        let grid = Self { bbox, nx, ny };
        if grid.cell_width() > 0.0 && grid.cell_height() > 0.0 {
            Ok(grid)
        } else {
            Err(GeoError::InvalidGrid { nx, ny })
        }
    }

    pub fn cell_width(&self) -> f64 {
        (self.bbox.max.lon - self.bbox.min.lon) / f64::from(self.nx)
    }

    pub fn cell_height(&self) -> f64 {
        (self.bbox.max.lat - self.bbox.min.lat) / f64::from(self.ny)
    }

    pub fn cell_count(&self) -> usize {
        self.nx as usize * self.ny as usize
    }

    /// Row-major position of a cell (`iy * nx + ix`).
    pub fn flat(&self, c: CellIndex) -> usize {
        c.iy as usize * self.nx as usize + c.ix as usize
    }

    pub fn unflat(&self, i: usize) -> CellIndex {
        let nx = self.nx as usize;
        CellIndex { ix: (i % nx) as u32, iy: (i / nx) as u32 }
    }

    /// Lower edge of column `ix` / row `iy`. Cell boundaries are defined by
    /// these two functions alone.
    pub fn lon_edge(&self, ix: u32) -> f64 {
        self.bbox.min.lon + f64::from(ix) * self.cell_width()
    }

    pub fn lat_edge(&self, iy: u32) -> f64 {
        self.bbox.min.lat + f64::from(iy) * self.cell_height()
    }

    pub fn cell_center(&self, c: CellIndex) -> GeoPoint {
        GeoPoint {
            lat: self.lat_edge(c.iy) + self.cell_height() / 2.0,
            lon: self.lon_edge(c.ix) + self.cell_width() / 2.0,
        }
    }

    pub fn contains_cell(&self, c: CellIndex) -> bool {
        c.ix < self.nx && c.iy < self.ny
    }
}

fn axis_index(v: f64, n: u32, edge: impl Fn(u32) -> f64, extent: f64, min: f64) -> u32 {
    let mut i = ((v - min) / extent).floor().clamp(0.0, f64::from(n - 1)) as u32;
    // floor() can land one cell off when v sits on an edge; settle against
    // the exact edge values
    while i > 0 && v < edge(i) {
        i -= 1;
    }
    while i + 1 < n && v >= edge(i + 1) {
        i += 1;
    }
    i
}

/// Cell containing `p`: lower edges inclusive, upper edges exclusive, except
/// the max edge of the box which folds into the last row/column.
pub fn cell_of(p: GeoPoint, g: &GridSpec) -> Result<CellIndex, GeoError> {
    if !g.bbox.contains(p) {
        return Err(GeoError::OutOfBounds { lat: p.lat, lon: p.lon });
    }
    let ix = axis_index(p.lon, g.nx, |i| g.lon_edge(i), g.cell_width(), g.bbox.min.lon);
    let iy = axis_index(p.lat, g.ny, |i| g.lat_edge(i), g.cell_height(), g.bbox.min.lat);
    Ok(CellIndex { ix, iy })
}

pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Initial great-circle bearing in degrees, `[0, 360)`, 0 = north.
pub fn bearing(from: GeoPoint, to: GeoPoint) -> Result<f64, GeoError> {
    if from == to {
        return Err(GeoError::UndefinedBearing);
    }
    let (lat1, lat2) = (from.lat.to_radians(), to.lat.to_radians());
    let dlon = (to.lon - from.lon).to_radians();
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    let deg = y.atan2(x).to_degrees();
    let norm = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360.0 for tiny negative inputs
    Ok(if norm >= 360.0 { 0.0 } else { norm })
}

/// Point reached travelling `distance_m` from `from` on initial bearing
/// `bearing_deg`.
pub fn destination(from: GeoPoint, bearing_deg: f64, distance_m: f64) -> GeoPoint {
    let delta = distance_m / EARTH_RADIUS_M;
    let theta = bearing_deg.to_radians();
    let lat1 = from.lat.to_radians();
    let lon1 = from.lon.to_radians();
    let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * theta.cos()).asin();
    let lon2 = lon1
        + (theta.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * lat2.sin());
    GeoPoint {
        lat: lat2.to_degrees(),
        lon: (lon2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0,
    }
}

/// Distance from `p` to the nearest point of a polyline, in meters.
///
/// Each segment is projected onto a local equirectangular plane centred on
/// `p`; fine at city scale. A single-vertex path degenerates to a point.
pub fn distance_to_polyline_m(p: GeoPoint, path: &[GeoPoint]) -> f64 {
    match path {
        [] => f64::INFINITY,
        [only] => haversine_m(p, *only),
        _ => {
            // meters per degree
            let k_lat = EARTH_RADIUS_M.to_radians();
            let k_lon = k_lat * p.lat.to_radians().cos();
            let project = |q: GeoPoint| ((q.lon - p.lon) * k_lon, (q.lat - p.lat) * k_lat);
            path.windows(2)
                .map(|seg| {
                    let (ax, ay) = project(seg[0]);
                    let (bx, by) = project(seg[1]);
                    let (dx, dy) = (bx - ax, by - ay);
                    let len2 = dx * dx + dy * dy;
                    let t = if len2 == 0.0 { 0.0 } else { (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0) };
                    let (cx, cy) = (ax + t * dx, ay + t * dy);
                    (cx * cx + cy * cy).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Total length of a polyline in meters.
pub fn polyline_length_m(path: &[GeoPoint]) -> f64 {
    path.windows(2).map(|s| haversine_m(s[0], s[1])).sum()
}

/// Point at `offset_m` along a polyline, clamped to its ends.
pub fn point_along(path: &[GeoPoint], offset_m: f64) -> Option<GeoPoint> {
    let first = *path.first()?;
    let mut remaining = offset_m.max(0.0);
    for seg in path.windows(2) {
        let len = haversine_m(seg[0], seg[1]);
        if remaining <= len && len > 0.0 {
            let t = remaining / len;
            return Some(GeoPoint {
                lat: seg[0].lat + t * (seg[1].lat - seg[0].lat),
                lon: seg[0].lon + t * (seg[1].lon - seg[0].lon),
            });
        }
        remaining -= len;
    }
    Some(*path.last().unwrap_or(&first))
}
