use rand::Rng;
use serde::{Deserialize, Serialize};

use super::WavefieldError;

/// A location on the plate, meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangular plate `[0, L] × [0, W]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plate {
    pub length: f64,
    pub width: f64,
}

impl Default for Plate {
    fn default() -> Self {
        Self { length: 1.0, width: 1.0 }
    }
}

/// One of the four equal sub-rectangles of the plate, numbered
/// `ix + 2·iy` with `ix = [x ≥ L/2]`, `iy = [y ≥ W/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quadrant(pub u8);

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant(0), Quadrant(1), Quadrant(2), Quadrant(3)];
}

impl Plate {
    pub fn validate(&self) -> Result<(), WavefieldError> {
        if !(self.length.is_finite() && self.length > 0.0 && self.width.is_finite() && self.width > 0.0) {
            return Err(WavefieldError::InvalidScenario(format!(
                "plate dimensions must be positive, got {} x {}",
                self.length, self.width
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.length).contains(&p.x) && (0.0..=self.width).contains(&p.y)
    }

    pub fn quadrant(&self, p: &Point) -> Quadrant {
        let ix = (p.x >= 0.5 * self.length) as u8;
        let iy = (p.y >= 0.5 * self.width) as u8;
        Quadrant(ix + 2 * iy)
    }

    /// Uniform draw inside quadrant `q`.
    pub fn sample_in_quadrant<R: Rng + ?Sized>(&self, q: Quadrant, rng: &mut R) -> Point {
        let (hx, hy) = (0.5 * self.length, 0.5 * self.width);
        let ox = f64::from(q.0 % 2) * hx;
        let oy = f64::from(q.0 / 2) * hy;
        Point::new(ox + rng.random::<f64>() * hx, oy + rng.random::<f64>() * hy)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(rng.random::<f64>() * self.length, rng.random::<f64>() * self.width)
    }
}

/// Sensor positions and the lexicographically ordered list of unordered
/// transmitter/receiver pairs `(i, j)`, `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorArray {
    pub positions: Vec<Point>,
    pub pairs: Vec<(usize, usize)>,
}

impl SensorArray {
    pub fn new(positions: Vec<Point>, plate: &Plate) -> Result<Self, WavefieldError> {
        if positions.len() < 2 {
            return Err(WavefieldError::InvalidScenario(format!("need at least 2 sensors, got {}", positions.len())));
        }
        if let Some(p) = positions.iter().find(|p| !plate.contains(p)) {
            return Err(WavefieldError::InvalidScenario(format!("sensor at ({}, {}) lies outside the plate", p.x, p.y)));
        }
        let m = positions.len();
        let pairs = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        Ok(Self { positions, pairs })
    }

    /// `count` sensors placed uniformly at random.
    pub fn random<R: Rng + ?Sized>(count: usize, plate: &Plate, rng: &mut R) -> Result<Self, WavefieldError> {
        let positions = (0..count).map(|_| plate.sample_uniform(rng)).collect();
        Self::new(positions, plate)
    }

    pub fn num_sensors(&self) -> usize {
        self.positions.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_positions(&self, pair: usize) -> (Point, Point) {
        let (i, j) = self.pairs[pair];
        (self.positions[i], self.positions[j])
    }
}

/// Ground-truth damage locations of one sample.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DamageSet {
    pub locations: Vec<Point>,
}

impl DamageSet {
    pub fn new(locations: Vec<Point>) -> Self {
        Self { locations }
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn quadrants(&self, plate: &Plate) -> Vec<Quadrant> {
        self.locations.iter().map(|p| plate.quadrant(p)).collect()
    }
}

/// Transmitter → damage → receiver path length.
pub fn scatter_path(tx: &Point, rx: &Point, damage: &Point) -> f64 {
    tx.distance(damage) + damage.distance(rx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn pairs_sorted() {
        let plate = Plate::default();
        let s = SensorArray::random(8, &plate, &mut rng::stream(1, rng::tag::SENSORS, 0)).unwrap();
        assert_eq!(s.num_pairs(), 28);
        let mut sorted = s.pairs.clone();
        sorted.sort();
        assert_eq!(sorted, s.pairs);
        assert_eq!(s.pairs[0], (0, 1));
        assert_eq!(s.pairs[27], (6, 7));
    }

    #[test]
    fn rejects_outside_sensor() {
        let plate = Plate::default();
        assert!(SensorArray::new(vec![Point::new(0.1, 0.1), Point::new(1.2, 0.1)], &plate).is_err());
    }

    #[test]
    fn quadrant_sampling_stays_inside() {
        let plate = Plate { length: 2.0, width: 1.0 };
        let mut r = rng::stream(3, 0, 0);
        for q in Quadrant::ALL {
            for _ in 0..200 {
                let p = plate.sample_in_quadrant(q, &mut r);
                assert_eq!(plate.quadrant(&p), q);
                assert!(plate.contains(&p));
            }
        }
    }

    #[test]
    fn path_length() {
        let r = scatter_path(&Point::new(0.0, 0.0), &Point::new(1.0, 0.0), &Point::new(0.5, 0.0));
        assert_eq!(r, 1.0);
    }
}
