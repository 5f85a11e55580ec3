use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn horizontal_dist(self, o: Self) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Axis-aligned airspace box `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec3,
    pub upper: Vec3,
}

impl Bounds {
    pub fn new(lower: Vec3, upper: Vec3) -> crate::Result<Self> {
        if !(lower.x < upper.x && lower.y < upper.y && lower.z < upper.z) {
            return Err(crate::Error::InvalidConfig(format!(
                "bounds lower {lower:?} must be strictly below upper {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, q: Vec3) -> bool {
        q.x >= self.lower.x
            && q.x <= self.upper.x
            && q.y >= self.lower.y
            && q.y <= self.upper.y
            && q.z >= self.lower.z
            && q.z <= self.upper.z
    }

    /// Componentwise affine map of `q` onto `[0, 1]^3`.
    pub fn normalize(&self, q: Vec3) -> [f64; 3] {
        [
            (q.x - self.lower.x) / (self.upper.x - self.lower.x),
            (q.y - self.lower.y) / (self.upper.y - self.lower.y),
            (q.z - self.lower.z) / (self.upper.z - self.lower.z),
        ]
    }

    pub fn width(&self) -> f64 {
        self.upper.x - self.lower.x
    }

    pub fn depth(&self) -> f64 {
        self.upper.y - self.lower.y
    }
}
