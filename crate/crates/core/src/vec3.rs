//! Small fixed-size vector types for real and complex 3-vectors.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vec3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3(self.0.map(|v| v * s))
    }

    pub fn unit(&self) -> Vec3 {
        self.scale(1.0 / self.norm())
    }

    pub fn to_complex(self) -> CVec3 {
        CVec3(self.0.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn dist(&self, o: &Vec3) -> f64 {
        (*self - *o).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

/// Complex 3-vector. `dot` is the bilinear product (no conjugation).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub fn from_parts(re: Vec3, im: Vec3) -> Self {
        CVec3([0, 1, 2].map(|i| Complex64::new(re.0[i], im.0[i])))
    }

    pub fn re(&self) -> Vec3 {
        Vec3(self.0.map(|c| c.re))
    }

    pub fn im(&self) -> Vec3 {
        Vec3(self.0.map(|c| c.im))
    }

    pub fn dot(&self, o: &CVec3) -> Complex64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn dot_real(&self, o: &Vec3) -> Complex64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn scale(&self, s: Complex64) -> CVec3 {
        CVec3(self.0.map(|v| v * s))
    }

    pub fn add_real(&self, o: &Vec3) -> CVec3 {
        CVec3([0, 1, 2].map(|i| self.0[i] + o.0[i]))
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3([0, 1, 2].map(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, o: CVec3) -> CVec3 {
        CVec3([0, 1, 2].map(|i| self.0[i] - o.0[i]))
    }
}
