//! Combined Clarke/Park transforms with the amplitude-invariant 2/3 scaling.
//!
//! Phase `x` (a, b, c = 0, 1, 2) sits at electrical angle `θ - x·β` with
//! `β = 2π/3`. The forward map projects onto `cos` (d row) and `sin` (q row)
//! of those angles; the q row uses `+sin`, so a quadrature current leads the
//! d axis by `+π/2` in the abc waveforms.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

/// Spatial displacement between adjacent phases of a three-phase winding.
pub const BETA: f64 = 2.0 * PI / 3.0;

/// A three-phase quantity in the stationary frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AbcVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// A quantity in the synchronously rotating frame plus its zero-sequence
/// component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dq0Vector {
    pub d: f64,
    pub q: f64,
    pub zero: f64,
}

impl AbcVector {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.a * other.a + self.b * other.b + self.c * other.c
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

impl Dq0Vector {
    pub const fn new(d: f64, q: f64, zero: f64) -> Self {
        Self { d, q, zero }
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.d, self.q, self.zero]
    }

    pub fn is_finite(self) -> bool {
        self.d.is_finite() && self.q.is_finite() && self.zero.is_finite()
    }
}

macro_rules! impl_linear_ops {
    ($ty:ident { $($f:ident),+ }) => {
        impl Add for $ty {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self { $($f: self.$f + rhs.$f),+ }
            }
        }

        impl Sub for $ty {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self { $($f: self.$f - rhs.$f),+ }
            }
        }

        impl Mul<f64> for $ty {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self { $($f: self.$f * rhs),+ }
            }
        }
    };
}

impl_linear_ops!(AbcVector { a, b, c });
impl_linear_ops!(Dq0Vector { d, q, zero });

/// Electrical angles of phases a, b and c.
#[inline]
pub fn phase_angles(theta: f64) -> [f64; 3] {
    [theta, theta - BETA, theta - 2.0 * BETA]
}

/// `(cos θ_x, sin θ_x)` for the three phase angles.
#[inline]
pub(crate) fn phase_cos_sin(theta: f64) -> ([f64; 3], [f64; 3]) {
    let angles = phase_angles(theta);
    let mut cos = [0.0; 3];
    let mut sin = [0.0; 3];
    for (x, angle) in angles.iter().enumerate() {
        let (s, c) = angle.sin_cos();
        cos[x] = c;
        sin[x] = s;
    }
    (cos, sin)
}

/// Forward transform matrix, rows d, q, 0.
pub fn forward_matrix(theta: f64) -> [[f64; 3]; 3] {
    let (cos, sin) = phase_cos_sin(theta);
    let k = 2.0 / 3.0;
    [
        [k * cos[0], k * cos[1], k * cos[2]],
        [k * sin[0], k * sin[1], k * sin[2]],
        [k * 0.5, k * 0.5, k * 0.5],
    ]
}

/// Inverse transform matrix, columns d, q, 0.
pub fn inverse_matrix(theta: f64) -> [[f64; 3]; 3] {
    let (cos, sin) = phase_cos_sin(theta);
    [
        [cos[0], sin[0], 1.0],
        [cos[1], sin[1], 1.0],
        [cos[2], sin[2], 1.0],
    ]
}

pub fn park_forward(h: AbcVector, theta: f64) -> Dq0Vector {
    let (cos, sin) = phase_cos_sin(theta);
    let v = h.to_array();
    let k = 2.0 / 3.0;
    Dq0Vector {
        d: k * (v[0] * cos[0] + v[1] * cos[1] + v[2] * cos[2]),
        q: k * (v[0] * sin[0] + v[1] * sin[1] + v[2] * sin[2]),
        zero: (v[0] + v[1] + v[2]) / 3.0,
    }
}

pub fn park_inverse(h: Dq0Vector, theta: f64) -> AbcVector {
    let (cos, sin) = phase_cos_sin(theta);
    AbcVector {
        a: h.d * cos[0] + h.q * sin[0] + h.zero,
        b: h.d * cos[1] + h.q * sin[1] + h.zero,
        c: h.d * cos[2] + h.q * sin[2] + h.zero,
    }
}

/// Time derivative of `park_inverse(h(t), θ(t))` given `ḣ` and `θ̇ = ω`.
///
/// Equivalent to `park_inverse` of `(ḋ + ω q, q̇ − ω d, 0̇)`.
pub fn park_inverse_rate(h: Dq0Vector, h_rate: Dq0Vector, theta: f64, omega: f64) -> AbcVector {
    park_inverse(
        Dq0Vector {
            d: h_rate.d + omega * h.q,
            q: h_rate.q - omega * h.d,
            zero: h_rate.zero,
        },
        theta,
    )
}
