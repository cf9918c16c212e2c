//! Local coordinate frames.
//!
//! A [`Rotation3`] maps components in the old frame to components in the new
//! one: row `a` is the new axis `a` written in old coordinates, and a tensor
//! index transforms as `T'_a = Σ_b R_ab T_b`. Euler angles follow the
//! z, x′, z″ sequence, `R = R_z(ψ) R_x(θ) R_z(φ)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    /// Angles reduced into `[0, 2π)`.
    pub fn new(phi: f64, theta: f64, psi: f64) -> Result<Self> {
        if !(phi.is_finite() && theta.is_finite() && psi.is_finite()) {
            return param("Euler angles must be finite");
        }
        Ok(Self {
            phi: canonical(phi),
            theta: canonical(theta),
            psi: canonical(psi),
        })
    }

    pub fn sin_theta(&self) -> f64 {
        self.theta.sin()
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.phi, self.theta, self.psi]
    }
}

fn canonical(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation3(pub [[f64; 3]; 3]);

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Checks `RᵀR = I` and `det R = 1` within 1e-12.
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        let r = Rotation3(m);
        if r.orthogonality_defect() > ORTHO_TOL || (r.det() - 1.0).abs() > ORTHO_TOL {
            return param("matrix is not a proper rotation");
        }
        Ok(r)
    }

    /// Frame change about the local z axis.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation3([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Frame change about the local x axis; `about_x(π/2)` sends the z axis to y.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation3([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
    }

    /// Frame change about the local y axis; `about_y(π/4)` gives the new axes
    /// x′ = (x+z)/√2 and z′ = (z−x)/√2.
    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// Builds the rotation whose rows are the given orthonormal axes.
    pub fn from_axes(x: [f64; 3], y: [f64; 3], z: [f64; 3]) -> Result<Self> {
        Self::new([x, y, z])
    }

    pub fn from_euler(e: &EulerAngles) -> Self {
        Self::about_z(e.psi) * Self::about_x(e.theta) * Self::about_z(e.phi)
    }

    /// Inverse of [`Rotation3::from_euler`], angles in `[0, 2π)`.
    pub fn to_euler(&self) -> EulerAngles {
        let m = &self.0;
        let theta = m[2][2].clamp(-1.0, 1.0).acos();
        let (phi, psi) = if theta.sin() > 1e-12 {
            (m[2][0].atan2(-m[2][1]), m[0][2].atan2(m[1][2]))
        } else {
            // gimbal lock: only φ ± ψ is defined, put it all in φ
            (m[0][1].atan2(m[0][0]), 0.0)
        };
        EulerAngles {
            phi: canonical(phi),
            theta: canonical(theta),
            psi: canonical(psi),
        }
    }

    pub fn row(&self, a: usize) -> [f64; 3] {
        self.0[a]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[j][i];
            }
        }
        Rotation3(t)
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// max |(RᵀR − I)_ij|
    pub fn orthogonality_defect(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.0[i][j] - target).abs());
            }
        }
        worst
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

impl std::ops::Mul for Rotation3 {
    type Output = Rotation3;

    fn mul(self, rhs: Rotation3) -> Rotation3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Rotation3(out)
    }
}

/// One local frame per observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSet(Vec<Rotation3>);

impl FrameSet {
    pub fn new(frames: Vec<Rotation3>) -> Result<Self> {
        if frames.is_empty() {
            return param("frame set must not be empty");
        }
        for r in &frames {
            Rotation3::new(r.0)?;
        }
        Ok(Self(frames))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Rotation3::IDENTITY; n])
    }

    pub fn from_euler(angles: &[EulerAngles]) -> Self {
        Self(angles.iter().map(Rotation3::from_euler).collect())
    }

    pub fn euler_angles(&self) -> Vec<EulerAngles> {
        self.0.iter().map(Rotation3::to_euler).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rotations(&self) -> &[Rotation3] {
        &self.0
    }

    pub fn get(&self, site: usize) -> &Rotation3 {
        &self.0[site]
    }

    /// Applies `other` after `self` on every site.
    pub fn then(&self, other: &FrameSet) -> Result<FrameSet> {
        if self.len() != other.len() {
            return param("frame sets of different sizes");
        }
        Ok(FrameSet(self.0.iter().zip(&other.0).map(|(a, b)| *b * *a).collect()))
    }
}
