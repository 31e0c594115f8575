use super::Vec3;

/// Linear isometry of `R³` fixing the origin, stored as a row-major matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub m: [[f64; 3]; 3],
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Rotation by `angle` about the z-axis.
    pub fn rotation_z(angle: f64) -> Self {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `angle` about the unit vector `axis` (Rodrigues).
    pub fn rotation(axis: Vec3, angle: f64) -> Self {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let t = 1.0 - c;
        let Vec3 { x, y, z } = axis;
        Self {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    /// Half turn about the horizontal line at polar angle `beta`:
    /// `(x, y, z) ↦ (reflect_β(x, y), -z)`.
    pub fn half_turn_horizontal(beta: f64) -> Self {
        let (s, c) = (libm::sin(2.0 * beta), libm::cos(2.0 * beta));
        Self {
            m: [[c, s, 0.0], [s, -c, 0.0], [0.0, 0.0, -1.0]],
        }
    }

    #[inline]
    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Isometry { m }
    }

    pub fn inverse(&self) -> Isometry {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[j][i];
            }
        }
        Isometry { m }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entrywise difference.
    pub fn distance(&self, other: &Isometry) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }
}
