//! Dense 3x3 complex matrices with a closed-form eigensolver.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64 as C64;

pub type Vec3 = [C64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMat3 {
    pub m: [[C64; 3]; 3],
}

impl Index<(usize, usize)> for ComplexMat3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.m[i][j]
    }
}

impl Mul<Vec3> for &ComplexMat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(&v)
    }
}

impl ComplexMat3 {
    pub fn new(m: [[C64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zeros() -> Self {
        Self {
            m: [[C64::new(0.0, 0.0); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        let mut a = Self::zeros();
        for i in 0..3 {
            a.m[i][i] = C64::new(1.0, 0.0);
        }
        a
    }

    pub fn from_columns(c0: &Vec3, c1: &Vec3, c2: &Vec3) -> Self {
        let mut a = Self::zeros();
        for i in 0..3 {
            a.m[i] = [c0[i], c1[i], c2[i]];
        }
        a
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> C64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// `self - mu * I`.
    pub fn shifted(&self, mu: C64) -> Self {
        let mut a = *self;
        for i in 0..3 {
            a.m[i][i] -= mu;
        }
        a
    }

    /// Largest entry modulus, used for relative tolerances.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coefficients `(c2, c1, c0)` of the monic characteristic polynomial
    /// `mu^3 + c2 mu^2 + c1 mu + c0`.
    pub fn char_poly(&self) -> (C64, C64, C64) {
        let m = &self.m;
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2]
            - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        (-self.trace(), minors, -self.det())
    }

    /// The three eigenvalues: Cardano's formula followed by Newton polishing on
    /// the characteristic polynomial. Order is unspecified.
    pub fn eigenvalues(&self) -> [C64; 3] {
        let (b, c, d) = self.char_poly();
        let third = 1.0 / 3.0;
        let p = c - b * b * third;
        let q = b * b * b * (2.0 / 27.0) - b * c * third + d;
        let disc = (q * q * 0.25 + p * p * p / 27.0).sqrt();
        // take the larger of the two candidate radicands to avoid cancellation
        let w1 = -q * 0.5 + disc;
        let w2 = -q * 0.5 - disc;
        let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
        let u = if w.norm() == 0.0 { C64::new(0.0, 0.0) } else { w.powf(third) };
        let omega = C64::new(-0.5, 0.75f64.sqrt());
        let mut roots = [C64::new(0.0, 0.0); 3];
        let mut uk = u;
        for root in roots.iter_mut() {
            let vk = if uk.norm() == 0.0 { C64::new(0.0, 0.0) } else { -p / (uk * 3.0) };
            *root = uk + vk - b * third;
            uk *= omega;
        }
        let scale = 1.0 + self.max_abs();
        for r in roots.iter_mut() {
            for _ in 0..4 {
                let f = ((*r + b) * *r + c) * *r + d;
                let df = (*r * 3.0 + b * 2.0) * *r + c;
                if df.norm() <= 1e-300 {
                    break;
                }
                let step = f / df;
                // Newton is only trusted while it stays local; near multiple
                // roots the Cardano value is already the better estimate.
                if !(step.norm() < 1e-6 * scale) {
                    break;
                }
                *r -= step;
                if step.norm() <= 1e-16 * scale {
                    break;
                }
            }
        }
        roots
    }

    /// Null vector of `self - mu I`, from the best-conditioned cross product of
    /// two of its rows. Normalised to unit Euclidean norm.
    pub fn eigenvector(&self, mu: C64) -> Vec3 {
        let a = self.shifted(mu);
        let rows = a.m;
        let mut best = [C64::new(0.0, 0.0); 3];
        let mut best_norm = -1.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let v = cross(&rows[i], &rows[j]);
            let n = norm(&v);
            if n > best_norm {
                best = v;
                best_norm = n;
            }
        }
        if best_norm <= 0.0 {
            let r = rows
                .iter()
                .max_by(|x, y| norm(x).total_cmp(&norm(y)))
                .copied()
                .unwrap_or([C64::new(0.0, 0.0); 3]);
            // rank one: any v with r . v = 0 (bilinear) is a null vector
            let zero = C64::new(0.0, 0.0);
            best = if norm(&r) == 0.0 {
                [C64::new(1.0, 0.0), zero, zero]
            } else if r[0].norm() + r[1].norm() > 0.0 {
                [r[1], -r[0], zero]
            } else {
                [zero, r[2], -r[1]]
            };
            best_norm = norm(&best);
        }
        scale(&best, 1.0 / best_norm)
    }
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(v: &Vec3) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}

pub fn scale(v: &Vec3, k: f64) -> Vec3 {
    [v[0] * k, v[1] * k, v[2] * k]
}

/// Relative eigen-residual `|A v - mu v| / |v|`.
pub fn eigen_residual(a: &ComplexMat3, mu: C64, v: &Vec3) -> f64 {
    let av = a.mul_vec(v);
    let r = [av[0] - mu * v[0], av[1] - mu * v[1], av[2] - mu * v[2]];
    norm(&r) / norm(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triangular_matrix_eigenvalues() {
        let a = ComplexMat3::new([
            [c(1.0, 0.0), c(2.0, 1.0), c(0.0, 3.0)],
            [c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.25, -1.0)],
        ]);
        let mut ev = a.eigenvalues();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((ev[0] - c(-2.0, 0.5)).norm() < 1e-12);
        assert!((ev[1] - c(0.25, -1.0)).norm() < 1e-12);
        assert!((ev[2] - c(1.0, 0.0)).norm() < 1e-12);
        for mu in ev {
            let v = a.eigenvector(mu);
            assert!(eigen_residual(&a, mu, &v) < 1e-10);
        }
    }

    #[test]
    fn repeated_and_zero_eigenvalues() {
        assert_eq!(ComplexMat3::zeros().eigenvalues(), [c(0.0, 0.0); 3]);
        let id = ComplexMat3::identity();
        for mu in id.eigenvalues() {
            assert!((mu - c(1.0, 0.0)).norm() < 1e-12);
        }
        let v = id.eigenvector(c(1.0, 0.0));
        assert!((norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_has_unit_circle_spectrum() {
        let (cs, sn) = (0.3f64.cos(), 0.3f64.sin());
        let a = ComplexMat3::new([
            [c(cs, 0.0), c(-sn, 0.0), c(0.0, 0.0)],
            [c(sn, 0.0), c(cs, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let ev = a.eigenvalues();
        for mu in ev {
            assert!((mu.norm() - 1.0).abs() < 1e-12);
        }
        assert!(ev.iter().any(|mu| (mu - c(cs, sn)).norm() < 1e-12));
        assert!((a.det() - c(1.0, 0.0)).norm() < 1e-14);
    }

    fn arb_c() -> impl Strategy<Value = C64> {
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| C64::new(a, b))
    }

    proptest! {
        #[test]
        fn trace_and_determinant_identities(e in proptest::collection::vec(arb_c(), 9)) {
            let a = ComplexMat3::new([
                [e[0], e[1], e[2]],
                [e[3], e[4], e[5]],
                [e[6], e[7], e[8]],
            ]);
            let ev = a.eigenvalues();
            let sum = ev[0] + ev[1] + ev[2];
            prop_assert!((sum - a.trace()).norm() < 1e-9 * (1.0 + a.max_abs()));
            let prod = ev[0] * ev[1] * ev[2];
            prop_assert!((prod - a.det()).norm() < 1e-8 * (1.0 + a.max_abs()).powi(3));
            for mu in ev {
                let v = a.eigenvector(mu);
                prop_assert!(eigen_residual(&a, mu, &v) < 1e-7 * (1.0 + a.max_abs()));
            }
        }
    }
}
