use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in plane coordinates `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

impl Window {
    pub fn new(a_min: f64, a_max: f64, b_min: f64, b_max: f64) -> Result<Self> {
        let w = Self {
            a_min,
            a_max,
            b_min,
            b_max,
        };
        if ![a_min, a_max, b_min, b_max].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("plane window".into()));
        }
        if !(a_max > a_min && b_max > b_min) {
            return Err(Error::Degenerate("plane window has zero area".into()));
        }
        Ok(w)
    }

    pub fn area(&self) -> f64 {
        (self.a_max - self.a_min) * (self.b_max - self.b_min)
    }

    pub fn diameter(&self) -> f64 {
        (self.a_max - self.a_min).hypot(self.b_max - self.b_min)
    }

    /// Counter-clockwise corners starting at `(a_min, b_min)`.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.a_min, self.b_min],
            [self.a_max, self.b_min],
            [self.a_max, self.b_max],
            [self.a_min, self.b_max],
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.a_min && p[0] <= self.a_max && p[1] >= self.b_min && p[1] <= self.b_max
    }
}

/// 2D affine slice `x(a, b) = origin + a e1 + b e2` of the input space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    pub origin: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub window: Window,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

const MIN_SIN: f64 = 1e-9;

impl PlaneFrame {
    pub fn new(origin: Vec<f64>, e1: Vec<f64>, e2: Vec<f64>, window: Window) -> Result<Self> {
        let d = origin.len();
        for (what, v) in [("e1", &e1), ("e2", &e2)] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    what: if what == "e1" { "plane basis e1" } else { "plane basis e2" },
                    expected: d,
                    found: v.len(),
                });
            }
        }
        if origin.iter().chain(&e1).chain(&e2).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("plane frame".into()));
        }
        let (n1, n2) = (norm(&e1), norm(&e2));
        if n1 == 0.0 || n2 == 0.0 {
            return Err(Error::Degenerate("plane basis vector is zero".into()));
        }
        let cos = dot(&e1, &e2) / (n1 * n2);
        if (1.0 - cos * cos).max(0.0).sqrt() <= MIN_SIN {
            return Err(Error::Degenerate("plane basis vectors are parallel".into()));
        }
        Ok(Self {
            origin,
            e1,
            e2,
            window,
        })
    }

    /// Plane through three points with an orthonormal basis. The window is a
    /// square centered at the circumcenter with half-side
    /// `(1 + margin) * circumradius`.
    pub fn from_points(p1: &[f64], p2: &[f64], p3: &[f64], margin: f64) -> Result<Self> {
        let d = p1.len();
        for p in [p2, p3] {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    what: "plane point",
                    expected: d,
                    found: p.len(),
                });
            }
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::InvalidInput("margin must be a non-negative number".into()));
        }
        let u = sub(p2, p1);
        let w = sub(p3, p1);
        let (nu, nw) = (norm(&u), norm(&w));
        if nu == 0.0 || nw == 0.0 || norm(&sub(p3, p2)) == 0.0 {
            return Err(Error::Degenerate("plane points coincide".into()));
        }
        let e1: Vec<f64> = u.iter().map(|v| v / nu).collect();
        let along = dot(&w, &e1);
        let perp: Vec<f64> = w.iter().zip(&e1).map(|(x, e)| x - along * e).collect();
        let np = norm(&perp);
        if np / nw <= MIN_SIN {
            return Err(Error::Degenerate("plane points are collinear".into()));
        }
        let e2: Vec<f64> = perp.iter().map(|v| v / np).collect();
        // In-plane coordinates: p1 = (0, 0), p2 = (nu, 0), p3 = (along, np).
        let cx = 0.5 * nu;
        let cy = (along * along + np * np - nu * along) / (2.0 * np);
        let origin: Vec<f64> = (0..d).map(|i| p1[i] + cx * e1[i] + cy * e2[i]).collect();
        let h = (1.0 + margin) * cx.hypot(cy);
        Self::new(origin, e1, e2, Window::new(-h, h, -h, h)?)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn point(&self, a: f64, b: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.origin[i] + a * self.e1[i] + b * self.e2[i])
            .collect()
    }

    /// Least-squares plane coordinates of `x`.
    pub fn project(&self, x: &[f64]) -> [f64; 2] {
        let r = sub(x, &self.origin);
        let (g11, g12, g22) = (dot(&self.e1, &self.e1), dot(&self.e1, &self.e2), dot(&self.e2, &self.e2));
        let (r1, r2) = (dot(&r, &self.e1), dot(&r, &self.e2));
        let det = g11 * g22 - g12 * g12;
        [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_circumcircle() {
        let f = PlaneFrame::from_points(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], 0.1).unwrap();
        assert!((f.origin[0] - 0.5).abs() < 1e-15 && (f.origin[1] - 0.5).abs() < 1e-15);
        let side = f.window.a_max - f.window.a_min;
        assert!((side - 2.0 * 1.1 * 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(f.window.b_max - f.window.b_min, side);
    }

    #[test]
    fn high_dimensional_basis_is_orthonormal() {
        let p1: Vec<f64> = (0..17).map(|i| (i as f64).sin()).collect();
        let p2: Vec<f64> = (0..17).map(|i| (i as f64 * 0.7).cos() * 2.0).collect();
        let p3: Vec<f64> = (0..17).map(|i| i as f64 * 0.1 - 0.5).collect();
        let f = PlaneFrame::from_points(&p1, &p2, &p3, 0.1).unwrap();
        assert!((norm(&f.e1) - 1.0).abs() < 1e-12);
        assert!((norm(&f.e2) - 1.0).abs() < 1e-12);
        assert!(dot(&f.e1, &f.e2).abs() < 1e-12);
        // The circumcenter is equidistant from the three points.
        let r: Vec<f64> = [&p1, &p2, &p3].iter().map(|p| norm(&sub(p, &f.origin))).collect();
        assert!((r[0] - r[1]).abs() < 1e-9 && (r[0] - r[2]).abs() < 1e-9);
        for p in [&p1, &p2, &p3] {
            let x = f.project(p);
            let back = f.point(x[0], x[1]);
            assert!(norm(&sub(&back, p)) < 1e-9);
        }
    }

    #[test]
    fn degenerate_points() {
        assert!(PlaneFrame::from_points(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0 + 1e-12], 0.1).is_err());
        assert!(PlaneFrame::from_points(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], 0.1).is_err());
        assert!(PlaneFrame::from_points(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0], 0.1).is_err());
        let w = Window::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(PlaneFrame::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], w).is_err());
        assert!(Window::new(0.0, 0.0, 0.0, 1.0).is_err());
    }
}
