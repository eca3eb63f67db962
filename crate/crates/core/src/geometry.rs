//! Axis-aligned rectangle primitives.
//!
//! Everything here is plain `f64` arithmetic on lower-left-anchored
//! rectangles. The Hausdorff distance is computed exactly from corners; see
//! [`hausdorff_distance`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle given by its lower-left corner and its extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub dx: f64,
    pub dy: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { dx: 0.0, dy: 0.0 };

    pub fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.dx, -self.dy)
    }
}

impl Rect {
    /// Builds a rectangle, rejecting non-positive or non-finite extents.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "non-finite rectangle ({x}, {y}, {w}, {h})"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "rectangle extents must be positive, got {w} x {h}"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    /// Unchecked constructor for internal use where positivity is known.
    pub(crate) const fn raw(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Rectangle `[0, w] x [0, h]`.
    pub fn at_origin(w: f64, h: f64) -> Result<Self> {
        Self::new(0.0, 0.0, w, h)
    }

    /// Rectangle spanning `[x0, x1] x [y0, y1]`.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(x0, y0, x1 - x0, y1 - y0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn top(&self) -> f64 {
        self.y + self.h
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x, self.y),
            (self.right(), self.y),
            (self.right(), self.top()),
            (self.x, self.top()),
        ]
    }

    pub fn translated(&self, v: Vec2) -> Rect {
        Rect::raw(self.x + v.dx, self.y + v.dy, self.w, self.h)
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, s: f64) -> Rect {
        Rect::raw(self.x * s, self.y * s, self.w * s, self.h * s)
    }

    /// Euclidean distance from a point to the closed rectangle.
    pub fn distance_to_point(&self, px: f64, py: f64) -> f64 {
        let dx = (self.x - px).max(0.0).max(px - self.right());
        let dy = (self.y - py).max(0.0).max(py - self.top());
        dx.hypot(dy)
    }

    /// Area of the intersection of the two interiors.
    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.top().min(other.top()) - self.y.max(other.y);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    /// True when `other` lies inside `self`, up to an absolute slack `tol`.
    pub fn contains_rect(&self, other: &Rect, tol: f64) -> bool {
        other.x >= self.x - tol
            && other.y >= self.y - tol
            && other.right() <= self.right() + tol
            && other.top() <= self.top() + tol
    }

    /// Component-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Rect, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.w - other.w).abs() <= tol
            && (self.h - other.h).abs() <= tol
    }
}

/// `max(w/h, h/w)`; always at least 1.
pub fn aspect_ratio(r: &Rect) -> f64 {
    (r.w / r.h).max(r.h / r.w)
}

/// Full perimeter `2(w + h)`, the convention used by every reported metric.
pub fn full_perimeter(r: &Rect) -> f64 {
    2.0 * (r.w + r.h)
}

/// Half perimeter `w + h`, the per-rectangle term of the optimizer objective.
pub fn half_perimeter(r: &Rect) -> f64 {
    r.w + r.h
}

/// Smallest axis-aligned rectangle containing every input.
pub fn bounding_box<'a, I>(rects: I) -> Result<Rect>
where
    I: IntoIterator<Item = &'a Rect>,
{
    let mut it = rects.into_iter();
    let first = it.next().ok_or(Error::EmptySet)?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.right(), first.top());
    for r in it {
        x0 = x0.min(r.x);
        y0 = y0.min(r.y);
        x1 = x1.max(r.right());
        y1 = y1.max(r.top());
    }
    Ok(Rect::raw(x0, y0, x1 - x0, y1 - y0))
}

/// Hausdorff distance between two rectangles.
///
/// The distance from a point to a convex set is a convex function, so its
/// supremum over a rectangle is attained at one of the four corners. The
/// directed distances therefore reduce to a max over corners and the
/// symmetric distance to a max over all eight.
pub fn hausdorff_distance(a: &Rect, b: &Rect) -> f64 {
    let directed = |from: &Rect, to: &Rect| {
        from.corners()
            .iter()
            .map(|&(px, py)| to.distance_to_point(px, py))
            .fold(0.0_f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Shifts every rectangle by `v`.
pub fn translate(rects: &[Rect], v: Vec2) -> Vec<Rect> {
    rects.iter().map(|r| r.translated(v)).collect()
}

/// Rotates `r` by 90 degrees counterclockwise about the lower-left corner of
/// `container`, then shifts right by the container height so the rotated
/// container keeps the original lower-left corner.
pub fn rotate_rect_ccw90(r: &Rect, container: &Rect) -> Rect {
    Rect::raw(
        container.x + (container.top() - r.top()),
        container.y + (r.x - container.x),
        r.h,
        r.w,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64, y: f64, w: f64, h: f64) -> Rect {
        Rect::new(x, y, w, h).unwrap()
    }

    #[test]
    fn aspect_ratio_examples() {
        assert_eq!(aspect_ratio(&r(0.0, 0.0, 3.0, 2.0)), 1.5);
        assert_eq!(aspect_ratio(&r(0.0, 0.0, 1.0, 1.0)), 1.0);
        assert_eq!(aspect_ratio(&r(0.0, 0.0, 0.25, 4.0)), 16.0);
    }

    #[test]
    fn perimeter_examples() {
        assert_eq!(full_perimeter(&r(0.0, 0.0, 1.0, 1.0)), 4.0);
        assert_eq!(full_perimeter(&r(0.0, 0.0, 4.0, 0.25)), 8.5);
        assert_eq!(full_perimeter(&r(0.0, 0.0, 2.0, 3.0)), 10.0);
        assert_eq!(half_perimeter(&r(0.0, 0.0, 2.0, 3.0)), 5.0);
    }

    #[test]
    fn rejects_degenerate_rects() {
        assert!(Rect::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 0.0, 1.0, -1.0).is_err());
        assert!(Rect::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bounding_box_examples() {
        let unit = r(0.0, 0.0, 1.0, 1.0);
        let right = r(1.0, 0.0, 1.0, 1.0);
        assert_eq!(bounding_box(&[unit, right]).unwrap(), r(0.0, 0.0, 2.0, 1.0));
        assert_eq!(bounding_box(&[unit]).unwrap(), unit);
        let far = r(2.0, 2.0, 1.0, 1.0);
        assert_eq!(bounding_box(&[unit, far]).unwrap(), r(0.0, 0.0, 3.0, 3.0));
        assert!(matches!(bounding_box(&[]), Err(Error::EmptySet)));
    }

    #[test]
    fn hausdorff_examples() {
        let unit = r(0.0, 0.0, 1.0, 1.0);
        assert_eq!(hausdorff_distance(&unit, &unit), 0.0);
        assert_eq!(hausdorff_distance(&unit, &r(1.0, 0.0, 1.0, 1.0)), 1.0);
        let big = r(0.0, 0.0, 4.0, 4.0);
        let small = r(1.0, 1.0, 1.0, 1.0);
        let d = hausdorff_distance(&big, &small);
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn translate_examples() {
        let unit = r(0.0, 0.0, 1.0, 1.0);
        assert_eq!(translate(&[unit], Vec2::ZERO), vec![unit]);
        assert_eq!(translate(&[unit], Vec2::new(2.0, 3.0)), vec![r(2.0, 3.0, 1.0, 1.0)]);
        let v = Vec2::new(-0.3, 7.25);
        let back = translate(&translate(&[unit], v), -v);
        assert!(back[0].approx_eq(&unit, 1e-12));
    }

    #[test]
    fn rotation_keeps_lower_left_anchor() {
        let container = r(1.0, 2.0, 2.0, 1.0);
        let rc = rotate_rect_ccw90(&container, &container);
        assert!(rc.approx_eq(&r(1.0, 2.0, 1.0, 2.0), 1e-12));
        // Left half of a 2x1 container ends up as the bottom half of the 1x2 one.
        let left = r(1.0, 2.0, 1.0, 1.0);
        assert!(rotate_rect_ccw90(&left, &container).approx_eq(&r(1.0, 2.0, 1.0, 1.0), 1e-12));
        let right = r(2.0, 2.0, 1.0, 1.0);
        assert!(rotate_rect_ccw90(&right, &container).approx_eq(&r(1.0, 3.0, 1.0, 1.0), 1e-12));
    }

    #[test]
    fn overlap_area_of_touching_rects_is_zero() {
        let a = r(0.0, 0.0, 1.0, 1.0);
        assert_eq!(a.overlap_area(&r(1.0, 0.0, 1.0, 1.0)), 0.0);
        assert!((a.overlap_area(&r(0.5, 0.5, 1.0, 1.0)) - 0.25).abs() < 1e-15);
    }
}
