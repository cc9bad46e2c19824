//! Outage-region geometry on the ground plane.
//!
//! The set of true positions that meet the target rate at a given power is a
//! sphere of radius `R` around the antenna. Its trace on the ground is a circle
//! of radius `c = sqrt(R^2 - d^2)` centred below the antenna. The outage
//! region of a user is the part of its uncertainty disk (radius `r`, centre at
//! distance `b` from that circle's centre) lying outside the circle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// arccos arguments within this distance of +-1 are clamped.
pub const ACOS_CLAMP_TOLERANCE: f64 = 1e-12;

/// Relative threshold below which the two centres are treated as coincident.
pub const CONCENTRIC_TOLERANCE: f64 = 1e-12;

/// Reduced 2-D coverage problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageProblem {
    /// Distance between the disk centre and the coverage-circle centre, m.
    pub b: f64,
    /// Uncertainty radius, m.
    pub r: f64,
    /// Ground coverage radius, m.
    pub c: f64,
}

impl CoverageProblem {
    pub fn new(b: f64, r: f64, c: f64) -> Result<Self> {
        let p = Self { b, r, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.b >= 0.0
            && self.r > 0.0
            && self.c >= 0.0
            && self.b.is_finite()
            && self.r.is_finite()
            && self.c.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "coverage problem needs b >= 0, r > 0, c >= 0 (got b={}, r={}, c={})",
                self.b, self.r, self.c
            )))
        }
    }

    pub fn disk_area(&self) -> f64 {
        PI * self.r * self.r
    }
}

/// Which piece of the outage-area formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Coverage circle contains the disk.
    Covered,
    /// Circle and disk are disjoint (or externally tangent).
    Uncovered,
    /// Coverage circle lies inside the disk.
    CircleInside,
    /// Centres coincide.
    Concentric,
    /// Boundaries cross at two points.
    Intersecting,
}

/// Intermediate quantities of the outage-area computation.
///
/// Angles and partial areas are only meaningful in the
/// [`Regime::Intersecting`] case and are zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageGeometry {
    pub regime: Regime,
    /// Half-angle at the coverage-circle centre, rad.
    pub alpha: f64,
    /// Angle at the disk centre between the centre line and an intersection point, rad.
    pub beta: f64,
    /// Coverage-circle sector of half-angle `alpha`.
    pub s1: f64,
    /// Two triangles spanned by the centres and the intersection points.
    pub s2: f64,
    /// Covered part of the disk sector, `s1 - s2`.
    pub s3: f64,
    /// Outage area.
    pub s4: f64,
}

impl OutageGeometry {
    fn trivial(regime: Regime, s4: f64) -> Self {
        Self { regime, alpha: 0.0, beta: 0.0, s1: 0.0, s2: 0.0, s3: 0.0, s4 }
    }
}

/// Ground radius of the equal-rate sphere of radius `sphere` for antenna height `height`.
pub fn ground_radius(sphere: f64, height: f64) -> Result<f64> {
    if !(height >= 0.0) {
        return Err(Error::Domain(format!("height {height} must be >= 0")));
    }
    if !(sphere >= height) {
        return Err(Error::InfeasibleSphere { radius: sphere, height });
    }
    Ok(((sphere - height) * (sphere + height)).sqrt())
}

/// Sphere radius whose ground trace has radius `ground`.
pub fn sphere_radius(ground: f64, height: f64) -> f64 {
    ground.hypot(height)
}

/// Checks that a cosine computed from side lengths lies in [-1, 1] up to
/// [`ACOS_CLAMP_TOLERANCE`].
fn check_cosine(arg: f64, what: &str) -> Result<()> {
    if arg.abs() <= 1.0 + ACOS_CLAMP_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what}: arccos argument {arg} outside [-1, 1]")))
    }
}

/// Area of the triangle with the given side lengths.
///
/// Kahan's rearrangement of Heron's formula, accurate for needle-shaped
/// triangles.
pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let k = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * k.max(0.0).sqrt()
}

/// Full outage-area computation with all intermediate terms.
pub fn outage_geometry(p: &CoverageProblem) -> Result<OutageGeometry> {
    p.validate()?;
    let CoverageProblem { b, r, c } = *p;
    let disk = p.disk_area();

    if c >= b + r {
        return Ok(OutageGeometry::trivial(Regime::Covered, 0.0));
    }
    if b < CONCENTRIC_TOLERANCE * r.max(1.0) {
        let s4 = if c < r { disk - PI * c * c } else { 0.0 };
        return Ok(OutageGeometry::trivial(Regime::Concentric, s4));
    }
    if b >= r && c <= b - r {
        return Ok(OutageGeometry::trivial(Regime::Uncovered, disk));
    }
    if b < r && c + b <= r {
        return Ok(OutageGeometry::trivial(Regime::CircleInside, disk - PI * c * c));
    }

    // Both angles share the triangle (b, c, r); S2 = b c sin(alpha) = b r sin(beta).
    // atan2 keeps them accurate where arccos of a near-unit cosine would not.
    let s2 = 2.0 * heron(b, c, r);
    let alpha_num = (c - r) * (c + r) + b * b;
    let beta_num = (b - c) * (b + c) + r * r;
    check_cosine(alpha_num / (2.0 * b * c), "alpha")?;
    check_cosine(beta_num / (2.0 * b * r), "beta")?;
    let alpha = (2.0 * s2).atan2(alpha_num);
    let beta = (2.0 * s2).atan2(beta_num);
    let s1 = alpha * c * c;
    let s3 = s1 - s2;
    let s4 = ((PI - beta) * r * r - s3).clamp(0.0, disk);
    Ok(OutageGeometry { regime: Regime::Intersecting, alpha, beta, s1, s2, s3, s4 })
}

/// Area of the uncertainty disk outside the coverage circle, m^2.
pub fn outage_area(p: &CoverageProblem) -> Result<f64> {
    outage_geometry(p).map(|g| g.s4)
}

/// Fraction of the uncertainty disk in outage.
pub fn outage_fraction(p: &CoverageProblem) -> Result<f64> {
    Ok((outage_area(p)? / p.disk_area()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `phi - sin(phi)`, by series for small `phi`.
    fn phi_minus_sin(phi: f64) -> f64 {
        if phi > 0.1 {
            return phi - phi.sin();
        }
        let p2 = phi * phi;
        let (mut term, mut sum) = (phi * p2 / 6.0, 0.0);
        for k in 0..8 {
            sum += term;
            term *= -p2 / (((2 * k + 4) * (2 * k + 5)) as f64);
        }
        sum
    }

    /// Textbook lens area of two intersecting circles, as the sum of the two
    /// circular segments cut off by the common chord.
    fn lens_area(b: f64, r: f64, c: f64) -> f64 {
        let s = 0.5 * (b + r + c);
        let tri = (s * (s - b) * (s - r) * (s - c)).max(0.0).sqrt();
        let half_chord = 2.0 * tri / b;
        let disk_half = half_chord.atan2((b * b + r * r - c * c) / (2.0 * b));
        let cov_half = half_chord.atan2((b * b + c * c - r * r) / (2.0 * b));
        0.5 * r * r * phi_minus_sin(2.0 * disk_half) + 0.5 * c * c * phi_minus_sin(2.0 * cov_half)
    }

    fn s4(b: f64, r: f64, c: f64) -> f64 {
        outage_area(&CoverageProblem::new(b, r, c).unwrap()).unwrap()
    }

    #[test]
    fn ground_and_sphere_radius() {
        assert_eq!(ground_radius(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(ground_radius(5.0, 3.0).unwrap(), 4.0);
        assert_eq!(ground_radius(5.0, 4.0).unwrap(), 3.0);
        assert!(matches!(ground_radius(2.0, 3.0), Err(Error::InfeasibleSphere { .. })));
        assert_eq!(sphere_radius(0.0, 3.0), 3.0);
        assert_eq!(sphere_radius(4.0, 3.0), 5.0);
    }

    #[test]
    fn concentric_half_area() {
        let r: f64 = 3.0;
        let got = s4(0.0, r, r / 2f64.sqrt());
        assert!((got - PI * r * r / 2.0).abs() < 1e-12);
        let frac = outage_fraction(&CoverageProblem::new(0.0, r, 0.9 * r).unwrap()).unwrap();
        assert!((frac - 0.19).abs() < 1e-12);
        assert_eq!(s4(0.0, r, 4.0), 0.0);
    }

    #[test]
    fn piecewise_regimes() {
        assert_eq!(s4(10.0, 3.0, 13.0), 0.0);
        assert_eq!(s4(10.0, 3.0, 20.0), 0.0);
        assert_eq!(s4(10.0, 3.0, 7.0), PI * 9.0);
        assert_eq!(s4(10.0, 3.0, 0.0), PI * 9.0);
        assert_eq!(s4(1.0, 3.0, 1.5), PI * 9.0 - PI * 2.25);
        assert_eq!(s4(1.0, 3.0, 0.0), PI * 9.0);
        let g = outage_geometry(&CoverageProblem::new(10.0, 3.0, 11.0).unwrap()).unwrap();
        assert_eq!(g.regime, Regime::Intersecting);
        assert!(g.alpha > 0.0 && g.alpha < PI && g.beta > 0.0 && g.beta < PI);
        assert!((g.s3 - (g.s1 - g.s2)).abs() < 1e-12);
    }

    #[test]
    fn invalid_problems() {
        assert!(CoverageProblem::new(-1.0, 1.0, 1.0).is_err());
        assert!(CoverageProblem::new(1.0, 0.0, 1.0).is_err());
        assert!(CoverageProblem::new(1.0, 1.0, -1.0).is_err());
        let raw = CoverageProblem { b: 1.0, r: f64::NAN, c: 1.0 };
        assert!(matches!(outage_area(&raw), Err(Error::Domain(_))));
    }

    #[test]
    fn cosine_tolerance_window() {
        assert!(check_cosine(1.0 + 5e-13, "t").is_ok());
        assert!(check_cosine(-1.0 - 5e-13, "t").is_ok());
        assert!(matches!(check_cosine(1.0 + 1e-9, "t"), Err(Error::Domain(_))));
    }

    #[test]
    fn continuous_across_boundaries() {
        for &(b, r) in &[(10.0, 3.0), (2.0, 3.0), (0.5, 3.0), (3.0, 3.0), (40.0, 0.5)] {
            let disk = PI * r * r;
            let mut edges = vec![b + r];
            if b >= r {
                edges.push(b - r);
            } else {
                edges.push(r - b);
            }
            for edge in edges {
                let h = 1e-9 * edge.max(1.0);
                let lo = s4(b, r, (edge - h).max(0.0));
                let hi = s4(b, r, edge + h);
                assert!((lo - hi).abs() < 1e-6 * disk, "b={b} r={r} edge={edge}: {lo} vs {hi}");
            }
        }
    }

    proptest! {
        #[test]
        fn lens_identity(b in 0.01f64..100.0, r in 0.01f64..20.0, t in 0.001f64..0.999) {
            let (lo, hi) = ((b - r).abs(), b + r);
            let c = lo + t * (hi - lo);
            let got = s4(b, r, c);
            let want = PI * r * r - lens_area(b, r, c);
            prop_assert!((got - want).abs() <= 1e-9 * (PI * r * r));
        }

        #[test]
        fn bounded_and_nonincreasing(b in 0.0f64..50.0, r in 0.01f64..10.0, c1 in 0.0f64..70.0, c2 in 0.0f64..70.0) {
            let (ca, cb) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            let a = s4(b, r, ca);
            let z = s4(b, r, cb);
            let disk = PI * r * r;
            prop_assert!((0.0..=disk).contains(&a) && (0.0..=disk).contains(&z));
            prop_assert!(z <= a + 1e-12 * disk);
        }
    }

    #[test]
    fn strictly_decreasing_when_intersecting() {
        let (b, r) = (10.0, 3.0);
        let mut prev = f64::INFINITY;
        for i in 1..1000 {
            let c = 7.0 + 6.0 * i as f64 / 1000.0;
            let v = s4(b, r, c);
            assert!(v < prev, "c={c}");
            prev = v;
        }
    }
}
