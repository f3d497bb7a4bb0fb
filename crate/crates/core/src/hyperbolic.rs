//! Upper half-plane geometry: points, boundary points, circle inversions,
//! distances, Gromov products and the disk-model transfer.

use std::cmp::Ordering;

use num_rational::BigRational;

use crate::scalar::{Ball, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("point is not in the upper half-plane (imaginary part must be positive)")]
    NotInHalfPlane,
    #[error("circle radius must be positive")]
    NonPositiveRadius,
    #[error("circle passes through the center of inversion; its image is a line")]
    DegenerateImage,
    #[error("the boundary points coincide, so their Gromov product is infinite")]
    CoincidentPoints,
    #[error("precision too low to decide {0}")]
    Indeterminate(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn require_positive<S: Scalar>(v: &S, what: &'static str, err: GeometryError) -> Result<(), GeometryError> {
    match v.sign() {
        Some(Ordering::Greater) => Ok(()),
        Some(_) => Err(err),
        None => Err(GeometryError::Indeterminate(what)),
    }
}

/// Point `x + iy` of the upper half-plane.
#[derive(Clone, Debug)]
pub struct HPoint<S> {
    x: S,
    y: S,
}

impl<S: Scalar> HPoint<S> {
    pub fn new(x: S, y: S) -> Result<Self, GeometryError> {
        require_positive(&y, "the sign of the imaginary part", GeometryError::NotInHalfPlane)?;
        Ok(HPoint { x, y })
    }

    pub fn from_rationals(x: &BigRational, y: &BigRational, bits: usize) -> Result<Self, GeometryError> {
        Self::new(S::from_rational(x, bits), S::from_rational(y, bits))
    }

    /// The point `i`.
    pub fn i(bits: usize) -> Self {
        HPoint { x: S::from_i64(0, bits), y: S::from_i64(1, bits) }
    }

    pub fn x(&self) -> &S {
        &self.x
    }

    pub fn y(&self) -> &S {
        &self.y
    }

    pub fn to_ball(&self, bits: usize) -> HPoint<Ball> {
        HPoint { x: self.x.to_ball(bits), y: self.y.to_ball(bits) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

/// Point of the boundary `R ∪ {∞}`.
#[derive(Clone, Debug)]
pub enum BoundaryPoint<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> BoundaryPoint<S> {
    pub fn to_ball(&self, bits: usize) -> BoundaryPoint<Ball> {
        match self {
            BoundaryPoint::Finite(x) => BoundaryPoint::Finite(x.to_ball(bits)),
            BoundaryPoint::Infinity => BoundaryPoint::Infinity,
        }
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            BoundaryPoint::Finite(x) => Some(x),
            BoundaryPoint::Infinity => None,
        }
    }
}

/// Which side of an image circle is the image of the inverted disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The bounded disk.
    Inside,
    /// The complement of the open disk, including ∞.
    Outside,
}

/// Euclidean circle centered on the real axis.
#[derive(Clone, Debug)]
pub struct Circle<S> {
    center: S,
    radius: S,
}

/// Image of a circle under an inversion, with orientation.
#[derive(Clone, Debug)]
pub struct ImageCircle<S> {
    pub circle: Circle<S>,
    pub side: Side,
}

impl<S: Scalar> Circle<S> {
    pub fn new(center: S, radius: S) -> Result<Self, GeometryError> {
        require_positive(&radius, "the sign of the radius", GeometryError::NonPositiveRadius)?;
        Ok(Circle { center, radius })
    }

    pub fn from_rationals(center: &BigRational, radius: &BigRational, bits: usize) -> Result<Self, GeometryError> {
        Self::new(S::from_rational(center, bits), S::from_rational(radius, bits))
    }

    pub fn center(&self) -> &S {
        &self.center
    }

    pub fn radius(&self) -> &S {
        &self.radius
    }

    pub fn to_ball(&self, bits: usize) -> Circle<Ball> {
        Circle { center: self.center.to_ball(bits), radius: self.radius.to_ball(bits) }
    }

    /// Inversion `z -> c + r^2 / (conj(z) - c)` on boundary points.
    pub fn invert_boundary(&self, z: &BoundaryPoint<S>) -> BoundaryPoint<S> {
        match z {
            BoundaryPoint::Infinity => BoundaryPoint::Finite(self.center.clone()),
            BoundaryPoint::Finite(x) => {
                let u = x.clone() - self.center.clone();
                if u.sign() == Some(Ordering::Equal) {
                    return BoundaryPoint::Infinity;
                }
                BoundaryPoint::Finite(self.center.clone() + self.radius.square() / u)
            }
        }
    }

    /// Inversion on interior points; an orientation-reversing isometry.
    pub fn invert_point(&self, z: &HPoint<S>) -> HPoint<S> {
        let u = z.x.clone() - self.center.clone();
        let r2 = self.radius.square();
        let d = u.square() + z.y.square();
        let x = self.center.clone() + r2.clone() * u / d.clone();
        let y = r2 * z.y.clone() / d;
        HPoint { x, y }
    }

    /// Image of `other` under inversion in `self`.
    pub fn invert_circle(&self, other: &Circle<S>) -> Result<ImageCircle<S>, GeometryError> {
        let u = other.center.clone() - self.center.clone();
        let den = u.square() - other.radius.square();
        let side = match den.sign() {
            Some(Ordering::Greater) => Side::Inside,
            Some(Ordering::Less) => Side::Outside,
            Some(Ordering::Equal) => return Err(GeometryError::DegenerateImage),
            None => return Err(GeometryError::Indeterminate("whether the circle passes through the center")),
        };
        let r2 = self.radius.square();
        let center = self.center.clone() + r2.clone() * u / den.clone();
        let radius = r2 * other.radius.clone() / den.abs();
        Ok(ImageCircle { circle: Circle { center, radius }, side })
    }

    /// Whether the closed disk of `inner` lies in the open disk of `self`.
    pub fn strictly_contains(&self, inner: &Circle<S>) -> Option<bool> {
        let gap = self.radius.clone() - inner.radius.clone() - (inner.center.clone() - self.center.clone()).abs();
        decide(gap)
    }

    /// Whether the two closed disks are disjoint.
    pub fn disjoint_from(&self, other: &Circle<S>) -> Option<bool> {
        let gap = (other.center.clone() - self.center.clone()).abs() - self.radius.clone() - other.radius.clone();
        decide(gap)
    }
}

fn decide<S: Scalar>(gap: S) -> Option<bool> {
    match gap.sign()? {
        Ordering::Greater => Some(true),
        _ => Some(false),
    }
}

/// `cosh d(p, q) = 1 + |p - q|^2 / (2 y_p y_q)`, exact on the rational backend.
pub fn cosh_distance<S: Scalar>(p: &HPoint<S>, q: &HPoint<S>) -> S {
    let dx = p.x.clone() - q.x.clone();
    let dy = p.y.clone() - q.y.clone();
    let num = dx.square() + dy.square();
    let den = p.y.clone() * q.y.clone() * p.y.lift_i64(2);
    p.y.lift_i64(1) + num / den
}

/// Hyperbolic distance.
pub fn hyp_distance<S: Scalar>(p: &HPoint<S>, q: &HPoint<S>) -> Ball {
    let bits = p.y.bits();
    cosh_distance(p, q).to_ball(bits).acosh()
}

/// Gromov product `(x|y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2`.
pub fn gromov_product<S: Scalar>(x: &HPoint<S>, y: &HPoint<S>, w: &HPoint<S>) -> Ball {
    let bits = w.y.bits();
    let s = hyp_distance(x, w) + hyp_distance(y, w) - hyp_distance(x, y);
    s * Ball::from_rational(&BigRational::new(1.into(), 2.into()), bits)
}

/// Point of the Poincaré disk model.
#[derive(Clone, Debug)]
pub struct DiskPoint<S> {
    pub re: S,
    pub im: S,
}

/// Cayley transform `w = (z - i) / (z + i)` on interior points.
pub fn disk_from_half_plane<S: Scalar>(z: &HPoint<S>) -> DiskPoint<S> {
    let one = z.y.lift_i64(1);
    let n = z.x.square() + (z.y.clone() + one.clone()).square();
    let re = (z.x.square() + z.y.square() - one) / n.clone();
    let im = -(z.x.clone() * z.x.lift_i64(2)) / n;
    DiskPoint { re, im }
}

/// Cayley transform on boundary points; `∞` goes to `1`.
pub fn disk_from_half_plane_boundary<S: Scalar>(z: &BoundaryPoint<S>, bits: usize) -> DiskPoint<S> {
    recenter_boundary(z, &HPoint::i(bits))
}

/// Boundary point seen from `o`: the map `z -> (z - o) / (z - conj o)` sends
/// `o` to the disk center and the real line to the unit circle.
pub fn recenter_boundary<S: Scalar>(z: &BoundaryPoint<S>, o: &HPoint<S>) -> DiskPoint<S> {
    match z {
        BoundaryPoint::Infinity => DiskPoint { re: o.y.lift_i64(1), im: o.y.lift_i64(0) },
        BoundaryPoint::Finite(x) => {
            let t = x.clone() - o.x.clone();
            let v = o.y.clone();
            let n = t.square() + v.square();
            let re = (t.square() - v.square()) / n.clone();
            let im = -(v * t * o.y.lift_i64(2)) / n;
            DiskPoint { re, im }
        }
    }
}

/// A Gromov product on the boundary, which is infinite for equal points.
#[derive(Clone, Debug)]
pub enum Extended {
    Finite(Ball),
    Infinite,
}

impl Extended {
    pub fn finite(&self) -> Option<&Ball> {
        match self {
            Extended::Finite(b) => Some(b),
            Extended::Infinite => None,
        }
    }
}

fn chord_sq<S: Scalar>(a: &BoundaryPoint<S>, b: &BoundaryPoint<S>, o: &HPoint<S>) -> S {
    let wa = recenter_boundary(a, o);
    let wb = recenter_boundary(b, o);
    (wa.re - wb.re).square() + (wa.im - wb.im).square()
}

/// `(a|b)_o = -ln(|w_a - w_b| / 2)`, computed from the chord between the
/// recentered boundary points. Equals `-ln sin(theta/2)` for the visual
/// angle `theta` at `o`.
pub fn boundary_gromov_product<S: Scalar>(
    a: &BoundaryPoint<S>,
    b: &BoundaryPoint<S>,
    o: &HPoint<S>,
) -> Result<Extended, GeometryError> {
    let bits = o.y.bits();
    let c2 = chord_sq(a, b, o);
    match c2.sign() {
        Some(Ordering::Equal) => Ok(Extended::Infinite),
        Some(_) => {
            let quarter = c2.to_ball(bits) * Ball::from_rational(&BigRational::new(1.into(), 4.into()), bits);
            let half = Ball::from_rational(&BigRational::new((-1).into(), 2.into()), bits);
            Ok(Extended::Finite(quarter.ln() * half))
        }
        None => Err(GeometryError::Indeterminate("whether the boundary points coincide")),
    }
}

/// Angle in `[0, pi]` at the disk center between the recentered points,
/// computed from their arguments.
pub fn visual_angle<S: Scalar>(a: &BoundaryPoint<S>, b: &BoundaryPoint<S>, o: &HPoint<S>) -> Ball {
    let bits = o.y.bits();
    let wa = recenter_boundary(a, o);
    let wb = recenter_boundary(b, o);
    let cross = wa.re.clone() * wb.im.clone() - wa.im.clone() * wb.re.clone();
    let dot = wa.re * wb.re + wa.im * wb.im;
    Ball::atan2(&cross.abs().to_ball(bits), &dot.to_ball(bits))
}

/// Edge weight `e^{-eps (a|b)_o}` of the visual chain construction.
pub fn visual_weight<S: Scalar>(
    a: &BoundaryPoint<S>,
    b: &BoundaryPoint<S>,
    o: &HPoint<S>,
    eps: f64,
) -> Result<f64, GeometryError> {
    Ok(match boundary_gromov_product(a, b, o)? {
        Extended::Infinite => 0.0,
        Extended::Finite(g) => (-eps * g.to_f64()).exp(),
    })
}

/// Pairwise chain distances on a finite boundary sample.
#[derive(Clone, Debug)]
pub struct ChainMetric {
    /// Single-edge weights `e^{-eps (a|b)_o}`.
    pub direct: Vec<Vec<f64>>,
    /// Infimum over chains, realized as shortest paths.
    pub distance: Vec<Vec<f64>>,
}

/// Visual chain metric `d_{o,eps}` restricted to `sample`.
pub fn chain_metric<S: Scalar>(
    sample: &[BoundaryPoint<S>],
    o: &HPoint<S>,
    eps: f64,
) -> Result<ChainMetric, GeometryError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let n = sample.len();
    let mut direct = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = visual_weight(&sample[i], &sample[j], o, eps)?;
            direct[i][j] = w;
            direct[j][i] = w;
        }
    }
    let mut distance = direct.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = distance[i][k] + distance[k][j];
                if via < distance[i][j] {
                    distance[i][j] = via;
                }
            }
        }
    }
    Ok(ChainMetric { direct, distance })
}
