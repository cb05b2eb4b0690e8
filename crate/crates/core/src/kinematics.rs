//! Exact collision kinematics for massless particles.
//!
//! With `ν = |p| + |q|` and `n = p + q` the relative momentum satisfies
//! `ϱ² = 2(|p||q| − p·q) = ν² − |n|²`, and the post-collision momenta for a
//! unit vector `ω` are
//!
//! ```text
//! p' = n/2 + (ϱ/2) ω + (n·ω) n / (2(ν + ϱ))
//! q' = n/2 − (ϱ/2) ω − (n·ω) n / (2(ν + ϱ))
//! ```
//!
//! so that `|p'| = (ν + n·ω)/2` and `|q'| = (ν − n·ω)/2`. The relativistic
//! invariants of the collision are `h = √s = ϱ/R`; only `ϱ` is carried here,
//! the scale factor enters through the collision prefactor.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Covariant momentum `(p₁, p₂, p₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentumVector<T: Real>(pub [T; 3]);

impl<T: Real> MomentumVector<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Self([T::zero(); 3])
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Self([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])])
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Self([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(*self * n.recip())
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Squared chord distance `|a − b|²`.
    #[inline]
    pub fn dist_sq(&self, other: &Self) -> T {
        let d0 = self.0[0] - other.0[0];
        let d1 = self.0[1] - other.0[1];
        let d2 = self.0[2] - other.0[2];
        d0 * d0 + d1 * d1 + d2 * d2
    }
}

impl<T: Real> Index<usize> for MomentumVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> Add for MomentumVector<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> AddAssign for MomentumVector<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for MomentumVector<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Mul<T> for MomentumVector<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl<T: Real> Neg for MomentumVector<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Orthonormal frame `(e1, e2, pole)`.
///
/// `e1` is the normalized `ẑ × pole`, falling back to `x̂ × pole` when the pole
/// is parallel to `ẑ`. The construction therefore commutes exactly with every
/// rotation about the z axis, and at the two poles a quarter turn about z
/// moves the frame by a quarter turn in azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T: Real> {
    pub e1: MomentumVector<T>,
    pub e2: MomentumVector<T>,
    pub pole: MomentumVector<T>,
}

impl<T: Real> Frame<T> {
    /// Frame around a unit vector.
    pub fn about(pole: MomentumVector<T>) -> Self {
        let z = MomentumVector::new(T::zero(), T::zero(), T::one());
        let mut e1 = z.cross(&pole);
        if e1.norm_sq() < T::lit(1e-24) {
            let x = MomentumVector::new(T::one(), T::zero(), T::zero());
            e1 = x.cross(&pole);
        }
        let e1 = e1.normalized().expect("non-degenerate frame axis");
        let e2 = pole.cross(&e1);
        Self { e1, e2, pole }
    }

    /// `cos_polar · pole + sin_polar · (cos φ e1 + sin φ e2)`.
    #[inline]
    pub fn direction(&self, cos_polar: T, sin_polar: T, cos_az: T, sin_az: T) -> MomentumVector<T> {
        self.pole * cos_polar + (self.e1 * cos_az + self.e2 * sin_az) * sin_polar
    }
}

/// 3×3 rotation matrix acting on momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<T: Real> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        let (o, l) = (T::zero(), T::one());
        Self {
            m: [[l, o, o], [o, l, o], [o, o, l]],
        }
    }

    /// Quarter turn `(x, y, z) ↦ (−y, x, z)`. Exact in floating point and a
    /// symmetry of the octahedral direction sets.
    pub fn quarter_turn_z() -> Self {
        let (o, l) = (T::zero(), T::one());
        Self {
            m: [[o, -l, o], [l, o, o], [o, o, l]],
        }
    }

    /// Rotation by `angle` about a unit `axis` (Rodrigues).
    pub fn about_axis(axis: MomentumVector<T>, angle: T) -> Self {
        let a = axis.normalized().expect("non-zero axis");
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        let [x, y, z] = a.0;
        Self {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    #[inline]
    pub fn apply(&self, v: &MomentumVector<T>) -> MomentumVector<T> {
        let m = &self.m;
        MomentumVector([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }
}

/// Relative momentum `ϱ = sqrt(2(|p||q| − p·q))`.
///
/// Evaluated as `sqrt(|p||q|) · |p̂ − q̂|`, which avoids the cancellation in
/// `|p||q| − p·q` for nearly parallel momenta.
pub fn rho<T: Real>(p: &MomentumVector<T>, q: &MomentumVector<T>) -> T {
    let (np, nq) = (p.norm(), q.norm());
    if np == T::zero() || nq == T::zero() {
        return T::zero();
    }
    (np * nq).sqrt() * (*p * np.recip() - *q * nq.recip()).norm()
}

/// Pre-collision pair with its derived invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionPair<T: Real> {
    pub p: MomentumVector<T>,
    pub q: MomentumVector<T>,
    /// Relative momentum ϱ.
    pub rho: T,
    /// Total energy ν = |p| + |q|.
    pub nu: T,
    /// Total momentum n = p + q.
    pub n: MomentumVector<T>,
}

impl<T: Real> CollisionPair<T> {
    pub fn new(p: MomentumVector<T>, q: MomentumVector<T>) -> Self {
        Self {
            p,
            q,
            rho: rho(&p, &q),
            nu: p.norm() + q.norm(),
            n: p + q,
        }
    }

    /// True when ϱ is indistinguishable from zero at working precision.
    fn rho_vanishes(&self) -> bool {
        self.rho <= T::lit(4.0) * T::epsilon().sqrt() * self.nu || self.rho == T::zero()
    }

    fn n_vanishes(&self) -> bool {
        self.n.norm() <= T::epsilon() * self.nu || self.n.norm() == T::zero()
    }
}

/// Post-collision momenta `(p', q')` for a unit vector `omega`.
///
/// The `ϱ` in front of the bracket is cancelled against the one in the
/// denominator, so parallel momenta (ϱ = 0) are handled without 0/0.
pub fn post_collision<T: Real>(
    p: &MomentumVector<T>,
    q: &MomentumVector<T>,
    omega: &MomentumVector<T>,
) -> Result<(MomentumVector<T>, MomentumVector<T>)> {
    if !(omega.norm() - T::one()).abs().le(&T::lit(1e-12).max(T::epsilon() * T::lit(16.0))) {
        return Err(Error::invalid(format!(
            "omega must be a unit vector, |omega| = {}",
            omega.norm()
        )));
    }
    let pair = CollisionPair::new(*p, *q);
    Ok(post_collision_pair(&pair, omega))
}

pub(crate) fn post_collision_pair<T: Real>(
    pair: &CollisionPair<T>,
    omega: &MomentumVector<T>,
) -> (MomentumVector<T>, MomentumVector<T>) {
    let half = T::lit(0.5);
    let denom = pair.nu + pair.rho;
    if denom == T::zero() {
        return (MomentumVector::zero(), MomentumVector::zero());
    }
    let n_dot_w = pair.n.dot(omega);
    let shift = *omega * (half * pair.rho) + pair.n * (half * n_dot_w / denom);
    let centre = pair.n * half;
    (centre + shift, centre - shift)
}

/// Scalar form of the post-collision energies `(|p'|, |q'|)`.
pub fn post_collision_energies<T: Real>(
    p: &MomentumVector<T>,
    q: &MomentumVector<T>,
    omega: &MomentumVector<T>,
) -> (T, T) {
    let half = T::lit(0.5);
    let nu = p.norm() + q.norm();
    let nw = (*p + *q).dot(omega);
    (half * (nu + nw), half * (nu - nw))
}

/// `∫_{S²} dω / |p'| = (8π/|n|) ln((ν + |n|)/ϱ)`.
pub fn angular_integral_inv_p<T: Real>(p: &MomentumVector<T>, q: &MomentumVector<T>) -> Result<T> {
    let pair = CollisionPair::new(*p, *q);
    if pair.rho_vanishes() {
        return Err(Error::DegenerateConfiguration("rho = 0"));
    }
    if pair.n_vanishes() {
        return Err(Error::DegenerateConfiguration("p + q = 0"));
    }
    let n = pair.n.norm();
    Ok(T::lit(8.0) * T::PI() / n * ((pair.nu + n) / pair.rho).ln())
}

/// `∫_{S²} dω / |p'|² = 16π/ϱ²`.
pub fn angular_integral_inv_p2<T: Real>(p: &MomentumVector<T>, q: &MomentumVector<T>) -> Result<T> {
    let pair = CollisionPair::new(*p, *q);
    if pair.rho_vanishes() {
        return Err(Error::DegenerateConfiguration("rho = 0"));
    }
    Ok(T::lit(16.0) * T::PI() / (pair.rho * pair.rho))
}

/// `∫_{S²} dω / (|p'||q'|) = (16π/(ν|n|)) ln((ν + |n|)/ϱ)`.
pub fn angular_integral_inv_pq<T: Real>(p: &MomentumVector<T>, q: &MomentumVector<T>) -> Result<T> {
    let pair = CollisionPair::new(*p, *q);
    if pair.rho_vanishes() {
        return Err(Error::DegenerateConfiguration("rho = 0"));
    }
    if pair.n_vanishes() {
        return Err(Error::DegenerateConfiguration("p + q = 0"));
    }
    let n = pair.n.norm();
    Ok(T::lit(16.0) * T::PI() / (pair.nu * n) * ((pair.nu + n) / pair.rho).ln())
}
