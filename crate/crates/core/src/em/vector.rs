//! Real and complex 3-vectors.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction. A zero vector stays zero.
    #[inline]
    pub fn normalize(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self / n
        } else {
            self
        }
    }

    #[inline]
    pub fn component(self, axis: usize) -> T {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn min_by_component(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_by_component(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Promote to a complex vector with zero imaginary part.
    #[inline]
    pub fn to_complex(self) -> ComplexVec3<T> {
        ComplexVec3::from_real(self)
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

/// 3-vector of complex amplitudes (field polarization/intensity, surface currents).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexVec3<T> {
    pub x: Complex<T>,
    pub y: Complex<T>,
    pub z: Complex<T>,
}

impl<T: Scalar> ComplexVec3<T> {
    #[inline]
    pub const fn new(x: Complex<T>, y: Complex<T>, z: Complex<T>) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(z, z, z)
    }

    #[inline]
    pub fn from_real(v: Vec3<T>) -> Self {
        let c = |a: T| Complex::new(a, T::zero());
        Self::new(c(v.x), c(v.y), c(v.z))
    }

    pub fn real(self) -> Vec3<T> {
        Vec3::new(self.x.re, self.y.re, self.z.re)
    }

    pub fn imag(self) -> Vec3<T> {
        Vec3::new(self.x.im, self.y.im, self.z.im)
    }

    /// Bilinear projection onto a real direction, `Σ aᵢ·dᵢ`.
    #[inline]
    pub fn dot_real(self, d: Vec3<T>) -> Complex<T> {
        self.x * d.x + self.y * d.y + self.z * d.z
    }

    /// Hermitian inner product `Σ conj(aᵢ)·bᵢ`.
    pub fn hdot(self, o: Self) -> Complex<T> {
        self.x.conj() * o.x + self.y.conj() * o.y + self.z.conj() * o.z
    }

    /// Cross product with a real vector on the right.
    #[inline]
    pub fn cross_real(self, d: Vec3<T>) -> Self {
        Self::new(
            self.y * d.z - self.z * d.y,
            self.z * d.x - self.x * d.z,
            self.x * d.y - self.y * d.x,
        )
    }

    /// `d × self` for a real vector `d`.
    #[inline]
    pub fn real_cross(d: Vec3<T>, v: Self) -> Self {
        -v.cross_real(d)
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    /// Hermitian norm.
    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn scale(self, s: Complex<T>) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn scale_real(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        let f = |c: Complex<T>| c.re.is_finite() && c.im.is_finite();
        f(self.x) && f(self.y) && f(self.z)
    }
}

impl<T: Scalar> Add for ComplexVec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for ComplexVec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for ComplexVec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for ComplexVec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Real unit vector `a` times complex scalar `s`.
#[inline]
pub fn real_times<T: Scalar>(a: Vec3<T>, s: Complex<T>) -> ComplexVec3<T> {
    ComplexVec3::new(s * a.x, s * a.y, s * a.z)
}
