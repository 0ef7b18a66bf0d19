//! Arithmetic in GF(2^m) and polynomials over it.
//!
//! Elements are plain `u16` values wrapped in [`Elem`]; all arithmetic goes
//! through a [`Field`], which owns the log/antilog tables for its primitive
//! polynomial. Polynomials are stored lowest degree first and kept
//! normalized: the zero polynomial is the empty coefficient list.

use std::fmt;
use std::sync::{Arc, LazyLock};

use crate::error::{invalid, Error, Result};

/// x^4 + x + 1
pub const GF16_POLY: u32 = 0x13;
/// x^8 + x^4 + x^3 + x^2 + 1
pub const GF256_POLY: u32 = 0x11D;

static GF16: LazyLock<Arc<Field>> =
    LazyLock::new(|| Arc::new(Field::new(4, GF16_POLY).expect("x^4+x+1 is primitive")));
static GF256: LazyLock<Arc<Field>> =
    LazyLock::new(|| Arc::new(Field::new(8, GF256_POLY).expect("0x11D is primitive")));

/// A field symbol. Only meaningful together with the [`Field`] that produced it.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(u16);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// GF(2^m) defined by a primitive reduction polynomial, with generator α = x.
pub struct Field {
    m: u32,
    poly: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for Field {}

impl Field {
    /// Builds the tables for GF(2^m) reduced by `poly`.
    ///
    /// Fails unless `poly` has degree exactly `m` and x generates the whole
    /// multiplicative group.
    pub fn new(m: u32, poly: u32) -> Result<Self> {
        if !(1..=15).contains(&m) {
            return invalid(format!("symbol width {m} outside 1..=15"));
        }
        if poly >> m != 1 {
            return invalid(format!("polynomial {poly:#x} does not have degree {m}"));
        }
        let order = 1usize << m;
        let group = order - 1;
        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u16; order];
        let mut seen = vec![false; order];
        let mut v: u32 = 1;
        for i in 0..group {
            if seen[v as usize] {
                return invalid(format!("polynomial {poly:#x} is not primitive"));
            }
            seen[v as usize] = true;
            exp[i] = v as u16;
            exp[i + group] = v as u16;
            log[v as usize] = i as u16;
            v <<= 1;
            if v & (1 << m) != 0 {
                v ^= poly;
            }
        }
        if v != 1 {
            return invalid(format!("polynomial {poly:#x} is not primitive"));
        }
        Ok(Self { m, poly, order, exp, log })
    }

    /// GF(16) with x^4 + x + 1.
    pub fn gf16() -> Arc<Field> {
        Arc::clone(&GF16)
    }

    /// GF(256) with x^8 + x^4 + x^3 + x^2 + 1.
    pub fn gf256() -> Arc<Field> {
        Arc::clone(&GF256)
    }

    /// Bits per symbol.
    pub fn bits(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements, 2^m.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Checked constructor for an element of this field.
    pub fn element(&self, value: u32) -> Result<Elem> {
        if (value as usize) < self.order {
            Ok(Elem(value as u16))
        } else {
            invalid(format!("{value:#x} is not an element of GF(2^{})", self.m))
        }
    }

    /// The generator α.
    pub fn alpha(&self) -> Elem {
        Elem(2 % self.order as u16)
    }

    /// All elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order as u16).map(Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!((a.0 as usize) < self.order && (b.0 as usize) < self.order);
        Elem(a.0 ^ b.0)
    }

    /// Same as [`Field::add`] in characteristic 2.
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, b)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        let i = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        Elem(self.exp[i])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let group = self.order - 1;
        Ok(Elem(self.exp[(group - self.log[a.0 as usize] as usize) % group]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.0 == 0 {
            return Elem::ZERO;
        }
        let group = (self.order - 1) as u64;
        let i = (self.log[a.0 as usize] as u64 * (e % group)) % group;
        Elem(self.exp[i as usize])
    }

    /// α^i.
    pub fn alpha_pow(&self, i: usize) -> Elem {
        Elem(self.exp[i % (self.order - 1)])
    }

    // ---- polynomials ----------------------------------------------------

    pub fn poly_add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let coeffs = (0..n).map(|i| self.add(a.coeff(i), b.coeff(i))).collect();
        Poly::new(coeffs)
    }

    pub fn poly_mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Elem::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        Poly::new(out)
    }

    /// Multiplies every coefficient by `s`.
    pub fn scale_polynomial(&self, p: &Poly, s: Elem) -> Poly {
        Poly::new(p.coeffs.iter().map(|&c| self.mul(c, s)).collect())
    }

    /// Long division: returns `(quotient, remainder)` with
    /// `num = quotient * den + remainder` and `deg remainder < deg den`.
    pub fn poly_div(&self, num: &Poly, den: &Poly) -> Result<(Poly, Poly)> {
        let dd = den.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = self.inv(den.coeffs[dd])?;
        let mut rem = num.coeffs.clone();
        let Some(nd) = num.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if nd < dd {
            return Ok((Poly::zero(), num.clone()));
        }
        let mut quot = vec![Elem::ZERO; nd - dd + 1];
        for shift in (0..=nd - dd).rev() {
            let c = rem[shift + dd];
            if c.is_zero() {
                continue;
            }
            let q = self.mul(c, lead_inv);
            quot[shift] = q;
            for (j, &d) in den.coeffs.iter().enumerate() {
                rem[shift + j] = self.sub(rem[shift + j], self.mul(q, d));
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Horner evaluation.
    pub fn poly_eval(&self, p: &Poly, x: Elem) -> Elem {
        p.coeffs
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// The unique polynomial of degree < `points.len()` through `points`.
    ///
    /// Builds the master product Π(x − X_j) once and derives each Lagrange
    /// basis numerator by synthetic division, so the whole construction is
    /// O(k²).
    pub fn lagrange_interpolate(&self, points: &[(Elem, Elem)]) -> Result<Poly> {
        for (i, &(xi, _)) in points.iter().enumerate() {
            if points[..i].iter().any(|&(xj, _)| xj == xi) {
                return invalid(format!("duplicate interpolation abscissa {xi:?}"));
            }
        }
        let k = points.len();
        if k == 0 {
            return Ok(Poly::zero());
        }
        // master = Π (x - X_j), degree k, k+1 coefficients.
        let mut master = vec![Elem::ONE];
        for &(xj, _) in points {
            let mut next = vec![Elem::ZERO; master.len() + 1];
            for (d, &c) in master.iter().enumerate() {
                next[d + 1] = self.add(next[d + 1], c);
                next[d] = self.sub(next[d], self.mul(c, xj));
            }
            master = next;
        }
        let mut acc = vec![Elem::ZERO; k];
        for &(xi, yi) in points {
            if yi.is_zero() {
                continue;
            }
            // master / (x - X_i) via synthetic division (remainder is zero).
            let mut basis = vec![Elem::ZERO; k];
            let mut carry = Elem::ZERO;
            for d in (0..k).rev() {
                carry = self.add(master[d + 1], self.mul(carry, xi));
                basis[d] = carry;
            }
            let denom = basis
                .iter()
                .rev()
                .fold(Elem::ZERO, |a, &c| self.add(self.mul(a, xi), c));
            let scale = self.div(yi, denom)?;
            let scaled = self.scale_polynomial(&Poly { coeffs: basis }, scale);
            for (a, c) in acc.iter_mut().zip(scaled.coeffs) {
                *a = self.add(*a, c);
            }
        }
        Ok(Poly::new(acc))
    }
}

/// Polynomial over GF(2^m), lowest degree first, trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Elem) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// Coefficient of x^i, zero past the end.
    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}
