//! Exact orientation and incircle predicates on integer points.
//!
//! Coordinates are bounded by `2^34` in absolute value, so orientation fits
//! in `i128` and the incircle determinant is summed in 256-bit magnitudes.

use core::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// Largest coordinate magnitude the predicates accept.
pub const COORD_LIMIT: i64 = 1 << 34;

/// Twice the signed area of `abc`; positive when counter-clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> i128 {
    let abx = i128::from(b.x - a.x);
    let aby = i128::from(b.y - a.y);
    let acx = i128::from(c.x - a.x);
    let acy = i128::from(c.y - a.y);
    abx * acy - aby * acx
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct U256 {
    hi: u128,
    lo: u128,
}

impl U256 {
    fn add(self, other: U256) -> U256 {
        let (lo, carry) = self.lo.overflowing_add(other.lo);
        U256 {
            hi: self.hi + other.hi + u128::from(carry),
            lo,
        }
    }

    fn mul(a: u128, b: u128) -> U256 {
        const MASK: u128 = u64::MAX as u128;
        let (a1, a0) = (a >> 64, a & MASK);
        let (b1, b0) = (b >> 64, b & MASK);
        let p00 = a0 * b0;
        let p01 = a0 * b1;
        let p10 = a1 * b0;
        let p11 = a1 * b1;
        let (mid, mid_carry) = p01.overflowing_add(p10);
        let (lo, lo_carry) = p00.overflowing_add(mid << 64);
        let hi = p11 + (mid >> 64) + (u128::from(mid_carry) << 64) + u128::from(lo_carry);
        U256 { hi, lo }
    }
}

/// Accumulates signed products as separate positive and negative magnitudes.
#[derive(Default)]
struct SignedSum {
    pos: U256,
    neg: U256,
}

impl SignedSum {
    fn add_product(&mut self, a: i128, b: i128) {
        let m = U256::mul(a.unsigned_abs(), b.unsigned_abs());
        if (a < 0) != (b < 0) {
            self.neg = self.neg.add(m);
        } else {
            self.pos = self.pos.add(m);
        }
    }

    fn sign(&self) -> Ordering {
        self.pos.cmp(&self.neg)
    }
}

/// Sign of the incircle determinant. For counter-clockwise `abc`,
/// `Greater` means `d` lies strictly inside the circumcircle.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> Ordering {
    let adx = i128::from(a.x - d.x);
    let ady = i128::from(a.y - d.y);
    let bdx = i128::from(b.x - d.x);
    let bdy = i128::from(b.y - d.y);
    let cdx = i128::from(c.x - d.x);
    let cdy = i128::from(c.y - d.y);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let mut s = SignedSum::default();
    s.add_product(alift, bdx * cdy - bdy * cdx);
    s.add_product(blift, cdx * ady - cdy * adx);
    s.add_product(clift, adx * bdy - ady * bdx);
    s.sign()
}

/// Whether `d` lies strictly inside the circumcircle of the triangle `abc`
/// (either orientation; degenerate triangles contain nothing).
pub fn in_circumcircle(a: Point, b: Point, c: Point, d: Point) -> bool {
    match orient(a, b, c).cmp(&0) {
        Ordering::Greater => incircle(a, b, c, d) == Ordering::Greater,
        Ordering::Less => incircle(a, c, b, d) == Ordering::Greater,
        Ordering::Equal => false,
    }
}
