//! Exact rational plane geometry.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `"p/q"` or `"p"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(a.trim().parse().ok()?, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

pub fn fmt_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pt {
    pub x: Q,
    pub y: Q,
}

impl Pt {
    pub fn new(x: Q, y: Q) -> Self {
        Pt { x, y }
    }

    pub fn zero() -> Self {
        Pt { x: Q::zero(), y: Q::zero() }
    }

    pub fn scale(&self, t: &Q) -> Pt {
        Pt { x: &self.x * t, y: &self.y * t }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn dot(&self, o: &Pt) -> Q {
        &self.x * &o.x + &self.y * &o.y
    }
}

impl<'a> Add<&'a Pt> for &'a Pt {
    type Output = Pt;
    fn add(self, o: &Pt) -> Pt {
        Pt { x: &self.x + &o.x, y: &self.y + &o.y }
    }
}

impl<'a> Sub<&'a Pt> for &'a Pt {
    type Output = Pt;
    fn sub(self, o: &Pt) -> Pt {
        Pt { x: &self.x - &o.x, y: &self.y - &o.y }
    }
}

impl Neg for &Pt {
    type Output = Pt;
    fn neg(self) -> Pt {
        Pt { x: -&self.x, y: -&self.y }
    }
}

impl Mul<&Q> for &Pt {
    type Output = Pt;
    fn mul(self, t: &Q) -> Pt {
        self.scale(t)
    }
}

pub fn det(a: &Pt, b: &Pt) -> Q {
    &a.x * &b.y - &a.y * &b.x
}

pub fn sign(v: &Q) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Orientation of `(a, b, c)`: +1 counterclockwise.
pub fn orient(a: &Pt, b: &Pt, c: &Pt) -> i32 {
    sign(&det(&(b - a), &(c - a)))
}

/// Half-plane index used to sort directions by angle from the positive x axis.
fn half(v: &Pt) -> u8 {
    if v.y.is_positive() || (v.y.is_zero() && v.x.is_positive()) {
        0
    } else {
        1
    }
}

/// Angular comparison of nonzero directions in `[0, 2π)`.
pub fn angle_cmp(a: &Pt, b: &Pt) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| match sign(&det(a, b)) {
        1 => Ordering::Less,
        -1 => Ordering::Greater,
        _ => Ordering::Equal,
    })
}

/// Same direction up to positive scaling.
pub fn same_ray(a: &Pt, b: &Pt) -> bool {
    det(a, b).is_zero() && a.dot(b).is_positive()
}

/// Whether direction `r` lies strictly inside the counterclockwise sweep from `from` to `to`.
pub fn strictly_ccw_between(from: &Pt, to: &Pt, r: &Pt) -> bool {
    let rel = |v: &Pt| -> (u8, Pt) {
        // rotate so that `from` is the reference axis
        let x = from.dot(v);
        let y = det(from, v);
        let p = Pt::new(x, y);
        (half(&p), p)
    };
    let (hr, pr) = rel(r);
    let (ht, pt) = rel(to);
    if pr.y.is_zero() && pr.x.is_positive() {
        return false;
    }
    let c = hr.cmp(&ht).then_with(|| match sign(&det(&pr, &pt)) {
        1 => Ordering::Less,
        -1 => Ordering::Greater,
        _ => Ordering::Equal,
    });
    c == Ordering::Less
}

/// Intersection of closed segments `p0p1` and `q0q1` when they meet in a single
/// point, with parameters along each. Collinear overlap returns `Err(())`.
#[allow(clippy::result_unit_err)]
pub fn segment_hit(p0: &Pt, p1: &Pt, q0: &Pt, q1: &Pt) -> Result<Option<(Pt, Q, Q)>, ()> {
    let r = p1 - p0;
    let s = q1 - q0;
    let den = det(&r, &s);
    let qp = q0 - p0;
    if den.is_zero() {
        if !det(&qp, &r).is_zero() {
            return Ok(None);
        }
        // collinear: overlap test on the projection
        let rr = r.dot(&r);
        if rr.is_zero() {
            return Ok(None);
        }
        let t0 = qp.dot(&r) / &rr;
        let t1 = (q1 - p0).dot(&r) / &rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        if hi < Q::zero() || lo > Q::one() {
            return Ok(None);
        }
        if hi == Q::zero() || lo == Q::one() {
            let t = if hi == Q::zero() { Q::zero() } else { Q::one() };
            let pt = p0 + &r.scale(&t);
            let u = if pt == *q0 { Q::zero() } else { Q::one() };
            return Ok(Some((pt, t, u)));
        }
        return Err(());
    }
    let t = det(&qp, &s) / &den;
    let u = det(&qp, &r) / &den;
    if t < Q::zero() || t > Q::one() || u < Q::zero() || u > Q::one() {
        return Ok(None);
    }
    Ok(Some((p0 + &r.scale(&t), t, u)))
}

/// Reduction of a point modulo a rectangular period lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub period: Option<(Q, Q)>,
}

impl Lattice {
    pub fn plane() -> Self {
        Lattice { period: None }
    }

    pub fn torus(px: Q, py: Q) -> Self {
        Lattice { period: Some((px, py)) }
    }

    pub fn shift(&self, i: i64, j: i64) -> Pt {
        match &self.period {
            Some((px, py)) => Pt::new(px * qi(i), py * qi(j)),
            None => Pt::zero(),
        }
    }

    fn floor_div(a: &Q, p: &Q) -> i64 {
        use num_traits::ToPrimitive;
        (a / p).floor().to_integer().to_i64().expect("coordinate range")
    }

    /// Lattice index of the cell containing `p`.
    pub fn cell(&self, p: &Pt) -> (i64, i64) {
        match &self.period {
            Some((px, py)) => (Self::floor_div(&p.x, px), Self::floor_div(&p.y, py)),
            None => (0, 0),
        }
    }

    pub fn reduce(&self, p: &Pt) -> Pt {
        let (i, j) = self.cell(p);
        p - &self.shift(i, j)
    }

    pub fn same(&self, a: &Pt, b: &Pt) -> bool {
        self.reduce(a) == self.reduce(b)
    }

    /// Shifts worth testing when comparing objects near `a` and `b`.
    pub fn candidate_shifts(&self, a: &Pt, b: &Pt) -> Vec<Pt> {
        match &self.period {
            None => vec![Pt::zero()],
            Some(_) => {
                let (ai, aj) = self.cell(a);
                let (bi, bj) = self.cell(b);
                let mut out = Vec::new();
                for di in -2..=2 {
                    for dj in -2..=2 {
                        out.push(self.shift(ai - bi + di, aj - bj + dj));
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Pt {
        Pt::new(qi(x), qi(y))
    }

    #[test]
    fn rationals_round_trip() {
        assert_eq!(parse_q("3/6"), Some(q(1, 2)));
        assert_eq!(fmt_q(&q(-4, 6)), "-2/3");
        assert_eq!(fmt_q(&qi(5)), "5");
        assert_eq!(parse_q("1/0"), None);
    }

    #[test]
    fn segments() {
        let hit = segment_hit(&p(0, 0), &p(2, 2), &p(0, 2), &p(2, 0)).unwrap().unwrap();
        assert_eq!(hit.0, p(1, 1));
        assert!(segment_hit(&p(0, 0), &p(2, 0), &p(1, 0), &p(3, 0)).is_err());
        assert_eq!(segment_hit(&p(0, 0), &p(1, 0), &p(1, 0), &p(2, 0)).unwrap().unwrap().0, p(1, 0));
        assert!(segment_hit(&p(0, 0), &p(1, 0), &p(0, 1), &p(1, 1)).unwrap().is_none());
    }

    #[test]
    fn angles() {
        let dirs = [p(1, 0), p(1, 1), p(0, 1), p(-1, 0), p(0, -1), p(1, -1)];
        for w in dirs.windows(2) {
            assert_eq!(angle_cmp(&w[0], &w[1]), Ordering::Less);
        }
        assert!(strictly_ccw_between(&p(1, 0), &p(-1, 0), &p(0, 1)));
        assert!(!strictly_ccw_between(&p(1, 0), &p(-1, 0), &p(0, -1)));
        assert!(strictly_ccw_between(&p(0, 1), &p(1, 0), &p(-1, -1)));
        assert!(!strictly_ccw_between(&p(1, 0), &p(0, 1), &p(2, 0)));
    }

    #[test]
    fn lattice_reduction() {
        let l = Lattice::torus(qi(4), qi(4));
        assert_eq!(l.reduce(&p(-1, 5)), p(3, 1));
        assert!(l.same(&p(0, 0), &p(4, -8)));
    }
}
