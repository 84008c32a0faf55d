//! Decoration diffeomorphisms: edge fields are pushforwards `Φ^k_* X`.

use super::geom::{Pt, Q};
use num_integer::Integer;

/// Half-width of the collars where a shear is a translation.
fn collar() -> Q {
    Q::new(1.into(), 4.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decor {
    /// `Φ_k(p) = p + k g`.
    Translate(Pt),
    /// `Φ_k(x, y) = (x + k α(y) + k² c β(y), y)`, periodic of period `2·row`
    /// in `y`. `α` is `a` near `y ≡ 0`, `b` near `y ≡ row` and linear in
    /// between; `β` is a tent vanishing near both rows with peak 1 halfway.
    Shear { a: Q, b: Q, c: Q, row: Q },
}

impl Decor {
    /// Height folded into `[0, row]`.
    fn fold(row: &Q, y: &Q) -> Q {
        let period = row * Q::from_integer(2.into());
        let m = (y / &period).floor();
        let t = y - &m * &period;
        if &t > row {
            &period - &t
        } else {
            t
        }
    }

    fn shift(&self, k: i64, y: &Q) -> Q {
        let Decor::Shear { a, b, c, row } = self else { unreachable!() };
        let t = Self::fold(row, y);
        let col = collar();
        let lo = &col;
        let hi = row - &col;
        let (alpha, beta) = if &t <= lo {
            (a.clone(), Q::default())
        } else if t >= hi {
            (b.clone(), Q::default())
        } else {
            let s = (&t - lo) / (&hi - lo);
            let half = Q::new(1.into(), 2.into());
            let tent = if s <= half { &s * Q::from_integer(2.into()) } else { (Q::from_integer(1.into()) - &s) * Q::from_integer(2.into()) };
            (a + (b - a) * s, tent)
        };
        let kk = Q::from_integer(k.into());
        &kk * alpha + &kk * &kk * c * beta
    }

    pub fn apply(&self, p: &Pt, k: i64) -> Pt {
        match self {
            Decor::Translate(g) => p + &g.scale(&Q::from_integer(k.into())),
            Decor::Shear { .. } => Pt::new(&p.x + self.shift(k, &p.y), p.y.clone()),
        }
    }

    pub fn inverse(&self, p: &Pt, k: i64) -> Pt {
        match self {
            Decor::Translate(g) => p - &g.scale(&Q::from_integer(k.into())),
            Decor::Shear { .. } => Pt::new(&p.x - self.shift(k, &p.y), p.y.clone()),
        }
    }

    /// Heights in the open interval between `y0` and `y1` where the shear bends.
    fn breaks(&self, y0: &Q, y1: &Q) -> Vec<Q> {
        let Decor::Shear { row, .. } = self else { return vec![] };
        let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
        let period = row * Q::from_integer(2.into());
        let c = collar();
        let half = row / Q::from_integer(2.into());
        let base = [c.clone(), half.clone(), row - &c, row + &c, row + &half, &period - &c];
        let mut out = Vec::new();
        let start: num_bigint::BigInt = (lo / &period).floor().to_integer() - 1;
        let end = (hi / &period).ceil().to_integer() + 1;
        let mut m = start;
        while m <= end {
            for b in &base {
                let y = b + &period * Q::from_integer(m.clone());
                if &y > lo && &y < hi {
                    out.push(y);
                }
            }
            m.inc();
        }
        out.sort();
        if y0 > y1 {
            out.reverse();
        }
        out
    }

    /// Image of a polyline, subdivided where the map is not affine.
    pub fn image(&self, poly: &[Pt], k: i64) -> Vec<Pt> {
        if k == 0 {
            return poly.to_vec();
        }
        let mut pts = Vec::with_capacity(poly.len());
        for (i, p) in poly.iter().enumerate() {
            if i > 0 {
                let a = &poly[i - 1];
                for y in self.breaks(&a.y, &p.y) {
                    let t = (&y - &a.y) / (&p.y - &a.y);
                    pts.push(Pt::new(&a.x + (&p.x - &a.x) * t, y));
                }
            }
            pts.push(p.clone());
        }
        pts.iter().map(|p| self.apply(p, k)).collect()
    }
}
