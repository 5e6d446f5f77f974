//! Prime fields carrying a fixed primitive root of unity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic modulo an odd prime `p < 2^32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Fp {
    p: u64,
    /// `floor(2^64 / p)` for Barrett reduction.
    m: u64,
}

impl TryFrom<u64> for Fp {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Fp::new(p)
    }
}

impl From<Fp> for u64 {
    fn from(f: Fp) -> u64 {
        f.p
    }
}

impl Fp {
    pub fn new(p: u64) -> Result<Self> {
        if !(3..1 << 32).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not an odd prime below 2^32")));
        }
        Ok(Fp { p, m: (u128::from(u64::MAX) + 1).div_euclid(u128::from(p)) as u64 })
    }

    #[inline]
    pub fn p(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }

    /// `x mod p` for any `x < 2^64`.
    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        let q = ((u128::from(x) * u128::from(self.m)) >> 64) as u64;
        let r = x - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Smaller of the two square roots of `a`, if `a` is a square (Tonelli-Shanks).
    pub fn sqrt(self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 || self.p == 2 {
            return Some(a);
        }
        if self.pow(a, (self.p - 1) / 2) != 1 {
            return None;
        }
        let mut q = self.p - 1;
        let mut s = 0;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let z = (2..self.p).find(|&z| self.pow(z, (self.p - 1) / 2) == self.p - 1)?;
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, q.div_ceil(2));
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = self.mul(tt, tt);
                i += 1;
            }
            let b = self.pow(c, 1 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r.min(self.p - r))
    }

    pub fn from_i64(self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    /// Symmetric representative in `(-p/2, p/2]`.
    pub fn to_signed(self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `F_p` with a primitive `N`-th root of unity `zeta`, where `N` is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootField {
    pub fp: Fp,
    /// Order `N` of the distinguished root of unity.
    pub order: u64,
    /// The distinguished primitive `N`-th root of unity.
    pub zeta: u64,
}

impl RootField {
    /// Field containing `zeta_N` for `N = 2 * lcm(required_orders)`.
    ///
    /// Without an explicit prime, picks the smallest prime `p > 2N` with `p = 1 mod N`.
    pub fn new(required_orders: &[u64], prime: Option<u64>) -> Result<Self> {
        let mut l = 1;
        for &o in required_orders {
            if o == 0 {
                return Err(Error::InvalidParameter("root of unity of order 0".into()));
            }
            l = lcm(l, o);
        }
        let order = 2 * l;
        let p = match prime {
            Some(p) => {
                if p % order != 1 {
                    return Err(Error::InvalidParameter(format!("prime {p} is not 1 mod {order}")));
                }
                p
            }
            None => {
                let mut p = 2 * order + 1;
                while !(p % order == 1 && is_prime(p)) {
                    p += 1;
                }
                p
            }
        };
        let fp = Fp::new(p)?;
        let g = primitive_root(fp);
        let zeta = fp.pow(g, (p - 1) / order);
        Ok(RootField { fp, order, zeta })
    }

    /// Rebuilds a field from serialized `(p, N, zeta_N)`, checking consistency.
    pub fn from_parts(p: u64, order: u64, zeta: u64) -> Result<Self> {
        let fp = Fp::new(p)?;
        if order == 0 || !order.is_multiple_of(2) || !(p - 1).is_multiple_of(order) {
            return Err(Error::InvalidField(format!("order {order} incompatible with p = {p}")));
        }
        if zeta >= p || multiplicative_order(fp, zeta) != order {
            return Err(Error::InvalidField(format!("{zeta} is not a primitive {order}-th root")));
        }
        Ok(RootField { fp, order, zeta })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.fp.p()
    }

    /// `zeta_d^k`; requires `d | N`.
    pub fn root(&self, d: u64, k: i64) -> Result<u64> {
        if d == 0 || !self.order.is_multiple_of(d) {
            return Err(Error::InvalidField(format!(
                "no root of unity of order {d} (field carries order {})",
                self.order
            )));
        }
        let e = (k.rem_euclid(d as i64) as u64) * (self.order / d);
        Ok(self.fp.pow(self.zeta, e))
    }

    /// `zeta_N^k`.
    pub fn zeta_pow(&self, k: i64) -> u64 {
        let e = k.rem_euclid(self.order as i64) as u64;
        self.fp.pow(self.zeta, e)
    }

    pub fn minus_one(&self) -> u64 {
        self.p() - 1
    }

    /// Exponent `k` in `[0, N)` with `zeta_N^k = x`, if `x` is an `N`-th root of unity.
    pub fn log_zeta(&self, x: u64) -> Option<u64> {
        let mut cur = 1;
        for k in 0..self.order {
            if cur == x {
                return Some(k);
            }
            cur = self.fp.mul(cur, self.zeta);
        }
        None
    }

    /// A square root of `x` lying in the group of `N`-th roots of unity, if any.
    pub fn sqrt_root_of_unity(&self, x: u64) -> Option<u64> {
        let k = self.log_zeta(x)?;
        if k % 2 == 0 {
            Some(self.zeta_pow((k / 2) as i64))
        } else {
            None
        }
    }
}

pub fn multiplicative_order(fp: Fp, a: u64) -> u64 {
    if a == 0 {
        return 0;
    }
    let mut ord = fp.p() - 1;
    for q in prime_factors(fp.p() - 1) {
        while ord.is_multiple_of(q) && fp.pow(a, ord / q) == 1 {
            ord /= q;
        }
    }
    ord
}

fn primitive_root(fp: Fp) -> u64 {
    let qs = prime_factors(fp.p() - 1);
    (2..fp.p()).find(|&g| qs.iter().all(|&q| fp.pow(g, (fp.p() - 1) / q) != 1)).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_roots() {
        for p in [13u64, 17, 41, 97, 113] {
            let fp = Fp::new(p).unwrap();
            for a in 0..p {
                let sq = (1..p).filter(|x| x * x % p == a).count() > 0 || a == 0;
                match fp.sqrt(a) {
                    Some(r) => assert_eq!(fp.mul(r, r), a),
                    None => assert!(!sq, "{a} mod {p}"),
                }
            }
        }
    }

    #[test]
    fn order_two_picks_thirteen() {
        let f = RootField::new(&[2], None).unwrap();
        assert_eq!(f.order, 4);
        assert_eq!(f.p(), 13);
        assert_eq!(f.root(2, 1).unwrap(), 12);
    }

    #[test]
    fn orders_two_three_with_thirteen() {
        let f = RootField::new(&[2, 3], Some(13)).unwrap();
        assert_eq!(f.order, 12);
        let z3 = f.root(3, 1).unwrap();
        assert_eq!(multiplicative_order(f.fp, z3), 3);
    }

    #[test]
    fn empty_orders() {
        let f = RootField::new(&[], None).unwrap();
        assert_eq!(f.order, 2);
        assert_eq!(f.root(2, 1).unwrap(), f.p() - 1);
        assert!(f.p() % 2 == 1);
    }

    #[test]
    fn bad_prime_rejected() {
        assert!(matches!(RootField::new(&[2], Some(7)), Err(Error::InvalidParameter(_))));
        assert!(RootField::new(&[3], Some(15)).is_err());
    }

    #[test]
    fn cached_roots_have_exact_order() {
        let f = RootField::new(&[4, 3], None).unwrap();
        for d in [1u64, 2, 3, 4, 6, 8, 12, 24] {
            let z = f.root(d, 1).unwrap();
            assert_eq!(multiplicative_order(f.fp, z), d);
        }
        assert_eq!(f.zeta_pow(f.order as i64 / 2), f.minus_one());
    }
}
