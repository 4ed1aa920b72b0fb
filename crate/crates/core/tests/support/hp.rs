//! Fixed-point big-integer arithmetic with 320 fractional bits, used as an
//! independent reference for the double-precision threshold formulas.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

const FRAC_BITS: u32 = 320;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hp(BigInt);

fn one_raw() -> BigInt {
    BigInt::one() << FRAC_BITS
}

impl Hp {
    pub fn zero() -> Hp {
        Hp(BigInt::zero())
    }

    pub fn int(v: i64) -> Hp {
        Hp(BigInt::from(v) << FRAC_BITS)
    }

    /// Exact conversion of a double (all inputs here are far above 2^-320).
    pub fn from_f64(v: f64) -> Hp {
        assert!(v.is_finite());
        if v == 0.0 {
            return Hp::zero();
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(mantissa) * sign;
        let shift = e + i64::from(FRAC_BITS);
        assert!(shift >= 0, "value too small for the fixed-point format");
        Hp(m << shift as u32)
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 80 significant bits before converting.
        let bits = self.0.bits() as i64;
        let drop = (bits - 80).max(0);
        let top = (&self.0 >> drop as u32).to_f64().unwrap();
        top * 2f64.powi((drop - i64::from(FRAC_BITS)) as i32)
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn max(self, other: Hp) -> Hp {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn half(&self) -> Hp {
        Hp(&self.0 >> 1u32)
    }

    /// Natural logarithm via `ln x = k·ln 2 + 2·atanh((m−1)/(m+1))`, `m ∈ [1, 2)`.
    pub fn ln(&self) -> Hp {
        assert!(self.0.is_positive(), "ln of non-positive value");
        let k = self.0.bits() as i64 - 1 - i64::from(FRAC_BITS);
        let m = if k >= 0 { Hp(&self.0 >> k as u32) } else { Hp(&self.0 << (-k) as u32) };
        let one = Hp::int(1);
        let z = (m.clone() - one.clone()) / (m + one);
        Hp::ln2() * Hp::int(k) + atanh2(&z)
    }

    pub fn ln2() -> Hp {
        static LN2: OnceLock<Hp> = OnceLock::new();
        LN2.get_or_init(|| atanh2(&(Hp::int(1) / Hp::int(3)))).clone()
    }

    pub fn exp(&self) -> Hp {
        let ln2 = Hp::ln2();
        let k = (self.clone() / ln2.clone()).round_to_int();
        let r = self.clone() - ln2 * Hp::int(k);
        let mut term = Hp::int(1);
        let mut sum = Hp::int(1);
        for j in 1..400 {
            term = term * r.clone() / Hp::int(j);
            if term.0.is_zero() {
                break;
            }
            sum = sum + term.clone();
        }
        if k >= 0 {
            Hp(sum.0 << k as u32)
        } else {
            Hp(sum.0 >> (-k) as u32)
        }
    }

    pub fn powf(&self, y: &Hp) -> Hp {
        (y.clone() * self.ln()).exp()
    }

    pub fn powi(&self, n: u32) -> Hp {
        (0..n).fold(Hp::int(1), |acc, _| acc * self.clone())
    }

    fn round_to_int(&self) -> i64 {
        let half = one_raw() >> 1u32;
        let v: BigInt = (&self.0 + half) >> FRAC_BITS;
        v.to_i64().unwrap()
    }
}

/// `2·atanh(z) = 2(z + z³/3 + z⁵/5 + …)` for `|z| ≤ 1/3`.
fn atanh2(z: &Hp) -> Hp {
    let z2 = z.clone() * z.clone();
    let mut power = z.clone();
    let mut sum = Hp::zero();
    let mut j = 1;
    loop {
        let term = power.clone() / Hp::int(j);
        if term.0.is_zero() {
            break;
        }
        sum = sum + term;
        power = power * z2.clone();
        j += 2;
    }
    sum.clone() + sum
}

impl Add for Hp {
    type Output = Hp;
    fn add(self, o: Hp) -> Hp {
        Hp(self.0 + o.0)
    }
}

impl Sub for Hp {
    type Output = Hp;
    fn sub(self, o: Hp) -> Hp {
        Hp(self.0 - o.0)
    }
}

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(-self.0)
    }
}

impl Mul for Hp {
    type Output = Hp;
    fn mul(self, o: Hp) -> Hp {
        Hp((self.0 * o.0) >> FRAC_BITS)
    }
}

impl Div for Hp {
    type Output = Hp;
    fn div(self, o: Hp) -> Hp {
        assert!(!o.0.is_zero(), "division by zero");
        Hp((self.0 << FRAC_BITS) / o.0)
    }
}

pub fn cmp(a: &Hp, b: &Hp) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    #[allow(unused_imports)]
    use super::*;

    #[test]
    fn elementary_functions() {
        assert_eq!(Hp::from_f64(0.1).to_f64(), 0.1);
        assert!((Hp::ln2().to_f64() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((Hp::int(1).exp().to_f64() - std::f64::consts::E).abs() < 1e-15);
        let x = Hp::from_f64(1.37);
        assert!((x.ln().exp() - x.clone()).0.abs() < BigInt::one() << 64u32);
        assert!((Hp::from_f64(2.0).powf(&Hp::from_f64(0.5)).to_f64() - 2f64.sqrt()).abs() < 1e-16);
    }
}
