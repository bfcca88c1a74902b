//! Arbitrary-precision numerics: real and complex arithmetic at a configured
//! bit precision, truncated power series in one variable, and exact Bernoulli
//! numbers.
//!
//! The analytic layer computes leading Taylor coefficients of modified
//! L-functions at s = 0 by Euler–Maclaurin summation; everything it needs is
//! gathered here so the rest of the crate never touches the float backend
//! directly.

use astro_float::{Consts, Exponent, Radix, RoundingMode, Sign};
pub use astro_float::BigFloat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const RM: RoundingMode = RoundingMode::ToEven;

/// Working-precision context: bit precision plus the constants cache used by
/// the transcendental functions.
pub struct Ctx {
    pub p: usize,
    cc: Consts,
}

impl Ctx {
    pub fn new(precision_bits: usize) -> Self {
        // a few guard bits beyond what callers asked for
        Ctx { p: precision_bits + 32, cc: Consts::new().expect("constants cache") }
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_i64(0, self.p)
    }

    pub fn one(&self) -> BigFloat {
        BigFloat::from_i64(1, self.p)
    }

    pub fn from_i64(&mut self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, self.p)
    }

    pub fn from_bigint(&mut self, x: &BigInt) -> BigFloat {
        BigFloat::parse(&x.to_string(), Radix::Dec, self.p, RM, &mut self.cc)
    }

    pub fn from_ratio(&mut self, x: &BigRational) -> BigFloat {
        let n = self.from_bigint(x.numer());
        let d = self.from_bigint(x.denom());
        n.div(&d, self.p, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.p, RM, &mut self.cc)
    }

    pub fn sqrt(&mut self, x: &BigFloat) -> BigFloat {
        x.sqrt(self.p, RM)
    }

    pub fn sin(&mut self, x: &BigFloat) -> BigFloat {
        x.sin(self.p, RM, &mut self.cc)
    }

    pub fn cos(&mut self, x: &BigFloat) -> BigFloat {
        x.cos(self.p, RM, &mut self.cc)
    }

    /// x^n for integer n (negative allowed, x nonzero).
    pub fn pow_i64(&mut self, x: &BigFloat, n: i64) -> BigFloat {
        if n >= 0 {
            x.powi(n as usize, self.p, RM)
        } else {
            self.one().div(&x.powi((-n) as usize, self.p, RM), self.p, RM)
        }
    }

    /// 2^e as a float (e may be very negative; used for tolerances).
    pub fn pow2(&self, e: i64) -> BigFloat {
        let mut x = self.one();
        x.set_exponent((e + 1) as Exponent);
        x
    }
}

/// |a - b| <= tol
pub fn within(a: &BigFloat, b: &BigFloat, tol: &BigFloat) -> bool {
    let d = a.sub_full_prec(b).abs();
    matches!(d.cmp(tol), Some(c) if c <= 0)
}

/// Round a float to the nearest integer, also reporting the distance to it.
pub fn nearest_int(ctx: &mut Ctx, x: &BigFloat) -> (BigInt, BigFloat) {
    // round via decimal string at full precision
    let s = format!("{}", x);
    let approx: f64 = s.parse().unwrap_or(0.0);
    let mut guess = BigInt::from(approx.round() as i64);
    // fix up with exact comparisons in case the f64 round-trip was off
    loop {
        let g = ctx.from_bigint(&guess);
        let d = ctx.sub(x, &g);
        let half = ctx.pow2(-1);
        if matches!(d.cmp(&half), Some(c) if c > 0) {
            guess += 1;
        } else if matches!(d.cmp(&half.neg()), Some(c) if c < 0) {
            guess -= 1;
        } else {
            return (guess, d.abs());
        }
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    format!("{}", x).parse().unwrap_or(f64::NAN)
}

pub fn is_neg(x: &BigFloat) -> bool {
    x.sign() == Some(Sign::Neg) && !x.is_zero()
}

/// Complex number at working precision.
#[derive(Clone, Debug)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn zero(ctx: &Ctx) -> Self {
        Complex { re: ctx.zero(), im: ctx.zero() }
    }

    pub fn one(ctx: &Ctx) -> Self {
        Complex { re: ctx.one(), im: ctx.zero() }
    }

    pub fn from_real(re: BigFloat, ctx: &Ctx) -> Self {
        Complex { re, im: ctx.zero() }
    }

    /// e^{2 pi i k / n}
    pub fn root_of_unity(ctx: &mut Ctx, k: i64, n: i64) -> Self {
        assert!(n > 0);
        let pi = ctx.pi();
        let two_pi = ctx.mul(&pi, &BigFloat::from_i64(2, ctx.p));
        let frac = ctx.div(&BigFloat::from_i64(k.rem_euclid(n), ctx.p), &BigFloat::from_i64(n, ctx.p));
        let t = ctx.mul(&two_pi, &frac);
        Complex { re: ctx.cos(&t), im: ctx.sin(&t) }
    }

    pub fn add(&self, o: &Complex, ctx: &Ctx) -> Complex {
        Complex { re: ctx.add(&self.re, &o.re), im: ctx.add(&self.im, &o.im) }
    }

    pub fn sub(&self, o: &Complex, ctx: &Ctx) -> Complex {
        Complex { re: ctx.sub(&self.re, &o.re), im: ctx.sub(&self.im, &o.im) }
    }

    pub fn mul(&self, o: &Complex, ctx: &Ctx) -> Complex {
        let re = ctx.sub(&ctx.mul(&self.re, &o.re), &ctx.mul(&self.im, &o.im));
        let im = ctx.add(&ctx.mul(&self.re, &o.im), &ctx.mul(&self.im, &o.re));
        Complex { re, im }
    }

    pub fn scale(&self, t: &BigFloat, ctx: &Ctx) -> Complex {
        Complex { re: ctx.mul(&self.re, t), im: ctx.mul(&self.im, t) }
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn div(&self, o: &Complex, ctx: &Ctx) -> Complex {
        let n2 = ctx.add(&ctx.mul(&o.re, &o.re), &ctx.mul(&o.im, &o.im));
        let num = self.mul(&o.conj(), ctx);
        Complex { re: ctx.div(&num.re, &n2), im: ctx.div(&num.im, &n2) }
    }

    pub fn neg(&self) -> Complex {
        Complex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn abs(&self, ctx: &mut Ctx) -> BigFloat {
        let n2 = ctx.add(&ctx.mul(&self.re, &self.re), &ctx.mul(&self.im, &self.im));
        ctx.sqrt(&n2)
    }

    pub fn is_within(&self, o: &Complex, tol: &BigFloat) -> bool {
        within(&self.re, &o.re, tol) && within(&self.im, &o.im, tol)
    }
}

/// Truncated power series sum c_k s^k, k < order, with complex coefficients.
#[derive(Clone, Debug)]
pub struct Series {
    pub coeffs: Vec<Complex>,
}

impl Series {
    pub fn zero(order: usize, ctx: &Ctx) -> Self {
        Series { coeffs: vec![Complex::zero(ctx); order] }
    }

    pub fn constant(c: Complex, order: usize, ctx: &Ctx) -> Self {
        let mut s = Series::zero(order, ctx);
        s.coeffs[0] = c;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// exp(t s) = sum t^k / k! s^k, the series of x^{-s} with t = -ln x.
    pub fn exp_linear(t: &Complex, order: usize, ctx: &mut Ctx) -> Self {
        let mut s = Series::zero(order, ctx);
        let mut term = Complex::one(ctx);
        for k in 0..order {
            if k > 0 {
                let kf = BigFloat::from_i64(k as i64, ctx.p);
                term = term.mul(t, ctx);
                term = Complex { re: ctx.div(&term.re, &kf), im: ctx.div(&term.im, &kf) };
            }
            s.coeffs[k] = term.clone();
        }
        s
    }

    pub fn add(&self, o: &Series, ctx: &Ctx) -> Series {
        assert_eq!(self.order(), o.order());
        Series {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b, ctx)).collect(),
        }
    }

    pub fn sub(&self, o: &Series, ctx: &Ctx) -> Series {
        assert_eq!(self.order(), o.order());
        Series {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b, ctx)).collect(),
        }
    }

    pub fn mul(&self, o: &Series, ctx: &Ctx) -> Series {
        assert_eq!(self.order(), o.order());
        let n = self.order();
        let mut out = Series::zero(n, ctx);
        for i in 0..n {
            for j in 0..n - i {
                let t = self.coeffs[i].mul(&o.coeffs[j], ctx);
                out.coeffs[i + j] = out.coeffs[i + j].add(&t, ctx);
            }
        }
        out
    }

    pub fn scale_complex(&self, c: &Complex, ctx: &Ctx) -> Series {
        Series { coeffs: self.coeffs.iter().map(|a| a.mul(c, ctx)).collect() }
    }

    pub fn scale(&self, t: &BigFloat, ctx: &Ctx) -> Series {
        Series { coeffs: self.coeffs.iter().map(|a| a.scale(t, ctx)).collect() }
    }

    /// Multiply by the monomial s (shift coefficients up, dropping overflow).
    pub fn mul_s(&self, ctx: &Ctx) -> Series {
        let n = self.order();
        let mut out = Series::zero(n, ctx);
        for k in 1..n {
            out.coeffs[k] = self.coeffs[k - 1].clone();
        }
        out
    }

    /// Multiplicative inverse, requiring an invertible constant term.
    pub fn invert(&self, ctx: &Ctx) -> Series {
        let n = self.order();
        let mut out = Series::zero(n, ctx);
        let c0 = &self.coeffs[0];
        out.coeffs[0] = Complex::one(ctx).div(c0, ctx);
        for k in 1..n {
            let mut acc = Complex::zero(ctx);
            for j in 0..k {
                let t = out.coeffs[j].mul(&self.coeffs[k - j], ctx);
                acc = acc.add(&t, ctx);
            }
            out.coeffs[k] = acc.neg().div(c0, ctx);
        }
        out
    }
}

/// Bernoulli numbers B_0..B_n (B_1 = -1/2), exact.
pub fn bernoulli_upto(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from(binom.clone()) * bj;
            binom = &binom * BigInt::from((m + 1 - j) as u64) / BigInt::from((j + 1) as u64);
        }
        let c = BigRational::from(BigInt::from((m + 1) as u64));
        b.push(-acc / c);
    }
    b
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k.min(n - k) {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Rational-to-f64 for reporting.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Sign of a rational as -1, 0, 1.
pub fn ratio_sign(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::new(256)
    }

    #[test]
    fn pi_matches_reference_digits() {
        let mut c = ctx();
        let pi = c.pi();
        let reference = BigFloat::parse(
            "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899",
            Radix::Dec,
            c.p,
            RoundingMode::ToEven,
            &mut Consts::new().unwrap(),
        );
        assert!(within(&pi, &reference, &c.pow2(-250)));
    }

    #[test]
    fn exp_ln_round_trip() {
        let mut c = ctx();
        let two = c.from_i64(2);
        let l = c.ln(&two);
        let e = c.exp(&l);
        assert!(within(&e, &two, &c.pow2(-240)));
    }

    #[test]
    fn fourth_root_of_unity_is_i() {
        let mut c = ctx();
        let i = Complex::root_of_unity(&mut c, 1, 4);
        assert!(within(&i.re, &c.zero(), &c.pow2(-240)));
        assert!(within(&i.im, &c.one(), &c.pow2(-240)));
        // i^2 = -1
        let m1 = i.mul(&i, &c);
        assert!(within(&m1.re, &c.from_i64(-1), &c.pow2(-240)));
    }

    #[test]
    fn exp_linear_is_multiplicative() {
        let mut c = ctx();
        let a = Complex { re: c.from_i64(2), im: c.from_i64(1) };
        let b = Complex { re: c.from_i64(-1), im: c.from_i64(3) };
        let sa = Series::exp_linear(&a, 6, &mut c);
        let sb = Series::exp_linear(&b, 6, &mut c);
        let sum = a.add(&b, &c);
        let sab = Series::exp_linear(&sum, 6, &mut c);
        let prod = sa.mul(&sb, &c);
        let tol = c.pow2(-220);
        for k in 0..6 {
            assert!(prod.coeffs[k].is_within(&sab.coeffs[k], &tol), "coefficient {k}");
        }
    }

    #[test]
    fn series_inverse() {
        let mut c = ctx();
        let a = Complex { re: c.from_i64(1), im: c.zero() };
        let mut s = Series::constant(a, 5, &c);
        s.coeffs[1] = Complex { re: c.from_i64(-3), im: c.from_i64(2) };
        s.coeffs[2] = Complex { re: c.from_i64(7), im: c.zero() };
        let inv = s.invert(&c);
        let prod = s.mul(&inv, &c);
        let tol = c.pow2(-220);
        assert!(prod.coeffs[0].is_within(&Complex::one(&c), &tol));
        for k in 1..5 {
            assert!(prod.coeffs[k].is_within(&Complex::zero(&c), &tol));
        }
    }

    #[test]
    fn bernoulli_reference_values() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let b = bernoulli_upto(12);
        assert_eq!(b[0], r(1, 1));
        assert_eq!(b[1], r(-1, 2));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[3], r(0, 1));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[6], r(1, 42));
        assert_eq!(b[8], r(-1, 30));
        assert_eq!(b[10], r(5, 66));
        assert_eq!(b[12], r(-691, 2730));
    }

    #[test]
    fn nearest_int_exact_and_close() {
        let mut c = ctx();
        let x = c.from_i64(42);
        let (n, d) = nearest_int(&mut c, &x);
        assert_eq!(n, BigInt::from(42));
        assert!(within(&d, &c.zero(), &c.pow2(-250)));
        let m7 = c.from_i64(-7);
        let y = c.add(&m7, &c.pow2(-100));
        let (n2, _) = nearest_int(&mut c, &y);
        assert_eq!(n2, BigInt::from(-7));
    }

    #[test]
    fn binomial_row() {
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(10, 0), BigInt::from(1));
        assert_eq!(binomial(4, 7), BigInt::from(0));
    }
}
