//! Formal multiplicative elements of cyclotomic fields.
//!
//! An element is stored as an integer exponent vector over symbols
//! `(1 - zeta^a)`, keyed by the reduced angle `a/N` (so the same number
//! appearing at different levels has one canonical key), together with a
//! rational scalar and an optional real-quadratic factor for elements already
//! known to lie in a quadratic field. All maps the verifiers need — Galois
//! action, norms down a level, Euler-factor twists, numerical embeddings,
//! residue reductions and power testing — act directly on the exponents;
//! elements are never expanded into polynomial representations.

use crate::error::{Error, Result};
use crate::numberfield::{QuadElement, QuadField};
use crate::numerics::{BigFloat, Complex, Ctx};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd_u64(b, a % b) }
}

fn mod_pow_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn mod_inv_u64(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

/// Kronecker symbol (a/n) for n > 0.
pub fn kronecker(mut a: i64, mut n: i64) -> i32 {
    assert!(n > 0);
    let mut result = 1i32;
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    // pull out the 2-part of n
    while n % 2 == 0 {
        n /= 2;
        if a % 2 == 0 {
            return 0;
        }
        let am8 = a.rem_euclid(8);
        if am8 == 3 || am8 == 5 {
            result = -result;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let nm8 = n.rem_euclid(8);
            if nm8 == 3 || nm8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
            result = -result;
        }
        a = a.rem_euclid(n);
    }
    if n == 1 { result } else { 0 }
}

/// Quadratic character attached to a real quadratic field, evaluated through
/// the Kronecker symbol of the discriminant.
pub fn quad_character(f: &QuadField, t: u64) -> i32 {
    kronecker(f.disc.to_i64().expect("small disc"), t as i64)
}

/// A formal product  scalar * quad * prod (1 - zeta^(num/den))^e.
///
/// Keys are reduced fractions (den, num) with den >= 3, 1 <= num < den,
/// gcd(num, den) = 1; the symbol (1 - zeta_2) = 2 folds into the scalar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultElement {
    pub level: u64,
    pub exps: BTreeMap<(u64, u64), BigInt>,
    pub scalar: BigRational,
    /// optional factor already known in a real quadratic field: (D, element)
    pub quad: Option<(u64, QuadElement)>,
}

impl MultElement {
    pub fn one(level: u64) -> Self {
        MultElement { level, exps: BTreeMap::new(), scalar: BigRational::one(), quad: None }
    }

    /// The symbol 1 - zeta_level^a.
    pub fn symbol(level: u64, a: u64) -> Result<Self> {
        let mut out = Self::one(level);
        out.push_symbol(level, a, &BigInt::one())?;
        Ok(out)
    }

    fn push_symbol(&mut self, level: u64, a: u64, e: &BigInt) -> Result<()> {
        let a = a % level;
        if a == 0 {
            return Err(Error::InvalidArgument("zero angle symbol".into()));
        }
        let g = gcd_u64(a, level);
        let (den, num) = (level / g, a / g);
        if den == 1 {
            return Err(Error::InvalidArgument("zero angle symbol".into()));
        }
        if den == 2 {
            // 1 - (-1) = 2
            let two = BigRational::from(BigInt::from(2));
            self.scalar *= pow_rational(&two, e);
            return Ok(());
        }
        let entry = self.exps.entry((den, num)).or_insert_with(BigInt::zero);
        *entry += e;
        if entry.is_zero() {
            self.exps.remove(&(den, num));
        }
        Ok(())
    }

    pub fn is_formally_one(&self) -> bool {
        self.exps.is_empty() && self.scalar.is_one() && self.quad.is_none()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let level = self.level.lcm(&o.level);
        let mut out = self.clone();
        out.level = level;
        for (k, e) in &o.exps {
            let entry = out.exps.entry(*k).or_insert_with(BigInt::zero);
            *entry += e;
            if entry.is_zero() {
                out.exps.remove(k);
            }
        }
        out.scalar *= &o.scalar;
        out.quad = mul_quad_opt(&out.quad, &o.quad)?;
        Ok(out)
    }

    pub fn pow(&self, e: &BigInt) -> Result<Self> {
        let mut out = Self::one(self.level);
        for (k, ex) in &self.exps {
            out.exps.insert(*k, ex * e);
        }
        out.exps.retain(|_, v| !v.is_zero());
        out.scalar = pow_rational(&self.scalar, e);
        out.quad = match &self.quad {
            None => None,
            Some((d, x)) => {
                let f = QuadField::new(*d)?;
                let ei = e.to_i64().ok_or_else(|| Error::InvalidArgument("exponent too large".into()))?;
                Some((*d, f.pow(x, ei)?))
            }
        };
        Ok(out)
    }

    pub fn inv(&self) -> Result<Self> {
        self.pow(&BigInt::from(-1))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut out = self.clone();
        out.scalar *= r;
        out
    }

    pub fn mul_quad(&self, d: u64, x: &QuadElement) -> Result<Self> {
        let mut out = self.clone();
        out.quad = mul_quad_opt(&out.quad, &Some((d, x.clone())))?;
        Ok(out)
    }

    /// Galois action of t in (Z/level)^*: each symbol angle a/den maps to
    /// t*a/den; the quadratic factor moves by the quadratic character.
    pub fn galois_act(&self, t: u64) -> Result<Self> {
        if gcd_u64(t % self.level, self.level) != 1 {
            return Err(Error::InvalidArgument("Galois index not a unit".into()));
        }
        let mut out = Self::one(self.level);
        out.scalar = self.scalar.clone();
        for ((den, num), e) in &self.exps {
            let tn = (t % den) as u128 * *num as u128 % *den as u128;
            out.push_symbol(*den, tn as u64, e)?;
        }
        out.quad = match &self.quad {
            None => None,
            Some((d, x)) => {
                let f = QuadField::new(*d)?;
                if quad_character(&f, t) == -1 {
                    Some((*d, f.conj(x)))
                } else {
                    Some((*d, x.clone()))
                }
            }
        };
        Ok(out)
    }

    /// Product of Galois conjugates over an explicit list of units mod level.
    pub fn norm_subgroup(&self, elems: &[u64]) -> Result<Self> {
        let mut out = Self::one(self.level);
        for &t in elems {
            out = out.mul(&self.galois_act(t)?)?;
        }
        Ok(out)
    }

    /// Norm from level N = target * ell (ell prime, not dividing target) down
    /// to level `target`, i.e. the product over {t mod N : t = 1 mod target}.
    ///
    /// Computed in closed form per symbol: a full progression collapses to a
    /// single symbol (the polynomial identity prod_j (1 - zeta_ell^j x)
    /// = 1 - x^ell), the missing non-unit index supplies the inverse-Frobenius
    /// twist, level-ell symbols norm to the scalar ell, and lower-level
    /// symbols are fixed so contribute their (ell - 1)-th power.
    pub fn norm_to_level(&self, target: u64) -> Result<Self> {
        let n = self.level;
        if n % target != 0 {
            return Err(Error::InvalidArgument("target must divide the level".into()));
        }
        let ell = n / target;
        if ell == 1 {
            return Ok(self.clone());
        }
        if !is_prime_u64(ell) {
            return Err(Error::InvalidArgument(
                "level drop must be by a single prime; iterate for composite drops".into(),
            ));
        }
        // tower case: ell still divides the target, so the norm subgroup
        // {t = 1 mod target} has order ell and the distribution relation
        // collapses each moving symbol to its ell-th power angle
        let tower = target % ell == 0;
        let sub_order = BigInt::from(if tower { ell } else { ell - 1 });
        let s = if tower {
            0
        } else {
            mod_inv_u64(ell % target, target)
                .ok_or_else(|| Error::Internal("inverse of ell mod target".into()))?
        };
        let mut out = Self::one(target);
        out.scalar = pow_rational(&self.scalar, &sub_order);
        for ((den, num), e) in &self.exps {
            if target % den == 0 {
                // fixed by the whole subgroup
                out.push_symbol(*den, *num, &(e * &sub_order))?;
            } else if tower {
                // prod_j (1 - x zeta_ell^j) = 1 - x^ell
                out.push_symbol(den / ell, num % (den / ell), e)?;
            } else if *den == ell {
                // norm of 1 - zeta_ell^num over all units is the scalar ell
                let le = BigRational::from(BigInt::from(ell));
                out.scalar *= pow_rational(&le, e);
            } else {
                // raw index at level n
                let a = (*num as u128 * (n / den) as u128 % n as u128) as u64;
                let a_mod = a % target;
                let sa = (s as u128 * a as u128 % target as u128) as u64;
                out.push_symbol(target, a_mod, e)?;
                out.push_symbol(target, sa, &(-e))?;
            }
        }
        out.quad = match &self.quad {
            None => None,
            Some((d, x)) => {
                let f = QuadField::new(*d)?;
                // count character values over the subgroup {t = 1 mod target}
                let mut plus = 0i64;
                let mut minus = 0i64;
                let mut t = 1u64;
                loop {
                    if gcd_u64(t, n) == 1 {
                        if quad_character(&f, t) == -1 { minus += 1 } else { plus += 1 }
                    }
                    t += target;
                    if t >= n { break; }
                }
                let y = f.mul(&f.pow(x, plus)?, &f.pow(&f.conj(x), minus)?);
                Some((*d, y))
            }
        };
        Ok(out)
    }

    /// Apply the Euler operator 1 - ell * Frob_ell^{-1} (exponent-level).
    pub fn euler_twist(&self, ell: u64) -> Result<Self> {
        let s = mod_inv_u64(ell % self.level, self.level)
            .ok_or_else(|| Error::InvalidArgument("twisting prime divides the level".into()))?;
        let frob_inv = self.galois_act(s)?;
        self.mul(&frob_inv.pow(&BigInt::from(-(ell as i64)))?)
    }

    /// Apply delta_T = prod_{ell in T} (1 - ell Frob_ell^{-1}).
    pub fn delta_twist(&self, t_set: &[u64]) -> Result<Self> {
        let mut out = self.clone();
        for &ell in t_set {
            out = out.euler_twist(ell)?;
        }
        Ok(out)
    }

    /// Numerical value under zeta_N -> exp(2 pi i (1 + conj_shift)/N); the
    /// fixed embedding is `galois = 1`, other embeddings are reached by a
    /// Galois index first.
    pub fn embed_numeric(&self, ctx: &mut Ctx, galois: u64) -> Result<Complex> {
        let x = if galois == 1 { self.clone() } else { self.galois_act(galois)? };
        let mut val = Complex::from_real(ctx.from_ratio(&x.scalar), ctx);
        for ((den, num), e) in &x.exps {
            let z = Complex::root_of_unity(ctx, *num as i64, *den as i64);
            let sym = Complex::one(ctx).sub(&z, ctx);
            let ei = e.to_i64().ok_or_else(|| Error::Precision("exponent too large".into()))?;
            val = mul_pow_complex(ctx, &val, &sym, ei);
        }
        if let Some((d, q)) = &x.quad {
            let f = QuadField::new(*d)?;
            let qe = f.embed(ctx, q);
            val = val.mul(&Complex::from_real(qe, ctx), ctx);
        }
        Ok(val)
    }

    /// log |sigma_t(x)| under the fixed embedding.
    pub fn log_abs(&self, ctx: &mut Ctx, galois: u64) -> Result<BigFloat> {
        let v = self.embed_numeric(ctx, galois)?;
        let a = v.abs(ctx);
        Ok(ctx.ln(&a))
    }

    /// Exact residue in F_q^*: zeta_level maps to root^((q-1)/level) for a
    /// chosen primitive root mod q; requires q = 1 mod level and all symbols
    /// and the scalar invertible mod q.
    pub fn reduce_mod(&self, q: u64, root: u64) -> Result<u64> {
        if q < 3 || (q - 1) % self.level != 0 {
            return Err(Error::InvalidArgument("prime not 1 mod level".into()));
        }
        let mut val = 1u64;
        let zeta = mod_pow_u64(root, (q - 1) / self.level, q);
        if zeta == 1 && self.level > 1 && !self.exps.is_empty() {
            return Err(Error::InvalidArgument("chosen root has too small order".into()));
        }
        for ((den, num), e) in &self.exps {
            let z = mod_pow_u64(zeta, (self.level / den) as u64 * num, q);
            let sym = (1 + q - z) % q;
            if sym == 0 {
                return Err(Error::InvalidArgument("symbol not invertible mod q".into()));
            }
            val = (val as u128 * pow_residue(sym, e, q) as u128 % q as u128) as u64;
        }
        // rational scalar
        let num_res = bigint_mod(self.scalar.numer(), q);
        let den_res = bigint_mod(self.scalar.denom(), q);
        if num_res == 0 || den_res == 0 {
            return Err(Error::InvalidArgument("scalar not invertible mod q".into()));
        }
        let den_inv = mod_inv_u64(den_res, q).ok_or_else(|| Error::Internal("inverse".into()))?;
        val = (val as u128 * num_res as u128 % q as u128) as u64;
        val = (val as u128 * den_inv as u128 % q as u128) as u64;
        if let Some((d, x)) = &self.quad {
            let f = QuadField::new(*d)?;
            let sq = sqrt_d_mod(&f, q, self.level, root)?;
            let r = quad_residue_mod(&f, x, q, sq)?;
            val = (val as u128 * r as u128 % q as u128) as u64;
        }
        Ok(val)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .exps
            .iter()
            .map(|((den, num), e)| json!([den, num, e.to_string()]))
            .collect();
        let mut v = json!({
            "level": self.level,
            "terms": terms,
            "scalar": [self.scalar.numer().to_string(), self.scalar.denom().to_string()],
        });
        if let Some((d, x)) = &self.quad {
            v["quad"] = json!({
                "d": d,
                "a": [x.a.numer().to_string(), x.a.denom().to_string()],
                "b": [x.b.numer().to_string(), x.b.denom().to_string()],
            });
        }
        v
    }
}

fn mul_quad_opt(
    a: &Option<(u64, QuadElement)>,
    b: &Option<(u64, QuadElement)>,
) -> Result<Option<(u64, QuadElement)>> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(x), None) => Ok(Some(x.clone())),
        (None, Some(y)) => Ok(Some(y.clone())),
        (Some((d1, x)), Some((d2, y))) => {
            if d1 != d2 {
                return Err(Error::InvalidArgument("mismatched quadratic fields".into()));
            }
            let f = QuadField::new(*d1)?;
            Ok(Some((*d1, f.mul(x, y))))
        }
    }
}

fn pow_rational(r: &BigRational, e: &BigInt) -> BigRational {
    if e.is_zero() {
        return BigRational::one();
    }
    let eu = e.abs().to_u64().expect("moderate exponent");
    let mut out = BigRational::one();
    let mut base = r.clone();
    let mut k = eu;
    while k > 0 {
        if k & 1 == 1 {
            out *= &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    if e.is_negative() { out.recip() } else { out }
}

fn mul_pow_complex(ctx: &mut Ctx, acc: &Complex, base: &Complex, e: i64) -> Complex {
    let mut out = acc.clone();
    let b = if e < 0 { Complex::one(ctx).div(base, ctx) } else { base.clone() };
    for _ in 0..e.unsigned_abs() {
        out = out.mul(&b, ctx);
    }
    out
}

fn pow_residue(base: u64, e: &BigInt, q: u64) -> u64 {
    let em = bigint_mod(e, q - 1);
    mod_pow_u64(base, em, q)
}

fn bigint_mod(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Residue of a quadratic-field element at a split prime q via sqrt(D) mod q.
/// Square root of d mod q pinned compatibly with a chosen root of unity:
/// when the discriminant divides `level`, the quadratic Gauss sum in the
/// subfield of mu_disc determines the sign, so that mixed
/// cyclotomic-quadratic elements reduce through a genuine ring map. When the
/// cyclotomic level does not see the discriminant the fields are linearly
/// disjoint and either sign is consistent.
fn sqrt_d_mod(f: &QuadField, q: u64, level: u64, root: u64) -> Result<u64> {
    let disc = f.disc.to_u64().expect("small disc");
    let d = f.d.to_u64().expect("small D") % q;
    if level % disc == 0 && (q - 1) % disc == 0 {
        let zeta = mod_pow_u64(root, (q - 1) / disc, q);
        let mut s: u128 = 0;
        for t in 1..disc {
            match quad_character(f, t) {
                1 => s += mod_pow_u64(zeta, t, q) as u128,
                -1 => s += (q - mod_pow_u64(zeta, t, q)) as u128,
                _ => {}
            }
        }
        let s = (s % q as u128) as u64;
        // Gauss sum squares to the discriminant
        if (s as u128 * s as u128 % q as u128) as u64 != disc % q {
            return Err(Error::Internal("gauss sum square mismatch".into()));
        }
        // disc is d or 4d; in the latter case halve
        if disc == f.d.to_u64().expect("small D") {
            Ok(s)
        } else {
            let inv2 = mod_inv_u64(2, q).ok_or_else(|| Error::Internal("inverse".into()))?;
            Ok((s as u128 * inv2 as u128 % q as u128) as u64)
        }
    } else {
        sqrt_mod(d, q)
            .ok_or_else(|| Error::InvalidArgument("prime inert in the quadratic field".into()))
    }
}

fn quad_residue_mod(f: &QuadField, x: &QuadElement, q: u64, r: u64) -> Result<u64> {
    // omega residue
    let omega = if (f.disc.to_i64().unwrap()) % 4 == 1 {
        // (1 + sqrt D)/2
        let inv2 = mod_inv_u64(2, q).unwrap();
        ((1 + r) as u128 * inv2 as u128 % q as u128) as u64
    } else {
        r
    };
    let an = bigint_mod(x.a.numer(), q);
    let ad = bigint_mod(x.a.denom(), q);
    let bn = bigint_mod(x.b.numer(), q);
    let bd = bigint_mod(x.b.denom(), q);
    if ad == 0 || bd == 0 {
        return Err(Error::InvalidArgument("denominator divisible by q".into()));
    }
    let a = (an as u128 * mod_inv_u64(ad, q).unwrap() as u128 % q as u128) as u64;
    let b = (bn as u128 * mod_inv_u64(bd, q).unwrap() as u128 % q as u128) as u64;
    let val = (a as u128 + b as u128 * omega as u128) % q as u128;
    if val == 0 {
        return Err(Error::InvalidArgument("element not invertible mod q".into()));
    }
    Ok(val as u64)
}

/// Square root mod prime q (Tonelli–Shanks), None if not a residue.
pub fn sqrt_mod(a: u64, q: u64) -> Option<u64> {
    let a = a % q;
    if a == 0 {
        return Some(0);
    }
    if q == 2 {
        return Some(a);
    }
    if mod_pow_u64(a, (q - 1) / 2, q) != 1 {
        return None;
    }
    if q % 4 == 3 {
        return Some(mod_pow_u64(a, (q + 1) / 4, q));
    }
    // Tonelli–Shanks
    let mut s = 0u32;
    let mut qq = q - 1;
    while qq % 2 == 0 {
        qq /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while mod_pow_u64(z, (q - 1) / 2, q) != q - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow_u64(z, qq, q);
    let mut t = mod_pow_u64(a, qq, q);
    let mut r = mod_pow_u64(a, (qq + 1) / 2, q);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = (tt as u128 * tt as u128 % q as u128) as u64;
            i += 1;
            if i == m {
                return None;
            }
        }
        let b = mod_pow_u64(c, 1 << (m - i - 1), q);
        m = i;
        c = (b as u128 * b as u128 % q as u128) as u64;
        t = (t as u128 * c as u128 % q as u128) as u64;
        r = (r as u128 * b as u128 % q as u128) as u64;
    }
    Some(r)
}

/// conductor of the real quadratic field (its discriminant as a u64)
pub fn conductor(f: &QuadField) -> u64 {
    f.disc.to_u64().expect("positive discriminant")
}

/// The twisted cyclotomic number at level n*f: the character-weighted product
/// of the conjugates of 1 - zeta_{nf} over the Galois group fixing level n.
pub fn alpha_n(f: &QuadField, n: u64) -> Result<MultElement> {
    let cond = conductor(f);
    if gcd_u64(n, cond) != 1 {
        return Err(Error::InvalidArgument("n must be coprime to the conductor".into()));
    }
    let level = n * cond;
    let mut out = MultElement::one(level);
    let mut t = 1u64;
    while t < level {
        if gcd_u64(t, level) == 1 {
            let chi = quad_character(f, t);
            debug_assert!(chi != 0);
            out.push_symbol(level, t, &BigInt::from(chi))?;
        }
        t += n;
    }
    Ok(out)
}

/// Galois indices t mod (n*f) fixing the real field L' = F(mu_n)^+, i.e.
/// t = +/-1 mod n with trivial quadratic character, one representative per
/// conjugation pair.
pub fn stark_norm_reps(f: &QuadField, n: u64) -> Result<Vec<u64>> {
    let cond = conductor(f);
    let level = n * cond;
    let mut group = Vec::new();
    for t in 1..level {
        if gcd_u64(t, level) != 1 {
            continue;
        }
        let tn = t % n;
        if (tn == 1 % n || tn == (n - 1) % n) && quad_character(f, t) == 1 {
            group.push(t);
        }
    }
    // one representative per {t, -t}
    let mut reps = Vec::new();
    for &t in &group {
        let neg = level - t;
        if t <= neg {
            reps.push(t);
        }
    }
    Ok(reps)
}

/// Rank-1 Rubin–Stark unit for L' = F(mu_n)^+: the norm to L' of the
/// delta_T-twisted cyclotomic number 1 - zeta_{nf}, taken over one
/// representative per complex-conjugate pair (the identity is asserted in the
/// torsion-free quotient).
pub fn stark_unit_rank1(f: &QuadField, n: u64, t_set: &[u64]) -> Result<MultElement> {
    let cond = conductor(f);
    let level = n * cond;
    for &ell in t_set {
        if level % ell == 0 {
            return Err(Error::InvalidArgument("T meets the ramified set".into()));
        }
    }
    let base = MultElement::symbol(level, 1)?.delta_twist(t_set)?;
    base.norm_subgroup(&stark_norm_reps(f, n)?)
}

/// Tensor theta = sum_sigma sigma(alpha) (x) sigma over a finite abelian
/// Galois group, stored as one MultElement per group element.
#[derive(Clone, Debug)]
pub struct ThetaElement {
    pub group: Arc<crate::groupring::FiniteAbelianGroup>,
    pub values: Vec<MultElement>,
}

/// Verdict of a probabilistic m-th power test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerVerdict {
    Yes,
    No,
    Inconclusive,
}

/// Probabilistic test whether x (an element of the real quadratic field,
/// presented as a formal product) is an m-th power in F^*. Exact valuation
/// pre-checks apply when x carries a pure quadratic representation; the
/// residue tests use split primes q = 1 mod lcm(level, m).
pub fn mth_power_test(
    f: &QuadField,
    x: &MultElement,
    m: u64,
    trials: usize,
    seed_prime_start: u64,
) -> Result<(PowerVerdict, Vec<u64>)> {
    if m % 2 == 0 {
        return Err(Error::InvalidArgument("modulus must be odd".into()));
    }
    if m == 1 {
        return Ok((PowerVerdict::Yes, Vec::new()));
    }
    let level = x.level.lcm(&m);
    let mut used = Vec::new();
    let mut q = seed_prime_start.max(level + 2);
    // align q to 1 mod level
    q += (level - (q - 1) % level) % level;
    let mut done = 0usize;
    while done < trials {
        if is_prime_u64(q)
            && f.d.to_u64().map(|d| sqrt_mod(d % q, q).is_some()).unwrap_or(false)
        {
            let root = primitive_root_mod(q);
            match x.reduce_mod(q, root) {
                Ok(r) => {
                    let t = mod_pow_u64(r, (q - 1) / m, q);
                    used.push(q);
                    if t != 1 {
                        return Ok((PowerVerdict::No, used));
                    }
                    done += 1;
                }
                Err(_) => {}
            }
        }
        q += level;
        if q > 1u64 << 40 {
            return Ok((PowerVerdict::Inconclusive, used));
        }
    }
    Ok((PowerVerdict::Yes, used))
}

/// Probabilistic test whether x is a square in F^* up to sign, i.e. whether
/// x or -x is a square. Residue symbols are taken at split primes
/// q = 1 mod lcm(4, level); the congruence q = 1 mod 4 makes -1 a square
/// mod q, so the symbol is constant on {x, -x}. A symbol of -1 disproves
/// membership exactly; `trials` successes return Yes.
pub fn square_test_mod_torsion(
    f: &QuadField,
    x: &MultElement,
    trials: usize,
    seed_prime_start: u64,
) -> Result<(PowerVerdict, Vec<u64>)> {
    let level = x.level.lcm(&4);
    let mut used = Vec::new();
    let mut q = seed_prime_start.max(level + 2);
    q += (level - (q - 1) % level) % level;
    let mut done = 0usize;
    while done < trials {
        if is_prime_u64(q)
            && f.d.to_u64().map(|d| sqrt_mod(d % q, q).is_some()).unwrap_or(false)
        {
            let root = primitive_root_mod(q);
            if let Ok(r) = x.reduce_mod(q, root) {
                let t = mod_pow_u64(r, (q - 1) / 2, q);
                used.push(q);
                if t != 1 {
                    return Ok((PowerVerdict::No, used));
                }
                done += 1;
            }
        }
        q += level;
        if q > 1u64 << 40 {
            return Ok((PowerVerdict::Inconclusive, used));
        }
    }
    Ok((PowerVerdict::Yes, used))
}

pub fn primitive_root_mod(q: u64) -> u64 {
    let mut factors = Vec::new();
    let mut n = q - 1;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            factors.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    'outer: for g in 2..q {
        for &fp in &factors {
            if mod_pow_u64(g, (q - 1) / fp, q) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("primitive root exists for prime modulus")
}
