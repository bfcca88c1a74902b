//! Dirichlet L-functions with place-set modifications, vanishing orders,
//! equivariant leading terms at s = 0 and analytic regulators.
//!
//! Abelian fields over Q are presented through a modulus M and the subgroup
//! of (Z/M)^* fixing the field. Leading Taylor coefficients at s = 0 are
//! assembled symbolically: every factor (Hurwitz zeta sums for the primitive
//! L-function, finite Euler factors, T-factors) is expanded as a truncated
//! series and multiplied, so no numerical differentiation is involved.

use crate::cyclotomic::{quad_character, MultElement};
use crate::error::{Error, Result};
use crate::groupring::{quotient_group, unit_group, QuotientGroup, Subgroup, UnitGroup};
use crate::numberfield::{primes_above, valuation_at, QuadElement, QuadField, Splitting};
use crate::numerics::{bernoulli_upto, BigFloat, Complex, Ctx, Series};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::sync::Arc;

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd_u64(b, a % b) }
}

/// A rational place of Q: the archimedean place or a finite prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Inf,
    Finite(u64),
}

/// An abelian field L/Q inside Q(mu_M), presented by the subgroup of
/// (Z/M)^* that fixes it.
pub struct AbelianFieldQ {
    pub modulus: u64,
    pub units: UnitGroup,
    pub fixing: Subgroup,
    pub quotient: QuotientGroup,
    /// unit residue representing each coset of the Galois group of L/Q
    pub coset_res: Vec<u64>,
}

impl AbelianFieldQ {
    pub fn new(modulus: u64, fixing_residues: &[u64]) -> Result<Self> {
        let units = unit_group(modulus);
        let mut gens = Vec::new();
        for &t in fixing_residues {
            let idx = units
                .index_of(t)
                .ok_or_else(|| Error::InvalidArgument("fixing residue not a unit".into()))?;
            gens.push(idx);
        }
        let fixing = Subgroup::from_gens(&units.group, &gens);
        let quotient = quotient_group(&units.group, &fixing);
        let coset_res = quotient
            .section
            .iter()
            .map(|&g| units.residue(g))
            .collect();
        Ok(AbelianFieldQ {
            modulus,
            units,
            fixing,
            quotient,
            coset_res,
        })
    }

    /// The rationals themselves (trivial Galois group, presented mod 3).
    pub fn rationals() -> Self {
        Self::new(3, &[2]).expect("trivial field")
    }

    pub fn group_order(&self) -> usize {
        self.quotient.group.order()
    }

    /// Galois coset of the residue t (requires gcd(t, M) = 1).
    pub fn coset_of(&self, t: u64) -> Result<usize> {
        let idx = self
            .units
            .index_of(t)
            .ok_or_else(|| Error::InvalidArgument("residue not a unit".into()))?;
        Ok(self.quotient.project[idx])
    }

    pub fn is_real(&self) -> bool {
        self.modulus <= 2 || {
            let idx = self.units.index_of(self.modulus - 1).expect("-1 is a unit");
            self.fixing.contains(idx)
        }
    }

    /// All characters of the Galois group of L/Q, i.e. characters of
    /// (Z/M)^* trivial on the fixing subgroup. The trivial character is first.
    pub fn characters(&self) -> Vec<DirichletChar> {
        let g = &self.units.group;
        let k = g.num_gens();
        let mut out = Vec::new();
        let mut exps = vec![0u64; k];
        loop {
            if let Some(ch) = DirichletChar::from_exponents(self, &exps) {
                out.push(ch);
            }
            // increment the exponent tuple
            let mut i = 0;
            loop {
                if i == k {
                    out.sort_by_key(|c: &DirichletChar| if c.is_trivial() { 0 } else { 1 });
                    return out;
                }
                exps[i] += 1;
                if exps[i] < g.factors[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }
}

/// A character of the Galois group of an abelian number field, kept as exact
/// rational angles on unit residues, with its conductor and primitive values.
#[derive(Clone, Debug)]
pub struct DirichletChar {
    pub modulus: u64,
    /// angle numerator/denominator at each element index of (Z/M)^*
    angles: Vec<(u64, u64)>,
    pub conductor: u64,
    /// primitive angles by residue mod conductor (units only)
    prim_angles: Vec<Option<(u64, u64)>>,
}

fn reduce_angle(num: u64, den: u64) -> (u64, u64) {
    let n = num % den;
    let g = gcd_u64(n, den).max(1);
    if n == 0 { (0, 1) } else { (n / g, den / g) }
}

impl DirichletChar {
    fn from_exponents(field: &AbelianFieldQ, exps: &[u64]) -> Option<Self> {
        let g = &field.units.group;
        // trivial on the fixing subgroup?
        let angle_of = |elem: usize| -> (u64, u64) {
            let es = g.exps(elem);
            // sum exps[i] * es[i] / factors[i] as an exact fraction mod 1
            let mut num: u128 = 0;
            let mut den: u128 = 1;
            for i in 0..es.len() {
                let d = g.factors[i] as u128;
                let n = (exps[i] as u128 * es[i] as u128) % d;
                num = (num * d + n * den) % (den * d);
                den *= d;
            }
            reduce_angle((num % den) as u64, den as u64)
        };
        for &h in &field.fixing.elements {
            if angle_of(h) != (0, 1) {
                return None;
            }
        }
        let angles: Vec<(u64, u64)> = (0..g.order()).map(angle_of).collect();
        let mut ch = DirichletChar {
            modulus: field.modulus,
            angles,
            conductor: 1,
            prim_angles: Vec::new(),
        };
        ch.compute_conductor(field);
        Some(ch)
    }

    /// angle of the character at residue t, None if t is not a unit mod M
    pub fn angle(&self, field: &AbelianFieldQ, t: u64) -> Option<(u64, u64)> {
        field.units.index_of(t).map(|i| self.angles[i])
    }

    fn compute_conductor(&mut self, field: &AbelianFieldQ) {
        let m = self.modulus;
        let divs: Vec<u64> = (1..=m).filter(|d| m % d == 0).collect();
        for &f0 in &divs {
            // trivial on every unit t = 1 mod f0?
            let mut ok = true;
            let mut t = 1u64;
            while t < m {
                if gcd_u64(t, m) == 1 {
                    if let Some(i) = field.units.index_of(t) {
                        if self.angles[i] != (0, 1) {
                            ok = false;
                            break;
                        }
                    }
                }
                t += f0;
            }
            if ok {
                self.conductor = f0;
                break;
            }
        }
        // primitive values: each residue a mod f0 coprime to f0 lifts to a
        // unit mod M congruent to a mod f0
        let f0 = self.conductor;
        if f0 == 1 {
            self.prim_angles = vec![Some((0, 1))];
            return;
        }
        let mut prim = vec![None; f0 as usize];
        for a in 1..f0 {
            if gcd_u64(a, f0) != 1 {
                continue;
            }
            let mut t = a;
            while gcd_u64(t % m, m) != 1 {
                t += f0;
            }
            let i = field.units.index_of(t % m).expect("coprime lift");
            prim[a as usize] = Some(self.angles[i]);
        }
        self.prim_angles = prim;
    }

    pub fn is_trivial(&self) -> bool {
        self.conductor == 1
    }

    pub fn is_even(&self) -> bool {
        if self.conductor <= 2 {
            return true;
        }
        self.prim_value_angle(self.conductor - 1) == Some((0, 1))
    }

    /// primitive value angle at a residue (None if not coprime to conductor)
    pub fn prim_value_angle(&self, a: u64) -> Option<(u64, u64)> {
        self.prim_angles[(a % self.conductor) as usize]
    }

    pub fn prim_value(&self, ctx: &mut Ctx, a: u64) -> Complex {
        match self.prim_value_angle(a) {
            None => Complex::zero(ctx),
            Some((n, d)) => Complex::root_of_unity(ctx, n as i64, d as i64),
        }
    }

    /// inverse character (complex conjugate)
    pub fn inverse(&self) -> DirichletChar {
        let flip = |(n, d): (u64, u64)| if n == 0 { (0, 1) } else { (d - n, d) };
        DirichletChar {
            modulus: self.modulus,
            angles: self.angles.iter().map(|&a| flip(a)).collect(),
            conductor: self.conductor,
            prim_angles: self.prim_angles.iter().map(|o| o.map(flip)).collect(),
        }
    }

    /// Is the place completely split in the fixed field of the kernel?
    pub fn splits(&self, v: Place) -> bool {
        match v {
            Place::Inf => self.is_even(),
            Place::Finite(p) => self.prim_value_angle(p) == Some((0, 1)),
        }
    }
}

/// Vanishing order r(chi) of L_{S,T}(s, chi) at s = 0.
pub fn vanishing_order(chi: &DirichletChar, s_set: &[Place]) -> usize {
    if chi.is_trivial() {
        s_set.len() - 1
    } else {
        s_set.iter().filter(|&&v| chi.splits(v)).count()
    }
}

/// Taylor coefficients at s = 0 of the Hurwitz zeta function zeta(s, x),
/// x in (0, 1], by Euler–Maclaurin summation with symbolic s-series.
pub fn hurwitz_series(ctx: &mut Ctx, x: &BigRational, order: usize) -> Series {
    let p = ctx.p;
    let big_j = (p as u64).max(64);
    let k_terms = (p / 8).max(24);
    let bern = bernoulli_upto(2 * k_terms);
    // sum_{j=0}^{J-1} (x+j)^{-s}
    let mut sum = Series::zero(order, ctx);
    for j in 0..big_j {
        let xj = ctx.from_ratio(&(x + BigRational::from(BigInt::from(j))));
        let t = ctx.ln(&xj);
        let e = Series::exp_linear(&Complex::from_real(t, ctx).neg(), order, ctx);
        sum = sum.add(&e, ctx);
    }
    let xj = ctx.from_ratio(&(x + BigRational::from(BigInt::from(big_j))));
    let lnxj = ctx.ln(&xj);
    let pow_s = Series::exp_linear(&Complex::from_real(lnxj.clone(), ctx).neg(), order, ctx);
    // (x+J)^{1-s} / (s-1) = -(x+J) (x+J)^{-s} * 1/(1-s)
    let one_minus_s = Series::constant(Complex::one(ctx), order, ctx)
        .sub(&Series::constant(Complex::one(ctx), order, ctx).mul_s(ctx), ctx);
    let geom = one_minus_s.invert(ctx);
    let neg_xj = {
        let m1 = ctx.from_i64(-1);
        ctx.mul(&m1, &xj)
    };
    let t1 = pow_s.mul(&geom, ctx).scale(&neg_xj, ctx);
    sum = sum.add(&t1, ctx);
    // (1/2) (x+J)^{-s}
    let two = ctx.from_i64(2);
    let half = ctx.div(&ctx.one(), &two);
    sum = sum.add(&pow_s.scale(&half, ctx), ctx);
    // correction terms: B_{2k}/(2k)! * s(s+1)...(s+2k-2) * (x+J)^{-s-2k+1}
    let mut rising = Series::constant(Complex::one(ctx), order, ctx);
    let mut fact2k = BigRational::from(BigInt::from(1));
    let mut power = ctx.one(); // running (x+J)^{2k}
    for k in 1..=k_terms {
        // extend the rising factorial from (s)...(s+2(k-1)-2) to (s)...(s+2k-2)
        let lo = if k == 1 { 0 } else { 2 * (k - 1) - 1 };
        for i in lo..(2 * k - 1) {
            let ci = Complex::from_real(ctx.from_i64(i as i64), ctx);
            let factor = Series::constant(ci, order, ctx)
                .add(&Series::constant(Complex::one(ctx), order, ctx).mul_s(ctx), ctx);
            rising = rising.mul(&factor, ctx);
        }
        fact2k *= BigRational::from(BigInt::from((2 * k - 1) as u64))
            * BigRational::from(BigInt::from((2 * k) as u64));
        power = ctx.mul(&power, &xj);
        power = ctx.mul(&power, &xj);
        let pw = ctx.div(&power, &xj); // (x+J)^{2k-1}
        let coeff = &bern[2 * k] / &fact2k;
        let cf = ctx.from_ratio(&coeff);
        let sc = ctx.div(&cf, &pw);
        let scaled = rising.mul(&pow_s, ctx).scale(&sc, ctx);
        sum = sum.add(&scaled, ctx);
    }
    sum
}

/// Taylor coefficients at s = 0 of the primitive L-function L(s, chi):
/// f^{-s} * sum_a chi(a) zeta(s, a/f).
pub fn primitive_l_series(ctx: &mut Ctx, chi: &DirichletChar, order: usize) -> Series {
    let f = chi.conductor;
    let mut sum = Series::zero(order, ctx);
    for a in 1..=f {
        let ang = chi.prim_value_angle(a);
        if ang.is_none() && f > 1 {
            continue;
        }
        let x = BigRational::new(BigInt::from(a), BigInt::from(f));
        let h = hurwitz_series(ctx, &x, order);
        let val = chi.prim_value(ctx, a);
        sum = sum.add(&h.scale_complex(&val, ctx), ctx);
    }
    if f > 1 {
        let fv = ctx.from_i64(f as i64);
        let lnf = ctx.ln(&fv);
        let fs = Series::exp_linear(&Complex::from_real(lnf, ctx).neg(), order, ctx);
        sum = sum.mul(&fs, ctx);
    }
    sum
}

/// Taylor series at s = 0 of L_{S,T}(s, chi): the primitive L-function with
/// Euler factors removed at the finite places of S away from the conductor,
/// and T-factors (1 - chi(p) p^{1-s}) multiplied in.
pub fn l_st_series(
    ctx: &mut Ctx,
    chi: &DirichletChar,
    s_set: &[Place],
    t_set: &[u64],
    order: usize,
) -> Series {
    let mut series = primitive_l_series(ctx, chi, order);
    for &v in s_set {
        if let Place::Finite(p) = v {
            if chi.conductor % p == 0 {
                continue; // Euler factor at a ramified prime is already 1
            }
            // (1 - chi(p) p^{-s})
            let pv = ctx.from_i64(p as i64);
            let lnp = ctx.ln(&pv);
            let ps = Series::exp_linear(&Complex::from_real(lnp, ctx).neg(), order, ctx);
            let val = chi.prim_value(ctx, p);
            let fac = Series::constant(Complex::one(ctx), order, ctx)
                .sub(&ps.scale_complex(&val, ctx), ctx);
            series = series.mul(&fac, ctx);
        }
    }
    for &p in t_set {
        // (1 - chi(p) p^{1-s})
        let pv = ctx.from_i64(p as i64);
        let lnp = ctx.ln(&pv);
        let ps = Series::exp_linear(&Complex::from_real(lnp.clone(), ctx).neg(), order, ctx);
        let val = chi.prim_value(ctx, p);
        let pc = Complex::from_real(ctx.from_i64(p as i64), ctx);
        let fac = Series::constant(Complex::one(ctx), order, ctx)
            .sub(&ps.scale_complex(&val.mul(&pc, ctx), ctx), ctx);
        series = series.mul(&fac, ctx);
    }
    series
}

/// Coefficient vector per Galois-group element of the leading term
/// Theta^{(r)}_{L,S,T}(0): component at sigma is
/// (1/|G|) sum_chi chi(sigma) [s^r] L_{S,T}(s, chi).
pub fn theta_leading(
    ctx: &mut Ctx,
    field: &AbelianFieldQ,
    s_set: &[Place],
    t_set: &[u64],
    r: usize,
) -> Result<Vec<Complex>> {
    let chars = field.characters();
    for chi in &chars {
        if vanishing_order(chi, s_set) < r {
            return Err(Error::InvalidArgument(
                "requested order exceeds a character's vanishing order".into(),
            ));
        }
    }
    let n = field.group_order();
    let mut out = vec![Complex::zero(ctx); n];
    for chi in &chars {
        let series = l_st_series(ctx, chi, s_set, t_set, r + 1);
        let lead = series.coeffs[r].clone();
        for sigma in 0..n {
            let t = field.coset_res[sigma];
            let ang = chi.angle(field, t).expect("coset rep is a unit");
            let cv = Complex::root_of_unity(ctx, ang.0 as i64, ang.1 as i64);
            out[sigma] = out[sigma].add(&cv.mul(&lead, ctx), ctx);
        }
    }
    let nv = ctx.from_i64(n as i64);
    let ginv = ctx.div(&ctx.one(), &nv);
    Ok(out.into_iter().map(|c| c.scale(&ginv, ctx)).collect())
}

/// Determinant of a complex matrix (Gaussian elimination, partial pivoting).
pub fn complex_det(ctx: &mut Ctx, m: &mut Vec<Vec<Complex>>) -> Complex {
    let n = m.len();
    let mut det = Complex::one(ctx);
    for c in 0..n {
        // pivot
        let mut piv = c;
        let mut best = m[c][c].abs(ctx);
        for r in (c + 1)..n {
            let a = m[r][c].abs(ctx);
            if a > best {
                best = a.clone();
                piv = r;
            }
        }
        if piv != c {
            m.swap(piv, c);
            det = det.neg();
        }
        let d = m[c][c].clone();
        det = det.mul(&d, ctx);
        if crate::numerics::to_f64(&d.abs(ctx)) == 0.0 {
            return Complex::zero(ctx);
        }
        for r in (c + 1)..n {
            let factor = m[r][c].div(&d, ctx);
            for k in c..n {
                let t = factor.mul(&m[c][k], ctx);
                m[r][k] = m[r][k].sub(&t, ctx);
            }
        }
    }
    det
}

/// The analytic regulator R_V as a coefficient vector per Galois-group
/// element, given log |sigma(u_i)|_{w_j} through a callback
/// (i, j, sigma-coset) -> log value.
pub fn regulator_rv(
    ctx: &mut Ctx,
    field: &AbelianFieldQ,
    rank: usize,
    log_abs: &mut dyn FnMut(&mut Ctx, usize, usize, usize) -> Result<BigFloat>,
) -> Result<Vec<Complex>> {
    let n = field.group_order();
    // entries of the group-ring matrix: entry[i][j][sigma] with the value at
    // sigma^{-1}-coefficient convention folded in below
    let mut entries = vec![vec![vec![ctx.zero(); n]; rank]; rank];
    for i in 0..rank {
        for j in 0..rank {
            for sigma in 0..n {
                entries[i][j][sigma] = log_abs(ctx, i, j, sigma)?;
            }
        }
    }
    let chars = field.characters();
    let mut per_char = Vec::new();
    for chi in &chars {
        // chi applied to M_{ij} = -sum_sigma log|sigma u_i|_{w_j} sigma^{-1}
        let mut m: Vec<Vec<Complex>> = Vec::new();
        for row in entries.iter().take(rank) {
            let mut out_row = Vec::new();
            for cell in row.iter().take(rank) {
                let mut acc = Complex::zero(ctx);
                for (sigma, lv) in cell.iter().enumerate() {
                    let t = field.coset_res[sigma];
                    let ang = chi.angle(field, t).expect("unit");
                    // chi(sigma^{-1}) = conj(chi(sigma))
                    let cv = Complex::root_of_unity(ctx, ang.0 as i64, ang.1 as i64).conj();
                    acc = acc.add(&cv.scale(lv, ctx), ctx);
                }
                out_row.push(acc.neg());
            }
            m.push(out_row);
        }
        per_char.push(complex_det(ctx, &mut m));
    }
    // assemble coefficients: coeff_sigma = (1/|G|) sum_chi chi(sigma^{-1}) det_chi
    let mut out = vec![Complex::zero(ctx); n];
    for (chi, det) in chars.iter().zip(&per_char) {
        for sigma in 0..n {
            let t = field.coset_res[sigma];
            let ang = chi.angle(field, t).expect("unit");
            let cv = Complex::root_of_unity(ctx, ang.0 as i64, ang.1 as i64).conj();
            out[sigma] = out[sigma].add(&cv.mul(det, ctx), ctx);
        }
    }
    let nv = ctx.from_i64(n as i64);
    let ginv = ctx.div(&ctx.one(), &nv);
    Ok(out.into_iter().map(|c| c.scale(&ginv, ctx)).collect())
}

/// Relative agreement of two coefficient vectors: max |a-b| / max(1, max|a|).
pub fn relative_defect(ctx: &mut Ctx, a: &[Complex], b: &[Complex]) -> f64 {
    let mut max_diff = 0f64;
    let mut max_mag = 1f64;
    for (x, y) in a.iter().zip(b) {
        let d = crate::numerics::to_f64(&x.sub(y, ctx).abs(ctx)).abs();
        let m = crate::numerics::to_f64(&x.abs(ctx)).abs();
        if d > max_diff {
            max_diff = d;
        }
        if m > max_mag {
            max_mag = m;
        }
    }
    max_diff / max_mag
}

/// Report of the regulator-identity check relating the n-regulator of a real
/// quadratic field to the V-regulator of its minus-unit basis.
#[derive(Clone, Debug)]
pub struct LemmaComputeReport {
    pub d: u64,
    pub n: u64,
    pub nu_plus: usize,
    pub nu_minus: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

/// Normalized log absolute value of a quadratic-field element at a place:
/// archimedean |.| through the embedding, finite ell^{-v}.
pub fn quad_log_abs(
    ctx: &mut Ctx,
    f: &QuadField,
    x: &QuadElement,
    place: &QuadPlace,
) -> Result<BigFloat> {
    match place {
        QuadPlace::Arch { conj } => {
            let y = if *conj { f.conj(x) } else { x.clone() };
            let v = f.embed(ctx, &y);
            let av = v.abs();
            Ok(ctx.ln(&av))
        }
        QuadPlace::Fin { ideal, norm } => {
            let v = valuation_at(f, ideal, x)?;
            let nv = ctx.from_i64(*norm as i64);
            let lnq = ctx.ln(&nv);
            let vf = ctx.from_i64(-v);
            Ok(ctx.mul(&vf, &lnq))
        }
        QuadPlace::FinInert { ell } => {
            // v_lambda(x) = v_ell(N(x)) / 2 and the residue norm is ell^2,
            // so log|x|_lambda = -v_ell(N(x)) log ell
            let nx = f.norm(x);
            let mut v = 0i64;
            let le = BigInt::from(*ell);
            let mut num = nx.numer().clone();
            while (&num % &le).is_zero() && !num.is_zero() {
                num /= &le;
                v += 1;
            }
            let mut den = nx.denom().clone();
            while (&den % &le).is_zero() && !den.is_zero() {
                den /= &le;
                v -= 1;
            }
            let pv = ctx.from_i64(*ell as i64);
            let lnq = ctx.ln(&pv);
            let vf = ctx.from_i64(-v);
            Ok(ctx.mul(&vf, &lnq))
        }
    }
}

/// A place of a real quadratic field, for regulator rows.
pub enum QuadPlace {
    Arch { conj: bool },
    Fin { ideal: crate::numberfield::Ideal, norm: u64 },
    FinInert { ell: u64 },
}

/// Verify the regulator identity: R_{L,n} = 2^{nu_- - 1} R_{Q,n} *
/// (-1)^{nu_+ + 1} * (chi-component of R_V(u_0 ^ ... ^ u_{nu_+})) for the real
/// quadratic field of discriminant-positive D and n a squarefree product of
/// odd primes unramified in the field.
pub fn verify_lemma_compute(
    field: &Arc<QuadField>,
    n: u64,
    precision_bits: usize,
) -> Result<LemmaComputeReport> {
    let mut ctx = Ctx::new(precision_bits);
    let s = crate::numberfield::minus_unit_basis(field, n)?;
    let nu_plus = s.nu_plus;
    let nu_minus = s.nu_minus;
    // places of L above n and infinity
    let mut places: Vec<QuadPlace> = Vec::new();
    let mut basis: Vec<QuadElement> = Vec::new();
    // eta basis: the primes dividing n
    let primes = crate::numberfield::prime_factors(n);
    for &p in &primes {
        basis.push(QuadElement::from_int(p as i64, 0));
    }
    // u basis: fundamental unit and split-prime generators
    for u in &s.units {
        basis.push(u.clone());
    }
    // place list: both archimedean, all primes above n; drop one place
    places.push(QuadPlace::Arch { conj: true });
    for &p in &primes {
        let (sp, ideals) = primes_above(field, p);
        match sp {
            Splitting::Split => {
                places.push(QuadPlace::Fin { ideal: ideals[0].clone(), norm: p });
                places.push(QuadPlace::Fin { ideal: ideals[1].clone(), norm: p });
            }
            Splitting::Inert => {
                places.push(QuadPlace::FinInert { ell: p });
            }
            Splitting::Ramified => {
                return Err(Error::InvalidArgument("n must be unramified".into()));
            }
        }
    }
    // the dropped place is the fixed archimedean one
    let rank = basis.len();
    if places.len() != rank {
        return Err(Error::Internal("regulator rank mismatch".into()));
    }
    let mut mat: Vec<Vec<BigFloat>> = Vec::new();
    for b in &basis {
        let mut row = Vec::new();
        for pl in &places {
            row.push(quad_log_abs(&mut ctx, field, b, pl)?);
        }
        mat.push(row);
    }
    let det = crate::numberfield::float_det(&mut ctx, &mut mat);
    let r_ln = crate::numerics::to_f64(&det).abs();
    // R_{Q,n} = prod log ell
    let mut r_qn = 1f64;
    for &p in &primes {
        let pv = ctx.from_i64(p as i64);
        let lp = ctx.ln(&pv);
        r_qn *= crate::numerics::to_f64(&lp);
    }
    // chi-component of R_V(u_0 ^ ... ^ u_{nu_+}): V = {infty, ell_1..ell_nu+}
    // with the fixed places; chi(tau) = -1, so the component is
    // det( -log|u_i|_{lambda_j} + log|tau(u_i)|_{lambda_j} ).
    let mut v_places: Vec<QuadPlace> = vec![QuadPlace::Arch { conj: false }];
    for sp in &s.split {
        v_places.push(QuadPlace::Fin { ideal: sp.lambda.clone(), norm: sp.ell });
    }
    let mut cm: Vec<Vec<BigFloat>> = Vec::new();
    for u in &s.units {
        let mut row = Vec::new();
        let tu = field.conj(u);
        for pl in &v_places {
            let a = quad_log_abs(&mut ctx, field, u, pl)?;
            let b = quad_log_abs(&mut ctx, field, &tu, pl)?;
            // -log|u| + log|tau u|
            row.push(ctx.sub(&b, &a));
        }
        cm.push(row);
    }
    let cdet = crate::numberfield::float_det(&mut ctx, &mut cm);
    let chi_component = crate::numerics::to_f64(&cdet);
    let sign = if (nu_plus + 1) % 2 == 0 { 1f64 } else { -1f64 };
    let rhs = sign * 2f64.powi(nu_minus as i32 - 1) * r_qn * chi_component;
    let lhs = r_ln;
    let rel = (lhs - rhs).abs() / lhs.abs().max(1e-300);
    Ok(LemmaComputeReport {
        d: field.d.to_u64().unwrap_or(0),
        n,
        nu_plus,
        nu_minus,
        lhs,
        rhs,
        rel_err: rel,
        pass: rel < 1e-8,
    })
}

/// Log of the normalized absolute value of a formal cyclotomic element at the
/// archimedean place reached by the Galois residue t (fixed embedding).
pub fn mult_log_abs(ctx: &mut Ctx, x: &MultElement, t: u64) -> Result<BigFloat> {
    x.log_abs(ctx, t)
}

/// Quadratic character component sanity: the character group of the field
/// generated by sqrt(D) inside Q(mu_disc).
pub fn quad_field_as_abelian(f: &QuadField) -> Result<AbelianFieldQ> {
    let disc = f.disc.to_u64().expect("positive discriminant");
    let mut fixing = Vec::new();
    for t in 1..disc {
        if gcd_u64(t, disc) == 1 && quad_character(f, t) == 1 {
            fixing.push(t);
        }
    }
    AbelianFieldQ::new(disc, &fixing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::to_f64;

    #[test]
    fn hurwitz_classical_values() {
        let mut ctx = Ctx::new(128);
        let one = BigRational::from(BigInt::from(1));
        let h = hurwitz_series(&mut ctx, &one, 2);
        // zeta(0) = -1/2
        assert!((to_f64(&h.coeffs[0].re) + 0.5).abs() < 1e-25);
        // zeta'(0) = -(1/2) log(2 pi)
        let expect = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((to_f64(&h.coeffs[1].re) - expect).abs() < 1e-15);
        // zeta(0, x) = 1/2 - x at x = 1/3
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let h3 = hurwitz_series(&mut ctx, &third, 2);
        assert!((to_f64(&h3.coeffs[0].re) - (0.5 - 1.0 / 3.0)).abs() < 1e-15);
        // zeta'(0, 1/2) = log Gamma(1/2) - (1/2) log 2pi = -(1/2) log 2
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let hh = hurwitz_series(&mut ctx, &half, 2);
        assert!((to_f64(&hh.coeffs[1].re) + 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn vanishing_orders() {
        let f = QuadField::new(5).unwrap();
        let field = quad_field_as_abelian(&f).unwrap();
        let chars = field.characters();
        assert_eq!(chars.len(), 2);
        let triv = &chars[0];
        let chi = &chars[1];
        assert!(triv.is_trivial());
        assert!(!chi.is_trivial());
        assert_eq!(chi.conductor, 5);
        assert!(chi.is_even());
        let s = vec![Place::Inf, Place::Finite(5)];
        assert_eq!(vanishing_order(triv, &s), 1);
        assert_eq!(vanishing_order(chi, &s), 1);
        let s3 = vec![Place::Inf, Place::Finite(5), Place::Finite(7)];
        assert_eq!(vanishing_order(triv, &s3), 2);
        // 7 is inert in Q(sqrt 5) (7 = 2 mod 5): chi(7) = -1, no extra zero
        assert_eq!(vanishing_order(chi, &s3), 1);
        let s11 = vec![Place::Inf, Place::Finite(5), Place::Finite(11)];
        assert_eq!(vanishing_order(chi, &s11), 2);
    }

    #[test]
    fn l_derivative_matches_fundamental_unit() {
        // L'(0, chi_5) = log eps_5 for the even character mod 5 (h = 1)
        let mut ctx = Ctx::new(192);
        let f = QuadField::new(5).unwrap();
        let field = quad_field_as_abelian(&f).unwrap();
        let chi = field.characters().into_iter().find(|c| !c.is_trivial()).unwrap();
        let series = l_st_series(&mut ctx, &chi, &[Place::Inf, Place::Finite(5)], &[], 2);
        let lp = to_f64(&series.coeffs[1].re);
        let eps = f.fundamental_unit();
        let ev = f.embed(&mut ctx, &eps);
        let le = to_f64(&ctx.ln(&ev));
        assert!((lp - le).abs() < 1e-20, "L'(0) = {lp}, log eps = {le}");
        // and L(0, chi) = 0 for even chi
        assert!(to_f64(&series.coeffs[0].re).abs() < 1e-20);
    }

    #[test]
    fn theta_zero_below_minimal_order() {
        // S with a split prime raises every r(chi) above 1: Theta^{(1)} = 0
        let mut ctx = Ctx::new(128);
        let f = QuadField::new(5).unwrap();
        let field = quad_field_as_abelian(&f).unwrap();
        let s = vec![Place::Inf, Place::Finite(5), Place::Finite(11)];
        let th = theta_leading(&mut ctx, &field, &s, &[], 1).unwrap();
        for c in &th {
            assert!(to_f64(&c.abs(&mut ctx)).abs() < 1e-20);
        }
    }

    #[test]
    fn theta_rationals_is_zeta_value() {
        // L = Q: Theta_{S,T}(0) with S = {infty}, T = {} is zeta(0) = -1/2
        let mut ctx = Ctx::new(128);
        let field = AbelianFieldQ::rationals();
        let th = theta_leading(&mut ctx, &field, &[Place::Inf], &[], 0).unwrap();
        assert_eq!(th.len(), 1);
        assert!((to_f64(&th[0].re) + 0.5).abs() < 1e-25);
        // with T = {3}: (1 - 3) * zeta(0) = 1
        let th3 = theta_leading(&mut ctx, &field, &[Place::Inf], &[3], 0).unwrap();
        assert!((to_f64(&th3[0].re) - 1.0).abs() < 1e-25);
    }

    #[test]
    fn lemma_compute_basic_cases() {
        let f5 = QuadField::new(5).unwrap();
        for n in [1u64, 11, 2, 22] {
            let rep = verify_lemma_compute(&f5, n, 192).unwrap();
            assert!(
                rep.pass,
                "D=5 n={n}: lhs={} rhs={} rel={}",
                rep.lhs, rep.rhs, rep.rel_err
            );
        }
    }
}
