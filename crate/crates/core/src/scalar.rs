//! Exact arithmetic in Q(v), v = q^(1/2), extended by formal square roots of
//! q-integers, together with a floating-point backend used for cross-checks.
//!
//! A [`Scalar`] is a finite sum of terms `r * sqrt([n1]_q [n2]_q ...)` where
//! `r` is a reduced ratio of integer Laurent polynomials in `v` and the
//! bracket indices form a square-free signature. Every square root that
//! occurs in the fusion coefficients is a product or quotient of q-integers,
//! so signatures over bracket indices close under multiplication: common
//! indices cancel pairwise into the rational part via `sqrt([n])^2 = [n]_q`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Common interface of the exact and numeric coefficient backends.
///
/// All matrix builders and checks are generic over this trait; the exact
/// backend ([`Scalar`], `Ctx = ()`) decides identities, the numeric backend
/// (`f64`, `Ctx = q`) re-runs them in floating point as an independent
/// cross-check.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    type Ctx: Clone + Send + Sync + 'static;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Multiplicative inverse. Panics if the value is not invertible in the
    /// backend (the exact backend only inverts single-term scalars).
    fn inv(&self) -> Self;
    /// `v^e` where `v = q^(1/2)`.
    fn v_pow(cx: &Self::Ctx, e: i64) -> Self;
    /// The q-integer `[n]_q = (q^n - q^-n)/(q - q^-1)`; `[-n]_q = -[n]_q`.
    fn qint(cx: &Self::Ctx, n: i64) -> Self;
    /// `sqrt(prod [n]_q / prod [m]_q)` over the two bracket multisets.
    fn sqrt_ratio(cx: &Self::Ctx, num: &[i64], den: &[i64]) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
    /// `[n]_q! = [n]_q [n-1]_q ... [1]_q`, with `[0]_q! = 1`.
    fn qfact(cx: &Self::Ctx, n: i64) -> Self {
        assert!(n >= 0, "q-factorial needs a nonnegative index, got {n}");
        let mut acc = Self::one();
        for k in 1..=n {
            acc = acc.mul(&Self::qint(cx, k));
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Integer Laurent polynomials in v
// ---------------------------------------------------------------------------

/// Dense integer-coefficient Laurent polynomial in `v`: `sum c[i] v^(lo+i)`.
///
/// Invariant: `c` is empty (the zero polynomial) or has nonzero first and
/// last entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VPoly {
    lo: i64,
    c: Vec<BigInt>,
}

impl VPoly {
    pub fn zero() -> Self {
        VPoly { lo: 0, c: Vec::new() }
    }

    pub fn one() -> Self {
        VPoly::monomial(0, BigInt::one())
    }

    pub fn monomial(exp: i64, coeff: BigInt) -> Self {
        if coeff.is_zero() {
            return VPoly::zero();
        }
        VPoly { lo: exp, c: vec![coeff] }
    }

    fn from_raw(lo: i64, mut c: Vec<BigInt>) -> Self {
        let leading_zeros = c.iter().take_while(|x| x.is_zero()).count();
        if leading_zeros == c.len() {
            return VPoly::zero();
        }
        c.drain(..leading_zeros);
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        VPoly { lo: lo + leading_zeros as i64, c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn min_exp(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.lo
    }

    pub fn max_exp(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.lo + self.c.len() as i64 - 1
    }

    fn leading(&self) -> &BigInt {
        self.c.last().expect("leading coefficient of zero polynomial")
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        if self.is_zero() || exp < self.lo || exp > self.max_exp() {
            BigInt::zero()
        } else {
            self.c[(exp - self.lo) as usize].clone()
        }
    }

    pub fn shift(&self, by: i64) -> Self {
        if self.is_zero() {
            return VPoly::zero();
        }
        VPoly { lo: self.lo + by, c: self.c.clone() }
    }

    pub fn neg(&self) -> Self {
        VPoly { lo: self.lo, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(rhs.lo);
        let hi = self.max_exp().max(rhs.max_exp());
        let mut c = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (i, x) in self.c.iter().enumerate() {
            c[(self.lo - lo) as usize + i] += x;
        }
        for (i, x) in rhs.c.iter().enumerate() {
            c[(rhs.lo - lo) as usize + i] += x;
        }
        VPoly::from_raw(lo, c)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return VPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in rhs.c.iter().enumerate() {
                if !y.is_zero() {
                    c[i + j] += x * y;
                }
            }
        }
        VPoly::from_raw(self.lo + rhs.lo, c)
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.lo == 0 && self.c[0].is_one()
    }

    /// gcd of all coefficients, normalized positive. Zero for the zero poly.
    fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for x in &self.c {
            g = int_gcd(&g, x);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn div_int_exact(&self, d: &BigInt) -> Self {
        debug_assert!(!d.is_zero());
        VPoly {
            lo: self.lo,
            c: self.c.iter().map(|x| exact_int_div(x, d)).collect(),
        }
    }

    /// Primitive part with positive leading coefficient and min exponent 0.
    fn primitive(&self) -> Self {
        if self.is_zero() {
            return VPoly::zero();
        }
        let mut cont = self.content();
        if self.leading().is_negative() {
            cont = -cont;
        }
        let mut p = self.div_int_exact(&cont);
        p.lo = 0;
        p
    }

    /// Exact division; panics if `rhs` does not divide `self`.
    fn div_exact(&self, rhs: &Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return VPoly::zero();
        }
        let n = self.c.len();
        let m = rhs.c.len();
        assert!(n >= m, "inexact polynomial division");
        let mut rem = self.c.clone();
        let mut quot = vec![BigInt::zero(); n - m + 1];
        let lead = rhs.leading().clone();
        for k in (0..=n - m).rev() {
            let top = rem[k + m - 1].clone();
            if top.is_zero() {
                continue;
            }
            let qc = exact_int_div(&top, &lead);
            for (j, y) in rhs.c.iter().enumerate() {
                let prod = &qc * y;
                rem[k + j] -= prod;
            }
            quot[k] = qc;
        }
        assert!(rem.iter().all(|x| x.is_zero()), "inexact polynomial division");
        VPoly::from_raw(self.lo - rhs.lo, quot)
    }

    /// Primitive polynomial gcd via the primitive pseudo-remainder sequence.
    /// Laurent shifts do not count: the result has min exponent 0 and a
    /// positive leading coefficient.
    fn gcd(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.primitive();
        }
        if rhs.is_zero() {
            return self.primitive();
        }
        let mut a = self.primitive();
        let mut b = rhs.primitive();
        if a.c.len() < b.c.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive();
            a = b;
            b = r;
        }
        a.primitive()
    }

    /// Pseudo-remainder of `lc(b)^(deg a - deg b + 1) * a` by `b`.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.c.len() as i64 - 1;
        let lead = b.leading().clone();
        let mut rem = VPoly { lo: 0, c: self.c.clone() };
        loop {
            rem = VPoly::from_raw(rem.lo, rem.c);
            if rem.is_zero() || (rem.c.len() as i64 - 1) < db {
                return rem;
            }
            let da = rem.c.len() as i64 - 1;
            let top = rem.leading().clone();
            let mut c: Vec<BigInt> = rem.c.iter().map(|x| x * &lead).collect();
            for (j, y) in b.c.iter().enumerate() {
                c[(da - db) as usize + j] -= &top * y;
            }
            rem = VPoly { lo: 0, c };
        }
    }

    pub fn eval_f64(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        for (i, x) in self.c.iter().enumerate() {
            acc += bigint_to_f64(x) * v.powi((self.lo + i as i64) as i32);
        }
        acc
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.c
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(move |(i, x)| (self.lo + i as i64, x))
    }
}

fn int_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

fn exact_int_div(a: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = num_integer_div_rem(a, d);
    debug_assert!(r.is_zero(), "inexact integer division");
    q
}

fn num_integer_div_rem(a: &BigInt, d: &BigInt) -> (BigInt, BigInt) {
    (a / d, a % d)
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    // Values in this library stay far below 2^1023; fall back via string to
    // avoid depending on ToPrimitive edge behavior.
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| x.to_string().parse().unwrap())
}

impl fmt::Display for VPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms().collect::<Vec<_>>().into_iter().rev() {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let mag = c.abs();
            match (e, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "v")?,
                (1, false) => write!(f, "{mag}*v")?,
                (_, true) => write!(f, "v^{e}")?,
                (_, false) => write!(f, "{mag}*v^{e}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Reduced ratios of Laurent polynomials
// ---------------------------------------------------------------------------

/// A ratio of integer Laurent polynomials in `v`, kept in canonical form:
/// the denominator is an ordinary polynomial with nonzero constant term and
/// positive leading coefficient, numerator and denominator share no
/// polynomial or integer factor. Equality is plain structural equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFun {
    num: VPoly,
    den: VPoly,
}

impl RatFun {
    pub fn zero() -> Self {
        RatFun { num: VPoly::zero(), den: VPoly::one() }
    }

    pub fn one() -> Self {
        RatFun { num: VPoly::one(), den: VPoly::one() }
    }

    pub fn from_poly(num: VPoly) -> Self {
        RatFun { num, den: VPoly::one() }
    }

    pub fn ratio(num: VPoly, den: VPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFun { num, den };
        r.normalize();
        r
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn num(&self) -> &VPoly {
        &self.num
    }

    pub fn den(&self) -> &VPoly {
        &self.den
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = VPoly::one();
            return;
        }
        if !self.den.is_one() {
            // Push the denominator's v-shift into the numerator.
            let dlo = self.den.min_exp();
            if dlo != 0 {
                self.num = self.num.shift(-dlo);
                self.den = self.den.shift(-dlo);
            }
            let g = self.num.gcd(&self.den);
            if !g.is_one() {
                // gcd ignores shifts, so align before dividing.
                let nlo = self.num.min_exp();
                self.num = self.num.shift(-nlo).div_exact(&g).shift(nlo);
                self.den = self.den.div_exact(&g);
            }
            let ncont = self.num.content();
            let dcont = self.den.content();
            let g = int_gcd(&ncont, &dcont);
            if !g.is_one() {
                self.num = self.num.div_int_exact(&g);
                self.den = self.den.div_int_exact(&g);
            }
            if self.den.leading().is_negative() {
                self.num = self.num.neg();
                self.den = self.den.neg();
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFun::from_poly(self.num.add(&rhs.num));
        }
        RatFun::ratio(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFun::from_poly(self.num.mul(&rhs.num));
        }
        RatFun::ratio(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        RatFun::ratio(self.den.clone(), self.num.clone())
    }

    /// Multiply by `v^e` (cheap shift, no renormalization needed).
    pub fn shift(&self, e: i64) -> Self {
        RatFun { num: self.num.shift(e), den: self.den.clone() }
    }

    pub fn eval_f64(&self, v: f64) -> f64 {
        let d = self.den.eval_f64(v);
        assert!(d != 0.0, "denominator vanishes at sample point");
        self.num.eval_f64(v) / d
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Radical signatures and scalars
// ---------------------------------------------------------------------------

/// Sorted, duplicate-free bracket indices `n >= 2`, standing for the formal
/// product `prod sqrt([n]_q)`. `sqrt([1]_q) = 1` is absorbed on construction.
pub type RadicalSig = Vec<i64>;

/// Multiply two signatures: the result signature is the symmetric difference
/// and every common index contributes an exact factor `[n]_q`.
fn sig_mul(a: &RadicalSig, b: &RadicalSig) -> (RadicalSig, Vec<i64>) {
    let mut sig = Vec::with_capacity(a.len() + b.len());
    let mut paired = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                sig.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                sig.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                paired.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    sig.extend_from_slice(&a[i..]);
    sig.extend_from_slice(&b[j..]);
    (sig, paired)
}

/// Element of Q(v) extended by square roots of q-integers: a finite map from
/// radical signatures to nonzero reduced rational parts.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Scalar {
    terms: BTreeMap<RadicalSig, RatFun>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Scalar::from_ratfun(RatFun::one())
    }

    pub fn from_ratfun(r: RatFun) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Vec::new(), r);
        }
        Scalar { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_ratfun(RatFun::from_poly(VPoly::monomial(0, BigInt::from(n))))
    }

    fn insert_term(&mut self, sig: RadicalSig, r: RatFun) {
        if r.is_zero() {
            return;
        }
        match self.terms.entry(sig) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(r);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&r);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RadicalSig, &RatFun)> {
        self.terms.iter()
    }

    /// The rational part attached to the empty signature, if this scalar is
    /// radical-free; `None` otherwise.
    pub fn as_ratfun(&self) -> Option<&RatFun> {
        match self.terms.len() {
            0 => None,
            1 => self.terms.iter().next().and_then(|(sig, r)| sig.is_empty().then_some(r)),
            _ => None,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (sig, r) in &rhs.terms {
            out.insert_term(sig.clone(), r.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Scalar {
            terms: self.terms.iter().map(|(s, r)| (s.clone(), r.neg())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Scalar::zero();
        for (sa, ra) in &self.terms {
            for (sb, rb) in &rhs.terms {
                let (sig, paired) = sig_mul(sa, sb);
                let mut r = ra.mul(rb);
                for n in paired {
                    r = r.mul(&qint_ratfun(n));
                }
                out.insert_term(sig, r);
            }
        }
        out
    }

    /// Multiply by `v^e`.
    pub fn shift(&self, e: i64) -> Self {
        Scalar {
            terms: self.terms.iter().map(|(s, r)| (s.clone(), r.shift(e))).collect(),
        }
    }

    pub fn inv(&self) -> Self {
        assert_eq!(self.terms.len(), 1, "inverse of a multi-term scalar");
        let (sig, r) = self.terms.iter().next().unwrap();
        // 1/(r sqrt(S)) = sqrt(S) / (r * prod_{n in S} [n]_q)
        let mut d = r.clone();
        for &n in sig {
            d = d.mul(&qint_ratfun(n));
        }
        let mut out = Scalar::zero();
        out.insert_term(sig.clone(), d.inv());
        out
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        let v = q.sqrt();
        let mut acc = 0.0;
        for (sig, r) in &self.terms {
            let mut rad = 1.0;
            for &n in sig {
                rad *= qint_f64(q, n);
            }
            acc += r.eval_f64(v) * rad.sqrt();
        }
        acc
    }
}

fn qint_poly(n: i64) -> VPoly {
    let m = n.unsigned_abs() as usize;
    if m == 0 {
        return VPoly::zero();
    }
    let mut c = vec![BigInt::zero(); 4 * (m - 1) + 1];
    for i in 0..m {
        c[4 * i] = BigInt::one();
    }
    let p = VPoly::from_raw(-2 * (m as i64 - 1), c);
    if n < 0 {
        p.neg()
    } else {
        p
    }
}

fn qint_ratfun(n: i64) -> RatFun {
    RatFun::from_poly(qint_poly(n))
}

fn qint_f64(q: f64, n: i64) -> f64 {
    (q.powi(n as i32) - q.powi(-n as i32)) / (q - 1.0 / q)
}

/// `eval_numeric` from the module contract: evaluate at a real `q > 1`
/// taking positive real square roots for the radicals.
pub fn eval_numeric(x: &Scalar, q_value: f64) -> f64 {
    assert!(q_value > 1.0, "numeric backend expects q > 1");
    x.eval_f64(q_value)
}

impl Coeff for Scalar {
    type Ctx = ();

    fn zero() -> Self {
        Scalar::zero()
    }

    fn one() -> Self {
        Scalar::one()
    }

    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        Scalar::add(self, rhs)
    }

    fn neg(&self) -> Self {
        Scalar::neg(self)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Scalar::mul(self, rhs)
    }

    fn inv(&self) -> Self {
        Scalar::inv(self)
    }

    fn v_pow(_cx: &(), e: i64) -> Self {
        Scalar::from_ratfun(RatFun::from_poly(VPoly::monomial(e, BigInt::one())))
    }

    fn qint(_cx: &(), n: i64) -> Self {
        Scalar::from_ratfun(qint_ratfun(n))
    }

    fn sqrt_ratio(_cx: &(), num: &[i64], den: &[i64]) -> Self {
        sqrt_ratio_exact(num, den)
    }
}

impl Coeff for f64 {
    type Ctx = f64;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn inv(&self) -> Self {
        1.0 / self
    }

    fn v_pow(q: &f64, e: i64) -> Self {
        q.sqrt().powi(e as i32)
    }

    fn qint(q: &f64, n: i64) -> Self {
        qint_f64(*q, n)
    }

    fn sqrt_ratio(q: &f64, num: &[i64], den: &[i64]) -> Self {
        let mut val = 1.0;
        for &n in num {
            val *= qint_f64(*q, n);
        }
        for &n in den {
            val /= qint_f64(*q, n);
        }
        val.sqrt()
    }
}

/// `sqrt(prod_num [n]_q)` with paired indices extracted exactly; quotients
/// keep the same signature and divide the rational part: `sqrt(1/[n]) =
/// sqrt([n])/[n]`.
pub fn sqrt_ratio_exact(num: &[i64], den: &[i64]) -> Scalar {
    let mut counts: BTreeMap<i64, u32> = BTreeMap::new();
    for &n in num.iter().chain(den) {
        assert!(n >= 1, "bracket index below 1 under a square root");
        *counts.entry(n).or_insert(0) += 1;
    }
    let mut rational = RatFun::one();
    let mut sig = Vec::new();
    for (&n, &k) in &counts {
        for _ in 0..k / 2 {
            rational = rational.mul(&qint_ratfun(n));
        }
        if k % 2 == 1 && n > 1 {
            sig.push(n);
        }
    }
    for &n in den {
        rational = rational.mul(&qint_ratfun(n).inv());
    }
    let mut out = Scalar::zero();
    out.insert_term(sig, rational);
    out
}

/// `sqrt(prod [n]_q)` over a bracket multiset.
pub fn sqrt_brackets(indices: &[i64]) -> Scalar {
    sqrt_ratio_exact(indices, &[])
}

pub fn qint(n: i64) -> Scalar {
    <Scalar as Coeff>::qint(&(), n)
}

pub fn qfact(n: i64) -> Scalar {
    <Scalar as Coeff>::qfact(&(), n)
}

pub fn v_pow(e: i64) -> Scalar {
    <Scalar as Coeff>::v_pow(&(), e)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (sig, r) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if sig.is_empty() {
                write!(f, "{r}")?;
            } else {
                let brackets: Vec<String> = sig.iter().map(|n| format!("[{n}]")).collect();
                write!(f, "({r})*sqrt({})", brackets.join(""))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermRepr {
    radical: Vec<i64>,
    num: Vec<(i64, String)>,
    den: Vec<(i64, String)>,
}

fn poly_repr(p: &VPoly) -> Vec<(i64, String)> {
    p.terms().map(|(e, c)| (e, c.to_string())).collect()
}

fn poly_from_repr(terms: &[(i64, String)]) -> Result<VPoly, String> {
    let mut acc = VPoly::zero();
    for (e, c) in terms {
        let coeff: BigInt = c.parse().map_err(|_| format!("bad integer {c:?}"))?;
        acc = acc.add(&VPoly::monomial(*e, coeff));
    }
    Ok(acc)
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(sig, r)| TermRepr {
                radical: sig.clone(),
                num: poly_repr(&r.num),
                den: poly_repr(&r.den),
            })
            .collect();
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let repr = Vec::<TermRepr>::deserialize(de)?;
        let mut out = Scalar::zero();
        for t in repr {
            let num = poly_from_repr(&t.num).map_err(D::Error::custom)?;
            let den = poly_from_repr(&t.den).map_err(D::Error::custom)?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            out.insert_term(t.radical, RatFun::ratio(num, den));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q_pow(e: i64) -> Scalar {
        v_pow(2 * e)
    }

    #[test]
    fn qint_small_values() {
        assert!(qint(0).is_zero());
        assert_eq!(qint(1), Scalar::one());
        // [2]_q = q + q^-1
        assert_eq!(qint(2), q_pow(1).add(&q_pow(-1)));
        // [3]_q = q^2 + 1 + q^-2
        assert_eq!(qint(3), q_pow(2).add(&Scalar::one()).add(&q_pow(-2)));
        assert_eq!(qint(-3), qint(3).neg());
    }

    #[test]
    fn qfact_values() {
        assert_eq!(qfact(0), Scalar::one());
        assert_eq!(qfact(1), Scalar::one());
        // [3]! = [3][2], frozen from the expanded product:
        // (q^2+1+q^-2)(q+q^-1) = q^3 + 2q + 2q^-1 + q^-3
        let expected = q_pow(3)
            .add(&Scalar::from_int(2).mul(&q_pow(1).add(&q_pow(-1))))
            .add(&q_pow(-3));
        assert_eq!(qfact(3), expected);
        assert_eq!(qfact(3), qint(3).mul(&qint(2)));
    }

    #[test]
    fn sqrt_bracket_basics() {
        assert_eq!(sqrt_brackets(&[]), Scalar::one());
        // paired indices are extracted exactly
        assert_eq!(sqrt_brackets(&[2, 2]), qint(2));
        // sqrt([1]) is absorbed
        assert_eq!(sqrt_brackets(&[1]), Scalar::one());
        // a genuine radical squares back to the bracket product
        let r = sqrt_brackets(&[2, 3]);
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.mul(&r), qint(2).mul(&qint(3)));
        // division form: sqrt([a]/[b]) * sqrt([a][b]) = [a]
        let d = sqrt_ratio_exact(&[3], &[2]);
        assert_eq!(d.mul(&sqrt_brackets(&[3, 2])), qint(3));
    }

    #[test]
    fn radical_inverse() {
        let x = sqrt_ratio_exact(&[2], &[3]).mul(&qint(4));
        assert_eq!(x.mul(&x.inv()), Scalar::one());
    }

    #[test]
    fn eval_numeric_examples() {
        assert!((eval_numeric(&qint(2), 4.0) - 4.25).abs() < 1e-12);
        assert!((eval_numeric(&sqrt_brackets(&[2]), 4.0) - 4.25f64.sqrt()).abs() < 1e-12);
        // [3][2] at q = 2: 5.25 * 2.5 = 13.125
        assert!((eval_numeric(&qfact(3), 2.0) - 13.125).abs() < 1e-12);
    }

    #[test]
    fn ratfun_cancellation() {
        let a = qint_ratfun(3);
        let b = qint_ratfun(2).mul(&qint_ratfun(5));
        let r = RatFun::ratio(a.num.mul(&b.num), b.num.clone());
        assert_eq!(r, a);
        let x = RatFun::ratio(a.num.clone(), b.num.clone());
        assert!(x.mul(&x.inv()).is_one());
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        let term = (
            prop::collection::btree_set(2i64..6, 0..3),
            -4i64..5,
            -3i64..4,
            1i64..4,
        );
        prop::collection::vec(term, 0..4).prop_map(|terms| {
            let mut s = Scalar::zero();
            for (sig, c, e, d) in terms {
                let num = VPoly::monomial(e, BigInt::from(c));
                let r = RatFun::ratio(num, qint_poly(d));
                let mut t = Scalar::zero();
                t.insert_term(sig.into_iter().collect(), r);
                s = s.add(&t);
            }
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ring_axioms(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.sub(&a), Scalar::zero());
        }
    }

    proptest! {
        #[test]
        fn eval_is_a_homomorphism(a in arb_scalar(), b in arb_scalar()) {
            for q in [1.3f64, 1.7, 2.0] {
                let (ea, eb) = (a.eval_f64(q), b.eval_f64(q));
                let scale = ea.abs().max(eb.abs()).max(1.0);
                let sum = a.add(&b).eval_f64(q);
                let prod = a.mul(&b).eval_f64(q);
                prop_assert!((sum - (ea + eb)).abs() <= 1e-9 * scale);
                prop_assert!((prod - ea * eb).abs() <= 1e-9 * scale * scale);
            }
        }

        #[test]
        fn serde_round_trip(a in arb_scalar()) {
            let json = serde_json::to_string(&a).unwrap();
            let back: Scalar = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(a, back);
        }
    }
}
