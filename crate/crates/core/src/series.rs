//! Truncated multivariate Laurent series in the spectral and gauge
//! variables (t, s, k) with word-polynomial coefficients.
//!
//! Truncation is by total degree in t and s; the gauge variable k is exact
//! and never truncated. A series with bound `Some(d)` has exact
//! coefficients for every monomial of total (t,s)-degree <= d and stores
//! nothing above; `None` marks an exact (finitely supported) series.
//! Products propagate the bound as `min(da + min_deg(b), db + min_deg(a))`,
//! which is what makes monomial prefactors with negative exponents and the
//! graded generating functions compose soundly.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Coeff;
use crate::word::{alternating_word, catalan_words, AltKind, Letter, Side, Word, WordPoly};

pub const VAR_NAMES: [&str; 3] = ["t", "s", "k"];

/// Subset of the variables {t, s, k}.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct VarSet(u8);

impl VarSet {
    pub const T: VarSet = VarSet(1);
    pub const S: VarSet = VarSet(2);
    pub const K: VarSet = VarSet(4);
    pub const TS: VarSet = VarSet(3);

    pub fn empty() -> VarSet {
        VarSet(0)
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn contains(self, other: VarSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn without(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn names(self) -> Vec<&'static str> {
        (0..3)
            .filter(|i| self.0 & (1 << i) != 0)
            .map(|i| VAR_NAMES[i as usize])
            .collect()
    }

    pub fn from_names(names: &[String]) -> Result<VarSet, String> {
        let mut v = VarSet::empty();
        for n in names {
            match n.as_str() {
                "t" => v = v.union(VarSet::T),
                "s" => v = v.union(VarSet::S),
                "k" => v = v.union(VarSet::K),
                other => return Err(format!("unknown variable {other:?}")),
            }
        }
        Ok(v)
    }
}

/// Exponent vector over (t, s, k).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct Exp(pub [i64; 3]);

impl Exp {
    pub fn t(self) -> i64 {
        self.0[0]
    }

    pub fn s(self) -> i64 {
        self.0[1]
    }

    pub fn k(self) -> i64 {
        self.0[2]
    }

    /// Total degree in the truncated variables t and s (k is exempt).
    pub fn degree(self) -> i64 {
        self.0[0] + self.0[1]
    }

    pub fn add(self, rhs: Exp) -> Exp {
        Exp([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }

    fn varset(self) -> VarSet {
        let mut v = VarSet::empty();
        if self.0[0] != 0 {
            v = v.union(VarSet::T);
        }
        if self.0[1] != 0 {
            v = v.union(VarSet::S);
        }
        if self.0[2] != 0 {
            v = v.union(VarSet::K);
        }
        v
    }
}

/// A signed power of v times a monomial in (t, s): the only substitution
/// arguments that occur (q^a t, t/s, -t^2, ...). Exact and composable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MonomialArg {
    pub negative: bool,
    /// exponent of v = q^(1/2)
    pub vexp: i64,
    pub t_exp: i64,
    pub s_exp: i64,
}

impl MonomialArg {
    pub fn t() -> Self {
        MonomialArg { negative: false, vexp: 0, t_exp: 1, s_exp: 0 }
    }

    pub fn s() -> Self {
        MonomialArg { negative: false, vexp: 0, t_exp: 0, s_exp: 1 }
    }

    pub fn t_over_s() -> Self {
        MonomialArg { negative: false, vexp: 0, t_exp: 1, s_exp: -1 }
    }

    pub fn s_over_t() -> Self {
        MonomialArg { negative: false, vexp: 0, t_exp: -1, s_exp: 1 }
    }

    /// A pure scalar q^(vexp/2).
    pub fn constant_v_pow(vexp: i64) -> Self {
        MonomialArg { negative: false, vexp, t_exp: 0, s_exp: 0 }
    }

    /// Multiply by q^(half_exp/2), i.e. shift the v-exponent.
    pub fn times_v_pow(self, vexp: i64) -> Self {
        MonomialArg { vexp: self.vexp + vexp, ..self }
    }

    /// Multiply by q^e.
    pub fn times_q_pow(self, e: i64) -> Self {
        self.times_v_pow(2 * e)
    }

    pub fn negated(self) -> Self {
        MonomialArg { negative: !self.negative, ..self }
    }

    pub fn pow(self, n: i64) -> Self {
        MonomialArg {
            negative: self.negative && n % 2 != 0,
            vexp: self.vexp * n,
            t_exp: self.t_exp * n,
            s_exp: self.s_exp * n,
        }
    }

    pub fn degree(self) -> i64 {
        self.t_exp + self.s_exp
    }

    pub fn exp(self) -> Exp {
        Exp([self.t_exp, self.s_exp, 0])
    }

    fn coeff<C: Coeff>(self, cx: &C::Ctx) -> C {
        let c = C::v_pow(cx, self.vexp);
        if self.negative {
            c.neg()
        } else {
            c
        }
    }

    pub fn varset(self) -> VarSet {
        self.exp().varset()
    }
}

/// Sparse Laurent series over (t, s, k) with `WordPoly` coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct MultiSeries<C: Coeff> {
    vars: VarSet,
    trunc: Option<i64>,
    terms: BTreeMap<Exp, WordPoly<C>>,
}

impl<C: Coeff> MultiSeries<C> {
    pub fn zero(vars: VarSet, trunc: Option<i64>) -> Self {
        MultiSeries { vars, trunc, terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        let mut s = MultiSeries::zero(VarSet::empty(), None);
        s.add_term(Exp::default(), &WordPoly::term(Word::empty(), c));
        s
    }

    pub fn one() -> Self {
        MultiSeries::constant(C::one())
    }

    pub fn from_poly(p: WordPoly<C>) -> Self {
        let mut s = MultiSeries::zero(VarSet::empty(), None);
        s.add_term(Exp::default(), &p);
        s
    }

    pub fn monomial(cx: &C::Ctx, arg: MonomialArg) -> Self {
        let mut s = MultiSeries::zero(arg.varset(), None);
        s.add_term(arg.exp(), &WordPoly::term(Word::empty(), arg.coeff::<C>(cx)));
        s
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &WordPoly<C>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient_of(&self, exp: Exp) -> WordPoly<C> {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.degree()).min()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.degree()).max()
    }

    pub fn add_term(&mut self, exp: Exp, p: &WordPoly<C>) {
        if p.is_zero() {
            return;
        }
        if let Some(d) = self.trunc {
            if exp.degree() > d {
                return;
            }
        }
        self.vars = self.vars.union(exp.varset());
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(p);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn combined_add_trunc(&self, rhs: &Self) -> Option<i64> {
        match (self.trunc, rhs.trunc) {
            (None, t) | (t, None) => t,
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = MultiSeries::zero(self.vars.union(rhs.vars), self.combined_add_trunc(rhs));
        for (e, p) in &self.terms {
            out.add_term(*e, p);
        }
        for (e, p) in &rhs.terms {
            out.add_term(*e, p);
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiSeries {
            vars: self.vars,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(e, p)| (*e, p.neg())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = MultiSeries::zero(self.vars, self.trunc);
        for (e, p) in &self.terms {
            out.add_term(*e, &p.scale(c));
        }
        out
    }

    fn mul_trunc(&self, rhs: &Self) -> Option<i64> {
        if self.is_zero() || rhs.is_zero() {
            return None;
        }
        let bound = |dt: Option<i64>, other_min: i64| dt.map(|d| d + other_min);
        let a = bound(self.trunc, rhs.min_degree().unwrap());
        let b = bound(rhs.trunc, self.min_degree().unwrap());
        match (a, b) {
            (None, t) | (t, None) => t,
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    fn mul_with(&self, rhs: &Self, mut f: impl FnMut(&WordPoly<C>, &WordPoly<C>) -> WordPoly<C>) -> Self {
        let trunc = self.mul_trunc(rhs);
        let mut out = MultiSeries::zero(self.vars.union(rhs.vars), trunc);
        for (ea, pa) in &self.terms {
            for (eb, pb) in &rhs.terms {
                let exp = ea.add(*eb);
                if let Some(d) = trunc {
                    if exp.degree() > d {
                        continue;
                    }
                }
                out.add_term(exp, &f(pa, pb));
            }
        }
        out
    }

    /// Cauchy product with the q-shuffle on coefficients; factor order is
    /// preserved (the shuffle is noncommutative).
    pub fn shuffle_mul(&self, cx: &C::Ctx, rhs: &Self) -> Self {
        self.mul_with(rhs, |a, b| a.shuffle_mul(cx, b))
    }

    /// Cauchy product with free-algebra concatenation on coefficients.
    pub fn concat_mul(&self, rhs: &Self) -> Self {
        self.mul_with(rhs, |a, b| a.concat_mul(b))
    }

    pub fn erase_map(&self, side: Side, letter: Letter) -> Self {
        let mut out = MultiSeries::zero(self.vars, self.trunc);
        for (e, p) in &self.terms {
            out.add_term(*e, &p.erase(side, letter));
        }
        out
    }

    pub fn zeta_map(&self) -> Self {
        let mut out = MultiSeries::zero(self.vars, self.trunc);
        for (e, p) in &self.terms {
            out.add_term(*e, &p.zeta());
        }
        out
    }

    pub fn swap_xy_map(&self) -> Self {
        let mut out = MultiSeries::zero(self.vars, self.trunc);
        for (e, p) in &self.terms {
            out.add_term(*e, &p.swap_xy());
        }
        out
    }

    /// Substitute `t -> arg`. The series must not involve s; k passes
    /// through. Truncated series require `deg(arg) >= 1` so the bound maps
    /// forward monotonically.
    pub fn substitute_t(&self, cx: &C::Ctx, arg: MonomialArg) -> Self {
        let d0 = arg.degree();
        let trunc = match self.trunc {
            None => None,
            Some(d) => {
                assert!(d0 >= 1, "substituting a degree-{d0} argument into a truncated series");
                Some(d * d0 + (d0 - 1))
            }
        };
        let mut out = MultiSeries::zero(arg.varset(), trunc);
        for (e, p) in &self.terms {
            assert_eq!(e.s(), 0, "t-substitution on a series already involving s");
            let d = e.t();
            let exp = Exp([arg.t_exp * d, arg.s_exp * d, e.k()]);
            let mut c = C::v_pow(cx, arg.vexp * d);
            if arg.negative && d % 2 != 0 {
                c = c.neg();
            }
            out.add_term(exp, &p.scale(&c));
        }
        out
    }

    /// Multiply every term by k^e.
    pub fn shift_k(&self, e: i64) -> Self {
        if e == 0 {
            return self.clone();
        }
        let mut out = MultiSeries::zero(self.vars.union(VarSet::K), self.trunc);
        for (exp, p) in &self.terms {
            out.add_term(Exp([exp.t(), exp.s(), exp.k() + e]), p);
        }
        out
    }

    /// Specialize the gauge variable k to 1.
    pub fn set_k_one(&self) -> Self {
        let mut out = MultiSeries::zero(self.vars.without(VarSet::K), self.trunc);
        for (exp, p) in &self.terms {
            out.add_term(Exp([exp.t(), exp.s(), 0]), p);
        }
        out
    }

    /// Restrict to total degree <= d. The current bound must already cover
    /// d, otherwise the restriction would claim unearned exactness.
    pub fn truncate_to(&self, d: i64) -> Self {
        assert!(
            self.trunc.map_or(true, |t| t >= d),
            "cannot tighten a series of bound {:?} to {d}",
            self.trunc
        );
        let mut out = MultiSeries::zero(self.vars, Some(d));
        for (e, p) in &self.terms {
            out.add_term(*e, p);
        }
        out
    }

    /// Every word in every coefficient has length equal to the total
    /// (t,s)-degree of its monomial.
    pub fn is_graded(&self) -> bool {
        self.terms.iter().all(|(e, p)| {
            let d = e.degree();
            d >= 0 && p.is_homogeneous(d as usize)
        })
    }
}

/// Equality after truncation alignment: both series restricted to the
/// smaller bound. Exact (`None`) series compare as-is.
pub fn series_equal<C: Coeff>(a: &MultiSeries<C>, b: &MultiSeries<C>) -> bool {
    first_difference(a, b).is_none()
}

/// Lexicographically first exponent at which the two series differ, with
/// the two coefficient polynomials.
pub fn first_difference<C: Coeff>(
    a: &MultiSeries<C>,
    b: &MultiSeries<C>,
) -> Option<(Exp, WordPoly<C>, WordPoly<C>)> {
    let bound = match (a.trunc, b.trunc) {
        (None, t) | (t, None) => t,
        (Some(x), Some(y)) => Some(x.min(y)),
    };
    let within = |e: &Exp| bound.map_or(true, |d| e.degree() <= d);
    let mut exps: Vec<Exp> = a
        .terms
        .keys()
        .chain(b.terms.keys())
        .filter(|e| within(e))
        .copied()
        .collect();
    exps.sort();
    exps.dedup();
    for e in exps {
        let pa = a.coefficient_of(e);
        let pb = b.coefficient_of(e);
        if pa != pb {
            return Some((e, pa, pb));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Generating functions
// ---------------------------------------------------------------------------

/// `sum_n word(kind, n) arg^n`, truncated at total degree `d`.
pub fn gen_series<C: Coeff>(cx: &C::Ctx, kind: AltKind, arg: MonomialArg, d: i64) -> MultiSeries<C> {
    assert!(d >= 0, "negative truncation bound");
    assert!(arg.degree() >= 1, "generating function argument must have positive degree");
    let mut out = MultiSeries::zero(arg.varset(), Some(d));
    let mut n = 0usize;
    loop {
        let a = arg.pow(n as i64);
        if a.degree() > d {
            break;
        }
        let w = alternating_word(kind, n);
        out.add_term(a.exp(), &WordPoly::term(w, a.coeff::<C>(cx)));
        n += 1;
    }
    out
}

/// Catalan-weighted homogeneous component: the sum over Catalan words of
/// length 2n with the running q-bracket weights for parameter m.
pub fn delta_n<C: Coeff>(cx: &C::Ctx, m: i64, n: usize) -> WordPoly<C> {
    let mut out = WordPoly::zero();
    'words: for w in catalan_words(n).iter() {
        let mut coeff = C::one();
        let mut prefix = 0i64;
        for l in w.letters() {
            let idx = prefix + if l == Letter::X { m } else { 0 };
            if idx == 0 {
                continue 'words;
            }
            coeff = coeff.mul(&C::qint(cx, idx));
            prefix += l.bar();
        }
        out.add_term(*w, &coeff);
    }
    out
}

/// `sum_n delta_n(m) arg^n` truncated at total degree `d`.
pub fn delta_series<C: Coeff>(cx: &C::Ctx, m: i64, arg: MonomialArg, d: i64) -> MultiSeries<C> {
    assert!(d >= 0, "negative truncation bound");
    assert!(arg.degree() >= 1, "generating function argument must have positive degree");
    let mut out = MultiSeries::zero(arg.varset(), Some(d));
    let mut n = 0usize;
    loop {
        let a = arg.pow(n as i64);
        if a.degree() > d {
            break;
        }
        out.add_term(a.exp(), &delta_n::<C>(cx, m, n).scale(&a.coeff::<C>(cx)));
        n += 1;
    }
    out
}

/// The letter-exchanged companion of [`delta_series`]: coefficients are the
/// x <-> y swap of the Catalan components. This is the series the closed
/// K-matrix symmetry actually pairs with `delta_series`; the reversal
/// antiautomorphism fixes every Catalan component, so reversing instead of
/// swapping would return `delta_series` itself.
pub fn tdelta_series<C: Coeff>(cx: &C::Ctx, m: i64, arg: MonomialArg, d: i64) -> MultiSeries<C> {
    delta_series::<C>(cx, m, arg, d).swap_xy_map()
}

pub fn tdelta_n<C: Coeff>(cx: &C::Ctx, m: i64, n: usize) -> WordPoly<C> {
    delta_n::<C>(cx, m, n).swap_xy()
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

impl<C: Coeff + Serialize> Serialize for MultiSeries<C> {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a, C: Coeff + Serialize> {
            exp: [i64; 3],
            poly: &'a WordPoly<C>,
        }
        let mut st = ser.serialize_struct("MultiSeries", 3)?;
        st.serialize_field("vars", &self.vars.names())?;
        st.serialize_field("D", &self.trunc)?;
        let terms: Vec<Term<C>> = self.terms.iter().map(|(e, p)| Term { exp: e.0, poly: p }).collect();
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl<'de, C: Coeff + Deserialize<'de>> Deserialize<'de> for MultiSeries<C> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound(deserialize = "C: Coeff + Deserialize<'de>"))]
        struct Term<C: Coeff> {
            exp: [i64; 3],
            poly: WordPoly<C>,
        }
        #[derive(Deserialize)]
        #[serde(bound(deserialize = "C: Coeff + Deserialize<'de>"))]
        struct Repr<C: Coeff> {
            vars: Vec<String>,
            #[serde(rename = "D", default)]
            trunc: Option<i64>,
            terms: Vec<Term<C>>,
        }
        let repr = Repr::<C>::deserialize(de)?;
        let vars = VarSet::from_names(&repr.vars).map_err(serde::de::Error::custom)?;
        let mut out = MultiSeries::zero(vars, repr.trunc);
        for t in repr.terms {
            out.add_term(Exp(t.exp), &t.poly);
        }
        Ok(out)
    }
}

impl<C: Coeff> fmt::Display for MultiSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, p) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{p}]")?;
            for (i, name) in VAR_NAMES.iter().enumerate() {
                if e.0[i] != 0 {
                    write!(f, "*{name}^{}", e.0[i])?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qint, v_pow, Scalar};
    use crate::word::Word;

    type S = MultiSeries<Scalar>;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn wp(s: &str) -> WordPoly<Scalar> {
        WordPoly::from_word(w(s))
    }

    #[test]
    fn gen_series_examples() {
        // W^-(t) up to degree 2: x + xyx t + xyxyx t^2
        let ws: S = gen_series(&(), AltKind::Wminus, MonomialArg::t(), 2);
        assert_eq!(ws.coefficient_of(Exp([0, 0, 0])), wp("x"));
        assert_eq!(ws.coefficient_of(Exp([1, 0, 0])), wp("xyx"));
        assert_eq!(ws.coefficient_of(Exp([2, 0, 0])), wp("xyxyx"));
        assert_eq!(ws.num_terms(), 3);

        // G(t^2) up to degree 3: 1 + yx t^2
        let g: S = gen_series(&(), AltKind::G, MonomialArg::t().pow(2), 3);
        assert_eq!(g.coefficient_of(Exp([0, 0, 0])), WordPoly::one());
        assert_eq!(g.coefficient_of(Exp([2, 0, 0])), wp("yx"));
        assert_eq!(g.num_terms(), 2);

        // Gtilde(q t^2) up to degree 2: 1 + q xy t^2
        let gt: S = gen_series(&(), AltKind::Gtilde, MonomialArg::t().pow(2).times_q_pow(1), 2);
        assert_eq!(gt.coefficient_of(Exp([2, 0, 0])), wp("xy").scale(&v_pow(2)));
    }

    #[test]
    fn delta_components() {
        for m in [-3i64, -1, 0, 2, 5] {
            let d0: WordPoly<Scalar> = delta_n(&(), m, 0);
            assert_eq!(d0, WordPoly::one());
            let d1: WordPoly<Scalar> = delta_n(&(), m, 1);
            assert_eq!(d1, wp("xy").scale(&qint(m)));
            // frozen from the two Catalan words of length 4:
            // [m]^2 xyxy + [m][m+1][2] xxyy
            let d2: WordPoly<Scalar> = delta_n(&(), m, 2);
            let expect = wp("xyxy")
                .scale(&qint(m).mul(&qint(m)))
                .add(&wp("xxyy").scale(&qint(m).mul(&qint(m + 1)).mul(&qint(2))));
            assert_eq!(d2, expect);
            // Catalan grading
            for n in 0..4 {
                let dn: WordPoly<Scalar> = delta_n(&(), m, n);
                assert!(dn.is_homogeneous(2 * n));
                for (word, _) in dn.terms() {
                    assert!(word.is_catalan());
                }
            }
        }
    }

    #[test]
    fn delta_zero_parameter_collapses() {
        // every nonempty Catalan word opens with an x whose factor is [0] = 0
        let d: S = delta_series(&(), 0, MonomialArg::t(), 6);
        assert_eq!(d.num_terms(), 1);
        assert_eq!(d.coefficient_of(Exp([0, 0, 0])), WordPoly::one());
    }

    #[test]
    fn delta_series_signs() {
        // coefficient of t^2 in Delta^(m)(-t^2) is -[m] xy
        let d: S = delta_series(&(), 5, MonomialArg::t().pow(2).negated(), 2);
        assert_eq!(d.coefficient_of(Exp([2, 0, 0])), wp("xy").scale(&qint(5).neg()));
    }

    #[test]
    fn tdelta_swaps_letters() {
        let d1: WordPoly<Scalar> = tdelta_n(&(), 4, 1);
        assert_eq!(d1, wp("yx").scale(&qint(4)));
        let ts: S = tdelta_series(&(), -2, MonomialArg::t(), 4);
        let ds: S = delta_series(&(), -2, MonomialArg::t(), 4);
        assert_eq!(ts, ds.swap_xy_map());
    }

    #[test]
    fn reversal_fixes_delta_components() {
        // The reversal antiautomorphism fixes each Catalan component, which
        // is why the companion series must swap letters instead.
        for m in [-3i64, -2, 2] {
            for n in 0..4 {
                let dn: WordPoly<Scalar> = delta_n(&(), m, n);
                assert_eq!(dn.zeta(), dn);
            }
        }
    }

    #[test]
    fn erase_map_example() {
        // right-y erasure of Delta^(-1)(-t^2) at order t^2 gives x
        let d: S = delta_series(&(), -1, MonomialArg::t().pow(2).negated(), 2);
        let e = d.erase_map(Side::Right, Letter::Y);
        assert_eq!(e.coefficient_of(Exp([2, 0, 0])), wp("x"));
    }

    #[test]
    fn shuffle_mul_unit_and_coefficient() {
        let a: S = gen_series(&(), AltKind::Gtilde, MonomialArg::t(), 3);
        assert_eq!(a.shuffle_mul(&(), &MultiSeries::one()), a);
        let wm: S = gen_series(&(), AltKind::Wminus, MonomialArg::t(), 3);
        assert_eq!(wm.coefficient_of(Exp([1, 0, 0])), wp("xyx"));
    }

    #[test]
    fn monomial_shift_extends_bound() {
        let a: S = gen_series(&(), AltKind::Gtilde, MonomialArg::t(), 3);
        let m: S = MultiSeries::monomial(&(), MonomialArg::t().pow(2));
        let shifted = a.shuffle_mul(&(), &m);
        assert_eq!(shifted.trunc(), Some(5));
        assert_eq!(shifted.coefficient_of(Exp([3, 0, 0])), wp("xy"));
    }

    #[test]
    fn substitution_composes() {
        let a: S = gen_series(&(), AltKind::Gtilde, MonomialArg::t(), 4);
        let to_s = a.substitute_t(&(), MonomialArg::s());
        assert_eq!(to_s.coefficient_of(Exp([0, 1, 0])), wp("xy"));
        assert_eq!(to_s.trunc(), Some(4));
        let scaled = a.substitute_t(&(), MonomialArg::t().times_q_pow(1));
        assert_eq!(
            scaled.coefficient_of(Exp([1, 0, 0])),
            wp("xy").scale(&v_pow(2))
        );
    }

    #[test]
    fn serde_round_trip() {
        let a: S = delta_series(&(), -2, MonomialArg::t().pow(2).negated(), 4);
        let json = serde_json::to_string(&a).unwrap();
        let back: S = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
