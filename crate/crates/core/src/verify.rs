//! Exact verification of the displayed identities at configurable spins
//! and truncation degrees, with structured pass/fail reports.
//!
//! Every check is phrased as a list of labeled matrix pairs that must be
//! equal; the pair builders are generic over the coefficient backend, so
//! the same construction runs exactly (deciding the identity) and in
//! floating point (an independent cross-check of the exact kernel). A
//! failing exact report carries the lexicographically first differing
//! entry, monomial and coefficient pair.

use std::fmt::Write as _;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrices::{
    build_d, build_e, build_f, build_h, build_k, build_kbar, build_r, build_r_half_closed,
    build_rhat, k_half_base, KMethod, Spin,
};
use crate::scalar::{Coeff, Scalar};
use crate::series::{delta_series, gen_series, tdelta_series, Exp, MonomialArg, MultiSeries, VarSet};
use crate::tensor::{
    kron, mat_first_difference, mat_mul, mat_mul_chain, on_legs_12, on_legs_13, on_legs_23,
    LegDims, Mat,
};
use crate::word::{AltKind, Letter, Side, Word, WordPoly};

// ---------------------------------------------------------------------------
// Check specifications and reports
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Reflection-type equation `R K1 Rhat K2 = K2 Rhat K1 R`.
    Fm,
    /// The rearranged form `K1 Rhat K2 R = R K2 Rhat K1`.
    FmAlt,
    /// The three Yang-Baxter equations in two ratio variables.
    Ybe,
    /// The six mixed equations between R and its diagonal companion.
    Mixed,
    /// The E/F/H identities at the degeneration point `t = q^(j+1/2)`.
    EfSuite,
    /// `R(t) R(1/t)` is a nonzero scalar multiple of the identity.
    Unitarity,
    /// Top spectral coefficient of R against the diagonal companion.
    Limit,
    /// Catalan series identities: factorization, symmetry, recurrences.
    DeltaSuite,
    /// The three K constructions agree (and match the 2x2 base at j = 1/2).
    KConsistency,
    /// Block band structure of R.
    Band,
    /// Recursion routes for R (both reduction orders, both factor orders).
    RFusion,
    /// Same recursion routes for the diagonal companion.
    RhatFusion,
    /// Recursive R equals the closed half-spin row form.
    RClosed,
    /// Gauge layer: commutator with D x D, conjugated reflection equations,
    /// and the k = 1 specialization.
    Gauge,
    /// Sign-flip mutations of the base K must break the reflection check.
    Mutation,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Fm => "fm",
            CheckKind::FmAlt => "fm_alt",
            CheckKind::Ybe => "ybe",
            CheckKind::Mixed => "mixed",
            CheckKind::EfSuite => "ef_suite",
            CheckKind::Unitarity => "unitarity",
            CheckKind::Limit => "limit",
            CheckKind::DeltaSuite => "delta_suite",
            CheckKind::KConsistency => "k_consistency",
            CheckKind::Band => "band",
            CheckKind::RFusion => "r_fusion",
            CheckKind::RhatFusion => "rhat_fusion",
            CheckKind::RClosed => "r_closed",
            CheckKind::Gauge => "gauge",
            CheckKind::Mutation => "mutation",
        }
    }

    pub fn parse(s: &str) -> Result<CheckKind, String> {
        Ok(match s {
            "fm" => CheckKind::Fm,
            "fm_alt" | "fm-alt" => CheckKind::FmAlt,
            "ybe" => CheckKind::Ybe,
            "mixed" => CheckKind::Mixed,
            "ef_suite" | "ef" => CheckKind::EfSuite,
            "unitarity" => CheckKind::Unitarity,
            "limit" => CheckKind::Limit,
            "delta_suite" | "delta" => CheckKind::DeltaSuite,
            "k_consistency" | "k" => CheckKind::KConsistency,
            "band" => CheckKind::Band,
            "r_fusion" => CheckKind::RFusion,
            "rhat_fusion" => CheckKind::RhatFusion,
            "r_closed" => CheckKind::RClosed,
            "gauge" => CheckKind::Gauge,
            "mutation" => CheckKind::Mutation,
            other => return Err(format!("unknown check {other:?}")),
        })
    }

    pub fn all() -> &'static [CheckKind] {
        &[
            CheckKind::Fm,
            CheckKind::FmAlt,
            CheckKind::Ybe,
            CheckKind::Mixed,
            CheckKind::EfSuite,
            CheckKind::Unitarity,
            CheckKind::Limit,
            CheckKind::DeltaSuite,
            CheckKind::KConsistency,
            CheckKind::Band,
            CheckKind::RFusion,
            CheckKind::RhatFusion,
            CheckKind::RClosed,
            CheckKind::Gauge,
            CheckKind::Mutation,
        ]
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "backend")]
pub enum Backend {
    Exact,
    Numeric { q: f64, tol: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckSpec {
    pub kind: CheckKind,
    #[serde(default)]
    pub spins: Vec<Spin>,
    #[serde(default)]
    pub degree: i64,
    pub backend: Backend,
}

impl CheckSpec {
    pub fn exact(kind: CheckKind, spins: &[Spin], degree: i64) -> CheckSpec {
        CheckSpec { kind, spins: spins.to_vec(), degree, backend: Backend::Exact }
    }

    pub fn with_numeric(&self, q: f64, tol: f64) -> CheckSpec {
        CheckSpec { backend: Backend::Numeric { q, tol }, ..self.clone() }
    }

    pub fn params_string(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.spins.iter().enumerate() {
            let _ = write!(s, "j{}={} ", i + 1, j);
        }
        let _ = write!(s, "D={}", self.degree);
        if let Backend::Numeric { q, tol } = self.backend {
            let _ = write!(s, " q={q} tol={tol}");
        }
        s
    }
}

impl Serialize for Spin {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Spin {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Spin::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Entry {
        identity: String,
        row: usize,
        col: usize,
        exp: [i64; 3],
        lhs: serde_json::Value,
        rhs: serde_json::Value,
    },
    Message {
        message: String,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub params: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
    pub millis: u128,
}

impl Report {
    fn usage(check: &str, params: &str, message: String) -> Report {
        Report {
            check: check.to_string(),
            params: params.to_string(),
            pass: false,
            witness: Some(Witness::Message { message }),
            detail: None,
            millis: 0,
        }
    }
}

// ---------------------------------------------------------------------------
// Check bodies: labeled pairs of matrices that must be equal
// ---------------------------------------------------------------------------

struct LabeledPair<C: Coeff> {
    label: String,
    lhs: Mat<C>,
    rhs: Mat<C>,
}

struct CheckBody<C: Coeff> {
    pairs: Vec<LabeledPair<C>>,
    detail: Option<String>,
    /// Hard failure detected during construction (e.g. a vanishing scalar
    /// that must be nonzero).
    defect: Option<String>,
}

impl<C: Coeff> CheckBody<C> {
    fn new() -> Self {
        CheckBody { pairs: Vec::new(), detail: None, defect: None }
    }

    fn push(&mut self, label: impl Into<String>, lhs: Mat<C>, rhs: Mat<C>) {
        self.pairs.push(LabeledPair { label: label.into(), lhs, rhs });
    }

    fn push_series(&mut self, label: impl Into<String>, lhs: MultiSeries<C>, rhs: MultiSeries<C>) {
        let mut l = Mat::zero(1, 1);
        l.set(0, 0, lhs);
        let mut r = Mat::zero(1, 1);
        r.set(0, 0, rhs);
        self.push(label, l, r);
    }
}

/// Both sides of the reflection-type equation, with injectable K factors.
fn fm_sides_with<C: Coeff>(
    cx: &C::Ctx,
    j1: Spin,
    j2: Spin,
    k1: &Mat<C>,
    k2: &Mat<C>,
    alt: bool,
) -> (Mat<C>, Mat<C>) {
    let (n1, n2) = (j1.dim(), j2.dim());
    let k1 = kron(cx, k1, &Mat::identity(n2));
    let k2 = kron(cx, &Mat::identity(n1), k2);
    let rhat = build_rhat(cx, j1, j2);
    if alt {
        let r = build_r(cx, j1, j2, MonomialArg::s_over_t());
        let lhs = mat_mul_chain(cx, &[&k1, &rhat, &k2, &r]);
        let rhs = mat_mul_chain(cx, &[&r, &k2, &rhat, &k1]);
        (lhs, rhs)
    } else {
        let r = build_r(cx, j1, j2, MonomialArg::t_over_s());
        let lhs = mat_mul_chain(cx, &[&r, &k1, &rhat, &k2]);
        let rhs = mat_mul_chain(cx, &[&k2, &rhat, &k1, &r]);
        (lhs, rhs)
    }
}

fn fm_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin, d: i64, alt: bool) -> CheckBody<C> {
    let k1 = build_k(cx, j1, d, MonomialArg::s(), KMethod::Closed);
    let k2 = build_k(cx, j2, d, MonomialArg::t(), KMethod::Closed);
    let (lhs, rhs) = fm_sides_with(cx, j1, j2, &k1, &k2, alt);
    let mut body = CheckBody::new();
    let label = if alt { "K1 Rhat K2 R = R K2 Rhat K1" } else { "R K1 Rhat K2 = K2 Rhat K1 R" };
    body.push(label, lhs, rhs);
    body
}

fn ybe_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin, j3: Spin) -> CheckBody<C> {
    let dims = LegDims(j1.dim(), j2.dim(), j3.dim());
    let u = MonomialArg::t();
    let w = MonomialArg::s();
    let uw = MonomialArg { negative: false, vexp: 0, t_exp: 1, s_exp: 1 };
    let r12 = |arg| on_legs_12(cx, &build_r(cx, j1, j2, arg), j3.dim());
    let r13 = |arg| on_legs_13(&build_r(cx, j1, j3, arg), dims);
    let r23 = |arg| on_legs_23(cx, &build_r(cx, j2, j3, arg), j1.dim());

    let mut body = CheckBody::new();
    // R12(t1/t2) R13(t1/t3) R23(t2/t3), both orders
    let (a, b, c) = (r12(u), r13(uw), r23(w));
    body.push(
        "R12 R13 R23 = R23 R13 R12",
        mat_mul_chain(cx, &[&a, &b, &c]),
        mat_mul_chain(cx, &[&c, &b, &a]),
    );
    // R13(t1/t3) R23(t2/t3) R12(t2/t1) = R12(t2/t1) R23(t2/t3) R13(t1/t3)
    let (a, b, c) = (r13(uw), r23(w), r12(u.pow(-1)));
    body.push(
        "R13 R23 R12 = R12 R23 R13",
        mat_mul_chain(cx, &[&a, &b, &c]),
        mat_mul_chain(cx, &[&c, &b, &a]),
    );
    // R23(t3/t2) R12(t1/t2) R13(t1/t3) = R13(t1/t3) R12(t1/t2) R23(t3/t2)
    let (a, b, c) = (r23(w.pow(-1)), r12(u), r13(uw));
    body.push(
        "R23 R12 R13 = R13 R12 R23",
        mat_mul_chain(cx, &[&a, &b, &c]),
        mat_mul_chain(cx, &[&c, &b, &a]),
    );
    body
}

fn mixed_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin, j3: Spin) -> CheckBody<C> {
    let dims = LegDims(j1.dim(), j2.dim(), j3.dim());
    let t = MonomialArg::t();
    let r12 = on_legs_12(cx, &build_r(cx, j1, j2, t), j3.dim());
    let r13 = on_legs_13(&build_r(cx, j1, j3, t), dims);
    let r23 = on_legs_23(cx, &build_r(cx, j2, j3, t), j1.dim());
    let h12 = on_legs_12(cx, &build_rhat(cx, j1, j2), j3.dim());
    let h13 = on_legs_13(&build_rhat(cx, j1, j3), dims);
    let h23 = on_legs_23(cx, &build_rhat(cx, j2, j3), j1.dim());

    let mut body = CheckBody::new();
    let mut eq = |label: &str, x: &Mat<C>, y: &Mat<C>, z: &Mat<C>| {
        body.pairs.push(LabeledPair {
            label: label.to_string(),
            lhs: mat_mul_chain(cx, &[x, y, z]),
            rhs: mat_mul_chain(cx, &[z, y, x]),
        });
    };
    eq("R12 h13 h23 = h23 h13 R12", &r12, &h13, &h23);
    eq("R13 h23 h12 = h12 h23 R13", &r13, &h23, &h12);
    eq("R23 h12 h13 = h13 h12 R23", &r23, &h12, &h13);
    eq("R12 h23 h13 = h13 h23 R12", &r12, &h23, &h13);
    eq("R13 h12 h23 = h23 h12 R13", &r13, &h12, &h23);
    eq("R23 h13 h12 = h12 h13 R23", &r23, &h13, &h12);
    body
}

fn ef_body<C: Coeff>(cx: &C::Ctx, j: Spin) -> CheckBody<C> {
    let e = build_e(cx, j);
    let f = build_f(cx, j);
    let h = build_h(cx, j);
    // R^(1/2,j) at the degeneration point t = q^(j+1/2)
    let r = build_r(cx, Spin::HALF, j, MonomialArg::constant_v_pow(j.two_j() + 1));
    let mut body = CheckBody::new();
    body.push("F E = I", mat_mul(cx, &f, &e), Mat::identity(j.dim() + 1));
    body.push("R = E H F", r.clone(), mat_mul_chain(cx, &[&e, &h, &f]));
    body.push("R E = E H", mat_mul(cx, &r, &e), mat_mul(cx, &e, &h));
    body.push("F R = H F", mat_mul(cx, &f, &r), mat_mul(cx, &h, &f));
    body.push("R = E F R", r.clone(), mat_mul_chain(cx, &[&e, &f, &r]));
    body
}

fn unitarity_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin) -> CheckBody<C> {
    let r = build_r(cx, j1, j2, MonomialArg::t());
    let r_inv_arg = build_r(cx, j1, j2, MonomialArg::t().pow(-1));
    let p = mat_mul(cx, &r, &r_inv_arg);
    let n = j1.dim() * j2.dim();
    let lambda = p.get(0, 0).clone();
    let mut body = CheckBody::new();
    if lambda.is_zero() {
        body.defect = Some("proportionality scalar vanishes".to_string());
        return body;
    }
    let mut scaled_identity = Mat::zero(n, n);
    for i in 0..n {
        scaled_identity.set(i, i, lambda.clone());
    }
    body.push("R(t) R(1/t) = lambda I", p, scaled_identity);
    // lambda is symmetric under t -> 1/t
    body.push_series(
        "lambda(t) = lambda(1/t)",
        lambda.clone(),
        lambda.substitute_t(cx, MonomialArg::t().pow(-1)),
    );
    body.detail = Some(format!("lambda = {lambda}"));
    body
}

fn limit_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin) -> CheckBody<C> {
    let r = build_r(cx, j1, j2, MonomialArg::t());
    let top = j1.two_j() * j2.two_j();
    let n = j1.dim() * j2.dim();
    let top_coeff = Mat::from_fn(n, n, |a, b| {
        MultiSeries::from_poly(r.get(a, b).coefficient_of(Exp([top, 0, 0])))
    });
    let above = Mat::from_fn(n, n, |a, b| {
        let mut s = MultiSeries::zero(VarSet::T, None);
        for (e, p) in r.get(a, b).terms() {
            if e.t() > top {
                s.add_term(*e, p);
            }
        }
        s
    });
    let companion = build_rhat(cx, j1, j2).scale(&C::v_pow(cx, top));
    let mut body = CheckBody::new();
    body.push("top coefficient = q^(2 j1 j2) Rhat", top_coeff, companion);
    body.push("nothing above the top degree", above, Mat::zero(n, n));
    body
}

fn erase<C: Coeff>(s: &MultiSeries<C>, side: Side, letter: Letter, times: i64) -> MultiSeries<C> {
    let mut out = s.clone();
    for _ in 0..times {
        out = out.erase_map(side, letter);
    }
    out
}

fn delta_body<C: Coeff>(cx: &C::Ctx, max_m: i64, d: i64) -> CheckBody<C> {
    let t = MonomialArg::t();
    let t2 = t.pow(2);
    let mut body = CheckBody::new();

    // factorization: Delta^(-m-1)(-t^2) = Gt(q^m t^2) * ... * Gt(q^-m t^2)
    for m in 0..=max_m {
        let lhs = delta_series(cx, -m - 1, t2.negated(), d);
        let mut rhs = MultiSeries::one();
        for i in 0..=m {
            rhs = rhs.shuffle_mul(cx, &gen_series(cx, AltKind::Gtilde, t2.times_q_pow(m - 2 * i), d));
        }
        body.push_series(format!("factorization m={m}"), lhs, rhs.truncate_to(d));
    }

    // two-sided erasure symmetry between the Catalan series and its swap
    for m in 0..=max_m {
        let deep = d + m;
        let delta = delta_series(cx, -m, t.negated(), deep);
        let tdelta = tdelta_series(cx, -m, t.negated(), deep);
        for l in 0..=m {
            for r in 0..=m {
                let lhs = erase(&delta, Side::Left, Letter::X, l);
                let lhs = erase(&lhs, Side::Right, Letter::Y, r)
                    .scale(&C::qfact(cx, m - l).mul(&C::qfact(cx, m - r)));
                let rhs = erase(&tdelta, Side::Left, Letter::Y, m - l);
                let rhs = erase(&rhs, Side::Right, Letter::X, m - r)
                    .scale(&C::qfact(cx, l).mul(&C::qfact(cx, r)));
                let rhs = rhs.shuffle_mul(cx, &MultiSeries::monomial(cx, t.pow(l + r - m)));
                body.push_series(
                    format!("symmetry m={m} l={l} r={r}"),
                    lhs.truncate_to(d),
                    rhs.truncate_to(d),
                );
            }
        }
    }

    // one-step recurrences, in both letter roles, plus the single
    // right-erasure closed form they start from
    for m in 0..max_m {
        let deep = d + 2;
        let delta_next = delta_series(cx, -m - 1, t2.negated(), deep);
        let delta_shift = delta_series(cx, -m, t2.times_q_pow(-1).negated(), deep);
        let tdelta_next = tdelta_series(cx, -m - 1, t2.negated(), deep);
        let tdelta_shift = tdelta_series(cx, -m, t2.times_q_pow(-1).negated(), deep);
        let t2_mono = MultiSeries::monomial(cx, t2);
        let wminus = gen_series(cx, AltKind::Wminus, t2.times_q_pow(m), deep).shuffle_mul(cx, &t2_mono);
        let wplus = gen_series(cx, AltKind::Wplus, t2.times_q_pow(m), deep).shuffle_mul(cx, &t2_mono);
        let g = gen_series(cx, AltKind::G, t2.times_q_pow(m), deep).shuffle_mul(cx, &t2_mono);
        let gt = gen_series(cx, AltKind::Gtilde, t2.times_q_pow(m), deep).shuffle_mul(cx, &t2_mono);
        let m1 = C::qint(cx, m + 1);

        let lhs = erase(&delta_next, Side::Right, Letter::Y, 1);
        let rhs = wminus.shuffle_mul(cx, &delta_shift).scale(&m1);
        body.push_series(format!("right-erasure m={m}"), lhs.truncate_to(d), rhs.truncate_to(d));

        for l in 0..=m {
            for r in 1..=m {
                let lhs = erase(&erase(&delta_next, Side::Left, Letter::X, l), Side::Right, Letter::Y, r);
                let mut rhs = wminus
                    .shuffle_mul(
                        cx,
                        &erase(&erase(&delta_shift, Side::Left, Letter::X, l), Side::Right, Letter::Y, r - 1),
                    )
                    .scale(&C::v_pow(cx, 4 * l).mul(&m1));
                if l >= 1 {
                    let second = g
                        .shuffle_mul(
                            cx,
                            &erase(&erase(&delta_shift, Side::Left, Letter::X, l - 1), Side::Right, Letter::Y, r - 1),
                        )
                        .scale(&C::v_pow(cx, 2 * (l - 1)).mul(&C::qint(cx, l)).mul(&m1));
                    rhs = rhs.add(&second);
                }
                body.push_series(
                    format!("recurrence-x m={m} l={l} r={r}"),
                    lhs.truncate_to(d),
                    rhs.truncate_to(d),
                );

                let lhs = erase(&erase(&tdelta_next, Side::Left, Letter::Y, l), Side::Right, Letter::X, r);
                let mut rhs = wplus
                    .shuffle_mul(
                        cx,
                        &erase(&erase(&tdelta_shift, Side::Left, Letter::Y, l), Side::Right, Letter::X, r - 1),
                    )
                    .scale(&C::v_pow(cx, 4 * l).mul(&m1));
                if l >= 1 {
                    let second = gt
                        .shuffle_mul(
                            cx,
                            &erase(&erase(&tdelta_shift, Side::Left, Letter::Y, l - 1), Side::Right, Letter::X, r - 1),
                        )
                        .scale(&C::v_pow(cx, 2 * (l - 1)).mul(&C::qint(cx, l)).mul(&m1));
                    rhs = rhs.add(&second);
                }
                body.push_series(
                    format!("recurrence-y m={m} l={l} r={r}"),
                    lhs.truncate_to(d),
                    rhs.truncate_to(d),
                );
            }
        }
    }

    body
}

fn k_consistency_body<C: Coeff>(cx: &C::Ctx, j: Spin, d: i64) -> CheckBody<C> {
    let t = MonomialArg::t();
    let closed = build_k(cx, j, d, t, KMethod::Closed);
    let alt = build_k(cx, j, d, t, KMethod::Alt);
    let fused = build_k(cx, j, d, t, KMethod::Fused);
    let mut body = CheckBody::new();
    body.push("closed = swapped", closed.clone(), alt);
    body.push("closed = fused", closed.clone(), fused);
    if j.is_half() {
        body.push("closed = base 2x2", closed, k_half_base(cx, d, t));
    }
    body
}

fn band_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin) -> CheckBody<C> {
    let r = build_r(cx, j1, j2, MonomialArg::t());
    let (d1, d2) = (j1.dim(), j2.dim());
    // keep only the entries the band structure forces to vanish
    let masked = Mat::from_fn(d1 * d2, d1 * d2, |row, col| {
        let (a, c) = (row / d2, row % d2);
        let (b, e) = (col / d2, col % d2);
        let block_dist = a as i64 - b as i64;
        let allowed = block_dist.unsigned_abs() <= j2.two_j() as u64
            && e as i64 - c as i64 == block_dist;
        if allowed {
            MultiSeries::zero(VarSet::empty(), None)
        } else {
            r.get(row, col).clone()
        }
    });
    let mut body = CheckBody::new();
    body.push("entries outside the band vanish", masked, Mat::zero(d1 * d2, d1 * d2));
    body
}

/// All fusion routes to the target `R^(j1,j2)` (or its diagonal companion):
/// reduce either spin, with the two sub-factors in either order.
fn fusion_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin, hat: bool) -> CheckBody<C> {
    let t = MonomialArg::t();
    let build = |a: Spin, b: Spin, arg: MonomialArg| -> Mat<C> {
        if hat {
            build_rhat(cx, a, b)
        } else {
            build_r(cx, a, b, arg)
        }
    };
    let target = build(j1, j2, t);
    let mut body = CheckBody::new();

    if let Some(j1l) = j1.lower() {
        let dims = LegDims(2, j1l.dim(), j2.dim());
        let f12 = on_legs_12(cx, &build_f(cx, j1l), j2.dim());
        let e12 = on_legs_12(cx, &build_e(cx, j1l), j2.dim());
        let half = |arg| on_legs_13(&build(Spin::HALF, j2, arg), dims);
        let rest = |arg| on_legs_23(cx, &build(j1l, j2, arg), 2);
        let (ha, ra) = (half(t.times_v_pow(-j1l.two_j())), rest(t.times_v_pow(1)));
        body.push(
            "F12 R13 R23 E12 (reduce first spin)",
            target.clone(),
            mat_mul_chain(cx, &[&f12, &ha, &ra, &e12]),
        );
        let (hb, rb) = (half(t.times_v_pow(j1l.two_j())), rest(t.times_v_pow(-1)));
        body.push(
            "F12 R23 R13 E12 (reduce first spin, swapped order)",
            target.clone(),
            mat_mul_chain(cx, &[&f12, &rb, &hb, &e12]),
        );
    }
    if let Some(j2l) = j2.lower() {
        let dims = LegDims(j1.dim(), 2, j2l.dim());
        let f23 = on_legs_23(cx, &build_f(cx, j2l), j1.dim());
        let e23 = on_legs_23(cx, &build_e(cx, j2l), j1.dim());
        let half = |arg| on_legs_12(cx, &build(j1, Spin::HALF, arg), j2l.dim());
        let rest = |arg| on_legs_13(&build(j1, j2l, arg), dims);
        let (ha, ra) = (half(t.times_v_pow(-j2l.two_j())), rest(t.times_v_pow(1)));
        body.push(
            "F23 R12 R13 E23 (reduce second spin)",
            target.clone(),
            mat_mul_chain(cx, &[&f23, &ha, &ra, &e23]),
        );
        let (hb, rb) = (half(t.times_v_pow(j2l.two_j())), rest(t.times_v_pow(-1)));
        body.push(
            "F23 R13 R12 E23 (reduce second spin, swapped order)",
            target.clone(),
            mat_mul_chain(cx, &[&f23, &rb, &hb, &e23]),
        );
    }
    body
}

fn gauge_body<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin, d: i64) -> CheckBody<C> {
    let mut body = CheckBody::new();
    // [D (x) D, R(t)] = 0 identically in k
    let dd = kron(cx, &build_d(j1), &build_d(j2));
    let r = build_r(cx, j1, j2, MonomialArg::t());
    body.push("D x D commutes with R", mat_mul(cx, &dd, &r), mat_mul(cx, &r, &dd));

    // conjugated reflection equations with k formal
    let kbar1 = build_kbar(cx, j1, d, MonomialArg::s(), KMethod::Closed);
    let kbar2 = build_kbar(cx, j2, d, MonomialArg::t(), KMethod::Closed);
    let (lhs, rhs) = fm_sides_with(cx, j1, j2, &kbar1, &kbar2, false);
    body.push("gauge R K1 Rhat K2 = K2 Rhat K1 R", lhs.clone(), rhs);
    let (lhs_alt, rhs_alt) = fm_sides_with(cx, j1, j2, &kbar1, &kbar2, true);
    body.push("gauge K1 Rhat K2 R = R K2 Rhat K1", lhs_alt, rhs_alt);

    // k = 1 specializations collapse to the ungauged objects
    let k1 = build_k(cx, j1, d, MonomialArg::s(), KMethod::Closed);
    let k2 = build_k(cx, j2, d, MonomialArg::t(), KMethod::Closed);
    body.push("conjugated K at k = 1", kbar1.set_k_one(), k1.clone());
    let (plain_lhs, _) = fm_sides_with(cx, j1, j2, &k1, &k2, false);
    body.push("gauge side at k = 1", lhs.set_k_one(), plain_lhs);
    body
}

// ---------------------------------------------------------------------------
// Judging
// ---------------------------------------------------------------------------

fn judge_exact(spec: &CheckSpec, body: CheckBody<Scalar>, started: Instant) -> Report {
    let mut report = Report {
        check: spec.kind.name().to_string(),
        params: spec.params_string(),
        pass: true,
        witness: None,
        detail: body.detail.clone(),
        millis: 0,
    };
    if let Some(defect) = body.defect {
        report.pass = false;
        report.witness = Some(Witness::Message { message: defect });
    } else {
        for pair in &body.pairs {
            if let Some(diff) = mat_first_difference(&pair.lhs, &pair.rhs) {
                report.pass = false;
                report.witness = Some(Witness::Entry {
                    identity: pair.label.clone(),
                    row: diff.row,
                    col: diff.col,
                    exp: diff.exp,
                    lhs: serde_json::to_value(&diff.lhs).unwrap_or_default(),
                    rhs: serde_json::to_value(&diff.rhs).unwrap_or_default(),
                });
                break;
            }
        }
    }
    report.millis = started.elapsed().as_millis();
    report
}

fn series_max_abs(s: &MultiSeries<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for (_, p) in s.terms() {
        for (_, c) in p.terms() {
            m = m.max(c.abs());
        }
    }
    m
}

fn mat_max_abs(m: &Mat<f64>) -> f64 {
    let mut acc: f64 = 0.0;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            acc = acc.max(series_max_abs(m.get(r, c)));
        }
    }
    acc
}

fn judge_numeric(spec: &CheckSpec, body: CheckBody<f64>, tol: f64, started: Instant) -> Report {
    let mut report = Report {
        check: spec.kind.name().to_string(),
        params: spec.params_string(),
        pass: true,
        witness: None,
        detail: body.detail.clone(),
        millis: 0,
    };
    let mut worst: f64 = 0.0;
    for pair in &body.pairs {
        let scale = mat_max_abs(&pair.lhs).max(mat_max_abs(&pair.rhs));
        if scale == 0.0 {
            continue;
        }
        let residual = mat_max_abs(&pair.lhs.sub(&pair.rhs)) / scale;
        worst = worst.max(residual);
        if residual >= tol {
            report.pass = false;
            report.witness = Some(Witness::Message {
                message: format!("normalized residual {residual:.3e} >= {tol:.1e} in `{}`", pair.label),
            });
            break;
        }
    }
    if report.pass {
        report.detail = Some(format!("max normalized residual {worst:.3e}"));
    }
    report.millis = started.elapsed().as_millis();
    report
}

fn spin_at(spec: &CheckSpec, i: usize) -> Result<Spin, String> {
    spec.spins
        .get(i)
        .copied()
        .ok_or_else(|| format!("check {:?} needs at least {} spin(s)", spec.kind.name(), i + 1))
}

fn build_body<C: Coeff>(cx: &C::Ctx, spec: &CheckSpec) -> Result<CheckBody<C>, String> {
    if spec.degree < 0 {
        return Err("truncation degree must be nonnegative".to_string());
    }
    Ok(match spec.kind {
        CheckKind::Fm => fm_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, spec.degree, false),
        CheckKind::FmAlt => fm_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, spec.degree, true),
        CheckKind::Ybe => ybe_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, spin_at(spec, 2)?),
        CheckKind::Mixed => mixed_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, spin_at(spec, 2)?),
        CheckKind::EfSuite => ef_body(cx, spin_at(spec, 0)?),
        CheckKind::Unitarity => unitarity_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?),
        CheckKind::Limit => limit_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?),
        CheckKind::DeltaSuite => {
            let max_m = spec.spins.first().map_or(3, |s| s.two_j());
            delta_body(cx, max_m, spec.degree)
        }
        CheckKind::KConsistency => k_consistency_body(cx, spin_at(spec, 0)?, spec.degree),
        CheckKind::Band => band_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?),
        CheckKind::RFusion => fusion_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, false),
        CheckKind::RhatFusion => fusion_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, true),
        CheckKind::RClosed => {
            let j = spin_at(spec, 0)?;
            let mut body = CheckBody::new();
            body.push(
                "recursive = closed row form",
                build_r(cx, Spin::HALF, j, MonomialArg::t()),
                build_r_half_closed(cx, j, MonomialArg::t()),
            );
            body
        }
        CheckKind::Gauge => gauge_body(cx, spin_at(spec, 0)?, spin_at(spec, 1)?, spec.degree),
        CheckKind::Mutation => return Err("mutation check runs on the exact backend only".to_string()),
    })
}

/// Number of single sign-flip mutations exercised by the mutation check.
pub const MUTATION_COUNT: usize = 10;

/// Flip the sign of `count` randomly chosen single scalar terms of the base
/// 2x2 K-matrix; each mutant must break the spin-(1/2,1/2) reflection check.
fn mutation_report(spec: &CheckSpec, seed: u64, count: usize) -> Report {
    let started = Instant::now();
    let d = spec.degree;
    let cx = &();
    let k1: Mat<Scalar> = build_k(cx, Spin::HALF, d, MonomialArg::s(), KMethod::Closed);
    let k2: Mat<Scalar> = build_k(cx, Spin::HALF, d, MonomialArg::t(), KMethod::Closed);

    // coordinates of every stored term of K1
    let mut coords: Vec<(usize, usize, Exp, Word)> = Vec::new();
    for r in 0..k1.rows() {
        for c in 0..k1.cols() {
            for (e, p) in k1.get(r, c).terms() {
                for (w, _) in p.terms() {
                    coords.push((r, c, *e, *w));
                }
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut survivors = Vec::new();
    for i in 0..count {
        let (r, c, e, w) = coords[rng.gen_range(0..coords.len())];
        let mut mutant = k1.clone();
        let entry = mutant.get(r, c).clone();
        let coeff = entry.coefficient_of(e).coeff(&w);
        let mut flip = MultiSeries::zero(entry.vars(), entry.trunc());
        flip.add_term(e, &WordPoly::term(w, coeff.mul(&Scalar::from_int(-2))));
        mutant.set(r, c, entry.add(&flip));
        let (lhs, rhs) = fm_sides_with(cx, Spin::HALF, Spin::HALF, &mutant, &k2, false);
        if mat_first_difference(&lhs, &rhs).is_none() {
            survivors.push(format!(
                "mutation {i} at ({},{}) exp {:?} word {w} went undetected",
                r + 1,
                c + 1,
                e.0
            ));
        }
    }
    Report {
        check: spec.kind.name().to_string(),
        params: format!("D={d} seed={seed} count={count}"),
        pass: survivors.is_empty(),
        witness: survivors.first().map(|m| Witness::Message { message: m.clone() }),
        detail: Some(format!("{} of {count} mutations detected", count - survivors.len())),
        millis: started.elapsed().as_millis(),
    }
}

/// Run one check specification to a report. Usage errors become failing
/// reports rather than panics so sibling checks are unaffected.
pub fn run_check(spec: &CheckSpec) -> Report {
    let started = Instant::now();
    if spec.kind == CheckKind::Mutation {
        return match spec.backend {
            Backend::Exact => mutation_report(spec, 0xC0FFEE, MUTATION_COUNT),
            Backend::Numeric { .. } => {
                Report::usage(spec.kind.name(), &spec.params_string(), "mutation check is exact-only".into())
            }
        };
    }
    match spec.backend {
        Backend::Exact => match build_body::<Scalar>(&(), spec) {
            Ok(body) => judge_exact(spec, body, started),
            Err(e) => Report::usage(spec.kind.name(), &spec.params_string(), e),
        },
        Backend::Numeric { q, tol } => match build_body::<f64>(&q, spec) {
            Ok(body) => judge_numeric(spec, body, tol, started),
            Err(e) => Report::usage(spec.kind.name(), &spec.params_string(), e),
        },
    }
}

/// Run a list of specs, concurrently, reporting in input order.
pub fn run_suite(specs: &[CheckSpec]) -> Vec<Report> {
    specs.par_iter().map(run_check).collect()
}

/// The full acceptance set on the exact backend: reflection equations at
/// all desk-scale spin pairs, K/R construction coherence, the structural
/// suites, the Catalan-series identities, the gauge layer, and the
/// mutation sensitivity check.
pub fn acceptance_suite() -> Vec<CheckSpec> {
    use CheckKind::*;
    let s = |tj: i64| Spin::from_two_j(tj).unwrap();
    let mut specs = Vec::new();

    // base reproduction and the main-theorem instances
    specs.push(CheckSpec::exact(Fm, &[s(1), s(1)], 6));
    for (a, b) in [(1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3)] {
        specs.push(CheckSpec::exact(Fm, &[s(a), s(b)], 6));
    }
    for (a, b) in [(1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3)] {
        specs.push(CheckSpec::exact(FmAlt, &[s(a), s(b)], 4));
    }

    // K-construction coherence
    for tj in [1, 2, 3] {
        specs.push(CheckSpec::exact(KConsistency, &[s(tj)], 8));
    }

    // R coherence: closed row form, fusion routes, band structure
    for tj in 1..=4 {
        specs.push(CheckSpec::exact(RClosed, &[s(tj)], 0));
    }
    for tj1 in 1..=4 {
        for tj2 in 1..=4 {
            if tj1 + tj2 <= 5 {
                specs.push(CheckSpec::exact(RFusion, &[s(tj1), s(tj2)], 0));
                specs.push(CheckSpec::exact(RhatFusion, &[s(tj1), s(tj2)], 0));
            }
        }
    }
    for tj1 in 1..=3 {
        for tj2 in 1..=3 {
            specs.push(CheckSpec::exact(Band, &[s(tj1), s(tj2)], 0));
        }
    }

    // structural identities
    for tj in 1..=3 {
        specs.push(CheckSpec::exact(EfSuite, &[s(tj)], 0));
    }
    for tj1 in 1..=3 {
        for tj2 in 1..=3 {
            if tj1 + tj2 <= 4 {
                specs.push(CheckSpec::exact(Unitarity, &[s(tj1), s(tj2)], 0));
                specs.push(CheckSpec::exact(Limit, &[s(tj1), s(tj2)], 0));
            }
        }
    }
    for tj1 in 1..=2 {
        for tj2 in 1..=2 {
            for tj3 in 1..=2 {
                if tj1 + tj2 + tj3 <= 4 {
                    specs.push(CheckSpec::exact(Ybe, &[s(tj1), s(tj2), s(tj3)], 0));
                    specs.push(CheckSpec::exact(Mixed, &[s(tj1), s(tj2), s(tj3)], 0));
                }
            }
        }
    }

    // Catalan-series identities (spins[0] encodes 2*max_m here)
    specs.push(CheckSpec::exact(DeltaSuite, &[s(3)], 8));

    // gauge layer: full reflection checks at the two quoted pairs, the
    // commutator plus the degree-0 layer everywhere else
    specs.push(CheckSpec::exact(Gauge, &[s(1), s(1)], 4));
    specs.push(CheckSpec::exact(Gauge, &[s(1), s(2)], 4));
    for tj1 in 1..=3 {
        for tj2 in 1..=3 {
            if !((tj1, tj2) == (1, 1) || (tj1, tj2) == (1, 2)) {
                specs.push(CheckSpec::exact(Gauge, &[s(tj1), s(tj2)], 0));
            }
        }
    }

    // mutation sensitivity
    specs.push(CheckSpec::exact(Mutation, &[], 4));

    specs
}

/// Numeric companions of an exact suite at the given sample points.
pub fn numeric_companions(specs: &[CheckSpec], qs: &[f64], tol: f64) -> Vec<CheckSpec> {
    specs
        .iter()
        .filter(|s| s.kind != CheckKind::Mutation)
        .flat_map(|s| qs.iter().map(move |&q| s.with_numeric(q, tol)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(tj: i64) -> Spin {
        Spin::from_two_j(tj).unwrap()
    }

    #[test]
    fn fm_base_case_passes() {
        let r = run_check(&CheckSpec::exact(CheckKind::Fm, &[s(1), s(1)], 4));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn fm_degree_zero_layer() {
        let r = run_check(&CheckSpec::exact(CheckKind::Fm, &[s(1), s(1)], 0));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn fm_alt_base_case_passes() {
        let r = run_check(&CheckSpec::exact(CheckKind::FmAlt, &[s(1), s(1)], 4));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn k_consistency_small() {
        for tj in [1, 2] {
            let r = run_check(&CheckSpec::exact(CheckKind::KConsistency, &[s(tj)], 5));
            assert!(r.pass, "2j = {tj} witness: {:?}", r.witness);
        }
    }

    #[test]
    fn ybe_minimal() {
        let r = run_check(&CheckSpec::exact(CheckKind::Ybe, &[s(1), s(1), s(1)], 0));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn mixed_minimal() {
        let r = run_check(&CheckSpec::exact(CheckKind::Mixed, &[s(1), s(1), s(1)], 0));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn ef_suite_small() {
        for tj in [1, 2] {
            let r = run_check(&CheckSpec::exact(CheckKind::EfSuite, &[s(tj)], 0));
            assert!(r.pass, "2j = {tj} witness: {:?}", r.witness);
        }
    }

    #[test]
    fn unitarity_and_limit_base() {
        let r = run_check(&CheckSpec::exact(CheckKind::Unitarity, &[s(1), s(1)], 0));
        assert!(r.pass, "witness: {:?}", r.witness);
        assert!(r.detail.as_deref().unwrap_or("").contains("lambda"));
        let r = run_check(&CheckSpec::exact(CheckKind::Limit, &[s(1), s(1)], 0));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn delta_suite_small() {
        let r = run_check(&CheckSpec::exact(CheckKind::DeltaSuite, &[s(4)], 5));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn band_and_fusion_small() {
        for kind in [CheckKind::Band, CheckKind::RFusion, CheckKind::RhatFusion] {
            let r = run_check(&CheckSpec::exact(kind, &[s(1), s(2)], 0));
            assert!(r.pass, "{:?} witness: {:?}", kind, r.witness);
        }
        let r = run_check(&CheckSpec::exact(CheckKind::RClosed, &[s(3)], 0));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn gauge_small() {
        let r = run_check(&CheckSpec::exact(CheckKind::Gauge, &[s(1), s(1)], 3));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn mutation_detected() {
        let r = run_check(&CheckSpec::exact(CheckKind::Mutation, &[], 4));
        assert!(r.pass, "witness: {:?}", r.witness);
    }

    #[test]
    fn numeric_backend_agrees() {
        for kind in [CheckKind::Fm, CheckKind::KConsistency] {
            let spins: &[Spin] =
                if kind == CheckKind::Fm { &[Spin::HALF, Spin::HALF] } else { &[Spin::HALF] };
            let spec = CheckSpec::exact(kind, spins, 4).with_numeric(1.3, 1e-8);
            let r = run_check(&spec);
            assert!(r.pass, "{:?} witness: {:?}", kind, r.witness);
        }
    }

    #[test]
    fn corrupted_input_fails_with_witness() {
        let cx = &();
        let k1: Mat<Scalar> = build_k(cx, Spin::HALF, 4, MonomialArg::s(), KMethod::Closed);
        let k2: Mat<Scalar> = build_k(cx, Spin::HALF, 4, MonomialArg::t(), KMethod::Closed);
        let mut bad = k1.clone();
        let e = bad.get(0, 0).clone();
        bad.set(0, 0, e.neg());
        let (lhs, rhs) = fm_sides_with(cx, Spin::HALF, Spin::HALF, &bad, &k2, false);
        assert!(mat_first_difference(&lhs, &rhs).is_some());
    }

    #[test]
    fn usage_error_is_a_failing_report() {
        let spec = CheckSpec {
            kind: CheckKind::Fm,
            spins: vec![Spin::HALF],
            degree: 4,
            backend: Backend::Exact,
        };
        let r = run_check(&spec);
        assert!(!r.pass);
        assert!(matches!(r.witness, Some(Witness::Message { .. })));
    }

    #[test]
    fn report_serialization_round_trips() {
        let r = run_check(&CheckSpec::exact(CheckKind::Fm, &[s(1), s(1)], 2));
        let json = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(r.pass, back.pass);
        assert_eq!(r.check, back.check);
        assert_eq!(r.params, back.params);
    }

    #[test]
    fn suite_runs_in_order() {
        let specs = vec![
            CheckSpec::exact(CheckKind::Fm, &[s(1), s(1)], 2),
            CheckSpec::exact(CheckKind::Unitarity, &[s(1), s(1)], 0),
        ];
        let reports = run_suite(&specs);
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].check, "fm");
        assert_eq!(reports[1].check, "unitarity");
        assert!(reports.iter().all(|r| r.pass));
    }
}
