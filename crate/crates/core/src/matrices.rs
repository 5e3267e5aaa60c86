//! Builders for the named matrices: the fusion intertwiners E, F, the
//! diagonal H, the spectral R-matrix (recursive and closed half-spin row
//! form), its constant diagonal companion, the boundary K-matrix in three
//! independent constructions, and the gauge matrices D and Kbar.
//!
//! Spins are half-integers stored as 2j. The E/F/H builders take the spin
//! they fuse *from*: `build_e(j)` is the (4j+2) x (2j+2) isometry raising
//! j to j + 1/2.

use crate::scalar::Coeff;
use crate::series::{delta_series, gen_series, tdelta_series, MonomialArg, MultiSeries, VarSet};
use crate::tensor::{kron, mat_mul_chain, on_legs_12, on_legs_13, on_legs_23, LegDims, Mat};
use crate::word::{AltKind, Letter, Side};

/// An exact half-integer spin j >= 1/2, stored as 2j.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Spin(i64);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    pub fn from_two_j(two_j: i64) -> Result<Spin, String> {
        if two_j >= 1 {
            Ok(Spin(two_j))
        } else {
            Err(format!("spin must be at least 1/2, got {two_j}/2"))
        }
    }

    /// Parse "1/2", "1", "3/2", "2", ...
    pub fn parse(s: &str) -> Result<Spin, String> {
        let two_j = match s.split_once('/') {
            Some((n, "2")) => n
                .trim()
                .parse::<i64>()
                .map_err(|_| format!("invalid spin {s:?}"))?,
            Some(_) => return Err(format!("invalid spin {s:?} (only halves are allowed)")),
            None => {
                2 * s
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| format!("invalid spin {s:?}"))?
            }
        };
        Spin::from_two_j(two_j)
    }

    pub fn two_j(self) -> i64 {
        self.0
    }

    /// Dimension of the spin-j space, 2j + 1.
    pub fn dim(self) -> usize {
        (self.0 + 1) as usize
    }

    pub fn lower(self) -> Option<Spin> {
        (self.0 > 1).then(|| Spin(self.0 - 1))
    }

    pub fn raise(self) -> Spin {
        Spin(self.0 + 1)
    }

    pub fn is_half(self) -> bool {
        self.0 == 1
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn bracket_range(n: i64) -> Vec<i64> {
    (1..=n).collect()
}

/// `c(z) = z - z^-1` of a monomial argument, as an exact series.
fn c_of<C: Coeff>(cx: &C::Ctx, arg: MonomialArg) -> MultiSeries<C> {
    MultiSeries::monomial(cx, arg).sub(&MultiSeries::monomial(cx, arg.pow(-1)))
}

fn constant<C: Coeff>(c: C) -> MultiSeries<C> {
    MultiSeries::constant(c)
}

/// Raising intertwiner: (4j+2) x (2j+2), radical entries
/// `([2j+2-a]/[2j+1])^(1/2)` and `([a]/[2j+1])^(1/2)` on the two bands.
pub fn build_e<C: Coeff>(cx: &C::Ctx, j: Spin) -> Mat<C> {
    let tj = j.two_j();
    let mut m = Mat::zero((2 * tj + 2) as usize, (tj + 2) as usize);
    for a in 1..=tj + 1 {
        let top = C::sqrt_ratio(cx, &[tj + 2 - a], &[tj + 1]);
        let bottom = C::sqrt_ratio(cx, &[a], &[tj + 1]);
        m.set((a - 1) as usize, (a - 1) as usize, constant(top));
        m.set((a + tj) as usize, a as usize, constant(bottom));
    }
    m
}

/// Averaging intertwiner: (2j+2) x (4j+2), one-sided inverse of
/// [`build_e`], with bracket-sum denominators.
pub fn build_f<C: Coeff>(cx: &C::Ctx, j: Spin) -> Mat<C> {
    let tj = j.two_j();
    let mut m = Mat::zero((tj + 2) as usize, (2 * tj + 2) as usize);
    for a in 1..=tj + 1 {
        let denom = C::qint(cx, tj + 2 - a).add(&C::qint(cx, a - 1)).inv();
        let top = C::sqrt_ratio(cx, &[tj + 2 - a, tj + 1], &[]).mul(&denom);
        m.set((a - 1) as usize, (a - 1) as usize, constant(top));
        let denom = C::qint(cx, tj + 1 - a).add(&C::qint(cx, a)).inv();
        let bottom = C::sqrt_ratio(cx, &[a, tj + 1], &[]).mul(&denom);
        m.set(a as usize, (a + tj) as usize, constant(bottom));
    }
    m
}

/// Diagonal (2j+2) x (2j+2) matrix with entries
/// `c(q) c(q^2) ... c(q^2j) ([2j+2-a] + [a-1])`.
pub fn build_h<C: Coeff>(cx: &C::Ctx, j: Spin) -> Mat<C> {
    let tj = j.two_j();
    let mut prefactor = C::one();
    for i in 1..=tj {
        prefactor = prefactor.mul(&C::v_pow(cx, 2 * i).sub(&C::v_pow(cx, -2 * i)));
    }
    let n = (tj + 2) as usize;
    let mut m = Mat::zero(n, n);
    for a in 1..=tj + 2 {
        let val = prefactor.mul(&C::qint(cx, tj + 2 - a).add(&C::qint(cx, a - 1)));
        m.set((a - 1) as usize, (a - 1) as usize, constant(val));
    }
    m
}

/// The constant diagonal companion `q^(2 diag(j1,...,-j1) (x) diag(j2,...,-j2))`.
pub fn build_rhat<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin) -> Mat<C> {
    let (d1, d2) = (j1.dim(), j2.dim());
    let mut m = Mat::zero(d1 * d2, d1 * d2);
    for a in 1..=d1 as i64 {
        for b in 1..=d2 as i64 {
            let vexp = (j1.two_j() + 2 - 2 * a) * (j2.two_j() + 2 - 2 * b);
            let idx = ((a - 1) as usize) * d2 + (b - 1) as usize;
            m.set(idx, idx, constant(C::v_pow(cx, vexp)));
        }
    }
    m
}

/// Block-diagonal route to the same matrix: block a carries the power
/// `omega^(2j1+2-2a)` of the weight diagonal `omega = diag(q^j2,...,q^-j2)`,
/// computed by repeated multiplication. Cross-check for [`build_rhat`].
pub fn build_rhat_block_form<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin) -> Mat<C> {
    let d2 = j2.dim();
    let omega_pow = |e: i64| -> Mat<C> {
        let sign = if e >= 0 { 1 } else { -1 };
        let base = Mat::from_fn(d2, d2, |r, c| {
            if r == c {
                constant(C::v_pow(cx, sign * (j2.two_j() - 2 * r as i64)))
            } else {
                MultiSeries::zero(VarSet::empty(), None)
            }
        });
        let mut acc = Mat::identity(d2);
        for _ in 0..e.unsigned_abs() {
            acc = crate::tensor::mat_mul(cx, &acc, &base);
        }
        acc
    };
    let d1 = j1.dim();
    let mut m = Mat::zero(d1 * d2, d1 * d2);
    for a in 1..=d1 as i64 {
        let block = omega_pow(j1.two_j() + 2 - 2 * a);
        for r in 0..d2 {
            for c in 0..d2 {
                let e = block.get(r, c).clone();
                if !e.is_zero() {
                    m.set((a as usize - 1) * d2 + r, (a as usize - 1) * d2 + c, e);
                }
            }
        }
    }
    m
}

/// The 4x4 base R-matrix in the formal variable t.
fn r_base<C: Coeff>(cx: &C::Ctx) -> Mat<C> {
    let t = MonomialArg::t();
    let mut m = Mat::zero(4, 4);
    let c_qt = c_of(cx, t.times_q_pow(1));
    let c_t = c_of(cx, t);
    let c_q = constant(C::v_pow(cx, 2).sub(&C::v_pow(cx, -2)));
    m.set(0, 0, c_qt.clone());
    m.set(3, 3, c_qt);
    m.set(1, 1, c_t.clone());
    m.set(2, 2, c_t);
    m.set(1, 2, c_q.clone());
    m.set(2, 1, c_q);
    m
}

/// `R^(j1,j2)` in the formal variable t by the fusion recursion: the first
/// spin is reduced to 1/2, then the second.
fn r_formal<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin) -> Mat<C> {
    let t = MonomialArg::t();
    if let Some(j1l) = j1.lower() {
        // R^(j1,j2)(t) = F_12 R^(1/2,j2)_13(q^-j1l t) R^(j1l,j2)_23(q^(1/2) t) E_12
        let dims = LegDims(2, j1l.dim(), j2.dim());
        let f12 = on_legs_12(cx, &build_f(cx, j1l), j2.dim());
        let r13 = on_legs_13(
            &r_formal(cx, Spin::HALF, j2).substitute_t(cx, t.times_v_pow(-j1l.two_j())),
            dims,
        );
        let r23 = on_legs_23(cx, &r_formal(cx, j1l, j2).substitute_t(cx, t.times_v_pow(1)), 2);
        let e12 = on_legs_12(cx, &build_e(cx, j1l), j2.dim());
        return mat_mul_chain(cx, &[&f12, &r13, &r23, &e12]);
    }
    if let Some(j2l) = j2.lower() {
        // R^(1/2,j2)(t) = F_23 R^(1/2,j2l)_13(q^(-1/2) t) R^(1/2,1/2)_12(q^j2l t) E_23
        let dims = LegDims(2, 2, j2l.dim());
        let f23 = on_legs_23(cx, &build_f(cx, j2l), 2);
        let r13 = on_legs_13(
            &r_formal(cx, Spin::HALF, j2l).substitute_t(cx, t.times_v_pow(-1)),
            dims,
        );
        let r12 = on_legs_12(
            cx,
            &r_base(cx).substitute_t(cx, t.times_v_pow(j2l.two_j())),
            j2l.dim(),
        );
        let e23 = on_legs_23(cx, &build_e(cx, j2l), 2);
        return mat_mul_chain(cx, &[&f23, &r13, &r12, &e23]);
    }
    r_base(cx)
}

/// Spectral R-matrix at a monomial argument.
pub fn build_r<C: Coeff>(cx: &C::Ctx, j1: Spin, j2: Spin, arg: MonomialArg) -> Mat<C> {
    r_formal(cx, j1, j2).substitute_t(cx, arg)
}

/// Closed form of `R^(1/2,j)`: diagonal entries `c(q^(j+3/2-a) t)` and an
/// anti-band `c(q) ([2j+2-a][a-1])^(1/2)`, all against the common factor
/// `prod_k c(q^(j-1/2-k) t)`. Independent oracle for the recursion.
pub fn build_r_half_closed<C: Coeff>(cx: &C::Ctx, j: Spin, arg: MonomialArg) -> Mat<C> {
    let tj = j.two_j();
    let t = MonomialArg::t();
    let mut common = MultiSeries::one();
    for k in 0..=tj - 2 {
        common = common.shuffle_mul(cx, &c_of(cx, t.times_v_pow(tj - 1 - 2 * k)));
    }
    let n = (2 * tj + 2) as usize;
    let mut m = Mat::zero(n, n);
    for a in 1..=tj + 1 {
        let diag = c_of(cx, t.times_v_pow(tj + 3 - 2 * a)).shuffle_mul(cx, &common);
        m.set((a - 1) as usize, (a - 1) as usize, diag.clone());
        let mirror = (2 * tj + 2 - a) as usize;
        m.set(mirror, mirror, diag);
    }
    let c_q = C::v_pow(cx, 2).sub(&C::v_pow(cx, -2));
    for a in 2..=tj + 1 {
        let coeff = c_q.mul(&C::sqrt_ratio(cx, &[tj + 2 - a, a - 1], &[]));
        let off = common.scale(&coeff);
        m.set((a - 1) as usize, (a + tj - 1) as usize, off.clone());
        m.set((a + tj - 1) as usize, (a - 1) as usize, off);
    }
    m.substitute_t(cx, arg)
}

// ---------------------------------------------------------------------------
// K-matrix coefficients and constructions
// ---------------------------------------------------------------------------

/// Twice the exponent `rho(a, b, j)`, i.e. the v-exponent of `q^rho`.
///
/// `rho` itself is a half-integer in general (already at a = b = 1, j = 1
/// the quadratic gives 7/2), so only `2 rho` is required to be integral;
/// that is exactly what makes `q^rho` a monomial in v. Panics if even that
/// fails, which no valid index combination does.
pub fn rho_vexp(a: i64, b: i64, j: Spin) -> i64 {
    let tj = j.two_j();
    // 4*rho with j = tj/2 cleared of denominators
    let four_rho = 2 * a * a + 2 * b * b + 3 * tj * tj + 8 * a * b
        - 6 * a * tj
        - 6 * b * tj
        - 12 * a
        - 12 * b
        + 13 * tj
        + 12;
    assert!(
        four_rho % 2 == 0,
        "q^rho({a}, {b}, j={j}) is not a v-monomial: 4*rho = {four_rho}"
    );
    four_rho / 2
}

/// Entry coefficient of the closed K-matrix construction.
pub fn phi<C: Coeff>(cx: &C::Ctx, a: i64, b: i64, j: Spin) -> C {
    let tj = j.two_j();
    let mut num = bracket_range(a - 1);
    num.extend(bracket_range(tj + 1 - b));
    let mut den = bracket_range(b - 1);
    den.extend(bracket_range(tj + 1 - a));
    C::v_pow(cx, rho_vexp(a, b, j))
        .mul(&C::qfact(cx, tj).inv())
        .mul(&C::sqrt_ratio(cx, &num, &den))
}

/// Entry coefficient of the letter-swapped K-matrix construction; its
/// bracket-factorial ratio is the reciprocal of the one in [`phi`].
pub fn psi<C: Coeff>(cx: &C::Ctx, a: i64, b: i64, j: Spin) -> C {
    let tj = j.two_j();
    let mut num = bracket_range(b - 1);
    num.extend(bracket_range(tj + 1 - a));
    let mut den = bracket_range(a - 1);
    den.extend(bracket_range(tj + 1 - b));
    C::v_pow(cx, rho_vexp(a, b, j))
        .mul(&C::qfact(cx, tj).inv())
        .mul(&C::sqrt_ratio(cx, &num, &den))
}

/// Which of the three independent K constructions to run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum KMethod {
    /// Erasures of the Catalan series against `phi`.
    Closed,
    /// Erasures of the letter-swapped Catalan series against `psi`.
    Alt,
    /// Fusion recursion from the 2x2 base case.
    Fused,
}

/// The 2x2 base K-matrix: alternating-word generating functions
/// `[[q t W^-(t^2), G(t^2)], [Gt(t^2), q t W^+(t^2)]]` at the argument.
pub fn k_half_base<C: Coeff>(cx: &C::Ctx, d: i64, arg: MonomialArg) -> Mat<C> {
    let sq = arg.pow(2);
    let q_arg = MultiSeries::monomial(cx, arg.times_q_pow(1));
    let entry = |kind: AltKind, with_qt: bool| -> MultiSeries<C> {
        let series = gen_series(cx, kind, sq, d);
        if with_qt {
            series.shuffle_mul(cx, &q_arg).truncate_to(d)
        } else {
            series
        }
    };
    let mut m = Mat::zero(2, 2);
    m.set(0, 0, entry(AltKind::Wminus, true));
    m.set(0, 1, entry(AltKind::G, false));
    m.set(1, 0, entry(AltKind::Gtilde, false));
    m.set(1, 1, entry(AltKind::Wplus, true));
    m
}

fn erase_times<C: Coeff>(
    mut s: MultiSeries<C>,
    side: Side,
    letter: Letter,
    times: i64,
) -> MultiSeries<C> {
    assert!(times >= 0, "negative erasure count");
    for _ in 0..times {
        s = s.erase_map(side, letter);
    }
    s
}

fn k_closed<C: Coeff>(cx: &C::Ctx, j: Spin, d: i64, arg: MonomialArg) -> Mat<C> {
    let tj = j.two_j();
    let delta = delta_series(cx, -tj, arg.pow(2).negated(), d + 2 * tj);
    Mat::from_fn(j.dim(), j.dim(), |r, c| {
        let (a, b) = (r as i64 + 1, c as i64 + 1);
        let core = erase_times(
            erase_times(delta.clone(), Side::Left, Letter::X, b - 1),
            Side::Right,
            Letter::Y,
            tj + 1 - a,
        );
        let shift = MultiSeries::monomial(cx, arg.pow(a - b - tj));
        core.shuffle_mul(cx, &shift)
            .truncate_to(d)
            .scale(&phi(cx, a, b, j))
    })
}

fn k_alt<C: Coeff>(cx: &C::Ctx, j: Spin, d: i64, arg: MonomialArg) -> Mat<C> {
    let tj = j.two_j();
    let tdelta = tdelta_series(cx, -tj, arg.pow(2).negated(), d + 2 * tj);
    Mat::from_fn(j.dim(), j.dim(), |r, c| {
        let (a, b) = (r as i64 + 1, c as i64 + 1);
        let core = erase_times(
            erase_times(tdelta.clone(), Side::Left, Letter::Y, tj + 1 - b),
            Side::Right,
            Letter::X,
            a - 1,
        );
        let shift = MultiSeries::monomial(cx, arg.pow(b - a - tj));
        core.shuffle_mul(cx, &shift)
            .truncate_to(d)
            .scale(&psi(cx, a, b, j))
    })
}

fn k_fused<C: Coeff>(cx: &C::Ctx, j: Spin, d: i64, arg: MonomialArg) -> Mat<C> {
    match j.lower() {
        None => k_half_base(cx, d, arg),
        Some(jl) => {
            // K^(j)(t) = F K_1^(1/2)(q^jl t) Rhat^(1/2,jl) K_2^(jl)(q^(-1/2) t) E
            let f = build_f(cx, jl);
            let k1 = kron(
                cx,
                &k_half_base(cx, d, arg.times_v_pow(jl.two_j())),
                &Mat::identity(jl.dim()),
            );
            let rhat = build_rhat(cx, Spin::HALF, jl);
            let k2 = kron(cx, &Mat::identity(2), &k_fused(cx, jl, d, arg.times_v_pow(-1)));
            let e = build_e(cx, jl);
            mat_mul_chain(cx, &[&f, &k1, &rhat, &k2, &e]).truncate_to(d)
        }
    }
}

/// Boundary K-matrix of spin j, truncated at total degree `d`, at a
/// degree-1 monomial argument (t, s, or a q-shift of either).
pub fn build_k<C: Coeff>(cx: &C::Ctx, j: Spin, d: i64, arg: MonomialArg, method: KMethod) -> Mat<C> {
    assert!(d >= 0, "negative truncation bound");
    assert_eq!(arg.degree(), 1, "K-matrix argument must have total degree 1");
    let m = match method {
        KMethod::Closed => k_closed(cx, j, d, arg),
        KMethod::Alt => k_alt(cx, j, d, arg),
        KMethod::Fused => k_fused(cx, j, d, arg),
    };
    assert!(m.is_graded(), "K-matrix entries must be graded by word length");
    m
}

/// Gauge matrix `diag(1, k, ..., k^2j)`.
pub fn build_d<C: Coeff>(j: Spin) -> Mat<C> {
    let n = j.dim();
    Mat::from_fn(n, n, |r, c| {
        if r == c {
            MultiSeries::one().shift_k(r as i64)
        } else {
            MultiSeries::zero(VarSet::empty(), None)
        }
    })
}

/// Conjugated K-matrix `D^-1 K D`: entry (a, b) scaled by k^(b-a).
pub fn build_kbar<C: Coeff>(
    cx: &C::Ctx,
    j: Spin,
    d: i64,
    arg: MonomialArg,
    method: KMethod,
) -> Mat<C> {
    let k = build_k(cx, j, d, arg, method);
    Mat::from_fn(j.dim(), j.dim(), |r, c| k.get(r, c).shift_k(c as i64 - r as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qint, sqrt_ratio_exact, v_pow, Scalar};
    use crate::series::Exp;
    use crate::tensor::{mat_equal, mat_mul};
    use crate::word::{Word, WordPoly};

    type M = Mat<Scalar>;

    fn scalar_entry(m: &M, r: usize, c: usize) -> Scalar {
        m.get(r, c).coefficient_of(Exp::default()).coeff(&Word::empty())
    }

    #[test]
    fn spin_parsing_and_dims() {
        assert_eq!(Spin::parse("1/2").unwrap(), Spin::HALF);
        assert_eq!(Spin::parse("1").unwrap(), Spin::ONE);
        assert_eq!(Spin::parse("3/2").unwrap().dim(), 4);
        assert!(Spin::parse("0").is_err());
        assert!(Spin::parse("1/3").is_err());
        assert_eq!(Spin::parse("3/2").unwrap().to_string(), "3/2");
        assert_eq!(Spin::ONE.to_string(), "1");
    }

    #[test]
    fn e_matrix_spin_half() {
        // rows (1,0,0), (0,[2]^-1/2,0), (0,[2]^-1/2,0), (0,0,1)
        let e: M = build_e(&(), Spin::HALF);
        assert_eq!((e.rows(), e.cols()), (4, 3));
        let inv_sqrt2 = sqrt_ratio_exact(&[1], &[2]);
        assert_eq!(scalar_entry(&e, 0, 0), Scalar::one());
        assert_eq!(scalar_entry(&e, 1, 1), inv_sqrt2);
        assert_eq!(scalar_entry(&e, 2, 1), inv_sqrt2);
        assert_eq!(scalar_entry(&e, 3, 2), Scalar::one());
        assert!(e.get(0, 1).is_zero() && e.get(1, 0).is_zero() && e.get(3, 0).is_zero());
    }

    #[test]
    fn f_times_e_is_identity() {
        for tj in 1..=3 {
            let j = Spin::from_two_j(tj).unwrap();
            let f: M = build_f(&(), j);
            let e: M = build_e(&(), j);
            let prod = mat_mul(&(), &f, &e);
            assert!(mat_equal(&prod, &Mat::identity((tj + 2) as usize)), "FE != I at 2j = {tj}");
        }
    }

    #[test]
    fn h_matrix_spin_half() {
        // diag(c(q)[2], 2c(q), c(q)[2])
        let h: M = build_h(&(), Spin::HALF);
        let c_q = v_pow(2).sub(&v_pow(-2));
        assert_eq!(scalar_entry(&h, 0, 0), c_q.mul(&qint(2)));
        assert_eq!(scalar_entry(&h, 1, 1), c_q.mul(&Scalar::from_int(2)));
        assert_eq!(scalar_entry(&h, 2, 2), c_q.mul(&qint(2)));
    }

    #[test]
    fn rhat_values_and_block_form() {
        let r: M = build_rhat(&(), Spin::HALF, Spin::HALF);
        for (i, e) in [1i64, -1, -1, 1].iter().enumerate() {
            assert_eq!(scalar_entry(&r, i, i), v_pow(*e));
        }
        let r: M = build_rhat(&(), Spin::HALF, Spin::ONE);
        for (i, e) in [2i64, 0, -2, -2, 0, 2].iter().enumerate() {
            assert_eq!(scalar_entry(&r, i, i), v_pow(*e));
        }
        for tj1 in 1..=4 {
            for tj2 in 1..=4 {
                let (j1, j2) = (Spin::from_two_j(tj1).unwrap(), Spin::from_two_j(tj2).unwrap());
                let direct: M = build_rhat(&(), j1, j2);
                let blocks: M = build_rhat_block_form(&(), j1, j2);
                assert!(mat_equal(&direct, &blocks), "block form mismatch at ({j1}, {j2})");
            }
        }
    }

    #[test]
    fn r_base_case_shape() {
        let r: M = build_r(&(), Spin::HALF, Spin::HALF, MonomialArg::t());
        // corners c(qt) = q t - q^-1 t^-1
        let corner = r.get(0, 0);
        assert_eq!(
            corner.coefficient_of(Exp([1, 0, 0])),
            WordPoly::term(Word::empty(), v_pow(2))
        );
        assert_eq!(
            corner.coefficient_of(Exp([-1, 0, 0])),
            WordPoly::term(Word::empty(), v_pow(-2).neg())
        );
        // central block c(t) and c(q)
        assert_eq!(
            r.get(1, 1).coefficient_of(Exp([1, 0, 0])),
            WordPoly::one()
        );
        assert_eq!(
            r.get(1, 2).coefficient_of(Exp([0, 0, 0])),
            WordPoly::term(Word::empty(), v_pow(2).sub(&v_pow(-2)))
        );
        for (r_, c_) in [(0, 1), (0, 2), (0, 3), (1, 0), (3, 1)] {
            assert!(r.get(r_, c_).is_zero());
        }
    }

    #[test]
    fn r_half_closed_reduces_to_base_and_matches_frozen_entries() {
        let closed: M = build_r_half_closed(&(), Spin::HALF, MonomialArg::t());
        let base: M = build_r(&(), Spin::HALF, Spin::HALF, MonomialArg::t());
        assert!(mat_equal(&closed, &base));

        // j = 1: entry (1,1) = c(q^(3/2) t) c(q^(1/2) t), entry (2,4) =
        // c(q) sqrt([2][1]) c(q^(1/2) t)
        let m: M = build_r_half_closed(&(), Spin::ONE, MonomialArg::t());
        let t = MonomialArg::t();
        let want_11 = c_of::<Scalar>(&(), t.times_v_pow(3)).shuffle_mul(&(), &c_of(&(), t.times_v_pow(1)));
        assert!(crate::series::series_equal(m.get(0, 0), &want_11));
        let c_q = v_pow(2).sub(&v_pow(-2));
        let want_24 = c_of::<Scalar>(&(), t.times_v_pow(1)).scale(&c_q.mul(&sqrt_ratio_exact(&[2, 1], &[])));
        assert!(crate::series::series_equal(m.get(1, 3), &want_24));
    }

    #[test]
    fn rho_is_half_integral_and_phi_values() {
        // every index combination gives an integral v-exponent, and the
        // half-spin corner values are the frozen ones
        for tj in 1..=5 {
            let j = Spin::from_two_j(tj).unwrap();
            for a in 1..=tj + 1 {
                for b in 1..=tj + 1 {
                    let _ = rho_vexp(a, b, j);
                }
            }
        }
        assert_eq!(rho_vexp(1, 1, Spin::HALF), 2);
        assert_eq!(rho_vexp(1, 2, Spin::HALF), 0);
        assert_eq!(rho_vexp(2, 1, Spin::HALF), 0);
        assert_eq!(rho_vexp(2, 2, Spin::HALF), 2);
        // a genuinely half-integral case: rho(1, 1, 1) = 7/2
        assert_eq!(rho_vexp(1, 1, Spin::ONE), 7);
        let p: Scalar = phi(&(), 1, 1, Spin::HALF);
        assert_eq!(p, v_pow(2));
        let p: Scalar = phi(&(), 2, 1, Spin::HALF);
        assert_eq!(p, Scalar::one());
        // phi * psi at the same indices: the radical ratios cancel exactly
        for (a, b) in [(1i64, 2i64), (2, 3), (1, 3)] {
            let j = Spin::from_two_j(2).unwrap();
            let lhs = phi::<Scalar>(&(), a, b, j).mul(&psi(&(), a, b, j));
            let fact_inv = qint(2).mul(&qint(1)).inv();
            let expect = v_pow(2 * rho_vexp(a, b, j)).mul(&fact_inv).mul(&fact_inv);
            assert_eq!(lhs, expect);
        }
    }

    #[test]
    fn k_half_closed_matches_base() {
        let closed: M = build_k(&(), Spin::HALF, 5, MonomialArg::t(), KMethod::Closed);
        let base: M = k_half_base(&(), 5, MonomialArg::t());
        assert!(mat_equal(&closed, &base));
    }

    #[test]
    fn k_grading_invariant() {
        for tj in 1..=2 {
            let j = Spin::from_two_j(tj).unwrap();
            let k: M = build_k(&(), j, 4, MonomialArg::t(), KMethod::Closed);
            assert!(k.is_graded());
        }
    }

    #[test]
    fn d_and_kbar() {
        let d: M = build_d(Spin::HALF);
        assert_eq!(d.get(0, 0), &MultiSeries::one());
        assert_eq!(d.get(1, 1), &MultiSeries::one().shift_k(1));
        let k: M = build_k(&(), Spin::HALF, 4, MonomialArg::t(), KMethod::Closed);
        let kbar: M = build_kbar(&(), Spin::HALF, 4, MonomialArg::t(), KMethod::Closed);
        // (1,2) entry picks up k, (2,1) entry k^-1, k = 1 recovers K
        assert_eq!(kbar.get(0, 1), &k.get(0, 1).shift_k(1));
        assert_eq!(kbar.get(1, 0), &k.get(1, 0).shift_k(-1));
        assert!(mat_equal(&kbar.set_k_one(), &k));
    }
}
