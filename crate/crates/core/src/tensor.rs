//! Dense rectangular matrices over series, Kronecker products, and
//! embeddings onto legs of two- and three-fold tensor spaces.
//!
//! Tensor index convention: leg 1 is slowest, 1-based entries throughout
//! the public reporting surface. Entry products in `mat_mul` keep the
//! written left-to-right order; the shuffle product on coefficients is
//! noncommutative and the identities being checked differ exactly by such
//! reorderings.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::scalar::Coeff;
use crate::series::{first_difference, Exp, MonomialArg, MultiSeries, VarSet};
use crate::word::WordPoly;

#[derive(Clone, PartialEq, Debug)]
pub struct Mat<C: Coeff> {
    rows: usize,
    cols: usize,
    data: Vec<MultiSeries<C>>,
}

/// Leg dimensions of a 3-fold tensor space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LegDims(pub usize, pub usize, pub usize);

impl<C: Coeff> Mat<C> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Mat {
            rows,
            cols,
            data: vec![MultiSeries::zero(VarSet::empty(), None); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.set(i, i, MultiSeries::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> MultiSeries<C>) -> Self {
        let mut m = Mat::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 0-based accessors; reporting converts to the 1-based convention.
    pub fn get(&self, r: usize, c: usize) -> &MultiSeries<C> {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: MultiSeries<C>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn map(&self, f: impl Fn(&MultiSeries<C>) -> MultiSeries<C> + Sync) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn truncate_to(&self, d: i64) -> Self {
        self.map(|e| e.truncate_to(d))
    }

    pub fn set_k_one(&self) -> Self {
        self.map(|e| e.set_k_one())
    }

    pub fn substitute_t(&self, cx: &C::Ctx, arg: MonomialArg) -> Self {
        self.map(|e| e.substitute_t(cx, arg))
    }

    pub fn is_graded(&self) -> bool {
        self.data.iter().all(|e| e.is_graded())
    }
}

/// Row-by-column product; entry products are `lhs * rhs` in written order.
/// Parallel over output entries, deterministically.
pub fn mat_mul<C: Coeff>(cx: &C::Ctx, a: &Mat<C>, b: &Mat<C>) -> Mat<C> {
    assert_eq!(a.cols, b.rows, "dimension mismatch in mat_mul: {}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols);
    let data: Vec<MultiSeries<C>> = (0..a.rows * b.cols)
        .into_par_iter()
        .map(|idx| {
            let (r, c) = (idx / b.cols, idx % b.cols);
            let mut acc: Option<MultiSeries<C>> = None;
            for k in 0..a.cols {
                let (x, y) = (a.get(r, k), b.get(k, c));
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                let prod = x.shuffle_mul(cx, y);
                acc = Some(match acc {
                    None => prod,
                    Some(s) => s.add(&prod),
                });
            }
            acc.unwrap_or_else(|| MultiSeries::zero(VarSet::empty(), None))
        })
        .collect();
    Mat { rows: a.rows, cols: b.cols, data }
}

/// Chain product, left to right.
pub fn mat_mul_chain<C: Coeff>(cx: &C::Ctx, mats: &[&Mat<C>]) -> Mat<C> {
    assert!(!mats.is_empty(), "empty matrix chain");
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = mat_mul(cx, &acc, m);
    }
    acc
}

/// Kronecker product with leg 1 slowest: row (r1, r2) -> r1*rows2 + r2.
pub fn kron<C: Coeff>(cx: &C::Ctx, a: &Mat<C>, b: &Mat<C>) -> Mat<C> {
    let mut out = Mat::zero(a.rows * b.rows, a.cols * b.cols);
    for r1 in 0..a.rows {
        for c1 in 0..a.cols {
            let x = a.get(r1, c1);
            if x.is_zero() {
                continue;
            }
            for r2 in 0..b.rows {
                for c2 in 0..b.cols {
                    let y = b.get(r2, c2);
                    if y.is_zero() {
                        continue;
                    }
                    out.set(r1 * b.rows + r2, c1 * b.cols + c2, x.shuffle_mul(cx, y));
                }
            }
        }
    }
    out
}

/// Embed a (rectangular) matrix on legs (1,2) of a 3-leg space with third
/// leg dimension `d3`: identity on leg 3.
pub fn on_legs_12<C: Coeff>(cx: &C::Ctx, m: &Mat<C>, d3: usize) -> Mat<C> {
    kron(cx, m, &Mat::identity(d3))
}

/// Embed on legs (2,3): identity on a first leg of dimension `d1`.
pub fn on_legs_23<C: Coeff>(cx: &C::Ctx, m: &Mat<C>, d1: usize) -> Mat<C> {
    kron(cx, &Mat::identity(d1), m)
}

/// Embed a square matrix acting on legs (1,3) of the 3-leg space `dims`,
/// identity on the middle leg. The matrix must be indexed by the flattened
/// pair (leg1, leg3) with leg 3 fastest.
pub fn on_legs_13<C: Coeff>(m: &Mat<C>, dims: LegDims) -> Mat<C> {
    let LegDims(d1, d2, d3) = dims;
    assert_eq!(m.rows, d1 * d3, "leg (1,3) dimension mismatch");
    assert_eq!(m.cols, d1 * d3, "leg (1,3) embedding requires a square matrix");
    let n = d1 * d2 * d3;
    let mut out = Mat::zero(n, n);
    for r1 in 0..d1 {
        for c1 in 0..d1 {
            for r3 in 0..d3 {
                for c3 in 0..d3 {
                    let e = m.get(r1 * d3 + r3, c1 * d3 + c3);
                    if e.is_zero() {
                        continue;
                    }
                    for mid in 0..d2 {
                        out.set(
                            (r1 * d2 + mid) * d3 + r3,
                            (c1 * d2 + mid) * d3 + c3,
                            e.clone(),
                        );
                    }
                }
            }
        }
    }
    out
}

/// Embed on a single leg of a 3-leg space.
pub fn on_leg<C: Coeff>(cx: &C::Ctx, m: &Mat<C>, leg: usize, dims: LegDims) -> Mat<C> {
    let LegDims(d1, d2, d3) = dims;
    match leg {
        1 => {
            assert_eq!((m.rows, m.cols), (d1, d1));
            kron(cx, m, &Mat::identity(d2 * d3))
        }
        2 => {
            assert_eq!((m.rows, m.cols), (d2, d2));
            kron(cx, &kron(cx, &Mat::identity(d1), m), &Mat::identity(d3))
        }
        3 => {
            assert_eq!((m.rows, m.cols), (d3, d3));
            kron(cx, &Mat::identity(d1 * d2), m)
        }
        _ => panic!("leg index must be 1, 2 or 3"),
    }
}

/// First difference between two matrices, scanned row-major and within an
/// entry by exponent order. Indices are reported 1-based.
#[derive(Clone, Debug, Serialize)]
pub struct MatDiff<C: Coeff + Serialize> {
    pub row: usize,
    pub col: usize,
    pub exp: [i64; 3],
    pub lhs: WordPoly<C>,
    pub rhs: WordPoly<C>,
}

pub fn mat_first_difference<C: Coeff + Serialize>(a: &Mat<C>, b: &Mat<C>) -> Option<MatDiff<C>> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols), "shape mismatch in comparison");
    for r in 0..a.rows {
        for c in 0..a.cols {
            if let Some((exp, lhs, rhs)) = first_difference(a.get(r, c), b.get(r, c)) {
                return Some(MatDiff { row: r + 1, col: c + 1, exp: exp.0, lhs, rhs });
            }
        }
    }
    None
}

pub fn mat_equal<C: Coeff + Serialize>(a: &Mat<C>, b: &Mat<C>) -> bool {
    mat_first_difference(a, b).is_none()
}

impl<C: Coeff + Serialize> Serialize for Mat<C> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        // A matrix whose entries are all constant scalar multiples of the
        // empty word dumps with ring "scalar", everything else as "series".
        let scalar_like = self.data.iter().all(|e| {
            e.num_terms() == 0
                || (e.num_terms() == 1
                    && e.terms().all(|(exp, p)| {
                        *exp == Exp::default() && p.num_terms() == 1 && p.is_homogeneous(0)
                    }))
        });
        let mut st = ser.serialize_struct("Mat", 4)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("ring", if scalar_like { "scalar" } else { "series" })?;
        let entries: Vec<Vec<&MultiSeries<C>>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c)).collect())
            .collect();
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{v_pow, Scalar};
    use crate::series::MonomialArg;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type M = Mat<Scalar>;

    fn diag(entries: &[i64]) -> M {
        let mut m = Mat::zero(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, MultiSeries::constant(v_pow(e)));
        }
        m
    }

    #[test]
    fn identity_multiplication() {
        let m = diag(&[1, -1, 3]);
        assert!(mat_equal(&mat_mul(&(), &Mat::identity(3), &m), &m));
        assert!(mat_equal(&mat_mul(&(), &m, &Mat::identity(3)), &m));
    }

    #[test]
    fn kron_of_diagonals() {
        // diag(v^2, v^-2) kron diag(v^2, v^-2) = diag(q, 1, 1, q^-1) in v-powers
        let d = diag(&[1, -1]);
        let k = kron(&(), &d, &d);
        let expect = diag(&[2, 0, 0, -2]);
        assert!(mat_equal(&k, &expect));
    }

    #[test]
    fn leg_embeddings_on_diagonals() {
        let d = diag(&[2, -2]);
        let dims = LegDims(2, 2, 2);
        let m13 = on_legs_13(&kron(&(), &d, &d), dims);
        // middle leg untouched: entry ((r1, mid, r3)) = d[r1] * d[r3]
        for r1 in 0..2 {
            for mid in 0..2 {
                for r3 in 0..2 {
                    let idx = (r1 * 2 + mid) * 2 + r3;
                    let want = v_pow(2 * (if r1 == 0 { 1 } else { -1 }) + 2 * (if r3 == 0 { 1 } else { -1 }));
                    assert_eq!(
                        m13.get(idx, idx).coefficient_of(Exp::default()).coeff(&crate::word::Word::empty()),
                        want
                    );
                }
            }
        }
        // single-leg embedding of a 2x2 on leg 1 of (2, 2): M kron I
        let m1 = on_legs_12(&(), &d, 2);
        assert!(mat_equal(&m1, &kron(&(), &d, &Mat::identity(2))));
    }

    #[test]
    fn first_difference_witness() {
        let a = Mat::<Scalar>::identity(2);
        let b = Mat::<Scalar>::zero(2, 2);
        let d = mat_first_difference(&a, &b).unwrap();
        assert_eq!((d.row, d.col), (1, 1));
    }

    #[test]
    fn mat_mul_is_associative_on_random_series_matrices() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let mut rand_mat = |rows: usize, cols: usize| {
                Mat::from_fn(rows, cols, |_, _| {
                    let c: i64 = rng.gen_range(-3..4);
                    let e: i64 = rng.gen_range(0..3);
                    let w = if rng.gen_bool(0.5) {
                        crate::word::Word::parse("x").unwrap()
                    } else {
                        crate::word::Word::parse("yx").unwrap()
                    };
                    let mut s = MultiSeries::zero(VarSet::T, None);
                    s.add_term(
                        Exp([e, 0, 0]),
                        &crate::word::WordPoly::term(w, Scalar::from_int(c)),
                    );
                    if rng.gen_bool(0.5) {
                        s = s.add(&MultiSeries::monomial(&(), MonomialArg::t()));
                    }
                    s
                })
            };
            let a = rand_mat(2, 3);
            let b = rand_mat(3, 2);
            let c = rand_mat(2, 2);
            let left = mat_mul(&(), &mat_mul(&(), &a, &b), &c);
            let right = mat_mul(&(), &a, &mat_mul(&(), &b, &c));
            assert!(mat_equal(&left, &right));
        }
    }

    #[test]
    fn central_scalars_commute() {
        // (c*M)*N == c*(M*N) for a central scalar c
        let mut m = Mat::<Scalar>::zero(2, 2);
        m.set(0, 0, MultiSeries::from_poly(crate::word::WordPoly::from_word(crate::word::Word::parse("xy").unwrap())));
        m.set(1, 1, MultiSeries::one());
        let n = diag(&[1, -1]);
        let c = v_pow(3);
        let left = mat_mul(&(), &m.scale(&c), &n);
        let right = mat_mul(&(), &m, &n).scale(&c);
        assert!(mat_equal(&left, &right));
    }
}
