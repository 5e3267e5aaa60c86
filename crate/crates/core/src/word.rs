//! The free algebra on the letters x, y: words, linear combinations, the
//! concatenation and q-shuffle products, the reversal antiautomorphism, the
//! letter-erasure operators, and Catalan word combinatorics.
//!
//! Words carry the bar-weight x -> +1, y -> -1. The shuffle of two plain
//! words is backend-independent (coefficients are integer multiples of
//! integer powers of q), so it is computed once and memoized globally;
//! coefficient rings only enter when bilinear combinations are formed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Coeff;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Letter {
    X,
    Y,
}

impl Letter {
    pub fn bar(self) -> i64 {
        match self {
            Letter::X => 1,
            Letter::Y => -1,
        }
    }

    pub fn other(self) -> Letter {
        match self {
            Letter::X => Letter::Y,
            Letter::Y => Letter::X,
        }
    }

    fn bit(self) -> u64 {
        match self {
            Letter::X => 0,
            Letter::Y => 1,
        }
    }

    fn from_bit(b: u64) -> Letter {
        if b == 0 {
            Letter::X
        } else {
            Letter::Y
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A word over {x, y}, packed as bits (x = 0, y = 1) with the first letter
/// in the most significant used position. Supports lengths up to 63, far
/// beyond anything the truncation bounds produce.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Word {
    len: u8,
    bits: u64,
}

impl Word {
    pub const fn empty() -> Word {
        Word { len: 0, bits: 0 }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn letter(&self, i: usize) -> Letter {
        debug_assert!(i < self.len());
        Letter::from_bit((self.bits >> (self.len as usize - 1 - i)) & 1)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(move |i| self.letter(i))
    }

    /// Append a letter at the right end.
    pub fn push(&self, l: Letter) -> Word {
        debug_assert!(self.len < 63);
        Word { len: self.len + 1, bits: (self.bits << 1) | l.bit() }
    }

    /// Prepend a letter at the left end.
    pub fn prepend(&self, l: Letter) -> Word {
        debug_assert!(self.len < 63);
        Word { len: self.len + 1, bits: self.bits | (l.bit() << self.len) }
    }

    pub fn concat(&self, rhs: &Word) -> Word {
        debug_assert!(self.len + rhs.len < 64);
        Word {
            len: self.len + rhs.len,
            bits: (self.bits << rhs.len) | rhs.bits,
        }
    }

    pub fn first(&self) -> Option<Letter> {
        (!self.is_empty()).then(|| self.letter(0))
    }

    pub fn last(&self) -> Option<Letter> {
        (!self.is_empty()).then(|| Letter::from_bit(self.bits & 1))
    }

    /// Drop the first letter.
    pub fn tail(&self) -> Word {
        debug_assert!(!self.is_empty());
        Word {
            len: self.len - 1,
            bits: self.bits & !(1u64 << (self.len - 1)),
        }
    }

    /// Drop the last letter.
    pub fn init(&self) -> Word {
        debug_assert!(!self.is_empty());
        Word { len: self.len - 1, bits: self.bits >> 1 }
    }

    /// Erasure of one letter: `Some(rest)` if the word starts (resp. ends)
    /// with the letter, `None` otherwise. The empty word erases to `None`.
    pub fn erase(&self, side: Side, letter: Letter) -> Option<Word> {
        match side {
            Side::Left => (self.first() == Some(letter)).then(|| self.tail()),
            Side::Right => (self.last() == Some(letter)).then(|| self.init()),
        }
    }

    /// Reverse the word and exchange x and y.
    pub fn zeta(&self) -> Word {
        let mut out = Word::empty();
        for l in self.letters() {
            out = out.prepend(l.other());
        }
        out
    }

    /// Exchange x and y in place (no reversal).
    pub fn swap_xy(&self) -> Word {
        let mask = if self.len == 0 { 0 } else { (1u64 << self.len) - 1 };
        Word { len: self.len, bits: self.bits ^ mask }
    }

    pub fn bar_sum(&self) -> i64 {
        self.letters().map(Letter::bar).sum()
    }

    /// Maximum prefix bar-sum over all prefixes (0 for the empty word).
    pub fn height(&self) -> i64 {
        let mut sum = 0;
        let mut max = 0;
        for l in self.letters() {
            sum += l.bar();
            max = max.max(sum);
        }
        max
    }

    /// All proper prefix bar-sums nonnegative and total bar-sum zero.
    pub fn is_catalan(&self) -> bool {
        let mut sum = 0;
        for l in self.letters() {
            sum += l.bar();
            if sum < 0 {
                return false;
            }
        }
        sum == 0
    }

    pub fn count(&self, letter: Letter) -> usize {
        let ones = self.bits.count_ones() as usize;
        match letter {
            Letter::Y => ones,
            Letter::X => self.len() - ones,
        }
    }

    pub fn parse(s: &str) -> Result<Word, String> {
        let mut w = Word::empty();
        for ch in s.chars() {
            match ch {
                'x' => w = w.push(Letter::X),
                'y' => w = w.push(Letter::Y),
                _ => return Err(format!("invalid letter {ch:?} in word")),
            }
        }
        Ok(w)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Word) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Length first, then lexicographic with x < y (MSB-first packing makes the
// lexicographic comparison a plain integer comparison).
impl Ord for Word {
    fn cmp(&self, other: &Word) -> Ordering {
        self.len.cmp(&other.len).then(self.bits.cmp(&other.bits))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for l in self.letters() {
            write!(f, "{}", if l == Letter::X { 'x' } else { 'y' })?;
        }
        Ok(())
    }
}

/// The four alternating word families.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AltKind {
    /// `x(yx)^n`
    Wminus,
    /// `y(xy)^n`
    Wplus,
    /// `(xy)^n`
    Gtilde,
    /// `(yx)^n`
    G,
}

pub fn alternating_word(kind: AltKind, n: usize) -> Word {
    let (first, pair) = match kind {
        AltKind::Wminus => (Some(Letter::X), (Letter::Y, Letter::X)),
        AltKind::Wplus => (Some(Letter::Y), (Letter::X, Letter::Y)),
        AltKind::Gtilde => (None, (Letter::X, Letter::Y)),
        AltKind::G => (None, (Letter::Y, Letter::X)),
    };
    let mut w = Word::empty();
    if let Some(l) = first {
        w = w.push(l);
    }
    for _ in 0..n {
        w = w.push(pair.0);
        w = w.push(pair.1);
    }
    w
}

/// All Catalan words of length 2n in lexicographic order (x < y).
pub fn catalan_words(n: usize) -> Arc<Vec<Word>> {
    static CACHE: std::sync::OnceLock<DashMap<usize, Arc<Vec<Word>>>> =
        std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(DashMap::new);
    if let Some(hit) = cache.get(&n) {
        return hit.clone();
    }

    fn rec(w: Word, sum: i64, target: usize, out: &mut Vec<Word>) {
        if w.len() == target {
            out.push(w);
            return;
        }
        let remaining = (target - w.len()) as i64;
        // An x fits if the deficit sum+1 can still be paid off; a y needs a
        // positive running sum. Trying x first gives lexicographic order.
        if sum + 1 <= remaining - 1 {
            rec(w.push(Letter::X), sum + 1, target, out);
        }
        if sum >= 1 {
            rec(w.push(Letter::Y), sum - 1, target, out);
        }
    }

    let mut out = Vec::new();
    rec(Word::empty(), 0, 2 * n, &mut out);
    let arc = Arc::new(out);
    cache.insert(n, arc.clone());
    arc
}

// ---------------------------------------------------------------------------
// Shuffle product on plain words
// ---------------------------------------------------------------------------

/// Sum of `<v1, u_k>` over all letters of `u`, with `<a, b> = 2` for equal
/// letters and `-2` otherwise.
fn pairing_with_word(v1: Letter, u: &Word) -> i64 {
    let eq = u.count(v1) as i64;
    2 * eq - 2 * (u.len() as i64 - eq)
}

/// Shuffle of two words: each resulting word with its coefficient as a list
/// of (q-exponent, integer multiplicity) pairs, sorted by word.
pub type ShuffleTable = Arc<Vec<(Word, Vec<(i64, i64)>)>>;

pub fn shuffle_words(u: Word, v: Word) -> ShuffleTable {
    static CACHE: std::sync::OnceLock<DashMap<(Word, Word), ShuffleTable>> =
        std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(DashMap::new);
    if let Some(hit) = cache.get(&(u, v)) {
        return hit.clone();
    }
    let mut acc: BTreeMap<Word, BTreeMap<i64, i64>> = BTreeMap::new();
    if u.is_empty() || v.is_empty() {
        let w = if u.is_empty() { v } else { u };
        acc.entry(w).or_default().insert(0, 1);
    } else {
        // u * v = u1 (tail(u) * v) + v1 (u * tail(v)) q^{<v1, u>}
        for (w, terms) in shuffle_words(u.tail(), v).iter() {
            let entry = acc.entry(w.prepend(u.letter(0))).or_default();
            for &(e, m) in terms {
                *entry.entry(e).or_insert(0) += m;
            }
        }
        let weight = pairing_with_word(v.letter(0), &u);
        for (w, terms) in shuffle_words(u, v.tail()).iter() {
            let entry = acc.entry(w.prepend(v.letter(0))).or_default();
            for &(e, m) in terms {
                *entry.entry(e + weight).or_insert(0) += m;
            }
        }
    }
    let table: Vec<(Word, Vec<(i64, i64)>)> = acc
        .into_iter()
        .map(|(w, exps)| (w, exps.into_iter().filter(|&(_, m)| m != 0).collect()))
        .filter(|(_, terms): &(Word, Vec<(i64, i64)>)| !terms.is_empty())
        .collect();
    let arc: ShuffleTable = Arc::new(table);
    cache.insert((u, v), arc.clone());
    arc
}

// ---------------------------------------------------------------------------
// Linear combinations of words
// ---------------------------------------------------------------------------

/// Finite linear combination of words with coefficients in `C`. No zero
/// coefficients are stored.
#[derive(Clone, PartialEq, Debug)]
pub struct WordPoly<C: Coeff> {
    terms: BTreeMap<Word, C>,
}

impl<C: Coeff> Default for WordPoly<C> {
    fn default() -> Self {
        WordPoly::zero()
    }
}

impl<C: Coeff> WordPoly<C> {
    pub fn zero() -> Self {
        WordPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        WordPoly::from_word(Word::empty())
    }

    pub fn from_word(w: Word) -> Self {
        WordPoly::term(w, C::one())
    }

    pub fn term(w: Word, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        WordPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> C {
        self.terms.get(w).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, w: Word, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(*w, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        WordPoly {
            terms: self.terms.iter().map(|(w, c)| (*w, c.neg())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return WordPoly::zero();
        }
        let mut out = WordPoly::zero();
        for (w, x) in &self.terms {
            out.add_term(*w, &x.mul(c));
        }
        out
    }

    /// Bilinear extension of word concatenation.
    pub fn concat_mul(&self, rhs: &Self) -> Self {
        let mut out = WordPoly::zero();
        for (u, cu) in &self.terms {
            for (v, cv) in &rhs.terms {
                out.add_term(u.concat(v), &cu.mul(cv));
            }
        }
        out
    }

    /// Bilinear extension of the q-shuffle product.
    pub fn shuffle_mul(&self, cx: &C::Ctx, rhs: &Self) -> Self {
        let mut out = WordPoly::zero();
        for (u, cu) in &self.terms {
            for (v, cv) in &rhs.terms {
                let c = cu.mul(cv);
                for (w, exps) in shuffle_words(*u, *v).iter() {
                    let mut factor = C::zero();
                    for &(e, m) in exps {
                        let mut t = C::v_pow(cx, 2 * e);
                        if m != 1 {
                            t = t.mul(&int_coeff::<C>(m));
                        }
                        factor = factor.add(&t);
                    }
                    out.add_term(*w, &c.mul(&factor));
                }
            }
        }
        out
    }

    /// Linear extension of the reversal antiautomorphism.
    pub fn zeta(&self) -> Self {
        let mut out = WordPoly::zero();
        for (w, c) in &self.terms {
            out.add_term(w.zeta(), c);
        }
        out
    }

    /// Linear extension of the letter exchange x <-> y.
    pub fn swap_xy(&self) -> Self {
        let mut out = WordPoly::zero();
        for (w, c) in &self.terms {
            out.add_term(w.swap_xy(), c);
        }
        out
    }

    /// Linear extension of one-letter erasure; annihilated words drop out.
    pub fn erase(&self, side: Side, letter: Letter) -> Self {
        let mut out = WordPoly::zero();
        for (w, c) in &self.terms {
            if let Some(rest) = w.erase(side, letter) {
                out.add_term(rest, c);
            }
        }
        out
    }

    pub fn min_len(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).min()
    }

    pub fn max_len(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).max()
    }

    /// True when every stored word has the given length.
    pub fn is_homogeneous(&self, len: usize) -> bool {
        self.terms.keys().all(|w| w.len() == len)
    }
}

fn int_coeff<C: Coeff>(m: i64) -> C {
    let mut acc = C::zero();
    let unit = if m >= 0 { C::one() } else { C::one().neg() };
    for _ in 0..m.unsigned_abs() {
        acc = acc.add(&unit);
    }
    acc
}

impl<C: Coeff> fmt::Display for WordPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?})*{w}")?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = String::with_capacity(self.len());
        for l in self.letters() {
            s.push(if l == Letter::X { 'x' } else { 'y' });
        }
        ser.serialize_str(&s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Word::parse(&s).map_err(D::Error::custom)
    }
}

impl<C: Coeff + Serialize> Serialize for WordPoly<C> {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = ser.serialize_map(Some(self.terms.len()))?;
        for (w, c) in &self.terms {
            map.serialize_entry(&w.to_key(), c)?;
        }
        map.end()
    }
}

impl Word {
    fn to_key(self) -> String {
        let mut s = String::with_capacity(self.len());
        for l in self.letters() {
            s.push(if l == Letter::X { 'x' } else { 'y' });
        }
        s
    }
}

impl<'de, C: Coeff + Deserialize<'de>> Deserialize<'de> for WordPoly<C> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, C>::deserialize(de)?;
        let mut out = WordPoly::zero();
        for (k, c) in map {
            let w = Word::parse(&k).map_err(D::Error::custom)?;
            out.add_term(w, &c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qint, v_pow, Scalar};
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn wp(s: &str) -> WordPoly<Scalar> {
        WordPoly::from_word(w(s))
    }

    fn shuffle(a: &WordPoly<Scalar>, b: &WordPoly<Scalar>) -> WordPoly<Scalar> {
        a.shuffle_mul(&(), b)
    }

    /// Independent shuffle oracle: the mirror recursion peeling letters off
    /// the right ends instead of the left ends.
    fn shuffle_oracle(u: Word, v: Word) -> WordPoly<Scalar> {
        if u.is_empty() {
            return WordPoly::from_word(v);
        }
        if v.is_empty() {
            return WordPoly::from_word(u);
        }
        // u * v = (u * init(v)) v_s + (init(u) * v) u_r q^{<u_r, v>}
        let vs = v.last().unwrap();
        let ur = u.last().unwrap();
        let mut out = WordPoly::zero();
        for (word, c) in shuffle_oracle(u, v.init()).terms() {
            out.add_term(word.push(vs), c);
        }
        let mut weight = 0;
        for l in v.letters() {
            weight += if l == ur { 2 } else { -2 };
        }
        for (word, c) in shuffle_oracle(u.init(), v).terms() {
            out.add_term(word.push(ur), &c.mul(&v_pow(2 * weight)));
        }
        out
    }

    #[test]
    fn word_basics() {
        assert_eq!(w("xy").concat(&w("x")), w("xyx"));
        assert_eq!(w("").concat(&w("yx")), w("yx"));
        assert_eq!(w("xxy").zeta(), w("xyy"));
        assert_eq!(w("").zeta(), w(""));
        assert_eq!(w("xy").swap_xy(), w("yx"));
        assert_eq!(w("xy").erase(Side::Left, Letter::X), Some(w("y")));
        assert_eq!(w("yx").erase(Side::Left, Letter::X), None);
        assert_eq!(w("").erase(Side::Left, Letter::X), None);
        assert_eq!(w("xy").erase(Side::Right, Letter::Y), Some(w("x")));
    }

    #[test]
    fn word_order_is_length_then_lex() {
        let mut v = vec![w("y"), w("xx"), w("x"), w(""), w("xy"), w("yx")];
        v.sort();
        assert_eq!(v, vec![w(""), w("x"), w("y"), w("xx"), w("xy"), w("yx")]);
    }

    #[test]
    fn alternating_words_match_definitions() {
        assert_eq!(alternating_word(AltKind::Wminus, 0), w("x"));
        assert_eq!(alternating_word(AltKind::Wminus, 1), w("xyx"));
        assert_eq!(alternating_word(AltKind::Wplus, 1), w("yxy"));
        assert_eq!(alternating_word(AltKind::Gtilde, 2), w("xyxy"));
        assert_eq!(alternating_word(AltKind::G, 0), w(""));
        assert_eq!(alternating_word(AltKind::G, 1), w("yx"));
    }

    #[test]
    fn catalan_enumeration() {
        let counts: Vec<usize> = (0..=5).map(|n| catalan_words(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42]);
        assert_eq!(*catalan_words(0), vec![w("")]);
        assert_eq!(*catalan_words(1), vec![w("xy")]);
        assert_eq!(*catalan_words(2), vec![w("xxyy"), w("xyxy")]);
        let c3: Vec<Word> = vec![
            w("xxxyyy"),
            w("xxyxyy"),
            w("xxyyxy"),
            w("xyxxyy"),
            w("xyxyxy"),
        ];
        assert_eq!(*catalan_words(3), c3);
        for n in 0..=5 {
            for word in catalan_words(n).iter() {
                assert!(word.is_catalan());
            }
        }
    }

    #[test]
    fn catalan_predicate_and_height() {
        assert!(w("xxyy").is_catalan());
        assert_eq!(w("xxyy").height(), 2);
        assert!(!w("yx").is_catalan());
        assert!(w("xyxy").is_catalan());
        assert_eq!(w("xyxy").height(), 1);
    }

    #[test]
    fn shuffle_letters() {
        // x * y = xy + q^-2 yx
        let expect = wp("xy").add(&wp("yx").scale(&v_pow(-4)));
        assert_eq!(shuffle(&wp("x"), &wp("y")), expect);
        // x * x = (1 + q^2) xx
        let expect = wp("xx").scale(&Scalar::one().add(&v_pow(4)));
        assert_eq!(shuffle(&wp("x"), &wp("x")), expect);
        // x * xy = (1 + q^2) xxy + xyx
        let expect = wp("xxy").scale(&Scalar::one().add(&v_pow(4))).add(&wp("xyx"));
        assert_eq!(shuffle(&wp("x"), &wp("xy")), expect);
    }

    #[test]
    fn shuffle_unit() {
        for word in ["", "x", "xy", "yxx"] {
            assert_eq!(shuffle(&wp(word), &wp("")), wp(word));
            assert_eq!(shuffle(&wp(""), &wp(word)), wp(word));
        }
    }

    #[test]
    fn q_serre_relations() {
        let x = wp("x");
        let y = wp("y");
        let three = qint(3);
        for (a, b) in [(&x, &y), (&y, &x)] {
            let aab = shuffle(&shuffle(&shuffle(a, a), a), b);
            let aba = shuffle(&shuffle(&shuffle(a, a), b), a);
            let baa = shuffle(&shuffle(&shuffle(a, b), a), a);
            let bbb = shuffle(&shuffle(&shuffle(b, a), a), a);
            let lhs = aab
                .sub(&aba.scale(&three))
                .add(&baa.scale(&three))
                .sub(&bbb);
            assert!(lhs.is_zero(), "q-Serre relation failed for ({a}, {b})");
        }
    }

    #[test]
    fn erase_inverts_concat() {
        for word in ["", "x", "yx", "xyy"] {
            let p = wp("x").concat_mul(&wp(word));
            assert_eq!(p.erase(Side::Left, Letter::X), wp(word));
        }
        // repeated left-x erasure annihilates anything not starting with xx
        let p = wp("xyx");
        assert!(p.erase(Side::Left, Letter::X).erase(Side::Left, Letter::X).is_zero());
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(prop::bool::ANY, 0..=max_len).prop_map(|bits| {
            let mut w = Word::empty();
            for b in bits {
                w = w.push(if b { Letter::Y } else { Letter::X });
            }
            w
        })
    }

    fn arb_poly(max_len: usize) -> impl Strategy<Value = WordPoly<Scalar>> {
        prop::collection::vec((arb_word(max_len), -3i64..4), 0..3).prop_map(|terms| {
            let mut p = WordPoly::zero();
            for (w, c) in terms {
                p.add_term(w, &Scalar::from_int(c));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn shuffle_matches_mirror_oracle(u in arb_word(4), v in arb_word(4)) {
            let got = shuffle(&WordPoly::from_word(u), &WordPoly::from_word(v));
            prop_assert_eq!(got, shuffle_oracle(u, v));
        }

        #[test]
        fn shuffle_is_associative(a in arb_word(4), b in arb_word(3), c in arb_word(3)) {
            let (a, b, c) = (WordPoly::<Scalar>::from_word(a), WordPoly::from_word(b), WordPoly::from_word(c));
            let left = shuffle(&shuffle(&a, &b), &c);
            let right = shuffle(&a, &shuffle(&b, &c));
            prop_assert_eq!(left, right);
        }

        #[test]
        fn zeta_is_an_antiautomorphism(p in arb_poly(4), r in arb_poly(4)) {
            prop_assert_eq!(p.concat_mul(&r).zeta(), r.zeta().concat_mul(&p.zeta()));
            prop_assert_eq!(shuffle(&p, &r).zeta(), shuffle(&r.zeta(), &p.zeta()));
            prop_assert_eq!(p.zeta().zeta(), p);
        }

        #[test]
        fn shuffle_respects_grading(u in arb_word(4), v in arb_word(4)) {
            let p = shuffle(&WordPoly::from_word(u), &WordPoly::from_word(v));
            prop_assert!(p.is_homogeneous(u.len() + v.len()));
        }
    }
}
