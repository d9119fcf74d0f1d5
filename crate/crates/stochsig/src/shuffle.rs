//! Exact word algebra over the alphabet `{0, 1, ..., d}`.
//!
//! A word `i1 i2 ... im` stands for the iterated integral with `i1`
//! innermost; letter `0` is time. With that convention the shuffle
//! product is integration by parts: `I_u * I_v = I_{u sh v}`.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::brownian::GaussianSignatureTerms;
use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// Word ordered length-first, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u8>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&l| l < 10) {
            for l in &self.0 {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

/// Linear combination of words with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorPoly {
    /// Largest letter allowed.
    pub d: u8,
    terms: BTreeMap<Word, BigRational>,
}

fn ratio(n: i64, m: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(m))
}

impl TensorPoly {
    pub fn zero(d: u8) -> Self {
        TensorPoly { d, terms: BTreeMap::new() }
    }

    /// The empty word, the unit of both products.
    pub fn one(d: u8) -> Self {
        Self::zero(d).plus_term(Word(vec![]), BigRational::one())
    }

    pub fn word(d: u8, letters: &[u8]) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l > d) {
            return Err(invalid(format!("letter {bad} outside alphabet 0..={d}")));
        }
        Ok(Self::zero(d).plus_term(Word(letters.to_vec()), BigRational::one()))
    }

    pub fn letter(d: u8, l: u8) -> Result<Self> {
        Self::word(d, &[l])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, letters: &[u8]) -> BigRational {
        self.terms.get(&Word(letters.to_vec())).cloned().unwrap_or_else(BigRational::zero)
    }

    fn plus_term(mut self, w: Word, c: BigRational) -> Self {
        self.add_term(w, c);
        self
    }

    fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.d);
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    pub fn scale_ratio(&self, n: i64, m: i64) -> Self {
        self.scale(&ratio(n, m))
    }

    fn check_alphabet(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            Err(Error::AlphabetMismatch(self.d as usize, other.d as usize))
        } else {
            Ok(())
        }
    }

    /// Concatenation product.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = Self::zero(self.d);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.0.clone();
                w.extend_from_slice(&v.0);
                out.add_term(Word(w), a * b);
            }
        }
        Ok(out)
    }

    pub fn shuffle(&self, other: &Self) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = Self::zero(self.d);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let c = a * b;
                for (w, mult) in shuffle_words(&u.0, &v.0) {
                    out.add_term(w, &c * BigRational::from_integer(BigInt::from(mult)));
                }
            }
        }
        Ok(out)
    }

    /// Evaluates against numeric values of the iterated integrals.
    pub fn evaluate<T: Real>(&self, eval: &impl WordEvaluator<T>) -> Result<T> {
        let mut acc = T::zero();
        for (w, c) in &self.terms {
            let value = eval.word_value(&w.0).ok_or_else(|| Error::UnsupportedWord(w.to_string()))?;
            let coef = T::lit(c.to_f64().expect("finite rational"));
            acc = acc + coef * value;
        }
        Ok(acc)
    }
}

/// Shuffle of two words with multiplicities, via
/// `ua sh vb = (u sh vb)a + (ua sh v)b`.
pub fn shuffle_words(u: &[u8], v: &[u8]) -> BTreeMap<Word, u64> {
    let mut out = BTreeMap::new();
    if u.is_empty() || v.is_empty() {
        let w = if u.is_empty() { v } else { u };
        out.insert(Word(w.to_vec()), 1);
        return out;
    }
    let (u0, a) = (&u[..u.len() - 1], u[u.len() - 1]);
    let (v0, b) = (&v[..v.len() - 1], v[v.len() - 1]);
    for (mut w, m) in shuffle_words(u0, v) {
        w.0.push(a);
        *out.entry(w).or_insert(0) += m;
    }
    for (mut w, m) in shuffle_words(u, v0) {
        w.0.push(b);
        *out.entry(w).or_insert(0) += m;
    }
    out
}

impl fmt::Display for TensorPoly {
    /// Renders as e.g. `1/2*[12] - 1/2*[21]`; the zero poly renders as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "[{w}]")?;
        }
        Ok(())
    }
}

impl Add for &TensorPoly {
    type Output = TensorPoly;

    fn add(self, rhs: &TensorPoly) -> TensorPoly {
        assert_eq!(self.d, rhs.d, "alphabet mismatch");
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl Neg for &TensorPoly {
    type Output = TensorPoly;

    fn neg(self) -> TensorPoly {
        self.scale(&-BigRational::one())
    }
}

impl Sub for &TensorPoly {
    type Output = TensorPoly;

    fn sub(self, rhs: &TensorPoly) -> TensorPoly {
        self + &(-rhs)
    }
}

impl Mul for &TensorPoly {
    type Output = TensorPoly;

    /// Concatenation; panics on alphabet mismatch, use [`TensorPoly::concat`] to get an error.
    fn mul(self, rhs: &TensorPoly) -> TensorPoly {
        self.concat(rhs).expect("alphabet mismatch")
    }
}

/// `[u, v] = uv - vu`.
pub fn lie_bracket(u: &TensorPoly, v: &TensorPoly) -> Result<TensorPoly> {
    Ok(&u.concat(v)? - &v.concat(u)?)
}

/// `1/2 I_i I_j + 1/2 I_[i,j] - I_ij`.
pub fn decomposition_residual_ij(d: u8, i: u8, j: u8) -> Result<TensorPoly> {
    let (wi, wj) = (TensorPoly::letter(d, i)?, TensorPoly::letter(d, j)?);
    let sym = wi.shuffle(&wj)?.scale_ratio(1, 2);
    let anti = lie_bracket(&wi, &wj)?.scale_ratio(1, 2);
    Ok(&(&sym + &anti) - &TensorPoly::word(d, &[i, j])?)
}

/// Symmetric/antisymmetric expansion of `I_ijk` minus the word itself.
pub fn decomposition_residual_ijk(d: u8, i: u8, j: u8, k: u8) -> Result<TensorPoly> {
    let (wi, wj, wk) = (TensorPoly::letter(d, i)?, TensorPoly::letter(d, j)?, TensorPoly::letter(d, k)?);
    let ij = lie_bracket(&wi, &wj)?;
    let jk = lie_bracket(&wj, &wk)?;
    let terms = [
        wi.shuffle(&wj)?.shuffle(&wk)?.scale_ratio(1, 6),
        wi.shuffle(&jk)?.scale_ratio(1, 4),
        ij.shuffle(&wk)?.scale_ratio(1, 4),
        lie_bracket(&ij, &wk)?.scale_ratio(1, 6),
        lie_bracket(&wi, &jk)?.scale_ratio(1, 6),
    ];
    let mut acc = TensorPoly::zero(d);
    for t in &terms {
        acc = &acc + t;
    }
    Ok(&acc - &TensorPoly::word(d, &[i, j, k])?)
}

/// `(1/12)([i,[j,0]] + [j,[i,0]])`, the polynomial of the space-space-time area.
pub fn sst_poly(d: u8, i: u8, j: u8) -> Result<TensorPoly> {
    let (wi, wj, w0) = (TensorPoly::letter(d, i)?, TensorPoly::letter(d, j)?, TensorPoly::letter(d, 0)?);
    let a = lie_bracket(&wi, &lie_bracket(&wj, &w0)?)?;
    let b = lie_bracket(&wj, &lie_bracket(&wi, &w0)?)?;
    Ok((&a + &b).scale_ratio(1, 12))
}

/// Numeric values of iterated integrals, by word.
pub trait WordEvaluator<T> {
    fn word_value(&self, word: &[u8]) -> Option<T>;
}

/// Evaluates words with at most one Brownian letter and length at most
/// three from the Gaussian signature terms. Letter `i >= 1` is coordinate `i - 1`.
pub struct GaussianEvaluator<'a, T> {
    pub terms: &'a GaussianSignatureTerms<T>,
}

impl<'a, T: Real> WordEvaluator<T> for GaussianEvaluator<'a, T> {
    fn word_value(&self, word: &[u8]) -> Option<T> {
        let h = self.terms.h;
        let spaces: Vec<usize> = (0..word.len()).filter(|&p| word[p] != 0).collect();
        match spaces.as_slice() {
            [] => {
                // time-only word of length m is h^m / m!
                let m = word.len() as i32;
                let fact: f64 = (1..=m).map(|x| x as f64).product();
                Some(h.powi(m) / T::lit(fact))
            }
            [p] => {
                let c = (word[*p] - 1) as usize;
                if c >= self.terms.i1.len() {
                    return None;
                }
                let t = self.terms;
                match (word.len(), *p) {
                    (1, 0) => Some(t.i1[c]),
                    (2, 0) => Some(t.i10[c]),
                    (2, 1) => Some(t.i01[c]),
                    (3, 0) => Some(t.i100[c]),
                    (3, 1) => Some(t.i010[c]),
                    (3, 2) => Some(t.i001[c]),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}
