//! Sparse Laurent polynomials over the rationals in [`Atom`] generators.
//!
//! Arithmetic here is "raw": power-kernel atoms are treated as free
//! generators. The relations between power kernels sharing a base are
//! applied one level up, in [`super::Expr`] normalization.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::atom::Atom;

pub type Q = BigRational;

/// Product of atoms with nonzero integer exponents, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(pub(crate) Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(Atom, i32)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Atom, i32)> = Vec::with_capacity(pairs.len());
        for (a, e) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == a => last.1 += e,
                _ => out.push((a, e)),
            }
        }
        out.retain(|(_, e)| *e != 0);
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| *e as i64).sum()
    }

    pub fn exponent(&self, a: &Atom) -> i32 {
        self.0
            .binary_search_by(|(x, _)| x.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), -e)).collect())
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.inv())
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect())
    }

    pub fn has_negative(&self) -> bool {
        self.0.iter().any(|(_, e)| *e < 0)
    }

    /// Componentwise minimum of exponents (absent atoms count as 0).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut pairs = Vec::new();
        for (a, e) in &self.0 {
            let o = other.exponent(a);
            let m = (*e).min(o);
            if m != 0 {
                pairs.push((a.clone(), m));
            }
        }
        for (a, e) in &other.0 {
            if self.exponent(a) == 0 && *e < 0 {
                pairs.push((a.clone(), *e));
            }
        }
        Monomial::from_pairs(pairs)
    }

    pub fn without(&self, pred: impl Fn(&Atom) -> bool) -> Monomial {
        Monomial(self.0.iter().filter(|(a, _)| !pred(a)).cloned().collect())
    }

    pub fn only(&self, pred: impl Fn(&Atom) -> bool) -> Monomial {
        Monomial(self.0.iter().filter(|(a, _)| pred(a)).cloned().collect())
    }
}

/// Graded lexicographic order: total degree first, then the exponent of the
/// smallest atom where the two monomials differ (higher exponent is larger).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some((_, ea)), None) => return ea.cmp(&0),
                    (None, Some((_, eb))) => return 0.cmp(eb),
                    (Some((xa, ea)), Some((xb, eb))) => match xa.cmp(xb) {
                        Ordering::Less => return ea.cmp(&0),
                        Ordering::Greater => return 0.cmp(eb),
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Terms sorted by decreasing monomial; coefficients never zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly(pub(crate) Vec<(Monomial, Q)>);

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            for (a, b) in self.0.iter().zip(other.0.iter()) {
                let c = a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1));
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(q: Q) -> Self {
        if q.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![(Monomial::one(), q)])
        }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn monomial(m: Monomial, q: Q) -> Self {
        if q.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![(m, q)])
        }
    }

    pub fn from_terms(mut terms: Vec<(Monomial, Q)>) -> Self {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, Q)> = Vec::with_capacity(terms.len());
        for (m, q) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += q,
                _ => out.push((m, q)),
            }
        }
        out.retain(|(_, q)| !q.is_zero());
        Poly(out)
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.0.as_slice() {
            [] => Some(Q::zero()),
            [(m, q)] if m.is_one() => Some(q.clone()),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.0.len() == 1
    }

    pub fn constant_term(&self) -> Q {
        self.0
            .iter()
            .find(|(m, _)| m.is_one())
            .map(|(_, q)| q.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let q = &a[i].1 + &b[j].1;
                    if !q.is_zero() {
                        out.push((a[i].0.clone(), q));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, q)| (m.clone(), -q)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &Q) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * q)).collect())
    }

    pub fn mul_monomial(&self, m: &Monomial, q: &Q) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        // Multiplying by a monomial preserves the graded order.
        Poly(self.0.iter().map(|(mm, c)| (mm.mul(m), c * q)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.0.len() == 1 {
            return self.mul_monomial(&other.0[0].0, &other.0[0].1);
        }
        if self.0.len() == 1 {
            return other.mul_monomial(&self.0[0].0, &self.0[0].1);
        }
        let mut terms = Vec::with_capacity(self.0.len() * other.0.len());
        for (ma, qa) in &self.0 {
            for (mb, qb) in &other.0 {
                terms.push((ma.mul(mb), qa * qb));
            }
        }
        Poly::from_terms(terms)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut iter = self.0.iter();
        let Some((first, _)) = iter.next() else {
            return Monomial::one();
        };
        iter.fold(first.clone(), |acc, (m, _)| acc.gcd(m))
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients.
    pub fn rational_content(&self) -> Q {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for (_, q) in &self.0 {
            num = num.gcd(q.numer());
            den = den.lcm(q.denom());
        }
        if num.is_zero() {
            return Q::one();
        }
        Q::new(num, den)
    }

    pub fn leading(&self) -> Option<&(Monomial, Q)> {
        self.0.first()
    }

    /// Exact quotient `self / divisor` if it exists as a Laurent polynomial.
    ///
    /// `divisor` must have non-negative exponents. The dividend is shifted to
    /// a genuine polynomial before running the division algorithm.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if divisor.0.iter().any(|(m, _)| m.has_negative()) {
            return None;
        }
        if divisor.0.len() == 1 {
            let (m, q) = &divisor.0[0];
            return Some(self.mul_monomial(&m.inv(), &q.recip()));
        }
        let content = self.monomial_content();
        let shift = Monomial(content.0.into_iter().filter(|(_, e)| *e < 0).collect());
        let mut rem = self.mul_monomial(&shift.inv(), &Q::one());
        let (lm, lc) = divisor.leading().cloned()?;
        let mut quotient = Vec::new();
        let limit = 4 * (rem.len() + 8) * (divisor.len() + 8);
        for _ in 0..limit {
            let Some((rm, rc)) = rem.leading().cloned() else {
                let q = Poly::from_terms(quotient);
                return Some(q.mul_monomial(&shift, &Q::one()));
            };
            let qm = rm.div(&lm);
            if qm.has_negative() {
                return None;
            }
            let qc = &rc / &lc;
            rem = rem.sub(&divisor.mul_monomial(&qm, &qc));
            quotient.push((qm, qc));
        }
        None
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = Vec::new();
        for (m, _) in &self.0 {
            for (a, _) in &m.0 {
                out.push(a.clone());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Partial derivative treating every atom (power kernels included) as a
    /// free generator.
    pub fn raw_partial(&self, a: &Atom) -> Poly {
        let mut terms = Vec::new();
        for (m, q) in &self.0 {
            let e = m.exponent(a);
            if e == 0 {
                continue;
            }
            let m2 = m.mul(&Monomial(vec![(a.clone(), -1)]));
            terms.push((m2, q * Q::from_integer(BigInt::from(e))));
        }
        Poly::from_terms(terms)
    }

    pub fn is_positive_leading(&self) -> bool {
        self.leading().map_or(true, |(_, q)| q.is_positive())
    }
}
