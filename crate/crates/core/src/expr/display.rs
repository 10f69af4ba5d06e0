use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{Atom, Expr, Poly, SymKind};

fn write_poly(f: &mut impl Write, p: &Poly) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    for (i, (m, q)) in p.terms().iter().enumerate() {
        let neg = q.is_negative();
        match (i, neg) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let c = q.abs();
        let is_e = |a: &Atom| matches!(a, Atom::Sym(s) if s.kind == SymKind::Euler);
        let (up, down): (Vec<_>, Vec<_>) = m.factors().iter().partition(|(a, e)| *e > 0 || is_e(a));
        let mut first = true;
        if !c.is_one() || up.is_empty() {
            write!(f, "{c}")?;
            first = false;
        }
        for (a, e) in up {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            match *e {
                _ if is_e(a) => write!(f, "exp({e})")?,
                1 => write!(f, "{a}")?,
                e => write!(f, "{a}^{e}")?,
            }
        }
        for (a, e) in down {
            match -*e {
                1 => write!(f, "/{a}")?,
                e => write!(f, "/{a}^{e}")?,
            }
        }
    }
    Ok(())
}

fn needs_parens(p: &Poly) -> bool {
    p.len() > 1 || p.terms().first().map_or(false, |(m, q)| q.is_negative() || (!q.is_one() && !m.is_one()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den().is_empty() {
            return write_poly(f, self.num());
        }
        if needs_parens(self.num()) {
            f.write_str("(")?;
            write_poly(f, self.num())?;
            f.write_str(")")?;
        } else {
            write_poly(f, self.num())?;
        }
        f.write_str("/")?;
        let wrap = self.den().len() > 1;
        if wrap {
            f.write_str("(")?;
        }
        for (i, (p, k)) in self.den().iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str("(")?;
            write_poly(f, p)?;
            f.write_str(")")?;
            if *k > 1 {
                write!(f, "^{k}")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_canonical_text() {
        let x = Expr::var("x");
        let t = Expr::var("t");
        let e = Expr::frac(3, 2) * x.pow_int(2).unwrap() - Expr::jet_of("u", &["x", "t"]);
        assert_eq!(e.to_string(), "3/2*x^2 - d(u,t,x)");
        let r = x.div(&(&t + Expr::one())).unwrap();
        assert_eq!(r.to_string(), "x/(t + 1)");
        assert_eq!(Expr::one().div(&t).unwrap().to_string(), "1/t");
        let y = Expr::var("y");
        assert_eq!((Expr::int(-2) * &x).div(&y.pow_int(8).unwrap()).unwrap().to_string(), "-2*x/y^8");
        assert_eq!(Expr::exp(&Expr::int(-7)).to_string(), "exp(-7)");
    }
}
