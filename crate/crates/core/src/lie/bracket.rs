use std::collections::BTreeMap;

use super::{Result, VectorField};
use crate::expr::{Atom, Expr, Monomial, SymKind};
use crate::par;

/// `[v, w]^k = v(w^k) - w(v^k)`.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    v.same_space(w)?;
    let xi = v
        .xi
        .iter()
        .zip(&w.xi)
        .map(|(a, b)| Ok(v.apply(b)?.sub(&w.apply(a)?)))
        .collect::<Result<Vec<_>>>()?;
    let eta = v.apply(&w.eta)?.sub(&w.apply(&v.eta)?);
    Ok(VectorField { vars: v.vars.clone(), dep: v.dep.clone(), xi, eta })
}

/// One entry `[v_i, v_j]` of a commutator table.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketDecomposition {
    pub i: usize,
    pub j: usize,
    pub raw: VectorField,
    /// Coordinates in the basis, when the bracket lies in its span.
    pub coords: Option<Vec<Expr>>,
    /// `raw - Σ coords · basis`, or `raw` itself outside the span.
    pub residual: VectorField,
}

impl BracketDecomposition {
    pub fn in_span(&self) -> bool {
        self.coords.is_some() && self.residual.is_zero()
    }

    fn negated(&self) -> BracketDecomposition {
        let m1 = Expr::int(-1);
        BracketDecomposition {
            i: self.j,
            j: self.i,
            raw: self.raw.scale(&m1),
            coords: self.coords.as_ref().map(|c| c.iter().map(Expr::neg).collect()),
            residual: self.residual.scale(&m1),
        }
    }
}

/// Atoms that carry functional dependence; the remaining symbols are
/// treated as constants of the coefficient field.
fn functional(a: &Atom) -> bool {
    !matches!(a, Atom::Sym(s) if matches!(s.kind, SymKind::Param | SymKind::Const))
}

/// Solves `raw = Σ k_j basis_j` for constant `k_j` by equating the
/// coefficients of every functional monomial.
pub fn decompose(raw: &VectorField, basis: &[VectorField]) -> Result<(Option<Vec<Expr>>, VectorField)> {
    for b in basis {
        raw.same_space(b)?;
    }
    let mut rows: Vec<(Vec<Expr>, Expr)> = Vec::new();
    let ncoord = raw.vars.len() + 1;
    for c in 0..ncoord {
        let pick = |v: &VectorField| if c < v.xi.len() { v.xi[c].clone() } else { v.eta.clone() };
        let mut table: BTreeMap<Monomial, (Vec<Expr>, Expr)> = BTreeMap::new();
        let Ok(parts) = pick(raw).split_by(&functional) else {
            return Ok((None, raw.clone()));
        };
        for (m, e) in parts {
            table.entry(m).or_insert_with(|| (vec![Expr::zero(); basis.len()], Expr::zero())).1 = e;
        }
        for (j, b) in basis.iter().enumerate() {
            let Ok(parts) = pick(b).split_by(&functional) else {
                return Ok((None, raw.clone()));
            };
            for (m, e) in parts {
                table.entry(m).or_insert_with(|| (vec![Expr::zero(); basis.len()], Expr::zero())).0[j] = e;
            }
        }
        rows.extend(table.into_values());
    }
    match solve(rows, basis.len())? {
        None => Ok((None, raw.clone())),
        Some(k) => {
            let mut fit = VectorField::zero(&raw.var_refs(), &raw.dep);
            for (kj, b) in k.iter().zip(basis) {
                fit = fit.add(&b.scale(kj))?;
            }
            let residual = raw.sub(&fit)?;
            Ok((Some(k), residual))
        }
    }
}

/// Gaussian elimination over the expression field. Free unknowns are set
/// to zero; an inconsistent system yields `None`.
fn solve(mut rows: Vec<(Vec<Expr>, Expr)>, n: usize) -> Result<Option<Vec<Expr>>> {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r].0[col].inv()?;
        let (prow, prhs) = {
            let (a, b) = &rows[r];
            (a.iter().map(|x| x.mul(&inv)).collect::<Vec<_>>(), b.mul(&inv))
        };
        rows[r] = (prow.clone(), prhs.clone());
        for i in 0..rows.len() {
            if i == r || rows[i].0[col].is_zero() {
                continue;
            }
            let f = rows[i].0[col].clone();
            for k in 0..n {
                rows[i].0[k] = rows[i].0[k].sub(&f.mul(&prow[k]));
            }
            rows[i].1 = rows[i].1.sub(&f.mul(&prhs));
        }
        pivots.push((r, col));
        r += 1;
    }
    if rows[r..].iter().any(|(_, rhs)| !rhs.is_zero()) {
        return Ok(None);
    }
    let mut k = vec![Expr::zero(); n];
    for (row, col) in pivots {
        k[col] = rows[row].1.clone();
    }
    Ok(Some(k))
}

/// Full antisymmetric table of brackets; the upper triangle is computed in
/// parallel and mirrored.
pub fn commutator_table(basis: &[VectorField]) -> Result<Vec<Vec<BracketDecomposition>>> {
    let n = basis.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let computed = par::map(&pairs, |&(i, j)| -> Result<BracketDecomposition> {
        let raw = lie_bracket(&basis[i], &basis[j])?;
        let (coords, residual) = decompose(&raw, basis)?;
        Ok(BracketDecomposition { i, j, raw, coords, residual })
    });
    let mut table: Vec<Vec<Option<BracketDecomposition>>> = vec![vec![None; n]; n];
    for d in computed {
        let d = d?;
        let (i, j) = (d.i, d.j);
        if i != j {
            table[j][i] = Some(d.negated());
        }
        table[i][j] = Some(d);
    }
    Ok(table.into_iter().map(|row| row.into_iter().map(Option::unwrap).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const VARS: &[&str] = &["x", "y", "z", "t"];

    fn f(xi: [Expr; 4], eta: Expr) -> VectorField {
        VectorField::new(VARS, "u", xi.to_vec(), eta).unwrap()
    }

    fn basis() -> Vec<VectorField> {
        let (x, y, z, t, u) = (Expr::var("x"), Expr::var("y"), Expr::var("z"), Expr::var("t"), Expr::jet_of("u", &[]));
        let (a, c) = (Expr::param("a"), Expr::param("c"));
        let o = Expr::zero;
        vec![
            f([x.clone(), o(), o(), Expr::int(2) * &t], -u.clone()),
            f([o(), o(), o(), Expr::one()], o()),
            f([o(), a.mul(&t).div(&c).unwrap(), t.clone(), o()], x.div(&c).unwrap()),
            f([-x, Expr::int(2) * y, Expr::int(2) * z, o()], u),
            f([o(), o(), Expr::one(), o()], o()),
            f([o(), Expr::one(), o(), o()], o()),
        ]
    }

    #[test]
    fn self_bracket_vanishes() {
        for v in basis() {
            assert!(lie_bracket(&v, &v).unwrap().is_zero());
        }
    }

    #[test]
    fn bracket_of_scaling_and_time_translation() {
        let b = basis();
        let r = lie_bracket(&b[0], &b[1]).unwrap();
        assert!(r.equiv(&b[1].scale(&Expr::int(-2))));
    }

    #[test]
    fn table_entry_in_span() {
        let b = basis();
        let table = commutator_table(&b).unwrap();
        let e = &table[1][2];
        let coords = e.coords.as_ref().unwrap();
        let ratio = Expr::param("a").div(&Expr::param("c")).unwrap();
        assert_eq!(coords, &vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero(), Expr::one(), ratio]);
        assert!(e.residual.is_zero());
        for i in 0..6 {
            assert!(table[i][i].raw.is_zero());
            for j in 0..6 {
                assert!(table[i][j].raw.equiv(&table[j][i].raw.scale(&Expr::int(-1))));
            }
        }
    }

    #[test]
    fn out_of_span_leaves_residual() {
        let x = Expr::var("x");
        let b = vec![f([Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()], Expr::zero())];
        let raw = f([x.clone(), Expr::zero(), Expr::zero(), Expr::zero()], Expr::zero());
        let (k, res) = decompose(&raw, &b).unwrap();
        assert!(k.is_none());
        assert!(res.equiv(&raw));
    }
}
