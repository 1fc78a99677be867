//! Exact symmetric-matrix arithmetic, Minkowski reduction, and reduction of
//! points of the Siegel upper half-space to the fundamental domain (n <= 2).

pub mod fmat;
pub mod qmat;
pub mod reduce;
pub mod symplectic;

pub use fmat::{CMat, PointH, RMat};
pub use qmat::{
    is_positive_definite, is_positive_semidefinite, rat, rat_i, rat_round, smith_normal_form,
    QMat, Rat, SymMatQ, UnimodularMat,
};
pub use reduce::{
    in_fundamental_domain, is_minkowski_reduced, minkowski_reduce, reduce_to_fundamental,
    reduction_sandwich_margin, FundamentalReduction, MarginReport, MinkowskiReduction,
};
pub use symplectic::{
    hermite_normal_form_rows, CoprimePair, SymplecticMat, GQ, GQMat,
};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::Ratio;
use std::str::FromStr;

fn parse_rat_token(tok: &str) -> Result<Rat> {
    if let Some((p, q)) = tok.split_once('/') {
        let num = BigInt::from_str(p.trim())
            .map_err(|e| Error::Parse(format!("bad numerator '{p}': {e}")))?;
        let den = BigInt::from_str(q.trim())
            .map_err(|e| Error::Parse(format!("bad denominator '{q}': {e}")))?;
        if den == BigInt::from(0) {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Ratio::new(num, den))
    } else {
        let v = BigInt::from_str(tok.trim())
            .map_err(|e| Error::Parse(format!("bad integer '{tok}': {e}")))?;
        Ok(Ratio::from_integer(v))
    }
}

/// Matrix text format: the dimension n, then the n(n+1)/2 upper-triangle
/// rationals row-major, whitespace-separated.
pub fn parse_symmat(text: &str) -> Result<SymMatQ> {
    let mut toks = text.split_whitespace();
    let n: usize = toks
        .next()
        .ok_or_else(|| Error::Parse("empty matrix text".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
    let want = n * (n + 1) / 2;
    let vals: Vec<Rat> = toks.map(parse_rat_token).collect::<Result<_>>()?;
    if vals.len() != want {
        return Err(Error::Parse(format!(
            "expected {want} upper-triangle entries for n = {n}, got {}",
            vals.len()
        )));
    }
    SymMatQ::from_upper(n, &vals)
}

/// Point text format: two symmetric matrices in sequence, X then Y, each in
/// the matrix text format and sharing the same dimension.
pub fn parse_point(text: &str, ctx: &crate::numerics::PrecisionContext) -> Result<PointH> {
    let mut toks = text.split_whitespace().peekable();
    let read_mat = |toks: &mut std::iter::Peekable<std::str::SplitWhitespace>| -> Result<SymMatQ> {
        let n: usize = toks
            .next()
            .ok_or_else(|| Error::Parse("missing dimension".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        let want = n * (n + 1) / 2;
        let mut vals = Vec::with_capacity(want);
        for _ in 0..want {
            let tok = toks
                .next()
                .ok_or_else(|| Error::Parse("matrix text ended early".into()))?;
            vals.push(parse_rat_token(tok)?);
        }
        SymMatQ::from_upper(n, &vals)
    };
    let x = read_mat(&mut toks)?;
    let y = read_mat(&mut toks)?;
    if toks.peek().is_some() {
        return Err(Error::Parse("trailing tokens after point".into()));
    }
    if x.n != y.n {
        return Err(Error::Parse("X and Y dimensions differ".into()));
    }
    let p = ctx.mantissa_bits;
    PointH::new(
        RMat::from_qmat(x.as_qmat(), p),
        RMat::from_qmat(y.as_qmat(), p),
        ctx,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionContext;

    #[test]
    fn parse_symmat_round_trip() {
        let m = parse_symmat("2  5 1/2 3").unwrap();
        assert_eq!(m.entry(0, 0), &rat_i(5));
        assert_eq!(m.entry(0, 1), &rat(1, 2));
        assert_eq!(m.entry(1, 0), &rat(1, 2));
        assert_eq!(m.entry(1, 1), &rat_i(3));
        assert!(parse_symmat("2 1 2").is_err());
        assert!(parse_symmat("").is_err());
    }

    #[test]
    fn parse_point_checks_pd() {
        let ctx = PrecisionContext::default();
        let good = parse_point("1 1/5\n1 2", &ctx).unwrap();
        assert_eq!(good.n, 1);
        assert!(parse_point("1 0\n1 -2", &ctx).is_err());
    }
}
