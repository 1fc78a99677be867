//! Minkowski reduction, the diagonal sandwich margin, and reduction of points
//! of the Siegel half-space to the fundamental domain for n <= 2.

use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use crate::symspace::fmat::{PointH, RMat};
use crate::symspace::qmat::{
    is_positive_definite, is_positive_semidefinite, rat_i, rat_round, Rat, SymMatQ, UnimodularMat,
};
use crate::symspace::symplectic::{CoprimePair, SymplecticMat};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rug::Float;
use std::sync::OnceLock;

/// Result of a Minkowski reduction: `reduced = transform * Y * t(transform)`.
#[derive(Debug, Clone)]
pub struct MinkowskiReduction {
    pub reduced: SymMatQ,
    pub transform: UnimodularMat,
    /// n <= 2 runs the exact algorithm; n >= 3 is a greedy size reduction and
    /// possibly non-minimal.
    pub exact: bool,
}

/// Minkowski reduction. Exact for n <= 2 (Lagrange-Gauss loop), greedy for
/// larger n.
pub fn minkowski_reduce(y: &SymMatQ) -> Result<MinkowskiReduction> {
    if !is_positive_definite(y) {
        return Err(Error::NotPositiveDefinite("minkowski_reduce input".into()));
    }
    let n = y.n;
    match n {
        1 => Ok(MinkowskiReduction {
            reduced: y.clone(),
            transform: UnimodularMat::identity(1),
            exact: true,
        }),
        2 => {
            let mut a = y.clone();
            let mut u = UnimodularMat::identity(2);
            let swap = UnimodularMat::new(2, vec![0, 1, 1, 0]).unwrap();
            let flip = UnimodularMat::new(2, vec![1, 0, 0, -1]).unwrap();
            for _ in 0..10_000 {
                // order diagonal
                if a.entry(0, 0) > a.entry(1, 1) {
                    a = a.transform(&swap);
                    u = swap.mul(&u);
                }
                // size-reduce off-diagonal: y12 <- y12 - t*y11
                let t = rat_round(&(a.entry(0, 1) / a.entry(0, 0)));
                if !t.is_zero() {
                    let tt = t.to_i64().ok_or_else(|| {
                        Error::Budget("reduction multiplier exceeds i64".into())
                    })?;
                    let e = UnimodularMat::new(2, vec![1, 0, -tt, 1]).unwrap();
                    a = a.transform(&e);
                    u = e.mul(&u);
                    continue;
                }
                if a.entry(0, 0) > a.entry(1, 1) {
                    continue;
                }
                break;
            }
            // canonical sign: make the off-diagonal nonnegative
            if a.entry(0, 1) < &Rat::zero() {
                a = a.transform(&flip);
                u = flip.mul(&u);
            }
            let two_off = a.entry(0, 1).clone() * rat_i(2);
            if !(two_off.clone().abs() <= *a.entry(0, 0) && a.entry(0, 0) <= a.entry(1, 1)) {
                return Err(Error::Reduction("2x2 Minkowski loop failed".into()));
            }
            Ok(MinkowskiReduction {
                reduced: a,
                transform: u,
                exact: true,
            })
        }
        _ => {
            // greedy size reduction: sort diagonal, then reduce off-diagonals
            let mut a = y.clone();
            let mut u = UnimodularMat::identity(n);
            for _ in 0..1_000 {
                let mut changed = false;
                // bubble diagonal ascending
                for i in 0..(n - 1) {
                    if a.entry(i, i) > a.entry(i + 1, i + 1) {
                        let mut sw = vec![0i64; n * n];
                        for k in 0..n {
                            sw[k * n + k] = 1;
                        }
                        sw[i * n + i] = 0;
                        sw[(i + 1) * n + (i + 1)] = 0;
                        sw[i * n + (i + 1)] = 1;
                        sw[(i + 1) * n + i] = 1;
                        let e = UnimodularMat::new(n, sw).unwrap();
                        a = a.transform(&e);
                        u = e.mul(&u);
                        changed = true;
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let t = rat_round(&(a.entry(i, j) / a.entry(j, j)));
                        if !t.is_zero() {
                            let tt = t.to_i64().ok_or_else(|| {
                                Error::Budget("reduction multiplier exceeds i64".into())
                            })?;
                            let mut e = vec![0i64; n * n];
                            for k in 0..n {
                                e[k * n + k] = 1;
                            }
                            e[i * n + j] = -tt;
                            let e = UnimodularMat::new(n, e).unwrap();
                            a = a.transform(&e);
                            u = e.mul(&u);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            Ok(MinkowskiReduction {
                reduced: a,
                transform: u,
                exact: false,
            })
        }
    }
}

/// Whether a 2x2 (or 1x1) form satisfies the reduced-domain inequalities.
pub fn is_minkowski_reduced(a: &SymMatQ) -> bool {
    match a.n {
        1 => a.entry(0, 0) > &Rat::zero(),
        2 => {
            let two_off = a.entry(0, 1).clone() * rat_i(2);
            two_off.abs() <= *a.entry(0, 0) && a.entry(0, 0) <= a.entry(1, 1)
        }
        _ => true, // only the greedy notion is available
    }
}

#[derive(Debug, Clone)]
pub struct MarginReport {
    /// Smallest r >= 1 (to 1e-6) with A_D / r <= A <= r A_D.
    pub r: Rat,
    /// The n = 2 reduction inequalities held on the input.
    pub input_reduced: bool,
}

/// Diagonal sandwich margin by bisection with exact semidefiniteness tests.
pub fn reduction_sandwich_margin(a: &SymMatQ) -> Result<MarginReport> {
    if !is_positive_definite(a) {
        return Err(Error::NotPositiveDefinite("sandwich margin input".into()));
    }
    let input_reduced = is_minkowski_reduced(a);
    let ad = a.diagonal_part();
    let feasible = |r: &Rat| -> bool {
        let upper = ad.scale(r).sub(a);
        let lower = a.scale(r).sub(&ad);
        is_positive_semidefinite(&upper) && is_positive_semidefinite(&lower)
    };
    let one = rat_i(1);
    if feasible(&one) {
        return Ok(MarginReport {
            r: one,
            input_reduced,
        });
    }
    let mut hi = rat_i(2);
    while !feasible(&hi) {
        hi = hi * rat_i(2);
        if hi > rat_i(1 << 40) {
            return Err(Error::Convergence("sandwich margin diverged".into()));
        }
    }
    let mut lo = one;
    let tol = Rat::new(BigInt::from(1), BigInt::from(1_000_000));
    while (&hi - &lo) > tol {
        let mid = (&hi + &lo) / rat_i(2);
        if feasible(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MarginReport {
        r: hi,
        input_reduced,
    })
}

/// Float-side 2x2 Minkowski reduction used during fundamental-domain
/// reduction; the transform is exact.
fn minkowski_reduce_float(y: &RMat) -> Result<UnimodularMat> {
    let n = y.n;
    if n == 1 {
        return Ok(UnimodularMat::identity(1));
    }
    assert_eq!(n, 2);
    let p = y.prec();
    let mut a = y.clone();
    let mut u = UnimodularMat::identity(2);
    let swap = UnimodularMat::new(2, vec![0, 1, 1, 0]).unwrap();
    let flip = UnimodularMat::new(2, vec![1, 0, 0, -1]).unwrap();
    let apply = |a: &RMat, e: &UnimodularMat| -> RMat {
        let eq = RMat::from_qmat(&e.to_qmat(), a.prec());
        eq.mul(a).mul(&eq.transpose())
    };
    for _ in 0..10_000 {
        if a.get(0, 0) > a.get(1, 1) {
            a = apply(&a, &swap);
            u = swap.mul(&u);
        }
        let ratio = Float::with_val(p, a.get(0, 1) / a.get(0, 0));
        let t = ratio.to_f64().round();
        if t != 0.0 && t.abs() < 9e15 {
            let e = UnimodularMat::new(2, vec![1, 0, -(t as i64), 1]).unwrap();
            a = apply(&a, &e);
            u = e.mul(&u);
            continue;
        }
        if a.get(0, 0) > a.get(1, 1) {
            continue;
        }
        break;
    }
    if a.get(0, 1).is_sign_negative() {
        u = flip.mul(&u);
    }
    Ok(u)
}

/// Finite inversion generator set: for n = 1 the classical S; for n = 2 a
/// superset of Gottschling's nineteen boundary pairs (all (1_2, D) with D
/// symmetric over {-1,0,1}, plus the rank-one z11/z22 inversions with
/// shifts).
fn inversion_generators(n: usize) -> &'static [SymplecticMat] {
    static GEN1: OnceLock<Vec<SymplecticMat>> = OnceLock::new();
    static GEN2: OnceLock<Vec<SymplecticMat>> = OnceLock::new();
    match n {
        1 => GEN1.get_or_init(|| {
            vec![SymplecticMat::from_i64_blocks(1, &[0], &[-1], &[1], &[0]).unwrap()]
        }),
        2 => GEN2.get_or_init(|| {
            let mut gens = Vec::new();
            for a in -1i64..=1 {
                for b in -1i64..=1 {
                    for c in -1i64..=1 {
                        let d = [a, b, b, c];
                        let pair = CoprimePair::from_i64(2, &[1, 0, 0, 1], &d)
                            .expect("(1, D) is coprime symmetric");
                        gens.push(pair.complete().expect("completable"));
                    }
                }
            }
            for s in -1i64..=1 {
                let p1 = CoprimePair::from_i64(2, &[1, 0, 0, 0], &[s, 0, 0, 1]).unwrap();
                gens.push(p1.complete().unwrap());
                let p2 = CoprimePair::from_i64(2, &[0, 0, 0, 1], &[1, 0, 0, s]).unwrap();
                gens.push(p2.complete().unwrap());
            }
            gens
        }),
        _ => panic!("inversion generators available for n <= 2 only"),
    }
}

#[derive(Debug, Clone)]
pub struct FundamentalReduction {
    pub point: PointH,
    pub gamma: SymplecticMat,
    pub iterations: usize,
    /// Set when the reduced point sits within tolerance of the boundary
    /// (|x_ij| = 1/2 or |det(CZ+D)| = 1 for some generator).
    pub boundary: bool,
}

/// Reduce Z to the Siegel fundamental domain (n <= 2) by the highest-point
/// algorithm: alternate Minkowski reduction of Y, translation of X into
/// [-1/2, 1/2], and the finite inversion set while |det(CZ+D)| < 1.
pub fn reduce_to_fundamental(z: &PointH, ctx: &PrecisionContext) -> Result<FundamentalReduction> {
    let n = z.n;
    if n > 2 {
        return Err(Error::Domain(
            "fundamental-domain reduction implemented for n <= 2".into(),
        ));
    }
    let boundary_tol = 1e-12;
    let mut cur = z.clone();
    let mut gamma = SymplecticMat::identity(n);
    let mut iterations = 0usize;
    let cap = 4000;
    loop {
        iterations += 1;
        if iterations > cap {
            return Err(Error::Reduction(format!(
                "no stabilization within {cap} iterations"
            )));
        }
        // Minkowski-reduce the imaginary part
        let u = minkowski_reduce_float(&cur.y)?;
        if !u.is_identity_up_to_sign() {
            let gu = SymplecticMat::embed_unimodular(&u);
            cur = gu.apply_point(&cur, ctx)?;
            gamma = gu.mul(&gamma);
        }
        // translate X into [-1/2, 1/2]
        let mut s_upper = Vec::new();
        let mut nonzero = false;
        for i in 0..n {
            for j in i..n {
                let t = cur.x.get(i, j).to_f64().round();
                let ti = if t.abs() < 9e15 { t as i64 } else { 0 };
                if ti != 0 {
                    nonzero = true;
                }
                s_upper.push(-ti);
            }
        }
        if nonzero {
            let tr = SymplecticMat::translation(n, &s_upper);
            cur = tr.apply_point(&cur, ctx)?;
            gamma = tr.mul(&gamma);
        }
        // find the worst inversion generator
        let zc = cur.to_cmat();
        let mut best: Option<(usize, f64)> = None;
        for (idx, g) in inversion_generators(n).iter().enumerate() {
            let a = g.j_factor(&zc).det().abs().to_f64();
            if best.as_ref().map_or(true, |&(_, b)| a < b) {
                best = Some((idx, a));
            }
        }
        let (idx, min_abs) = best.unwrap();
        if min_abs < 1.0 - boundary_tol {
            let g = &inversion_generators(n)[idx];
            cur = g.apply_point(&cur, ctx)?;
            gamma = g.mul(&gamma);
            continue;
        }
        // stable: check boundary proximity
        let mut boundary = min_abs <= 1.0 + boundary_tol;
        for i in 0..n {
            for j in i..n {
                let xa = cur.x.get(i, j).to_f64().abs();
                if (xa - 0.5).abs() <= boundary_tol {
                    boundary = true;
                }
                if xa > 0.5 + boundary_tol {
                    return Err(Error::Reduction("translation failed to settle".into()));
                }
            }
        }
        return Ok(FundamentalReduction {
            point: cur,
            gamma,
            iterations,
            boundary,
        });
    }
}

/// Membership test for the truncated fundamental domain used by scans.
pub fn in_fundamental_domain(z: &PointH, ctx: &PrecisionContext) -> Result<bool> {
    let r = reduce_to_fundamental(z, ctx)?;
    Ok(r.gamma.m == crate::symspace::qmat::QMat::identity(2 * z.n)
        || r.gamma.m == crate::symspace::qmat::QMat::identity(2 * z.n).neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::qmat::SymMatQ;

    #[test]
    fn minkowski_identity_fixed() {
        let y = SymMatQ::identity(2);
        let r = minkowski_reduce(&y).unwrap();
        assert_eq!(r.reduced, y);
        assert!(r.transform.is_identity_up_to_sign());
        assert!(r.exact);
    }

    #[test]
    fn minkowski_example_5221() {
        // [[5,2],[2,1]] is GL2(Z)-equivalent to the identity
        let y = SymMatQ::from_i64_upper(2, &[5, 2, 1]);
        let r = minkowski_reduce(&y).unwrap();
        assert_eq!(r.reduced, SymMatQ::identity(2));
        assert_eq!(r.reduced.det(), y.det());
        // idempotence
        let r2 = minkowski_reduce(&r.reduced).unwrap();
        assert!(r2.transform.is_identity_up_to_sign());
    }

    #[test]
    fn minkowski_diag_17_fixed() {
        let y = SymMatQ::from_i64_upper(2, &[1, 0, 7]);
        let r = minkowski_reduce(&y).unwrap();
        assert_eq!(r.reduced, y);
        assert!(r.transform.is_identity_up_to_sign());
    }

    #[test]
    fn minkowski_rejects_indefinite() {
        let y = SymMatQ::from_i64_upper(2, &[1, 0, -1]);
        assert!(minkowski_reduce(&y).is_err());
    }

    #[test]
    fn sandwich_margin_examples() {
        let id = SymMatQ::identity(2);
        let r = reduction_sandwich_margin(&id).unwrap();
        assert_eq!(r.r, rat_i(1));
        let diag = SymMatQ::from_i64_upper(2, &[3, 0, 11]);
        assert_eq!(reduction_sandwich_margin(&diag).unwrap().r, rat_i(1));
        // [[2,1],[1,2]]: feasibility needs r >= 2 exactly
        let a = SymMatQ::from_i64_upper(2, &[2, 1, 2]);
        let rep = reduction_sandwich_margin(&a).unwrap();
        let val = rep.r.to_f64().unwrap();
        assert!((val - 2.0).abs() < 2e-6, "margin {val}");
        assert!(rep.input_reduced);
    }

    #[test]
    fn fundamental_reduction_n1() {
        let ctx = PrecisionContext::default();
        // already reduced: z = 0.2 + 2i
        let z = PointH::from_xy1(0.2, 2.0, &ctx).unwrap();
        let r = reduce_to_fundamental(&z, &ctx).unwrap();
        assert!(r.gamma.m == crate::symspace::qmat::QMat::identity(2));
        // z = 0.7 + 0.8i gets translated and inverted into F1
        let z2 = PointH::from_xy1(0.7, 0.8, &ctx).unwrap();
        let r2 = reduce_to_fundamental(&z2, &ctx).unwrap();
        let x = r2.point.x.get(0, 0).to_f64();
        let y = r2.point.y.get(0, 0).to_f64();
        assert!(x.abs() <= 0.5 + 1e-12);
        assert!(x * x + y * y >= 1.0 - 1e-12);
        // gamma actually maps z2 to the reduced point
        let moved = r2.gamma.apply_point(&z2, &ctx).unwrap();
        assert!((moved.x.get(0, 0).to_f64() - x).abs() < 1e-30);
        assert!((moved.y.get(0, 0).to_f64() - y).abs() < 1e-30);
    }

    #[test]
    fn fundamental_reduction_n2_translation_only() {
        let ctx = PrecisionContext::default();
        let p = ctx.mantissa_bits;
        let x = RMat::from_fn(2, p, |i, j| {
            Float::with_val(p, if i == j { 0.7 } else { -0.7 })
        });
        let y = RMat::from_fn(2, p, |i, j| {
            Float::with_val(p, if i == j { 2.0 + i as f64 } else { 0.0 })
        });
        let z = PointH::new(x, y, &ctx).unwrap();
        let r = reduce_to_fundamental(&z, &ctx).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(r.point.x.get(i, j).to_f64().abs() <= 0.5 + 1e-12);
                let want = if i == j { 2.0 + i as f64 } else { 0.0 };
                assert!((r.point.y.get(i, j).to_f64() - want).abs() < 1e-9);
            }
        }
    }
}
