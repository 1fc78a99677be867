//! Enumeration of half-integral positive definite forms under trace and
//! spectral-window constraints, automorph counting, and the degree-2
//! piecewise counting exponents.

use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use crate::par;
use crate::symspace::fmat::RMat;
use crate::symspace::qmat::{
    is_positive_definite, is_positive_semidefinite, rat, rat_i, QMat, Rat, SymMatQ,
};
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Element of Lambda_n: half-integral, positive definite. Stored as the
/// integral matrix 2T (even diagonal).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfIntegralForm {
    pub n: usize,
    /// 2T, row-major n*n, symmetric, even diagonal.
    pub two_t: Vec<i64>,
}

impl HalfIntegralForm {
    pub fn new(n: usize, two_t: Vec<i64>) -> Result<Self> {
        assert_eq!(two_t.len(), n * n);
        for i in 0..n {
            if two_t[i * n + i] % 2 != 0 || two_t[i * n + i] < 2 {
                return Err(Error::Domain(
                    "diagonal of 2T must be even and positive".into(),
                ));
            }
            for j in 0..n {
                if two_t[i * n + j] != two_t[j * n + i] {
                    return Err(Error::Domain("2T must be symmetric".into()));
                }
            }
        }
        let f = HalfIntegralForm { n, two_t };
        if !is_positive_definite(&f.two_t_symmat()) {
            return Err(Error::NotPositiveDefinite("form is not positive".into()));
        }
        Ok(f)
    }

    /// n = 1 form T = (t).
    pub fn scalar(t: i64) -> Self {
        HalfIntegralForm::new(1, vec![2 * t]).expect("scalar form")
    }

    /// n = 2 form from the diagonal (t1, t2) and the doubled off-diagonal.
    pub fn deg2(t1: i64, t2: i64, two_t12: i64) -> Result<Self> {
        HalfIntegralForm::new(2, vec![2 * t1, two_t12, two_t12, 2 * t2])
    }

    pub fn two_t_symmat(&self) -> SymMatQ {
        let mut m = QMat::zero(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = rat_i(self.two_t[i * self.n + j]);
            }
        }
        SymMatQ::from_qmat(m).expect("symmetric")
    }

    /// T itself as an exact rational symmetric matrix.
    pub fn to_symmat(&self) -> SymMatQ {
        self.two_t_symmat().scale(&rat(1, 2))
    }

    pub fn diag(&self, i: usize) -> i64 {
        self.two_t[i * self.n + i] / 2
    }

    pub fn off_doubled(&self, i: usize, j: usize) -> i64 {
        self.two_t[i * self.n + j]
    }

    pub fn det(&self) -> Rat {
        self.to_symmat().det()
    }

    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.diag(i)).sum()
    }

    /// tr(T Y) exactly.
    pub fn trace_with(&self, y: &SymMatQ) -> Rat {
        self.to_symmat().trace_product(y)
    }

    pub fn to_rmat(&self, prec: u32) -> RMat {
        RMat::from_qmat(self.to_symmat().as_qmat(), prec)
    }

    /// U T tU for an integer matrix U (flat row-major slice).
    pub fn transform(&self, u: &[i64]) -> Option<HalfIntegralForm> {
        let n = self.n;
        assert_eq!(u.len(), n * n);
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for a in 0..n {
                    for b in 0..n {
                        acc += u[i * n + a] as i128
                            * self.two_t[a * n + b] as i128
                            * u[j * n + b] as i128;
                    }
                }
                out[i * n + j] = i64::try_from(acc).ok()?;
            }
        }
        HalfIntegralForm::new(n, out).ok()
    }
}

/// Spectral window: eigenvalues of TY within k/4pi +- c_window * k^{1/2+eps}.
#[derive(Debug, Clone)]
pub struct WindowSpec {
    pub k: u32,
    pub eps: f64,
    pub c_window: f64,
}

impl WindowSpec {
    pub fn new(k: u32, eps: f64, c_window: f64) -> Result<Self> {
        if k < 4 || k % 2 != 0 {
            return Err(Error::Domain("window weight must be even and >= 4".into()));
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Domain("window eps must lie in (0, 1/2)".into()));
        }
        if !(c_window > 0.0) {
            return Err(Error::Domain("c_window must be positive".into()));
        }
        Ok(WindowSpec { k, eps, c_window })
    }

    /// Defaults: eps = 1/4, c_window = 1.
    pub fn with_defaults(k: u32) -> Result<Self> {
        WindowSpec::new(k, 0.25, 1.0)
    }

    /// Half-width kappa = c_window * k^{1/2+eps}.
    pub fn kappa(&self) -> f64 {
        self.c_window * (self.k as f64).powf(0.5 + self.eps)
    }

    /// Window interval around k / 4 pi.
    pub fn interval(&self) -> (f64, f64) {
        let center = self.k as f64 / (4.0 * std::f64::consts::PI);
        (center - self.kappa(), center + self.kappa())
    }
}

pub const DEFAULT_ENUM_CAP: usize = 10_000_000;

/// Exact rational lower bound for the smallest eigenvalue of a positive
/// definite rational matrix, by bisection with exact semidefiniteness tests.
pub fn lambda_min_lower_bound(y: &SymMatQ) -> Result<Rat> {
    if !is_positive_definite(y) {
        return Err(Error::NotPositiveDefinite("lambda_min input".into()));
    }
    let mut hi = y.entry(0, 0).clone();
    for i in 1..y.n {
        if y.entry(i, i) < &hi {
            hi = y.entry(i, i).clone();
        }
    }
    let mut lo = Rat::zero();
    for _ in 0..60 {
        let mid = (&lo + &hi) / rat_i(2);
        let mut shifted = y.clone();
        for i in 0..y.n {
            let v = shifted.entry(i, i).clone() - mid.clone();
            shifted.set_entry(i, i, v);
        }
        if is_positive_semidefinite(&shifted) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Exactly the set { T in Lambda_n : tr(T Y) <= B }, n <= 2.
///
/// Completeness: tr(TY) >= lambda_min(Y) tr(T) bounds the diagonal box, and
/// positive definiteness bounds |2 t_12| < sqrt(4 t_1 t_2); every candidate
/// is then filtered by the exact rational trace condition.
pub fn enumerate_forms(y: &SymMatQ, bound: &Rat, cap: usize) -> Result<Vec<HalfIntegralForm>> {
    let n = y.n;
    if n > 2 {
        return Err(Error::Domain("enumeration implemented for n <= 2".into()));
    }
    if !is_positive_definite(y) {
        return Err(Error::NotPositiveDefinite("enumerate_forms Y".into()));
    }
    if bound <= &Rat::zero() {
        return Ok(Vec::new());
    }
    let lam = lambda_min_lower_bound(y)?;
    if lam.is_zero() {
        return Err(Error::Precision(
            "lambda_min lower bound collapsed to zero".into(),
        ));
    }
    let tmax_rat = (bound - lam.clone() * rat_i(n as i64 - 1)) / lam;
    let tmax = tmax_rat.floor().to_integer().to_i64().unwrap_or(0);
    if tmax < 1 {
        return Ok(Vec::new());
    }
    match n {
        1 => {
            let mut out = Vec::new();
            for t in 1..=tmax {
                let f = HalfIntegralForm::scalar(t);
                if &f.trace_with(y) <= bound {
                    out.push(f);
                } else {
                    break;
                }
            }
            Ok(out)
        }
        _ => {
            let per_diag = tmax as usize;
            let est = per_diag
                .saturating_mul(per_diag)
                .saturating_mul(2 * ((2.0 * tmax as f64) as usize + 2));
            if est > cap.saturating_mul(8) {
                return Err(Error::Budget(format!(
                    "enumeration box ~{est} exceeds cap {cap}"
                )));
            }
            let chunks = par::map_range(per_diag, |i| {
                let t1 = (i + 1) as i64;
                let mut local = Vec::new();
                for t2 in 1..=tmax {
                    let prod = 4 * t1 as i128 * t2 as i128;
                    let mut ub = (prod as f64).sqrt() as i64 + 1;
                    while (ub as i128) * (ub as i128) >= prod {
                        ub -= 1;
                    }
                    for two_t12 in -ub..=ub {
                        let Ok(f) = HalfIntegralForm::deg2(t1, t2, two_t12) else {
                            continue;
                        };
                        if &f.trace_with(y) <= bound {
                            local.push(f);
                        }
                    }
                }
                local
            });
            let mut out: Vec<HalfIntegralForm> = chunks.into_iter().flatten().collect();
            if out.len() > cap {
                return Err(Error::Budget(format!(
                    "enumerated {} forms, cap {cap}",
                    out.len()
                )));
            }
            out.sort();
            Ok(out)
        }
    }
}

/// The window set C_Y with borderline accounting.
#[derive(Debug, Clone)]
pub struct CySet {
    pub forms: Vec<HalfIntegralForm>,
    /// Forms whose extreme TY-eigenvalue sits within 1e-10 of a window edge
    /// (still included in `forms`).
    pub borderline: usize,
}

/// All T in Lambda_n whose TY-eigenvalues lie in the window: a trace-bounded
/// enumeration followed by eigenvalue filtering of Y^{1/2} T Y^{1/2} at
/// working precision.
pub fn cy_set(y: &SymMatQ, w: &WindowSpec, ctx: &PrecisionContext, cap: usize) -> Result<CySet> {
    let n = y.n;
    let (lo, hi) = w.interval();
    if hi <= 0.0 {
        return Ok(CySet {
            forms: Vec::new(),
            borderline: 0,
        });
    }
    let bound = Ratio::from_float(n as f64 * hi).unwrap_or_else(|| rat_i(0));
    let candidates = enumerate_forms(y, &bound, cap)?;
    let p = ctx.mantissa_bits;
    let y_f = RMat::from_qmat(y.as_qmat(), p);
    let y_half = y_f.sym_sqrt()?;
    let edge_tol = 1e-10;
    let mut forms = Vec::new();
    let mut borderline = 0usize;
    for f in candidates {
        let t_f = f.to_rmat(p);
        let m = y_half.mul(&t_f).mul(&y_half);
        let eigs = m.sym_eigenvalues();
        let mut ok = true;
        let mut edge = false;
        for lam in &eigs {
            let lv = lam.to_f64();
            if lv < lo - edge_tol || lv > hi + edge_tol {
                ok = false;
                break;
            }
            if (lv - lo).abs() <= edge_tol || (lv - hi).abs() <= edge_tol {
                edge = true;
            }
        }
        if ok {
            if edge {
                borderline += 1;
            }
            forms.push(f);
        }
    }
    Ok(CySet { forms, borderline })
}

/// delta(T, T): the automorph count #{U in GL_n(Z) : U T tU = T}. Doubles as
/// the unit count epsilon(T).
pub fn automorph_count(t: &HalfIntegralForm) -> u64 {
    let n = t.n;
    if n == 1 {
        return 2;
    }
    assert_eq!(n, 2, "automorph_count implemented for n <= 2");
    let tm = t.to_rmat(128);
    let eigs = tm.sym_eigenvalues();
    let lmin = eigs[0].to_f64();
    let lmax = eigs[1].to_f64();
    let bound = (n as f64 * lmax / lmin).sqrt().floor() as i64 + 1;
    let mut count = 0u64;
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for d in -bound..=bound {
                    let det = a * d - b * c;
                    if det != 1 && det != -1 {
                        continue;
                    }
                    if let Some(img) = t.transform(&[a, b, c, d]) {
                        if img == *t {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    count
}

/// The epsilon-free parts of the piecewise exponents (w1, w2) of the degree-2
/// counting and Fourier-bound case tables, exact rational arithmetic.
pub fn piecewise_exponents_rat(eta: &Ratio<i64>) -> Result<(Ratio<i64>, Ratio<i64>)> {
    let q = Ratio::new;
    let zero = q(0, 1);
    let two = q(2, 1);
    if eta < &zero || eta > &two {
        return Err(Error::Domain(format!("eta = {eta} outside [0, 2]")));
    }
    let w1 = if *eta <= q(1, 2) {
        q(3, 2) - q(3, 2) * eta
    } else if *eta <= q(1, 1) {
        q(1, 1) - q(1, 2) * eta
    } else if *eta <= q(3, 2) {
        q(3, 2) - eta
    } else {
        zero
    };
    let w2 = if *eta <= q(1, 2) {
        q(35, 12) - q(5, 4) * eta
    } else if *eta <= q(1, 1) {
        q(29, 12) - q(1, 4) * eta
    } else if *eta <= q(4, 3) {
        q(35, 12) - q(3, 4) * eta
    } else if *eta <= q(3, 2) {
        q(9, 4) - q(1, 4) * eta
    } else {
        q(3, 4) + q(3, 4) * eta
    };
    Ok((w1, w2))
}

/// Floating-point wrapper around [`piecewise_exponents_rat`].
pub fn piecewise_exponents(eta: f64) -> Result<(f64, f64)> {
    if !(0.0..=2.0).contains(&eta) {
        return Err(Error::Domain(format!("eta = {eta} outside [0, 2]")));
    }
    let r = Ratio::<i64>::approximate_float(eta)
        .ok_or_else(|| Error::Domain("eta not approximable".into()))?;
    let clamped = r.min(Ratio::new(2, 1)).max(Ratio::new(0, 1));
    let (w1, w2) = piecewise_exponents_rat(&clamped)?;
    Ok((
        *w1.numer() as f64 / *w1.denom() as f64,
        *w2.numer() as f64 / *w2.denom() as f64,
    ))
}

/// Largest-diagonal threshold above which the window set is provably empty:
/// y_max > n k r_n / (2 pi) (the exponential-decay premise).
pub fn cy_empty_threshold(n: usize, k: u32, r_n: f64) -> f64 {
    n as f64 * k as f64 * r_n / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_deg1() {
        let y = SymMatQ::identity(1);
        let forms = enumerate_forms(&y, &rat(7, 2), DEFAULT_ENUM_CAP).unwrap();
        let ts: Vec<i64> = forms.iter().map(|f| f.diag(0)).collect();
        assert_eq!(ts, vec![1, 2, 3]);
    }

    #[test]
    fn enumerate_deg2_identity_bound2() {
        let y = SymMatQ::identity(2);
        let forms = enumerate_forms(&y, &rat_i(2), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(forms.len(), 3);
        assert!(forms.contains(&HalfIntegralForm::deg2(1, 1, 0).unwrap()));
        assert!(forms.contains(&HalfIntegralForm::deg2(1, 1, 1).unwrap()));
        assert!(forms.contains(&HalfIntegralForm::deg2(1, 1, -1).unwrap()));
    }

    #[test]
    fn enumerate_deg2_far_y_is_empty() {
        let y = SymMatQ::from_i64_upper(2, &[10, 0, 10]);
        let forms = enumerate_forms(&y, &rat_i(2), DEFAULT_ENUM_CAP).unwrap();
        assert!(forms.is_empty());
    }

    #[test]
    fn enumerate_matches_box_oracle_deg2() {
        let y = SymMatQ::from_i64_upper(2, &[2, 1, 3]);
        let bound = rat_i(9);
        let fast = enumerate_forms(&y, &bound, DEFAULT_ENUM_CAP).unwrap();
        let mut slow = Vec::new();
        for tt1 in (2..=16i64).step_by(2) {
            for tt2 in (2..=16i64).step_by(2) {
                for off in -8i64..=8 {
                    if let Ok(f) = HalfIntegralForm::new(2, vec![tt1, off, off, tt2]) {
                        if f.trace_with(&y) <= bound {
                            slow.push(f);
                        }
                    }
                }
            }
        }
        slow.sort();
        assert_eq!(fast, slow);
    }

    #[test]
    fn automorph_counts() {
        assert_eq!(automorph_count(&HalfIntegralForm::scalar(1)), 2);
        assert_eq!(automorph_count(&HalfIntegralForm::deg2(1, 1, 0).unwrap()), 8);
        assert_eq!(automorph_count(&HalfIntegralForm::deg2(1, 2, 0).unwrap()), 4);
    }

    #[test]
    fn stabilizer_closure_for_scalar_y() {
        let y = SymMatQ::identity(2);
        let forms = enumerate_forms(&y, &rat_i(4), DEFAULT_ENUM_CAP).unwrap();
        let set: std::collections::BTreeSet<_> = forms.iter().cloned().collect();
        let signed_perms: Vec<[i64; 4]> = vec![
            [1, 0, 0, 1],
            [-1, 0, 0, 1],
            [1, 0, 0, -1],
            [-1, 0, 0, -1],
            [0, 1, 1, 0],
            [0, -1, 1, 0],
            [0, 1, -1, 0],
            [0, -1, -1, 0],
        ];
        for f in &forms {
            for u in &signed_perms {
                let img = f.transform(u).unwrap();
                assert!(set.contains(&img), "missing image of {f:?} under {u:?}");
            }
        }
    }

    #[test]
    fn window_examples() {
        let ctx = PrecisionContext::default().with_bits(192);
        let k = 40u32;
        let w = WindowSpec::new(k, 0.25, 1.0).unwrap();
        let y_val = Ratio::from_float(k as f64 / (4.0 * std::f64::consts::PI)).unwrap();
        let y = SymMatQ::diagonal(&[y_val]);
        let cy = cy_set(&y, &w, &ctx, DEFAULT_ENUM_CAP).unwrap();
        assert!(cy.forms.contains(&HalfIntegralForm::scalar(1)));
    }

    #[test]
    fn window_empty_beyond_threshold() {
        let ctx = PrecisionContext::default().with_bits(192);
        let k = 40u32;
        let w = WindowSpec::with_defaults(k).unwrap();
        let thr = cy_empty_threshold(2, k, 2.0);
        let y = SymMatQ::diagonal(&[rat_i(2), Ratio::from_float(thr * 1.05).unwrap()]);
        let cy = cy_set(&y, &w, &ctx, DEFAULT_ENUM_CAP).unwrap();
        assert!(cy.forms.is_empty());
    }

    #[test]
    fn two_path_window_equality() {
        let ctx = PrecisionContext::default().with_bits(192);
        let k = 40u32;
        let w = WindowSpec::with_defaults(k).unwrap();
        let y = SymMatQ::from_i64_upper(2, &[2, 0, 3]);
        let fast = cy_set(&y, &w, &ctx, DEFAULT_ENUM_CAP).unwrap();
        let (lo, hi) = w.interval();
        let p = 192u32;
        let y_f = RMat::from_qmat(y.as_qmat(), p);
        let y_half = y_f.sym_sqrt().unwrap();
        let mut slow = Vec::new();
        for tt1 in (2..=40i64).step_by(2) {
            for tt2 in (2..=40i64).step_by(2) {
                for off in -20i64..=20 {
                    let Ok(f) = HalfIntegralForm::new(2, vec![tt1, off, off, tt2]) else {
                        continue;
                    };
                    let m = y_half.mul(&f.to_rmat(p)).mul(&y_half);
                    let eigs = m.sym_eigenvalues();
                    if eigs
                        .iter()
                        .all(|l| l.to_f64() >= lo - 1e-10 && l.to_f64() <= hi + 1e-10)
                    {
                        slow.push(f);
                    }
                }
            }
        }
        slow.sort();
        assert_eq!(fast.forms, slow);
    }

    #[test]
    fn piecewise_values_and_continuity() {
        let q = Ratio::new;
        let (w1, w2) = piecewise_exponents_rat(&q(0, 1)).unwrap();
        assert_eq!(w1, q(3, 2));
        assert_eq!(w2, q(35, 12));
        let (w1, w2) = piecewise_exponents_rat(&q(1, 1)).unwrap();
        assert_eq!(w1, q(1, 2));
        assert_eq!(w2, q(13, 6));
        let (w1, w2) = piecewise_exponents_rat(&q(2, 1)).unwrap();
        assert_eq!(w1, q(0, 1));
        assert_eq!(w2, q(9, 4));
        // exact continuity at every breakpoint: both adjoining branch
        // formulas are evaluated at the breakpoint itself
        let w1_branches: Vec<(Ratio<i64>, Box<dyn Fn(Ratio<i64>) -> Ratio<i64>>)> = vec![
            (q(1, 2), Box::new(move |e| q(3, 2) - q(3, 2) * e)),
            (q(1, 2), Box::new(move |e| q(1, 1) - q(1, 2) * e)),
            (q(1, 1), Box::new(move |e| q(1, 1) - q(1, 2) * e)),
            (q(1, 1), Box::new(move |e| q(3, 2) - e)),
            (q(3, 2), Box::new(move |e| q(3, 2) - e)),
            (q(3, 2), Box::new(move |_| q(0, 1))),
        ];
        for pair in w1_branches.chunks(2) {
            let (bp, f) = &pair[0];
            let (_, g) = &pair[1];
            assert_eq!(f(*bp), g(*bp));
        }
        let w2_branches: Vec<(Ratio<i64>, Box<dyn Fn(Ratio<i64>) -> Ratio<i64>>)> = vec![
            (q(1, 2), Box::new(move |e| q(35, 12) - q(5, 4) * e)),
            (q(1, 2), Box::new(move |e| q(29, 12) - q(1, 4) * e)),
            (q(1, 1), Box::new(move |e| q(29, 12) - q(1, 4) * e)),
            (q(1, 1), Box::new(move |e| q(35, 12) - q(3, 4) * e)),
            (q(4, 3), Box::new(move |e| q(35, 12) - q(3, 4) * e)),
            (q(4, 3), Box::new(move |e| q(9, 4) - q(1, 4) * e)),
            (q(3, 2), Box::new(move |e| q(9, 4) - q(1, 4) * e)),
            (q(3, 2), Box::new(move |e| q(3, 4) + q(3, 4) * e)),
        ];
        for pair in w2_branches.chunks(2) {
            let (bp, f) = &pair[0];
            let (_, g) = &pair[1];
            assert_eq!(f(*bp), g(*bp));
        }
        assert!(piecewise_exponents_rat(&q(-1, 10)).is_err());
        assert!(piecewise_exponents_rat(&q(21, 10)).is_err());
    }
}
