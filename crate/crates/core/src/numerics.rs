//! Extended-precision scalar engine.
//!
//! Everything here is a pure function of its inputs and a [`PrecisionContext`].
//! Backing arithmetic is MPFR (via `rug`); the Bessel evaluation is an
//! ascending power series with term-ratio truncation, Kloosterman sums are
//! direct O(c) loops with exact modular inverses, and the torus quadrature is
//! the equal-weight rectangle rule (spectrally accurate for periodic
//! integrands).

use crate::error::{Error, Result};
use rug::float::Round;
use rug::ops::CompleteRound;
use rug::Float;

/// Working-precision contract for scalar operations.
///
/// `series_tol` is the relative truncation tolerance for series; every scalar
/// operation taking a context claims relative error at most `series_tol`,
/// testable by recomputation at doubled mantissa.
#[derive(Debug, Clone)]
pub struct PrecisionContext {
    pub mantissa_bits: u32,
    pub series_tol: f64,
    pub max_terms: usize,
}

impl Default for PrecisionContext {
    /// 512 mantissa bits absorb the (4pi)^{nk}/Gamma(k)^n cancellations up to
    /// k = 60, n = 2.
    fn default() -> Self {
        PrecisionContext {
            mantissa_bits: 512,
            series_tol: 1e-40,
            max_terms: 100_000,
        }
    }
}

impl PrecisionContext {
    pub fn new(mantissa_bits: u32, series_tol: f64, max_terms: usize) -> Result<Self> {
        if mantissa_bits < 64 {
            return Err(Error::Domain("mantissa_bits must be >= 64".into()));
        }
        if !(series_tol > 0.0 && series_tol < 1.0) {
            return Err(Error::Domain("series_tol must lie in (0, 1)".into()));
        }
        if max_terms == 0 {
            return Err(Error::Domain("max_terms must be >= 1".into()));
        }
        Ok(PrecisionContext {
            mantissa_bits,
            series_tol,
            max_terms,
        })
    }

    /// Same tolerance contract at twice the mantissa (convergence checks).
    pub fn doubled(&self) -> Self {
        PrecisionContext {
            mantissa_bits: self.mantissa_bits * 2,
            ..self.clone()
        }
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        PrecisionContext {
            mantissa_bits: bits.max(64),
            ..self.clone()
        }
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.mantissa_bits, v)
    }

    pub fn float_i(&self, v: i64) -> Float {
        Float::with_val(self.mantissa_bits, v)
    }

    pub fn zero(&self) -> Float {
        Float::with_val(self.mantissa_bits, 0)
    }

    pub fn one(&self) -> Float {
        Float::with_val(self.mantissa_bits, 1)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.mantissa_bits, rug::float::Constant::Pi)
    }

    /// Internal guard precision for accumulations.
    fn work_bits(&self, extra: u32) -> u32 {
        self.mantissa_bits + 64 + extra
    }
}

/// Complex number over MPFR floats. `rug`'s own complex type needs MPC, which
/// is not linked here, so the handful of operations we need are spelled out.
#[derive(Debug, Clone)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cplx::new(Float::with_val(prec, 0), Float::with_val(prec, 0))
    }

    pub fn one(prec: u32) -> Self {
        Cplx::new(Float::with_val(prec, 1), Float::with_val(prec, 0))
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Cplx::new(re, Float::with_val(prec, 0))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn conj(&self) -> Self {
        Cplx::new(self.re.clone(), -self.im.clone())
    }

    pub fn neg(&self) -> Self {
        Cplx::new(-self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, o: &Cplx) -> Self {
        let p = self.prec().max(o.prec());
        Cplx::new(
            (&self.re + &o.re).complete(p),
            (&self.im + &o.im).complete(p),
        )
    }

    pub fn sub(&self, o: &Cplx) -> Self {
        let p = self.prec().max(o.prec());
        Cplx::new(
            (&self.re - &o.re).complete(p),
            (&self.im - &o.im).complete(p),
        )
    }

    pub fn mul(&self, o: &Cplx) -> Self {
        let p = self.prec().max(o.prec());
        let re = (&self.re * &o.re).complete(p) - (&self.im * &o.im).complete(p);
        let im = (&self.re * &o.im).complete(p) + (&self.im * &o.re).complete(p);
        Cplx::new(re, im)
    }

    pub fn mul_real(&self, s: &Float) -> Self {
        let p = self.prec().max(s.prec());
        Cplx::new((&self.re * s).complete(p), (&self.im * s).complete(p))
    }

    pub fn div(&self, o: &Cplx) -> Result<Self> {
        let p = self.prec().max(o.prec());
        let den = o.norm2();
        if den.is_zero() {
            return Err(Error::Singular("complex division by zero".into()));
        }
        let num = self.mul(&o.conj());
        Ok(Cplx::new(
            (&num.re / &den).complete(p),
            (&num.im / &den).complete(p),
        ))
    }

    /// |z|^2 as a real number.
    pub fn norm2(&self) -> Float {
        let p = self.prec();
        (&self.re * &self.re).complete(p) + (&self.im * &self.im).complete(p)
    }

    pub fn abs(&self) -> Float {
        self.norm2().sqrt()
    }

    /// z^e for integer e (negative allowed), by binary powering.
    pub fn powi(&self, e: i64) -> Result<Self> {
        let p = self.prec();
        if e == 0 {
            return Ok(Cplx::one(p));
        }
        let mut base = if e < 0 {
            Cplx::one(p).div(self)?
        } else {
            self.clone()
        };
        let mut n = e.unsigned_abs();
        let mut acc = Cplx::one(p);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        Ok(acc)
    }

    /// exp(z).
    pub fn exp(&self) -> Self {
        let p = self.prec();
        let r = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Cplx::new((&r * &c).complete(p), (&r * &s).complete(p))
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// e(x) = exp(2 pi i x) for real x.
pub fn e2pi(x: &Float, ctx: &PrecisionContext) -> Cplx {
    let p = ctx.work_bits(0).max(x.prec());
    let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
    let theta = (x * &two_pi).complete(p);
    let (s, c) = theta.sin_cos(Float::new(p));
    Cplx::new(c, s)
}

/// ln Gamma(x) for x > 0, relative error within the context tolerance.
pub fn log_gamma(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(x.is_finite() && x.is_sign_positive() && !x.is_zero()) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    let mut v = Float::with_val(ctx.work_bits(0), x);
    v.ln_gamma_round(Round::Nearest);
    v.set_prec(ctx.mantissa_bits);
    Ok(v)
}

/// Gamma(x) for x > 0.
pub fn gamma(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(x.is_finite() && x.is_sign_positive() && !x.is_zero()) {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    let mut v = Float::with_val(ctx.work_bits(0), x);
    v = v.gamma();
    v.set_prec(ctx.mantissa_bits);
    Ok(v)
}

/// Bessel function J of half-integer order `order_twice / 2` at x >= 0,
/// by the ascending series sum_j (-1)^j (x/2)^{nu+2j} / (j! Gamma(nu+j+1)).
///
/// All arguments needed by the Petersson sums satisfy x = O(order), where the
/// series is stable at high precision. The partial sums swell to roughly
/// e^x before cancelling down to |J| <= 1; if that swell exceeds what the
/// context mantissa can absorb, an overflow signal is returned and the caller
/// must raise `mantissa_bits`.
pub fn bessel_j(order_twice: i64, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if order_twice < 0 {
        return Err(Error::Domain("bessel_j requires order >= 0".into()));
    }
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::Domain("bessel_j requires x >= 0".into()));
    }
    // Cancellation budget: the largest term is comparable to e^x / sqrt(x).
    let xf = x.to_f64();
    let swell_bits = (xf * std::f64::consts::LOG2_E).ceil() as i64;
    if swell_bits > ctx.mantissa_bits as i64 * 4 {
        return Err(Error::Precision(format!(
            "bessel_j partial sums swell ~2^{swell_bits}; raise mantissa_bits (have {})",
            ctx.mantissa_bits
        )));
    }
    let p = ctx.work_bits(swell_bits.max(0) as u32 + 32);
    let half_x = (x / 2u32).complete(p);
    if half_x.is_zero() {
        // J_0(0) = 1, J_nu(0) = 0 for nu > 0.
        return Ok(if order_twice == 0 { ctx.one() } else { ctx.zero() });
    }
    let nu = Float::with_val(p, order_twice) / 2u32;
    // t_0 = (x/2)^nu / Gamma(nu+1) computed in log space to dodge overflow.
    let ln_t0 =
        half_x.clone().ln() * &nu - Float::with_val(p, (&nu + 1u32).complete(p)).ln_gamma();
    let mut term = ln_t0.exp();
    let ratio_num = -(half_x.clone().square());
    let mut sum = term.clone();
    let tol = Float::with_val(p, ctx.series_tol);
    let hump = xf / 2.0;
    let mut converged = false;
    for j in 0..ctx.max_terms {
        let jf = Float::with_val(p, j as u32 + 1);
        let denom = &jf * (&nu + &jf).complete(p);
        term = term * &ratio_num / denom;
        sum += &term;
        if j as f64 >= hump {
            let bound = term.clone().abs() / sum.clone().abs().max(&ctx.one());
            if bound < tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "bessel_j series did not converge within {} terms",
            ctx.max_terms
        )));
    }
    sum.set_prec(ctx.mantissa_bits);
    Ok(sum)
}

/// Extended Euclid inverse of d modulo c (c >= 1, gcd(d, c) = 1).
fn inv_mod(d: i64, c: i64) -> Option<i64> {
    let (mut r0, mut r1) = (c, d.rem_euclid(c));
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(c))
}

/// Classical Kloosterman sum S(m, n; c) together with its imaginary residue.
///
/// S(m,n;c) = sum over d mod c, gcd(d,c)=1, of e((m d + n d^{-1})/c). The
/// value is real (d <-> c - d pairs conjugate terms); the residue is returned
/// so callers can check how real it came out numerically.
pub fn kloosterman_sum_full(m: i64, n: i64, c: i64, ctx: &PrecisionContext) -> (Float, Float) {
    assert!(c >= 1, "kloosterman_sum requires c >= 1");
    let p = ctx.work_bits(32);
    let mut re = Float::with_val(p, 0);
    let mut im = Float::with_val(p, 0);
    let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
    for d in 1..=c {
        if c > 1 && num_integer::gcd(d, c) != 1 {
            continue;
        }
        let Some(dinv) = inv_mod(d, c) else { continue };
        // exact residue of (m d + n d^{-1}) mod c, products in i128
        let r = ((m as i128 * d as i128 + n as i128 * dinv as i128).rem_euclid(c as i128)) as i64;
        let theta = (Float::with_val(p, r) / Float::with_val(p, c)) * &two_pi;
        let (s, co) = theta.sin_cos(Float::new(p));
        re += co;
        im += s;
    }
    re.set_prec(ctx.mantissa_bits);
    im.set_prec(ctx.mantissa_bits);
    (re, im)
}

/// Real value of the Kloosterman sum S(m, n; c).
pub fn kloosterman_sum(m: i64, n: i64, c: i64, ctx: &PrecisionContext) -> Float {
    kloosterman_sum_full(m, n, c, ctx).0
}

/// Equal-weight rectangle rule average of a periodic function on [0,1)^d over
/// the N^d grid. Exact for trigonometric polynomials of per-coordinate degree
/// below N; geometrically convergent for analytic periodic integrands.
pub fn torus_quadrature<F>(f: F, dim: usize, n_points: usize, ctx: &PrecisionContext) -> Cplx
where
    F: Fn(&[Float]) -> Cplx + Sync + Send,
{
    assert!(n_points >= 2, "torus_quadrature requires N >= 2");
    assert!(dim >= 1);
    let total = n_points.pow(dim as u32);
    let p = ctx.work_bits(0);
    let vals = crate::par::map_range(total, |flat| {
        let mut idx = flat;
        let mut point = Vec::with_capacity(dim);
        for _ in 0..dim {
            let j = idx % n_points;
            idx /= n_points;
            point.push(Float::with_val(p, j as u32) / Float::with_val(p, n_points as u32));
        }
        f(&point)
    });
    let mut acc = Cplx::zero(p);
    for v in &vals {
        acc = acc.add(v);
    }
    let scale = Float::with_val(p, 1) / Float::with_val(p, total as u32);
    let mut out = acc.mul_real(&scale);
    out.re.set_prec(ctx.mantissa_bits);
    out.im.set_prec(ctx.mantissa_bits);
    out
}

/// Least-squares slope of ln v against ln k.
pub fn fit_loglog_slope(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::Domain("fit_loglog_slope needs >= 3 samples".into()));
    }
    if samples.iter().any(|&(k, v)| k <= 0.0 || v <= 0.0) {
        return Err(Error::Domain("fit_loglog_slope needs positive samples".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|&(k, _)| k.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain(
            "fit_loglog_slope degenerate: all k equal".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn assert_close(a: &Float, b: &Float, tol: f64) {
        let diff = (a.clone() - b).abs().to_f64();
        let scale = b.clone().abs().to_f64().max(1.0);
        assert!(diff / scale <= tol, "mismatch: {a} vs {b}");
    }

    #[test]
    fn log_gamma_known_values() {
        let c = ctx();
        let v = log_gamma(&c.float(1.0), &c).unwrap();
        assert!(v.clone().abs().to_f64() < 1e-100);
        let v5 = log_gamma(&c.float(5.0), &c).unwrap();
        assert_close(&v5, &c.float(24.0).ln(), 1e-50);
        let vh = log_gamma(&c.float(0.5), &c).unwrap();
        let half_ln_pi = c.pi().ln() / 2u32;
        assert_close(&vh, &half_ln_pi, 1e-50);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        let c = ctx();
        assert!(log_gamma(&c.float(0.0), &c).is_err());
        assert!(log_gamma(&c.float(-2.5), &c).is_err());
    }

    #[test]
    fn bessel_trivial_values() {
        let c = ctx();
        let j00 = bessel_j(0, &c.float(0.0), &c).unwrap();
        assert_close(&j00, &c.one(), 1e-100);
        // J_{1/2}(pi) = sqrt(2/(pi x)) sin(pi) = 0, recovered down to the
        // series truncation tolerance
        let jh = bessel_j(1, &c.pi(), &c).unwrap();
        assert!(
            jh.clone().abs().to_f64() < 10.0 * c.series_tol,
            "J_(1/2)(pi) = {jh}"
        );
    }

    #[test]
    fn bessel_overflow_signal() {
        let c = PrecisionContext::new(64, 1e-10, 100_000).unwrap();
        let big = c.float(4000.0);
        match bessel_j(2, &big, &c) {
            Err(Error::Precision(_)) => {}
            other => panic!("expected precision error, got {other:?}"),
        }
    }

    #[test]
    fn kloosterman_small_moduli() {
        let c = ctx();
        let s1 = kloosterman_sum(1, 1, 1, &c);
        assert_close(&s1, &c.one(), 1e-60);
        let s2 = kloosterman_sum(1, 1, 2, &c);
        assert_close(&s2, &c.one(), 1e-60);
        let s3 = kloosterman_sum(1, 1, 3, &c);
        assert_close(&s3, &c.float(-1.0), 1e-60);
    }

    #[test]
    fn quadrature_constant_and_aliasing() {
        let c = ctx();
        let one = torus_quadrature(|_| Cplx::one(256), 1, 8, &c);
        assert_close(&one.re, &c.one(), 1e-60);
        assert!(one.im.clone().abs().to_f64() < 1e-60);
        // f(x) = e(x), N = 8 -> 0
        let f1 = torus_quadrature(|x| e2pi(&x[0], &ctx()), 1, 8, &c);
        assert!(f1.abs().to_f64() < 1e-60);
        // f(x) = e(3x) + 2, N = 4 -> 2
        let f2 = torus_quadrature(
            |x| {
                let three_x = x[0].clone() * 3u32;
                let mut v = e2pi(&three_x, &ctx());
                v.re += 2u32;
                v
            },
            1,
            4,
            &c,
        );
        assert_close(&f2.re, &c.float(2.0), 1e-60);
    }

    #[test]
    fn slope_examples() {
        let s = fit_loglog_slope(&[(2.0, 8.0), (4.0, 64.0), (8.0, 512.0)]).unwrap();
        assert!((s - 3.0).abs() < 1e-12);
        let c = 0.37;
        let s2 = fit_loglog_slope(&[
            (2.0, c * 2f64.powf(1.5)),
            (4.0, c * 4f64.powf(1.5)),
            (8.0, c * 8f64.powf(1.5)),
        ])
        .unwrap();
        assert!((s2 - 1.5).abs() < 1e-12);
        let s3 = fit_loglog_slope(&[(2.0, 4.0), (4.0, 8.0), (8.0, 32.0)]).unwrap();
        assert!((s3 - 1.5).abs() < 1e-12);
        assert!(fit_loglog_slope(&[(2.0, 4.0), (2.0, 8.0), (2.0, 32.0)]).is_err());
    }

    #[test]
    fn complex_powi_matches_repeated_mul() {
        let c = ctx();
        let z = Cplx::new(c.float(1.25), c.float(-0.5));
        let mut acc = Cplx::one(z.prec());
        for _ in 0..7 {
            acc = acc.mul(&z);
        }
        let p = z.powi(7).unwrap();
        assert_close(&p.re, &acc.re, 1e-100);
        assert_close(&p.im, &acc.im, 1e-100);
        let inv = z.powi(-7).unwrap();
        let prod = inv.mul(&acc);
        assert_close(&prod.re, &c.one(), 1e-100);
    }
}
