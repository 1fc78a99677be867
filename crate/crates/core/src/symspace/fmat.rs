//! Dense real and complex matrices over MPFR floats (small n).

use crate::error::{Error, Result};
use crate::numerics::{Cplx, PrecisionContext};
use crate::symspace::qmat::{QMat, Rat};
use rug::Float;

/// num-bigint -> rug conversion (hex round-trip; values here are small).
pub fn float_from_bigint(v: &num_bigint::BigInt, prec: u32) -> Float {
    let ri = rug::Integer::from_str_radix(&v.to_str_radix(16), 16).expect("radix-16 round trip");
    Float::with_val(prec, ri)
}

/// Exact rational -> MPFR float at the given precision.
pub fn float_from_rat(r: &Rat, prec: u32) -> Float {
    float_from_bigint(r.numer(), prec) / float_from_bigint(r.denom(), prec)
}

#[derive(Debug, Clone)]
pub struct RMat {
    pub n: usize,
    pub a: Vec<Float>,
}

impl RMat {
    pub fn zero(n: usize, prec: u32) -> Self {
        RMat {
            n,
            a: vec![Float::with_val(prec, 0); n * n],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = RMat::zero(n, prec);
        for i in 0..n {
            m.a[i * n + i] = Float::with_val(prec, 1);
        }
        m
    }

    pub fn from_fn(n: usize, prec: u32, f: impl Fn(usize, usize) -> Float) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut v = f(i, j);
                v.set_prec(prec);
                a.push(v);
            }
        }
        RMat { n, a }
    }

    pub fn from_qmat(q: &QMat, prec: u32) -> Self {
        assert_eq!(q.rows, q.cols);
        RMat::from_fn(q.rows, prec, |i, j| float_from_rat(&q[(i, j)], prec))
    }

    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Float) {
        self.a[i * self.n + j] = v;
    }

    pub fn prec(&self) -> u32 {
        self.a.iter().map(|f| f.prec()).max().unwrap_or(64)
    }

    pub fn add(&self, o: &RMat) -> RMat {
        let p = self.prec().max(o.prec());
        RMat::from_fn(self.n, p, |i, j| {
            Float::with_val(p, self.get(i, j) + o.get(i, j))
        })
    }

    pub fn sub(&self, o: &RMat) -> RMat {
        let p = self.prec().max(o.prec());
        RMat::from_fn(self.n, p, |i, j| {
            Float::with_val(p, self.get(i, j) - o.get(i, j))
        })
    }

    pub fn mul(&self, o: &RMat) -> RMat {
        let p = self.prec().max(o.prec());
        let n = self.n;
        RMat::from_fn(n, p, |i, j| {
            let mut acc = Float::with_val(p, 0);
            for k in 0..n {
                acc += Float::with_val(p, self.get(i, k) * o.get(k, j));
            }
            acc
        })
    }

    pub fn transpose(&self) -> RMat {
        RMat::from_fn(self.n, self.prec(), |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &Float) -> RMat {
        let p = self.prec().max(s.prec());
        RMat::from_fn(self.n, p, |i, j| Float::with_val(p, self.get(i, j) * s))
    }

    pub fn trace(&self) -> Float {
        let p = self.prec();
        let mut acc = Float::with_val(p, 0);
        for i in 0..self.n {
            acc += self.get(i, i);
        }
        acc
    }

    pub fn det(&self) -> Float {
        let p = self.prec();
        match self.n {
            0 => Float::with_val(p, 1),
            1 => self.get(0, 0).clone(),
            2 => {
                Float::with_val(p, self.get(0, 0) * self.get(1, 1))
                    - Float::with_val(p, self.get(0, 1) * self.get(1, 0))
            }
            _ => {
                // Gauss with partial pivoting
                let n = self.n;
                let mut a = self.clone();
                let mut det = Float::with_val(p, 1);
                for col in 0..n {
                    let mut piv = col;
                    let mut best = a.get(col, col).clone().abs();
                    for r in (col + 1)..n {
                        let v = a.get(r, col).clone().abs();
                        if v > best {
                            best = v;
                            piv = r;
                        }
                    }
                    if best.is_zero() {
                        return Float::with_val(p, 0);
                    }
                    if piv != col {
                        for j in 0..n {
                            a.a.swap(col * n + j, piv * n + j);
                        }
                        det = -det;
                    }
                    det *= a.get(col, col);
                    for r in (col + 1)..n {
                        let f = Float::with_val(p, a.get(r, col) / a.get(col, col));
                        for j in col..n {
                            let s = Float::with_val(p, &f * a.get(col, j));
                            let v = Float::with_val(p, a.get(r, j) - s);
                            a.set(r, j, v);
                        }
                    }
                }
                det
            }
        }
    }

    /// tr(self * other).
    pub fn trace_product(&self, o: &RMat) -> Float {
        let p = self.prec().max(o.prec());
        let mut acc = Float::with_val(p, 0);
        for i in 0..self.n {
            for j in 0..self.n {
                acc += Float::with_val(p, self.get(i, j) * o.get(j, i));
            }
        }
        acc
    }

    pub fn is_symmetric_to(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = Float::with_val(self.prec(), self.get(i, j) - self.get(j, i))
                    .abs()
                    .to_f64();
                if d > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues of a symmetric matrix, ascending (n <= 2 closed form; n = 3
    /// via the characteristic cubic with bisection).
    pub fn sym_eigenvalues(&self) -> Vec<Float> {
        let p = self.prec();
        match self.n {
            1 => vec![self.get(0, 0).clone()],
            2 => {
                let a = self.get(0, 0).clone();
                let b = self.get(0, 1).clone();
                let d = self.get(1, 1).clone();
                let tr = Float::with_val(p, &a + &d);
                let diff = Float::with_val(p, &a - &d);
                let disc = (diff.square() + Float::with_val(p, 4) * b.square()).sqrt();
                let l1 = Float::with_val(p, &tr - &disc) / 2u32;
                let l2 = Float::with_val(p, &tr + &disc) / 2u32;
                vec![l1, l2]
            }
            n => {
                // bisection on the characteristic polynomial sign changes via
                // Gershgorin bounds; adequate for the small symmetric cases here
                let mut lo = Float::with_val(p, f64::INFINITY);
                let mut hi = Float::with_val(p, f64::NEG_INFINITY);
                for i in 0..n {
                    let mut radius = Float::with_val(p, 0);
                    for j in 0..n {
                        if j != i {
                            radius += self.get(i, j).clone().abs();
                        }
                    }
                    let lo_i = Float::with_val(p, self.get(i, i) - &radius);
                    let hi_i = Float::with_val(p, self.get(i, i) + &radius);
                    if lo_i < lo {
                        lo = lo_i;
                    }
                    if hi_i > hi {
                        hi = hi_i;
                    }
                }
                let charpoly = |x: &Float| -> Float {
                    let mut m = self.clone();
                    for i in 0..n {
                        let v = Float::with_val(p, m.get(i, i) - x);
                        m.set(i, i, v);
                    }
                    m.det()
                };
                // count eigenvalues below t by Sylvester inertia (LDL^T)
                let count_below = |t: &Float| -> usize {
                    let mut m = self.clone();
                    for i in 0..n {
                        let v = Float::with_val(p, m.get(i, i) - t);
                        m.set(i, i, v);
                    }
                    // LDL with symmetric pivoting skipped; fall back to sign
                    // changes of leading minors, perturbing on zero
                    let mut negs = 0usize;
                    let mut prev = Float::with_val(p, 1);
                    for k in 1..=n {
                        let mut sub = RMat::zero(k, p);
                        for i in 0..k {
                            for j in 0..k {
                                sub.set(i, j, m.get(i, j).clone());
                            }
                        }
                        let d = sub.det();
                        if (Float::with_val(p, &d * &prev)).is_sign_negative() {
                            negs += 1;
                        }
                        prev = d;
                    }
                    negs
                };
                let mut out = Vec::with_capacity(n);
                for idx in 0..n {
                    let mut a = lo.clone();
                    let mut b = hi.clone();
                    for _ in 0..(p as usize / 2).max(128) {
                        let mid = Float::with_val(p, &a + &b) / 2u32;
                        if count_below(&mid) > idx {
                            b = mid;
                        } else {
                            a = mid;
                        }
                        let width = Float::with_val(p, &b - &a).abs();
                        if width.to_f64() < 1e-40 {
                            break;
                        }
                    }
                    let _ = charpoly(&a);
                    out.push(Float::with_val(p, &a + &b) / 2u32);
                }
                out
            }
        }
    }

    /// Symmetric positive definite square root (n <= 2 closed form).
    pub fn sym_sqrt(&self) -> Result<RMat> {
        let p = self.prec();
        match self.n {
            1 => {
                if self.get(0, 0).is_sign_negative() {
                    return Err(Error::NotPositiveDefinite("1x1 sqrt".into()));
                }
                Ok(RMat::from_fn(1, p, |_, _| self.get(0, 0).clone().sqrt()))
            }
            2 => {
                // sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
                let det = self.det();
                if det.is_sign_negative() || det.is_zero() {
                    return Err(Error::NotPositiveDefinite("2x2 sqrt: det <= 0".into()));
                }
                let s = det.sqrt();
                let tr = self.trace();
                let denom2 = Float::with_val(p, &tr + Float::with_val(p, 2) * &s);
                if denom2.is_sign_negative() || denom2.is_zero() {
                    return Err(Error::NotPositiveDefinite("2x2 sqrt: trace".into()));
                }
                let denom = denom2.sqrt();
                let mut m = self.clone();
                for i in 0..2 {
                    let v = Float::with_val(p, m.get(i, i) + &s);
                    m.set(i, i, v);
                }
                Ok(RMat::from_fn(2, p, |i, j| {
                    Float::with_val(p, m.get(i, j) / &denom)
                }))
            }
            _ => Err(Error::Domain("sym_sqrt implemented for n <= 2".into())),
        }
    }
}

/// Complex matrix over [`Cplx`].
#[derive(Debug, Clone)]
pub struct CMat {
    pub n: usize,
    pub a: Vec<Cplx>,
}

impl CMat {
    pub fn zero(n: usize, prec: u32) -> Self {
        CMat {
            n,
            a: vec![Cplx::zero(prec); n * n],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = CMat::zero(n, prec);
        for i in 0..n {
            m.a[i * n + i] = Cplx::one(prec);
        }
        m
    }

    pub fn from_re_im(x: &RMat, y: &RMat) -> Self {
        assert_eq!(x.n, y.n);
        let n = x.n;
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(Cplx::new(x.get(i, j).clone(), y.get(i, j).clone()));
            }
        }
        CMat { n, a }
    }

    pub fn get(&self, i: usize, j: usize) -> &Cplx {
        &self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cplx) {
        self.a[i * self.n + j] = v;
    }

    pub fn prec(&self) -> u32 {
        self.a.iter().map(|c| c.prec()).max().unwrap_or(64)
    }

    pub fn re(&self) -> RMat {
        RMat::from_fn(self.n, self.prec(), |i, j| self.get(i, j).re.clone())
    }

    pub fn im(&self) -> RMat {
        RMat::from_fn(self.n, self.prec(), |i, j| self.get(i, j).im.clone())
    }

    pub fn conj(&self) -> CMat {
        CMat {
            n: self.n,
            a: self.a.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> CMat {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[j * self.n + i] = self.get(i, j).clone();
            }
        }
        m
    }

    pub fn add(&self, o: &CMat) -> CMat {
        let mut m = self.clone();
        for (x, y) in m.a.iter_mut().zip(&o.a) {
            *x = x.add(y);
        }
        m
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        let mut m = self.clone();
        for (x, y) in m.a.iter_mut().zip(&o.a) {
            *x = x.sub(y);
        }
        m
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        let n = self.n;
        let p = self.prec().max(o.prec());
        let mut m = CMat::zero(n, p);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Cplx::zero(p);
                for k in 0..n {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn scale(&self, s: &Cplx) -> CMat {
        CMat {
            n: self.n,
            a: self.a.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn det(&self) -> Cplx {
        let p = self.prec();
        match self.n {
            0 => Cplx::one(p),
            1 => self.get(0, 0).clone(),
            2 => self
                .get(0, 0)
                .mul(self.get(1, 1))
                .sub(&self.get(0, 1).mul(self.get(1, 0))),
            n => {
                let mut a = self.clone();
                let mut det = Cplx::one(p);
                for col in 0..n {
                    let mut piv = col;
                    let mut best = a.get(col, col).norm2();
                    for r in (col + 1)..n {
                        let v = a.get(r, col).norm2();
                        if v > best {
                            best = v;
                            piv = r;
                        }
                    }
                    if best.is_zero() {
                        return Cplx::zero(p);
                    }
                    if piv != col {
                        for j in 0..n {
                            a.a.swap(col * n + j, piv * n + j);
                        }
                        det = det.neg();
                    }
                    det = det.mul(a.get(col, col));
                    for r in (col + 1)..n {
                        let f = a.get(r, col).div(a.get(col, col)).expect("pivot nonzero");
                        for j in col..n {
                            let s = f.mul(a.get(col, j));
                            let v = a.get(r, j).sub(&s);
                            a.set(r, j, v);
                        }
                    }
                }
                det
            }
        }
    }

    pub fn inverse(&self) -> Result<CMat> {
        let n = self.n;
        let p = self.prec();
        if n == 1 {
            let inv = Cplx::one(p).div(self.get(0, 0))?;
            let mut m = CMat::zero(1, p);
            m.set(0, 0, inv);
            return Ok(m);
        }
        if n == 2 {
            let det = self.det();
            if det.norm2().is_zero() {
                return Err(Error::Singular("2x2 complex inverse".into()));
            }
            let mut m = CMat::zero(2, p);
            m.set(0, 0, self.get(1, 1).div(&det)?);
            m.set(1, 1, self.get(0, 0).div(&det)?);
            m.set(0, 1, self.get(0, 1).neg().div(&det)?);
            m.set(1, 0, self.get(1, 0).neg().div(&det)?);
            return Ok(m);
        }
        // Gauss-Jordan
        let mut a = self.clone();
        let mut inv = CMat::identity(n, p);
        for col in 0..n {
            let mut piv = col;
            let mut best = a.get(col, col).norm2();
            for r in (col + 1)..n {
                let v = a.get(r, col).norm2();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best.is_zero() {
                return Err(Error::Singular("complex inverse".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.a.swap(col * n + j, piv * n + j);
                    inv.a.swap(col * n + j, piv * n + j);
                }
            }
            let d = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j).div(&d)?);
                inv.set(col, j, inv.get(col, j).div(&d)?);
            }
            for r in 0..n {
                if r == col || a.get(r, col).norm2().is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let s1 = f.mul(a.get(col, j));
                    a.set(r, j, a.get(r, j).sub(&s1));
                    let s2 = f.mul(inv.get(col, j));
                    inv.set(r, j, inv.get(r, j).sub(&s2));
                }
            }
        }
        Ok(inv)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> Float {
        let p = self.prec();
        let mut acc = Float::with_val(p, 0);
        for c in &self.a {
            acc += c.norm2();
        }
        acc.sqrt()
    }
}

/// A point Z = X + iY of the Siegel upper half-space.
#[derive(Debug, Clone)]
pub struct PointH {
    pub n: usize,
    pub x: RMat,
    pub y: RMat,
}

impl PointH {
    /// Builds a point, checking Y > 0 with margin (leading minors at working
    /// precision must exceed 10 * series_tol relative to their scale).
    pub fn new(x: RMat, y: RMat, ctx: &PrecisionContext) -> Result<Self> {
        assert_eq!(x.n, y.n);
        let n = x.n;
        if !x.is_symmetric_to(1e-25) || !y.is_symmetric_to(1e-25) {
            return Err(Error::Domain("PointH requires symmetric X, Y".into()));
        }
        let margin = 10.0 * ctx.series_tol;
        for k in 1..=n {
            let mut sub = RMat::zero(k, y.prec());
            for i in 0..k {
                for j in 0..k {
                    sub.set(i, j, y.get(i, j).clone());
                }
            }
            let d = sub.det().to_f64();
            if !(d > margin) {
                return Err(Error::NotPositiveDefinite(format!(
                    "Im(Z) leading minor {k} = {d}"
                )));
            }
        }
        Ok(PointH { n, x, y })
    }

    pub fn prec(&self) -> u32 {
        self.x.prec().max(self.y.prec())
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_re_im(&self.x, &self.y)
    }

    pub fn det_y(&self) -> Float {
        self.y.det()
    }

    /// n = 1 convenience constructor.
    pub fn from_xy1(x: f64, y: f64, ctx: &PrecisionContext) -> Result<Self> {
        let p = ctx.mantissa_bits;
        let xm = RMat::from_fn(1, p, |_, _| Float::with_val(p, x));
        let ym = RMat::from_fn(1, p, |_, _| Float::with_val(p, y));
        PointH::new(xm, ym, ctx)
    }
}
