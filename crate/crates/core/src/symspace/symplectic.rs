//! Symplectic similitude matrices, coprime symmetric pairs and their
//! completion, Moebius action on the Siegel half-space, and an exact
//! Gaussian-rational evaluation path for integer matrices.

use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use crate::symspace::fmat::{CMat, PointH, RMat};
use crate::symspace::qmat::{rat_i, smith_normal_form, QMat, Rat, UnimodularMat};
use num_traits::{One, Signed, Zero};

/// 2n x 2n matrix in blocks (A B; C D) with t(M) J M = mu J.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticMat {
    /// degree n (matrix size is 2n)
    pub n: usize,
    pub m: QMat,
    pub mu: Rat,
}

fn j_form(n: usize) -> QMat {
    let mut j = QMat::zero(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -rat_i(1);
        j[(n + i, i)] = rat_i(1);
    }
    j
}

impl SymplecticMat {
    /// Verifies t(M) J M = mu J exactly and extracts mu > 0.
    pub fn new(m: QMat) -> Result<Self> {
        assert_eq!(m.rows, m.cols);
        assert_eq!(m.rows % 2, 0);
        let n = m.rows / 2;
        let j = j_form(n);
        let p = m.transpose().mul(&j).mul(&m);
        let mu = p[(n, 0)].clone();
        if mu <= Rat::zero() {
            return Err(Error::Domain(format!(
                "similitude factor must be positive, got {mu}"
            )));
        }
        if p != j.scale(&mu) {
            return Err(Error::Domain(
                "matrix does not satisfy the symplectic similitude relation".into(),
            ));
        }
        Ok(SymplecticMat { n, m, mu })
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMat {
            n,
            m: QMat::identity(2 * n),
            mu: Rat::one(),
        }
    }

    pub fn from_blocks(a: &QMat, b: &QMat, c: &QMat, d: &QMat) -> Result<Self> {
        let n = a.rows;
        let mut m = QMat::zero(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = a[(i, j)].clone();
                m[(i, n + j)] = b[(i, j)].clone();
                m[(n + i, j)] = c[(i, j)].clone();
                m[(n + i, n + j)] = d[(i, j)].clone();
            }
        }
        SymplecticMat::new(m)
    }

    pub fn from_i64_blocks(n: usize, a: &[i64], b: &[i64], c: &[i64], d: &[i64]) -> Result<Self> {
        SymplecticMat::from_blocks(
            &QMat::from_i64(n, n, a),
            &QMat::from_i64(n, n, b),
            &QMat::from_i64(n, n, c),
            &QMat::from_i64(n, n, d),
        )
    }

    pub fn block(&self, which: char) -> QMat {
        let n = self.n;
        let (ro, co) = match which {
            'a' => (0, 0),
            'b' => (0, n),
            'c' => (n, 0),
            'd' => (n, n),
            _ => panic!("block must be one of a, b, c, d"),
        };
        let mut out = QMat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.m[(ro + i, co + j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, o: &SymplecticMat) -> SymplecticMat {
        SymplecticMat {
            n: self.n,
            m: self.m.mul(&o.m),
            mu: &self.mu * &o.mu,
        }
    }

    /// M^{-1} = mu^{-1} (tD -tB; -tC tA).
    pub fn inverse(&self) -> SymplecticMat {
        let a = self.block('a');
        let b = self.block('b');
        let c = self.block('c');
        let d = self.block('d');
        let inv_mu = Rat::one() / self.mu.clone();
        let mut m = QMat::zero(2 * self.n, 2 * self.n);
        let n = self.n;
        let dt = d.transpose();
        let bt = b.transpose();
        let ct = c.transpose();
        let at = a.transpose();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = &dt[(i, j)] * &inv_mu;
                m[(i, n + j)] = -(&bt[(i, j)] * &inv_mu);
                m[(n + i, j)] = -(&ct[(i, j)] * &inv_mu);
                m[(n + i, n + j)] = &at[(i, j)] * &inv_mu;
            }
        }
        SymplecticMat {
            n: self.n,
            m,
            mu: inv_mu,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.m.a.iter().all(|x| x.is_integer())
    }

    /// Translation (1 S; 0 1) by an integer symmetric S.
    pub fn translation(n: usize, s_upper: &[i64]) -> Self {
        let mut m = QMat::identity(2 * n);
        let mut it = s_upper.iter();
        for i in 0..n {
            for j in i..n {
                let v = rat_i(*it.next().unwrap());
                m[(i, n + j)] = v.clone();
                m[(j, n + i)] = v;
            }
        }
        SymplecticMat {
            n,
            m,
            mu: Rat::one(),
        }
    }

    /// Embedding (U 0; 0 tU^{-1}) of a unimodular U.
    pub fn embed_unimodular(u: &UnimodularMat) -> Self {
        let n = u.n;
        let uq = u.to_qmat();
        let ut_inv = uq.transpose().inverse().expect("unimodular is invertible");
        let mut m = QMat::zero(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = uq[(i, j)].clone();
                m[(n + i, n + j)] = ut_inv[(i, j)].clone();
            }
        }
        SymplecticMat {
            n,
            m,
            mu: Rat::one(),
        }
    }

    /// CZ + D at a complex point.
    pub fn j_factor(&self, z: &CMat) -> CMat {
        let p = z.prec();
        let c = CMat::from_re_im(&RMat::from_qmat(&self.block('c'), p), &RMat::zero(self.n, p));
        let d = CMat::from_re_im(&RMat::from_qmat(&self.block('d'), p), &RMat::zero(self.n, p));
        c.mul(z).add(&d)
    }

    /// Moebius action (AZ + B)(CZ + D)^{-1}.
    pub fn apply(&self, z: &CMat) -> Result<CMat> {
        let p = z.prec();
        let n = self.n;
        let a = CMat::from_re_im(&RMat::from_qmat(&self.block('a'), p), &RMat::zero(n, p));
        let b = CMat::from_re_im(&RMat::from_qmat(&self.block('b'), p), &RMat::zero(n, p));
        let num = a.mul(z).add(&b);
        let den = self.j_factor(z);
        let den_inv = den.inverse().map_err(|_| {
            Error::Singular("CZ + D is singular; input is not a half-space point".into())
        })?;
        Ok(num.mul(&den_inv))
    }

    pub fn apply_point(&self, z: &PointH, ctx: &PrecisionContext) -> Result<PointH> {
        let w = self.apply(&z.to_cmat())?;
        PointH::new(w.re(), w.im(), ctx)
    }

    /// Im(M<Z>) via the transport formula t(CZ+D)^{-1} Y conj(CZ+D)^{-1}.
    pub fn im_via_formula(&self, z: &PointH) -> Result<RMat> {
        let zc = z.to_cmat();
        let jf = self.j_factor(&zc);
        let jf_inv_t = jf.transpose().inverse()?;
        let jf_inv_conj = jf.inverse()?.conj();
        let y = CMat::from_re_im(&z.y, &RMat::zero(z.n, z.y.prec()));
        let prod = jf_inv_t.mul(&y).mul(&jf_inv_conj);
        // scale by the similitude: Im(M<Z>) for mu != 1 picks up mu
        let mut out = prod.re();
        if !self.mu.is_one() {
            let p = out.prec();
            let muf = crate::symspace::fmat::float_from_rat(&self.mu, p);
            out = out.scale(&muf);
        }
        Ok(out)
    }
}

/// Coprime symmetric pair {C, D}: C tD = D tC and (C D) is primitive,
/// i.e. completable to Sp(2n, Z).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoprimePair {
    pub n: usize,
    pub c: QMat,
    pub d: QMat,
}

impl CoprimePair {
    pub fn new(c: QMat, d: QMat) -> Result<Self> {
        let n = c.rows;
        assert_eq!((c.rows, c.cols, d.rows, d.cols), (n, n, n, n));
        if c.a.iter().chain(d.a.iter()).any(|x| !x.is_integer()) {
            return Err(Error::Domain("coprime pair must be integral".into()));
        }
        let sym = c.mul(&d.transpose());
        if !sym.is_symmetric() {
            return Err(Error::Domain("C tD must be symmetric".into()));
        }
        let pair = CoprimePair { n, c, d };
        if !pair.is_primitive() {
            return Err(Error::Domain(
                "pair is not primitive (not completable to Sp)".into(),
            ));
        }
        Ok(pair)
    }

    pub fn from_i64(n: usize, c: &[i64], d: &[i64]) -> Result<Self> {
        CoprimePair::new(QMat::from_i64(n, n, c), QMat::from_i64(n, n, d))
    }

    fn stacked(&self) -> QMat {
        let n = self.n;
        let mut r = QMat::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                r[(i, j)] = self.c[(i, j)].clone();
                r[(i, n + j)] = self.d[(i, j)].clone();
            }
        }
        r
    }

    /// All invariant factors of (C D) are units.
    pub fn is_primitive(&self) -> bool {
        let r = self.stacked();
        let (_, s, _) = smith_normal_form(&r);
        (0..self.n).all(|i| s[(i, i)].clone().abs() == rat_i(1))
    }

    /// Constructive completion to an element of Sp(2n, Z) with bottom blocks
    /// (C D): solve for the top row block against the symplectic pairing and
    /// correct its self-pairing with a lower-triangular multiple of (C D).
    pub fn complete(&self) -> Result<SymplecticMat> {
        let n = self.n;
        let r = self.stacked();
        // pairing P(T, R) = T J2 tR with J2 = (0 1; -1 0)
        let mut j2 = QMat::zero(2 * n, 2 * n);
        for i in 0..n {
            j2[(i, n + i)] = rat_i(1);
            j2[(n + i, i)] = -rat_i(1);
        }
        let g = j2.mul(&r.transpose()); // 2n x n
        let (u, s, v) = smith_normal_form(&g);
        for i in 0..n {
            if s[(i, i)].clone().abs() != rat_i(1) {
                return Err(Error::Domain("pair is not primitive".into()));
            }
        }
        // solve T0 * g = 1_n: with u g v = s this reads (T0 u^{-1}) s = v,
        // so the first n columns of X := T0 u^{-1} are v scaled by s^{-1}
        // and the rest are free (zero); then T0 = X u.
        let mut x = QMat::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                x[(i, j)] = &v[(i, j)] / &s[(j, j)];
            }
        }
        let t0 = x.mul(&u);
        // antisymmetry defect and its lower-triangular correction:
        // P(T0 + A R, T0 + A R) = S_def - A + tA, so choose A - tA = S_def
        let s_def = t0.mul(&j2).mul(&t0.transpose());
        let mut corr = QMat::zero(n, n);
        for i in 0..n {
            for j in 0..i {
                corr[(i, j)] = s_def[(i, j)].clone();
            }
        }
        let t = t0.add(&corr.mul(&r));
        // assemble (A B; C D)
        let mut m = QMat::zero(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..(2 * n) {
                m[(i, j)] = t[(i, j)].clone();
                m[(n + i, j)] = r[(i, j)].clone();
            }
        }
        let sp = SymplecticMat::new(m)?;
        if !sp.is_integral() || !sp.mu.is_one() {
            return Err(Error::Domain("completion failed to land in Sp(2n, Z)".into()));
        }
        Ok(sp)
    }

    /// Left GL(n, Z)-canonical form of the stacked n x 2n matrix (Hermite
    /// normal form), used to deduplicate classes.
    pub fn class_key(&self) -> Vec<num_bigint::BigInt> {
        let h = hermite_normal_form_rows(&self.stacked());
        h.a.iter().map(|x| x.numer().clone()).collect()
    }
}

/// Row-style Hermite normal form under left multiplication by GL(rows, Z):
/// echelon with positive pivots and entries above a pivot reduced mod it.
pub fn hermite_normal_form_rows(m: &QMat) -> QMat {
    let rows = m.rows;
    let cols = m.cols;
    let mut h = m.clone();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        // reduce column `col` below pivot_row by gcd steps
        loop {
            let mut best: Option<(usize, Rat)> = None;
            for r in pivot_row..rows {
                if !h[(r, col)].is_zero() {
                    let a = h[(r, col)].clone().abs();
                    match &best {
                        Some((_, b)) if *b <= a => {}
                        _ => best = Some((r, a)),
                    }
                }
            }
            let Some((r_min, _)) = best else { break };
            // swap minimal row up
            if r_min != pivot_row {
                for j in 0..cols {
                    let t = h[(pivot_row, j)].clone();
                    h[(pivot_row, j)] = h[(r_min, j)].clone();
                    h[(r_min, j)] = t;
                }
            }
            let piv = h[(pivot_row, col)].clone();
            let mut all_zero = true;
            for r in (pivot_row + 1)..rows {
                if h[(r, col)].is_zero() {
                    continue;
                }
                let q = Rat::from_integer(h[(r, col)].numer() / piv.numer());
                for j in 0..cols {
                    let sub = &q * &h[(pivot_row, j)];
                    h[(r, j)] -= sub;
                }
                if !h[(r, col)].is_zero() {
                    all_zero = false;
                }
            }
            if all_zero {
                break;
            }
        }
        if h[(pivot_row, col)].is_zero() {
            continue;
        }
        // positive pivot
        if h[(pivot_row, col)].numer().is_negative() {
            for j in 0..cols {
                h[(pivot_row, j)] = -h[(pivot_row, j)].clone();
            }
        }
        // reduce entries above the pivot
        let piv = h[(pivot_row, col)].clone();
        for r in 0..pivot_row {
            use num_integer::Integer;
            let q = Rat::from_integer(h[(r, col)].numer().div_floor(piv.numer()));
            if q.is_zero() {
                continue;
            }
            for j in 0..cols {
                let sub = &q * &h[(pivot_row, j)];
                h[(r, j)] -= sub;
            }
        }
        pivot_row += 1;
    }
    h
}

/// Exact Gaussian rational a + b i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GQ {
    pub re: Rat,
    pub im: Rat,
}

impl GQ {
    pub fn new(re: Rat, im: Rat) -> Self {
        GQ { re, im }
    }

    pub fn zero() -> Self {
        GQ::new(Rat::zero(), Rat::zero())
    }

    pub fn one() -> Self {
        GQ::new(Rat::one(), Rat::zero())
    }

    pub fn add(&self, o: &GQ) -> GQ {
        GQ::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &GQ) -> GQ {
        GQ::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &GQ) -> GQ {
        GQ::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn neg(&self) -> GQ {
        GQ::new(-self.re.clone(), -self.im.clone())
    }

    pub fn conj(&self) -> GQ {
        GQ::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm2(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn div(&self, o: &GQ) -> Result<GQ> {
        let n2 = o.norm2();
        if n2.is_zero() {
            return Err(Error::Singular("Gaussian division by zero".into()));
        }
        let num = self.mul(&o.conj());
        Ok(GQ::new(num.re / n2.clone(), num.im / n2))
    }
}

/// Exact complex rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GQMat {
    pub n: usize,
    pub a: Vec<GQ>,
}

impl GQMat {
    pub fn zero(n: usize) -> Self {
        GQMat {
            n,
            a: vec![GQ::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = GQMat::zero(n);
        for i in 0..n {
            m.a[i * n + i] = GQ::one();
        }
        m
    }

    pub fn from_re_im(x: &QMat, y: &QMat) -> Self {
        let n = x.rows;
        let mut m = GQMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = GQ::new(x[(i, j)].clone(), y[(i, j)].clone());
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &GQ {
        &self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GQ) {
        self.a[i * self.n + j] = v;
    }

    pub fn add(&self, o: &GQMat) -> GQMat {
        let mut m = self.clone();
        for (x, y) in m.a.iter_mut().zip(&o.a) {
            *x = x.add(y);
        }
        m
    }

    pub fn sub(&self, o: &GQMat) -> GQMat {
        let mut m = self.clone();
        for (x, y) in m.a.iter_mut().zip(&o.a) {
            *x = x.sub(y);
        }
        m
    }

    pub fn mul(&self, o: &GQMat) -> GQMat {
        let n = self.n;
        let mut m = GQMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = GQ::zero();
                for k in 0..n {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn conj(&self) -> GQMat {
        GQMat {
            n: self.n,
            a: self.a.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn det(&self) -> GQ {
        match self.n {
            0 => GQ::one(),
            1 => self.get(0, 0).clone(),
            2 => self
                .get(0, 0)
                .mul(self.get(1, 1))
                .sub(&self.get(0, 1).mul(self.get(1, 0))),
            n => {
                let mut a = self.clone();
                let mut det = GQ::one();
                for col in 0..n {
                    let Some(piv) = (col..n).find(|&r| !a.get(r, col).norm2().is_zero()) else {
                        return GQ::zero();
                    };
                    if piv != col {
                        for j in 0..n {
                            a.a.swap(col * n + j, piv * n + j);
                        }
                        det = det.neg();
                    }
                    det = det.mul(a.get(col, col));
                    for r in (col + 1)..n {
                        let f = a.get(r, col).div(a.get(col, col)).unwrap();
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

    pub fn inverse(&self) -> Result<GQMat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = GQMat::identity(n);
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a.get(r, col).norm2().is_zero()) else {
                return Err(Error::Singular("Gaussian-rational inverse".into()));
            };
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

    /// Moebius action of an exact symplectic similitude.
    pub fn moebius(m: &SymplecticMat, z: &GQMat) -> Result<GQMat> {
        let n = m.n;
        let to_gq = |q: &QMat| {
            let mut g = GQMat::zero(n);
            for i in 0..n {
                for j in 0..n {
                    g.set(i, j, GQ::new(q[(i, j)].clone(), Rat::zero()));
                }
            }
            g
        };
        let a = to_gq(&m.block('a'));
        let b = to_gq(&m.block('b'));
        let c = to_gq(&m.block('c'));
        let d = to_gq(&m.block('d'));
        let num = a.mul(z).add(&b);
        let den = c.mul(z).add(&d);
        Ok(num.mul(&den.inverse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_degree_one_inversion() {
        let pair = CoprimePair::from_i64(1, &[1], &[0]).unwrap();
        let sp = pair.complete().unwrap();
        assert_eq!(sp.block('c')[(0, 0)], rat_i(1));
        assert_eq!(sp.block('d')[(0, 0)], rat_i(0));
        assert!(sp.mu.is_one());
    }

    #[test]
    fn completion_degree_two_various() {
        let cases: Vec<([i64; 4], [i64; 4])> = vec![
            ([0, 0, 0, 0], [1, 0, 0, 1]),
            ([1, 0, 0, 1], [0, 0, 0, 0]),
            ([1, 0, 0, 0], [0, 0, 0, 1]),
            ([1, 0, 0, 1], [2, 0, 0, 3]),
            ([1, 2, 2, 1], [5, 0, 0, 5]),
            ([2, 1, 1, 1], [1, 1, 1, 2]),
        ];
        for (c, d) in cases {
            let Ok(pair) = CoprimePair::from_i64(2, &c, &d) else {
                continue;
            };
            let sp = pair.complete().unwrap();
            assert!(sp.is_integral());
            assert!(sp.mu.is_one());
            assert_eq!(sp.block('c').a, QMat::from_i64(2, 2, &c).a);
            assert_eq!(sp.block('d').a, QMat::from_i64(2, 2, &d).a);
        }
    }

    #[test]
    fn symplectic_rejects_non_symplectic() {
        // negative determinant in degree 1 flips the form
        let m = QMat::from_i64(2, 2, &[1, 0, 0, -1]);
        assert!(SymplecticMat::new(m).is_err());
        // a genuinely non-similitude 4x4
        let mut bad = QMat::identity(4);
        bad[(0, 1)] = rat_i(1);
        assert!(SymplecticMat::new(bad).is_err());
    }

    #[test]
    fn similitude_factor_extracted() {
        // diag(1,1,m,m) is a similitude with mu = m
        let m = QMat::from_i64(4, 4, &[1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2]);
        let sp = SymplecticMat::new(m).unwrap();
        assert_eq!(sp.mu, rat_i(2));
        assert_eq!(sp.n, 2);
    }

    #[test]
    fn hermite_form_dedupes_left_classes() {
        // (c d) = (1 5) and (-1 -5) are the same class; (1 4) is different
        let a = CoprimePair::from_i64(1, &[1], &[5]).unwrap();
        let b = CoprimePair::from_i64(1, &[-1], &[-5]).unwrap();
        let c = CoprimePair::from_i64(1, &[1], &[4]).unwrap();
        assert_eq!(a.class_key(), b.class_key());
        assert_ne!(a.class_key(), c.class_key());
    }
}
