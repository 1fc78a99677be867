//! Exact rational and integer matrices.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Rat = Ratio<BigInt>;

pub fn rat_i(v: i64) -> Rat {
    Ratio::from_integer(BigInt::from(v))
}

pub fn rat(p: i64, q: i64) -> Rat {
    Ratio::new(BigInt::from(p), BigInt::from(q))
}

/// Nearest integer to a rational (ties toward even are not needed; ties round
/// toward +infinity).
pub fn rat_round(x: &Rat) -> BigInt {
    use num_integer::Integer;
    let two = BigInt::from(2);
    let num = x.numer() * &two + x.denom();
    let den = x.denom() * &two;
    num.div_floor(&den)
}

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Rat>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            a: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        assert!(rows.iter().all(|row| row.len() == c));
        QMat {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        QMat {
            rows,
            cols,
            a: entries.iter().map(|&v| rat_i(v)).collect(),
        }
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        assert_eq!(self.cols, o.rows);
        let mut m = QMat::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let prod = &self[(i, k)] * &o[(k, j)];
                    m[(i, j)] += prod;
                }
            }
        }
        m
    }

    pub fn add(&self, o: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let mut m = self.clone();
        for (x, y) in m.a.iter_mut().zip(&o.a) {
            *x += y;
        }
        m
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let mut m = self.clone();
        for (x, y) in m.a.iter_mut().zip(&o.a) {
            *x -= y;
        }
        m
    }

    pub fn neg(&self) -> QMat {
        let mut m = self.clone();
        for x in m.a.iter_mut() {
            *x = -x.clone();
        }
        m
    }

    pub fn scale(&self, s: &Rat) -> QMat {
        let mut m = self.clone();
        for x in m.a.iter_mut() {
            *x *= s;
        }
        m
    }

    /// Determinant by fraction-free expansion for n <= 3, Gauss otherwise.
    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        match n {
            0 => Rat::one(),
            1 => self[(0, 0)].clone(),
            2 => &self[(0, 0)] * &self[(1, 1)] - &self[(0, 1)] * &self[(1, 0)],
            3 => {
                let m = |i: usize, j: usize| &self[(i, j)];
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => {
                let mut a = self.clone();
                let mut det = Rat::one();
                for col in 0..n {
                    let Some(piv) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                        return Rat::zero();
                    };
                    if piv != col {
                        for j in 0..n {
                            let tmp = a[(col, j)].clone();
                            a[(col, j)] = a[(piv, j)].clone();
                            a[(piv, j)] = tmp;
                        }
                        det = -det;
                    }
                    det *= &a[(col, col)];
                    let inv = Rat::one() / a[(col, col)].clone();
                    for r in (col + 1)..n {
                        let f = &a[(r, col)] * &inv;
                        if f.is_zero() {
                            continue;
                        }
                        for j in col..n {
                            let sub = &f * &a[(col, j)];
                            a[(r, j)] -= sub;
                        }
                    }
                }
                det
            }
        }
    }

    /// Inverse by Gauss-Jordan with exact arithmetic.
    pub fn inverse(&self) -> Result<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Err(Error::Singular("rational matrix not invertible".into()));
            };
            if piv != col {
                for j in 0..n {
                    a.a.swap(col * n + j, piv * n + j);
                    inv.a.swap(col * n + j, piv * n + j);
                }
            }
            let d = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= d.clone();
                inv[(col, j)] /= d.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let s1 = &f * &a[(col, j)];
                    a[(r, j)] -= s1;
                    let s2 = &f * &inv[(col, j)];
                    inv[(r, j)] -= s2;
                }
            }
        }
        Ok(inv)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn trace(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)].clone()).sum()
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.a[i * self.cols + j]
    }
}

/// Exact rational symmetric matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatQ {
    pub n: usize,
    m: QMat,
}

impl SymMatQ {
    pub fn from_qmat(m: QMat) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::Domain("matrix is not symmetric".into()));
        }
        Ok(SymMatQ { n: m.rows, m })
    }

    /// Upper triangle, row-major: a11, a12, .., a1n, a22, ...
    pub fn from_upper(n: usize, upper: &[Rat]) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Parse(format!(
                "expected {} upper-triangle entries, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        let mut m = QMat::zero(n, n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap().clone();
                m[(i, j)] = v.clone();
                m[(j, i)] = v;
            }
        }
        Ok(SymMatQ { n, m })
    }

    pub fn from_i64_upper(n: usize, upper: &[i64]) -> Self {
        let v: Vec<Rat> = upper.iter().map(|&x| rat_i(x)).collect();
        SymMatQ::from_upper(n, &v).unwrap()
    }

    pub fn identity(n: usize) -> Self {
        SymMatQ {
            n,
            m: QMat::identity(n),
        }
    }

    pub fn diagonal(d: &[Rat]) -> Self {
        let n = d.len();
        let mut m = QMat::zero(n, n);
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        SymMatQ { n, m }
    }

    pub fn as_qmat(&self) -> &QMat {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rat {
        &self.m[(i, j)]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: Rat) {
        self.m[(i, j)] = v.clone();
        self.m[(j, i)] = v;
    }

    pub fn det(&self) -> Rat {
        self.m.det()
    }

    pub fn trace(&self) -> Rat {
        self.m.trace()
    }

    /// Diagonal part as a matrix.
    pub fn diagonal_part(&self) -> SymMatQ {
        let d: Vec<Rat> = (0..self.n).map(|i| self.m[(i, i)].clone()).collect();
        SymMatQ::diagonal(&d)
    }

    /// U A tU for an integer matrix U.
    pub fn transform(&self, u: &UnimodularMat) -> SymMatQ {
        let uq = u.to_qmat();
        let m = uq.mul(&self.m).mul(&uq.transpose());
        SymMatQ { n: self.n, m }
    }

    /// tr(self * other), both symmetric of the same size.
    pub fn trace_product(&self, other: &SymMatQ) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += &self.m[(i, j)] * &other.m[(j, i)];
            }
        }
        acc
    }

    pub fn add(&self, o: &SymMatQ) -> SymMatQ {
        SymMatQ {
            n: self.n,
            m: self.m.add(&o.m),
        }
    }

    pub fn sub(&self, o: &SymMatQ) -> SymMatQ {
        SymMatQ {
            n: self.n,
            m: self.m.sub(&o.m),
        }
    }

    pub fn scale(&self, s: &Rat) -> SymMatQ {
        SymMatQ {
            n: self.n,
            m: self.m.scale(s),
        }
    }
}

/// Positive definiteness via leading principal minors, exact.
pub fn is_positive_definite(a: &SymMatQ) -> bool {
    let n = a.n;
    for k in 1..=n {
        let mut sub = QMat::zero(k, k);
        for i in 0..k {
            for j in 0..k {
                sub[(i, j)] = a.entry(i, j).clone();
            }
        }
        if sub.det() <= Rat::zero() {
            return false;
        }
    }
    true
}

/// Positive semidefiniteness via all principal minors, exact (n <= 3 stays
/// cheap; larger n enumerates subsets).
pub fn is_positive_semidefinite(a: &SymMatQ) -> bool {
    let n = a.n;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let mut sub = QMat::zero(k, k);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                sub[(r, c)] = a.entry(i, j).clone();
            }
        }
        if sub.det() < Rat::zero() {
            return false;
        }
    }
    true
}

/// Integer matrix with determinant +-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodularMat {
    pub n: usize,
    pub a: Vec<i64>,
}

impl UnimodularMat {
    pub fn new(n: usize, a: Vec<i64>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let u = UnimodularMat { n, a };
        let d = u.to_qmat().det();
        if d != rat_i(1) && d != rat_i(-1) {
            return Err(Error::Domain(format!("determinant {d} is not +-1")));
        }
        Ok(u)
    }

    pub fn identity(n: usize) -> Self {
        let mut a = vec![0i64; n * n];
        for i in 0..n {
            a[i * n + i] = 1;
        }
        UnimodularMat { n, a }
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.a[i * self.n + j]
    }

    pub fn to_qmat(&self) -> QMat {
        QMat::from_i64(self.n, self.n, &self.a)
    }

    pub fn mul(&self, o: &UnimodularMat) -> UnimodularMat {
        let n = self.n;
        let mut a = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += self.entry(i, k) as i128 * o.entry(k, j) as i128;
                }
                a[i * n + j] = i64::try_from(acc).expect("unimodular product overflow");
            }
        }
        UnimodularMat { n, a }
    }

    pub fn neg(&self) -> UnimodularMat {
        UnimodularMat {
            n: self.n,
            a: self.a.iter().map(|&v| -v).collect(),
        }
    }

    pub fn is_identity_up_to_sign(&self) -> bool {
        let id = UnimodularMat::identity(self.n);
        *self == id || *self == id.neg()
    }
}

/// Smith normal form over the integers: returns (u, s, v) with u * m * v = s,
/// u and v unimodular and s diagonal (as a rows x cols matrix).
pub fn smith_normal_form(m: &QMat) -> (QMat, QMat, QMat) {
    assert!(m.a.iter().all(|x| x.is_integer()));
    let rows = m.rows;
    let cols = m.cols;
    let mut s = m.clone();
    let mut u = QMat::identity(rows);
    let mut v = QMat::identity(cols);

    let swap_rows = |s: &mut QMat, u: &mut QMat, r1: usize, r2: usize| {
        for j in 0..s.cols {
            let t = s[(r1, j)].clone();
            s[(r1, j)] = s[(r2, j)].clone();
            s[(r2, j)] = t;
        }
        for j in 0..u.cols {
            let t = u[(r1, j)].clone();
            u[(r1, j)] = u[(r2, j)].clone();
            u[(r2, j)] = t;
        }
    };
    let swap_cols = |s: &mut QMat, v: &mut QMat, c1: usize, c2: usize| {
        for i in 0..s.rows {
            let t = s[(i, c1)].clone();
            s[(i, c1)] = s[(i, c2)].clone();
            s[(i, c2)] = t;
        }
        for i in 0..v.rows {
            let t = v[(i, c1)].clone();
            v[(i, c1)] = v[(i, c2)].clone();
            v[(i, c2)] = t;
        }
    };

    let mut t = 0usize;
    while t < rows.min(cols) {
        // find a nonzero pivot in the remaining block
        let mut found = None;
        'outer: for i in t..rows {
            for j in t..cols {
                if !s[(i, j)].is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((pi, pj)) = found else { break };
        swap_rows(&mut s, &mut u, t, pi);
        swap_cols(&mut s, &mut v, t, pj);
        loop {
            let mut clean = true;
            // clear column t
            for i in (t + 1)..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = Rat::from_integer(s[(i, t)].numer() / s[(t, t)].numer());
                if !q.is_zero() {
                    for j in 0..cols {
                        let sub = &q * &s[(t, j)];
                        s[(i, j)] -= sub;
                    }
                    for j in 0..u.cols {
                        let sub = &q * &u[(t, j)];
                        u[(i, j)] -= sub;
                    }
                }
                if !s[(i, t)].is_zero() {
                    swap_rows(&mut s, &mut u, t, i);
                    clean = false;
                }
            }
            // clear row t
            for j in (t + 1)..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = Rat::from_integer(s[(t, j)].numer() / s[(t, t)].numer());
                if !q.is_zero() {
                    for i in 0..rows {
                        let sub = &q * &s[(i, t)];
                        s[(i, j)] -= sub;
                    }
                    for i in 0..v.rows {
                        let sub = &q * &v[(i, t)];
                        v[(i, j)] -= sub;
                    }
                }
                if !s[(t, j)].is_zero() {
                    swap_cols(&mut s, &mut v, t, j);
                    clean = false;
                }
            }
            let col_clear = ((t + 1)..rows).all(|i| s[(i, t)].is_zero());
            let row_clear = ((t + 1)..cols).all(|j| s[(t, j)].is_zero());
            if clean && col_clear && row_clear {
                break;
            }
        }
        if s[(t, t)].numer().is_negative() {
            for j in 0..cols {
                s[(t, j)] = -s[(t, j)].clone();
            }
            for j in 0..u.cols {
                u[(t, j)] = -u[(t, j)].clone();
            }
        }
        t += 1;
    }
    (u, s, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_examples() {
        assert!(is_positive_definite(&SymMatQ::identity(2)));
        let neg = SymMatQ::from_i64_upper(2, &[1, 0, -1]);
        assert!(!is_positive_definite(&neg));
        let a = SymMatQ::from_i64_upper(2, &[5, 2, 1]);
        assert!(is_positive_definite(&a));
    }

    #[test]
    fn inverse_round_trip() {
        let m = QMat::from_i64(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(3));
    }

    #[test]
    fn smith_form_identity_factors() {
        let m = QMat::from_i64(2, 4, &[2, 4, 4, 0, -6, 6, 12, 6]);
        let (u, s, v) = smith_normal_form(&m);
        assert_eq!(u.mul(&m).mul(&v), s);
        assert_eq!(u.det().clone().abs(), rat_i(1).abs());
        assert_eq!(v.det().clone().abs(), rat_i(1).abs());
        for i in 0..2 {
            for j in 0..4 {
                if i != j {
                    assert!(s[(i, j)].is_zero());
                }
            }
        }
    }
}
