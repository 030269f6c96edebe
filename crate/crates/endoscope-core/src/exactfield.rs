//! Finite fields `F_{p^e}` and dense matrices over them.
//!
//! Elements are stored as `u32` codes: the residue polynomial
//! `c_0 + c_1 x + ... + c_{e-1} x^{e-1}` is encoded as `sum c_i p^i`.
//! Codes below `p` are exactly the prime-field constants, so a matrix over
//! `F_p` can be reinterpreted over any `F_{p^e}` without rewriting entries.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

pub type Scalar = u32;

const MAX_PRIME: u32 = 65_521;
const MAX_EXT_ORDER: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a supported prime")]
    NotPrime(u32),
    #[error("extension F_{{{p}^{e}}} is outside the supported range")]
    TooLarge { p: u32, e: u32 },
    #[error("matrix is not nilpotent of order {p}")]
    NotNilpotentOfOrderP { p: u32 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

struct FieldData {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

/// A finite field. Cheap to clone; instances for the same `(p, e)` share tables.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.e == other.0.e
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.e == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{}", self.0.p, self.0.e)
        }
    }
}

fn registry() -> &'static Mutex<HashMap<(u32, u32), Field>> {
    static REG: OnceLock<Mutex<HashMap<(u32, u32), Field>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

// Polynomials over F_p as coefficient vectors, lowest degree first.
fn poly_trim(a: &mut Vec<u32>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let c = (r[dr] as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = dr - dm;
        for (i, &mi) in m.iter().enumerate() {
            let sub = (c as u64 * mi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        poly_trim(&mut r);
        if r.len() == dm + 1 && dm == 0 {
            break;
        }
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(a: u32, mut k: u32, p: u32) -> u32 {
    let mut base = a as u64 % p as u64;
    let mut acc = 1u64 % p as u64;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        k >>= 1;
    }
    acc as u32
}

/// Irreducibility of a monic polynomial by trial division with every monic
/// polynomial of degree `1..=deg/2`.
pub fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut f = vec![0u32; d + 1];
            let mut c = code;
            for slot in f.iter_mut().take(d) {
                *slot = (c % p as u64) as u32;
                c /= p as u64;
            }
            f[d] = 1;
            let r = poly_rem(m, &f, p);
            if r.iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least monic irreducible of degree `e` over `F_p`,
/// comparing coefficient vectors from `x^{e-1}` down to the constant term.
pub fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    let e = e as usize;
    let count = (p as u64).pow(e as u32);
    for code in 0..count {
        // code digits: most significant digit is the x^{e-1} coefficient.
        let mut m = vec![0u32; e + 1];
        let mut c = code;
        for i in 0..e {
            m[i] = (c % p as u64) as u32;
            c /= p as u64;
        }
        m[e] = 1;
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    pub fn prime(p: u32) -> Result<Field, FieldError> {
        Field::new(p, 1)
    }

    pub fn new(p: u32, e: u32) -> Result<Field, FieldError> {
        if !is_prime(p) || p > MAX_PRIME {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::TooLarge { p, e });
        }
        if e > 1 {
            let q = (p as u64).checked_pow(e);
            if q.is_none_or(|q| q > MAX_EXT_ORDER as u64) {
                return Err(FieldError::TooLarge { p, e });
            }
        }
        let mut reg = registry().lock().unwrap();
        if let Some(f) = reg.get(&(p, e)) {
            return Ok(f.clone());
        }
        let f = Field(Arc::new(Self::build(p, e)));
        reg.insert((p, e), f.clone());
        Ok(f)
    }

    fn build(p: u32, e: u32) -> FieldData {
        if e == 1 {
            let inv = (0..p).map(|a| if a == 0 { 0 } else { inv_mod(a, p) }).collect();
            return FieldData { p, e, q: p, modulus: vec![0, 1], add: vec![], mul: vec![], inv };
        }
        let modulus = least_irreducible(p, e);
        let q = p.pow(e);
        let digits = |a: u32| -> Vec<u32> {
            let mut v = vec![0u32; e as usize];
            let mut c = a;
            for d in v.iter_mut() {
                *d = c % p;
                c /= p;
            }
            v
        };
        let encode = |v: &[u32]| -> u32 { v.iter().rev().fold(0, |acc, &d| acc * p + d) };
        let qs = q as usize;
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = encode(&s);
                let mut prod = vec![0u32; 2 * e as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = poly_rem(&prod, &modulus, p);
                r.resize(e as usize, 0);
                mul[a as usize * qs + b as usize] = encode(&r);
            }
        }
        let mut inv = vec![0u32; qs];
        for a in 1..q {
            for b in 1..q {
                if mul[a as usize * qs + b as usize] == 1 {
                    inv[a as usize] = b;
                    break;
                }
            }
        }
        FieldData { p, e, q, modulus, add, mul, inv }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }
    #[inline]
    pub fn e(&self) -> u32 {
        self.0.e
    }
    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }
    #[inline]
    pub fn is_prime_field(&self) -> bool {
        self.0.e == 1
    }
    /// Defining polynomial, lowest coefficient first (monic).
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// The prime subfield.
    pub fn prime_subfield(&self) -> Field {
        Field::prime(self.p()).expect("prime already validated")
    }

    #[inline]
    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        let d = &*self.0;
        if d.e == 1 {
            let s = a + b;
            if s >= d.p {
                s - d.p
            } else {
                s
            }
        } else {
            d.add[(a * d.q + b) as usize]
        }
    }
    #[inline]
    pub fn neg(&self, a: Scalar) -> Scalar {
        let d = &*self.0;
        if d.e == 1 {
            if a == 0 {
                0
            } else {
                d.p - a
            }
        } else {
            // negate digit-wise
            let mut out = 0u32;
            let mut scale = 1u32;
            let mut c = a;
            for _ in 0..d.e {
                let digit = c % d.p;
                c /= d.p;
                out += ((d.p - digit) % d.p) * scale;
                scale *= d.p;
            }
            out
        }
    }
    #[inline]
    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        let d = &*self.0;
        if d.e == 1 {
            ((a as u64 * b as u64) % d.p as u64) as u32
        } else {
            d.mul[(a * d.q + b) as usize]
        }
    }
    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: Scalar) -> Option<Scalar> {
        if a == 0 {
            None
        } else {
            Some(self.0.inv[a as usize])
        }
    }
    pub fn pow(&self, a: Scalar, mut k: u64) -> Scalar {
        let mut base = a;
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }
    /// Image of an integer in the prime subfield.
    pub fn from_i64(&self, x: i64) -> Scalar {
        x.rem_euclid(self.p() as i64) as u32
    }
    /// Interpret a prime-field code as a signed representative in `(-p/2, p/2]`.
    pub fn to_signed(&self, a: Scalar) -> i64 {
        let p = self.p() as i64;
        let a = a as i64;
        if a > p / 2 {
            a - p
        } else {
            a
        }
    }
    pub fn elements(&self) -> std::ops::Range<Scalar> {
        0..self.q()
    }

    /// `dst[i] += c * src[i]`.
    #[inline]
    pub fn axpy(&self, dst: &mut [Scalar], src: &[Scalar], c: Scalar) {
        if c == 0 {
            return;
        }
        let d = &*self.0;
        if d.e == 1 {
            let p = d.p as u64;
            let c = c as u64;
            for (x, &y) in dst.iter_mut().zip(src) {
                if y != 0 {
                    *x = ((*x as u64 + c * y as u64) % p) as u32;
                }
            }
        } else {
            let q = d.q as usize;
            let row = &d.mul[c as usize * q..(c as usize + 1) * q];
            for (x, &y) in dst.iter_mut().zip(src) {
                if y != 0 {
                    *x = d.add[*x as usize * q + row[y as usize] as usize];
                }
            }
        }
    }

    #[inline]
    pub fn scale_slice(&self, v: &mut [Scalar], c: Scalar) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }
}

/// Dense matrix over a finite field, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Result of row reduction: the reduced matrix and its pivot columns.
pub struct Echelon {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        assert!(data.iter().all(|&x| x < field.q()), "entry outside the field");
        Matrix { field: field.clone(), rows, cols, data }
    }

    /// Build from integer rows, reducing mod `p`.
    pub fn from_i64_rows(field: &Field, rows: &[Vec<i64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| field.from_i64(x)));
        }
        Matrix { field: field.clone(), rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: &Field, nrows: usize, cols: &[Vec<Scalar>]) -> Matrix {
        let mut m = Matrix::zeros(field, nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows);
            for (i, &x) in col.iter().enumerate() {
                m.data[i * m.cols + j] = x;
            }
        }
        m
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn data(&self) -> &[Scalar] {
        &self.data
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert!(v < self.field.q());
        self.data[i * self.cols + j] = v;
    }
    #[inline]
    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }

    /// Reinterpret entries in another field of the same characteristic.
    /// Only valid when every entry is a prime-field constant or the target
    /// is the same field.
    pub fn over(&self, field: &Field) -> Matrix {
        assert_eq!(self.field.p(), field.p(), "characteristic mismatch");
        if self.field == *field {
            return self.clone();
        }
        assert!(self.data.iter().all(|&x| x < field.p()), "entries outside the prime field");
        Matrix { field: field.clone(), rows: self.rows, cols: self.cols, data: self.data.clone() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: Scalar) -> Matrix {
        let f = &self.field;
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        let data = self.data.iter().map(|&a| f.neg(a)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Matrix, c: Scalar) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.field.axpy(&mut self.data, &other.data, c);
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        assert!(self.field == other.field, "field mismatch in mul");
        let (n, m) = (self.rows, other.cols);
        let mut out = Matrix::zeros(&self.field, n, m);
        if self.field.is_prime_field() {
            let p = self.field.p() as u64;
            // Accumulate without reduction; p < 2^16 keeps each product below 2^32.
            let mut acc = vec![0u64; m];
            for i in 0..n {
                acc.iter_mut().for_each(|x| *x = 0);
                let arow = self.row(i);
                let mut pending = 0u32;
                for (k, &a) in arow.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    let brow = other.row(k);
                    let a = a as u64;
                    for (x, &b) in acc.iter_mut().zip(brow) {
                        *x += a * b as u64;
                    }
                    pending += 1;
                    if pending == 1 << 30 {
                        acc.iter_mut().for_each(|x| *x %= p);
                        pending = 0;
                    }
                }
                let orow = &mut out.data[i * m..(i + 1) * m];
                for (o, &x) in orow.iter_mut().zip(&acc) {
                    *o = (x % p) as u32;
                }
            }
        } else {
            for i in 0..n {
                for k in 0..self.cols {
                    let a = self.data[i * self.cols + k];
                    if a == 0 {
                        continue;
                    }
                    let (head, _) = out.data.split_at_mut((i + 1) * m);
                    let orow = &mut head[i * m..];
                    self.field.axpy(orow, other.row(k), a);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        let f = &self.field;
        let mut out = vec![0; self.rows];
        if f.is_prime_field() {
            let p = f.p() as u64;
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = 0u64;
                for (&a, &b) in self.row(i).iter().zip(v) {
                    acc += a as u64 * b as u64;
                }
                *o = (acc % p) as u32;
            }
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = 0;
                for (&a, &b) in self.row(i).iter().zip(v) {
                    if a != 0 && b != 0 {
                        acc = f.add(acc, f.mul(a, b));
                    }
                }
                *o = acc;
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0; self.cols];
        for (k, &a) in v.iter().enumerate() {
            if a != 0 {
                self.field.axpy(&mut out, self.row(k), a);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(&self.field, self.rows);
        for _ in 0..k {
            acc = self.mul(&acc);
        }
        acc
    }

    /// Kronecker product: `(a ⊗ b)[(i,k),(j,l)] = a[i,j] b[k,l]`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let f = &self.field;
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Matrix::zeros(f, r1 * r2, c1 * c2);
        let oc = c1 * c2;
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.data[(i * r2 + k) * oc + j * c2 + l] = f.mul(a, b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut out = Matrix::zeros(&self.field, self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        out
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + jj] = self.get(i, j);
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { field: self.field.clone(), rows: idx.len(), cols: self.cols, data }
    }

    /// Reduced row echelon form with deterministic left-to-right pivoting.
    pub fn rref(&self) -> Echelon {
        let mut m = self.clone();
        let pivots = m.rref_in_place(true);
        Echelon { reduced: m, pivots }
    }

    fn rref_in_place(&mut self, reduce_above: bool) -> Vec<usize> {
        let f = self.field.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    self.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.data[r * cols + c]).unwrap();
            f.scale_slice(&mut self.data[r * cols..(r + 1) * cols], inv);
            let pivot_row: Vec<Scalar> = self.data[r * cols..(r + 1) * cols].to_vec();
            let start = if reduce_above { 0 } else { r + 1 };
            for i in start..rows {
                if i == r {
                    continue;
                }
                let x = self.data[i * cols + c];
                if x != 0 {
                    let neg = f.neg(x);
                    f.axpy(&mut self.data[i * cols..(i + 1) * cols], &pivot_row, neg);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        // Eliminate along the shorter side.
        if self.rows > self.cols {
            let mut t = self.transpose();
            t.rref_in_place(false).len()
        } else {
            let mut m = self.clone();
            m.rref_in_place(false).len()
        }
    }

    /// Basis of the right nullspace, as the columns of the returned matrix.
    pub fn nullspace(&self) -> Matrix {
        let ech = self.rref();
        let cols = self.cols;
        let free: Vec<usize> = (0..cols).filter(|c| !ech.pivots.contains(c)).collect();
        let mut out = Matrix::zeros(&self.field, cols, free.len());
        let f = &self.field;
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, 1);
            for (r, &pc) in ech.pivots.iter().enumerate() {
                let x = ech.reduced.get(r, fc);
                if x != 0 {
                    out.set(pc, k, f.neg(x));
                }
            }
        }
        out
    }

    /// Indices of a maximal set of linearly independent columns (leftmost first).
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut m = self.clone();
        m.rref_in_place(false)
    }

    /// Columns forming a basis of the column space.
    pub fn column_basis(&self) -> Matrix {
        let piv = self.pivot_columns();
        self.select_columns(&piv)
    }

    /// Solve `self * x = b` for a matrix right-hand side; `None` if inconsistent.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let ech = aug.rref();
        let n = self.cols;
        if ech.pivots.iter().any(|&c| c >= n) {
            return None;
        }
        let mut x = Matrix::zeros(&self.field, n, b.cols);
        for (r, &pc) in ech.pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, ech.reduced.get(r, n + j));
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(&self.field, n));
        let ech = aug.rref();
        if ech.pivots.len() < n || ech.pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(&self.field, n, n);
        for i in 0..n {
            inv.data[i * n..(i + 1) * n].copy_from_slice(&ech.reduced.row(i)[n..]);
        }
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn det(&self) -> Scalar {
        assert!(self.is_square());
        let f = self.field.clone();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| m.data[i * n + c] != 0) else {
                return 0;
            };
            if pr != c {
                for j in 0..n {
                    m.data.swap(pr * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let piv = m.data[c * n + c];
            det = f.mul(det, piv);
            let inv = f.inv(piv).unwrap();
            let prow: Vec<Scalar> = m.data[c * n..(c + 1) * n].to_vec();
            for i in c + 1..n {
                let x = m.data[i * n + c];
                if x != 0 {
                    let coef = f.neg(f.mul(x, inv));
                    f.axpy(&mut m.data[i * n..(i + 1) * n], &prow, coef);
                }
            }
        }
        det
    }

    /// Commutator `self*other - other*self`.
    pub fn commutator(&self, other: &Matrix) -> Matrix {
        self.mul(other).sub(&other.mul(self))
    }
}

/// Incrementally maintained row space in reduced form.
#[derive(Clone)]
pub struct RowSpace {
    field: Field,
    width: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(field: &Field, width: usize) -> RowSpace {
        RowSpace { field: field.clone(), width, rows: Vec::new(), pivots: Vec::new() }
    }
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
    pub fn width(&self) -> usize {
        self.width
    }
    fn reduce(&self, v: &mut [Scalar]) {
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let x = v[pc];
            if x != 0 {
                let neg = self.field.neg(x);
                self.field.axpy(v, row, neg);
            }
        }
    }
    pub fn contains(&self, v: &[Scalar]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }
    /// Insert `v`; returns true if it enlarged the space.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.width);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(pc) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.field.inv(w[pc]).unwrap();
        self.field.scale_slice(&mut w, inv);
        for row in self.rows.iter_mut() {
            let x = row[pc];
            if x != 0 {
                let neg = self.field.neg(x);
                self.field.axpy(row, &w, neg);
            }
        }
        self.rows.push(w);
        self.pivots.push(pc);
        true
    }
    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.rows
    }
    pub fn to_matrix(&self) -> Matrix {
        let data = self.rows.iter().flatten().copied().collect();
        Matrix::from_vec(&self.field, self.rows.len(), self.width, data)
    }
}

/// Jordan type of a nilpotent operator with blocks of size at most `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct JordanType {
    pub p: u32,
    /// `counts[i]` is the number of blocks of size `i + 1`.
    pub counts: Vec<usize>,
}

impl JordanType {
    pub fn from_counts(p: u32, counts: Vec<usize>) -> JordanType {
        assert_eq!(counts.len(), p as usize);
        JordanType { p, counts }
    }
    /// Jordan type with the given block sizes.
    pub fn from_blocks(p: u32, blocks: &[usize]) -> JordanType {
        let mut counts = vec![0; p as usize];
        for &b in blocks {
            assert!(b >= 1 && b <= p as usize);
            counts[b - 1] += 1;
        }
        JordanType { p, counts }
    }
    pub fn count(&self, size: usize) -> usize {
        self.counts[size - 1]
    }
    pub fn dim(&self) -> usize {
        self.counts.iter().enumerate().map(|(i, &a)| (i + 1) * a).sum()
    }
    /// `[1] + m[p]` or `[p-1] + m[p]`.
    pub fn is_endotrivial_shape(&self) -> bool {
        let p = self.p as usize;
        let others: Vec<usize> = (1..p).filter(|&s| self.count(s) > 0).collect();
        let small = |s: usize| others == [s] && self.count(s) == 1;
        if p == 1 {
            return false;
        }
        small(1) || small(p - 1)
    }
}

impl fmt::Display for JordanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (1..=self.counts.len())
            .rev()
            .filter(|&s| self.count(s) > 0)
            .map(|s| format!("{}[{}]", self.count(s), s))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// Jordan type read off from the ranks of powers:
/// `a_i = r_{i-1} - 2 r_i + r_{i+1}`.
pub fn nilpotent_jordan_type(m: &Matrix, p: u32) -> Result<JordanType, FieldError> {
    if !m.is_square() {
        return Err(FieldError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let d = m.rows();
    let mut ranks = vec![d];
    let mut power = m.clone();
    for i in 1..=p {
        if i > 1 {
            power = m.mul(&power);
        }
        ranks.push(if i == p { usize::MAX } else { power.rank() });
    }
    if !power.is_zero() {
        return Err(FieldError::NotNilpotentOfOrderP { p });
    }
    ranks[p as usize] = 0;
    ranks.push(0);
    let counts = (1..=p as usize).map(|i| ranks[i - 1] + ranks[i + 1] - 2 * ranks[i]).collect();
    Ok(JordanType { p, counts })
}

/// Ranks `r_0 = d, r_1, ..., r_p` of the powers of `m`.
pub fn rank_sequence(m: &Matrix, p: u32) -> Vec<usize> {
    let mut ranks = vec![m.rows()];
    let mut power = m.clone();
    for i in 1..=p {
        if i > 1 {
            power = m.mul(&power);
        }
        ranks.push(power.rank());
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn rank_examples() {
        let f2 = f(2);
        assert_eq!(Matrix::zeros(&f2, 3, 3).rank(), 0);
        assert_eq!(Matrix::identity(&f2, 4).rank(), 4);
        assert_eq!(Matrix::from_i64_rows(&f2, &[vec![1, 1], vec![1, 1]]).rank(), 1);
    }

    #[test]
    fn least_irreducibles_are_the_expected_ones() {
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(least_irreducible(2, 3), vec![1, 1, 0, 1]);
        assert_eq!(least_irreducible(5, 2), vec![2, 0, 1]);
    }

    #[test]
    fn extension_inverse_table_is_complete() {
        for (p, e) in [(2, 2), (2, 3), (3, 2), (5, 2), (3, 3)] {
            let k = Field::new(p, e).unwrap();
            for a in 1..k.q() {
                assert_eq!(k.mul(a, k.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn rejects_non_primes() {
        assert!(Field::prime(4).is_err());
        assert!(Field::new(2, 11).is_err());
    }

    #[test]
    fn jordan_of_zero_and_full_block() {
        let f3 = f(3);
        let z = Matrix::zeros(&f3, 3, 3);
        assert_eq!(nilpotent_jordan_type(&z, 3).unwrap(), JordanType::from_blocks(3, &[1, 1, 1]));
        let mut j = Matrix::zeros(&f3, 3, 3);
        j.set(1, 0, 1);
        j.set(2, 1, 1);
        assert_eq!(nilpotent_jordan_type(&j, 3).unwrap(), JordanType::from_blocks(3, &[3]));
        assert_eq!(nilpotent_jordan_type(&j, 3).unwrap().to_string(), "1[3]");
    }

    #[test]
    fn jordan_rejects_non_nilpotent() {
        let f2 = f(2);
        let i = Matrix::identity(&f2, 2);
        assert_eq!(nilpotent_jordan_type(&i, 2), Err(FieldError::NotNilpotentOfOrderP { p: 2 }));
    }

    #[test]
    fn jordan_of_primitive_tensor_square() {
        // t acting on k[t]/(t^p) ⊗ k[t]/(t^p) as t⊗1 + 1⊗t.
        for p in [2u32, 3, 5] {
            let fp = f(p);
            let mut j = Matrix::zeros(&fp, p as usize, p as usize);
            for i in 1..p as usize {
                j.set(i, i - 1, 1);
            }
            let i = Matrix::identity(&fp, p as usize);
            let t = j.kron(&i).add(&i.kron(&j));
            // oracle: ranks of powers computed directly, then a_i from the ranks
            let mut ranks = vec![(p * p) as usize];
            let mut pw = Matrix::identity(&fp, (p * p) as usize);
            for _ in 0..=p {
                pw = pw.mul(&t);
                ranks.push(pw.rank());
            }
            let counts: Vec<usize> =
                (1..=p as usize).map(|s| ranks[s - 1] + ranks[s + 1] - 2 * ranks[s]).collect();
            let jt = nilpotent_jordan_type(&t, p).unwrap();
            assert_eq!(jt.counts, counts);
            // the tensor square of the regular module is free
            assert_eq!(jt, JordanType::from_blocks(p, &vec![p as usize; p as usize]));
            if p == 2 {
                assert_eq!(ranks[..3], [4, 2, 0]);
                assert_eq!(jt.to_string(), "2[2]");
            }
        }
    }

    #[test]
    fn nullspace_and_solve_agree() {
        let f5 = f(5);
        let a = Matrix::from_i64_rows(&f5, &[vec![1, 2, 3, 4], vec![2, 4, 1, 3], vec![3, 1, 4, 2]]);
        let ns = a.nullspace();
        assert!(a.mul(&ns).is_zero());
        assert_eq!(ns.cols() + a.rank(), 4);
        let b = Matrix::from_i64_rows(&f5, &[vec![1], vec![0], vec![2]]);
        if let Some(x) = a.solve(&b) {
            assert_eq!(a.mul(&x), b);
        }
    }

    #[test]
    fn inverse_and_det() {
        let k = Field::new(2, 2).unwrap();
        let a = Matrix::from_vec(&k, 2, 2, vec![1, 2, 2, 1]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(&k, 2));
        assert_ne!(a.det(), 0);
        let s = Matrix::from_vec(&k, 2, 2, vec![2, 3, 2, 3]);
        assert_eq!(s.det(), 0);
        assert!(s.inverse().is_none());
    }

    #[test]
    fn endotrivial_shapes() {
        assert!(JordanType::from_blocks(3, &[3, 3, 1]).is_endotrivial_shape());
        assert!(JordanType::from_blocks(3, &[3, 2]).is_endotrivial_shape());
        assert!(!JordanType::from_blocks(3, &[3, 1, 1]).is_endotrivial_shape());
        assert!(!JordanType::from_blocks(2, &[1, 1]).is_endotrivial_shape());
        assert!(JordanType::from_blocks(2, &[2, 2, 1]).is_endotrivial_shape());
    }

    #[test]
    fn row_space_incremental() {
        let f3 = f(3);
        let mut rs = RowSpace::new(&f3, 3);
        assert!(rs.insert(&[1, 2, 0]));
        assert!(rs.insert(&[0, 1, 1]));
        assert!(!rs.insert(&[1, 0, 1])); // 1,2,0 + 0,1,1 = 1,0,1 mod 3
        assert!(rs.contains(&[2, 1, 0]));
        assert_eq!(rs.dim(), 2);
    }
}
