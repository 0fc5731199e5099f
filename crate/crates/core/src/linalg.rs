//! Dense complex linear algebra needed by the matrix model: LU with partial
//! pivoting, Hessenberg reduction and a shifted QR eigenvalue iteration.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots with modulus below this make a matrix singular.
pub const SINGULAR_PIVOT: f64 = 1e-300;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                let orow = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    parity: f64,
}

impl Lu {
    /// Fails with [`Error::SingularMatrix`] when a pivot falls below
    /// [`SINGULAR_PIVOT`].
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        Self::factor(a, true)
    }

    fn factor(a: &ComplexMatrix, strict: bool) -> Result<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax < SINGULAR_PIVOT {
                if strict {
                    return Err(Error::SingularMatrix { pivot: pmax, column: k });
                }
                lu[(p, k)] = Complex64::new(f64::EPSILON, 0.0);
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (top, bottom) = lu.data.split_at_mut(i * n);
                let src = &top[k * n + k + 1..k * n + n];
                let dst = &mut bottom[k + 1..n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
        Ok(Lu { lu, perm, parity })
    }

    pub fn determinant(&self) -> Complex64 {
        let n = self.lu.n;
        (0..n).fold(Complex64::new(self.parity, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A x = b` in place.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: Complex64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lu.n;
        let mut x = ComplexMatrix::zeros(n);
        for (dst, &p) in self.perm.iter().enumerate() {
            x.data[dst * n..(dst + 1) * n].copy_from_slice(b.row(p));
        }
        // forward substitution, row operations on whole rows
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (top, bottom) = x.data.split_at_mut(i * n);
                let src = &top[k * n..(k + 1) * n];
                for (d, s) in bottom[..n].iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu[(i, k)];
                let (top, bottom) = x.data.split_at_mut(k * n);
                let src = &bottom[..n];
                for (d, s) in top[i * n..(i + 1) * n].iter_mut().zip(src) {
                    *d -= u * s;
                }
            }
            let inv = Complex64::new(1.0, 0.0) / self.lu[(i, i)];
            for d in &mut x.data[i * n..(i + 1) * n] {
                *d *= inv;
            }
        }
        x
    }
}

pub fn determinant(a: &ComplexMatrix) -> Complex64 {
    match Lu::factor(a, false) {
        Ok(lu) => lu.determinant(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

#[inline]
fn cabs1(c: Complex64) -> f64 {
    c.re.abs() + c.im.abs()
}

/// Reduces `a` to upper Hessenberg form by Householder similarity
/// transformations. Entries below the subdiagonal are set to zero.
pub fn hessenberg(a: &mut ComplexMatrix) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let xnorm = ((k + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        for i in (k + 1)..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = ((k + 1)..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in &mut v[(k + 1)..n] {
            *vi /= vnorm;
        }
        // left: A <- (I - 2 v v^*) A on rows k+1.., columns k..
        for j in k..n {
            let s: Complex64 = ((k + 1)..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            let s2 = s * 2.0;
            for i in (k + 1)..n {
                let vi = v[i];
                a[(i, j)] -= vi * s2;
            }
        }
        // right: A <- A (I - 2 v v^*) on all rows, columns k+1..
        for i in 0..n {
            let row = &mut a.data[i * n..(i + 1) * n];
            let s: Complex64 = ((k + 1)..n).map(|j| row[j] * v[j]).sum();
            let s2 = s * 2.0;
            for j in (k + 1)..n {
                row[j] -= s2 * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// A plane rotation `[[c, s], [-conj(s), c]]` with real `c`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation mapping `(f, g)` to `(r, 0)`.
    fn new(f: Complex64, g: Complex64) -> Self {
        let gn = g.norm();
        if gn == 0.0 {
            return Givens { c: 1.0, s: Complex64::new(0.0, 0.0) };
        }
        let fnorm = f.norm();
        if fnorm == 0.0 {
            return Givens { c: 0.0, s: g.conj() / gn };
        }
        let r = fnorm.hypot(gn);
        let c = fnorm / r;
        let s = (f / fnorm) * g.conj() / r;
        Givens { c, s }
    }
}

/// Eigenvalues of a general complex matrix, with multiplicity.
///
/// Hessenberg reduction followed by single-shift QR sweeps with Wilkinson
/// shifts (and exceptional shifts after 10 and 20 stalled sweeps) on the
/// active unreduced block.
pub fn complex_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.n;
    if m.data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let budget = 30 * n.max(10);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut stalled = 0usize;
    let mut rots: Vec<Givens> = Vec::with_capacity(n);
    loop {
        // look for a negligible subdiagonal entry in the active block
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[(lo, lo - 1)]);
            let mut scale = cabs1(h[(lo, lo)]) + cabs1(h[(lo - 1, lo - 1)]);
            if scale == 0.0 {
                scale = h.frobenius_norm();
            }
            if sub <= f64::EPSILON * scale || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            stalled = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        total += 1;
        if total > budget {
            return Err(Error::ConvergenceFailure { iterations: total });
        }
        stalled += 1;
        let shift = if stalled == 10 {
            h[(lo, lo)] + 0.75 * h[(lo + 1, lo)].re.abs()
        } else if stalled == 20 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        if stalled >= 30 {
            stalled = 0;
        }
        qr_sweep(&mut h, lo, hi, shift, &mut rots);
    }
    Ok(eig)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step `H - mu I = QR`, `H <- RQ + mu I` on rows and
/// columns `lo..=hi`.
fn qr_sweep(h: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64, rots: &mut Vec<Givens>) {
    let n = h.n;
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    rots.clear();
    for k in lo..hi {
        let g = Givens::new(h[(k, k)], h[(k + 1, k)]);
        // rows k, k+1, columns k..=hi
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * g.c + g.s * y;
            h[(k + 1, j)] = -g.s.conj() * x + y * g.c;
        }
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        rots.push(g);
    }
    for (idx, g) in rots.iter().enumerate() {
        let k = lo + idx;
        // columns k, k+1 multiplied by G^*, rows lo..=min(k+1, hi)
        let last = (k + 1).min(hi);
        for i in lo..=last {
            let row = &mut h.data[i * n..(i + 1) * n];
            let x = row[k];
            let y = row[k + 1];
            row[k] = x * g.c + y * g.s.conj();
            row[k + 1] = -x * g.s + y * g.c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

/// Largest relative residual `|M v - lambda v| / (|M| |v|)` over the given
/// eigenvalues, with `v` recomputed by inverse iteration. Intended for
/// validating small matrices.
pub fn eigen_residual(m: &ComplexMatrix, eigenvalues: &[Complex64]) -> f64 {
    let n = m.n;
    let mnorm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for &lambda in eigenvalues {
        let perturb = Complex64::new(mnorm * 1e-13, mnorm * 1e-13);
        let shifted = ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                m[(i, j)] - lambda - perturb
            } else {
                m[(i, j)]
            }
        });
        let lu = Lu::factor(&shifted, false).expect("non-strict factorization");
        let mut v: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64)).collect();
        for _ in 0..3 {
            v = lu.solve_vec(&v);
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                break;
            }
            for c in &mut v {
                *c /= norm;
            }
        }
        let mv = m.mul_vec(&v);
        let r = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let vn = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r / (mnorm * vn));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, |_, _| {
            c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_and_swap_examples() {
        let d = ComplexMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]).unwrap();
        let e = sorted(complex_eigenvalues(&d).unwrap());
        assert!((e[0] - c(0.0, 2.0)).norm() < 1e-14);
        assert!((e[1] - c(1.0, 0.0)).norm() < 1e-14);

        let p = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e = sorted(complex_eigenvalues(&p).unwrap());
        assert!((e[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalue_product_matches_lu_determinant() {
        for seed in 0..5 {
            let m = random_matrix(8, seed);
            let prod = complex_eigenvalues(&m).unwrap().into_iter().fold(c(1.0, 0.0), |a, b| a * b);
            let det = determinant(&m);
            assert!((prod - det).norm() <= 1e-6 * det.norm(), "{prod} vs {det}");
        }
    }

    #[test]
    fn trace_is_preserved_and_residuals_small() {
        for (n, seed) in [(1, 3), (3, 4), (16, 5), (64, 6)] {
            let m = random_matrix(n, seed);
            let e = complex_eigenvalues(&m).unwrap();
            assert_eq!(e.len(), n);
            let tr: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
            let se: Complex64 = e.iter().sum();
            assert!((tr - se).norm() < 1e-9 * (1.0 + tr.norm()) * n as f64);
            assert!(eigen_residual(&m, &e) <= 1e-8, "n = {n}");
        }
    }

    #[test]
    fn hessenberg_preserves_frobenius_norm() {
        let m = random_matrix(12, 9);
        let mut h = m.clone();
        hessenberg(&mut h);
        for i in 2..12 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }
        assert!((h.frobenius_norm() - m.frobenius_norm()).abs() < 1e-12 * m.frobenius_norm());
    }

    #[test]
    fn lu_solve_recovers_product() {
        let a = random_matrix(10, 11);
        let b = random_matrix(10, 12);
        let x = Lu::new(&a).unwrap().solve(&b);
        let ax = a.mul(&x);
        for (u, v) in ax.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).norm() < 1e-11);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let z = ComplexMatrix::zeros(3);
        assert!(matches!(Lu::new(&z), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn defective_and_repeated_eigenvalues() {
        // Jordan block and a scalar multiple of the identity
        let j = ComplexMatrix::new(2, vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        for e in complex_eigenvalues(&j).unwrap() {
            assert!((e - c(2.0, 0.0)).norm() < 1e-7);
        }
        let s = ComplexMatrix::from_fn(5, |i, k| if i == k { c(0.5, -1.0) } else { c(0.0, 0.0) });
        for e in complex_eigenvalues(&s).unwrap() {
            assert!((e - c(0.5, -1.0)).norm() < 1e-14);
        }
    }
}
