//! Exact samplers for the spherical ensemble and the uniform baseline.
//!
//! Two independent routes produce the ensemble: eigenvalues of `A^-1 B` for
//! complex Ginibre `A`, `B`, and the sequential (HKPV) algorithm for the
//! projection DPP with kernel `(1 + z conj(w))^(n-1)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{inverse_project, Configuration, PlanePoint, SpherePoint};
use crate::linalg::{self, ComplexMatrix, Lu};
use crate::rng::RngSeed;
use crate::special;

/// Proposals allowed for a single HKPV step before giving up.
pub const REJECTION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Eigenvalues of `A^-1 B`.
    Matrix,
    /// Sequential projection-DPP sampler.
    Dpp,
    /// Independent uniform points.
    Iid,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [SamplerKind::Matrix, SamplerKind::Dpp, SamplerKind::Iid];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Matrix => "matrix",
            SamplerKind::Dpp => "dpp",
            SamplerKind::Iid => "iid",
        }
    }

    /// Whether the sampler produces the spherical ensemble.
    pub fn is_ensemble(self) -> bool {
        !matches!(self, SamplerKind::Iid)
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sampler `{s}` (expected matrix, dpp or iid)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub kind: SamplerKind,
}

impl EnsembleSpec {
    pub fn new(n: usize, kind: SamplerKind) -> Result<Self> {
        check_n(n)?;
        Ok(EnsembleSpec { n, kind })
    }

    pub fn sample(&self, seed: RngSeed) -> Result<Configuration> {
        sample(self.kind, self.n, seed)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(())
}

/// Dispatches to the sampler named by `kind`.
pub fn sample(kind: SamplerKind, n: usize, seed: RngSeed) -> Result<Configuration> {
    match kind {
        SamplerKind::Matrix => sample_matrix_model(n, seed),
        SamplerKind::Dpp => sample_dpp_hkpv(n, seed),
        SamplerKind::Iid => sample_uniform_iid(n, seed),
    }
}

fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(scale * re, scale * im)
    })
}

/// `n x n` matrix of independent standard complex Gaussians (`E|a|^2 = 1`).
pub fn sample_gaussian_matrix(n: usize, seed: RngSeed) -> Result<ComplexMatrix> {
    check_n(n)?;
    Ok(gaussian_matrix(n, &mut seed.rng()))
}

/// All eigenvalues of `m`, as plane points.
pub fn complex_eigenvalues(m: &ComplexMatrix) -> Result<Vec<PlanePoint>> {
    Ok(linalg::complex_eigenvalues(m)?.into_iter().map(PlanePoint::from).collect())
}

/// Eigenvalues of `A^-1 B` mapped to the sphere. `A` is factored, never inverted.
pub fn sample_matrix_model(n: usize, seed: RngSeed) -> Result<Configuration> {
    check_n(n)?;
    let mut rng = seed.rng();
    let a = gaussian_matrix(n, &mut rng);
    let b = gaussian_matrix(n, &mut rng);
    let x = Lu::new(&a)?.solve(&b);
    let points = complex_eigenvalues(&x)?.iter().map(inverse_project).collect();
    Configuration::new(points, SamplerKind::Matrix.name(), seed.0)
}

fn uniform_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    SpherePoint::from_height_azimuth(z, phi)
}

pub fn sample_uniform_iid(n: usize, seed: RngSeed) -> Result<Configuration> {
    check_n(n)?;
    let mut rng = seed.rng();
    let points = (0..n).map(|_| uniform_point(&mut rng)).collect();
    Configuration::new(points, SamplerKind::Iid.name(), seed.0)
}

/// Coefficients of the normalized kernel section at a point of the sphere.
///
/// With `p = (1 + z) / 2` the point's stereographic image has
/// `|w|^2 / (1 + |w|^2) = p`, so the unit vector
/// `v_k = sqrt(C(n-1, k)) w^k / (1 + |w|^2)^((n-1)/2)` has
/// `|v_k|^2 = Bin(k; n - 1, p)` and phase `k * phi`. Only the band where
/// `|v_k|` exceeds `1e-20 |v|_max` is kept.
struct Section {
    lo: usize,
    coeffs: Vec<Complex64>,
}

fn kernel_section(n: usize, p: &SpherePoint) -> Section {
    let deg = n - 1;
    if deg == 0 {
        return Section { lo: 0, coeffs: vec![Complex64::new(1.0, 0.0)] };
    }
    let pz = ((1.0 + p.z()) / 2.0).clamp(0.0, 1.0);
    let qz = ((1.0 - p.z()) / 2.0).clamp(0.0, 1.0);
    let rho = p.x().hypot(p.y());
    let phase = if rho > 0.0 { Complex64::new(p.x() / rho, p.y() / rho) } else { Complex64::new(1.0, 0.0) };
    let df = deg as f64;
    let peak = ((df + 1.0) * pz).floor().min(df) as usize;
    let mag_peak = (0.5 * special::ln_dbinom(peak as f64, df, pz)).exp();
    let cutoff = 1e-20 * mag_peak;

    // |v_{k+1}| / |v_k| = sqrt((deg - k) / (k + 1) * p / q)
    let mut up = Vec::new();
    let mut m = mag_peak;
    let mut k = peak;
    while k < deg {
        m *= (((deg - k) as f64 / (k + 1) as f64) * (pz / qz)).sqrt();
        k += 1;
        if !(m > cutoff) || !m.is_finite() {
            break;
        }
        up.push(m);
    }
    let mut down = Vec::new();
    let mut m = mag_peak;
    let mut k = peak;
    while k > 0 {
        m *= ((k as f64 / (deg - k + 1) as f64) * (qz / pz)).sqrt();
        k -= 1;
        if !(m > cutoff) || !m.is_finite() {
            break;
        }
        down.push(m);
    }
    let lo = peak - down.len();
    let mags = down.iter().rev().chain(std::iter::once(&mag_peak)).chain(up.iter());
    let mut coeffs = Vec::with_capacity(down.len() + up.len() + 1);
    let mut rot = phase.powu(lo as u32);
    for &mag in mags {
        coeffs.push(rot * mag);
        rot *= phase;
    }
    Section { lo, coeffs }
}

/// Exact sample of the rank-`n` projection DPP by the sequential algorithm.
///
/// The remaining kernel is represented by an orthonormal basis `V`
/// (`n x m`, column-major) of the coefficient space. A uniform proposal `p`
/// is accepted with probability `|V^* v(p)|^2`; the accepted direction is
/// then split off `V` with a Householder reflection.
pub fn sample_dpp_hkpv(n: usize, seed: RngSeed) -> Result<Configuration> {
    check_n(n)?;
    let mut rng = seed.rng();
    let zero = Complex64::new(0.0, 0.0);
    let mut basis = vec![zero; n * n];
    for i in 0..n {
        basis[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let mut points = Vec::with_capacity(n);
    let mut w = vec![zero; n];
    let mut vu = vec![zero; n];
    for m in (1..=n).rev() {
        let step = n - m;
        let mut proposals = 0u64;
        let accepted = loop {
            proposals += 1;
            if proposals > REJECTION_BUDGET {
                return Err(Error::RejectionBudgetExceeded { step, proposals: proposals - 1 });
            }
            let p = uniform_point(&mut rng);
            let u: f64 = rng.random();
            if m == n {
                // the full kernel accepts every proposal
                w.iter_mut().for_each(|x| *x = zero);
                let sec = kernel_section(n, &p);
                w[sec.lo..sec.lo + sec.coeffs.len()].copy_from_slice(&sec.coeffs);
                break p;
            }
            let sec = kernel_section(n, &p);
            let band = sec.lo..sec.lo + sec.coeffs.len();
            let mut norm2 = 0.0;
            for c in 0..m {
                let col = &basis[c * n..(c + 1) * n][band.clone()];
                let s: Complex64 = col.iter().zip(&sec.coeffs).map(|(a, b)| a.conj() * b).sum();
                w[c] = s;
                norm2 += s.norm_sqr();
            }
            if u < norm2 {
                break p;
            }
        };
        points.push(accepted);
        if m == 1 {
            break;
        }
        // Householder reflection H = I - 2 u u^* with H w = beta e_m
        let wm = &mut w[..m];
        let norm = wm.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let last = wm[m - 1];
        let unit = if last.norm() > 0.0 { last / last.norm() } else { Complex64::new(1.0, 0.0) };
        wm[m - 1] += unit * norm;
        let unorm = wm.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if unorm == 0.0 {
            continue;
        }
        wm.iter_mut().for_each(|x| *x /= unorm);
        // V <- V - 2 (V u) u^*, then drop the last column
        vu.iter_mut().for_each(|x| *x = zero);
        for (c, uc) in wm.iter().enumerate() {
            if *uc == zero {
                continue;
            }
            let col = &basis[c * n..(c + 1) * n];
            for (acc, v) in vu.iter_mut().zip(col) {
                *acc += v * uc;
            }
        }
        for (c, uc) in wm[..m - 1].iter().enumerate() {
            let f = uc.conj() * 2.0;
            if f == zero {
                continue;
            }
            let col = &mut basis[c * n..(c + 1) * n];
            for (v, a) in col.iter_mut().zip(&vu) {
                *v -= a * f;
            }
        }
    }
    Configuration::new(points, SamplerKind::Dpp.name(), seed.0)
}

/// Independent `Q_k ~ BetaPrime(k + 1, n - k)`, `k = 0..n`, whose multiset has
/// the law of the squared eigenvalue moduli.
pub fn sample_moduli_squared(n: usize, seed: RngSeed) -> Result<Vec<f64>> {
    check_n(n)?;
    let mut rng = seed.rng();
    (0..n)
        .map(|k| {
            let beta = Beta::new((k + 1) as f64, (n - k) as f64)
                .map_err(|e| Error::domain(e.to_string()))?;
            let v: f64 = beta.sample(&mut rng);
            Ok(v / (1.0 - v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_names_round_trip() {
        for k in SamplerKind::ALL {
            assert_eq!(k.name().parse::<SamplerKind>().unwrap(), k);
        }
        assert!("ginibre".parse::<SamplerKind>().is_err());
    }

    #[test]
    fn kernel_section_is_unit() {
        for n in [1usize, 2, 7, 64, 1000, 4096] {
            for z in [-1.0, -0.9999, -0.3, 0.0, 0.5, 0.999_999, 1.0] {
                let p = SpherePoint::from_height_azimuth(z, 1.234);
                let sec = kernel_section(n, &p);
                let norm: f64 = sec.coeffs.iter().map(|c| c.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12, "n={n} z={z}: {norm}");
                assert!(sec.lo + sec.coeffs.len() <= n);
            }
        }
    }

    #[test]
    fn kernel_section_matches_plane_formula() {
        let n = 9;
        let p = SpherePoint::new(0.3, -0.5, 0.2).unwrap();
        let w: Complex64 = crate::geom::project(&p).unwrap().into();
        let sec = kernel_section(n, &p);
        let scale = (1.0 + w.norm_sqr()).powf(-(n as f64 - 1.0) / 2.0);
        for k in 0..n {
            let binom = (special::ln_gamma(n as f64) - special::ln_gamma(k as f64 + 1.0)
                - special::ln_gamma((n - k) as f64))
                .exp();
            let expect = w.powu(k as u32) * binom.sqrt() * scale;
            let got = if k >= sec.lo && k < sec.lo + sec.coeffs.len() { sec.coeffs[k - sec.lo] } else { Complex64::new(0.0, 0.0) };
            assert!((got - expect).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn samplers_are_deterministic() {
        for kind in SamplerKind::ALL {
            let a = sample(kind, 12, RngSeed(77)).unwrap();
            let b = sample(kind, 12, RngSeed(77)).unwrap();
            let c = sample(kind, 12, RngSeed(78)).unwrap();
            assert_eq!(a, b);
            assert_ne!(a.points(), c.points());
            assert_eq!(a.len(), 12);
            assert_eq!(a.sampler_id(), kind.name());
        }
        assert_eq!(sample_moduli_squared(5, RngSeed(3)).unwrap(), sample_moduli_squared(5, RngSeed(3)).unwrap());
        assert_eq!(
            sample_gaussian_matrix(4, RngSeed(3)).unwrap().as_slice(),
            sample_gaussian_matrix(4, RngSeed(3)).unwrap().as_slice()
        );
    }

    #[test]
    fn zero_points_rejected() {
        for kind in SamplerKind::ALL {
            assert!(sample(kind, 0, RngSeed(1)).is_err());
        }
    }

    #[test]
    fn dpp_handles_large_n() {
        let c = sample_dpp_hkpv(300, RngSeed(5)).unwrap();
        assert_eq!(c.len(), 300);
    }
}
