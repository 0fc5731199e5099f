use sphens::analytics::{binom_tail, cap_count_pmf, BinomialLaw};
use sphens::estimators::{count_in_cap, riesz_energy, CompensatedSum};
use sphens::geom::{inverse_project, project, Cap, Rotation, SpherePoint};
use sphens::gof::{chi_square_test, distribution_test, ks_two_sample, Ecdf, Reference};
use sphens::rng::{mix_seed, RngSeed};
use sphens::samplers::{
    sample, sample_gaussian_matrix, sample_matrix_model, sample_moduli_squared, SamplerKind,
};
use sphens::special::beta_reg;

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[test]
fn gaussian_entries_have_unit_second_moment() {
    let mut abs2 = CompensatedSum::default();
    let (mut re, mut im) = (0.0, 0.0);
    let mut count = 0usize;
    for r in 0..1000u64 {
        let m = sample_gaussian_matrix(32, RngSeed(r)).unwrap();
        for a in m.as_slice() {
            abs2.add(a.norm_sqr());
            re += a.re;
            im += a.im;
            count += 1;
        }
    }
    let c = count as f64;
    assert!(count >= 1_000_000);
    assert!((abs2.value() / c - 1.0).abs() < 0.01);
    assert!((re / c).abs() < 0.01 && (im / c).abs() < 0.01);
}

#[test]
fn one_point_is_uniform() {
    let uniform = |z: f64| ((z + 1.0) / 2.0).clamp(0.0, 1.0);
    for kind in SamplerKind::ALL {
        let z: Vec<f64> = (0..4000u64).map(|r| sample(kind, 1, mix_seed(3, kind.name(), 1, r)).unwrap().points()[0].z()).collect();
        let out = distribution_test(&z, Reference::Cdf(&uniform)).unwrap();
        assert!(out.p_value > 1e-3, "{kind}: {out:?}");
    }
}

#[test]
fn two_point_inverse_distance() {
    for kind in [SamplerKind::Matrix, SamplerKind::Dpp] {
        let v: Vec<f64> = (0..100_000u64)
            .map(|r| {
                let c = sample(kind, 2, mix_seed(5, kind.name(), 2, r)).unwrap();
                riesz_energy(&c, 1.0).unwrap() / 2.0
            })
            .collect();
        let (mean, se) = mean_and_stderr(&v);
        assert!((mean - 2.0 / 3.0).abs() < 0.01, "{kind}: {mean}");
        assert!((mean - 2.0 / 3.0).abs() < 4.0 * se, "{kind}: {mean} +- {se}");
    }
}

#[test]
fn iid_energy_at_eight_points() {
    let v: Vec<f64> = (0..20_000u64).map(|r| riesz_energy(&sample(SamplerKind::Iid, 8, RngSeed(r)).unwrap(), 1.0).unwrap()).collect();
    let (mean, se) = mean_and_stderr(&v);
    assert!((mean - 56.0).abs() < 4.0 * se, "{mean} +- {se}");
}

#[test]
fn iid_heights_are_centered() {
    let c = sample(SamplerKind::Iid, 1_000_000, RngSeed(17)).unwrap();
    let m = c.points().iter().map(|p| p.z()).collect::<CompensatedSum>().value() / 1e6;
    assert!(m.abs() < 0.005);
}

fn counts_histogram(kind: SamplerKind, n: usize, cap: &Cap, reps: u64, base: u64) -> Vec<u64> {
    let mut hist = vec![0u64; n + 1];
    for r in 0..reps {
        let c = sample(kind, n, mix_seed(base, kind.name(), n, r)).unwrap();
        hist[count_in_cap(&c, cap)] += 1;
    }
    hist
}

#[test]
fn cap_counts_follow_poisson_binomial() {
    let alpha = 0.3;
    let pmf = cap_count_pmf(12, alpha).unwrap();
    let center = SpherePoint::new(-0.2, 0.9, 0.3).unwrap();
    let cap = Cap::new(center, 2.0 * f64::sqrt(alpha)).unwrap();
    for kind in [SamplerKind::Matrix, SamplerKind::Dpp] {
        let hist = counts_histogram(kind, 12, &cap, 5000, 41);
        let out = chi_square_test(&hist, &pmf).unwrap();
        assert!(out.p_value > 1e-3, "{kind}: {out:?}");
    }
    // the iid law is binomial and must be rejected
    let hist = counts_histogram(SamplerKind::Iid, 12, &cap, 5000, 41);
    assert!(chi_square_test(&hist, &pmf).unwrap().p_value < 1e-6);
}

#[test]
fn rotations_leave_count_laws_unchanged() {
    let rot = Rotation::from_axis_angle(SpherePoint::new(1.0, 2.0, -0.5).unwrap(), 1.1);
    let cap = Cap::new(SpherePoint::NORTH_POLE, 1.2).unwrap();
    for kind in [SamplerKind::Matrix, SamplerKind::Dpp] {
        let mut plain = Vec::new();
        let mut rotated = Vec::new();
        let mut e_plain = Vec::new();
        let mut e_rot = Vec::new();
        for r in 0..3000u64 {
            let a = sample(kind, 10, mix_seed(8, kind.name(), 10, r)).unwrap();
            let b = sample(kind, 10, mix_seed(9, kind.name(), 10, r)).unwrap().rotated(&rot);
            plain.push(count_in_cap(&a, &cap) as f64);
            rotated.push(count_in_cap(&b, &cap) as f64);
            e_plain.push(riesz_energy(&a, 1.0).unwrap());
            e_rot.push(riesz_energy(&b, 1.0).unwrap());
        }
        let d = ks_two_sample(&Ecdf::new(&plain).unwrap(), &Ecdf::new(&rotated).unwrap());
        let de = ks_two_sample(&Ecdf::new(&e_plain).unwrap(), &Ecdf::new(&e_rot).unwrap());
        // two-sample critical value at level 1e-3 for 3000 vs 3000
        let crit = 1.95 * (2.0 / 3000.0f64).sqrt();
        assert!(d < crit && de < crit, "{kind}: {d} {de}");
    }
}

fn beta_prime_cdf(a: f64, b: f64, q: f64) -> f64 {
    beta_reg(a, b, q / (1.0 + q))
}

#[test]
fn matrix_moduli_match_mixture() {
    let n = 16;
    let mut pooled = Vec::new();
    for r in 0..2000u64 {
        let c = sample_matrix_model(n, RngSeed(r)).unwrap();
        pooled.extend(c.points().iter().map(|p| project(p).unwrap().norm_sqr()));
    }
    let mixture = |q: f64| {
        if q <= 0.0 {
            return 0.0;
        }
        (0..n).map(|k| beta_prime_cdf((k + 1) as f64, (n - k) as f64, q)).sum::<f64>() / n as f64
    };
    let d = Ecdf::new(&pooled).unwrap().sup_distance(mixture);
    assert!(d <= 0.02, "{d}");
}

#[test]
fn moduli_sampler_laws() {
    let below: usize = (0..20_000u64).filter(|&r| sample_moduli_squared(1, RngSeed(r)).unwrap()[0] <= 1.0).count();
    assert!((below as f64 / 20_000.0 - 0.5).abs() < 0.01);

    let (n, r2) = (6usize, 0.8);
    let law = BinomialLaw::new(n, r2 / (1.0 + r2)).unwrap();
    let reps = 20_000u64;
    let mut hits = vec![0u64; n];
    for r in 0..reps {
        for (k, q) in sample_moduli_squared(n, RngSeed(1000 + r)).unwrap().into_iter().enumerate() {
            hits[k] += (q < r2) as u64;
        }
    }
    for (k, &h) in hits.iter().enumerate() {
        let p = binom_tail(&law, k).unwrap();
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((h as f64 / reps as f64 - p).abs() < 4.0 * se + 1e-12, "k = {k}");
    }
}

#[test]
fn projection_round_trip_bulk() {
    let mut worst = 0.0f64;
    let c = sample(SamplerKind::Iid, 100_000, RngSeed(2)).unwrap();
    for p in c.points() {
        if 1.0 - p.z() < 1e-6 {
            continue;
        }
        let q = inverse_project(&project(p).unwrap());
        for (a, b) in p.to_array().iter().zip(q.to_array()) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}
