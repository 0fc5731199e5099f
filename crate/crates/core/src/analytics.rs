//! Exact and asymptotic quantities for the spherical ensemble.
//!
//! Cap counts reduce to a sum of independent Bernoulli variables with
//! success probabilities `P(S_n > k)`, `S_n ~ Bin(n, alpha)`. Every binomial
//! tail goes through [`special::ln_beta_reg`]; products of tails are carried
//! in log space.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{self, ln_beta_int, EULER_GAMMA};

const FOUR_PI: f64 = 4.0 * PI;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha = {alpha} is outside [0, 1]")));
    }
    Ok(())
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!("n = {n} must be at least {min}")));
    }
    Ok(())
}

fn check_area(area: f64) -> Result<()> {
    if !(0.0..=FOUR_PI).contains(&area) {
        return Err(Error::domain(format!("area = {area} is outside [0, 4pi]")));
    }
    Ok(())
}

/// `S_n ~ Bin(n, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialLaw {
    n: usize,
    alpha: f64,
}

impl BinomialLaw {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        check_n(n, 1)?;
        check_alpha(alpha)?;
        Ok(BinomialLaw { n, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ln P(S_n > k)`.
    pub fn ln_sf(&self, k: usize) -> f64 {
        let (n, a) = (self.n, self.alpha);
        if k >= n || a == 0.0 {
            return f64::NEG_INFINITY;
        }
        if a == 1.0 {
            return 0.0;
        }
        special::ln_beta_reg((k + 1) as f64, (n - k) as f64, a)
    }

    /// `ln P(S_n <= k)`.
    pub fn ln_cdf(&self, k: usize) -> f64 {
        let (n, a) = (self.n, self.alpha);
        if k >= n || a == 0.0 {
            return 0.0;
        }
        if a == 1.0 {
            return f64::NEG_INFINITY;
        }
        special::ln_beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - a)
    }
}

/// `P(S_n > k)` for `0 <= k <= n - 1`.
pub fn binom_tail(law: &BinomialLaw, k: usize) -> Result<f64> {
    if k >= law.n {
        return Err(Error::domain(format!("k = {k} must be below n = {}", law.n)));
    }
    Ok(law.ln_sf(k).exp())
}

/// Success probabilities of the Bernoulli variables whose sum is the cap count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountLaw {
    pub probs: Vec<f64>,
}

impl CountLaw {
    pub fn mean(&self) -> f64 {
        self.probs.iter().rev().sum()
    }

    pub fn variance(&self) -> f64 {
        self.probs.iter().rev().map(|p| p * (1.0 - p)).sum()
    }
}

pub fn cap_count_law(n: usize, alpha: f64) -> Result<CountLaw> {
    let law = BinomialLaw::new(n, alpha)?;
    Ok(CountLaw { probs: (0..n).map(|k| law.ln_sf(k).exp()).collect() })
}

/// Probability mass function of the cap count, indices `0..=n`.
pub fn cap_count_pmf(n: usize, alpha: f64) -> Result<Vec<f64>> {
    let law = cap_count_law(n, alpha)?;
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for (m, &p) in law.probs.iter().enumerate() {
        for j in (0..=m + 1).rev() {
            let stay = pmf[j] * (1.0 - p);
            let step = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + step;
        }
    }
    Ok(pmf)
}

/// `Var N_D = sum_k P(S_n <= k) P(S_n > k)`.
pub fn count_variance_exact(n: usize, alpha: f64) -> Result<f64> {
    let law = BinomialLaw::new(n, alpha)?;
    Ok((0..n).rev().map(|k| (law.ln_cdf(k) + law.ln_sf(k)).exp()).sum())
}

/// `sqrt(n) sqrt(|D| |D^c|) / (4 pi sqrt(pi))`.
pub fn count_variance_asymptotic(n: usize, area: f64) -> Result<f64> {
    check_area(area)?;
    Ok((n as f64).sqrt() * (area * (FOUR_PI - area)).sqrt() / (FOUR_PI * PI.sqrt()))
}

/// CLT denominator `(1/2) pi^(-3/4) n^(1/4) (|D| |D^c|)^(1/4)`.
pub fn clt_normalizer(n: usize, area: f64) -> Result<f64> {
    check_area(area)?;
    Ok(0.5 * PI.powf(-0.75) * (n as f64).powf(0.25) * (area * (FOUR_PI - area)).powf(0.25))
}

/// `ln P(N_D = 0) = sum_{k=0}^{n-1} ln P(S_n <= k)`; `-inf` at `alpha = 1`.
pub fn hole_probability(n: usize, alpha: f64) -> Result<f64> {
    let law = BinomialLaw::new(n, alpha)?;
    Ok((0..n).rev().map(|k| law.ln_cdf(k)).sum())
}

/// Leading term `(n^2 / 2)(alpha + ln(1 - alpha))` of the log hole probability.
pub fn hole_probability_asymptotic(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} is outside (0, 1)")));
    }
    let n = n as f64;
    Ok(0.5 * n * n * (alpha + (-alpha).ln_1p()))
}

/// `ln prod_{k=1}^{n-1} P(S_n <= k)`, the log probability that a cap around
/// one point of the ensemble holds no other point.
pub fn conditional_hole_probability(n: usize, alpha: f64) -> Result<f64> {
    let law = BinomialLaw::new(n, alpha)?;
    let direct: f64 = (1..n).rev().map(|k| law.ln_cdf(k)).sum();
    if alpha < 1.0 {
        let via_hole = hole_probability(n, alpha)? - n as f64 * (-alpha).ln_1p();
        debug_assert!(
            (direct - via_hole).abs() <= 1e-10 * direct.abs().max(1.0),
            "{direct} vs {via_hole}"
        );
    }
    Ok(direct)
}

/// Order of the nearest-neighbour gap function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapOrder {
    Finite(usize),
    Infinite,
}

/// `E_n(x) = prod_{k=1}^{n-1} P(Pois(x) <= k)` and its limit `E_inf`, with
/// density `Q = -E_inf'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapFunctions {
    pub order: GapOrder,
    /// Last factor kept for `E_inf` on `[0, x_max]`.
    pub truncation_k: usize,
}

/// Smallest `K` with `x^(K+1) / (K+1)! < 1e-14`.
pub fn taylor_truncation(x: f64) -> usize {
    if x <= 0.0 {
        return 1;
    }
    let lx = x.ln();
    let mut k = 1usize;
    let mut ln_term = 2.0 * lx - special::ln_gamma(3.0);
    while ln_term >= (1e-14f64).ln() {
        k += 1;
        ln_term += lx - ((k + 1) as f64).ln();
    }
    k
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl GapFunctions {
    pub fn finite(n: usize) -> Result<Self> {
        check_n(n, 1)?;
        Ok(GapFunctions { order: GapOrder::Finite(n), truncation_k: n.saturating_sub(1) })
    }

    /// The limit functions, truncated for arguments up to `x_max`.
    pub fn limit(x_max: f64) -> Self {
        GapFunctions { order: GapOrder::Infinite, truncation_k: taylor_truncation(x_max.max(0.0)) }
    }

    fn last_factor(&self, x: f64) -> usize {
        match self.order {
            GapOrder::Finite(n) => n - 1,
            GapOrder::Infinite => self.truncation_k.max(taylor_truncation(x)),
        }
    }

    /// Returns `(ln E(x), sum_k pois(k; x) / P(Pois(x) <= k))` over the kept
    /// factors.
    fn log_and_score(&self, x: f64) -> (f64, f64) {
        let last = self.last_factor(x);
        if x == 0.0 || last == 0 {
            return (0.0, 0.0);
        }
        let lx = x.ln();
        // Terms beyond `top` are below 1e-300 relative to the mode.
        let top = last + 1 + (x + 12.0 * (x + 1.0).sqrt() + 40.0).ceil() as usize;
        let ln_pois: Vec<f64> = (0..=top)
            .map(|j| -x + j as f64 * lx - special::ln_gamma(j as f64 + 1.0))
            .collect();
        // upper[k] = ln P(Pois > k), by downward accumulation
        let mut upper = vec![f64::NEG_INFINITY; top + 1];
        let mut acc = f64::NEG_INFINITY;
        for k in (0..top).rev() {
            acc = ln_add_exp(acc, ln_pois[k + 1]);
            upper[k] = acc;
        }
        let mut lower = ln_pois[0];
        let mut ln_e = 0.0;
        let mut score = 0.0;
        for k in 1..=last {
            lower = ln_add_exp(lower, ln_pois[k]);
            let u = upper.get(k).copied().unwrap_or(f64::NEG_INFINITY);
            let ln_cdf = if u < -LN_2 { (-u.exp()).ln_1p() } else { lower };
            ln_e += ln_cdf;
            score += (ln_pois[k] - ln_cdf).exp();
            if k > x as usize + 1 && u < -43.0 && matches!(self.order, GapOrder::Finite(_)) {
                // the remaining factors round to one
                break;
            }
        }
        (ln_e, score)
    }

    pub fn ln_cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("x = {x} must be nonnegative")));
        }
        Ok(self.log_and_score(x).0)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_cdf(x)?.exp())
    }

    /// `-d/dx E(x)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("x = {x} must be nonnegative")));
        }
        let (ln_e, score) = self.log_and_score(x);
        Ok(ln_e.exp() * score)
    }
}

/// `E_n(x)`.
pub fn gap_cdf_finite(n: usize, x: f64) -> Result<f64> {
    GapFunctions::finite(n)?.cdf(x)
}

/// `E_inf(x)`.
pub fn gap_cdf_limit(x: f64) -> Result<f64> {
    GapFunctions::limit(x).cdf(x)
}

/// `Q(x) = -E_inf'(x)`.
pub fn gap_density(x: f64) -> Result<f64> {
    GapFunctions::limit(x).density(x)
}

/// Expected Riesz s-energy `sum_{i != j} |P_i - P_j|^(-s)` of the ensemble.
pub fn expected_riesz_energy(n: usize, s: f64) -> Result<f64> {
    check_n(n, 2)?;
    if !s.is_finite() {
        return Err(Error::domain(format!("s = {s} is not finite")));
    }
    if s >= 4.0 {
        return Err(Error::InfiniteEnergy { s });
    }
    let nf = n as f64;
    if s == 2.0 {
        return Ok(0.25 * nf * nf * special::harmonic(n as u64 - 1));
    }
    let a = 1.0 - s / 2.0;
    let (ln_b, sign) = ln_beta_int(a, n as u64);
    let first = 2f64.powf(1.0 - s) / (2.0 - s);
    let second = sign * (ln_b - s * LN_2).exp();
    Ok(nf * nf * (first - second))
}

/// Expected logarithmic energy `(1/2 - ln 2) n^2 - (n/2) H_n + n ln 2`.
pub fn expected_log_energy(n: usize) -> Result<f64> {
    check_n(n, 2)?;
    let nf = n as f64;
    Ok((0.5 - LN_2) * nf * nf - 0.5 * nf * special::harmonic(n as u64) + nf * LN_2)
}

/// `(1/4) n^2 ln n + (gamma/4) n^2 - n/8 - 1/48`.
pub fn expected_riesz_energy_s2_expansion(n: usize) -> Result<f64> {
    check_n(n, 2)?;
    let nf = n as f64;
    Ok(0.25 * nf * nf * nf.ln() + 0.25 * EULER_GAMMA * nf * nf - nf / 8.0 - 1.0 / 48.0)
}

/// Riesz s-energy expectation for `n` independent uniform points.
pub fn iid_expected_riesz_energy(n: usize, s: f64) -> Result<f64> {
    check_n(n, 2)?;
    if s >= 2.0 {
        return Err(Error::InfiniteEnergy { s });
    }
    let nf = n as f64;
    Ok(2f64.powf(1.0 - s) / (2.0 - s) * (nf * nf - nf))
}

pub fn iid_expected_log_energy(n: usize) -> Result<f64> {
    check_n(n, 2)?;
    let nf = n as f64;
    Ok((0.5 - LN_2) * (nf * nf - nf))
}

/// Expected number of pairs at chordal distance at most `t`.
pub fn expected_pair_count(n: usize, t: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} is outside [0, 2]")));
    }
    let nf = n as f64;
    let far = -(nf * (-t * t / 4.0).ln_1p()).exp_m1();
    Ok(nf * nf * t * t / 8.0 - 0.5 * nf * far)
}

pub fn iid_expected_pair_count(n: usize, t: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} is outside [0, 2]")));
    }
    let nf = n as f64;
    Ok(0.5 * nf * (nf - 1.0) * t * t / 4.0)
}

/// Limit of `P(n^(3/4) m_n > x)` for the ensemble.
pub fn min_spacing_limit_cdf(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x = {x} must be nonnegative")));
    }
    Ok((-x.powi(4) / 64.0).exp())
}

/// Limit of `P(n m_n > x)` for independent uniform points.
pub fn iid_min_spacing_limit_cdf(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x = {x} must be nonnegative")));
    }
    Ok((-x * x / 8.0).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBounds {
    /// `Gamma(1 - s/2) / 2^s`
    pub corollary_coeff: f64,
    /// `(2 sqrt(2 pi))^(-s)`
    pub rsz_coeff: f64,
}

pub fn energy_bounds(s: f64) -> Result<EnergyBounds> {
    if !(s > -2.0 && s < 2.0) || s == 0.0 {
        return Err(Error::domain(format!("s = {s} is outside (-2, 0) U (0, 2)")));
    }
    Ok(EnergyBounds {
        corollary_coeff: special::gamma(1.0 - s / 2.0) / 2f64.powf(s),
        rsz_coeff: (2.0 * (2.0 * PI).sqrt()).powf(-s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2DiscrepancyExpectation {
    pub value: f64,
    /// `Gamma(3/2) sqrt(n)`
    pub bound: f64,
}

/// `E Disc_2^2 = Gamma(3/2) Gamma(n) n^2 / Gamma(n + 3/2)`.
pub fn expected_l2_discrepancy_sq(n: usize) -> Result<L2DiscrepancyExpectation> {
    check_n(n, 2)?;
    let nf = n as f64;
    let (ln_b, _) = ln_beta_int(1.5, n as u64);
    Ok(L2DiscrepancyExpectation {
        value: nf * nf * ln_b.exp(),
        bound: special::gamma(1.5) * nf.sqrt(),
    })
}

/// `E Disc_2^2 = 2n / 3` for independent uniform points (mean chord length 4/3).
pub fn iid_expected_l2_discrepancy_sq(n: usize) -> Result<f64> {
    check_n(n, 1)?;
    Ok(2.0 * n as f64 / 3.0)
}

/// Expected `(N_D - n alpha)^2` for independent uniform points.
pub fn iid_count_variance(n: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(n as f64 * alpha * (1.0 - alpha))
}

/// `P(N_D = 0) = (1 - alpha)^n` for independent uniform points, in log space.
pub fn iid_hole_probability(n: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(n as f64 * (-alpha).ln_1p())
}
