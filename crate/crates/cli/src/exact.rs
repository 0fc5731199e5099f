//! `sphens exact <quantity>`: one entry per analytic formula.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use sphens::analytics as a;
use sphens::analytics::BinomialLaw;

use crate::CliError;

/// Parameters accepted by `exact`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    N,
    S,
    Alpha,
    K,
    X,
    T,
    Area,
}

impl Param {
    pub fn flag(self) -> &'static str {
        match self {
            Param::N => "n",
            Param::S => "s",
            Param::Alpha => "alpha",
            Param::K => "k",
            Param::X => "x",
            Param::T => "t",
            Param::Area => "area",
        }
    }
}

pub struct Quantity {
    pub name: &'static str,
    pub params: &'static [Param],
    pub about: &'static str,
}

use Param::*;

const fn q(name: &'static str, params: &'static [Param], about: &'static str) -> Quantity {
    Quantity { name, params, about }
}

/// Every exact quantity, in help order.
pub const QUANTITIES: &[Quantity] = &[
    q("riesz-energy", &[N, S], "expected Riesz s-energy of the spherical ensemble (s < 4)"),
    q("riesz-energy-s2-expansion", &[N], "four-term expansion of the s = 2 energy"),
    q("log-energy", &[N], "expected logarithmic energy of the spherical ensemble"),
    q("iid-riesz-energy", &[N, S], "expected Riesz s-energy of independent uniform points (s < 2)"),
    q("iid-log-energy", &[N], "expected logarithmic energy of independent uniform points"),
    q("binom-tail", &[N, Alpha, K], "P(S > k) for S ~ Bin(n, alpha)"),
    q("cap-count-law", &[N, Alpha], "Bernoulli parameters of the cap count N_D"),
    q("cap-count-pmf", &[N, Alpha], "pmf of the cap count N_D for a cap of area fraction alpha"),
    q("count-variance", &[N, Alpha], "exact variance of N_D"),
    q("count-variance-asymptotic", &[N, Area], "leading-order variance of N_D for a cap of area `area`"),
    q("clt-normalizer", &[N, Area], "normalizing constant of the cap-count CLT"),
    q("iid-count-variance", &[N, Alpha], "variance of N_D for independent uniform points"),
    q("hole", &[N, Alpha], "probability that a cap of area fraction alpha is empty"),
    q("hole-asymptotic", &[N, Alpha], "leading term of the log hole probability"),
    q("conditional-hole", &[N, Alpha], "hole probability around a point of the ensemble"),
    q("iid-hole", &[N, Alpha], "hole probability for independent uniform points"),
    q("gap-cdf", &[N, X], "finite-n gap function E_n(x)"),
    q("gap-cdf-limit", &[X], "limiting gap function E_inf(x)"),
    q("gap-density", &[X], "limiting nearest-neighbour spacing density Q(x)"),
    q("pair-count", &[N, T], "expected number of pairs at chordal distance <= t"),
    q("iid-pair-count", &[N, T], "expected pair count for independent uniform points"),
    q("min-spacing-limit-cdf", &[X], "limit of P(n^(3/4) m_n > x)"),
    q("iid-min-spacing-limit-cdf", &[X], "limit of P(n m_n > x) for independent uniform points"),
    q("energy-bounds", &[S], "the two energy-bound coefficients for s in (-2, 0) U (0, 2)"),
    q("l2-discrepancy", &[N], "expected squared L2 discrepancy and its sqrt(n) bound"),
    q("iid-l2-discrepancy", &[N], "expected squared L2 discrepancy of independent uniform points"),
];

pub fn lookup(name: &str) -> Option<&'static Quantity> {
    QUANTITIES.iter().find(|q| q.name == name)
}

/// Raw flag values; `n` and `k` are integers.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub n: Option<usize>,
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub x: Option<f64>,
    pub t: Option<f64>,
    pub area: Option<f64>,
}

impl Inputs {
    fn given(&self) -> Vec<Param> {
        let mut v = Vec::new();
        let pairs = [
            (N, self.n.is_some()),
            (S, self.s.is_some()),
            (Alpha, self.alpha.is_some()),
            (K, self.k.is_some()),
            (X, self.x.is_some()),
            (T, self.t.is_some()),
            (Area, self.area.is_some()),
        ];
        for (p, set) in pairs {
            if set {
                v.push(p);
            }
        }
        v
    }

    fn number(&self, p: Param) -> Value {
        match p {
            N => json!(self.n),
            S => json!(self.s),
            Alpha => json!(self.alpha),
            K => json!(self.k),
            X => json!(self.x),
            T => json!(self.t),
            Area => json!(self.area),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactOutput {
    pub quantity: String,
    pub params: BTreeMap<String, Value>,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_value: Option<f64>,
}

fn scalar(v: f64) -> (Value, Option<f64>) {
    (json!(v), None)
}

fn from_log(l: f64) -> (Value, Option<f64>) {
    (json!(l.exp()), Some(l))
}

pub fn evaluate(name: &str, inputs: &Inputs) -> Result<ExactOutput, CliError> {
    let quantity = lookup(name).ok_or_else(|| {
        CliError::Usage(format!("unknown quantity `{name}`; run `sphens exact --help` for the list"))
    })?;
    for p in inputs.given() {
        if !quantity.params.contains(&p) {
            return Err(CliError::Usage(format!("`{name}` does not take --{}", p.flag())));
        }
    }
    let missing: Vec<String> = quantity
        .params
        .iter()
        .filter(|p| !inputs.given().contains(p))
        .map(|p| format!("--{}", p.flag()))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Usage(format!("`{name}` requires {}", missing.join(", "))));
    }
    let n = inputs.n.unwrap_or(0);
    let s = inputs.s.unwrap_or(0.0);
    let alpha = inputs.alpha.unwrap_or(0.0);
    let x = inputs.x.unwrap_or(0.0);
    let t = inputs.t.unwrap_or(0.0);
    let area = inputs.area.unwrap_or(0.0);

    let (value, log_value) = match name {
        "riesz-energy" => scalar(a::expected_riesz_energy(n, s)?),
        "riesz-energy-s2-expansion" => scalar(a::expected_riesz_energy_s2_expansion(n)?),
        "log-energy" => scalar(a::expected_log_energy(n)?),
        "iid-riesz-energy" => scalar(a::iid_expected_riesz_energy(n, s)?),
        "iid-log-energy" => scalar(a::iid_expected_log_energy(n)?),
        "binom-tail" => {
            let law = BinomialLaw::new(n, alpha)?;
            scalar(a::binom_tail(&law, inputs.k.unwrap_or(0))?)
        }
        "cap-count-law" => (json!(a::cap_count_law(n, alpha)?.probs), None),
        "cap-count-pmf" => (json!(a::cap_count_pmf(n, alpha)?), None),
        "count-variance" => scalar(a::count_variance_exact(n, alpha)?),
        "count-variance-asymptotic" => scalar(a::count_variance_asymptotic(n, area)?),
        "clt-normalizer" => scalar(a::clt_normalizer(n, area)?),
        "iid-count-variance" => scalar(a::iid_count_variance(n, alpha)?),
        "hole" => from_log(a::hole_probability(n, alpha)?),
        "hole-asymptotic" => from_log(a::hole_probability_asymptotic(n, alpha)?),
        "conditional-hole" => from_log(a::conditional_hole_probability(n, alpha)?),
        "iid-hole" => from_log(a::iid_hole_probability(n, alpha)?),
        "gap-cdf" => scalar(a::gap_cdf_finite(n, x)?),
        "gap-cdf-limit" => scalar(a::gap_cdf_limit(x)?),
        "gap-density" => scalar(a::gap_density(x)?),
        "pair-count" => scalar(a::expected_pair_count(n, t)?),
        "iid-pair-count" => scalar(a::iid_expected_pair_count(n, t)?),
        "min-spacing-limit-cdf" => scalar(a::min_spacing_limit_cdf(x)?),
        "iid-min-spacing-limit-cdf" => scalar(a::iid_min_spacing_limit_cdf(x)?),
        "energy-bounds" => (serde_json::to_value(a::energy_bounds(s)?).expect("plain struct"), None),
        "l2-discrepancy" => (serde_json::to_value(a::expected_l2_discrepancy_sq(n)?).expect("plain struct"), None),
        "iid-l2-discrepancy" => scalar(a::iid_expected_l2_discrepancy_sq(n)?),
        _ => unreachable!("registry and dispatch disagree on `{name}`"),
    };
    let params = quantity.params.iter().map(|&p| (p.flag().to_string(), inputs.number(p))).collect();
    Ok(ExactOutput { quantity: name.to_string(), params, value, log_value })
}
