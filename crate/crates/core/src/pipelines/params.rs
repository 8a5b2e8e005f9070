// SPDX-License-Identifier: Apache-2.0

//! Closed-form parameter calculators. Every unspecified additive constant
//! is an explicit input: `c_pre` inside preconditions and `c_out` inside
//! output lengths, both defaulting to 0 and echoed in `constants`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Supported calculator ids.
pub const THEOREM_IDS: &[&str] = &[
    "split-condenser-simplified",
    "split-condenser-general",
    "split-condenser-small-n",
    "split-condenser-large-n",
    "two-source-condenser",
    "seeded-condenser",
    "xor-condenser",
    "sliding-window-existential",
    "sliding-window-explicit",
    "sliding-window-cgr",
    "rate-reduction",
    "leader-one-bit",
    "leader-multi-bit",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub theorem: String,
    pub feasible: bool,
    pub values: BTreeMap<String, f64>,
    /// Exact rational forms of some `values`, as `p/q` strings.
    pub exact: BTreeMap<String, String>,
    /// Names of failed preconditions.
    pub violated: Vec<String>,
    pub constants: BTreeMap<String, f64>,
}

struct Calc<'a> {
    inputs: &'a BTreeMap<String, f64>,
    report: ParamReport,
}

fn is_int(x: f64) -> bool {
    x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15
}

impl<'a> Calc<'a> {
    fn get(&self, name: &str) -> Result<f64> {
        let v = *self
            .inputs
            .get(name)
            .ok_or_else(|| invalid(name, "required input missing"))?;
        if !v.is_finite() {
            return Err(invalid(name, "must be finite"));
        }
        Ok(v)
    }

    fn int(&self, name: &str) -> Result<i64> {
        let v = self.get(name)?;
        if !is_int(v) {
            return Err(invalid(name, format!("{v} is not an integer")));
        }
        Ok(v as i64)
    }

    fn constant(&mut self, name: &str) -> f64 {
        let v = self.inputs.get(name).copied().unwrap_or(0.0);
        self.report.constants.insert(name.into(), v);
        v
    }

    fn eps(&mut self, name: &str) -> Result<f64> {
        let e = self.get(name)?;
        self.require(e > 0.0 && e < 1.0, &format!("{name}_range"));
        Ok(e)
    }

    fn require(&mut self, ok: bool, name: &str) {
        if !ok {
            self.report.violated.push(name.into());
        }
    }

    fn set(&mut self, name: &str, v: f64) {
        self.report.values.insert(name.into(), v);
    }

    fn set_exact(&mut self, name: &str, r: Ratio<i64>) {
        self.set(name, *r.numer() as f64 / *r.denom() as f64);
        self.report.exact.insert(name.into(), format!("{}/{}", r.numer(), r.denom()));
    }
}

fn log2(x: f64) -> f64 {
    x.log2()
}

/// Evaluates the parameter clauses of `theorem` on `inputs`.
pub fn param_report(theorem: &str, inputs: &BTreeMap<String, f64>) -> Result<ParamReport> {
    if !THEOREM_IDS.contains(&theorem) {
        return Err(Error::Unknown(format!("theorem id {theorem}; supported: {}", THEOREM_IDS.join(", "))));
    }
    let mut c = Calc {
        inputs,
        report: ParamReport {
            theorem: theorem.into(),
            feasible: true,
            values: BTreeMap::new(),
            exact: BTreeMap::new(),
            violated: vec![],
            constants: BTreeMap::new(),
        },
    };
    match theorem {
        "split-condenser-simplified" => {
            let (ell, n) = (c.get("ell")?, c.get("n")?);
            let eps = c.eps("eps")?;
            let (cp, co) = (c.constant("c_pre"), c.constant("c_out"));
            let l = log2(ell * n / (2.0 * eps));
            c.set("g", 0.51 * ell);
            c.require(0.01 * ell * n >= 2.0 * l + cp, "block_entropy");
            c.set("m", 0.005 * ell * n + 200.0 * (ell + l) + co);
            c.set("Delta", 200.0 * (ell + l) + co);
        }
        "split-condenser-general" => {
            let (g, ell, n, e) = (c.get("g")?, c.get("ell")?, c.get("n")?, c.get("e")?);
            let eps = c.eps("eps")?;
            let (cp, co) = (c.constant("c_pre"), c.constant("c_out"));
            c.require(e >= 1.0 && is_int(e), "e_positive_integer");
            c.require(g >= ell / 2.0 + e, "good_count");
            let l = log2(ell * n / (2.0 * eps));
            c.require(e * n >= 2.0 * l + cp, "surplus_entropy");
            let n_v = ((l + cp) / e).ceil();
            c.set("n_v", n_v);
            c.set("m", e * n / 2.0 + (2.0 * ell - e) * n_v + log2(1.0 / eps) + co);
            c.set("Delta", (2.0 * ell - 2.0 * e) * n_v + log2(1.0 / eps) + co);
        }
        "split-condenser-small-n" => {
            let (g, ell, n, delta) = (c.get("g")?, c.get("ell")?, c.get("n")?, c.get("delta")?);
            let eps = c.eps("eps")?;
            let (cp, co) = (c.constant("c_pre"), c.constant("c_out"));
            c.require(delta > 0.0, "delta_positive");
            c.require(g >= (0.5 + delta) * ell, "good_count");
            c.require(eps >= (-delta * ell + cp).exp2(), "error_floor");
            c.require(n <= (delta * ell / 2.0).exp2(), "block_width");
            c.set("m", delta * ell * n / 2.0 + (2.0 - delta) * ell + log2(1.0 / eps) + co);
            c.set("Delta", (2.0 - delta) * ell + log2(1.0 / eps) + co);
        }
        "split-condenser-large-n" => {
            let (g, ell, n, delta) = (c.get("g")?, c.get("ell")?, c.get("n")?, c.get("delta")?);
            let eps = c.eps("eps")?;
            let (cp, co) = (c.constant("c_pre"), c.constant("c_out"));
            c.require(delta > 0.0, "delta_positive");
            c.require(g >= (0.5 + delta) * ell, "good_count");
            let l = log2(ell * n / (2.0 * eps));
            c.require(delta * ell * n >= 2.0 * l + cp, "block_entropy");
            let seeds = (2.0 / delta - 1.0) * (l + cp);
            c.set("m", delta * ell * n / 2.0 + seeds + (2.0 - delta) * ell + log2(1.0 / eps) + co);
            c.set("Delta", seeds + 2.0 * (2.0 - delta) * ell + log2(1.0 / eps) + co);
        }
        "two-source-condenser" => {
            let (g, ell, n_x, n_y) = (c.get("g")?, c.get("ell")?, c.get("n_x")?, c.get("n_y")?);
            let eps = c.eps("eps")?;
            let (cp, co) = (c.constant("c_pre"), c.constant("c_out"));
            c.require(n_x >= n_y, "widths");
            c.require(g * n_y >= log2(ell * n_x / eps) + cp, "seed_entropy");
            c.set("m", g * n_x + (2.0 * ell - g) * n_y + log2(1.0 / eps) + co);
            c.set("Delta", (2.0 * ell - 2.0 * g) * n_y + log2(1.0 / eps) + co);
        }
        "seeded-condenser" => {
            let (n, k, d) = (c.get("n")?, c.get("k")?, c.get("d")?);
            let eps = c.eps("eps")?;
            let (cp, co) = (c.constant("c_pre"), c.constant("c_out"));
            c.require(k <= n, "k_at_most_n");
            c.require(d >= log2(n / eps) + cp, "seed_length");
            c.set("k_out", k + d);
            c.set("m", k + d + log2(1.0 / eps) + co);
        }
        "xor-condenser" => {
            let (n, g, ell, cc) = (c.get("n")?, c.get("g")?, c.int("ell")?, c.get("C")?);
            let eps = c.eps("eps")?;
            c.report.constants.insert("C".into(), cc);
            c.require(cc > 0.0, "C_positive");
            c.require(ell >= 1, "ell_positive");
            c.require(2.0 * g > ell as f64, "honest_majority");
            let ellf = ell as f64;
            let l = log2(2.0 * ellf * n / eps);
            let n_x = ellf * n / 2.0;
            let mut n_y = 0.0;
            let mut seeds_ok = true;
            for i in 1..=ell {
                let power = (3.0 * cc).powi((ell - i) as i32);
                let nyi = 2.0 * cc * power * l;
                let log_eps_i = power * log2(eps / (2.0 * ellf * n));
                c.set(&format!("n_y_{i}"), nyi);
                c.set(&format!("log2_eps_{i}"), log_eps_i);
                seeds_ok &= nyi >= cc * (log2(2.0 * n_x) - log_eps_i);
                n_y += nyi;
            }
            c.require(seeds_ok, "prefix_seed_length");
            c.set("n_y", n_y);
            c.require(c.report.values["n_y_1"] <= n / 2.0, "prefix_fits");
            let gap = (3.0 * cc).powi(ell as i32) * l;
            let m = (n / 2.0 - gap) / 3.0;
            c.set("m", m);
            c.set("Delta", gap);
            c.set("k_x", n / 2.0 - n_y - log2(2.0 / eps));
            c.require(m > 0.0, "output_length");
        }
        "sliding-window-existential" => {
            let (d, g, ell) = (c.int("d")?, c.int("g")?, c.int("ell")?);
            c.require(d >= 1, "d_positive");
            let bound = Ratio::from_integer(g) - Ratio::new(ell - g + 2, d.max(1));
            c.set_exact("g_out_max", bound);
            let g_out = match c.inputs.get("g_out") {
                Some(_) => c.int("g_out")?,
                None => bound.floor().to_integer(),
            };
            c.set("g_out", g_out as f64);
            c.require(Ratio::from_integer(g_out) <= bound, "good_output");
            if let (Ok(n), Ok(m), Ok(k)) = (c.get("n"), c.get("m"), c.get("k")) {
                let eps = c.eps("eps")?;
                let need = log2(n * d as f64 - k) + m * d as f64 + 2.0 * log2(2.0 * g_out as f64 / eps);
                c.set("k_min", need);
                c.require(k <= n, "k_at_most_n");
                c.require(k >= need, "entropy");
            }
        }
        "sliding-window-explicit" => {
            let (d, g, ell) = (c.int("d")?, c.int("g")?, c.int("ell")?);
            let (m, k, k2) = (c.get("m")?, c.get("k")?, c.get("k_2ext")?);
            let e2 = c.eps("eps_2ext")?;
            c.require(d >= 1, "d_positive");
            let d = d.max(1);
            let bound = Ratio::new(g * (d + 1) - ell - 2, d);
            c.set_exact("g_out_max", bound);
            c.set_exact("good_outputs", Ratio::new((g - 1) * (d + 1) - ell, d));
            let g_out = match c.inputs.get("g_out") {
                Some(_) => c.int("g_out")?,
                None => bound.floor().to_integer().max(0),
            };
            c.set("g_out", g_out as f64);
            c.require(Ratio::from_integer(g_out) <= bound, "good_output");
            let need = k2 + m * d as f64 + log2(1.0 / e2);
            c.set("k_min", need);
            c.require(k >= need, "entropy");
            c.set("eps", 2.0 * g_out as f64 * e2);
        }
        "sliding-window-cgr" => {
            let (g, ell, n, k) = (c.get("g")?, c.get("ell")?, c.get("n")?, c.get("k")?);
            let eps = c.eps("eps")?;
            c.require(g >= 2.0, "two_good_blocks");
            let need = 1.01 * (log2(n * ell) + 2.0 * log2(2.0 * (g - 1.0) / eps));
            c.set("k_min", need);
            c.require(k >= need, "entropy");
            c.set("m", k / (200.0 * ell));
            c.set("g_out", g - 1.0);
            c.set("d", ell);
        }
        "rate-reduction" => {
            let (g, ell) = (c.int("g")?, c.int("ell")?);
            c.require(g >= 1 && g <= ell, "good_count");
            let q = ell / g.max(1);
            c.set("floor_ell_over_g", q as f64);
            c.set_exact("rate", Ratio::new(1, q.max(1)));
        }
        "leader-one-bit" => {
            let (ell, delta) = (c.get("ell")?, c.get("delta")?);
            c.require(ell >= 2.0, "ell_at_least_two");
            c.require((0.0..1.0).contains(&delta), "delta_range");
            c.set("eps", delta + 12.0 * delta.powf(1.5) + log2(ell).powf(-1.0 / 3.0));
            c.set("stage1_rounds_max", log2(ell).ceil());
        }
        "leader-multi-bit" => {
            let delta = c.get("delta")?;
            c.require(delta > 0.0 && delta < 0.25, "delta_range");
            c.set("eps", delta + 13.0 * delta.powf(1.5));
        }
        _ => unreachable!("checked against THEOREM_IDS"),
    }
    c.report.feasible = c.report.violated.is_empty();
    Ok(c.report)
}

/// Guaranteed number of good sliding-window outputs,
/// `((g - 1)(d + 1) - ell) / d`.
pub fn good_output_count(g: i64, ell: i64, d: i64) -> Result<Ratio<i64>> {
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    Ok(Ratio::new((g - 1) * (d + 1) - ell, d))
}

/// Good outputs for a concrete pattern: `O_i` (for `i >= 2`) is good when
/// block `i` and some block among `i-d..i-1` are good.
pub fn exact_good_outputs(good: &[bool], d: usize) -> usize {
    (1..good.len())
        .filter(|&i| good[i] && good[i.saturating_sub(d)..i].iter().any(|&b| b))
        .count()
}
