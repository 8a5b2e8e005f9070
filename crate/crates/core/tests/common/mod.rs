// SPDX-License-Identifier: Apache-2.0

//! Test-side re-derivation of every parameter clause, written directly
//! from the closed forms and independent of the library calculator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use onosf::pipelines::{param_report, ParamReport};

pub fn lg(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_2
}

#[derive(Debug, Default)]
pub struct Expected {
    pub values: BTreeMap<String, f64>,
    pub exact: BTreeMap<String, Ratio<i64>>,
    pub violated: BTreeSet<String>,
    pub constants: BTreeMap<String, f64>,
}

impl Expected {
    fn v(&mut self, k: &str, x: f64) {
        self.values.insert(k.into(), x);
    }

    fn q(&mut self, k: &str, r: Ratio<i64>) {
        self.values.insert(k.into(), *r.numer() as f64 / *r.denom() as f64);
        self.exact.insert(k.into(), r);
    }

    fn need(&mut self, ok: bool, k: &str) {
        if !ok {
            self.violated.insert(k.into());
        }
    }
}

fn floor_ratio(r: Ratio<i64>) -> i64 {
    let (n, d) = (*r.numer(), *r.denom());
    n.div_euclid(d)
}

/// Expected report for `theorem`; `inp` must hold every required input.
pub fn expected(theorem: &str, inp: &BTreeMap<String, f64>) -> Expected {
    let x = |k: &str| inp[k];
    let opt = |k: &str| inp.get(k).copied();
    let mut e = Expected::default();
    let constants = |e: &mut Expected| {
        let cp = opt("c_pre").unwrap_or(0.0);
        let co = opt("c_out").unwrap_or(0.0);
        e.constants.insert("c_pre".into(), cp);
        e.constants.insert("c_out".into(), co);
        (cp, co)
    };
    let eps_ok = |e: &mut Expected, name: &str| {
        let v = x(name);
        e.need(0.0 < v && v < 1.0, &format!("{name}_range"));
        v
    };
    match theorem {
        "split-condenser-simplified" => {
            let (ell, n) = (x("ell"), x("n"));
            let eps = eps_ok(&mut e, "eps");
            let (cp, co) = constants(&mut e);
            let lt = lg(ell * n / 2.0 / eps);
            e.v("g", 51.0 * ell / 100.0);
            e.need(ell * n / 100.0 >= 2.0 * lt + cp, "block_entropy");
            e.v("m", ell * n / 200.0 + 200.0 * ell + 200.0 * lt + co);
            e.v("Delta", 200.0 * ell + 200.0 * lt + co);
        }
        "split-condenser-general" => {
            let (g, ell, n, ee) = (x("g"), x("ell"), x("n"), x("e"));
            let eps = eps_ok(&mut e, "eps");
            let (cp, co) = constants(&mut e);
            let lt = lg(ell * n / 2.0 / eps);
            e.need(ee >= 1.0 && ee == ee.trunc(), "e_positive_integer");
            e.need(g >= ell / 2.0 + ee, "good_count");
            e.need(ee * n >= 2.0 * lt + cp, "surplus_entropy");
            let n_v = ((lt + cp) / ee).ceil();
            e.v("n_v", n_v);
            e.v("m", ee * n / 2.0 + (2.0 * ell - ee) * n_v - lg(eps) + co);
            e.v("Delta", 2.0 * (ell - ee) * n_v - lg(eps) + co);
        }
        "split-condenser-small-n" => {
            let (g, ell, n, d) = (x("g"), x("ell"), x("n"), x("delta"));
            let eps = eps_ok(&mut e, "eps");
            let (cp, co) = constants(&mut e);
            e.need(d > 0.0, "delta_positive");
            e.need(g >= ell / 2.0 + d * ell, "good_count");
            e.need(lg(eps) >= cp - d * ell, "error_floor");
            e.need(lg(n) <= d * ell / 2.0, "block_width");
            e.v("m", d * ell * n / 2.0 + 2.0 * ell - d * ell - lg(eps) + co);
            e.v("Delta", 2.0 * ell - d * ell - lg(eps) + co);
        }
        "split-condenser-large-n" => {
            let (g, ell, n, d) = (x("g"), x("ell"), x("n"), x("delta"));
            let eps = eps_ok(&mut e, "eps");
            let (cp, co) = constants(&mut e);
            e.need(d > 0.0, "delta_positive");
            e.need(g >= ell / 2.0 + d * ell, "good_count");
            let lt = lg(ell * n / 2.0 / eps);
            e.need(d * ell * n >= 2.0 * lt + cp, "block_entropy");
            let seeds = (2.0 - d) / d * (lt + cp);
            e.v("m", d * ell * n / 2.0 + seeds + (2.0 - d) * ell - lg(eps) + co);
            e.v("Delta", seeds + (4.0 - 2.0 * d) * ell - lg(eps) + co);
        }
        "two-source-condenser" => {
            let (g, ell, nx, ny) = (x("g"), x("ell"), x("n_x"), x("n_y"));
            let eps = eps_ok(&mut e, "eps");
            let (cp, co) = constants(&mut e);
            e.need(nx >= ny, "widths");
            e.need(g * ny >= lg(ell) + lg(nx) - lg(eps) + cp, "seed_entropy");
            e.v("m", g * nx + (2.0 * ell - g) * ny - lg(eps) + co);
            e.v("Delta", 2.0 * (ell - g) * ny - lg(eps) + co);
        }
        "seeded-condenser" => {
            let (n, k, d) = (x("n"), x("k"), x("d"));
            let eps = eps_ok(&mut e, "eps");
            let (cp, co) = constants(&mut e);
            e.need(k <= n, "k_at_most_n");
            e.need(d >= lg(n) - lg(eps) + cp, "seed_length");
            e.v("k_out", k + d);
            e.v("m", k + d - lg(eps) + co);
        }
        "xor-condenser" => {
            let (n, g, ell, c) = (x("n"), x("g"), x("ell"), x("C"));
            let eps = eps_ok(&mut e, "eps");
            e.constants.insert("C".into(), c);
            e.need(c > 0.0, "C_positive");
            e.need(ell >= 1.0, "ell_positive");
            e.need(g > ell / 2.0, "honest_majority");
            let lt = lg(2.0 * ell * n / eps);
            let nx = ell * n / 2.0;
            let l = ell as i32;
            let mut total = 0.0;
            let mut ok = true;
            for i in 1..=l {
                let p = (3.0 * c).powi(l - i);
                let nyi = 2.0 * c * p * lt;
                // eps_i = (eps / (2 ell n))^p, in log form.
                let log_eps_i = -p * lt;
                e.v(&format!("n_y_{i}"), nyi);
                e.v(&format!("log2_eps_{i}"), log_eps_i);
                ok &= nyi >= c * (1.0 + lg(nx) - log_eps_i);
                total += nyi;
            }
            e.need(ok, "prefix_seed_length");
            e.v("n_y", total);
            e.need(2.0 * c * (3.0 * c).powi(l - 1) * lt <= n / 2.0, "prefix_fits");
            let gap = (3.0 * c).powi(l) * lt;
            let m = (n / 2.0 - gap) / 3.0;
            e.v("m", m);
            e.v("Delta", gap);
            e.v("k_x", n / 2.0 - total - 1.0 + lg(eps));
            e.need(m > 0.0, "output_length");
        }
        "sliding-window-existential" => {
            let (d, g, ell) = (x("d") as i64, x("g") as i64, x("ell") as i64);
            e.need(d >= 1, "d_positive");
            let bound = Ratio::new(g * d.max(1) - (ell - g + 2), d.max(1));
            e.q("g_out_max", bound);
            let g_out = opt("g_out").map_or_else(|| floor_ratio(bound), |v| v as i64);
            e.v("g_out", g_out as f64);
            e.need(Ratio::from_integer(g_out) <= bound, "good_output");
            if let (Some(n), Some(m), Some(k)) = (opt("n"), opt("m"), opt("k")) {
                let eps = eps_ok(&mut e, "eps");
                let df = d as f64;
                let need = lg(n * df - k) + m * df + 2.0 * (1.0 + lg(g_out as f64) - lg(eps));
                e.v("k_min", need);
                e.need(k <= n, "k_at_most_n");
                e.need(k >= need, "entropy");
            }
        }
        "sliding-window-explicit" => {
            let (d, g, ell) = (x("d") as i64, x("g") as i64, x("ell") as i64);
            let (m, k, k2) = (x("m"), x("k"), x("k_2ext"));
            let e2 = eps_ok(&mut e, "eps_2ext");
            e.need(d >= 1, "d_positive");
            let d = d.max(1);
            let bound = Ratio::new(g * (d + 1) - ell - 2, d);
            e.q("g_out_max", bound);
            e.q("good_outputs", Ratio::new((g - 1) * (d + 1) - ell, d));
            let g_out = opt("g_out").map_or_else(|| floor_ratio(bound).max(0), |v| v as i64);
            e.v("g_out", g_out as f64);
            e.need(Ratio::from_integer(g_out) <= bound, "good_output");
            let need = k2 + m * d as f64 - lg(e2);
            e.v("k_min", need);
            e.need(k >= need, "entropy");
            e.v("eps", 2.0 * g_out as f64 * e2);
        }
        "sliding-window-cgr" => {
            let (g, ell, n, k) = (x("g"), x("ell"), x("n"), x("k"));
            let eps = eps_ok(&mut e, "eps");
            e.need(g >= 2.0, "two_good_blocks");
            let need = 1.01 * (lg(n) + lg(ell) + 2.0 * (1.0 + lg(g - 1.0) - lg(eps)));
            e.v("k_min", need);
            e.need(k >= need, "entropy");
            e.v("m", k / 200.0 / ell);
            e.v("g_out", g - 1.0);
            e.v("d", ell);
        }
        "rate-reduction" => {
            let (g, ell) = (x("g") as i64, x("ell") as i64);
            e.need(1 <= g && g <= ell, "good_count");
            let q = if g >= 1 { ell / g } else { ell };
            e.v("floor_ell_over_g", q as f64);
            e.q("rate", Ratio::new(1, q.max(1)));
        }
        "leader-one-bit" => {
            let (ell, d) = (x("ell"), x("delta"));
            e.need(ell >= 2.0, "ell_at_least_two");
            e.need((0.0..1.0).contains(&d), "delta_range");
            e.v("eps", d + 12.0 * d * d.sqrt() + 1.0 / lg(ell).cbrt());
            e.v("stage1_rounds_max", lg(ell).ceil());
        }
        "leader-multi-bit" => {
            let d = x("delta");
            e.need(d > 0.0 && d < 0.25, "delta_range");
            e.v("eps", d + 13.0 * d * d.sqrt());
        }
        other => panic!("no oracle for {other}"),
    }
    e
}

fn close(a: f64, b: f64) -> bool {
    if !a.is_finite() || !b.is_finite() {
        return a == b || (a.is_nan() && b.is_nan());
    }
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Compares the library report to the oracle; `Err` names the first
/// disagreement.
pub fn compare(theorem: &str, inp: &BTreeMap<String, f64>) -> Result<ParamReport, String> {
    let r = param_report(theorem, inp).map_err(|e| format!("{theorem}: {e}"))?;
    let e = expected(theorem, inp);
    let keys_r: BTreeSet<_> = r.values.keys().collect();
    let keys_e: BTreeSet<_> = e.values.keys().collect();
    if keys_r != keys_e {
        return Err(format!("{theorem}: value names {keys_r:?} vs {keys_e:?}"));
    }
    for (k, want) in &e.values {
        let got = r.values[k];
        if !close(got, *want) {
            return Err(format!("{theorem}: {k} = {got}, expected {want}"));
        }
    }
    for (k, q) in &e.exact {
        let want = format!("{}/{}", q.numer(), q.denom());
        if r.exact.get(k) != Some(&want) {
            return Err(format!("{theorem}: exact {k} = {:?}, expected {want}", r.exact.get(k)));
        }
    }
    let violated: BTreeSet<String> = r.violated.iter().cloned().collect();
    if violated != e.violated {
        return Err(format!("{theorem}: violated {violated:?}, expected {:?}", e.violated));
    }
    if r.feasible != e.violated.is_empty() {
        return Err(format!("{theorem}: feasible flag {}", r.feasible));
    }
    if r.constants != e.constants {
        return Err(format!("{theorem}: constants {:?} vs {:?}", r.constants, e.constants));
    }
    Ok(r)
}

pub fn inputs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// One feasible and one infeasible instance per theorem.
pub fn param_cases() -> Vec<(&'static str, BTreeMap<String, f64>)> {
    vec![
        ("split-condenser-simplified", inputs(&[("ell", 1000.0), ("n", 10000.0), ("eps", 0.01)])),
        ("split-condenser-simplified", inputs(&[("ell", 10.0), ("n", 10.0), ("eps", 0.01), ("c_pre", 3.0), ("c_out", 2.0)])),
        ("split-condenser-general", inputs(&[("g", 60.0), ("ell", 100.0), ("n", 8.0), ("e", 10.0), ("eps", 0.001)])),
        ("split-condenser-general", inputs(&[("g", 52.0), ("ell", 100.0), ("n", 8.0), ("e", 2.5), ("eps", 0.001)])),
        ("split-condenser-small-n", inputs(&[("g", 600.0), ("ell", 1000.0), ("n", 4.0), ("delta", 0.1), ("eps", 1e-6)])),
        ("split-condenser-small-n", inputs(&[("g", 550.0), ("ell", 20.0), ("n", 64.0), ("delta", 0.1), ("eps", 0.5), ("c_pre", 1.0)])),
        ("split-condenser-large-n", inputs(&[("g", 6.0), ("ell", 10.0), ("n", 1000.0), ("delta", 0.1), ("eps", 0.01)])),
        ("split-condenser-large-n", inputs(&[("g", 5.0), ("ell", 10.0), ("n", 4.0), ("delta", 0.1), ("eps", 0.01)])),
        ("two-source-condenser", inputs(&[("g", 6.0), ("ell", 10.0), ("n_x", 100.0), ("n_y", 10.0), ("eps", 0.01)])),
        ("two-source-condenser", inputs(&[("g", 1.0), ("ell", 10.0), ("n_x", 4.0), ("n_y", 10.0), ("eps", 0.01)])),
        ("seeded-condenser", inputs(&[("n", 64.0), ("k", 20.0), ("d", 16.0), ("eps", 0.01), ("c_out", 1.0)])),
        ("seeded-condenser", inputs(&[("n", 64.0), ("k", 80.0), ("d", 4.0), ("eps", 0.01)])),
        ("xor-condenser", inputs(&[("n", 1e6), ("g", 2.0), ("ell", 3.0), ("C", 1.0), ("eps", 0.01)])),
        ("xor-condenser", inputs(&[("n", 8.0), ("g", 2.0), ("ell", 2.0), ("C", 1.0), ("eps", 0.5)])),
        ("sliding-window-existential", inputs(&[("d", 3.0), ("g", 8.0), ("ell", 10.0)])),
        (
            "sliding-window-existential",
            inputs(&[("d", 2.0), ("g", 8.0), ("ell", 10.0), ("n", 64.0), ("m", 4.0), ("k", 32.0), ("eps", 0.01), ("g_out", 6.0)]),
        ),
        (
            "sliding-window-explicit",
            inputs(&[("d", 2.0), ("g", 7.0), ("ell", 10.0), ("m", 2.0), ("k", 20.0), ("k_2ext", 8.0), ("eps_2ext", 0.01)]),
        ),
        (
            "sliding-window-explicit",
            inputs(&[
                ("d", 1.0),
                ("g", 3.0),
                ("ell", 10.0),
                ("m", 2.0),
                ("k", 5.0),
                ("k_2ext", 8.0),
                ("eps_2ext", 0.01),
                ("g_out", 4.0),
            ]),
        ),
        ("sliding-window-cgr", inputs(&[("g", 3.0), ("ell", 4.0), ("n", 1024.0), ("k", 40.0), ("eps", 0.01)])),
        ("sliding-window-cgr", inputs(&[("g", 1.0), ("ell", 4.0), ("n", 1024.0), ("k", 4.0), ("eps", 0.01)])),
        ("rate-reduction", inputs(&[("g", 3.0), ("ell", 10.0)])),
        ("rate-reduction", inputs(&[("g", 11.0), ("ell", 10.0)])),
        ("leader-one-bit", inputs(&[("ell", 1024.0), ("delta", 0.1)])),
        ("leader-one-bit", inputs(&[("ell", 1.0), ("delta", 0.1)])),
        ("leader-multi-bit", inputs(&[("delta", 0.1)])),
        ("leader-multi-bit", inputs(&[("delta", 0.3)])),
    ]
}
