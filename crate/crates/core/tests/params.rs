// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{compare, inputs, lg, param_cases};
use onosf::pipelines::{param_report, THEOREM_IDS};
use proptest::prelude::*;

fn value(theorem: &str, pairs: &[(&str, f64)], key: &str) -> f64 {
    compare(theorem, &inputs(pairs)).unwrap().values[key]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

#[test]
fn every_theorem_has_cases() {
    for id in THEOREM_IDS {
        assert!(param_cases().iter().any(|(t, _)| t == id), "{id}");
    }
}

#[test]
fn fixed_cases_match_oracle() {
    for (t, inp) in param_cases() {
        compare(t, &inp).unwrap();
    }
}

#[test]
fn fixed_cases_cover_both_outcomes() {
    for id in THEOREM_IDS {
        let feasible: Vec<bool> =
            param_cases().iter().filter(|(t, _)| t == id).map(|(t, i)| param_report(t, i).unwrap().feasible).collect();
        assert!(feasible.contains(&true) && feasible.contains(&false), "{id}: {feasible:?}");
    }
}

#[test]
fn split_simplified_anchor() {
    // ell n / 2 eps = 2^10 gives a log term of exactly 10.
    let p = [("ell", 16.0), ("n", 64.0), ("eps", 0.5)];
    assert!(close(value("split-condenser-simplified", &p, "m"), 0.005 * 1024.0 + 200.0 * 26.0));
    assert!(close(value("split-condenser-simplified", &p, "Delta"), 5200.0));
    assert!(close(value("split-condenser-simplified", &p, "g"), 8.16));
}

#[test]
fn split_general_anchor() {
    // Log term 10, e = 3: n_v = ceil(10/3) = 4.
    let p = [("g", 11.0), ("ell", 16.0), ("n", 64.0), ("e", 3.0), ("eps", 0.5)];
    assert_eq!(value("split-condenser-general", &p, "n_v"), 4.0);
    assert!(close(value("split-condenser-general", &p, "m"), 96.0 + 29.0 * 4.0 + 1.0));
    assert!(close(value("split-condenser-general", &p, "Delta"), 26.0 * 4.0 + 1.0));
}

#[test]
fn split_small_n_anchor() {
    let p = [("g", 14.0), ("ell", 20.0), ("n", 4.0), ("delta", 0.5), ("eps", 0.25)];
    assert!(close(value("split-condenser-small-n", &p, "m"), 20.0 + 30.0 + 2.0));
    assert!(close(value("split-condenser-small-n", &p, "Delta"), 32.0));
}

#[test]
fn split_large_n_anchor() {
    let p = [("g", 12.0), ("ell", 16.0), ("n", 64.0), ("delta", 0.5), ("eps", 0.5)];
    // seeds = (2/0.5 - 1) * 10 = 30.
    assert!(close(value("split-condenser-large-n", &p, "m"), 256.0 + 30.0 + 24.0 + 1.0));
    assert!(close(value("split-condenser-large-n", &p, "Delta"), 30.0 + 48.0 + 1.0));
}

#[test]
fn two_source_anchor() {
    let p = [("g", 6.0), ("ell", 10.0), ("n_x", 100.0), ("n_y", 10.0), ("eps", 0.25)];
    assert!(close(value("two-source-condenser", &p, "m"), 600.0 + 140.0 + 2.0));
    assert!(close(value("two-source-condenser", &p, "Delta"), 80.0 + 2.0));
}

#[test]
fn seeded_condenser_anchor() {
    let p = [("n", 64.0), ("k", 20.0), ("d", 16.0), ("eps", 0.125)];
    assert_eq!(value("seeded-condenser", &p, "k_out"), 36.0);
    assert!(close(value("seeded-condenser", &p, "m"), 39.0));
}

#[test]
fn xor_condenser_anchor() {
    // 2 ell n / eps = 2^20 with ell = 2, n = 2^16, eps = 0.25; C = 1.
    let p = [("n", 65536.0), ("g", 2.0), ("ell", 2.0), ("C", 1.0), ("eps", 0.25)];
    assert!(close(value("xor-condenser", &p, "n_y_1"), 2.0 * 3.0 * 20.0));
    assert!(close(value("xor-condenser", &p, "n_y_2"), 40.0));
    assert!(close(value("xor-condenser", &p, "log2_eps_1"), -60.0));
    assert!(close(value("xor-condenser", &p, "Delta"), 180.0));
    assert!(close(value("xor-condenser", &p, "m"), (32768.0 - 180.0) / 3.0));
    assert!(close(value("xor-condenser", &p, "k_x"), 32768.0 - 160.0 - 3.0));
}

#[test]
fn sliding_window_anchors() {
    let r = compare("sliding-window-existential", &inputs(&[("d", 3.0), ("g", 8.0), ("ell", 10.0)])).unwrap();
    assert_eq!(r.exact["g_out_max"], "20/3");
    assert_eq!(r.values["g_out"], 6.0);
    let r = compare(
        "sliding-window-explicit",
        &inputs(&[("d", 2.0), ("g", 7.0), ("ell", 10.0), ("m", 2.0), ("k", 20.0), ("k_2ext", 8.0), ("eps_2ext", 0.25)]),
    )
    .unwrap();
    assert_eq!(r.exact["g_out_max"], "9/2");
    assert_eq!(r.exact["good_outputs"], "4/1");
    assert!(close(r.values["k_min"], 14.0));
    assert!(close(r.values["eps"], 2.0));
    let cgr = [("g", 3.0), ("ell", 4.0), ("n", 256.0), ("k", 40.0), ("eps", 0.5)];
    assert!(close(value("sliding-window-cgr", &cgr, "k_min"), 1.01 * (10.0 + 6.0)));
    assert!(close(value("sliding-window-cgr", &cgr, "m"), 0.05));
}

#[test]
fn rate_and_leader_anchors() {
    let r = compare("rate-reduction", &inputs(&[("g", 3.0), ("ell", 10.0)])).unwrap();
    assert_eq!(r.exact["rate"], "1/3");
    let p = [("ell", 1024.0), ("delta", 0.04)];
    assert!(close(value("leader-one-bit", &p, "eps"), 0.04 + 12.0 * 0.008 + 10f64.powf(-1.0 / 3.0)));
    assert_eq!(value("leader-one-bit", &p, "stage1_rounds_max"), 10.0);
    assert!(close(value("leader-multi-bit", &[("delta", 0.04)], "eps"), 0.04 + 13.0 * 0.008));
}

#[test]
fn missing_input_and_unknown_theorem_error() {
    assert!(param_report("rate-reduction", &inputs(&[("g", 2.0)])).is_err());
    assert!(param_report("thm-none", &inputs(&[])).is_err());
    assert!(param_report("sliding-window-explicit", &inputs(&[("d", 1.5), ("g", 3.0), ("ell", 4.0)])).is_err());
}

fn eps() -> impl Strategy<Value = f64> {
    (1u32..1000).prop_map(|v| v as f64 / 1000.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_simplified_prop(ell in 1u32..5000, n in 1u32..20000, e in eps(), cp in 0u32..20, co in 0u32..20) {
        let i = inputs(&[("ell", ell as f64), ("n", n as f64), ("eps", e), ("c_pre", cp as f64), ("c_out", co as f64)]);
        prop_assert!(compare("split-condenser-simplified", &i).is_ok(), "{:?}", compare("split-condenser-simplified", &i));
    }

    #[test]
    fn split_general_prop(g in 1u32..200, ell in 1u32..200, n in 1u32..1000, e in 1u32..50, x in eps(), cp in 0u32..8) {
        let i = inputs(&[("g", g as f64), ("ell", ell as f64), ("n", n as f64), ("e", e as f64), ("eps", x), ("c_pre", cp as f64)]);
        prop_assert!(compare("split-condenser-general", &i).is_ok(), "{:?}", compare("split-condenser-general", &i));
    }

    #[test]
    fn split_small_and_large_prop(g in 1u32..2000, ell in 1u32..2000, n in 1u32..5000, d in 1u32..50, x in eps()) {
        let i = inputs(&[("g", g as f64), ("ell", ell as f64), ("n", n as f64), ("delta", d as f64 / 100.0), ("eps", x)]);
        prop_assert!(compare("split-condenser-small-n", &i).is_ok(), "{:?}", compare("split-condenser-small-n", &i));
        prop_assert!(compare("split-condenser-large-n", &i).is_ok(), "{:?}", compare("split-condenser-large-n", &i));
    }

    #[test]
    fn two_source_and_seeded_prop(g in 1u32..100, ell in 1u32..100, nx in 1u32..500, ny in 1u32..500, k in 1u32..500, x in eps()) {
        let i = inputs(&[("g", g as f64), ("ell", ell as f64), ("n_x", nx as f64), ("n_y", ny as f64), ("eps", x)]);
        prop_assert!(compare("two-source-condenser", &i).is_ok(), "{:?}", compare("two-source-condenser", &i));
        let s = inputs(&[("n", nx as f64), ("k", k as f64), ("d", ny as f64), ("eps", x)]);
        prop_assert!(compare("seeded-condenser", &s).is_ok(), "{:?}", compare("seeded-condenser", &s));
    }

    #[test]
    fn xor_prop(n in 2u32..1_000_000, g in 1u32..6, ell in 1u32..6, c in 1u32..40, x in eps()) {
        let i = inputs(&[("n", n as f64), ("g", g as f64), ("ell", ell as f64), ("C", c as f64 / 10.0), ("eps", x)]);
        prop_assert!(compare("xor-condenser", &i).is_ok(), "{:?}", compare("xor-condenser", &i));
    }

    #[test]
    fn sliding_prop(d in 1u32..12, g in 1u32..40, ell in 1u32..40, m in 1u32..8, k in 1u32..200, k2 in 1u32..50, x in eps()) {
        let e = inputs(&[("d", d as f64), ("g", g as f64), ("ell", ell as f64), ("n", 256.0), ("m", m as f64), ("k", k as f64), ("eps", x)]);
        prop_assert!(compare("sliding-window-existential", &e).is_ok(), "{:?}", compare("sliding-window-existential", &e));
        let ex = inputs(&[("d", d as f64), ("g", g as f64), ("ell", ell as f64), ("m", m as f64), ("k", k as f64), ("k_2ext", k2 as f64), ("eps_2ext", x)]);
        prop_assert!(compare("sliding-window-explicit", &ex).is_ok(), "{:?}", compare("sliding-window-explicit", &ex));
        let c = inputs(&[("g", g as f64), ("ell", ell as f64), ("n", 1024.0), ("k", k as f64), ("eps", x)]);
        prop_assert!(compare("sliding-window-cgr", &c).is_ok(), "{:?}", compare("sliding-window-cgr", &c));
    }

    #[test]
    fn rate_and_leader_prop(g in 1u32..100, ell in 1u32..5000, d in 0u32..100) {
        let r = inputs(&[("g", g as f64), ("ell", ell as f64)]);
        prop_assert!(compare("rate-reduction", &r).is_ok(), "{:?}", compare("rate-reduction", &r));
        let delta = d as f64 / 100.0;
        let l = inputs(&[("ell", ell as f64), ("delta", delta)]);
        prop_assert!(compare("leader-one-bit", &l).is_ok(), "{:?}", compare("leader-one-bit", &l));
        let mb = inputs(&[("delta", delta)]);
        prop_assert!(compare("leader-multi-bit", &mb).is_ok(), "{:?}", compare("leader-multi-bit", &mb));
        prop_assert!(lg(ell as f64).is_finite());
    }
}
