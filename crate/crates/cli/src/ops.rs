// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;

use onosf::attacks;
use onosf::boolfn::{
    fourier_transform, influences, make_named_function, online_influence_fourier, online_influences, poincare_report,
    BooleanFunction, NamedFunction,
};
use onosf::pipelines::{
    address_extractor, explicit_xor_condenser, general_uni_condenser, param_report, search_xor_condenser,
    sliding_window_transform, SplitCondenserConfig, XorCondenserConfig,
};
use onosf::prims::{
    average_case_lift, gf2_multiply_extractor, inner_product_2ext, lhl_extractor, search_object,
    verify_seeded_condenser, verify_seeded_extractor, verify_two_source_extractor, SearchSpec, SearchedObject,
    SeededWidths, TwoSourceExtractor, VerificationReport, Verified,
};
use onosf::protocols::{
    estimate_leader_quality, run_protocol, survivor_claim_check, two_stage_leader_election, ConstantPlayers,
    CrowdingAdversary, FinalStage, PlayerAdversary, ProtocolSpec, RoundKind, StageConstants, Variant,
};
use onosf::sources::{
    brute_force_oi_b, monte_carlo_bias, optimal_online_bias, ConstantAdversary, GoodBlockModel, OnlineAdversary,
    SourceSpec, UniformRandomAdversary,
};
use onosf::{suite, Budget};
use serde::Deserialize;

use crate::args::*;
use crate::table::{Cell, ResultTable};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Exit 2 after printing, e.g. an infeasible parameter report.
    Infeasible,
    /// Exit 1 after printing: some invariant check failed.
    Failed,
}

pub struct Outcome {
    pub table: ResultTable,
    pub status: Status,
}

impl From<ResultTable> for Outcome {
    fn from(table: ResultTable) -> Self {
        Outcome { table, status: Status::Ok }
    }
}

pub struct Ctx<'a> {
    pub seed: u64,
    pub budget: &'a Budget,
}

pub fn run(cmd: &Command, ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    match cmd {
        Command::Boolfn(c) => boolfn(c).map(Into::into),
        Command::Attack(c) => attack(c, ctx).map(Into::into),
        Command::Sources(c) => sources(c, ctx).map(Into::into),
        Command::Prims(c) => prims(c, ctx).map(Into::into),
        Command::Condense(c) => condense(c, ctx),
        Command::Protocol(c) => protocol(c, ctx),
        Command::VerifyAll => verify_all(ctx),
        Command::Reproduce(_) => Err(CliError::Usage("reproduce cannot be nested in a config".into())),
    }
}

/// A named function or a hex truth table over `ell` inputs.
pub fn parse_function(spec: &str, ell: u32) -> Result<BooleanFunction, CliError> {
    match spec.parse::<NamedFunction>() {
        Ok(kind) => Ok(make_named_function(&kind, ell)?),
        Err(_) => Ok(BooleanFunction::from_hex(ell, spec.strip_prefix("0x").unwrap_or(spec))?),
    }
}

fn set_label(mask: u64, ell: u32) -> String {
    let items: Vec<String> = (0..ell).filter(|i| (mask >> i) & 1 == 1).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn read_input(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

fn boolfn(cmd: &BoolfnCmd) -> Result<ResultTable, CliError> {
    match cmd {
        BoolfnCmd::Analyze(a) => {
            let f = parse_function(&a.function, a.ell)?;
            let spec = fourier_transform(&f);
            let inf = influences(&f);
            let oi = online_influences(&f);
            let mut t = ResultTable::new(&["i", "influence", "online_influence", "online_influence_fourier", "prefix_weight"]);
            for i in 1..=a.ell as usize {
                t.push(vec![
                    i.into(),
                    inf[i - 1].into(),
                    oi[i - 1].into(),
                    online_influence_fourier(&spec, i)?.into(),
                    spec.prefix_weight(i)?.into(),
                ]);
            }
            t.detail("expectation", f.expectation())?;
            t.detail("hex", f.to_hex())?;
            Ok(t)
        }
        BoolfnCmd::Poincare(a) => {
            let r = poincare_report(&parse_function(&a.function, a.ell)?);
            let mut t = ResultTable::new(&[
                "ell",
                "var_ef",
                "total_oi",
                "upper",
                "max_oi",
                "max_oi_index",
                "lower_violated",
                "upper_violated",
            ]);
            t.push(vec![
                r.ell.into(),
                r.var_ef.into(),
                r.total_oi.into(),
                r.upper.into(),
                r.max_oi.into(),
                r.max_oi_index.into(),
                r.lower_violated.into(),
                r.upper_violated.into(),
            ]);
            Ok(t)
        }
        BoolfnCmd::Fourier(a) => {
            let spec = fourier_transform(&parse_function(&a.function, a.ell)?);
            let mut t = ResultTable::new(&["set", "mask", "coefficient"]);
            for (mask, &c) in spec.coeffs().iter().enumerate() {
                if c.abs() > 1e-12 {
                    t.push(vec![set_label(mask as u64, a.ell).into(), (mask as u64).into(), c.into()]);
                }
            }
            Ok(t)
        }
    }
}

fn attack(cmd: &AttackCmd, ctx: &Ctx<'_>) -> Result<ResultTable, CliError> {
    match cmd {
        AttackCmd::Greedy(a) => {
            let f = parse_function(&a.function, a.ell)?;
            let cert = attacks::greedy_coalition(&f, a.beta, ctx.budget)?;
            let mut t = ResultTable::new(&["step", "coordinate", "score", "variance", "gain", "expectation"]);
            for (s, st) in cert.steps.iter().enumerate() {
                t.push(vec![
                    (s + 1).into(),
                    st.coordinate.into(),
                    st.score.into(),
                    st.variance.into(),
                    st.gain.into(),
                    st.expectation.into(),
                ]);
            }
            t.detail("certificate", &cert)?;
            Ok(t)
        }
        AttackCmd::Impossibility(a) => {
            let f = parse_function(&a.function, a.ell)?;
            let c = attacks::extraction_impossibility(&f, a.eps, ctx.budget)?;
            let mut t = ResultTable::new(&["eps", "size_bound", "bias", "coalition_size", "coalition"]);
            t.push(vec![
                c.eps.into(),
                c.size_bound.into(),
                c.bias.into(),
                c.certificate.coalition.len().into(),
                join(&c.certificate.coalition).into(),
            ]);
            t.detail("certificate", &c)?;
            Ok(t)
        }
        AttackCmd::Budget(a) => {
            let bound = attacks::bias_budget_bound(a.alpha, a.ell, a.b)?;
            let mut t = ResultTable::new(&["alpha", "ell", "b", "reachable_expectation"]);
            t.push(vec![a.alpha.into(), a.ell.into(), a.b.into(), bound.into()]);
            Ok(t)
        }
    }
}

fn source_setup(a: &SourceArgs) -> Result<(BooleanFunction, SourceSpec, GoodBlockModel), CliError> {
    let spec = SourceSpec::new(a.blocks, a.n, a.k.unwrap_or(a.n), a.bad.iter().copied())?;
    let f = parse_function(&a.function, spec.total_bits())?;
    let goods = GoodBlockModel::default_for(&spec);
    Ok((f, spec, goods))
}

fn sources(cmd: &SourcesCmd, ctx: &Ctx<'_>) -> Result<ResultTable, CliError> {
    match cmd {
        SourcesCmd::Bias(a) => {
            let (f, spec, goods) = source_setup(a)?;
            let r = optimal_online_bias(&f, &spec, &goods, ctx.budget)?;
            let mut t = ResultTable::new(&["uniform_e", "max_e", "min_e", "oi_b"]);
            t.push(vec![r.uniform_e.into(), r.max_e.into(), r.min_e.into(), r.oi_b.into()]);
            t.detail("max_strategy", &r.max_strategy)?;
            t.detail("min_strategy", &r.min_strategy)?;
            Ok(t)
        }
        SourcesCmd::Brute(a) => {
            let (f, spec, goods) = source_setup(a)?;
            let r = brute_force_oi_b(&f, &spec, &goods, ctx.budget)?;
            let mut t = ResultTable::new(&["uniform_e", "max_e", "min_e", "oi_b", "strategies"]);
            t.push(vec![r.uniform_e.into(), r.max_e.into(), r.min_e.into(), r.oi_b.into(), r.strategies.into()]);
            Ok(t)
        }
        SourcesCmd::Mc(a) => {
            let (f, spec, goods) = source_setup(&a.source)?;
            let adv: Box<dyn OnlineAdversary> = match a.adversary {
                SourceAdversaryArg::CrowdMax | SourceAdversaryArg::CrowdMin => Box::new(
                    onosf::sources::CrowdingAdversary::new(
                        &f,
                        &spec,
                        &goods,
                        a.adversary == SourceAdversaryArg::CrowdMax,
                        ctx.budget,
                    )?,
                ),
                SourceAdversaryArg::Random => Box::new(UniformRandomAdversary { n: spec.n, seed: ctx.seed }),
                SourceAdversaryArg::Zero => Box::new(ConstantAdversary::new(0)),
            };
            let r = monte_carlo_bias(&f, &spec, &goods, adv.as_ref(), a.trials, ctx.seed)?;
            let mut t = ResultTable::new(&["trials", "successes", "mean", "ci_low", "ci_high", "uniform_e", "bias"]);
            t.push(vec![
                r.trials.into(),
                r.successes.into(),
                r.mean.into(),
                r.ci_low.into(),
                r.ci_high.into(),
                r.uniform_e.into(),
                r.bias.into(),
            ]);
            Ok(t)
        }
    }
}

fn report_table(r: &VerificationReport) -> Result<ResultTable, CliError> {
    let mut t = ResultTable::new(&["object", "eps", "measured", "passed", "flat_sources_checked"]);
    t.push(vec![
        r.object.as_str().into(),
        r.eps.into(),
        r.measured.into(),
        r.passed.into(),
        r.flat_sources_checked.into(),
    ]);
    t.detail("report", r)?;
    Ok(t)
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{name} is required here")))
}

fn verify_object(object: &SearchedObject, a: &VerifyArgs, budget: &Budget) -> Result<VerificationReport, CliError> {
    Ok(match object {
        SearchedObject::SeededExt(e) => verify_seeded_extractor(e, a.k, a.strong, a.eps, budget)?,
        SearchedObject::SeededCond(c) => verify_seeded_condenser(c, a.k, need(a.k_out, "k-out")?, a.eps, budget)?,
        SearchedObject::TwoSourceExt(e) => verify_two_source_extractor(e, a.k, need(a.k2, "k2")?, a.eps, budget)?,
    })
}

fn prims(cmd: &PrimsCmd, ctx: &Ctx<'_>) -> Result<ResultTable, CliError> {
    match cmd {
        PrimsCmd::Verify(a) => {
            let object = match (a.construction, &a.object) {
                (Some(c), None) => {
                    let (n, m) = (need(a.n, "n")?, need(a.m, "m")?);
                    match c {
                        Construction::Lhl => SearchedObject::SeededExt(lhl_extractor(n, m)?),
                        Construction::Gf2 => SearchedObject::SeededExt(gf2_multiply_extractor(n, m)?),
                        Construction::Ip => SearchedObject::TwoSourceExt(inner_product_2ext(n, m)?),
                    }
                }
                (None, Some(path)) => {
                    let text = read_input(path)?;
                    match serde_json::from_str::<Verified>(&text) {
                        Ok(v) => v.object,
                        Err(_) => parse_json::<SearchedObject>(&text, path)?,
                    }
                }
                _ => return Err(CliError::Usage("give exactly one of --construction and --object".into())),
            };
            report_table(&verify_object(&object, a, ctx.budget)?)
        }
        PrimsCmd::Search(a) => {
            let widths = SeededWidths { n: a.n, d: a.d, m: a.m };
            let spec = match a.kind {
                PrimKind::SeededExt => SearchSpec::SeededExt { widths, k: a.k, strong: a.strong, eps: a.eps },
                PrimKind::SeededCond => {
                    SearchSpec::SeededCond { widths, k_in: a.k, k_out: need(a.k_out, "k-out")?, eps: a.eps }
                }
                PrimKind::TwoSource => SearchSpec::TwoSourceExt {
                    n1: a.n,
                    n2: a.d,
                    m: a.m,
                    k1: a.k,
                    k2: need(a.k2, "k2")?,
                    strong_first: a.strong,
                    eps: a.eps,
                },
            };
            let found = search_object(&spec, ctx.seed, a.tries, ctx.budget)?;
            if let Some(path) = &a.save {
                let text = serde_json::to_string_pretty(&found).map_err(|e| CliError::Internal(e.to_string()))?;
                fs::write(path, text + "\n").map_err(|e| CliError::Internal(format!("cannot write {path}: {e}")))?;
            }
            let mut t = report_table(&found.report)?;
            t.detail("object", &found.object)?;
            Ok(t)
        }
        PrimsCmd::Lift(a) => {
            let p = average_case_lift(a.k1, a.eps, a.eta)?;
            let mut t = ResultTable::new(&["k1", "eps", "vacuous"]);
            t.push(vec![p.k1.into(), p.eps.into(), p.vacuous.into()]);
            Ok(t)
        }
    }
}

#[derive(Deserialize)]
struct XorRun {
    n: u32,
    #[serde(flatten)]
    cfg: XorCondenserConfig,
}

#[derive(Deserialize)]
struct SplitRun {
    n: u32,
    #[serde(flatten)]
    cfg: SplitCondenserConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SlidingRun {
    n: u32,
    d: usize,
    two_ext: TwoSourceExtractor,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddressRun {
    n: u32,
}

fn parse_blocks(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            u64::from_str_radix(s.strip_prefix("0x").unwrap_or(s), 16)
                .map_err(|e| CliError::Usage(format!("block `{s}`: {e}")))
        })
        .collect()
}

fn condense(cmd: &CondenseCmd, ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    match cmd {
        CondenseCmd::Run(a) => {
            let blocks = parse_blocks(&read_input(&a.blocks)?)?;
            let cfg = read_input(&a.config)?;
            let outputs: Vec<u64> = match a.pipeline {
                Pipeline::Xor => {
                    let r: XorRun = parse_json(&cfg, &a.config)?;
                    vec![explicit_xor_condenser(&blocks, r.n, &r.cfg)?]
                }
                Pipeline::Split => {
                    let r: SplitRun = parse_json(&cfg, &a.config)?;
                    vec![general_uni_condenser(&blocks, r.n, &r.cfg)?]
                }
                Pipeline::Sliding => {
                    let r: SlidingRun = parse_json(&cfg, &a.config)?;
                    sliding_window_transform(&blocks, r.n, &r.two_ext, r.d)?
                }
                Pipeline::Address => {
                    let r: AddressRun = parse_json(&cfg, &a.config)?;
                    vec![address_extractor(&blocks, r.n)?]
                }
            };
            let mut t = ResultTable::new(&["index", "output"]);
            for (i, z) in outputs.iter().enumerate() {
                t.push(vec![(i + 1).into(), format!("{z:x}").into()]);
            }
            Ok(t.into())
        }
        CondenseCmd::Params(a) => {
            let mut inputs = BTreeMap::new();
            for kv in &a.inputs {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("input `{kv}` is not name=value")))?;
                let v: f64 = v.trim().parse().map_err(|e| CliError::Usage(format!("input `{kv}`: {e}")))?;
                inputs.insert(k.trim().to_string(), v);
            }
            let r = param_report(&a.theorem, &inputs)?;
            let mut t = ResultTable::new(&["section", "name", "value", "exact"]);
            for (k, v) in &inputs {
                t.push(vec!["input".into(), k.as_str().into(), (*v).into(), "".into()]);
            }
            for (k, v) in &r.constants {
                t.push(vec!["constant".into(), k.as_str().into(), (*v).into(), "".into()]);
            }
            for (k, v) in &r.values {
                let exact = r.exact.get(k).cloned().unwrap_or_default();
                t.push(vec!["value".into(), k.as_str().into(), (*v).into(), exact.into()]);
            }
            for k in &r.violated {
                t.push(vec!["violated".into(), k.as_str().into(), Cell::Text(String::new()), "".into()]);
            }
            t.detail("feasible", r.feasible)?;
            let status = if r.feasible { Status::Ok } else { Status::Infeasible };
            Ok(Outcome { table: t, status })
        }
        CondenseCmd::XorSearch(a) => {
            let (case, r) = search_xor_condenser(a.ell, a.n, &a.n_y, a.m, ctx.seed, a.tries, ctx.budget)?;
            let mut t = ResultTable::new(&["bad", "j", "b", "delta_j", "predicted_entropy", "entropy", "bound"]);
            for p in &r.patterns {
                t.push(vec![
                    join(&p.bad).into(),
                    p.j.into(),
                    p.b.into(),
                    p.delta_j.into(),
                    p.predicted_entropy.map_or(Cell::Text(String::new()), Cell::Num),
                    p.entropy.into(),
                    p.bound.into(),
                ]);
            }
            t.detail("eps", r.eps)?;
            t.detail("eps_construction", r.eps_construction)?;
            t.detail("bound_holds", r.bound_holds)?;
            t.detail("passed", r.passed)?;
            t.detail("config", &case.cfg)?;
            let status = if r.passed { Status::Ok } else { Status::Failed };
            Ok(Outcome { table: t, status })
        }
    }
}

struct ProtocolSetup {
    spec: ProtocolSpec,
    variant: Variant,
    adv: Box<dyn PlayerAdversary>,
    constants: StageConstants,
}

fn protocol_setup(
    ell: usize,
    delta: f64,
    variant: VariantArg,
    adversary: PlayerAdversaryArg,
    final_stage: FinalStageArg,
    c0: f64,
    c1: f64,
) -> Result<ProtocolSetup, CliError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(onosf::Error::InvalidParameter { name: "delta".into(), reason: format!("{delta} outside [0, 1)") }.into());
    }
    let constants = StageConstants { c0, c1, delta };
    let variant = match variant {
        VariantArg::OneBit => Variant::OneBit,
        VariantArg::MultiBit => Variant::MultiBit,
    };
    let final_stage = match final_stage {
        FinalStageArg::Index => FinalStage::IndexElection,
        FinalStageArg::Lowest => FinalStage::LowestSurvivor,
    };
    let spec = two_stage_leader_election(ell, variant, &constants, final_stage)?;
    let bad = 1..=(delta * ell as f64).floor() as usize;
    let adv: Box<dyn PlayerAdversary> = match adversary {
        PlayerAdversaryArg::Crowd => Box::new(CrowdingAdversary::new(bad, 0)),
        PlayerAdversaryArg::Constant => Box::new(ConstantPlayers::new(bad, 0)),
        PlayerAdversaryArg::Honest => Box::new(ConstantPlayers::honest()),
    };
    Ok(ProtocolSetup { spec, variant, adv, constants })
}

fn round_label(kind: &RoundKind) -> String {
    match kind {
        RoundKind::LightestBin { bins } => format!("lightest_bin:{bins}"),
        RoundKind::IndexElection => "index_election".into(),
        RoundKind::Broadcast { width } => format!("broadcast:{width}"),
    }
}

fn long_table() -> ResultTable {
    ResultTable::new(&["section", "key", "value"])
}

fn push_schedule(t: &mut ResultTable, s: &ProtocolSetup) {
    t.push(vec!["constant".into(), "c0".into(), s.constants.c0.into()]);
    t.push(vec!["constant".into(), "c1".into(), s.constants.c1.into()]);
    t.push(vec!["constant".into(), "delta".into(), s.constants.delta.into()]);
    t.push(vec!["summary".into(), "bad_players".into(), s.adv.bad_set().len().into()]);
    for (i, r) in s.spec.rounds.iter().enumerate() {
        t.push(vec!["round".into(), (i + 1).to_string().into(), round_label(r).into()]);
    }
}

fn protocol(cmd: &ProtocolCmd, ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    match cmd {
        ProtocolCmd::Elect(a) => {
            let s = protocol_setup(a.ell, a.delta, a.variant, a.adversary, a.final_stage, a.c0, a.c1)?;
            let r = estimate_leader_quality(&s.spec, s.adv.as_ref(), a.trials, ctx.seed)?;
            let mut t = long_table();
            push_schedule(&mut t, &s);
            t.push(vec!["summary".into(), "trials".into(), r.trials.into()]);
            t.push(vec!["summary".into(), "good_leaders".into(), r.good_leaders.into()]);
            t.push(vec!["summary".into(), "good_leader_freq".into(), r.good_leader_freq.into()]);
            t.push(vec!["summary".into(), "ci_low".into(), r.ci_low.into()]);
            t.push(vec!["summary".into(), "ci_high".into(), r.ci_high.into()]);
            let series: [(&str, Vec<Cell>); 4] = [
                ("survivors_mean", r.survivors_mean.iter().map(|&v| v.into()).collect()),
                ("survivors_min", r.survivors_min.iter().map(|&v| v.into()).collect()),
                ("good_survivors_mean", r.good_survivors_mean.iter().map(|&v| v.into()).collect()),
                ("good_survivors_min", r.good_survivors_min.iter().map(|&v| v.into()).collect()),
            ];
            for (name, values) in series {
                for (i, v) in values.into_iter().enumerate() {
                    t.push(vec![name.into(), (i + 1).to_string().into(), v]);
                }
            }
            for (label, count) in &r.histogram {
                t.push(vec!["histogram".into(), label.as_str().into(), (*count).into()]);
            }
            Ok(t.into())
        }
        ProtocolCmd::Survivors(a) => {
            let s = protocol_setup(a.ell, a.delta, a.variant, a.adversary, a.final_stage, a.c0, a.c1)?;
            let r = survivor_claim_check(&s.spec, s.variant, s.adv.as_ref(), a.trials, ctx.seed)?;
            let mut t = long_table();
            push_schedule(&mut t, &s);
            t.push(vec!["summary".into(), "g".into(), r.g.into()]);
            t.push(vec!["summary".into(), "trials".into(), r.trials.into()]);
            t.push(vec!["summary".into(), "satisfied".into(), r.satisfied.into()]);
            t.push(vec!["summary".into(), "fraction".into(), r.fraction.into()]);
            t.push(vec!["summary".into(), "stated_failure".into(), r.stated_failure.into()]);
            for (i, (b, m)) in r.bounds.iter().zip(&r.good_survivors_min).enumerate() {
                t.push(vec!["bound".into(), (i + 1).to_string().into(), (*b).into()]);
                t.push(vec!["good_survivors_min".into(), (i + 1).to_string().into(), (*m).into()]);
            }
            Ok(t.into())
        }
        ProtocolCmd::Transcript(a) => {
            let s = protocol_setup(a.ell, a.delta, a.variant, a.adversary, a.final_stage, a.c0, a.c1)?;
            let run = run_protocol(&s.spec, s.adv.as_ref(), ctx.seed)?;
            let mut t = ResultTable::new(&["round", "player", "message"]);
            for rec in &run.transcript {
                for &(p, m) in &rec.messages {
                    t.push(vec![rec.round.into(), p.into(), format!("{m:x}").into()]);
                }
            }
            t.detail("outcome", run.outcome.to_string())?;
            t.detail("trajectory", &run.trajectory)?;
            Ok(t.into())
        }
    }
}

fn verify_all(ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    let results = suite::verify_all(ctx.budget)?;
    let mut t = ResultTable::new(&["check", "passed", "cases", "detail"]);
    for r in &results {
        t.push(vec![r.id.as_str().into(), r.passed.into(), r.cases.into(), r.detail.as_str().into()]);
    }
    let status = if results.iter().all(|r| r.passed) { Status::Ok } else { Status::Failed };
    Ok(Outcome { table: t, status })
}
