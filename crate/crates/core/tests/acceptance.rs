//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Checks are computed here from outcomes and instances; optima
//! come from exhaustive enumeration.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use care::care_co::run_care_co;
use care::care_no::{run_care_no, CareNoOutput, NoMode};
use care::flow::{
    build_assignment_network, max_cardinality, max_reputation, max_reputation_min_cost, min_weight_at_cardinality,
    min_weight_min_cost, unbounded_caps,
};
use care::harness::{
    random_instance, run_experiment, trial_seed, GeneratorParams, MechanismKind, RandomSpec, Sweep, SweepAxis,
};
use care::model::{validate, Assignment, Instance, Outcome, Rational};
use care::oracle::{
    check_lemma1, check_lemma2, check_lemma3, check_padding_bound, ip_enumerate, opt_cooperative, opt_noncooperative,
    truthfulness_probe, CareCoMechanism, CareNoExpectedMechanism, GridSpec, IpConstraints, IpObjective, Mechanism,
};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

const BASE_SEED: u64 = 0;

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict {
            pass,
            detail,
            notes: Vec::new(),
        }
    }
}

fn corpus(spec: &RandomSpec, count: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|t| random_instance(spec, trial_seed(BASE_SEED, t)))
        .collect()
}

/// The first `count` instances that pass validation.
fn valid_corpus(spec: &RandomSpec, count: usize) -> Vec<Instance> {
    (0u64..)
        .map(|t| random_instance(spec, trial_seed(BASE_SEED, t)))
        .filter(|i| validate(i).iter().all(|v| v.is_warning()))
        .take(count)
        .collect()
}

fn buckets(inst: &Instance) -> Vec<Outcome> {
    match run_care_no(inst, NoMode::Expectation) {
        CareNoOutput::Expectation(d) => d.per_bucket,
        CareNoOutput::Sampled { outcome, .. } => vec![outcome],
    }
}

fn ir_violations(inst: &Instance, o: &Outcome) -> usize {
    o.assignment
        .workers()
        .filter(|w| match o.payments.get(w) {
            Some(p) => p.amount < inst.worker(w.index()).bid,
            None => true,
        })
        .count()
}

/// Per-(group, requester) counts within τ and payments only to assigned
/// workers from their requester.
fn structural_ok(inst: &Instance, o: &Outcome) -> bool {
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (w, r) in o.assignment.iter() {
        *counts
            .entry((inst.worker(w.index()).group.index(), r.index()))
            .or_default() += 1;
    }
    counts.iter().all(|(&(g, j), &c)| c <= inst.tau().get(g, j))
        && o.payments
            .iter()
            .all(|(w, p)| o.assignment.requester_of(*w) == Some(p.requester))
}

fn spend(o: &Outcome, m: usize) -> Vec<Rational> {
    let mut s = vec![Rational::zero(); m];
    for p in o.payments.values() {
        s[p.requester.index()] += p.amount.as_rational();
    }
    s
}

fn criterion1() -> Verdict {
    let insts = corpus(&RandomSpec::small(30, 6, 8), 500);
    let bad: Vec<(usize, usize)> = insts
        .par_iter()
        .map(|inst| {
            let co = ir_violations(inst, &run_care_co(inst));
            let no: usize = buckets(inst).iter().map(|o| ir_violations(inst, o)).sum();
            (co, no)
        })
        .collect();
    let co: usize = bad.iter().map(|b| b.0).sum();
    let no: usize = bad.iter().map(|b| b.1).sum();
    Verdict::new(
        co + no == 0,
        format!(
            "500 instances (n<=30, m<=6, L<=8): care-co {} / care-no {} winners paid below bid",
            co, no
        ),
    )
}

fn criterion2() -> Verdict {
    let insts = corpus(&RandomSpec::small(30, 6, 8), 500);
    let bad: Vec<(usize, usize)> = insts
        .par_iter()
        .map(|inst| {
            let o = run_care_co(inst);
            let pooled: Rational = spend(&o, inst.m()).iter().fold(Rational::zero(), |a, b| a + b);
            let co = usize::from(pooled > *inst.total_budget().as_rational() || !structural_ok(inst, &o));
            let no = buckets(inst)
                .iter()
                .filter(|o| {
                    !structural_ok(inst, o)
                        || spend(o, inst.m())
                            .iter()
                            .zip(inst.requesters())
                            .any(|(s, r)| s > r.budget.as_rational())
                })
                .count();
            (co, no)
        })
        .collect();
    let co: usize = bad.iter().map(|b| b.0).sum();
    let no: usize = bad.iter().map(|b| b.1).sum();
    Verdict::new(
        co + no == 0,
        format!(
            "500 instances: care-co {} over the pooled budget, care-no {} bucket outcomes over a requester budget",
            co, no
        ),
    )
}

fn criterion3() -> Verdict {
    let insts = corpus(&RandomSpec::small(6, 3, 3), 200);
    let spec = GridSpec::default();
    let mechanisms: [&dyn Mechanism; 2] = [&CareCoMechanism, &CareNoExpectedMechanism];
    let mut counts = [0usize; 2];
    let mut notes = Vec::new();
    for (t, inst) in insts.iter().enumerate() {
        for (k, m) in mechanisms.iter().enumerate() {
            for w in inst.workers() {
                let r = truthfulness_probe(inst, *m, w.id, &spec);
                if r.gain > Rational::zero() {
                    counts[k] += 1;
                    if notes.len() < 3 {
                        notes.push(format!(
                            "trial {}: {} worker {} cost {} gains {} bidding {}",
                            t,
                            m.name(),
                            w.id,
                            w.true_cost(),
                            r.gain,
                            r.best_bid.map(|b| b.to_string()).unwrap_or_default()
                        ));
                    }
                }
            }
        }
    }
    let mut v = Verdict::new(
        counts == [0, 0],
        format!(
            "200 instances (n<=6, m<=3): profitable deviations care-co {}, per-bucket PEA {}",
            counts[0], counts[1]
        ),
    );
    v.notes = notes;
    v
}

/// `α = min{m, max ⌈|G_l| / τ_lj⌉}`, a zero threshold on a non-empty group
/// counting as unbounded.
fn alpha(inst: &Instance) -> u64 {
    let m = inst.m() as u64;
    let mut worst = 0u64;
    for (l, members) in inst.groups().iter().enumerate() {
        for j in 0..inst.m() {
            let (size, t) = (members.len() as u64, inst.tau().get(l, j));
            if size > 0 {
                worst = worst.max(if t == 0 { m } else { size.div_ceil(t) });
            }
        }
    }
    worst.min(m)
}

/// Smallest `γ ≥ 1` with `v_max / v_min ≤ ε^γ`.
fn gamma(inst: &Instance) -> u64 {
    let v = inst.workers().iter().map(|w| w.reputation.clone());
    let (lo, hi) = v.fold((None::<Rational>, None::<Rational>), |(lo, hi), x| {
        (
            Some(lo.map_or(x.clone(), |l| l.min(x.clone()))),
            Some(hi.map_or(x.clone(), |h| h.max(x))),
        )
    });
    let rho = hi.unwrap() / lo.unwrap();
    let mut g = 1;
    let mut p = inst.epsilon().clone();
    while rho > p {
        p *= inst.epsilon();
        g += 1;
    }
    g
}

fn criterion4() -> Verdict {
    let insts = valid_corpus(&RandomSpec::small(10, 3, 4), 300);
    let results: Vec<(bool, bool, bool)> = insts
        .par_iter()
        .map(|inst| {
            let int = |x: u64| Rational::from_integer(x.into());
            let co_bound = int(2) + inst.v_max() / inst.v_min();
            let no_bound = (int(2) * int(alpha(inst)) + int(1)) * inst.epsilon() * int(gamma(inst));
            let opt_co = opt_cooperative(inst).expect("within enumeration bounds").value;
            let opt_no = opt_noncooperative(inst).expect("within enumeration bounds").value;
            let alg_co: Rational = run_care_co(inst)
                .assignment
                .workers()
                .fold(Rational::zero(), |a, w| a + &inst.worker(w.index()).reputation);
            let outs = buckets(inst);
            let total: Rational = outs
                .iter()
                .flat_map(|o| o.assignment.workers())
                .fold(Rational::zero(), |a, w| a + &inst.worker(w.index()).reputation);
            let alg_no = total / int(outs.len() as u64);
            let co_bad = opt_co > co_bound * &alg_co;
            let no_bad = opt_no > no_bound * &alg_no;
            (co_bad, no_bad, no_bad && alg_no.is_zero())
        })
        .collect();
    let co = results.iter().filter(|r| r.0).count();
    let no = results.iter().filter(|r| r.1).count();
    let no_zero = results.iter().filter(|r| r.2).count();
    Verdict::new(
        co + no == 0,
        format!(
            "300 valid instances (n<=10, m<=3): care-co ratio violations {}, care-no {} ({} with E[ALG] = 0)",
            co, no, no_zero
        ),
    )
}

fn positions(workers: &[usize], a: &Assignment) -> Vec<usize> {
    let mut p: Vec<usize> = a
        .workers()
        .map(|w| workers.iter().position(|&x| x == w.index()).unwrap() + 1)
        .collect();
    p.sort();
    p
}

/// Number of objectives on which the flow solvers disagree with enumeration.
fn flow_mismatches(seed: u64) -> usize {
    let inst = random_instance(&RandomSpec::small(8, 3, 4), seed);
    let mut r = care::rng::stream(seed, 99);
    let mut workers: Vec<usize> = (0..inst.n()).filter(|_| r.gen_bool(0.85)).collect();
    workers.shuffle(&mut r);
    let caps: Vec<u64> = (0..inst.m()).map(|_| r.gen_range(0..=inst.n() as u64)).collect();
    let c = IpConstraints {
        workers: workers.clone(),
        caps: caps.clone(),
    };
    let mut bad = 0;
    let card = ip_enumerate(&inst, IpObjective::MaxCardinality, &c)
        .unwrap()
        .assignment
        .len() as u64;
    let flow = max_cardinality(&build_assignment_network(&inst, &workers, &caps)).flow_value;
    bad += usize::from(card != flow);
    let free = IpConstraints {
        workers: workers.clone(),
        caps: unbounded_caps(&inst),
    };
    let rep = ip_enumerate(&inst, IpObjective::MaxReputation, &free).unwrap().value;
    bad += usize::from(max_reputation(&inst, &workers).objective != rep);
    bad += usize::from(max_reputation_min_cost(&inst, &workers).objective != rep);
    for k in 0..=card {
        let ip = ip_enumerate(&inst, IpObjective::MinWeightAt(k), &c).unwrap();
        let want = positions(&workers, &ip.assignment);
        for got in [
            min_weight_at_cardinality(&inst, &workers, k, &caps),
            min_weight_min_cost(&inst, &workers, k, &caps),
        ] {
            bad += usize::from(got.map_or(true, |g| {
                g.objective != ip.value || positions(&workers, &g.assignment) != want
            }));
        }
    }
    bad
}

fn criterion5() -> Verdict {
    let bad: usize = (0..1000u64).into_par_iter().map(flow_mismatches).sum();
    Verdict::new(
        bad == 0,
        format!(
            "1000 instances (n<=8, m<=3): {} mismatches over max-cardinality, max-reputation, min-weight@K",
            bad
        ),
    )
}

fn criterion6() -> Verdict {
    let insts = corpus(&RandomSpec::small(7, 3, 3), 200);
    let names = ["lemma 1", "lemma 2", "lemma 3", "padding bound"];
    let counts: Vec<[usize; 4]> = insts
        .par_iter()
        .map(|inst| {
            let count = |r: Result<Vec<_>, _>| r.map_or(1, |v: Vec<_>| v.len());
            [
                check_lemma1(inst).len(),
                count(check_lemma2(inst)),
                count(check_lemma3(inst)),
                count(check_padding_bound(inst)),
            ]
        })
        .collect();
    let totals: Vec<usize> = (0..4).map(|k| counts.iter().map(|c| c[k]).sum()).collect();
    let parts: Vec<String> = names.iter().zip(&totals).map(|(n, c)| format!("{} {}", n, c)).collect();
    Verdict::new(
        totals.iter().all(|&c| c == 0),
        format!("200 instances (n<=7, m<=3), violations: {}", parts.join(", ")),
    )
}

fn mean(r: &Rational) -> f64 {
    care::model::Money::from_rational(r.clone())
        .map(|m| m.to_f64())
        .unwrap_or(f64::NAN)
}

fn criterion7() -> Verdict {
    let start = Instant::now();
    let params = GeneratorParams::default();
    let seeds: Vec<u64> = (0..10).map(|k| trial_seed(BASE_SEED, k)).collect();
    let mechs = [MechanismKind::CareCo, MechanismKind::CareNo, MechanismKind::Ranpri];
    let mut points = 0usize;
    let mut co_ge_no = 0usize;
    let mut co_gt_ran = 0usize;
    let mut no_gt_ran = 0usize;
    let mut trend_ok = true;
    let mut failures = 0usize;
    let mut notes = Vec::new();
    for axis in [SweepAxis::Requesters, SweepAxis::Groups] {
        let report = run_experiment(&Sweep::default_for(axis), &params, &seeds, &mechs);
        failures += report.failures.len();
        let mut means: BTreeMap<(usize, MechanismKind), Rational> = BTreeMap::new();
        for row in &report.rows {
            *means.entry((row.value, row.mechanism)).or_insert_with(Rational::zero) += &row.reputation;
        }
        let prev: &mut [Option<Rational>; 2] = &mut [None, None];
        for &v in &report.points {
            let get = |m| means.get(&(v, m)).cloned().unwrap_or_else(Rational::zero);
            let (co, no, ran) = (
                get(MechanismKind::CareCo),
                get(MechanismKind::CareNo),
                get(MechanismKind::Ranpri),
            );
            points += 1;
            co_ge_no += usize::from(co >= no);
            co_gt_ran += usize::from(co > ran);
            no_gt_ran += usize::from(no > ran);
            if axis == SweepAxis::Groups {
                for (k, x) in [&co, &no].into_iter().enumerate() {
                    if prev[k].as_ref().is_some_and(|p| x < p) {
                        trend_ok = false;
                    }
                    prev[k] = Some(x.clone());
                }
            }
            let n = seeds.len() as f64;
            notes.push(format!(
                "{}={:<3} care-co {:>7.3}  care-no {:>7.3}  ranpri {:>7.3}",
                axis.label(),
                v,
                mean(&co) / n,
                mean(&no) / n,
                mean(&ran) / n
            ));
        }
    }
    let elapsed = start.elapsed();
    // ≥ 95% of the points, rounded up
    let need = (points * 95).div_ceil(100);
    let pass = failures == 0
        && elapsed < Duration::from_secs(15 * 60)
        && co_ge_no >= need
        && co_gt_ran >= need
        && no_gt_ran >= need
        && trend_ok;
    let mut v = Verdict::new(
        pass,
        format!(
            "{} points x 10 seeds in {:.1}s: co>=no {}/{}, co>ranpri {}/{}, no>ranpri {}/{} (need {}), group trend {}, failures {}",
            points,
            elapsed.as_secs_f64(),
            co_ge_no,
            points,
            co_gt_ran,
            points,
            no_gt_ran,
            points,
            need,
            if trend_ok { "non-decreasing" } else { "decreasing somewhere" },
            failures
        ),
    );
    v.notes = notes;
    v
}

fn criterion8() -> Verdict {
    let dir = std::env::temp_dir().join(format!("care-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.json");
    let gen = Command::new(env!("CARGO_BIN_EXE_care"))
        .args(["gen", "--seed", "3", "--out", inst.to_str().unwrap()])
        .status()
        .expect("binary runs");
    assert!(gen.success());
    let small = dir.join("small.json");
    std::fs::write(
        &small,
        care::model::serialize_instance(&random_instance(&RandomSpec::small(8, 3, 3), 5)),
    )
    .unwrap();
    let csv = dir.join("bench.csv");
    let (i, s, c) = (inst.to_str().unwrap(), small.to_str().unwrap(), csv.to_str().unwrap());
    let runs: Vec<Vec<&str>> = vec![
        vec!["run", "--mode", "co", "--instance", i],
        vec!["run", "--mode", "no", "--instance", i, "--seed", "17"],
        vec!["run", "--mode", "no", "--instance", i, "--expectation"],
        vec!["gen", "--seed", "8"],
        vec!["oracle", "--instance", s, "--setting", "co"],
        vec!["oracle", "--instance", s, "--setting", "no"],
        vec!["pea-trace", "--instance", i],
        vec!["verify", "--property", "budget", "--trials", "30", "--seed", "2"],
        vec!["verify", "--property", "truthful", "--trials", "30", "--seed", "2"],
        vec![
            "bench",
            "--sweep",
            "requesters",
            "--trials",
            "2",
            "--points",
            "2,6",
            "--out",
            c,
        ],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        let outputs: Vec<_> = (0..3)
            .map(|k| {
                let mut cmd = Command::new(env!("CARGO_BIN_EXE_care"));
                if k == 2 {
                    cmd.args(["--jobs", "1"]);
                }
                let o = cmd.args(args).output().expect("binary runs");
                (o.status.code(), o.stdout)
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(args.join(" "));
        }
    }
    let mut v = Verdict::new(
        differing.is_empty(),
        format!(
            "{} invocations x 3 runs: {} with differing stdout",
            runs.len(),
            differing.len()
        ),
    );
    v.notes = differing;
    v
}

/// Name, check, and wall-clock limit where the criterion states one.
type Criterion = (&'static str, fn() -> Verdict, Option<Duration>);

fn main() {
    let criteria: [Criterion; 8] = [
        ("individual rationality", criterion1, Some(Duration::from_secs(120))),
        ("budget feasibility", criterion2, None),
        ("truthfulness", criterion3, Some(Duration::from_secs(600))),
        ("approximation ratios", criterion4, None),
        ("flow/IP equivalence", criterion5, None),
        ("lemma suite", criterion6, None),
        ("mechanism comparison", criterion7, None),
        ("CLI determinism", criterion8, None),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut v = run();
        let elapsed = start.elapsed();
        if let Some(l) = limit {
            if elapsed > *l {
                v.pass = false;
                v.detail.push_str(&format!("; over the {}s limit", l.as_secs()));
            }
        }
        failed += usize::from(!v.pass);
        println!(
            "[{}] {} {}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            k + 1,
            name,
            v.detail,
            elapsed.as_secs_f64()
        );
        for n in &v.notes {
            println!("       {}", n);
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
