//! Mechanism output against the exact optimum on small random instances,
//! with the worst-case ratio bounds for each setting.
//!
//! Run with `cargo run --release --example approximation [TRIALS]`.

use care::care_co::run_care_co;
use care::care_no::{run_care_no, CareNoOutput, NoMode};
use care::harness::{approximation_bounds, random_instance, trial_seed, RandomSpec};
use care::model::{validate, Rational};
use care::oracle::{opt_cooperative, opt_noncooperative};

fn f(r: &Rational) -> f64 {
    care::model::Money::from_rational(r.clone())
        .map(|m| m.to_f64())
        .unwrap_or(f64::NAN)
}

fn main() {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = RandomSpec::small(10, 3, 4);
    println!(
        "{:>4} {:>8} {:>8} {:>7} {:>8} {:>8} {:>7}",
        "seed", "OPT_co", "ALG_co", "bound", "OPT_no", "E[ALG]", "bound"
    );
    for t in 0..trials {
        let inst = random_instance(&spec, trial_seed(1, t));
        if validate(&inst).iter().any(|v| !v.is_warning()) {
            continue;
        }
        let (co_bound, no_bound) = approximation_bounds(&inst);
        let opt_co = opt_cooperative(&inst).expect("small instance");
        let opt_no = opt_noncooperative(&inst).expect("small instance");
        let alg_co = run_care_co(&inst).total_reputation;
        let CareNoOutput::Expectation(d) = run_care_no(&inst, NoMode::Expectation) else {
            unreachable!()
        };
        println!(
            "{:>4} {:>8.2} {:>8.2} {:>7.2} {:>8.2} {:>8.2} {:>7.1}",
            t,
            f(&opt_co.value),
            f(&alg_co),
            f(&co_bound),
            f(&opt_no.value),
            f(&d.expected_reputation),
            f(&no_bound)
        );
    }
}
