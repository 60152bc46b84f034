//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails, except those listed in
//! `KNOWN_SHORTFALLS`, which are still evaluated and reported.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use leadsto_cli::{run, EDGES_FILE, EXIT_OK, HYPOTHESES_FILE, PLOT_FILE, SUMMARY_FILE};
use leadsto_core::causal::{epsilon_avg, epsilon_x, DivisorMode};
use leadsto_core::checker::{
    evaluate, leads_to_prob, marginal_window_prob, trace_leads_to, unless_prob, until_prob,
};
use leadsto_core::dtmc::{build_dtmc, STOCHASTIC_TOLERANCE};
use leadsto_core::fdr::{analyze_z, FdrOptions, ZScores};
use leadsto_core::pctl::{parse, print, validate, Comparison, Formula, TimeBound};
use leadsto_core::traces::{load_traces, Format, Trace, TraceSet};
use oracles::{eps_avg_oracle, eps_x_oracle, ratio, to_f64, window_counts, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Criteria that cannot be met as stated; see the notes printed with them.
const KNOWN_SHORTFALLS: &[&str] = &["5b"];

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const FIXED_SEED: u64 = 1;
const PER_RUN_LIMIT: Duration = Duration::from_secs(120);

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        name,
        pass,
        detail,
    }
}

type Edges = BTreeSet<(String, String)>;

struct TreeRun {
    seed: u64,
    found: Edges,
    truth: Edges,
    elapsed: Duration,
    root_rate: f64,
    events: TraceSet,
}

fn read_pairs(path: &Path, sep: char) -> Edges {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l.split_once(sep).unwrap();
            (a.to_string(), b.to_string())
        })
        .collect()
}

fn tree_run(seed: u64) -> TreeRun {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let start = Instant::now();
    let seed_text = seed.to_string();
    let code = run([
        "leadsto",
        "generate",
        "--preset",
        "tree",
        "--trigger-prob",
        "0.9",
        "--target",
        "100000",
        "--seed",
        &seed_text,
        "--events",
        &p("events.csv"),
        "--truth",
        &p("truth.csv"),
    ]);
    assert_eq!(code, EXIT_OK, "generate failed for seed {seed}");
    let out = p("out");
    let code = run([
        "leadsto",
        "infer",
        "--input",
        &p("events.csv"),
        "--format",
        "events",
        "--tmin",
        "20",
        "--tmax",
        "40",
        "--threshold",
        "0.01",
        "--out-dir",
        &out,
    ]);
    assert_eq!(code, EXIT_OK, "infer failed for seed {seed}");
    let elapsed = start.elapsed();
    let events = load_traces(
        std::fs::File::open(p("events.csv")).unwrap(),
        Format::EventCsv,
        None,
    )
    .unwrap();
    let root = events.traces()[0].column("A").unwrap();
    let root_rate = root.iter().filter(|b| **b).count() as f64 / root.len() as f64;
    TreeRun {
        seed,
        found: read_pairs(&dir.path().join("out").join(EDGES_FILE), '\t'),
        truth: read_pairs(&dir.path().join("truth.csv"), ','),
        elapsed,
        root_rate,
        events,
    }
}

fn criterion_1(runs: &[TreeRun]) -> Outcome {
    let fixed = runs.iter().find(|r| r.seed == FIXED_SEED).unwrap();
    let tp = fixed.found.intersection(&fixed.truth).count() as f64;
    let precision = if fixed.found.is_empty() {
        0.0
    } else {
        tp / fixed.found.len() as f64
    };
    let recall = tp / fixed.truth.len() as f64;
    let discoveries: usize = runs.iter().map(|r| r.found.len()).sum();
    let false_discoveries: usize = runs
        .iter()
        .map(|r| r.found.difference(&r.truth).count())
        .sum();
    let missed: usize = runs
        .iter()
        .map(|r| r.truth.difference(&r.found).count())
        .sum();
    let fdp = if discoveries == 0 {
        0.0
    } else {
        false_discoveries as f64 / discoveries as f64
    };
    let slowest = runs.iter().map(|r| r.elapsed).max().unwrap();
    let rates: Vec<f64> = runs.iter().map(|r| r.root_rate).collect();
    let (lo, hi) = (
        rates.iter().cloned().fold(f64::INFINITY, f64::min),
        rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let shape_ok = fixed.truth.len() == 14 && fixed.events.variables().len() == 15;
    let rate_ok =
        (1.0 / 60.0..=1.0 / 40.0).contains(&lo) && (1.0 / 60.0..=1.0 / 40.0).contains(&hi);
    let pass = shape_ok
        && rate_ok
        && precision >= 0.95
        && recall >= 0.90
        && fdp <= 0.05
        && slowest <= PER_RUN_LIMIT;
    outcome(
        "1",
        "structure recovery on tree data",
        pass,
        format!(
            "seed {FIXED_SEED}: precision {precision:.3}, recall {recall:.3}; over {} seeds: \
             false discoveries {false_discoveries}/{discoveries} (proportion {fdp:.4}), missed {missed}; \
             root firing rate {lo:.4}..{hi:.4} per tick; slowest run {slowest:.2?}",
            runs.len()
        ),
    )
}

fn criterion_2(runs: &[TreeRun]) -> Outcome {
    let a = &runs[0].found;
    let b = &runs[1].found;
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    let jaccard = if union == 0.0 { 0.0 } else { inter / union };
    outcome(
        "2",
        "robustness across seeds",
        jaccard >= 0.9,
        format!(
            "seeds {} and {}: Jaccard {jaccard:.3} ({inter} shared of {union})",
            runs[0].seed, runs[1].seed
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for _ in 0..200 {
        let states = rng.gen_range(1..=5);
        let m = oracles::random_dtmc(&mut rng, states);
        let f1: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.6)).collect();
        let f2: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.3)).collect();
        let tmax = rng.gen_range(0..=6usize);
        let bound = TimeBound::Finite(tmax as u64);
        let u = until_prob(&m, &f1, &f2, bound).unwrap();
        let w = unless_prob(&m, &f1, &f2, bound).unwrap();
        for s in 0..states {
            worst = worst.max((u[s] - oracles::until_oracle(&m, &f1, &f2, tmax, s)).abs());
            worst = worst.max((w[s] - oracles::unless_oracle(&m, &f1, &f2, tmax, s)).abs());
            checks += 2;
        }
        let tmin = rng.gen_range(1..=tmax.max(1));
        let tmax = tmax.max(tmin);
        let (p, q) = (m.atom_index("p").unwrap(), m.atom_index("q").unwrap());
        let effect: Vec<bool> = (0..states).map(|s| m.holds(s, q)).collect();
        let weight: u64 = (0..states)
            .filter(|&s| m.holds(s, p))
            .map(|s| m.frequency()[s])
            .sum();
        if weight > 0 {
            let want = (0..states)
                .filter(|&s| m.holds(s, p))
                .map(|s| {
                    m.frequency()[s] as f64 * oracles::window_oracle(&m, &effect, tmin, tmax, s)
                })
                .sum::<f64>()
                / weight as f64;
            let got = leads_to_prob(
                &m,
                &Formula::atom("p"),
                &Formula::atom("q"),
                tmin as u64,
                TimeBound::Finite(tmax as u64),
            )
            .unwrap();
            worst = worst.max((got.probability - want).abs());
            checks += 1;
        }
    }
    outcome(
        "3",
        "model checking against path enumeration",
        worst <= 1e-10,
        format!("200 models, {checks} comparisons, max abs error {worst:.2e}"),
    )
}

fn criterion_4() -> (Outcome, Vec<TraceSet>) {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut mismatches = Vec::new();
    let mut checks = 0usize;
    let mut sets = Vec::new();
    for case in 0..100 {
        let atoms = rng.gen_range(2..=5);
        let len = rng.gen_range(1..=50);
        let data = TraceSet::single(oracles::random_trace(&mut rng, len, atoms));
        let tmin = rng.gen_range(1..=5usize);
        let tmax = tmin + rng.gen_range(0..=5usize);
        let name = |i: usize| Formula::atom(format!("v{i}"));
        let masks: Vec<Vec<Vec<bool>>> = (0..atoms)
            .map(|i| evaluate(&data, &name(i)).unwrap())
            .collect();
        let (t1, t2) = (tmin as u64, tmax as u64);
        for c in 0..atoms {
            for e in 0..atoms {
                let want = ratio(window_counts(
                    &|tr, t| masks[c][tr][t],
                    &masks[e],
                    tmin,
                    tmax,
                ));
                let got = trace_leads_to(&data, &name(c), &name(e), t1, t2)
                    .ok()
                    .map(|est| Q::new(est.hits() as i64, est.denominator as i64));
                checks += 1;
                if got != want {
                    mismatches.push(format!("case {case}: leads-to v{c}->v{e}"));
                }
            }
            let want = ratio(window_counts(&|_, _| true, &masks[c], tmin, tmax));
            let got = marginal_window_prob(&data, &name(c), t2 - t1 + 1, t1)
                .ok()
                .map(|est| Q::new(est.hits() as i64, est.denominator as i64));
            checks += 1;
            if got != want {
                mismatches.push(format!("case {case}: marginal v{c}"));
            }
        }
        let e = atoms - 1;
        let family: Vec<usize> = (0..e).collect();
        let family_f: Vec<Formula> = family.iter().map(|&i| name(i)).collect();
        for &c in &family {
            for &x in family.iter().filter(|&&x| x != c) {
                let term = epsilon_x(&data, &name(c), &name(x), &name(e), t1, t2).unwrap();
                let got = term.value.map(|_| {
                    Q::new(
                        term.with_cause.hits() as i64,
                        term.with_cause.denominator as i64,
                    ) - Q::new(
                        term.without_cause.hits() as i64,
                        term.without_cause.denominator as i64,
                    )
                });
                checks += 1;
                let want = eps_x_oracle(&masks[c], &masks[x], &masks[e], tmin, tmax);
                let float_ok = match (term.value, want) {
                    (Some(v), Some(w)) => v == to_f64(w) || (v - to_f64(w)).abs() < 1e-12,
                    (None, None) => true,
                    _ => false,
                };
                if got != want || !float_ok {
                    mismatches.push(format!("case {case}: eps_x c=v{c} x=v{x}"));
                }
            }
            let avg = epsilon_avg(
                &data,
                &name(c),
                &name(e),
                &family_f,
                t1,
                t2,
                DivisorMode::Defined,
                1,
            )
            .unwrap();
            let exact: Vec<Q> = avg
                .terms
                .iter()
                .filter(|t| t.value.is_some())
                .map(|t| {
                    Q::new(t.with_cause.hits() as i64, t.with_cause.denominator as i64)
                        - Q::new(
                            t.without_cause.hits() as i64,
                            t.without_cause.denominator as i64,
                        )
                })
                .collect();
            let got = (!exact.is_empty()).then(|| {
                let n = exact.len() as i64;
                exact.into_iter().sum::<Q>() / n
            });
            let want = eps_avg_oracle(c, &family, &masks, &masks[e], tmin, tmax);
            let float_ok = match (avg.eps_avg, want) {
                (Some(v), Some(w)) => (v - to_f64(w)).abs() < 1e-12,
                (None, None) => true,
                _ => false,
            };
            checks += 1;
            if got != want || !float_ok {
                mismatches.push(format!("case {case}: eps_avg c=v{c}"));
            }
        }
        sets.push(data);
    }
    let detail = if mismatches.is_empty() {
        format!("100 traces, {checks} exact comparisons, no mismatch")
    } else {
        format!("{} mismatches, first: {}", mismatches.len(), mismatches[0])
    };
    (
        outcome(
            "4",
            "trace semantics against exact window counts",
            mismatches.is_empty(),
            detail,
        ),
        sets,
    )
}

fn normal_z(n: usize, seed: u64, spike_every: Option<usize>) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let null = Normal::new(0.0, 1.0).unwrap();
    let spike = Normal::new(4.0, 1.0).unwrap();
    (0..n)
        .map(|i| match spike_every {
            Some(k) if i % k == 0 => spike.sample(&mut rng),
            _ => null.sample(&mut rng),
        })
        .collect()
}

fn as_z(values: Vec<f64>) -> ZScores {
    ZScores {
        values,
        mean: 0.0,
        sd: 1.0,
    }
}

fn criterion_5() -> Vec<Outcome> {
    let opts = FdrOptions::default();
    let pure = analyze_z(as_z(normal_z(5000, 5, None)), &opts).unwrap();
    let share = pure.significant_count() as f64 / 5000.0;
    let (d0, s0) = (pure.null.delta0, pure.null.sigma0);
    let null_ok = (-0.1..=0.1).contains(&d0) && (0.9..=1.1).contains(&s0) && share <= 0.02;

    let spiked = analyze_z(as_z(normal_z(5000, 5, Some(20))), &opts).unwrap();
    let spikes: Vec<usize> = (0..5000).filter(|i| i % 20 == 0).collect();
    let hits = spikes.iter().filter(|&&i| spiked.significant[i]).count();
    let leaks = (0..5000)
        .filter(|i| i % 20 != 0 && spiked.significant[*i])
        .count();
    let recall = hits as f64 / spikes.len() as f64;
    let leakage = leaks as f64 / (5000 - spikes.len()) as f64;
    // With the true densities, fdr < 0.01 needs z > 3.90, which an N(4, 1)
    // spike exceeds with probability about 0.54.
    let oracle_recall = 1.0 - normal_cdf(3.8970 - 4.0);
    vec![
        outcome(
            "5a",
            "fdr on a pure null",
            null_ok,
            format!(
                "delta0 {d0:.4}, sigma0 {s0:.4}, significant {}/5000 ({:.2}%)",
                pure.significant_count(),
                share * 100.0
            ),
        ),
        outcome(
            "5b",
            "fdr on a spiked mixture",
            recall >= 0.80 && leakage <= 0.05,
            format!(
                "spikes recovered {hits}/{} ({:.1}%, need >= 80%), null leakage {leaks}/{} ({:.2}%); \
                 null fit N({:.3}, {:.3}); even the exact densities recover only {:.1}% at threshold {}",
                spikes.len(),
                recall * 100.0,
                5000 - spikes.len(),
                leakage * 100.0,
                spiked.null.delta0,
                spiked.null.sigma0,
                oracle_recall * 100.0,
                opts.threshold
            ),
        ),
    ]
}

fn normal_cdf(x: f64) -> f64 {
    // Abramowitz-Stegun 7.1.26 on erf; accurate to about 1e-7.
    let t = 1.0 / (1.0 + 0.3275911 * x.abs() / std::f64::consts::SQRT_2);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-(x * x) / 2.0).exp();
    0.5 * (1.0 + erf.copysign(x))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut failures = 0;
    for _ in 0..1000 {
        let depth = rng.gen_range(0..6);
        let f = oracles::random_formula(&mut rng, depth);
        if parse(&print(&f)).ok().as_ref() != Some(&f) {
            failures += 1;
        }
    }
    let nested = parse("(a_up & b_down) U{<=inf} c_up ~>{>=1,<=4}{>=0.9} d_up");
    let expected = Formula::atom("a_up")
        .and(Formula::atom("b_down"))
        .until(Formula::atom("c_up"), TimeBound::Infinite)
        .leads_to(Formula::atom("d_up"), 1, TimeBound::Finite(4))
        .prob(Comparison::AtLeast, 0.9);
    let nested_ok = nested.as_ref().ok() == Some(&expected) && validate(&expected).is_empty();
    outcome(
        "6",
        "parser round trip",
        failures == 0 && nested_ok,
        format!(
            "{failures}/1000 round-trip failures; nested leads-to formula {}",
            if nested_ok {
                "parses to the expected tree"
            } else {
                "does not match"
            }
        ),
    )
}

fn criterion_7(trace_sets: &[TraceSet], runs: &[TreeRun]) -> Outcome {
    let mut worst = 0.0f64;
    let mut built = 0;
    for data in trace_sets.iter().chain(runs.iter().map(|r| &r.events)) {
        worst = worst.max(build_dtmc(data).unwrap().max_row_error());
        built += 1;
    }
    let example = TraceSet::single(Trace::from_labels(&["a", "b"], &["a b", "a b", "b"]).unwrap());
    let m = build_dtmc(&example).unwrap();
    let (ab, b) = (
        m.state_with_label(&["a", "b"]).unwrap(),
        m.state_with_label(&["b"]).unwrap(),
    );
    let example_ok = m.prob(ab, ab) == 0.5 && m.prob(ab, b) == 0.5 && m.prob(b, b) == 1.0;
    outcome(
        "7",
        "model construction",
        worst <= STOCHASTIC_TOLERANCE && example_ok,
        format!(
            "{built} models, max row-sum error {worst:.1e}; three-tick example T(ab,ab)={}, T(ab,b)={}, T(b,b)={}",
            m.prob(ab, ab),
            m.prob(ab, b),
            m.prob(b, b)
        ),
    )
}

/// Expression-like data: 120 genes over 48 time points, some driven by a
/// lagged regulator.
fn expression_run() -> Outcome {
    let genes = 120;
    let ticks = 48;
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let noise = Normal::new(0.0, 0.6).unwrap();
    let mut values = vec![vec![0.0f64; ticks]; genes];
    for t in 0..ticks {
        for g in 0..genes {
            let driven = g >= 20 && g % 3 == 0;
            let base = if driven && t > 0 {
                0.9 * values[g % 20][t - 1]
            } else {
                0.0
            };
            values[g][t] = base + noise.sample(&mut rng);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("expression.csv");
    let mut text = String::from("time");
    for g in 0..genes {
        text.push_str(&format!(",g{g}"));
    }
    text.push('\n');
    for t in 0..ticks {
        text.push_str(&t.to_string());
        for row in &values {
            text.push_str(&format!(",{:.4}", row[t]));
        }
        text.push('\n');
    }
    std::fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let start = Instant::now();
    let code = run([
        "leadsto".to_string(),
        "infer".into(),
        "--input".into(),
        input.to_string_lossy().into_owned(),
        "--format".into(),
        "series".into(),
        "--tmin".into(),
        "1".into(),
        "--tmax".into(),
        "1".into(),
        "--out-dir".into(),
        out.to_string_lossy().into_owned(),
    ]);
    let elapsed = start.elapsed();
    let files_ok = [HYPOTHESES_FILE, EDGES_FILE, PLOT_FILE, SUMMARY_FILE]
        .iter()
        .all(|f| out.join(f).exists());
    let rows = std::fs::read_to_string(out.join(HYPOTHESES_FILE))
        .map(|t| t.lines().count().saturating_sub(1))
        .unwrap_or(0);
    let summary = std::fs::read_to_string(out.join(SUMMARY_FILE)).unwrap_or_default();
    let field = |k: &str| {
        summary
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k}\t")).map(str::to_string))
            .unwrap_or_else(|| "?".into())
    };
    let atoms = 2 * genes;
    outcome(
        "expr",
        "expression-shaped data end to end",
        code == EXIT_OK && files_ok && rows == atoms * (atoms - 1),
        format!(
            "{genes} genes x {ticks} ticks, exit {code}, {rows} hypotheses, prima facie {}, \
             significant {}, null N({}, {}), {elapsed:.2?}",
            field("prima_facie"),
            field("significant"),
            field("null_delta0"),
            field("null_sigma0"),
        ),
    )
}

fn main() {
    let mut outcomes = Vec::new();
    let runs: Vec<TreeRun> = SEEDS.map(tree_run).collect();
    outcomes.push(criterion_1(&runs));
    outcomes.push(criterion_2(&runs));
    outcomes.push(criterion_3());
    let (c4, sets) = criterion_4();
    outcomes.push(c4);
    outcomes.extend(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7(&sets, &runs));
    outcomes.push(expression_run());

    let mut blocking = 0;
    println!();
    for o in &outcomes {
        let known = KNOWN_SHORTFALLS.contains(&o.id);
        let status = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known shortfall)",
            (false, false) => {
                blocking += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {:<4} {:<48} {status}: {}",
            o.id, o.name, o.detail
        );
    }
    println!();
    if blocking > 0 {
        println!("acceptance: {blocking} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all blocking criteria passed");
}
