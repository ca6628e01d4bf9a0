//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamsched::capacity::{MachinePark, MachineTimeline};
use streamsched::cli::JobDistribution;
use streamsched::grouping::{ceil_log2, group_index, GroupLedger, LargeJobSet, SchedulingParams};
use streamsched::oracle::{exact_optimum, grid_scan_t, naive_capacity, validate_schedule};
use streamsched::schedule::{offline_schedule, second_pass, FirstPass};
use streamsched::search::{
    enumerate_and_select, smallest_grid_t, LargeAssignment, SearchOutcome, DEFAULT_BUDGET,
};
use streamsched::Job;

use common::{desk_instance, job_list, stream, Instance};

const INSTANCES: u64 = 240;
const SLACK: f64 = 1e-9;

type Verdict = Result<String, String>;
type LedgerFactory = Box<dyn Fn() -> GroupLedger>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Verdict + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Solved {
    instance: Instance,
    params: SchedulingParams,
    optimum: f64,
}

fn solve_all() -> Vec<Solved> {
    (0..INSTANCES)
        .map(|seed| {
            let instance = desk_instance(seed);
            let params = SchedulingParams::for_park(&instance.park, instance.epsilon).unwrap();
            let optimum = exact_optimum(&instance.park, &instance.jobs, DEFAULT_BUDGET)
                .unwrap()
                .optimal_makespan;
            Solved {
                instance,
                params,
                optimum,
            }
        })
        .collect()
}

fn run_ledger(mut ledger: GroupLedger, jobs: &[Job]) -> Result<LargeJobSet, String> {
    for &job in jobs {
        ledger.ingest(job).map_err(|e| e.to_string())?;
    }
    ledger.finalize().map_err(|e| e.to_string())
}

fn streaming_outcome(s: &Solved) -> Result<(LargeJobSet, SearchOutcome), String> {
    let large = run_ledger(GroupLedger::unknown_pmax(s.params), &s.instance.jobs)?;
    let outcome = enumerate_and_select(&s.instance.park, &s.params, &large, DEFAULT_BUDGET)
        .map_err(|e| e.to_string())?;
    Ok((large, outcome))
}

fn sandwich(solved: &[Solved]) -> Verdict {
    let mut worst: f64 = 0.0;
    for s in solved {
        let (_, outcome) = streaming_outcome(s)?;
        let (v, c) = (outcome.value, s.optimum);
        ensure(
            c <= v && v <= (1.0 + s.instance.epsilon) * c * (1.0 + SLACK),
            || {
                format!(
                    "seed {}: C* = {c}, V = {v}, epsilon = {}",
                    s.instance.seed, s.instance.epsilon
                )
            },
        )?;
        worst = worst.max(v / c);
    }
    Ok(format!("{} instances, max V/C* = {worst:.4}", solved.len()))
}

fn regime_equivalence(solved: &[Solved]) -> Verdict {
    let mut compared = 0;
    for s in solved {
        let (park, jobs, params) = (&s.instance.park, &s.instance.jobs, s.params);
        let p_max = s.instance.p_max();
        let mut ledgers = vec![
            ("unknown".to_string(), GroupLedger::unknown_pmax(params)),
            (
                "given".to_string(),
                GroupLedger::given_pmax(params, p_max).unwrap(),
            ),
        ];
        for alpha in [1.0, 2.0, 8.0] {
            ledgers.push((
                format!("estimate alpha={alpha} p_E=alpha*p_max"),
                GroupLedger::estimated_pmax(params, alpha * p_max, alpha).unwrap(),
            ));
            ledgers.push((
                format!("estimate alpha={alpha} p_E=p_max"),
                GroupLedger::estimated_pmax(params, p_max, alpha).unwrap(),
            ));
        }
        let reference =
            offline_schedule(park, &params, jobs, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        for (name, ledger) in ledgers {
            let large = run_ledger(ledger, jobs)
                .map_err(|e| format!("seed {} {name}: {e}", s.instance.seed))?;
            let outcome = enumerate_and_select(park, &params, &large, DEFAULT_BUDGET)
                .map_err(|e| e.to_string())?;
            ensure(
                outcome.value.to_bits() == reference.value().to_bits(),
                || {
                    format!(
                        "seed {} {name}: V = {} but offline V = {}",
                        s.instance.seed,
                        outcome.value,
                        reference.value()
                    )
                },
            )?;
            ensure(large == reference.large, || {
                format!(
                    "seed {} {name}: large-job set differs from offline",
                    s.instance.seed
                )
            })?;
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} regime runs bit-identical to offline on {} instances",
        solved.len()
    ))
}

fn prefix_equivalence() -> Verdict {
    let param_sets = [
        (2, 1, 1.0, 1.0),
        (3, 2, 0.5, 0.5),
        (2, 2, 1.0, 0.5),
        (3, 1, 1.0, 1.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut prefixes = 0u64;
    for s in 0..50u64 {
        let (m, m1, e0, eps) = param_sets[(s % 4) as usize];
        let params = SchedulingParams::derive(m, m1, e0, eps).unwrap();
        let n = rng.gen_range(1..=1000u64);
        let hi = [16, 1000, 1 << 20][(s % 3) as usize];
        let jobs = stream(1000 + s, n, JobDistribution::UniformInt { lo: 1, hi });
        let mut unknown = GroupLedger::unknown_pmax(params);
        let mut known: Option<GroupLedger> = None;
        let mut prefix_max: f64 = 0.0;
        for (i, &job) in jobs.iter().enumerate() {
            unknown.ingest(job).map_err(|e| e.to_string())?;
            if job.processing_time > prefix_max {
                prefix_max = job.processing_time;
                let mut fresh = GroupLedger::given_pmax(params, prefix_max).unwrap();
                for &earlier in &jobs[..i] {
                    fresh.ingest(earlier).unwrap();
                }
                known = Some(fresh);
            }
            let known = known.as_mut().unwrap();
            known.ingest(job).unwrap();
            let (a, b) = (unknown.snapshot().unwrap(), known.snapshot().unwrap());
            ensure(a == b, || {
                format!("stream {s}, prefix {}: ledgers differ\n{a:?}\n{b:?}", i + 1)
            })?;
            prefixes += 1;
        }
    }
    Ok(format!("50 streams, {prefixes} prefixes identical"))
}

fn two_pass(solved: &[Solved]) -> Verdict {
    let mut worst_crossing = 0;
    for s in solved {
        let (park, jobs) = (&s.instance.park, &s.instance.jobs);
        let seed = s.instance.seed;
        let (large, outcome) = streaming_outcome(s)?;
        let (t, value) = (outcome.t, outcome.value);
        let first = FirstPass::new(outcome, &large);
        let schedule = second_pass(park, &first, jobs.iter().copied())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        validate_schedule(park, jobs, &schedule).map_err(|e| format!("seed {seed}: {e}"))?;
        let counts = schedule.crossing_counts(park.m(), t);
        let allowance = s.params.crossing_allowance();
        ensure(counts[park.m1()..].iter().all(|&c| c == 0), || {
            format!("seed {seed}: crossing jobs left on trailing machines {counts:?}")
        })?;
        ensure(counts[..park.m1()].iter().all(|&c| c <= allowance), || {
            format!("seed {seed}: crossing counts {counts:?} exceed {allowance}")
        })?;
        worst_crossing = worst_crossing.max(counts.iter().copied().max().unwrap_or(0));
        let bound = (1.0 + s.instance.epsilon) * s.optimum * (1.0 + SLACK);
        ensure(schedule.makespan() <= value && value <= bound, || {
            format!(
                "seed {seed}: makespan {} V {value} bound {bound}",
                schedule.makespan()
            )
        })?;
    }
    Ok(format!(
        "{} schedules valid, max crossing jobs on one machine = {worst_crossing}",
        solved.len()
    ))
}

fn memory_bound() -> Verdict {
    let n = 1_000_000;
    let mut lines = Vec::new();
    for (m, m1, e0, eps) in [(2, 1, 1.0, 1.0), (3, 1, 0.5, 0.5)] {
        let params = SchedulingParams::derive(m, m1, e0, eps).unwrap();
        for (tag, dist) in [
            (
                "uniform",
                JobDistribution::UniformInt {
                    lo: 1,
                    hi: 1_000_000,
                },
            ),
            ("exp", JobDistribution::Exponential { mean: 100.0 }),
        ] {
            let jobs = stream(77, n, dist);
            let p_max = jobs.iter().map(|j| j.processing_time).fold(0.0, f64::max);
            let regimes = [
                ("given", GroupLedger::given_pmax(params, p_max).unwrap(), 0),
                (
                    "estimate",
                    GroupLedger::estimated_pmax(params, 8.0 * p_max, 8.0).unwrap(),
                    3,
                ),
                (
                    "estimate-tight",
                    GroupLedger::estimated_pmax(params, p_max, 8.0).unwrap(),
                    3,
                ),
                ("unknown", GroupLedger::unknown_pmax(params), 0),
            ];
            for (name, mut ledger, extra) in regimes {
                let retained_bound = params.retained_bound() as usize;
                let record_bound = params.gamma0 as usize + 2 + extra;
                for &job in &jobs {
                    ledger.ingest(job).map_err(|e| e.to_string())?;
                    if ledger.retained_jobs() > retained_bound
                        || ledger.group_records() > record_bound
                    {
                        return Err(format!(
                            "{name}/{tag} m={m}: after job {} retained {} (bound {retained_bound}), records {} (bound {record_bound})",
                            job.id,
                            ledger.retained_jobs(),
                            ledger.group_records()
                        ));
                    }
                }
                lines.push(format!(
                    "{name}/{tag}/m{m}: {}/{retained_bound} jobs, {}/{record_bound} records",
                    ledger.peak_retained(),
                    ledger.peak_group_records()
                ));
            }
        }
    }
    Ok(format!("10^6 jobs per run, peaks: {}", lines.join("; ")))
}

fn mean_ingest_ns(make: &dyn Fn() -> GroupLedger, jobs: &[Job]) -> f64 {
    let mut samples: Vec<f64> = (0..3)
        .map(|_| {
            let mut ledger = make();
            let start = Instant::now();
            for &job in jobs {
                ledger.ingest(job).unwrap();
            }
            let ns = start.elapsed().as_nanos() as f64 / jobs.len() as f64;
            std::hint::black_box(ledger.job_count());
            ns
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[1]
}

fn constant_update() -> Verdict {
    let params = SchedulingParams::derive(2, 1, 1.0, 1.0).unwrap();
    let jobs = stream(
        5,
        1_000_000,
        JobDistribution::UniformInt {
            lo: 1,
            hi: 1_000_000,
        },
    );
    let p_max = jobs.iter().map(|j| j.processing_time).fold(0.0, f64::max);
    let regimes: [(&str, LedgerFactory); 3] = [
        (
            "given",
            Box::new(move || GroupLedger::given_pmax(params, p_max).unwrap()),
        ),
        (
            "estimate",
            Box::new(move || GroupLedger::estimated_pmax(params, 4.0 * p_max, 4.0).unwrap()),
        ),
        (
            "unknown",
            Box::new(move || GroupLedger::unknown_pmax(params)),
        ),
    ];
    let mut lines = Vec::new();
    for (name, make) in &regimes {
        mean_ingest_ns(make.as_ref(), &jobs[..100_000]);
        let small = mean_ingest_ns(make.as_ref(), &jobs[..100_000]);
        let large = mean_ingest_ns(make.as_ref(), &jobs);
        let ratio = large / small;
        ensure(ratio <= 3.0, || {
            format!("{name}: {large:.1} ns/job at 10^6 vs {small:.1} at 10^5 (ratio {ratio:.2})")
        })?;
        lines.push(format!("{name} {small:.1}->{large:.1} ns ({ratio:.2}x)"));
    }
    Ok(lines.join(", "))
}

fn random_timeline(rng: &mut ChaCha8Rng, index: usize, min_ratio: f64) -> MachineTimeline {
    let count = rng.gen_range(0..8);
    let mut at = 0.0;
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        at += if rng.gen_bool(0.5) {
            rng.gen_range(1..5) as f64
        } else {
            rng.gen_range(0.01..4.0)
        };
        let ratio: f64 = if rng.gen_bool(0.5) {
            [0.25, 0.5, 1.0][rng.gen_range(0..3)]
        } else {
            rng.gen_range(0.01..=1.0)
        };
        pairs.push((at, ratio.max(min_ratio)));
    }
    MachineTimeline::from_pairs(index, &pairs).unwrap()
}

fn random_park(rng: &mut ChaCha8Rng) -> MachinePark {
    let m = rng.gen_range(1..=4);
    let m1 = rng.gen_range(1..=m);
    let e0 = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
    let machines = (0..m)
        .map(|i| random_timeline(rng, i, if i < m1 { e0 } else { 0.0 }))
        .collect();
    MachinePark::new(machines, m1, e0).unwrap()
}

fn search_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let park = random_park(&mut rng);
        let jobs: Vec<Job> = (0..rng.gen_range(0..6))
            .map(|id| Job::new(id, rng.gen_range(1..=16) as f64))
            .collect();
        let mapping = jobs.iter().map(|_| rng.gen_range(0..park.m())).collect();
        let assignment = LargeAssignment::new(mapping, &jobs, park.m(), 0);
        let large_load: f64 = assignment.per_machine_load.iter().sum();
        let total = large_load + rng.gen_range(0..40) as f64;
        let epsilon = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
        let fast =
            smallest_grid_t(&park, &assignment, total, epsilon).map_err(|e| e.to_string())?;
        let slow = grid_scan_t(&park, &assignment, total, epsilon);
        ensure(fast == slow, || {
            format!("search case {case}: {fast:?} vs {slow:?}")
        })?;
    }
    for case in 0..1000 {
        let timeline = random_timeline(&mut rng, 0, 0.0);
        let end = timeline.breakpoints().last().copied().unwrap_or(4.0);
        let t = match rng.gen_range(0..4) {
            0 if !timeline.breakpoints().is_empty() => {
                timeline.breakpoints()[rng.gen_range(0..timeline.breakpoints().len())]
            }
            1 => 0.0,
            _ => rng.gen_range(0.0..end * 1.5),
        };
        let fast = timeline.capacity_at(t).map_err(|e| e.to_string())?;
        let slow = naive_capacity(&timeline, t);
        ensure(fast.to_bits() == slow.to_bits(), || {
            format!("capacity case {case}: A({t}) = {fast} vs {slow}")
        })?;
    }
    Ok("1000 search cases and 1000 capacity cases exact".into())
}

fn saturation() -> Verdict {
    let params = SchedulingParams::derive(2, 1, 1.0, 1.0).unwrap();
    ensure(params.n0 == 16 && params.gamma0 == 2, || {
        format!("unexpected params {params:?}")
    })?;
    let mut values = vec![12.0; 16];
    values.insert(3, 20.0);
    values.insert(9, 3.0);
    values.push(40.0);
    let jobs = job_list(&values);
    let big: Vec<Job> = jobs
        .iter()
        .copied()
        .filter(|j| j.processing_time > 16.0)
        .collect();
    let regimes = [
        ("given", GroupLedger::given_pmax(params, 40.0).unwrap()),
        (
            "estimate",
            GroupLedger::estimated_pmax(params, 160.0, 4.0).unwrap(),
        ),
        ("unknown", GroupLedger::unknown_pmax(params)),
    ];
    for (name, ledger) in regimes {
        let large = run_ledger(ledger, &jobs)?;
        let q0 = large.q0.ok_or("no q0")?;
        let band = group_index(12.0, q0).map_err(|e| e.to_string())?;
        ensure(
            q0 == ceil_log2(40.0) - 3 && large.k_l == band && band == 0,
            || {
                format!(
                    "{name}: q0 = {q0}, k_L = {}, band of 12 = {band}",
                    large.k_l
                )
            },
        )?;
        ensure(large.jobs == big, || {
            format!("{name}: JS = {:?}", large.jobs)
        })?;
        ensure(large.band_top == 16.0, || {
            format!("{name}: band top {}", large.band_top)
        })?;
    }
    Ok("16 copies of 12 saturate band 0 (q0 = 3); JS = {20, 40} in every regime".into())
}

fn main() {
    let started = Instant::now();
    let solved = solve_all();
    let criteria: Vec<Criterion> = vec![
        ("1 approximation sandwich", Box::new(|| sandwich(&solved))),
        (
            "2 regime equivalence",
            Box::new(|| regime_equivalence(&solved)),
        ),
        ("3 prefix equivalence", Box::new(prefix_equivalence)),
        ("4 two-pass schedule", Box::new(|| two_pass(&solved))),
        ("5 memory bound", Box::new(memory_bound)),
        ("6 constant per-job update", Box::new(constant_update)),
        ("7 search and capacity oracles", Box::new(search_oracles)),
        ("8 k_L saturation", Box::new(saturation)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let verdict = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match verdict {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        8 - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
