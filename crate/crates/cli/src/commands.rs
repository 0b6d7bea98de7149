use midstop::heuristic::{
    check_cor_dec, check_cor_dec_random, check_lemma4_grid, check_lemma4_sandwich, check_seq_dec,
    default_params, lower_bound_v, r1_asymptotic,
};
use midstop::policy::{backward_induction, first_stop_threshold, table1_replica};
use midstop::{AlgoSpec, BoundsReport, HeuristicParams, Mode, SimulationReport};
use serde_json::{json, Value};

use crate::args::{Algo, BoundsArgs, CheckArgs, PolicyArgs, SimulateArgs, Suite, ThresholdArgs, ValueArgs};
use crate::error::CliError;
use crate::format::{csv_table, opt_sig10, policy_csv, policy_json, sig10, Format};

/// Largest `n` for which `bounds` fills the exact-mode value column.
pub const EXACT_VALUE_BUDGET: usize = 10_000;

pub const DEFAULT_BOUNDS_GRID: [usize; 13] =
    [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000];

pub const THRESHOLD_TOLERANCE: f64 = 0.15;

/// A command's result before it is written anywhere.
#[derive(Debug, Default)]
pub struct Output {
    pub text: String,
    /// Human-readable note for stderr.
    pub note: Option<String>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub workers_used: Option<usize>,
    /// Set when a check found a violation; the text is still emitted.
    pub violation: Option<String>,
}

impl Output {
    fn text(text: String) -> Self {
        Output {
            text,
            ..Output::default()
        }
    }
}

fn num(x: f64) -> Value {
    sig10(x).parse::<serde_json::Number>().map(Value::Number).unwrap_or(Value::Null)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

pub fn policy(args: &PolicyArgs) -> Result<Output, CliError> {
    let mode = args.mode.into();
    let table = backward_induction(args.n, mode)?;
    let text = match args.output.format {
        Format::Csv => policy_csv(&table),
        Format::Json => policy_json(&table),
    };
    Ok(Output {
        mode: Some(mode),
        ..Output::text(text)
    })
}

pub fn value(args: &ValueArgs) -> Result<Output, CliError> {
    let mode: Mode = args.mode.into();
    let ns = args.n_list.clone().unwrap_or_else(|| args.n.into_iter().collect());
    if ns.contains(&0) {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let values = ns
        .iter()
        .map(|&n| backward_induction(n, mode).map(|t| (n, t.success())))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match args.output.format {
        Format::Csv => csv_table(
            &["n", "mode", "value"],
            values.iter().map(|&(n, v)| vec![n.to_string(), mode.to_string(), sig10(v)]),
        ),
        Format::Json => json_text(&Value::Array(
            values
                .iter()
                .map(|&(n, v)| json!({"n": n, "mode": mode, "value": num(v)}))
                .collect(),
        )),
    };
    Ok(Output {
        mode: Some(mode),
        ..Output::text(text)
    })
}

fn heuristic_params(n: usize, h: Option<usize>, w: Option<usize>) -> Result<HeuristicParams, CliError> {
    let (dh, dw) = match default_params(n) {
        Ok(p) => (Some(p.h), Some(p.w)),
        Err(_) => (None, None),
    };
    match (h.or(dh), w.or(dw)) {
        (Some(h), Some(w)) => Ok(HeuristicParams::new(n, h, w)?),
        _ => Err(CliError::Usage(format!("n = {n} has no default parameters; pass --h and --w"))),
    }
}

fn report_json(report: &SimulationReport) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["rate"] = num(report.rate);
    v["stderr"] = num(report.stderr);
    v
}

pub fn simulate(args: &SimulateArgs) -> Result<Output, CliError> {
    let n = args.n;
    let (algo, reference) = match args.algo {
        Algo::Optimal => {
            let mode: Mode = args.mode.into();
            let reference = if n <= EXACT_VALUE_BUDGET {
                let exact = backward_induction(n, Mode::Exact)?.success();
                Some(format!("exact optimal value {}", sig10(exact)))
            } else {
                None
            };
            (AlgoSpec::Optimal { mode }, reference)
        }
        Algo::Heuristic => {
            let params = heuristic_params(n, args.h, args.w)?;
            let reference = lower_bound_v(&params)
                .ok()
                .map(|v| format!("guaranteed lower bound v = {}", sig10(v)));
            (AlgoSpec::Heuristic { params }, reference)
        }
    };
    let run = midstop::simulator::simulate(n, &algo, args.trials, args.seed, args.workers)?;
    let r = &run.report;
    let text = match args.format {
        Format::Json => json_text(&report_json(r)),
        Format::Csv => {
            let (mode, h, w) = match r.algo {
                AlgoSpec::Optimal { mode } => (mode.to_string(), String::new(), String::new()),
                AlgoSpec::Heuristic { params } => (String::new(), params.h.to_string(), params.w.to_string()),
            };
            let algo = match r.algo {
                AlgoSpec::Optimal { .. } => "optimal",
                AlgoSpec::Heuristic { .. } => "heuristic",
            };
            csv_table(
                &["n", "algo", "mode", "h", "w", "trials", "successes", "rate", "stderr", "base_seed"],
                [vec![
                    r.n.to_string(),
                    algo.to_string(),
                    mode,
                    h,
                    w,
                    r.trials.to_string(),
                    r.successes.to_string(),
                    sig10(r.rate),
                    sig10(r.stderr),
                    r.base_seed.to_string(),
                ]],
            )
        }
    };
    let mut note = format!("rate = {} ± {}", sig10(r.rate), sig10(r.stderr));
    if let Some(reference) = reference {
        note.push_str("; ");
        note.push_str(&reference);
    }
    Ok(Output {
        text,
        note: Some(note),
        seed: Some(args.seed),
        mode: match algo {
            AlgoSpec::Optimal { mode } => Some(mode),
            AlgoSpec::Heuristic { .. } => None,
        },
        workers_used: Some(run.workers_used),
        violation: None,
    })
}

pub struct BoundsRow {
    pub report: BoundsReport,
    pub value_exact: Option<f64>,
}

pub const BOUNDS_HEADER: [&str; 14] = [
    "n",
    "h",
    "w",
    "guaranteed",
    "v",
    "v_tilde",
    "ub",
    "asymptote",
    "value_exact",
    "sqrt_n_v",
    "sqrt_n_v_tilde",
    "sqrt_n_ub",
    "sqrt_n_asymptote",
    "sqrt_n_value_exact",
];

pub fn bounds_rows(ns: &[usize], h: Option<usize>, w: Option<usize>) -> Result<Vec<BoundsRow>, CliError> {
    ns.iter()
        .map(|&n| {
            if n < 3 {
                return Err(CliError::Usage(format!("bounds needs n >= 3, got {n}")));
            }
            let report = BoundsReport::new(heuristic_params(n, h, w)?)?;
            let value_exact = if n <= EXACT_VALUE_BUDGET {
                Some(backward_induction(n, Mode::Exact)?.success())
            } else {
                None
            };
            Ok(BoundsRow { report, value_exact })
        })
        .collect()
}

pub fn bounds(args: &BoundsArgs) -> Result<Output, CliError> {
    let ns = args.n_list.clone().unwrap_or_else(|| DEFAULT_BOUNDS_GRID.to_vec());
    let rows = bounds_rows(&ns, args.h, args.w)?;
    let cells = |row: &BoundsRow| {
        let r = &row.report;
        let s = (r.n as f64).sqrt();
        let [sv, svt, sub, sa] = r.scaled();
        (
            [r.v, r.v_tilde, Some(r.ub), Some(r.asymptote), row.value_exact],
            [sv, svt, sub, sa, row.value_exact.map(|x| x * s)],
        )
    };
    let text = match args.output.format {
        Format::Csv => csv_table(
            &BOUNDS_HEADER,
            rows.iter().map(|row| {
                let r = &row.report;
                let (plain, scaled) = cells(row);
                [r.n.to_string(), r.params.h.to_string(), r.params.w.to_string(), r.guaranteed.to_string()]
                    .into_iter()
                    .chain(plain.into_iter().chain(scaled).map(opt_sig10))
                    .collect::<Vec<_>>()
            }),
        ),
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|row| {
                    let r = &row.report;
                    let (plain, scaled) = cells(row);
                    let mut obj = serde_json::Map::new();
                    obj.insert("n".into(), json!(r.n));
                    obj.insert("h".into(), json!(r.params.h));
                    obj.insert("w".into(), json!(r.params.w));
                    obj.insert("guaranteed".into(), json!(r.guaranteed));
                    for (key, x) in BOUNDS_HEADER[4..].iter().zip(plain.into_iter().chain(scaled)) {
                        obj.insert((*key).into(), opt_num(x));
                    }
                    Value::Object(obj)
                })
                .collect(),
        )),
    };
    Ok(Output::text(text))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub n: usize,
    pub r1: usize,
    pub r1_asymptotic: f64,
    pub relative_error: f64,
}

pub fn threshold_row(n: usize) -> Result<ThresholdRow, CliError> {
    if n < 3 {
        return Err(CliError::Usage(format!("threshold needs n >= 3, got {n}")));
    }
    let r1 = first_stop_threshold(n)?;
    let asym = r1_asymptotic(n)?;
    Ok(ThresholdRow {
        n,
        r1,
        r1_asymptotic: asym,
        relative_error: (r1 as f64 - asym).abs() / (n as f64 / 2.0 - asym),
    })
}

pub fn threshold(args: &ThresholdArgs) -> Result<Output, CliError> {
    let ns = args.n_list.clone().unwrap_or_else(|| vec![args.n]);
    let rows = ns.iter().map(|&n| threshold_row(n)).collect::<Result<Vec<_>, _>>()?;
    let text = match args.output.format {
        Format::Csv => csv_table(
            &["n", "r1", "r1_asymptotic", "relative_offset_error"],
            rows.iter().map(|r| {
                vec![r.n.to_string(), r.r1.to_string(), sig10(r.r1_asymptotic), sig10(r.relative_error)]
            }),
        ),
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "r1": r.r1,
                        "r1_asymptotic": num(r.r1_asymptotic),
                        "relative_offset_error": num(r.relative_error),
                    })
                })
                .collect(),
        )),
    };
    Ok(Output::text(text))
}

struct SuiteResult {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn run_l4(args: &CheckArgs) -> Result<SuiteResult, CliError> {
    match (args.s, args.w) {
        (Some(s), Some(w)) => {
            let r = check_lemma4_sandwich(s, w)?;
            Ok(SuiteResult {
                name: "l4",
                passed: r.holds(),
                detail: format!(
                    "s={s} w={w}: {} <= {} <= {} (e^(w^2/s) = {}), lower {}, upper {}",
                    sig10(r.lower),
                    sig10(r.ratio),
                    sig10(r.upper),
                    sig10(r.reference),
                    r.lower_holds,
                    r.upper_holds
                ),
            })
        }
        (s, None) => {
            let s_max = s.unwrap_or(500);
            let g = check_lemma4_grid(s_max);
            Ok(SuiteResult {
                name: "l4",
                passed: g.passed(),
                detail: format!("s in 2..={s_max}: {} checked, failures {:?}", g.checked, g.failures),
            })
        }
        (None, Some(_)) => Err(CliError::Usage("--w for the l4 suite needs --s".into())),
    }
}

fn run_dec(args: &CheckArgs) -> Result<SuiteResult, CliError> {
    let ws: Vec<usize> = args.w.map_or_else(|| (1..=5).collect(), |w| vec![w]);
    let mut passed = true;
    let mut parts = Vec::new();
    for w in ws {
        let r = check_seq_dec(w, args.m_max)?;
        passed &= r.holds();
        parts.push(format!(
            "w={w}: {} checked, failures {:?}, identity error {:.2e}",
            r.checked, r.monotone_failures, r.max_identity_error
        ));
    }
    Ok(SuiteResult {
        name: "dec",
        passed,
        detail: parts.join("; "),
    })
}

fn run_cor(args: &CheckArgs) -> Result<SuiteResult, CliError> {
    match (args.s, args.w, args.n) {
        (Some(s), Some(w), Some(n)) => {
            let ok = check_cor_dec(s, w, n)?;
            Ok(SuiteResult {
                name: "cor",
                passed: ok,
                detail: format!("s={s} w={w} n={n}: {ok}"),
            })
        }
        (None, None, None) => {
            let g = check_cor_dec_random(400, args.seed)?;
            Ok(SuiteResult {
                name: "cor",
                passed: g.passed(),
                detail: format!("{} random triples (seed {}), failures {:?}", g.checked, args.seed, g.failures),
            })
        }
        _ => Err(CliError::Usage("the cor suite takes all of --s, --w, --n or none".into())),
    }
}

fn run_threshold(args: &CheckArgs) -> Result<SuiteResult, CliError> {
    let r = threshold_row(args.n.unwrap_or(5000))?;
    Ok(SuiteResult {
        name: "threshold",
        passed: r.relative_error <= THRESHOLD_TOLERANCE,
        detail: format!(
            "n={}: r1 = {}, asymptotic r1 = {}, relative offset error = {} (tolerance {THRESHOLD_TOLERANCE})",
            r.n,
            r.r1,
            sig10(r.r1_asymptotic),
            sig10(r.relative_error)
        ),
    })
}

pub fn check(args: &CheckArgs) -> Result<Output, CliError> {
    let results = match args.suite {
        Suite::L4 => vec![run_l4(args)?],
        Suite::Dec => vec![run_dec(args)?],
        Suite::Cor => vec![run_cor(args)?],
        Suite::Threshold => vec![run_threshold(args)?],
        Suite::All => {
            let defaults = CheckArgs {
                suite: Suite::All,
                s: None,
                w: None,
                n: None,
                m_max: args.m_max,
                seed: args.seed,
                out: None,
            };
            vec![
                run_l4(&defaults)?,
                run_dec(&defaults)?,
                run_cor(&defaults)?,
                run_threshold(args)?,
            ]
        }
    };
    let mut text = String::new();
    for r in &results {
        text.push_str(&format!("{} {}: {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail));
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    Ok(Output {
        seed: Some(args.seed),
        violation: (!failed.is_empty()).then(|| failed.join(", ")),
        ..Output::text(text)
    })
}

pub fn table1() -> Result<Output, CliError> {
    let replica = table1_replica()?;
    Ok(Output {
        mode: replica.adjudicated(),
        ..Output::text(replica.render())
    })
}
