//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are fixed here and nowhere else.

#[path = "../../core/tests/support/reference_ward.rs"]
mod reference_ward;

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use infosel_core::{
    cluster, confusion, correlation_matrix, greedy_select, info_gain_set, mutual_information, pearson,
    ConfusionMatrix, CorrelationMatrix, Measure, MetricKey, MetricMode, MetricSet, NoiseModel, PerformanceStat,
    PerformanceTable, SelectOptions, TableBuilder,
};
use infosel_synth::fixtures::{fixture_suite, random_instance, table_from_spec};
use infosel_synth::{oracle_info_gain, Archetype, SynthSpec};
use infosel_tool::commands::{CorrelationDocument, InfoGainDocument};
use infosel_tool::heatmap::invert_color;
use reference_ward::{as_sets, distances, random_matrix, reference_partition, Lcg};

const INSTANCES: u64 = 1000;
const ROW_SUM_TOL: f64 = 1e-9;
const CEILING_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-10;
const C1_BUDGET: Duration = Duration::from_secs(10);
const SPOT_TOL: f64 = 1e-4;
const THREE_AGENT_BITS: f64 = 0.0206314214806491;
const AFFINE_CONFUSION_TOL: f64 = 1e-12;
const AFFINE_GAIN_TOL: f64 = 1e-9;
const NEUTRAL_TOL: f64 = 1e-12;
const DUPLICATE_TOL: f64 = 1e-9;
const CEILING_GAP: f64 = 0.05;
const MARGINAL_TOL: f64 = 1e-9;
const PEARSON_TRIPLE: f64 = 0.9820;
const C10_BUDGET: Duration = Duration::from_secs(5);
const COLOR_TOL: f64 = 0.5 / 255.0 + 1e-12;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn table(agents: usize, stats: &[(MetricKey, Vec<(f64, f64)>)]) -> PerformanceTable {
    let mut b = TableBuilder::new();
    for (key, cells) in stats {
        assert_eq!(cells.len(), agents);
        for (a, &(m, s)) in cells.iter().enumerate() {
            b.insert(&format!("a{a:02}"), key.clone(), PerformanceStat::new(m, s, 100));
        }
    }
    b.build().unwrap()
}

/// Copies every cell of `t` into a table whose keys are all score keys,
/// passing each through `f(key_index, stat)`.
fn as_score_table(t: &PerformanceTable, f: impl Fn(usize, &PerformanceStat) -> (f64, f64)) -> PerformanceTable {
    let mut b = TableBuilder::new();
    for (ai, agent) in t.agents().iter().enumerate() {
        for (mi, key) in t.metrics().iter().enumerate() {
            let (m, s) = f(mi, t.stat(ai, mi));
            b.insert(agent, MetricKey::score(format!("{}_{}", key.problem, key.measure)), PerformanceStat::new(m, s, 100));
        }
    }
    b.build().unwrap()
}

fn score_set(t: &PerformanceTable) -> MetricSet {
    MetricSet::new(t.metrics().to_vec()).unwrap()
}

fn c1_channel_bounds() -> Outcome {
    let start = Instant::now();
    let (mut worst_row, mut worst_excess, mut min_gain) = (0.0f64, f64::NEG_INFINITY, f64::INFINITY);
    for seed in 0..INSTANCES {
        let (t, keys) = random_instance(seed);
        let c = confusion(&t, &MetricSet::new(keys).unwrap(), NoiseModel::Sum).unwrap();
        for row in c.rows() {
            worst_row = worst_row.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        let bits = mutual_information(&c).value();
        worst_excess = worst_excess.max(bits - (t.agent_count() as f64).log2());
        min_gain = min_gain.min(bits);
    }
    let elapsed = start.elapsed();
    let ok = worst_row <= ROW_SUM_TOL && worst_excess <= CEILING_TOL && min_gain >= 0.0 && elapsed < C1_BUDGET;
    (
        ok,
        format!(
            "{INSTANCES} instances: max |row sum - 1| {worst_row:.1e}, min gain {min_gain:.3e}, max gain - log2|A| {worst_excess:.3e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..INSTANCES {
        let (t, keys) = random_instance(seed);
        let fast = info_gain_set(&t, &MetricSet::new(keys.clone()).unwrap(), NoiseModel::Sum).unwrap().value();
        let slow = oracle_info_gain(&t, &keys, NoiseModel::Sum).unwrap();
        worst = worst.max((fast - slow).abs());
    }
    (worst <= ORACLE_TOL, format!("{INSTANCES} instances: max |main - oracle| {worst:.2e} bits"))
}

fn c3_closed_forms() -> Outcome {
    let agents: Vec<String> = (0..4).map(|i| format!("a{i}")).collect();
    let identity = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let identity = mutual_information(&ConfusionMatrix::new(agents.clone(), identity).unwrap()).value();
    let uniform = mutual_information(&ConfusionMatrix::new(agents, vec![vec![0.25; 4]; 4]).unwrap()).value();
    let t = table(3, &[(MetricKey::score("g"), vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)])]);
    let bits = info_gain_set(&t, &score_set(&t), NoiseModel::Sum).unwrap().value();
    let oracle = oracle_info_gain(&t, t.metrics(), NoiseModel::Sum).unwrap();
    let exact = |x: f64, want: f64| (x - want).abs() <= 4.0 * f64::EPSILON * want.max(1.0);
    let ok = exact(identity, 2.0)
        && exact(uniform, 0.0)
        && (bits - THREE_AGENT_BITS).abs() <= SPOT_TOL
        && (oracle - THREE_AGENT_BITS).abs() <= SPOT_TOL;
    (ok, format!("identity {identity:?}, uniform {uniform:?}, 3-agent {bits:.10} (oracle {oracle:.10})"))
}

/// Largest confusion-entry and gain changes under a per-key affine map with
/// shifts `d = shift(c, u)`, `u` uniform in [-100, 100].
fn affine_sweep(shift: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let (mut worst_entry, mut worst_gain) = (0.0f64, 0.0f64);
    let scales = [1e-3, 1.0, 1e3];
    let mut rng = Lcg(4);
    for seed in 0..200 {
        let (t, _) = random_instance(seed);
        let n = t.metrics().len();
        let cs: Vec<f64> = (0..n).map(|_| scales[(rng.next() * 3.0) as usize]).collect();
        let ds: Vec<f64> = cs.iter().map(|&c| shift(c, 200.0 * rng.next() - 100.0)).collect();
        let base = as_score_table(&t, |_, s| (s.mean, s.stddev));
        let moved = as_score_table(&t, |k, s| (cs[k] * s.mean + ds[k], cs[k] * s.stddev));
        for noise in [NoiseModel::Sum, NoiseModel::Rss] {
            let a = confusion(&base, &score_set(&base), noise).unwrap();
            let b = confusion(&moved, &score_set(&moved), noise).unwrap();
            for (ra, rb) in a.rows().iter().zip(b.rows()) {
                for (x, y) in ra.iter().zip(rb) {
                    worst_entry = worst_entry.max((x - y).abs());
                }
            }
            worst_gain = worst_gain.max((mutual_information(&a).value() - mutual_information(&b).value()).abs());
        }
    }
    (worst_entry, worst_gain)
}

// Gated with shifts expressed in the rescaled units. A shift that is large
// next to c times the spread of the means is rounded away when the moved
// mean is stored (ulp(100) / 1e-3 is about 1e-11 relative), so that sweep
// is reported for information only.
fn c4_affine_invariance() -> Outcome {
    let (entry, gain) = affine_sweep(|c, u| c * u);
    let (abs_entry, abs_gain) = affine_sweep(|_, u| u);
    (
        entry <= AFFINE_CONFUSION_TOL && gain <= AFFINE_GAIN_TOL,
        format!(
            "200 instances x 2 noise models, d = c*u: max entry change {entry:.2e}, max gain change {gain:.2e} bits (absolute d: {abs_entry:.2e} / {abs_gain:.2e}, input rounding floor)"
        ),
    )
}

fn c5_neutrality_and_duplicates() -> Outcome {
    let mut worst_neutral = 0.0f64;
    let mut worst_dup = (0.0f64, 0u64);
    for seed in 0..200 {
        let (t, _) = random_instance(seed);
        let base = as_score_table(&t, |_, s| (s.mean, s.stddev));
        let before = info_gain_set(&base, &score_set(&base), NoiseModel::Sum).unwrap().value();
        let mut b = TableBuilder::new();
        for (agent, key, stat) in base.iter() {
            b.insert(agent, key.clone(), *stat);
            b.insert(agent, MetricKey::score("flat"), PerformanceStat::new(3.0, 1.0, 100));
        }
        let with_flat = b.build().unwrap();
        let after = info_gain_set(&with_flat, &score_set(&with_flat), NoiseModel::Sum).unwrap().value();
        worst_neutral = worst_neutral.max((after - before).abs());

        // exact duplicate of the first problem, then the greedy marginal of the
        // duplicate right after its source has been selected
        let source = base.metrics()[0].clone();
        let mut b = TableBuilder::new();
        for (agent, key, stat) in base.iter() {
            b.insert(agent, key.clone(), *stat);
            if *key == source {
                b.insert(agent, MetricKey::score(format!("{}~dup", source.problem)), *stat);
            }
        }
        let dup_table = b.build().unwrap();
        let options = SelectOptions {
            k: dup_table.metrics().len(),
            mode: MetricMode::Score,
            ..SelectOptions::default()
        };
        let report = greedy_select(&dup_table, &options).unwrap();
        let Some(pos) = report.steps.iter().position(|s| s.problem == source.problem) else { continue };
        let mut prefix: Vec<MetricKey> = report.steps[..=pos].iter().flat_map(|s| s.keys.clone()).collect();
        let held = info_gain_set(&dup_table, &MetricSet::new(prefix.clone()).unwrap(), NoiseModel::Sum).unwrap().value();
        prefix.push(MetricKey::score(format!("{}~dup", source.problem)));
        let marginal = info_gain_set(&dup_table, &MetricSet::new(prefix).unwrap(), NoiseModel::Sum).unwrap().value() - held;
        if marginal > worst_dup.0 {
            worst_dup = (marginal, seed);
        }
    }
    let neutral_ok = worst_neutral < NEUTRAL_TOL;
    let dup_ok = worst_dup.0 < DUPLICATE_TOL;
    (
        neutral_ok && dup_ok,
        format!(
            "(a) identical game: max change {worst_neutral:.2e} bits [{}]; (b) duplicate marginal after source selected: max {:.4e} bits (instance {}) [{}]",
            if neutral_ok { "ok" } else { "over" },
            worst_dup.0,
            worst_dup.1,
            if dup_ok { "ok" } else { "over" }
        ),
    )
}

fn c6_ceiling() -> Outcome {
    let spec = SynthSpec::cycled(27, 1, &[Archetype::LinearSpread { gap: 10.0, sd: 1.0 }], 1000, 6);
    let t = table_from_spec(&spec);
    let bits = info_gain_set(&t, &MetricSet::single(MetricKey::score("problem00")), NoiseModel::Sum).unwrap().value();
    let ceiling = 27f64.log2();
    let report = greedy_select(&t, &SelectOptions { k: 1, ..SelectOptions::default() }).unwrap();
    let ok = ceiling - bits <= CEILING_GAP && bits <= ceiling + CEILING_TOL && report.total_bits() <= ceiling + CEILING_TOL;
    (ok, format!("27 agents, 10 sd spacing: {bits:.6} bits (combined greedy {:.6}), log2(27) = {ceiling:.6}", report.total_bits()))
}

fn c7_subadditivity() -> Outcome {
    let mut checked = 0;
    let mut oracle_confirmed = 0;
    let mut beyond_oracle = 0;
    let mut violations = Vec::new();
    for (name, t) in fixture_suite() {
        for p in t.problems() {
            let g = |keys: Vec<MetricKey>| info_gain_set(&t, &MetricSet::new(keys).unwrap(), NoiseModel::Sum).unwrap().value();
            let (w, s, c) = (g(vec![MetricKey::win(&p)]), g(vec![MetricKey::score(&p)]), g(vec![MetricKey::win(&p), MetricKey::score(&p)]));
            checked += 1;
            if c > w + s + 1e-12 {
                violations.push(format!("{name}/{p}: {c:.6} > {w:.6} + {s:.6}"));
                if t.agent_count() > 8 {
                    beyond_oracle += 1;
                } else {
                    let o = |keys: Vec<MetricKey>| oracle_info_gain(&t, &keys, NoiseModel::Sum).unwrap();
                    let oc = o(vec![MetricKey::win(&p), MetricKey::score(&p)]);
                    oracle_confirmed += usize::from(oc > o(vec![MetricKey::win(&p)]) + o(vec![MetricKey::score(&p)]));
                }
            }
        }
    }
    let mut detail = format!(
        "{checked} problems across the fixture suite, {} violation(s), {oracle_confirmed} re-derived by the oracle, {beyond_oracle} beyond its agent limit",
        violations.len()
    );
    for v in violations.iter().take(5) {
        let _ = write!(detail, "; {v}");
    }
    (violations.is_empty(), detail)
}

fn c8_greedy_determinism() -> Outcome {
    let mut runs = 0;
    let mut identical = true;
    let mut worst = 0.0f64;
    for (_, t) in fixture_suite() {
        for mode in [MetricMode::WinRate, MetricMode::Score, MetricMode::Combined] {
            let serial = SelectOptions { k: 10, mode, parallel: false, ..SelectOptions::default() };
            let first = greedy_select(&t, &serial).unwrap();
            for parallel in [true, true, true, false] {
                let again = greedy_select(&t, &SelectOptions { parallel, ..serial }).unwrap();
                identical &= again == first;
                runs += 1;
            }
            let mut prev = 0.0;
            for step in &first.steps {
                worst = worst.max((step.cumulative_bits - prev - step.marginal_bits).abs());
                prev = step.cumulative_bits;
            }
        }
    }
    (
        identical && worst <= MARGINAL_TOL,
        format!("{runs} repeat runs identical: {identical}; max |cumulative step - marginal| {worst:.2e}"),
    )
}

fn two_block_matrix() -> CorrelationMatrix {
    let pattern_a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let pattern_b = [3.0, 6.0, 1.0, 5.0, 2.0, 4.0];
    let mut stats = Vec::new();
    for (i, pattern) in [pattern_a, pattern_a, pattern_a, pattern_b, pattern_b, pattern_b].iter().enumerate() {
        let cells = pattern.iter().enumerate().map(|(a, &m)| (m + 0.05 * ((i * 7 + a * 3) % 5) as f64, 1.0)).collect();
        stats.push((MetricKey::score(format!("{}{i}", if i < 3 { "a" } else { "b" })), cells));
    }
    correlation_matrix(&table(6, &stats), Measure::Score).unwrap()
}

fn c9_correlation_clustering() -> Outcome {
    let plus = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
    let minus = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
    let triple = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
    let blocks = cluster(&two_block_matrix(), 0.8).unwrap();
    let mut permutation_ok = true;
    let mut reference_ok = 0;
    for seed in 0..20 {
        let m = random_matrix(seed, 10);
        let ours = cluster(&m, 0.8).unwrap();
        if as_sets(&ours.clusters) == reference_partition(m.problems(), &distances(&m), 0.8) {
            reference_ok += 1;
        }
        let mut order = m.problems().to_vec();
        order.reverse();
        order.rotate_left(seed as usize % 10);
        let permuted = cluster(&m.reordered(&order).unwrap(), 0.8).unwrap();
        permutation_ok &= as_sets(&permuted.clusters) == as_sets(&ours.clusters);
    }
    let ok = plus == Some(1.0)
        && minus == Some(-1.0)
        && (triple - PEARSON_TRIPLE).abs() <= SPOT_TOL
        && blocks.clusters.len() == 2
        && permutation_ok
        && reference_ok == 20;
    (
        ok,
        format!(
            "pearson +1 {plus:?}, -1 {minus:?}, triple {triple:.6}; two-block -> {} clusters; permutation invariant {permutation_ok}; reference agrees {reference_ok}/20",
            blocks.clusters.len()
        ),
    )
}

fn run(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_infosel")).current_dir(dir).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn check_csv(path: &Path, header: &[&str], rows: usize) -> Result<(), String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let h: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    if h.iter().take(header.len()).map(String::as_str).ne(header.iter().copied()) {
        return Err(format!("{}: header {h:?}", path.display()));
    }
    let count = r.records().map(|x| x.map(|_| ())).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?.len();
    if count != rows {
        return Err(format!("{}: {count} rows, expected {rows}", path.display()));
    }
    Ok(())
}

fn check_svg(path: &Path, doc: &CorrelationDocument) -> Result<(usize, f64), String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let xml = roxmltree::Document::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let order = doc.clustering.display_order();
    let m = doc.matrix.reordered(&order).map_err(|e| e.to_string())?;
    let mut cells = 0;
    let mut worst = 0.0f64;
    for node in xml.descendants().filter(|n| n.tag_name().name() == "rect") {
        let class = node.attribute("class").unwrap_or("");
        if !class.split(' ').any(|c| c == "cell") {
            continue;
        }
        let idx = |a| node.attribute(a).and_then(|v: &str| v.parse::<usize>().ok()).ok_or("cell index");
        let (i, j) = (idx("data-row")?, idx("data-col")?);
        let fill = node.attribute("fill").ok_or("fill")?;
        let rgb: Vec<u8> = fill
            .trim_start_matches("rgb(")
            .trim_end_matches(')')
            .split(',')
            .map(|c| c.trim().parse().map_err(|_| format!("fill {fill}")))
            .collect::<Result<_, _>>()?;
        let rgb = (rgb[0], rgb[1], rgb[2]);
        match m.get(i, j) {
            None if rgb == (128, 128, 128) => {}
            None => return Err(format!("undefined cell ({i},{j}) coloured {fill}")),
            Some(r) => {
                let back = invert_color(rgb).ok_or_else(|| format!("{fill} is off the colour map"))?;
                worst = worst.max((back - r).abs());
            }
        }
        cells += 1;
    }
    if cells != m.len() * m.len() {
        return Err(format!("{cells} cells for a {0}x{0} matrix", m.len()));
    }
    Ok((cells, worst))
}

fn c10_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let result = (|| -> Result<String, String> {
        run(d, &["synth", "--agents", "5", "--problems", "12", "--samples", "100", "--seed", "10"])?;
        let start = Instant::now();
        run(d, &["ingest", "-i", "out/playthroughs.csv"])?;
        run(d, &["info-gain", "-i", "out/stats.json"])?;
        run(d, &["select", "-i", "out/stats.json"])?;
        run(d, &["correlate", "-i", "out/stats.json"])?;
        let elapsed = start.elapsed();
        let o = d.join("out");
        check_csv(&o.join("stats.csv"), &["agent", "problem", "measure", "mean", "stddev", "count"], 5 * 12 * 2)?;
        check_csv(
            &o.join("info_gain.csv"),
            &["rank", "win_problem", "win_bits", "score_problem", "score_bits", "combined_problem", "combined_bits"],
            12,
        )?;
        let report: infosel_core::SelectionReport =
            serde_json::from_str(&fs::read_to_string(o.join("selection.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check_csv(&o.join("selection.csv"), &["rank", "problem", "marginal_bits", "cumulative_bits"], report.steps.len())?;
        let _: InfoGainDocument =
            serde_json::from_str(&fs::read_to_string(o.join("info_gain.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let mut svg_cells = 0;
        let mut worst = 0.0f64;
        for m in ["win", "score"] {
            let doc: CorrelationDocument = serde_json::from_str(&fs::read_to_string(o.join(format!("correlation_{m}.json"))).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            check_csv(&o.join(format!("correlation_{m}.csv")), &["problem"], 12)?;
            check_csv(&o.join(format!("clusters_{m}.csv")), &["problem", "cluster_id"], 12 - doc.clustering.excluded.len())?;
            let (cells, w) = check_svg(&o.join(format!("heatmap_{m}.svg")), &doc)?;
            svg_cells += cells;
            worst = worst.max(w);
        }
        if elapsed >= C10_BUDGET {
            return Err(format!("pipeline took {:.2} s", elapsed.as_secs_f64()));
        }
        if worst > COLOR_TOL {
            return Err(format!("colour inversion error {worst:.3e}"));
        }
        Ok(format!(
            "ingest -> info-gain -> select -> correlate in {:.2} s; CSV/JSON parsed; {svg_cells} SVG cells invert within {worst:.2e}",
            elapsed.as_secs_f64()
        ))
    })();
    match result {
        Ok(detail) => (true, detail),
        Err(e) => (false, e),
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("channel bounds", c1_channel_bounds),
        ("oracle equivalence", c2_oracle_equivalence),
        ("closed-form spot checks", c3_closed_forms),
        ("affine invariance", c4_affine_invariance),
        ("neutrality and duplicate idempotence", c5_neutrality_and_duplicates),
        ("ceiling behaviour", c6_ceiling),
        ("sub-additivity audit", c7_subadditivity),
        ("greedy determinism and consistency", c8_greedy_determinism),
        ("correlation and clustering", c9_correlation_clustering),
        ("end-to-end CLI", c10_end_to_end),
    ];
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(outcome) => outcome,
            Err(p) => {
                let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        failed += usize::from(!ok);
        println!("criterion {:>2}  {}  {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    std::panic::set_hook(default_hook);
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
