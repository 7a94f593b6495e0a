//! Independent replay of the golden tick fixture, used to validate the
//! checked-in golden files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fxseason::pipeline::RunConfig;
use statrs::distribution::{ContinuousCDF, Normal};

pub const GOLDEN_FILES: [&str; 7] = [
    "midquotes_limit.csv",
    "midquotes_market.csv",
    "returns_limit.csv",
    "returns_market.csv",
    "block_summary.csv",
    "block_correlation.csv",
    "tail_estimates.csv",
];
/// Tail-size floor used for the golden run, low enough that one cell is estimated.
pub const MIN_TAIL_N: usize = 8;
const TOL: f64 = 1.5e-10;

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

/// Configuration of the golden run: defaults apart from the tail floor.
pub fn golden_config(out_dir: &Path) -> RunConfig {
    RunConfig {
        inputs: vec![tests_dir().join("fixtures/golden_ticks.csv")],
        min_tail_n: MIN_TAIL_N,
        out_dir: out_dir.to_path_buf(),
        ..RunConfig::default()
    }
}

const WEEK_S: u64 = 5 * 86_400;
const GRID_S: u64 = 20;
const BAR_S: u64 = 300;
const PPY: f64 = 72_576.0;

struct Tick {
    time: u64,
    price: f64,
    bid_side: bool,
    limit: bool,
}

fn fixture_ticks() -> Vec<Tick> {
    let text = fs::read_to_string(tests_dir().join("fixtures/golden_ticks.csv")).unwrap();
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[6].parse::<u64>().unwrap() == 0 {
            continue;
        }
        out.push(Tick {
            time: f[2].parse().unwrap(),
            price: f[4].parse().unwrap(),
            bid_side: matches!(f[1], "limit_buy" | "market_sell"),
            limit: f[1].starts_with("limit"),
        });
    }
    out.sort_by_key(|t| t.time);
    out
}

#[derive(Clone, Copy, PartialEq, Debug)]
struct Quote {
    bid: Option<f64>,
    ask: Option<f64>,
    ticks: u32,
}

impl Quote {
    fn mid(&self) -> Option<f64> {
        Some((self.bid? + self.ask?) / 2.0)
    }
}

/// Quote state at the end of every grid interval, replayed from scratch.
fn replay(ticks: &[&Tick]) -> Vec<Quote> {
    let n = (WEEK_S / GRID_S) as usize;
    (0..n)
        .map(|k| {
            let (start, end) = (k as u64 * GRID_S * 100, (k as u64 + 1) * GRID_S * 100);
            let (mut bid, mut ask) = (None::<f64>, None::<f64>);
            for t in ticks.iter().filter(|t| t.time < end) {
                if t.bid_side {
                    bid = Some(t.price);
                    if ask.is_some_and(|a| a < t.price) {
                        ask = None;
                    }
                } else {
                    ask = Some(t.price);
                    if bid.is_some_and(|b| b > t.price) {
                        bid = None;
                    }
                }
            }
            let in_interval = ticks
                .iter()
                .filter(|t| t.time >= start && t.time < end)
                .count();
            Quote {
                bid,
                ask,
                ticks: in_interval as u32,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Ret {
    day: u32,
    block: u32,
    slot: u32,
    r: f64,
}

fn returns_from(grid: &[Quote]) -> Vec<Ret> {
    let per_bar = (BAR_S / GRID_S) as usize;
    let mut bars: Vec<(usize, f64)> = Vec::new();
    let mut last = None;
    for j in 0..grid.len() / per_bar {
        for p in &grid[j * per_bar..(j + 1) * per_bar] {
            if let Some(m) = p.mid() {
                last = Some(m);
            }
        }
        if let Some(m) = last {
            bars.push((j, m));
        }
    }
    bars.windows(2)
        .map(|w| {
            let j = w[1].0 as u32;
            Ret {
                day: j / 288,
                block: (j % 288) / 36,
                slot: j % 36,
                r: 100.0 * (w[1].1.ln() - w[0].1.ln()),
            }
        })
        .collect()
}

fn read_csv(name: &str) -> (Vec<String>, Vec<BTreeMap<String, String>>) {
    let mut rdr = csv::Reader::from_path(tests_dir().join("golden").join(name)).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            header
                .iter()
                .cloned()
                .zip(r.iter().map(String::from))
                .collect()
        })
        .collect();
    (header, rows)
}

fn num(s: &str) -> Option<f64> {
    if s.is_empty() || s == "NA" {
        None
    } else {
        Some(s.parse().unwrap())
    }
}

fn assert_close(got: Option<f64>, want: Option<f64>, what: &str) {
    match (got, want) {
        (Some(g), Some(w)) => assert!((g - w).abs() <= TOL, "{what}: golden {g}, oracle {w}"),
        (g, w) => assert_eq!(
            g.is_some(),
            w.is_some(),
            "{what}: golden {g:?}, oracle {w:?}"
        ),
    }
}

struct Oracle {
    grids: [Vec<Quote>; 2],
    returns: [Vec<Ret>; 2],
}

const ORDER_TYPES: [&str; 2] = ["limit", "market"];

fn oracle() -> Oracle {
    let ticks = fixture_ticks();
    let grid = |limit: bool| {
        let sub: Vec<&Tick> = ticks.iter().filter(|t| t.limit == limit).collect();
        replay(&sub)
    };
    let grids = [grid(true), grid(false)];
    let returns = [returns_from(&grids[0]), returns_from(&grids[1])];
    Oracle { grids, returns }
}

fn check_midquotes(o: &Oracle) {
    for (i, ot) in ORDER_TYPES.iter().enumerate() {
        let grid = &o.grids[i];
        let (_, rows) = read_csv(&format!("midquotes_{ot}.csv"));
        let listed: BTreeMap<usize, &BTreeMap<String, String>> = rows
            .iter()
            .map(|r| (r["point"].parse().unwrap(), r))
            .collect();
        for (k, q) in grid.iter().enumerate() {
            match listed.get(&k) {
                Some(r) => {
                    assert_eq!(r["time_cs"], (k as u64 * GRID_S * 100).to_string());
                    assert_close(num(&r["best_bid"]), q.bid, &format!("{ot} bid {k}"));
                    assert_close(num(&r["best_ask"]), q.ask, &format!("{ot} ask {k}"));
                    assert_close(num(&r["midquote"]), q.mid(), &format!("{ot} mid {k}"));
                    assert_eq!(r["tick_count"], q.ticks.to_string(), "{ot} ticks {k}");
                }
                None => {
                    // Omitted points repeat the previous state with no ticks.
                    assert!(
                        k > 0
                            && q.ticks == 0
                            && *q
                                == Quote {
                                    ticks: 0,
                                    ..grid[k - 1]
                                }
                    );
                }
            }
        }
    }
}

fn check_returns(o: &Oracle) {
    for (i, ot) in ORDER_TYPES.iter().enumerate() {
        let (_, rows) = read_csv(&format!("returns_{ot}.csv"));
        assert_eq!(rows.len(), o.returns[i].len(), "{ot} return count");
        for (r, want) in rows.iter().zip(&o.returns[i]) {
            let label = (r["day"].clone(), r["block"].clone(), r["slot"].clone());
            assert_eq!(
                label,
                (
                    want.day.to_string(),
                    want.block.to_string(),
                    want.slot.to_string()
                )
            );
            assert_close(num(&r["r_pct"]), Some(want.r), &format!("{ot} r"));
            assert_close(
                num(&r["abs_r_pct"]),
                Some(want.r.abs()),
                &format!("{ot} |r|"),
            );
        }
    }
}

fn block_values(rets: &[Ret], block: u32, vol: bool) -> Vec<f64> {
    rets.iter()
        .filter(|r| r.block == block)
        .map(|r| if vol { r.r.abs() } else { r.r })
        .collect()
}

fn check_summary(o: &Oracle) {
    let (_, rows) = read_csv("block_summary.csv");
    assert_eq!(rows.len(), 16);
    let normal_ks = |xs: &[f64], mean: f64, sd: f64| {
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let d = Normal::new(mean, sd).unwrap();
        s.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = d.cdf(x);
                ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    };
    for (idx, row) in rows.iter().enumerate() {
        let vol = idx >= 8;
        assert_eq!(row["series"], if vol { "volatility" } else { "returns" });
        let block = (idx % 8) as u32;
        for (i, ot) in ORDER_TYPES.iter().enumerate() {
            let col = |c: &str| row[&format!("{ot}_{c}")].clone();
            let xs = block_values(&o.returns[i], block, vol);
            let n = xs.len();
            assert_eq!(col("n"), n.to_string());
            let status = col("status");
            if n == 0 {
                assert_eq!(status, "missing");
                continue;
            }
            if n < 4 {
                assert_eq!(status, "insufficient");
                continue;
            }
            if xs.iter().all(|&x| x == xs[0]) {
                assert_eq!(status, "degenerate");
                continue;
            }
            assert_eq!(status, "ok");
            let nf = n as f64;
            let mean = xs.iter().sum::<f64>() / nf;
            let raw = |p: i32| xs.iter().map(|x| x.powi(p)).sum::<f64>() / nf;
            let var = raw(2) - mean * mean;
            let m3 = raw(3) - 3.0 * mean * raw(2) + 2.0 * mean.powi(3);
            let m4 = raw(4) - 4.0 * mean * raw(3) + 6.0 * mean * mean * raw(2) - 3.0 * mean.powi(4);
            let what = format!("{ot} block {block} vol={vol}");
            assert_close(num(&col("mean_ann_pct")), Some(mean * PPY), &what);
            assert_close(num(&col("sd_ann_pct")), Some((var * PPY).sqrt()), &what);
            let rel = |c: &str, want: f64| {
                let g = num(&col(c)).unwrap();
                assert!(
                    (g - want).abs() <= TOL.max(1e-9 * want.abs()),
                    "{what} {c}: {g} vs {want}"
                );
            };
            rel("skew", m3 / var.powf(1.5));
            rel("kurt", m4 / (var * var));
            if n >= 8 {
                let ks = normal_ks(&xs, mean, var.sqrt());
                assert_close(num(&col("ks")), Some(ks), &what);
                let sig = ks > 1.36 / nf.sqrt();
                assert_eq!(col("ks_sig5"), u8::from(sig).to_string());
            }
        }
    }
}

fn check_correlation(o: &Oracle) {
    let (_, rows) = read_csv("block_correlation.csv");
    assert_eq!(rows.len(), 32);
    let names = [
        "0-3", "3-6", "6-9", "9-12", "12-15", "15-18", "18-21", "21-24",
    ];
    for row in &rows {
        let vol = row["series"] == "volatility";
        let i = ORDER_TYPES
            .iter()
            .position(|t| *t == row["order_type"])
            .unwrap();
        let a = names.iter().position(|n| *n == row["block"]).unwrap();
        for (b, name) in names.iter().enumerate() {
            let cell = &row[*name];
            if b > a {
                assert!(cell.is_empty());
                continue;
            }
            let mut pairs = Vec::new();
            for x in o.returns[i].iter().filter(|r| r.block == a as u32) {
                for y in o.returns[i].iter().filter(|r| r.block == b as u32) {
                    if (x.day, x.slot) == (y.day, y.slot) {
                        let f = |r: &Ret| if vol { r.r.abs() } else { r.r };
                        pairs.push((f(x), f(y)));
                    }
                }
            }
            let want = pearson_naive(&pairs).map(|r| if a == b { 1.0 } else { r });
            assert_close(
                num(cell),
                want,
                &format!("corr {} {} {a},{b}", row["series"], row["order_type"]),
            );
        }
    }
}

fn pearson_naive(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let vx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

fn check_tails(o: &Oracle) {
    let (_, rows) = read_csv("tail_estimates.csv");
    assert_eq!(rows.len(), 24);
    let mut estimated = 0;
    for (idx, row) in rows.iter().enumerate() {
        let kind = ["common", "lower", "upper"][idx / 8];
        assert_eq!(row["tail"], kind);
        let block = (idx % 8) as u32;
        for (i, ot) in ORDER_TYPES.iter().enumerate() {
            let col = |c: &str| row[&format!("{ot}_{c}")].clone();
            let mut v: Vec<f64> = o.returns[i]
                .iter()
                .filter(|r| r.block == block)
                .filter_map(|r| match kind {
                    "common" if r.r != 0.0 => Some(r.r.abs()),
                    "lower" if r.r < 0.0 => Some(-r.r),
                    "upper" if r.r > 0.0 => Some(r.r),
                    _ => None,
                })
                .collect();
            v.sort_by(|a, b| b.total_cmp(a));
            let n = v.len();
            assert_eq!(col("n"), n.to_string());
            if n < MIN_TAIL_N {
                assert_eq!(col("excluded"), "1");
                assert_eq!(col("note"), if n == 0 { "no_data" } else { "thin_trading" });
                assert!(col("alpha").is_empty());
                continue;
            }
            estimated += 1;
            let eta = n / 2;
            let chi: Vec<f64> = (1..=eta)
                .map(|m| v[..m].iter().map(|x| x.ln()).sum::<f64>() / m as f64 - v[m].ln())
                .collect();
            let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (j, &y) in chi.iter().enumerate() {
                let m = (j + 1) as f64;
                let w = m.sqrt();
                s0 += w;
                s1 += w * m;
                s2 += w * m * m;
                t0 += w * y;
                t1 += w * m * y;
            }
            let g = (t0 * s2 - s1 * t1) / (s0 * s2 - s1 * s1);
            let alpha = 1.0 / g;
            let mut last = None;
            for j in 0..eta {
                if chi[j] == g {
                    last = Some((j + 1) as f64);
                }
                if j + 1 < eta && (chi[j] - g) * (chi[j + 1] - g) < 0.0 {
                    last = Some((j + 1) as f64 + (chi[j] - g) / (chi[j] - chi[j + 1]));
                }
            }
            let m_star = last.unwrap_or(eta as f64);
            let se = alpha / m_star.sqrt();
            let t = |c: f64| (alpha - c) / se;
            let what = format!("{ot} {kind} block {block}");
            assert_eq!(col("excluded"), "0");
            assert_close(num(&col("alpha")), Some(alpha), &what);
            assert_close(num(&col("se_alpha")), Some(se), &what);
            assert_close(num(&col("t0")), Some(t(0.0)), &what);
            assert_close(num(&col("t2")), Some(t(2.0)), &what);
            assert_close(num(&col("t4")), Some(t(4.0)), &what);
            assert_close(num(&col("m_star")), Some(m_star), &what);
            assert_eq!(col("heavy_tails"), u8::from(t(0.0) > 1.64).to_string());
            assert_eq!(col("finite_var"), u8::from(t(2.0) > -1.64).to_string());
            assert_eq!(col("finite_4th"), u8::from(t(4.0) > -1.64).to_string());
            assert_eq!(col("note"), if last.is_none() { "no_crossing" } else { "" });
        }
    }
    assert!(
        estimated > 0,
        "fixture should yield at least one estimated tail"
    );
}

/// Panics with a description of the first mismatch.
pub fn verify_golden_files() {
    let o = oracle();
    check_midquotes(&o);
    check_returns(&o);
    check_summary(&o);
    check_correlation(&o);
    check_tails(&o);
}
