//! Worked examples checked against independently computed values.

use fxseason::evt::{
    curve_crossings, estimate_sample, estimate_tail, hill_curve, hill_estimate,
    interpolated_m_star, CrossingRule, HillCurve, TailConfig, TailKind, TailOutcome, TailSample,
};
use fxseason::sampler::{
    build_midquote_grid, compute_returns, to_bars, Bar, BarSeries, Calendar, GridPoint,
    MidquoteGrid, ReturnObs, ReturnSeries, SlotLabel,
};
use fxseason::stats::{cross_block_correlation, ks_normality, summarize, SeriesKind};
use fxseason::synth::{
    gen_gaussian, gen_pareto, gen_seasonal_week, gen_student_t, rng, BaseDist, SeasonProfile,
};
use fxseason::tickstore::{
    filter_filled, parse_tick_file, split_by_type, Centis, OrderKind, OrderType, OrderTypeStream,
};
use rand::Rng;

const HEADER: &str =
    "event_id,kind,entry_time_cs,exit_time_cs,price,qty_available,qty_traded,aggressor\n";

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

const MIXED_EVENTS: &str = "\
A1,limit_buy,100,900,1.76100,5000,5000,na
A2,limit_sell,200,300,1.76200,3000,0,na
A3,market_buy,250,na,1.76190,1000,1000,buyer_initiated
A4,limit_sell,400,400,1.76180,2000,500,na
A5,market_sell,500,na,1.76110,2000,2000,seller_initiated
A6,limit_buy,600,1600,1.76090,1000,0,na
A7,limit_buy,700,800,1.76120,4000,4000,na
A8,limit_sell,800,2800,1.76210,1000,0,na
A9,market_buy,900,na,1.76185,3000,3000,buyer_initiated
A10,limit_buy,950,990,1.76080,6000,0,na
";

#[test]
fn mixed_fixture_keeps_filled_events_in_order() {
    let events = parse_tick_file(format!("{HEADER}{MIXED_EVENTS}").as_bytes()).unwrap();
    assert_eq!(events.len(), 10);
    let filled = filter_filled(&events);
    let ids: Vec<&str> = filled.iter().map(|e| e.event_id.as_str()).collect();
    assert_eq!(ids, ["A1", "A3", "A4", "A5", "A7", "A9"]);
}

#[test]
fn mixed_fixture_split_counts_per_kind() {
    let events = parse_tick_file(format!("{HEADER}{MIXED_EVENTS}").as_bytes()).unwrap();
    let count = |k: OrderKind| events.iter().filter(|e| e.kind == k).count();
    assert_eq!(
        [
            OrderKind::LimitBuy,
            OrderKind::LimitSell,
            OrderKind::MarketBuy,
            OrderKind::MarketSell
        ]
        .map(count),
        [4, 3, 2, 1]
    );
    let (limit, market) = split_by_type(&events);
    assert_eq!((limit.len(), market.len()), (7, 3));
}

#[test]
fn five_interval_grid_matches_manual_replay() {
    let ticks = "\
G1,limit_buy,100,100,1.7600,1,1,na
G2,limit_sell,500,500,1.7610,1,1,na
G3,limit_buy,1500,1500,1.7602,1,1,na
G4,limit_buy,2000,2000,1.7603,1,1,na
G5,limit_sell,2500,2500,1.7608,1,1,na
G6,limit_buy,3999,3999,1.7604,1,1,na
G7,limit_buy,4000,4000,1.7612,1,1,na
G8,limit_sell,7000,7000,1.7620,1,1,na
G9,limit_sell,8000,8000,1.7615,1,1,na
G10,limit_buy,8500,8500,1.7611,1,1,na
G11,limit_sell,9000,9000,1.7614,1,1,na
G12,limit_buy,9999,9999,1.7613,1,1,na
";
    let events = parse_tick_file(format!("{HEADER}{ticks}").as_bytes()).unwrap();
    let stream = OrderTypeStream::new(OrderType::Limit, events).unwrap();
    let grid = build_midquote_grid(&stream, &Calendar::default(), 20).unwrap();

    // (bid, ask, ticks) at the end of each 20 s interval; G7 crosses the
    // resting ask, which stays void until G8.
    let expected = [
        (Some(1.7602), Some(1.7610), 3),
        (Some(1.7604), Some(1.7608), 3),
        (Some(1.7612), None, 1),
        (Some(1.7612), Some(1.7620), 1),
        (Some(1.7613), Some(1.7614), 4),
    ];
    let mids = [
        Some(1.7606),
        Some(1.7606),
        None,
        Some(1.7616),
        Some(1.76135),
    ];
    for (k, ((bid, ask, n), mid)) in expected.iter().zip(mids).enumerate() {
        let p = grid.points[k];
        assert_eq!(
            (p.best_bid, p.best_ask, p.tick_count),
            (*bid, *ask, *n),
            "point {k}"
        );
        match (p.midquote, mid) {
            (Some(a), Some(b)) => assert!(close(a, b, 1e-12), "point {k}: {a} vs {b}"),
            (a, b) => assert_eq!(a, b, "point {k}"),
        }
    }
    assert!(grid.points[5..]
        .iter()
        .all(|p| p.midquote == grid.points[4].midquote && p.tick_count == 0));
}

#[test]
fn forty_five_points_give_three_bars() {
    let mut points = vec![GridPoint::default(); 45];
    let mut set = |i: usize, m: f64| {
        points[i].midquote = Some(m);
    };
    set(3, 1.70);
    set(10, 1.71);
    set(40, 1.75);
    set(44, 1.72);
    let grid = MidquoteGrid {
        order_type: OrderType::Limit,
        grid_start: Centis(0),
        interval_s: 20,
        points,
    };
    let bars = to_bars(&grid, &Calendar::default()).unwrap();
    let got: Vec<(f64, u32, u64)> = bars
        .bars
        .iter()
        .map(|b| (b.log_price, b.label.slot, b.start.0))
        .collect();
    assert_eq!(
        got,
        [
            (1.71f64.ln(), 0, 0),
            (1.71f64.ln(), 1, 30_000),
            (1.72f64.ln(), 2, 60_000)
        ]
    );
}

#[test]
fn ten_bar_returns_match_reference() {
    let prices = [
        1.76120f64, 1.76135, 1.76101, 1.76101, 1.76240, 1.75980, 1.76005, 1.76310, 1.76299, 1.76150,
    ];
    // 100 * log-differences from 40-digit arithmetic, rounded to f64.
    let expected = [
        0.008516557612562757,
        -0.019305238593213717,
        0.0,
        0.07890084163411128,
        -0.1476350276673015,
        0.014205150811562319,
        0.17314055671384754,
        -0.00623920546756797,
        -0.08455124507464451,
    ];
    let cal = Calendar::default();
    // Straddles the boundary between block 0 and block 1.
    let bars: Vec<Bar> = prices
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let start = Centis::from_secs((31 + j as u64) * 300);
            Bar {
                start,
                log_price: p.ln(),
                label: cal.label(start).unwrap(),
            }
        })
        .collect();
    let series = BarSeries {
        order_type: OrderType::Market,
        bar_interval_s: 300,
        bars,
    };
    let returns = compute_returns(&series).unwrap();
    assert_eq!(returns.values.len(), 9);
    for (obs, want) in returns.values.iter().zip(expected) {
        assert!(close(obs.r, want, 1e-12), "{} vs {want}", obs.r);
        assert_eq!(obs.abs_r, obs.r.abs());
    }
    let blocks: Vec<u32> = returns.values.iter().map(|o| o.label.block).collect();
    assert_eq!(blocks, [0, 0, 0, 0, 1, 1, 1, 1, 1]);
}

#[test]
fn two_hundred_value_summary_matches_reference() {
    let text = include_str!("fixtures/returns_200.txt");
    let xs: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(xs.len(), 200);
    let s = summarize(&xs, 72_576.0).unwrap();
    // numpy/scipy: population moments, raw kurtosis, kstest against the fitted normal.
    assert!(close(s.mean_ann_pct, 68.85103679999997, 1e-10));
    assert!(close(s.sd_ann_pct, 12.437465090909908, 1e-10));
    assert!(close(s.skewness, 0.2605851140717694, 1e-10));
    assert!(close(s.kurtosis, 5.348591570486761, 1e-10));
    let ks = s.ks.unwrap();
    assert!(close(ks.stat, 0.10204000007262246, 1e-10));
    assert!(ks.significant_5pct);
}

#[test]
fn ks_flags_pareto_sample() {
    let xs = gen_pareto(2.0, 1.0, 1000, 11).unwrap();
    assert!(ks_normality(&xs).unwrap().significant_5pct);
}

#[test]
fn ks_stat_small_on_average_for_normal_samples() {
    let mean: f64 = (0..100)
        .map(|s| {
            ks_normality(&gen_gaussian(0.0, 1.0, 1000, s).unwrap())
                .unwrap()
                .stat
        })
        .sum::<f64>()
        / 100.0;
    assert!(mean < 0.05, "mean ks stat {mean}");
}

#[test]
fn shared_day_shock_correlation_matches_brute_force() {
    let mut r = rng(99, 3);
    let mut values = Vec::new();
    for day in 0..5u32 {
        let shock: f64 = r.random_range(-1.0..1.0);
        for block in 0..8u32 {
            for slot in 0..36u32 {
                let noise: f64 = r.random_range(-1.0..1.0);
                let x = if block < 2 {
                    shock + 0.5 * noise
                } else {
                    noise
                };
                values.push(ReturnObs::new(x, SlotLabel { day, block, slot }));
            }
        }
    }
    let series = ReturnSeries {
        order_type: OrderType::Limit,
        values,
    };

    let mut pairs = Vec::new();
    for a in series.values.iter().filter(|v| v.label.block == 0) {
        for b in series.values.iter().filter(|v| v.label.block == 1) {
            if (a.label.day, a.label.slot) == (b.label.day, b.label.slot) {
                pairs.push((a.r, b.r));
            }
        }
    }
    assert_eq!(pairs.len(), 180);
    let n = pairs.len() as f64;
    let (sx, sy) = pairs
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p.0, y + p.1));
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let syy: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let rho = (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();

    let m = cross_block_correlation(&series, SeriesKind::Returns, 8);
    assert!(close(m.get(0, 1).unwrap(), rho, 1e-12));
    assert!(rho > 0.5);
}

/// Pareto(alpha) quantiles at plotting positions i/(n+1), descending.
fn pareto_plotting_sample(alpha: f64, n: usize) -> TailSample {
    let xs = (1..=n)
        .map(|i| (1.0 - i as f64 / (n as f64 + 1.0)).powf(-1.0 / alpha))
        .collect();
    TailSample::new(TailKind::Upper, xs).unwrap()
}

#[test]
fn hill_on_pareto_quantiles_is_near_inverse_alpha() {
    let s = pareto_plotting_sample(2.0, 1000);
    let chi = hill_estimate(&s, 100).unwrap();
    assert!(close(chi, 0.5, 0.05), "chi {chi}");
    let curve = hill_curve(&s, Some(50)).unwrap();
    // The top plotting positions pull chi(m) low for the first few m.
    assert!(curve.chi[19..].iter().all(|&c| close(c, 0.5, 0.05)));
}

#[test]
fn hill_on_duplicated_sample_reproduces_original() {
    let xs = gen_pareto(3.0, 1.0, 300, 5).unwrap();
    let doubled: Vec<f64> = xs.iter().flat_map(|&x| [x, x]).collect();
    let s = TailSample::new(TailKind::Upper, xs).unwrap();
    let d = TailSample::new(TailKind::Upper, doubled).unwrap();
    for m in 1..299 {
        let direct: f64 = {
            let v = s.values();
            v[..m].iter().map(|x| (x / v[m]).ln()).sum::<f64>() / m as f64
        };
        let h2 = hill_estimate(&d, 2 * m).unwrap();
        assert!(close(h2, direct, 1e-12), "m={m}: {h2} vs {direct}");
    }
}

#[test]
fn m_star_on_monotone_curves_matches_segment_scan() {
    let mut r = rng(7, 1);
    for _ in 0..500 {
        let eta = r.random_range(3..80usize);
        let mut chi = Vec::with_capacity(eta);
        let mut c = r.random_range(0.5..2.0);
        for _ in 0..eta {
            chi.push(c);
            c -= r.random_range(1e-4..0.05);
        }
        let g = r.random_range(chi[eta - 1]..chi[0]);
        let mut scan = None;
        for i in 0..eta - 1 {
            if chi[i] >= g && chi[i + 1] < g {
                scan = Some((i + 1) as f64 + (chi[i] - g) / (chi[i] - chi[i + 1]));
            }
        }
        let curve = HillCurve { chi };
        let want = scan.unwrap();
        for rule in [CrossingRule::First, CrossingRule::Last] {
            let m = interpolated_m_star(&curve, g, rule);
            assert!(m.crossed);
            assert!(close(m.value, want, 1e-9), "{} vs {want}", m.value);
        }
        assert_eq!(curve_crossings(&curve, g).len(), 1);
    }
}

#[test]
fn standard_error_tracks_monte_carlo_spread() {
    let cfg = TailConfig::default();
    let (mut alphas, mut ses) = (Vec::new(), Vec::new());
    for seed in 0..500 {
        let s =
            TailSample::new(TailKind::Upper, gen_pareto(2.0, 1.0, 2000, seed).unwrap()).unwrap();
        let e = estimate_sample(&s, &cfg).unwrap();
        let e = e.estimate().unwrap();
        alphas.push(e.alpha);
        ses.push(e.se_alpha);
    }
    let mc = sd(&alphas);
    let se = ses.iter().sum::<f64>() / ses.len() as f64;
    assert!(
        mc / se < 2.0 && se / mc < 2.0,
        "mc sd {mc}, reported se {se}"
    );
}

#[test]
fn student_t_week_tails_cluster_near_three() {
    let cfg = TailConfig::default();
    let mut alphas = Vec::new();
    for seed in 0..10 {
        let week =
            gen_seasonal_week(&SeasonProfile::flat(BaseDist::StudentT { nu: 3.0 }, seed)).unwrap();
        for b in 0..8 {
            match estimate_tail(&week, b, TailKind::Common, &cfg).unwrap() {
                TailOutcome::Estimated(e) => alphas.push(e.alpha),
                other => panic!("block {b}: {other:?}"),
            }
        }
    }
    let inside = alphas.iter().filter(|a| (2.0..=4.5).contains(*a)).count();
    let med = median(alphas.clone());
    assert!(close(med, 3.0, 0.5), "median alpha {med}");
    assert!(
        inside * 4 >= alphas.len() * 3,
        "{inside}/{} in [2, 4.5]",
        alphas.len()
    );
}

#[test]
fn asymmetric_tails_are_told_apart() {
    let cfg = TailConfig::default();
    let (mut up, mut lo) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let p = gen_pareto(2.0, 1.0, 1000, seed).unwrap();
        let g = gen_gaussian(0.0, 1.0, 1000, seed + 1000).unwrap();
        let values = p
            .into_iter()
            .chain(g.into_iter().map(|x| -x.abs()))
            .enumerate()
            .map(|(i, r)| {
                let i = i as u32;
                ReturnObs::new(
                    r,
                    SlotLabel {
                        day: i / 400,
                        block: 0,
                        slot: i % 400,
                    },
                )
            })
            .collect();
        let series = ReturnSeries {
            order_type: OrderType::Limit,
            values,
        };
        let est = |k| {
            estimate_tail(&series, 0, k, &cfg)
                .unwrap()
                .estimate()
                .unwrap()
                .alpha
        };
        up.push(est(TailKind::Upper));
        lo.push(est(TailKind::Lower));
    }
    let mean_up = up.iter().sum::<f64>() / up.len() as f64;
    assert!(close(mean_up, 2.0, 0.3), "upper mean {mean_up}");
    assert!(lo.iter().all(|&a| a > 5.0), "lower {lo:?}");
}

#[test]
fn pareto_exceedance_rate() {
    let n = 10_000;
    let xs = gen_pareto(2.0, 1.5, n, 2).unwrap();
    let frac = xs.iter().filter(|&&x| x > 3.0).count() as f64 / n as f64;
    let sd = (0.25f64 * 0.75 / n as f64).sqrt();
    assert!(close(frac, 0.25, 3.0 * sd), "fraction {frac}");
}

#[test]
fn student_t_is_centred_and_symmetric() {
    let n = 10_000;
    let xs = gen_student_t(5.0, n, 3).unwrap();
    let mean = xs.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    // Sample skewness of t(5) has unbounded variance, so single seeds wander;
    // the median over seeds is stable.
    let skews: Vec<f64> = (0..21)
        .map(|s| {
            summarize(&gen_student_t(5.0, n, 100 + s).unwrap(), 1.0)
                .unwrap()
                .skewness
        })
        .collect();
    let med = median(skews);
    assert!(med.abs() < 0.1, "median skewness {med}");
    let positive = xs.iter().filter(|&&x| x > 0.0).count() as f64 / n as f64;
    assert!(close(positive, 0.5, 3.0 * 0.5 / (n as f64).sqrt()));
}

#[test]
fn student_t_with_many_dof_looks_normal() {
    let accepted = (0..100)
        .filter(|&s| {
            !ks_normality(&gen_student_t(200.0, 500, s).unwrap())
                .unwrap()
                .significant_5pct
        })
        .count();
    assert!(accepted >= 90, "{accepted}/100");
}

fn block_sds(profile: &SeasonProfile) -> Vec<f64> {
    let week = gen_seasonal_week(profile).unwrap();
    (0..8)
        .map(|b| sd(&week.in_block(b).map(|o| o.r).collect::<Vec<_>>()))
        .collect()
}

#[test]
fn flat_profile_gives_similar_block_sds() {
    let sds = block_sds(&SeasonProfile::flat(
        BaseDist::Gaussian {
            mu: 0.0,
            sigma: 1.0,
        },
        8,
    ));
    // sd of a 180-point normal sd estimate is about 0.053.
    assert!(sds.iter().all(|s| close(*s, 1.0, 0.2)), "{sds:?}");
}

#[test]
fn boosted_block_sd_scales_with_multiplier() {
    let mut block_scale = vec![1.0; 8];
    block_scale[7] = 5.0;
    let sds = block_sds(&SeasonProfile {
        block_scale,
        base_dist: BaseDist::Gaussian {
            mu: 0.0,
            sigma: 1.0,
        },
        seed: 4,
    });
    let others = sds[..7].iter().sum::<f64>() / 7.0;
    let ratio = sds[7] / others;
    assert!(close(ratio, 5.0, 0.75), "ratio {ratio}");
}
