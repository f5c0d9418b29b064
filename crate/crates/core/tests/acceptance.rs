//! Exit criteria. Each test prints one `PASS`/`FAIL` line and then asserts.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sensorpress::autoencoder::{
    self, fit, grid_search, train, AutoencoderParams, Grid, Hyperparams, Network, Objective, Variant,
};
use sensorpress::baselines::{ltc_compress, ltc_decompress, pca_fit};
use sensorpress::cli::{bench_rows, BenchArgs, DataArgs, ModelArgs, Preset};
use sensorpress::codec::{
    compress, decompress, deserialize, frame_bits, residual_expand, serialize, CompressedFrame, ErrorBound,
    ResidualCode,
};
use sensorpress::dataset::{self, kfold_split, SyntheticModel, VectorMode};
use sensorpress::energy::{cycles_compress, e_clk, energy_compressed, energy_raw, s_bit, CpuCostTable, RadioModel};
use sensorpress::metrics::{compression_ratio, AccountingMode};
use sensorpress::sphering::{fit_sigma, SpheringScale};

fn report(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!("{} criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Sensor-like vector: offset, one slow oscillation and white noise.
fn sensor_vector(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    let base = rng.random_range(-10.0..40.0);
    let amp = rng.random_range(0.5..8.0);
    let cycles = rng.random_range(0.2..3.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let noise = Normal::new(0.0, rng.random_range(0.05..1.0)).unwrap();
    (0..l)
        .map(|i| {
            let t = i as f64 / l as f64;
            ((base + amp * (std::f64::consts::TAU * cycles * t + phase).sin() + noise.sample(rng)) as f32) as f64
        })
        .collect()
}

#[test]
fn c01_error_bound_guarantee() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1);
    let epsilons = [0.0, 0.1, 1.0];
    let mut violations = [0usize; 3];
    let mut worst = [0.0f64; 3];
    let mut vectors = 0;
    for (l, k) in [(23usize, 5usize), (90, 10), (720, 20)] {
        let sample: Vec<Vec<f64>> = (0..200).map(|_| sensor_vector(&mut rng, l)).collect();
        let mut models = vec![AutoencoderParams::new(
            Network::glorot(l, k, l as u64),
            fit_sigma(&sample).unwrap(),
        )];
        if l == 23 {
            let hp = Hyperparams {
                variant: Variant::Wae,
                alpha: 1e-4,
                hidden: k,
                max_iters: 60,
                ..Default::default()
            };
            models.push(fit(&sample, &[] as &[Vec<f64>], &hp).unwrap().0);
        }
        for i in 0..340 {
            let params = &models[i % models.len()];
            let x = sensor_vector(&mut rng, l);
            let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
            vectors += 1;
            for (e, &eps) in epsilons.iter().enumerate() {
                let frame = compress(&x32, params, ErrorBound::Bounded(eps)).unwrap();
                let wire = serialize(&frame);
                let back = deserialize(&wire, l, k).unwrap();
                let xh = decompress(&back, params).unwrap();
                for (a, b) in x32.iter().zip(&xh) {
                    let err = (*a as f64 - *b as f64).abs();
                    worst[e] = worst[e].max(err);
                    violations[e] += usize::from(err > eps);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let total: usize = violations.iter().sum();
    let pass = vectors >= 1000 && total == 0 && secs < 60.0;
    let detail = format!(
        "{vectors} vectors, violations at eps 0/0.1/1.0 = {:?}, max error {:?}, {secs:.1}s",
        violations, worst
    );
    assert!(report(1, "error bound", pass, &detail), "{detail}");
}

/// Independent scalar-loop cost over a flat parameter vector laid out as
/// `W_enc` (row-major K x L), `b_enc`, `W_dec` (row-major L x K), `b_dec`.
fn oracle_cost(theta: &[f64], batch: &[Vec<f64>], l: usize, k: usize, hp: &Hyperparams) -> f64 {
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let (we, be) = (&theta[..k * l], &theta[k * l..k * l + k]);
    let (wd, bd) = (&theta[k * l + k..2 * k * l + k], &theta[2 * k * l + k..]);
    let n = batch.len() as f64;
    let mut recon = 0.0;
    let mut mean_act = vec![0.0; k];
    for d in batch {
        let mut y = vec![0.0; k];
        for h in 0..k {
            let mut a = be[h];
            for i in 0..l {
                a += we[h * l + i] * d[i];
            }
            y[h] = sig(a);
            mean_act[h] += y[h] / n;
        }
        for i in 0..l {
            let mut a = bd[i];
            for h in 0..k {
                a += wd[i * k + h] * y[h];
            }
            let diff = d[i] - sig(a);
            recon += 0.5 * diff * diff / n;
        }
    }
    let (alpha, beta) = match hp.variant {
        Variant::Ae => (0.0, 0.0),
        Variant::Wae => (hp.alpha, 0.0),
        Variant::Sae => (hp.alpha, hp.beta),
    };
    let decay = 0.5 * alpha * (we.iter().map(|w| w * w).sum::<f64>() + wd.iter().map(|w| w * w).sum::<f64>());
    let rho = hp.rho;
    let kl: f64 = mean_act
        .iter()
        .map(|&r| {
            let r = r.clamp(1e-8, 1.0 - 1e-8);
            rho * (rho / r).ln() + (1.0 - rho) * ((1.0 - rho) / (1.0 - r)).ln()
        })
        .sum();
    recon + decay + beta * kl
}

#[test]
fn c02_gradient_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE2);
    let mut worst = 0.0f64;
    let mut worst_cost = 0.0f64;
    let mut instances = 0;
    for variant in [Variant::Ae, Variant::Wae, Variant::Sae] {
        for _ in 0..50 {
            let l = rng.random_range(2..=8);
            let k = rng.random_range(1..=5);
            let n = rng.random_range(1..=6);
            let batch: Vec<Vec<f64>> = (0..n).map(|_| (0..l).map(|_| rng.random_range(0.1..0.9)).collect()).collect();
            let hp = Hyperparams {
                variant,
                alpha: rng.random_range(0.0..0.1),
                beta: rng.random_range(0.0..1.0),
                rho: rng.random_range(0.02..0.3),
                hidden: k,
                ..Default::default()
            };
            let theta: Vec<f64> = (0..Network::count_for(l, k)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let net = Network::from_flat(l, k, &theta);
            let obj = Objective::new(&batch, &hp).unwrap();
            let (cost, grad) = obj.cost_and_gradient(&net).unwrap();
            let grad = grad.to_flat();
            let c0 = oracle_cost(&theta, &batch, l, k, &hp);
            worst_cost = worst_cost.max((cost - c0).abs() / c0.abs().max(1e-12));
            let h = 1e-5;
            for i in 0..theta.len() {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[i] += h;
                tm[i] -= h;
                let fd = (oracle_cost(&tp, &batch, l, k, &hp) - oracle_cost(&tm, &batch, l, k, &hp)) / (2.0 * h);
                let denom = grad[i].abs().max(fd.abs()).max(1e-8);
                worst = worst.max((grad[i] - fd).abs() / denom);
            }
            instances += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-4 && worst_cost <= 1e-12 && secs < 60.0;
    let detail = format!(
        "{instances} instances, max relative gradient error {worst:.2e}, cost mismatch {worst_cost:.1e}, {secs:.1}s"
    );
    assert!(report(2, "gradient", pass, &detail), "{detail}");
}

#[test]
fn c03_energy_constants() {
    let m = RadioModel::default();
    let ec = e_clk(&m);
    let sb = s_bit(&m);
    let cyc = cycles_compress(90, 32, &CpuCostTable::default());
    let pass = ec == 1.85e-9 && ((sb - 233.75e-6) / 233.75e-6).abs() <= 1e-4 && cyc == 3_955_888;
    let detail = format!("e_clk={ec:e} J, s_bit={sb:e} J, cycles(90,32)={cyc}");
    assert!(report(3, "energy constants", pass, &detail), "{detail}");
}

#[test]
fn c04_multihop_savings() {
    let m = RadioModel::default();
    let ratio = energy_raw(90, 5, &m) / energy_compressed(90, 32, 5, &m, &CpuCostTable::default());
    let pass = (2.74..=2.86).contains(&ratio);
    assert!(report(4, "multihop savings", pass, &format!("ratio {ratio:.4} at L=90 K=32 hops=5")));
}

#[test]
fn c05_rate_accounting() {
    let frame = CompressedFrame {
        y: vec![0.25; 20],
        residuals: ResidualCode::empty(720),
        mean: 12.0,
    };
    let payload = compression_ratio(&frame, AccountingMode::PayloadOnly).savings_percent();
    let full = compression_ratio(&frame, AccountingMode::FullFrame).savings_percent();
    let expect_full = 100.0 * (1.0 - (186.0 * 8.0) / (32.0 * 720.0));
    let pass = ((payload - 97.22) / 97.22).abs() <= 1e-4 && (full - expect_full).abs() < 1e-12 && serialize(&frame).len() == 186;
    let detail = format!("payload-only savings {payload:.4}%, full-frame savings {full:.4}% (expected {expect_full:.4}%)");
    assert!(report(5, "rate accounting", pass, &detail), "{detail}");
}

#[test]
fn c06_ltc_guarantee() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE6);
    let mut violations = 0;
    for _ in 0..1000 {
        let len = rng.random_range(2..300);
        let eps = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..2.0) };
        let x: Vec<f64> = sensor_vector(&mut rng, len);
        let xh = ltc_decompress(&ltc_compress(&x, eps).unwrap(), len).unwrap();
        violations += x.iter().zip(&xh).filter(|(a, b)| (*a - *b).abs() > eps).count();
    }
    let line: Vec<f64> = (0..100).map(|t| 3.0 - 0.25 * t as f64).collect();
    let segments = ltc_compress(&line, 0.01).unwrap().len();
    let pass = violations == 0 && segments == 1;
    let detail = format!("{violations} violations on 1000 series, {segments} segment(s) on a line");
    assert!(report(6, "LTC guarantee", pass, &detail), "{detail}");
}

fn sq_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[test]
fn c07_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7);

    let mut rate_breaks = 0;
    for trial in 0..100 {
        let l = [23, 90][trial % 2];
        let sample: Vec<Vec<f64>> = (0..20).map(|_| sensor_vector(&mut rng, l)).collect();
        let params = AutoencoderParams::new(Network::glorot(l, 6, trial as u64), fit_sigma(&sample).unwrap());
        let x: Vec<f32> = sensor_vector(&mut rng, l).iter().map(|&v| v as f32).collect();
        let mut last = u64::MAX;
        for eps in [0.0, 0.01, 0.05, 0.1, 0.3, 0.7, 1.5, 4.0, 100.0] {
            let bits = frame_bits(&compress(&x, &params, ErrorBound::Bounded(eps)).unwrap());
            rate_breaks += usize::from(bits > last);
            last = bits;
        }
    }

    let train_set: Vec<Vec<f64>> = (0..60).map(|_| sensor_vector(&mut rng, 12)).collect();
    let test_set: Vec<Vec<f64>> = (0..30).map(|_| sensor_vector(&mut rng, 12)).collect();
    let mut pca_breaks = 0;
    let mut last = f64::INFINITY;
    for k in 1..=12 {
        let b = pca_fit(&train_set, k).unwrap();
        let err: f64 = test_set
            .iter()
            .map(|x| sq_err(x, &b.decompress(&b.compress(x).unwrap()).unwrap()))
            .sum();
        pca_breaks += usize::from(err > last * (1.0 + 1e-12));
        last = err;
    }

    // Two-point grids; the expected winner is recomputed by direct k-fold
    // training and scoring.
    let data: Vec<Vec<f64>> = (0..40)
        .map(|i| (0..6).map(|j| 0.5 + 0.3 * ((i * 5 + j * 2) as f64 * 0.37).sin()).collect())
        .collect();
    let base = Hyperparams {
        variant: Variant::Sae,
        hidden: 3,
        max_iters: 40,
        ..Default::default()
    };
    let grids = [
        Grid {
            alpha: vec![0.0, 0.05],
            beta: vec![0.0],
            rho: vec![0.05],
        },
        Grid {
            alpha: vec![0.0],
            beta: vec![2.0, 0.0],
            rho: vec![0.1],
        },
        Grid {
            alpha: vec![1e-3],
            beta: vec![0.5],
            rho: vec![0.05, 0.5],
        },
    ];
    let mut grid_wrong = 0;
    for g in &grids {
        let folds = kfold_split(data.len(), 4, 9).unwrap();
        let cv = |hp: &Hyperparams| -> f64 {
            folds
                .iter()
                .map(|f| {
                    let tr: Vec<&[f64]> = f.train.iter().map(|&i| data[i].as_slice()).collect();
                    let (net, _) = train(&tr, &[], hp).unwrap();
                    let mut s = 0.0;
                    for &i in &f.test {
                        s += sq_err(&data[i], &net.reconstruct(&data[i]).unwrap());
                    }
                    (s / (f.test.len() * 6) as f64).sqrt()
                })
                .sum::<f64>()
                / folds.len() as f64
        };
        let configs = g.configurations(&base);
        let scores: Vec<f64> = configs.iter().map(cv).collect();
        let expect = if scores[1] < scores[0] { configs[1] } else { configs[0] };
        let got = grid_search(&data, &base, g, 4, 9).unwrap().best;
        grid_wrong += usize::from(got != expect);
    }

    let pass = rate_breaks == 0 && pca_breaks == 0 && grid_wrong == 0;
    let detail = format!(
        "rate increases with eps: {rate_breaks}, PCA error increases with K: {pca_breaks}, wrong grid picks: {grid_wrong}/3"
    );
    assert!(report(7, "monotonicity", pass, &detail), "{detail}");
}

#[test]
fn c08_learning_curve_shape() {
    let start = Instant::now();
    let model = SyntheticModel::spatial_preset(8);
    let m = model.generate(1440, 9);
    let split = dataset::prepare_split(&m, VectorMode::Spatial, 1, 10, 8, 0).unwrap();
    let scale = fit_sigma(&split.train).unwrap();
    let tr = autoencoder::normalize_all(&split.train, scale);
    let te = autoencoder::normalize_all(&split.test, scale);
    let hp = Hyperparams {
        variant: Variant::Ae,
        hidden: 10,
        max_iters: 400,
        seed: 8,
        ..Default::default()
    };
    let (_, trace) = train(&tr, &te, &hp).unwrap();
    let at = |v: &[f64], it: usize| v[it.min(v.len()) - 1];
    let first = at(&trace.train_rmse, 1);
    let at200 = at(&trace.train_rmse, 200);
    let ratio = at200 / first;
    let mut windows = 0;
    let mut bad_windows = 0;
    let mut it = 50;
    while it + 10 <= trace.test_rmse.len() {
        windows += 1;
        bad_windows += usize::from(at(&trace.test_rmse, it + 10) > at(&trace.test_rmse, it));
        it += 10;
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = ratio < 0.25 && bad_windows <= 1 && secs < 300.0;
    let detail = format!(
        "train RMSE {first:.4} at iter 1, {at200:.4} at iter 200 (ratio {ratio:.3}); {} iterations, {bad_windows}/{windows} rising test windows; {secs:.1}s",
        trace.iterations()
    );
    assert!(report(8, "learning curve", pass, &detail), "{detail}");
}

#[test]
fn c09_rate_distortion_shape() {
    let epsilons = vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0];
    let args = BenchArgs {
        data: DataArgs {
            input: None,
            sensors: None,
            samples: None,
            synthetic: Preset::Temporal,
            missing: 0.0,
            mode: Some(VectorMode::Temporal),
            window: 720,
            phi1: None,
            phi2: None,
            seed: 21,
        },
        model: ModelArgs {
            variant: Variant::Wae,
            hidden: 20,
            alpha: 1e-4,
            beta: 0.0,
            rho: 0.05,
            max_iters: 400,
            folds: 10,
            test_fold: 0,
        },
        codecs: vec!["ae".into(), "ltc".into()],
        k_sweep: vec![],
        epsilons: epsilons.clone(),
        output: None,
    };
    let rows = bench_rows(&args).unwrap();
    let cr = |codec: &str, eps: f64| {
        rows.iter()
            .find(|r| r.codec == codec && r.epsilon == eps && r.mode == AccountingMode::FullFrame)
            .map(|r| r.cr_percent)
            .unwrap()
    };
    for &eps in &epsilons {
        println!("  eps {eps}: AE CR {:.2}%  LTC CR {:.2}%", cr("ae", eps), cr("ltc", eps));
    }
    let (ae, ltc) = (cr("ae", epsilons[0]), cr("ltc", epsilons[0]));
    let pass = ae <= ltc;
    let detail = format!("at eps {}: AE full-frame CR {ae:.2}% vs LTC {ltc:.2}%", epsilons[0]);
    assert!(report(9, "rate-distortion shape", pass, &detail), "{detail}");
}

/// Receiver written out step by step, independent of the library decoder.
fn straight_line_decompress(frame: &CompressedFrame, p: &AutoencoderParams) -> Vec<f32> {
    let l = p.inputs();
    let k = p.hidden();
    let sigma = p.scale.sigma();
    let residual = residual_expand(&frame.residuals, l).unwrap();
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        let mut z = p.network.b_dec[i];
        for h in 0..k {
            z += p.network.w_dec[(i, h)] * frame.y[h] as f64;
        }
        let d_hat = if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            z.exp() / (1.0 + z.exp())
        };
        let pred = 3.0 * sigma / 0.4 * (d_hat - 0.5) + frame.mean as f64;
        let bit = frame.residuals.indicator_bytes()[i / 8] >> (i % 8) & 1 == 1;
        out.push(if bit { (pred + residual[i]) as f32 } else { pred as f32 });
    }
    out
}

fn random_frame(rng: &mut ChaCha8Rng, l: usize, k: usize) -> CompressedFrame {
    let mut indicator = vec![0u8; l.div_ceil(8)];
    let mut values = Vec::new();
    for j in 0..l {
        if rng.random_bool(0.3) {
            indicator[j / 8] |= 1 << (j % 8);
            values.push(rng.random_range(-50.0f32..50.0));
        }
    }
    CompressedFrame {
        y: (0..k).map(|_| rng.random::<f32>()).collect(),
        residuals: ResidualCode::from_parts(l, indicator, values),
        mean: rng.random_range(-100.0f32..100.0),
    }
}

#[test]
fn c10_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE10);
    let mut mismatched = 0;
    for i in 0..100 {
        let l = rng.random_range(2..100);
        let k = rng.random_range(1..l.min(24));
        let p = AutoencoderParams::new(
            Network::glorot(l, k, i),
            SpheringScale::new(rng.random_range(0.1..10.0)).unwrap(),
        );
        let f = random_frame(&mut rng, l, k);
        let a: Vec<u32> = decompress(&f, &p).unwrap().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = straight_line_decompress(&f, &p).iter().map(|v| v.to_bits()).collect();
        mismatched += usize::from(a != b);
    }
    let mut roundtrip_broken = 0;
    for _ in 0..1000 {
        let l = rng.random_range(1..800);
        let k = rng.random_range(0..32);
        let f = random_frame(&mut rng, l, k);
        let bytes = serialize(&f);
        let back = deserialize(&bytes, l, k).unwrap();
        roundtrip_broken += usize::from(serialize(&back) != bytes || back != f);
    }
    let pass = mismatched == 0 && roundtrip_broken == 0;
    let detail = format!("{mismatched}/100 decoder mismatches, {roundtrip_broken}/1000 broken wire roundtrips");
    assert!(report(10, "oracle equivalence", pass, &detail), "{detail}");
}
