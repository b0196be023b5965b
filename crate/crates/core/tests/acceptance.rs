//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p socnet-core --test acceptance`. The process exits
//! 0 after reporting; set SOCNET_ACCEPTANCE_STRICT=1 to exit 1 when any
//! criterion fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use socnet::bootstrap::bootstrap_replicate;
use socnet::community::{adjusted_rand_index, greedy_communities, measure_l, spectral_communities, DEFAULT_REPLICATES};
use socnet::estimator::{
    default_epsilon, fit_block, fit_missing, fit_network, smooth_block, Block, FitMode, FitOptions,
    ScreenOptions, DEFAULT_MAX_ITERS,
};
use socnet::generator::{add_external_noise, generate, generate_lsm, presets, sparsify};
use socnet::hfunc::{catalog, eval_noisy, Association, Chain, FailureSpec, HFunction};
use socnet::model::{pair_count, CommunityAssignment, FittedModel, GeneratorSpec, PsiMode, ScoreFamily, WeightedNetwork};
use socnet::numeric::stats::{ks_statistic, ks_two_sample, sd, spearman};
use socnet::numeric::EmpiricalCdf;
use socnet::{par, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn run(id: usize, name: &str, budget: Option<Duration>, f: fn() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let (pass, mut detail) = match out {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = budget.is_none_or(|b| took <= b);
    if let Some(b) = budget {
        detail.push_str(&format!("; {:.1}s (limit {}s)", took.as_secs_f64(), b.as_secs()));
    } else {
        detail.push_str(&format!("; {:.1}s", took.as_secs_f64()));
    }
    let ok = pass && in_time;
    println!("{} [{id:2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        })
        .collect()
}

fn unit_cdf(t: f64) -> f64 {
    t.clamp(0.0, 1.0)
}

// ---------------------------------------------------------------- 1

fn h_uniformity() -> Result<Outcome> {
    const N: usize = 100_000;
    let members = catalog();
    let base = HFunction::normal_rho(1.0, Association::Positive)?;
    let results = par::map_range(members.len(), |k| -> Result<[f64; 4]> {
        let h = &members[k];
        let seed = 3 * k as u64;
        let (x, y, e) = (uniforms(N, seed), uniforms(N, seed + 1), uniforms(N, seed + 2));
        let failure = FailureSpec::new(0.8, h.clone())?;
        let chain = Chain {
            outer: h.clone(),
            inner: base.clone(),
        };
        let mut plain = Vec::with_capacity(N);
        let mut noisy = Vec::with_capacity(N);
        let mut failed = Vec::with_capacity(N);
        let mut chained = Vec::with_capacity(N);
        for t in 0..N {
            let v = h.eval(x[t], y[t])?;
            plain.push(v);
            noisy.push(eval_noisy(v, e[t], 0.5)?);
            failed.push(failure.eval(x[t], y[t], e[t])?);
            chained.push(chain.eval(x[t], y[t], e[t])?);
        }
        Ok([plain, noisy, failed, chained].map(|s| ks_statistic(&s, unit_cdf)))
    });
    let mut worst = (0.0, String::new());
    for (h, r) in members.iter().zip(results) {
        let r = r?;
        for (d, kind) in r.iter().zip(["plain", "noisy", "failure", "chain"]) {
            if *d > worst.0 {
                worst = (*d, format!("{} {kind}", h.label()));
            }
        }
    }
    Ok(Outcome::new(
        worst.0 < 0.01,
        format!("{} members x 4 variants, max KS {:.5} ({})", members.len(), worst.0, worst.1),
    ))
}

// ---------------------------------------------------------------- 2

fn monotone_grids() -> Result<Outcome> {
    let g: Vec<f64> = (1..=99).map(|k| k as f64 / 100.0).collect();
    let mut violations = 0usize;
    let mut first = String::new();
    for h in catalog() {
        let (fx, fy) = h.association.flips();
        let mut v = vec![0.0; 99 * 99];
        for a in 0..99 {
            for b in 0..99 {
                v[a * 99 + b] = h.eval(g[a], g[b])?;
            }
        }
        let ordered = |lo: f64, hi: f64, flip: bool| if flip { lo >= hi } else { lo <= hi };
        for a in 0..99 {
            for b in 0..99 {
                let bad_x = a + 1 < 99 && !ordered(v[a * 99 + b], v[(a + 1) * 99 + b], fx);
                let bad_y = b + 1 < 99 && !ordered(v[a * 99 + b], v[a * 99 + b + 1], fy);
                if bad_x || bad_y {
                    violations += 1;
                    if first.is_empty() {
                        first = format!(" first at {} ({}, {})", h.label(), g[a], g[b]);
                    }
                }
            }
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!("{} members on 99x99, {violations} violations{first}", catalog().len()),
    ))
}

// ---------------------------------------------------------------- shared

fn sign(flip: bool) -> f64 {
    if flip {
        -1.0
    } else {
        1.0
    }
}

fn side_psi(psi: &[f64], a: &CommunityAssignment, i: usize) -> Vec<f64> {
    a.members(i).iter().map(|&u| psi[u]).collect()
}

/// Smallest sign-adjusted Spearman correlation between Ψ̂ and the true Ψ over
/// both sides of every pair. Negative association ranks a side by 1 − Ψ.
fn worst_psi_agreement(model: &FittedModel, spec: &GeneratorSpec, psi: &[f64]) -> (f64, String) {
    let a = &model.assignment;
    let mut worst = (f64::INFINITY, String::new());
    for p in &model.pairs {
        let (fx, fy) = spec.pair(p.i, p.j).expect("pair in spec").h.association.flips();
        let ri = sign(fx) * spearman(&p.psi_i_wrt_j, &side_psi(psi, a, p.i));
        let rj = sign(fy) * spearman(&p.psi_j_wrt_i, &side_psi(psi, a, p.j));
        for (r, side) in [(ri, p.i), (rj, p.j)] {
            if r < worst.0 {
                worst = (r, format!("pair ({}, {}) side {side}", p.i, p.j));
            }
        }
    }
    worst
}

fn fit_nsm(net: &WeightedNetwork, a: &CommunityAssignment) -> Result<FittedModel> {
    fit_network(net, a, &FitOptions::default())
}

// ---------------------------------------------------------------- 3

fn lsm_recovery() -> Result<Outcome> {
    let (a, specs, mode) = presets::lsm_two_block(0.0);
    let (net, psi) = generate_lsm(&a, &specs, &mode, 0)?;
    let opts = FitOptions {
        mode: FitMode::NormalLsm,
        ..FitOptions::default()
    };
    let model = fit_network(&net, &a, &opts)?;
    let mut worst_rank = f64::INFINITY;
    let mut worst_sigma: f64 = 0.0;
    let mut worst_frob: f64 = 0.0;
    for s in &specs {
        let p = model.pair(s.i, s.j);
        let fit = p.lsm_fit.as_ref().expect("linear fit");
        let zi: Vec<f64> = side_psi(&psi, &a, s.i).iter().map(|&x| ScoreFamily::Normal.quantile(x)).collect();
        let zj: Vec<f64> = side_psi(&psi, &a, s.j).iter().map(|&x| ScoreFamily::Normal.quantile(x)).collect();
        // a loading's sign is not identified: Ẑ follows sign(loading)·Z
        worst_rank = worst_rank
            .min(s.alpha.signum() * spearman(&fit.z_i, &zi))
            .min(s.beta.signum() * spearman(&fit.z_j, &zj));
        worst_sigma = worst_sigma.max(fit.sigma);
        let block = Block::from_network(&net, &a, s.i, s.j);
        let (mut num, mut den) = (0.0, 0.0);
        for (r, c) in block.edges() {
            let w = block.weights[(r, c)];
            let fitted = fit.gamma + fit.alpha * fit.z_i[r] + fit.beta * fit.z_j[c];
            num += (w - fitted).powi(2);
            den += w * w;
        }
        worst_frob = worst_frob.max((num / den).sqrt());
    }
    Ok(Outcome::new(
        worst_rank == 1.0 && worst_sigma <= 1e-6 && worst_frob <= 1e-6,
        format!("min signed Spearman {worst_rank}, max sigma {worst_sigma:.2e}, max rel Frobenius {worst_frob:.2e}"),
    ))
}

// ---------------------------------------------------------------- 4

fn nsm_recovery() -> Result<Outcome> {
    let spec = presets::four_block(0.0, 0.0);
    let (net, psi) = generate(&spec, 0)?;
    let model = fit_nsm(&net, &spec.assignment)?;
    let mut wrong_family = Vec::new();
    let (mut equal, mut total) = (0usize, 0usize);
    for p in &model.pairs {
        let truth = &spec.pair(p.i, p.j).expect("pair").h;
        if p.h_hat.family() != truth.family() {
            wrong_family.push(format!("({}, {}) {}", p.i, p.j, p.h_hat.label()));
        }
        let block = Block::from_network(&net, &spec.assignment, p.i, p.j);
        let smooth = smooth_block(p);
        for (r, c) in block.edges() {
            total += 1;
            if smooth[(r, c)] == block.weights[(r, c)] {
                equal += 1;
            }
        }
    }
    let (rank, at) = worst_psi_agreement(&model, &spec, &psi);
    let frac = equal as f64 / total as f64;
    Ok(Outcome::new(
        wrong_family.is_empty() && rank == 1.0 && frac >= 0.99,
        format!(
            "family mismatches {:?}, min signed Spearman {rank} ({at}), smooth = observed on {:.2}% of {total} edges",
            wrong_family,
            100.0 * frac
        ),
    ))
}

// ---------------------------------------------------------------- 5

fn sigma_degradation() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (sw, sb) in [(0.05, 0.05), (0.15, 0.2)] {
        let spec = presets::four_block(sw, sb);
        let (net, psi) = generate(&spec, 0)?;
        let model = fit_nsm(&net, &spec.assignment)?;
        let mut worst_ratio: f64 = 1.0;
        for p in &model.pairs {
            let s = if p.i == p.j { sw } else { sb };
            let target = s * s / (1.0 + s * s);
            let ratio = p.mse / target;
            if ratio.ln().abs() > worst_ratio.ln().abs() {
                worst_ratio = ratio;
            }
        }
        pass &= (0.5..=2.0).contains(&worst_ratio);
        let mut part = format!("sigma {sw}/{sb}: worst MSE/target {worst_ratio:.3}");
        if sw == 0.05 {
            let (rank, _) = worst_psi_agreement(&model, &spec, &psi);
            pass &= rank >= 0.95;
            part.push_str(&format!(", min signed Spearman {rank:.4}"));
        }
        parts.push(part);
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

// ---------------------------------------------------------------- 6

fn iid_block(n: usize, seed: u64) -> Result<Block> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in u + 1..n {
            let x: f64 = rng.sample(StandardNormal);
            w[(u, v)] = x;
            w[(v, u)] = x;
        }
    }
    Block::from_matrix(w, true, None)
}

fn spurious_calibration() -> Result<Outcome> {
    let opts = |seed| FitOptions {
        screen: Some(ScreenOptions::default()),
        seed,
        ..FitOptions::default()
    };
    let noise = par::map_range(20, |s| -> Result<(bool, f64)> {
        let p = fit_block(&iid_block(37, 1000 + s as u64)?, &opts(s as u64))?;
        Ok((p.spurious, p.mse))
    });
    let structured = par::map_range(20, |s| -> Result<bool> {
        let mut spec = presets::grid_blocks(1, 0.0, 0.0);
        spec.psi_mode = PsiMode::IidUniform { seed: 500 + s as u64 };
        let (net, _) = generate(&spec, s as u64)?;
        let block = Block::from_network(&net, &spec.assignment, 1, 1);
        Ok(fit_block(&block, &opts(s as u64))?.spurious)
    });
    let noise = noise.into_iter().collect::<Result<Vec<_>>>()?;
    let structured = structured.into_iter().collect::<Result<Vec<_>>>()?;
    let flagged = noise.iter().filter(|x| x.0).count();
    let (lo, hi) = noise
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x.1), h.max(x.1)));
    let false_alarms = structured.iter().filter(|&&x| x).count();
    Ok(Outcome::new(
        flagged >= 18 && false_alarms == 0 && lo > 0.7 && hi < 1.0,
        format!("noise flagged {flagged}/20, structured flagged {false_alarms}/20, noise MSE in [{lo:.4}, {hi:.4}]"),
    ))
}

// ---------------------------------------------------------------- 7

/// Direct evaluation of L from its definition, written without any of the
/// library's helpers.
fn naive_l(w: &DMatrix<f64>, labels: &[usize]) -> (f64, Vec<((usize, usize), f64)>) {
    let k = *labels.iter().max().unwrap();
    let members = |c: usize| (0..labels.len()).filter(move |&u| labels[u] == c).collect::<Vec<_>>();
    let mut total = 0.0;
    let mut terms = Vec::new();
    for i in 1..=k {
        let gi = members(i);
        for j in 1..=k {
            let gj = members(j);
            if gi.len() < 3 || gj.len() < 3 {
                continue;
            }
            let mut cs = Vec::new();
            for &u in &gi {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for &v in &gj {
                    if v == u {
                        continue;
                    }
                    let d: f64 = gi.iter().filter(|&&q| q != v).map(|&q| w[(q, v)]).sum();
                    xs.push(d);
                    ys.push(w[(u, v)]);
                }
                let n = xs.len() as f64;
                let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
                let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
                let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
                let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
                cs.push(if sxx > 0.0 && syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 });
            }
            let m = cs.len() as f64;
            let mc = cs.iter().sum::<f64>() / m;
            let sdc = (cs.iter().map(|c| (c - mc).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
            let size = ((gi.len() as f64 - 2.0) * (gj.len() as f64 - 2.0)).max(0.0);
            let t = mc * (1.0 - sdc.sqrt()) * size * if i == j { 2.0 } else { 1.0 };
            terms.push(((i, j), t));
            total += t;
        }
    }
    (total, terms)
}

fn measure_arithmetic() -> Result<Outcome> {
    let z: Vec<f64> = (0..104).map(|k| (k as f64 * 0.61).cos() * 3.0 + k as f64 * 0.02).collect();
    let w = DMatrix::from_fn(104, 104, |u, v| if u == v { 0.0 } else { z[u] + z[v] });
    let labels: Vec<usize> = (0..104).map(|u| u / 52 + 1).collect();
    let (brute, terms) = naive_l(&w, &labels);
    let net = WeightedNetwork::new(w)?;
    let lib = measure_l(&net, &CommunityAssignment::new(labels)?);
    let within = terms.iter().filter(|t| t.0 .0 == t.0 .1).map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let between: f64 = terms.iter().filter(|t| t.0 .0 != t.0 .1).map(|t| t.1).sum();
    // √SD(C) turns rounding-level spread (~1e-16) into ~1e-8 relative error
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-7 * y.abs().max(1.0);
    let pass = close(within, 5000.0) && close(between, 5000.0) && close(brute, lib.l);
    Ok(Outcome::new(
        pass,
        format!(
            "max within term {within:.9}, between pair total {between:.9}, brute L {brute:.9} vs library {:.9}",
            lib.l
        ),
    ))
}

// ---------------------------------------------------------------- 8

/// Split by the sign of the leading eigenvector of the modularity matrix
/// B = W − k kᵀ / 2m. Returns labels and the modularity of each labeling.
fn modularity_split(w: &DMatrix<f64>) -> Vec<usize> {
    let n = w.nrows();
    let k: Vec<f64> = (0..n).map(|u| w.row(u).sum()).collect();
    let two_m: f64 = k.iter().sum();
    let b = DMatrix::from_fn(n, n, |u, v| w[(u, v)] - k[u] * k[v] / two_m);
    let eig = SymmetricEigen::new(b);
    let top = (0..n).max_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])).unwrap();
    (0..n).map(|u| if eig.eigenvectors[(u, top)] >= 0.0 { 1 } else { 2 }).collect()
}

fn modularity(w: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = w.nrows();
    let k: Vec<f64> = (0..n).map(|u| w.row(u).sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for u in 0..n {
        for v in 0..n {
            if labels[u] == labels[v] {
                q += w[(u, v)] - k[u] * k[v] / two_m;
            }
        }
    }
    q / two_m
}

fn community_recovery() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("four-block", presets::four_block(0.0, 0.0)), ("mixed two-block", presets::two_block_mixed())] {
        let (net, _) = generate(&spec, 0)?;
        let truth = spec.assignment.labels();
        let g = adjusted_rand_index(greedy_communities(&net)?.labels(), truth)?;
        let s = adjusted_rand_index(spectral_communities(&net, DEFAULT_REPLICATES, 0)?.labels(), truth)?;
        pass &= g == 1.0 && s == 1.0;
        parts.push(format!("{name}: greedy ARI {g:.3}, spectral ARI {s:.3}"));
        if spec.assignment.k() == 2 {
            let split = CommunityAssignment::from_raw(&modularity_split(net.weights()))?;
            let l_split = measure_l(&net, &split).l;
            let l_true = measure_l(&net, &spec.assignment).l;
            pass &= l_split < l_true;
            parts.push(format!(
                "modularity split L {l_split:.2} vs truth {l_true:.2} (Q {:.4} vs {:.4})",
                modularity(net.weights(), split.labels()),
                modularity(net.weights(), truth)
            ));
        }
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

// ---------------------------------------------------------------- 9

fn bootstrap_fidelity() -> Result<Outcome> {
    let spec = presets::four_block(0.15, 0.15);
    let (net, _) = generate(&spec, 0)?;
    let a = &spec.assignment;
    let model = fit_nsm(&net, a)?;
    let reps = par::map_range(50, |s| bootstrap_replicate(&model, s as u64));
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
    let mut worst_sd: f64 = 0.0;
    let mut worst_ks: f64 = 0.0;
    for p in &model.pairs {
        let original = Block::from_network(&net, a, p.i, p.j).edge_weights();
        let scores = |w: &[f64]| w.iter().map(|&x| p.g_hat.score(x)).collect::<Vec<_>>();
        let sd0 = sd(&scores(&original));
        for rep in &reps {
            let w = Block::from_network(rep, a, p.i, p.j).edge_weights();
            worst_sd = worst_sd.max((sd(&scores(&w)) / sd0 - 1.0).abs());
            if original.len() >= 1000 {
                worst_ks = worst_ks.max(ks_two_sample(&w, &original));
            }
        }
    }
    let mut duplicates = 0;
    for x in 0..reps.len() {
        for y in x + 1..reps.len() {
            if reps[x] == reps[y] {
                duplicates += 1;
            }
        }
    }
    Ok(Outcome::new(
        worst_sd <= 0.15 && worst_ks <= 0.1 && duplicates == 0,
        format!(
            "worst normal-score SD deviation {:.2}%, worst KS {worst_ks:.4}, identical replicate pairs {duplicates}",
            100.0 * worst_sd
        ),
    ))
}

// ---------------------------------------------------------------- 10

struct HeldOut {
    worst_rank: f64,
    max_iters: usize,
    all_converged: bool,
}

fn held_out(retention: f64) -> Result<HeldOut> {
    let spec = presets::four_block(0.0, 0.0);
    let a = &spec.assignment;
    let (full, _) = generate(&spec, 0)?;
    let sparse = sparsify(&full, a, &vec![retention; pair_count(a.k())], 1)?;
    let cands = catalog();
    let mut out = HeldOut {
        worst_rank: f64::INFINITY,
        max_iters: 0,
        all_converged: true,
    };
    for (i, j) in socnet::model::pairs(a.k()) {
        let block = Block::from_network(&sparse, a, i, j);
        let truth = Block::from_network(&full, a, i, j);
        let eps = default_epsilon(&block);
        let fit = fit_missing(&block, &cands, eps, DEFAULT_MAX_ITERS)?;
        let (mut est, mut obs) = (Vec::new(), Vec::new());
        for (r, c) in block.positions() {
            if block.is_missing(r, c) {
                est.push(fit.imputed[(r, c)]);
                obs.push(truth.weights[(r, c)]);
            }
        }
        out.worst_rank = out.worst_rank.min(spearman(&est, &obs));
        out.max_iters = out.max_iters.max(fit.iterations);
        out.all_converged &= fit.deltas.last().is_some_and(|&d| d <= eps);
    }
    Ok(out)
}

fn missing_edges() -> Result<Outcome> {
    let light = held_out(0.8)?;
    let heavy = held_out(0.25)?;
    Ok(Outcome::new(
        light.worst_rank >= 0.9 && light.all_converged && light.max_iters <= 100 && heavy.worst_rank >= 0.5,
        format!(
            "20% deleted: worst block Spearman {:.4}, converged {}, max passes {}; 75% deleted: worst block Spearman {:.4}",
            light.worst_rank, light.all_converged, light.max_iters, heavy.worst_rank
        ),
    ))
}

// ---------------------------------------------------------------- 11

fn robustness() -> Result<Outcome> {
    let spec = presets::four_block(0.0, 0.0);
    let a = &spec.assignment;
    let (net, psi) = generate(&spec, 0)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (var, need) in [(36.0, 0.9), (100.0, 0.75), (225.0, 0.75)] {
        let noisy = add_external_noise(&net, a, &vec![f64::sqrt(var); pair_count(a.k())], 2)?;
        let model = fit_nsm(&noisy, a)?;
        let (rank, at) = worst_psi_agreement(&model, &spec, &psi);
        pass &= rank >= need;
        parts.push(format!("variance {var}: min signed Spearman {rank:.4} ({at})"));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

// ---------------------------------------------------------------- 12

fn tie_handling() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut expect = |what: &str, got: f64, want: f64| {
        let ok = (got - want).abs() <= 1e-15;
        pass &= ok;
        if !ok {
            notes.push(format!("{what} {got} != {want}"));
        }
    };
    let g = EmpiricalCdf::from_weights(&[1.0, 2.0, 3.0])?;
    for (got, want) in g.levels().iter().zip([0.25, 0.5, 0.75]) {
        expect("distinct level", *got, want);
    }
    let g = EmpiricalCdf::from_weights(&[1.0, 2.0, 2.0, 3.0])?;
    expect("tied level of 2.0", g.cdf(2.0), (1.0 + 1.0 + 0.25) / 5.0);
    expect("level of 3.0", g.cdf(3.0), 0.8);
    expect("single level", EmpiricalCdf::from_weights(&[5.0])?.levels()[0], 0.5);

    let mut w = DMatrix::from_element(3, 3, 2.0);
    w.fill_diagonal(0.0);
    let net = WeightedNetwork::new(w)?;
    let (s, _) = socnet::estimator::local_sociability(&net, &CommunityAssignment::single(3)?, 1, 1)?;
    for &x in &s.psi_hat {
        expect("all-tied sociability", x, (1.5 + 1.0 / 6.0) / 4.0);
    }

    // heavily tied blocks: integer weights in 0..4 and a two-valued block
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut inside = true;
    let mut blocks = 0;
    for levels in [5u32, 2] {
        let n = 30;
        let mut w = DMatrix::zeros(n, n);
        for u in 0..n {
            for v in u + 1..n {
                let x = rng.random_range(0..levels) as f64;
                w[(u, v)] = x;
                w[(v, u)] = x;
            }
        }
        let net = WeightedNetwork::new(w)?;
        let a = CommunityAssignment::new((0..n).map(|u| u / 15 + 1).collect())?;
        let model = fit_nsm(&net, &a)?;
        for p in &model.pairs {
            blocks += 1;
            let all = p.g_hat.levels().iter().chain(&p.psi_i_wrt_j).chain(&p.psi_j_wrt_i);
            inside &= all.into_iter().all(|&x| x > 0.0 && x < 1.0);
        }
    }
    pass &= inside;
    let detail = format!(
        "worked values {}; {blocks} tied blocks with all levels inside (0, 1): {inside}",
        if notes.is_empty() { "exact".to_string() } else { notes.join(", ") }
    );
    Ok(Outcome::new(pass, detail))
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture; nothing to filter
    let secs = Duration::from_secs;
    let results = [
        run(1, "H-uniformity", Some(secs(10)), h_uniformity),
        run(2, "monotone grids", None, monotone_grids),
        run(3, "noise-free LSM recovery", Some(secs(5)), lsm_recovery),
        run(4, "noise-free NSM recovery", Some(secs(60)), nsm_recovery),
        run(5, "sigma degradation", None, sigma_degradation),
        run(6, "spurious calibration", None, spurious_calibration),
        run(7, "measure-L arithmetic", None, measure_arithmetic),
        run(8, "community recovery", Some(secs(300)), community_recovery),
        run(9, "bootstrap fidelity", None, bootstrap_fidelity),
        run(10, "missing-edge iteration", None, missing_edges),
        run(11, "robustness to external noise", None, robustness),
        run(12, "tie handling", None, tie_handling),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 && std::env::var_os("SOCNET_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
