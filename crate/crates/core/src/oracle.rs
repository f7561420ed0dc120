//! Self-check suite: each check recomputes a quantity along an independent
//! path (dense materialization, diagonal sums, finite differences, Monte
//! Carlo, repeated runs) and reports the worst disagreement.
//!
//! A nonzero `perturb` is added to every implementation-side value before
//! comparison, which must make the suite fail.

use crate::actor::{actor_gradients, ActorParams};
use crate::critic::{critic_density, critic_loss_and_gradients, measure_classes, ComplexEmbeddingTable};
use crate::env::{gen_corpus, GenSpec};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::qcore::{build_density, collapse_sample, DensityMatrix, StateVector};
use crate::qrep::{cp_decompose, cp_reconstruct, embed_ids, materialize_local, project, AlsOptions, AmplitudeTable, GlobalRepresentation};
use crate::rng::SeedStreams;
use crate::trainer::{train, write_checkpoint, TrainConfig};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub const CHECKS: [&str; 9] = [
    "projection",
    "cp_reconstruct",
    "cp_decompose",
    "born",
    "density",
    "actor_gradients",
    "critic_gradients",
    "collapse",
    "determinism",
];

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub seed: u64,
    pub perturb: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { seed: 0, perturb: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

pub fn run_check(name: &str, opts: &OracleOptions) -> Result<CheckReport> {
    let streams = SeedStreams::new(opts.seed);
    let mut rng = streams.rng(name);
    let p = opts.perturb;
    let (name, instances, max_error, tolerance) = match name {
        "projection" => ("projection", 200, projection(&mut rng, 200, p)?, 1e-10),
        "cp_reconstruct" => ("cp_reconstruct", 100, reconstruct(&mut rng, 100, p)?, 1e-12),
        "cp_decompose" => ("cp_decompose", 10, decompose(&mut rng, 10, p)?, 1e-6),
        "born" => ("born", 200, born(&mut rng, 200, p)?, 1e-12),
        "density" => ("density", 200, density(&mut rng, 200, p)?, 1e-10),
        "actor_gradients" => ("actor_gradients", 20, actor_fd(&mut rng, 20, p)?, 1e-4),
        "critic_gradients" => ("critic_gradients", 20, critic_fd(&mut rng, 20, p)?, 1e-4),
        "collapse" => ("collapse", 100_000, collapse(&mut rng, 100_000, p)?, 0.01),
        "determinism" => ("determinism", 2, determinism(opts.seed, p)?, 0.0),
        other => return Err(Error::InvalidConfig(format!("unknown check {other:?}"))),
    };
    Ok(CheckReport {
        name,
        instances,
        max_error,
        tolerance,
    })
}

/// Runs `names`, or every check when `names` is empty.
pub fn run_oracles(names: &[String], opts: &OracleOptions) -> Result<Vec<CheckReport>> {
    if names.is_empty() {
        CHECKS.iter().map(|c| run_check(c, opts)).collect()
    } else {
        names.iter().map(|c| run_check(c, opts)).collect()
    }
}

/// Random actor instance with `n ≤ max_n`, `k ≤ max_k`, `R ≤ max_r`.
fn actor_instance<R: Rng + ?Sized>(
    rng: &mut R,
    vocab: usize,
    max_n: usize,
    max_k: usize,
    max_r: usize,
) -> ActorParams {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(2..=max_k);
    let r = rng.random_range(1..=max_r);
    let table = AmplitudeTable::random(vocab, k, rng);
    let global = GlobalRepresentation::random(r, n, k, 1.0, rng);
    ActorParams::new(table, global, rng.random_range(0.5..2.0)).expect("valid temperature")
}

fn random_ids<R: Rng + ?Sized>(rng: &mut R, vocab: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(1..vocab)).collect()
}

fn projection<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let p = actor_instance(rng, 6, 4, 4, 5);
        let len = rng.random_range(1..=p.order() + 1);
        let q = embed_ids(&random_ids(rng, 6, len), &p.table, p.order())?;
        let factored = project(&p.global, &q)? + perturb;
        let dense = cp_reconstruct(&p.global)?.inner(&materialize_local(&q)?)?;
        worst = worst.max((factored - dense).abs());
    }
    Ok(worst)
}

fn reconstruct<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let g = actor_instance(rng, 2, 3, 3, 3).global;
        let t = cp_reconstruct(&g)?;
        let (n, k) = (g.order(), g.basis_dim());
        for flat in 0..t.len() {
            let mut rem = flat;
            let mut idx = vec![0; n];
            for i in (0..n).rev() {
                idx[i] = rem % k;
                rem /= k;
            }
            let direct: f64 = (0..g.rank())
                .map(|r| g.weights()[r] * (0..n).map(|i| g.factor(r, i)[idx[i]]).product::<f64>())
                .sum();
            worst = worst.max((t.as_slice()[flat] + perturb - direct).abs());
        }
    }
    Ok(worst)
}

fn decompose<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n: usize = rng.random_range(2..=3);
        let k: usize = rng.random_range(2..=3);
        let max_r = 3.min(k.pow(n as u32) / k);
        let r = rng.random_range(1..=max_r);
        let g = GlobalRepresentation::random(r, n, k, 1.0, rng);
        let t = cp_reconstruct(&g)?;
        let (fit, _) = cp_decompose(&t, r, rng, &AlsOptions::default())?;
        let back = cp_reconstruct(&fit)?;
        let diff: f64 = back
            .as_slice()
            .iter()
            .zip(t.as_slice())
            .map(|(a, b)| (a + perturb - b).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(diff / t.frobenius_norm());
    }
    Ok(worst)
}

fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<DensityMatrix> {
    let m = rng.random_range(1..=4);
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let states = (0..m)
        .map(|_| {
            let v: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            StateVector::from_unnormalized(v)
        })
        .collect::<Result<Vec<_>>>()?;
    build_density(&weights, &states)
}

fn born<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let d = 3 * rng.random_range(1..=4);
        let rho = random_density(rng, d)?;
        let p = measure_classes(&rho)?.probabilities;
        let diag = rho.diagonal();
        for (c, pc) in p.iter().enumerate() {
            let partial: f64 = diag[c * d / 3..(c + 1) * d / 3].iter().sum();
            worst = worst.max((pc + perturb - partial).abs());
            if *pc < 0.0 {
                worst = f64::INFINITY;
            }
        }
        // completeness carries its own looser bound
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

fn density<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let v = rng.random_range(2..=8);
        let mut table = ComplexEmbeddingTable::random(v, 3 * rng.random_range(1..=4), rng)?;
        randomize_salience(&mut table, rng)?;
        let len = rng.random_range(1..=8);
        let split = rng.random_range(0..=len);
        let ids: Vec<usize> = (0..len).map(|_| rng.random_range(0..v)).collect();
        let rho = critic_density(&ids[..split], &ids[split..], &table)?;
        let m = rho.matrix();
        let herm = m.max_abs_diff(&m.adjoint())?;
        let tr = (m.trace() + perturb - Complex64::new(1.0, 0.0)).norm();
        worst = worst.max(herm).max(tr);
        if rho.min_eigenvalue() < -1e-8 {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

fn randomize_salience<R: Rng + ?Sized>(table: &mut ComplexEmbeddingTable, rng: &mut R) -> Result<()> {
    let salience = (0..table.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
    *table = ComplexEmbeddingTable::from_parts(
        table.dim(),
        table.amplitudes().to_vec(),
        table.phases().to_vec(),
        salience,
    )?;
    Ok(())
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Entry `flat` (row-major, first vector most significant) of the outer
/// product of `vecs`.
fn outer_entry(vecs: &[&[f64]], k: usize, flat: usize) -> f64 {
    let mut rem = flat;
    let mut prod = 1.0;
    for v in vecs.iter().rev() {
        prod *= v[rem % k];
        rem /= k;
    }
    prod
}

/// Raw actor parameters, differentiated off the unit sphere.
#[derive(Clone)]
struct RawActor {
    k: usize,
    n: usize,
    tau: f64,
    rows: Vec<f64>,
    weights: Vec<f64>,
    factors: Vec<f64>,
}

impl RawActor {
    /// `−A·log softmax(s/τ)[chosen]` with every score taken as the full
    /// contraction of the dense global tensor with the dense local tensor.
    fn loss(&self, candidates: &[Vec<usize>], chosen: usize, advantage: f64) -> f64 {
        let (k, n) = (self.k, self.n);
        let size = k.pow(n as u32);
        let rank = self.weights.len();
        let global: Vec<f64> = (0..size)
            .map(|flat| {
                (0..rank)
                    .map(|r| {
                        let f: Vec<&[f64]> = (0..n)
                            .map(|i| &self.factors[(r * n + i) * k..(r * n + i + 1) * k])
                            .collect();
                        self.weights[r] * outer_entry(&f, k, flat)
                    })
                    .sum()
            })
            .collect();
        let scores: Vec<f64> = candidates
            .iter()
            .map(|ids| {
                let rows: Vec<&[f64]> = (0..n)
                    .map(|i| {
                        let id = ids.get(i).copied().unwrap_or(0);
                        &self.rows[id * k..(id + 1) * k]
                    })
                    .collect();
                (0..size).map(|flat| global[flat] * outer_entry(&rows, k, flat)).sum::<f64>() / self.tau
            })
            .collect();
        let log_z = scores.iter().map(|s| s.exp()).sum::<f64>().ln();
        -advantage * (scores[chosen] - log_z)
    }
}

fn actor_fd<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let h = FD_STEP;
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let vocab = 5;
        let p = actor_instance(rng, vocab, 3, 3, 3);
        let candidates: Vec<Vec<usize>> = (0..rng.random_range(2..=4))
            .map(|_| {
                let len = rng.random_range(1..=p.order());
                random_ids(rng, vocab, len)
            })
            .collect();
        let chosen = rng.random_range(0..candidates.len());
        let advantage = rng.random_range(-1.0..1.0);
        let states = candidates
            .iter()
            .map(|c| embed_ids(c, &p.table, p.order()))
            .collect::<Result<Vec<_>>>()?;
        let grads = actor_gradients(&p, &states, chosen, advantage)?;
        let raw = RawActor {
            k: p.global.basis_dim(),
            n: p.order(),
            tau: p.temperature(),
            rows: p.table.as_slice().to_vec(),
            weights: p.global.weights().to_vec(),
            factors: p.global.factors().to_vec(),
        };
        let numeric = |field: fn(&mut RawActor) -> &mut Vec<f64>, idx: usize| {
            let mut plus = raw.clone();
            field(&mut plus)[idx] += h;
            let up = plus.loss(&candidates, chosen, advantage);
            field(&mut plus)[idx] -= 2.0 * h;
            let down = plus.loss(&candidates, chosen, advantage);
            (up - down) / (2.0 * h)
        };
        for (r, g) in grads.weights.iter().enumerate() {
            worst = worst.max(relative_error(g + perturb, numeric(|a| &mut a.weights, r)));
        }
        for (idx, g) in grads.factors.iter().enumerate() {
            worst = worst.max(relative_error(g + perturb, numeric(|a| &mut a.factors, idx)));
        }
        let k = raw.k;
        for (&id, g) in &grads.table {
            for (b, gb) in g.iter().enumerate() {
                worst = worst.max(relative_error(gb + perturb, numeric(|a| &mut a.rows, id * k + b)));
            }
        }
    }
    Ok(worst)
}

/// `−log p_label` assembled from the diagonal of the mixture by hand.
fn raw_critic_loss(d: usize, amps: &[f64], phases: &[f64], sal: &[f64], ids: &[usize], label: Label) -> f64 {
    let z: f64 = ids.iter().map(|&i| sal[i].exp()).sum();
    let mut diag = vec![0.0; d];
    for &id in ids {
        let a = &amps[id * d..(id + 1) * d];
        let norm2: f64 = a.iter().map(|x| x * x).sum();
        for j in 0..d {
            let w = Complex64::from_polar(a[j] / norm2.sqrt(), phases[id * d + j]);
            diag[j] += sal[id].exp() / z * w.norm_sqr();
        }
    }
    let c = label.class_index();
    -diag[c * d / 3..(c + 1) * d / 3].iter().sum::<f64>().ln()
}

fn critic_fd<R: Rng + ?Sized>(rng: &mut R, count: usize, perturb: f64) -> Result<f64> {
    let h = FD_STEP;
    let d = 6;
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let v = rng.random_range(2..=5);
        let mut table = ComplexEmbeddingTable::random(v, d, rng)?;
        randomize_salience(&mut table, rng)?;
        let state: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..v)).collect();
        let action: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..v)).collect();
        let ids: Vec<usize> = state.iter().chain(&action).copied().collect();
        let label = Label::ALL[rng.random_range(0..3)];
        let g = critic_loss_and_gradients(&state, &action, label, &table)?.gradients;
        let (amps, phases, sal) = (table.amplitudes(), table.phases(), table.salience());
        let fd = |which: usize, idx: usize| {
            let (mut a, mut p, mut s) = (amps.to_vec(), phases.to_vec(), sal.to_vec());
            let target = |a: &mut Vec<f64>, p: &mut Vec<f64>, s: &mut Vec<f64>, delta: f64| match which {
                0 => a[idx] += delta,
                1 => p[idx] += delta,
                _ => s[idx] += delta,
            };
            target(&mut a, &mut p, &mut s, h);
            let up = raw_critic_loss(d, &a, &p, &s, &ids, label);
            target(&mut a, &mut p, &mut s, -2.0 * h);
            let down = raw_critic_loss(d, &a, &p, &s, &ids, label);
            (up - down) / (2.0 * h)
        };
        for (&id, row) in &g.amplitudes {
            for (j, gj) in row.iter().enumerate() {
                worst = worst.max(relative_error(gj + perturb, fd(0, id * d + j)));
            }
        }
        for (&id, row) in &g.phases {
            for (j, gj) in row.iter().enumerate() {
                worst = worst.max(relative_error(gj + perturb, fd(1, id * d + j)));
            }
        }
        for (&id, gs) in &g.salience {
            worst = worst.max(relative_error(gs + perturb, fd(2, id)));
        }
    }
    Ok(worst)
}

fn collapse<R: Rng + ?Sized>(rng: &mut R, draws: usize, perturb: f64) -> Result<f64> {
    let psi = StateVector::normalized(vec![0.6, 0.8])?;
    let mut zeros = 0usize;
    for _ in 0..draws {
        if collapse_sample(&psi, rng)?.0 == 0 {
            zeros += 1;
        }
    }
    Ok((zeros as f64 / draws as f64 + perturb - 0.36).abs())
}

fn determinism(seed: u64, perturb: f64) -> Result<f64> {
    let spec = GenSpec {
        docs: 6,
        ..GenSpec::default()
    };
    let corpus = gen_corpus(&spec, &mut SeedStreams::new(seed).rng("corpus"))?;
    let config = TrainConfig {
        episodes: 20,
        eval_interval: 10,
        seed,
        ..TrainConfig::default()
    };
    let a = write_checkpoint(&train(&config, &corpus)?.checkpoint);
    let b = write_checkpoint(&train(&config, &corpus)?.checkpoint);
    Ok(if a == b { perturb.abs() } else { 1.0 })
}
