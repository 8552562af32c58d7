// pilot: half-sample replicated CI coverage
use mcmcsel::divergence::*;
use mcmcsel::knn::{default_k, DuplicatePolicy, NeighborIndex};
use mcmcsel::seed::{derive_seed, rng_from};
use mcmcsel::stats::{mean, sample_variance};
use mcmcsel::target::{GaussianSpec, TargetModel};
use rand::seq::SliceRandom;
use statrs::distribution::ContinuousCDF;

fn half<T: Clone>(v: &[T], rng: &mut impl rand::Rng) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.shuffle(rng);
    idx.truncate(v.len() / 2);
    idx.sort_unstable();
    idx.into_iter().map(|i| v[i].clone()).collect()
}

fn main() {
    let p = TargetModel::gaussian(GaussianSpec::scalar(0.0, 1.0).unwrap());
    let f = TargetModel::gaussian(GaussianSpec::scalar(0.5, 1.5).unwrap());
    let kinds = [
        (DivergenceKind::new(DivergenceFamily::Alpha, 2.0).unwrap(),),
        (DivergenceKind::new(DivergenceFamily::Tsallis, 0.99).unwrap(),),
        (DivergenceKind::new(DivergenceFamily::Renyi, 0.5).unwrap(),),
        (DivergenceKind::new(DivergenceFamily::Renyi, 0.3).unwrap(),),
    ];
    let oracle: Vec<f64> = kinds.iter().map(|(k,)| analytic_divergence(*k, &p, &f).unwrap()).collect();
    let n = 2000;
    let k = default_k(n);
    let reps = 20usize;
    let t = statrs::distribution::StudentsT::new(0.0, 1.0, (reps - 1) as f64).unwrap().inverse_cdf(0.975);
    let mut cover = [0usize; 4];
    let mut width = [0.0f64; 4];
    for seed in 0..200u64 {
        let mut rng = rng_from(31_000 + seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| p.sample_direct(&mut rng).unwrap()).collect();
        let ys: Vec<Vec<f64>> = (0..n).map(|_| f.sample_direct(&mut rng).unwrap()).collect();
        let xi = NeighborIndex::build(&xs).unwrap();
        let yi = NeighborIndex::build(&ys).unwrap();
        // replicate estimates of m-hat per kind
        let mut rep_m: Vec<Vec<f64>> = vec![Vec::new(); kinds.len()];
        for r in 0..reps {
            let mut rr = rng_from(derive_seed(7_000 + seed, "ci", r as u64));
            let xh = half(&xs, &mut rr);
            let yh = half(&ys, &mut rr);
            let xih = NeighborIndex::build(&xh).unwrap();
            let yih = NeighborIndex::build(&yh).unwrap();
            for (j, (kd,)) in kinds.iter().enumerate() {
                let m = estimate_m_hat(&xih, &yih, k, kd.alpha, DuplicatePolicy::Error).unwrap();
                rep_m[j].push(m.corrected);
            }
        }
        for (j, (kd,)) in kinds.iter().enumerate() {
            let m = estimate_m_hat(&xi, &yi, k, kd.alpha, DuplicatePolicy::Error).unwrap();
            let v = divergence_from_m(*kd, m.corrected).unwrap();
            let sd_m = sample_variance(&rep_m[j]).sqrt();
            let a = kd.alpha;
            let half_w = match kd.family {
                DivergenceFamily::Alpha => t * sd_m / (a * (1.0 - a)).abs(),
                DivergenceFamily::Tsallis => t * sd_m / (a - 1.0).abs(),
                DivergenceFamily::Renyi => t * sd_m / ((a - 1.0).abs() * m.corrected),
            };
            if v - half_w <= oracle[j] && oracle[j] <= v + half_w { cover[j] += 1; }
            width[j] += 2.0 * half_w;
        }
    }
    for (j, (kd,)) in kinds.iter().enumerate() {
        println!("{:?}({}): {:>3}/200  mean width {:.4}", kd.family, kd.alpha, cover[j], width[j] / 200.0);
    }
    let _ = mean(&[0.0]);
}
