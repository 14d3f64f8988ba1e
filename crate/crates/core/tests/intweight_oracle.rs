//! The block construction against two independent routes: a direct
//! recursion over the coalescent states, and simulation.

use sfsph_core::intweight::IntWeightedLaw;
use sfsph_core::simulate::{simulate_sfs, simulate_statistic, SimConfig};
use sfsph_core::{build_model, SfsModel};

/// `P(c . xi = k)` for `k <= kmax` by walking the block-counting states in
/// order. In a state with `b_j` branches of class `j` and total coalescence
/// rate `q`, each event is a class-`j` mutation with probability
/// `lambda b_j / (lambda B + q)` or a coalescence with probability
/// `q / (lambda B + q)`, so the value added while in the state follows a
/// renewal recursion. No matrix is inverted.
fn enumerate_pmf(n: usize, theta: f64, c: &[usize], kmax: usize) -> Vec<f64> {
    let model = build_model(n).unwrap();
    let lambda = theta / 2.0;
    let p = model.size();
    let mut entering = vec![vec![0.0; kmax + 1]; p];
    entering[0][0] = 1.0;
    let mut absorbed = vec![0.0; kmax + 1];
    for i in 0..p {
        let counts = model.states()[i].counts();
        let total_branches: f64 = counts.iter().map(|&a| a as f64).sum();
        let q = model.total_rate(i) as f64;
        let u = lambda * total_branches + q;
        let silent: f64 = counts
            .iter()
            .zip(c)
            .filter(|(_, &cj)| cj == 0)
            .map(|(&a, _)| lambda * a as f64 / u)
            .sum();
        let mut added = vec![0.0; kmax + 1];
        added[0] = (q / u) / (1.0 - silent);
        for v in 1..=kmax {
            let mut s = 0.0;
            for (&a, &cj) in counts.iter().zip(c) {
                if cj > 0 && cj <= v {
                    s += lambda * a as f64 / u * added[v - cj];
                }
            }
            added[v] = s / (1.0 - silent);
        }
        let mut leaving = vec![0.0; kmax + 1];
        for (x, &pe) in entering[i].iter().enumerate() {
            if pe == 0.0 {
                continue;
            }
            for (y, &pa) in added.iter().enumerate().take(kmax + 1 - x) {
                leaving[x + y] += pe * pa;
            }
        }
        for &(target, rate) in model.transitions(i) {
            let w = rate as f64 / q;
            for (dst, src) in entering[target].iter_mut().zip(&leaving) {
                *dst += w * src;
            }
        }
        let w = model.exit_rate(i) as f64 / q;
        for (dst, src) in absorbed.iter_mut().zip(&leaving) {
            *dst += w * src;
        }
    }
    absorbed
}

#[test]
fn oracle_reproduces_geometric_case() {
    let theta = 1.5;
    let pmf = enumerate_pmf(2, theta, &[1], 30);
    let q = theta / (1.0 + theta);
    for (k, p) in pmf.iter().enumerate() {
        assert!((p - (1.0 - q) * q.powi(k as i32)).abs() < 1e-15);
    }
}

#[test]
fn block_construction_matches_enumeration() {
    let cases: &[(usize, f64, &[usize])] = &[
        (4, 1.0, &[3, 4, 3]),
        (4, 1.0, &[1, 2, 3]),
        (4, 1.0, &[1, 4, 9]),
        (4, 0.3, &[0, 2, 0]),
        (5, 2.0, &[1, 0, 2, 5]),
        (6, 1.0, &[5, 8, 9, 8, 5]),
        (6, 0.7, &[0, 0, 0, 1, 3]),
        (7, 1.0, &[2, 1, 1, 1, 1, 2]),
    ];
    for &(n, theta, c) in cases {
        let kmax = 60;
        let oracle = enumerate_pmf(n, theta, c, kmax);
        let coeffs: Vec<i64> = c.iter().map(|&x| x as i64).collect();
        let law = IntWeightedLaw::new(&SfsModel::new(n, theta).unwrap(), &coeffs).unwrap();
        for (k, (a, b)) in law.pmf_table(kmax).iter().zip(&oracle).enumerate() {
            assert!((a - b).abs() < 1e-12, "n={n} c={c:?} k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn block_construction_matches_simulation() {
    let (n, theta) = (5, 1.0);
    let c = [2i64, 1, 3, 1];
    let law = IntWeightedLaw::new(&SfsModel::new(n, theta).unwrap(), &c).unwrap();
    let pmf = law.pmf_table(12);
    let reps = 200_000;
    let real: Vec<f64> = c.iter().map(|&x| x as f64).collect();
    let draws = simulate_statistic(&SimConfig::new(n, theta, reps, 77).unwrap(), &real).unwrap();
    for (k, p) in pmf.iter().enumerate() {
        let freq = draws.iter().filter(|&&x| x == k as f64).count() as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt().max(1e-6);
        assert!((freq - p).abs() < 4.0 * se, "k={k}: {freq} vs {p}");
    }
}

#[test]
fn small_sample_statistics_match_simulation() {
    let (n, theta, reps) = (4, 1.0, 1_000_000);
    let sm = SfsModel::new(n, theta).unwrap();
    let draws = simulate_sfs(&SimConfig::new(n, theta, reps, 4).unwrap()).unwrap();
    for c in [[3u64, 4, 3], [1, 2, 3], [1, 4, 9]] {
        let coeffs: Vec<i64> = c.iter().map(|&x| x as i64).collect();
        let pmf = IntWeightedLaw::new(&sm, &coeffs).unwrap().pmf_table(60);
        let mut counts = vec![0usize; 61];
        for s in &draws {
            let k: u64 = s.sfs.iter().zip(&c).map(|(x, w)| x * w).sum();
            if k <= 60 {
                counts[k as usize] += 1;
            }
        }
        for (k, (&p, &m)) in pmf.iter().zip(&counts).enumerate() {
            let freq = m as f64 / reps as f64;
            if p < 1e-14 {
                assert_eq!(m, 0, "c={c:?} k={k} lies outside the support");
                continue;
            }
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!(
                (freq - p).abs() < 3.0 * se,
                "c={c:?} k={k}: {freq} vs {p} ({:.2} se)",
                (freq - p) / se
            );
        }
    }
}
