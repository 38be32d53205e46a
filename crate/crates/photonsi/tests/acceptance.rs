//! Release acceptance suite. Each test pins one published guarantee with a
//! frozen tolerance; the test line is the verdict and the printed numbers
//! record the margin. Check 15 (byte-identical CSV reruns across worker
//! counts) lives with the command-line crate.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::time::Instant;

use ndarray::{array, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photonsi::analysis::{
    birthday_collision, dof_max, dof_trials, pipeline_state, purity_cascade, state_jacobian,
    PipelineCircuit, PipelineStage, PurityCascade,
};
use photonsi::channel::{
    distinguishability_bound, outcome_distribution, state_injection, trace_distance,
    DensityMatrix, InjectionSpec,
};
use photonsi::circuit::{
    haar_unitary, universal_mesh, BsConvention, Gate, MeshStyle, Param, ParamCircuit,
};
use photonsi::lift::lift_unitary;
use photonsi::permanent::{gurvits_estimate, permanent_exact, permanent_naive};
use photonsi::probestim::{
    build_equivalent, enumerate_patterns, injection_pipeline_joint, regime_table, ChannelGrowth,
    PhotonGrowth, Verdict,
};
use photonsi::{FockBasis, FockState};

fn cmat(side: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    Array2::from_shape_fn((side, side), |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn start_density(modes: usize, photons: u32) -> DensityMatrix {
    let basis = FockBasis::new(modes, photons).unwrap();
    let mut occ = vec![0u32; modes];
    occ[0] = photons;
    DensityMatrix::from_basis_state(basis, &FockState::new(occ)).unwrap()
}

fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn acceptance_01_exact_permanent_matches_expansion() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_rel = 0.0f64;
    for i in 0..500 {
        let a = cmat(1 + i % 7, &mut rng);
        let fast = permanent_exact(&a).unwrap();
        let slow = permanent_naive(&a).unwrap();
        max_rel = max_rel.max((fast - slow).norm() / slow.norm());
    }
    let dt = t0.elapsed();
    println!("01: 500 permanents up to 7x7, max relative deviation {max_rel:.3e}, {dt:?}");
    assert!(max_rel <= 1e-10);
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}, budget is 10 s");
}

#[test]
fn acceptance_02_two_photon_interference_null() {
    let r = FRAC_1_SQRT_2;
    let u = array![
        [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)],
        [Complex64::new(r, 0.0), Complex64::new(r, 0.0)]
    ];
    let per = permanent_exact(&u).unwrap();
    let w = lift_unitary(&u, 2).unwrap();
    let both = w.basis().index_of(&FockState::new(vec![1, 1])).unwrap();
    let amp = w.matrix()[[both, both]];
    println!(
        "02: balanced splitter, |per| = {:.3e}, coincidence amplitude {:.3e}",
        per.norm(),
        amp.norm()
    );
    assert!(per.norm() <= 1e-12);
    assert!(amp.norm() <= 1e-12);
}

#[test]
fn acceptance_03_lift_is_multiplicative() {
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let m = 2 + (i as usize % 4);
        let n = 1 + (i % 3) as u32;
        let u = haar_unitary(m, 300 + 2 * i);
        let v = haar_unitary(m, 301 + 2 * i);
        let prod = lift_unitary(&u, n).unwrap().matrix().dot(lift_unitary(&v, n).unwrap().matrix());
        let whole = lift_unitary(&u.dot(&v), n).unwrap();
        worst = worst.max(max_abs_diff(&prod, whole.matrix()));
    }
    println!("03: 50 pairs, m in 2..=5, n in 1..=3, worst entry deviation {worst:.3e}");
    assert!(worst <= 1e-10);
}

#[test]
fn acceptance_04_injection_purity_equals_outcome_power_sum() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let m = 2 + (i as usize % 5);
        let n = 1 + (i % 3) as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(400);
        rng.set_stream(i);
        let mesh = universal_mesh(m, MeshStyle::RotationsPlusPhases).unwrap();
        let theta: Vec<f64> =
            (0..mesh.parameter_count()).map(|_| rng.random_range(0.0..TAU)).collect();
        let w = lift_unitary(&mesh.single_photon_unitary(&theta).unwrap(), n).unwrap();
        let basis = w.basis().clone();
        let start = basis.state(rng.random_range(0..basis.dim())).clone();
        let rho =
            DensityMatrix::from_basis_state(basis, &start).unwrap().evolve(&w).unwrap();
        let spec = InjectionSpec::identity(vec![rng.random_range(0..m)]).unwrap();
        let power_sum: f64 =
            outcome_distribution(&rho, &spec).unwrap().iter().map(|(_, p)| p * p).sum();
        let after = state_injection(&rho, &spec).unwrap();
        worst = worst.max((after.purity() - power_sum).abs());
    }
    println!("04: 100 read-and-replace channels on pure states, worst |purity - sum p^2| = {worst:.3e}");
    assert!(worst <= 1e-10);
}

#[test]
fn acceptance_05_purity_worst_case_floor() {
    for layers in 1..=3usize {
        let report = purity_cascade(&PurityCascade {
            modes: 6,
            photons: 3,
            layers,
            draws: 100,
            seed: 500 + layers as u64,
        })
        .unwrap();
        let min = report.purities.iter().copied().fold(f64::INFINITY, f64::min);
        println!("05: L={layers}, min purity {min:.6}, floor {:.6}", report.worst_case_bound);
        assert!(min >= report.worst_case_bound - 1e-12);
    }
}

#[test]
fn acceptance_06_purity_haar_mean_bound() {
    for layers in 1..=2usize {
        let report = purity_cascade(&PurityCascade {
            modes: 9,
            photons: 2,
            layers,
            draws: 200,
            seed: 600 + layers as u64,
        })
        .unwrap();
        let bound = report.haar_mean_bound.expect("9 modes exceed 2n^2 = 8");
        println!(
            "06: L={layers}, mean purity {:.6} (se {:.2e}), mean floor {:.6e}",
            report.mean, report.std_error, bound
        );
        assert!(report.mean >= bound - 3.0 * report.std_error);
    }
}

#[test]
fn acceptance_07_birthday_collision_ceiling() {
    for modes in [12usize, 16] {
        let report = birthday_collision(modes, 2, 300, 700 + modes as u64).unwrap();
        println!(
            "07: m={modes}, mean collision probability {:.6} (se {:.2e}), ceiling {:.6}",
            report.mean, report.std_error, report.bound
        );
        assert!(report.mean < report.bound);
    }
}

#[test]
fn acceptance_08_rank_plateau_and_injection_gain() {
    let t0 = Instant::now();
    let input = start_density(6, 3);
    let mesh = universal_mesh(6, MeshStyle::TriangularRotations).unwrap();
    let pc = PipelineCircuit::new(6, 3, vec![PipelineStage::Linear(mesh.clone())]).unwrap();
    let plateau = dof_max(&pc, &input, 800, 3).unwrap();
    // Without injections the reachable set is the orbit of the start state
    // under the lifted rotation group: a symmetric power of the real unit
    // sphere, dimension m-1. Far below the full-state ceiling m^2-1 = 35.
    assert_eq!(plateau, 5);
    assert!(plateau <= 35);

    let mut rng = ChaCha8Rng::seed_from_u64(801);
    let mut gates = mesh.gates().to_vec();
    for extra in 0..5usize {
        let a = rng.random_range(0..5usize);
        let b = rng.random_range(a + 1..6usize);
        gates.push(Gate::BeamSplitter {
            modes: (a, b),
            angle: Param::Slot(15 + extra),
            convention: BsConvention::Rotation,
        });
        let grown = ParamCircuit::new(6, gates.clone(), 16 + extra).unwrap();
        let pc = PipelineCircuit::new(6, 3, vec![PipelineStage::Linear(grown)]).unwrap();
        let rank = dof_max(&pc, &input, 800, 2).unwrap();
        assert_eq!(rank, plateau, "rank moved after appending {} gates", extra + 1);
    }

    let pc_si = PipelineCircuit::new(
        6,
        3,
        vec![
            PipelineStage::Linear(mesh.clone()),
            PipelineStage::Injection(InjectionSpec::identity(vec![0]).unwrap()),
            PipelineStage::Linear(mesh.clone()),
            PipelineStage::Injection(InjectionSpec::identity(vec![0]).unwrap()),
            PipelineStage::Linear(mesh),
        ],
    )
    .unwrap();
    let gained = dof_max(&pc_si, &input, 800, 2).unwrap();
    println!(
        "08: plateau {plateau} under appended gates, {gained} with two injection layers, {:?}",
        t0.elapsed()
    );
    assert!(gained > plateau);
}

#[test]
fn acceptance_09_rank_reproducible_across_draws() {
    for i in 0..20u64 {
        let m = 3 + (i as usize % 3);
        let n = 1 + (i % 2) as u32;
        let style = if i % 2 == 0 {
            MeshStyle::TriangularRotations
        } else {
            MeshStyle::RotationsPlusPhases
        };
        let mut stages = vec![PipelineStage::Linear(universal_mesh(m, style).unwrap())];
        if i % 3 != 0 {
            stages.push(PipelineStage::Injection(
                InjectionSpec::identity(vec![i as usize % m]).unwrap(),
            ));
            stages.push(PipelineStage::Linear(universal_mesh(m, style).unwrap()));
        }
        let pc = PipelineCircuit::new(m, n, stages).unwrap();
        let ranks = dof_trials(&pc, &start_density(m, n), 900 + i, 3).unwrap();
        assert!(
            ranks.iter().all(|&r| r == ranks[0]),
            "pipeline {i}: ranks {ranks:?} differ across parameter draws"
        );
    }
    println!("09: 20 pipelines, 3 parameter draws each, rank constant in every case");
}

#[test]
fn acceptance_10_jacobian_matches_finite_differences() {
    let mesh = |m: usize| universal_mesh(m, MeshStyle::TriangularRotations).unwrap();
    let inject = |mode: usize| PipelineStage::Injection(InjectionSpec::identity(vec![mode]).unwrap());
    let cases = vec![
        PipelineCircuit::new(2, 1, vec![PipelineStage::Linear(mesh(2))]).unwrap(),
        PipelineCircuit::new(
            3,
            1,
            vec![PipelineStage::Linear(mesh(3)), inject(0), PipelineStage::Linear(mesh(3))],
        )
        .unwrap(),
        PipelineCircuit::new(
            3,
            2,
            vec![PipelineStage::Linear(mesh(3)), inject(1), PipelineStage::Linear(mesh(3))],
        )
        .unwrap(),
        PipelineCircuit::new(4, 2, vec![PipelineStage::Linear(mesh(4))]).unwrap(),
        PipelineCircuit::new(
            4,
            2,
            vec![PipelineStage::Linear(mesh(4)), inject(2), PipelineStage::Linear(mesh(4))],
        )
        .unwrap(),
    ];
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (case, pc) in cases.into_iter().enumerate() {
        assert!(pc.parameter_count() <= 12);
        let input = start_density(pc.modes(), pc.photons());
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        rng.set_stream(case as u64);
        let theta: Vec<f64> =
            (0..pc.parameter_count()).map(|_| rng.random_range(0.0..TAU)).collect();
        let (_, jac) = state_jacobian(&pc, &input, &theta).unwrap();
        for a in 0..theta.len() {
            let mut up = theta.clone();
            up[a] += h;
            let mut dn = theta.clone();
            dn[a] -= h;
            let hi = pipeline_state(&pc, &input, &up).unwrap();
            let lo = pipeline_state(&pc, &input, &dn).unwrap();
            let fd = (hi.matrix() - lo.matrix()).mapv(|z| z / (2.0 * h));
            worst = worst.max(max_abs_diff(&fd, &jac[a]));
        }
    }
    println!("10: five pipelines, analytic against central differences, worst entry {worst:.3e}");
    assert!(worst <= 1e-6);
}

fn mixed_state(basis: &FockBasis, weight: f64, seed: u64) -> DensityMatrix {
    let d = basis.dim();
    let psi = haar_unitary(d, seed).column(0).to_owned();
    let uniform = (1.0 - weight) / d as f64;
    let mat = Array2::from_shape_fn((d, d), |(i, j)| {
        let pure = psi[i] * psi[j].conj() * weight;
        if i == j {
            pure + uniform
        } else {
            pure
        }
    });
    DensityMatrix::new(basis.clone(), mat).unwrap()
}

#[test]
fn acceptance_11_distinguishability_bound_grid() {
    let mut seed = 1_100_000u64;
    for d in [2usize, 4, 8, 16] {
        let basis = FockBasis::new(d, 1).unwrap();
        let floor = 1.0 / d as f64;
        for frac in [0.05f64, 0.5, 1.0] {
            let gamma = floor + frac * (1.0 - floor);
            // ρ = w|ψ⟩⟨ψ| + (1-w)/d has purity w²(1-1/d) + 1/d exactly.
            let weight = frac.sqrt();
            let bound = distinguishability_bound(d, gamma).unwrap();
            let mut max_ratio = 0.0f64;
            for _ in 0..1000 {
                let a = mixed_state(&basis, weight, seed);
                let b = mixed_state(&basis, weight, seed + 1);
                seed += 2;
                let dist = trace_distance(&a, &b).unwrap();
                assert!(dist <= bound + 1e-9, "d={d} purity={gamma}: {dist} > {bound}");
                max_ratio = max_ratio.max(dist / bound);
            }
            println!("11: d={d}, purity {gamma:.4}, 1000 pairs, max distance/bound {max_ratio:.4}");
        }
    }
    let basis = FockBasis::new(2, 1).unwrap();
    let a = DensityMatrix::from_basis_state(basis.clone(), &FockState::new(vec![1, 0])).unwrap();
    let b = DensityMatrix::from_basis_state(basis, &FockState::new(vec![0, 1])).unwrap();
    let ratio = trace_distance(&a, &b).unwrap() / distinguishability_bound(2, 1.0).unwrap();
    println!("11: orthogonal pure pair at d=2, distance/bound = {ratio:.6}");
    assert!((ratio - 1.0).abs() <= 0.05);
}

#[test]
fn acceptance_12_equivalent_model_matches_channel_pipeline() {
    let ms = [2usize, 3, 3, 2, 3];
    let ns = [1u32, 1, 2, 2, 2];
    let ks = [1usize, 2, 1, 2, 2];
    let mut worst_cell = 0.0f64;
    let mut worst_norm = 0.0f64;
    for i in 0..20usize {
        let (m, n, k) = (ms[i % 5], ns[i % 5], ks[i % 5]);
        let layers: Vec<Array2<Complex64>> =
            (0..=k).map(|l| haar_unitary(m, 1200 + 10 * i as u64 + l as u64)).collect();
        let basis = FockBasis::new(m, n).unwrap();
        let input = basis.state(i % basis.dim()).clone();
        let model = build_equivalent(&layers).unwrap();
        let reference: HashMap<(Vec<u32>, Vec<u32>), f64> =
            injection_pipeline_joint(&layers, n, &input)
                .unwrap()
                .into_iter()
                .map(|(s, p, pr)| ((s.occupations().to_vec(), p), pr))
                .collect();
        let mut total = 0.0;
        for s in basis.states() {
            for pattern in enumerate_patterns(k, n) {
                let joint = model.joint_probability(&input, s, &pattern).unwrap();
                total += joint;
                let want =
                    reference.get(&(s.occupations().to_vec(), pattern)).copied().unwrap_or(0.0);
                worst_cell = worst_cell.max((joint - want).abs());
            }
        }
        worst_norm = worst_norm.max((total - 1.0).abs());
    }
    println!(
        "12: 20 pipelines, worst joint-probability deviation {worst_cell:.3e}, worst normalization {worst_norm:.3e}"
    );
    assert!(worst_cell <= 1e-9);
    assert!(worst_norm <= 1e-8);
}

#[test]
fn acceptance_13_estimator_consistency() {
    let u = haar_unitary(6, 1300);
    let exact = permanent_exact(&u).unwrap();
    let mut hits = 0;
    for run in 0..100u64 {
        let est = gurvits_estimate(&u, 4000, 1300 + run).unwrap();
        if (est.value - exact).norm() <= 5.0 * est.empirical_std_error {
            hits += 1;
        }
    }
    let base = gurvits_estimate(&u, 20_000, 999).unwrap();
    let quad = gurvits_estimate(&u, 80_000, 999).unwrap();
    let ratio = quad.empirical_std_error / base.empirical_std_error;
    println!("13: {hits}/100 runs within 5 standard errors, 4x-sample error ratio {ratio:.4}");
    assert!(hits >= 99);
    assert!((0.45..=0.55).contains(&ratio));
}

#[test]
fn acceptance_14_regime_table_frozen() {
    use ChannelGrowth::*;
    use PhotonGrowth as P;
    use Verdict::*;
    let expected = vec![
        (Constant, P::Constant, Simulable),
        (Logarithmic, P::Constant, Simulable),
        (Linear, P::Constant, Simulable),
        (Constant, P::Logarithmic, Simulable),
        (Logarithmic, P::Logarithmic, Simulable),
        (Linear, P::Logarithmic, Hard),
        (Constant, P::Linear, Simulable),
        (Logarithmic, P::Linear, Hard),
        (Linear, P::Linear, Hard),
        (Constant, P::LinearLog, Open),
        (Logarithmic, P::LinearLog, Hard),
        (Linear, P::LinearLog, Hard),
        (Constant, P::Quadratic, Open),
        (Logarithmic, P::Quadratic, Open),
        (Linear, P::Quadratic, Hard),
    ];
    let table = regime_table();
    assert_eq!(table, expected);
    let count = |v: Verdict| table.iter().filter(|(_, _, x)| *x == v).count();
    println!(
        "14: 15 cells, {} simulable / {} hard / {} open",
        count(Simulable),
        count(Hard),
        count(Open)
    );
    assert_eq!((count(Simulable), count(Hard), count(Open)), (6, 6, 3));
}
