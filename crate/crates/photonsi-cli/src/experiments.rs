use std::collections::HashMap;

use photonsi::analysis::{
    birthday_collision, dof_curve, dof_trials, purity_cascade, PurityCascade,
};
use photonsi::circuit::haar_unitary;
use photonsi::permanent::{gurvits_estimate, permanent_exact};
use photonsi::probestim::{build_equivalent, ProbMethod};
use photonsi::{FockBasis, FockState};

use crate::config::{
    BirthdayCfg, Config, DofCurveCfg, DofMaxCfg, PermBenchCfg, ProbEstimCfg, PurityCfg, StageSpec,
};
use crate::csvout::{int, num, Csv};
use crate::err::Fail;

pub fn run(cfg: &Config) -> Result<Csv, Fail> {
    match cfg {
        Config::DofCurve(c) => dof_curve_exp(c),
        Config::DofMax(c) => dof_max_exp(c),
        Config::PurityBounds(c) => purity_exp(c),
        Config::Birthday(c) => birthday_exp(c),
        Config::ProbEstim(c) => probestim_exp(c),
        Config::PermBench(c) => perm_bench_exp(c),
    }
}

/// Cheap dry run: construct everything, compute nothing heavy. Used by the
/// validate subcommand.
pub fn summary(cfg: &Config) -> Result<String, Fail> {
    Ok(match cfg {
        Config::DofCurve(c) => {
            let (pc, _) = c.pipeline.build()?;
            format!(
                "dof-curve: {} modes, {} photons, {} stages, {} parameters{}",
                pc.modes(),
                pc.photons(),
                pc.stages().len(),
                pc.parameter_count(),
                if c.compare_without_injection { ", with injection-free reference" } else { "" }
            )
        }
        Config::DofMax(c) => {
            if c.trials == 0 {
                return Err(Fail::Config("dof-max needs trials >= 1".into()));
            }
            let (pc, _) = c.pipeline.build()?;
            format!(
                "dof-max: {} modes, {} photons, {} parameters, {} trials",
                pc.modes(),
                pc.photons(),
                pc.parameter_count(),
                c.trials
            )
        }
        Config::PurityBounds(c) => {
            if c.layers.is_empty() || c.layers.contains(&0) {
                return Err(Fail::Config("purity-bounds needs nonzero layer counts".into()));
            }
            if c.draws == 0 {
                return Err(Fail::Config("purity-bounds needs draws >= 1".into()));
            }
            let basis = FockBasis::new(c.modes, c.photons)?;
            format!(
                "purity-bounds: {} modes, {} photons (sector dimension {}), layers {:?}, {} draws",
                c.modes,
                c.photons,
                basis.dim(),
                c.layers,
                c.draws
            )
        }
        Config::Birthday(c) => {
            if c.modes.is_empty() {
                return Err(Fail::Config("birthday needs at least one mode count".into()));
            }
            if c.draws == 0 {
                return Err(Fail::Config("birthday needs draws >= 1".into()));
            }
            for &m in &c.modes {
                if c.photons == 0 || c.photons as usize > m {
                    return Err(Fail::Config(format!(
                        "birthday needs 1..={m} photons at m={m}, got {}",
                        c.photons
                    )));
                }
                FockBasis::new(m, c.photons)?;
            }
            format!("birthday: modes {:?}, {} photons, {} draws", c.modes, c.photons, c.draws)
        }
        Config::ProbEstim(c) => {
            check_probestim(c)?;
            format!(
                "probestim: {} modes, {} photons, {} read-and-replace steps, {} samples per pattern{}",
                c.modes,
                c.photons,
                c.layer_seeds.len() - 1,
                c.samples,
                match c.max_sigma {
                    Some(s) => format!(", checked at {s} standard errors"),
                    None => String::new(),
                }
            )
        }
        Config::PermBench(c) => {
            if c.side == 0 || c.side > 20 {
                return Err(Fail::Config(format!(
                    "perm-bench side must be 1..=20, got {}",
                    c.side
                )));
            }
            if c.samples.is_empty() || c.samples.contains(&0) {
                return Err(Fail::Config("perm-bench needs nonzero sample counts".into()));
            }
            format!("perm-bench: {0}x{0} matrix, sample grid {1:?}", c.side, c.samples)
        }
    })
}

fn dof_curve_exp(cfg: &DofCurveCfg) -> Result<Csv, Fail> {
    let (pc, input) = cfg.pipeline.build()?;
    let curve = dof_curve(&pc, &input, cfg.seed)?;
    if !cfg.compare_without_injection {
        let mut csv = Csv::new(&["step", "gates_applied", "kind", "rank"]);
        for p in &curve {
            csv.push(vec![int(p.step), int(p.gates_applied), p.kind.to_string(), int(p.rank)]);
        }
        return Ok(csv);
    }
    // Same gate sequence with the read-and-replace stages removed; the
    // parameter count is unchanged, so both curves see the same angles.
    let mut stripped = cfg.pipeline.clone();
    stripped.stages.retain(|s| !matches!(s, StageSpec::Inject { .. }));
    let (spc, sinput) = stripped.build()?;
    let reference: HashMap<usize, usize> =
        dof_curve(&spc, &sinput, cfg.seed)?.iter().map(|p| (p.gates_applied, p.rank)).collect();
    let mut csv = Csv::new(&["step", "gates_applied", "kind", "rank", "rank_without_injection"]);
    for p in &curve {
        let without = *reference.get(&p.gates_applied).expect("gate sequences align");
        csv.push(vec![
            int(p.step),
            int(p.gates_applied),
            p.kind.to_string(),
            int(p.rank),
            int(without),
        ]);
    }
    Ok(csv)
}

fn dof_max_exp(cfg: &DofMaxCfg) -> Result<Csv, Fail> {
    let (pc, input) = cfg.pipeline.build()?;
    let ranks = dof_trials(&pc, &input, cfg.seed, cfg.trials)?;
    let mut csv = Csv::new(&["trial", "rank"]);
    for (t, &r) in ranks.iter().enumerate() {
        csv.push(vec![int(t), int(r)]);
    }
    Ok(csv)
}

fn purity_exp(cfg: &PurityCfg) -> Result<Csv, Fail> {
    if cfg.layers.is_empty() {
        return Err(Fail::Config("purity-bounds needs at least one layer count".into()));
    }
    let mut csv = Csv::new(&["layers", "draw", "purity", "floor", "mean_floor"]);
    for &layers in &cfg.layers {
        let report = purity_cascade(&PurityCascade {
            modes: cfg.modes,
            photons: cfg.photons,
            layers,
            draws: cfg.draws,
            seed: cfg.seed,
        })?;
        let floor = report.worst_case_bound;
        let mean_floor = match report.haar_mean_bound {
            Some(b) => num(b)?,
            None => String::new(),
        };
        for (draw, &p) in report.purities.iter().enumerate() {
            if p < floor - 1e-12 {
                return Err(Fail::Assertion(format!(
                    "purity {p} under the floor {floor} at layers={layers}, draw={draw}"
                )));
            }
            csv.push(vec![int(layers), int(draw), num(p)?, num(floor)?, mean_floor.clone()]);
        }
    }
    Ok(csv)
}

fn birthday_exp(cfg: &BirthdayCfg) -> Result<Csv, Fail> {
    if cfg.modes.is_empty() {
        return Err(Fail::Config("birthday needs at least one mode count".into()));
    }
    let mut csv = Csv::new(&["modes", "draw", "collision_probability", "ceiling"]);
    for &modes in &cfg.modes {
        let report = birthday_collision(modes, cfg.photons, cfg.draws, cfg.seed)?;
        if report.mean >= report.bound {
            return Err(Fail::Assertion(format!(
                "mean collision probability {} reaches the ceiling {} at m={modes}",
                report.mean, report.bound
            )));
        }
        for (draw, &p) in report.collision_probs.iter().enumerate() {
            csv.push(vec![int(modes), int(draw), num(p)?, num(report.bound)?]);
        }
    }
    Ok(csv)
}

fn check_probestim(cfg: &ProbEstimCfg) -> Result<(), Fail> {
    if cfg.layer_seeds.is_empty() {
        return Err(Fail::Config("probestim needs at least one layer seed".into()));
    }
    if cfg.input.len() != cfg.modes {
        return Err(Fail::Config(format!(
            "input has {} entries for {} modes",
            cfg.input.len(),
            cfg.modes
        )));
    }
    let held: u32 = cfg.input.iter().sum();
    if held != cfg.photons {
        return Err(Fail::Config(format!(
            "input holds {held} photons, config declares {}",
            cfg.photons
        )));
    }
    if cfg.samples == 0 {
        return Err(Fail::Config("probestim needs samples >= 1".into()));
    }
    FockBasis::new(cfg.modes, cfg.photons)?;
    Ok(())
}

fn probestim_exp(cfg: &ProbEstimCfg) -> Result<Csv, Fail> {
    check_probestim(cfg)?;
    let layers: Vec<_> = cfg.layer_seeds.iter().map(|&s| haar_unitary(cfg.modes, s)).collect();
    let model = build_equivalent(&layers)?;
    let basis = FockBasis::new(cfg.modes, cfg.photons)?;
    let input = FockState::new(cfg.input.clone());
    let mut csv = Csv::new(&[
        "output_index",
        "output",
        "exact",
        "estimate",
        "bias_corrected",
        "std_error",
        "patterns",
    ]);
    let mut breaches = Vec::new();
    for (idx, s) in basis.states().iter().enumerate() {
        let exact = model.output_probability(&input, s, ProbMethod::Exact)?;
        // A fresh estimator seed per output; the stride clears every
        // per-pattern offset added inside.
        let est = model.output_probability(
            &input,
            s,
            ProbMethod::Gurvits {
                samples: cfg.samples,
                seed: cfg.seed.wrapping_add(1_000_003 * idx as u64),
            },
        )?;
        let se = est.std_error.expect("sampled estimates carry an error bar");
        let label: String =
            s.occupations().iter().map(|o| o.to_string()).collect::<Vec<_>>().join("-");
        if let Some(sigma) = cfg.max_sigma {
            let dev = (est.value - exact.value).abs();
            if dev > sigma * se {
                breaches.push(format!("{label} deviates by {dev:.3e} with error bar {se:.3e}"));
            }
        }
        csv.push(vec![
            int(idx),
            label,
            num(exact.value)?,
            num(est.value)?,
            num(est.bias_corrected.expect("sampled estimates are corrected"))?,
            num(se)?,
            int(est.patterns),
        ]);
    }
    if !breaches.is_empty() {
        return Err(Fail::Assertion(format!(
            "{} of {} outputs beyond {} standard errors: {}",
            breaches.len(),
            basis.dim(),
            cfg.max_sigma.unwrap_or_default(),
            breaches.join("; ")
        )));
    }
    Ok(csv)
}

fn perm_bench_exp(cfg: &PermBenchCfg) -> Result<Csv, Fail> {
    if cfg.samples.is_empty() {
        return Err(Fail::Config("perm-bench needs at least one sample count".into()));
    }
    let u = haar_unitary(cfg.side, cfg.seed);
    let exact = permanent_exact(&u)?;
    let mut csv = Csv::new(&[
        "samples",
        "estimate_re",
        "estimate_im",
        "std_error",
        "abs_error",
        "exact_re",
        "exact_im",
    ]);
    for &n in &cfg.samples {
        let est = gurvits_estimate(&u, n, cfg.seed)?;
        csv.push(vec![
            int(n),
            num(est.value.re)?,
            num(est.value.im)?,
            num(est.empirical_std_error)?,
            num((est.value - exact).norm())?,
            num(exact.re)?,
            num(exact.im)?,
        ]);
    }
    Ok(csv)
}
