//! One pipeline per experiment kind.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use freelab::fock::{commutation_residual, project_sectors, z_involution, FockDescriptor, FockSpace, Label, SeedSpace};
use freelab::freeness::{center, check_free_independence, split_word_orthogonality, MomentWord};
use freelab::linalg::{random_matrix, random_unit_vector, random_vector, CMatrix, C64};
use freelab::modular::{
    gamma_decay_probe, modular_axioms_check, tomita, two_by_two_example, verify_with, FreeModular, GammaModel,
    MatrixAlgebra,
};
use freelab::smatrix::{
    precedes, scattering_state, smatrix_apply, support_condition_check, Direction, FieldCopies, RapidityGrid,
    WavePacket2D,
};
use freelab::spectral::{distal_bound, split_distance, verify_trace_bound, Bound, SpectrumModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    Experiment, ExperimentConfig, FockParams, FreenessParams, ModularParams, SmatrixParams, SpectralParams,
};
use crate::error::{CliError, Result};
use crate::report::{Cell, Check, RunReport, Series};

/// Files a pipeline wants written next to the report, as `(name, contents)`.
pub type Artifacts = Vec<(String, String)>;

/// Runs the experiment of `config`. Relative input paths resolve against
/// `base`.
pub fn run(config: &ExperimentConfig, base: &Path) -> Result<(RunReport, Artifacts)> {
    let mut report = RunReport::new(config.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.tol_scale;
    let artifacts = match &config.experiment {
        Experiment::Fock(p) => fock(p, scale, &mut rng, &mut report)?,
        Experiment::Freeness(p) => freeness(p, scale, config.seed, &mut rng, &mut report)?,
        Experiment::Modular(p) => modular(p, scale, &mut rng, &mut report)?,
        Experiment::Spectral(p) => spectral(p, base, &mut report)?,
        Experiment::Smatrix(p) => smatrix(p, scale, &mut report)?,
    };
    Ok((report, artifacts))
}

fn timed<T>(report: &mut RunReport, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    report.timings.insert(stage.into(), start.elapsed().as_secs_f64());
    out
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))
}

fn build_fock(rng: &mut ChaCha8Rng, dims: &[usize], max_len: usize, random_vacua: bool) -> Result<FockSpace> {
    let seeds = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if random_vacua {
                SeedSpace::new(i + 1, random_unit_vector(rng, d))
            } else {
                SeedSpace::standard(i + 1, d)
            }
        })
        .collect::<freelab::Result<Vec<_>>>()?;
    Ok(FockSpace::new(seeds, max_len)?)
}

fn fock(p: &FockParams, scale: f64, rng: &mut ChaCha8Rng, report: &mut RunReport) -> Result<Artifacts> {
    let space = build_fock(rng, &p.dims, p.max_len, p.random_vacua)?;
    let tol = p.tol * scale;
    let k = p.dims.len();

    if p.max_len >= 2 {
        let worst = timed(report, "commutation", || {
            let mut worst = 0.0f64;
            for _ in 0..p.trials {
                let a = rng.random_range(1..=k);
                let b = rng.random_range(1..=k);
                let t = random_matrix(rng, p.dims[a - 1], p.dims[a - 1]);
                let t2 = random_matrix(rng, p.dims[b - 1], p.dims[b - 1]);
                let v = random_vector(rng, space.total_dim());
                let v = project_sectors(&space, &v, |w| w.len() + 2 <= p.max_len)?.normalize();
                worst = worst.max(commutation_residual(&space, a, &t, b, &t2, &v)?);
            }
            Ok(worst)
        })?;
        report.check(Check::below("commutation_residual", worst, tol, true));
    } else {
        report.warnings.push("max_len < 2: commutation relations need words of length max_len - 2".into());
    }

    let z_residual = timed(report, "involution", || {
        let mut worst = 0.0f64;
        for _ in 0..p.trials.clamp(1, 50) {
            let v = random_vector(rng, space.total_dim());
            let zv = z_involution(&space, &v)?;
            let zzv = z_involution(&space, &zv)?;
            worst = worst.max((zzv - &v).norm()).max((zv.norm() - v.norm()).abs());
        }
        Ok(worst)
    })?;
    report.check(Check::below("involution_residual", z_residual, tol, true));

    let descriptor = space.descriptor();
    let json = to_json(&descriptor)?;
    let parsed: FockDescriptor = serde_json::from_str(&json).map_err(|e| CliError::Serialize(e.to_string()))?;
    let rebuilt = FockSpace::from_descriptor(&parsed)?;
    report.check(Check::holds("descriptor_round_trip", parsed == descriptor && rebuilt.descriptor() == descriptor));
    report.check(Check::info("total_dim", space.total_dim() as f64));

    let mut sectors = Series::new(&["index", "word", "dim", "offset"]);
    for (i, s) in descriptor.sectors.iter().enumerate() {
        sectors.push(vec![i.into(), s.word.to_string().into(), s.dim.into(), s.offset.into()]);
    }
    report.series.insert("sectors".into(), sectors);
    Ok(vec![("fock.json".into(), json)])
}

fn freeness(
    p: &FreenessParams,
    scale: f64,
    seed: u64,
    rng: &mut ChaCha8Rng,
    report: &mut RunReport,
) -> Result<Artifacts> {
    let space = build_fock(rng, &p.dims, p.max_len, true)?;
    let tol = p.tol * scale;
    let families: BTreeMap<Label, Vec<CMatrix>> = space
        .seeds()
        .iter()
        .map(|s| (s.label(), (0..p.generators).map(|_| random_matrix(rng, s.dim(), s.dim())).collect()))
        .collect();
    let mut free =
        timed(report, "free_independence", || Ok(check_free_independence(&space, &families, p.trials, tol, seed)?))?;
    report.check(Check::below("free_independence", free.max_residual, tol, true));
    report.check(Check::info("sampled_words", free.sampled as f64));
    if free.skipped_inexact > 0 {
        report.warnings.push(format!("{} sampled words left the exact regime", free.skipped_inexact));
    }
    let mut residuals = Series::new(&["trial", "word", "residual", "exact"]);
    for r in &free.residuals {
        residuals.push(vec![r.trial.into(), r.word.to_string().into(), r.residual.into(), r.exact.into()]);
    }
    report.series.insert("residuals".into(), residuals);
    free.residuals.clear();
    report.detail("check_free_independence", &free)?;

    let k = p.dims.len();
    if k >= 2 && p.max_len >= 2 && p.split_instances > 0 {
        let worst = timed(report, "split_word", || {
            let mut worst = 0.0f64;
            for _ in 0..p.split_instances {
                let outside = rng.random_range(1..=k);
                let subset: BTreeSet<Label> = (1..=k).filter(|&l| l != outside).collect();
                let inside: Vec<Label> = subset.iter().copied().collect();
                let n = rng.random_range(1..p.max_len);
                let factors = (0..n)
                    .map(|_| {
                        let l = inside[rng.random_range(0..inside.len())];
                        (l, random_matrix(rng, p.dims[l - 1], p.dims[l - 1]))
                    })
                    .collect();
                let d = p.dims[outside - 1];
                let (a, _) = center(&space, outside, &random_matrix(rng, d, d))?;
                let value = split_word_orthogonality(&space, &subset, &MomentWord::new(factors), outside, &a)?;
                worst = worst.max(value.value.norm());
            }
            Ok(worst)
        })?;
        report.check(Check::below("split_word_orthogonality", worst, tol, true));
    }
    Ok(Vec::new())
}

fn modular(p: &ModularParams, scale: f64, rng: &mut ChaCha8Rng, report: &mut RunReport) -> Result<Artifacts> {
    let tol = p.tol * scale;
    let (algebra, omega) = two_by_two_example(p.weight)?;
    let md = timed(report, "tomita", || Ok(tomita(&algebra, &omega)?))?;
    let axioms = timed(report, "axioms", || Ok(modular_axioms_check(&md, &algebra, &omega, &p.t_grid)))?;
    for (name, value) in [
        ("polar", axioms.polar),
        ("s_action", axioms.s_action),
        ("j_omega", axioms.j_omega),
        ("delta_omega", axioms.delta_omega),
        ("j_involution", axioms.j_involution),
        ("j_commutant", axioms.j_commutant),
        ("state_invariance", axioms.state_invariance),
        ("flow_invariance", axioms.flow_invariance),
        ("kms", axioms.kms),
    ] {
        report.check(Check::below(name, value, tol, true));
    }
    let r = p.weight / (1.0 - p.weight);
    let mut expected = vec![r, 1.0, 1.0, 1.0 / r];
    expected.sort_by(f64::total_cmp);
    let mut spectrum = md.delta_spectrum.clone();
    spectrum.sort_by(f64::total_cmp);
    let spectrum_err = spectrum.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.check(Check::below("delta_spectrum", spectrum_err, tol, true));
    let mut delta = Series::new(&["index", "eigenvalue"]);
    for (i, e) in spectrum.iter().enumerate() {
        delta.push(vec![i.into(), (*e).into()]);
    }
    report.series.insert("delta_spectrum".into(), delta);
    report.detail("modular_axioms_check", &axioms)?;

    if p.free_seeds > 0 {
        let free_tol = p.free_tol * scale;
        let (worst, exact) = timed(report, "free_product", || {
            let m2 = MatrixAlgebra::amplified(2, 2);
            let mut seeds = Vec::new();
            let mut data = BTreeMap::new();
            for label in 1..=p.free_seeds {
                let v = random_unit_vector(rng, 4);
                data.insert(label, tomita(&m2, &v)?);
                seeds.push(SeedSpace::new(label, v)?);
            }
            let space = FockSpace::new(seeds, p.max_len)?;
            let free = FreeModular::new(&space, data)?;
            let mut worst = 0.0f64;
            let mut exact = true;
            for _ in 0..p.words {
                let n = rng.random_range(0..=p.max_len);
                let factors: Vec<(Label, CMatrix)> =
                    (0..n).map(|_| (rng.random_range(1..=p.free_seeds), m2.random_element(rng))).collect();
                let word = MomentWord::new(factors);
                for &t in &p.t_grid {
                    let res = verify_with(&space, &free, &word, t)?;
                    worst = worst.max(res.flow).max(res.s_identity);
                    exact &= res.exact;
                }
            }
            Ok((worst, exact))
        })?;
        report.check(Check::below("free_product_modular", worst, free_tol, exact));
    }

    let shift = GammaModel::truncated_shift(p.shift_size, (p.window[0], p.window[1]))?;
    let models: BTreeMap<Label, GammaModel> = [(1, shift.clone()), (2, shift)].into();
    let table = timed(report, "gamma_decay", || Ok(gamma_decay_probe(&models, (2, 2), p.n_max)?))?;
    report.check(Check::holds("gamma_nonincreasing", table.is_nonincreasing(0.0)));
    let gap = p.window[1].saturating_sub(p.window[0] + 1);
    let beyond = table.max_by_step().iter().enumerate().filter(|(n, _)| *n > gap).map(|(_, s)| *s).fold(0.0, f64::max);
    report.check(Check::holds("gamma_zero_beyond_gap", beyond == 0.0));
    if table.truncated {
        report
            .warnings
            .push(format!("decay table truncated at n = {} (requested {})", table.n_evaluated, table.n_requested));
    }
    let mut decay = Series::new(&["n", "word", "sup_entry"]);
    for row in &table.rows {
        decay.push(vec![row.n.into(), row.word.to_string().into(), row.sup_entry.into()]);
    }
    report.series.insert("gamma_decay".into(), decay);
    Ok(vec![("modular.json".into(), to_json(&md.summary())?)])
}

fn load_seed(seed: &crate::config::SeedSpectrum, base: &Path) -> Result<SpectrumModel> {
    match (&seed.geometric, &seed.csv) {
        (Some(n), _) => Ok(SpectrumModel::geometric(seed.label, *n)),
        (None, Some(file)) => {
            let path = base.join(file);
            let f = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
            Ok(SpectrumModel::from_csv(seed.label, f)?)
        }
        (None, None) => Err(CliError::Config(format!("experiment.seeds: seed {} has no spectrum", seed.label))),
    }
}

fn bound_cell(b: Bound) -> Cell {
    match b {
        Bound::Finite(v) => v.into(),
        Bound::Divergent => Cell::Text("divergent".into()),
    }
}

fn spectral(p: &SpectralParams, base: &Path, report: &mut RunReport) -> Result<Artifacts> {
    let seeds: BTreeMap<Label, SpectrumModel> =
        p.seeds.iter().map(|s| load_seed(s, base).map(|m| (s.label, m))).collect::<Result<_>>()?;
    if seeds.len() != p.seeds.len() {
        return Err(CliError::Config("experiment.seeds: duplicate label".into()));
    }
    let reports = timed(report, "trace", || {
        (1..=p.max_len).map(|n| Ok(verify_trace_bound(&seeds, p.s, n, p.cutoff)?)).collect::<Result<Vec<_>>>()
    })?;
    let last = reports.last().ok_or_else(|| CliError::Config("experiment.max_len: must be at least 1".into()))?;
    let mut trace = Series::new(&["max_len", "truncated_trace", "bound"]);
    for r in &reports {
        trace.push(vec![r.max_len.into(), r.truncated_trace.into(), bound_cell(r.closed_form_bound)]);
    }
    report.series.insert("trace".into(), trace);
    let monotone = reports.windows(2).all(|w| w[1].truncated_trace >= w[0].truncated_trace);
    report.check(Check::holds("trace_monotone", monotone));
    report.check(Check::info("truncated_trace", last.truncated_trace));
    match last.closed_form_bound {
        Bound::Finite(b) => {
            report.check(Check::info("closed_form_bound", b));
            report.check(Check::holds("bound_holds", reports.iter().all(|r| r.bound_holds == Some(true))));
        }
        Bound::Divergent => {
            report.conclusive = false;
            report
                .warnings
                .push(format!("s = {} is below the split distance: the bound diverges, run is not conclusive", p.s));
        }
    }
    if seeds.len() >= 2 {
        let mut worst: Option<f64> = None;
        for m in seeds.values() {
            match split_distance(m, seeds.len(), p.split_tol) {
                Ok(d) => worst = Some(worst.map_or(d, |w: f64| w.max(d))),
                Err(e) => report.warnings.push(format!("split distance of seed {}: {e}", m.label())),
            }
        }
        if let Some(d) = worst {
            report.check(Check::info("split_distance", d));
        }
    }
    if !p.s_grid.is_empty() {
        let mut series = Series::new(&["s", "epsilon", "bound"]);
        for &s in &p.s_grid {
            let eps: BTreeMap<Label, f64> = seeds.iter().map(|(l, m)| (*l, m.reduced_trace(s))).collect();
            let max_eps = eps.values().copied().fold(0.0, f64::max);
            series.push(vec![s.into(), max_eps.into(), bound_cell(distal_bound(&eps, seeds.len())?)]);
        }
        report.series.insert("bound_vs_s".into(), series);
    }
    report.detail("verify_trace_bound", last)?;
    Ok(vec![("trace_report.json".into(), to_json(last)?)])
}

fn smatrix(p: &SmatrixParams, scale: f64, report: &mut RunReport) -> Result<Artifacts> {
    let tol = p.tol * scale;
    let f = WavePacket2D::with_velocity(p.mass, p.velocity_f, p.center_f, p.width)?;
    let g = WavePacket2D::with_velocity(p.mass, p.velocity_g, p.center_g, p.width)?;
    let ordered = precedes(&g, &f)?;
    report.check(Check::holds("precedence", ordered));
    if !ordered {
        return Ok(Vec::new());
    }
    let coarse = RapidityGrid::new(p.grid_min, p.grid_max, p.coarse_points)?;
    let fine = RapidityGrid::new(p.grid_min, p.grid_max, p.points)?;

    let residual = timed(report, "field_action", || {
        let copies = FieldCopies::new(coarse, (1, 2))?;
        let mut worst = 0.0f64;
        for dir in [Direction::Out, Direction::In] {
            let direct = copies.scattering_vector(dir, 1, 2, &f, &g)?;
            let closed = scattering_state(dir, 1, 2, &f, &g, coarse)?.to_fock_vector(&copies.fock)?;
            worst = worst.max((direct - closed).norm());
        }
        Ok(worst)
    })?;
    report.check(Check::below("field_residual", residual, tol, true));

    let out = scattering_state(Direction::Out, 1, 2, &f, &g, coarse)?;
    let inn = scattering_state(Direction::In, 1, 2, &f, &g, coarse)?;
    report.check(Check::holds("in_out_orthogonal", out.inner(&inn) == C64::new(0.0, 0.0)));
    let diag = scattering_state(Direction::Out, 1, 1, &f, &g, coarse)?;
    report.check(Check::holds("diagonal_identity", smatrix_apply(&diag)? == diag));
    let flipped = smatrix_apply(&out)?;
    report.check(Check::below("flip_norm", (flipped.norm() - out.norm()).abs(), tol, true));
    let fraction = timed(report, "support", || Ok(support_condition_check(&f, &g, fine)?))?;
    report.check(Check::below("support_fraction", fraction, p.support_tol, true));

    let mut amplitude = Series::new(&["theta1", "theta2", "re", "im"]);
    for i in 0..coarse.points {
        for j in 0..coarse.points {
            let z = out.amplitude[(i, j)];
            amplitude.push(vec![coarse.theta(i).into(), coarse.theta(j).into(), z.re.into(), z.im.into()]);
        }
    }
    report.series.insert("amplitude".into(), amplitude);
    Ok(Vec::new())
}
