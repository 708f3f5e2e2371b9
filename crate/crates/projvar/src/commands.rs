//! Command implementations behind the CLI: each one runs a pipeline stage on
//! a scene and emits a report fragment with pass/fail checks.

use std::collections::BTreeMap;

use crate::config::{cmat_to_json, cvec_to_json, SceneConfig, SceneFile};
use crate::epipolar::{epipoles, fundamental, rank_profile, reduced_fundamental};
use crate::error::{ProjvarError, Result};
use crate::exterior::{hodge_matrix, span_to_extensor};
use crate::kruppa::{
    classical_kruppa_residual, isolation_test, kruppa_coefficients, kruppa_residual, kruppa_solve,
    KruppaSystem, SolverStatus,
};
use crate::numeric::{child_rng, proj_distance_mat, random_cmat, random_cvec, CVec, C};
use crate::recovery::{align_pair, canonical_pair, pairs_equivalent, pgl_act};
use crate::report::{
    CensusJson, CheckLine, EpipoleReport, FundamentalReport, IsolationJson, KruppaReport,
    RecoveryReport, SceneReport, SolverReport, SolverTrialJson,
};
use crate::scene::Scene;

/// Generate a scene from a configuration.
pub fn cmd_generate(config: &SceneConfig) -> Result<SceneFile> {
    let scene = config.build_scene()?;
    Ok(SceneFile::from_scene(&scene, config))
}

/// Fundamental matrix of one order with rank profile and a correspondence
/// probe on a seeded subspace pair.
pub fn cmd_fundamental(
    scene: &Scene,
    k: usize,
    tolerances: &BTreeMap<String, f64>,
) -> Result<SceneReport> {
    let m = scene.m;
    let mut report = SceneReport::new(m, scene.seed);
    let eps = epipoles(&scene.pair.first, &scene.pair.second)?;
    report.epipoles = Some(EpipoleReport {
        e1: cvec_to_json(&eps.e1),
        e2: cvec_to_json(&eps.e2),
    });
    let f = fundamental(&scene.pair.first, &scene.pair.second, k)?;
    let profile = rank_profile(&f);

    // Correspondence probe: a seeded (m-1-k)-plane projected into both views.
    let mut rng = child_rng(scene.seed, "fundamental_probe");
    let pts: Vec<CVec> = (0..m - k).map(|_| random_cvec(&mut rng, m + 1)).collect();
    let w1 = span_to_extensor(
        &pts.iter()
            .map(|q| scene.pair.first.apply(q))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let w2 = span_to_extensor(
        &pts.iter()
            .map(|q| scene.pair.second.apply(q))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let check = crate::epipolar::correspondence_residual(&f, &w1, &w2, &eps.e2)?;

    report.fundamental.push(FundamentalReport {
        k,
        rows: f.entries.nrows(),
        cols: f.entries.ncols(),
        rank_observed: profile.observed,
        rank_expected: profile.expected,
        singular_values: profile.singular_values.clone(),
        correspondence_residual: check.residual,
        entries: cmat_to_json(&f.entries),
    });
    report.push_check(CheckLine::equals(
        "fundamental_rank",
        profile.observed as i64,
        profile.expected as i64,
    ));
    report.push_check(CheckLine::at_most(
        "correspondence_residual",
        check.residual,
        tolerances["correspondence"],
    ));
    if k == m - 1 {
        let closed = reduced_fundamental(&scene.pair.first, &scene.pair.second)?;
        let distance = proj_distance_mat(&closed.entries, &f.entries);
        report.push_check(CheckLine::at_most(
            "reduced_agreement",
            distance,
            tolerances["conversion"],
        ));
    }
    Ok(report)
}

/// Kruppa residuals at the stored ground truth.
pub fn cmd_kruppa_check(
    scene: &Scene,
    tolerances: &BTreeMap<String, f64>,
) -> Result<SceneReport> {
    let m = scene.m;
    let mut report = SceneReport::new(m, scene.seed);
    let system = KruppaSystem::build(scene, scene.seed ^ 0x6b72)?;
    let f = fundamental(&scene.pair.first, &scene.pair.second, 2)?;
    let residual = kruppa_residual(&f.entries, &scene.epipoles.e1, &system)?;
    let mut counts = Vec::new();
    for (phi1, phi2) in &system.pairs {
        let (a, _) = kruppa_coefficients(&f.entries, &scene.epipoles.e1, phi1, phi2, &system)?;
        counts.push(a.len());
    }
    let classical = if m == 3 {
        let duals = scene.dual_pairs();
        if let Some((c1, c2)) = duals.first() {
            let f_classical = hodge_matrix(3, 2)? * &f.entries;
            Some(classical_kruppa_residual(
                &f_classical,
                &scene.epipoles.e2,
                c1,
                c2,
            )?)
        } else {
            None
        }
    } else {
        None
    };
    report.kruppa = Some(KruppaReport {
        residual,
        coefficient_counts: counts,
        classical_residual: classical,
    });
    report.push_check(CheckLine::at_most(
        "kruppa_residual",
        residual,
        tolerances["kruppa"],
    ));
    if let Some(classical) = classical {
        report.push_check(CheckLine::at_most(
            "classical_kruppa_residual",
            classical,
            tolerances["classical_kruppa"],
        ));
    }
    let dim = crate::kruppa::dimension_report(m, scene.total_class().max(1))?;
    report.dimension = Some((&dim).into());
    Ok(report)
}

/// Dimension diagnostics without a scene.
pub fn cmd_diagnose(m: usize, c_total: usize) -> Result<SceneReport> {
    let mut report = SceneReport::new(m, 0);
    let dim = crate::kruppa::dimension_report(m, c_total)?;
    report.dimension = Some((&dim).into());
    Ok(report)
}

/// Solver trials from perturbed ground truth, plus the isolation test.
pub fn cmd_kruppa_solve(
    scene: &Scene,
    tolerances: &BTreeMap<String, f64>,
    solver: &crate::config::SolverConfig,
) -> Result<SceneReport> {
    let m = scene.m;
    let mut report = SceneReport::new(m, scene.seed);
    let system = KruppaSystem::build(scene, scene.seed ^ 0x6b72)?;
    let truth_f = fundamental(&scene.pair.first, &scene.pair.second, 2)?;
    let e1 = &scene.epipoles.e1;
    let e2 = &scene.epipoles.e2;

    let isolation = isolation_test(e1, &truth_f.entries, e2, &system)?;
    report.isolation = Some(IsolationJson {
        smallest: isolation.smallest,
        largest: isolation.largest,
        isolated: isolation.isolated,
        tangent_dimension: isolation.tangent_dimension,
    });

    let options = solver.to_options();
    let mut trials = Vec::with_capacity(solver.trials);
    let mut successes = 0usize;
    for trial in 0..solver.trials {
        let mut rng = child_rng(scene.seed ^ 0x74726c, &format!("trial{trial}"));
        let noise = solver.noise;
        let e1_init = e1 + random_cvec(&mut rng, m) * C::new(noise * e1.norm(), 0.0);
        let f_init = &truth_f.entries
            + random_cmat(&mut rng, truth_f.entries.nrows(), truth_f.entries.ncols())
                * C::new(noise * truth_f.entries.norm(), 0.0);
        let e2_init = e2 + random_cvec(&mut rng, m) * C::new(noise * e2.norm(), 0.0);
        let solution = kruppa_solve((&e1_init, &f_init, &e2_init), &system, &options)?;
        let distance = proj_distance_mat(&solution.f, &truth_f.entries);
        let success = distance < tolerances["recover_distance"]
            && solution.record.status == SolverStatus::Converged
            && solution.valid;
        if success {
            successes += 1;
        }
        trials.push(SolverTrialJson {
            trial,
            status: format!("{:?}", solution.record.status),
            iterations: solution.record.residuals.len().saturating_sub(1),
            final_residual: solution.record.final_residual,
            distance_to_truth: distance,
            valid: solution.valid,
        });
    }
    let fraction = successes as f64 / solver.trials.max(1) as f64;
    report.solver = Some(SolverReport {
        trials,
        success_fraction: fraction,
        noise: solver.noise,
        isolated_at_truth: isolation.isolated,
    });
    report.push_check(CheckLine::at_least("solver_success_fraction", fraction, 0.9));
    Ok(report)
}

/// Canonical-pair recovery checks on the scene's projection pair.
pub fn cmd_recover(scene: &Scene, tolerances: &BTreeMap<String, f64>) -> Result<SceneReport> {
    let m = scene.m;
    let mut report = SceneReport::new(m, scene.seed);
    let f = reduced_fundamental(&scene.pair.first, &scene.pair.second)?;
    let canonical = canonical_pair(&f)?;
    let rebuilt = canonical.pair()?;
    let f_round = reduced_fundamental(&rebuilt.first, &rebuilt.second)?;
    let roundtrip = proj_distance_mat(&f_round.entries, &f.entries);
    let aligned = align_pair(&scene.pair)?;

    // Orbit probe: a seeded group element.
    let mut rng = child_rng(scene.seed, "recover_probe");
    let a = loop {
        let a = random_cmat(&mut rng, m + 1, m + 1);
        if a.clone().try_inverse().is_some() && crate::numeric::cond(&a) < 1e4 {
            break a;
        }
    };
    let acted = pgl_act(&a, &scene.pair)?;
    let equivalent = pairs_equivalent(&scene.pair, &acted, tolerances["roundtrip"])?;

    report.recovery = Some(RecoveryReport {
        roundtrip_distance: roundtrip,
        eq1_residual: aligned.eq1_residual,
        eq2_residual: aligned.eq2_residual,
        orbit_equivalent: equivalent,
        canonical_h: cmat_to_json(&canonical.h),
        canonical_e2: cvec_to_json(&canonical.e2),
        h_rank: crate::numeric::rank(&canonical.h),
    });
    report.push_check(CheckLine::at_most(
        "canonical_roundtrip",
        roundtrip,
        tolerances["roundtrip"],
    ));
    report.push_check(CheckLine::at_most(
        "align_eq1",
        aligned.eq1_residual,
        tolerances["align"],
    ));
    report.push_check(CheckLine::at_most(
        "align_eq2",
        aligned.eq2_residual,
        tolerances["align"],
    ));
    report.push_check(CheckLine::at_least(
        "orbit_equivalence",
        if equivalent { 1.0 } else { 0.0 },
        1.0,
    ));
    Ok(report)
}

/// Canonical pair from a stored fundamental matrix alone.
pub fn cmd_recover_from_matrix(
    m: usize,
    entries: &crate::numeric::CMat,
    tolerances: &BTreeMap<String, f64>,
) -> Result<SceneReport> {
    let f = crate::epipolar::FundamentalMatrix::new(m, m - 1, entries.clone())?;
    let mut report = SceneReport::new(m, 0);
    let canonical = canonical_pair(&f)?;
    let rebuilt = canonical.pair()?;
    let f_round = reduced_fundamental(&rebuilt.first, &rebuilt.second)?;
    let roundtrip = proj_distance_mat(&f_round.entries, &f.entries);
    report.recovery = Some(RecoveryReport {
        roundtrip_distance: roundtrip,
        eq1_residual: 0.0,
        eq2_residual: 0.0,
        orbit_equivalent: true,
        canonical_h: cmat_to_json(&canonical.h),
        canonical_e2: cvec_to_json(&canonical.e2),
        h_rank: crate::numeric::rank(&canonical.h),
    });
    report.push_check(CheckLine::at_most(
        "canonical_roundtrip",
        roundtrip,
        tolerances["roundtrip"],
    ));
    Ok(report)
}

/// Fiber census over the first component.
pub fn cmd_reconstruct(
    scene: &Scene,
    fibers: usize,
    tolerances: &BTreeMap<String, f64>,
) -> Result<SceneReport> {
    let mut report = SceneReport::new(scene.m, scene.seed);
    let census = crate::reconstruction::component_census(scene, 0, fibers, scene.seed ^ 0x666)?;
    report.reconstruction = Some(CensusJson {
        fibers_requested: census.fibers_requested,
        clean: census.clean,
        discarded: census.discarded,
        modal_true: census.modal_counts.0,
        modal_ghost: census.modal_counts.1,
        expected_true: census.expected_counts.0,
        expected_ghost: census.expected_counts.1,
        fraction_modal: census.fraction_modal,
        degree_two_ambiguity: census.degree_two_ambiguity,
        refit_distance: census.refit_distance,
    });
    report.push_check(CheckLine::equals(
        "census_modal_true",
        census.modal_counts.0 as i64,
        census.expected_counts.0 as i64,
    ));
    report.push_check(CheckLine::equals(
        "census_modal_ghost",
        census.modal_counts.1 as i64,
        census.expected_counts.1 as i64,
    ));
    report.push_check(CheckLine::at_least(
        "census_fraction_modal",
        census.fraction_modal,
        tolerances["census_fraction"],
    ));
    if let Some(refit) = census.refit_distance {
        report.push_check(CheckLine::at_most("census_refit", refit, tolerances["refit"]));
    }
    Ok(report)
}

/// Convenience wrapper: scene from a parsed scene file.
pub fn scene_from_file(file: &SceneFile) -> Result<Scene> {
    file.to_scene()
}

/// Kernel characterization checks used by the CLI and the acceptance suite:
/// ker(F2) equals the image of the wedge-by-e1 map.
pub fn kernel_characterization(scene: &Scene) -> Result<(f64, usize, usize)> {
    let m = scene.m;
    let f = fundamental(&scene.pair.first, &scene.pair.second, 2)?;
    let kernel = crate::numeric::right_nullspace(&f.entries, 1e-8);
    let map = crate::epipolar::e1_wedge_matrix(&scene.epipoles.e1, m)?;
    let image: Vec<CVec> = (0..map.entries.ncols())
        .map(|j| map.entries.column(j).into_owned())
        .collect();
    let distance = crate::numeric::subspace_distance(&kernel, &image);
    Ok((distance, kernel.len(), image.len()))
}

/// Check that a multivector is zero to the given tolerance; shared helper for
/// epipole annihilation diagnostics.
pub fn epipole_annihilation(scene: &Scene) -> Result<f64> {
    let f = fundamental(&scene.pair.first, &scene.pair.second, 2)?;
    let row = crate::epipolar::epipole_contraction_row(&scene.epipoles.e2)?;
    let product = &row * &f.entries;
    Ok(product.norm() / (f.entries.norm() * scene.epipoles.e2.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{default_tolerances, SceneConfig, VarietySpec};

    fn conic_config(seed: u64) -> SceneConfig {
        SceneConfig {
            m: 3,
            seed,
            varieties: vec![VarietySpec::Conic3d],
            projections: Default::default(),
            tolerances: Default::default(),
            solver: crate::config::SolverConfig {
                trials: 3,
                ..Default::default()
            },
        }
    }

    #[test]
    fn generate_and_run_fragments() {
        let config = conic_config(11);
        let file = cmd_generate(&config).unwrap();
        let scene = file.to_scene().unwrap();
        let tol = default_tolerances();

        let fr = cmd_fundamental(&scene, 2, &tol).unwrap();
        assert!(fr.overall_pass, "checks: {:?}", fr.checks);
        assert_eq!(fr.fundamental[0].rank_observed, 2);

        let kr = cmd_kruppa_check(&scene, &tol).unwrap();
        assert!(kr.overall_pass, "checks: {:?}", kr.checks);
        assert_eq!(kr.kruppa.as_ref().unwrap().coefficient_counts, vec![3]);
        assert!(kr.kruppa.as_ref().unwrap().classical_residual.unwrap() < 1e-10);

        let rr = cmd_recover(&scene, &tol).unwrap();
        assert!(rr.overall_pass, "checks: {:?}", rr.checks);

        let dr = cmd_diagnose(3, 10).unwrap();
        let dim = dr.dimension.unwrap();
        assert_eq!(dim.lower_bound, -3);
        assert!(dim.threshold_met);
        assert!(dr.overall_pass);
    }

    #[test]
    fn reconstruct_command_counts() {
        let config = conic_config(13);
        let file = cmd_generate(&config).unwrap();
        let scene = file.to_scene().unwrap();
        let tol = default_tolerances();
        let report = cmd_reconstruct(&scene, 60, &tol).unwrap();
        assert!(report.overall_pass, "checks: {:?}", report.checks);
        let census = report.reconstruction.unwrap();
        assert_eq!((census.modal_true, census.modal_ghost), (2, 2));
        assert!(census.degree_two_ambiguity);
    }

    #[test]
    fn reports_serialize_deterministically() {
        let config = conic_config(17);
        let file = cmd_generate(&config).unwrap();
        let scene = file.to_scene().unwrap();
        let tol = default_tolerances();
        let a = cmd_fundamental(&scene, 2, &tol).unwrap().to_json().unwrap();
        let b = cmd_fundamental(&scene, 2, &tol).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }
}
