use ddf_dmt::analytic;
use ddf_dmt::outage::*;

fn sum() -> Objective {
    Objective::sum()
}

#[test]
fn closed_forms_match_branch_lp_on_default_grid() {
    let start = std::time::Instant::now();
    let report = verify_closed_forms(&VerifyOptions::default()).unwrap();
    let worst = report
        .rows
        .iter()
        .max_by(|a, b| a.abs_err.total_cmp(&b.abs_err))
        .unwrap();
    println!(
        "{} rows, max error {:.3e} ({} at r = {}), {:?}",
        report.rows.len(),
        report.max_error(),
        worst.curve_id,
        worst.r,
        start.elapsed()
    );
    assert!(report.pass(), "worst row {worst:?}");
}

#[test]
fn mar_type1_tracks_closed_form_to_1e6() {
    for &r in &[0.05, 0.3, 0.45, 0.55, 0.6, 0.7, 0.9] {
        let res = infimum(&region_mar_type1(r).unwrap(), &sum()).unwrap();
        let d = analytic::d_type1(r).unwrap();
        assert!((res.value - d).abs() < 1e-6, "r={r}: {} vs {d}", res.value);
        assert!(res.residual <= 1e-9, "residual {}", res.residual);
    }
}

#[test]
fn cvma_sji_tracks_closed_form_to_1e6() {
    for &r in &[0.2, 1.0, 1.2, 1.5, 1.9] {
        let res = infimum(&region_cvma_sji(r).unwrap(), &sum()).unwrap();
        let d = analytic::d_superior_jointinferior(r).unwrap();
        assert!((res.value - d).abs() < 1e-6, "r1={r}: {} vs {d}", res.value);
        assert_eq!(res.work, 16);
    }
}

#[test]
fn lp_counts_per_fraction() {
    // one fraction value per region when r = 0 collapses the f-domain
    let res = infimum(&region_cvma_ji(0.8).unwrap(), &sum()).unwrap();
    assert_eq!(res.work, 8);
    let res = infimum(&region_mar_type1(0.0).unwrap(), &sum()).unwrap();
    assert_eq!(res.work, 1);
}

#[test]
fn zero_objective_gives_zero() {
    let res = infimum(&region_cvma_inferior(0.7).unwrap(), &Objective { weights: [0.0; 5] }).unwrap();
    assert_eq!(res.value, 0.0);
    assert!(res.residual <= 1e-9);
}

#[test]
fn infeasible_region_is_flagged() {
    let mut region = region_cvma_ji(1.0).unwrap();
    region.constraints.push(Constraint::le("impossible", Expr::c(1.0), Expr::c(0.0)));
    let res = infimum(&region, &sum()).unwrap();
    assert!(!res.is_feasible());
    assert!(res.value.is_infinite());
    assert!(matches!(
        res.require_feasible("x"),
        Err(ddf_dmt::Error::Infeasible(_))
    ));
}

#[test]
fn grid_oracle_agrees_with_branch_lp() {
    let cases: Vec<OutageRegionSpec> = vec![
        region_mar_type1(0.3).unwrap(),
        region_mar_type1(0.8).unwrap(),
        region_mar_type12(0.2).unwrap(),
        region_mar_type12(0.75).unwrap(),
        region_cvma_inferior(0.5).unwrap(),
        region_cvma_inferior(1.5).unwrap(),
        region_cvma_sji(0.9).unwrap(),
        region_cvma_sjs(1.3).unwrap(),
    ];
    for region in &cases {
        let (lp, grid) = cross_checked_infimum(region, &sum())
            .unwrap_or_else(|e| panic!("{} at {}: {e}", region.name, region.r));
        assert!(grid.residual <= 1e-9);
        assert!(lp.residual <= 1e-9);
    }
}

#[test]
fn exhaustive_branching_agrees_with_convexified() {
    for region in [
        region_mar_type1(0.6).unwrap(),
        region_cvma_sji(1.1).unwrap(),
        region_cvma_inferior(1.2).unwrap(),
    ] {
        let a = infimum_with(&region, &sum(), Method::BranchLp).unwrap();
        let b = infimum_with(&region, &sum(), Method::Exhaustive).unwrap();
        assert!((a.value - b.value).abs() < 1e-7, "{}: {} vs {}", region.name, a.value, b.value);
        assert!(b.work > a.work);
    }
}

#[test]
fn dropping_implied_superior_constraint_keeps_infimum() {
    for &r in &[0.3, 1.0, 1.7] {
        let a = infimum(&region_cvma_sjs(r).unwrap(), &sum()).unwrap().value;
        let b = infimum(&region_cvma_sjs_full(r).unwrap(), &sum()).unwrap().value;
        assert!((a - b).abs() < 1e-9);
        assert!((a - (4.0 - r)).abs() < 1e-6);
    }
}

#[test]
fn composite_region_dominates_its_parts() {
    for &r in &[0.4, 1.0, 1.6] {
        let sji = infimum(&region_cvma_sji(r).unwrap(), &sum()).unwrap().value;
        let ji = infimum(&region_cvma_ji(r).unwrap(), &sum()).unwrap().value;
        let s1 = infimum(&region_cvma_s1(r).unwrap(), &sum()).unwrap().value;
        assert!(sji >= ji.max(s1) - 1e-9);
    }
}

#[test]
fn region_json_survives_infimum() {
    let region = region_mar_type12(0.4).unwrap();
    let back = OutageRegionSpec::from_json(&region.to_json().unwrap()).unwrap();
    let a = infimum(&region, &sum()).unwrap().value;
    let b = infimum(&back, &sum()).unwrap().value;
    assert_eq!(a, b);
}
