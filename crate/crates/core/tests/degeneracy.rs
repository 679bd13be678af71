use pseudogeo::catalog;
use pseudogeo::degeneracy::{
    admissible_directions, cubic_m, delta, find_s0_point, isotropic_direction, scan_s0, tangency_test, Chart,
};
use pseudogeo::{classify, parse_metric, Case, ProjectiveDirection, Tolerances};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn delta_examples() {
    let (d, g) = delta(&catalog::ex1(), 0.0, 0.0).unwrap();
    assert_eq!(d, 0.0);
    assert_eq!(g, [0.0, -1.0]);
    for eps in [-1.0, 0.25] {
        let m = catalog::dd(eps);
        for (x, y) in [(0.3, 0.1), (-0.7, 0.4)] {
            assert!(close(delta(&m, x, y).unwrap().0, eps * x * x - y, 1e-15));
        }
    }
    let flat = parse_metric("a=1; b=0; c=1").unwrap();
    assert_eq!(delta(&flat, 0.4, -0.9).unwrap().0, 1.0);
}

#[test]
fn newton_onto_s0() {
    let q = find_s0_point(&catalog::ex1(), [0.3, 0.2]).unwrap();
    assert!(close(q[0], 0.3, 1e-12) && q[1].abs() < 1e-12);
    let q = find_s0_point(&catalog::dd(-1.0), [0.5, 0.0]).unwrap();
    assert!(close(q[0], 0.5, 1e-12) && close(q[1], -0.25, 1e-12));
    let q = find_s0_point(&catalog::mink_sphere(), [0.7, 0.3]).unwrap();
    assert!(close(q[0], std::f64::consts::FRAC_PI_4, 1e-12));
}

#[test]
fn isotropic_directions() {
    let p0 = isotropic_direction(&catalog::ex1(), [0.0, 0.0]).unwrap();
    assert_eq!(p0.chart, Chart::PBAR);
    assert_eq!(p0.value, 0.0);
    for eps in [-1.0, 1.0 / 32.0, 1.0 / 8.0] {
        let p0 = isotropic_direction(&catalog::dd(eps), [0.0, 0.0]).unwrap();
        assert!(p0.distance(&ProjectiveDirection::p(0.0)) < 1e-15);
    }
    // along the meridian: dφ/dθ = 0
    let p0 = isotropic_direction(&catalog::mink_sphere(), [std::f64::consts::FRAC_PI_4, 1.0]).unwrap();
    assert!(p0.distance(&ProjectiveDirection::p(0.0)) < 1e-12);
}

#[test]
fn cubic_examples() {
    for x in [-0.8, 0.0, 0.35] {
        assert_eq!(cubic_m(&catalog::ex1(), x, 0.0).unwrap().mu, [0.0, 0.0, 1.0, 0.0]);
    }
    let m = cubic_m(&catalog::ex1(), 0.0, 0.0).unwrap();
    for pb in [-1.5, 0.3, 2.0] {
        assert_eq!(m.eval(&ProjectiveDirection::pbar(pb)), -pb);
    }
    assert_eq!(cubic_m(&catalog::dd(0.7), 0.0, 0.0).unwrap().mu, [0.0, 0.0, -2.0, 0.0]);
}

#[test]
fn admissible_root_lists() {
    let tol = Tolerances::default();
    let roots = admissible_directions(&catalog::ex1(), [0.0, 0.0], &tol).unwrap();
    assert_eq!(roots.len(), 2);
    let iso = roots.iter().find(|r| r.is_isotropic).unwrap();
    assert_eq!(iso.multiplicity, 1);
    assert!(iso.dir.distance(&ProjectiveDirection::infinity()) < 1e-12);
    let p1 = roots.iter().find(|r| !r.is_isotropic).unwrap();
    assert_eq!(p1.multiplicity, 2);
    assert!(p1.dir.distance(&ProjectiveDirection::p(0.0)) < 1e-12);

    let roots = admissible_directions(&catalog::c1c3(0.5), [0.0, 0.0], &tol).unwrap();
    assert_eq!(roots.len(), 3);
    assert!(roots.iter().all(|r| r.multiplicity == 1));

    let roots = admissible_directions(&catalog::dd(-1.0), [0.0, 0.0], &tol).unwrap();
    let iso = roots.iter().find(|r| r.is_isotropic).unwrap();
    assert_eq!(iso.multiplicity, 2);
    assert!(roots.iter().any(|r| !r.is_isotropic && r.multiplicity == 1 && r.dir.distance(&ProjectiveDirection::infinity()) < 1e-12));
}

#[test]
fn tangency() {
    let tol = Tolerances::default();
    assert!(!tangency_test(&catalog::ex1(), [0.0, 0.0], &tol).unwrap());
    assert!(tangency_test(&catalog::dd(-1.0), [0.0, 0.0], &tol).unwrap());
    assert!(!tangency_test(&catalog::mink_sphere(), [std::f64::consts::FRAC_PI_4, 0.0], &tol).unwrap());
}

#[test]
fn dd_thresholds() {
    let tol = Tolerances::default();
    let cases = [(-1.0, Case::Ds), (-0.01, Case::Ds), (0.01, Case::Dn), (1.0 / 32.0, Case::Dn), (0.07, Case::Df), (1.0 / 8.0, Case::Df)];
    for (eps, want) in cases {
        let rep = classify(&catalog::dd(eps), [0.0, 0.0], &tol).unwrap();
        assert_eq!(rep.case, want, "ε = {}", eps);
        assert_eq!(rep.p0_multiplicity(), 2);
        assert!(rep.tangent);
    }
}

#[test]
fn c_cases_away_from_origin() {
    let tol = Tolerances::default();
    let m = catalog::c1c3(0.5);
    for x in [-0.6, -0.2, 0.4, 0.8] {
        let rep = classify(&m, [x, 0.0], &tol).unwrap();
        assert!(rep.case.is_c());
        assert!(!rep.tangent);
    }
}

#[test]
fn off_s0_is_an_error() {
    let tol = Tolerances::default();
    assert!(classify(&catalog::ex1(), [0.0, 0.3], &tol).is_err());
}

#[test]
fn ex1_scan_is_c2_throughout() {
    let tol = Tolerances::default();
    let pts = scan_s0(&catalog::ex1(), 0.05, &tol).unwrap();
    assert!(pts.len() > 10);
    for p in &pts {
        assert_eq!(p.case, Some(Case::C2));
        assert!(p.q[1].abs() < 1e-12);
    }
    assert!(scan_s0(&parse_metric("a=1; b=0; c=1").unwrap(), 0.05, &tol).is_err());
}
