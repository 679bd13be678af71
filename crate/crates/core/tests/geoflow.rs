use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pseudogeo::catalog;
use pseudogeo::degeneracy::{cubic_m, Chart};
use pseudogeo::families::direction_reversals;
use pseudogeo::geoflow::{
    clairaut_integral, divergence_w_residual, field_v, singular_spectrum, EventKind, Sample,
};
use pseudogeo::metric::Bbox;
use pseudogeo::suites::oracle_window;
use pseudogeo::{
    integrate_geodesic, integrate_natural, parse_metric, CausalType, GeodesicCurve, IntegratorOptions, ProjectiveDirection,
    ProjectiveJet, Termination,
};

#[test]
fn unit_delta_velocity() {
    // Δ = 1 at the origin, p = 0 → V = (2, 0, M(0))
    let m = parse_metric("a=1+x^2; b=x*y; c=1+y").unwrap();
    let v = field_v(&m, &ProjectiveJet::with_slope(0.0, 0.0, 0.0), 1.0).unwrap();
    let mu0 = cubic_m(&m, 0.0, 0.0).unwrap().mu[0];
    assert_eq!(v.chart, Chart::P);
    assert!((v.v[0] - 2.0).abs() < 1e-15 && v.v[1].abs() < 1e-15 && (v.v[2] - mu0).abs() < 1e-15);
}

#[test]
fn ex1_spectrum_in_swapped_chart() {
    let m = catalog::ex1();
    let j = ProjectiveJet::new(0.0, 0.0, ProjectiveDirection::pbar(0.0));
    let sp = singular_spectrum(&m, &j, 1e-12).unwrap();
    let mut mods: Vec<f64> = sp.lambda.iter().map(|l| l.norm()).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!((mods[0] - 2.0).abs() < 1e-12 && (mods[1] - 1.0).abs() < 1e-12 && mods[2] < 1e-12);
    assert!(sp.lambda.iter().all(|l| l.im.abs() < 1e-12));
    // off the singular set the spectrum is refused
    assert!(singular_spectrum(&m, &ProjectiveJet::with_slope(0.1, 0.2, 0.3), 1e-12).is_err());
}

#[test]
fn flat_lorentz_null_line_is_isotropic() {
    let m = parse_metric("a=1; b=0; c=-1").unwrap();
    let c = integrate_geodesic(&m, &ProjectiveJet::with_slope(0.0, 0.0, 1.0), 1.0, &IntegratorOptions::default()).unwrap();
    assert_eq!(c.causal_type, CausalType::Isotropic);
    for s in &c.samples {
        assert!((s.x - s.y).abs() < 1e-12);
    }
    let c = integrate_geodesic(&m, &ProjectiveJet::with_slope(0.0, 0.0, 0.3), 1.0, &IntegratorOptions::default()).unwrap();
    assert_eq!(c.causal_type, CausalType::Spacelike);
    let c = integrate_geodesic(&m, &ProjectiveJet::with_slope(0.0, 0.0, 3.0), 1.0, &IntegratorOptions::default()).unwrap();
    assert_eq!(c.causal_type, CausalType::Timelike);
}

#[test]
fn clairaut_values_and_types() {
    let iso = ProjectiveJet::with_slope(1.0, 0.25, 0.5);
    assert!(clairaut_integral(&iso).unwrap().abs() < 1e-15);
    assert_eq!(clairaut_integral(&ProjectiveJet::with_slope(0.4, 1.0, 0.0)).unwrap(), 1.0);
    assert!(clairaut_integral(&ProjectiveJet::with_slope(0.4, 0.0, 0.0)).is_err());

    let m = catalog::clairaut();
    let opts = IntegratorOptions::default();
    // p² = y − α y² at y = 0.3
    for (alpha, want) in [(2.0, CausalType::Timelike), (-1.5, CausalType::Spacelike)] {
        let y0: f64 = 0.3;
        let p = (y0 - alpha * y0 * y0).sqrt();
        let j = ProjectiveJet::with_slope(0.0, y0, p);
        let c = integrate_geodesic(&m, &j, 0.5, &opts).unwrap();
        assert_eq!(c.causal_type, want, "α = {}", alpha);
        for s in &c.samples {
            if let Ok(a) = clairaut_integral(&s.jet()) {
                assert!((a - alpha).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn ex1_alpha_zero_member_is_vertical() {
    let m = catalog::ex1();
    let j = ProjectiveJet::new(0.0, 1e-6, ProjectiveDirection::infinity());
    let mut top = 0.0f64;
    for span in [10.0, -10.0] {
        let c = integrate_geodesic(&m, &j, span, &IntegratorOptions::default()).unwrap();
        assert!(c.samples.iter().all(|s| s.x.abs() < 1e-14));
        top = top.max(c.last().y);
    }
    assert!(top > 0.1);
}

#[test]
fn traces_stay_on_one_side_of_s0() {
    // (ẋ, ẏ) = 2Δ(1, p): S0 is reached only at singular points
    let m = catalog::ex1();
    let mut opts = IntegratorOptions::default();
    opts.bbox = Some(Bbox::new(-1.0, 1.0, -1.0, 1.0).unwrap());
    for (x, y, p) in [(0.2, 0.3, 2.0), (-0.4, -0.2, 0.5), (0.1, 0.05, -8.0), (0.0, -0.6, 0.0)] {
        let j = ProjectiveJet::with_slope(x, y, p);
        for span in [10.0, -10.0] {
            let c = integrate_geodesic(&m, &j, span, &opts).unwrap();
            assert!(c.samples.iter().all(|s| s.delta * (-y) >= 0.0), "start ({}, {}, {})", x, y, p);
            assert!(c.events.iter().all(|e| e.kind != EventKind::DeltaSignChange));
        }
    }
}

#[test]
fn leaving_the_box_stops() {
    let m = parse_metric("a=1; b=0; c=1").unwrap();
    let mut opts = IntegratorOptions::default();
    opts.bbox = Some(Bbox::new(-1.0, 1.0, -1.0, 1.0).unwrap());
    let c = integrate_geodesic(&m, &ProjectiveJet::with_slope(0.0, 0.0, 0.5), 100.0, &opts).unwrap();
    assert_eq!(c.termination, Termination::LeftBbox);
    let last = c.last();
    assert!(last.x.abs() <= 1.0 + 1e-9 && last.y.abs() <= 1.0 + 1e-9);
}

#[test]
fn natural_and_projective_agree() {
    let opts = IntegratorOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in [catalog::ex1exp(), catalog::dd(-1.0), catalog::mink_sphere()] {
        let d = oracle_window(&m, &mut rng, &opts).unwrap();
        assert!(d < 1e-6, "{}: {:e}", m.name, d);
    }
}

#[test]
fn natural_energy_is_conserved() {
    let m = catalog::ex1exp();
    let nat = integrate_natural(&m, [0.1, -0.3], [1.0, 0.4], 0.3, &IntegratorOptions::default()).unwrap();
    let e0 = nat.samples[0].energy;
    assert!(nat.samples.iter().all(|s| (s.energy - e0).abs() < 1e-8 * e0.abs().max(1.0)));
}

#[test]
fn flat_divergence_is_zero() {
    let m = parse_metric("a=1; b=0.2; c=2").unwrap();
    for p in [-0.7, 0.0, 0.4, 3.0] {
        let r = divergence_w_residual(&m, &ProjectiveJet::with_slope(0.1, -0.2, p), 1e-4).unwrap();
        assert!(r.abs() < 1e-6, "p = {}: {}", p, r);
    }
}

#[test]
fn integration_is_deterministic() {
    let m = catalog::dd(-1.0);
    let j = ProjectiveJet::with_slope(0.3, 0.1, 0.2);
    let a = integrate_geodesic(&m, &j, 2.0, &IntegratorOptions::default()).unwrap();
    let b = integrate_geodesic(&m, &j, 2.0, &IntegratorOptions::default()).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (s, t) in a.samples.iter().zip(&b.samples) {
        assert_eq!((s.x.to_bits(), s.y.to_bits()), (t.x.to_bits(), t.y.to_bits()));
    }
}

fn synthetic(angles: &[f64]) -> GeodesicCurve {
    let samples = angles
        .iter()
        .enumerate()
        .map(|(i, th)| Sample {
            t: i as f64,
            x: i as f64,
            y: 0.0,
            dir: ProjectiveDirection::from_vector(th.cos(), th.sin()),
            f: 1.0,
            delta: 1.0,
        })
        .collect();
    GeodesicCurve { samples, causal_type: CausalType::Spacelike, termination: Termination::SpanExhausted, events: vec![], steps: 0 }
}

#[test]
fn reversals_of_turning_direction() {
    let straight = synthetic(&[0.3; 10]);
    assert_eq!(direction_reversals(&straight), 0);
    let monotone: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
    assert_eq!(direction_reversals(&synthetic(&monotone)), 0);
    let wobble: Vec<f64> = (0..60).map(|i| 0.4 * (0.3 * i as f64).sin()).collect();
    assert!(direction_reversals(&synthetic(&wobble)) >= 4);
}
