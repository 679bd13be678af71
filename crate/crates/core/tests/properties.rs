use proptest::prelude::*;

use pseudogeo::cubic::solve_cubic;
use pseudogeo::degeneracy::{chart_coeffs, f_unit, mu_from, Chart, CubicM};
use pseudogeo::exec::{self, Exec};
use pseudogeo::expr::{parse_expr, Expr};
use pseudogeo::metric::Coeffs;
use pseudogeo::{integrate_geodesic, parse_metric, IntegratorOptions, ProjectiveDirection, ProjectiveJet};

fn coeffs() -> impl Strategy<Value = Coeffs> {
    prop::array::uniform9(-3.0..3.0f64).prop_map(|v| Coeffs {
        a: v[0],
        b: v[1],
        c: v[2],
        a_x: v[3],
        a_y: v[4],
        b_x: v[5],
        b_y: v[6],
        c_x: v[7],
        c_y: v[8],
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(-5.0..5.0f64).prop_map(Expr::c), (0..2usize).prop_map(Expr::var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(Expr::sin),
            (inner, 0..4i32).prop_map(|(a, n)| Expr::pow(a, n)),
        ]
    })
}

proptest! {
    #[test]
    fn swapped_chart_cubic(k in coeffs(), pb in -4.0..4.0f64) {
        let mu = mu_from(&k);
        let bar = mu_from(&chart_coeffs(&k, Chart::PBAR));
        let cm = CubicM { mu, q: [0.0, 0.0] };
        let scale = mu.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (u, v) in bar.iter().zip(cm.swapped_mu()) {
            prop_assert!((u - v).abs() <= 1e-13 * scale);
        }
        let lhs = cm.eval(&ProjectiveDirection::pbar(pb));
        let rhs = -(((mu[0] * pb + mu[1]) * pb + mu[2]) * pb + mu[3]);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn chart_swap_is_an_involution(k in coeffs()) {
        let back = chart_coeffs(&chart_coeffs(&k, Chart::PBAR), Chart::PBAR);
        prop_assert_eq!(back, k);
    }

    #[test]
    fn f_is_projective(k in coeffs(), dx in -2.0..2.0f64, dy in -2.0..2.0f64, s in 0.1..10.0f64) {
        prop_assume!(dx.hypot(dy) > 1e-3);
        let a = f_unit(&k, &ProjectiveDirection::from_vector(dx, dy));
        let b = f_unit(&k, &ProjectiveDirection::from_vector(-s * dx, -s * dy));
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn direction_round_trip(th in -3.2..3.2f64) {
        let d = ProjectiveDirection::from_vector(th.cos(), th.sin());
        prop_assert!(d.is_canonical());
        let u = d.unit();
        prop_assert!((u[0] * th.sin() - u[1] * th.cos()).abs() < 1e-12);
        prop_assert!(d.flipped().distance(&d) < 1e-12);
    }

    #[test]
    fn cubic_roots_are_roots(c in prop::array::uniform4(-5.0..5.0f64)) {
        prop_assume!(c[0].abs() > 1e-3);
        for r in solve_cubic(c[0], c[1], c[2], c[3]) {
            let v = ((c[0] * r + c[1]) * r + c[2]) * r + c[3];
            let scale = c.iter().fold(1.0f64, |s, x| s.max(x.abs())) * (1.0 + r.abs()).powi(3);
            prop_assert!(v.abs() < 1e-9 * scale, "root {} gives {}", r, v);
        }
    }

    #[test]
    fn render_parses_back(e in expr(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        match (e.eval([x, y]), back.eval([x, y])) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{}: {} vs {}", text, a, b),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn map_keeps_order(v in prop::collection::vec(any::<i32>(), 0..200)) {
        let seq = exec::map(Exec::Sequential, &v, |x| x.wrapping_mul(3));
        let par = exec::map(Exec::Parallel, &v, |x| x.wrapping_mul(3));
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(seq, v.iter().map(|x| x.wrapping_mul(3)).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flat_geodesics_are_lines(x in -0.5..0.5f64, y in -0.5..0.5f64, p in -5.0..5.0f64) {
        let m = parse_metric("a=2; b=0.3; c=-1").unwrap();
        let j = ProjectiveJet::with_slope(x, y, p);
        let c = integrate_geodesic(&m, &j, 1.0, &IntegratorOptions::default()).unwrap();
        let d = j.dir.unit();
        for s in &c.samples {
            let off = (s.x - x) * d[1] - (s.y - y) * d[0];
            prop_assert!(off.abs() < 1e-9);
            prop_assert!(s.dir.distance(&j.dir) < 1e-9);
        }
    }
}
