use limcyc::cycles::polylines_disjoint;
use limcyc::field::{rotated_det, System, SystemDef};
use limcyc::retmap::{first_return, pprime_variational};
use limcyc::verify::translate;
use limcyc::{Family, IntegratorConfig, VectorField2};
use proptest::prelude::*;

fn quadratic() -> impl Strategy<Value = Family> {
    prop::array::uniform5(-2.0f64..2.0).prop_map(|[a, b, c, d, f]| Family::Quadratic { a, b, c, d, f })
}

fn quintic() -> impl Strategy<Value = Family> {
    prop::array::uniform3(-2.0f64..2.0).prop_map(|[a, b, c]| Family::QuinticLienard { a, b, c })
}

fn any_family() -> impl Strategy<Value = Family> {
    prop_oneof![
        quadratic(),
        quintic(),
        (-1.5f64..1.5, 0.01f64..1.0).prop_map(|(a, eps)| Family::SlowFast { a, eps }),
        prop::array::uniform4(-2.0f64..2.0).prop_map(|[a, b, c, d]| Family::QuarticLienard { a, b, c, d }),
    ]
}

fn circle(cx: f64, cy: f64, r: f64) -> Vec<(f64, f64)> {
    (0..64)
        .map(|k| {
            let t = k as f64 * std::f64::consts::TAU / 64.0;
            (cx + r * t.cos(), cy + r * t.sin())
        })
        .collect()
}

proptest! {
    #[test]
    fn divergence_matches_finite_differences(fam in any_family(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let f = fam.build().unwrap();
        let h = 1e-5;
        let fd = (f.p.eval(x + h, y) - f.p.eval(x - h, y)) / (2.0 * h) + (f.q.eval(x, y + h) - f.q.eval(x, y - h)) / (2.0 * h);
        let div = f.divergence().eval(x, y);
        prop_assert!((fd - div).abs() < 1e-6 * (1.0 + div.abs()), "{fd} vs {div}");
    }

    #[test]
    fn rotation_determinant_factors(
        fam in prop_oneof![quadratic(), quintic()],
        l1 in -2.0f64..2.0, l2 in -2.0f64..2.0, x in -3.0f64..3.0, y in -3.0f64..3.0,
    ) {
        let det = rotated_det(&fam, l1, l2, x, y).unwrap();
        let line = match fam {
            Family::Quadratic { d, f, .. } => 1.0 - d * x - f * y,
            _ => 1.0,
        };
        let want = x * x * line * (l1 - l2);
        prop_assert!((det - want).abs() < 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn system_definition_round_trips(fam in any_family()) {
        let def = SystemDef::from_system(&System::Family(fam));
        let text = serde_json::to_string(&def).unwrap();
        let back: SystemDef = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.resolve().unwrap(), System::Family(fam));
    }

    #[test]
    fn translation_closes(fam in any_family(), x0 in -2.0f64..2.0, y0 in -2.0f64..2.0) {
        let f = fam.build().unwrap();
        let g = translate(&translate(&f, x0, y0).unwrap(), -x0, -y0).unwrap();
        for (u, v) in [(&f.p, &g.p), (&f.q, &g.q)] {
            for (i, j, c) in u.terms() {
                prop_assert!((v.coeff(i, j) - c).abs() < 1e-9, "({i},{j}): {c} vs {}", v.coeff(i, j));
            }
            for (i, j, c) in v.terms() {
                prop_assert!((u.coeff(i, j) - c).abs() < 1e-9, "({i},{j}): {c}");
            }
        }
    }

    #[test]
    fn disjointness_is_symmetric(
        a in (-3.0f64..3.0, -3.0f64..3.0, 0.1f64..2.0),
        b in (-3.0f64..3.0, -3.0f64..3.0, 0.1f64..2.0),
    ) {
        let (p, q) = (circle(a.0, a.1, a.2), circle(b.0, b.1, b.2));
        prop_assert_eq!(polylines_disjoint(&p, &q), polylines_disjoint(&q, &p));
        let gap = (a.0 - b.0).hypot(a.1 - b.1);
        if gap > a.2 + b.2 + 0.05 {
            prop_assert!(polylines_disjoint(&p, &q));
        }
        if gap + a.2.min(b.2) < a.2.max(b.2) - 0.05 {
            prop_assert!(!polylines_disjoint(&p, &q));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn harmonic_return_is_identity(y in 0.05f64..20.0) {
        let s = first_return(&VectorField2::harmonic(), y, &IntegratorConfig::default()).unwrap();
        prop_assert!((s.py - y).abs() < 1e-8 * y.max(1.0));
        prop_assert!((s.t - std::f64::consts::TAU).abs() < 1e-8);
    }

    #[test]
    fn return_map_is_increasing(y1 in 0.1f64..1.2, y2 in 0.1f64..1.2) {
        prop_assume!((y1 - y2).abs() > 1e-3);
        let f = Family::QuinticLienard { a: 0.0, b: 1.0, c: -1.0 }.build().unwrap();
        let cfg = IntegratorConfig::default();
        let (p1, p2) = (first_return(&f, y1, &cfg).unwrap().py, first_return(&f, y2, &cfg).unwrap().py);
        prop_assert_eq!(y1 < y2, p1 < p2);
    }

    #[test]
    fn multiplier_formula_matches_variational(b in 0.5f64..1.5, y in 0.1f64..0.8) {
        let f = Family::QuinticLienard { a: 0.0, b, c: -1.0 }.build().unwrap();
        let cfg = IntegratorConfig::default();
        let s = first_return(&f, y, &cfg).unwrap();
        let v = pprime_variational(&f, y, &cfg).unwrap();
        prop_assert!(((s.y / s.py) * s.h.exp() - v).abs() < 1e-7 * v.abs());
    }
}
