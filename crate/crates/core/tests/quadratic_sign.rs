//! A quadratic system with a limit cycle around the origin although
//! cd(2a+f) < 0. Checked without the cycle detector: the cycle repels, so
//! backward time pulls a nearby orbit onto it, and its winding number about
//! the origin is read off the trajectory directly.

use limcyc::flow::integrate;
use limcyc::verify::quadratic_normal_form;
use limcyc::{Family, IntegratorConfig};

const A: f64 = -1.076680779336187;
const B: f64 = 0.49263738099772825;
const C: f64 = -0.5347008338295367;
const D: f64 = -0.23168434877317745;
const F: f64 = -1.4597159612904171;

fn winding_about_origin(pts: &[(f64, f64)]) -> f64 {
    let mut turn = 0.0;
    for w in pts.windows(2) {
        let (a0, a1) = (w[0].1.atan2(w[0].0), w[1].1.atan2(w[1].0));
        let mut d = a1 - a0;
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        } else if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        turn += d;
    }
    turn / std::f64::consts::TAU
}

#[test]
fn repelling_cycle_surrounds_origin_with_negative_sign_quantity() {
    let field = Family::Quadratic { a: A, b: B, c: C, d: D, f: F }.build().unwrap();
    let sign = quadratic_normal_form(&field).unwrap().sign_quantity();
    assert!(sign < -0.4, "{sign}");
    let back = field.time_reversed();
    let cfg = IntegratorConfig::default().with_max_time(400.0);

    // settle onto the cycle in reverse time
    let settle = integrate(&back, (0.0, 0.5), &cfg, None).unwrap();
    let end = settle.last();
    assert!(end.x.hypot(end.y) < 50.0, "orbit left the region: {end:?}");

    // one more stretch: the orbit is periodic and winds about the origin
    let run = integrate(&back, (end.x, end.y), &cfg.with_max_time(60.0), None).unwrap();
    let pts: Vec<(f64, f64)> = (0..=6000)
        .map(|k| {
            let u = run.state_at(k as f64 * 0.01).unwrap();
            (u[0], u[1])
        })
        .collect();
    let min_r = pts.iter().map(|p| p.0.hypot(p.1)).fold(f64::INFINITY, f64::min);
    assert!(min_r > 0.05, "orbit approached the origin: {min_r}");
    let turns = winding_about_origin(&pts);
    assert!(turns.abs() > 5.0, "only {turns} turns");

    // periodic, not a slow spiral: returns to the same radius every lap
    let dir = back.p.eval(0.0, 1.0).signum();
    let crossings: Vec<f64> = run.section_crossings(dir).unwrap().iter().map(|c| c.y).collect();
    assert!(crossings.len() >= 4);
    let spread = crossings.iter().fold(0.0f64, |m, y| m.max((y - crossings[0]).abs()));
    assert!(spread < 1e-6 * crossings[0], "section ordinates drift by {spread}");

    // forward time from just inside falls to the origin, which is stable
    let inward = integrate(&field, (0.0, 0.5 * crossings[0].min(1.0)), &cfg.with_max_time(2000.0), None).unwrap();
    let last = inward.last();
    assert!(last.x.hypot(last.y) < 1e-3, "{last:?}");
}
